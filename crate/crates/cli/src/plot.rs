//! Gnuplot scripts written next to the CSVs they plot.

use crate::Units;

fn energy_label(units: Units, symbol: &str) -> String {
    match units {
        Units::Xi => format!("{symbol} / xi"),
        Units::Raw => symbol.to_string(),
    }
}

fn header(output: &str) -> String {
    format!(
        "# Run with: gnuplot <this file>\nset datafile separator ','\nset key autotitle columnhead\n\
         set terminal pngcairo size 900,600\nset output '{output}'\n"
    )
}

pub fn dispersion(units: Units) -> String {
    format!(
        "{}set xlabel 'k'\nset ylabel '{}'\nset xrange [0:pi]\nplot 'dispersion.csv' using 1:2 with lines lw 2 title 'omega_k'\n",
        header("dispersion.png"),
        energy_label(units, "omega_k")
    )
}

pub fn spectrum() -> String {
    format!(
        "{}set xlabel 'k'\nset ylabel 'probability'\nset xrange [0:pi]\nset yrange [0:1.05]\n\
         plot 'spectrum.csv' using 1:3 with lines lw 2 title '|r|^2', \\\n     \
         'spectrum.csv' using 1:4 with lines lw 2 dt 2 title '|s|^2'\n",
        header("spectrum.png")
    )
}

pub fn decay(units: Units, csv: &str, png: &str, title: &str) -> String {
    format!(
        "{}set title '{title}'\nset xlabel 'k'\nset ylabel '{}'\nset xrange [0:pi]\n\
         plot '{csv}' using 1:2 with lines lw 2 title 'continuum', \\\n     \
         '{csv}' using 1:3 with points pt 7 ps 0.4 title 'normalized chain'\n",
        header(png),
        energy_label(units, "Gamma")
    )
}

pub fn trajectory(units: Units) -> String {
    let t = match units {
        Units::Xi => "xi t",
        Units::Raw => "t",
    };
    format!(
        "{}set xlabel '{t}'\nset ylabel 'probability'\n\
         plot for [c=2:6] 'trajectory.csv' using 1:c with lines lw 2\n",
        header("trajectory.png")
    )
}

/// Four series of `fig3.csv`, each selected by its label in column 1.
pub fn fig3(series: &[(&str, &str)]) -> String {
    let mut s = format!(
        "{}set xlabel 'k'\nset ylabel '|r|^2'\nset xrange [0:pi]\nset yrange [0:1.05]\nplot ",
        header("fig3.png")
    );
    let lines: Vec<String> = series
        .iter()
        .map(|(label, style)| {
            format!("'fig3.csv' using 2:(strcol(1) eq '{label}' ? $4 : 1/0) with lines {style} title '{label}'")
        })
        .collect();
    s.push_str(&lines.join(", \\\n     "));
    s.push('\n');
    s
}
