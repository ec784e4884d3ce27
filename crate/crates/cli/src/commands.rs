//! Subcommand execution and output files.

use std::path::PathBuf;

use crw_qed::bound_states::solve_bound_state;
use crw_qed::decay::{bound_rates, decay_spectrum};
use crw_qed::dynamics::{
    bound_decay_comparison, embed_system_vector, evolve, uniform_grid, wavepacket_scatter, AdjudicationConfig, Loss,
};
use crw_qed::model::{
    build_effective_hamiltonian, build_system_hamiltonian, build_total_hamiltonian, discretize_flat_bath,
};
use crw_qed::oracle::diagonalize_system;
use crw_qed::report::fmt_f64;
use crw_qed::scattering::{dispersion, interior_k_grid, momentum_averaged, scan_spectrum};
use crw_qed::{
    BasisLabel, BoundReport, Branch, DissipationRates, EvolveOptions, HamiltonianMatrix, Method, SystemParams,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::{plot, usage, MethodName, Units};

/// Environment variable that overrides the worker count.
pub const THREADS_ENV: &str = "CRW_QED_THREADS";

/// Dissipative reflection presets: label, gnuplot style, `(gamma_c, gamma_A, J, omega_c, Omega)`.
pub const FIG3_PRESETS: [(&str, &str, [f64; 5]); 4] = [
    ("blue-solid", "lw 2 lc rgb 'blue'", [0.1, 0.4, 0.8, 5.0, 5.0]),
    ("red-dot-dashed", "lw 2 dt 4 lc rgb 'red'", [0.1, 0.4, 1.5, 5.0, 5.0]),
    ("black-dashed", "lw 2 dt 2 lc rgb 'black'", [0.1, 0.4, 1.5, 5.0, 6.0]),
    ("green-dotted", "lw 2 dt 3 lc rgb 'dark-green'", [0.1, 0.1, 1.5, 5.0, 6.0]),
];

/// Decay-lineshape panels: file stem, `omega_c`, `Omega`; `J = 1.5`, `g = 0.1`,
/// `beta_A = 0.4`, `xi = 1`.
pub const FIG2_PANELS: [(&str, f64, f64); 2] = [("fig2a", 5.0, 6.0), ("fig2b", 5.0, 5.0)];
const FIG2_COUPLING: f64 = 1.5;
const FIG2_G: f64 = 0.1;
const FIG2_BETA: f64 = 0.4;

struct Out {
    dir: PathBuf,
}

impl Out {
    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(path, e))
    }

    fn json(&self, name: &str, value: &Value) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        self.write(name, s)
    }
}

/// Divisor for energies and rates and multiplier for times.
fn energy_unit(cfg: &RunConfig, xi: f64) -> f64 {
    match cfg.units() {
        Units::Xi => xi,
        Units::Raw => 1.0,
    }
}

fn worker_count(cfg: &RunConfig) -> CliResult<Option<usize>> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
        if n == 0 {
            return Err(usage(format!("{THREADS_ENV} must be positive")));
        }
        return Ok(Some(n));
    }
    match cfg.get_usize("threads") {
        Some(0) => Err(usage("--threads must be positive")),
        other => Ok(other),
    }
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    if let Some(n) = worker_count(cfg)? {
        // Only the first pool request in a process can succeed; later ones
        // keep the existing pool, which does not change any output.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = Out { dir: cfg.output() };
    std::fs::create_dir_all(&out.dir).map_err(|e| CliError::io(&out.dir, e))?;
    out.write("config.resolved.json", cfg.to_json())?;
    match cfg.subcommand.as_str() {
        "dispersion" => run_dispersion(cfg, &out),
        "scatter" => run_scatter(cfg, &out),
        "bound" => run_bound(cfg, &out),
        "decay" => run_decay(cfg, &out),
        "evolve" => run_evolve(cfg, &out),
        "wavepacket" => run_wavepacket(cfg, &out),
        "reproduce-fig2" => run_fig2(cfg, &out),
        "reproduce-fig3" => run_fig3(cfg, &out),
        other => Err(usage(format!("unknown subcommand `{other}`"))),
    }
}

fn run_dispersion(cfg: &RunConfig, out: &Out) -> CliResult<()> {
    let p = cfg.system()?;
    let unit = energy_unit(cfg, p.xi);
    let mut csv = String::from("k,omega_k\n");
    for k in interior_k_grid(cfg.usize("k-points")) {
        csv.push_str(&format!("{},{}\n", fmt_f64(k), fmt_f64(dispersion(&p, k)? / unit)));
    }
    out.write("dispersion.csv", csv)?;
    out.write("dispersion.gp", plot::dispersion(cfg.units()))
}

fn run_scatter(cfg: &RunConfig, out: &Out) -> CliResult<()> {
    let p = cfg.system()?;
    let d = cfg.dissipation()?;
    let unit = energy_unit(cfg, p.xi);
    let table = scan_spectrum(&p, d.as_ref(), &interior_k_grid(cfg.usize("k-points")))?;
    out.write("spectrum.csv", table.to_csv_scaled(unit))?;
    let peak = table.peak().map(|r| {
        json!({
            "k": r.k,
            "omega_k": r.omega_k / unit,
            "R": r.reflectance,
        })
    });
    out.json(
        "spectrum.json",
        &json!({
            "dissipative": d.is_some(),
            "transmission_derived": table.transmission_derived,
            "units": <&str>::from(cfg.units()),
            "k_points": table.rows.len(),
            "peak": peak,
            "fwhm_k": table.reflectance_fwhm(),
        }),
    )?;
    out.write("spectrum.gp", plot::spectrum())
}

fn run_bound(cfg: &RunConfig, out: &Out) -> CliResult<()> {
    let p = cfg.system()?;
    let unit = energy_unit(cfg, p.xi);
    let ed = diagonalize_system(&p)?;
    let classes = ed.classify_states()?;
    let mut states = Vec::new();
    for branch in Branch::BOTH {
        let Some(b) = solve_bound_state(&p, branch)? else {
            continue;
        };
        let mut report = serde_json::to_value(BoundReport::new(&p, &b)?).expect("serializable");
        report["omega_kappa"] = json!(b.omega_kappa / unit);
        let oracle = match branch {
            Branch::Below => classes.below,
            Branch::Above => classes.above,
        };
        report["oracle_energy"] = json!(oracle.map(|i| ed.energies[i] / unit));
        report["oracle_deviation"] = json!(oracle.map(|i| (ed.energies[i] - b.omega_kappa).abs() / unit));
        let rates = bound_rates(&p, cfg.f64("g"), cfg.f64("beta"), &b);
        report["gamma_paper_literal"] = json!(rates.paper_literal / unit);
        report["gamma_normalized"] = json!(rates.normalized / unit);
        states.push(report);
    }
    out.json(
        "bound_states.json",
        &json!({
            "units": <&str>::from(cfg.units()),
            "oracle_sites": p.n_sites,
            "states": states,
        }),
    )?;
    if cfg.switch("adjudicate") {
        let acfg = AdjudicationConfig {
            g: cfg.f64("g"),
            beta_a: cfg.f64("beta"),
            modes: cfg.usize("bath-modes"),
            bandwidth: cfg.f64("bandwidth"),
            ..AdjudicationConfig::default()
        };
        let report = bound_decay_comparison(&p, &acfg)?;
        out.write("adjudication.csv", report.to_csv())?;
        out.write("adjudication.md", report.to_markdown())?;
    }
    Ok(())
}

fn run_decay(cfg: &RunConfig, out: &Out) -> CliResult<()> {
    let p = cfg.system()?;
    let unit = energy_unit(cfg, p.xi);
    let (g, beta) = (cfg.f64("g"), cfg.f64("beta"));
    let spectrum = decay_spectrum(&p, g, beta, &interior_k_grid(cfg.usize("k-points")), p.n_sites)?;
    out.write("decay_spectrum.csv", spectrum.to_csv_scaled(unit))?;
    out.write(
        "decay_spectrum.gp",
        plot::decay(cfg.units(), "decay_spectrum.csv", "decay_spectrum.png", "decay rate"),
    )
}

fn parse_initial(
    spec: &str,
    p: &SystemParams,
    h: &HamiltonianMatrix,
) -> CliResult<Vec<Complex64>> {
    let basis = |label: BasisLabel| -> CliResult<Vec<Complex64>> {
        let idx = h
            .index_of(label)
            .ok_or_else(|| usage(format!("--initial {spec}: no such basis state")))?;
        let mut v = vec![Complex64::new(0.0, 0.0); h.dimension()];
        v[idx] = Complex64::new(1.0, 0.0);
        Ok(v)
    };
    let eigen = |pick: &dyn Fn(&crw_qed::EigenDecomposition) -> CliResult<usize>| -> CliResult<Vec<Complex64>> {
        let ed = diagonalize_system(p)?;
        let index = pick(&ed)?;
        Ok(embed_system_vector(h, &ed.labels, &ed.state(index))?)
    };
    match spec {
        "atom" => basis(BasisLabel::AtomExcited),
        "bound-below" | "bound-above" => eigen(&|ed| {
            let classes = ed.classify_states()?;
            let slot = if spec == "bound-below" { classes.below } else { classes.above };
            slot.ok_or_else(|| usage(format!("--initial {spec}: this chain has no such bound state")))
        }),
        _ => {
            if let Some(j) = spec.strip_prefix("site:") {
                let j: i64 = j.parse().map_err(|_| usage(format!("--initial {spec}: bad site index")))?;
                basis(BasisLabel::ResonatorSite(j))
            } else if let Some(i) = spec.strip_prefix("eigen:") {
                let i: usize = i.parse().map_err(|_| usage(format!("--initial {spec}: bad eigenstate index")))?;
                eigen(&|ed| {
                    if i < ed.dimension() {
                        Ok(i)
                    } else {
                        Err(usage(format!("--initial {spec}: only {} eigenstates", ed.dimension())))
                    }
                })
            } else {
                Err(usage(format!(
                    "--initial expects atom, site:<j>, eigen:<index>, bound-below or bound-above, got `{spec}`"
                )))
            }
        }
    }
}

fn run_evolve(cfg: &RunConfig, out: &Out) -> CliResult<()> {
    let p = cfg.system()?;
    let d = cfg.dissipation()?;
    let modes = cfg.usize("bath-modes");
    if d.is_some() && modes > 0 {
        return Err(usage("effective losses (--gamma-c/--gamma-a) and explicit baths (--bath-modes) are exclusive"));
    }
    let h = match (&d, modes) {
        (Some(d), _) => build_effective_hamiltonian(&p, d)?,
        (None, 0) => build_system_hamiltonian(&p)?,
        (None, m) => {
            let (g, beta, w) = (cfg.f64("g"), cfg.f64("beta"), cfg.f64("bandwidth"));
            let res = discretize_flat_bath(g * g, p.omega_c, w, m)?;
            let atom = discretize_flat_bath(beta * beta, p.omega_c, w, m)?;
            build_total_hamiltonian(&p, &res, &atom)?
        }
    };
    let t_max = cfg.f64("t-max");
    if t_max <= 0.0 {
        return Err(usage("--t-max must be positive"));
    }
    let t_points = cfg.usize("t-points");
    if t_points == 0 {
        return Err(usage("--t-points must be positive"));
    }
    let method = match cfg.method() {
        MethodName::Adaptive => Method::default(),
        MethodName::FixedStep => Method::FixedStep { dt: cfg.f64("dt") },
        MethodName::Chebyshev if !h.is_hermitian() => {
            return Err(usage("--method chebyshev needs a Hermitian build; drop --gamma-c/--gamma-a"));
        }
        MethodName::Chebyshev => Method::Chebyshev,
    };
    let psi0 = parse_initial(cfg.text("initial"), &p, &h)?;
    let mut opts = EvolveOptions::default().with_method(method);
    if cfg.switch("amplitudes") {
        opts = opts.recording();
    }
    let traj = evolve(&h, psi0, &uniform_grid(t_max, t_points), &opts)?;

    let time_unit = 1.0 / energy_unit(cfg, p.xi);
    out.write("trajectory.csv", traj.to_csv_scaled(time_unit))?;
    out.json(
        "trajectory.json",
        &json!({
            "units": <&str>::from(cfg.units()),
            "dimension": traj.labels.len(),
            "hermitian": traj.hermitian,
            "method": <&str>::from(cfg.method()),
            "samples": traj.times.len(),
            "total_norm_initial": traj.total_norm.first(),
            "total_norm_final": traj.total_norm.last(),
            "max_norm_drift": traj.max_norm_drift(),
            "recurrence_time": traj.recurrence_time.map(|t| t / time_unit),
        }),
    )?;
    if cfg.switch("amplitudes") {
        let path = out.dir.join("amplitudes.bin");
        let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        traj.write_amplitudes(&mut w).map_err(|e| CliError::io(&path, e))?;
        std::io::Write::flush(&mut w).map_err(|e| CliError::io(&path, e))?;
    }
    out.write("trajectory.gp", plot::trajectory(cfg.units()))
}

fn run_wavepacket(cfg: &RunConfig, out: &Out) -> CliResult<()> {
    let p = cfg.system()?;
    let d = cfg.dissipation()?;
    let (k0, width) = (cfg.f64("k0"), cfg.f64("width"));
    let loss = match d {
        Some(d) => Loss::Effective(d),
        None => Loss::None,
    };
    let result = wavepacket_scatter(&p, &loss, k0, width)?;
    let (r_avg, t_avg) = momentum_averaged(&p, d.as_ref(), k0, 1.0 / (2.0 * width))?;
    let time_unit = 1.0 / energy_unit(cfg, p.xi);
    let mut value = serde_json::to_value(&result).expect("serializable");
    value["duration"] = json!(result.duration / time_unit);
    value["units"] = json!(<&str>::from(cfg.units()));
    value["analytic_reflectance"] = json!(r_avg);
    value["analytic_transmittance"] = json!(t_avg);
    out.json("wavepacket.json", &value)
}

fn fig2_params(omega_c: f64, omega: f64, n_sites: usize) -> CliResult<SystemParams> {
    SystemParams::new(omega_c, 1.0, omega, FIG2_COUPLING, n_sites).map_err(|e| usage(e.to_string()))
}

fn run_fig2(cfg: &RunConfig, out: &Out) -> CliResult<()> {
    let grid = interior_k_grid(cfg.usize("k-points"));
    let n_sites = cfg.usize("n-sites");
    let panels = FIG2_PANELS
        .par_iter()
        .map(|&(stem, omega_c, omega)| {
            let p = fig2_params(omega_c, omega, n_sites)?;
            let s = decay_spectrum(&p, FIG2_G, FIG2_BETA, &grid, n_sites)?;
            Ok((stem, omega_c, omega, s.to_csv_scaled(energy_unit(cfg, p.xi))))
        })
        .collect::<CliResult<Vec<_>>>()?;
    for (stem, omega_c, omega, csv) in panels {
        out.write(&format!("{stem}.csv"), csv)?;
        let title = format!("omega_c = {omega_c}, Omega = {omega}");
        out.write(
            &format!("{stem}.gp"),
            plot::decay(cfg.units(), &format!("{stem}.csv"), &format!("{stem}.png"), &title),
        )?;
    }
    Ok(())
}

/// `fig3.csv`: the spectrum columns prefixed by the preset label.
fn run_fig3(cfg: &RunConfig, out: &Out) -> CliResult<()> {
    let grid = interior_k_grid(cfg.usize("k-points"));
    let blocks = FIG3_PRESETS
        .par_iter()
        .map(|&(label, _, [gamma_c, gamma_a, coupling, omega_c, omega])| {
            let p = SystemParams::new(omega_c, 1.0, omega, coupling, 3).map_err(|e| usage(e.to_string()))?;
            let d = DissipationRates::new(gamma_c, gamma_a).map_err(|e| usage(e.to_string()))?;
            let table = scan_spectrum(&p, Some(&d), &grid)?;
            let csv = table.to_csv_scaled(energy_unit(cfg, p.xi));
            let body: String = csv.lines().skip(1).map(|l| format!("{label},{l}\n")).collect();
            Ok(body)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut csv = format!("series,{}\n", crw_qed::SpectrumTable::CSV_HEADER);
    blocks.iter().for_each(|b| csv.push_str(b));
    out.write("fig3.csv", csv)?;
    let series: Vec<(&str, &str)> = FIG3_PRESETS.iter().map(|(l, s, _)| (*l, *s)).collect();
    out.write("fig3.gp", plot::fig3(&series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crw_qed::scattering::dissipative_reflection;
    use std::f64::consts::PI;

    #[test]
    fn fig3_presets_match_the_caption_values() {
        let (_, _, [gc, ga, j, wc, om]) = FIG3_PRESETS[0];
        let p = SystemParams::new(wc, 1.0, om, j, 3).unwrap();
        let d = DissipationRates::new(gc, ga).unwrap();
        let r = dissipative_reflection(&p, &d, PI / 2.0).unwrap().reflectance();
        assert!((r - 0.4096 / 1.5376).abs() < 1e-12);
    }
}
