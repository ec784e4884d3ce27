//! Exponential decay-rate extraction from trajectories.
//!
//! Rates follow the amplitude convention used throughout the crate: a
//! population decaying as `exp(-2 Gamma t)` has rate `Gamma`.

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{invalid, Error, Result};

/// Fewest samples accepted inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 10;
/// Smallest population accepted inside a fit window.
pub const MIN_FIT_NORM: f64 = 1e-12;

/// Which population is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FitObservable {
    /// Chain plus atom probability.
    #[default]
    SystemNorm,
    /// `|<psi(0)|psi(t)>|^2`.
    Survival,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Amplitude decay rate.
    pub rate: f64,
    pub window: (f64, f64),
    /// RMS residual of the straight-line fit to the log population.
    pub rms_residual: f64,
    pub samples: usize,
    pub observable: FitObservable,
    pub convention: String,
}

/// Default window `[0.05, 0.5] / gamma_est`.
pub fn default_window(gamma_est: f64) -> Result<(f64, f64)> {
    if !(gamma_est > 0.0 && gamma_est.is_finite()) {
        return Err(invalid("gamma_est", format!("must be positive, got {gamma_est}")));
    }
    Ok((0.05 / gamma_est, 0.5 / gamma_est))
}

/// Fit `log(system_norm)` on `window`.
pub fn fit_decay(traj: &Trajectory, window: (f64, f64)) -> Result<DecayFit> {
    fit_decay_observable(traj, window, FitObservable::SystemNorm)
}

pub fn fit_decay_observable(traj: &Trajectory, window: (f64, f64), observable: FitObservable) -> Result<DecayFit> {
    let (t0, t1) = window;
    if t0.is_nan() || t1.is_nan() || t0 >= t1 {
        return Err(Error::Fit(format!("empty window [{t0}, {t1}]")));
    }
    let (first, last) = match (traj.times.first(), traj.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Empty("trajectory")),
    };
    if t0 < first || t1 > last {
        return Err(Error::Fit(format!(
            "window [{t0}, {t1}] is not inside the trajectory span [{first}, {last}]"
        )));
    }
    if let Some(tr) = traj.recurrence_time {
        if t1 >= tr {
            return Err(Error::Fit(format!(
                "window end {t1} is not below the bath recurrence time {tr}"
            )));
        }
    }
    let values = match observable {
        FitObservable::SystemNorm => &traj.system_norm,
        FitObservable::Survival => &traj.survival,
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in traj.times.iter().zip(values) {
        if t < t0 || t > t1 {
            continue;
        }
        if v < MIN_FIT_NORM {
            return Err(Error::Fit(format!("population {v} at t = {t} is below {MIN_FIT_NORM}")));
        }
        xs.push(t);
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "window holds {} samples, at least {MIN_FIT_SAMPLES} required",
            xs.len()
        )));
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(DecayFit {
        rate: -slope / 2.0,
        window,
        rms_residual: rms,
        samples: xs.len(),
        observable,
        convention: "amplitude-rate".into(),
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, uniform_grid, EvolveOptions};
    use crate::model::{build_single_mode_with_bath, discretize_flat_bath, BasisLabel};
    use std::f64::consts::PI;

    fn synthetic(gamma: f64, t_max: f64, n: usize, recurrence: Option<f64>) -> Trajectory {
        let times = uniform_grid(t_max, n);
        let norm: Vec<f64> = times.iter().map(|t| (-2.0 * gamma * t).exp()).collect();
        Trajectory {
            amplitudes: Vec::new(),
            final_state: Vec::new(),
            labels: Vec::new(),
            system_norm: norm.clone(),
            total_norm: vec![1.0; times.len()],
            chain_norm: norm.clone(),
            atom_pop: vec![0.0; times.len()],
            bath_norm_res: norm.iter().map(|x| 1.0 - x).collect(),
            bath_norm_atom: vec![0.0; times.len()],
            survival: norm,
            recurrence_time: recurrence,
            hermitian: true,
            times,
        }
    }

    #[test]
    fn recovers_exact_exponential() {
        let traj = synthetic(0.0314, 40.0, 400, None);
        let fit = fit_decay(&traj, default_window(0.0314).unwrap()).unwrap();
        assert!((fit.rate - 0.0314).abs() < 1e-10 * 0.0314);
        assert!(fit.rms_residual < 1e-12);
        assert_eq!(fit.convention, "amplitude-rate");
    }

    #[test]
    fn rejects_bad_windows() {
        let traj = synthetic(0.1, 10.0, 100, Some(8.0));
        assert!(matches!(fit_decay(&traj, (1.0, 9.0)), Err(Error::Fit(_))));
        assert!(matches!(fit_decay(&traj, (1.0, 1.5)), Err(Error::Fit(_))));
        assert!(matches!(fit_decay(&traj, (2.0, 1.0)), Err(Error::Fit(_))));
        assert!(matches!(fit_decay(&traj, (-1.0, 5.0)), Err(Error::Fit(_))));
        let dead = synthetic(20.0, 10.0, 100, None);
        assert!(matches!(fit_decay(&dead, (1.0, 5.0)), Err(Error::Fit(_))));
        assert!(default_window(0.0).is_err());
    }

    #[test]
    fn single_mode_wigner_weisskopf() {
        let lambda = 0.01;
        let bath = discretize_flat_bath(lambda, 5.0, 8.0, 800).unwrap();
        let h = build_single_mode_with_bath(5.0, &bath).unwrap();
        let t_end = 0.5 / (PI * lambda);
        let t = uniform_grid(t_end, 200);
        let traj = evolve(&h, BasisLabel::ResonatorSite(0), &t, &EvolveOptions::default()).unwrap();
        let fit = fit_decay(&traj, (0.0, t_end)).unwrap();
        let expected = PI * lambda;
        assert!((fit.rate - expected).abs() < 0.05 * expected, "{} vs {expected}", fit.rate);
    }
}
