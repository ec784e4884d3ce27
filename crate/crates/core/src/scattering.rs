//! Bloch dispersion and single-photon reflection/transmission amplitudes.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DissipationRates, SystemParams};
use crate::report::fmt_f64;

/// Stationary scattering state at wavenumber `k` for a photon incident from
/// the left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringSolution {
    pub k: f64,
    pub omega_k: f64,
    /// Reflection amplitude.
    pub r: Complex64,
    /// Transmission amplitude.
    pub s: Complex64,
    /// Atom amplitude `u_ek`.
    pub u_e: Complex64,
    /// `omega_c - Omega_k`.
    pub v_k: f64,
    /// Green-function value `J / (Omega_k - Omega)`; infinite on resonance.
    pub g_k: f64,
    /// Set when `s` was defined as `1 + r` rather than derived from the
    /// stationary equations (the dissipative case).
    pub transmission_derived: bool,
}

impl ScatteringSolution {
    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn transmittance(&self) -> f64 {
        self.s.norm_sqr()
    }
}

/// `Omega_k = omega_c - 2 xi cos k` for `k` in `[0, pi]`.
pub fn dispersion(p: &SystemParams, k: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&k) {
        return Err(Error::WavenumberOutOfRange { k, range: "[0, pi]" });
    }
    Ok(p.omega_c - 2.0 * p.xi * k.cos())
}

/// Wavenumber in `[0, pi]` of a band energy.
pub fn inverse_dispersion(p: &SystemParams, energy: f64) -> Result<f64> {
    let (lower, upper) = p.band();
    if !(lower..=upper).contains(&energy) {
        return Err(Error::OutOfBand { energy, lower, upper });
    }
    let x = ((p.omega_c - energy) / (2.0 * p.xi)).clamp(-1.0, 1.0);
    Ok(x.acos())
}

/// Reject `k` outside `[0, pi]` and the band edges themselves.
pub fn check_interior(k: f64) -> Result<()> {
    if !(0.0..=PI).contains(&k) {
        return Err(Error::WavenumberOutOfRange { k, range: "(0, pi)" });
    }
    if k.sin() <= f64::EPSILON || k == 0.0 || k == PI {
        return Err(Error::DegenerateMode { k });
    }
    Ok(())
}

/// Amplitudes of the lossless system.
///
/// `u_k(0)` is identified with the transmitted amplitude, which makes
/// `r = s - 1` and `u_e = G_k s`. The atom amplitude is evaluated as
/// `2 i xi J sin k / D`, finite also on resonance.
pub fn ideal_amplitudes(p: &SystemParams, k: f64) -> Result<ScatteringSolution> {
    p.validate()?;
    check_interior(k)?;
    let omega_k = p.omega_c - 2.0 * p.xi * k.cos();
    let detuning = omega_k - p.omega;
    let j2 = p.coupling * p.coupling;
    let two_xi_sin = 2.0 * p.xi * k.sin();
    let numerator = Complex64::new(0.0, two_xi_sin * detuning);
    let denominator = numerator - j2;
    let s = numerator / denominator;
    let r = Complex64::new(j2, 0.0) / denominator;
    let u_e = Complex64::new(0.0, two_xi_sin * p.coupling) / denominator;
    Ok(ScatteringSolution {
        k,
        omega_k,
        r,
        s,
        u_e,
        v_k: p.omega_c - omega_k,
        g_k: p.coupling / detuning,
        transmission_derived: false,
    })
}

/// Reflection amplitude of the damped chain,
/// `r = J^2 / [2 i xi sin k (Omega_k - Omega) - (gamma_A - gamma_c) 2 xi sin k - J^2]`.
///
/// The transmitted amplitude is reported as `1 + r`; `|r|^2 + |s|^2` may be
/// below one because probability leaks into the reservoirs.
pub fn dissipative_reflection(p: &SystemParams, d: &DissipationRates, k: f64) -> Result<ScatteringSolution> {
    p.validate()?;
    d.validate()?;
    check_interior(k)?;
    let omega_k = p.omega_c - 2.0 * p.xi * k.cos();
    let detuning = omega_k - p.omega;
    let j2 = p.coupling * p.coupling;
    let two_xi_sin = 2.0 * p.xi * k.sin();
    let denominator = Complex64::new(-(d.gamma_a - d.gamma_c) * two_xi_sin - j2, two_xi_sin * detuning);
    let r = Complex64::new(j2, 0.0) / denominator;
    let s = 1.0 + r;
    // Same closed form as the ideal case with the atom detuning shifted by
    // i (gamma_A - gamma_c).
    let u_e = Complex64::new(0.0, two_xi_sin * p.coupling) / denominator;
    Ok(ScatteringSolution {
        k,
        omega_k,
        r,
        s,
        u_e,
        v_k: p.omega_c - omega_k,
        g_k: p.coupling / detuning,
        transmission_derived: true,
    })
}

/// One row of a reflection/transmission scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub k: f64,
    pub omega_k: f64,
    pub reflectance: f64,
    pub transmittance: f64,
    pub arg_r: f64,
    pub arg_s: f64,
    pub atom_population: f64,
}

impl From<&ScatteringSolution> for SpectrumRow {
    fn from(s: &ScatteringSolution) -> Self {
        Self {
            k: s.k,
            omega_k: s.omega_k,
            reflectance: s.reflectance(),
            transmittance: s.transmittance(),
            arg_r: s.r.arg(),
            arg_s: s.s.arg(),
            atom_population: s.u_e.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub rows: Vec<SpectrumRow>,
    /// True when transmission columns are `|1 + r|^2` by definition.
    pub transmission_derived: bool,
}

impl SpectrumTable {
    pub const CSV_HEADER: &'static str = "k,omega_k,R,T,arg_r,arg_s,P_e";

    pub fn to_csv(&self) -> String {
        self.to_csv_scaled(1.0)
    }

    /// CSV with energies divided by `energy_unit`.
    pub fn to_csv_scaled(&self, energy_unit: f64) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_f64(r.k),
                fmt_f64(r.omega_k / energy_unit),
                fmt_f64(r.reflectance),
                fmt_f64(r.transmittance),
                fmt_f64(r.arg_r),
                fmt_f64(r.arg_s),
                fmt_f64(r.atom_population),
            );
        }
        out
    }

    /// Row with the largest reflectance.
    /// Highest interior local maximum of the reflectance. Band-edge rises
    /// (where the group velocity vanishes) are not peaks.
    pub fn peak(&self) -> Option<&SpectrumRow> {
        self.peak_index().map(|i| &self.rows[i])
    }

    fn peak_index(&self) -> Option<usize> {
        (1..self.rows.len().saturating_sub(1))
            .filter(|&i| {
                let r = self.rows[i].reflectance;
                r >= self.rows[i - 1].reflectance && r >= self.rows[i + 1].reflectance
            })
            .max_by(|&a, &b| self.rows[a].reflectance.total_cmp(&self.rows[b].reflectance).then(b.cmp(&a)))
    }

    /// Full width at half maximum (in `k`) of the reflectance peak, by linear
    /// interpolation of the half-maximum crossings around the peak. `None`
    /// when there is no interior peak or the reflectance stays above half
    /// maximum up to either end of the grid.
    pub fn reflectance_fwhm(&self) -> Option<f64> {
        let ip = self.peak_index()?;
        let peak = &self.rows[ip];
        let half = 0.5 * peak.reflectance;
        let cross = |a: &SpectrumRow, b: &SpectrumRow| {
            a.k + (half - a.reflectance) * (b.k - a.k) / (b.reflectance - a.reflectance)
        };
        let left = (1..=ip)
            .rev()
            .find(|&i| self.rows[i - 1].reflectance < half)
            .map(|i| cross(&self.rows[i - 1], &self.rows[i]))?;
        let right = (ip..self.rows.len() - 1)
            .find(|&i| self.rows[i + 1].reflectance < half)
            .map(|i| cross(&self.rows[i], &self.rows[i + 1]))?;
        Some(right - left)
    }
}

/// `n` wavenumbers `pi m / (n + 1)`, `m = 1..=n`, strictly inside the band.
pub fn interior_k_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|m| PI * m as f64 / (n + 1) as f64).collect()
}

/// Scan `k_grid` with the ideal amplitudes, or the dissipative ones when
/// `d` is given. Rows keep the grid order.
pub fn scan_spectrum(p: &SystemParams, d: Option<&DissipationRates>, k_grid: &[f64]) -> Result<SpectrumTable> {
    if k_grid.is_empty() {
        return Err(Error::Empty("k grid"));
    }
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(crate::error::invalid("k_grid", "must be strictly increasing"));
    }
    let rows = k_grid
        .par_iter()
        .map(|&k| {
            let sol = match d {
                Some(d) => dissipative_reflection(p, d, k)?,
                None => ideal_amplitudes(p, k)?,
            };
            Ok(SpectrumRow::from(&sol))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable {
        rows,
        transmission_derived: d.is_some(),
    })
}

/// Reflectance and transmittance averaged over a Gaussian momentum
/// distribution `exp(-(k - k0)^2 / (2 sigma_k^2))` truncated to `(0, pi)`.
pub fn momentum_averaged(
    p: &SystemParams,
    d: Option<&DissipationRates>,
    k0: f64,
    sigma_k: f64,
) -> Result<(f64, f64)> {
    let lo = (k0 - 8.0 * sigma_k).max(1e-9);
    let hi = (k0 + 8.0 * sigma_k).min(PI - 1e-9);
    let n = 4001;
    let h = (hi - lo) / (n - 1) as f64;
    let (mut w_sum, mut r_sum, mut t_sum) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let k = lo + i as f64 * h;
        // Simpson weights
        let simpson = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let w = simpson * (-(k - k0).powi(2) / (2.0 * sigma_k * sigma_k)).exp();
        let sol = match d {
            Some(d) => dissipative_reflection(p, d, k)?,
            None => ideal_amplitudes(p, k)?,
        };
        w_sum += w;
        r_sum += w * sol.reflectance();
        t_sum += w * sol.transmittance();
    }
    Ok((r_sum / w_sum, t_sum / w_sum))
}
