//! Photon-atom bound states outside the band.
//!
//! For a branch sign `sigma` (`+1` below the band, `-1` above) an even
//! bound state has chain amplitudes `C sigma^j exp(-kappa |j|)`, energy
//! `omega_c - 2 xi sigma cosh kappa`, and `kappa` solves
//!
//! ```text
//! f(kappa) = 2 xi sigma (Omega - omega_c + 2 xi sigma cosh kappa) sinh kappa - J^2 = 0.
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::SystemParams;

/// Which side of the band a bound state lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `sigma = +1`, energy below the band.
    Below,
    /// `sigma = -1`, energy above the band.
    Above,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Below, Branch::Above];

    pub fn sigma(self) -> f64 {
        match self {
            Branch::Below => 1.0,
            Branch::Above => -1.0,
        }
    }
}

/// How the normalization constant `C` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `C = [coth kappa + J^2/(Omega_kappa - Omega)^2]^{-1/2}`: unit total
    /// probability over the infinite chain plus the atom.
    #[default]
    Resummed,
    /// The same expression with `tanh kappa` in place of `coth kappa`.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundState {
    pub branch: Branch,
    pub kappa: f64,
    pub omega_kappa: f64,
    /// Resummed normalization constant.
    pub c: f64,
    /// `|f(kappa)|` at the returned root.
    pub residual: f64,
}

impl BoundState {
    /// Atom amplitude `C J / (Omega_kappa - Omega)`.
    pub fn atom_amplitude(&self, p: &SystemParams) -> f64 {
        self.c * p.coupling / (self.omega_kappa - p.omega)
    }

    pub fn atom_weight(&self, p: &SystemParams) -> f64 {
        self.atom_amplitude(p).powi(2)
    }
}

/// Bound-state energy for a given branch and `kappa`.
pub fn bound_energy(p: &SystemParams, branch: Branch, kappa: f64) -> f64 {
    p.omega_c - 2.0 * p.xi * branch.sigma() * kappa.cosh()
}

/// The transcendental condition whose root is `kappa`.
pub fn condition(p: &SystemParams, branch: Branch, kappa: f64) -> f64 {
    let sigma = branch.sigma();
    2.0 * p.xi * sigma * (p.omega - p.omega_c + 2.0 * p.xi * sigma * kappa.cosh()) * kappa.sinh()
        - p.coupling * p.coupling
}

/// Upper end of the root bracket.
pub fn kappa_max(p: &SystemParams) -> f64 {
    let ratio = (p.coupling / p.xi).powi(2);
    let detuning = (p.omega - p.omega_c).abs() / p.xi;
    10f64.max(10.0 * ratio).max(2.0 * detuning).asinh()
}

const SCAN_POINTS: usize = 256;
const MAX_BISECTIONS: usize = 200;

/// Solve for the bound state on one branch. Returns `None` when the
/// condition has no root, in particular for `J = 0`.
pub fn solve_bound_state(p: &SystemParams, branch: Branch) -> Result<Option<BoundState>> {
    p.validate()?;
    if p.coupling == 0.0 {
        return Ok(None);
    }
    let f = |kappa: f64| condition(p, branch, kappa);
    let upper = kappa_max(p);

    // Coarse scan to locate sign changes; the condition is negative at
    // kappa -> 0+ and should cross zero exactly once.
    let grid: Vec<f64> = (1..=SCAN_POINTS)
        .map(|i| upper * i as f64 / SCAN_POINTS as f64)
        .collect();
    let mut lo = 0.0;
    let mut f_lo = -p.coupling * p.coupling;
    let mut bracket = None;
    let mut crossings = 0;
    for &x in &grid {
        let fx = f(x);
        if (f_lo < 0.0) != (fx < 0.0) {
            crossings += 1;
            bracket.get_or_insert((lo, x));
        }
        lo = x;
        f_lo = fx;
    }
    if crossings > 1 {
        return Err(Error::ModelViolation(format!(
            "bound-state condition changes sign {crossings} times on (0, {upper}]"
        )));
    }
    let Some((mut a, mut b)) = bracket else {
        return Ok(None);
    };
    let (lo0, hi0) = (a, b);
    let mut fa = f(a);
    let mut converged = false;
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            converged = true;
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            a = m;
            b = m;
            converged = true;
            break;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if !converged && b - a > 1e-12 {
        return Err(Error::NoConvergence {
            lo: lo0,
            hi: hi0,
            iterations: MAX_BISECTIONS,
        });
    }
    let kappa = if f(a).abs() <= f(b).abs() { a } else { b };
    let c = normalize_bound(p, branch, kappa, Normalization::Resummed)?;
    Ok(Some(BoundState {
        branch,
        kappa,
        omega_kappa: bound_energy(p, branch, kappa),
        c,
        residual: f(kappa).abs(),
    }))
}

/// Normalization constant `C` of the bound state at `kappa`.
pub fn normalize_bound(p: &SystemParams, branch: Branch, kappa: f64, mode: Normalization) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    let detuning = bound_energy(p, branch, kappa) - p.omega;
    if detuning == 0.0 {
        return Err(invalid("kappa", "bound energy coincides with the atomic transition"));
    }
    let atom_term = (p.coupling / detuning).powi(2);
    let chain_term = match mode {
        Normalization::Resummed => 1.0 / kappa.tanh(),
        Normalization::PaperLiteral => kappa.tanh(),
    };
    Ok((chain_term + atom_term).powf(-0.5))
}

/// Chain amplitude `C sigma^j exp(-kappa |j|)` at lattice index `j`.
pub fn bound_profile(b: &BoundState, j: i64) -> Complex64 {
    let sign = if j.rem_euclid(2) == 1 { b.branch.sigma() } else { 1.0 };
    Complex64::new(b.c * sign * (-b.kappa * j.abs() as f64).exp(), 0.0)
}

/// Serializable summary of one bound state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub branch: Branch,
    pub kappa: f64,
    pub omega_kappa: f64,
    #[serde(rename = "C_resummed")]
    pub c_resummed: f64,
    #[serde(rename = "C_paper")]
    pub c_paper: f64,
    pub residual: f64,
    pub atom_weight: f64,
}

impl BoundReport {
    pub fn new(p: &SystemParams, b: &BoundState) -> Result<Self> {
        Ok(Self {
            branch: b.branch,
            kappa: b.kappa,
            omega_kappa: b.omega_kappa,
            c_resummed: b.c,
            c_paper: normalize_bound(p, b.branch, b.kappa, Normalization::PaperLiteral)?,
            residual: b.residual,
            atom_weight: b.atom_weight(p),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(omega: f64, coupling: f64) -> SystemParams {
        SystemParams::new(5.0, 1.0, omega, coupling, 401).unwrap()
    }

    #[test]
    fn resonant_closed_form() {
        let sys = p(5.0, 1.5);
        let expected = 0.5 * 1.125f64.asinh();
        for branch in Branch::BOTH {
            let b = solve_bound_state(&sys, branch).unwrap().unwrap();
            assert_relative_eq!(b.kappa, expected, epsilon = 1e-12);
            assert!(b.residual <= 1e-10);
            let gap = 2.0 * expected.cosh();
            assert_relative_eq!(b.omega_kappa, 5.0 - branch.sigma() * gap, epsilon = 1e-11);
        }
        assert_relative_eq!(expected, 0.48353, epsilon = 1e-5);
        assert_relative_eq!(2.0 * expected.cosh(), 2.23839, epsilon = 1e-5);
    }

    #[test]
    fn detuned_upper_branch() {
        // cosh(ln 2) = 5/4 and sinh(ln 2) = 3/4 satisfy 2 (2 cosh - 1) sinh = 2.25.
        let b = solve_bound_state(&p(6.0, 1.5), Branch::Above).unwrap().unwrap();
        assert_relative_eq!(b.kappa, 2f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(b.omega_kappa, 7.5, epsilon = 1e-11);
    }

    #[test]
    fn no_coupling_no_bound_state() {
        for branch in Branch::BOTH {
            assert_eq!(solve_bound_state(&p(5.0, 0.0), branch).unwrap(), None);
        }
    }

    #[test]
    fn profile_shape() {
        let sys = p(5.0, 1.5);
        let b = solve_bound_state(&sys, Branch::Above).unwrap().unwrap();
        assert_eq!(bound_profile(&b, 0).re, b.c);
        for j in 0..10 {
            let ratio = bound_profile(&b, j).norm() / bound_profile(&b, j + 1).norm();
            assert_relative_eq!(ratio, b.kappa.exp(), epsilon = 1e-12);
            assert_eq!(bound_profile(&b, j), bound_profile(&b, -j));
        }
        assert!(bound_profile(&b, 1).re < 0.0);
        let below = solve_bound_state(&sys, Branch::Below).unwrap().unwrap();
        assert!(bound_profile(&below, 1).re > 0.0);
    }

    #[test]
    fn resummed_normalization_by_direct_summation() {
        let sys = p(5.0, 1.5);
        for branch in Branch::BOTH {
            let b = solve_bound_state(&sys, branch).unwrap().unwrap();
            let chain: f64 = (-2000i64..=2000).map(|j| bound_profile(&b, j).norm_sqr()).sum();
            assert_relative_eq!(chain + b.atom_weight(&sys), 1.0, epsilon = 1e-12);
            // resonant atom weight sinh^2 k / cosh 2k
            let k = b.kappa;
            assert_relative_eq!(b.atom_weight(&sys), k.sinh().powi(2) / (2.0 * k).cosh(), epsilon = 1e-12);
        }
    }

    #[test]
    fn single_site_limit() {
        let sys = p(5.0, 1.5);
        let c = normalize_bound(&sys, Branch::Below, 40.0, Normalization::Resummed).unwrap();
        let detuning = bound_energy(&sys, Branch::Below, 40.0) - sys.omega;
        let limit = (1.0 + (1.5 / detuning).powi(2)).powf(-0.5);
        assert_relative_eq!(c, limit, epsilon = 1e-14);
    }

    #[test]
    fn paper_literal_differs() {
        let sys = p(5.0, 1.5);
        let b = solve_bound_state(&sys, Branch::Below).unwrap().unwrap();
        let r = BoundReport::new(&sys, &b).unwrap();
        assert!(r.c_paper > r.c_resummed);
        let json = serde_json::to_value(r).unwrap();
        for key in ["branch", "kappa", "omega_kappa", "C_resummed", "C_paper", "residual", "atom_weight"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(normalize_bound(&sys, Branch::Below, 0.0, Normalization::Resummed).is_err());
    }

    proptest! {
        #[test]
        fn roots_are_outside_band(coupling in 0.05..4.0f64, detuning in -3.0..3.0f64) {
            let sys = p(5.0 + detuning, coupling);
            for branch in Branch::BOTH {
                let b = solve_bound_state(&sys, branch).unwrap().expect("bound state exists for J > 0");
                prop_assert!((b.omega_kappa - sys.omega_c).abs() > 2.0 * sys.xi);
                prop_assert!(b.residual <= 1e-10 * (1.0 + coupling * coupling));
                prop_assert!(b.c > 0.0);
            }
        }
    }
}
