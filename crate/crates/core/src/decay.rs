//! Wigner-Weisskopf decay rates of dressed eigenstates.
//!
//! Rates are amplitude rates: a state's amplitude decays as `exp(-Gamma t)`
//! and its population as `exp(-2 Gamma t)`. The couplings `g` and
//! `beta_A` used by the flat-bath formulas are memory-function values in
//! the sense `Lambda = g^2`, so every rate carries energy units.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bound_states::{BoundState, Branch};
use crate::error::{invalid, Error, Result};
use crate::model::{BathSpec, SystemParams};
use crate::oracle::{diagonalize_system, extract_dressed_state, EigenDecomposition};
use crate::report::fmt_f64;
use crate::scattering::{dispersion, ideal_amplitudes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BathRole {
    Resonator,
    Atom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MemoryShape {
    Flat(f64),
    /// Samples `(omega, Lambda)` with increasing `omega`, linearly
    /// interpolated and never extrapolated.
    Tabulated(Vec<(f64, f64)>),
}

/// Reservoir response function `Lambda(omega)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryFunction {
    pub shape: MemoryShape,
    pub role: BathRole,
}

impl MemoryFunction {
    pub fn flat(role: BathRole, value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid("lambda", format!("must be non-negative, got {value}")));
        }
        Ok(Self {
            shape: MemoryShape::Flat(value),
            role,
        })
    }

    pub fn tabulated(role: BathRole, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("memory-function table"));
        }
        if samples.iter().any(|&(w, l)| !w.is_finite() || !(l.is_finite() && l >= 0.0)) {
            return Err(invalid("lambda", "samples must be finite and non-negative"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("lambda", "sample frequencies must increase"));
        }
        Ok(Self {
            shape: MemoryShape::Tabulated(samples),
            role,
        })
    }

    /// Memory function realized by a bath: flat for the analytic kind,
    /// `g_q^2 / spacing` at each mode for a discretized one.
    pub fn from_bath(role: BathRole, bath: &BathSpec) -> Result<Self> {
        bath.validate()?;
        match bath {
            BathSpec::AnalyticFlat { lambda, .. } => Self::flat(role, *lambda),
            BathSpec::Discretized { modes, .. } => {
                let spacing = bath.mode_spacing().ok_or(Error::Empty("bath"))?;
                Self::tabulated(
                    role,
                    modes
                        .iter()
                        .map(|m| (m.frequency, m.coupling * m.coupling / spacing))
                        .collect(),
                )
            }
        }
    }

    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        match &self.shape {
            MemoryShape::Flat(v) => Ok(*v),
            MemoryShape::Tabulated(samples) => {
                let (lo, hi) = (samples[0].0, samples[samples.len() - 1].0);
                if !(lo..=hi).contains(&omega) {
                    return Err(Error::OutOfRange { omega, lo, hi });
                }
                let i = samples.partition_point(|&(w, _)| w <= omega);
                if i == samples.len() {
                    return Ok(samples[i - 1].1);
                }
                let (w0, l0) = samples[i - 1];
                let (w1, l1) = samples[i];
                Ok(l0 + (l1 - l0) * (omega - w0) / (w1 - w0))
            }
        }
    }
}

/// Which eigenstate a [`DressedState`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StateLabel {
    Scattering { k: f64 },
    Bound(Branch),
    /// Eigenvector `index` of an oracle decomposition.
    Oracle { index: usize },
}

/// Normalization convention behind a state's weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// Weights of a normalized finite-chain eigenvector; they sum to one.
    NormalizedChain,
    /// Closed-form infinite-chain scattering amplitudes. The atom weight may
    /// exceed one; the chain part is taken as its complement.
    Continuum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ChainWeights {
    /// `(j, |u(j)|^2)` per site.
    Sites(Vec<(i64, f64)>),
    /// `1 - atom_weight`, the normalization assumption of the flat-bath
    /// formula.
    Complement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DressedState {
    pub label: StateLabel,
    pub energy: f64,
    pub chain: ChainWeights,
    pub atom_weight: f64,
    pub mode: WeightMode,
    /// Set when the state was picked among equidistant candidates.
    pub tie: bool,
}

impl DressedState {
    pub fn chain_total(&self) -> f64 {
        match &self.chain {
            ChainWeights::Sites(w) => w.iter().map(|(_, x)| x).sum(),
            ChainWeights::Complement => 1.0 - self.atom_weight,
        }
    }

    /// Closed-form scattering state at `k`.
    pub fn continuum(p: &SystemParams, k: f64) -> Result<Self> {
        let atom_weight = continuum_atom_weight(p, k)?;
        Ok(Self {
            label: StateLabel::Scattering { k },
            energy: dispersion(p, k)?,
            chain: ChainWeights::Complement,
            atom_weight,
            mode: WeightMode::Continuum,
            tie: false,
        })
    }

    /// Bound state with its resummed, unit-norm weights.
    pub fn bound(p: &SystemParams, b: &BoundState) -> Self {
        let atom_weight = b.atom_weight(p);
        Self {
            label: StateLabel::Bound(b.branch),
            energy: b.omega_kappa,
            chain: ChainWeights::Complement,
            atom_weight,
            mode: WeightMode::NormalizedChain,
            tie: false,
        }
    }
}

/// `|u_ek|^2 = 4 xi^2 J^2 sin^2 k / [4 xi^2 (Omega_k - Omega)^2 sin^2 k + J^4]`.
pub fn continuum_atom_weight(p: &SystemParams, k: f64) -> Result<f64> {
    Ok(ideal_amplitudes(p, k)?.u_e.norm_sqr())
}

/// `Gamma_n = pi sum_j |u_n(j)|^2 Lambda_j(E_n) + pi |u_en|^2 Lambda_A(E_n)`.
pub fn decay_rate_general(state: &DressedState, lam_res: &MemoryFunction, lam_atom: &MemoryFunction) -> Result<f64> {
    let res = lam_res.evaluate(state.energy)?;
    let atom = lam_atom.evaluate(state.energy)?;
    Ok(PI * state.chain_total() * res + PI * state.atom_weight * atom)
}

/// `Gamma = pi g^2 + pi (beta_A^2 - g^2) |u_e|^2`.
pub fn flat_bath_rate(g: f64, beta_a: f64, atom_weight: f64) -> f64 {
    PI * g * g + PI * (beta_a * beta_a - g * g) * atom_weight
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatteringMode {
    Continuum,
    /// Weights from the normalized eigenvector of an open chain with this
    /// many sites, nearest in energy to `Omega_k`.
    NormalizedChain { n_sites: usize },
}

/// Flat-bath decay rate of the scattering state at `k`.
pub fn decay_rate_scattering(p: &SystemParams, g: f64, beta_a: f64, k: f64, mode: ScatteringMode) -> Result<f64> {
    match mode {
        ScatteringMode::Continuum => Ok(flat_bath_rate(g, beta_a, continuum_atom_weight(p, k)?)),
        ScatteringMode::NormalizedChain { n_sites } => {
            let ed = diagonalize_system(&p.with_sites(n_sites))?;
            decay_rate_scattering_with(&ed, p, g, beta_a, k)
        }
    }
}

/// Normalized-chain rate using an existing decomposition.
pub fn decay_rate_scattering_with(ed: &EigenDecomposition, p: &SystemParams, g: f64, beta_a: f64, k: f64) -> Result<f64> {
    ideal_amplitudes(p, k)?;
    let state = extract_dressed_state(ed, dispersion(p, k)?)?;
    let flat = |v: f64, role| MemoryFunction::flat(role, v * v);
    decay_rate_general(&state, &flat(g, BathRole::Resonator)?, &flat(beta_a, BathRole::Atom)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundRateMode {
    /// `pi g^2 + pi (beta^2 - g^2) [1 - xi^2 / (J^2 + 2 xi^2 sinh 2 kappa)]`.
    PaperLiteral,
    /// `pi g^2 + pi (beta^2 - g^2) |u_ek|^2` with the resummed normalization.
    Normalized,
}

pub fn decay_rate_bound(p: &SystemParams, g: f64, beta_a: f64, b: &BoundState, mode: BoundRateMode) -> f64 {
    let weight = match mode {
        BoundRateMode::PaperLiteral => {
            let xi2 = p.xi * p.xi;
            1.0 - xi2 / (p.coupling * p.coupling + 2.0 * xi2 * (2.0 * b.kappa).sinh())
        }
        BoundRateMode::Normalized => b.atom_weight(p),
    };
    flat_bath_rate(g, beta_a, weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRates {
    pub paper_literal: f64,
    pub normalized: f64,
}

pub fn bound_rates(p: &SystemParams, g: f64, beta_a: f64, b: &BoundState) -> BoundRates {
    BoundRates {
        paper_literal: decay_rate_bound(p, g, beta_a, b, BoundRateMode::PaperLiteral),
        normalized: decay_rate_bound(p, g, beta_a, b, BoundRateMode::Normalized),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub k: f64,
    pub gamma_continuum: f64,
    pub gamma_normalized: f64,
    pub atom_weight_continuum: f64,
    pub atom_weight_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySpectrum {
    pub rows: Vec<DecayRow>,
}

impl DecaySpectrum {
    pub const CSV_HEADER: &'static str =
        "k,gamma_continuum,gamma_normalized,atom_weight_continuum,atom_weight_normalized";

    pub fn to_csv(&self) -> String {
        self.to_csv_scaled(1.0)
    }

    /// CSV with rates divided by `energy_unit`.
    pub fn to_csv_scaled(&self, energy_unit: f64) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(r.k),
                fmt_f64(r.gamma_continuum / energy_unit),
                fmt_f64(r.gamma_normalized / energy_unit),
                fmt_f64(r.atom_weight_continuum),
                fmt_f64(r.atom_weight_normalized),
            );
        }
        out
    }

    /// Largest `|Gamma(k) - Gamma(pi - k)|` over the continuum column, pairing
    /// row `i` with row `n - 1 - i` (exact for grids symmetric about pi/2).
    pub fn asymmetry(&self) -> f64 {
        let n = self.rows.len();
        (0..n)
            .map(|i| (self.rows[i].gamma_continuum - self.rows[n - 1 - i].gamma_continuum).abs())
            .fold(0.0, f64::max)
    }

    /// Row where the continuum rate is largest.
    pub fn continuum_peak(&self) -> Option<&DecayRow> {
        self.rows
            .iter()
            .max_by(|a, b| a.gamma_continuum.total_cmp(&b.gamma_continuum))
    }
}

/// Both rate columns over `k_grid`; the normalized column uses one open
/// chain of `n_sites` sites.
pub fn decay_spectrum(p: &SystemParams, g: f64, beta_a: f64, k_grid: &[f64], n_sites: usize) -> Result<DecaySpectrum> {
    if k_grid.is_empty() {
        return Err(Error::Empty("k grid"));
    }
    let ed = diagonalize_system(&p.with_sites(n_sites))?;
    let rows = k_grid
        .iter()
        .map(|&k| {
            let w_cont = continuum_atom_weight(p, k)?;
            let state = extract_dressed_state(&ed, dispersion(p, k)?)?;
            Ok(DecayRow {
                k,
                gamma_continuum: flat_bath_rate(g, beta_a, w_cont),
                gamma_normalized: flat_bath_rate(g, beta_a, state.atom_weight),
                atom_weight_continuum: w_cont,
                atom_weight_normalized: state.atom_weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecaySpectrum { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound_states::solve_bound_state;
    use crate::model::discretize_flat_bath;
    use crate::scattering::interior_k_grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(omega: f64, coupling: f64) -> SystemParams {
        SystemParams::new(5.0, 1.0, omega, coupling, 201).unwrap()
    }

    #[test]
    fn equal_flat_baths_give_constant_rate() {
        let lam = MemoryFunction::flat(BathRole::Resonator, 0.02).unwrap();
        let lam_a = MemoryFunction::flat(BathRole::Atom, 0.02).unwrap();
        let ed = diagonalize_system(&p(6.0, 1.5).with_sites(41)).unwrap();
        for i in 0..ed.dimension() {
            let rate = decay_rate_general(&ed.dressed_state(i), &lam, &lam_a).unwrap();
            assert_relative_eq!(rate, PI * 0.02, epsilon = 1e-12);
        }
    }

    #[test]
    fn plane_wave_without_atom() {
        let sys = p(5.0, 0.0);
        let s = DressedState::continuum(&sys, 1.0).unwrap();
        assert_eq!(s.atom_weight, 0.0);
        let lam = MemoryFunction::flat(BathRole::Resonator, 0.01).unwrap();
        let lam_a = MemoryFunction::flat(BathRole::Atom, 0.5).unwrap();
        assert_relative_eq!(decay_rate_general(&s, &lam, &lam_a).unwrap(), PI * 0.01, epsilon = 1e-15);
    }

    #[test]
    fn continuum_resonant_value() {
        let sys = p(5.0, 1.5);
        let w = continuum_atom_weight(&sys, PI / 2.0).unwrap();
        assert_relative_eq!(w, 4.0 / 2.25, epsilon = 1e-14);
        assert!(w > 1.0);
        let rate = decay_rate_scattering(&sys, 0.1, 0.4, PI / 2.0, ScatteringMode::Continuum).unwrap();
        assert_relative_eq!(rate, PI * (0.01 + 0.15 * 4.0 / 2.25), epsilon = 1e-14);
        assert_relative_eq!(rate, 0.86918, epsilon = 1e-5);
    }

    #[test]
    fn continuum_weight_closed_form() {
        let sys = p(6.0, 1.5);
        for k in interior_k_grid(50) {
            let detuning = 5.0 - 2.0 * k.cos() - 6.0;
            let s2 = k.sin().powi(2);
            let expected = 4.0 * 2.25 * s2 / (4.0 * detuning * detuning * s2 + 2.25 * 2.25);
            assert_relative_eq!(continuum_atom_weight(&sys, k).unwrap(), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn beta_equal_g_is_flat() {
        let sys = p(6.0, 1.5);
        for k in [0.3, 1.0, 2.0 * PI / 3.0, 2.9] {
            for mode in [ScatteringMode::Continuum, ScatteringMode::NormalizedChain { n_sites: 41 }] {
                let rate = decay_rate_scattering(&sys, 0.1, 0.1, k, mode).unwrap();
                assert_relative_eq!(rate, PI * 0.01, epsilon = 1e-14);
            }
        }
        let b = solve_bound_state(&sys, Branch::Above).unwrap().unwrap();
        let r = bound_rates(&sys, 0.1, 0.1, &b);
        assert_relative_eq!(r.paper_literal, PI * 0.01, epsilon = 1e-15);
        assert_relative_eq!(r.normalized, PI * 0.01, epsilon = 1e-15);
    }

    #[test]
    fn band_edge_rejected() {
        assert!(decay_rate_scattering(&p(5.0, 1.0), 0.1, 0.4, 0.0, ScatteringMode::Continuum).is_err());
    }

    #[test]
    fn resonant_bound_rates() {
        let sys = p(5.0, 1.5);
        let b = solve_bound_state(&sys, Branch::Below).unwrap().unwrap();
        let r = bound_rates(&sys, 0.1, 0.4, &b);
        // literal formula at J^2 = 2 xi^2 sinh 2 kappa gives weight 1 - 1/(2 J^2)
        assert_relative_eq!(r.paper_literal, PI * (0.01 + 0.15 * (1.0 - 1.0 / 4.5)), epsilon = 1e-12);
        // the quoted closed form corresponds to weight 1/3 instead
        let quoted = PI * (2.0 * 0.01 + 0.16) / 3.0;
        assert_relative_eq!(quoted, 0.18850, epsilon = 1e-5);
        let k = b.kappa;
        let w = k.sinh().powi(2) / (2.0 * k).cosh();
        assert_relative_eq!(r.normalized, PI * (0.01 + 0.15 * w), epsilon = 1e-12);
    }

    #[test]
    fn tabulated_memory_function() {
        let bath = discretize_flat_bath(0.01, 5.0, 8.0, 800).unwrap();
        let m = MemoryFunction::from_bath(BathRole::Resonator, &bath).unwrap();
        assert_relative_eq!(m.evaluate(5.0).unwrap(), 0.01, epsilon = 1e-14);
        assert!(matches!(m.evaluate(9.5), Err(Error::OutOfRange { .. })));
        let t = MemoryFunction::tabulated(BathRole::Atom, vec![(0.0, 0.0), (2.0, 1.0)]).unwrap();
        assert_relative_eq!(t.evaluate(0.5).unwrap(), 0.25);
        assert_relative_eq!(t.evaluate(2.0).unwrap(), 1.0);
        assert!(MemoryFunction::flat(BathRole::Atom, -1.0).is_err());
    }

    #[test]
    fn fig2_shapes() {
        let grid = interior_k_grid(512);
        let b = decay_spectrum(&p(5.0, 1.5), 0.1, 0.4, &grid, 201).unwrap();
        assert!(b.asymmetry() < 1e-10);
        let a = decay_spectrum(&p(6.0, 1.5), 0.1, 0.4, &grid, 201).unwrap();
        assert!(a.asymmetry() > 0.1);
        let csv = a.to_csv();
        assert!(csv.starts_with(DecaySpectrum::CSV_HEADER));
        for row in &a.rows {
            assert!(row.atom_weight_normalized <= 1.0);
        }
    }

    proptest! {
        #[test]
        fn rate_is_monotone_in_beta(k in 0.05..3.0f64, b1 in 0.0..1.0f64, b2 in 0.0..1.0f64) {
            let sys = p(5.5, 1.2);
            let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
            let r_lo = decay_rate_scattering(&sys, 0.1, lo, k, ScatteringMode::Continuum).unwrap();
            let r_hi = decay_rate_scattering(&sys, 0.1, hi, k, ScatteringMode::Continuum).unwrap();
            prop_assert!(r_lo <= r_hi + 1e-15);
        }
    }

    #[test]
    fn smaller_atom_bath_prolongs_lifetime() {
        let sys = p(5.0, 1.5).with_sites(61);
        let ed = diagonalize_system(&sys).unwrap();
        let lam = MemoryFunction::flat(BathRole::Resonator, 0.04).unwrap();
        let lam_a = MemoryFunction::flat(BathRole::Atom, 0.01).unwrap();
        for i in 0..ed.dimension() {
            let s = ed.dressed_state(i);
            let rate = decay_rate_general(&s, &lam, &lam_a).unwrap();
            if s.atom_weight > 1e-12 {
                assert!(rate < PI * 0.04);
            }
        }
    }
}
