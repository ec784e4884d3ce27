//! Time-domain evolution in the single-excitation sector.
//!
//! * [`bessel`]: closed-form propagation of the bare damped chain.
//! * [`evolve`] / [`evolve_effective`]: integration of `i dpsi/dt = H psi`
//!   for any [`HamiltonianMatrix`], Hermitian (system plus discretized
//!   baths) or not (effective lossy chain).
//! * [`fit`]: exponential decay-rate extraction.
//! * [`wavepacket`]: Gaussian wavepacket scattering off the atom.
//! * [`adjudicate`]: bound-state decay rates against full dynamics.

pub mod adjudicate;
pub mod bessel;
pub mod fit;
mod integrate;
pub mod wavepacket;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use adjudicate::{bound_decay_comparison, AdjudicationConfig, AdjudicationReport, AdjudicationRow};
pub use bessel::{bessel_j, bessel_propagate, bessel_profile};
pub use fit::{default_window, fit_decay, fit_decay_observable, DecayFit, FitObservable};
pub use integrate::Method;
pub use wavepacket::{wavepacket_scatter, wavepacket_scatter_with, Loss, ScatterResult, WavepacketOptions};

use crate::error::{invalid, Error, Result};
use crate::model::{build_effective_hamiltonian, BasisLabel, DissipationRates, HamiltonianMatrix, SystemParams};

/// Integration settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub method: Method,
    /// Keep the full amplitude vector at every grid time.
    pub record_amplitudes: bool,
}

impl EvolveOptions {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_amplitudes = true;
        self
    }
}

/// Starting vector for an evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// The single basis vector with this label.
    Basis(BasisLabel),
    /// An explicit amplitude vector in the basis order of the Hamiltonian.
    Vector(Vec<Complex64>),
}

impl From<BasisLabel> for InitialState {
    fn from(label: BasisLabel) -> Self {
        InitialState::Basis(label)
    }
}

impl From<Vec<Complex64>> for InitialState {
    fn from(v: Vec<Complex64>) -> Self {
        InitialState::Vector(v)
    }
}

/// Tolerance on `| ||psi0||^2 - 1 |` for accepted initial vectors.
pub const INITIAL_NORM_TOLERANCE: f64 = 1e-8;

impl InitialState {
    fn resolve(&self, h: &HamiltonianMatrix) -> Result<Vec<Complex64>> {
        let n = h.dimension();
        match self {
            InitialState::Basis(label) => {
                let idx = h
                    .index_of(*label)
                    .ok_or_else(|| invalid("initial", format!("basis label {label} not in this Hamiltonian")))?;
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                v[idx] = Complex64::new(1.0, 0.0);
                Ok(v)
            }
            InitialState::Vector(v) => {
                if v.len() != n {
                    return Err(invalid(
                        "initial",
                        format!("vector length {} does not match dimension {n}", v.len()),
                    ));
                }
                let norm_sq: f64 = v.iter().map(|c| c.norm_sqr()).sum();
                if (norm_sq - 1.0).abs() > INITIAL_NORM_TOLERANCE {
                    return Err(invalid("initial", format!("vector is not normalized (norm^2 = {norm_sq})")));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Sampled evolution with partial norms by basis sector.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Full amplitude vectors, one per time, when requested.
    pub amplitudes: Vec<Vec<Complex64>>,
    pub final_state: Vec<Complex64>,
    pub labels: Vec<BasisLabel>,
    /// Chain plus atom probability.
    pub system_norm: Vec<f64>,
    pub total_norm: Vec<f64>,
    pub chain_norm: Vec<f64>,
    pub atom_pop: Vec<f64>,
    pub bath_norm_res: Vec<f64>,
    pub bath_norm_atom: Vec<f64>,
    /// `|<psi(0)|psi(t)>|^2`.
    pub survival: Vec<f64>,
    /// Bath recurrence time of the Hamiltonian, if it has a discretized bath.
    pub recurrence_time: Option<f64>,
    pub hermitian: bool,
}

impl Trajectory {
    fn new(h: &HamiltonianMatrix, times: &[f64], record: bool) -> Self {
        let n = times.len();
        Self {
            times: times.to_vec(),
            amplitudes: if record { Vec::with_capacity(n) } else { Vec::new() },
            final_state: Vec::new(),
            labels: h.labels().to_vec(),
            system_norm: Vec::with_capacity(n),
            total_norm: Vec::with_capacity(n),
            chain_norm: Vec::with_capacity(n),
            atom_pop: Vec::with_capacity(n),
            bath_norm_res: Vec::with_capacity(n),
            bath_norm_atom: Vec::with_capacity(n),
            survival: Vec::with_capacity(n),
            recurrence_time: h.recurrence_time(),
            hermitian: h.is_hermitian(),
        }
    }

    fn push(&mut self, psi: &[Complex64], psi0: &[Complex64], record: bool) {
        let (mut chain, mut atom, mut res, mut at) = (0.0, 0.0, 0.0, 0.0);
        let mut overlap = Complex64::new(0.0, 0.0);
        for ((label, a), a0) in self.labels.iter().zip(psi).zip(psi0) {
            let w = a.norm_sqr();
            match label {
                BasisLabel::ResonatorSite(_) => chain += w,
                BasisLabel::AtomExcited => atom += w,
                BasisLabel::ResonatorBathMode { .. } => res += w,
                BasisLabel::AtomBathMode(_) => at += w,
            }
            overlap += a0.conj() * a;
        }
        self.chain_norm.push(chain);
        self.atom_pop.push(atom);
        self.system_norm.push(chain + atom);
        self.bath_norm_res.push(res);
        self.bath_norm_atom.push(at);
        self.total_norm.push(chain + atom + res + at);
        self.survival.push(overlap.norm_sqr());
        if record {
            self.amplitudes.push(psi.to_vec());
        }
    }

    /// Largest deviation of the total norm from its initial value.
    pub fn max_norm_drift(&self) -> f64 {
        let first = self.total_norm.first().copied().unwrap_or(0.0);
        self.total_norm.iter().map(|n| (n - first).abs()).fold(0.0, f64::max)
    }

    /// Amplitude of `label` at sample `i`, if amplitudes were recorded.
    pub fn amplitude(&self, i: usize, label: BasisLabel) -> Option<Complex64> {
        let idx = self.labels.iter().position(|l| *l == label)?;
        self.amplitudes.get(i).map(|v| v[idx])
    }

    pub const CSV_HEADER: &'static str = "t,system_norm,atom_pop,chain_norm,bath_norm_res,bath_norm_atom";

    /// Partial norms as CSV; times are divided by `time_unit`.
    pub fn to_csv_scaled(&self, time_unit: f64) -> String {
        use crate::report::fmt_f64;
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for i in 0..self.times.len() {
            let fields = [
                self.times[i] / time_unit,
                self.system_norm[i],
                self.atom_pop[i],
                self.chain_norm[i],
                self.bath_norm_res[i],
                self.bath_norm_atom[i],
            ];
            let line: Vec<String> = fields.iter().map(|&x| fmt_f64(x)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        self.to_csv_scaled(1.0)
    }

    /// Binary amplitude dump: the dimension as a little-endian `u64`, then for
    /// each recorded time the amplitudes as little-endian `f64` pairs
    /// `(re, im)` in basis order. Errors if amplitudes were not recorded.
    pub fn write_amplitudes(&self, mut w: impl Write) -> std::io::Result<()> {
        if self.amplitudes.len() != self.times.len() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "amplitudes were not recorded for this trajectory",
            ));
        }
        w.write_all(&(self.labels.len() as u64).to_le_bytes())?;
        for v in &self.amplitudes {
            for c in v {
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Read back a dump produced by [`Trajectory::write_amplitudes`].
pub fn read_amplitudes(bytes: &[u8]) -> std::io::Result<Vec<Vec<Complex64>>> {
    let bad = |msg: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string());
    if bytes.len() < 8 {
        return Err(bad("missing dimension header"));
    }
    let dim = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    let frame = dim * 16;
    if dim == 0 || !body.len().is_multiple_of(frame) {
        return Err(bad("body length is not a whole number of frames"));
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().unwrap());
    Ok(body
        .chunks(frame)
        .map(|chunk| chunk.chunks(16).map(|c| Complex64::new(f(&c[..8]), f(&c[8..]))).collect())
        .collect())
}

/// Grid validation: non-empty, starting at 0, strictly increasing, finite.
pub fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => Err(Error::Empty("time grid")),
        Some(&t0) if t0 != 0.0 => Err(invalid("t_grid", format!("must start at 0, starts at {t0}"))),
        _ if t_grid.iter().any(|t| !t.is_finite()) => Err(invalid("t_grid", "contains non-finite values")),
        _ if t_grid.windows(2).any(|w| w[1] <= w[0]) => Err(invalid("t_grid", "must be strictly increasing")),
        _ => Ok(()),
    }
}

/// Uniform grid `0, dt, ..., t_max` with `n + 1` points.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=n).map(|i| t_max * i as f64 / n as f64).collect();
    if let Some(last) = grid.last_mut() {
        *last = t_max;
    }
    grid
}

/// Integrate `i dpsi/dt = H psi` and sample partial norms on `t_grid`.
pub fn evolve(
    h: &HamiltonianMatrix,
    initial: impl Into<InitialState>,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    check_time_grid(t_grid)?;
    let psi0 = initial.into().resolve(h)?;
    let mut traj = Trajectory::new(h, t_grid, opts.record_amplitudes);
    let mut last = Vec::new();
    integrate::propagate(h, &psi0, t_grid, opts.method, |i, psi| {
        traj.push(psi, &psi0, opts.record_amplitudes);
        if i + 1 == t_grid.len() {
            last = psi.to_vec();
        }
    })?;
    traj.final_state = last;
    Ok(traj)
}

/// Evolution under the lossy effective chain `omega_c - i gamma_c`,
/// `Omega - i gamma_A`.
pub fn evolve_effective(
    p: &SystemParams,
    d: &DissipationRates,
    initial: impl Into<InitialState>,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let h = build_effective_hamiltonian(p, d)?;
    evolve(&h, initial, t_grid, opts)
}

/// Embed a system-basis vector (chain plus atom) into the basis of `h`,
/// leaving every bath amplitude at zero.
pub fn embed_system_vector(h: &HamiltonianMatrix, system_labels: &[BasisLabel], v: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); h.dimension()];
    for (label, a) in system_labels.iter().zip(v) {
        let idx = h
            .index_of(*label)
            .ok_or_else(|| invalid("initial", format!("basis label {label} not in this Hamiltonian")))?;
        out[idx] = *a;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_system_hamiltonian, build_total_hamiltonian, discretize_flat_bath, BathSpec, Boundary,
    };
    use crate::oracle::diagonalize;
    use std::f64::consts::PI;

    fn chain(n: usize, j: f64) -> SystemParams {
        SystemParams::new(5.0, 1.0, 5.0, j, n).unwrap()
    }

    #[test]
    fn eigenstate_is_stationary() {
        let p = chain(21, 1.5);
        let h = build_system_hamiltonian(&p).unwrap();
        let ed = diagonalize(&h).unwrap();
        let v = ed.state(7);
        let t = uniform_grid(20.0, 40);
        let traj = evolve(&h, v.clone(), &t, &EvolveOptions::default().recording()).unwrap();
        for (i, &ti) in t.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -ed.energies[7] * ti);
            let err: f64 = traj.amplitudes[i]
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * ph).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-8, "t={ti}: {err}");
            let pops: f64 = traj.amplitudes[i]
                .iter()
                .zip(&v)
                .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
                .fold(0.0, f64::max);
            assert!(pops < 1e-10);
        }
    }

    #[test]
    fn bare_chain_matches_bessel_for_every_method() {
        let p = chain(401, 0.0);
        let h = build_total_hamiltonian(&p, &BathSpec::empty(), &BathSpec::empty()).unwrap();
        // Wavefront 2 xi t stays 50 sites short of the open ends.
        let t_max = 75.0;
        let t = uniform_grid(t_max, 8);
        for method in [Method::default(), Method::Chebyshev] {
            let traj = evolve(
                &h,
                BasisLabel::ResonatorSite(0),
                &t,
                &EvolveOptions::default().with_method(method).recording(),
            )
            .unwrap();
            let mut worst: f64 = 0.0;
            for (i, &ti) in t.iter().enumerate() {
                for j in -200..=200 {
                    let exact = bessel_propagate(&p, 0.0, j, ti);
                    let got = traj.amplitude(i, BasisLabel::ResonatorSite(j)).unwrap();
                    worst = worst.max((exact - got).norm());
                }
            }
            assert!(worst < 1e-8, "{method:?}: {worst}");
        }
    }

    #[test]
    fn fixed_step_is_reproducible_and_accurate() {
        let p = chain(61, 1.0);
        let h = build_system_hamiltonian(&p).unwrap();
        let t = uniform_grid(10.0, 20);
        let opts = EvolveOptions::default().with_method(Method::FixedStep { dt: 0.01 }).recording();
        let a = evolve(&h, BasisLabel::AtomExcited, &t, &opts).unwrap();
        let b = evolve(&h, BasisLabel::AtomExcited, &t, &opts).unwrap();
        assert_eq!(a, b);
        let reference = evolve(
            &h,
            BasisLabel::AtomExcited,
            &t,
            &EvolveOptions::default().with_method(Method::Chebyshev).recording(),
        )
        .unwrap();
        let diff = a.final_state.iter().zip(&reference.final_state).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-7, "{diff}");
    }

    #[test]
    fn hermitian_norm_and_time_reversal() {
        let p = chain(41, 1.5);
        let res = discretize_flat_bath(0.01, 5.0, 8.0, 80).unwrap();
        let atom = discretize_flat_bath(0.16, 5.0, 8.0, 80).unwrap();
        let h = build_total_hamiltonian(&p, &res, &atom).unwrap();
        let t = uniform_grid(10.0, 50);
        let fwd = evolve(&h, BasisLabel::AtomExcited, &t, &EvolveOptions::default()).unwrap();
        assert!(fwd.max_norm_drift() < 1e-8, "{}", fwd.max_norm_drift());
        assert_eq!(fwd.bath_norm_res[0], 0.0);
        assert!(fwd.bath_norm_res.iter().chain(&fwd.bath_norm_atom).all(|&x| x >= 0.0));

        let back_h = h.scaled(-1.0);
        let back = evolve(&back_h, fwd.final_state.clone(), &t, &EvolveOptions::default()).unwrap();
        let idx = h.index_of(BasisLabel::AtomExcited).unwrap();
        let err: f64 = back
            .final_state
            .iter()
            .enumerate()
            .map(|(i, a)| (a - if i == idx { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn effective_reduces_to_hermitian_without_loss() {
        let p = chain(31, 1.2);
        let d = DissipationRates::new(0.0, 0.0).unwrap();
        let t = uniform_grid(8.0, 16);
        let opts = EvolveOptions::default().recording();
        let a = evolve_effective(&p, &d, BasisLabel::ResonatorSite(-3), &t, &opts).unwrap();
        let b = evolve(&build_system_hamiltonian(&p).unwrap(), BasisLabel::ResonatorSite(-3), &t, &opts).unwrap();
        for (x, y) in a.amplitudes.iter().flatten().zip(b.amplitudes.iter().flatten()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn bloch_wave_decays_at_twice_gamma_c() {
        let n = 41;
        let p = chain(n, 0.0).with_boundary(Boundary::Periodic);
        let d = DissipationRates::new(0.1, 0.3).unwrap();
        let h = build_effective_hamiltonian(&p, &d).unwrap();
        let k = 2.0 * PI * 5.0 / n as f64;
        let amp = 1.0 / (n as f64).sqrt();
        let mut v = vec![Complex64::new(0.0, 0.0); h.dimension()];
        for j in -p.half_width()..=p.half_width() {
            v[p.site_index(j)] = Complex64::from_polar(amp, k * j as f64);
        }
        let t = uniform_grid(10.0, 20);
        let traj = evolve(&h, v, &t, &EvolveOptions::default()).unwrap();
        for (ti, n) in t.iter().zip(&traj.chain_norm) {
            assert!((n - (-0.2 * ti).exp()).abs() < 1e-9, "t={ti}");
        }
        assert!(traj.atom_pop.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn grid_and_initial_state_validation() {
        let p = chain(5, 1.0);
        let h = build_system_hamiltonian(&p).unwrap();
        let opts = EvolveOptions::default();
        assert!(evolve(&h, BasisLabel::AtomExcited, &[], &opts).is_err());
        assert!(evolve(&h, BasisLabel::AtomExcited, &[0.5, 1.0], &opts).is_err());
        assert!(evolve(&h, BasisLabel::AtomExcited, &[0.0, 1.0, 1.0], &opts).is_err());
        assert!(evolve(&h, vec![Complex64::new(0.5, 0.0); 6], &[0.0, 1.0], &opts).is_err());
        assert!(evolve(&h, BasisLabel::AtomBathMode(0), &[0.0, 1.0], &opts).is_err());
        let bad = EvolveOptions::default().with_method(Method::FixedStep { dt: 0.0 });
        assert!(evolve(&h, BasisLabel::AtomExcited, &[0.0, 1.0], &bad).is_err());
        let d = DissipationRates::new(0.1, 0.1).unwrap();
        let lossy = build_effective_hamiltonian(&p, &d).unwrap();
        let cheb = EvolveOptions::default().with_method(Method::Chebyshev);
        assert!(matches!(
            evolve(&lossy, BasisLabel::AtomExcited, &[0.0, 1.0], &cheb),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn binary_dump_round_trip_and_csv() {
        let p = chain(5, 1.0);
        let h = build_system_hamiltonian(&p).unwrap();
        let t = uniform_grid(1.0, 3);
        let traj = evolve(&h, BasisLabel::AtomExcited, &t, &EvolveOptions::default().recording()).unwrap();
        let mut buf = Vec::new();
        traj.write_amplitudes(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 * 6 * 16);
        assert_eq!(u64::from_le_bytes(buf[..8].try_into().unwrap()), 6);
        assert_eq!(read_amplitudes(&buf).unwrap(), traj.amplitudes);

        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(Trajectory::CSV_HEADER));
        assert_eq!(lines.next(), Some("0.0,1.0,1.0,0.0,0.0,0.0"));
        assert_eq!(csv.lines().count(), 5);

        let unrecorded = evolve(&h, BasisLabel::AtomExcited, &t, &EvolveOptions::default()).unwrap();
        assert!(unrecorded.write_amplitudes(Vec::new()).is_err());
    }
}
