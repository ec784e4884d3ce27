//! Brute-force reference: dense diagonalization of finite-chain
//! Hamiltonians.
//!
//! Eigenvectors are returned in ascending energy order. Each vector's phase
//! is fixed so that its first component with modulus above
//! [`PHASE_THRESHOLD`] is real and positive; inside degenerate subspaces the
//! basis is whatever the symmetric QR iteration produces, with that phase
//! convention applied.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::decay::{ChainWeights, DressedState, StateLabel, WeightMode};
use crate::error::{Error, Result};
use crate::model::{build_system_hamiltonian, BasisLabel, HamiltonianMatrix, SystemParams};

pub const PHASE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, in the order of `energies`.
    pub states: DMatrix<Complex64>,
    pub labels: Vec<BasisLabel>,
    /// Bare-chain band `(omega_c - 2 xi, omega_c + 2 xi)` when known.
    pub band_window: Option<(f64, f64)>,
}

/// Full spectrum of a Hermitian matrix.
pub fn diagonalize(h: &HamiltonianMatrix) -> Result<EigenDecomposition> {
    if let Some((row, col)) = h.hermiticity_violation() {
        return Err(Error::NotHermitian { row, col });
    }
    let n = h.dimension();
    let (values, vectors) = if h.is_real() {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (i, j, v) in h.entries() {
            m[(i, j)] = v.re;
        }
        let eig = SymmetricEigen::new(m);
        (eig.eigenvalues, eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(h.to_dense());
        (eig.eigenvalues, eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let energies = order.iter().map(|&i| values[i]).collect();
    let mut states = DMatrix::<Complex64>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = vectors.column(src);
        let phase = v
            .iter()
            .find(|c| c.norm() > PHASE_THRESHOLD)
            .map(|c| c.conj() / c.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        let norm = v.norm();
        for row in 0..n {
            states[(row, col)] = v[row] * phase / norm;
        }
    }
    Ok(EigenDecomposition {
        energies,
        states,
        labels: h.labels().to_vec(),
        band_window: None,
    })
}

/// Diagonalize the closed chain plus atom and attach its band window.
pub fn diagonalize_system(p: &SystemParams) -> Result<EigenDecomposition> {
    let mut ed = diagonalize(&build_system_hamiltonian(p)?)?;
    ed.band_window = Some(p.band());
    Ok(ed)
}

/// Partition of a spectrum into band states and out-of-band bound states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateClasses {
    pub band: Vec<usize>,
    pub below: Option<usize>,
    pub above: Option<usize>,
}

impl StateClasses {
    pub fn bound_count(&self) -> usize {
        self.below.iter().count() + self.above.iter().count()
    }
}

impl EigenDecomposition {
    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn state(&self, index: usize) -> Vec<Complex64> {
        self.states.column(index).iter().copied().collect()
    }

    /// Largest `|| H v - E v ||` over all pairs.
    pub fn max_residual(&self, h: &HamiltonianMatrix) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dimension()];
        (0..self.dimension())
            .map(|n| {
                let v = self.state(n);
                h.apply(&v, &mut y);
                y.iter()
                    .zip(&v)
                    .map(|(hy, x)| (hy - self.energies[n] * x).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Label states outside the band window (with a `1e-8 xi` margin) as
    /// bound. More than one per side means the model is violated.
    pub fn classify_states(&self) -> Result<StateClasses> {
        let (lo, hi) = self
            .band_window
            .ok_or_else(|| Error::ModelViolation("band window unknown; use diagonalize_system".into()))?;
        let margin = 1e-8 * (hi - lo) / 4.0;
        let mut classes = StateClasses {
            band: Vec::new(),
            below: None,
            above: None,
        };
        for (i, &e) in self.energies.iter().enumerate() {
            let slot = if e < lo - margin {
                &mut classes.below
            } else if e > hi + margin {
                &mut classes.above
            } else {
                classes.band.push(i);
                continue;
            };
            if slot.replace(i).is_some() {
                return Err(Error::ModelViolation(format!(
                    "more than one out-of-band state on one side (energy {e})"
                )));
            }
        }
        Ok(classes)
    }

    /// Index of the eigenvalue nearest `target`; ties within `1e-12` go to
    /// the lower energy. The flag reports whether a tie occurred.
    pub fn nearest(&self, target: f64) -> Option<(usize, bool)> {
        let best = (0..self.dimension()).min_by(|&a, &b| {
            let da = (self.energies[a] - target).abs();
            let db = (self.energies[b] - target).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        })?;
        let d = (self.energies[best] - target).abs();
        let tie = (0..self.dimension())
            .any(|i| i != best && ((self.energies[i] - target).abs() - d).abs() <= 1e-12);
        Some((best, tie))
    }

    /// Dressed state for eigenvector `index`: per-site chain weights and the
    /// atom weight, normalized over the system basis.
    pub fn dressed_state(&self, index: usize) -> DressedState {
        let mut sites: Vec<(i64, f64)> = Vec::new();
        let mut atom = 0.0;
        for (row, label) in self.labels.iter().enumerate() {
            let w = self.states[(row, index)].norm_sqr();
            match label {
                BasisLabel::ResonatorSite(j) => sites.push((*j, w)),
                BasisLabel::AtomExcited => atom += w,
                _ => {}
            }
        }
        DressedState {
            label: StateLabel::Oracle { index },
            energy: self.energies[index],
            chain: ChainWeights::Sites(sites),
            atom_weight: atom,
            mode: WeightMode::NormalizedChain,
            tie: false,
        }
    }
}

/// Normalized eigenvector nearest `target_energy` as a dressed state.
pub fn extract_dressed_state(ed: &EigenDecomposition, target_energy: f64) -> Result<DressedState> {
    let (index, tie) = ed.nearest(target_energy).ok_or(Error::Empty("eigen decomposition"))?;
    let mut state = ed.dressed_state(index);
    state.tie = tie;
    Ok(state)
}
