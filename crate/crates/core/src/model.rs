//! Physical parameters and single-excitation Hamiltonians.
//!
//! Every builder works in the single-excitation sector, where the state of
//! the chain, the atom and all bath oscillators is a vector of amplitudes
//! over a fixed basis. The ordering is always
//!
//! 1. resonator sites `j = -h, ..., h` (ascending, `h = (n_sites - 1) / 2`),
//! 2. the excited atom,
//! 3. resonator bath modes grouped by site (site ascending, mode ascending),
//! 4. atom bath modes.
//!
//! Matrices are stored in compressed sparse rows. Only the dense JSON dump
//! and the eigensolver ever materialize the full square array.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Boundary condition of the finite chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Hard walls at both ends.
    #[default]
    Open,
    /// Ring closure between the last and first site. Only meaningful for
    /// Bloch-state checks with the atom decoupled.
    Periodic,
}

/// Closed-system parameters: waveguide, atom and lattice truncation.
///
/// The atom always sits in the resonator at lattice index 0, which is the
/// center of the (odd) finite chain. The lattice constant is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Resonator frequency.
    pub omega_c: f64,
    /// Hopping between neighboring resonators.
    pub xi: f64,
    /// Atomic transition frequency.
    pub omega: f64,
    /// Atom-resonator coupling `J`.
    pub coupling: f64,
    /// Number of resonators in the finite chain (odd, at least 3).
    pub n_sites: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

impl SystemParams {
    pub fn new(omega_c: f64, xi: f64, omega: f64, coupling: f64, n_sites: usize) -> Result<Self> {
        let p = Self {
            omega_c,
            xi,
            omega,
            coupling,
            n_sites,
            boundary: Boundary::Open,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_sites(mut self, n_sites: usize) -> Self {
        self.n_sites = n_sites;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega_c", self.omega_c), ("omega", self.omega)] {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return Err(invalid("xi", format!("must be positive, got {}", self.xi)));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(invalid(
                "coupling",
                format!("must be non-negative, got {}", self.coupling),
            ));
        }
        if self.n_sites < 3 || self.n_sites.is_multiple_of(2) {
            return Err(invalid(
                "n_sites",
                format!("must be odd and at least 3, got {}", self.n_sites),
            ));
        }
        Ok(())
    }

    /// Largest lattice index `h`; sites run over `-h..=h`.
    pub fn half_width(&self) -> i64 {
        (self.n_sites as i64 - 1) / 2
    }

    /// Basis index of lattice site `j`.
    pub fn site_index(&self, j: i64) -> usize {
        (j + self.half_width()) as usize
    }

    /// Basis index of the excited atom.
    pub fn atom_index(&self) -> usize {
        self.n_sites
    }

    /// Lattice index of the resonator containing the atom.
    pub fn atom_site(&self) -> i64 {
        0
    }

    /// Energy band `[omega_c - 2 xi, omega_c + 2 xi]` of the bare chain.
    pub fn band(&self) -> (f64, f64) {
        (self.omega_c - 2.0 * self.xi, self.omega_c + 2.0 * self.xi)
    }
}

/// One discrete bath oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathMode {
    pub frequency: f64,
    pub coupling: f64,
}

/// A bosonic reservoir, either described by a flat memory function or by an
/// explicit set of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BathSpec {
    /// Spectrally flat reservoir with memory-function value `lambda`
    /// (coupling squared times mode density).
    AnalyticFlat {
        lambda: f64,
        band_center: f64,
        bandwidth: f64,
    },
    /// Finite set of oscillators with real, non-negative couplings.
    Discretized {
        modes: Vec<BathMode>,
        band_center: f64,
        bandwidth: f64,
    },
}

impl BathSpec {
    /// A discretized bath without any modes.
    pub fn empty() -> Self {
        BathSpec::Discretized {
            modes: Vec::new(),
            band_center: 0.0,
            bandwidth: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BathSpec::AnalyticFlat {
                lambda,
                band_center,
                bandwidth,
            } => {
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return Err(invalid("lambda", format!("must be non-negative, got {lambda}")));
                }
                check_band(*band_center, *bandwidth)
            }
            BathSpec::Discretized {
                modes,
                band_center,
                bandwidth,
            } => {
                check_band(*band_center, *bandwidth)?;
                for m in modes {
                    if !m.frequency.is_finite() {
                        return Err(invalid("modes", "mode frequency must be finite"));
                    }
                    if !(m.coupling.is_finite() && m.coupling >= 0.0) {
                        return Err(invalid(
                            "modes",
                            format!("couplings must be real and non-negative, got {}", m.coupling),
                        ));
                    }
                }
                if modes.windows(2).any(|w| w[1].frequency <= w[0].frequency) {
                    return Err(invalid("modes", "mode frequencies must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    pub fn modes(&self) -> Option<&[BathMode]> {
        match self {
            BathSpec::Discretized { modes, .. } => Some(modes),
            BathSpec::AnalyticFlat { .. } => None,
        }
    }

    pub fn band_center(&self) -> f64 {
        match self {
            BathSpec::AnalyticFlat { band_center, .. } | BathSpec::Discretized { band_center, .. } => {
                *band_center
            }
        }
    }

    pub fn bandwidth(&self) -> f64 {
        match self {
            BathSpec::AnalyticFlat { bandwidth, .. } | BathSpec::Discretized { bandwidth, .. } => {
                *bandwidth
            }
        }
    }

    /// Mode spacing `bandwidth / M` of a non-empty discretized bath.
    pub fn mode_spacing(&self) -> Option<f64> {
        match self {
            BathSpec::Discretized {
                modes, bandwidth, ..
            } if !modes.is_empty() => Some(bandwidth / modes.len() as f64),
            _ => None,
        }
    }

    /// Time `2 pi / spacing` after which a discretized bath feeds the
    /// excitation back into the system.
    pub fn recurrence_time(&self) -> Option<f64> {
        self.mode_spacing().map(|dw| 2.0 * PI / dw)
    }
}

fn check_band(center: f64, width: f64) -> Result<()> {
    if !center.is_finite() {
        return Err(invalid("band_center", "must be finite"));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(invalid("bandwidth", format!("must be positive, got {width}")));
    }
    Ok(())
}

/// Discretize a flat reservoir into `m` equally spaced modes.
///
/// Mode `q` sits at the midpoint of the `q`-th cell of width
/// `bandwidth / m` and couples with `sqrt(lambda * spacing)`, so that the
/// realized memory function `g_q^2 / spacing` equals `lambda`.
pub fn discretize_flat_bath(lambda: f64, band_center: f64, bandwidth: f64, m: usize) -> Result<BathSpec> {
    if m == 0 {
        return Err(invalid("modes", "at least one bath mode is required"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid("lambda", format!("must be non-negative, got {lambda}")));
    }
    check_band(band_center, bandwidth)?;
    let spacing = bandwidth / m as f64;
    let coupling = (lambda * spacing).sqrt();
    let lower = band_center - 0.5 * bandwidth;
    let modes = (0..m)
        .map(|q| BathMode {
            frequency: lower + (q as f64 + 0.5) * spacing,
            coupling,
        })
        .collect();
    Ok(BathSpec::Discretized {
        modes,
        band_center,
        bandwidth,
    })
}

/// Phenomenological loss rates of the effective description.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DissipationRates {
    pub gamma_c: f64,
    pub gamma_a: f64,
}

impl DissipationRates {
    pub fn new(gamma_c: f64, gamma_a: f64) -> Result<Self> {
        let d = Self { gamma_c, gamma_a };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma_c", self.gamma_c), ("gamma_a", self.gamma_a)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// What a basis vector of the single-excitation sector represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisLabel {
    ResonatorSite(i64),
    AtomExcited,
    ResonatorBathMode { site: i64, mode: usize },
    AtomBathMode(usize),
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::ResonatorSite(j) => write!(f, "site[{j}]"),
            BasisLabel::AtomExcited => write!(f, "atom"),
            BasisLabel::ResonatorBathMode { site, mode } => write!(f, "bath[{site}][{mode}]"),
            BasisLabel::AtomBathMode(q) => write!(f, "atom_bath[{q}]"),
        }
    }
}

/// Single-excitation Hamiltonian in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
    labels: Vec<BasisLabel>,
    recurrence_time: Option<f64>,
}

impl HamiltonianMatrix {
    /// Assemble from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(labels: Vec<BasisLabel>, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        let dim = labels.len();
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "triplet ({i}, {j}) outside dimension {dim}");
            if rows.last() == Some(&i) && col_idx.last() == Some(&j) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                col_idx.push(j);
                values.push(v);
            }
        }
        let keep: Vec<bool> = values.iter().map(|v| *v != Complex64::new(0.0, 0.0)).collect();
        let mut c2 = Vec::with_capacity(col_idx.len());
        let mut v2 = Vec::with_capacity(values.len());
        for (n, &k) in keep.iter().enumerate() {
            if k {
                row_ptr[rows[n] + 1] += 1;
                c2.push(col_idx[n]);
                v2.push(values[n]);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            col_idx: c2,
            values: v2,
            labels,
            recurrence_time: None,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: BasisLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Recurrence time of the shortest-period bath, if any bath is attached.
    pub fn recurrence_time(&self) -> Option<f64> {
        self.recurrence_time
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Non-zero entries as `(row, col, value)`, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |n| (i, self.col_idx[n], self.values[n]))
        })
    }

    /// First entry whose transpose conjugate differs, if any.
    pub fn hermiticity_violation(&self) -> Option<(usize, usize)> {
        self.entries()
            .find(|&(i, j, v)| self.get(j, i) != v.conj())
            .map(|(i, j, _)| (i, j))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_violation().is_none()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[n] * x[self.col_idx[n]];
            }
            *yi = acc;
        }
    }

    /// Gershgorin enclosure of the real parts of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let mut diag = 0.0;
            let mut radius = 0.0;
            for n in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[n] == i {
                    diag = self.values[n].re;
                } else {
                    radius += self.values[n].norm();
                }
            }
            lo = lo.min(diag - radius);
            hi = hi.max(diag + radius);
        }
        if self.dim == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    /// Same basis, every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    /// Debug dump: dimension, row-major `[re, im]` pairs and basis labels.
    pub fn to_json(&self) -> serde_json::Value {
        let dense = self.to_dense();
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = dense[(i, j)];
                entries.push([v.re, v.im]);
            }
        }
        serde_json::json!({
            "dimension": self.dim,
            "entries": entries,
            "basis_labels": self.labels,
        })
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn chain_labels(p: &SystemParams) -> Vec<BasisLabel> {
    let h = p.half_width();
    (-h..=h)
        .map(BasisLabel::ResonatorSite)
        .chain(std::iter::once(BasisLabel::AtomExcited))
        .collect()
}

fn chain_triplets(p: &SystemParams, site_energy: Complex64, atom_energy: Complex64) -> Vec<(usize, usize, Complex64)> {
    let n = p.n_sites;
    let mut t = Vec::with_capacity(3 * n + 4);
    for i in 0..n {
        t.push((i, i, site_energy));
    }
    let mut hop = |a: usize, b: usize| {
        t.push((a, b, c(-p.xi)));
        t.push((b, a, c(-p.xi)));
    };
    for i in 0..n - 1 {
        hop(i, i + 1);
    }
    if p.boundary == Boundary::Periodic {
        hop(n - 1, 0);
    }
    let atom = p.atom_index();
    let centre = p.site_index(0);
    t.push((atom, atom, atom_energy));
    t.push((atom, centre, c(p.coupling)));
    t.push((centre, atom, c(p.coupling)));
    t
}

/// Closed chain plus atom, dimension `n_sites + 1`.
pub fn build_system_hamiltonian(p: &SystemParams) -> Result<HamiltonianMatrix> {
    p.validate()?;
    Ok(HamiltonianMatrix::from_triplets(
        chain_labels(p),
        chain_triplets(p, c(p.omega_c), c(p.omega)),
    ))
}

/// Effective non-Hermitian chain with `omega_c - i gamma_c` on every site
/// and `Omega - i gamma_A` on the atom.
pub fn build_effective_hamiltonian(p: &SystemParams, d: &DissipationRates) -> Result<HamiltonianMatrix> {
    p.validate()?;
    d.validate()?;
    Ok(HamiltonianMatrix::from_triplets(
        chain_labels(p),
        chain_triplets(
            p,
            Complex64::new(p.omega_c, -d.gamma_c),
            Complex64::new(p.omega, -d.gamma_a),
        ),
    ))
}

/// Chain, atom and explicit baths; every resonator gets an identical copy
/// of `resonator_bath`.
pub fn build_total_hamiltonian(
    p: &SystemParams,
    resonator_bath: &BathSpec,
    atom_bath: &BathSpec,
) -> Result<HamiltonianMatrix> {
    p.validate()?;
    let per_site = vec![resonator_bath.clone(); p.n_sites];
    build_total_hamiltonian_per_site(p, &per_site, atom_bath)
}

/// Like [`build_total_hamiltonian`] with one bath per resonator, in site
/// order `-h..=h`.
pub fn build_total_hamiltonian_per_site(
    p: &SystemParams,
    resonator_baths: &[BathSpec],
    atom_bath: &BathSpec,
) -> Result<HamiltonianMatrix> {
    p.validate()?;
    if resonator_baths.len() != p.n_sites {
        return Err(invalid(
            "resonator_baths",
            format!("expected {} baths, got {}", p.n_sites, resonator_baths.len()),
        ));
    }
    let mut site_modes = Vec::with_capacity(p.n_sites);
    for b in resonator_baths {
        b.validate()?;
        site_modes.push(b.modes().ok_or(Error::AnalyticBath)?);
    }
    atom_bath.validate()?;
    let atom_modes = atom_bath.modes().ok_or(Error::AnalyticBath)?;

    let mut labels = chain_labels(p);
    let mut triplets = chain_triplets(p, c(p.omega_c), c(p.omega));
    let h = p.half_width();
    for (s, modes) in site_modes.iter().enumerate() {
        let site = s as i64 - h;
        for (q, m) in modes.iter().enumerate() {
            let idx = labels.len();
            labels.push(BasisLabel::ResonatorBathMode { site, mode: q });
            triplets.push((idx, idx, c(m.frequency)));
            triplets.push((idx, s, c(m.coupling)));
            triplets.push((s, idx, c(m.coupling)));
        }
    }
    let atom = p.atom_index();
    for (q, m) in atom_modes.iter().enumerate() {
        let idx = labels.len();
        labels.push(BasisLabel::AtomBathMode(q));
        triplets.push((idx, idx, c(m.frequency)));
        triplets.push((idx, atom, c(m.coupling)));
        triplets.push((atom, idx, c(m.coupling)));
    }
    let mut h_total = HamiltonianMatrix::from_triplets(labels, triplets);
    h_total.recurrence_time = resonator_baths
        .iter()
        .chain(std::iter::once(atom_bath))
        .filter_map(BathSpec::recurrence_time)
        .reduce(f64::min);
    Ok(h_total)
}

/// A single discrete level at `energy` (labelled as resonator site 0)
/// coupled to one explicit bath.
pub fn build_single_mode_with_bath(energy: f64, bath: &BathSpec) -> Result<HamiltonianMatrix> {
    if !energy.is_finite() {
        return Err(invalid("energy", "must be finite"));
    }
    bath.validate()?;
    let modes = bath.modes().ok_or(Error::AnalyticBath)?;
    let mut labels = vec![BasisLabel::ResonatorSite(0)];
    let mut triplets = vec![(0, 0, c(energy))];
    for (q, m) in modes.iter().enumerate() {
        let idx = labels.len();
        labels.push(BasisLabel::ResonatorBathMode { site: 0, mode: q });
        triplets.push((idx, idx, c(m.frequency)));
        triplets.push((idx, 0, c(m.coupling)));
        triplets.push((0, idx, c(m.coupling)));
    }
    let mut h = HamiltonianMatrix::from_triplets(labels, triplets);
    h.recurrence_time = bath.recurrence_time();
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(omega_c: f64, xi: f64, omega: f64, coupling: f64, n: usize) -> SystemParams {
        SystemParams::new(omega_c, xi, omega, coupling, n).unwrap()
    }

    /// Eigenvalues of a small real symmetric matrix by cyclic Jacobi
    /// rotations; independent of the library eigensolver.
    #[allow(clippy::needless_range_loop)]
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * cs;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = cs * akp - sn * akq;
                        a[k][q] = sn * akp + cs * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = cs * apk - sn * aqk;
                        a[q][k] = sn * apk + cs * aqk;
                    }
                }
            }
        }
        let mut e: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn dense_real(h: &HamiltonianMatrix) -> Vec<Vec<f64>> {
        let d = h.to_dense();
        (0..h.dimension())
            .map(|i| (0..h.dimension()).map(|j| d[(i, j)].re).collect())
            .collect()
    }

    #[test]
    fn four_by_four_spectrum() {
        let h = build_system_hamiltonian(&params(5.0, 1.0, 5.0, 0.0, 3)).unwrap();
        assert_eq!(h.dimension(), 4);
        let e = jacobi_eigenvalues(dense_real(&h));
        let s2 = 2f64.sqrt();
        let expected = [5.0 - s2, 5.0, 5.0, 5.0 + s2];
        for (a, b) in e.iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn decoupled_atom_row_is_empty() {
        let p = params(5.0, 1.0, 6.0, 0.0, 7);
        let h = build_system_hamiltonian(&p).unwrap();
        let a = p.atom_index();
        for j in 0..h.dimension() {
            if j != a {
                assert_eq!(h.get(a, j), c(0.0));
                assert_eq!(h.get(j, a), c(0.0));
            }
        }
        assert_eq!(h.get(a, a), c(6.0));
    }

    #[test]
    fn jaynes_cummings_doublet() {
        // xi must be positive for validation; use a tiny hopping and check
        // the site-0/atom block directly.
        let p = params(5.0, 1.0, 5.0, 1.5, 3);
        let h = build_system_hamiltonian(&p).unwrap();
        let s = p.site_index(0);
        let a = p.atom_index();
        let block = vec![
            vec![h.get(s, s).re, h.get(s, a).re],
            vec![h.get(a, s).re, h.get(a, a).re],
        ];
        let e = jacobi_eigenvalues(block);
        assert_relative_eq!(e[0], 3.5, epsilon = 1e-12);
        assert_relative_eq!(e[1], 6.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_site_counts() {
        assert!(SystemParams::new(5.0, 1.0, 5.0, 1.0, 4).is_err());
        assert!(SystemParams::new(5.0, 1.0, 5.0, 1.0, 1).is_err());
        assert!(SystemParams::new(5.0, 0.0, 5.0, 1.0, 5).is_err());
        assert!(SystemParams::new(5.0, 1.0, 5.0, -1.0, 5).is_err());
    }

    #[test]
    fn empty_baths_reproduce_system() {
        let p = params(5.0, 1.0, 6.0, 1.5, 9);
        let sys = build_system_hamiltonian(&p).unwrap();
        let tot = build_total_hamiltonian(&p, &BathSpec::empty(), &BathSpec::empty()).unwrap();
        assert_eq!(sys, tot);
    }

    #[test]
    fn total_dimension_and_hermiticity() {
        let p = params(5.0, 1.0, 6.0, 1.5, 3);
        let b = discretize_flat_bath(0.01, 5.0, 8.0, 1).unwrap();
        let h = build_total_hamiltonian(&p, &b, &b).unwrap();
        assert_eq!(h.dimension(), 8);
        assert!(h.is_hermitian());
        let d = h.to_dense();
        assert_eq!(d, d.adjoint());
        assert_eq!(h.labels()[4], BasisLabel::ResonatorBathMode { site: -1, mode: 0 });
        assert_eq!(h.labels()[7], BasisLabel::AtomBathMode(0));
    }

    #[test]
    fn analytic_bath_rejected() {
        let p = params(5.0, 1.0, 6.0, 1.5, 3);
        let flat = BathSpec::AnalyticFlat {
            lambda: 0.01,
            band_center: 5.0,
            bandwidth: 8.0,
        };
        assert_eq!(
            build_total_hamiltonian(&p, &flat, &BathSpec::empty()),
            Err(Error::AnalyticBath)
        );
    }

    #[test]
    fn effective_diagonal() {
        let p = params(5.0, 1.0, 6.0, 1.5, 5);
        let zero = build_effective_hamiltonian(&p, &DissipationRates::default()).unwrap();
        assert_eq!(zero, build_system_hamiltonian(&p).unwrap());
        let h = build_effective_hamiltonian(&p, &DissipationRates::new(0.1, 0.4).unwrap()).unwrap();
        for i in 0..p.n_sites {
            assert_eq!(h.get(i, i).im, -0.1);
        }
        assert_eq!(h.get(p.atom_index(), p.atom_index()), Complex64::new(6.0, -0.4));
        assert!(!h.is_hermitian());
    }

    #[test]
    fn flat_bath_discretization() {
        let b = discretize_flat_bath(0.0, 5.0, 8.0, 10).unwrap();
        assert!(b.modes().unwrap().iter().all(|m| m.coupling == 0.0));

        let b = discretize_flat_bath(0.01, 5.0, 8.0, 800).unwrap();
        let modes = b.modes().unwrap();
        assert_eq!(modes.len(), 800);
        assert_relative_eq!(b.mode_spacing().unwrap(), 0.01, epsilon = 1e-15);
        for m in modes {
            assert_relative_eq!(m.coupling, 0.01, epsilon = 1e-15);
        }
        assert_relative_eq!(modes[1].frequency - modes[0].frequency, 0.01, epsilon = 1e-12);
        assert_relative_eq!(b.recurrence_time().unwrap(), 200.0 * PI, epsilon = 1e-9);
        assert!(b.validate().is_ok());

        assert!(discretize_flat_bath(0.01, 5.0, 8.0, 0).is_err());
        assert!(discretize_flat_bath(0.01, 5.0, 0.0, 4).is_err());
    }

    #[test]
    fn periodic_ring_closure() {
        let p = params(5.0, 1.0, 5.0, 0.0, 5).with_boundary(Boundary::Periodic);
        let h = build_system_hamiltonian(&p).unwrap();
        assert_eq!(h.get(0, 4), c(-1.0));
        assert_eq!(h.get(4, 0), c(-1.0));
    }

    #[test]
    fn json_dump_layout() {
        let p = params(5.0, 1.0, 5.0, 1.5, 3);
        let v = build_system_hamiltonian(&p).unwrap().to_json();
        assert_eq!(v["dimension"], 4);
        assert_eq!(v["entries"].as_array().unwrap().len(), 16);
        assert_eq!(v["entries"][0], serde_json::json!([5.0, 0.0]));
        assert_eq!(v["entries"][1], serde_json::json!([-1.0, 0.0]));
        assert_eq!(v["basis_labels"][3], serde_json::json!("AtomExcited"));
    }

    #[test]
    fn apply_matches_dense_product() {
        let p = params(5.0, 1.0, 6.0, 1.5, 5);
        let b = discretize_flat_bath(0.02, 5.0, 8.0, 3).unwrap();
        let h = build_total_hamiltonian(&p, &b, &b).unwrap();
        let x: Vec<Complex64> = (0..h.dimension())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut y = vec![c(0.0); h.dimension()];
        h.apply(&x, &mut y);
        let dense = h.to_dense() * nalgebra::DVector::from_vec(x);
        for (a, b) in y.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
