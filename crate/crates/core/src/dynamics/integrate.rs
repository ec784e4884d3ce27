//! Time steppers for `i dpsi/dt = H psi` with a time-independent sparse `H`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::bessel_j_sequence;
use crate::error::{invalid, Error, Result};
use crate::model::HamiltonianMatrix;

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    /// Dormand-Prince 5(4) with step control on the 2-norm of the local
    /// error, `||err|| <= atol + rtol ||psi||`.
    Adaptive { rtol: f64, atol: f64 },
    /// Classical fourth-order Runge-Kutta with the largest step `<= dt`
    /// that divides each output interval evenly. Bit-reproducible.
    FixedStep { dt: f64 },
    /// Chebyshev expansion of the propagator on each output interval.
    /// Hermitian matrices only; accurate to machine precision.
    Chebyshev,
}

impl Default for Method {
    fn default() -> Self {
        Method::Adaptive {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Applies `-i (H - shift)`.
struct Generator<'a> {
    h: &'a HamiltonianMatrix,
    shift: f64,
}

impl Generator<'_> {
    fn rhs(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.h.apply(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = MINUS_I * (*o - self.shift * xi);
        }
    }
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrate from `times[0]` and hand each sample to `on_sample` in the
/// laboratory frame.
pub(crate) fn propagate(
    h: &HamiltonianMatrix,
    psi0: &[Complex64],
    times: &[f64],
    method: Method,
    mut on_sample: impl FnMut(usize, &[Complex64]),
) -> Result<()> {
    let (lo, hi) = h.spectral_bounds();
    let shift = 0.5 * (lo + hi);
    let half_width = 0.5 * (hi - lo);
    let gen = Generator { h, shift };
    let mut psi = psi0.to_vec();
    let phase = |t: f64| Complex64::from_polar(1.0, -shift * t);
    let mut lab = psi.clone();
    on_sample(0, &psi);

    match method {
        Method::Adaptive { rtol, atol } => {
            if !(rtol > 0.0 && atol >= 0.0) {
                return Err(invalid("rtol", "tolerances must be positive"));
            }
            let mut stepper = Dopri::new(psi.len());
            let mut h_step = 0.1 / half_width.max(1e-3);
            let mut t = times[0];
            for (i, &t_out) in times.iter().enumerate().skip(1) {
                while t < t_out {
                    let last = t + h_step >= t_out;
                    let dt = if last { t_out - t } else { h_step };
                    let (err, proposal) = stepper.attempt(&gen, &psi, dt, rtol, atol);
                    if err <= 1.0 {
                        t = if last { t_out } else { t + dt };
                        std::mem::swap(&mut psi, &mut stepper.y_new);
                        if !last || proposal < h_step {
                            h_step = proposal;
                        }
                    } else {
                        h_step = proposal.min(dt);
                    }
                    if h_step < 1e-12 * t.abs().max(1.0) {
                        return Err(Error::Stiffness {
                            t,
                            step: h_step,
                            norm: norm(&psi),
                        });
                    }
                }
                let ph = phase(t_out);
                lab.iter_mut().zip(&psi).for_each(|(l, p)| *l = p * ph);
                on_sample(i, &lab);
            }
        }
        Method::FixedStep { dt } => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("dt", format!("must be positive, got {dt}")));
            }
            let n = psi.len();
            let mut k = [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]];
            let mut tmp = vec![ZERO; n];
            for i in 1..times.len() {
                let interval = times[i] - times[i - 1];
                let steps = (interval / dt).ceil().max(1.0) as usize;
                let h_step = interval / steps as f64;
                for _ in 0..steps {
                    rk4_step(&gen, &mut psi, h_step, &mut k, &mut tmp);
                }
                let ph = phase(times[i]);
                lab.iter_mut().zip(&psi).for_each(|(l, p)| *l = p * ph);
                on_sample(i, &lab);
            }
        }
        Method::Chebyshev => {
            if let Some((row, col)) = h.hermiticity_violation() {
                return Err(Error::NotHermitian { row, col });
            }
            let mut cheb = Chebyshev::new(psi.len(), shift, half_width);
            for i in 1..times.len() {
                cheb.advance(h, &mut psi, times[i] - times[i - 1]);
                let ph = phase(times[i]);
                lab.iter_mut().zip(&psi).for_each(|(l, p)| *l = p * ph);
                on_sample(i, &lab);
            }
        }
    }
    Ok(())
}

fn rk4_step(
    gen: &Generator<'_>,
    psi: &mut [Complex64],
    h: f64,
    k: &mut [Vec<Complex64>; 4],
    tmp: &mut [Complex64],
) {
    let [k1, k2, k3, k4] = k;
    gen.rhs(psi, k1);
    tmp.iter_mut().zip(psi.iter()).zip(k1.iter()).for_each(|((t, y), a)| *t = y + 0.5 * h * a);
    gen.rhs(tmp, k2);
    tmp.iter_mut().zip(psi.iter()).zip(k2.iter()).for_each(|((t, y), a)| *t = y + 0.5 * h * a);
    gen.rhs(tmp, k3);
    tmp.iter_mut().zip(psi.iter()).zip(k3.iter()).for_each(|((t, y), a)| *t = y + h * a);
    gen.rhs(tmp, k4);
    for i in 0..psi.len() {
        psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

// Dormand-Prince 5(4) tableau (autonomous system, so the nodes are unused).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri {
    k: Vec<Vec<Complex64>>,
    stage: Vec<Complex64>,
    y_new: Vec<Complex64>,
}

impl Dopri {
    fn new(n: usize) -> Self {
        Self {
            k: vec![vec![ZERO; n]; 7],
            stage: vec![ZERO; n],
            y_new: vec![ZERO; n],
        }
    }

    /// One trial step; returns the scaled error and the next step proposal.
    /// The candidate solution is left in `y_new`.
    #[allow(clippy::needless_range_loop)]
    fn attempt(&mut self, gen: &Generator<'_>, y: &[Complex64], h: f64, rtol: f64, atol: f64) -> (f64, f64) {
        gen.rhs(y, &mut self.k[0]);
        for s in 1..7 {
            for i in 0..y.len() {
                let mut acc = y[i];
                for (j, &a) in A[s][..s].iter().enumerate() {
                    if a != 0.0 {
                        acc += h * a * self.k[j][i];
                    }
                }
                self.stage[i] = acc;
            }
            if s == 6 {
                self.y_new.copy_from_slice(&self.stage);
            }
            gen.rhs(&self.stage, &mut self.k[s]);
        }
        let mut err_sq = 0.0;
        for i in 0..y.len() {
            let mut e = ZERO;
            for (s, &w) in E.iter().enumerate() {
                if w != 0.0 {
                    e += w * self.k[s][i];
                }
            }
            err_sq += (h * e).norm_sqr();
        }
        let scale = atol + rtol * norm(y).max(norm(&self.y_new));
        let err = err_sq.sqrt() / scale;
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        (err, h * factor)
    }
}

/// Chebyshev propagator on spectrum `[shift - half_width, shift + half_width]`.
struct Chebyshev {
    prev: Vec<Complex64>,
    cur: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
    shift: f64,
    half_width: f64,
}

/// Longest sub-interval, in units of the inverse half-width.
const CHEB_MAX_ARG: f64 = 40.0;

impl Chebyshev {
    fn new(n: usize, shift: f64, half_width: f64) -> Self {
        Self {
            prev: vec![ZERO; n],
            cur: vec![ZERO; n],
            next: vec![ZERO; n],
            acc: vec![ZERO; n],
            shift,
            half_width: half_width * 1.01 + 1e-12,
        }
    }

    /// `psi <- exp(-i (H - shift) dt) psi`.
    fn advance(&mut self, h: &HamiltonianMatrix, psi: &mut [Complex64], dt: f64) {
        let total = self.half_width * dt;
        let pieces = (total / CHEB_MAX_ARG).ceil().max(1.0) as usize;
        for _ in 0..pieces {
            self.advance_piece(h, psi, dt / pieces as f64);
        }
    }

    fn advance_piece(&mut self, h: &HamiltonianMatrix, psi: &mut [Complex64], dt: f64) {
        let arg = self.half_width * dt;
        let n_terms = (arg + 20.0 + 8.0 * arg.cbrt()).ceil() as usize;
        let coeffs = bessel_j_sequence(n_terms, arg);
        let last = coeffs.iter().rposition(|c| c.abs() > 1e-17).unwrap_or(0).max(1);
        let (shift, scale) = (self.shift, self.half_width);

        self.prev.copy_from_slice(psi);
        h.apply(&self.prev, &mut self.cur);
        for (c, p) in self.cur.iter_mut().zip(&self.prev) {
            *c = (*c - shift * p) / scale;
        }
        let mut phase = MINUS_I;
        for i in 0..psi.len() {
            self.acc[i] = coeffs[0] * self.prev[i] + 2.0 * coeffs[1] * phase * self.cur[i];
        }
        for &ck in &coeffs[2..=last] {
            h.apply(&self.cur, &mut self.next);
            for i in 0..psi.len() {
                self.next[i] = 2.0 * (self.next[i] - shift * self.cur[i]) / scale - self.prev[i];
            }
            // Rotate (prev, cur, next) <- (cur, next, prev).
            std::mem::swap(&mut self.prev, &mut self.cur);
            std::mem::swap(&mut self.cur, &mut self.next);
            phase *= MINUS_I;
            let w = 2.0 * ck * phase;
            for i in 0..psi.len() {
                self.acc[i] += w * self.cur[i];
            }
        }
        psi.copy_from_slice(&self.acc);
    }
}
