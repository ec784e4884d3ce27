//! Integer-order Bessel functions of the first kind and the closed-form
//! spreading of a single excitation on the bare damped chain.

use num_complex::Complex64;

use crate::model::SystemParams;

/// `J_0(x), ..., J_{n_max}(x)` for `x >= 0` by Miller's downward recurrence.
///
/// The recurrence is started well above both `n_max` and `x` and normalized
/// with `J_0^2 + 2 sum_k J_k^2 = 1`; the overall sign comes from
/// `J_0 + 2 sum_k J_{2k} = 1`.
pub fn bessel_j_sequence(n_max: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j_sequence needs finite x >= 0, got {x}");
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = (n_max as f64).max(x) + 30.0 + 10.0 * x.cbrt();
    let start = (top.ceil() as usize + 1) | 1;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-30;
    for k in (1..=start).rev() {
        let next = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > 1e250 {
            for v in &mut vals[k - 1..] {
                *v *= 1e-250;
            }
        }
    }
    let sum_sq = vals[0] * vals[0] + 2.0 * vals[1..].iter().map(|v| v * v).sum::<f64>();
    let linear = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    let scale = linear.signum() / sum_sq.sqrt();
    for (o, v) in out.iter_mut().zip(&vals) {
        *o = v * scale;
    }
    out
}

/// `J_n(x)` for any integer order and real argument.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let mut v = bessel_j_sequence(order, x.abs())[order];
    let odd = order % 2 == 1;
    if odd && n < 0 {
        v = -v;
    }
    if odd && x < 0.0 {
        v = -v;
    }
    v
}

/// Largest order kept when summing site amplitudes at time `t`.
pub fn order_cutoff(xi: f64, t: f64) -> usize {
    (2.0 * xi * t.abs()).ceil() as usize + 40
}

/// Amplitude at site `l` of an excitation started at site 0 of the bare
/// chain with uniform loss `gamma_c`:
/// `exp(-i omega_c t - gamma_c t) J_l(2 xi t) i^l`.
pub fn bessel_propagate(p: &SystemParams, gamma_c: f64, l: i64, t: f64) -> Complex64 {
    let envelope = Complex64::from_polar((-gamma_c * t).exp(), -p.omega_c * t);
    envelope * i_pow(l) * bessel_j(l, 2.0 * p.xi * t)
}

/// All amplitudes `l = -L..=L` with `L` from [`order_cutoff`].
pub fn bessel_profile(p: &SystemParams, gamma_c: f64, t: f64) -> Vec<(i64, Complex64)> {
    let cutoff = order_cutoff(p.xi, t);
    let seq = bessel_j_sequence(cutoff, 2.0 * p.xi * t);
    let envelope = Complex64::from_polar((-gamma_c * t).exp(), -p.omega_c * t);
    (-(cutoff as i64)..=cutoff as i64)
        .map(|l| {
            let order = l.unsigned_abs() as usize;
            let sign = if l < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
            (l, envelope * i_pow(l) * (sign * seq[order]))
        })
        .collect()
}

fn i_pow(l: i64) -> Complex64 {
    match l.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}
