use super::dd::Dd;
use super::EvalResult;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Power series (double-double) below, Hankel expansions above.
const SERIES_LIMIT: f64 = 20.0;
pub const DOMAIN_JY: (f64, f64) = (1e-6, 1e6);
/// `K_n` underflows past the upper end.
pub const DOMAIN_K: (f64, f64) = (1e-6, 700.0);

fn check(x: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if !(x >= lo && x <= hi) {
        return Err(Error::Domain(format!("bessel argument {x} outside [{lo:e}, {hi:e}]")));
    }
    Ok(())
}

/// `(J0, J1, Y0, Y1)` at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselJY {
    pub j0: EvalResult,
    pub j1: EvalResult,
    pub y0: EvalResult,
    pub y1: EvalResult,
}

pub fn bessel_jy(x: f64) -> Result<BesselJY> {
    check(x, DOMAIN_JY)?;
    Ok(if x < SERIES_LIMIT { jy_series(x) } else { jy_hankel(x) })
}

pub fn bessel_j1(x: f64) -> Result<EvalResult> {
    Ok(bessel_jy(x)?.j1)
}

pub fn bessel_y1(x: f64) -> Result<EvalResult> {
    Ok(bessel_jy(x)?.y1)
}

fn jy_series(x: f64) -> BesselJY {
    let h = Dd::from_f64(x).mul_f64(0.5);
    let w = -(h * h); // -(x/2)^2
    // a_k = w^k / (k!)^2 and b_k = w^k / (k! (k+1)!)
    let mut a = Dd::ONE;
    let mut b = Dd::ONE;
    let mut harmonic = Dd::ZERO;
    let (mut sj0, mut sj1) = (a, b);
    let mut sy0 = Dd::ZERO; // sum H_k a_k
    let mut sy1 = b; // sum (2 H_k + 1/(k+1)) b_k, k = 0 term is 1
    let mut mag = 1.0;
    for k in 1..300 {
        let kf = k as f64;
        a = (a * w).div_f64(kf * kf);
        b = (b * w).div_f64(kf * (kf + 1.0));
        harmonic = harmonic + Dd::ONE.div_f64(kf);
        sj0 = sj0 + a;
        sj1 = sj1 + b;
        sy0 = sy0 + harmonic * a;
        let c = harmonic.mul_f64(2.0) + Dd::ONE.div_f64(kf + 1.0);
        sy1 = sy1 + c * b;
        let m = (a.hi.abs() + b.hi.abs()) * (1.0 + 2.0 * harmonic.hi);
        mag += m;
        if m < 1e-34 * mag && k > 2 {
            break;
        }
    }
    let j0 = sj0;
    let j1 = h * sj1;
    let two_over_pi = Dd::from_f64(2.0).div(Dd::PI);
    // ln(x/2) + γ only needs double precision: it multiplies J, not a sum
    // with cancellation.
    let lg = Dd::from_f64((0.5 * x).ln()) + Dd::EULER;
    let y0 = two_over_pi * (lg * j0 - sy0);
    let y1 = two_over_pi * (lg * j1) - Dd::from_f64(2.0).div(Dd::PI.mul_f64(x)) - (h * sy1).div(Dd::PI);
    let err = 1e-31 * mag * (1.0 + x) + 4.0 * f64::EPSILON;
    let r = |v: Dd| EvalResult { value: v.to_f64(), abs_error_bound: err + 2.0 * f64::EPSILON * v.to_f64().abs() };
    BesselJY { j0: r(j0), j1: r(j1), y0: r(y0), y1: r(y1) }
}

/// Hankel's P, Q for order `nu` at `x`, and the size of the last term kept.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64, f64) {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if next.abs() > last || next.abs() < 1e-18 {
            last = next.abs();
            break;
        }
        term = next;
        last = term.abs();
        // a_k / x^k enters P (even k) or Q (odd k) with sign (-1)^floor(k/2).
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    (p, q, last)
}

fn jy_hankel(x: f64) -> BesselJY {
    let amp = (2.0 / (PI * x)).sqrt();
    let mut out = [EvalResult::default(); 4];
    for (n, nu) in [0.0, 1.0].iter().enumerate() {
        let (p, q, tail) = hankel_pq(*nu, x);
        let omega = x - (0.5 * nu + 0.25) * PI;
        let (s, c) = omega.sin_cos();
        let err = amp * (tail + 8.0 * f64::EPSILON * x);
        out[n] = EvalResult { value: amp * (p * c - q * s), abs_error_bound: err };
        out[n + 2] = EvalResult { value: amp * (p * s + q * c), abs_error_bound: err };
    }
    BesselJY { j0: out[0], j1: out[1], y0: out[2], y1: out[3] }
}

/// Modified Bessel function `K_nu(x)` for real order and `x > 0`, by the
/// trapezoidal rule on `∫_0^∞ exp(-x cosh t) cosh(nu t) dt`, whose error
/// decays like `exp(-π^2 / h)`.
pub fn bessel_k(nu: f64, x: f64) -> Result<EvalResult> {
    if !(x > 0.0) || !x.is_finite() || !nu.is_finite() {
        return Err(Error::Domain(format!("bessel_k({nu}, {x})")));
    }
    let nu = nu.abs();
    // Scaled integrand exp(-x (cosh t - 1)) cosh(nu t).
    let f = |t: f64| {
        let s = (0.5 * t).sinh();
        let e = -2.0 * x * s * s + nu * t;
        0.5 * (e.exp() + (e - 2.0 * nu * t).exp())
    };
    let mut h = 0.25;
    let sum_with = |h: f64| {
        let mut s = 0.5 * f(0.0);
        let mut k = 1;
        loop {
            let v = f(k as f64 * h);
            s += v;
            if v < 1e-18 * s && (k as f64 * h) > 1.0 {
                break;
            }
            k += 1;
            if k > 1_000_000 {
                break;
            }
        }
        s * h
    };
    let mut prev = sum_with(h);
    loop {
        h *= 0.5;
        let cur = sum_with(h);
        let diff = (cur - prev).abs();
        if diff <= 1e-15 * cur || h < 1e-3 {
            let scale = (-x).exp();
            return Ok(EvalResult { value: cur * scale, abs_error_bound: (diff + 4.0 * f64::EPSILON * cur) * scale });
        }
        prev = cur;
    }
}

pub fn bessel_k0(x: f64) -> Result<EvalResult> {
    check(x, DOMAIN_K)?;
    bessel_k(0.0, x)
}

pub fn bessel_k1(x: f64) -> Result<EvalResult> {
    check(x, DOMAIN_K)?;
    bessel_k(1.0, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_agree_at_switch() {
        let a = jy_series(SERIES_LIMIT);
        let b = jy_hankel(SERIES_LIMIT);
        for (p, q) in [(a.j0, b.j0), (a.j1, b.j1), (a.y0, b.y0), (a.y1, b.y1)] {
            assert!((p.value - q.value).abs() < 1e-13, "{} vs {}", p.value, q.value);
        }
    }

    #[test]
    fn half_order_k_is_elementary() {
        for &x in &[0.01, 0.5, 3.0, 40.0] {
            let k = bessel_k(0.5, x).unwrap().value;
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!((k / exact - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn domain() {
        assert!(bessel_j1(0.0).is_err());
        assert!(bessel_k1(701.0).is_err());
        assert!(bessel_jy(2e6).is_err());
        assert!(bessel_k(1.0, 200.0).is_ok());
    }
}
