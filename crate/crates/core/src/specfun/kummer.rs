use super::gamma::ln_gamma;
use super::EvalResult;
use crate::error::{Error, Result};

fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn logistic(s: f64) -> f64 {
    if s > 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Logarithm of `∫_0^∞ e^{-x t} t^{a-1} (1+t)^{b-a-1} dt`.
///
/// With `t = e^s` the integrand is analytic in the strip `|Im s| < π/2` and
/// decays at both ends, so the trapezoidal rule converges geometrically in
/// `1/h`; the step is halved until successive sums agree.
fn ln_kummer_integral(a: f64, b: f64, x: f64) -> Result<(f64, f64)> {
    let c = b - a - 1.0;
    let phi = |s: f64| -x * s.exp() + a * s + c * softplus(s);
    let dphi = |s: f64| -x * s.exp() + a + c * logistic(s);
    // Bracket a stationary point of phi to centre the grid.
    let mut hi = ((a + c.abs() + 1.0) / x).ln() + 1.0;
    let mut lo = hi - 1.0;
    while dphi(lo) <= 0.0 {
        lo -= 2.0 * (hi - lo);
        if lo < -1e6 {
            return Err(Error::Domain(format!("kummer_u({a}, {b}, {x}): no interior maximum")));
        }
    }
    while dphi(hi) > 0.0 {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dphi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let centre = 0.5 * (lo + hi);
    let ref_phi = phi(centre);
    let trap = |h: f64| -> f64 {
        let mut sum = (phi(centre) - ref_phi).exp();
        for dir in [-1.0, 1.0] {
            let mut k = 1;
            let mut small = 0;
            loop {
                let v = (phi(centre + dir * k as f64 * h) - ref_phi).exp();
                sum += v;
                if v < 1e-20 * sum {
                    small += 1;
                    if small > 3 {
                        break;
                    }
                } else {
                    small = 0;
                }
                k += 1;
                if k > 50_000_000 {
                    break;
                }
            }
        }
        sum * h
    };
    let mut h = 0.5;
    let mut prev = trap(h);
    loop {
        h *= 0.5;
        let cur = trap(h);
        let rel = ((cur - prev) / cur).abs();
        if rel < 1e-13 || h < 1e-4 {
            if rel > 1e-8 {
                return Err(Error::Quadrature(format!("kummer_u({a}, {b}, {x}) stalled at relative change {rel:e}")));
            }
            return Ok((ref_phi + cur.ln(), rel + 1e-14));
        }
        prev = cur;
    }
}

/// Tricomi's confluent hypergeometric function `U(a, b, x)` for `a > 0`,
/// `x > 0`.
pub fn kummer_u(a: f64, b: f64, x: f64) -> Result<EvalResult> {
    if !(a > 0.0) || !(x > 0.0) || !a.is_finite() || !b.is_finite() || !x.is_finite() {
        return Err(Error::Domain(format!("kummer_u needs a > 0, x > 0 (got a={a}, b={b}, x={x})")));
    }
    let (ln_int, rel) = ln_kummer_integral(a, b, x)?;
    let value = (ln_int - ln_gamma(a)?.value).exp();
    Ok(EvalResult { value, abs_error_bound: value * (rel + 1e-13 * (1.0 + ln_int.abs())) })
}

/// `dU/dx = -a U(a+1, b+1, x)`.
pub fn kummer_u_prime(a: f64, b: f64, x: f64) -> Result<EvalResult> {
    let u = kummer_u(a + 1.0, b + 1.0, x)?;
    Ok(EvalResult { value: -a * u.value, abs_error_bound: a * u.abs_error_bound })
}

/// Whittaker `W_{κ,μ}(x) = e^{-x/2} x^{μ+1/2} U(μ-κ+1/2, 1+2μ, x)`, with
/// `μ - κ + 1/2 > 0`.
pub fn whittaker_w(kappa: f64, mu: f64, x: f64) -> Result<EvalResult> {
    let a = mu - kappa + 0.5;
    let u = kummer_u(a, 1.0 + 2.0 * mu, x)?;
    let f = (-0.5 * x + (mu + 0.5) * x.ln()).exp();
    Ok(EvalResult { value: f * u.value, abs_error_bound: f * u.abs_error_bound })
}

/// `d/dx W_{κ,μ}(x)`.
pub fn whittaker_w_prime(kappa: f64, mu: f64, x: f64) -> Result<EvalResult> {
    let a = mu - kappa + 0.5;
    let b = 1.0 + 2.0 * mu;
    let u = kummer_u(a, b, x)?;
    let up = kummer_u_prime(a, b, x)?;
    let f = (-0.5 * x + (mu + 0.5) * x.ln()).exp();
    let g = -0.5 + (mu + 0.5) / x;
    let value = f * (g * u.value + up.value);
    let err = f * (g.abs() * u.abs_error_bound + up.abs_error_bound);
    Ok(EvalResult { value, abs_error_bound: err })
}
