use num_complex::Complex64;

use super::Distribution;
use crate::error::{invalid, Result};
use crate::specfun::{bessel_k, kummer_u, ln_gamma};

/// `Gamma(p, q)` density `x^{p-1} e^{-x/q} / (q^p Γ(p))`.
pub fn density_gamma(p: f64, q: f64, x: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) {
        return invalid("gamma density needs p, q > 0");
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(((p - 1.0) * x.ln() - x / q - p * q.ln() - ln_gamma(p)?.value).exp())
}

/// Generalized inverse Gaussian `GIG(p, q, r)`:
/// `(q/r)^{p/2} / (2 K_p(√(q r))) x^{p-1} exp(-(q x + r/x)/2)`.
pub fn density_gig(p: f64, q: f64, r: f64, x: f64) -> Result<f64> {
    if !(q > 0.0 && r > 0.0) || !p.is_finite() {
        return invalid("GIG density needs q, r > 0");
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let k = bessel_k(p, (q * r).sqrt())?.value;
    let ln = 0.5 * p * (q / r).ln() - (2.0 * k).ln() + (p - 1.0) * x.ln() - 0.5 * (q * x + r / x);
    Ok(ln.exp())
}

/// Kummer law `Kummer(p, q, r)`:
/// `y^{p-1} (1+y)^{-p-q} e^{-r y} / (Γ(p) U(p, 1-q, r))`.
pub fn density_kummer(p: f64, q: f64, r: f64, y: f64) -> Result<f64> {
    if !(p > 0.0 && r > 0.0) || !q.is_finite() {
        return invalid("Kummer density needs p > 0, r > 0");
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    let norm = ln_gamma(p)?.value + kummer_u(p, 1.0 - q, r)?.value.ln();
    Ok(((p - 1.0) * y.ln() - (p + q) * y.ln_1p() - r * y - norm).exp())
}

/// Lévy exponent `Λ(θ) = (E e^{iθv} - 1) / l` of the compound Poisson
/// potential with coupling law `coupling` and mean spacing `l`.
pub fn levy_exponent(coupling: &Distribution, mean_spacing: f64, theta: f64) -> Result<Complex64> {
    coupling.validate()?;
    if !(mean_spacing > 0.0) || !theta.is_finite() {
        return invalid("levy exponent needs a positive mean spacing and finite θ");
    }
    Ok((coupling.characteristic(theta) - 1.0) / mean_spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};

    #[test]
    fn densities_normalized() {
        let t = Tolerance { abs: 1e-11, rel: 1e-10 };
        let g = integrate(|x| density_gig(-1.0, 2.0, 2.0, x).unwrap(), 0.0, f64::INFINITY, t).unwrap();
        assert!((g.value - 1.0).abs() < 1e-9, "{g:?}");
        let g = integrate(|x| density_gig(0.7, 0.5, 3.0, x).unwrap(), 0.0, f64::INFINITY, t).unwrap();
        assert!((g.value - 1.0).abs() < 1e-9);
        let k = integrate(|y| density_kummer(1.0, 0.0, 1.0, y).unwrap(), 0.0, f64::INFINITY, t).unwrap();
        assert!((k.value - 1.0).abs() < 1e-9);
        let k = integrate(|y| density_kummer(2.5, 0.3, 0.4, y).unwrap(), 0.0, f64::INFINITY, t).unwrap();
        assert!((k.value - 1.0).abs() < 1e-9);
        let m = integrate(|x| density_gamma(0.5, 2.0, x).unwrap(), 0.0, f64::INFINITY, t).unwrap();
        assert!((m.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn laplace_levy_exponent_is_rational() {
        let a: f64 = 3.0;
        let l = 0.5;
        let th = 1.3;
        let lam = levy_exponent(&Distribution::Laplace { rate: a }, l, th).unwrap();
        let exact = (a * a / (a * a + th * th) - 1.0) / l;
        assert!((lam.re - exact).abs() < 1e-14 && lam.im.abs() < 1e-14);
        assert!(levy_exponent(&Distribution::Laplace { rate: a }, 0.0, th).is_err());
    }
}
