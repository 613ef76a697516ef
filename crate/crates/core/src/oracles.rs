//! Closed-form reference values for the exactly solvable models.
//!
//! Spectral parameter conventions follow [`crate::ensembles`]: `λ = E` for
//! Schrödinger problems, and `w(λ) = ψ'(0)/ψ(0)` for the solution that
//! decays at `+∞`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, integrate_scaled, Tolerance};
use crate::specfun::{airy, bessel_jy, bessel_k0, bessel_k1, kummer_u, ln_gamma};

/// Relative accuracy asked of the oracle quadratures.
const TIGHT: Tolerance = Tolerance { abs: 1e-300, rel: 1e-12 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeCase {
    pub n: f64,
    /// Boundary value of `w` at `λ + i0`; real for `λ < 0`.
    pub w: Complex64,
    pub sigma_prime: f64,
}

/// Free Schrödinger operator on the half-line with boundary condition
/// `ψ(0) cos α − ψ'(0) sin α = 0`.
pub fn free_case(alpha: f64, lambda: f64) -> Result<FreeCase> {
    if !alpha.is_finite() || !lambda.is_finite() {
        return invalid("free_case needs finite α and λ");
    }
    let (s, c) = alpha.sin_cos();
    if lambda > 0.0 {
        let q = lambda.sqrt();
        let w = Complex64::new(c, q * s) / Complex64::new(s, -q * c);
        return Ok(FreeCase { n: q / PI, w, sigma_prime: q / (PI * (s * s + lambda * c * c)) });
    }
    let k = (-lambda).sqrt();
    let den = k * c + s;
    if den.abs() <= 1e-12 * (k * c.abs() + s.abs()).max(1e-300) {
        return Err(Error::PoleHit { level: 0 });
    }
    Ok(FreeCase { n: 0.0, w: Complex64::new((c - k * s) / den, 0.0), sigma_prime: 0.0 })
}

/// Left side of the Kronig–Penney band condition, `Tr A / 2`.
pub fn kronig_penney_half_trace(k: f64, spacing: f64, v: f64) -> f64 {
    let (s, c) = (k * spacing).sin_cos();
    c + s * v / (2.0 * k)
}

pub fn kronig_penney_in_band(k: f64, spacing: f64, v: f64) -> Result<bool> {
    if !(k > 0.0) || !(spacing > 0.0) || !v.is_finite() {
        return invalid("Kronig–Penney needs k > 0, ℓ > 0 and finite v");
    }
    Ok(kronig_penney_half_trace(k, spacing, v).abs() < 1.0)
}

/// Growth rate of the periodic Kronig–Penney solution: zero in bands,
/// `arccosh|Tr A/2| / ℓ` in gaps.
pub fn kronig_penney_gamma(k: f64, spacing: f64, v: f64) -> Result<f64> {
    kronig_penney_in_band(k, spacing, v)?;
    let h = kronig_penney_half_trace(k, spacing, v).abs();
    Ok(if h <= 1.0 { 0.0 } else { h.acosh() / spacing })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousString {
    /// Real for `λ ≤ 0`; `−iπN` inside the band.
    pub omega: Complex64,
    pub n: f64,
    pub sigma_prime: f64,
    pub w: Complex64,
}

/// Periodic string with masses `m` every `ℓ`, for `λ < 4/(mℓ)`.
pub fn homogeneous_string(lambda: f64, mass: f64, spacing: f64) -> Result<HomogeneousString> {
    if !(mass > 0.0) || !(spacing > 0.0) || !lambda.is_finite() {
        return invalid("homogeneous string needs m, ℓ > 0 and finite λ");
    }
    let edge = 4.0 / (mass * spacing);
    if lambda >= edge {
        return Err(Error::Domain(format!("λ = {lambda} is not below the band edge {edge}")));
    }
    let c = 1.0 - 0.5 * lambda * mass * spacing;
    if lambda <= 0.0 {
        let omega = c.acosh() / spacing;
        let w = -(1.0 - (-omega * spacing).exp()) / spacing;
        return Ok(HomogeneousString {
            omega: Complex64::new(omega, 0.0),
            n: 0.0,
            sigma_prime: 0.0,
            w: Complex64::new(w, 0.0),
        });
    }
    let theta = c.acos();
    let w = -(Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, theta)) / spacing;
    Ok(HomogeneousString {
        omega: Complex64::new(0.0, -theta / spacing),
        n: theta / (PI * spacing),
        sigma_prime: theta.sin() / (PI * spacing),
        w,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halperin {
    pub n_airy: f64,
    pub n_integral: f64,
    pub omega: Complex64,
}

fn halperin_check(energy: f64, sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !energy.is_finite() {
        return invalid("Halperin needs σ > 0 and finite E");
    }
    Ok(())
}

fn xi(sigma: f64) -> f64 {
    (0.5 * sigma).cbrt()
}

/// `N` from the Airy functions at `−E/ξ²`.
pub fn halperin_n_airy(energy: f64, sigma: f64) -> Result<f64> {
    halperin_check(energy, sigma)?;
    let xi = xi(sigma);
    let a = airy(-energy / (xi * xi))?;
    Ok(xi / (PI * PI * (a.ai.value.powi(2) + a.bi.value.powi(2))))
}

/// `Ω = ξ (Ai' − i Bi') / (Ai − i Bi)` at `−E/ξ²`.
pub fn halperin_omega(energy: f64, sigma: f64) -> Result<Complex64> {
    halperin_check(energy, sigma)?;
    let xi = xi(sigma);
    let a = airy(-energy / (xi * xi))?;
    let num = Complex64::new(a.ai_prime.value, -a.bi_prime.value);
    let den = Complex64::new(a.ai.value, -a.bi.value);
    Ok(num / den * xi)
}

/// `N` from `1/N = 2√(2π/σ) ∫_0^∞ exp(−(2/σ)(s⁶/12 + E s²)) ds`.
pub fn halperin_n_integral(energy: f64, sigma: f64) -> Result<f64> {
    halperin_check(energy, sigma)?;
    let beta = 2.0 / sigma;
    let g = |s: f64| {
        let s2 = s * s;
        s2 * s2 * s2 / 12.0 + energy * s2
    };
    // Factor out the largest value of the integrand.
    let peak = if energy < 0.0 { (2.0 * (-energy).sqrt()).sqrt() } else { 0.0 };
    let g_min = g(peak);
    let f = |s: f64| (-beta * (g(s) - g_min)).exp();
    let width = sigma.powf(1.0 / 6.0).max(if energy < 0.0 { (sigma / (8.0 * -energy)).sqrt() } else { 0.0 });
    let mut total = integrate_scaled(&f, peak, f64::INFINITY, width, TIGHT)?.value;
    if peak > 0.0 {
        total += integrate(&f, 0.0, peak, TIGHT)?.value;
    }
    let ln_inv = (2.0 * (2.0 * PI / sigma).sqrt()).ln() - beta * g_min + total.ln();
    Ok((-ln_inv).exp())
}

pub fn halperin(energy: f64, sigma: f64) -> Result<Halperin> {
    Ok(Halperin {
        n_airy: halperin_n_airy(energy, sigma)?,
        n_integral: halperin_n_integral(energy, sigma)?,
        omega: halperin_omega(energy, sigma)?,
    })
}

/// Stationary density of the white-noise Riccati diffusion,
/// `f(z) = (2N/σ) ∫_0^∞ exp(−(2/σ)(s³/3 − z s² + (z² + E) s)) ds`.
pub fn halperin_density(energy: f64, sigma: f64, z: f64) -> Result<f64> {
    halperin_check(energy, sigma)?;
    if !z.is_finite() {
        return invalid("density needs finite z");
    }
    let n = halperin_n_airy(energy, sigma)?;
    let beta = 2.0 / sigma;
    let slope0 = z * z + energy;
    let g = |s: f64| s * (s * s / 3.0 - z * s + slope0);
    // Interior minimum of g, where g'(s) = (s − z)² + E vanishes.
    let s_min = if energy < 0.0 { z + (-energy).sqrt() } else { -1.0 };
    let (split, g_min) = if s_min > 0.0 { (s_min, g(s_min).min(0.0)) } else { (0.0, 0.0) };
    let f = |s: f64| (-beta * (g(s) - g_min)).exp();
    let width = if split > 0.0 {
        (sigma / (4.0 * (-energy).sqrt())).sqrt()
    } else if slope0 > 0.0 {
        (1.0 / (beta * slope0)).min(sigma.cbrt())
    } else {
        sigma.cbrt()
    };
    let mut total = integrate_scaled(&f, split, f64::INFINITY, width, TIGHT)?.value;
    if split > 0.0 {
        // A boundary peak at s = 0 can be far narrower than [0, split].
        let mut a = 0.0;
        let mut b = if slope0 > 0.0 { (1.0 / (beta * slope0)).min(split) } else { split };
        loop {
            total += integrate(&f, a, b, TIGHT)?.value;
            if b >= split {
                break;
            }
            a = b;
            b = (2.0 * b).min(split);
        }
    }
    Ok(beta * n * (total.ln() - beta * g_min).exp())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!("{name} must be positive and finite"));
    }
    Ok(())
}

/// Integrated density of states of the string with exponential masses
/// (mean `m`) and exponential spacings (mean `ℓ`).
pub fn kotani_n(lambda: f64, mass: f64, spacing: f64) -> Result<f64> {
    positive("λ", lambda)?;
    positive("m", mass)?;
    positive("ℓ", spacing)?;
    let b = bessel_jy(2.0 / (mass * lambda * spacing).sqrt())?;
    Ok(mass * lambda / (PI * PI * (b.j1.value.powi(2) + b.y1.value.powi(2))))
}

/// Small-`λ` form `√(m/ℓ) √λ / π`.
pub fn kotani_n_asymptote(lambda: f64, mass: f64, spacing: f64) -> Result<f64> {
    positive("λ", lambda)?;
    positive("m", mass)?;
    positive("ℓ", spacing)?;
    Ok((mass / spacing).sqrt() * lambda.sqrt() / PI)
}

/// `E[−w(λ)]` for the string with exponential masses and spacings, `λ < 0`.
pub fn kotani_letac_mean_w(lambda: f64, mass: f64, spacing: f64) -> Result<f64> {
    positive("−λ", -lambda)?;
    positive("m", mass)?;
    positive("ℓ", spacing)?;
    let x = 2.0 / (-mass * lambda * spacing).sqrt();
    Ok((-mass * lambda / spacing).sqrt() * bessel_k0(x)?.value / bessel_k1(x)?.value)
}

/// Parameters `(p, q, r)` of the GIG law of `−w(λ)` in the Kotani–Letac
/// model, in the convention of [`crate::ensembles::density_gig`].
pub fn kotani_letac_law(lambda: f64, mass: f64, spacing: f64) -> Result<(f64, f64, f64)> {
    positive("−λ", -lambda)?;
    positive("m", mass)?;
    positive("ℓ", spacing)?;
    Ok((-1.0, -2.0 / (mass * lambda), 2.0 / spacing))
}

/// `Ω(λ)`, `λ < 0`, for the Frisch–Lloyd model with exponential spacings of
/// mean `ℓ` and exponential couplings of mean `v`.
///
/// `Ω = −2k W'/W` with `W = W_{κ,1/2}(2k/v)`, `κ = −1/(2ℓk)`; the ratio
/// is taken through `U` so that the `e^{−x/2}` factor cancels.
pub fn nieuwenhuizen_omega_negative(lambda: f64, spacing: f64, v: f64) -> Result<f64> {
    positive("−λ", -lambda)?;
    positive("ℓ", spacing)?;
    positive("v", v)?;
    let k = (-lambda).sqrt();
    let x = 2.0 * k / v;
    let a = 1.0 + 1.0 / (2.0 * spacing * k);
    let ratio = a * kummer_u(a + 1.0, 3.0, x)?.value / kummer_u(a, 2.0, x)?.value;
    let w_log_derivative = -0.5 + 1.0 / x - ratio;
    Ok(-2.0 * k * w_log_derivative)
}

/// `E[w(λ)]`, `λ < 0`, for the Type I string (gamma masses, exponential
/// spacings): `−λ Ψ'(p, 1; −λ/q)/Ψ(p, 1; −λ/q)`.
pub fn dyson_type_i_mean_w(lambda: f64, p: f64, q: f64) -> Result<f64> {
    positive("−λ", -lambda)?;
    positive("p", p)?;
    positive("q", q)?;
    let r = -lambda / q;
    Ok(lambda * p * kummer_u(p + 1.0, 2.0, r)?.value / kummer_u(p, 1.0, r)?.value)
}

/// Small-`λ` form `q / ln²(λ/q)` of the mean spectral density near the
/// Dyson singularity.
pub fn dyson_type_i_sigma_prime_asymptote(lambda: f64, q: f64) -> Result<f64> {
    positive("λ", lambda)?;
    positive("q", q)?;
    if lambda >= q {
        return Err(Error::Domain("asymptote only applies for λ < q".into()));
    }
    Ok(q / (lambda / q).ln().powi(2))
}

/// `(1/2π) ∫_0^{2π} ln|A u(θ)| dθ` for `A = [[α, β], [0, 1/α]]`.
pub fn cohen_newman_gamma_quadrature(alpha: f64, beta: f64) -> Result<f64> {
    if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
        return invalid("Cohen–Newman needs finite α ≠ 0 and finite β");
    }
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        let x = alpha * c + beta * s;
        let y = s / alpha;
        0.5 * (x * x + y * y).ln()
    };
    let tol = Tolerance { abs: 1e-14, rel: 1e-13 };
    // Split at the points where the integrand may be sharply peaked.
    let mut total = 0.0;
    for i in 0..4 {
        let a = 0.5 * PI * i as f64;
        total += integrate(f, a, a + 0.5 * PI, tol)?.value;
    }
    Ok(total / (2.0 * PI))
}

/// `½ ln(((α + 1/α)² + β²)/4)`, the value of the quadrature above.
pub fn cohen_newman_closed_form(alpha: f64, beta: f64) -> Result<f64> {
    if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
        return invalid("Cohen–Newman needs finite α ≠ 0 and finite β");
    }
    Ok(0.5 * (((alpha + 1.0 / alpha).powi(2) + beta * beta) / 4.0).ln())
}

/// Leading behaviour `ln N ≈ −(8/(3σ)) |E|^{3/2}` deep in the band tail.
pub fn lifshitz_tail(energy: f64, sigma: f64) -> Result<f64> {
    positive("−E", -energy)?;
    positive("σ", sigma)?;
    Ok(-8.0 / (3.0 * sigma) * (-energy).powf(1.5))
}

/// CDF `1 − e^{−eˣ}` of the rescaled ground-state energy.
pub fn gumbel_cdf(x: f64) -> f64 {
    -(-x.exp()).exp_m1()
}

/// `(LN)ⁿ e^{−LN} / n!`.
pub fn level_poisson_pmf(n: u64, mean: f64) -> Result<f64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return invalid("Poisson mean must be finite and non-negative");
    }
    if mean == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let k = n as f64;
    Ok((k * mean.ln() - mean - ln_gamma(k + 1.0)?.value).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OracleNumber {
    Real(f64),
    Complex(Complex64),
}

impl OracleNumber {
    pub fn re(&self) -> f64 {
        match self {
            OracleNumber::Real(x) => *x,
            OracleNumber::Complex(z) => z.re,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            OracleNumber::Real(x) => x.is_finite(),
            OracleNumber::Complex(z) => z.is_finite(),
        }
    }
}

/// Every named closed form, evaluated from a flat parameter record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    FreeN,
    FreeW,
    FreeSigmaPrime,
    KronigPenneyInBand,
    KronigPenneyGamma,
    StringOmega,
    StringN,
    StringSigmaPrime,
    StringW,
    HalperinNAiry,
    HalperinNIntegral,
    HalperinOmega,
    HalperinDensity,
    KotaniN,
    KotaniNAsymptote,
    KotaniLetacMeanW,
    NieuwenhuizenOmega,
    TypeIMeanW,
    TypeISigmaPrimeAsymptote,
    CohenNewmanQuadrature,
    CohenNewmanClosedForm,
    LifshitzTail,
    GumbelCdf,
    PoissonPmf,
}

impl Formula {
    pub const ALL: [Formula; 24] = [
        Formula::FreeN,
        Formula::FreeW,
        Formula::FreeSigmaPrime,
        Formula::KronigPenneyInBand,
        Formula::KronigPenneyGamma,
        Formula::StringOmega,
        Formula::StringN,
        Formula::StringSigmaPrime,
        Formula::StringW,
        Formula::HalperinNAiry,
        Formula::HalperinNIntegral,
        Formula::HalperinOmega,
        Formula::HalperinDensity,
        Formula::KotaniN,
        Formula::KotaniNAsymptote,
        Formula::KotaniLetacMeanW,
        Formula::NieuwenhuizenOmega,
        Formula::TypeIMeanW,
        Formula::TypeISigmaPrimeAsymptote,
        Formula::CohenNewmanQuadrature,
        Formula::CohenNewmanClosedForm,
        Formula::LifshitzTail,
        Formula::GumbelCdf,
        Formula::PoissonPmf,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Formula::FreeN => "free.n",
            Formula::FreeW => "free.w",
            Formula::FreeSigmaPrime => "free.sigma_prime",
            Formula::KronigPenneyInBand => "kronig_penney.in_band",
            Formula::KronigPenneyGamma => "kronig_penney.gamma",
            Formula::StringOmega => "string.omega",
            Formula::StringN => "string.n",
            Formula::StringSigmaPrime => "string.sigma_prime",
            Formula::StringW => "string.w",
            Formula::HalperinNAiry => "halperin.n_airy",
            Formula::HalperinNIntegral => "halperin.n_integral",
            Formula::HalperinOmega => "halperin.omega",
            Formula::HalperinDensity => "halperin.density",
            Formula::KotaniN => "kotani.n",
            Formula::KotaniNAsymptote => "kotani.n_asymptote",
            Formula::KotaniLetacMeanW => "kotani_letac.mean_minus_w",
            Formula::NieuwenhuizenOmega => "nieuwenhuizen.omega",
            Formula::TypeIMeanW => "type_i.mean_w",
            Formula::TypeISigmaPrimeAsymptote => "type_i.sigma_prime_asymptote",
            Formula::CohenNewmanQuadrature => "cohen_newman.quadrature",
            Formula::CohenNewmanClosedForm => "cohen_newman.closed_form",
            Formula::LifshitzTail => "lifshitz.tail",
            Formula::GumbelCdf => "gumbel.cdf",
            Formula::PoissonPmf => "poisson.pmf",
        }
    }

    /// Parameter names, in the order [`evaluate`](Self::evaluate) reads them.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            Formula::FreeN | Formula::FreeW | Formula::FreeSigmaPrime => &["alpha", "lambda"],
            Formula::KronigPenneyInBand | Formula::KronigPenneyGamma => &["k", "l", "v"],
            Formula::StringOmega | Formula::StringN | Formula::StringSigmaPrime | Formula::StringW => {
                &["lambda", "m", "l"]
            }
            Formula::HalperinNAiry | Formula::HalperinNIntegral | Formula::HalperinOmega => &["energy", "sigma"],
            Formula::HalperinDensity => &["energy", "sigma", "z"],
            Formula::KotaniN | Formula::KotaniNAsymptote | Formula::KotaniLetacMeanW => &["lambda", "m", "l"],
            Formula::NieuwenhuizenOmega => &["lambda", "l", "v"],
            Formula::TypeIMeanW => &["lambda", "p", "q"],
            Formula::TypeISigmaPrimeAsymptote => &["lambda", "q"],
            Formula::CohenNewmanQuadrature | Formula::CohenNewmanClosedForm => &["alpha", "beta"],
            Formula::LifshitzTail => &["energy", "sigma"],
            Formula::GumbelCdf => &["x"],
            Formula::PoissonPmf => &["n", "mean"],
        }
    }

    pub fn evaluate(self, params: &BTreeMap<String, f64>) -> Result<OracleValue> {
        let mut p = Vec::with_capacity(self.params().len());
        for name in self.params() {
            match params.get(*name) {
                Some(v) => p.push(*v),
                None => return invalid(format!("{} needs parameter `{name}`", self.id())),
            }
        }
        let real = OracleNumber::Real;
        let value = match self {
            Formula::FreeN => real(free_case(p[0], p[1])?.n),
            Formula::FreeW => OracleNumber::Complex(free_case(p[0], p[1])?.w),
            Formula::FreeSigmaPrime => real(free_case(p[0], p[1])?.sigma_prime),
            Formula::KronigPenneyInBand => real(if kronig_penney_in_band(p[0], p[1], p[2])? { 1.0 } else { 0.0 }),
            Formula::KronigPenneyGamma => real(kronig_penney_gamma(p[0], p[1], p[2])?),
            Formula::StringOmega => OracleNumber::Complex(homogeneous_string(p[0], p[1], p[2])?.omega),
            Formula::StringN => real(homogeneous_string(p[0], p[1], p[2])?.n),
            Formula::StringSigmaPrime => real(homogeneous_string(p[0], p[1], p[2])?.sigma_prime),
            Formula::StringW => OracleNumber::Complex(homogeneous_string(p[0], p[1], p[2])?.w),
            Formula::HalperinNAiry => real(halperin_n_airy(p[0], p[1])?),
            Formula::HalperinNIntegral => real(halperin_n_integral(p[0], p[1])?),
            Formula::HalperinOmega => OracleNumber::Complex(halperin_omega(p[0], p[1])?),
            Formula::HalperinDensity => real(halperin_density(p[0], p[1], p[2])?),
            Formula::KotaniN => real(kotani_n(p[0], p[1], p[2])?),
            Formula::KotaniNAsymptote => real(kotani_n_asymptote(p[0], p[1], p[2])?),
            Formula::KotaniLetacMeanW => real(kotani_letac_mean_w(p[0], p[1], p[2])?),
            Formula::NieuwenhuizenOmega => real(nieuwenhuizen_omega_negative(p[0], p[1], p[2])?),
            Formula::TypeIMeanW => real(dyson_type_i_mean_w(p[0], p[1], p[2])?),
            Formula::TypeISigmaPrimeAsymptote => real(dyson_type_i_sigma_prime_asymptote(p[0], p[1])?),
            Formula::CohenNewmanQuadrature => real(cohen_newman_gamma_quadrature(p[0], p[1])?),
            Formula::CohenNewmanClosedForm => real(cohen_newman_closed_form(p[0], p[1])?),
            Formula::LifshitzTail => real(lifshitz_tail(p[0], p[1])?),
            Formula::GumbelCdf => real(gumbel_cdf(p[0])),
            Formula::PoissonPmf => {
                if !(p[0] >= 0.0) || p[0].fract() != 0.0 {
                    return invalid("n must be a non-negative integer");
                }
                real(level_poisson_pmf(p[0] as u64, p[1])?)
            }
        };
        let params = self.params().iter().zip(&p).map(|(k, v)| (k.to_string(), *v)).collect();
        Ok(OracleValue { formula: self.id().to_string(), params, value })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formula::ALL
            .iter()
            .copied()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown oracle `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub formula: String,
    pub params: BTreeMap<String, f64>,
    pub value: OracleNumber,
}

/// Evaluates `formula` along `values` of the parameter `vary`, the others
/// held at `fixed`, and writes `vary,value` rows (`vary,re,im` for complex
/// formulas). Points outside the domain are skipped.
pub fn write_grid_csv<W: Write>(
    w: W,
    formula: Formula,
    vary: &str,
    values: &[f64],
    fixed: &BTreeMap<String, f64>,
) -> Result<usize> {
    if !formula.params().contains(&vary) {
        return invalid(format!("{formula} has no parameter `{vary}`"));
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header_done = false;
    let mut rows = 0;
    for &x in values {
        let mut p = fixed.clone();
        p.insert(vary.to_string(), x);
        let v = match formula.evaluate(&p) {
            Ok(v) => v.value,
            Err(Error::Domain(_)) | Err(Error::PoleHit { .. }) => continue,
            Err(e) => return Err(e),
        };
        match v {
            OracleNumber::Real(r) => {
                if !header_done {
                    out.write_record([vary, "value"])?;
                }
                out.write_record([format!("{x:e}"), format!("{r:e}")])?;
            }
            OracleNumber::Complex(z) => {
                if !header_done {
                    out.write_record([vary, "re", "im"])?;
                }
                out.write_record([format!("{x:e}"), format!("{:e}", z.re), format!("{:e}", z.im)])?;
            }
        }
        header_done = true;
        rows += 1;
    }
    out.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::density_kummer;
    use crate::specfun::bessel_k;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn free_case_examples() {
        let h = 0.5 * PI;
        assert!(close(free_case(h, 4.0).unwrap().n, 2.0 / PI, 1e-15));
        assert!(close(free_case(h, -1.0).unwrap().w.re, -1.0, 1e-15));
        assert!(close(free_case(0.0, 1.0).unwrap().sigma_prime, 1.0 / PI, 1e-15));
        let a = 2.0;
        assert!(matches!(free_case(a, -a.tan().powi(2)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn free_w_boundary_value_gives_sigma_prime() {
        for &a in &[0.0, 0.3, 1.2, 2.5] {
            for &l in &[0.2, 1.0, 7.0] {
                let f = free_case(a, l).unwrap();
                assert!(close(f.w.im / PI, f.sigma_prime, 1e-13));
            }
        }
    }

    #[test]
    fn kronig_penney_examples() {
        assert!(kronig_penney_in_band(0.1, 1.0, 1.0).unwrap() == false);
        assert!((kronig_penney_half_trace(0.1, 1.0, 1.0) - 1.494).abs() < 1e-3);
        for &k in &[0.3, 1.0, 2.7] {
            assert!(kronig_penney_in_band(k, 1.3, 0.0).unwrap());
        }
    }

    #[test]
    fn homogeneous_string_examples() {
        let s = homogeneous_string(2.0, 1.0, 1.0).unwrap();
        assert!(close(s.n, 0.5, 1e-15));
        let s = homogeneous_string(-1.0, 1.0, 1.0).unwrap();
        assert!(close(s.omega.re, ((3.0 + 5f64.sqrt()) / 2.0).ln(), 1e-14));
        assert!(close(homogeneous_string(1.0, 1.0, 1.0).unwrap().n, 1.0 / 3.0, 1e-14));
        assert!(homogeneous_string(4.0, 1.0, 1.0).is_err());
        // In-band consistency: Im w / π = σ', Im Ω = −πN.
        for &l in &[0.1, 1.0, 3.5] {
            let s = homogeneous_string(l, 1.0, 1.0).unwrap();
            assert!(close(s.w.im / PI, s.sigma_prime, 1e-13));
            assert!(close(s.omega.im, -PI * s.n, 1e-13));
        }
    }

    #[test]
    fn halperin_at_zero_energy() {
        let a = airy(0.0).unwrap();
        let n = 1.0 / (PI * PI * (a.ai.value.powi(2) + a.bi.value.powi(2)));
        let h = halperin(0.0, 2.0).unwrap();
        assert!(close(h.n_airy, n, 1e-14));
        assert!(close(h.n_integral, n, 1e-10));
        assert!(close(h.omega.im, -PI * h.n_airy, 1e-12));
    }

    #[test]
    fn halperin_representations_agree() {
        for &s in &[0.5, 2.0, 8.0] {
            for i in 0..=80 {
                let e = -10.0 + 0.25 * i as f64;
                let h = halperin(e, s).unwrap();
                assert!(close(h.n_integral, h.n_airy, 1e-8), "E={e} σ={s}: {} vs {}", h.n_integral, h.n_airy);
            }
        }
    }

    #[test]
    fn halperin_density_tails() {
        for &(e, s) in &[(0.0, 2.0), (-1.0, 1.0), (3.0, 0.5)] {
            let n = halperin_n_airy(e, s).unwrap();
            for z in [-50.0f64, 50.0] {
                let f = halperin_density(e, s, z).unwrap();
                assert!(close(z * z * f, n, 0.01), "E={e} σ={s} z={z}: {} vs {n}", z * z * f);
            }
        }
    }

    #[test]
    fn halperin_density_normalized() {
        let (e, s) = (-0.5, 1.0);
        let n = halperin_n_airy(e, s).unwrap();
        let f = |z: f64| halperin_density(e, s, z).unwrap();
        let tol = Tolerance { abs: 1e-10, rel: 1e-8 };
        let body = integrate(f, -30.0, 30.0, tol).unwrap().value;
        // Beyond ±30 the density is N/z² to within a fraction of a percent.
        let total = body + 2.0 * n / 30.0;
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn kotani_limits() {
        let b = bessel_jy(2.0).unwrap();
        let n = 1.0 / (PI * PI * (b.j1.value.powi(2) + b.y1.value.powi(2)));
        assert!(close(kotani_n(1.0, 1.0, 1.0).unwrap(), n, 1e-15));
        let l = 1e-4;
        let r = kotani_n(l, 1.0, 1.0).unwrap() / kotani_n_asymptote(l, 1.0, 1.0).unwrap();
        assert!((r - 1.0).abs() < 0.02, "{r}");
        let mut prev = 0.0;
        for i in 1..=200 {
            let v = kotani_n(0.05 * i as f64, 1.0, 1.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn kotani_letac_matches_gig_mean() {
        let m = kotani_letac_mean_w(-1.0, 1.0, 1.0).unwrap();
        assert!(close(m, bessel_k0(2.0).unwrap().value / bessel_k1(2.0).unwrap().value, 1e-14));
        let (p, q, r) = kotani_letac_law(-0.7, 1.3, 0.6).unwrap();
        let s = (q * r).sqrt();
        let gig_mean = (r / q).sqrt() * bessel_k(p + 1.0, s).unwrap().value / bessel_k(p, s).unwrap().value;
        assert!(close(gig_mean, kotani_letac_mean_w(-0.7, 1.3, 0.6).unwrap(), 1e-12));
    }

    #[test]
    fn nieuwenhuizen_limits() {
        let o = nieuwenhuizen_omega_negative(-1.0, 1.0, 1e-4).unwrap();
        assert!((o - 1.0).abs() < 1e-3, "{o}");
        for i in 0..16 {
            let l = -0.25 - 0.25 * i as f64;
            let o = nieuwenhuizen_omega_negative(l, 1.0, 1.0).unwrap();
            assert!(o > (-l).sqrt(), "λ={l}: {o}");
        }
    }

    #[test]
    fn type_i_mean_matches_kummer_quadrature() {
        let (l, p, q) = (-1.0, 1.0, 1.0);
        let r = -l / q;
        let f = |y: f64| y * density_kummer(p, 0.0, r, y).unwrap();
        let mean = integrate(f, 0.0, f64::INFINITY, Tolerance { abs: 1e-14, rel: 1e-12 }).unwrap().value;
        let w = dyson_type_i_mean_w(l, p, q).unwrap();
        assert!(close(w / l, mean, 1e-6), "{} vs {mean}", w / l);
    }

    #[test]
    fn cohen_newman_quadrature_closed_form() {
        assert!(cohen_newman_gamma_quadrature(1.0, 0.0).unwrap().abs() < 1e-14);
        for &(a, b) in &[(2.0, 0.0), (0.5, 1.0), (3.0, -2.0), (-1.5, 0.7)] {
            let q = cohen_newman_gamma_quadrature(a, b).unwrap();
            assert!((q - cohen_newman_closed_form(a, b).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn tails_and_counting() {
        assert!(close(lifshitz_tail(-4.0, 1.0).unwrap(), -64.0 / 3.0, 1e-15));
        assert!(close(gumbel_cdf(0.0), 1.0 - (-1f64).exp(), 1e-15));
        let s: f64 = (0..100).map(|n| level_poisson_pmf(n, 3.0).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dispatcher_roundtrip() {
        for f in Formula::ALL {
            assert_eq!(f.id().parse::<Formula>().unwrap(), f);
        }
        let p: BTreeMap<String, f64> = [("alpha".to_string(), 0.5 * PI), ("lambda".to_string(), 4.0)].into();
        let v = Formula::FreeN.evaluate(&p).unwrap();
        assert!(close(v.value.re(), 2.0 / PI, 1e-15));
        assert!(Formula::KotaniN.evaluate(&p).is_err());
    }

    #[test]
    fn grid_csv_skips_poles() {
        let fixed: BTreeMap<String, f64> = [("alpha".to_string(), 0.0)].into();
        let mut buf = Vec::new();
        let rows = write_grid_csv(&mut buf, Formula::FreeW, "lambda", &[-1.0, 0.0, 1.0], &fixed).unwrap();
        assert_eq!(rows, 2);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("lambda,re,im"));
    }
}
