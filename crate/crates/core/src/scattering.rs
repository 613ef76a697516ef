//! Transmission through finite Schrödinger samples and the reflexion phase
//! of semi-infinite ones.
//!
//! Everything is computed at unit wavenumber: a sample at wavenumber `k`
//! is mapped to `k = 1` by `x → kx`, which sends spacings `ℓ → kℓ` and
//! couplings `v → v/k`. In these units the free transfer matrix on
//! `(ψ', ψ)` is a rotation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Matrix2;
use crate::ensembles::{Cell, EnsembleSpec, ImpurityKind, RandomStream, Sampler};
use crate::error::{invalid, Error, Result};
use crate::riccati::HistogramDensity;
use crate::spectral::Realization;
use crate::stats::{fit_line, mean_stderr, Estimate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterResult {
    pub r: Complex64,
    pub t: Complex64,
    /// `ln|T|`, finite even when `T` underflows.
    pub ln_abs_t: f64,
    pub length: f64,
    pub k: f64,
}

impl ScatterResult {
    /// `Θ = arg R ∈ [−π, π)`, or `None` when `R = 0`.
    pub fn phase(&self) -> Option<f64> {
        if self.r.norm() == 0.0 {
            return None;
        }
        Some(wrap_phase(self.r.arg()))
    }
}

fn wrap_phase(t: f64) -> f64 {
    if t >= PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Transfer matrix of one cell at unit wavenumber.
fn unit_cell(c: Cell, k: f64) -> Matrix2 {
    Matrix2::rotation(k * c.spacing) * Matrix2::new(1.0, c.weight / k, 0.0, 1.0)
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return invalid("scattering needs a wavenumber k > 0");
    }
    Ok(())
}

/// Running product `P = A_n ⋯ A_0` at unit wavenumber, kept normalized.
#[derive(Debug, Clone, Copy)]
struct Transfer {
    m: Matrix2,
    ln_scale: f64,
    /// Sample length in rescaled units.
    x: f64,
}

impl Transfer {
    fn new() -> Self {
        Transfer { m: Matrix2::IDENTITY, ln_scale: 0.0, x: 0.0 }
    }

    fn push(&mut self, c: Cell, k: f64) {
        self.m = unit_cell(c, k) * self.m;
        self.ln_scale += self.m.normalize();
        self.x += k * c.spacing;
    }

    /// The product followed by a free stretch of rescaled length `y`.
    fn extended(&self, y: f64) -> Transfer {
        Transfer { m: Matrix2::rotation(y) * self.m, ln_scale: self.ln_scale, x: self.x + y }
    }

    /// `𝒳(z) = P⁻¹(z)`.
    fn backward(&self, z: Complex64) -> Complex64 {
        self.act(self.m.adjugate(), z)
    }

    /// `P(z)`.
    fn forward(&self, z: Complex64) -> Complex64 {
        self.act(self.m, z)
    }

    /// Möbius action of the rescaled `m`. The imaginary part is taken as
    /// `e^{−2s} Im z / |cz + d|²` from the true unit determinant, since the
    /// normalized matrix has lost it to rounding.
    fn act(&self, m: Matrix2, z: Complex64) -> Complex64 {
        let den = Complex64::new(m.c, 0.0) * z + m.d;
        let w = m.mobius_complex(z);
        Complex64::new(w.re, (-2.0 * self.ln_scale).exp() * z.im / den.norm_sqr())
    }

    fn reflexion(&self) -> Complex64 {
        let Matrix2 { a, b, c, d } = self.m;
        Complex64::new(b + c, a - d) / Complex64::new(c - b, a + d)
    }

    fn ln_abs_t(&self) -> f64 {
        // |T|² = 4 / (2 + |P|²), and with det P = 1,
        // |P|² − 2 = (a − d)² + (b + c)², which vanishes for a rotation.
        let Matrix2 { a, b, c, d } = self.m;
        let q = (a - d).powi(2) + (b + c).powi(2);
        if q == 0.0 {
            return 0.0;
        }
        let lq = q.ln() + 2.0 * self.ln_scale - 4f64.ln();
        if lq > 0.0 {
            -0.5 * (lq + (-lq).exp().ln_1p())
        } else {
            -0.5 * lq.exp().ln_1p()
        }
    }

    fn result(&self, k: f64) -> ScatterResult {
        let Matrix2 { a, b, c, d } = self.m;
        let ln_abs_t = self.ln_abs_t();
        let arg = (Complex64::from_polar(1.0, -self.x) / Complex64::new(a + d, b - c)).arg();
        ScatterResult {
            r: self.reflexion(),
            t: Complex64::from_polar(ln_abs_t.exp(), arg),
            ln_abs_t,
            length: self.x / k,
            k,
        }
    }
}

/// Reflexion point `R = −(𝒳(i) − i)/(𝒳(i) + i)`.
pub fn reflexion_from_x(x: Complex64) -> Complex64 {
    let i = Complex64::i();
    -(x - i) / (x + i)
}

/// `R` and `T` for a plane wave of wavenumber `k` incident from the left
/// on `real`, which occupies `[0, L]`.
pub fn rt_coefficients(real: &Realization, k: f64) -> Result<ScatterResult> {
    check_k(k)?;
    if real.kind != ImpurityKind::Schrodinger {
        return invalid("scattering is defined for Schrödinger impurities");
    }
    real.validate()?;
    let mut p = Transfer::new();
    for c in &real.cells {
        p.push(*c, k);
    }
    Ok(p.result(k))
}

/// `𝒳(i) = P⁻¹(i)` for a realization, a point of the upper half-plane.
pub fn backward_point(real: &Realization, k: f64) -> Result<Complex64> {
    check_k(k)?;
    let mut p = Transfer::new();
    for c in &real.cells {
        p.push(*c, k);
    }
    Ok(p.backward(Complex64::i()))
}

fn check_spec(spec: &EnsembleSpec) -> Result<()> {
    match spec {
        EnsembleSpec::FrischLloyd { .. } | EnsembleSpec::KronigPenney { .. } => spec.validate(),
        other => invalid(format!("scattering is implemented for Schrödinger impurity models, not {}", other.tag())),
    }
}

/// Fit of `E ln|T_L|` against `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Mean over replicas of the per-replica slopes; `−γ` when `γ > 0`.
    pub slope: Estimate,
    pub intercept: f64,
    pub r2: f64,
    pub lengths: Vec<f64>,
    pub mean_ln_t: Vec<f64>,
}

impl DecayFit {
    pub fn to_json(&self, gamma_ref: Option<f64>) -> serde_json::Value {
        serde_json::json!({
            "slope": self.slope.value,
            "slope_stderr": self.slope.stderr,
            "intercept": self.intercept,
            "r2": self.r2,
            "gamma_ref": gamma_ref,
        })
    }
}

/// `ln|T_L|` at each of the increasing `lengths`, all along one sample.
fn ln_t_profile(spec: &EnsembleSpec, k: f64, lengths: &[f64], rng: RandomStream) -> Result<Vec<f64>> {
    let mut s = Sampler::new(spec, rng)?;
    let mut p = Transfer::new();
    let mut out = Vec::with_capacity(lengths.len());
    let mut cell = s.leading_cell();
    for &len in lengths {
        let target = k * len;
        while p.x + k * cell.spacing <= target {
            p.push(cell, k);
            cell = s.next_cell();
        }
        out.push(p.extended(target - p.x).ln_abs_t());
    }
    Ok(out)
}

/// Decay of the transmission with the sample length. Replica `r` grows one
/// sample from stream `(seed, r)` through all `lengths`.
///
/// Fails with `FitUnstable` when the fit has `R² < 0.99` and the profile
/// decays; flat profiles (bands, free propagation), where the mean `ln|T|`
/// moves by less than one unit over all lengths, report their slope.
pub fn decay_rate(spec: &EnsembleSpec, k: f64, lengths: &[f64], replicas: u32, seed: u64) -> Result<DecayFit> {
    check_k(k)?;
    check_spec(spec)?;
    if lengths.len() < 3 || lengths.windows(2).any(|w| !(w[1] > w[0])) || !(lengths[0] > 0.0) {
        return invalid("need at least three increasing positive lengths");
    }
    if replicas == 0 {
        return invalid("need at least one replica");
    }
    let profiles = (0..replicas)
        .into_par_iter()
        .map(|r| ln_t_profile(spec, k, lengths, RandomStream::new(seed, r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut slopes = Vec::with_capacity(profiles.len());
    for p in &profiles {
        slopes.push(fit_line(lengths, p)?.slope);
    }
    let mean_ln_t: Vec<f64> = (0..lengths.len())
        .map(|i| profiles.iter().map(|p| p[i]).sum::<f64>() / profiles.len() as f64)
        .collect();
    let fit = fit_line(lengths, &mean_ln_t)?;
    let (value, stderr) = if slopes.len() > 1 { mean_stderr(&slopes) } else { (fit.slope, fit.slope_stderr) };
    let spread = mean_ln_t.iter().fold(0.0f64, |m, y| m.max((y - mean_ln_t[0]).abs()));
    // Less than one e-fold across all lengths is not a measurable decay.
    let flat = spread < 1.0 || value.abs() <= 3.0 * stderr.max(fit.slope_stderr);
    if fit.r2 < 0.99 && !flat {
        return Err(Error::FitUnstable(fit.r2));
    }
    Ok(DecayFit {
        slope: Estimate { value, stderr, n: replicas as u64, seed },
        intercept: fit.intercept,
        r2: fit.r2,
        lengths: lengths.to_vec(),
        mean_ln_t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptions {
    pub k: f64,
    /// Agreement required between the iterates started at `i` and `2i`.
    pub tol: f64,
    /// Largest number of impurities per sample.
    pub cap: usize,
}

impl PhaseOptions {
    pub fn new(k: f64) -> Self {
        PhaseOptions { k, tol: 1e-10, cap: 100_000 }
    }
}

/// Limit phase `Θ_∞` of the reflexion coefficient of one semi-infinite
/// sample, from the backward iterates `𝒳_n(i)` and `𝒳_n(2i)`. `None`
/// flags a sample that does not reflect at all.
pub fn reflexion_phase(spec: &EnsembleSpec, opts: &PhaseOptions, rng: RandomStream) -> Result<Option<f64>> {
    check_k(opts.k)?;
    check_spec(spec)?;
    let mut s = Sampler::new(spec, rng)?;
    let mut p = Transfer::new();
    p.push(s.leading_cell(), opts.k);
    let (i1, i2) = (Complex64::i(), Complex64::new(0.0, 2.0));
    let mut gap = f64::INFINITY;
    for _ in 0..opts.cap {
        p.push(s.next_cell(), opts.k);
        let r1 = reflexion_from_x(p.backward(i1));
        let r2 = reflexion_from_x(p.backward(i2));
        gap = (r1 - r2).norm();
        if gap < opts.tol {
            return Ok(Some(wrap_phase(r1.arg())));
        }
    }
    if p.reflexion().norm() < 1e-12 {
        return Ok(None);
    }
    Err(Error::NonConvergence { iterations: opts.cap, last_change: gap })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseHistogram {
    pub hist: HistogramDensity,
    /// Samples with `R = 0`, not binned.
    pub degenerate: u64,
    pub phases: Vec<f64>,
}

/// Phases of `replicas` independent semi-infinite samples, replica `r`
/// from stream `(seed, r)`, binned into `bins` equal bins on `[−π, π)`.
pub fn reflexion_phase_histogram(
    spec: &EnsembleSpec,
    opts: &PhaseOptions,
    replicas: u32,
    bins: usize,
    seed: u64,
) -> Result<PhaseHistogram> {
    let mut hist = HistogramDensity::uniform(-PI, PI, bins)?;
    let samples = (0..replicas)
        .into_par_iter()
        .map(|r| reflexion_phase(spec, opts, RandomStream::new(seed, r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut degenerate = 0;
    let mut phases = Vec::with_capacity(samples.len());
    for s in samples {
        match s {
            Some(t) => {
                hist.add(t);
                phases.push(t);
            }
            None => degenerate += 1,
        }
    }
    Ok(PhaseHistogram { hist, degenerate, phases })
}

/// Point `u = −X_∞` of the real line corresponding to the phase `θ`.
pub fn phase_to_riccati(theta: f64) -> f64 {
    -theta.sin() / (1.0 + theta.cos())
}

/// Density of `Θ_∞` at `θ` given the stationary Riccati density `f` of
/// `−X_∞`: `f(u(θ)) / (1 + cos θ)`.
pub fn phase_density<F: Fn(f64) -> f64>(f: F, theta: f64) -> f64 {
    f(phase_to_riccati(theta)) / (1.0 + theta.cos())
}

/// Phase law on `[−π, π)` induced by a histogram of the stationary
/// Riccati variable: bin `[θ₀, θ₁)` receives the mass of `[u(θ₁), u(θ₀)]`.
/// The histogram's tail masses land next to `θ = ±π`.
pub fn phase_density_from_f(f: &HistogramDensity, bins: usize) -> Result<HistogramDensity> {
    let mut out = HistogramDensity::uniform(-PI, PI, bins)?;
    let total = f.n;
    if !(total > 0.0) {
        return invalid("empty Riccati histogram");
    }
    let cdf = |u: f64| {
        if u == f64::INFINITY {
            1.0
        } else if u < f.lo() {
            // The lower tail sits just below the range.
            f.below / total * if u == f64::NEG_INFINITY { 0.0 } else { 1.0 }
        } else if u >= f.hi() {
            1.0 - f.above / total
        } else {
            f.cdf(u)
        }
    };
    let u_at = |theta: f64| {
        if theta <= -PI {
            f64::INFINITY
        } else if theta >= PI {
            f64::NEG_INFINITY
        } else {
            phase_to_riccati(theta)
        }
    };
    for i in 0..bins {
        let (t0, t1) = (out.edges[i], out.edges[i + 1]);
        out.counts[i] = (cdf(u_at(t0)) - cdf(u_at(t1))).max(0.0);
    }
    out.n = 1.0;
    Ok(out)
}

/// Backward points `𝒳_n(i)` and forward points `A_n ⋯ A_0 (i)` along one
/// sample, `n = 0..count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringOrbits {
    pub backward: Vec<Complex64>,
    pub forward: Vec<Complex64>,
}

pub fn scattering_orbits(spec: &EnsembleSpec, k: f64, count: usize, rng: RandomStream) -> Result<ScatteringOrbits> {
    check_k(k)?;
    check_spec(spec)?;
    let mut s = Sampler::new(spec, rng)?;
    let mut p = Transfer::new();
    p.push(s.leading_cell(), k);
    let mut backward = Vec::with_capacity(count);
    let mut forward = Vec::with_capacity(count);
    for _ in 0..count {
        backward.push(p.backward(Complex64::i()));
        forward.push(p.forward(Complex64::i()));
        p.push(s.next_cell(), k);
    }
    Ok(ScatteringOrbits { backward, forward })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{cosh_distance, HalfPlanePoint};

    fn sample(n: usize, seed: u64) -> Realization {
        let mut rng = RandomStream::new(seed, 0);
        let mut cells = vec![Cell { spacing: 0.1 + rng.uniform(), weight: 0.0 }];
        for _ in 0..n {
            cells.push(Cell { spacing: 0.1 + 2.0 * rng.uniform(), weight: 4.0 * rng.uniform() - 2.0 });
        }
        Realization::new(ImpurityKind::Schrodinger, cells).unwrap()
    }

    #[test]
    fn empty_sample_transmits() {
        let r = rt_coefficients(&Realization::free(ImpurityKind::Schrodinger, 3.0).unwrap(), 1.0).unwrap();
        assert!(r.r.norm() < 1e-15);
        assert!((r.t.norm() - 1.0).abs() < 1e-15);
        assert!(r.phase().is_none());
    }

    #[test]
    fn frobenius_transmission() {
        let mut p = Transfer::new();
        p.m = Matrix2::diag(2.0, 0.5);
        assert!((2.0 * p.ln_abs_t() - 0.64f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn unitarity() {
        for seed in 0..200 {
            let r = rt_coefficients(&sample(1 + seed as usize % 30, seed), 0.5 + seed as f64 * 0.01).unwrap();
            assert!((r.r.norm_sqr() + r.t.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn backward_point_stays_in_upper_half_plane() {
        for seed in 0..50 {
            assert!(backward_point(&sample(40, seed), 1.3).unwrap().im > 0.0);
        }
    }

    #[test]
    fn hyperbolic_identities() {
        let a = Matrix2::new(2.0, 1.0, 3.0, 2.0);
        let z = HalfPlanePoint::i().act(&a).unwrap();
        assert!((2.0 * cosh_distance(&HalfPlanePoint::i(), &z) - a.frobenius_sq()).abs() < 1e-12);
        let w = HalfPlanePoint::new(0.3, 0.7).unwrap();
        let rho = cosh_distance(&w, &HalfPlanePoint::i()).acosh();
        let i = Complex64::i();
        assert!(((0.5 * rho).tanh() - ((w.to_complex() - i) / (w.to_complex() + i)).norm()).abs() < 1e-12);
    }

    #[test]
    fn phase_law_of_a_cauchy_riccati_variable_is_uniform() {
        // A standard Cauchy u maps to a uniform phase.
        let f = |u: f64| 1.0 / (PI * (1.0 + u * u));
        for &t in &[-3.0, -1.0, 0.0, 0.4, 2.9] {
            assert!((phase_density(f, t) - 1.0 / (2.0 * PI)).abs() < 1e-12);
        }
        let edges = HistogramDensity::uniform(-50.0, 50.0, 400).unwrap().edges;
        let h = HistogramDensity::from_density(f, edges, 1.0).unwrap();
        let p = phase_density_from_f(&h, 16).unwrap();
        assert!((p.integral() - 1.0).abs() < 1e-6);
        for i in 0..16 {
            assert!((p.mass(i) - 1.0 / 16.0).abs() < 2e-3, "{i}: {}", p.mass(i));
        }
    }
}
