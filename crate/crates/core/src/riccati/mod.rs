//! The Riccati variable `Z = ψ'/ψ` of impurity models: forward orbits,
//! backward continued-fraction limits, stationary densities and the
//! white-noise SDE.

mod histogram;
mod sde;

pub use histogram::HistogramDensity;
pub use sde::{
    default_dt, default_z_max, first_passage_stats, sde_white_noise_run, FirstPassageOptions, FirstPassageStats,
    SdeOptions, SdeRun,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::algebra::{Matrix2, Slope};
use crate::ensembles::{cell_matrix, free_matrix, kick_matrix, EnsembleSpec, ImpurityKind, RandomStream, Sampler};
use crate::error::{invalid, Error, Result};
use crate::stats::{mean_stderr, BatchMeans, CompensatedSum, Estimate, BATCHES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiOrbitConfig {
    pub burn_in: u64,
    pub samples: u64,
    /// Reinjection threshold for the SDE; unused by the exact maps.
    pub z_max: f64,
    /// `Z(0)`; infinity is allowed.
    pub z0: f64,
}

impl Default for RiccatiOrbitConfig {
    fn default() -> Self {
        RiccatiOrbitConfig { burn_in: 1000, samples: 100_000, z_max: 100.0, z0: 0.0 }
    }
}

impl RiccatiOrbitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_max >= 10.0) {
            return invalid("z_max must be at least 10");
        }
        if self.burn_in < 1000 {
            return invalid("burn-in must be at least 1000 steps");
        }
        if self.z0.is_nan() {
            return invalid("initial z is NaN");
        }
        Ok(())
    }
}

fn impurity(spec: &EnsembleSpec) -> Result<(ImpurityKind, f64)> {
    match (spec.impurity_kind(), spec.spectral_parameter()) {
        (Some(k), Some(l)) => Ok((k, l)),
        _ => invalid(format!("{} is not an impurity model", spec.tag())),
    }
}

fn to_slope(z: f64) -> Slope {
    if z.is_infinite() {
        Slope::Infinity
    } else {
        Slope::Finite(z)
    }
}

/// Zeros of `ψ` in `(x, x + len]` for a free interval entered with
/// `Z(x+) = z`.
pub fn segment_nodes(kind: ImpurityKind, lambda: f64, len: f64, z: Slope) -> u64 {
    if kind == ImpurityKind::Schrodinger && lambda > 0.0 {
        let k = lambda.sqrt();
        // ψ ∝ sin φ with ψ'/ψ = k cot φ and φ advancing at rate k.
        let phi0 = match z {
            Slope::Infinity => 0.0,
            Slope::Finite(z) => 0.5 * PI - (z / k).atan(),
        };
        return ((phi0 + k * len) / PI).floor() as u64;
    }
    match z {
        Slope::Infinity => 0,
        Slope::Finite(z) => {
            let m = free_matrix(kind, lambda, len);
            u64::from(m.c * z + m.d < 0.0)
        }
    }
}

/// `ln |ψ(x + len) / ψ(x)|` across a free interval entered with `Z(x+) = z`.
fn segment_log_growth(kind: ImpurityKind, lambda: f64, len: f64, z: Slope) -> f64 {
    match z {
        Slope::Infinity => 0.0,
        Slope::Finite(z) => {
            let m = free_matrix(kind, lambda, len);
            (m.c * z + m.d).abs().ln()
        }
    }
}

/// State of the forward chain just before an impurity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    /// `Z(x_j−)`.
    pub z: Slope,
    /// Zeros of `ψ` in `(0, x_j]`.
    pub crossings: u64,
    pub x: f64,
    /// `ln |ψ(x_j) / ψ(0)|`, when `ψ(0) ≠ 0`.
    pub ln_psi: f64,
}

/// Iterator over `Z(x_1−), Z(x_2−), ...` of one realization.
#[derive(Debug, Clone)]
pub struct ForwardOrbit {
    sampler: Sampler,
    kind: ImpurityKind,
    lambda: f64,
    z: Slope,
    crossings: u64,
    x: f64,
    ln_psi: CompensatedSum,
    started: bool,
}

impl ForwardOrbit {
    fn segment(&mut self, z_plus: Slope, len: f64) {
        self.crossings += segment_nodes(self.kind, self.lambda, len, z_plus);
        self.ln_psi.add(segment_log_growth(self.kind, self.lambda, len, z_plus));
        self.z = free_matrix(self.kind, self.lambda, len).mobius(z_plus);
        self.x += len;
    }

    fn point(&self) -> OrbitPoint {
        OrbitPoint { z: self.z, crossings: self.crossings, x: self.x, ln_psi: self.ln_psi.value() }
    }
}

impl Iterator for ForwardOrbit {
    type Item = OrbitPoint;

    fn next(&mut self) -> Option<OrbitPoint> {
        if !self.started {
            self.started = true;
            let lead = self.sampler.leading_cell();
            self.segment(self.z, lead.spacing);
            return Some(self.point());
        }
        let cell = self.sampler.next_cell();
        let z_plus = kick_matrix(self.kind, self.lambda, cell.weight).mobius(self.z);
        self.segment(z_plus, cell.spacing);
        Some(self.point())
    }
}

/// Forward Riccati chain `Z(x_{j+1}−) = 𝒜_j(Z(x_j−))` started from `z0`.
pub fn forward_orbit(spec: &EnsembleSpec, z0: f64, rng: RandomStream) -> Result<ForwardOrbit> {
    let (kind, lambda) = impurity(spec)?;
    if z0.is_nan() {
        return invalid("initial z is NaN");
    }
    Ok(ForwardOrbit {
        sampler: Sampler::new(spec, rng)?,
        kind,
        lambda,
        z: to_slope(z0),
        crossings: 0,
        x: 0.0,
        ln_psi: CompensatedSum::new(),
        started: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackwardOptions {
    pub tol: f64,
    pub cap: usize,
}

impl Default for BackwardOptions {
    fn default() -> Self {
        BackwardOptions { tol: 1e-12, cap: 100_000 }
    }
}

/// `lim A_1 ∘ ⋯ ∘ A_n (z)` for matrices supplied by `next`, detected by
/// agreement of the starts `z = 0` and `z = ∞`.
pub fn backward_limit_of<F: FnMut() -> Matrix2>(mut next: F, opts: BackwardOptions) -> Result<f64> {
    let mut p = Matrix2::IDENTITY;
    let mut last = f64::INFINITY;
    for _ in 0..opts.cap {
        p = p * next();
        p.normalize();
        if !p.is_finite() {
            return Err(Error::Overflow);
        }
        let from_zero = p.b / p.d;
        let from_inf = p.a / p.c;
        let change = (from_zero - from_inf).abs();
        if change.is_finite() {
            last = change;
            if change <= opts.tol * from_zero.abs().max(1.0) {
                return Ok(from_zero);
            }
        }
    }
    Err(Error::NonConvergence { iterations: opts.cap, last_change: last })
}

/// One sample of `Z_∞` built from the cells `𝒜_1, 𝒜_2, ...` of a fresh
/// realization.
pub fn backward_limit(spec: &EnsembleSpec, opts: BackwardOptions, rng: RandomStream) -> Result<f64> {
    let mut s = Sampler::new(spec, rng)?;
    backward_limit_of(|| s.next_matrix(), opts)
}

/// `count` independent samples of `Z_∞`, sample `i` on stream `(seed, i)`.
pub fn backward_samples(spec: &EnsembleSpec, count: usize, opts: BackwardOptions, seed: u64) -> Result<Vec<f64>> {
    (0..count as u64).into_par_iter().map(|i| backward_limit(spec, opts, RandomStream::new(seed, i))).collect()
}

/// Mean of the samples with a batch-means standard error.
pub fn sample_mean(xs: &[f64], seed: u64) -> Estimate {
    let mut b = BatchMeans::new(xs.len() as u64, BATCHES);
    for x in xs {
        b.push(*x);
    }
    Estimate { value: b.mean(), stderr: b.stderr(), n: xs.len() as u64, seed }
}

/// Histogram of `Z(x_j−)` along one forward orbit after burn-in.
pub fn stationary_histogram(
    spec: &EnsembleSpec,
    cfg: &RiccatiOrbitConfig,
    mut hist: HistogramDensity,
    rng: RandomStream,
) -> Result<HistogramDensity> {
    cfg.validate()?;
    let orbit = forward_orbit(spec, cfg.z0, rng)?;
    for p in orbit.skip(cfg.burn_in as usize).take(cfg.samples as usize) {
        hist.add(p.z.to_f64());
    }
    if hist.tail_mass() > 0.05 {
        log::warn!("{:.1}% of the Riccati samples fall outside the histogram range", 100.0 * hist.tail_mass());
    }
    Ok(hist)
}

/// Quantile `u ∈ (0,1)` of a `1/z²` tail beyond `edge` (away from zero).
fn pareto_tail_point(edge: f64, u: f64) -> f64 {
    edge / (1.0 - u)
}

/// L¹ distance between the binned density and its push-forward under one
/// fresh cell map `𝒜`. Each bin (and each tail, modelled as `1/z²`) is
/// represented by `per_bin` stratified points, each moved by its own draw.
pub fn dyson_schmidt_residual(
    hist: &HistogramDensity,
    spec: &EnsembleSpec,
    per_bin: usize,
    rng: RandomStream,
) -> Result<f64> {
    let (kind, lambda) = impurity(spec)?;
    if per_bin == 0 || hist.n <= 0.0 {
        return invalid("need a nonempty histogram and at least one point per bin");
    }
    let mut s = Sampler::new(spec, rng)?;
    let mut out = HistogramDensity::with_edges(hist.edges.clone())?;
    let k = per_bin as f64;
    let mut push = |z: f64, w: f64, out: &mut HistogramDensity| {
        let cell = s.next_cell();
        let m = cell_matrix(kind, lambda, cell);
        out.add_weighted(m.mobius(to_slope(z)).to_f64(), w);
    };
    for i in 0..hist.bins() {
        let w = hist.mass(i);
        if w == 0.0 {
            continue;
        }
        for j in 0..per_bin {
            let z = hist.edges[i] + hist.width(i) * (j as f64 + 0.5) / k;
            push(z, w / k, &mut out);
        }
    }
    for (mass, edge, outward) in [(hist.below, hist.lo(), hist.lo() < 0.0), (hist.above, hist.hi(), hist.hi() > 0.0)] {
        let w = mass / hist.n;
        if w == 0.0 {
            continue;
        }
        for j in 0..per_bin {
            let z = if outward { pareto_tail_point(edge, (j as f64 + 0.5) / k) } else { edge };
            push(z, w / k, &mut out);
        }
    }
    let mut d = (out.below - hist.below / hist.n).abs() + (out.above - hist.above / hist.n).abs();
    for i in 0..hist.bins() {
        d += (out.counts[i] - hist.mass(i)).abs();
    }
    Ok(d)
}

/// Pooled `1/z²` tail coefficient of a run of bins on one side:
/// `mass / Σ |1/a − 1/b|`.
fn pooled_tail(hist: &HistogramDensity, bins: &[usize]) -> f64 {
    let mass: f64 = bins.iter().map(|&i| hist.mass(i)).sum();
    let span: f64 = bins.iter().map(|&i| (1.0 / hist.edges[i] - 1.0 / hist.edges[i + 1]).abs()).sum();
    mass / span
}

/// Integrated density of states from the tail `N = lim z² f(z)`.
///
/// The outer decade `R/10 ≤ |z| ≤ R` of each side is cut into up to ten
/// groups of bins; each group gives the exact coefficient of a `1/z²` law
/// with the same mass, and the median over groups is returned. The inner
/// and outer halves of the decade must agree to 20%.
pub fn rice_ids(hist: &HistogramDensity) -> Result<f64> {
    let mut groups = Vec::new();
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for side in [1.0f64, -1.0] {
        let r = if side > 0.0 { hist.hi() } else { -hist.lo() };
        if r <= 0.0 {
            continue;
        }
        let split = r / 10f64.sqrt();
        let bins: Vec<usize> = (0..hist.bins())
            .filter(|&i| {
                let (a, b) = (side * hist.edges[i], side * hist.edges[i + 1]);
                a.min(b) >= r / 10.0 * (1.0 - 1e-12) && a.max(b) <= r * (1.0 + 1e-12)
            })
            .collect();
        if bins.len() < 2 {
            continue;
        }
        let per = bins.len().div_ceil(10);
        for g in bins.chunks(per) {
            groups.push(pooled_tail(hist, g));
        }
        for &i in &bins {
            if side * hist.center(i) < split {
                inner.push(i);
            } else {
                outer.push(i);
            }
        }
    }
    if groups.is_empty() || inner.is_empty() || outer.is_empty() {
        return invalid("histogram has no resolved outer decade");
    }
    groups.sort_by(|a, b| a.total_cmp(b));
    let m = groups.len();
    let median = if m % 2 == 1 { groups[m / 2] } else { 0.5 * (groups[m / 2 - 1] + groups[m / 2]) };
    let (a, b) = (pooled_tail(hist, &inner), pooled_tail(hist, &outer));
    let spread = (a - b).abs() / (0.5 * (a + b));
    if !(spread <= 0.2) {
        return Err(Error::TailUnresolved(100.0 * spread));
    }
    Ok(median)
}

/// Principal-value mean `⨍ z f(z) dz` summed over mirror-image bin pairs.
pub fn pv_gamma(hist: &HistogramDensity) -> Result<f64> {
    let b = hist.bins();
    let scale = hist.hi().abs().max(hist.lo().abs());
    for i in 0..=b {
        if (hist.edges[i] + hist.edges[b - i]).abs() > 1e-9 * scale {
            return invalid("principal value needs edges symmetric about zero");
        }
    }
    let mut s = CompensatedSum::new();
    for i in 0..b / 2 {
        let j = b - 1 - i;
        s.add(hist.center(i) * hist.mass(i) + hist.center(j) * hist.mass(j));
    }
    Ok(s.value())
}

/// `Ω = γ − iπN` from one long realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    /// `ln|ψ(L)/ψ(0)| / L`.
    pub re: Estimate,
    /// `−π · (zeros of ψ) / L`.
    pub im: Estimate,
    pub length: f64,
}

impl OmegaEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value, self.im.value)
    }

    /// Integrated density of states implied by the node count.
    pub fn ids(&self) -> Estimate {
        self.im.scaled(-1.0 / PI)
    }
}

/// Ratio estimate `Σ y / Σ x` with the spread of per-batch ratios.
fn ratio_estimate(ys: &[f64], xs: &[f64], n: u64, seed: u64, total_y: f64, total_x: f64) -> Estimate {
    let ratios: Vec<f64> = ys.iter().zip(xs).map(|(y, x)| y / x).collect();
    let (_, stderr) = mean_stderr(&ratios);
    Estimate { value: total_y / total_x, stderr, n, seed }
}

/// Ergodic average `(1/L) ∫ Z dx` over `cfg.samples` cells after burn-in,
/// together with the node count.
pub fn ergodic_omega(spec: &EnsembleSpec, cfg: &RiccatiOrbitConfig, rng: RandomStream) -> Result<OmegaEstimate> {
    cfg.validate()?;
    let seed = rng.seed();
    let mut orbit = forward_orbit(spec, cfg.z0, rng)?;
    let mut last = orbit.nth(cfg.burn_in as usize).unwrap();
    let per = (cfg.samples / BATCHES as u64).max(1);
    let (mut ln_b, mut nodes_b, mut len_b) = (Vec::new(), Vec::new(), Vec::new());
    let start = last;
    let mut batch_start = last;
    for j in 1..=cfg.samples {
        last = orbit.next().unwrap();
        if j % per == 0 {
            ln_b.push(last.ln_psi - batch_start.ln_psi);
            nodes_b.push(-PI * (last.crossings - batch_start.crossings) as f64);
            len_b.push(last.x - batch_start.x);
            batch_start = last;
        }
    }
    let length = last.x - start.x;
    if !(length > 0.0) {
        return invalid("realization has zero length");
    }
    let re = ratio_estimate(&ln_b, &len_b, cfg.samples, seed, last.ln_psi - start.ln_psi, length);
    let im =
        ratio_estimate(&nodes_b, &len_b, cfg.samples, seed, -PI * (last.crossings - start.crossings) as f64, length);
    Ok(OmegaEstimate { re, im, length })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::Distribution;

    fn free_fl(energy: f64) -> EnsembleSpec {
        EnsembleSpec::FrischLloyd { coupling: Distribution::Constant { value: 0.0 }, mean_spacing: 1.0, energy }
    }

    #[test]
    fn free_negative_energy_orbit_converges_to_k() {
        let orbit = forward_orbit(&free_fl(-4.0), -1.0, RandomStream::new(1, 0)).unwrap();
        let last = orbit.skip(200).next().unwrap();
        assert!((last.z.to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn free_positive_energy_counts_k_over_pi() {
        let orbit = forward_orbit(&free_fl(4.0), 0.3, RandomStream::new(2, 0)).unwrap();
        let p = orbit.skip(20_000).next().unwrap();
        let n = p.crossings as f64 / p.x;
        assert!((n - 2.0 / PI).abs() < 1.0 / p.x, "{n}");
    }

    #[test]
    fn free_backward_limit_is_k() {
        let z = backward_limit(&free_fl(-9.0), BackwardOptions::default(), RandomStream::new(3, 0)).unwrap();
        assert!((z - 3.0).abs() < 1e-12);
    }

    #[test]
    fn backward_limit_reports_non_convergence() {
        let r = backward_limit_of(|| Matrix2::rotation(1.0), BackwardOptions { tol: 1e-12, cap: 100 });
        assert!(matches!(r, Err(Error::NonConvergence { iterations: 100, .. })));
    }

    #[test]
    fn cauchy_histogram_has_rice_tail_and_zero_pv() {
        let f = |z: f64| 1.0 / (PI * (1.0 + z * z));
        let h = HistogramDensity::from_density(f, HistogramDensity::uniform(-50.0, 50.0, 1000).unwrap().edges, 1.0)
            .unwrap();
        assert!((rice_ids(&h).unwrap() * PI - 1.0).abs() < 0.05);
        assert!(pv_gamma(&h).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rice_flags_unresolved_tail() {
        let f = |z: f64| (-z * z / 2.0).exp() / (2.0 * PI).sqrt();
        let h =
            HistogramDensity::from_density(f, HistogramDensity::uniform(-5.0, 5.0, 100).unwrap().edges, 1.0).unwrap();
        assert!(matches!(rice_ids(&h), Err(Error::TailUnresolved(_))));
    }
}
