//! Lyapunov exponents of products `Π_n = A_n ⋯ A_1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Matrix2, ProjectivePoint};
use crate::ensembles::{EnsembleSpec, RandomStream, Sampler};
use crate::error::{invalid, Error, Result};
use crate::stats::{pooled_estimate, BatchMeans, CompensatedSum, Estimate, BATCHES};

/// Options for [`gamma_norm_growth_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormGrowthOptions {
    /// Number of factors averaged over (after burn-in).
    pub n: u64,
    /// Factors applied before averaging starts.
    pub burn_in: u64,
    /// Take the log norm every `renorm_every` factors.
    pub renorm_every: u32,
    /// Starting direction; a uniformly random angle when absent.
    pub start: Option<ProjectivePoint>,
}

impl NormGrowthOptions {
    pub fn new(n: u64) -> Self {
        NormGrowthOptions { n, burn_in: 1000, renorm_every: 1, start: None }
    }
}

/// Norms for [`gamma_matrix_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixNorm {
    Operator,
    Frobenius,
}

impl MatrixNorm {
    pub fn ln_norm(self, m: &Matrix2) -> f64 {
        let f = m.frobenius_sq();
        match self {
            MatrixNorm::Frobenius => 0.5 * f.ln(),
            MatrixNorm::Operator => {
                let det = m.det();
                let disc = (f * f - 4.0 * det * det).max(0.0);
                (0.5 * (f + disc.sqrt())).ln() * 0.5
            }
        }
    }
}

fn deterministic(spec: &EnsembleSpec) -> bool {
    matches!(spec, EnsembleSpec::Fibonacci {} | EnsembleSpec::KronigPenney { .. })
}

fn random_direction(rng: &RandomStream) -> ProjectivePoint {
    let mut r = rng.substream(u64::MAX);
    ProjectivePoint::from_angle(std::f64::consts::PI * r.uniform())
}

fn diverged(step: u64) -> Error {
    log::warn!("product vector vanished or overflowed at step {step}");
    Error::Overflow
}

/// Per-step log increments of one chain, as (total, batch means).
fn norm_growth_chain(spec: &EnsembleSpec, opts: &NormGrowthOptions, rng: RandomStream) -> Result<(f64, Vec<f64>)> {
    if opts.renorm_every == 0 {
        return invalid("renorm_every must be at least 1");
    }
    let start = opts.start.unwrap_or_else(|| random_direction(&rng));
    let mut sampler = Sampler::new(spec, rng)?;
    let mut u = start.vector();
    for j in 0..opts.burn_in {
        let v = sampler.next_matrix().apply(u);
        let nv = v[0].hypot(v[1]);
        if !(nv > 0.0 && nv.is_finite()) {
            return Err(diverged(j));
        }
        u = [v[0] / nv, v[1] / nv];
    }
    let k = opts.renorm_every as u64;
    let blocks = opts.n.div_ceil(k);
    let mut batches = BatchMeans::new(blocks, BATCHES);
    let mut total = CompensatedSum::new();
    let mut done = 0u64;
    while done < opts.n {
        let len = k.min(opts.n - done);
        for _ in 0..len {
            u = sampler.next_matrix().apply(u);
        }
        let nv = u[0].hypot(u[1]);
        if !(nv > 0.0 && nv.is_finite()) {
            return Err(diverged(done + len));
        }
        u = [u[0] / nv, u[1] / nv];
        let y = nv.ln();
        total.add(y);
        batches.push(y / len as f64);
        done += len;
    }
    Ok((total.value(), batches.batch_means().to_vec()))
}

/// `γ` from the telescoping sum of `ln |A_j u_{j-1}|` along a single chain
/// with default options (burn-in 1000, log taken every step).
pub fn gamma_norm_growth(spec: &EnsembleSpec, n: u64, rng: RandomStream) -> Result<Estimate> {
    gamma_norm_growth_with(spec, &NormGrowthOptions::new(n), rng)
}

pub fn gamma_norm_growth_with(spec: &EnsembleSpec, opts: &NormGrowthOptions, rng: RandomStream) -> Result<Estimate> {
    if opts.n < 1 {
        return invalid("need at least one step");
    }
    let seed = rng.seed();
    let (total, means) = norm_growth_chain(spec, opts, rng)?;
    let mut e = pooled_estimate(&means, opts.n, seed);
    e.value = total / opts.n as f64;
    if deterministic(spec) || means.len() < 2 {
        e.stderr = 0.0;
    }
    Ok(e)
}

/// Runs `replicas` independent chains on streams `(seed, 0..replicas)`, each
/// of `opts.n` steps, in parallel. The result does not depend on the number
/// of worker threads.
pub fn gamma_norm_growth_replicated(
    spec: &EnsembleSpec,
    opts: &NormGrowthOptions,
    seed: u64,
    replicas: u32,
) -> Result<Estimate> {
    if replicas == 0 {
        return invalid("need at least one replica");
    }
    let runs: Vec<Result<(f64, Vec<f64>)>> = (0..replicas)
        .into_par_iter()
        .map(|r| norm_growth_chain(spec, opts, RandomStream::new(seed, r as u64)))
        .collect();
    let mut total = CompensatedSum::new();
    let mut means = Vec::new();
    for r in runs {
        let (t, m) = r?;
        total.add(t);
        means.extend(m);
    }
    let n = opts.n * replicas as u64;
    let mut e = pooled_estimate(&means, n, seed);
    e.value = total.value() / n as f64;
    if deterministic(spec) {
        e.stderr = 0.0;
    }
    Ok(e)
}

/// `γ` as the growth rate of a matrix norm of the product, from the
/// increments `ln‖Π_j‖ − ln‖Π_{j-1}‖`.
pub fn gamma_matrix_norm(spec: &EnsembleSpec, n: u64, norm: MatrixNorm, rng: RandomStream) -> Result<Estimate> {
    if n < 1 {
        return invalid("need at least one step");
    }
    let seed = rng.seed();
    let mut sampler = Sampler::new(spec, rng)?;
    let mut p = Matrix2::IDENTITY;
    let mut prev = 0.0;
    let mut batches = BatchMeans::new(n, BATCHES);
    let mut total = CompensatedSum::new();
    for j in 0..n {
        p = sampler.next_matrix() * p;
        let shift = p.normalize();
        let cur = norm.ln_norm(&p);
        if !(cur.is_finite() && shift.is_finite()) {
            return Err(diverged(j));
        }
        let inc = cur + shift - prev;
        prev = cur;
        total.add(inc);
        batches.push(inc);
    }
    let mut e = pooled_estimate(batches.batch_means(), n, seed);
    e.value = total.value() / n as f64;
    if deterministic(spec) {
        e.stderr = 0.0;
    }
    Ok(e)
}

/// Options for [`gamma_furstenberg`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FurstenbergOptions {
    pub burn_in: u64,
    pub n: u64,
    /// Starting direction of the projective chain; random when absent.
    pub start: Option<ProjectivePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FurstenbergOutcome {
    pub estimate: Estimate,
    /// Number of distinct directions visited after burn-in, capped at 3.
    pub support_atoms: usize,
    /// Fewer than three distinct directions were visited: the chain is
    /// stuck on a finite orbit and the sampled law may not be the
    /// stationary measure of interest.
    pub trapped: bool,
}

/// `γ = ∫∫ ln(|A u| / |u|) μ(dA) ν(du)`, with `ν` sampled by the projective
/// chain and `A` drawn independently of the chain state.
pub fn gamma_furstenberg(spec: &EnsembleSpec, opts: &FurstenbergOptions, rng: RandomStream) -> Result<FurstenbergOutcome> {
    if opts.n < 1 {
        return invalid("need at least one sample");
    }
    if !spec.is_iid() {
        return invalid(format!("{} is not an i.i.d. ensemble", spec.tag()));
    }
    let seed = rng.seed();
    let start = opts.start.unwrap_or_else(|| random_direction(&rng));
    let mut chain = Sampler::new(spec, rng.substream(0))?;
    let mut fresh = Sampler::new(spec, rng.substream(1))?;
    let mut u = start;
    for _ in 0..opts.burn_in {
        u = u.act(&chain.next_matrix()).0;
    }
    let mut atoms: Vec<ProjectivePoint> = Vec::with_capacity(3);
    let mut batches = BatchMeans::new(opts.n, BATCHES);
    let mut total = CompensatedSum::new();
    for j in 0..opts.n {
        if atoms.len() < 3 && atoms.iter().all(|a| a.angular_distance(&u) >= DEDUP) {
            atoms.push(u);
        }
        let (_, y) = u.act(&fresh.next_matrix());
        if !y.is_finite() {
            return Err(diverged(j));
        }
        total.add(y);
        batches.push(y);
        u = u.act(&chain.next_matrix()).0;
    }
    let mut estimate = pooled_estimate(batches.batch_means(), opts.n, seed);
    estimate.value = total.value() / opts.n as f64;
    if deterministic(spec) || batches.batch_means().len() < 2 {
        estimate.stderr = 0.0;
    }
    let trapped = atoms.len() < 3;
    if trapped {
        log::warn!("projective chain visited only {} direction(s); stationary measure may be degenerate", atoms.len());
    }
    Ok(FurstenbergOutcome { estimate, support_atoms: atoms.len(), trapped })
}

/// Directions closer than this angle are identified.
pub const DEDUP: f64 = 1e-9;
const CLOSURE_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IrreducibilityTag {
    Irreducible,
    FiniteInvariantSet,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrreducibilityVerdict {
    pub tag: IrreducibilityTag,
    pub witness: Option<Vec<ProjectivePoint>>,
}

impl IrreducibilityVerdict {
    fn tagged(tag: IrreducibilityTag) -> Self {
        IrreducibilityVerdict { tag, witness: None }
    }
}

fn contains(set: &[ProjectivePoint], p: &ProjectivePoint, tol: f64) -> bool {
    set.iter().any(|q| q.angular_distance(p) < tol)
}

fn is_scalar(m: &Matrix2) -> bool {
    let s = m.max_abs();
    m.b.abs() <= 1e-12 * s && m.c.abs() <= 1e-12 * s && (m.a - m.d).abs() <= 1e-12 * s
}

/// Real eigendirections of `m`.
fn fixed_directions(m: &Matrix2) -> Vec<ProjectivePoint> {
    if is_scalar(m) {
        return Vec::new();
    }
    let tr = m.trace();
    let disc = tr * tr - 4.0 * m.det();
    let scale = tr * tr + 4.0 * m.det().abs();
    if disc < -1e-12 * scale {
        return Vec::new();
    }
    let r = disc.max(0.0).sqrt();
    let mut out: Vec<ProjectivePoint> = Vec::new();
    for lam in [0.5 * (tr + r), 0.5 * (tr - r)] {
        // (A - λ) v = 0: take the better conditioned row.
        let (p, q) = (m.a - lam, m.b);
        let (s, t) = (m.c, m.d - lam);
        let v = if p.hypot(q) >= s.hypot(t) { [-q, p] } else { [-t, s] };
        if let Ok(pt) = ProjectivePoint::from_vector(v) {
            if !contains(&out, &pt, DEDUP) {
                out.push(pt);
            }
        }
    }
    out
}

/// Orbit closure of `seed` under `gens`, or `None` if it exceeds the cap.
fn close_under(seed: ProjectivePoint, gens: &[Matrix2]) -> Option<Vec<ProjectivePoint>> {
    let mut set = vec![seed];
    let mut next = 0;
    while next < set.len() {
        let p = set[next];
        next += 1;
        for g in gens {
            let q = p.act(g).0;
            if !contains(&set, &q, DEDUP) {
                set.push(q);
                if set.len() > CLOSURE_CAP {
                    return None;
                }
            }
        }
    }
    Some(set)
}

/// Advisory test of strong irreducibility for a finitely supported law.
///
/// Candidate invariant directions are the fixed points of all products of
/// at most `depth` generators; each candidate's orbit is closed under the
/// generators up to 64 points. Any closed orbit is a finite invariant set.
pub fn strong_irreducibility(support: &[(Matrix2, f64)], depth: usize) -> Result<IrreducibilityVerdict> {
    let gens: Vec<Matrix2> = support.iter().filter(|(_, w)| *w > 0.0).map(|(m, _)| *m).collect();
    if gens.is_empty() {
        return invalid("empty support");
    }
    for g in &gens {
        if !(g.det().abs() > 0.0) || !g.is_finite() {
            return invalid("support matrices must be invertible");
        }
    }
    if gens.iter().all(is_scalar) {
        return Ok(IrreducibilityVerdict {
            tag: IrreducibilityTag::FiniteInvariantSet,
            witness: Some(vec![ProjectivePoint::INFINITY]),
        });
    }
    let mut candidates: Vec<ProjectivePoint> = Vec::new();
    let mut layer: Vec<Matrix2> = vec![Matrix2::IDENTITY];
    for _ in 0..depth.max(1) {
        let mut next = Vec::with_capacity(layer.len() * gens.len());
        for w in &layer {
            for g in &gens {
                let mut m = *g * *w;
                m.normalize();
                for p in fixed_directions(&m) {
                    if !contains(&candidates, &p, DEDUP) {
                        candidates.push(p);
                    }
                }
                next.push(m);
            }
        }
        layer = next;
        if layer.len() > 1 << 14 {
            break;
        }
    }
    if candidates.is_empty() {
        return Ok(IrreducibilityVerdict::tagged(IrreducibilityTag::Inconclusive));
    }
    let mut witness: Vec<ProjectivePoint> = Vec::new();
    for c in &candidates {
        if contains(&witness, c, DEDUP) {
            continue;
        }
        if let Some(orbit) = close_under(*c, &gens) {
            for p in orbit {
                if !contains(&witness, &p, DEDUP) {
                    witness.push(p);
                }
            }
        }
    }
    if witness.is_empty() {
        return Ok(IrreducibilityVerdict::tagged(IrreducibilityTag::Irreducible));
    }
    let invariant = witness.iter().all(|p| gens.iter().all(|g| contains(&witness, &p.act(g).0, 1e3 * DEDUP)));
    if !invariant {
        return Ok(IrreducibilityVerdict::tagged(IrreducibilityTag::Inconclusive));
    }
    Ok(IrreducibilityVerdict { tag: IrreducibilityTag::FiniteInvariantSet, witness: Some(witness) })
}

/// [`strong_irreducibility`] for an ensemble with finite support, equal
/// weights.
pub fn strong_irreducibility_of(spec: &EnsembleSpec, depth: usize) -> Result<IrreducibilityVerdict> {
    match spec.finite_support() {
        Some(ms) => strong_irreducibility(&ms.into_iter().map(|m| (m, 1.0)).collect::<Vec<_>>(), depth),
        None => invalid(format!("{} has no finite support", spec.tag())),
    }
}
