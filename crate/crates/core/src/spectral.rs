//! Exact propagation of impurity-model solutions, Sturm node counting,
//! the complex Lyapunov exponent and truncated Weyl coefficients.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Matrix2;
use crate::ensembles::{free_matrix, kick_matrix, Cell, EnsembleSpec, ImpurityKind, RandomStream, Sampler};
use crate::error::{invalid, Error, Result};
use crate::riccati::{backward_limit_of, BackwardOptions};
use crate::stats::{mean_stderr, CompensatedSum, Estimate, BATCHES};

/// One realization of an impurity chain. `cells[0]` is the leading interval
/// `[0, x_1)` and carries weight zero; cell `j ≥ 1` is an impurity of
/// weight `w_j` at `x_j` followed by a free interval `l_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub kind: ImpurityKind,
    pub cells: Vec<Cell>,
}

impl Realization {
    pub fn new(kind: ImpurityKind, cells: Vec<Cell>) -> Result<Self> {
        let r = Realization { kind, cells };
        r.validate()?;
        Ok(r)
    }

    /// A single free interval of length `length`.
    pub fn free(kind: ImpurityKind, length: f64) -> Result<Self> {
        Self::new(kind, vec![Cell { spacing: length, weight: 0.0 }])
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return invalid("realization has no cells");
        }
        if self.cells[0].weight != 0.0 {
            return invalid("the leading cell carries no impurity");
        }
        for c in &self.cells {
            if !(c.spacing > 0.0) || !c.weight.is_finite() {
                return invalid("spacings must be positive and weights finite");
            }
            if self.kind == ImpurityKind::String && c.weight < 0.0 {
                return invalid("string masses must be nonnegative");
            }
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for c in &self.cells {
            s.add(c.spacing);
        }
        s.value()
    }

    /// Draws cells until the total length reaches `length`; the last
    /// spacing is cut so that the sum is exactly `length`.
    pub fn sample(spec: &EnsembleSpec, length: f64, rng: RandomStream) -> Result<Self> {
        let kind = spec.impurity_kind().ok_or_else(|| Error::Invalid(format!("{} has no impurities", spec.tag())))?;
        if !(length > 0.0) {
            return invalid("length must be positive");
        }
        let mut s = Sampler::new(spec, rng)?;
        let mut cells = vec![s.leading_cell()];
        let mut x = cells[0].spacing;
        while x < length {
            let c = s.next_cell();
            x += c.spacing;
            cells.push(c);
        }
        let excess = x - length;
        let last = cells.last_mut().unwrap();
        last.spacing -= excess;
        if !(last.spacing > 0.0) {
            // Cut landed on an impurity position (or rounding): drop it.
            cells.pop();
            if cells.is_empty() {
                return invalid("degenerate realization");
            }
        }
        Realization::new(kind, cells)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for c in &self.cells {
            out.serialize(c)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load_csv(path: &Path, kind: ImpurityKind) -> Result<Self> {
        let mut rd = csv::Reader::from_path(path)?;
        let cells = rd.deserialize().collect::<std::result::Result<Vec<Cell>, _>>()?;
        Realization::new(kind, cells)
    }
}

/// Boundary parameters: `sin α ψ(0) − cos α ψ'(0) = 0` and
/// `ψ'(L−) = z_R ψ(L)`, with `z_R = None` meaning `ψ(L) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub alpha: f64,
    pub z_right: Option<f64>,
}

impl BoundaryData {
    /// Dirichlet at both ends.
    pub const DIRICHLET: BoundaryData = BoundaryData { alpha: PI / 2.0, z_right: None };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..PI).contains(&self.alpha) {
            return invalid("α must lie in [0, π)");
        }
        if matches!(self.z_right, Some(z) if !z.is_finite()) {
            return invalid("z_R must be finite or absent");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeMethod {
    /// Prüfer phase for Schrödinger intervals at `E > 0`, sign changes
    /// elsewhere.
    Prufer,
    /// Sign changes of `ψ` on a grid fine enough to separate zeros.
    SignChange,
}

/// Running solution `(ψ', ψ)` with the scale kept in log form.
#[derive(Debug, Clone)]
pub struct Propagator {
    kind: ImpurityKind,
    lambda: f64,
    method: NodeMethod,
    v: [f64; 2],
    ln_scale: CompensatedSum,
    nodes: u64,
    x: f64,
}

fn sign_change(a: f64, b: f64) -> bool {
    // A zero landing exactly on the right end belongs to this interval;
    // one on the left end was counted with the previous interval.
    a != 0.0 && (a * b < 0.0 || b == 0.0)
}

impl Propagator {
    /// Starts from `ψ(0) = cos α`, `ψ'(0) = sin α`.
    pub fn new(kind: ImpurityKind, lambda: f64, alpha: f64, method: NodeMethod) -> Self {
        // Exact Dirichlet data rather than cos(π/2) ≈ 6e-17.
        let v = if alpha == PI / 2.0 { [1.0, 0.0] } else { [alpha.sin(), alpha.cos()] };
        Propagator {
            kind,
            lambda,
            method,
            v,
            ln_scale: CompensatedSum::new(),
            nodes: 0,
            x: 0.0,
        }
    }

    pub fn kick(&mut self, weight: f64) {
        if weight != 0.0 {
            self.v = kick_matrix(self.kind, self.lambda, weight).apply(self.v);
        }
    }

    fn count_free(&self, len: f64) -> u64 {
        let oscillating = self.kind == ImpurityKind::Schrodinger && self.lambda > 0.0;
        if oscillating {
            let k = self.lambda.sqrt();
            match self.method {
                NodeMethod::Prufer => {
                    let theta = (k * self.v[1]).atan2(self.v[0]);
                    let n = ((theta + k * len) / PI).floor() - (theta / PI).floor();
                    return n.max(0.0) as u64;
                }
                NodeMethod::SignChange => {
                    let m = (k * len / (0.9 * PI)).ceil().max(1.0) as usize;
                    let h = len / m as f64;
                    let step = free_matrix(self.kind, self.lambda, h);
                    let mut u = self.v;
                    let mut n = 0;
                    for _ in 0..m {
                        let next = step.apply(u);
                        n += u64::from(sign_change(u[1], next[1]));
                        u = next;
                    }
                    return n;
                }
            }
        }
        let next = free_matrix(self.kind, self.lambda, len).apply(self.v);
        u64::from(sign_change(self.v[1], next[1]))
    }

    pub fn free(&mut self, len: f64) {
        self.nodes += self.count_free(len);
        let v = free_matrix(self.kind, self.lambda, len).apply(self.v);
        let n = v[0].hypot(v[1]);
        self.v = [v[0] / n, v[1] / n];
        self.ln_scale.add(n.ln());
        self.x += len;
    }

    pub fn cell(&mut self, c: Cell) {
        self.kick(c.weight);
        self.free(c.spacing);
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn position(&self) -> f64 {
        self.x
    }

    /// `ln |ψ(x)|`.
    pub fn ln_abs_psi(&self) -> f64 {
        self.ln_scale.value() + self.v[1].abs().ln()
    }

    /// `(ψ', ψ) / e^{ln_scale}` and `ln_scale`.
    pub fn state(&self) -> ([f64; 2], f64) {
        (self.v, self.ln_scale.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    /// `ψ'(L−) / e^{ln_scale}`.
    pub psi_prime: f64,
    /// `ψ(L) / e^{ln_scale}`.
    pub psi: f64,
    pub ln_scale: f64,
    /// Zeros of `ψ` in `(0, L]`.
    pub nodes: u64,
}

impl Propagation {
    /// Value of `ψ'(L−) − z_R ψ(L)` (or `−ψ(L)` for `z_R = ∞`) up to the
    /// positive factor `e^{ln_scale}`.
    pub fn boundary_defect(&self, z_right: Option<f64>) -> f64 {
        match z_right {
            Some(z) => self.psi_prime - z * self.psi,
            None => -self.psi,
        }
    }
}

pub fn propagate(real: &Realization, lambda: f64, bc: BoundaryData, method: NodeMethod) -> Result<Propagation> {
    bc.validate()?;
    if !lambda.is_finite() {
        return invalid("λ must be finite");
    }
    let mut p = Propagator::new(real.kind, lambda, bc.alpha, method);
    for c in &real.cells {
        p.cell(*c);
    }
    let (v, s) = p.state();
    Ok(Propagation { psi_prime: v[0], psi: v[1], ln_scale: s, nodes: p.nodes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRunOptions {
    pub length: f64,
    pub replicas: u32,
    pub alpha: f64,
    pub method: NodeMethod,
}

impl SpectralRunOptions {
    pub fn new(length: f64, replicas: u32) -> Self {
        SpectralRunOptions { length, replicas, alpha: PI / 2.0, method: NodeMethod::Prufer }
    }
}

/// `Ω = γ − iπN` on the `λ + i0` branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

impl ComplexEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value, self.im.value)
    }
}

/// Per-batch `(Δ ln|(ψ', ψ)|, Δ nodes)` over 32 equal-length pieces of one
/// realization generated on the fly.
fn run_one(spec: &EnsembleSpec, opts: &SpectralRunOptions, rng: RandomStream) -> Result<Vec<(f64, f64)>> {
    let kind = spec.impurity_kind().ok_or_else(|| Error::Invalid(format!("{} has no impurities", spec.tag())))?;
    let lambda = spec.spectral_parameter().unwrap();
    let mut s = Sampler::new(spec, rng)?;
    let mut p = Propagator::new(kind, lambda, opts.alpha, opts.method);
    let piece = opts.length / BATCHES as f64;
    let mut out = Vec::with_capacity(BATCHES);
    let mut boundary = piece;
    let (mut ln0, mut n0) = (0.0, 0u64);
    let mut cell = s.leading_cell();
    loop {
        p.kick(cell.weight);
        let mut rest = cell.spacing;
        while p.position() + rest >= boundary && out.len() < BATCHES {
            let part = boundary - p.position();
            p.free(part.max(0.0));
            rest -= part.max(0.0);
            let ln = p.ln_scale.value();
            out.push((ln - ln0, (p.nodes() - n0) as f64));
            ln0 = ln;
            n0 = p.nodes();
            boundary = piece * (out.len() + 1) as f64;
        }
        if out.len() == BATCHES {
            return Ok(out);
        }
        p.free(rest);
        cell = s.next_cell();
    }
}

/// `Ω(λ + i0)`: `Re = ln|(ψ', ψ)(L)|/L` (the same limit as `ln|ψ(L)|/L`,
/// without the spikes at zeros of `ψ`), `Im = −π (zeros of ψ)/L`, averaged over
/// `replicas` realizations on streams `(seed, r)`.
pub fn complex_lyapunov(spec: &EnsembleSpec, lambda: f64, opts: &SpectralRunOptions, seed: u64) -> Result<ComplexEstimate> {
    if !(opts.length > 0.0) || opts.replicas == 0 {
        return invalid("need a positive length and at least one replica");
    }
    let spec = spec.with_spectral_parameter(lambda)?;
    let runs: Vec<Result<Vec<(f64, f64)>>> =
        (0..opts.replicas).into_par_iter().map(|r| run_one(&spec, opts, RandomStream::new(seed, r as u64))).collect();
    let piece = opts.length / BATCHES as f64;
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for run in runs {
        for (ln, nodes) in run? {
            re.push(ln / piece);
            im.push(-PI * nodes / piece);
        }
    }
    let n = opts.replicas as u64;
    let (rv, rs) = mean_stderr(&re);
    let (iv, is) = mean_stderr(&im);
    Ok(ComplexEstimate {
        re: Estimate { value: rv, stderr: rs, n, seed },
        im: Estimate { value: iv, stderr: is, n, seed },
    })
}

/// Integrated density of states from Sturm node counts.
pub fn ids_node_counting(spec: &EnsembleSpec, lambda: f64, opts: &SpectralRunOptions, seed: u64) -> Result<Estimate> {
    Ok(complex_lyapunov(spec, lambda, opts, seed)?.im.scaled(-1.0 / PI))
}

#[derive(Debug, Clone, Copy)]
struct CMatrix {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl CMatrix {
    /// Inverse of a unimodular matrix.
    fn inverse_unimodular(self) -> CMatrix {
        CMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Möbius action; `None` is the point at infinity.
    fn act(&self, z: Option<Complex64>) -> Option<Complex64> {
        match z {
            None => {
                if self.c == Complex64::new(0.0, 0.0) {
                    None
                } else {
                    Some(self.a / self.c)
                }
            }
            Some(z) => {
                let den = self.c * z + self.d;
                if den == Complex64::new(0.0, 0.0) {
                    None
                } else {
                    Some((self.a * z + self.b) / den)
                }
            }
        }
    }
}

fn complex_free(kind: ImpurityKind, lambda: Complex64, len: f64) -> CMatrix {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        ImpurityKind::String => CMatrix { a: one, b: zero, c: Complex64::new(len, 0.0), d: one },
        ImpurityKind::Schrodinger => {
            let k = lambda.sqrt();
            let kl = k * len;
            let cos = kl.cos();
            // sin(kl)/k and k sin(kl) are entire in λ.
            let sinc = if kl.norm() < 1e-4 {
                Complex64::new(len, 0.0) * (one - kl * kl / 6.0 + kl * kl * kl * kl / 120.0)
            } else {
                kl.sin() / k
            };
            CMatrix { a: cos, b: -lambda * sinc, c: sinc, d: cos }
        }
    }
}

fn complex_kick(kind: ImpurityKind, lambda: Complex64, weight: f64) -> CMatrix {
    let one = Complex64::new(1.0, 0.0);
    let s = match kind {
        ImpurityKind::String => -lambda * weight,
        ImpurityKind::Schrodinger => Complex64::new(weight, 0.0),
    };
    CMatrix { a: one, b: s, c: Complex64::new(0.0, 0.0), d: one }
}

/// `w_L = (ζ sin α + cos α)/(sin α − ζ cos α)` from `ζ = χ'(0)/χ(0)`.
fn weyl_from_zeta(zeta: Option<Complex64>, alpha: f64) -> Result<Complex64> {
    let (s, c) = alpha.sin_cos();
    let w = match zeta {
        None => {
            if c.abs() < 1e-15 {
                return Err(Error::PoleHit { level: 0 });
            }
            Complex64::new(-s / c, 0.0)
        }
        Some(z) => {
            let den = s - z * c;
            if den.norm() == 0.0 {
                return Err(Error::PoleHit { level: 0 });
            }
            (z * s + c) / den
        }
    };
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::PoleHit { level: 0 });
    }
    Ok(w)
}

/// Weyl coefficient of the truncated problem on `[0, L]`, from the finite
/// continued fraction for `χ'(0)/χ(0)` evaluated backward from `z_R`.
pub fn weyl_cf_truncated(real: &Realization, lambda: Complex64, bc: BoundaryData) -> Result<Complex64> {
    bc.validate()?;
    real.validate()?;
    if lambda.im < 0.0 || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return invalid("λ must be finite with Im λ ≥ 0");
    }
    let mut z = bc.z_right.map(|z| Complex64::new(z, 0.0));
    for (level, cell) in real.cells.iter().enumerate().rev() {
        // Long evanescent segments are split so cosh(Im(k) ℓ) stays finite.
        let growth = match real.kind {
            ImpurityKind::Schrodinger => lambda.sqrt().im.abs() * cell.spacing,
            ImpurityKind::String => 0.0,
        };
        let pieces = (growth / 32.0).ceil().max(1.0);
        let step = complex_free(real.kind, lambda, cell.spacing / pieces).inverse_unimodular();
        for _ in 0..pieces as u64 {
            z = step.act(z);
        }
        if cell.weight != 0.0 {
            z = complex_kick(real.kind, lambda, cell.weight).inverse_unimodular().act(z);
        }
        if let Some(v) = z {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::PoleHit { level });
            }
        }
    }
    weyl_from_zeta(z, bc.alpha)
}

/// Weyl coefficient of the half-line problem at real `λ` in the limit-point
/// regime: `χ'(0)/χ(0) = lim A_0^{-1} ∘ A_1^{-1} ∘ ⋯ (z)`, independent of `z`.
pub fn weyl_limit(spec: &EnsembleSpec, lambda: f64, alpha: f64, opts: BackwardOptions, rng: RandomStream) -> Result<f64> {
    let spec = spec.with_spectral_parameter(lambda)?;
    let kind = spec.impurity_kind().ok_or_else(|| Error::Invalid(format!("{} has no impurities", spec.tag())))?;
    let mut s = Sampler::new(&spec, rng)?;
    let mut first = true;
    let mut next = || -> Matrix2 {
        let cell = if first {
            first = false;
            s.leading_cell()
        } else {
            s.next_cell()
        };
        let m = free_matrix(kind, lambda, cell.spacing) * kick_matrix(kind, lambda, cell.weight);
        Matrix2::new(m.d, -m.b, -m.c, m.a)
    };
    let zeta = backward_limit_of(&mut next, opts)?;
    Ok(weyl_from_zeta(Some(Complex64::new(zeta, 0.0)), alpha)?.re)
}

/// Independent half-line Weyl coefficients, sample `i` on stream `(seed, i)`.
pub fn weyl_samples(
    spec: &EnsembleSpec,
    lambda: f64,
    alpha: f64,
    count: usize,
    opts: BackwardOptions,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..count as u64).into_par_iter().map(|i| weyl_limit(spec, lambda, alpha, opts, RandomStream::new(seed, i))).collect()
}

/// `σ'(λ) ≈ Im w(λ + iε)/π` for values of `w` taken at `λ + iε`.
pub fn stieltjes_inversion(w: &[Complex64]) -> Vec<f64> {
    w.iter().map(|w| w.im / PI).collect()
}

/// Spectral density on `grid` at height `eps` for one realization. Warns
/// when halving `eps` moves the result by more than 5% somewhere.
pub fn stieltjes_density(real: &Realization, grid: &[f64], eps: f64, bc: BoundaryData) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return invalid("ε must be positive");
    }
    let at = |e: f64| -> Result<Vec<Complex64>> {
        grid.iter().map(|&l| weyl_cf_truncated(real, Complex64::new(l, e), bc)).collect()
    };
    let d = stieltjes_inversion(&at(eps)?);
    let half = stieltjes_inversion(&at(0.5 * eps)?);
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if d.iter().zip(&half).any(|(a, b)| (a - b).abs() > 0.05 * a.abs().max(1e-3 * scale)) {
        log::warn!("spectral density not converged in ε = {eps}");
    }
    Ok(d)
}

/// `σ(λ_last) − σ(λ_first)` by the trapezoid rule.
pub fn measure_difference(grid: &[f64], density: &[f64]) -> f64 {
    grid.windows(2).zip(density.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::Distribution;

    #[test]
    fn free_weyl_matches_cot() {
        let real = Realization::free(ImpurityKind::Schrodinger, 3.7).unwrap();
        for lam in [0.3, 2.0, -1.5] {
            let w = weyl_cf_truncated(&real, Complex64::new(lam, 0.0), BoundaryData::DIRICHLET).unwrap();
            let k = Complex64::new(lam, 0.0).sqrt();
            let exact = -k * (k * 3.7).cos() / (k * 3.7).sin();
            assert!((w - exact).norm() < 1e-10 * exact.norm().max(1.0), "{lam}: {w} vs {exact}");
        }
    }

    #[test]
    fn prufer_and_sign_change_agree() {
        let spec = EnsembleSpec::FrischLloyd {
            coupling: Distribution::Exponential { mean: 1.0 },
            mean_spacing: 1.0,
            energy: 3.0,
        };
        let real = Realization::sample(&spec, 500.0, RandomStream::new(5, 0)).unwrap();
        assert!((real.length() - 500.0).abs() < 1e-9 * 500.0);
        let a = propagate(&real, 3.0, BoundaryData::DIRICHLET, NodeMethod::Prufer).unwrap();
        let b = propagate(&real, 3.0, BoundaryData::DIRICHLET, NodeMethod::SignChange).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert!(a.nodes > 0);
    }

    #[test]
    fn below_spectrum_no_nodes() {
        let spec = EnsembleSpec::FrischLloyd {
            coupling: Distribution::Exponential { mean: 1.0 },
            mean_spacing: 1.0,
            energy: -0.5,
        };
        let real = Realization::sample(&spec, 200.0, RandomStream::new(6, 0)).unwrap();
        let p = propagate(&real, -0.5, BoundaryData::DIRICHLET, NodeMethod::Prufer).unwrap();
        assert_eq!(p.nodes, 0);
    }
}
