//! Disorder ensembles: scalar laws, model specifications, transfer-matrix
//! samplers and the reference densities of the exactly solvable cases.

mod densities;
mod stream;

pub use densities::{density_gamma, density_gig, density_kummer, levy_exponent};
pub use stream::RandomStream;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::algebra::Matrix2;
use crate::error::{invalid, Result};

/// A scalar probability law for couplings, masses, spacings and fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Distribution {
    Constant { value: f64 },
    Exponential { mean: f64 },
    Gamma { shape: f64, scale: f64 },
    Uniform { low: f64, high: f64 },
    /// Two-sided exponential `(a/2) exp(-a|x|)`.
    Laplace { rate: f64 },
    Normal { mean: f64, std: f64 },
    Discrete { values: Vec<f64>, weights: Vec<f64> },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Distribution::Constant { value } => value.is_finite(),
            Distribution::Exponential { mean } => *mean > 0.0 && mean.is_finite(),
            Distribution::Gamma { shape, scale } => *shape > 0.0 && *scale > 0.0 && shape.is_finite() && scale.is_finite(),
            Distribution::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            Distribution::Laplace { rate } => *rate > 0.0 && rate.is_finite(),
            Distribution::Normal { mean, std } => mean.is_finite() && *std >= 0.0 && std.is_finite(),
            Distribution::Discrete { values, weights } => {
                !values.is_empty()
                    && values.len() == weights.len()
                    && values.iter().all(|v| v.is_finite())
                    && weights.iter().all(|w| *w >= 0.0 && w.is_finite())
                    && weights.iter().sum::<f64>() > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("bad distribution parameters: {self:?}"))
        }
    }

    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match self {
            Distribution::Constant { value } => *value,
            Distribution::Exponential { mean } => mean * rng.sample::<f64, _>(Exp1),
            Distribution::Gamma { shape, scale } => sample_gamma(*shape, *scale, rng),
            Distribution::Uniform { low, high } => low + (high - low) * rng.uniform(),
            Distribution::Laplace { rate } => {
                let e: f64 = rng.sample(Exp1);
                if rng.next_bit() {
                    e / rate
                } else {
                    -e / rate
                }
            }
            Distribution::Normal { mean, std } => mean + std * rng.sample::<f64, _>(StandardNormal),
            Distribution::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.uniform() * total;
                for (v, w) in values.iter().zip(weights) {
                    if u < *w {
                        return *v;
                    }
                    u -= w;
                }
                *values.last().unwrap()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Constant { value } => *value,
            Distribution::Exponential { mean } => *mean,
            Distribution::Gamma { shape, scale } => shape * scale,
            Distribution::Uniform { low, high } => 0.5 * (low + high),
            Distribution::Laplace { .. } => 0.0,
            Distribution::Normal { mean, .. } => *mean,
            Distribution::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total
            }
        }
    }

    /// `E exp(i θ X)`.
    pub fn characteristic(&self, theta: f64) -> Complex64 {
        let i = Complex64::i();
        match self {
            Distribution::Constant { value } => (i * theta * value).exp(),
            Distribution::Exponential { mean } => 1.0 / (1.0 - i * theta * mean),
            Distribution::Gamma { shape, scale } => (1.0 - i * theta * scale).powf(-shape),
            Distribution::Uniform { low, high } => {
                let w = high - low;
                if w == 0.0 || theta == 0.0 {
                    (i * theta * low).exp()
                } else {
                    ((i * theta * high).exp() - (i * theta * low).exp()) / (i * theta * w)
                }
            }
            Distribution::Laplace { rate } => Complex64::new(rate * rate / (rate * rate + theta * theta), 0.0),
            Distribution::Normal { mean, std } => (i * theta * mean - 0.5 * theta * theta * std * std).exp(),
            Distribution::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                values.iter().zip(weights).map(|(v, w)| (i * theta * v).exp() * (w / total)).sum()
            }
        }
    }
}

trait NextBit {
    fn next_bit(&mut self) -> bool;
}

impl NextBit for RandomStream {
    fn next_bit(&mut self) -> bool {
        rand::RngCore::next_u64(self) >> 63 == 1
    }
}

/// Gamma law with shape `p` and scale `q` (mean `p q`).
///
/// Marsaglia–Tsang: cube-of-normal proposal for `p >= 1`; for `p < 1` a
/// `Gamma(p + 1)` draw is boosted by `U^(1/p)`.
pub fn sample_gamma(p: f64, q: f64, rng: &mut RandomStream) -> f64 {
    if p < 1.0 {
        let u = rng.uniform_open();
        return sample_gamma(p + 1.0, q, rng) * u.powf(1.0 / p);
    }
    let d = p - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform_open();
        if u < 1.0 - 0.0331 * x * x * x * x || u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v * q;
        }
    }
}

/// Model specification. Serialized as `{"model": tag, "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnsembleSpec {
    /// Krein string with point masses `m_j` separated by massless
    /// intervals `l_j`, at spectral parameter `lambda`.
    #[serde(rename_all = "snake_case")]
    DysonString { mass: Distribution, spacing: Distribution, lambda: f64 },
    /// String whose Weyl coefficient has a Stieltjes fraction with i.i.d.
    /// `Gamma(p, q)` coefficients.
    #[serde(rename = "dyson-type-i")]
    DysonTypeI { p: f64, q: f64, lambda: f64 },
    /// Delta impurities of random strength at Poisson positions.
    #[serde(rename_all = "snake_case")]
    FrischLloyd { coupling: Distribution, mean_spacing: f64, energy: f64 },
    KronigPenney { coupling: f64, spacing: f64, energy: f64 },
    Anderson { potential: Distribution, energy: f64 },
    IsingChain { beta: f64, coupling: f64, field: Distribution },
    Fibonacci {},
    RandomFibonacci {},
    BougerolLacroix { alpha: f64, p: f64 },
    CohenNewman { alpha: f64, beta: f64 },
}

/// Which differential equation an impurity chain discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpurityKind {
    /// `-ψ'' = λ M' ψ`; weights are masses.
    String,
    /// `-ψ'' + V ψ = E ψ`; weights are delta couplings.
    Schrodinger,
}

/// One impurity followed by a free interval: a kick of strength `weight` at
/// `x_j`, then free propagation over `spacing` up to `x_{j+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub spacing: f64,
    pub weight: f64,
}

impl EnsembleSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            EnsembleSpec::DysonString { .. } => "dyson-string",
            EnsembleSpec::DysonTypeI { .. } => "dyson-type-i",
            EnsembleSpec::FrischLloyd { .. } => "frisch-lloyd",
            EnsembleSpec::KronigPenney { .. } => "kronig-penney",
            EnsembleSpec::Anderson { .. } => "anderson",
            EnsembleSpec::IsingChain { .. } => "ising-chain",
            EnsembleSpec::Fibonacci {} => "fibonacci",
            EnsembleSpec::RandomFibonacci {} => "random-fibonacci",
            EnsembleSpec::BougerolLacroix { .. } => "bougerol-lacroix",
            EnsembleSpec::CohenNewman { .. } => "cohen-newman",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name: &str| -> Result<()> {
            if x.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be finite"))
            }
        };
        match self {
            EnsembleSpec::DysonString { mass, spacing, lambda } => {
                mass.validate()?;
                spacing.validate()?;
                finite(*lambda, "lambda")
            }
            EnsembleSpec::DysonTypeI { p, q, lambda } => {
                if !(*p > 0.0 && *q > 0.0) {
                    return invalid("dyson-type-i needs p > 0 and q > 0");
                }
                finite(*lambda, "lambda")?;
                if *lambda == 0.0 {
                    return invalid("dyson-type-i needs lambda != 0");
                }
                Ok(())
            }
            EnsembleSpec::FrischLloyd { coupling, mean_spacing, energy } => {
                coupling.validate()?;
                if !(*mean_spacing > 0.0 && mean_spacing.is_finite()) {
                    return invalid("mean_spacing must be positive");
                }
                finite(*energy, "energy")
            }
            EnsembleSpec::KronigPenney { coupling, spacing, energy } => {
                finite(*coupling, "coupling")?;
                finite(*energy, "energy")?;
                if !(*spacing > 0.0 && spacing.is_finite()) {
                    return invalid("spacing must be positive");
                }
                Ok(())
            }
            EnsembleSpec::Anderson { potential, energy } => {
                potential.validate()?;
                finite(*energy, "energy")
            }
            EnsembleSpec::IsingChain { beta, coupling, field } => {
                field.validate()?;
                finite(*coupling, "coupling")?;
                if !(*beta > 0.0 && beta.is_finite()) {
                    return invalid("beta must be positive");
                }
                Ok(())
            }
            EnsembleSpec::Fibonacci {} | EnsembleSpec::RandomFibonacci {} => Ok(()),
            EnsembleSpec::BougerolLacroix { alpha, p } => {
                if !(*alpha > 0.0 && alpha.is_finite() && (0.0..=1.0).contains(p)) {
                    return invalid("bougerol-lacroix needs alpha > 0 and p in [0, 1]");
                }
                Ok(())
            }
            EnsembleSpec::CohenNewman { alpha, beta } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return invalid("cohen-newman needs alpha > 0");
                }
                finite(*beta, "beta")
            }
        }
    }

    pub fn impurity_kind(&self) -> Option<ImpurityKind> {
        match self {
            EnsembleSpec::DysonString { .. } | EnsembleSpec::DysonTypeI { .. } => Some(ImpurityKind::String),
            EnsembleSpec::FrischLloyd { .. } | EnsembleSpec::KronigPenney { .. } => Some(ImpurityKind::Schrodinger),
            _ => None,
        }
    }

    /// `λ` for strings, `E` for Schrödinger and Anderson models.
    pub fn spectral_parameter(&self) -> Option<f64> {
        match self {
            EnsembleSpec::DysonString { lambda, .. } | EnsembleSpec::DysonTypeI { lambda, .. } => Some(*lambda),
            EnsembleSpec::FrischLloyd { energy, .. }
            | EnsembleSpec::KronigPenney { energy, .. }
            | EnsembleSpec::Anderson { energy, .. } => Some(*energy),
            _ => None,
        }
    }

    pub fn with_spectral_parameter(&self, value: f64) -> Result<EnsembleSpec> {
        let mut s = self.clone();
        match &mut s {
            EnsembleSpec::DysonString { lambda, .. } | EnsembleSpec::DysonTypeI { lambda, .. } => *lambda = value,
            EnsembleSpec::FrischLloyd { energy, .. }
            | EnsembleSpec::KronigPenney { energy, .. }
            | EnsembleSpec::Anderson { energy, .. } => *energy = value,
            _ => return invalid(format!("{} has no spectral parameter", self.tag())),
        }
        Ok(s)
    }

    /// Mean length of one cell, for impurity models.
    pub fn mean_spacing(&self) -> Option<f64> {
        match self {
            EnsembleSpec::DysonString { spacing, .. } => Some(spacing.mean()),
            EnsembleSpec::FrischLloyd { mean_spacing, .. } => Some(*mean_spacing),
            EnsembleSpec::KronigPenney { spacing, .. } => Some(*spacing),
            _ => None,
        }
    }

    /// True when consecutive matrices are independent and identically
    /// distributed.
    pub fn is_iid(&self) -> bool {
        !matches!(self, EnsembleSpec::DysonTypeI { .. })
    }

    /// Finite support of the matrix law, when it has one.
    pub fn finite_support(&self) -> Option<Vec<Matrix2>> {
        match self {
            EnsembleSpec::Fibonacci {} => Some(vec![Matrix2::new(1.0, 1.0, 1.0, 0.0)]),
            EnsembleSpec::RandomFibonacci {} => {
                Some(vec![Matrix2::new(-1.0, 1.0, 1.0, 0.0), Matrix2::new(1.0, 1.0, 1.0, 0.0)])
            }
            EnsembleSpec::BougerolLacroix { alpha, p } => {
                let mut v = Vec::new();
                if *p > 0.0 {
                    v.push(Matrix2::diag(*alpha, 1.0 / alpha));
                }
                if *p < 1.0 {
                    v.push(Matrix2::new(0.0, -1.0, 1.0, 0.0));
                }
                Some(v)
            }
            EnsembleSpec::KronigPenney { coupling, spacing, energy } => Some(vec![cell_matrix(
                ImpurityKind::Schrodinger,
                *energy,
                Cell { spacing: *spacing, weight: *coupling },
            )]),
            _ => None,
        }
    }
}

/// Free propagation over a massless (string) or potential-free
/// (Schrödinger) interval, acting on `(ψ', ψ)`.
pub fn free_matrix(kind: ImpurityKind, lambda: f64, len: f64) -> Matrix2 {
    match kind {
        ImpurityKind::String => Matrix2::new(1.0, 0.0, len, 1.0),
        ImpurityKind::Schrodinger => {
            if lambda > 0.0 {
                let k = lambda.sqrt();
                let (s, c) = (k * len).sin_cos();
                Matrix2::new(c, -k * s, s / k, c)
            } else if lambda < 0.0 {
                let k = (-lambda).sqrt();
                let (s, c) = ((k * len).sinh(), (k * len).cosh());
                Matrix2::new(c, k * s, s / k, c)
            } else {
                Matrix2::new(1.0, 0.0, len, 1.0)
            }
        }
    }
}

/// Jump of `ψ'` across an impurity.
pub fn kick_matrix(kind: ImpurityKind, lambda: f64, weight: f64) -> Matrix2 {
    match kind {
        ImpurityKind::String => Matrix2::new(1.0, -lambda * weight, 0.0, 1.0),
        ImpurityKind::Schrodinger => Matrix2::new(1.0, weight, 0.0, 1.0),
    }
}

pub fn cell_matrix(kind: ImpurityKind, lambda: f64, cell: Cell) -> Matrix2 {
    free_matrix(kind, lambda, cell.spacing) * kick_matrix(kind, lambda, cell.weight)
}

/// Draws matrices (and, for impurity models, cells) from an ensemble.
///
/// For impurity models the realization starts with a leading free interval
/// `l_0` (no impurity at the origin); `next_cell` then yields
/// `(m_j or v_j, l_j)` for `j = 1, 2, ...`.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: EnsembleSpec,
    rng: RandomStream,
    type_i: Option<TypeIState>,
}

#[derive(Debug, Clone)]
struct TypeIState {
    c0: f64,
    ln_even: f64,
    ln_odd: f64,
}

impl Sampler {
    pub fn new(spec: &EnsembleSpec, rng: RandomStream) -> Result<Self> {
        spec.validate()?;
        let mut s = Sampler { spec: spec.clone(), rng, type_i: None };
        if let EnsembleSpec::DysonTypeI { p, q, .. } = spec {
            let c0 = sample_gamma(*p, *q, &mut s.rng);
            s.type_i = Some(TypeIState { c0, ln_even: c0.ln(), ln_odd: 0.0 });
        }
        Ok(s)
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn rng(&mut self) -> &mut RandomStream {
        &mut self.rng
    }

    /// The interval `[0, x_1)` before the first impurity.
    pub fn leading_cell(&mut self) -> Cell {
        match &self.spec {
            EnsembleSpec::DysonString { spacing, .. } => Cell { spacing: spacing.sample(&mut self.rng), weight: 0.0 },
            EnsembleSpec::DysonTypeI { .. } => Cell { spacing: 1.0 / self.type_i.as_ref().unwrap().c0, weight: 0.0 },
            EnsembleSpec::FrischLloyd { mean_spacing, .. } => {
                Cell { spacing: mean_spacing * self.rng.sample::<f64, _>(Exp1), weight: 0.0 }
            }
            EnsembleSpec::KronigPenney { spacing, .. } => Cell { spacing: *spacing, weight: 0.0 },
            _ => Cell { spacing: 0.0, weight: 0.0 },
        }
    }

    /// Next impurity cell. Panics for ensembles without impurities.
    pub fn next_cell(&mut self) -> Cell {
        match &self.spec {
            EnsembleSpec::DysonString { mass, spacing, .. } => {
                let weight = mass.sample(&mut self.rng);
                Cell { spacing: spacing.sample(&mut self.rng), weight }
            }
            EnsembleSpec::DysonTypeI { p, q, .. } => {
                let (p, q) = (*p, *q);
                let odd = sample_gamma(p, q, &mut self.rng);
                let even = sample_gamma(p, q, &mut self.rng);
                let st = self.type_i.as_mut().unwrap();
                // m_j = E_{j-1} / O_j and l_j = O_j / E_j with E_j = c_0 c_2 .. c_2j,
                // O_j = c_1 c_3 .. c_2j-1.
                let ln_odd = st.ln_odd + odd.ln();
                let mass = (st.ln_even - ln_odd).exp();
                let ln_even = st.ln_even + even.ln();
                st.ln_odd = ln_odd;
                st.ln_even = ln_even;
                Cell { spacing: (ln_odd - ln_even).exp(), weight: mass }
            }
            EnsembleSpec::FrischLloyd { coupling, mean_spacing, .. } => {
                let weight = coupling.sample(&mut self.rng);
                Cell { spacing: mean_spacing * self.rng.sample::<f64, _>(Exp1), weight }
            }
            EnsembleSpec::KronigPenney { coupling, spacing, .. } => Cell { spacing: *spacing, weight: *coupling },
            other => panic!("{} has no impurity cells", other.tag()),
        }
    }

    /// Next transfer matrix `A_j`, `j >= 1`.
    pub fn next_matrix(&mut self) -> Matrix2 {
        if let (Some(kind), Some(lambda)) = (self.spec.impurity_kind(), self.spec.spectral_parameter()) {
            let cell = self.next_cell();
            return cell_matrix(kind, lambda, cell);
        }
        match &self.spec {
            EnsembleSpec::Anderson { potential, energy } => {
                let v = potential.sample(&mut self.rng);
                Matrix2::new(v - energy, -1.0, 1.0, 0.0)
            }
            EnsembleSpec::IsingChain { beta, coupling, field } => {
                let h = field.sample(&mut self.rng);
                let (b, j) = (*beta, *coupling);
                Matrix2::new((b * (j + h)).exp(), (b * (h - j)).exp(), (-b * (j + h)).exp(), (b * (j - h)).exp())
            }
            EnsembleSpec::Fibonacci {} => Matrix2::new(1.0, 1.0, 1.0, 0.0),
            EnsembleSpec::RandomFibonacci {} => {
                let sign = if self.rng.next_bit() { 1.0 } else { -1.0 };
                Matrix2::new(sign, 1.0, 1.0, 0.0)
            }
            EnsembleSpec::BougerolLacroix { alpha, p } => {
                if self.rng.uniform() < *p {
                    Matrix2::diag(*alpha, 1.0 / alpha)
                } else {
                    Matrix2::new(0.0, -1.0, 1.0, 0.0)
                }
            }
            EnsembleSpec::CohenNewman { alpha, beta } => {
                let theta = 2.0 * PI * self.rng.uniform();
                Matrix2::new(*alpha, *beta, 0.0, 1.0 / alpha) * Matrix2::rotation(theta)
            }
            _ => unreachable!(),
        }
    }
}

/// One draw `A_j` from an i.i.d. ensemble.
pub fn sample_matrix(spec: &EnsembleSpec, rng: &mut RandomStream) -> Result<Matrix2> {
    if !spec.is_iid() {
        return invalid(format!("{} draws dependent matrices; use Sampler", spec.tag()));
    }
    let mut s = Sampler::new(spec, rng.clone())?;
    let m = s.next_matrix();
    *rng = s.rng;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Matrix2, b: Matrix2, tol: f64) -> bool {
        (a.a - b.a).abs() < tol && (a.b - b.b).abs() < tol && (a.c - b.c).abs() < tol && (a.d - b.d).abs() < tol
    }

    #[test]
    fn unit_string_cell() {
        let m = cell_matrix(ImpurityKind::String, 1.0, Cell { spacing: 1.0, weight: 1.0 });
        assert_eq!(m, Matrix2::new(1.0, -1.0, 1.0, 0.0));
    }

    #[test]
    fn quarter_wave_impurity_cell() {
        let m = cell_matrix(ImpurityKind::Schrodinger, 1.0, Cell { spacing: PI / 2.0, weight: 2.0 });
        assert!(close(m, Matrix2::new(0.0, -1.0, 1.0, 2.0), 1e-15));
    }

    #[test]
    fn cells_are_unimodular() {
        for &lambda in &[-2.0, 0.0, 3.0] {
            for kind in [ImpurityKind::String, ImpurityKind::Schrodinger] {
                let m = cell_matrix(kind, lambda, Cell { spacing: 0.7, weight: -1.3 });
                assert!((m.det() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = EnsembleSpec::FrischLloyd {
            coupling: Distribution::Exponential { mean: 1.0 },
            mean_spacing: 1.0,
            energy: -1.0,
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            s,
            r#"{"model":"frisch-lloyd","params":{"coupling":{"law":"exponential","mean":1.0},"mean_spacing":1.0,"energy":-1.0}}"#
        );
        let back: EnsembleSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let fib: EnsembleSpec = serde_json::from_str(r#"{"model":"random-fibonacci","params":{}}"#).unwrap();
        assert_eq!(fib, EnsembleSpec::RandomFibonacci {});
        let t1: EnsembleSpec = serde_json::from_str(r#"{"model":"dyson-type-i","params":{"p":1,"q":1,"lambda":-1}}"#).unwrap();
        assert_eq!(t1.tag(), "dyson-type-i");
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: std::result::Result<EnsembleSpec, _> =
            serde_json::from_str(r#"{"model":"bougerol-lacroix","params":{"alpha":2,"p":0.5,"extra":1}}"#);
        assert!(r.is_err());
        let r: std::result::Result<Distribution, _> = serde_json::from_str(r#"{"law":"exponential","mean":1,"rate":2}"#);
        assert!(r.is_err());
    }

    #[test]
    fn type_i_cells_follow_products() {
        let spec = EnsembleSpec::DysonTypeI { p: 1.5, q: 0.7, lambda: -1.0 };
        let mut s = Sampler::new(&spec, RandomStream::new(5, 0)).unwrap();
        let mut c = RandomStream::new(5, 0);
        let cs: Vec<f64> = (0..5).map(|_| sample_gamma(1.5, 0.7, &mut c)).collect();
        let l0 = s.leading_cell();
        assert!((l0.spacing - 1.0 / cs[0]).abs() < 1e-12);
        let c1 = s.next_cell();
        assert!((c1.weight - cs[0] / cs[1]).abs() < 1e-12);
        assert!((c1.spacing - cs[1] / (cs[0] * cs[2])).abs() < 1e-12);
        let c2 = s.next_cell();
        assert!((c2.weight - cs[0] * cs[2] / (cs[1] * cs[3])).abs() < 1e-12);
        assert!((c2.spacing - cs[1] * cs[3] / (cs[0] * cs[2] * cs[4])).abs() < 1e-12);
    }
}
