//! Random-field Ising chain by transfer matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Matrix2;
use crate::ensembles::{Distribution, EnsembleSpec, RandomStream};
use crate::error::{invalid, Result};
use crate::stats::{mean_stderr, CompensatedSum};

/// A positive number stored as `mantissa · e^{ln_scale}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl LogScaled {
    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.ln_scale
    }

    /// The plain value; overflows to infinity for long chains.
    pub fn value(&self) -> f64 {
        self.mantissa * self.ln_scale.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// `σ_{n+1} = σ_1`; `Z_n = Tr Π_n`.
    Periodic,
    /// No bond between the last and first spins.
    Open,
}

/// Transfer matrix `A_j`, rows indexed by `σ_j = ±1` and columns by
/// `σ_{j−1}`.
pub fn transfer_matrix(h: f64, beta: f64, coupling: f64) -> Matrix2 {
    let (b, j) = (beta, coupling);
    Matrix2::new((b * (j + h)).exp(), (b * (h - j)).exp(), (-b * (j + h)).exp(), (b * (j - h)).exp())
}

/// Partition function of `H(σ) = −J Σ σ_j σ_{j+1} − Σ h_j σ_j` at inverse
/// temperature `β`, renormalizing at every step.
pub fn partition_function(fields: &[f64], beta: f64, coupling: f64, boundary: Boundary) -> Result<LogScaled> {
    if fields.is_empty() {
        return invalid("need at least one spin");
    }
    if !beta.is_finite() || !coupling.is_finite() || fields.iter().any(|h| !h.is_finite()) {
        return invalid("Ising parameters must be finite");
    }
    let mut ln = CompensatedSum::new();
    match boundary {
        Boundary::Periodic => {
            let mut p = Matrix2::IDENTITY;
            for &h in fields {
                p = transfer_matrix(h, beta, coupling) * p;
                ln.add(p.normalize());
            }
            Ok(LogScaled { mantissa: p.trace(), ln_scale: ln.value() })
        }
        Boundary::Open => {
            let h0 = fields[0];
            let mut v = [(beta * h0).exp(), (-beta * h0).exp()];
            for &h in &fields[1..] {
                v = transfer_matrix(h, beta, coupling).apply(v);
                let m = v[0].max(v[1]);
                v = [v[0] / m, v[1] / m];
                ln.add(m.ln());
            }
            Ok(LogScaled { mantissa: v[0] + v[1], ln_scale: ln.value() })
        }
    }
}

/// Largest eigenvalue of the uniform-field transfer matrix.
pub fn top_eigenvalue(h: f64, beta: f64, coupling: f64) -> f64 {
    let a = transfer_matrix(h, beta, coupling);
    let half = 0.5 * (a.a - a.d);
    0.5 * (a.a + a.d) + (half * half + a.b * a.c).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingResult {
    pub n: usize,
    pub beta: f64,
    pub coupling: f64,
    pub replicas: u32,
    pub seed: u64,
    /// Mean over realizations of `−ln Z_n / (βn)`.
    pub free_energy_density: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    /// Standard deviation between realizations.
    pub spread: f64,
}

fn ising_parts(spec: &EnsembleSpec) -> Result<(f64, f64, &Distribution)> {
    match spec {
        EnsembleSpec::IsingChain { beta, coupling, field } => {
            spec.validate()?;
            Ok((*beta, *coupling, field))
        }
        other => invalid(format!("expected an Ising chain, got {}", other.tag())),
    }
}

/// Free-energy density of `replicas` periodic chains of `n` spins; chain
/// `r` draws its fields from stream `(seed, r)`.
pub fn free_energy_density(spec: &EnsembleSpec, n: usize, replicas: u32, seed: u64) -> Result<IsingResult> {
    let (beta, coupling, field) = ising_parts(spec)?;
    if n < 1000 {
        return invalid("free energy density needs n ≥ 1000");
    }
    if replicas < 2 {
        return invalid("need at least two realizations for an error bar");
    }
    if beta == 0.0 {
        return invalid("free energy density needs β ≠ 0");
    }
    let values = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RandomStream::new(seed, r as u64);
            let fields: Vec<f64> = (0..n).map(|_| field.sample(&mut rng)).collect();
            let z = partition_function(&fields, beta, coupling, Boundary::Periodic)?;
            Ok(-z.ln() / (beta * n as f64))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&values);
    Ok(IsingResult {
        n,
        beta,
        coupling,
        replicas,
        seed,
        free_energy_density: mean,
        stderr,
        spread: stderr * (replicas as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_free_spin() {
        let z = partition_function(&[0.0], 1.0, 0.0, Boundary::Periodic).unwrap();
        assert!((z.value() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_spins_factorize() {
        let h = [0.3, -1.2, 0.7, 2.0];
        let exact: f64 = h.iter().map(|x| (2.0 * (0.8 * x as &f64).cosh()).ln()).sum();
        for b in [Boundary::Periodic, Boundary::Open] {
            let z = partition_function(&h, 0.8, 0.0, b).unwrap();
            assert!((z.ln() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn uniform_field_growth_rate() {
        let (h, beta, j) = (0.4, 0.9, 1.1);
        let n = 10_000;
        let z = partition_function(&vec![h; n], beta, j, Boundary::Periodic).unwrap();
        assert!((z.ln() / n as f64 - top_eigenvalue(h, beta, j).ln()).abs() < 1e-8);
        assert!((top_eigenvalue(0.0, beta, j) - 2.0 * (beta * j).cosh()).abs() < 1e-14);
    }
}
