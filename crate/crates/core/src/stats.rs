//! Estimates with batch-means error bars, compensated sums and the
//! goodness-of-fit tests used by the validation suite.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};

/// Number of batches for batch-means standard errors.
pub const BATCHES: usize = 32;

/// A Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn exact(value: f64, n: u64, seed: u64) -> Self {
        Estimate { value, stderr: 0.0, n, seed }
    }

    /// `|value - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }

    pub fn scaled(&self, s: f64) -> Self {
        Estimate { value: self.value * s, stderr: self.stderr * s.abs(), ..*self }
    }

    /// JSON object `{value, stderr, n, seed, model}`.
    pub fn to_json(&self, model: &str) -> serde_json::Value {
        serde_json::json!({
            "value": self.value,
            "stderr": self.stderr,
            "n": self.n,
            "seed": self.seed,
            "model": model,
        })
    }
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Accumulates a stream of observations into contiguous batches of fixed
/// size; the standard error of the overall mean comes from the spread of
/// the batch means.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    batch_size: u64,
    current: CompensatedSum,
    in_current: u64,
    means: Vec<f64>,
    total: CompensatedSum,
    count: u64,
}

impl BatchMeans {
    /// For `n` expected observations split into `batches` batches.
    pub fn new(n: u64, batches: usize) -> Self {
        let b = batches.max(1) as u64;
        BatchMeans {
            batch_size: (n / b).max(1),
            current: CompensatedSum::new(),
            in_current: 0,
            means: Vec::with_capacity(batches),
            total: CompensatedSum::new(),
            count: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.current.add(x);
        self.total.add(x);
        self.in_current += 1;
        self.count += 1;
        if self.in_current == self.batch_size {
            self.means.push(self.current.value() / self.batch_size as f64);
            self.current = CompensatedSum::new();
            self.in_current = 0;
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.total.value() / self.count.max(1) as f64
    }

    pub fn batch_means(&self) -> &[f64] {
        &self.means
    }

    /// Standard error from complete batches (a trailing partial batch only
    /// contributes to the mean).
    pub fn stderr(&self) -> f64 {
        mean_stderr(&self.means).1
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut s = CompensatedSum::new();
    for x in xs {
        s.add(*x);
    }
    let m = s.value() / n as f64;
    if n < 2 {
        return (m, 0.0);
    }
    let mut v = CompensatedSum::new();
    for x in xs {
        v.add((x - m) * (x - m));
    }
    (m, (v.value() / ((n - 1) as f64 * n as f64)).sqrt())
}

/// Pools per-replica batch means into one estimate.
pub fn pooled_estimate(batches: &[f64], n: u64, seed: u64) -> Estimate {
    let (value, stderr) = mean_stderr(batches);
    Estimate { value, stderr, n, seed }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
}

impl TestOutcome {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }
}

/// Asymptotic Kolmogorov survival function with the Stephens correction.
fn kolmogorov_q(n: usize, d: f64) -> f64 {
    let sn = (n as f64).sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    if lam < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let t = (-2.0 * kf * kf * lam * lam).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test. `cdf_at_sorted[i]` must be the
/// reference CDF at the i-th smallest sample.
pub fn ks_test_sorted(cdf_at_sorted: &[f64]) -> Result<TestOutcome> {
    let n = cdf_at_sorted.len();
    if n == 0 {
        return invalid("KS test on empty sample");
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, f) in cdf_at_sorted.iter().enumerate() {
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    Ok(TestOutcome { statistic: d, p_value: kolmogorov_q(n, d), dof: n })
}

/// KS test against a CDF given as a function.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<TestOutcome> {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let c: Vec<f64> = s.iter().map(|x| cdf(*x)).collect();
    ks_test_sorted(&c)
}

/// Pearson χ² test of observed counts against expected counts. Cells with
/// expected count below `min_expected` are merged with their neighbour.
pub fn chi_square_test(observed: &[f64], expected: &[f64], fitted_params: usize) -> Result<TestOutcome> {
    if observed.len() != expected.len() || observed.is_empty() {
        return invalid("χ² test needs equally sized, nonempty count vectors");
    }
    let min_expected = 5.0;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= min_expected {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    if cells.len() < 2 + fitted_params {
        return invalid("too few χ² cells after merging");
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1 - fitted_params;
    let chi = ChiSquared::new(dof as f64).map_err(|e| crate::Error::Invalid(e.to_string()))?;
    Ok(TestOutcome { statistic: stat, p_value: chi.sf(stat), dof })
}

/// Least-squares line `y = slope x + intercept` with the coefficient of
/// determination and the standard error of the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_stderr: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return invalid("line fit needs at least three points");
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return invalid("degenerate abscissae");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let slope_stderr = (ss_res / (nf - 2.0) / sxx).sqrt();
    Ok(LineFit { slope, intercept, r2, slope_stderr })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn batch_means_of_constant_have_zero_error() {
        let mut b = BatchMeans::new(3200, BATCHES);
        for _ in 0..3200 {
            b.push(0.25);
        }
        assert_eq!(b.batch_means().len(), BATCHES);
        assert_eq!(b.mean(), 0.25);
        assert_eq!(b.stderr(), 0.0);
    }

    #[test]
    fn ks_rejects_shifted_sample() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let ok = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(ok.passes(0.01));
        let bad = ks_test(&xs, |x| (x * x).clamp(0.0, 1.0)).unwrap();
        assert!(!bad.passes(0.01));
    }

    #[test]
    fn chi_square_exact_match() {
        let o = vec![10.0, 20.0, 30.0, 40.0];
        let t = chi_square_test(&o, &o, 0).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 3);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_fit_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
    }
}
