//! The acceptance suite: one check per criterion, shared by the
//! `acceptance` test target and `disorder-rmt selftest`.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{cosh_distance, HalfPlanePoint, Matrix2};
use crate::ensembles::{
    density_gig, density_kummer, levy_exponent, sample_gamma, Distribution, EnsembleSpec, ImpurityKind, RandomStream,
};
use crate::error::Result;
use crate::ising::{free_energy_density, partition_function, top_eigenvalue, Boundary};
use crate::lyapunov::{gamma_norm_growth, gamma_norm_growth_replicated, NormGrowthOptions};
use crate::oracles;
use crate::quad::{integrate, Tolerance};
use crate::riccati::{
    backward_limit_of, ergodic_omega, first_passage_stats, pv_gamma, rice_ids, sample_mean, sde_white_noise_run,
    stationary_histogram, BackwardOptions, FirstPassageOptions, HistogramDensity, RiccatiOrbitConfig, SdeOptions,
};
use crate::scattering::{decay_rate, phase_density_from_f, reflexion_phase_histogram, rt_coefficients, PhaseOptions};
use crate::spectral::{
    complex_lyapunov, ids_node_counting, stieltjes_density, weyl_cf_truncated, weyl_samples, BoundaryData,
    Realization, SpectralRunOptions,
};
use crate::stats::{chi_square_test, fit_line, ks_test_sorted, mean_stderr, Estimate};

/// Pre-registered seed of the suite; criterion `i` uses `SEED + i`.
pub const SEED: u64 = 20_240_601;

/// Significance level of every KS and χ² test.
pub const LEVEL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// One line of numbers: estimates, targets and tolerances.
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<28} {}  [{:.1} s] {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

pub const NAMES: [&str; 18] = [
    "random-fibonacci",
    "fibonacci",
    "bougerol-lacroix",
    "cohen-newman",
    "free-frisch-lloyd",
    "kronig-penney",
    "kotani-string",
    "nieuwenhuizen",
    "gig-kummer-laws",
    "dyson-type-i",
    "halperin",
    "white-noise-limit",
    "scattering",
    "hyperbolic-identities",
    "weyl-free-case",
    "ground-state",
    "ising",
    "dual-estimators",
];

/// Outcome of the parts of one criterion.
struct Checks {
    ok: bool,
    parts: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks { ok: true, parts: Vec::new() }
    }

    fn check(&mut self, ok: bool, text: String) {
        self.ok &= ok;
        self.parts.push(format!("{}{}", if ok { "" } else { "✗ " }, text));
    }

    fn note(&mut self, text: String) {
        self.parts.push(text);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn seed(id: u32) -> u64 {
    SEED + id as u64
}

/// Runs criterion `id` (1-based). Errors of the numerical routines are
/// reported as failures.
pub fn run(id: u32) -> CriterionReport {
    let start = Instant::now();
    let name = NAMES.get(id as usize - 1).copied().unwrap_or("unknown");
    let outcome = match id {
        1 => random_fibonacci(),
        2 => fibonacci(),
        3 => bougerol_lacroix(),
        4 => cohen_newman(),
        5 => free_frisch_lloyd(),
        6 => kronig_penney(),
        7 => kotani_string(),
        8 => nieuwenhuizen(),
        9 => gig_kummer_laws(),
        10 => dyson_type_i(),
        11 => halperin(),
        12 => white_noise_limit(),
        13 => scattering(),
        14 => hyperbolic_identities(),
        15 => weyl_free_case(),
        16 => ground_state(),
        17 => ising(),
        18 => dual_estimators(),
        _ => Err(crate::Error::Invalid(format!("no criterion {id}"))),
    };
    let (passed, detail) = match outcome {
        Ok(c) => (c.ok, c.parts.join("; ")),
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionReport { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=NAMES.len() as u32).map(run).collect()
}

fn random_fibonacci() -> Result<Checks> {
    let mut c = Checks::new();
    let (lo, hi) = (0.1239755980, 0.1239755995);
    let t = Instant::now();
    let e = gamma_norm_growth(&EnsembleSpec::RandomFibonacci {}, 10_000_000, RandomStream::new(seed(1), 0))?;
    let secs = t.elapsed().as_secs_f64();
    let dist = if e.value < lo { lo - e.value } else { (e.value - hi).max(0.0) };
    c.check(dist <= 3.0 * e.stderr, format!("γ = {:.10} ± {:.1e}, distance to ({lo}, {hi}) ≤ 3·stderr", e.value, e.stderr));
    c.check(secs < 60.0, format!("n = 1e7 in {secs:.2} s < 60 s on one worker"));
    Ok(c)
}

fn fibonacci() -> Result<Checks> {
    let mut c = Checks::new();
    let e = gamma_norm_growth(&EnsembleSpec::Fibonacci {}, 100_000, RandomStream::new(seed(2), 0))?;
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let d = (e.value - golden).abs();
    c.check(d <= 1e-10, format!("γ = {:.12}, |γ − ln φ| = {d:.1e} ≤ 1e-10", e.value));
    Ok(c)
}

fn bougerol_lacroix() -> Result<Checks> {
    let mut c = Checks::new();
    let spec = EnsembleSpec::BougerolLacroix { alpha: 2.0, p: 0.5 };
    let e = gamma_norm_growth(&spec, 10_000_000, RandomStream::new(seed(3), 0))?;
    c.check(e.value.abs() <= 3.0 * e.stderr, format!("|γ| = {:.2e} ≤ 3·stderr = {:.2e}", e.value.abs(), 3.0 * e.stderr));
    Ok(c)
}

fn cohen_newman() -> Result<Checks> {
    let mut c = Checks::new();
    let (alpha, beta) = (2.0, 1.0);
    let spec = EnsembleSpec::CohenNewman { alpha, beta };
    let e = gamma_norm_growth(&spec, 10_000_000, RandomStream::new(seed(4), 0))?;
    let q = oracles::cohen_newman_gamma_quadrature(alpha, beta)?;
    c.check(e.within(q, 3.0), format!("γ = {:.6} ± {:.1e} vs quadrature {q:.6} (3·stderr)", e.value, e.stderr));
    let unhalved = 2.0 * oracles::cohen_newman_closed_form(alpha, beta)?;
    c.note(format!(
        "unhalved closed form ln(((α+1/α)²+β²)/4) = {unhalved:.6} is off by {:.1} stderr (factor {:.3})",
        (e.value - unhalved).abs() / e.stderr,
        unhalved / e.value
    ));
    Ok(c)
}

fn free_frisch_lloyd() -> Result<Checks> {
    let mut c = Checks::new();
    let spec = EnsembleSpec::FrischLloyd { coupling: Distribution::Constant { value: 0.0 }, mean_spacing: 1.0, energy: 4.0 };
    let n = ids_node_counting(&spec, 4.0, &SpectralRunOptions::new(1e4, 4), seed(5))?;
    let target = 2.0 / PI;
    c.check(rel(n.value, target) <= 0.01, format!("N(4) = {:.6} vs 2/π = {target:.6} (1%)", n.value));
    Ok(c)
}

fn kronig_penney() -> Result<Checks> {
    let mut c = Checks::new();
    let (v, l) = (1.0, 1.0);
    let opts = SpectralRunOptions::new(1e4, 2);
    let omega_re = |k: f64| -> Result<f64> {
        let spec = EnsembleSpec::KronigPenney { coupling: v, spacing: l, energy: k * k };
        Ok(complex_lyapunov(&spec, k * k, &opts, seed(6))?.re.value)
    };
    for k in [2.0, 2.5, 4.0] {
        let band = oracles::kronig_penney_in_band(k, l, v)?;
        let g = omega_re(k)?;
        c.check(band && g.abs() <= 1e-3, format!("band k = {k}: Re Ω = {g:.1e} ≤ 1e-3"));
    }
    let k = 0.1;
    let gap = !oracles::kronig_penney_in_band(k, l, v)?;
    let g = omega_re(k)?;
    let exact = oracles::kronig_penney_gamma(k, l, v)?;
    c.check(gap && g >= 0.05, format!("gap k = {k}: Re Ω = {g:.4} ≥ 0.05 (oracle {exact:.4})"));
    Ok(c)
}

fn kotani_spec(lambda: f64) -> EnsembleSpec {
    EnsembleSpec::DysonString {
        mass: Distribution::Exponential { mean: 1.0 },
        spacing: Distribution::Exponential { mean: 1.0 },
        lambda,
    }
}

fn kotani_string() -> Result<Checks> {
    let mut c = Checks::new();
    let opts = SpectralRunOptions::new(1e5, 4);
    for lambda in [0.5, 1.0, 2.0, 4.0] {
        let n = ids_node_counting(&kotani_spec(lambda), lambda, &opts, seed(7))?;
        let exact = oracles::kotani_n(lambda, 1.0, 1.0)?;
        c.check(
            rel(n.value, exact) <= 0.02,
            format!("N({lambda}) = {:.5} vs {exact:.5} ({:.2}% ≤ 2%)", n.value, 100.0 * rel(n.value, exact)),
        );
    }
    let w = weyl_samples(&kotani_spec(-1.0), -1.0, PI / 2.0, 100_000, BackwardOptions::default(), seed(7))?;
    let minus_w: Vec<f64> = w.iter().map(|x| -x).collect();
    let e = sample_mean(&minus_w, seed(7));
    let exact = oracles::kotani_letac_mean_w(-1.0, 1.0, 1.0)?;
    c.check(e.within(exact, 3.0), format!("E[−w(−1)] = {:.5} ± {:.1e} vs K₀(2)/K₁(2) = {exact:.5} (3·stderr)", e.value, e.stderr));
    Ok(c)
}

fn nieuwenhuizen() -> Result<Checks> {
    let mut c = Checks::new();
    let spec = EnsembleSpec::FrischLloyd { coupling: Distribution::Exponential { mean: 1.0 }, mean_spacing: 1.0, energy: -1.0 };
    let cfg = RiccatiOrbitConfig { samples: 2_000_000, ..Default::default() };
    let o = ergodic_omega(&spec, &cfg, RandomStream::new(seed(8), 0))?;
    let exact = oracles::nieuwenhuizen_omega_negative(-1.0, 1.0, 1.0)?;
    c.check(
        rel(o.re.value, exact) <= 0.01,
        format!("Ω(−1) = {:.5} ± {:.1e} vs {exact:.5} ({:.2}% ≤ 1%)", o.re.value, o.re.stderr, 100.0 * rel(o.re.value, exact)),
    );
    Ok(c)
}

/// KS test of `samples` against the law with density `f` on `(0, ∞)`,
/// the CDF accumulated by quadrature between consecutive order statistics.
fn ks_against_density<F: Fn(f64) -> f64>(mut samples: Vec<f64>, f: F) -> Result<f64> {
    samples.sort_by(f64::total_cmp);
    let tol = Tolerance { abs: 1e-12, rel: 1e-10 };
    let mut cdf = Vec::with_capacity(samples.len());
    let (mut acc, mut prev) = (0.0, 0.0);
    for &x in &samples {
        if x > prev {
            acc += integrate(&f, prev, x, tol)?.value;
            prev = x;
        }
        cdf.push(acc);
    }
    Ok(ks_test_sorted(&cdf)?.p_value)
}

fn gig_kummer_laws() -> Result<Checks> {
    let mut c = Checks::new();
    let (p, a, b) = (1.0, 2.0, 2.0);
    let count = 5000u64;
    let gig: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::new(seed(9), i);
            let mut odd = true;
            backward_limit_of(
                || {
                    let g = sample_gamma(p, if odd { 2.0 / b } else { 2.0 / a }, &mut rng);
                    odd = !odd;
                    Matrix2::new(0.0, 1.0, 1.0, g)
                },
                BackwardOptions::default(),
            )
        })
        .collect::<Result<_>>()?;
    let pv = ks_against_density(gig, |x| density_gig(-p, a, b, x).unwrap_or(f64::NAN))?;
    c.check(pv > LEVEL, format!("GIG fixed point: KS p = {pv:.3} > {LEVEL} (n = {count})"));

    let (pp, q, lambda) = (1.0, 1.0, -1.0);
    let spec = EnsembleSpec::DysonTypeI { p: pp, q, lambda };
    let w = weyl_samples(&spec, lambda, PI / 2.0, count as usize, BackwardOptions::default(), seed(9) + 1000)?;
    let y: Vec<f64> = w.iter().map(|w| w / lambda).collect();
    let r = -lambda / q;
    let pv = ks_against_density(y, |y| density_kummer(pp, 0.0, r, y).unwrap_or(f64::NAN))?;
    c.check(pv > LEVEL, format!("Type I w/λ vs Kummer({pp}, 0, {r}): KS p = {pv:.3} > {LEVEL} (n = {count})"));
    Ok(c)
}

fn dyson_type_i() -> Result<Checks> {
    let mut c = Checks::new();
    let (p, q, lambda) = (1.0, 1.0, -1.0);
    let spec = EnsembleSpec::DysonTypeI { p, q, lambda };
    let w = weyl_samples(&spec, lambda, PI / 2.0, 100_000, BackwardOptions::default(), seed(10))?;
    let e = sample_mean(&w, seed(10));
    let exact = oracles::dyson_type_i_mean_w(lambda, p, q)?;
    c.check(e.within(exact, 3.0), format!("E[w(−1)] = {:.5} ± {:.1e} vs −λΨ′/Ψ = {exact:.5} (3·stderr)", e.value, e.stderr));
    Ok(c)
}

/// `chains` independent SDE runs of length `length`, pooled.
fn sde_pooled(energy: f64, sigma: f64, length: f64, chains: u32, hist: Option<HistogramDensity>, seed: u64) -> Result<(Estimate, Option<HistogramDensity>)> {
    let runs = (0..chains)
        .into_par_iter()
        .map(|r| {
            let mut o = SdeOptions::new(energy, sigma, length);
            o.histogram = hist.clone();
            sde_white_noise_run(&o, RandomStream::new(seed, r as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let per: Vec<f64> = runs.iter().map(|r| r.crossings as f64 / length).collect();
    let (value, stderr) = mean_stderr(&per);
    let mut merged: Option<HistogramDensity> = None;
    for r in runs {
        if let Some(h) = r.histogram {
            match merged.as_mut() {
                Some(m) => m.merge(&h)?,
                None => merged = Some(h),
            }
        }
    }
    Ok((Estimate { value, stderr, n: chains as u64, seed }, merged))
}

fn halperin() -> Result<Checks> {
    let mut c = Checks::new();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let e = -10.0 + 20.0 * i as f64 / 99.0;
        let (a, b) = (oracles::halperin_n_airy(e, 1.0)?, oracles::halperin_n_integral(e, 1.0)?);
        worst = worst.max(rel(b, a));
    }
    c.check(worst <= 1e-8, format!("Airy vs integral N on 100 points of [−10, 10], σ = 1: max rel diff {worst:.1e} ≤ 1e-8"));

    let (e, sigma) = (0.0, 2.0);
    let exact = oracles::halperin_n_airy(e, sigma)?;
    let hist = HistogramDensity::uniform(-100.0, 100.0, 2000)?;
    let (n, h) = sde_pooled(e, sigma, 2e4, 8, Some(hist), seed(11))?;
    c.check(
        rel(n.value, exact) <= 0.02,
        format!("SDE N(0) = {:.5} ± {:.1e} vs Airy {exact:.5} ({:.2}% ≤ 2%)", n.value, n.stderr, 100.0 * rel(n.value, exact)),
    );
    let rice = rice_ids(&h.expect("histogram requested"))?;
    c.check(rel(rice, exact) <= 0.05, format!("Rice tail {rice:.5} ({:.2}% ≤ 5%)", 100.0 * rel(rice, exact)));

    let sigma: f64 = 1.0;
    let e = -8.0 * sigma.powf(2.0 / 3.0);
    let ln_n = oracles::halperin_n_airy(e, sigma)?.ln();
    let ratio = ln_n / (-8.0 * e.abs().powf(1.5) / (3.0 * sigma));
    c.check((ratio - 1.0).abs() <= 0.10, format!("Lifshitz ratio at Eσ^(−2/3) = −8: {ratio:.4} (within 10% of 1)"));
    Ok(c)
}

fn white_noise_limit() -> Result<Checks> {
    let mut c = Checks::new();
    let (sigma, l): (f64, f64) = (1.0, 0.01);
    let rate = (2.0 / (sigma * l)).sqrt();
    let spec = EnsembleSpec::FrischLloyd { coupling: Distribution::Laplace { rate }, mean_spacing: l, energy: 1.0 };
    let n = ids_node_counting(&spec, 1.0, &SpectralRunOptions::new(1e4, 4), seed(12))?;
    let exact = oracles::halperin_n_airy(1.0, sigma)?;
    c.check(
        rel(n.value, exact) <= 0.05,
        format!("ℓ = {l}: N(1) = {:.5} ± {:.1e} vs Halperin {exact:.5} ({:.2}% ≤ 5%)", n.value, n.stderr, 100.0 * rel(n.value, exact)),
    );
    // The pointwise limit ℓ → 0 along ℓa² = 2/σ, shown at ℓ = 1e-4.
    let l = 1e-4;
    let rate = (2.0 / (sigma * l)).sqrt();
    for theta in [0.5, 1.0, 2.0] {
        let lev = levy_exponent(&Distribution::Laplace { rate }, l, theta)?;
        let target = -0.5 * sigma * theta * theta;
        let d = (lev - Complex64::new(target, 0.0)).norm() / target.abs();
        c.check(d <= 0.01, format!("Λ({theta}) = {:.5} vs −σθ²/2 = {target} at ℓ = {l} ({:.3}% ≤ 1%)", lev.re, 100.0 * d));
    }
    Ok(c)
}

fn scattering() -> Result<Checks> {
    let mut c = Checks::new();
    let spec = EnsembleSpec::FrischLloyd { coupling: Distribution::Exponential { mean: 1.0 }, mean_spacing: 1.0, energy: 1.0 };
    let k = 1.0;
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let len = 1.0 + 50.0 * (i % 20) as f64;
        let real = Realization::sample(&spec, len, RandomStream::new(seed(13), i))?;
        let r = rt_coefficients(&real, k)?;
        worst = worst.max((r.r.norm_sqr() + r.t.norm_sqr() - 1.0).abs());
    }
    c.check(worst <= 1e-10, format!("max ||R|²+|T|²−1| = {worst:.1e} on 1000 samples ≤ 1e-10"));

    let gamma = gamma_norm_growth_replicated(&spec, &NormGrowthOptions::new(1_000_000), seed(13), 4)?;
    let lengths: Vec<f64> = (1..=20).map(|i| 100.0 * i as f64).collect();
    let fit = decay_rate(&spec, k, &lengths, 400, seed(13))?;
    let g = gamma.value / spec.mean_spacing().unwrap_or(1.0);
    c.check(
        rel(-fit.slope.value, g) <= 0.05,
        format!("ln|T_L| slope {:.5} ± {:.1e} vs −γ = {:.5} ({:.2}% ≤ 5%)", fit.slope.value, fit.slope.stderr, -g, 100.0 * rel(-fit.slope.value, g)),
    );

    let cfg = RiccatiOrbitConfig { samples: 2_000_000, ..Default::default() };
    let f = stationary_histogram(&spec, &cfg, HistogramDensity::uniform(-60.0, 60.0, 4000)?, RandomStream::new(seed(13), 1 << 40))?;
    let bins = 32;
    let expected = phase_density_from_f(&f, bins)?;
    let ph = reflexion_phase_histogram(&spec, &PhaseOptions::new(k), 20_000, bins, seed(13) + 1)?;
    let total = ph.hist.n;
    let obs: Vec<f64> = ph.hist.counts.clone();
    let exp: Vec<f64> = (0..bins).map(|i| expected.mass(i) * total).collect();
    let t = chi_square_test(&obs, &exp, 0)?;
    c.check(t.passes(LEVEL), format!("phase histogram vs f-transform: χ² = {:.1} (dof {}), p = {:.3} > {LEVEL}", t.statistic, t.dof, t.p_value));
    Ok(c)
}

fn random_sl2(rng: &mut RandomStream) -> Matrix2 {
    let mut normal = || {
        let u = rng.uniform_open();
        let v = rng.uniform();
        (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
    };
    loop {
        let (a, b, cc) = (normal(), normal(), normal());
        if a.abs() > 0.1 {
            return Matrix2::new(a, b, cc, (1.0 + b * cc) / a);
        }
    }
}

fn hyperbolic_identities() -> Result<Checks> {
    let mut c = Checks::new();
    let mut rng = RandomStream::new(seed(14), 0);
    let (mut worst_f, mut worst_iso): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let m = random_sl2(&mut rng);
        let i = HalfPlanePoint::i();
        let f = m.frobenius_sq();
        worst_f = worst_f.max((2.0 * cosh_distance(&i, &i.act(&m)?) - f).abs() / f);
        let z = HalfPlanePoint::new(4.0 * rng.uniform() - 2.0, 0.1 + 2.0 * rng.uniform())?;
        let w = HalfPlanePoint::new(4.0 * rng.uniform() - 2.0, 0.1 + 2.0 * rng.uniform())?;
        let before = cosh_distance(&z, &w);
        worst_iso = worst_iso.max((cosh_distance(&z.act(&m)?, &w.act(&m)?) - before).abs() / before);
    }
    c.check(worst_f <= 1e-10, format!("max rel |2 ch ρ(i, A(i)) − |A|²_F| = {worst_f:.1e} ≤ 1e-10"));
    c.check(worst_iso <= 1e-10, format!("max rel change of ch ρ under A = {worst_iso:.1e} ≤ 1e-10 (10⁴ matrices)"));
    Ok(c)
}

fn weyl_free_case() -> Result<Checks> {
    let mut c = Checks::new();
    let len = 3.7;
    let real = Realization::free(ImpurityKind::Schrodinger, len)?;
    let mut worst: f64 = 0.0;
    for i in 0..41 {
        let lam = -4.0 + 0.2 * i as f64 + 0.013;
        let w = weyl_cf_truncated(&real, Complex64::new(lam, 0.0), BoundaryData::DIRICHLET)?;
        let k = Complex64::new(lam, 0.0).sqrt();
        let exact = -k * (k * len).cos() / (k * len).sin();
        worst = worst.max((w - exact).norm() / exact.norm().max(1.0));
    }
    c.check(worst <= 1e-10, format!("truncated CF vs −k cot kL on 41 points of [−4, 4]: {worst:.1e} ≤ 1e-10"));

    let long = Realization::free(ImpurityKind::Schrodinger, 1000.0)?;
    let grid = [0.5, 1.0, 2.0, 3.0, 4.0];
    let d = stieltjes_density(&long, &grid, 0.05, BoundaryData::DIRICHLET)?;
    let worst = grid.iter().zip(&d).map(|(l, d)| rel(*d, l.sqrt() / PI)).fold(0.0f64, f64::max);
    c.check(worst <= 0.02, format!("Stieltjes density vs √λ/π on {grid:?}: max rel {:.2}% ≤ 2%", 100.0 * worst));
    Ok(c)
}

fn ground_state() -> Result<Checks> {
    let mut c = Checks::new();
    let (e, sigma) = (-2.0, 2.0);
    let n = oracles::halperin_n_airy(e, sigma)?;
    let window = 2.0 / n;
    let stats = first_passage_stats(&FirstPassageOptions::new(e, sigma, 2000, window), seed(16))?;
    let tau = 1.0 / n;
    c.check(
        rel(stats.mean.value, tau) <= 0.05,
        format!("E=−2, σ=2: mean τ₁ = {:.3} ± {:.2} vs 1/N = {tau:.3} ({:.2}% ≤ 5%)", stats.mean.value, stats.mean.stderr, 100.0 * rel(stats.mean.value, tau)),
    );
    let mut taus = stats.taus.clone();
    taus.sort_by(f64::total_cmp);
    let cdf: Vec<f64> = taus.iter().map(|t| 1.0 - (-n * t).exp()).collect();
    let ks = ks_test_sorted(&cdf)?;
    c.check(ks.passes(LEVEL), format!("τ₁ vs Exponential(N): KS p = {:.3} > {LEVEL} (n = {})", ks.p_value, taus.len()));
    let table = stats.count_table();
    let windows = stats.window_counts.len() as f64;
    let mean = window * n;
    let mut obs: Vec<f64> = table.iter().map(|&x| x as f64).collect();
    let mut exp: Vec<f64> = (0..table.len() as u64).map(|k| windows * oracles::level_poisson_pmf(k, mean).unwrap_or(0.0)).collect();
    // The last cell takes the whole upper tail.
    let tail: f64 = windows - exp.iter().sum::<f64>();
    *exp.last_mut().unwrap() += tail.max(0.0);
    obs.truncate(exp.len());
    let t = chi_square_test(&obs, &exp, 0)?;
    c.check(t.passes(LEVEL), format!("{} windows of L = {window:.1}: χ² vs Poisson(LN = {mean}) p = {:.3} > {LEVEL}", windows, t.p_value));
    Ok(c)
}

/// `ln Z` by summing over all `2^n` configurations.
fn ising_brute_force(h: &[f64], beta: f64, coupling: f64, boundary: Boundary) -> f64 {
    let n = h.len();
    let mut terms = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let s = |j: usize| if mask >> j & 1 == 1 { 1.0 } else { -1.0 };
        let mut energy = 0.0;
        for j in 0..n {
            energy -= h[j] * s(j);
            if j + 1 < n {
                energy -= coupling * s(j) * s(j + 1);
            } else if boundary == Boundary::Periodic {
                energy -= coupling * s(j) * s(0);
            }
        }
        terms.push(-beta * energy);
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn ising() -> Result<Checks> {
    let mut c = Checks::new();
    let mut rng = RandomStream::new(seed(17), 0);
    let (beta, coupling) = (0.7, 1.3);
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        let h: Vec<f64> = (0..n).map(|_| 3.0 * rng.uniform() - 1.5).collect();
        for b in [Boundary::Periodic, Boundary::Open] {
            let z = partition_function(&h, beta, coupling, b)?;
            let exact = ising_brute_force(&h, beta, coupling, b);
            worst = worst.max((z.ln() - exact).abs() / exact.abs().max(1.0));
        }
    }
    c.check(worst <= 1e-10, format!("transfer matrix vs enumeration, n ≤ 12, both boundaries: {worst:.1e} ≤ 1e-10"));

    let (h, beta, coupling) = (0.4, 0.9, 1.1);
    let n = 10_000;
    let z = partition_function(&vec![h; n], beta, coupling, Boundary::Periodic)?;
    let f = -z.ln() / (beta * n as f64);
    let exact = -top_eigenvalue(h, beta, coupling).ln() / beta;
    c.check((f - exact).abs() <= 1e-8, format!("uniform field f = {f:.10} vs −ln λ₊/β = {exact:.10} (1e-8)"));

    let spec = EnsembleSpec::IsingChain { beta: 1.0, coupling: 1.0, field: Distribution::Normal { mean: 0.0, std: 1.0 } };
    let sizes = [1000usize, 2000, 4000, 8000];
    let mut spreads = Vec::new();
    for &n in &sizes {
        spreads.push(free_energy_density(&spec, n, 256, seed(17))?.spread);
    }
    let x: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = spreads.iter().map(|s| s.ln()).collect();
    let fit = fit_line(&x, &y)?;
    let ratios: Vec<String> = spreads.windows(2).map(|w| format!("{:.3}", w[0] / w[1])).collect();
    c.check(
        (fit.slope + 0.5).abs() <= 0.1,
        format!("doubling n = 1000…8000: spread ratios {} (√2 = 1.414), exponent {:.3} within 0.1 of −1/2", ratios.join(", "), fit.slope),
    );
    Ok(c)
}

fn dual_estimators() -> Result<Checks> {
    let mut c = Checks::new();
    let e = 1.0;
    let spec = EnsembleSpec::FrischLloyd { coupling: Distribution::Exponential { mean: 1.0 }, mean_spacing: 1.0, energy: e };
    let nodes = ids_node_counting(&spec, e, &SpectralRunOptions::new(1e5, 8), seed(18))?;
    let cfg = RiccatiOrbitConfig { samples: 10_000_000, ..Default::default() };
    let hist = stationary_histogram(&spec, &cfg, HistogramDensity::uniform(-1000.0, 1000.0, 20_000)?, RandomStream::new(seed(18), 1 << 40))?;
    let rice = rice_ids(&hist)?;
    c.check(
        rel(rice, nodes.value) <= 0.02,
        format!("node N = {:.5} ± {:.1e} vs Rice N = {rice:.5} ({:.2}% ≤ 2%)", nodes.value, nodes.stderr, 100.0 * rel(rice, nodes.value)),
    );
    let g = gamma_norm_growth_replicated(&spec, &NormGrowthOptions::new(2_000_000), seed(18), 4)?;
    let pv = pv_gamma(&hist)?;
    c.check(
        rel(pv, g.value) <= 0.05,
        format!("norm-growth γ = {:.5} ± {:.1e} vs PV γ = {pv:.5} ({:.2}% ≤ 5%)", g.value, g.stderr, 100.0 * rel(pv, g.value)),
    );
    Ok(c)
}
