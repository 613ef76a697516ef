//! One function per experiment.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use clap::Args;
use disorder_rmt::acceptance;
use disorder_rmt::ensembles::{Distribution, EnsembleSpec, RandomStream};
use disorder_rmt::ising::free_energy_density;
use disorder_rmt::lyapunov::{
    gamma_furstenberg, gamma_norm_growth_replicated, strong_irreducibility_of, FurstenbergOptions, IrreducibilityTag,
    NormGrowthOptions,
};
use disorder_rmt::oracles::{self, Formula, OracleNumber};
use disorder_rmt::riccati::{
    ergodic_omega, first_passage_stats, pv_gamma, rice_ids, sample_mean, sde_white_noise_run, stationary_histogram,
    BackwardOptions, FirstPassageOptions, HistogramDensity, RiccatiOrbitConfig, SdeOptions,
};
use disorder_rmt::scattering::{decay_rate, reflexion_phase_histogram, PhaseOptions};
use disorder_rmt::spectral::{complex_lyapunov, ids_node_counting, weyl_samples, NodeMethod, SpectralRunOptions};
use serde::{Deserialize, Serialize};

use crate::config::{count, parse_grid, Resolved};
use crate::error::{during, CliError};
use crate::report::{print_line, Summary, Table};

type Run<A> = Resolved<A>;

fn need<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Validation(format!("missing --{what}")))
}

fn spectral_at(spec: &EnsembleSpec, value: Option<f64>) -> Result<EnsembleSpec, CliError> {
    match value {
        Some(v) => Ok(spec.with_spectral_parameter(v)?),
        None => Ok(spec.clone()),
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovArgs {
    /// Steps per replica; float notation such as 1e7 is accepted.
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u32>,
    #[arg(long)]
    pub burn_in: Option<f64>,
    /// Spectral parameter (λ or E) for impurity models.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
}

/// Closed-form growth rates where one is known.
fn gamma_reference(spec: &EnsembleSpec) -> Option<f64> {
    match spec {
        EnsembleSpec::Fibonacci {} => Some(((1.0 + 5f64.sqrt()) / 2.0).ln()),
        EnsembleSpec::CohenNewman { alpha, beta } => oracles::cohen_newman_gamma_quadrature(*alpha, *beta).ok(),
        EnsembleSpec::KronigPenney { coupling, spacing, energy } if *energy > 0.0 => {
            oracles::kronig_penney_gamma(energy.sqrt(), *spacing, *coupling).ok()
        }
        EnsembleSpec::FrischLloyd { coupling: Distribution::Exponential { mean }, mean_spacing, energy } if *energy < 0.0 => {
            oracles::nieuwenhuizen_omega_negative(*energy, *mean_spacing, *mean).ok()
        }
        _ => None,
    }
}

pub fn lyapunov(r: Run<LyapunovArgs>) -> Result<(), CliError> {
    let spec = spectral_at(r.model()?, r.args.lambda)?;
    let mut opts = NormGrowthOptions::new(count(need(r.args.n, "n")?, "n")?);
    if let Some(b) = r.args.burn_in {
        opts.burn_in = count(b, "burn-in")?;
    }
    let replicas = r.args.replicas.unwrap_or(1);
    let e = gamma_norm_growth_replicated(&spec, &opts, r.seed, replicas).map_err(during("gamma_norm_growth"))?;
    let mut s = Summary::new("lyapunov", Some(&spec), r.seed).estimate(e.value, e.stderr, e.n).with("replicas", replicas);
    if let Some(g) = gamma_reference(&spec) {
        s = s.with("reference", g);
    }
    if matches!(spec, EnsembleSpec::RandomFibonacci {}) {
        // Viswanath's constant, ln 1.13198824…
        s = s.with("reference_interval", [0.1239755980, 0.1239755995]);
    }
    s.emit(r.out.as_deref())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FurstenbergArgs {
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
}

pub fn furstenberg(r: Run<FurstenbergArgs>) -> Result<(), CliError> {
    let spec = spectral_at(r.model()?, r.args.lambda)?;
    let opts = FurstenbergOptions {
        burn_in: count(r.args.burn_in.unwrap_or(1000.0), "burn-in")?,
        n: count(need(r.args.n, "n")?, "n")?,
        start: None,
    };
    let o = gamma_furstenberg(&spec, &opts, RandomStream::new(r.seed, 0)).map_err(during("gamma_furstenberg"))?;
    let mut s = Summary::new("furstenberg", Some(&spec), r.seed)
        .estimate(o.estimate.value, o.estimate.stderr, o.estimate.n)
        .with("support_atoms", o.support_atoms)
        .with("trapped", o.trapped);
    if let Some(g) = gamma_reference(&spec) {
        s = s.with("reference", g);
    }
    s.emit(r.out.as_deref())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrreducibleArgs {
    /// Word length explored when searching for invariant finite sets.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
}

pub fn irreducible(r: Run<IrreducibleArgs>) -> Result<(), CliError> {
    let spec = spectral_at(r.model()?, r.args.lambda)?;
    let depth = r.args.depth.unwrap_or(4);
    let v = strong_irreducibility_of(&spec, depth).map_err(during("strong_irreducibility"))?;
    let tag = match v.tag {
        IrreducibilityTag::Irreducible => "irreducible",
        IrreducibilityTag::FiniteInvariantSet => "finite-invariant-set",
        IrreducibilityTag::Inconclusive => "inconclusive",
    };
    let witness: Option<Vec<f64>> = v.witness.map(|w| w.iter().map(|p| p.slope().to_f64()).collect());
    Summary::new("irreducible", Some(&spec), r.seed)
        .with("verdict", tag)
        .with("depth", depth)
        .with("witness_slopes", witness)
        .emit(r.out.as_deref())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridArgs {
    /// Spectral parameters, `lo:hi:n` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Sample length.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u32>,
    /// Boundary angle at the origin.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Node counting method: `prufer` or `sign-change`.
    #[arg(long)]
    pub method: Option<String>,
    /// `omega` only: `spectral` (ψ growth and nodes) or `riccati`
    /// (ergodic average along the Riccati orbit).
    #[arg(long)]
    pub route: Option<String>,
    /// `omega --route riccati` only: orbit samples per grid point.
    #[arg(long)]
    pub samples: Option<f64>,
}

fn spectral_options(a: &GridArgs) -> Result<SpectralRunOptions, CliError> {
    let mut o = SpectralRunOptions::new(need(a.length, "L")?, a.replicas.unwrap_or(8));
    if let Some(al) = a.alpha {
        o.alpha = al;
    }
    o.method = match a.method.as_deref() {
        None | Some("prufer") => NodeMethod::Prufer,
        Some("sign-change") => NodeMethod::SignChange,
        Some(m) => return Err(CliError::Validation(format!("unknown node method `{m}`"))),
    };
    Ok(o)
}

fn is_exponential(d: &Distribution) -> Option<f64> {
    match d {
        Distribution::Exponential { mean } => Some(*mean),
        _ => None,
    }
}

fn is_constant(d: &Distribution) -> Option<f64> {
    match d {
        Distribution::Constant { value } => Some(*value),
        _ => None,
    }
}

/// Closed-form `Ω(λ)` where one is available: `(Re, Im)` with
/// `Im Ω = −πN`.
fn omega_reference(spec: &EnsembleSpec, lambda: f64) -> Option<(f64, f64)> {
    match spec {
        EnsembleSpec::FrischLloyd { coupling, mean_spacing, .. } => {
            if is_constant(coupling) == Some(0.0) {
                let k = lambda.abs().sqrt();
                return Some(if lambda < 0.0 { (k, 0.0) } else { (0.0, -k) });
            }
            let v = is_exponential(coupling)?;
            (lambda < 0.0).then(|| oracles::nieuwenhuizen_omega_negative(lambda, *mean_spacing, v).ok().map(|o| (o, 0.0)))?
        }
        EnsembleSpec::KronigPenney { coupling, spacing, .. } if lambda > 0.0 => {
            oracles::kronig_penney_gamma(lambda.sqrt(), *spacing, *coupling).ok().map(|g| (g, f64::NAN))
        }
        EnsembleSpec::DysonString { mass, spacing, .. } => {
            if let (Some(m), Some(l)) = (is_exponential(mass), is_exponential(spacing)) {
                if lambda > 0.0 {
                    return oracles::kotani_n(lambda, m, l).ok().map(|n| (f64::NAN, -PI * n));
                }
                return None;
            }
            let (m, l) = (is_constant(mass)?, is_constant(spacing)?);
            oracles::homogeneous_string(lambda, m, l).ok().map(|h| (h.omega.re, h.omega.im))
        }
        _ => None,
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn ids(r: Run<GridArgs>) -> Result<(), CliError> {
    let spec = r.model()?.clone();
    let grid = parse_grid(need(r.args.grid.as_deref(), "grid")?)?;
    let opts = spectral_options(&r.args)?;
    let mut table = Table::new(&["lambda", "n_mc", "stderr", "n_oracle"]);
    for &l in &grid {
        let e = ids_node_counting(&spec, l, &opts, r.seed).map_err(during("ids_node_counting"))?;
        let oracle = omega_reference(&spec, l).and_then(|(_, im)| finite(-im / PI));
        table.push(&[Some(l), Some(e.value), Some(e.stderr), oracle]);
    }
    table.emit(r.csv.as_deref())?;
    if let Some(out) = &r.out {
        Summary::new("ids", Some(&spec), r.seed)
            .with("grid", &grid)
            .with("L", opts.length)
            .with("replicas", opts.replicas)
            .with("rows", table.len())
            .emit(Some(out))?;
    }
    Ok(())
}

pub fn omega(r: Run<GridArgs>) -> Result<(), CliError> {
    let spec = r.model()?.clone();
    let grid = parse_grid(need(r.args.grid.as_deref(), "grid")?)?;
    let mut table = Table::new(&["lambda", "re", "re_stderr", "im", "im_stderr", "oracle_re", "oracle_im"]);
    let route = r.args.route.as_deref().unwrap_or("spectral");
    for &l in &grid {
        let (re, im) = match route {
            "spectral" => {
                let o = complex_lyapunov(&spec, l, &spectral_options(&r.args)?, r.seed)
                    .map_err(during("complex_lyapunov"))?;
                (o.re, o.im)
            }
            "riccati" => {
                let cfg = RiccatiOrbitConfig {
                    samples: count(r.args.samples.unwrap_or(1e6), "samples")?,
                    ..Default::default()
                };
                let at = spec.with_spectral_parameter(l)?;
                let o = ergodic_omega(&at, &cfg, RandomStream::new(r.seed, 0)).map_err(during("ergodic_omega"))?;
                (o.re, o.im)
            }
            other => return Err(CliError::Validation(format!("unknown route `{other}`"))),
        };
        let (ore, oim) = omega_reference(&spec, l).unwrap_or((f64::NAN, f64::NAN));
        table.push(&[Some(l), Some(re.value), Some(re.stderr), Some(im.value), Some(im.stderr), finite(ore), finite(oim)]);
    }
    table.emit(r.csv.as_deref())?;
    if let Some(out) = &r.out {
        Summary::new("omega", Some(&spec), r.seed).with("grid", &grid).with("route", route).emit(Some(out))?;
    }
    Ok(())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Number of independent half-line samples.
    #[arg(long)]
    pub count: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Agreement required between successive continued-fraction iterates.
    #[arg(long)]
    pub tol: Option<f64>,
}

fn weyl_reference(spec: &EnsembleSpec, lambda: f64) -> Option<f64> {
    match spec {
        EnsembleSpec::DysonString { mass, spacing, .. } => {
            let (m, l) = (is_exponential(mass)?, is_exponential(spacing)?);
            oracles::kotani_letac_mean_w(lambda, m, l).ok().map(|x| -x)
        }
        EnsembleSpec::DysonTypeI { p, q, .. } => oracles::dyson_type_i_mean_w(lambda, *p, *q).ok(),
        _ => None,
    }
}

pub fn weyl(r: Run<WeylArgs>) -> Result<(), CliError> {
    let base = r.model()?;
    let lambda = r.args.lambda.or(base.spectral_parameter()).ok_or_else(|| CliError::Validation("missing --lambda".into()))?;
    let spec = base.with_spectral_parameter(lambda)?;
    let alpha = r.args.alpha.unwrap_or(PI / 2.0);
    let mut opts = BackwardOptions::default();
    if let Some(t) = r.args.tol {
        opts.tol = t;
    }
    let n = count(r.args.count.unwrap_or(10_000.0), "count")? as usize;
    let w = weyl_samples(&spec, lambda, alpha, n, opts, r.seed).map_err(during("weyl_samples"))?;
    let e = sample_mean(&w, r.seed);
    let mut s = Summary::new("weyl", Some(&spec), r.seed).estimate(e.value, e.stderr, e.n).with("alpha", alpha);
    if let Some(x) = weyl_reference(&spec, lambda) {
        s = s.with("reference", x);
    }
    if let Some(p) = &r.csv {
        let mut t = Table::new(&["w"]);
        for x in &w {
            t.push(&[Some(*x)]);
        }
        t.emit(Some(p))?;
    }
    s.emit(r.out.as_deref())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub samples: Option<f64>,
    #[arg(long)]
    pub burn_in: Option<f64>,
    /// Histogram range and bins, `lo:hi:bins`.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
}

pub fn riccati_hist(r: Run<HistArgs>) -> Result<(), CliError> {
    let spec = spectral_at(r.model()?, r.args.lambda)?;
    let cfg = RiccatiOrbitConfig {
        samples: count(r.args.samples.unwrap_or(1e6), "samples")?,
        burn_in: count(r.args.burn_in.unwrap_or(1000.0), "burn-in")?,
        ..Default::default()
    };
    let range = r.args.range.clone().unwrap_or_else(|| "-20:20:400".into());
    let parts: Vec<&str> = range.split(':').collect();
    let bad = || CliError::Validation(format!("bad --range `{range}`; use lo:hi:bins"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let bins = count(parts[2].parse().map_err(|_| bad())?, "bins")? as usize;
    let hist = stationary_histogram(&spec, &cfg, HistogramDensity::uniform(lo, hi, bins)?, RandomStream::new(r.seed, 0))
        .map_err(during("stationary_histogram"))?;
    let mut t = Table::new(&["z", "density"]);
    for i in 0..hist.bins() {
        t.push(&[Some(hist.center(i)), Some(hist.density(i))]);
    }
    t.emit(r.csv.as_deref())?;
    if let Some(out) = &r.out {
        let mut s = Summary::new("riccati-hist", Some(&spec), r.seed)
            .with("samples", cfg.samples)
            .with("tail_mass", hist.tail_mass());
        s.n = Some(cfg.samples);
        // Tail estimators need a wide range; report their failure without aborting.
        match rice_ids(&hist) {
            Ok(n) => s = s.with("rice_ids", n),
            Err(e) => s = s.with("rice_ids_error", e.to_string()),
        }
        match pv_gamma(&hist) {
            Ok(g) => s = s.with("pv_gamma", g),
            Err(e) => s = s.with("pv_gamma_error", e.to_string()),
        }
        s.emit(Some(out))?;
    }
    Ok(())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeArgs {
    #[arg(long = "E", allow_hyphen_values = true)]
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    /// White-noise strength.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub z_max: Option<f64>,
}

pub fn sde(r: Run<SdeArgs>) -> Result<(), CliError> {
    let (e, sigma) = (need(r.args.energy, "E")?, need(r.args.sigma, "sigma")?);
    let mut opts = SdeOptions::new(e, sigma, r.args.length.unwrap_or(1e4));
    opts.dt = r.args.dt;
    opts.z_max = r.args.z_max;
    let run = sde_white_noise_run(&opts, RandomStream::new(r.seed, 0)).map_err(during("sde_white_noise_run"))?;
    let mut s = Summary::new("sde", None, r.seed)
        .estimate(run.ids.value, run.ids.stderr, run.steps)
        .with("E", e)
        .with("sigma", sigma)
        .with("L", opts.length)
        .with("gamma", run.gamma.value)
        .with("gamma_stderr", run.gamma.stderr)
        .with("crossings", run.crossings);
    if let Ok(h) = oracles::halperin_omega(e, sigma) {
        s = s.with("reference_n", -h.im / PI).with("reference_gamma", h.re);
    }
    s.emit(r.out.as_deref())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundArgs {
    #[arg(long = "E", allow_hyphen_values = true)]
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Number of first-passage times.
    #[arg(long)]
    pub samples: Option<f64>,
    /// Window length for level counts; defaults to 2/N.
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u32>,
    #[arg(long)]
    pub dt: Option<f64>,
}

pub fn groundstate(r: Run<GroundArgs>) -> Result<(), CliError> {
    let (e, sigma) = (need(r.args.energy, "E")?, need(r.args.sigma, "sigma")?);
    let n = oracles::halperin_n_airy(e, sigma)?;
    let samples = count(r.args.samples.unwrap_or(1000.0), "samples")? as usize;
    let mut opts = FirstPassageOptions::new(e, sigma, samples, r.args.window.unwrap_or(2.0 / n));
    if let Some(k) = r.args.replicas {
        opts.replicas = k;
    }
    opts.dt = r.args.dt;
    let st = first_passage_stats(&opts, r.seed).map_err(during("first_passage_stats"))?;
    if let Some(p) = &r.csv {
        let mut t = Table::new(&["tau"]);
        for x in &st.taus {
            t.push(&[Some(*x)]);
        }
        t.emit(Some(p))?;
    }
    Summary::new("groundstate", None, r.seed)
        .estimate(st.mean.value, st.mean.stderr, st.mean.n)
        .with("E", e)
        .with("sigma", sigma)
        .with("reference", 1.0 / n)
        .with("window", opts.window)
        .with("window_counts", &st.window_counts)
        .emit(r.out.as_deref())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterArgs {
    /// Wavenumber; the model energy is set to k².
    #[arg(long)]
    pub k: Option<f64>,
    /// Sample lengths, `lo:hi:n` or a comma list.
    #[arg(long)]
    pub lengths: Option<String>,
    #[arg(long)]
    pub replicas: Option<u32>,
    /// Also bin the reflexion phase of this many semi-infinite samples.
    #[arg(long)]
    pub phase_samples: Option<u32>,
    #[arg(long)]
    pub phase_bins: Option<usize>,
}

pub fn scatter(r: Run<ScatterArgs>) -> Result<(), CliError> {
    let k = r.args.k.unwrap_or(1.0);
    let spec = r.model()?.with_spectral_parameter(k * k)?;
    let lengths = parse_grid(r.args.lengths.as_deref().unwrap_or("100:1000:10"))?;
    let replicas = r.args.replicas.unwrap_or(16);
    let fit = decay_rate(&spec, k, &lengths, replicas, r.seed).map_err(during("decay_rate"))?;
    let gamma_ref = gamma_norm_growth_replicated(&spec, &NormGrowthOptions::new(1_000_000), r.seed, 1)
        .map_err(during("gamma_norm_growth"))?;
    let mut s = Summary::new("scatter", Some(&spec), r.seed)
        .estimate(fit.slope.value, fit.slope.stderr, fit.slope.n)
        .with("k", k)
        .with("decay", fit.to_json(Some(gamma_ref.value)));
    let mut t = Table::new(&["L", "mean_ln_t"]);
    for (l, y) in fit.lengths.iter().zip(&fit.mean_ln_t) {
        t.push(&[Some(*l), Some(*y)]);
    }
    if let Some(ph) = r.args.phase_samples {
        let bins = r.args.phase_bins.unwrap_or(32);
        let h = reflexion_phase_histogram(&spec, &PhaseOptions::new(k), ph, bins, r.seed)
            .map_err(during("reflexion_phase_histogram"))?;
        s = s.with("phase_degenerate", h.degenerate).with(
            "phase_density",
            (0..h.hist.bins()).map(|i| [h.hist.center(i), h.hist.density(i)]).collect::<Vec<_>>(),
        );
    }
    if let Some(p) = &r.csv {
        t.emit(Some(p))?;
    }
    s.emit(r.out.as_deref())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingArgs {
    /// Spins per chain.
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u32>,
}

pub fn ising(r: Run<IsingArgs>) -> Result<(), CliError> {
    let spec = r.model()?;
    let n = count(r.args.n.unwrap_or(1e4), "n")? as usize;
    let res = free_energy_density(spec, n, r.args.replicas.unwrap_or(16), r.seed).map_err(during("free_energy_density"))?;
    Summary::new("ising", Some(spec), r.seed)
        .estimate(res.free_energy_density, res.stderr, n as u64)
        .with("replicas", res.replicas)
        .with("spread", res.spread)
        .emit(r.out.as_deref())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleArgs {
    /// Formula id (see `--list`) or `halperin` for N and Ω together.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long = "E", allow_hyphen_values = true)]
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Further parameters, `key=value`.
    #[arg(long = "param", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    #[serde(default)]
    pub param: Vec<String>,
    /// Tabulate along this parameter over `--grid`.
    #[arg(long)]
    pub vary: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// List the formula ids and their parameters.
    #[arg(long)]
    #[serde(default)]
    pub list: bool,
}

pub fn oracle(r: Run<OracleArgs>) -> Result<(), CliError> {
    let a = &r.args;
    if a.list {
        let lines: Vec<String> = Formula::ALL.iter().map(|f| format!("{:<32} {}", f.id(), f.params().join(", "))).collect();
        return print_line(&lines.join("\n"));
    }
    let name = need(a.name.as_deref(), "name")?;
    let mut params = BTreeMap::new();
    if let Some(e) = a.energy {
        params.insert("energy".to_string(), e);
    }
    if let Some(l) = a.lambda {
        params.insert("lambda".to_string(), l);
    }
    if let Some(s) = a.sigma {
        params.insert("sigma".to_string(), s);
    }
    for p in &a.param {
        let (k, v) = p.split_once('=').ok_or_else(|| CliError::Validation(format!("--param expects KEY=VALUE, got `{p}`")))?;
        let v: f64 = v.parse().map_err(|_| CliError::Validation(format!("--param {k}: not a number")))?;
        params.insert(k.to_string(), v);
    }
    if name == "halperin" {
        let e = need(a.energy, "E")?;
        let sigma = need(a.sigma, "sigma")?;
        let h = oracles::halperin(e, sigma).map_err(during("halperin"))?;
        let mut s = Summary::new("oracle", None, r.seed)
            .with("name", name)
            .with("n_airy", h.n_airy)
            .with("n_integral", h.n_integral)
            .with("omega_re", h.omega.re)
            .with("omega_im", h.omega.im);
        s.value = Some(h.n_airy);
        s.params = serde_json::to_value(&params).expect("parameters serialize");
        return s.emit(r.out.as_deref());
    }
    let formula: Formula = name.parse()?;
    if let Some(vary) = &a.vary {
        let grid = parse_grid(need(a.grid.as_deref(), "grid")?)?;
        match &r.csv {
            Some(p) => oracles::write_grid_csv(std::fs::File::create(p)?, formula, vary, &grid, &params)?,
            None => oracles::write_grid_csv(std::io::stdout().lock(), formula, vary, &grid, &params)?,
        };
        return Ok(());
    }
    let v = formula.evaluate(&params).map_err(during("oracle"))?;
    let mut s = Summary::new("oracle", None, r.seed).with("name", formula.id());
    s.params = serde_json::to_value(&v.params).expect("parameters serialize");
    match v.value {
        OracleNumber::Real(x) => s.value = Some(x),
        OracleNumber::Complex(z) => s = s.with("re", z.re).with("im", z.im),
    }
    s.emit(r.out.as_deref())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestArgs {
    /// Criterion numbers to run; all when empty.
    #[serde(default)]
    pub criteria: Vec<u32>,
}

pub fn selftest(r: Run<SelftestArgs>) -> Result<(), CliError> {
    let total = acceptance::NAMES.len() as u32;
    let ids: Vec<u32> = if r.args.criteria.is_empty() { (1..=total).collect() } else { r.args.criteria.clone() };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > total) {
        return Err(CliError::Validation(format!("no criterion {bad}; there are {total}")));
    }
    let mut failed = Vec::new();
    for id in ids {
        let report = acceptance::run(id);
        print_line(&report.to_string())?;
        if !report.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        print_line("selftest: all criteria passed")?;
        Ok(())
    } else {
        Err(CliError::Numerical(format!("criteria {failed:?} failed")))
    }
}
