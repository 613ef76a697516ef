use disorder_rmt::ensembles::{cell_matrix, Cell, Distribution, EnsembleSpec, ImpurityKind, RandomStream};
use disorder_rmt::algebra::Slope;
use disorder_rmt::oracles::{halperin_n_airy, halperin_n_integral, kotani_letac_mean_w, lifshitz_tail};
use disorder_rmt::riccati::{
    backward_limit, backward_samples, dyson_schmidt_residual, first_passage_stats, forward_orbit, pv_gamma, rice_ids,
    sample_mean, sde_white_noise_run, BackwardOptions, FirstPassageOptions, HistogramDensity, SdeOptions,
};
use disorder_rmt::stats::{chi_square_test, mean_stderr};
use std::f64::consts::PI;

fn free_fl(energy: f64) -> EnsembleSpec {
    EnsembleSpec::FrischLloyd { coupling: Distribution::Constant { value: 0.0 }, mean_spacing: 1.0, energy }
}

fn exp_fl(energy: f64) -> EnsembleSpec {
    EnsembleSpec::FrischLloyd { coupling: Distribution::Exponential { mean: 1.0 }, mean_spacing: 1.0, energy }
}

fn cauchy(k: f64) -> impl Fn(f64) -> f64 {
    move |z| k / PI / (z * z + k * k)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

#[test]
fn free_orbit_below_the_band_settles_at_k() {
    let k = 1.5;
    for z0 in [-1.0, 0.0, 3.0, 100.0, f64::INFINITY] {
        let last = forward_orbit(&free_fl(-k * k), z0, RandomStream::new(1, 0)).unwrap().nth(200).unwrap();
        assert!((last.z.to_f64() - k).abs() <= 1e-10, "z0 = {z0}: {:?}", last.z);
    }
}

#[test]
fn free_orbit_in_the_band_counts_k_over_pi() {
    let k = 2.0;
    let last = forward_orbit(&free_fl(k * k), 0.3, RandomStream::new(2, 0)).unwrap().nth(50_000).unwrap();
    let n = last.crossings as f64 / last.x;
    assert!(rel(n, k / PI) <= 1e-3, "{n}");
}

#[test]
fn pure_kick_is_a_shift() {
    for (z, v) in [(0.5, 2.0), (-3.0, -0.25), (10.0, 0.0)] {
        let m = cell_matrix(ImpurityKind::Schrodinger, 1.0, Cell { spacing: 0.0, weight: v });
        assert_eq!(m.mobius(Slope::Finite(z)), Slope::Finite(z + v));
    }
}

#[test]
fn free_backward_limit_is_k() {
    let z = backward_limit(&free_fl(-4.0), BackwardOptions::default(), RandomStream::new(3, 0)).unwrap();
    assert!((z - 2.0).abs() <= 1e-12);
}

#[test]
fn kotani_backward_mean_matches_bessel_ratio() {
    let spec = EnsembleSpec::DysonString {
        mass: Distribution::Exponential { mean: 1.0 },
        spacing: Distribution::Exponential { mean: 1.0 },
        lambda: -1.0,
    };
    let z = backward_samples(&spec, 100_000, BackwardOptions::default(), 4).unwrap();
    let e = sample_mean(&z, 4);
    let exact = kotani_letac_mean_w(-1.0, 1.0, 1.0).unwrap();
    assert!(e.within(exact, 3.0), "{e:?} vs {exact}");
}

#[test]
fn forward_and_backward_agree_in_law() {
    let spec = exp_fl(-1.0);
    let n = 40;
    let count = 5000;
    let forward: Vec<f64> = (0..count)
        .map(|i| forward_orbit(&spec, 0.0, RandomStream::new(5, i)).unwrap().nth(n).unwrap().z.to_f64())
        .collect();
    let backward = backward_samples(&spec, count as usize, BackwardOptions::default(), 6).unwrap();
    let d = ks_two_sample(forward, backward);
    // 1% critical value of the two-sample statistic.
    let crit = 1.628 * (2.0 / count as f64).sqrt();
    assert!(d <= crit, "D = {d} > {crit}");
}

#[test]
fn omega_from_backward_and_forward_means() {
    let spec = exp_fl(-1.0);
    let fwd: Vec<f64> =
        forward_orbit(&spec, 0.0, RandomStream::new(7, 0)).unwrap().skip(1000).take(400_000).map(|p| p.z.to_f64()).collect();
    let a = sample_mean(&fwd, 7);
    let b = sample_mean(&backward_samples(&spec, 40_000, BackwardOptions::default(), 8).unwrap(), 8);
    assert!((a.value - b.value).abs() <= 4.0 * a.stderr.hypot(b.stderr), "{a:?} vs {b:?}");
}

#[test]
fn free_stationary_law_is_cauchy() {
    let k = 1.0;
    let mut h = HistogramDensity::uniform(-20.0, 20.0, 80).unwrap();
    // Thinned so successive samples are nearly independent.
    for p in forward_orbit(&free_fl(k * k), 0.0, RandomStream::new(9, 0)).unwrap().skip(100).step_by(10).take(100_000) {
        h.add(p.z.to_f64());
    }
    let exact = HistogramDensity::from_density(cauchy(k), h.edges.clone(), h.n).unwrap();
    let mut obs = h.counts.clone();
    let mut exp = exact.counts.clone();
    obs.extend([h.below, h.above]);
    exp.extend([exact.below, exact.above]);
    let t = chi_square_test(&obs, &exp, 0).unwrap();
    assert!(t.passes(0.01), "{t:?}");
}

#[test]
fn dyson_schmidt_residuals() {
    let edges: Vec<f64> = (0..=400).map(|i| -50.0 + 0.25 * i as f64).collect();
    let exact = HistogramDensity::from_density(cauchy(1.0), edges.clone(), 1.0).unwrap();
    // Monte-Carlo noise in the L¹ distance falls like (bins / points)^½.
    let r = dyson_schmidt_residual(&exact, &free_fl(1.0), 80_000, RandomStream::new(10, 0)).unwrap();
    assert!(r <= 0.01, "Cauchy residual {r}");

    let mut delta = HistogramDensity::with_edges(edges.clone()).unwrap();
    delta.add(1.0);
    let r = dyson_schmidt_residual(&delta, &free_fl(-1.0), 64, RandomStream::new(10, 1)).unwrap();
    // Points spread over one bin move at most one bin towards the fixed point.
    assert!(r <= 0.01 + 2.0 * 0.25, "delta residual {r}");

    let uniform = HistogramDensity::from_density(|z| if z.abs() < 5.0 { 0.1 } else { 0.0 }, edges, 1.0).unwrap();
    let r = dyson_schmidt_residual(&uniform, &free_fl(1.0), 64, RandomStream::new(10, 2)).unwrap();
    assert!(r > 0.2, "uniform residual {r}");
}

#[test]
fn cauchy_rice_and_principal_value() {
    let edges: Vec<f64> = (0..=4000).map(|i| -1000.0 + 0.5 * i as f64).collect();
    let h = HistogramDensity::from_density(cauchy(1.0), edges, 1.0).unwrap();
    assert!(rel(rice_ids(&h).unwrap(), 1.0 / PI) <= 0.05);
    assert!(pv_gamma(&h).unwrap().abs() <= 0.05);
    assert!((h.integral() - (1.0 - h.tail_mass())).abs() <= 1e-12);
}

#[test]
fn sde_small_noise_is_free() {
    let k = 1.0;
    let run = sde_white_noise_run(&SdeOptions::new(k * k, 1e-4, 2000.0), RandomStream::new(11, 0)).unwrap();
    assert!(rel(run.ids.value, k / PI) <= 0.02, "{:?}", run.ids);
}

#[test]
fn sde_below_the_band_matches_halperin() {
    let (e, sigma, length) = (-1.0, 1.0, 1e4);
    let per: Vec<f64> = (0..4)
        .map(|r| sde_white_noise_run(&SdeOptions::new(e, sigma, length), RandomStream::new(12, r)).unwrap())
        .map(|run| run.crossings as f64 / length)
        .collect();
    let (n, _) = mean_stderr(&per);
    let exact = halperin_n_airy(e, sigma).unwrap();
    assert!(rel(n, exact) <= 0.1, "{n} vs {exact}");
}

#[test]
fn deep_tail_saddle() {
    let (e, sigma) = (-4.0, 0.1);
    let ln_n = halperin_n_integral(e, sigma).unwrap().ln();
    let saddle = lifshitz_tail(e, sigma).unwrap();
    assert!(rel(ln_n, saddle) <= 0.15, "{ln_n} vs {saddle}");
}

#[test]
fn reinjection_bias_is_small() {
    let run = |z_max: f64| {
        let mut o = SdeOptions::new(1.0, 0.05, 2e4);
        o.z_max = Some(z_max);
        sde_white_noise_run(&o, RandomStream::new(13, 0)).unwrap().ids.value
    };
    let (a, b) = (run(100.0), run(200.0));
    assert!(rel(a, b) < 0.005, "{a} vs {b}");
}

#[test]
fn passage_times_have_mean_one_over_n() {
    let (e, sigma) = (0.0, 2.0);
    let mut opts = FirstPassageOptions::new(e, sigma, 4000, 20.0);
    opts.replicas = 4;
    let s = first_passage_stats(&opts, 14).unwrap();
    let exact = 1.0 / halperin_n_airy(e, sigma).unwrap();
    assert!(rel(s.mean.value, exact) <= 0.05, "{:?} vs {exact}", s.mean);
    let table = s.count_table();
    assert_eq!(table.iter().sum::<u64>() as usize, s.window_counts.len());
    assert!(s.ecdf(0.0) == 0.0 && s.ecdf(f64::INFINITY) == 1.0);
}
