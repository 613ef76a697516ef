use disorder_rmt::ensembles::{Distribution, EnsembleSpec};
use disorder_rmt::ising::{free_energy_density, partition_function, top_eigenvalue, transfer_matrix, Boundary};
use disorder_rmt::lyapunov::{gamma_norm_growth_replicated, NormGrowthOptions};
use proptest::prelude::*;

/// Sum of `exp(−βH)` over all `2ⁿ` configurations.
fn brute_force(h: &[f64], beta: f64, coupling: f64, boundary: Boundary) -> f64 {
    let n = h.len();
    let mut z = 0.0;
    for bits in 0u32..(1 << n) {
        let s = |j: usize| if bits >> j & 1 == 1 { 1.0 } else { -1.0 };
        let mut minus_h = 0.0;
        for j in 0..n {
            minus_h += h[j] * s(j);
            if j > 0 {
                minus_h += coupling * s(j) * s(j - 1);
            } else if boundary == Boundary::Periodic {
                minus_h += coupling * s(0) * s(n - 1);
            }
        }
        z += (beta * minus_h).exp();
    }
    z
}

#[test]
fn single_free_spin() {
    let z = partition_function(&[0.0], 1.0, 0.0, Boundary::Periodic).unwrap();
    assert_eq!(z.value(), 2.0);
    assert_eq!(transfer_matrix(0.0, 1.0, 0.0).trace(), 2.0);
}

#[test]
fn zero_field_eigenvalue() {
    for (beta, j) in [(0.5, 1.0), (1.0, -0.7), (2.0, 0.3)] {
        assert!((top_eigenvalue(0.0, beta, j) - 2.0 * (beta * j).cosh()).abs() <= 1e-14);
        let z = partition_function(&vec![0.0; 10_000], beta, j, Boundary::Periodic).unwrap();
        assert!((z.ln() / 10_000.0 - (2.0 * (beta * j).cosh()).ln()).abs() <= 1e-8);
    }
}

#[test]
fn uniform_field_growth() {
    for (h, beta, j) in [(0.4, 0.9, 1.1), (-1.3, 0.5, -0.6), (2.0, 1.5, 0.2)] {
        let n = 10_000;
        let z = partition_function(&vec![h; n], beta, j, Boundary::Periodic).unwrap();
        assert!((z.ln() / n as f64 - top_eigenvalue(h, beta, j).ln()).abs() <= 1e-8);
    }
}

#[test]
fn long_chains_do_not_overflow() {
    let z = partition_function(&vec![3.0; 100_000], 2.0, 1.0, Boundary::Open).unwrap();
    assert!(z.ln().is_finite() && z.ln() > 1e5);
    assert_eq!(z.value(), f64::INFINITY);
}

#[test]
fn free_energy_is_the_lyapunov_exponent() {
    let beta = 0.8;
    let spec = EnsembleSpec::IsingChain { beta, coupling: 1.0, field: Distribution::Normal { mean: 0.0, std: 1.0 } };
    let n = 100_000;
    let f = free_energy_density(&spec, n, 16, 1).unwrap();
    let g = gamma_norm_growth_replicated(&spec, &NormGrowthOptions::new(n as u64), 2, 16).unwrap();
    let joint = f.stderr.hypot(g.stderr / beta);
    assert!((f.free_energy_density + g.value / beta).abs() <= 4.0 * joint, "{f:?} vs {g:?}");
}

#[test]
fn free_energy_self_averages() {
    let spec = EnsembleSpec::IsingChain {
        beta: 1.0,
        coupling: 0.5,
        field: Distribution::Discrete { values: vec![-1.0, 1.0], weights: vec![1.0, 1.0] },
    };
    let a = free_energy_density(&spec, 2000, 400, 3).unwrap();
    let b = free_energy_density(&spec, 8000, 400, 3).unwrap();
    // Quadrupling n halves the spread.
    let ratio = a.spread / b.spread;
    assert!((ratio - 2.0).abs() <= 0.3, "{ratio}");
}

#[test]
fn invalid_requests() {
    let spec = EnsembleSpec::IsingChain { beta: 1.0, coupling: 1.0, field: Distribution::Constant { value: 0.0 } };
    assert!(free_energy_density(&spec, 10, 4, 0).unwrap_err().is_validation());
    assert!(partition_function(&[], 1.0, 1.0, Boundary::Periodic).unwrap_err().is_validation());
    assert!(partition_function(&[f64::NAN], 1.0, 1.0, Boundary::Open).unwrap_err().is_validation());
}

proptest! {
    #[test]
    fn matches_enumeration(
        h in prop::collection::vec(-2.0f64..2.0, 1..=12),
        beta in 0.1f64..2.0,
        coupling in -1.5f64..1.5,
        open in any::<bool>(),
    ) {
        let boundary = if open { Boundary::Open } else { Boundary::Periodic };
        let exact = brute_force(&h, beta, coupling, boundary);
        let z = partition_function(&h, beta, coupling, boundary).unwrap();
        prop_assert!((z.value() - exact).abs() <= 1e-10 * exact, "{} vs {}", z.value(), exact);
    }

    #[test]
    fn uncoupled_chain_factorizes(h in prop::collection::vec(-3.0f64..3.0, 1..200), beta in 0.1f64..2.0) {
        let exact: f64 = h.iter().map(|x| (2.0 * (beta * x).cosh()).ln()).sum();
        let z = partition_function(&h, beta, 0.0, Boundary::Periodic).unwrap();
        prop_assert!((z.ln() - exact).abs() <= 1e-10 * exact.abs().max(1.0));
    }

    #[test]
    fn transfer_entries_are_positive(h in -50.0f64..50.0, beta in 0.01f64..5.0, coupling in -5.0f64..5.0) {
        let m = transfer_matrix(h, beta, coupling);
        prop_assert!(m.a > 0.0 && m.b > 0.0 && m.c > 0.0 && m.d > 0.0);
    }
}
