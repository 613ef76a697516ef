use super::EvalResult;
use crate::error::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Stirling correction `ln Γ(x) - [(x - 1/2) ln x - x + ln √(2π)]`, `x >= 15`.
fn stirling_tail(x: f64) -> f64 {
    // B_2k / (2k (2k-1)) for k = 1..7
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
    ];
    let r = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * r + c;
    }
    acc / x
}

fn lanczos_ln(x: f64) -> f64 {
    // Valid for x >= 0.5.
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// `ln |Γ(x)|` for real `x` that is not a non-positive integer.
pub fn ln_gamma(x: f64) -> Result<EvalResult> {
    if !x.is_finite() || (x <= 0.0 && x == x.floor()) {
        return Err(Error::Domain(format!("ln_gamma pole or non-finite argument {x}")));
    }
    let value = if x < 0.5 {
        (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x)?.value
    } else if x >= 15.0 {
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + stirling_tail(x)
    } else {
        lanczos_ln(x)
    };
    Ok(EvalResult { value, abs_error_bound: 4.0 * f64::EPSILON * value.abs().max(1.0) })
}

/// Γ(x) for `x` not a non-positive integer.
pub fn gamma(x: f64) -> Result<f64> {
    let lg = ln_gamma(x)?.value;
    let sign = if x > 0.0 || (x.floor() as i64) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * lg.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_and_half() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            let g = gamma(n as f64).unwrap();
            assert!((g / fact - 1.0).abs() < 1e-13, "n={n}");
            fact *= n as f64;
        }
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn branches_agree() {
        for &x in &[14.999, 15.0, 15.001] {
            let l = lanczos_ln(x);
            let s = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + stirling_tail(x);
            assert!((l - s).abs() < 1e-13 * s.abs());
        }
    }
}
