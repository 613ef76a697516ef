use super::dd::Dd;
use super::EvalResult;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Ai(0) and -Ai'(0) as double-double constants.
const AI0: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
const MINUS_AIP0: Dd = Dd::new(0.2588194037928068, -2.522243111610832e-17);

/// Below this |x| the Maclaurin series is summed in double-double; above it
/// the asymptotic expansions are used. Both agree to ~1e-13 at the switch.
pub const SERIES_LIMIT: f64 = 8.0;
pub const DOMAIN_LIMIT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues {
    pub ai: EvalResult,
    pub ai_prime: EvalResult,
    pub bi: EvalResult,
    pub bi_prime: EvalResult,
}

/// Ai, Ai', Bi, Bi' at real `x` with `|x| <= 50`.
pub fn airy(x: f64) -> Result<AiryValues> {
    if !x.is_finite() || x.abs() > DOMAIN_LIMIT {
        return Err(Error::Domain(format!("airy argument {x} outside [-50, 50]")));
    }
    if x.abs() <= SERIES_LIMIT {
        Ok(maclaurin(x))
    } else if x > 0.0 {
        Ok(asymptotic_positive(x))
    } else {
        Ok(asymptotic_negative(-x))
    }
}

fn maclaurin(x: f64) -> AiryValues {
    let xd = Dd::from_f64(x);
    let x3 = xd * xd * xd;
    let mut t = Dd::ONE; // f terms
    let mut s = xd; // g terms
    let mut p = (xd * xd).mul_f64(0.5); // f' terms, from k = 1
    let mut q = Dd::ONE; // g' terms
    let (mut f, mut g, mut fp, mut gp) = (t, s, p, q);
    let mut mag = 1.0 + x.abs() + 0.5 * x * x;
    for k in 1..400 {
        let kf = k as f64;
        t = (t * x3).div_f64((3.0 * kf - 1.0) * (3.0 * kf));
        s = (s * x3).div_f64((3.0 * kf) * (3.0 * kf + 1.0));
        q = (q * x3).div_f64((3.0 * kf) * (3.0 * kf - 2.0));
        if k >= 2 {
            p = (p * x3).div_f64((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            fp = fp + p;
        }
        f = f + t;
        g = g + s;
        gp = gp + q;
        let m = t.hi.abs() + s.hi.abs() + p.hi.abs() + q.hi.abs();
        mag += m;
        if m < 1e-34 * mag && k > 3 {
            break;
        }
    }
    let ai = AI0 * f - MINUS_AIP0 * g;
    let bi = Dd::SQRT3 * (AI0 * f + MINUS_AIP0 * g);
    let aip = AI0 * fp - MINUS_AIP0 * gp;
    let bip = Dd::SQRT3 * (AI0 * fp + MINUS_AIP0 * gp);
    let cancel = 1e-31 * mag;
    let r = |v: Dd| {
        let v = v.to_f64();
        EvalResult { value: v, abs_error_bound: cancel + 2.0 * f64::EPSILON * v.abs() }
    };
    AiryValues { ai: r(ai), ai_prime: r(aip), bi: r(bi), bi_prime: r(bip) }
}

/// Coefficients u_k, v_k of the large-argument expansions, up to where the
/// terms at `zeta` stop decreasing.
fn coefficients(zeta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk;
        let term = uk.abs().max(vk.abs()) / zeta.powi(k as i32);
        if term > prev || term < 1e-18 {
            break;
        }
        prev = term;
        u.push(uk);
        v.push(vk);
    }
    (u, v)
}

fn asymptotic_positive(x: f64) -> AiryValues {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (u, v) = coefficients(zeta);
    let (mut su_alt, mut su, mut sv_alt, mut sv) = (0.0, 0.0, 0.0, 0.0);
    let mut zk = 1.0;
    for k in 0..u.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        su_alt += sign * u[k] * zk;
        su += u[k] * zk;
        sv_alt += sign * v[k] * zk;
        sv += v[k] * zk;
        zk /= zeta;
    }
    let tail = u.last().unwrap().abs().max(v.last().unwrap().abs()) * zk * zeta;
    let x4 = x.powf(0.25);
    let sp = PI.sqrt();
    let e = (-zeta).exp();
    let ai = e / (2.0 * sp * x4) * su_alt;
    let aip = -x4 * e / (2.0 * sp) * sv_alt;
    let bi = 1.0 / (e * sp * x4) * su;
    let bip = x4 / (e * sp) * sv;
    let r = |v: f64| EvalResult { value: v, abs_error_bound: v.abs() * (tail + 8.0 * f64::EPSILON * (1.0 + zeta)) };
    AiryValues { ai: r(ai), ai_prime: r(aip), bi: r(bi), bi_prime: r(bip) }
}

fn asymptotic_negative(y: f64) -> AiryValues {
    let zeta = 2.0 / 3.0 * y * y.sqrt();
    let (u, v) = coefficients(zeta);
    // Even and odd parts, each with alternating signs.
    let (mut ue, mut uo, mut ve, mut vo) = (0.0, 0.0, 0.0, 0.0);
    let mut zk = 1.0;
    for k in 0..u.len() {
        let j = k / 2;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            ue += sign * u[k] * zk;
            ve += sign * v[k] * zk;
        } else {
            uo += sign * u[k] * zk;
            vo += sign * v[k] * zk;
        }
        zk /= zeta;
    }
    let tail = u.last().unwrap().abs().max(v.last().unwrap().abs()) * zk * zeta;
    let (s, c) = (zeta - PI / 4.0).sin_cos();
    let y4 = y.powf(0.25);
    let sp = PI.sqrt();
    let ai = (c * ue + s * uo) / (sp * y4);
    let bi = (-s * ue + c * uo) / (sp * y4);
    let aip = y4 / sp * (s * ve - c * vo);
    let bip = y4 / sp * (c * ve + s * vo);
    // Errors scale with the modulus, not with the (possibly vanishing) value.
    let phase_err = 4.0 * f64::EPSILON * zeta;
    let m = 1.0 / (sp * y4);
    let mp = y4 / sp;
    let eb = |scale: f64| scale * (tail + phase_err + 4.0 * f64::EPSILON);
    AiryValues {
        ai: EvalResult { value: ai, abs_error_bound: eb(m) },
        ai_prime: EvalResult { value: aip, abs_error_bound: eb(mp) },
        bi: EvalResult { value: bi, abs_error_bound: eb(m) },
        bi_prime: EvalResult { value: bip, abs_error_bound: eb(mp) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        let a = airy(0.0).unwrap();
        assert!((a.ai.value - 0.3550280538878172).abs() < 1e-16);
        assert!((a.ai_prime.value + 0.2588194037928068).abs() < 1e-16);
        assert!((a.bi.value - 0.6149266274460007).abs() < 1e-15);
        assert!((a.bi_prime.value - 0.4482883573538264).abs() < 1e-15);
    }

    #[test]
    fn branches_agree_at_switch() {
        for &x in &[SERIES_LIMIT, -SERIES_LIMIT] {
            let s = maclaurin(x);
            let a = if x > 0.0 { asymptotic_positive(x) } else { asymptotic_negative(-x) };
            let m = if x > 0.0 { 1.0 } else { 0.0 };
            for (p, q) in [(s.ai, a.ai), (s.bi, a.bi), (s.ai_prime, a.ai_prime), (s.bi_prime, a.bi_prime)] {
                let scale = if m == 1.0 { p.value.abs() } else { 1.0 };
                assert!((p.value - q.value).abs() <= 1e-11 * scale.max(1e-300), "{x}: {} vs {}", p.value, q.value);
            }
        }
    }

    #[test]
    fn out_of_domain() {
        assert!(airy(50.5).is_err());
        assert!(airy(-51.0).is_err());
        assert!(airy(f64::NAN).is_err());
    }
}
