//! Convergent-series evaluations in fixed point, used to freeze the
//! golden special-function values. Parameters of the Kummer function are
//! restricted to integers and half-integers, where ψ has closed forms.

use num_bigint::BigInt;
use num_integer::Integer;

use super::bigfloat::{euler_gamma, exp, ln, ln2, pi, pow, Fx, PREC};

/// `Γ(z)` from `Γ(z) ≈ X^z e^{−X} Σ_k X^k / (z)_{k+1}` with `X = 200`,
/// after shifting `z` into `(0, 20]`.
pub fn gamma(z: &Fx) -> Fx {
    let twenty = Fx::int(20);
    if z > &twenty {
        let zm1 = z - &Fx::int(1);
        return &zm1 * &gamma(&zm1);
    }
    if !(z > &Fx::zero()) {
        assert!(!z.0.is_multiple_of(&(BigInt::from(1) << PREC)), "pole of Γ");
        return gamma(&(z + &Fx::int(1))).div(z);
    }
    let x = Fx::int(200);
    let mut t = Fx::int(1).div(z);
    let mut s = t.clone();
    let mut k = 1i64;
    loop {
        t = (&t * &x).div(&(z + &Fx::int(k)));
        if k > 200 && t.negligible() {
            break;
        }
        s = &s + &t;
        k += 1;
    }
    &(&pow(&x, z) * &exp(&-&x)) * &s
}

pub fn ln_gamma(z: f64) -> Fx {
    ln(&gamma(&Fx::from_f64(z)))
}

/// `ψ` at a positive integer or half-integer `2·half/2`.
fn digamma_half(half: i64) -> Fx {
    assert!(half > 0);
    let g = euler_gamma();
    if half % 2 == 0 {
        let n = half / 2;
        let mut s = -&g;
        for j in 1..n {
            s = &s + &Fx::int(1).div_int(j);
        }
        s
    } else {
        let n = (half - 1) / 2;
        let mut s = &(-&g) - &ln2().mul_int(2);
        for j in 1..=n {
            s = &s + &Fx::int(2).div_int(2 * j - 1);
        }
        s
    }
}

pub struct AiryFx {
    pub ai: Fx,
    pub bi: Fx,
    pub aip: Fx,
    pub bip: Fx,
}

/// Maclaurin series `Ai = c₁f − c₂g`, `Bi = √3 (c₁f + c₂g)`.
pub fn airy(x: f64) -> AiryFx {
    let x = Fx::from_f64(x);
    let x3 = &(&x * &x) * &x;
    let (mut f, mut fp, mut g, mut gp) = (Fx::int(1), Fx::zero(), x.clone(), Fx::int(1));
    // a_k x^{3k} and b_k x^{3k+1}, with x^{3k−1} and x^{3k} for the derivatives.
    let (mut tf, mut tg) = (Fx::int(1), x.clone());
    let (mut df, mut dg) = (Fx::int(1), Fx::int(1));
    let mut k = 1i64;
    loop {
        tf = (&tf * &x3).div_int((3 * k - 1) * 3 * k);
        tg = (&tg * &x3).div_int(3 * k * (3 * k + 1));
        // df = a_k x^{3k−1}, dg = b_k x^{3k}.
        df = if k == 1 { (&x * &x).div_int(6) } else { (&df * &x3).div_int((3 * k - 1) * 3 * k) };
        dg = (&dg * &x3).div_int(3 * k * (3 * k + 1));
        if k > 4 && tf.negligible() && tg.negligible() && df.negligible() && dg.negligible() {
            break;
        }
        f = &f + &tf;
        g = &g + &tg;
        fp = &fp + &df.mul_int(3 * k);
        gp = &gp + &dg.mul_int(3 * k + 1);
        k += 1;
    }
    let three = Fx::int(3);
    let c1 = pow(&three, &Fx::ratio(-2, 3)).div(&gamma(&Fx::ratio(2, 3)));
    let c2 = pow(&three, &Fx::ratio(-1, 3)).div(&gamma(&Fx::ratio(1, 3)));
    let s3 = three.sqrt();
    let (c1f, c2g, c1fp, c2gp) = (&c1 * &f, &c2 * &g, &c1 * &fp, &c2 * &gp);
    AiryFx {
        ai: &c1f - &c2g,
        bi: &s3 * &(&c1f + &c2g),
        aip: &c1fp - &c2gp,
        bip: &s3 * &(&c1fp + &c2gp),
    }
}

/// `Σ_k s^k (x/2)^{2k+ν} / (k! (k+ν)!)` for `ν ∈ {0, 1}` with sign `s = ±1`,
/// and the companion sum weighted by `ψ(k+1) + ψ(k+ν+1)`.
fn bessel_sums(x: &Fx, nu: i64, alternating: bool) -> (Fx, Fx) {
    let h = x.shl(-1);
    let q = &h * &h;
    let g = euler_gamma();
    let mut t = if nu == 0 { Fx::int(1) } else { h.clone() };
    let mut psi1 = -&g; // ψ(k+1)
    let mut psi2 = if nu == 0 { -&g } else { &Fx::int(1) - &g }; // ψ(k+ν+1)
    let (mut plain, mut weighted) = (Fx::zero(), Fx::zero());
    let mut k = 0i64;
    loop {
        if k > 0 {
            t = (&t * &q).div_int(k * (k + nu));
            if alternating {
                t = -&t;
            }
            psi1 = &psi1 + &Fx::int(1).div_int(k);
            psi2 = &psi2 + &Fx::int(1).div_int(k + nu);
        }
        if k > 4 && t.negligible() {
            break;
        }
        plain = &plain + &t;
        weighted = &weighted + &(&t * &(&psi1 + &psi2));
        k += 1;
    }
    (plain, weighted)
}

pub fn bessel_j1_y1(x: f64) -> (Fx, Fx) {
    let x = Fx::from_f64(x);
    let (j1, w) = bessel_sums(&x, 1, true);
    let p = pi();
    let lnh = ln(&x.shl(-1));
    // Y₁ = −2/(πx) + (2/π) ln(x/2) J₁ − (1/π) Σ (−1)^k (ψ(k+1)+ψ(k+2)) (x/2)^{2k+1}/(k!(k+1)!)
    let y1 = &(&(-&Fx::int(2).div(&(&p * &x))) + &(&lnh * &j1).mul_int(2).div(&p)) - &w.div(&p);
    (j1, y1)
}

pub fn bessel_k0_k1(x: f64) -> (Fx, Fx) {
    let x = Fx::from_f64(x);
    let lnh = ln(&x.shl(-1));
    let (i0, w0) = bessel_sums(&x, 0, false);
    let (i1, w1) = bessel_sums(&x, 1, false);
    // K₀ = −ln(x/2) I₀ + ½ Σ 2ψ(k+1) (x²/4)^k/(k!)²; w0 carries the factor 2.
    let k0 = &(-&(&lnh * &i0)) + &w0.shl(-1);
    // K₁ = 1/x + ln(x/2) I₁ − ½ Σ (ψ(k+1)+ψ(k+2)) (x/2)^{2k+1}/(k!(k+1)!)
    let k1 = &(&Fx::int(1).div(&x) + &(&lnh * &i1)) - &w1.shl(-1);
    (k0, k1)
}

/// `M(a, b, z) = Σ (a)_k/(b)_k z^k/k!`.
fn kummer_m(a: &Fx, b: &Fx, z: &Fx) -> Fx {
    let mut t = Fx::int(1);
    let mut s = t.clone();
    let mut k = 0i64;
    loop {
        let kf = Fx::int(k);
        t = (&(&t * &(a + &kf)) * z).div(&(b + &kf)).div_int(k + 1);
        if k > 4 && t.negligible() {
            break;
        }
        s = &s + &t;
        k += 1;
    }
    s
}

fn rgamma_half(half: i64) -> Fx {
    // 1/Γ(half/2), zero at the poles.
    if half <= 0 && half % 2 == 0 {
        Fx::zero()
    } else {
        Fx::int(1).div(&gamma(&Fx::ratio(half, 2)))
    }
}

/// `U(a, b, z)` for `a = a2/2 > 0` and `b = b2/2`, both integers or
/// half-integers.
pub fn kummer_u(a2: i64, b2: i64, z: f64) -> Fx {
    assert!(a2 > 0);
    let zf = Fx::from_f64(z);
    let a = Fx::ratio(a2, 2);
    if b2 % 2 != 0 {
        // U = Γ(1−b)/Γ(a−b+1) M(a,b,z) + Γ(b−1)/Γ(a) z^{1−b} M(a−b+1, 2−b, z)
        let b = Fx::ratio(b2, 2);
        let one = Fx::int(1);
        let t1 = &(&gamma(&(&one - &b)) * &rgamma_half(a2 - b2 + 2)) * &kummer_m(&a, &b, &zf);
        let t2 = &(&(&gamma(&(&b - &one)) * &rgamma_half(a2)) * &pow(&zf, &(&one - &b)))
            * &kummer_m(&(&(&a - &b) + &one), &(&Fx::int(2) - &b), &zf);
        return &t1 + &t2;
    }
    let n = b2 / 2 - 1;
    assert!(n >= 0, "integer b must be positive");
    let lnz = ln(&zf);
    // First sum, weighted by 1/Γ(a−n).
    let rg = rgamma_half(a2 - 2 * n);
    let mut first = Fx::zero();
    if !rg.is_zero() {
        let mut psi_a = digamma_half(a2);
        let mut psi_1 = digamma_half(2);
        let mut psi_n = digamma_half(2 * n + 2);
        let mut t = Fx::int(1);
        let mut k = 0i64;
        loop {
            if k > 0 {
                let kf = Fx::int(k - 1);
                t = (&(&t * &(&a + &kf)) * &zf).div_int((n + k) * k);
                psi_a = &psi_a + &Fx::int(1).div(&(&a + &kf));
                psi_1 = &psi_1 + &Fx::int(1).div_int(k);
                psi_n = &psi_n + &Fx::int(1).div_int(n + k);
            }
            if k > 4 && t.negligible() {
                break;
            }
            first = &first + &(&t * &(&(&(&lnz + &psi_a) - &psi_1) - &psi_n));
            k += 1;
        }
        let mut nfact = 1i64;
        for j in 1..=n {
            nfact *= j;
        }
        first = (&first * &rg).div_int(nfact);
        if n % 2 == 0 {
            first = -&first;
        }
    }
    // Second sum: (1/Γ(a)) Σ_{k=1}^{n} (k−1)! (1−a+k)_{n−k} / (n−k)! z^{−k}
    let mut second = Fx::zero();
    for k in 1..=n {
        let mut t = Fx::int(1);
        for j in 1..k {
            t = t.mul_int(j);
        }
        for j in 0..(n - k) {
            t = &t * &(&(&Fx::int(1 + k + j) - &a));
        }
        for j in 1..=(n - k) {
            t = t.div_int(j);
        }
        t = t.div(&pow(&zf, &Fx::int(k)));
        second = &second + &t;
    }
    &first + &(&second * &rgamma_half(a2))
}

/// `e^x E₁(x)` from `E₁ = −γ − ln x − Σ_{k≥1} (−x)^k/(k·k!)`.
pub fn exp_e1(x: f64) -> Fx {
    let xf = Fx::from_f64(x);
    let mut s = Fx::zero();
    let mut p = Fx::int(1);
    let mut k = 1i64;
    loop {
        p = (&(-&p) * &xf).div_int(k);
        let t = p.div_int(k);
        if k > 4 && t.negligible() {
            break;
        }
        s = &s + &t;
        k += 1;
    }
    let e1 = &(&(-&euler_gamma()) - &ln(&xf)) - &s;
    &exp(&xf) * &e1
}

/// `W_{κ,μ}(x) = e^{−x/2} x^{μ+1/2} U(μ−κ+1/2, 1+2μ, x)` with `κ = k2/2`,
/// `μ = m2/2`.
pub fn whittaker_w(k2: i64, m2: i64, x: f64) -> Fx {
    let xf = Fx::from_f64(x);
    let u = kummer_u(m2 - k2 + 1, 2 + 2 * m2, x);
    &(&exp(&-&xf.shl(-1)) * &pow(&xf, &Fx::ratio(m2 + 1, 2))) * &u
}
