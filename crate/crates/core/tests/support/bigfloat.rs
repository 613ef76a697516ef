//! Binary fixed-point reals on top of `BigInt`: a value `v` stands for
//! `v / 2^PREC`. Slow, simple and independent of the library's kernels.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const PREC: u32 = 512;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fx(pub BigInt);

impl Fx {
    pub fn zero() -> Fx {
        Fx(BigInt::zero())
    }

    pub fn int(n: i64) -> Fx {
        Fx(BigInt::from(n) << PREC)
    }

    pub fn ratio(p: i64, q: i64) -> Fx {
        Fx::int(p).div_int(q)
    }

    /// Exact conversion; every finite double is a dyadic rational.
    pub fn from_f64(x: f64) -> Fx {
        assert!(x.is_finite());
        if x == 0.0 {
            return Fx::zero();
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let mut mant = (bits & ((1u64 << 52) - 1)) as i64;
        let e = if exp == 0 {
            -1074
        } else {
            mant |= 1 << 52;
            exp - 1075
        };
        let mut v = BigInt::from(mant);
        let shift = e + PREC as i64;
        v = if shift >= 0 { v << shift as u32 } else { v >> (-shift) as u32 };
        Fx(if x < 0.0 { -v } else { v })
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.0.bits() as i64;
        let drop = (bits - 60).max(0);
        let top = (&self.0 >> drop as u32).to_f64().unwrap();
        top * 2f64.powi((drop - PREC as i64) as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Fx {
        Fx(self.0.abs())
    }

    pub fn div(&self, o: &Fx) -> Fx {
        Fx((&self.0 << PREC).div_floor(&o.0))
    }

    pub fn div_int(&self, n: i64) -> Fx {
        Fx(self.0.div_floor(&BigInt::from(n)))
    }

    pub fn mul_int(&self, n: i64) -> Fx {
        Fx(&self.0 * n)
    }

    /// Multiplication by `2^k`.
    pub fn shl(&self, k: i64) -> Fx {
        if k >= 0 {
            Fx(&self.0 << k as u32)
        } else {
            Fx(&self.0 >> (-k) as u32)
        }
    }

    pub fn sqrt(&self) -> Fx {
        assert!(!self.is_negative());
        Fx((&self.0 << PREC).sqrt())
    }

    /// Smallest magnitude worth adding: a few ulps.
    pub fn negligible(&self) -> bool {
        self.0.abs() < BigInt::from(16)
    }

    /// `round(self · 2^k)` for moderate results.
    pub fn floor_int(&self) -> i64 {
        (self.0.div_floor(&(BigInt::one() << PREC))).to_i64().unwrap()
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let neg = self.is_negative();
        let a = self.0.abs();
        // Estimate the decimal exponent from the bit length, then fix it.
        let mut e10 = ((a.bits() as f64 - PREC as f64) * std::f64::consts::LOG10_2).floor() as i64;
        let one = BigInt::one() << PREC;
        let scaled = |e: i64| -> BigInt {
            let want = digits as i64 - 1 - e;
            if want >= 0 {
                (&a * BigInt::from(10u32).pow(want as u32) + (&one >> 1u32)) / &one
            } else {
                let d = &one * BigInt::from(10u32).pow((-want) as u32);
                (&a + (&d >> 1u32)) / d
            }
        };
        let lo = BigInt::from(10u32).pow(digits as u32 - 1);
        let hi = BigInt::from(10u32).pow(digits as u32);
        let mut m = scaled(e10);
        while m >= hi {
            e10 += 1;
            m = scaled(e10);
        }
        while m < lo {
            e10 -= 1;
            m = scaled(e10);
        }
        let s = m.to_string();
        format!("{}{}.{}e{}", if neg { "-" } else { "" }, &s[..1], &s[1..], e10)
    }
}

impl Add for &Fx {
    type Output = Fx;
    fn add(self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }
}

impl Sub for &Fx {
    type Output = Fx;
    fn sub(self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }
}

impl Mul for &Fx {
    type Output = Fx;
    fn mul(self, o: &Fx) -> Fx {
        let p = &self.0 * &o.0;
        Fx(if p.sign() == Sign::Minus { -((-p) >> PREC) } else { p >> PREC })
    }
}

impl Neg for &Fx {
    type Output = Fx;
    fn neg(self) -> Fx {
        Fx(-&self.0)
    }
}

pub fn ln2() -> Fx {
    static V: OnceLock<Fx> = OnceLock::new();
    V.get_or_init(ln2_series).clone()
}

fn ln2_series() -> Fx {
    // Σ 1/(k 2^k)
    let mut s = Fx::zero();
    let mut p = Fx::int(1);
    for k in 1.. {
        p = p.shl(-1);
        let t = p.div_int(k);
        if t.negligible() {
            break;
        }
        s = &s + &t;
    }
    s
}

fn atan_inv(n: i64) -> Fx {
    let mut s = Fx::zero();
    let mut p = Fx::int(1).div_int(n);
    let n2 = n * n;
    for k in 0.. {
        let t = p.div_int(2 * k + 1);
        if t.negligible() {
            break;
        }
        s = if k % 2 == 0 { &s + &t } else { &s - &t };
        p = p.div_int(n2);
    }
    s
}

pub fn pi() -> Fx {
    static V: OnceLock<Fx> = OnceLock::new();
    V.get_or_init(|| &atan_inv(5).mul_int(16) - &atan_inv(239).mul_int(4)).clone()
}

pub fn exp(x: &Fx) -> Fx {
    let l2 = ln2();
    let n = x.div(&l2).floor_int();
    let r = x - &l2.mul_int(n);
    // exp(r) for 0 ≤ r < ln 2, halved eight times for faster convergence.
    let r = r.shl(-8);
    let mut s = Fx::int(1);
    let mut t = Fx::int(1);
    for k in 1.. {
        t = (&t * &r).div_int(k);
        if t.negligible() {
            break;
        }
        s = &s + &t;
    }
    for _ in 0..8 {
        s = &s * &s;
    }
    s.shl(n)
}

pub fn ln(x: &Fx) -> Fx {
    assert!(!x.is_negative() && !x.is_zero(), "ln of a non-positive number");
    // Normalize to m ∈ [1, 2): x = m 2^e.
    let e = x.0.bits() as i64 - 1 - PREC as i64;
    let m = x.shl(-e);
    // ln m = 2 atanh((m−1)/(m+1)).
    let u = (&m - &Fx::int(1)).div(&(&m + &Fx::int(1)));
    let u2 = &u * &u;
    let mut s = Fx::zero();
    let mut p = u.clone();
    for k in 0.. {
        let t = p.div_int(2 * k + 1);
        if t.negligible() {
            break;
        }
        s = &s + &t;
        p = &p * &u2;
    }
    &s.mul_int(2) + &ln2().mul_int(e)
}

pub fn pow(x: &Fx, y: &Fx) -> Fx {
    exp(&(y * &ln(x)))
}

/// Euler's constant by the Brent–McMillan sums with `n = 64`
/// (error of order `e^{−4n}`).
pub fn euler_gamma() -> Fx {
    static V: OnceLock<Fx> = OnceLock::new();
    V.get_or_init(brent_mcmillan).clone()
}

fn brent_mcmillan() -> Fx {
    let n = 64i64;
    let ln_n = ln(&Fx::int(n));
    let (mut a, mut b) = (Fx::zero(), Fx::zero());
    let mut term = Fx::int(1); // (n^k / k!)²
    let mut h = Fx::zero();
    for k in 0.. {
        if k > 0 {
            term = term.mul_int(n * n).div_int(k * k);
            h = &h + &Fx::int(1).div_int(k);
        }
        if k > 4 * n && term.negligible() {
            break;
        }
        a = &a + &(&term * &(&h - &ln_n));
        b = &b + &term;
    }
    a.div(&b)
}
