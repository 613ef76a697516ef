//! Real 2x2 matrices, their projective (Möbius) action and the hyperbolic
//! half-plane.
//!
//! Points of the projective line are carried as slopes `z = x1/x2` of a vector
//! `(x1, x2)`, with `Slope::Infinity` for `x2 = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::Mul;

use crate::error::{Error, Result};

/// Entries with magnitude above this are reported as overflow by [`compose`].
pub const OVERFLOW_BOUND: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Matrix2 { a, b, c, d }
    }

    pub fn diag(p: f64, q: f64) -> Self {
        Matrix2::new(p, 0.0, 0.0, q)
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn frobenius_sq(&self) -> f64 {
        frobenius_sq(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    pub fn scale(&self, s: f64) -> Self {
        Matrix2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn transpose(&self) -> Self {
        Matrix2::new(self.a, self.c, self.b, self.d)
    }

    /// Adjugate; equals the inverse when `det = 1` and induces the inverse
    /// Möbius map for any nonzero determinant.
    pub fn adjugate(&self) -> Self {
        Matrix2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Domain("singular matrix".into()));
        }
        Ok(self.adjugate().scale(1.0 / det))
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Rescales so the largest entry has magnitude one; returns the log of the
    /// factor removed. Projective actions are unchanged.
    pub fn normalize(&mut self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 || !m.is_finite() {
            return 0.0;
        }
        *self = self.scale(1.0 / m);
        m.ln()
    }

    pub fn mobius(&self, z: Slope) -> Slope {
        mobius_apply(self, z)
    }

    pub fn mobius_complex(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, r: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

/// Matrix product `a * b`, flagging entries beyond [`OVERFLOW_BOUND`].
pub fn compose(a: &Matrix2, b: &Matrix2) -> Result<Matrix2> {
    let p = *a * *b;
    if !p.is_finite() || p.max_abs() > OVERFLOW_BOUND {
        return Err(Error::Overflow);
    }
    Ok(p)
}

pub fn frobenius_sq(m: &Matrix2) -> f64 {
    m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d
}

/// A point of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Slope {
    Finite(f64),
    Infinity,
}

impl Slope {
    pub fn from_vector(v: [f64; 2]) -> Slope {
        if v[1] == 0.0 {
            Slope::Infinity
        } else {
            Slope::Finite(v[0] / v[1])
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Slope::Finite(z) => Some(z),
            Slope::Infinity => None,
        }
    }

    /// Maps infinity to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// `(a z + b) / (c z + d)` on the extended real line, with `A(∞) = a/c`.
pub fn mobius_apply(m: &Matrix2, z: Slope) -> Slope {
    match z {
        Slope::Finite(z) => {
            let den = m.c * z + m.d;
            if den == 0.0 {
                Slope::Infinity
            } else {
                Slope::Finite((m.a * z + m.b) / den)
            }
        }
        Slope::Infinity => {
            if m.c == 0.0 {
                Slope::Infinity
            } else {
                Slope::Finite(m.a / m.c)
            }
        }
    }
}

/// A line through the origin, stored as a unit vector whose first nonzero
/// component is positive. Infinity is `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    u: [f64; 2],
}

impl ProjectivePoint {
    pub const INFINITY: ProjectivePoint = ProjectivePoint { u: [1.0, 0.0] };

    pub fn from_vector(v: [f64; 2]) -> Result<Self> {
        let n = v[0].hypot(v[1]);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Invalid("zero or non-finite vector".into()));
        }
        let mut u = [v[0] / n, v[1] / n];
        if u[0] < 0.0 || (u[0] == 0.0 && u[1] < 0.0) {
            u = [-u[0], -u[1]];
        }
        Ok(ProjectivePoint { u })
    }

    pub fn from_slope(z: Slope) -> Self {
        match z {
            Slope::Infinity => Self::INFINITY,
            Slope::Finite(z) => Self::from_vector([z, 1.0]).unwrap_or(Self::INFINITY),
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::from_vector([theta.cos(), theta.sin()]).unwrap_or(Self::INFINITY)
    }

    pub fn vector(&self) -> [f64; 2] {
        self.u
    }

    pub fn slope(&self) -> Slope {
        Slope::from_vector(self.u)
    }

    /// Returns `A·u` as a projective point together with `ln |A u|`.
    pub fn act(&self, m: &Matrix2) -> (Self, f64) {
        let v = m.apply(self.u);
        let n = v[0].hypot(v[1]);
        (Self::from_vector(v).unwrap_or(*self), n.ln())
    }

    /// Angle between the two lines, in `[0, π/2]`.
    pub fn angular_distance(&self, other: &Self) -> f64 {
        let cross = (self.u[0] * other.u[1] - self.u[1] * other.u[0]).abs();
        let dot = (self.u[0] * other.u[0] + self.u[1] * other.u[1]).abs();
        cross.atan2(dot)
    }
}

/// A point `x + i y` of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Invalid(format!("not in the upper half-plane: {x} + {y}i")));
        }
        Ok(HalfPlanePoint { x, y })
    }

    pub fn i() -> Self {
        HalfPlanePoint { x: 0.0, y: 1.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// Image under a matrix with positive determinant.
    pub fn act(&self, m: &Matrix2) -> Result<Self> {
        if !(m.det() > 0.0) {
            return Err(Error::Domain("Möbius map does not preserve the half-plane".into()));
        }
        let w = m.mobius_complex(self.to_complex());
        HalfPlanePoint::new(w.re, w.im)
    }
}

/// `ch ρ = ((x0-x1)^2 + y0^2 + y1^2) / (2 y0 y1)`, clamped below at 1.
pub fn cosh_distance(p: &HalfPlanePoint, q: &HalfPlanePoint) -> f64 {
    let dx = p.x - q.x;
    ((dx * dx + p.y * p.y + q.y * q.y) / (2.0 * p.y * q.y)).max(1.0)
}

/// Poincaré distance. Evaluated as `2 asinh(|p - q| / (2 sqrt(y0 y1)))`,
/// which equals `acosh` of [`cosh_distance`] without cancellation near the
/// diagonal.
pub fn hyperbolic_distance(p: &HalfPlanePoint, q: &HalfPlanePoint) -> f64 {
    let chord = (p.x - q.x).hypot(p.y - q.y);
    2.0 * (chord / (2.0 * (p.y * q.y).sqrt())).asinh()
}
