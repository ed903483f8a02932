//! Dense 2x2 complex matrices and 2-component spinors.
//!
//! These are the only linear-algebra objects the model needs: the gamma
//! matrices, the Omega matrix, coupling matrices of the first-order spinor
//! equations, and the spinor values themselves.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex2x2 {
    pub m00: Complex64,
    pub m01: Complex64,
    pub m10: Complex64,
    pub m11: Complex64,
}

impl Complex2x2 {
    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Self { m00, m01, m10, m11 }
    }

    /// Matrix with real entries.
    pub fn from_real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Self::new(
            Complex64::new(m00, 0.0),
            Complex64::new(m01, 0.0),
            Complex64::new(m10, 0.0),
            Complex64::new(m11, 0.0),
        )
    }

    pub fn zero() -> Self {
        Self::from_real(0.0, 0.0, 0.0, 0.0)
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    /// Scalar multiple of the identity.
    pub fn scalar(s: Complex64) -> Self {
        Self::new(s, Complex64::ZERO, Complex64::ZERO, s)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.m00 * s, self.m01 * s, self.m10 * s, self.m11 * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Anticommutator {A, B} = AB + BA.
    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Commutator [A, B] = AB - BA.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn det(&self) -> Complex64 {
        self.m00 * self.m11 - self.m01 * self.m10
    }

    pub fn trace(&self) -> Complex64 {
        self.m00 + self.m11
    }

    /// Maximum absolute value over the four entries.
    pub fn max_abs(&self) -> f64 {
        self.m00
            .norm()
            .max(self.m01.norm())
            .max(self.m10.norm())
            .max(self.m11.norm())
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        [self.m00, self.m01, self.m10, self.m11]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &Spinor2) -> Spinor2 {
        Spinor2 {
            up: self.m00 * v.up + self.m01 * v.dn,
            dn: self.m10 * v.up + self.m11 * v.dn,
        }
    }
}

impl Add for Complex2x2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.m00 + rhs.m00,
            self.m01 + rhs.m01,
            self.m10 + rhs.m10,
            self.m11 + rhs.m11,
        )
    }
}

impl Sub for Complex2x2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.m00 - rhs.m00,
            self.m01 - rhs.m01,
            self.m10 - rhs.m10,
            self.m11 - rhs.m11,
        )
    }
}

impl Mul for Complex2x2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.m00 * rhs.m00 + self.m01 * rhs.m10,
            self.m00 * rhs.m01 + self.m01 * rhs.m11,
            self.m10 * rhs.m00 + self.m11 * rhs.m10,
            self.m10 * rhs.m01 + self.m11 * rhs.m11,
        )
    }
}

impl Neg for Complex2x2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

/// Two-component complex spinor value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor2 {
    pub up: Complex64,
    pub dn: Complex64,
}

impl Spinor2 {
    pub const fn new(up: Complex64, dn: Complex64) -> Self {
        Self { up, dn }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::ZERO, Complex64::ZERO)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.up * s, self.dn * s)
    }

    /// |up|^2 + |dn|^2.
    pub fn norm_sq(&self) -> f64 {
        self.up.norm_sqr() + self.dn.norm_sqr()
    }

    /// Maximum of |up|, |dn|.
    pub fn max_abs(&self) -> f64 {
        self.up.norm().max(self.dn.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.up.re.is_finite()
            && self.up.im.is_finite()
            && self.dn.re.is_finite()
            && self.dn.im.is_finite()
    }
}

impl Add for Spinor2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.up + rhs.up, self.dn + rhs.dn)
    }
}

impl Sub for Spinor2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.up - rhs.up, self.dn - rhs.dn)
    }
}
