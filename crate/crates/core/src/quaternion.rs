//! Real quaternions, unit imaginary directions and slice coordinates.
//!
//! Scalar-first convention: `q = x0 + x1 e1 + x2 e2 + x3 e3` with
//! `e1 e2 = e3`, `e2 e3 = e1`, `e3 e1 = e2` and `e_k^2 = -1`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for every unit-length check.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuaternionError {
    #[error("rotor norm {norm} deviates from 1 by more than {UNIT_TOL:e}")]
    NonUnitRotor { norm: f64 },
    #[error("vector ({0}, {1}, {2}) is not a unit imaginary direction")]
    NotUnit(f64, f64, f64),
    #[error("cannot normalize a zero vector")]
    ZeroVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.x0, q.x1, q.x2, q.x3]
    }
}

impl From<f64> for Quaternion {
    fn from(r: f64) -> Self {
        Self::real(r)
    }
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const E1: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const E2: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const E3: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self { x0, x1, x2, x3 }
    }

    #[inline]
    pub const fn real(r: f64) -> Self {
        Self::new(r, 0.0, 0.0, 0.0)
    }

    /// Pure imaginary quaternion with the given vector part.
    #[inline]
    pub const fn pure(v: [f64; 3]) -> Self {
        Self::new(0.0, v[0], v[1], v[2])
    }

    #[inline]
    pub fn re(&self) -> f64 {
        self.x0
    }

    /// Vector part `(x1, x2, x3)`.
    #[inline]
    pub fn vector(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    #[inline]
    pub fn vector_norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }

    #[inline]
    pub fn conj(&self) -> Self {
        Self::new(self.x0, -self.x1, -self.x2, -self.x3)
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean inner product of `R^4`.
    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        self.x0 * other.x0 + self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3
    }

    /// Multiplicative inverse `conj(q) / |q|^2`. Infinite components for `q = 0`.
    #[inline]
    pub fn inv(&self) -> Self {
        self.conj() / self.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.x0.is_finite() && self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = *self - *other;
        d.x0.abs().max(d.x1.abs()).max(d.x2.abs()).max(d.x3.abs())
    }

    pub fn slice_decompose(&self) -> SliceCoords {
        let y = self.vector_norm();
        if y == 0.0 {
            return SliceCoords { x: self.x0, y: 0.0, unit: SliceUnit::Real };
        }
        let unit = ImaginaryUnit { v: [self.x1 / y, self.x2 / y, self.x3 / y] };
        SliceCoords { x: self.x0, y, unit: SliceUnit::Imaginary(unit) }
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Self;

    #[inline]
    fn mul(self, q: Self) -> Self {
        let p = self;
        Self::new(
            p.x0 * q.x0 - p.x1 * q.x1 - p.x2 * q.x2 - p.x3 * q.x3,
            p.x0 * q.x1 + p.x1 * q.x0 + p.x2 * q.x3 - p.x3 * q.x2,
            p.x0 * q.x2 - p.x1 * q.x3 + p.x2 * q.x0 + p.x3 * q.x1,
            p.x0 * q.x3 + p.x1 * q.x2 - p.x2 * q.x1 + p.x3 * q.x0,
        )
    }
}

pub fn hamilton_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    p * q
}

pub fn conjugate(q: Quaternion) -> Quaternion {
    q.conj()
}

pub fn norm(q: Quaternion) -> f64 {
    q.norm()
}

impl Mul<f64> for Quaternion {
    type Output = Self;

    #[inline]
    fn mul(self, s: f64) -> Self {
        Self::new(self.x0 * s, self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;

    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;

    #[inline]
    fn div(self, s: f64) -> Self {
        Self::new(self.x0 / s, self.x1 / s, self.x2 / s, self.x3 / s)
    }
}

impl Add for Quaternion {
    type Output = Self;

    #[inline]
    fn add(self, q: Self) -> Self {
        Self::new(self.x0 + q.x0, self.x1 + q.x1, self.x2 + q.x2, self.x3 + q.x3)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, q: Self) {
        *self = *self + q;
    }
}

impl Sub for Quaternion {
    type Output = Self;

    #[inline]
    fn sub(self, q: Self) -> Self {
        Self::new(self.x0 - q.x0, self.x1 - q.x1, self.x2 - q.x2, self.x3 - q.x3)
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, q: Self) {
        *self = *self - q;
    }
}

impl Neg for Quaternion {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x0, -self.x1, -self.x2, -self.x3)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}e1 {:+}e2 {:+}e3", self.x0, self.x1, self.x2, self.x3)
    }
}

/// A unit vector of `R^3`, i.e. a square root of `-1` in the quaternions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ImaginaryUnit {
    v: [f64; 3],
}

impl TryFrom<[f64; 3]> for ImaginaryUnit {
    type Error = QuaternionError;

    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<ImaginaryUnit> for [f64; 3] {
    fn from(i: ImaginaryUnit) -> Self {
        i.v
    }
}

impl ImaginaryUnit {
    pub const E1: Self = Self { v: [1.0, 0.0, 0.0] };
    pub const E2: Self = Self { v: [0.0, 1.0, 0.0] };
    pub const E3: Self = Self { v: [0.0, 0.0, 1.0] };

    /// Accepts `(v1, v2, v3)` only if it already has unit length within [`UNIT_TOL`].
    pub fn new(v1: f64, v2: f64, v3: f64) -> Result<Self, QuaternionError> {
        let n2 = v1 * v1 + v2 * v2 + v3 * v3;
        if !n2.is_finite() || (n2 - 1.0).abs() > UNIT_TOL {
            return Err(QuaternionError::NotUnit(v1, v2, v3));
        }
        Ok(Self { v: [v1, v2, v3] })
    }

    /// Normalizes any nonzero finite vector.
    pub fn normalized(v1: f64, v2: f64, v3: f64) -> Result<Self, QuaternionError> {
        let n = (v1 * v1 + v2 * v2 + v3 * v3).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(QuaternionError::ZeroVector);
        }
        Ok(Self { v: [v1 / n, v2 / n, v3 / n] })
    }

    /// Unit direction of the vector part of `q`.
    pub fn from_quaternion(q: Quaternion) -> Result<Self, QuaternionError> {
        Self::normalized(q.x1, q.x2, q.x3)
    }

    #[inline]
    pub fn components(&self) -> [f64; 3] {
        self.v
    }

    #[inline]
    pub fn as_quaternion(&self) -> Quaternion {
        Quaternion::pure(self.v)
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        self.v[0] * other.v[0] + self.v[1] * other.v[1] + self.v[2] * other.v[2]
    }

    /// The point `x + self * y` of the slice `C(self)`.
    #[inline]
    pub fn point(&self, x: f64, y: f64) -> Quaternion {
        Quaternion::new(x, self.v[0] * y, self.v[1] * y, self.v[2] * y)
    }

    /// Embeds a complex number `a + b sqrt(-1)` as `a + self * b`.
    #[inline]
    pub fn embed(&self, z: Complex64) -> Quaternion {
        self.point(z.re, z.im)
    }

    /// Coordinates of the orthogonal projection of `q` onto `C(self)`.
    #[inline]
    pub fn project(&self, q: Quaternion) -> Complex64 {
        Complex64::new(q.x0, q.x1 * self.v[0] + q.x2 * self.v[1] + q.x3 * self.v[2])
    }

    /// `e^{self t} = cos t + self sin t`.
    #[inline]
    pub fn exp(&self, t: f64) -> Quaternion {
        let (s, c) = t.sin_cos();
        self.point(c, s)
    }

    /// Whether `q` lies in `C(self)` within `tol` (distance to its projection).
    pub fn contains(&self, q: Quaternion, tol: f64) -> bool {
        (q - self.embed(self.project(q))).norm() <= tol
    }
}

impl Neg for ImaginaryUnit {
    type Output = Self;

    fn neg(self) -> Self {
        Self { v: [-self.v[0], -self.v[1], -self.v[2]] }
    }
}

/// Direction part of a slice decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceUnit {
    Imaginary(ImaginaryUnit),
    /// The point is real and therefore lies on every slice.
    Real,
}

/// `q = x + I y` with `y >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceCoords {
    pub x: f64,
    pub y: f64,
    pub unit: SliceUnit,
}

impl SliceCoords {
    /// Reassembles the quaternion; `fallback` supplies the slice for real points.
    pub fn to_quaternion(&self, fallback: ImaginaryUnit) -> Quaternion {
        match self.unit {
            SliceUnit::Imaginary(i) => i.point(self.x, self.y),
            SliceUnit::Real => fallback.point(self.x, self.y),
        }
    }
}

pub fn slice_decompose(q: Quaternion) -> SliceCoords {
    q.slice_decompose()
}

/// `r q conj(r)` for a unit quaternion `r`.
pub fn rotate(r: Quaternion, q: Quaternion) -> Result<Quaternion, QuaternionError> {
    let n = r.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(QuaternionError::NonUnitRotor { norm: n });
    }
    Ok(r * q * r.conj())
}

/// Rotates an imaginary unit; renormalizes only when rounding pushed it off the sphere.
pub fn rotate_unit(r: Quaternion, i: ImaginaryUnit) -> Result<ImaginaryUnit, QuaternionError> {
    let q = rotate(r, i.as_quaternion())?;
    ImaginaryUnit::new(q.x1, q.x2, q.x3).or_else(|_| ImaginaryUnit::from_quaternion(q))
}

/// Deterministic unit orthogonal to `i`: Gram-Schmidt on the first of `e1, e2, e3`
/// whose component along `i` is below 0.9 in magnitude.
pub fn orthogonal_unit(i: ImaginaryUnit) -> ImaginaryUnit {
    let v = i.components();
    let k = (0..3).find(|&k| v[k].abs() < 0.9).unwrap_or(0);
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let d = v[k];
    let w = [e[0] - d * v[0], e[1] - d * v[1], e[2] - d * v[2]];
    ImaginaryUnit::normalized(w[0], w[1], w[2]).expect("basis vector is not parallel to i")
}

/// A unit quaternion `u` with `u from conj(u) = to`.
pub fn rotor_between(from: ImaginaryUnit, to: ImaginaryUnit) -> Quaternion {
    // 1 - to*from = 1 + <from,to> + from x to, the half-angle rotor up to scale
    let q = Quaternion::ONE - to.as_quaternion() * from.as_quaternion();
    let n = q.norm();
    if n < 1e-8 {
        // antipodal: half turn about any axis orthogonal to `from`
        return orthogonal_unit(from).as_quaternion();
    }
    q / n
}
