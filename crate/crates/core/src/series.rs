//! Slice regular functions on the unit ball as finite power series
//! `f(q) = sum q^n a_n` with right coefficients, and their star algebra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quaternion::{orthogonal_unit, ImaginaryUnit, Quaternion};

/// Floor below which a quaternion is treated as zero for inversion.
pub const ZERO_FLOOR: f64 = 1e-9;

/// Maximum disagreement between `f * f^c` and `f^c * f`.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("a series needs at least one coefficient")]
    Empty,
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("|f(q)| = {norm:e} is below the zero floor {floor:e}")]
    ZeroBase { norm: f64, floor: f64 },
    #[error("f * f^c and f^c * f differ by {diff:e} at degree {degree}")]
    AsymmetryDetected { degree: usize, diff: f64 },
    #[error("constant term of f^s is {value:e}, below the zero floor")]
    NotInvertibleAtOrigin { value: f64 },
    #[error("finite-difference stencil of radius {step} at {point} leaves the closed unit ball")]
    StepOutOfDomain { point: Quaternion, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Quaternion>", into = "Vec<Quaternion>")]
pub struct SliceSeries {
    coeffs: Vec<Quaternion>,
}

impl TryFrom<Vec<Quaternion>> for SliceSeries {
    type Error = SeriesError;

    fn try_from(coeffs: Vec<Quaternion>) -> Result<Self, Self::Error> {
        Self::new(coeffs)
    }
}

impl From<SliceSeries> for Vec<Quaternion> {
    fn from(s: SliceSeries) -> Self {
        s.coeffs
    }
}

impl SliceSeries {
    pub fn new(coeffs: Vec<Quaternion>) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::Empty);
        }
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(SeriesError::NonFinite { index });
        }
        Ok(Self { coeffs })
    }

    /// Series with real coefficients.
    pub fn from_real(coeffs: &[f64]) -> Result<Self, SeriesError> {
        Self::new(coeffs.iter().copied().map(Quaternion::real).collect())
    }

    pub fn constant(c: Quaternion) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Self::constant(Quaternion::ZERO)
    }

    pub fn one() -> Self {
        Self::constant(Quaternion::ONE)
    }

    /// The identity function `f(q) = q`.
    pub fn identity() -> Self {
        Self { coeffs: vec![Quaternion::ZERO, Quaternion::ONE] }
    }

    pub fn coeffs(&self) -> &[Quaternion] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> Quaternion {
        self.coeffs.get(n).copied().unwrap_or(Quaternion::ZERO)
    }

    /// Horner evaluation `a0 + q(a1 + q(a2 + ...))`.
    pub fn evaluate(&self, q: Quaternion) -> Quaternion {
        let mut acc = *self.coeffs.last().expect("nonempty");
        for &a in self.coeffs.iter().rev().skip(1) {
            acc = q * acc + a;
        }
        acc
    }

    /// Value and Cullen derivative at `q` in one Horner pass.
    pub fn evaluate_with_derivative(&self, q: Quaternion) -> (Quaternion, Quaternion) {
        let mut val = *self.coeffs.last().expect("nonempty");
        let mut der = Quaternion::ZERO;
        for &a in self.coeffs.iter().rev().skip(1) {
            der = q * der + val;
            val = q * val + a;
        }
        (val, der)
    }

    pub fn cullen_derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(n, &a)| a * n as f64).collect();
        Self { coeffs }
    }

    /// Coefficients `0..=m` (zero padded).
    pub fn truncate(&self, m: usize) -> Self {
        Self { coeffs: (0..=m).map(|n| self.coeff(n)).collect() }
    }

    pub fn star_product(&self, g: &Self) -> Self {
        let (a, b) = (&self.coeffs, &g.coeffs);
        let mut coeffs = vec![Quaternion::ZERO; a.len() + b.len() - 1];
        for (k, &ak) in a.iter().enumerate() {
            for (l, &bl) in b.iter().enumerate() {
                coeffs[k + l] += ak * bl;
            }
        }
        Self { coeffs }
    }

    /// Star product truncated to degree `m`.
    pub fn star_product_truncated(&self, g: &Self, m: usize) -> Self {
        let coeffs = (0..=m)
            .map(|n| (0..=n).map(|k| self.coeff(k) * g.coeff(n - k)).sum())
            .collect();
        Self { coeffs }
    }

    /// `f * g (q)` through the pointwise formula `f(q) g(f(q)^{-1} q f(q))`.
    pub fn star_pointwise(&self, g: &Self, q: Quaternion, floor: f64) -> Result<Quaternion, SeriesError> {
        let fq = self.evaluate(q);
        let norm = fq.norm();
        if norm <= floor {
            return Err(SeriesError::ZeroBase { norm, floor });
        }
        Ok(fq * g.evaluate(fq.inv() * q * fq))
    }

    /// `f^c`: coefficient-wise conjugation.
    pub fn regular_conjugate(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(Quaternion::conj).collect() }
    }

    /// `f^s = f * f^c`, checked against `f^c * f` and returned with real coefficients.
    pub fn symmetrization(&self) -> Result<Self, SeriesError> {
        let fc = self.regular_conjugate();
        let left = self.star_product(&fc);
        let right = fc.star_product(self);
        let scale = self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().max(1.0);
        for (degree, (l, r)) in left.coeffs.iter().zip(&right.coeffs).enumerate() {
            let diff = l.max_abs_diff(r);
            let imag = l.vector_norm();
            if diff > SYMMETRY_TOL * scale || imag > SYMMETRY_TOL * scale {
                return Err(SeriesError::AsymmetryDetected { degree, diff: diff.max(imag) });
            }
        }
        Ok(Self { coeffs: left.coeffs.iter().map(|c| Quaternion::real(c.x0)).collect() })
    }

    /// `f^{-*} = (1/f^s) * f^c` truncated to degree `m`.
    pub fn star_inverse(&self, m: usize) -> Result<Self, SeriesError> {
        let fs = self.symmetrization()?;
        let s: Vec<f64> = (0..=m).map(|n| fs.coeff(n).x0).collect();
        if s[0].abs() <= ZERO_FLOOR {
            return Err(SeriesError::NotInvertibleAtOrigin { value: s[0] });
        }
        let r = real_reciprocal(&s, m);
        let fc = self.regular_conjugate();
        // real coefficients commute with everything
        let coeffs = (0..=m)
            .map(|n| (0..=n).map(|k| fc.coeff(n - k) * r[k]).sum())
            .collect();
        Ok(Self { coeffs })
    }

    /// `(f^{-*})' = -f^{-*} * f' * f^{-*}` truncated to degree `m`.
    pub fn star_inverse_derivative(&self, m: usize) -> Result<Self, SeriesError> {
        let inv = self.star_inverse(m)?;
        let d = self.cullen_derivative();
        let prod = inv.star_product_truncated(&d, m).star_product_truncated(&inv, m);
        Ok(Self { coeffs: prod.coeffs.into_iter().map(|c| -c).collect() })
    }

    pub fn add(&self, g: &Self) -> Self {
        let n = self.coeffs.len().max(g.coeffs.len());
        Self { coeffs: (0..n).map(|k| self.coeff(k) + g.coeff(k)).collect() }
    }

    pub fn sub(&self, g: &Self) -> Self {
        let n = self.coeffs.len().max(g.coeffs.len());
        Self { coeffs: (0..n).map(|k| self.coeff(k) - g.coeff(k)).collect() }
    }

    /// The function `q -> f(q) a`.
    pub fn mul_right(&self, a: Quaternion) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * a).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    pub fn is_intrinsic(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.vector_norm() <= tol)
    }

    /// Complex components `F`, `G` on `C(i)` with `f = F + G j`, `j = orthogonal_unit(i)`.
    pub fn split(&self, i: ImaginaryUnit) -> Split {
        let j = orthogonal_unit(i);
        let (f1, f2) = self.coeffs.iter().map(|&a| split_value(a, i, j)).unzip();
        Split { f1: ComplexSeries::new(f1), f2: ComplexSeries::new(f2), i, j }
    }
}

/// Reciprocal of a real formal power series, truncated to degree `m`.
/// Requires `s[0] != 0`.
pub fn real_reciprocal(s: &[f64], m: usize) -> Vec<f64> {
    let get = |n: usize| s.get(n).copied().unwrap_or(0.0);
    let mut r = Vec::with_capacity(m + 1);
    r.push(1.0 / s[0]);
    for n in 1..=m {
        let acc: f64 = (1..=n).map(|k| get(k) * r[n - k]).sum();
        r.push(-acc / s[0]);
    }
    r
}

/// Splits a quaternion `a = alpha + beta j` with `alpha, beta` in `C(i)`,
/// using `2 alpha = a - i a i` and `2 beta j = a + i a i`.
pub fn split_value(a: Quaternion, i: ImaginaryUnit, j: ImaginaryUnit) -> (Complex64, Complex64) {
    let iq = i.as_quaternion();
    let iai = iq * a * iq;
    let alpha = (a - iai) * 0.5;
    // beta = (beta j) j^{-1} = -(beta j) j
    let beta = -((a + iai) * 0.5 * j.as_quaternion());
    (i.project(alpha), i.project(beta))
}

/// Inverse of [`split_value`].
pub fn join_value(f1: Complex64, f2: Complex64, i: ImaginaryUnit, j: ImaginaryUnit) -> Quaternion {
    i.embed(f1) + i.embed(f2) * j.as_quaternion()
}

/// A polynomial with complex coefficients, read on a slice `C(i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSeries {
    coeffs: Vec<Complex64>,
}

impl ComplexSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut acc = *self.coeffs.last().expect("nonempty");
        for &a in self.coeffs.iter().rev().skip(1) {
            acc = acc * z + a;
        }
        acc
    }

    pub fn evaluate_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut val = *self.coeffs.last().expect("nonempty");
        let mut der = Complex64::new(0.0, 0.0);
        for &a in self.coeffs.iter().rev().skip(1) {
            der = der * z + val;
            val = val * z + a;
        }
        (val, der)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::new(vec![Complex64::new(0.0, 0.0)]);
        }
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(n, &a)| a * n as f64).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}

/// Result of [`SliceSeries::split`].
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub f1: ComplexSeries,
    pub f2: ComplexSeries,
    pub i: ImaginaryUnit,
    pub j: ImaginaryUnit,
}

impl Split {
    /// `F(z) + G(z) j` as a quaternion.
    pub fn evaluate(&self, z: Complex64) -> Quaternion {
        join_value(self.f1.evaluate(z), self.f2.evaluate(z), self.i, self.j)
    }
}

/// Representation formula: the value at `x + iq y` from the values
/// `fplus = f(x + i y)` and `fminus = f(x - i y)`.
pub fn representation_extend(
    fplus: Quaternion,
    fminus: Quaternion,
    i: ImaginaryUnit,
    iq: ImaginaryUnit,
) -> Quaternion {
    (fplus + fminus) * 0.5 + iq.as_quaternion() * i.as_quaternion() * (fminus - fplus) * 0.5
}

/// Evaluates `f(q)` from the two slice values `f(x +- i y)`.
pub fn extend_from_slice(f: &SliceSeries, q: Quaternion, i: ImaginaryUnit) -> Quaternion {
    let s = q.slice_decompose();
    let iq = match s.unit {
        crate::quaternion::SliceUnit::Imaginary(u) => u,
        crate::quaternion::SliceUnit::Real => i,
    };
    representation_extend(f.evaluate(i.point(s.x, s.y)), f.evaluate(i.point(s.x, -s.y)), i, iq)
}

/// A deterministic quaternion-valued function on the closed unit ball.
pub trait PointwiseFunction {
    fn eval(&self, q: Quaternion) -> Quaternion;
}

impl PointwiseFunction for SliceSeries {
    fn eval(&self, q: Quaternion) -> Quaternion {
        self.evaluate(q)
    }
}

impl<F: Fn(Quaternion) -> Quaternion> PointwiseFunction for F {
    fn eval(&self, q: Quaternion) -> Quaternion {
        self(q)
    }
}

/// `|1/2 (d/dx + i d/dy) f|` at `z` in `C(i)` by centered differences of step `h`.
pub fn slice_cr_residual<F: PointwiseFunction + ?Sized>(
    f: &F,
    z: Quaternion,
    i: ImaginaryUnit,
    h: f64,
) -> Result<f64, SeriesError> {
    let iq = i.as_quaternion();
    let dx = Quaternion::real(h);
    let dy = iq * h;
    let stencil = [z + dx, z - dx, z + dy, z - dy];
    if stencil.iter().any(|p| p.norm() > 1.0) {
        return Err(SeriesError::StepOutOfDomain { point: z, step: h });
    }
    let ddx = (f.eval(stencil[0]) - f.eval(stencil[1])) / (2.0 * h);
    let ddy = (f.eval(stencil[2]) - f.eval(stencil[3])) / (2.0 * h);
    Ok(((ddx + iq * ddy) * 0.5).norm())
}
