//! Poisson integrals over slice circles `S_i`, with the quaternionic norm
//! in the kernel, and the harmonic defects built on them.
//!
//! All integrals use the composite trapezoid rule on `N` equispaced angles
//! `t_k = 2 pi k / N`, which is spectrally accurate for smooth periodic data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quaternion::{rotate, rotate_unit, ImaginaryUnit, Quaternion, QuaternionError};
use crate::series::SliceSeries;

pub const DEFAULT_NODES: usize = 4096;
pub const MIN_NODES: usize = 16;

/// Points with `1 - |q| < BOUNDARY_MARGIN / nodes` are rejected.
pub const BOUNDARY_MARGIN: f64 = 10.0;

/// Slice membership tolerance for the slice-only operations.
const SLICE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoissonError {
    #[error("{nodes} quadrature nodes requested, at least {MIN_NODES} are required")]
    TooFewNodes { nodes: usize },
    #[error("|q| = {norm} is closer to the boundary than {BOUNDARY_MARGIN}/{nodes}; the kernel is under-resolved")]
    BoundaryTooClose { norm: f64, nodes: usize },
    #[error("point {point} does not lie on the slice of {unit:?}")]
    OffSlice { point: Quaternion, unit: ImaginaryUnit },
    #[error(transparent)]
    Rotation(#[from] QuaternionError),
}

/// Real boundary data `t -> u(e^{it})` on the circle of a fixed unit `i`.
#[derive(Clone)]
pub struct BoundaryFunction<F> {
    unit: ImaginaryUnit,
    eval: F,
}

impl<F: Fn(f64) -> f64> BoundaryFunction<F> {
    pub fn new(unit: ImaginaryUnit, eval: F) -> Self {
        Self { unit, eval }
    }

    pub fn unit(&self) -> ImaginaryUnit {
        self.unit
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
}

/// Boundary data given as a function of the point `e^{it}` itself.
pub fn boundary_from_points<G>(unit: ImaginaryUnit, g: G) -> BoundaryFunction<impl Fn(f64) -> f64>
where
    G: Fn(Quaternion) -> f64,
{
    BoundaryFunction::new(unit, move |t| g(unit.exp(t)))
}

/// Trapezoid nodes on `S_i` with cached `cos t_k`, `sin t_k`.
#[derive(Debug, Clone)]
pub struct CircleRule {
    unit: ImaginaryUnit,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl CircleRule {
    pub fn new(unit: ImaginaryUnit, nodes: usize) -> Result<Self, PoissonError> {
        if nodes < MIN_NODES {
            return Err(PoissonError::TooFewNodes { nodes });
        }
        let (sin, cos) = (0..nodes).map(|k| (2.0 * PI * k as f64 / nodes as f64).sin_cos()).unzip();
        Ok(Self { unit, cos, sin })
    }

    pub fn unit(&self) -> ImaginaryUnit {
        self.unit
    }

    pub fn nodes(&self) -> usize {
        self.cos.len()
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.nodes() as f64
    }

    /// The node `e^{i t_k}`.
    pub fn point(&self, k: usize) -> Quaternion {
        self.unit.point(self.cos[k], self.sin[k])
    }

    /// Index of `-t_k`, i.e. of the conjugate node.
    pub fn mirror(&self, k: usize) -> usize {
        (self.nodes() - k) % self.nodes()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, u: &BoundaryFunction<F>) -> Vec<f64> {
        (0..self.nodes()).map(|k| u.at(self.angle(k))).collect()
    }

    pub fn sample_points<G: Fn(Quaternion) -> f64>(&self, g: G) -> Vec<f64> {
        (0..self.nodes()).map(|k| g(self.point(k))).collect()
    }

    pub fn check(&self, q: Quaternion) -> Result<(), PoissonError> {
        let norm = q.norm();
        if !(1.0 - norm >= BOUNDARY_MARGIN / self.nodes() as f64) {
            return Err(PoissonError::BoundaryTooClose { norm, nodes: self.nodes() });
        }
        Ok(())
    }

    /// Kernel `(1 - |q|^2) / |q - e^{i t_k}|^2`.
    pub fn kernel(&self, q: Quaternion, k: usize) -> f64 {
        (1.0 - q.norm_sqr()) / (q - self.point(k)).norm_sqr()
    }

    /// Quadrature weights `kernel(q, k) / nodes`, shared by every integral at `q`.
    pub fn weights(&self, q: Quaternion) -> Result<Vec<f64>, PoissonError> {
        self.check(q)?;
        // q - e^{it} = (q0 - cos t) + (b - sin t) i + perp with b = <vec q, i>
        let u = self.unit.components();
        let b = q.x1 * u[0] + q.x2 * u[1] + q.x3 * u[2];
        let perp = Quaternion::pure([q.x1 - b * u[0], q.x2 - b * u[1], q.x3 - b * u[2]]).norm_sqr();
        let scale = (1.0 - q.norm_sqr()) / self.nodes() as f64;
        Ok(self
            .cos
            .iter()
            .zip(&self.sin)
            .map(|(&c, &s)| scale / ((q.x0 - c).powi(2) + (b - s).powi(2) + perp))
            .collect())
    }

    /// `P_i[u](q)` for boundary values `values[k] = u(e^{i t_k})`.
    pub fn integrate(&self, values: &[f64], q: Quaternion) -> Result<f64, PoissonError> {
        assert_eq!(values.len(), self.nodes(), "one boundary value per node");
        Ok(weighted_sum(&self.weights(q)?, values))
    }
}

/// `sum w_k v_k` in node order.
pub fn weighted_sum(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

impl CircleRule {
}

/// `(1 / 2 pi) int u(e^{it}) (1 - |q|^2) / |q - e^{it}|^2 dt`.
pub fn poisson_integral<F: Fn(f64) -> f64>(
    u: &BoundaryFunction<F>,
    q: Quaternion,
    nodes: usize,
) -> Result<f64, PoissonError> {
    let rule = CircleRule::new(u.unit(), nodes)?;
    rule.check(q)?;
    rule.integrate(&rule.sample(u), q)
}

/// Which holomorphic component of `f = f_1 + f_2 j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    First,
    Second,
}

/// The real function `g` whose defect `P_i[g] - g` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectMode {
    /// `|f + i f i|`
    Plus,
    /// `|f - i f i|`
    Minus,
    /// `|f|`
    Modulus,
    /// `|f_k|`, where `|f_1| = |f - i f i| / 2` and `|f_2| = |f + i f i| / 2`.
    ComponentModulus(Component),
    /// `|f_k|^2`
    ComponentModulusSquared(Component),
}

impl DefectMode {
    pub fn apply(self, v: Quaternion, i: ImaginaryUnit) -> f64 {
        let iq = i.as_quaternion();
        match self {
            Self::Plus => (v + iq * v * iq).norm(),
            Self::Minus => (v - iq * v * iq).norm(),
            Self::Modulus => v.norm(),
            Self::ComponentModulus(c) => component_modulus(v, i, c),
            Self::ComponentModulusSquared(c) => component_modulus(v, i, c).powi(2),
        }
    }
}

/// `|f_1|` or `|f_2|` of a single value.
pub fn component_modulus(v: Quaternion, i: ImaginaryUnit, c: Component) -> f64 {
    let iq = i.as_quaternion();
    let ivi = iq * v * iq;
    match c {
        Component::First => 0.5 * (v - ivi).norm(),
        Component::Second => 0.5 * (v + ivi).norm(),
    }
}

/// Values of a series on the nodes of one slice circle, reusable across
/// many interior evaluation points.
#[derive(Debug, Clone)]
pub struct SliceBoundary {
    rule: CircleRule,
    values: Vec<Quaternion>,
}

impl SliceBoundary {
    pub fn new(f: &SliceSeries, i: ImaginaryUnit, nodes: usize) -> Result<Self, PoissonError> {
        let rule = CircleRule::new(i, nodes)?;
        let values = (0..nodes).map(|k| f.evaluate(rule.point(k))).collect();
        Ok(Self { rule, values })
    }

    pub fn rule(&self) -> &CircleRule {
        &self.rule
    }

    pub fn values(&self) -> &[Quaternion] {
        &self.values
    }

    pub fn sample(&self, mode: DefectMode) -> Vec<f64> {
        self.values.iter().map(|&v| mode.apply(v, self.rule.unit)).collect()
    }

    /// `P_i[g](x) - g(x)` using boundary samples from [`Self::sample`].
    pub fn defect(
        &self,
        sampled: &[f64],
        f: &SliceSeries,
        mode: DefectMode,
        x: Quaternion,
    ) -> Result<f64, PoissonError> {
        let p = self.rule.integrate(sampled, x)?;
        Ok(p - mode.apply(f.evaluate(x), self.rule.unit))
    }
}

/// `P_i[g](x) - g(x)` for `g` selected by `mode`.
pub fn harmonic_defect(
    f: &SliceSeries,
    x: Quaternion,
    i: ImaginaryUnit,
    mode: DefectMode,
    nodes: usize,
) -> Result<f64, PoissonError> {
    let boundary = SliceBoundary::new(f, i, nodes)?;
    boundary.rule.check(x)?;
    boundary.defect(&boundary.sample(mode), f, mode, x)
}

/// `|P_{T_r(i)}[u](q) - P_i[u o T_r](T_r^{-1}(q))|` for a point function `u`
/// on the rotated circle; the two sides are independent quadratures.
pub fn rotation_equivariance_residual<G: Fn(Quaternion) -> f64>(
    u: G,
    r: Quaternion,
    q: Quaternion,
    i: ImaginaryUnit,
    nodes: usize,
) -> Result<f64, PoissonError> {
    let k = rotate_unit(r, i)?;
    let rotated = CircleRule::new(k, nodes)?;
    let lhs = rotated.integrate(&rotated.sample_points(&u), q)?;

    let base = CircleRule::new(i, nodes)?;
    let mut pulled = Vec::with_capacity(nodes);
    for k in 0..nodes {
        pulled.push(u(rotate(r, base.point(k))?));
    }
    let rhs = base.integrate(&pulled, rotate(r.conj(), q)?)?;
    Ok((lhs - rhs).abs())
}

/// Both sides of the star-kernel estimate at `x` in `D_i`:
/// `lhs = (1/2 pi) int |(x - e^{jt})^{-*2} * f(e^{jt})| (1 - |x|^2) dt`, evaluated
/// through the slice identity
/// `1/2 [(1 + j i)(x - e^{-it})^{-2} f(e^{-it}) + (1 - j i)(x - e^{it})^{-2} f(e^{it})]`,
/// and `rhs = 2 P_i[|f|](x)`.
pub fn star_kernel_bound(
    f: &SliceSeries,
    x: Quaternion,
    i: ImaginaryUnit,
    j: ImaginaryUnit,
    nodes: usize,
) -> Result<(f64, f64), PoissonError> {
    if !i.contains(x, SLICE_TOL) {
        return Err(PoissonError::OffSlice { point: x, unit: i });
    }
    let boundary = SliceBoundary::new(f, i, nodes)?;
    let rule = &boundary.rule;
    rule.check(x)?;
    let ji = j.as_quaternion() * i.as_quaternion();
    let plus = Quaternion::ONE + ji;
    let minus = Quaternion::ONE - ji;
    let weight = 1.0 - x.norm_sqr();
    let inv_sq = |k: usize| {
        let d = x - rule.point(k);
        (d * d).inv()
    };
    let mut acc = 0.0;
    for k in 0..rule.nodes() {
        let m = rule.mirror(k);
        let term = (plus * inv_sq(m) * boundary.values[m] + minus * inv_sq(k) * boundary.values[k]) * 0.5;
        acc += term.norm() * weight;
    }
    let lhs = acc / rule.nodes() as f64;
    let rhs = 2.0 * rule.integrate(&boundary.sample(DefectMode::Modulus), x)?;
    Ok((lhs, rhs))
}

/// The three Poisson integrals in `P[|f +- i f i|] <= 2 P[|f|] <= P[|f - i f i|] + P[|f + i f i|]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichBounds {
    pub plus: f64,
    pub minus: f64,
    pub twice_modulus: f64,
}

impl SandwichBounds {
    /// Smallest margin among the three inequalities; negative means violated.
    pub fn slack(&self) -> f64 {
        (self.twice_modulus - self.plus)
            .min(self.twice_modulus - self.minus)
            .min(self.plus + self.minus - self.twice_modulus)
    }
}

/// Boundary samples of `|f + i f i|`, `|f - i f i|` and `|f|` for repeated
/// sandwich evaluations.
#[derive(Debug, Clone)]
pub struct SandwichSamples<'a> {
    rule: &'a CircleRule,
    plus: Vec<f64>,
    minus: Vec<f64>,
    modulus: Vec<f64>,
}

impl SliceBoundary {
    pub fn sandwich(&self) -> SandwichSamples<'_> {
        SandwichSamples {
            rule: &self.rule,
            plus: self.sample(DefectMode::Plus),
            minus: self.sample(DefectMode::Minus),
            modulus: self.sample(DefectMode::Modulus),
        }
    }
}

impl SandwichSamples<'_> {
    pub fn at(&self, x: Quaternion) -> Result<SandwichBounds, PoissonError> {
        let w = self.rule.weights(x)?;
        Ok(SandwichBounds {
            plus: weighted_sum(&w, &self.plus),
            minus: weighted_sum(&w, &self.minus),
            twice_modulus: 2.0 * weighted_sum(&w, &self.modulus),
        })
    }
}

pub fn sandwich_bounds(boundary: &SliceBoundary, x: Quaternion) -> Result<SandwichBounds, PoissonError> {
    boundary.sandwich().at(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(x0: f64, x1: f64, x2: f64, x3: f64) -> Quaternion {
        Quaternion::new(x0, x1, x2, x3)
    }

    #[test]
    fn constant_data_integrates_to_one() {
        let u = BoundaryFunction::new(ImaginaryUnit::E1, |_| 1.0);
        let v = poisson_integral(&u, ImaginaryUnit::E1.point(0.5, 0.0), DEFAULT_NODES).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = poisson_integral(&u, ImaginaryUnit::E1.point(0.3, -0.6), DEFAULT_NODES).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn origin_gives_circle_mean() {
        let u = BoundaryFunction::new(ImaginaryUnit::E2, |t: f64| 3.0 + t.sin().powi(2));
        let v = poisson_integral(&u, Quaternion::ZERO, 64).unwrap();
        assert!((v - 3.5).abs() < 1e-14);
    }

    #[test]
    fn cosine_extends_harmonically() {
        let u = BoundaryFunction::new(ImaginaryUnit::E1, f64::cos);
        let v = poisson_integral(&u, Quaternion::real(0.5), DEFAULT_NODES).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        // r cos(theta) at a non-real slice point
        let x = ImaginaryUnit::E1.point(0.2, 0.4);
        let v = poisson_integral(&u, x, DEFAULT_NODES).unwrap();
        assert!((v - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let u = BoundaryFunction::new(ImaginaryUnit::E1, |_| 1.0);
        assert_eq!(poisson_integral(&u, Quaternion::ZERO, 8), Err(PoissonError::TooFewNodes { nodes: 8 }));
        assert!(matches!(
            poisson_integral(&u, Quaternion::real(0.999), 4096),
            Err(PoissonError::BoundaryTooClose { .. })
        ));
        assert!(poisson_integral(&u, Quaternion::real(0.99), 4096).is_ok());
    }

    #[test]
    fn defect_of_identity_in_modulus_mode() {
        let f = SliceSeries::identity();
        let d = harmonic_defect(&f, Quaternion::real(0.3), ImaginaryUnit::E1, DefectMode::Modulus, DEFAULT_NODES)
            .unwrap();
        assert!((d - 0.7).abs() < 1e-12);
        // f = q is the first component on every slice: |f_1| = |q|, f_2 = 0
        let x = ImaginaryUnit::E3.point(0.1, 0.2);
        let d = harmonic_defect(
            &f,
            x,
            ImaginaryUnit::E3,
            DefectMode::ComponentModulus(Component::First),
            DEFAULT_NODES,
        )
        .unwrap();
        assert!((d - (1.0 - x.norm())).abs() < 1e-12);
    }

    #[test]
    fn constants_have_zero_defect() {
        let f = SliceSeries::constant(q(0.3, -1.0, 0.5, 2.0));
        let x = ImaginaryUnit::E2.point(-0.4, 0.3);
        for mode in [
            DefectMode::Plus,
            DefectMode::Minus,
            DefectMode::Modulus,
            DefectMode::ComponentModulusSquared(Component::Second),
        ] {
            let d = harmonic_defect(&f, x, ImaginaryUnit::E2, mode, 256).unwrap();
            assert!(d.abs() < 1e-13, "{mode:?}: {d}");
        }
    }

    #[test]
    fn rotation_by_identity_is_exact() {
        let u = |p: Quaternion| p.x0 * p.x0 + p.x2;
        let r = rotate_unit(Quaternion::ONE, ImaginaryUnit::E2).unwrap();
        assert_eq!(r, ImaginaryUnit::E2);
        let res = rotation_equivariance_residual(u, Quaternion::ONE, q(0.1, 0.2, 0.3, 0.0), ImaginaryUnit::E2, 512)
            .unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn star_kernel_with_equal_units_halves() {
        let f = SliceSeries::new(vec![Quaternion::E1, Quaternion::E2, q(0.0, 0.0, 0.0, 0.5)]).unwrap();
        let i = ImaginaryUnit::E3;
        let (lhs, rhs) = star_kernel_bound(&f, i.point(0.3, 0.4), i, i, 1024).unwrap();
        assert!((rhs / lhs - 2.0).abs() < 1e-12);
        let (lhs, rhs) = star_kernel_bound(&SliceSeries::zero(), i.point(0.3, 0.4), i, i, 64).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
    }

    #[test]
    fn sandwich_holds_for_a_mixed_series() {
        let f = SliceSeries::new(vec![Quaternion::ONE, Quaternion::E1, Quaternion::E2, Quaternion::E3]).unwrap();
        let b = SliceBoundary::new(&f, ImaginaryUnit::E1, 1024).unwrap();
        let s = sandwich_bounds(&b, ImaginaryUnit::E1.point(0.2, -0.5)).unwrap();
        assert!(s.slack() >= -1e-12, "{s:?}");
    }
}
