//! Sampled estimators for Lipschitz-type norms of slice regular functions
//! and for the derivative functionals that characterize them.
//!
//! Every estimate is a maximum over a finite, seeded sample and hence a lower
//! bound for the true supremum. Sample `k` is drawn from its own ChaCha8
//! stream, so enlarging a plan keeps the earlier samples and can only raise
//! an estimate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::majorant::{Majorant, DOMAIN_END};
use crate::poisson::{CircleRule, DefectMode, PoissonError};
use crate::quaternion::{ImaginaryUnit, Quaternion};
use crate::series::{ComplexSeries, SeriesError, SliceSeries, ZERO_FLOOR};

pub const DEFAULT_PAIRS: usize = 10_000;
pub const DEFAULT_POINTS: usize = 1_000;
pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_RHO: f64 = 0.995;
pub const DEFAULT_SEED: u64 = 20_240_607;

/// Points where `|f'(x)|` falls below this are skipped by the Schwarz-Pick check.
pub const DERIVATIVE_FLOOR: f64 = 1e-6;

/// Radii `1 - r` used for radial differences, geometric from 1 down to `epsilon`.
const RADIAL_LEVELS: usize = 48;

/// Minimum number of samples on a circle before local refinement.
const CIRCLE_SAMPLES: usize = 256;

const GOLDEN_STEPS: usize = 80;

// stream salts, one per sampling domain
const SALT_DISC_PAIRS: u64 = 0x51;
const SALT_BALL_PAIRS: u64 = 0x52;
const SALT_CIRCLE_PAIRS: u64 = 0x53;
const SALT_DISC_POINTS: u64 = 0x54;
const SALT_BALL_POINTS: u64 = 0x55;
const SALT_CLOSED_PAIRS: u64 = 0x56;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LipschitzError {
    #[error("invalid sample plan: {0}")]
    InvalidPlan(String),
    #[error("the sample plan produced no admissible samples")]
    DegeneratePlan,
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Seeded sampling policy for supremum estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplePlan {
    pub pairs: usize,
    pub points: usize,
    /// Smallest separation of a sampled pair.
    pub epsilon: f64,
    /// Largest radius of a sampled interior point.
    pub rho: f64,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            pairs: DEFAULT_PAIRS,
            points: DEFAULT_POINTS,
            epsilon: DEFAULT_EPSILON,
            rho: DEFAULT_RHO,
            seed: DEFAULT_SEED,
        }
    }
}

impl SamplePlan {
    pub fn validate(&self) -> Result<(), LipschitzError> {
        let bad = |m: &str| Err(LipschitzError::InvalidPlan(m.to_owned()));
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho must lie in (0, 1)");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 2.0 * self.rho) {
            return bad("epsilon must lie in (0, 2 rho)");
        }
        if self.pairs == 0 && self.points == 0 {
            return bad("plan draws no samples");
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn stream(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.rotate_left(40))
    }
}

fn nth(base: &ChaCha8Rng, k: usize) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(k as u64);
    rng
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * PI * unit(rng)
}

/// Log-uniform separation in `[eps, top]`.
fn separation(rng: &mut ChaCha8Rng, eps: f64, top: f64) -> f64 {
    eps * (top / eps).powf(unit(rng))
}

fn clamp_disc(z: Complex64, radius: f64) -> Complex64 {
    let n = z.norm();
    if n > radius {
        z * (radius / n)
    } else {
        z
    }
}

fn disc_pair(rng: &mut ChaCha8Rng, k: usize, radius: f64, eps: f64) -> [Complex64; 2] {
    match k % 5 {
        0 => {
            let a = Complex64::from_polar(radius * unit(rng).sqrt(), angle(rng));
            let b = Complex64::from_polar(radius * unit(rng).sqrt(), angle(rng));
            [a, b]
        }
        1 => {
            // nearly antipodal points on the outer circle
            let t = angle(rng);
            let jitter = 0.5 * (unit(rng) - 0.5);
            [Complex64::from_polar(radius, t), Complex64::from_polar(radius, t + PI + jitter)]
        }
        2 => {
            let a = Complex64::from_polar(radius * unit(rng).powf(0.25), angle(rng));
            let s = separation(rng, eps, 2.0 * radius);
            let b = clamp_disc(a + Complex64::from_polar(s, angle(rng)), radius);
            [a, b]
        }
        3 => {
            // on a common ray through the origin
            let a = Complex64::from_polar(radius, angle(rng));
            let s = separation(rng, eps, radius);
            [a, a * (1.0 - s / radius)]
        }
        _ => {
            let a = Complex64::from_polar(radius * unit(rng).powf(0.125), angle(rng));
            let b = Complex64::from_polar(radius * unit(rng).powf(0.125), angle(rng));
            [a, b]
        }
    }
}

fn circle_pair(rng: &mut ChaCha8Rng, k: usize, eps: f64) -> [f64; 2] {
    let t = angle(rng);
    match k % 3 {
        0 => [t, angle(rng)],
        1 => [t, t + PI + 0.5 * (unit(rng) - 0.5)],
        _ => {
            let d = separation(rng, eps, PI);
            [t, if unit(rng) < 0.5 { t + d } else { t - d }]
        }
    }
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let r = (-2.0 * (1.0 - unit(rng)).ln()).sqrt();
    let t = angle(rng);
    (r * t.cos(), r * t.sin())
}

fn sphere_point(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let (a, b) = gaussian_pair(rng);
        let (c, d) = gaussian_pair(rng);
        let q = Quaternion::new(a, b, c, d);
        let n = q.norm();
        if n > 1e-12 {
            return q / n;
        }
    }
}

fn clamp_ball(q: Quaternion, radius: f64) -> Quaternion {
    let n = q.norm();
    if n > radius {
        q * (radius / n)
    } else {
        q
    }
}

fn ball_pair(rng: &mut ChaCha8Rng, k: usize, radius: f64, eps: f64) -> [Quaternion; 2] {
    match k % 4 {
        0 => {
            let a = sphere_point(rng) * (radius * unit(rng).powf(0.25));
            let b = sphere_point(rng) * (radius * unit(rng).powf(0.25));
            [a, b]
        }
        1 => {
            let v = sphere_point(rng);
            let w = sphere_point(rng);
            let u = v + w * 0.2;
            [v * radius, u * (-radius / u.norm())]
        }
        2 => {
            let a = sphere_point(rng) * (radius * unit(rng).powf(0.125));
            let s = separation(rng, eps, 2.0 * radius);
            let b = clamp_ball(a + sphere_point(rng) * s, radius);
            [a, b]
        }
        _ => {
            let a = sphere_point(rng) * (radius * unit(rng).powf(0.05));
            let b = sphere_point(rng) * (radius * unit(rng).powf(0.05));
            [a, b]
        }
    }
}

/// Radius with `1 - r` log-uniform between `1` and `1 - rho`; every fourth sample sits on `rho`.
fn radial(rng: &mut ChaCha8Rng, k: usize, rho: f64) -> f64 {
    if k % 4 == 0 {
        rho
    } else {
        1.0 - (1.0 - rho).powf(unit(rng))
    }
}

/// Pairs in the complex disc of the given radius; category `k mod 5` is
/// uniform, nearly antipodal, near-diagonal, radial or boundary-biased.
pub fn disc_pairs(plan: &SamplePlan, radius: f64) -> Vec<[Complex64; 2]> {
    let base = plan.stream(if radius < 1.0 { SALT_DISC_PAIRS } else { SALT_CLOSED_PAIRS });
    (0..plan.pairs)
        .into_par_iter()
        .map(|k| disc_pair(&mut nth(&base, k), k, radius, plan.epsilon))
        .collect()
}

/// Pairs in `D_i` with `|x|, |y| <= rho`. The complex coordinates do not
/// depend on `i`, so two units see rotated copies of the same sample.
pub fn slice_pairs(plan: &SamplePlan, i: ImaginaryUnit) -> Vec<[Quaternion; 2]> {
    disc_pairs(plan, plan.rho).into_iter().map(|[a, b]| [i.embed(a), i.embed(b)]).collect()
}

/// Pairs in the ball of radius `rho` in `R^4`.
pub fn ball_pairs(plan: &SamplePlan) -> Vec<[Quaternion; 2]> {
    let base = plan.stream(SALT_BALL_PAIRS);
    (0..plan.pairs)
        .into_par_iter()
        .map(|k| ball_pair(&mut nth(&base, k), k, plan.rho, plan.epsilon))
        .collect()
}

/// Angle pairs on the unit circle.
pub fn circle_pairs(plan: &SamplePlan) -> Vec<[f64; 2]> {
    let base = plan.stream(SALT_CIRCLE_PAIRS);
    (0..plan.pairs).into_par_iter().map(|k| circle_pair(&mut nth(&base, k), k, plan.epsilon)).collect()
}

/// Points of the complex disc, concentrated toward `|z| = rho`.
pub fn disc_points(plan: &SamplePlan) -> Vec<Complex64> {
    let base = plan.stream(SALT_DISC_POINTS);
    (0..plan.points)
        .into_par_iter()
        .map(|k| {
            let rng = &mut nth(&base, k);
            let r = radial(rng, k, plan.rho);
            Complex64::from_polar(r, angle(rng))
        })
        .collect()
}

pub fn slice_points(plan: &SamplePlan, i: ImaginaryUnit) -> Vec<Quaternion> {
    disc_points(plan).into_iter().map(|z| i.embed(z)).collect()
}

/// Points of the ball in `R^4`, concentrated toward `|q| = rho`.
pub fn ball_points(plan: &SamplePlan) -> Vec<Quaternion> {
    let base = plan.stream(SALT_BALL_POINTS);
    (0..plan.points)
        .into_par_iter()
        .map(|k| {
            let rng = &mut nth(&base, k);
            let r = radial(rng, k, plan.rho);
            sphere_point(rng) * r
        })
        .collect()
}

/// A sampled maximum with the pair that attains it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub witness: [Quaternion; 2],
    pub samples_used: usize,
    pub skipped: usize,
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    index: usize,
    witness: [Quaternion; 2],
    used: usize,
    skipped: usize,
}

impl Best {
    const NONE: Self = Self { value: f64::NEG_INFINITY, index: usize::MAX, witness: [Quaternion::ZERO; 2], used: 0, skipped: 0 };

    fn merge(a: Self, b: Self) -> Self {
        let better = if a.value > b.value || (a.value == b.value && a.index < b.index) { a } else { b };
        Self { used: a.used + b.used, skipped: a.skipped + b.skipped, ..better }
    }
}

/// Parallel maximum of `eval(k)` over `0..n`; ties go to the smallest index,
/// so the result does not depend on scheduling. `None` and NaN count as skipped.
pub fn sup_over<F>(n: usize, eval: F) -> Result<NormEstimate, LipschitzError>
where
    F: Fn(usize) -> Option<(f64, [Quaternion; 2])> + Sync,
{
    let best = (0..n)
        .into_par_iter()
        .map(|k| match eval(k) {
            Some((v, witness)) if !v.is_nan() => Best { value: v, index: k, witness, used: 1, skipped: 0 },
            _ => Best { skipped: 1, ..Best::NONE },
        })
        .reduce(|| Best::NONE, Best::merge);
    if best.used == 0 {
        return Err(LipschitzError::DegeneratePlan);
    }
    Ok(NormEstimate { value: best.value, witness: best.witness, samples_used: best.used, skipped: best.skipped })
}

/// `sup ratio(x, y) / w(|x - y|)` over pairs separated by at least `epsilon / 2`.
pub fn pair_sup<R>(pairs: &[[Quaternion; 2]], w: &Majorant, epsilon: f64, ratio: R) -> Result<NormEstimate, LipschitzError>
where
    R: Fn(Quaternion, Quaternion, f64) -> f64 + Sync,
{
    sup_over(pairs.len(), |k| {
        let [x, y] = pairs[k];
        let d = (x - y).norm();
        if d < 0.5 * epsilon {
            return None;
        }
        let wd = w.value(d.min(DOMAIN_END));
        (wd > 0.0).then(|| (ratio(x, y, wd), [x, y]))
    })
}

/// `sup |f(x) - f(y)| / w(|x - y|)` over pairs in `D_i`.
pub fn slice_norm(f: &SliceSeries, w: &Majorant, i: ImaginaryUnit, plan: &SamplePlan) -> Result<NormEstimate, LipschitzError> {
    plan.validate()?;
    pair_sup(&slice_pairs(plan, i), w, plan.epsilon, |x, y, wd| (f.evaluate(x) - f.evaluate(y)).norm() / wd)
}

/// Norm of the two-majorant space: the square root of
/// `sup |f1(x) - f1(y)|^2 / w1^2 + |f2(x) - f2(y)|^2 / w2^2`.
pub fn component_norm(
    f: &SliceSeries,
    w1: &Majorant,
    w2: &Majorant,
    i: ImaginaryUnit,
    plan: &SamplePlan,
) -> Result<NormEstimate, LipschitzError> {
    plan.validate()?;
    let split = f.split(i);
    let pairs = disc_pairs(plan, plan.rho);
    sup_over(pairs.len(), |k| {
        let [a, b] = pairs[k];
        let d = (a - b).norm();
        if d < 0.5 * plan.epsilon {
            return None;
        }
        let (w1d, w2d) = (w1.value(d.min(DOMAIN_END)), w2.value(d.min(DOMAIN_END)));
        if w1d <= 0.0 || w2d <= 0.0 {
            return None;
        }
        let d1 = (split.f1.evaluate(a) - split.f1.evaluate(b)).norm() / w1d;
        let d2 = (split.f2.evaluate(a) - split.f2.evaluate(b)).norm() / w2d;
        Some((d1.hypot(d2), [i.embed(a), i.embed(b)]))
    })
}

/// `sup |f(p) - f(q)| / w(|p - q|)` over pairs in the ball of radius `rho`.
pub fn global_norm(f: &SliceSeries, w: &Majorant, plan: &SamplePlan) -> Result<NormEstimate, LipschitzError> {
    plan.validate()?;
    pair_sup(&ball_pairs(plan), w, plan.epsilon, |x, y, wd| (f.evaluate(x) - f.evaluate(y)).norm() / wd)
}

fn circle_witness_pairs(plan: &SamplePlan, i: ImaginaryUnit) -> Vec<[Quaternion; 2]> {
    circle_pairs(plan).into_iter().map(|[s, t]| [i.exp(s), i.exp(t)]).collect()
}

/// `sup |f(x) - f(y)| / w(|x - y|)` over pairs on the circle `S_i`.
pub fn boundary_norm(f: &SliceSeries, w: &Majorant, i: ImaginaryUnit, plan: &SamplePlan) -> Result<NormEstimate, LipschitzError> {
    plan.validate()?;
    pair_sup(&circle_witness_pairs(plan, i), w, plan.epsilon, |x, y, wd| (f.evaluate(x) - f.evaluate(y)).norm() / wd)
}

/// Boundary norm of the real function `g(f)` selected by `mode`, e.g. `|f|`.
pub fn boundary_modulus_norm(
    f: &SliceSeries,
    w: &Majorant,
    i: ImaginaryUnit,
    mode: DefectMode,
    plan: &SamplePlan,
) -> Result<NormEstimate, LipschitzError> {
    plan.validate()?;
    pair_sup(&circle_witness_pairs(plan, i), w, plan.epsilon, |x, y, wd| {
        (mode.apply(f.evaluate(x), i) - mode.apply(f.evaluate(y), i)).abs() / wd
    })
}

/// The three seminorms of a holomorphic function on the disc, with their parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seminorms {
    /// `Lambda_w` norm of `|fk|` on the unit circle.
    pub boundary: f64,
    /// `sup (P[|fk|](z) - |fk(z)|) / w(1 - |z|)`
    pub defect: f64,
    /// `sup ||fk(zeta)| - |fk(r zeta)|| / w(1 - r)`
    pub radial: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
}

/// `N1`, `N2`, `N3` of a complex component `fk`.
pub fn seminorms_n(fk: &ComplexSeries, w: &Majorant, plan: &SamplePlan, nodes: usize) -> Result<Seminorms, LipschitzError> {
    plan.validate()?;
    let modulus = |z: Complex64| fk.evaluate(z).norm();
    let e = ImaginaryUnit::E1;

    let circle = circle_pairs(plan);
    let boundary = sup_over(circle.len(), |k| {
        let [s, t] = circle[k];
        let (a, b) = (Complex64::from_polar(1.0, s), Complex64::from_polar(1.0, t));
        let d = (a - b).norm();
        if d < 0.5 * plan.epsilon {
            return None;
        }
        Some(((modulus(a) - modulus(b)).abs() / w.value(d.min(DOMAIN_END)), [e.embed(a), e.embed(b)]))
    })?;

    let rule = CircleRule::new(e, nodes)?;
    let values = rule.sample_points(|p| modulus(e.project(p)));
    let points = disc_points(plan);
    for z in &points {
        rule.check(e.embed(*z))?;
    }
    let defect = sup_over(points.len(), |k| {
        let z = points[k];
        let x = e.embed(z);
        let p = rule.integrate(&values, x).ok()?;
        Some(((p - modulus(z)) / w.value(1.0 - z.norm()), [x, x]))
    })?;

    let angles = plan.points.max(1);
    let radial = sup_over(angles * RADIAL_LEVELS, |k| {
        let t = 2.0 * PI * (k / RADIAL_LEVELS) as f64 / angles as f64;
        let level = k % RADIAL_LEVELS;
        let gap = plan.epsilon.powf(level as f64 / (RADIAL_LEVELS - 1) as f64);
        let zeta = Complex64::from_polar(1.0, t);
        let inner = zeta * (1.0 - gap);
        Some(((modulus(zeta) - modulus(inner)).abs() / w.value(gap), [e.embed(zeta), e.embed(inner)]))
    })?;

    let closed = disc_pairs(plan, 1.0);
    let n3 = sup_over(closed.len(), |k| {
        let [a, b] = closed[k];
        let d = (a - b).norm();
        if d < 0.5 * plan.epsilon {
            return None;
        }
        Some(((modulus(a) - modulus(b)).abs() / w.value(d.min(DOMAIN_END)), [e.embed(a), e.embed(b)]))
    })?;

    let defect_part = defect.value.max(0.0);
    Ok(Seminorms {
        boundary: boundary.value,
        defect: defect.value,
        radial: radial.value,
        n1: boundary.value + defect_part,
        n2: boundary.value + radial.value,
        n3: n3.value,
    })
}

/// Which derivative quantity a derivative ratio measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// `|f'(x)|`
    Full,
    /// `|f'(x) + i f'(x) i|`
    Plus,
    /// `|f'(x) - i f'(x) i|`
    Minus,
}

impl DerivativeMode {
    pub fn apply(self, d: Quaternion, i: ImaginaryUnit) -> f64 {
        let iq = i.as_quaternion();
        match self {
            Self::Full => d.norm(),
            Self::Plus => (d + iq * d * iq).norm(),
            Self::Minus => (d - iq * d * iq).norm(),
        }
    }
}

fn derivative_sup(
    df: &SliceSeries,
    w: &Majorant,
    points: &[Quaternion],
    measure: impl Fn(Quaternion) -> f64 + Sync,
) -> Result<NormEstimate, LipschitzError> {
    sup_over(points.len(), |k| {
        let x = points[k];
        let gap = 1.0 - x.norm();
        let wg = w.value(gap);
        (wg > 0.0).then(|| (measure(df.evaluate(x)) * gap / wg, [x, x]))
    })
}

/// `sup m(f'(x)) (1 - |x|) / w(1 - |x|)` over `x` in `D_i`, `|x| <= rho`.
pub fn derivative_ratio(
    f: &SliceSeries,
    w: &Majorant,
    i: ImaginaryUnit,
    mode: DerivativeMode,
    plan: &SamplePlan,
) -> Result<NormEstimate, LipschitzError> {
    plan.validate()?;
    derivative_sup(&f.cullen_derivative(), w, &slice_points(plan, i), |d| mode.apply(d, i))
}

/// The same functional for `|f'(q)|` over the ball of radius `rho`.
pub fn global_derivative_ratio(f: &SliceSeries, w: &Majorant, plan: &SamplePlan) -> Result<NormEstimate, LipschitzError> {
    plan.validate()?;
    derivative_sup(&f.cullen_derivative(), w, &ball_points(plan), |d| d.norm())
}

/// Maximum of a subharmonic `g` over the closed disc `|y - center| <= radius`
/// of the slice, taken on its boundary circle: `samples` equispaced angles
/// followed by golden-section refinement around the best one.
pub fn disc_max<G: Fn(Quaternion) -> f64>(
    g: G,
    center: Complex64,
    radius: f64,
    i: ImaginaryUnit,
    samples: usize,
) -> f64 {
    let n = samples.max(CIRCLE_SAMPLES);
    let at = |t: f64| g(i.embed(center + Complex64::from_polar(radius, t)));
    let h = 2.0 * PI / n as f64;
    let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
    for k in 0..n {
        let t = k as f64 * h;
        let v = at(t);
        if v > best {
            (best_t, best) = (t, v);
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_t - h, best_t + h);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (at(c), at(d));
    for _ in 0..GOLDEN_STEPS {
        if fc > fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - inv_phi * (b - a);
            fc = at(c);
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + inv_phi * (b - a);
            fd = at(d);
        }
    }
    best.max(fc).max(fd)
}

/// Both sides of the bounded-growth estimates at one point of `D_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    /// `1/2 (1 - |x|) |f' + i f' i| + |f + i f i|` against `M_x`.
    pub plus: (f64, f64),
    /// `1/2 (1 - |x|) |f' - i f' i| + |f - i f i|` against `M_x`.
    pub minus: (f64, f64),
    /// `1/4 (1 - |x|)^2 |f'|^2 + |f|^2` against
    /// `(|x| - 1)(|f1'||f1| + |f2'||f2|) + M_{1,x}^2 + M_{2,x}^2`.
    pub quadratic: (f64, f64),
}

impl GrowthCheck {
    /// Smallest margin of `lhs <= 2 M_x` (both signs) and of the quadratic form.
    pub fn slack(&self) -> f64 {
        (2.0 * self.plus.1 - self.plus.0)
            .min(2.0 * self.minus.1 - self.minus.0)
            .min(self.quadratic.1 - self.quadratic.0)
    }
}

/// Growth estimates at `x` in `D_i`; the suprema over the disc
/// `|y - x| <= 1 - |x|` are taken with at least `plan.points` circle samples.
pub fn bounded_growth_check(f: &SliceSeries, x: Quaternion, i: ImaginaryUnit, plan: &SamplePlan) -> GrowthCheck {
    let iq = i.as_quaternion();
    let (v, d) = f.evaluate_with_derivative(x);
    let gap = 1.0 - x.norm();
    let side = |s: f64| 0.5 * gap * (d + iq * d * iq * s).norm() + (v + iq * v * iq * s).norm();
    let z = i.project(x);
    let m = disc_max(|y| f.evaluate(y).norm(), z, gap, i, plan.points);

    let split = f.split(i);
    let (f1, d1) = split.f1.evaluate_with_derivative(z);
    let (f2, d2) = split.f2.evaluate_with_derivative(z);
    let m1 = disc_max(|y| split.f1.evaluate(i.project(y)).norm(), z, gap, i, plan.points);
    let m2 = disc_max(|y| split.f2.evaluate(i.project(y)).norm(), z, gap, i, plan.points);
    let lhs = 0.25 * gap * gap * d.norm_sqr() + v.norm_sqr();
    let rhs = -gap * (d1.norm() * f1.norm() + d2.norm() * f2.norm()) + m1 * m1 + m2 * m2;
    GrowthCheck { plus: (side(1.0), m), minus: (side(-1.0), m), quadratic: (lhs, rhs) }
}

/// The ball version at `q`: `1/2 (1 - |q|) |f'(q)| + |f(q)|` against the sum of
/// the maxima of `|f|` over the discs of radius `1 - |q|` around `x` and `conj(x)`,
/// `x = q0 + i |vec q|`.
pub fn global_growth_check(f: &SliceSeries, q: Quaternion, i: ImaginaryUnit, plan: &SamplePlan) -> (f64, f64) {
    let (v, d) = f.evaluate_with_derivative(q);
    let gap = 1.0 - q.norm();
    let lhs = 0.5 * gap * d.norm() + v.norm();
    let z = Complex64::new(q.x0, q.vector_norm());
    let g = |y: Quaternion| f.evaluate(y).norm();
    let rhs = disc_max(g, z, gap, i, plan.points) + disc_max(g, z.conj(), gap, i, plan.points);
    (lhs, rhs)
}

/// Reading of `g(x) = 1 - conj(f(x)) * f(x)` in the Schwarz-Pick criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpretation {
    /// `g = 1 - f^c * f` as a series.
    Series,
    /// `g(x) = 1 - conj(f(x)) f(x)` as a quaternion product.
    Pointwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwarzPickReport {
    pub interpretation: Interpretation,
    /// `M = sup |f|` over `D_i`.
    pub m: f64,
    /// `sup |M^2 - conj(f(x)) f(x~)| / ((1 + |x|) w(1 - |x|))`
    pub hypothesis_constant: f64,
    /// `sup M |f'(x)| (1 - |x|) / w(1 - |x|)`
    pub derivative_constant: f64,
    pub hypothesis_witness: Option<Quaternion>,
    pub evaluated: usize,
    pub skipped: usize,
}

impl SchwarzPickReport {
    /// Whether the derivative constant stays below the hypothesis constant.
    pub fn consistent(&self, slack: f64) -> bool {
        self.derivative_constant <= self.hypothesis_constant * (1.0 + slack)
    }
}

/// Evaluates both sides of the Schwarz-Pick criterion on slice points.
/// Points where `f'`, `f` or `g^s` nearly vanish are skipped and counted.
pub fn schwarz_pick_criterion(
    f: &SliceSeries,
    w: &Majorant,
    i: ImaginaryUnit,
    plan: &SamplePlan,
    interpretation: Interpretation,
) -> Result<SchwarzPickReport, LipschitzError> {
    plan.validate()?;
    let m = disc_max(|y| f.evaluate(y).norm(), Complex64::new(0.0, 0.0), 1.0, i, plan.points);
    let g_series = match interpretation {
        Interpretation::Series => Some(SliceSeries::one().sub(&f.symmetrization()?)),
        Interpretation::Pointwise => None,
    };
    let df = f.cullen_derivative();
    let points = slice_points(plan, i);

    struct Acc {
        hyp: f64,
        hyp_at: Option<(usize, Quaternion)>,
        der: f64,
        evaluated: usize,
        skipped: usize,
    }
    let acc = (0..points.len())
        .into_par_iter()
        .map(|k| {
            let x = points[k];
            let skip = Acc { hyp: 0.0, hyp_at: None, der: 0.0, evaluated: 0, skipped: 1 };
            let (fx, dx) = (f.evaluate(x), df.evaluate(x));
            if dx.norm() <= DERIVATIVE_FLOOR || fx.norm() <= ZERO_FLOOR {
                return skip;
            }
            let p = dx.inv() * x * dx;
            // g^c at p; the series g has real coefficients so g^c = g
            let gc = match &g_series {
                Some(g) => g.evaluate(p),
                None => Quaternion::real(1.0 - fx.norm_sqr()),
            };
            if (gc * gc).norm() <= ZERO_FLOOR {
                return skip;
            }
            let t = gc.inv() * p * gc;
            let fc = fx.conj();
            let xt = fc.inv() * t * fc;
            let gap = 1.0 - x.norm();
            let wg = w.value(gap);
            let hyp = (Quaternion::real(m * m) - fc * f.evaluate(xt)).norm() / ((1.0 + x.norm()) * wg);
            let der = m * dx.norm() * gap / wg;
            Acc { hyp, hyp_at: Some((k, x)), der, evaluated: 1, skipped: 0 }
        })
        .reduce(
            || Acc { hyp: 0.0, hyp_at: None, der: 0.0, evaluated: 0, skipped: 0 },
            |a, b| {
                let pick_a = match (a.hyp_at, b.hyp_at) {
                    (Some((ka, _)), Some((kb, _))) => a.hyp > b.hyp || (a.hyp == b.hyp && ka < kb),
                    (Some(_), None) => true,
                    _ => false,
                };
                let (hyp, hyp_at) = if pick_a { (a.hyp, a.hyp_at) } else { (b.hyp, b.hyp_at) };
                Acc {
                    hyp,
                    hyp_at,
                    der: a.der.max(b.der),
                    evaluated: a.evaluated + b.evaluated,
                    skipped: a.skipped + b.skipped,
                }
            },
        );
    Ok(SchwarzPickReport {
        interpretation,
        m,
        hypothesis_constant: acc.hyp,
        derivative_constant: acc.der,
        hypothesis_witness: acc.hyp_at.map(|(_, x)| x),
        evaluated: acc.evaluated,
        skipped: acc.skipped,
    })
}
