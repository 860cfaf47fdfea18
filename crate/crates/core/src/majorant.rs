//! Regular majorants on `[0, 2]` and an empirical certificate for the
//! integral regularity condition
//!
//! `int_0^x w(t)/t dt + x int_x^2 w(t)/t^2 dt <= C w(x)`,  `0 < x < 2`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Right end of the majorant domain (diameter of the unit disc).
pub const DOMAIN_END: f64 = 2.0;

/// Slack allowed when a distance computed in floating point lands just past 2.
const DOMAIN_SLACK: f64 = 1e-12;

/// Successive refinement maxima must agree within this ratio.
pub const STABILITY_RATIO: f64 = 1.05;

/// Gauss-Legendre nodes per quadrature block.
pub const DEFAULT_QUAD_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MajorantError {
    #[error("t = {0} lies outside [0, 2]")]
    DomainError(f64),
    #[error("invalid majorant: {0}")]
    Invalid(String),
    #[error("quadrature did not converge at x = {x}")]
    QuadratureFailure { x: f64 },
    #[error("regularity grid must contain at least one point in (0, 2)")]
    EmptyGrid,
}

/// A modulus of continuity `w: [0, 2] -> [0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MajorantRepr", into = "MajorantRepr")]
pub enum Majorant {
    /// `scale * t^alpha`. Only `alpha <= 1` can be regular, larger exponents
    /// are representable so that they can be rejected by [`check_regular`].
    Power { alpha: f64, scale: f64 },
    Sum(Box<Majorant>, Box<Majorant>),
    /// `factor * base`; a zero factor gives the degenerate zero function.
    Scaled { factor: f64, base: Box<Majorant> },
    /// Piecewise-linear through `(grid[k], values[k])`, `grid` from 0 to 2.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MajorantRepr {
    Power {
        alpha: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Sum {
        terms: (Box<Majorant>, Box<Majorant>),
    },
    Scaled {
        factor: f64,
        base: Box<Majorant>,
    },
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl TryFrom<MajorantRepr> for Majorant {
    type Error = MajorantError;

    fn try_from(r: MajorantRepr) -> Result<Self, Self::Error> {
        let m = match r {
            MajorantRepr::Power { alpha, scale } => Majorant::Power { alpha, scale },
            MajorantRepr::Sum { terms } => Majorant::Sum(terms.0, terms.1),
            MajorantRepr::Scaled { factor, base } => Majorant::Scaled { factor, base },
            MajorantRepr::Tabulated { grid, values } => Majorant::Tabulated { grid, values },
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<Majorant> for MajorantRepr {
    fn from(m: Majorant) -> Self {
        match m {
            Majorant::Power { alpha, scale } => MajorantRepr::Power { alpha, scale },
            Majorant::Sum(a, b) => MajorantRepr::Sum { terms: (a, b) },
            Majorant::Scaled { factor, base } => MajorantRepr::Scaled { factor, base },
            Majorant::Tabulated { grid, values } => MajorantRepr::Tabulated { grid, values },
        }
    }
}

impl Majorant {
    pub fn power(alpha: f64) -> Self {
        Self::power_scaled(alpha, 1.0)
    }

    pub fn power_scaled(alpha: f64, scale: f64) -> Self {
        let m = Majorant::Power { alpha, scale };
        m.validate().expect("power majorant parameters");
        m
    }

    pub fn sum(a: Majorant, b: Majorant) -> Self {
        Majorant::Sum(Box::new(a), Box::new(b))
    }

    pub fn scaled(factor: f64, base: Majorant) -> Self {
        let m = Majorant::Scaled { factor, base: Box::new(base) };
        m.validate().expect("scale factor");
        m
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, MajorantError> {
        let m = Majorant::Tabulated { grid, values };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MajorantError> {
        let bad = |s: String| Err(MajorantError::Invalid(s));
        match self {
            Majorant::Power { alpha, scale } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return bad(format!("power exponent {alpha} must be positive"));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("power scale {scale} must be positive"));
                }
                Ok(())
            }
            Majorant::Sum(a, b) => {
                a.validate()?;
                b.validate()
            }
            Majorant::Scaled { factor, base } => {
                if !(factor.is_finite() && *factor >= 0.0) {
                    return bad(format!("scale factor {factor} must be nonnegative"));
                }
                base.validate()
            }
            Majorant::Tabulated { grid, values } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return bad("tabulated majorant needs matching grid/value lists of length >= 2".into());
                }
                if grid[0] != 0.0 || values[0] != 0.0 {
                    return bad("tabulated majorant must start at (0, 0)".into());
                }
                if (grid[grid.len() - 1] - DOMAIN_END).abs() > DOMAIN_SLACK {
                    return bad("tabulated grid must end at 2".into());
                }
                if grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("tabulated grid must be strictly increasing".into());
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return bad("tabulated values must be finite and nonnegative".into());
                }
                Ok(())
            }
        }
    }

    /// `w(t)` with a domain check.
    pub fn evaluate(&self, t: f64) -> Result<f64, MajorantError> {
        if !(t >= 0.0 && t <= DOMAIN_END + DOMAIN_SLACK) {
            return Err(MajorantError::DomainError(t));
        }
        Ok(self.value(t.min(DOMAIN_END)))
    }

    /// `w(t)` without the domain check; callers guarantee `0 <= t <= 2`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Majorant::Power { alpha, scale } => {
                if t <= 0.0 {
                    0.0
                } else {
                    scale * t.powf(*alpha)
                }
            }
            Majorant::Sum(a, b) => a.value(t) + b.value(t),
            Majorant::Scaled { factor, base } => factor * base.value(t),
            Majorant::Tabulated { grid, values } => {
                let t = t.clamp(0.0, DOMAIN_END);
                let k = grid.partition_point(|&g| g <= t).clamp(1, grid.len() - 1);
                let (g0, g1) = (grid[k - 1], grid[k]);
                let (v0, v1) = (values[k - 1], values[k]);
                v0 + (v1 - v0) * (t - g0) / (g1 - g0)
            }
        }
    }

    /// `w^2` when it has a closed representation.
    pub fn squared(&self) -> Option<Majorant> {
        match self {
            Majorant::Power { alpha, scale } => {
                Some(Majorant::Power { alpha: 2.0 * alpha, scale: scale * scale })
            }
            Majorant::Scaled { factor, base } => base
                .squared()
                .map(|b| Majorant::Scaled { factor: factor * factor, base: Box::new(b) }),
            Majorant::Tabulated { grid, values } => Some(Majorant::Tabulated {
                grid: grid.clone(),
                values: values.iter().map(|v| v * v).collect(),
            }),
            Majorant::Sum(..) => None,
        }
    }

    /// Whether the integrand is smooth in `log t` (quadrature is expected to converge).
    fn is_smooth(&self) -> bool {
        match self {
            Majorant::Power { .. } => true,
            Majorant::Sum(a, b) => a.is_smooth() && b.is_smooth(),
            Majorant::Scaled { base, .. } => base.is_smooth(),
            Majorant::Tabulated { .. } => false,
        }
    }

    /// Points where monotonicity is checked in addition to the refined grid.
    fn knots(&self) -> Vec<f64> {
        match self {
            Majorant::Tabulated { grid, .. } => grid[1..].to_vec(),
            Majorant::Sum(a, b) => {
                let mut k = a.knots();
                k.extend(b.knots());
                k
            }
            Majorant::Scaled { base, .. } => base.knots(),
            Majorant::Power { .. } => Vec::new(),
        }
    }
}

/// `(|a1| w1 + |a2| w2, |a2| w1 + |a1| w2)`, the component majorants of `f a`
/// when `a = a1 + a2 j`.
pub fn combine(a1_norm: f64, a2_norm: f64, w1: &Majorant, w2: &Majorant) -> (Majorant, Majorant) {
    let term = |c: f64, w: &Majorant| Majorant::Scaled { factor: c, base: Box::new(w.clone()) };
    let pair = |c1: f64, c2: f64| {
        if c2 == 0.0 {
            term(c1, w1)
        } else if c1 == 0.0 {
            term(c2, w2)
        } else {
            Majorant::sum(term(c1, w1), term(c2, w2))
        }
    };
    (pair(a1_norm, a2_norm), pair(a2_norm, a1_norm))
}

/// Log-spaced evaluation points `x_min * (2 / x_min)^(k / points)`, `k < points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub x_min: f64,
    pub points: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self { x_min: 1e-6, points: 200 }
    }
}

impl LogGrid {
    pub fn points(&self) -> Vec<f64> {
        let span = (DOMAIN_END / self.x_min).ln();
        (0..self.points)
            .map(|k| self.x_min * (span * k as f64 / self.points as f64).exp())
            .collect()
    }

    /// The grid whose log-span towards zero is doubled, at the same density.
    pub fn doubled(&self) -> Self {
        let half = self.x_min / DOMAIN_END;
        Self { x_min: DOMAIN_END * half * half, points: 2 * self.points }
    }
}

/// Maximum of the regularity ratio over one refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMaximum {
    pub x_min: f64,
    pub max_ratio: f64,
    pub worst_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub is_regular: bool,
    /// Largest observed `(I1(x) + x I2(x)) / w(x)`; infinite when `w` vanishes on the grid.
    pub empirical_c: f64,
    pub worst_x: f64,
    pub grid_size: usize,
    /// `w` increasing and `w(t)/t` non-increasing on the refined grid.
    pub monotone: bool,
    pub levels: Vec<LevelMaximum>,
    pub reason: Option<String>,
}

/// Number of grid doublings used to test stabilization of the constant.
const REFINEMENTS: usize = 2;

const REL_MONO_TOL: f64 = 1e-12;

pub fn check_regular(
    w: &Majorant,
    grid: &LogGrid,
    quad_nodes: usize,
) -> Result<RegularityCertificate, MajorantError> {
    if grid.points == 0 || !(grid.x_min > 0.0 && grid.x_min < DOMAIN_END) {
        return Err(MajorantError::EmptyGrid);
    }
    let nodes = NonZeroUsize::new(quad_nodes.max(2)).expect("nonzero");
    let rule = GaussLegendre::new(nodes);
    let smooth = w.is_smooth();

    let mut grids = vec![*grid];
    for _ in 0..REFINEMENTS {
        grids.push(grids.last().expect("nonempty").doubled());
    }

    let mut check_points: Vec<f64> = Vec::new();
    let mut levels = Vec::with_capacity(grids.len());
    for g in &grids {
        let xs = g.points();
        let mut best = LevelMaximum { x_min: g.x_min, max_ratio: 0.0, worst_x: xs[0] };
        for &x in &xs {
            let wx = w.value(x);
            let i1 = integral_small(w, x, &rule).ok_or(MajorantError::QuadratureFailure { x });
            let i1 = match i1 {
                Ok(v) => v,
                Err(e) if smooth => return Err(e),
                Err(_) => f64::INFINITY,
            };
            let i2 = integral_large(w, x, &rule);
            let ratio = if wx > 0.0 { (i1 + x * i2) / wx } else { f64::INFINITY };
            if ratio > best.max_ratio || ratio.is_nan() {
                best.max_ratio = ratio;
                best.worst_x = x;
            }
        }
        check_points.extend_from_slice(&xs);
        levels.push(best);
    }

    // geometric midpoints refine the union of all levels
    check_points.push(DOMAIN_END);
    check_points.extend(w.knots());
    check_points.sort_by(f64::total_cmp);
    check_points.dedup();
    let mids: Vec<f64> = check_points.windows(2).map(|p| (p[0] * p[1]).sqrt()).collect();
    check_points.extend(mids);
    check_points.sort_by(f64::total_cmp);
    let monotone = is_monotone(w, &check_points);

    let top = levels
        .iter()
        .copied()
        .fold(levels[0], |a, b| if b.max_ratio > a.max_ratio { b } else { a });
    let stable = levels
        .windows(2)
        .all(|p| p[1].max_ratio.is_finite() && p[1].max_ratio < STABILITY_RATIO * p[0].max_ratio);

    let reason = if !monotone {
        Some("w is not increasing or w(t)/t is not non-increasing on the grid".to_string())
    } else if !stable {
        Some(format!(
            "regularity constant does not stabilize under grid refinement: {:?}",
            levels.iter().map(|l| l.max_ratio).collect::<Vec<_>>()
        ))
    } else {
        None
    };

    Ok(RegularityCertificate {
        is_regular: monotone && stable,
        empirical_c: top.max_ratio,
        worst_x: top.worst_x,
        grid_size: grids.iter().map(|g| g.points).sum(),
        monotone,
        levels,
        reason,
    })
}

fn is_monotone(w: &Majorant, ts: &[f64]) -> bool {
    let vals: Vec<f64> = ts.iter().map(|&t| w.value(t)).collect();
    if vals.iter().any(|v| !(*v > 0.0)) {
        return false;
    }
    ts.windows(2).zip(vals.windows(2)).all(|(t, v)| {
        let increasing = v[1] >= v[0] * (1.0 - REL_MONO_TOL);
        let quotient_down = v[1] / t[1] <= (v[0] / t[0]) * (1.0 + REL_MONO_TOL);
        increasing && quotient_down
    })
}

const LN2: f64 = std::f64::consts::LN_2;
const MAX_BLOCKS: usize = 1000;

/// `int_0^x w(t)/t dt = int_{-inf}^{ln x} w(e^u) du`, summed over dyadic blocks
/// in `u` with geometric tail extrapolation.
fn integral_small(w: &Majorant, x: f64, rule: &GaussLegendre) -> Option<f64> {
    let top = x.ln();
    let f = |u: f64| w.value(u.exp());
    let mut sum = 0.0;
    let mut prev_block = f64::NAN;
    let mut prev_rate = f64::NAN;
    for k in 0..MAX_BLOCKS {
        let b = top - k as f64 * LN2;
        let a = b - LN2;
        if a.exp() == 0.0 {
            break;
        }
        let block = rule.integrate(a, b, f);
        sum += block;
        if block == 0.0 {
            return Some(sum);
        }
        let rate = block / prev_block;
        if k >= 2 && rate < 1.0 {
            let tail = block * rate / (1.0 - rate);
            if tail <= 1e-15 * sum {
                return Some(sum + tail);
            }
            if k >= 8 && (rate - prev_rate).abs() <= 1e-10 * rate {
                return Some(sum + tail);
            }
        }
        prev_rate = rate;
        prev_block = block;
    }
    None
}

/// `int_x^2 w(t)/t^2 dt = int_{ln x}^{ln 2} w(e^u) e^{-u} du`.
fn integral_large(w: &Majorant, x: f64, rule: &GaussLegendre) -> f64 {
    let (lo, hi) = (x.ln(), DOMAIN_END.ln());
    if hi <= lo {
        return 0.0;
    }
    let blocks = ((hi - lo) / LN2).ceil().max(1.0) as usize;
    let width = (hi - lo) / blocks as f64;
    (0..blocks)
        .map(|k| {
            let a = lo + k as f64 * width;
            rule.integrate(a, a + width, |u: f64| w.value(u.exp()) * (-u).exp())
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form of the regularity ratio for `t^alpha`:
    /// `1/alpha + (1 - (x/2)^(1-alpha)) / (1 - alpha)`, supremum `1/alpha + 1/(1-alpha)`.
    fn power_ratio(alpha: f64, x: f64) -> f64 {
        1.0 / alpha + (1.0 - (x / 2.0).powf(1.0 - alpha)) / (1.0 - alpha)
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(Majorant::power(0.5).evaluate(0.25).unwrap(), 0.5);
        for w in [Majorant::power(0.3), Majorant::tabulated(vec![0.0, 2.0], vec![0.0, 1.0]).unwrap()] {
            assert_eq!(w.evaluate(0.0).unwrap(), 0.0);
        }
        let s = Majorant::sum(Majorant::power(0.5), Majorant::power(1.0 / 3.0));
        assert_eq!(s.evaluate(1.0).unwrap(), 2.0);
        assert_eq!(Majorant::power(0.5).evaluate(2.5), Err(MajorantError::DomainError(2.5)));
        assert!(Majorant::power(0.5).evaluate(-0.1).is_err());
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let w = Majorant::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 1.5]).unwrap();
        assert_eq!(w.value(0.5), 0.5);
        assert_eq!(w.value(1.5), 1.25);
        assert_eq!(w.value(2.0), 1.5);
        assert!(Majorant::tabulated(vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn serde_shape() {
        let w = Majorant::sum(Majorant::power(0.5), Majorant::scaled(2.0, Majorant::power(0.25)));
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<Majorant>(&s).unwrap(), w);
        let p: Majorant = serde_json::from_str(r#"{"kind":"power","alpha":0.5}"#).unwrap();
        assert_eq!(p, Majorant::power(0.5));
        assert!(serde_json::from_str::<Majorant>(r#"{"kind":"power","alpha":-1}"#).is_err());
    }

    #[test]
    fn square_root_is_regular_with_constant_four() {
        let cert = check_regular(&Majorant::power(0.5), &LogGrid::default(), 16).unwrap();
        assert!(cert.is_regular, "{cert:?}");
        assert!(cert.empirical_c <= 4.1 && cert.empirical_c > 3.9, "{}", cert.empirical_c);
        let x = cert.worst_x;
        assert!((cert.empirical_c - power_ratio(0.5, x)).abs() < 1e-10);
    }

    #[test]
    fn powers_match_closed_form_constant() {
        for alpha in [0.25, 0.5, 0.75] {
            let cert = check_regular(&Majorant::power(alpha), &LogGrid::default(), 16).unwrap();
            let exact = 1.0 / alpha + 1.0 / (1.0 - alpha);
            assert!(cert.is_regular);
            assert!((cert.empirical_c / exact - 1.0).abs() < 0.05, "alpha {alpha}: {}", cert.empirical_c);
            assert!((cert.empirical_c - power_ratio(alpha, cert.worst_x)).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_majorant_diverges_logarithmically() {
        let cert = check_regular(&Majorant::power(1.0), &LogGrid::default(), 16).unwrap();
        assert!(cert.monotone);
        assert!(!cert.is_regular);
        for level in &cert.levels {
            // ratio at x is 1 + ln(2/x)
            let expected = 1.0 + (2.0 / level.x_min).ln();
            assert!((level.max_ratio - expected).abs() < 1e-9 * expected);
            assert!(level.max_ratio >= 0.9 * (2.0 / level.x_min).ln());
        }
    }

    #[test]
    fn square_is_rejected_by_monotonicity() {
        let cert = check_regular(&Majorant::power(2.0), &LogGrid::default(), 16).unwrap();
        assert!(!cert.monotone);
        assert!(!cert.is_regular);
    }

    #[test]
    fn sums_and_squares_of_small_powers_are_regular() {
        let s = Majorant::sum(Majorant::power(0.5), Majorant::power(0.25));
        assert!(check_regular(&s, &LogGrid::default(), 16).unwrap().is_regular);
        let w = Majorant::power(0.4);
        let w2 = w.squared().unwrap();
        assert!(check_regular(&w, &LogGrid::default(), 16).unwrap().is_regular);
        assert!(check_regular(&w2, &LogGrid::default(), 16).unwrap().is_regular);
        assert!(Majorant::sum(w.clone(), w).squared().is_none());
    }

    #[test]
    fn tabulated_square_root_is_regular() {
        let grid: Vec<f64> = std::iter::once(0.0)
            .chain((0..=1200).map(|k| 2.0 * (1e-30f64).powf(1.0 - k as f64 / 1200.0)))
            .collect();
        let values = grid.iter().map(|t| t.sqrt()).collect();
        let w = Majorant::tabulated(grid, values).unwrap();
        let cert = check_regular(&w, &LogGrid::default(), 16).unwrap();
        assert!(cert.is_regular, "{cert:?}");
        assert!(cert.empirical_c < 4.2, "{cert:?}");

        // linear below its first knot, so the constant grows once the grid reaches past it
        let coarse = Majorant::tabulated(vec![0.0, 1e-9, 2.0], vec![0.0, 1e-9f64.sqrt(), 2f64.sqrt()]).unwrap();
        assert!(!check_regular(&coarse, &LogGrid::default(), 16).unwrap().is_regular);
    }

    #[test]
    fn combine_examples() {
        let (w1, w2) = (Majorant::power(0.5), Majorant::power(0.25));
        let (c1, c2) = combine(3.0, 0.0, &w1, &w2);
        assert_eq!(c1.value(0.7), 3.0 * w1.value(0.7));
        assert_eq!(c2.value(0.7), 3.0 * w2.value(0.7));
        let (c1, c2) = combine(1.0, 1.0, &w1, &w1);
        assert_eq!(c1.value(0.3), 2.0 * w1.value(0.3));
        assert_eq!(c2.value(0.3), 2.0 * w1.value(0.3));
        let (c1, c2) = combine(0.5, 2.0, &w1, &w2);
        let t = 1.3;
        assert_eq!(c1.value(t), 0.5 * w1.value(t) + 2.0 * w2.value(t));
        assert_eq!(c2.value(t), 2.0 * w1.value(t) + 0.5 * w2.value(t));
    }
}
