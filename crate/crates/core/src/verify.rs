//! Verification suites. Each suite runs one family of characterizations of
//! Lipschitz-type spaces over a corpus of polynomials and records empirical
//! constants, witnesses and a pass flag.
//!
//! Equivalences with unspecified constants are checked as two-sided ratio
//! windows `[1/K, K]`; explicit constants are checked against their values.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{self, IoError};
use crate::lipschitz::{
    self, ball_points, bounded_growth_check, disc_pairs, disc_points, global_growth_check, pair_sup, seminorms_n,
    slice_norm, slice_pairs, slice_points, sup_over, DerivativeMode, Interpretation, LipschitzError, NormEstimate,
    SamplePlan,
};
use crate::majorant::{check_regular, combine, LogGrid, Majorant, MajorantError, DEFAULT_QUAD_NODES, DOMAIN_END};
use crate::poisson::{
    self, component_modulus, rotation_equivariance_residual, star_kernel_bound, weighted_sum, CircleRule, Component,
    DefectMode, PoissonError, SliceBoundary,
};
use crate::quaternion::{rotate_unit, ImaginaryUnit, Quaternion, QuaternionError};
use crate::series::{ComplexSeries, SeriesError, SliceSeries};

const SALT_CORPUS: u64 = 0xc0;
const SALT_UNITS: u64 = 0xc1;
const SALT_ROTORS: u64 = 0xc2;

/// Angles of the grid on which the cone condition is tested.
const CONE_ANGLES: usize = 720;

/// Points per function for the pointwise growth contracts.
const GROWTH_POINTS: usize = 100;

/// Random configurations per function for the star-kernel bound.
const KERNEL_CONFIGS: usize = 50;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("corpus member `{0}` is not intrinsic")]
    NotIntrinsic(String),
    #[error(transparent)]
    Lipschitz(#[from] LipschitzError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Quaternion(#[from] QuaternionError),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMember {
    pub name: String,
    pub series: SliceSeries,
}

/// Named test functions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    members: Vec<CorpusMember>,
}

impl Corpus {
    pub fn new(members: Vec<CorpusMember>) -> Self {
        Self { members }
    }

    /// Constants, `q`, `q^2`, `1 + q e1 + q^2 e2 + q^3 e3`, `e1 + q e2`, the
    /// exponential truncated at degree 12 and `random` seeded degree-8 members.
    pub fn builtin(seed: u64, random: usize) -> Self {
        let q = Quaternion::new;
        let mut members = vec![
            member("constant_real", SliceSeries::constant(Quaternion::real(0.5))),
            member("constant_quaternion", SliceSeries::constant(q(0.3, 0.4, -0.2, 0.1))),
            member("identity", SliceSeries::identity()),
            member("square", SliceSeries::from_real(&[0.0, 0.0, 1.0]).expect("finite")),
            member(
                "mixed_cubic",
                SliceSeries::new(vec![Quaternion::ONE, Quaternion::E1, Quaternion::E2, Quaternion::E3]).expect("finite"),
            ),
            member("imaginary_linear", SliceSeries::new(vec![Quaternion::E1, Quaternion::E2]).expect("finite")),
            member("exp_12", exp_series(12)),
        ];
        let base = ChaCha8Rng::seed_from_u64(seed ^ SALT_CORPUS.rotate_left(40));
        for k in 0..random {
            let mut rng = base.clone();
            rng.set_stream(k as u64);
            let coeffs = (0..=8)
                .map(|_| {
                    let mut c = || 2.0 * rng.random::<f64>() - 1.0;
                    q(c(), c(), c(), c())
                })
                .collect();
            members.push(member(&format!("random_{k}"), SliceSeries::new(coeffs).expect("finite")));
        }
        Self { members }
    }

    pub fn members(&self) -> &[CorpusMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members with real coefficients.
    pub fn intrinsic(&self) -> Self {
        Self { members: self.members.iter().filter(|m| m.series.is_intrinsic(0.0)).cloned().collect() }
    }
}

fn member(name: &str, series: SliceSeries) -> CorpusMember {
    CorpusMember { name: name.to_owned(), series }
}

/// `sum_{n <= degree} q^n / n!`
pub fn exp_series(degree: usize) -> SliceSeries {
    let mut c = Vec::with_capacity(degree + 1);
    let mut term = 1.0;
    for n in 0..=degree {
        if n > 0 {
            term /= n as f64;
        }
        c.push(term);
    }
    SliceSeries::from_real(&c).expect("finite")
}

/// `sum_{1 <= n <= degree} q^n / n`, whose limit is not Lipschitz.
pub fn log_series(degree: usize) -> SliceSeries {
    let c: Vec<f64> = (0..=degree).map(|n| if n == 0 { 0.0 } else { 1.0 / n as f64 }).collect();
    SliceSeries::from_real(&c).expect("finite")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    InclusionChain,
    AlgebraicClosure,
    IntrinsicInvariance,
    SliceIndependence,
    ModulusMembership,
    NormEquivalences,
    DerivativeCharacterizations,
    PoissonProperties,
    PoissonCharacterization,
    ConeCorollary,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::InclusionChain,
        Suite::AlgebraicClosure,
        Suite::IntrinsicInvariance,
        Suite::SliceIndependence,
        Suite::ModulusMembership,
        Suite::NormEquivalences,
        Suite::DerivativeCharacterizations,
        Suite::PoissonProperties,
        Suite::PoissonCharacterization,
        Suite::ConeCorollary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::InclusionChain => "inclusion_chain",
            Suite::AlgebraicClosure => "algebraic_closure",
            Suite::IntrinsicInvariance => "intrinsic_invariance",
            Suite::SliceIndependence => "slice_independence",
            Suite::ModulusMembership => "modulus_membership",
            Suite::NormEquivalences => "norm_equivalences",
            Suite::DerivativeCharacterizations => "derivative_characterizations",
            Suite::PoissonProperties => "poisson_properties",
            Suite::PoissonCharacterization => "poisson_characterization",
            Suite::ConeCorollary => "cone_corollary",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// Acceptance tolerances shared by the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Ratio window `K` for equivalences with unspecified constants.
    pub window: f64,
    /// Relative slack on `global <= 6 C3`.
    pub chain_slack: f64,
    /// Relative slack on the factor 2 between slices.
    pub sandwich_slack: f64,
    /// Relative agreement of norms under paired sampling.
    pub paired: f64,
    /// Relative slack for inequalities that hold exactly before rounding.
    pub rounding: f64,
    /// Absolute slack for quadrature-based inequalities.
    pub inequality: f64,
    /// Allowed growth of a derivative ratio when the radius is refined.
    pub stability: f64,
    /// Relative slack on `global derivative ratio <= 2 slice ratio`.
    pub derivative_slack: f64,
    /// Factor applied to the defect constant in the cone estimate.
    pub cone_factor: f64,
    /// Functionals below this are treated as zero.
    pub floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            window: 20.0,
            chain_slack: 0.05,
            sandwich_slack: 0.1,
            paired: 1e-10,
            rounding: 1e-9,
            inequality: 1e-8,
            stability: 1.05,
            derivative_slack: 0.05,
            cone_factor: 2.0,
            floor: 1e-6,
        }
    }
}

impl Tolerances {
    fn table(&self, keys: &[&str]) -> BTreeMap<String, f64> {
        let all = [
            ("window", self.window),
            ("chain_slack", self.chain_slack),
            ("sandwich_slack", self.sandwich_slack),
            ("paired", self.paired),
            ("rounding", self.rounding),
            ("inequality", self.inequality),
            ("stability", self.stability),
            ("derivative_slack", self.derivative_slack),
            ("cone_factor", self.cone_factor),
            ("floor", self.floor),
        ];
        all.into_iter().filter(|(k, _)| keys.contains(k)).map(|(k, v)| (k.to_owned(), v)).collect()
    }

    /// `a` and `b` within a factor `K` of each other; both negligible passes,
    /// exactly one negligible fails.
    fn within_window(&self, a: f64, b: f64) -> bool {
        match (a > self.floor, b > self.floor) {
            (false, false) => a.is_finite() && b.is_finite(),
            (true, true) => a <= self.window * b && b <= self.window * a,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSource {
    Builtin,
    File(PathBuf),
}

/// Everything a verification run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub corpus: CorpusSource,
    /// Seeded random members added to the built-in corpus.
    pub random_members: usize,
    pub omega: Majorant,
    pub omega1: Majorant,
    pub omega2: Majorant,
    /// The slice `i`.
    pub slice: ImaginaryUnit,
    /// The second slice `k`.
    pub other_slice: ImaginaryUnit,
    pub random_slice_pairs: usize,
    /// Right factor `a` in the closure suite.
    pub scalar: Quaternion,
    pub pairs: usize,
    pub points: usize,
    pub epsilon: f64,
    pub rho: f64,
    pub nodes: usize,
    pub suites: Vec<Suite>,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        let plan = SamplePlan::default();
        Self {
            seed: plan.seed,
            corpus: CorpusSource::Builtin,
            random_members: 2,
            omega: Majorant::power(0.5),
            omega1: Majorant::power(0.5),
            omega2: Majorant::power(0.5),
            slice: ImaginaryUnit::E1,
            other_slice: ImaginaryUnit::E2,
            random_slice_pairs: 5,
            scalar: Quaternion::new(0.5, 0.5, 0.5, 0.5),
            pairs: plan.pairs,
            points: plan.points,
            epsilon: plan.epsilon,
            rho: plan.rho,
            nodes: poisson::DEFAULT_NODES,
            suites: Suite::ALL.to_vec(),
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn plan(&self) -> SamplePlan {
        SamplePlan { pairs: self.pairs, points: self.points, epsilon: self.epsilon, rho: self.rho, seed: self.seed }
    }

    pub fn load_corpus(&self) -> Result<Corpus, IoError> {
        match &self.corpus {
            CorpusSource::Builtin => Ok(Corpus::builtin(self.seed, self.random_members)),
            CorpusSource::File(path) => io::load_function_spec(path),
        }
    }
}

/// Per-function outcome of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub function: String,
    pub pass: bool,
    /// Key of the headline constant.
    pub main: String,
    pub constants: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, bool>,
    pub witnesses: BTreeMap<String, Vec<Quaternion>>,
    pub samples: usize,
    pub skipped: usize,
    pub notes: Vec<String>,
}

impl FunctionRecord {
    fn new(function: &str, main: &str) -> Self {
        Self {
            function: function.to_owned(),
            pass: true,
            main: main.to_owned(),
            constants: BTreeMap::new(),
            checks: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            samples: 0,
            skipped: 0,
            notes: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, v: f64) {
        self.constants.insert(key.to_owned(), v);
    }

    fn check(&mut self, key: &str, ok: bool) {
        self.checks.insert(key.to_owned(), ok);
        self.pass &= ok;
    }

    fn estimate(&mut self, key: &str, e: &NormEstimate) {
        self.set(key, e.value);
        self.witnesses.insert(key.to_owned(), e.witness.to_vec());
        self.samples += e.samples_used;
        self.skipped += e.skipped;
    }

    fn failed(function: &str, err: &VerifyError) -> Self {
        let mut r = Self::new(function, "");
        r.notes.push(format!("error: {err}"));
        r.check("evaluated", false);
        r
    }

    pub fn main_value(&self) -> Option<f64> {
        self.constants.get(&self.main).copied()
    }

    pub fn main_witness(&self) -> Option<&[Quaternion]> {
        self.witnesses.get(&self.main).or_else(|| self.witnesses.values().next()).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub seed: u64,
    pub pass: bool,
    pub tolerances: BTreeMap<String, f64>,
    pub records: Vec<FunctionRecord>,
    /// Informational observations that do not affect `pass`.
    pub flags: Vec<String>,
    pub error: Option<String>,
}

impl VerificationReport {
    fn new(suite: Suite, cfg: &RunConfig, keys: &[&str], records: Vec<FunctionRecord>, flags: Vec<String>) -> Self {
        let pass = records.iter().all(|r| r.pass);
        Self { suite, seed: cfg.seed, pass, tolerances: cfg.tolerances.table(keys), records, flags, error: None }
    }

    fn failed(suite: Suite, cfg: &RunConfig, err: &VerifyError) -> Self {
        Self {
            suite,
            seed: cfg.seed,
            pass: false,
            tolerances: BTreeMap::new(),
            records: Vec::new(),
            flags: Vec::new(),
            error: Some(err.to_string()),
        }
    }
}

/// Runs `per` on every member in parallel, keeping corpus order; a member
/// error becomes a failing record instead of aborting the suite.
fn per_member<F>(corpus: &Corpus, per: F) -> Vec<FunctionRecord>
where
    F: Fn(&CorpusMember) -> Result<FunctionRecord, VerifyError> + Sync,
{
    corpus
        .members
        .par_iter()
        .map(|m| per(m).unwrap_or_else(|e| FunctionRecord::failed(&m.name, &e)))
        .collect()
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn quaternion_pairs(pairs: &[[Complex64; 2]], i: ImaginaryUnit) -> Vec<[Quaternion; 2]> {
    pairs.iter().map(|[a, b]| [i.embed(*a), i.embed(*b)]).collect()
}

/// Maximum of `|F(x) - F(y)| / w(|x - y|)` over complex pairs.
fn component_sup(
    fk: &ComplexSeries,
    w: &Majorant,
    pairs: &[[Complex64; 2]],
    i: ImaginaryUnit,
    epsilon: f64,
) -> Result<NormEstimate, LipschitzError> {
    sup_over(pairs.len(), |k| {
        let [a, b] = pairs[k];
        let d = (a - b).norm();
        let wd = w.value(d.min(DOMAIN_END));
        (d >= 0.5 * epsilon && wd > 0.0).then(|| ((fk.evaluate(a) - fk.evaluate(b)).norm() / wd, [i.embed(a), i.embed(b)]))
    })
}

/// Inclusion chain `iL(w1, w2) in GL(w1 + w2) in iL(w1 + w2)` with the explicit
/// constant `global <= 6 C3`, `C3 = max(C1, C2)`. The reported factor is `global / C3`.
pub fn verify_inclusion_chain(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let i = cfg.slice;
    let sum = Majorant::sum(cfg.omega1.clone(), cfg.omega2.clone());
    let pairs = disc_pairs(&plan, plan.rho);
    let on_slice = quaternion_pairs(&pairs, i);
    let mut all = lipschitz::ball_pairs(&plan);
    all.extend_from_slice(&on_slice);

    let records = per_member(corpus, |m| {
        let f = &m.series;
        let split = f.split(i);
        let mut r = FunctionRecord::new(&m.name, "factor");
        let c1 = component_sup(&split.f1, &cfg.omega1, &pairs, i, plan.epsilon)?;
        let c2 = component_sup(&split.f2, &cfg.omega2, &pairs, i, plan.epsilon)?;
        let diff = |x: Quaternion, y: Quaternion, wd: f64| (f.evaluate(x) - f.evaluate(y)).norm() / wd;
        let slice_sum = pair_sup(&on_slice, &sum, plan.epsilon, diff)?;
        let global = pair_sup(&all, &sum, plan.epsilon, diff)?;
        let c3 = c1.value.max(c2.value);
        r.estimate("c1", &c1);
        r.estimate("c2", &c2);
        r.set("c3", c3);
        r.estimate("slice_sum", &slice_sum);
        r.estimate("global", &global);
        r.set("factor", ratio_or_zero(global.value, c3));
        r.set("factor_over_six", ratio_or_zero(global.value, 6.0 * c3));
        r.check("global_within_6c3", global.value <= 6.0 * c3 * (1.0 + tol.chain_slack) + tol.floor * 1e-6);
        r.check("slice_within_global", slice_sum.value <= global.value * (1.0 + tol.rounding));
        r.check("slice_within_c3", slice_sum.value <= c3 * (1.0 + tol.rounding) + 1e-300);
        Ok(r)
    });
    Ok(VerificationReport::new(
        Suite::InclusionChain,
        cfg,
        &["chain_slack", "rounding", "floor"],
        records,
        Vec::new(),
    ))
}

/// Right linearity: `fa + g` with `g` the next member, and the component
/// majorants of `fa` from `combine`.
pub fn verify_algebraic_closure(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let i = cfg.slice;
    let a = cfg.scalar;
    let (a1, a2) = crate::series::split_value(a, i, crate::quaternion::orthogonal_unit(i));
    let (m1, m2) = combine(a1.norm(), a2.norm(), &cfg.omega1, &cfg.omega2);
    let pairs = disc_pairs(&plan, plan.rho);
    let on_slice = quaternion_pairs(&pairs, i);
    let n = corpus.len();

    let records = per_member(corpus, |m| {
        let idx = corpus.members.iter().position(|x| x.name == m.name).unwrap_or(0);
        let g = &corpus.members[(idx + 1) % n].series;
        let f = &m.series;
        let fa = f.mul_right(a);
        let h = fa.add(g);
        let mut r = FunctionRecord::new(&m.name, "closure_ratio");
        r.notes.push(format!("g = {}", corpus.members[(idx + 1) % n].name));

        let norm_of = |s: &SliceSeries| {
            pair_sup(&on_slice, &cfg.omega, plan.epsilon, |x, y, wd| (s.evaluate(x) - s.evaluate(y)).norm() / wd)
        };
        let (nf, ng, nh) = (norm_of(f)?, norm_of(g)?, norm_of(&h)?);
        r.estimate("norm_f", &nf);
        r.estimate("norm_g", &ng);
        r.estimate("norm_h", &nh);
        let bound = a.norm() * nf.value + ng.value;
        r.set("closure_ratio", ratio_or_zero(nh.value, bound));
        let violations = on_slice
            .par_iter()
            .filter(|[x, y]| {
                let dh = (h.evaluate(*x) - h.evaluate(*y)).norm();
                let df = (f.evaluate(*x) - f.evaluate(*y)).norm();
                let dg = (g.evaluate(*x) - g.evaluate(*y)).norm();
                dh > (a.norm() * df + dg) * (1.0 + tol.rounding) + 1e-15
            })
            .count();
        r.set("pair_violations", violations as f64);
        r.check("sum_closure_pairwise", violations == 0);
        r.check("sum_closure_norm", nh.value <= bound * (1.0 + tol.rounding) + 1e-15);

        let sf = f.split(i);
        let sfa = fa.split(i);
        let c1 = component_sup(&sf.f1, &cfg.omega1, &pairs, i, plan.epsilon)?;
        let c2 = component_sup(&sf.f2, &cfg.omega2, &pairs, i, plan.epsilon)?;
        let c = c1.value.max(c2.value);
        r.set("component_constant", c);
        for (key, fk, wk) in [("fa_first", &sfa.f1, &m1), ("fa_second", &sfa.f2, &m2)] {
            match component_sup(fk, wk, &pairs, i, plan.epsilon) {
                Ok(e) => {
                    r.estimate(key, &e);
                    r.check(&format!("{key}_within_combined"), e.value <= c * (1.0 + tol.rounding) + 1e-12);
                }
                // a vanishing combined majorant: the component itself is zero
                Err(LipschitzError::DegeneratePlan) => r.set(key, 0.0),
                Err(e) => return Err(e.into()),
            }
        }
        Ok(r)
    });
    Ok(VerificationReport::new(Suite::AlgebraicClosure, cfg, &["rounding"], records, Vec::new()))
}

/// For intrinsic members, slice norms agree across slices under paired sampling
/// and the two-majorant norm reduces to the slice norm.
pub fn verify_intrinsic_invariance(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    if let Some(m) = corpus.members.iter().find(|m| !m.series.is_intrinsic(0.0)) {
        return Err(VerifyError::NotIntrinsic(m.name.clone()));
    }
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let (i, k) = (cfg.slice, cfg.other_slice);
    let records = per_member(corpus, |m| {
        let f = &m.series;
        let mut r = FunctionRecord::new(&m.name, "relative_difference");
        let ni = slice_norm(f, &cfg.omega, i, &plan)?;
        let nk = slice_norm(f, &cfg.omega, k, &plan)?;
        r.estimate("norm_i", &ni);
        r.estimate("norm_k", &nk);
        let rel = (ni.value - nk.value).abs() / ni.value.max(1.0);
        r.set("relative_difference", rel);
        r.check("slices_agree", rel <= tol.paired);
        let two = lipschitz::component_norm(f, &cfg.omega1, &cfg.omega2, i, &plan)?;
        let one = slice_norm(f, &cfg.omega1, i, &plan)?;
        r.estimate("component_norm", &two);
        r.estimate("norm_i_omega1", &one);
        let rel2 = (two.value - one.value).abs() / one.value.max(1.0);
        r.set("component_difference", rel2);
        r.check("second_component_vanishes", rel2 <= tol.paired);
        Ok(r)
    });
    Ok(VerificationReport::new(Suite::IntrinsicInvariance, cfg, &["paired"], records, Vec::new()))
}

fn random_unit(rng: &mut ChaCha8Rng) -> ImaginaryUnit {
    loop {
        let v: [f64; 3] = [0, 1, 2].map(|_| 2.0 * rng.random::<f64>() - 1.0);
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 > 1e-4 && n2 <= 1.0 {
            return ImaginaryUnit::normalized(v[0], v[1], v[2]).expect("nonzero");
        }
    }
}

/// `(slice, other_slice)` followed by seeded random pairs of units.
pub fn slice_unit_pairs(cfg: &RunConfig) -> Vec<(ImaginaryUnit, ImaginaryUnit)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ SALT_UNITS.rotate_left(40));
    let mut out = vec![(cfg.slice, cfg.other_slice)];
    for _ in 0..cfg.random_slice_pairs {
        let a = random_unit(&mut rng);
        let b = random_unit(&mut rng);
        out.push((a, b));
    }
    out
}

/// `|f|_i <= 2 |f|_k <= 4 |f|_i` as the window `[1/(2(1+d)), 2(1+d)]`.
pub fn verify_slice_independence(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let units = slice_unit_pairs(cfg);
    let bound = 2.0 * (1.0 + tol.sandwich_slack);
    let records = per_member(corpus, |m| {
        let f = &m.series;
        let intrinsic = f.is_intrinsic(0.0);
        let mut r = FunctionRecord::new(&m.name, "worst_ratio");
        let (mut lo, mut hi, mut worst) = (f64::INFINITY, 0.0f64, 1.0f64);
        let mut in_window = true;
        let mut paired = true;
        for (n, (u, v)) in units.iter().enumerate() {
            let a = slice_norm(f, &cfg.omega, *u, &plan)?;
            let b = slice_norm(f, &cfg.omega, *v, &plan)?;
            r.samples += a.samples_used + b.samples_used;
            match (a.value > tol.floor, b.value > tol.floor) {
                (false, false) => {}
                (true, true) => {
                    let q = a.value / b.value;
                    lo = lo.min(q);
                    hi = hi.max(q);
                    worst = worst.max(q).max(1.0 / q);
                    in_window &= q <= bound && q >= 1.0 / bound;
                    if intrinsic {
                        paired &= (q - 1.0).abs() <= tol.paired;
                    }
                    if q == hi {
                        r.witnesses.insert(format!("pair_{n}"), vec![u.as_quaternion(), v.as_quaternion()]);
                    }
                }
                _ => in_window = false,
            }
        }
        if lo.is_finite() {
            r.set("min_ratio", lo);
            r.set("max_ratio", hi);
        }
        r.set("worst_ratio", worst);
        r.check("factor_two_window", in_window);
        if intrinsic {
            r.check("intrinsic_ratio_one", paired);
        }
        Ok(r)
    });
    Ok(VerificationReport::new(
        Suite::SliceIndependence,
        cfg,
        &["sandwich_slack", "paired", "floor"],
        records,
        Vec::new(),
    ))
}

/// `|f|` and the component moduli `|f1| = |f - i f i| / 2`, `|f2| = |f + i f i| / 2`
/// change no faster than `f`, pair by pair.
pub fn verify_modulus_membership(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let i = cfg.slice;
    let pairs = slice_pairs(&plan, i);
    let modes = [
        ("modulus", DefectMode::Modulus),
        ("first_modulus", DefectMode::ComponentModulus(Component::First)),
        ("second_modulus", DefectMode::ComponentModulus(Component::Second)),
    ];
    let records = per_member(corpus, |m| {
        let f = &m.series;
        let mut r = FunctionRecord::new(&m.name, "modulus_ratio");
        let base = pair_sup(&pairs, &cfg.omega, plan.epsilon, |x, y, wd| (f.evaluate(x) - f.evaluate(y)).norm() / wd)?;
        r.estimate("slice_norm", &base);
        let violations = pairs
            .par_iter()
            .filter(|[x, y]| {
                let (fx, fy) = (f.evaluate(*x), f.evaluate(*y));
                let d = (fx - fy).norm();
                let allowance = tol.rounding * (fx.norm() + fy.norm()) + 1e-300;
                modes.iter().any(|(_, mode)| (mode.apply(fx, i) - mode.apply(fy, i)).abs() > d + allowance)
            })
            .count();
        r.set("pair_violations", violations as f64);
        r.check("pairwise_contraction", violations == 0);
        let mut worst = 0.0f64;
        for (key, mode) in modes {
            let e = pair_sup(&pairs, &cfg.omega, plan.epsilon, |x, y, wd| {
                (mode.apply(f.evaluate(x), i) - mode.apply(f.evaluate(y), i)).abs() / wd
            })?;
            worst = worst.max(ratio_or_zero(e.value, base.value));
            r.estimate(key, &e);
        }
        r.set("modulus_ratio", worst);
        r.check("modulus_norms_bounded", worst <= 1.0 + tol.rounding);
        Ok(r)
    });
    Ok(VerificationReport::new(Suite::ModulusMembership, cfg, &["rounding"], records, Vec::new()))
}

/// `sup (P[|fk|^2](z) - |fk(z)|^2) / w(1 - |z|)^2` over sampled disc points.
fn squared_defect(fk: &ComplexSeries, w: &Majorant, plan: &SamplePlan, nodes: usize) -> Result<f64, VerifyError> {
    let e = ImaginaryUnit::E1;
    let rule = CircleRule::new(e, nodes)?;
    let values = rule.sample_points(|p| fk.evaluate(e.project(p)).norm_sqr());
    let points = disc_points(plan);
    let mut out = Vec::with_capacity(points.len());
    for z in &points {
        let p = rule.integrate(&values, e.embed(*z))?;
        out.push((p - fk.evaluate(*z).norm_sqr()) / w.value(1.0 - z.norm()).powi(2));
    }
    Ok(out.into_iter().fold(0.0, f64::max))
}

/// `|f|^2 ~ N1(f1)^2 + N1(f2)^2 ~ N2(..) ~ N3(..)`, and when `w^2` is regular
/// also the squared-modulus Poisson defect, as pairwise ratio windows.
pub fn verify_norm_equivalences(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let i = cfg.slice;
    let mut flags = Vec::new();
    let regular = check_regular(&cfg.omega, &LogGrid::default(), DEFAULT_QUAD_NODES)?;
    if !regular.is_regular {
        flags.push("omega is not certified regular; the equivalences are not claimed".to_owned());
    }
    let squared_regular = match cfg.omega.squared() {
        Some(w2) => check_regular(&w2, &LogGrid::default(), DEFAULT_QUAD_NODES)?.is_regular,
        None => false,
    };
    if !squared_regular {
        flags.push("omega^2 is not certified regular; the squared-defect functional is skipped".to_owned());
    }
    let records = per_member(corpus, |m| {
        let f = &m.series;
        let split = f.split(i);
        let mut r = FunctionRecord::new(&m.name, "worst_ratio");
        let s = slice_norm(f, &cfg.omega, i, &plan)?;
        r.estimate("slice_norm", &s);
        let n1 = seminorms_n(&split.f1, &cfg.omega, &plan, cfg.nodes)?;
        let n2 = seminorms_n(&split.f2, &cfg.omega, &plan, cfg.nodes)?;
        let mut functionals = vec![
            ("slice_norm_sq", s.value * s.value),
            ("n1_sum", n1.n1.powi(2) + n2.n1.powi(2)),
            ("n2_sum", n1.n2.powi(2) + n2.n2.powi(2)),
            ("n3_sum", n1.n3.powi(2) + n2.n3.powi(2)),
        ];
        if squared_regular {
            let d = squared_defect(&split.f1, &cfg.omega, &plan, cfg.nodes)?
                + squared_defect(&split.f2, &cfg.omega, &plan, cfg.nodes)?;
            functionals.push(("squared_defect", d));
        }
        for (k, v) in &functionals {
            r.set(k, *v);
        }
        let mut worst = 1.0f64;
        let mut ok = true;
        for (a, (ka, va)) in functionals.iter().enumerate() {
            for (kb, vb) in &functionals[a + 1..] {
                let inside = tol.within_window(*va, *vb);
                ok &= inside;
                if *va > tol.floor && *vb > tol.floor {
                    worst = worst.max(va / vb).max(vb / va);
                }
                if !inside {
                    r.notes.push(format!("{ka} / {kb} outside the window"));
                }
            }
        }
        r.set("worst_ratio", worst);
        r.check("equivalence_window", ok);
        Ok(r)
    });
    Ok(VerificationReport::new(Suite::NormEquivalences, cfg, &["window", "floor"], records, flags))
}

/// Derivative characterizations: finiteness and radial stability of the
/// derivative ratios, slice against ball, growth contracts and the
/// two-majorant derivative bound. Schwarz-Pick constants are informational.
pub fn verify_derivative_characterizations(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let i = cfg.slice;
    let coarse = SamplePlan { rho: 1.0 - 2.0 * (1.0 - plan.rho), ..plan };
    let growth_plan = SamplePlan { points: GROWTH_POINTS, ..plan };
    let iq = i.as_quaternion();

    let records = per_member(corpus, |m| {
        let f = &m.series;
        let df = f.cullen_derivative();
        let mut r = FunctionRecord::new(&m.name, "full");
        let mut finite = true;
        let mut stable = true;
        for (key, mode) in [("full", DerivativeMode::Full), ("plus", DerivativeMode::Plus), ("minus", DerivativeMode::Minus)] {
            let fine = lipschitz::derivative_ratio(f, &cfg.omega, i, mode, &plan)?;
            let rough = lipschitz::derivative_ratio(f, &cfg.omega, i, mode, &coarse)?;
            r.estimate(key, &fine);
            r.set(&format!("{key}_coarse"), rough.value);
            finite &= fine.value.is_finite();
            if fine.value > tol.floor {
                stable &= fine.value <= rough.value * tol.stability;
            }
        }
        r.check("ratios_finite", finite);
        r.check("radially_stable", stable);

        // parallelogram identity for f' at every sampled point
        let points = slice_points(&plan, i);
        let parallelogram = points.iter().all(|&x| {
            let d = df.evaluate(x);
            let lhs = 4.0 * d.norm_sqr();
            let rhs = (d + iq * d * iq).norm_sqr() + (d - iq * d * iq).norm_sqr();
            (lhs - rhs).abs() <= 1e-12 * lhs.max(f64::MIN_POSITIVE)
        });
        r.check("parallelogram_identity", parallelogram);

        let slice_full = r.constants["full"];
        let global = lipschitz::global_derivative_ratio(f, &cfg.omega, &plan)?;
        r.estimate("global", &global);
        r.check("global_within_twice_slice", global.value <= 2.0 * slice_full * (1.0 + tol.derivative_slack) + 1e-15);
        // the pointwise mechanism: |f'(q)| <= |f'(x)| + |f'(conj x)|, x = q0 + i|vec q|
        let ball = ball_points(&plan);
        let pointwise = ball.iter().all(|&q| {
            let x = i.point(q.x0, q.vector_norm());
            let y = i.point(q.x0, -q.vector_norm());
            df.evaluate(q).norm() <= (df.evaluate(x).norm() + df.evaluate(y).norm()) * (1.0 + tol.rounding) + 1e-15
        });
        r.check("representation_pointwise", pointwise);

        let mut growth = f64::INFINITY;
        for x in slice_points(&growth_plan, i) {
            growth = growth.min(bounded_growth_check(f, x, i, &plan).slack());
        }
        r.set("growth_slack", growth);
        r.check("growth_contracts", growth >= -tol.inequality);
        let mut global_growth = f64::INFINITY;
        for q in ball_points(&growth_plan) {
            let (lhs, rhs) = global_growth_check(f, q, i, &plan);
            global_growth = global_growth.min(rhs - lhs);
        }
        r.set("global_growth_slack", global_growth);
        r.check("global_growth_contract", global_growth >= -tol.inequality);

        // |f'| (1 - |x|) <= max(C1, C2) sqrt(w1^2 + w2^2)
        let split = f.split(i);
        let (d1, d2) = (split.f1.derivative(), split.f2.derivative());
        let zs = disc_points(&plan);
        let ck = |d: &ComplexSeries, w: &Majorant| {
            zs.iter().map(|z| d.evaluate(*z).norm() * (1.0 - z.norm()) / w.value(1.0 - z.norm())).fold(0.0, f64::max)
        };
        let c = ck(&d1, &cfg.omega1).max(ck(&d2, &cfg.omega2));
        let mixed = zs
            .iter()
            .map(|z| {
                let gap = 1.0 - z.norm();
                df.evaluate(i.embed(*z)).norm() * gap / cfg.omega1.value(gap).hypot(cfg.omega2.value(gap))
            })
            .fold(0.0, f64::max);
        r.set("component_derivative_constant", c);
        r.set("mixed_constant", mixed);
        r.check("mixed_majorant_bound", mixed <= c * (1.0 + tol.rounding) + 1e-15);

        for interp in [Interpretation::Series, Interpretation::Pointwise] {
            let sp = lipschitz::schwarz_pick_criterion(f, &cfg.omega, i, &plan, interp)?;
            let tag = match interp {
                Interpretation::Series => "schwarz_pick_series",
                Interpretation::Pointwise => "schwarz_pick_pointwise",
            };
            r.set(&format!("{tag}_hypothesis"), sp.hypothesis_constant);
            r.set(&format!("{tag}_derivative"), sp.derivative_constant);
            r.set(&format!("{tag}_skipped"), sp.skipped as f64);
            if sp.evaluated > 0 && !sp.consistent(tol.derivative_slack) {
                r.notes.push(format!("{tag}: derivative constant exceeds the hypothesis constant"));
            }
        }
        Ok(r)
    });

    let mut flags = Vec::new();
    let trend: Vec<(usize, f64)> = [8, 16, 32]
        .into_iter()
        .map(|n| {
            lipschitz::derivative_ratio(&log_series(n), &cfg.omega, i, DerivativeMode::Full, &plan).map(|e| (n, e.value))
        })
        .collect::<Result<_, _>>()?;
    if trend.windows(2).all(|w| w[1].1 > w[0].1) {
        let values: Vec<String> = trend.iter().map(|(n, v)| format!("{n}: {v}")).collect();
        flags.push(format!("log_series derivative ratio grows with degree ({})", values.join(", ")));
    }
    Ok(VerificationReport::new(
        Suite::DerivativeCharacterizations,
        cfg,
        &["stability", "derivative_slack", "rounding", "inequality", "floor"],
        records,
        flags,
    ))
}

/// Properties of the slice Poisson integral: normalization, rotation
/// equivariance, the sandwich bounds, the star-kernel bound and
/// subharmonicity of component moduli.
pub fn verify_poisson_properties(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let i = cfg.slice;
    let inner = SamplePlan { rho: plan.rho.min(0.9), ..plan };
    let inner_points = slice_points(&inner, i);

    let rule = CircleRule::new(i, cfg.nodes)?;
    let ones = vec![1.0; cfg.nodes];
    let mut normalization = FunctionRecord::new("unit_data", "max_error");
    let mut err = 0.0f64;
    for x in inner_points.iter().take(GROWTH_POINTS) {
        err = err.max((rule.integrate(&ones, *x)? - 1.0).abs());
    }
    normalization.set("max_error", err);
    normalization.samples = inner_points.len().min(GROWTH_POINTS);
    normalization.check("normalized", err <= tol.inequality);

    let base = ChaCha8Rng::seed_from_u64(cfg.seed ^ SALT_ROTORS.rotate_left(40));
    let mut records = per_member(corpus, |m| {
        let f = &m.series;
        let mut r = FunctionRecord::new(&m.name, "rotation_residual");
        let boundary = SliceBoundary::new(f, i, cfg.nodes)?;

        let mut rng = base.clone();
        rng.set_stream(m.name.bytes().fold(0u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64)));
        let mut residual = 0.0f64;
        for _ in 0..3 {
            let rotor = random_rotor(&mut rng);
            let k = rotate_unit(rotor, i)?;
            let on = k.point(0.4 * rng.random::<f64>().cos(), 0.4 * rng.random::<f64>().sin());
            let off = random_ball_point(&mut rng, 0.9);
            for q in [on, off] {
                residual = residual.max(rotation_equivariance_residual(|p| f.evaluate(p).norm(), rotor, q, i, cfg.nodes)?);
            }
        }
        r.set("rotation_residual", residual);
        r.check("rotation_equivariance", residual <= tol.inequality);

        let points = slice_points(&plan, i);
        let first = boundary.sample(DefectMode::ComponentModulus(Component::First));
        let second = boundary.sample(DefectMode::ComponentModulus(Component::Second));
        let sandwich_samples = boundary.sandwich();
        let mut sandwich = f64::INFINITY;
        let mut defect = f64::INFINITY;
        for &x in &points {
            sandwich = sandwich.min(sandwich_samples.at(x)?.slack());
            let w = boundary.rule().weights(x)?;
            let fx = f.evaluate(x);
            let d1 = weighted_sum(&w, &first) - component_modulus(fx, i, Component::First);
            let d2 = weighted_sum(&w, &second) - component_modulus(fx, i, Component::Second);
            defect = defect.min(d1).min(d2);
        }
        r.samples = points.len();
        r.set("sandwich_slack", sandwich);
        r.set("min_component_defect", defect);
        r.check("sandwich_bounds", sandwich >= -tol.inequality);
        r.check("subharmonic_components", defect >= -tol.inequality);

        let mut kernel = f64::INFINITY;
        for _ in 0..KERNEL_CONFIGS {
            let radius = plan.rho * rng.random::<f64>().sqrt();
            let x = i.embed(Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * rng.random::<f64>()));
            let j = random_unit(&mut rng);
            let (lhs, rhs) = star_kernel_bound(f, x, i, j, cfg.nodes)?;
            kernel = kernel.min(rhs - lhs);
        }
        r.set("star_kernel_slack", kernel);
        r.check("star_kernel_bound", kernel >= -tol.inequality);
        Ok(r)
    });
    records.insert(0, normalization);
    Ok(VerificationReport::new(Suite::PoissonProperties, cfg, &["inequality"], records, Vec::new()))
}

fn random_rotor(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let q = Quaternion::new(
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
        );
        let n = q.norm();
        if n > 1e-3 && n <= 1.0 {
            return q / n;
        }
    }
}

fn random_ball_point(rng: &mut ChaCha8Rng, radius: f64) -> Quaternion {
    random_rotor(rng) * (radius * rng.random::<f64>().powf(0.25))
}

/// Sup of the component-modulus defects `(P_i[|f_k|](x) - |f_k(x)|) / w(1 - |x|)`.
fn defect_constant(
    boundary: &SliceBoundary,
    f: &SliceSeries,
    w: &Majorant,
    points: &[Quaternion],
) -> Result<(f64, Quaternion, f64), VerifyError> {
    let mut best = (0.0f64, Quaternion::ZERO);
    let mut min_defect = f64::INFINITY;
    let i = boundary.rule().unit();
    let components = [Component::First, Component::Second];
    let sampled = components.map(|c| boundary.sample(DefectMode::ComponentModulus(c)));
    for &x in points {
        let weights = boundary.rule().weights(x)?;
        let fx = f.evaluate(x);
        for (c, values) in components.iter().zip(&sampled) {
            let d = weighted_sum(&weights, values) - component_modulus(fx, i, *c);
            min_defect = min_defect.min(d);
            let ratio = d / w.value(1.0 - x.norm());
            if ratio > best.0 {
                best = (ratio, x);
            }
        }
    }
    Ok((best.0, best.1, min_defect))
}

/// Sup of `(P_i[g](x) - g(x)) / w(1 - |x|)` for a literal mode.
fn literal_defect(boundary: &SliceBoundary, f: &SliceSeries, w: &Majorant, mode: DefectMode, points: &[Quaternion]) -> Result<f64, VerifyError> {
    let sampled = boundary.sample(mode);
    let mut best = 0.0f64;
    for &x in points {
        best = best.max(boundary.defect(&sampled, f, mode, x)? / w.value(1.0 - x.norm()));
    }
    Ok(best)
}

fn defect_points(plan: &SamplePlan, i: ImaginaryUnit) -> Vec<Quaternion> {
    let mut points = slice_points(plan, i);
    points.push(Quaternion::ZERO);
    points
}

/// Membership through harmonic defects: `C_def`, the sup of the normalized
/// component-modulus defects, against `C_lip`, the slice norm.
pub fn verify_poisson_characterization(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let i = cfg.slice;
    let points = defect_points(&plan, i);
    let records = per_member(corpus, |m| {
        let f = &m.series;
        let mut r = FunctionRecord::new(&m.name, "c_def");
        let bm = lipschitz::boundary_modulus_norm(f, &cfg.omega, i, DefectMode::Modulus, &plan)?;
        r.estimate("boundary_modulus", &bm);
        r.check("boundary_modulus_finite", bm.value.is_finite());
        let boundary = SliceBoundary::new(f, i, cfg.nodes)?;
        let (c_def, at, min_defect) = defect_constant(&boundary, f, &cfg.omega, &points)?;
        r.set("c_def", c_def);
        r.witnesses.insert("c_def".to_owned(), vec![at]);
        r.set("min_defect", min_defect);
        r.set("literal_plus", literal_defect(&boundary, f, &cfg.omega, DefectMode::Plus, &points)?);
        r.set("literal_minus", literal_defect(&boundary, f, &cfg.omega, DefectMode::Minus, &points)?);
        let lip = slice_norm(f, &cfg.omega, i, &plan)?;
        r.estimate("c_lip", &lip);
        r.samples += points.len();
        if c_def > tol.floor && lip.value > tol.floor {
            r.set("ratio", c_def / lip.value);
        }
        r.check("finite_together", c_def.is_finite() && lip.value.is_finite());
        r.check("window", tol.within_window(c_def, lip.value));
        r.check("subharmonic", min_defect >= -tol.inequality);
        Ok(r)
    });
    Ok(VerificationReport::new(
        Suite::PoissonCharacterization,
        cfg,
        &["window", "inequality", "floor"],
        records,
        Vec::new(),
    ))
}

/// Whether `<q, e^{it}> <= q0 cos t + sign |vec q| sin t` on the angle grid.
pub fn cone_admissible(q: Quaternion, i: ImaginaryUnit, sign: f64) -> bool {
    let along = q.x1 * i.components()[0] + q.x2 * i.components()[1] + q.x3 * i.components()[2];
    let v = q.vector_norm();
    (0..CONE_ANGLES).all(|k| {
        let (s, c) = (2.0 * std::f64::consts::PI * k as f64 / CONE_ANGLES as f64).sin_cos();
        let inner = q.x0 * c + along * s;
        inner <= q.x0 * c + sign * v * s + 1e-12
    })
}

/// The cone estimate `P_i[|f|](q) - 2 |f(q0 +- i |vec q|)| <= C w(1 - |q|)` for
/// admissible `q`. The pairing where the sign of the evaluation point matches
/// the cone sign is checked; the opposite pairing is reported.
pub fn verify_cone_corollary(corpus: &Corpus, cfg: &RunConfig) -> Result<VerificationReport, VerifyError> {
    let plan = cfg.plan();
    plan.validate()?;
    let tol = &cfg.tolerances;
    let i = cfg.slice;
    let mut candidates = ball_points(&plan);
    candidates.extend(slice_points(&plan.with_seed(plan.seed.wrapping_add(1)), i));
    let admissible: Vec<(Quaternion, f64)> = candidates
        .iter()
        .flat_map(|&q| [1.0, -1.0].into_iter().filter(move |&s| cone_admissible(q, i, s)).map(move |s| (q, s)))
        .collect();
    let mut defect_at = defect_points(&plan, i);
    for &(q, s) in &admissible {
        defect_at.push(i.point(q.x0, s * q.vector_norm()));
        defect_at.push(i.point(q.x0, -s * q.vector_norm()));
    }
    let mut flags = Vec::new();
    if admissible.is_empty() {
        flags.push("no admissible samples".to_owned());
    }
    let plus = admissible.iter().filter(|(_, s)| *s > 0.0).count();
    flags.push(format!("admissible samples: {plus} for +, {} for -", admissible.len() - plus));

    let records = per_member(corpus, |m| {
        let f = &m.series;
        let mut r = FunctionRecord::new(&m.name, "matched_excess");
        let boundary = SliceBoundary::new(f, i, cfg.nodes)?;
        let (c_def, _, _) = defect_constant(&boundary, f, &cfg.omega, &defect_at)?;
        let c = tol.cone_factor * c_def;
        r.set("c_def", c_def);
        r.set("constant", c);
        let modulus = boundary.sample(DefectMode::Modulus);
        let (mut matched, mut opposite) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut worst: Option<Quaternion> = None;
        for &(q, s) in &admissible {
            let p = boundary.rule().integrate(&modulus, q)?;
            let rhs = c * cfg.omega.value(1.0 - q.norm());
            let same = p - 2.0 * f.evaluate(i.point(q.x0, s * q.vector_norm())).norm() - rhs;
            let other = p - 2.0 * f.evaluate(i.point(q.x0, -s * q.vector_norm())).norm() - rhs;
            if same > matched {
                matched = same;
                worst = Some(q);
            }
            opposite = opposite.max(other);
        }
        r.samples = admissible.len();
        if let Some(q) = worst {
            r.set("matched_excess", matched);
            r.set("opposite_excess", opposite);
            r.witnesses.insert("matched_excess".to_owned(), vec![q]);
            if opposite > tol.inequality {
                r.notes.push("opposite pairing violates the estimate".to_owned());
            }
        } else {
            r.notes.push("no admissible samples".to_owned());
        }
        r.check("matched_pairing", matched <= tol.inequality);
        Ok(r)
    });
    Ok(VerificationReport::new(Suite::ConeCorollary, cfg, &["cone_factor", "inequality"], records, flags))
}

pub fn run_one(suite: Suite, corpus: &Corpus, cfg: &RunConfig) -> VerificationReport {
    let result = match suite {
        Suite::InclusionChain => verify_inclusion_chain(corpus, cfg),
        Suite::AlgebraicClosure => verify_algebraic_closure(corpus, cfg),
        Suite::IntrinsicInvariance => verify_intrinsic_invariance(&corpus.intrinsic(), cfg),
        Suite::SliceIndependence => verify_slice_independence(corpus, cfg),
        Suite::ModulusMembership => verify_modulus_membership(corpus, cfg),
        Suite::NormEquivalences => verify_norm_equivalences(corpus, cfg),
        Suite::DerivativeCharacterizations => verify_derivative_characterizations(corpus, cfg),
        Suite::PoissonProperties => verify_poisson_properties(corpus, cfg),
        Suite::PoissonCharacterization => verify_poisson_characterization(corpus, cfg),
        Suite::ConeCorollary => verify_cone_corollary(corpus, cfg),
    };
    result.unwrap_or_else(|e| VerificationReport::failed(suite, cfg, &e))
}

/// Runs the selected suites in order; a failing suite never stops the others.
pub fn run_suites(corpus: &Corpus, cfg: &RunConfig) -> Vec<VerificationReport> {
    cfg.suites.par_iter().map(|&s| run_one(s, corpus, cfg)).collect()
}

/// Loads the configured corpus and runs the selected suites.
pub fn run_suite(cfg: &RunConfig) -> Result<Vec<VerificationReport>, VerifyError> {
    let corpus = cfg.load_corpus()?;
    Ok(run_suites(&corpus, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig { pairs: 2000, points: 200, random_members: 1, random_slice_pairs: 2, ..RunConfig::default() }
    }

    fn only(name: &str, series: SliceSeries) -> Corpus {
        Corpus::new(vec![member(name, series)])
    }

    #[test]
    fn builtin_corpus_shape() {
        let c = Corpus::builtin(1, 2);
        assert_eq!(c.len(), 9);
        let names: Vec<_> = c.intrinsic().members().iter().map(|m| m.name.clone()).collect();
        assert_eq!(names, ["constant_real", "identity", "square", "exp_12"]);
        assert_eq!(Corpus::builtin(1, 2), Corpus::builtin(1, 2));
        assert_ne!(Corpus::builtin(1, 2), Corpus::builtin(2, 2));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
    }

    #[test]
    fn empty_selection_gives_no_reports() {
        let cfg = RunConfig { suites: Vec::new(), ..small() };
        assert!(run_suites(&Corpus::builtin(0, 0), &cfg).is_empty());
    }

    #[test]
    fn intrinsic_suite_rejects_quaternionic_members() {
        let c = only("e1", SliceSeries::constant(Quaternion::E1));
        assert!(matches!(verify_intrinsic_invariance(&c, &small()), Err(VerifyError::NotIntrinsic(_))));
    }

    #[test]
    fn constant_members_pass_vacuously() {
        let c = only("c", SliceSeries::constant(Quaternion::new(0.1, 0.2, 0.3, 0.4)));
        let cfg = small();
        for s in [Suite::InclusionChain, Suite::SliceIndependence, Suite::PoissonCharacterization, Suite::ConeCorollary] {
            let r = run_one(s, &c, &cfg);
            assert!(r.pass, "{s:?}: {r:?}");
        }
    }

    #[test]
    fn closure_with_a_swapping_scalar() {
        // on the slice of e3 the orthogonal unit is e1, so a = e1 = 0 + 1 j
        let cfg = RunConfig { slice: ImaginaryUnit::E3, scalar: Quaternion::E1, ..small() };
        let f = SliceSeries::new(vec![Quaternion::ZERO, Quaternion::new(0.5, 0.0, 0.0, 0.2), Quaternion::E1 * 0.3]).unwrap();
        let c = Corpus::new(vec![member("f", f.clone()), member("id", SliceSeries::identity())]);
        let r = verify_algebraic_closure(&c, &cfg).unwrap();
        assert!(r.pass, "{r:?}");
        let fa = f.mul_right(Quaternion::E1).split(ImaginaryUnit::E3);
        let s = f.split(ImaginaryUnit::E3);
        for (x, y) in fa.f1.coeffs().iter().zip(s.f2.coeffs()) {
            assert!((x + y).norm() < 1e-15);
        }
        for (x, y) in fa.f2.coeffs().iter().zip(s.f1.coeffs()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn cone_admissibility_on_and_off_the_slice() {
        let i = ImaginaryUnit::E1;
        assert!(cone_admissible(i.point(0.2, 0.3), i, 1.0));
        assert!(!cone_admissible(i.point(0.2, 0.3), i, -1.0));
        assert!(cone_admissible(Quaternion::real(0.4), i, 1.0) && cone_admissible(Quaternion::real(0.4), i, -1.0));
        assert!(!cone_admissible(Quaternion::new(0.1, 0.1, 0.1, 0.0), i, 1.0));
    }

    #[test]
    fn defect_ratio_of_the_identity() {
        let cfg = small();
        let r = verify_poisson_characterization(&only("id", SliceSeries::identity()), &cfg).unwrap();
        assert!(r.pass, "{r:?}");
        let c = r.records[0].constants["c_def"];
        assert!((c - 1.0).abs() < 1e-9, "{c}");
    }
}
