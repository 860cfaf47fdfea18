//! Acceptance suite: one PASS/FAIL line per criterion with its wall time
//! against the time budget. Run with `cargo test --test acceptance -- --nocapture`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slicelip_core::io::{emit_report, Format, ReportDocument};
use slicelip_core::lipschitz::{self, DerivativeMode, SamplePlan};
use slicelip_core::majorant::{check_regular, LogGrid, Majorant, DEFAULT_QUAD_NODES};
use slicelip_core::quaternion::orthogonal_unit;
use slicelip_core::series::extend_from_slice;
use slicelip_core::verify::{self, Corpus, CorpusMember, RunConfig, Suite};
use slicelip_core::{ImaginaryUnit, Quaternion, SliceSeries};

/// `q = a + b j` as the complex matrix `[[a, b], [-conj b, conj a]]`.
fn as_matrix(q: Quaternion) -> [[Complex64; 2]; 2] {
    let a = Complex64::new(q.x0, q.x1);
    let b = Complex64::new(q.x2, q.x3);
    [[a, b], [-b.conj(), a.conj()]]
}

fn from_matrix(m: [[Complex64; 2]; 2]) -> Quaternion {
    Quaternion::new(m[0][0].re, m[0][0].im, m[0][1].re, m[0][1].im)
}

fn oracle_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    let (a, b) = (as_matrix(p), as_matrix(q));
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            c[r][s] = a[r][0] * b[0][s] + a[r][1] * b[1][s];
        }
    }
    from_matrix(c)
}

/// `sum q^n a_n` by repeated multiplication.
fn oracle_eval(coeffs: &[Quaternion], q: Quaternion) -> Quaternion {
    let mut power = Quaternion::ONE;
    let mut sum = Quaternion::ZERO;
    for &a in coeffs {
        sum = sum + oracle_mul(power, a);
        power = oracle_mul(power, q);
    }
    sum
}

/// Convolution of right-coefficient series, truncated to degree `m`.
fn oracle_star(a: &[Quaternion], b: &[Quaternion], m: usize) -> Vec<Quaternion> {
    (0..=m)
        .map(|n| {
            (0..=n)
                .filter(|&k| k < a.len() && n - k < b.len())
                .fold(Quaternion::ZERO, |s, k| s + oracle_mul(a[k], b[n - k]))
        })
        .collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(r: &mut ChaCha8Rng) -> f64 {
    2.0 * r.random::<f64>() - 1.0
}

fn random_quaternion(r: &mut ChaCha8Rng) -> Quaternion {
    Quaternion::new(uniform(r), uniform(r), uniform(r), uniform(r))
}

fn random_ball_point(r: &mut ChaCha8Rng, radius: f64) -> Quaternion {
    loop {
        let q = random_quaternion(r);
        if q.norm() < 1.0 {
            return q * radius;
        }
    }
}

fn random_disc_point(r: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * r.random::<f64>().sqrt(), 2.0 * std::f64::consts::PI * r.random::<f64>())
}

fn random_unit(r: &mut ChaCha8Rng) -> ImaginaryUnit {
    loop {
        let (a, b, c) = (uniform(r), uniform(r), uniform(r));
        if let Ok(u) = ImaginaryUnit::normalized(a, b, c) {
            if (a * a + b * b + c * c) > 1e-4 {
                return u;
            }
        }
    }
}

/// Built-in corpus plus a degree-16 member.
fn corpus() -> Corpus {
    let mut members = Corpus::builtin(RunConfig::default().seed, 2).members().to_vec();
    let mut r = rng(16);
    let coeffs = (0..=16).map(|_| random_quaternion(&mut r)).collect();
    members.push(CorpusMember { name: "random_degree_16".into(), series: SliceSeries::new(coeffs).unwrap() });
    Corpus::new(members)
}

#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failed.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn run(n: usize, name: &str, budget_secs: u64, body: impl FnOnce(&mut Checks)) -> bool {
    let mut checks = Checks::default();
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| body(&mut checks)));
    let elapsed = start.elapsed();
    if let Err(e) = outcome {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        checks.failed.push(format!("panicked: {msg}"));
    }
    let budget = Duration::from_secs(budget_secs);
    checks.check(elapsed < budget, format!("took {elapsed:.2?}, budget {budget_secs} s"));
    let ok = checks.failed.is_empty();
    println!(
        "{} {n:>2} {name} ({:.3} s, budget {budget_secs} s){}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        if checks.notes.is_empty() { String::new() } else { format!(" [{}]", checks.notes.join("; ")) }
    );
    for f in &checks.failed {
        println!("       - {f}");
    }
    ok
}

fn algebra_exactness(c: &mut Checks) {
    let (one, e1, e2, e3) = (Quaternion::ONE, Quaternion::E1, Quaternion::E2, Quaternion::E3);
    let table = [
        (e1, e2, e3),
        (e2, e1, -e3),
        (e2, e3, e1),
        (e3, e2, -e1),
        (e3, e1, e2),
        (e1, e3, -e2),
        (e1, e1, -one),
        (e2, e2, -one),
        (e3, e3, -one),
    ];
    for (a, b, expected) in table {
        c.check(a * b == expected, format!("{a} * {b} != {expected}"));
        c.check(oracle_mul(a, b) == expected, "oracle disagrees with the table");
    }
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for _ in 0..10_000 {
        let (p, q) = (random_quaternion(&mut r) * 3.0, random_quaternion(&mut r) * 3.0);
        let pq = p * q;
        worst = worst.max((pq.norm() - p.norm() * q.norm()).abs());
        worst_oracle = worst_oracle.max((pq - oracle_mul(p, q)).norm());
    }
    c.check(worst < 1e-12, format!("norm multiplicativity error {worst:e}"));
    c.check(worst_oracle < 1e-12, format!("product differs from matrix oracle by {worst_oracle:e}"));
    c.note(format!("max | |pq| - |p||q| | = {worst:.1e}"));
}

fn splitting_round_trip(c: &mut Checks) {
    let corpus = corpus();
    let mut r = rng(2);
    let units: Vec<ImaginaryUnit> = (0..4).map(|_| random_unit(&mut r)).chain([ImaginaryUnit::E1]).collect();
    let mut worst = 0.0f64;
    for m in corpus.members() {
        c.check(m.series.degree() <= 16, format!("{} has degree above 16", m.name));
        for (k, &i) in units.iter().enumerate() {
            let split = m.series.split(i);
            let j = orthogonal_unit(i).as_quaternion();
            for _ in 0..1000 / units.len() {
                let z = random_disc_point(&mut r, 1.0);
                let direct = oracle_eval(m.series.coeffs(), i.embed(z));
                let rebuilt = i.embed(split.f1.evaluate(z)) + i.embed(split.f2.evaluate(z)) * j;
                worst = worst.max((direct - rebuilt).norm());
            }
            let _ = k;
        }
    }
    c.check(worst < 1e-12, format!("reconstruction error {worst:e}"));
    c.note(format!("max error {worst:.1e}"));
}

fn representation_formula(c: &mut Checks) {
    let corpus = corpus();
    let mut r = rng(3);
    let points: Vec<Quaternion> = (0..1000).map(|_| random_ball_point(&mut r, 1.0)).collect();
    let mut worst = 0.0f64;
    for m in corpus.members() {
        for (n, &q) in points.iter().enumerate() {
            let i = if n % 2 == 0 { ImaginaryUnit::E1 } else { ImaginaryUnit::E3 };
            let err = (extend_from_slice(&m.series, q, i) - oracle_eval(m.series.coeffs(), q)).norm();
            worst = worst.max(err);
        }
    }
    c.check(worst < 1e-10, format!("extension error {worst:e}"));
    c.note(format!("max error {worst:.1e}"));
}

fn star_algebra(c: &mut Checks) {
    const M: usize = 16;
    let corpus = corpus();
    let mut r = rng(4);
    let mut pointwise = 0.0f64;
    let mut imag = 0.0f64;
    let mut inverse = 0.0f64;
    let mut derivative = 0.0f64;
    let members = corpus.members();
    for (n, m) in members.iter().enumerate() {
        let f = &m.series;
        let g = &members[(n + 3) % members.len()].series;
        let fg = oracle_star(f.coeffs(), g.coeffs(), f.degree() + g.degree());
        c.check(
            f.star_product(g).coeffs().iter().zip(&fg).all(|(a, b)| (*a - *b).norm() < 1e-12),
            format!("{}: star product differs from convolution", m.name),
        );
        for _ in 0..200 {
            let q = random_ball_point(&mut r, 0.95);
            if f.evaluate(q).norm() <= 1e-6 {
                continue;
            }
            let direct = oracle_eval(&fg, q);
            let via = f.star_pointwise(g, q, 1e-6).expect("nonzero base");
            pointwise = pointwise.max((direct - via).norm() / direct.norm().max(1e-300));
        }
        let fs = oracle_star(f.coeffs(), &f.regular_conjugate().coeffs().to_vec(), 2 * f.degree());
        let scale = f.coeffs().iter().map(|a| a.norm_sqr()).sum::<f64>().max(1.0);
        imag = imag.max(fs.iter().map(|a| a.vector_norm()).fold(0.0, f64::max) / scale);
        match f.symmetrization() {
            Ok(s) => c.check(s.coeffs().iter().all(|a| a.vector_norm() == 0.0), "symmetrization not real"),
            Err(e) => c.check(false, format!("{}: {e}", m.name)),
        }
        if f.coeff(0).norm() > 1e-9 {
            let inv = f.star_inverse(M).expect("invertible at the origin");
            let prod = oracle_star(f.coeffs(), inv.coeffs(), M);
            for (k, a) in prod.iter().enumerate() {
                let target = if k == 0 { Quaternion::ONE } else { Quaternion::ZERO };
                inverse = inverse.max((*a - target).norm());
            }
            // (f^{-*})' from the derivative of a longer inverse
            let longer = f.star_inverse(M + 1).unwrap().cullen_derivative();
            let d = f.star_inverse_derivative(M).unwrap();
            for k in 0..=M {
                derivative = derivative.max((d.coeff(k) - longer.coeff(k)).norm() / longer.coeff(k).norm().max(1.0));
            }
        }
    }
    c.check(pointwise < 1e-8, format!("pointwise star product relative error {pointwise:e}"));
    c.check(imag < 1e-12, format!("f^s imaginary parts {imag:e}"));
    c.check(inverse < 1e-10, format!("f * f^-* residual {inverse:e}"));
    c.check(derivative < 1e-10, format!("inverse derivative error {derivative:e}"));
    c.note(format!("pointwise {pointwise:.1e}, inverse {inverse:.1e}, derivative {derivative:.1e}"));
}

fn record_check(report: &verify::VerificationReport, key: &str) -> bool {
    report.records.iter().all(|r| r.checks.get(key).copied().unwrap_or(true)) && report.error.is_none()
}

fn poisson_properties(c: &mut Checks) {
    let cfg = RunConfig { nodes: 4096, ..RunConfig::default() };
    let report = verify::run_one(Suite::PoissonProperties, &corpus(), &cfg);
    c.check(report.error.is_none(), format!("suite error {:?}", report.error));
    for key in ["normalized", "rotation_equivariance", "subharmonic_components", "star_kernel_bound", "sandwich_bounds"] {
        c.check(record_check(&report, key), format!("{key} failed"));
    }
    let unit = &report.records[0];
    c.check(unit.constants["max_error"] <= 1e-8, format!("P[1] error {}", unit.constants["max_error"]));
    let worst = |key: &str, max: bool| {
        let vals = report.records.iter().filter_map(|r| r.constants.get(key).copied());
        if max {
            vals.fold(f64::NEG_INFINITY, f64::max)
        } else {
            vals.fold(f64::INFINITY, f64::min)
        }
    };
    let rot = worst("rotation_residual", true);
    let defect = worst("min_component_defect", false);
    let kernel = worst("star_kernel_slack", false);
    c.check(rot < 1e-8, format!("rotation residual {rot:e}"));
    c.check(defect >= -1e-8, format!("component defect {defect:e}"));
    c.check(kernel >= -1e-8, format!("star-kernel slack {kernel:e}"));
    c.note(format!(
        "P[1] err {:.1e}, rotation {rot:.1e}, min defect {defect:.1e}, kernel slack {kernel:.1e}",
        unit.constants["max_error"]
    ));
}

/// `(I1(x) + x I2(x)) / w(x)` for `w = t^a`, with `I1 = int_0^x w/t`, `I2 = int_x^2 w/t^2`.
fn power_ratio(a: f64, x: f64) -> f64 {
    let i1 = x.powf(a) / a;
    let i2 = (x.powf(a - 1.0) - 2f64.powf(a - 1.0)) / (1.0 - a);
    (i1 + x * i2) / x.powf(a)
}

fn majorants(c: &mut Checks) {
    let grid = LogGrid::default();
    let half = check_regular(&Majorant::power(0.5), &grid, DEFAULT_QUAD_NODES).unwrap();
    // sup over x of the closed form is the limit 1/a + 1/(1 - a) = 4
    let closed_form_sup = 1.0 / 0.5 + 1.0 / 0.5;
    let on_grid = power_ratio(0.5, grid.x_min);
    c.check(half.is_regular, format!("t^1/2 not certified: {:?}", half.reason));
    c.check(half.empirical_c <= 4.1, format!("C = {} > 4.1", half.empirical_c));
    c.check(half.empirical_c <= closed_form_sup * (1.0 + 1e-9), "C above the closed-form supremum");
    c.check((half.empirical_c - on_grid).abs() < 1e-2, format!("C = {} vs grid oracle {on_grid}", half.empirical_c));

    let linear = check_regular(&Majorant::power(1.0), &grid, DEFAULT_QUAD_NODES).unwrap();
    c.check(!linear.is_regular, "w = t accepted");
    for level in &linear.levels {
        // closed form for w = t: 1 + ln(2 / x)
        let trend = (2.0 / level.x_min).ln();
        c.check(level.max_ratio >= 0.9 * trend, format!("level x_min {:e}: {} < 0.9 ln(2/x)", level.x_min, level.max_ratio));
    }
    let square = check_regular(&Majorant::power(2.0), &grid, DEFAULT_QUAD_NODES).unwrap();
    c.check(!square.is_regular && !square.monotone, "w = t^2 not rejected by monotonicity");
    c.note(format!("C(t^1/2) = {:.4}, oracle at x_min {on_grid:.4}", half.empirical_c));
}

fn norm_estimators(c: &mut Checks) {
    let plan = SamplePlan { pairs: 10_000, ..SamplePlan::default() };
    let half = Majorant::power(0.5);
    let id = SliceSeries::identity();
    // |p - q| / |p - q|^(1/2) = |p - q|^(1/2), sup sqrt(diameter) = sqrt 2
    let target = 2f64.sqrt();
    let slice = lipschitz::slice_norm(&id, &half, ImaginaryUnit::E1, &plan).unwrap().value;
    let global = lipschitz::global_norm(&id, &half, &plan).unwrap().value;
    c.check((slice / target - 1.0).abs() <= 0.02, format!("slice norm of q: {slice}"));
    c.check((global / target - 1.0).abs() <= 0.02, format!("global norm of q: {global}"));
    let sq = SliceSeries::from_real(&[0.0, 0.0, 1.0]).unwrap();
    // |x^2 - y^2| / |x - y| = |x + y| -> 2
    let s2 = lipschitz::slice_norm(&sq, &Majorant::power(1.0), ImaginaryUnit::E1, &plan).unwrap().value;
    c.check((s2 / 2.0 - 1.0).abs() <= 0.02, format!("slice norm of q^2: {s2}"));
    c.note(format!("q: slice {slice:.4}, global {global:.4}; q^2: {s2:.4}"));
}

fn inclusion_constant(c: &mut Checks) {
    let cfg = RunConfig::default();
    let report = verify::run_one(Suite::InclusionChain, &corpus(), &cfg);
    c.check(report.error.is_none(), format!("suite error {:?}", report.error));
    let mut worst = 0.0f64;
    for r in &report.records {
        let f = r.constants.get("factor_over_six").copied().unwrap_or(f64::NAN);
        c.check(f <= 1.0, format!("{}: global / 6 C3 = {f}", r.function));
        c.check(r.pass, format!("{}: {:?}", r.function, r.checks));
        worst = worst.max(f);
    }
    c.note(format!("max global / 6 C3 = {worst:.4}"));
}

fn slice_independence(c: &mut Checks) {
    let cfg = RunConfig { random_slice_pairs: 5, ..RunConfig::default() };
    let corpus = corpus();
    let report = verify::run_one(Suite::SliceIndependence, &corpus, &cfg);
    c.check(report.error.is_none(), format!("suite error {:?}", report.error));
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for r in &report.records {
        c.check(r.pass, format!("{}: {:?}", r.function, r.checks));
        if let (Some(a), Some(b)) = (r.constants.get("min_ratio"), r.constants.get("max_ratio")) {
            lo = lo.min(*a);
            hi = hi.max(*b);
            c.check(*a >= 1.0 / 2.2 && *b <= 2.2, format!("{}: ratios {a}..{b}", r.function));
            let intrinsic = corpus.members().iter().any(|m| m.name == r.function && m.series.is_intrinsic(0.0));
            if intrinsic {
                c.check((a - 1.0).abs() <= 1e-10 && (b - 1.0).abs() <= 1e-10, format!("{}: intrinsic ratio {a}..{b}", r.function));
            }
        }
    }
    c.check(verify::slice_unit_pairs(&cfg).len() == 6, "expected the configured pair and 5 random pairs");
    c.note(format!("ratios in [{lo:.4}, {hi:.4}]"));
}

fn derivative_characterization(c: &mut Checks) {
    let plan = SamplePlan::default();
    let linear = Majorant::power(1.0);
    let i = ImaginaryUnit::E1;
    let id = lipschitz::derivative_ratio(&SliceSeries::identity(), &linear, i, DerivativeMode::Full, &plan).unwrap();
    c.check((id.value - 1.0).abs() < 1e-12, format!("q: {}", id.value));
    // |f'(x)| (1 - |x|) / (1 - |x|) = 1 at every sampled point
    for x in lipschitz::slice_points(&plan, i) {
        c.check(
            (SliceSeries::identity().cullen_derivative().evaluate(x).norm() - 1.0).abs() < 1e-15,
            "identity derivative not 1",
        );
    }
    let sq = SliceSeries::from_real(&[0.0, 0.0, 1.0]).unwrap();
    // 2 |x| -> 2 as |x| -> 1
    let s = lipschitz::derivative_ratio(&sq, &linear, i, DerivativeMode::Full, &plan).unwrap().value;
    c.check((s / 2.0 - 1.0).abs() <= 0.02, format!("q^2: {s}"));
    let report = verify::run_one(Suite::DerivativeCharacterizations, &corpus(), &RunConfig::default());
    c.check(report.error.is_none(), format!("suite error {:?}", report.error));
    let mut slack = f64::INFINITY;
    for r in &report.records {
        for key in ["growth_contracts", "global_growth_contract"] {
            c.check(r.checks.get(key) == Some(&true), format!("{}: {key}", r.function));
        }
        slack = slack.min(r.constants["growth_slack"]).min(r.constants["global_growth_slack"]);
        c.check(r.pass, format!("{}: {:?}", r.function, r.checks.iter().filter(|(_, v)| !**v).collect::<Vec<_>>()));
    }
    c.check(slack >= -1e-8, format!("growth slack {slack:e}"));
    c.note(format!("q^2 ratio {s:.4}, min growth slack {slack:.2e}"));
}

fn defect_characterization(c: &mut Checks) {
    let cfg = RunConfig::default();
    let report = verify::run_one(Suite::PoissonCharacterization, &corpus(), &cfg);
    c.check(report.error.is_none(), format!("suite error {:?}", report.error));
    let id = report.records.iter().find(|r| r.function == "identity").expect("identity in corpus");
    // D(x) = 1 - |x| for the components of q, so D / (1 - |x|)^(1/2) peaks at x = 0
    let c_def = id.constants["c_def"];
    c.check((c_def - 1.0).abs() <= 0.02, format!("identity C_def {c_def}"));
    let mut ratios = Vec::new();
    for r in &report.records {
        let (d, l) = (r.constants["c_def"], r.constants["c_lip"]);
        c.check(d.is_finite() && l.is_finite(), format!("{}: not finite together", r.function));
        c.check(r.pass, format!("{}: C_def {d}, C_lip {l}", r.function));
        if let Some(q) = r.constants.get("ratio") {
            ratios.push(*q);
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    c.check(lo >= 1.0 / 20.0 && hi <= 20.0, format!("C_def / C_lip in [{lo}, {hi}]"));
    c.note(format!("identity C_def {c_def:.6}, C_def / C_lip in [{lo:.3}, {hi:.3}]"));
}

fn determinism(c: &mut Checks) {
    let cfg = RunConfig { pairs: 2000, points: 200, ..RunConfig::default() };
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for k in 0..2 {
        let reports = verify::run_suite(&cfg).unwrap();
        let doc = ReportDocument { config: cfg.clone(), reports };
        let path = dir.path().join(format!("run{k}.json"));
        emit_report(&doc, &path, Format::Json).unwrap();
        bytes.push(std::fs::read(&path).unwrap());
    }
    c.check(!bytes[0].is_empty() && bytes[0] == bytes[1], "reports differ between runs");
    c.check(
        String::from_utf8_lossy(&bytes[0]).contains(&format!("\"seed\": {}", cfg.seed)),
        "seed missing from the report",
    );
    c.note(format!("{} bytes", bytes[0].len()));
}

#[test]
fn acceptance() {
    // start on a fresh line after the harness prefix
    println!();
    let criteria: [(&str, u64, fn(&mut Checks)); 12] = [
        ("algebra exactness", 1, algebra_exactness),
        ("splitting round-trip", 5, splitting_round_trip),
        ("representation formula", 5, representation_formula),
        ("star algebra", 10, star_algebra),
        ("slice Poisson integral", 30, poisson_properties),
        ("regular majorants", 5, majorants),
        ("norm estimators", 10, norm_estimators),
        ("inclusion constant 6 C3", 60, inclusion_constant),
        ("slice independence sandwich", 60, slice_independence),
        ("derivative characterization", 30, derivative_characterization),
        ("harmonic defect characterization", 60, defect_characterization),
        ("determinism", 5, determinism),
    ];
    let results: Vec<bool> = criteria
        .into_iter()
        .enumerate()
        .map(|(k, (name, budget, body))| run(k + 1, name, budget, body))
        .collect();
    let passed = results.iter().filter(|ok| **ok).count();
    println!("{passed}/{} criteria passed", results.len());
    assert_eq!(passed, results.len(), "acceptance criteria failed");
}
