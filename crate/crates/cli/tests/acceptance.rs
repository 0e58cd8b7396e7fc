//! Acceptance criteria 1–9. Each criterion prints one line,
//! `criterion N: PASS|FAIL  <detail>`, and the test fails if any line fails.
//!
//! Oracles (closed forms, brute-force scans, Pell-type recurrences) are
//! written out here rather than taken from the library.

use std::process::Command;
use std::time::{Duration, Instant};

use pnkit::analysis::{
    self, BoundednessClass, CompactnessVerdict, ConsistencyStatus, NamedSequence, ParametricSet, PointSet, ProbeOptions,
};
use pnkit::phi::{validate_phi, PhiTransform};
use pnkit::pnspace::{self, PNSpace, Vector};
use pnkit::triangle::{check_triangle_axioms, random_distribution, tau_m, tau_m_brute, TriangleOp};
use pnkit::{DistributionFunction, ExtReal, GridSpec, TConorm, TNorm, Tail, TriangleFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_101;

// Pinned tolerances.
const RADIUS_TOL: f64 = 1e-3;
const RADIUS_TIME: Duration = Duration::from_secs(1);
const IDENTITY_TOL: f64 = 1e-6;
const TAU_M_TOL: f64 = 1e-3;
const PROBE_TIME: Duration = Duration::from_secs(5);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

/// Random rationals p/q in [√2, √3], membership decided in integers.
fn oracle_rationals(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    let mut out = Vec::new();
    while out.len() < n {
        let q: i64 = rng.gen_range(500..=50_000);
        let p: i64 = rng.gen_range(q..=2 * q);
        if p * p >= 2 * q * q && p * p <= 3 * q * q {
            out.push(Vector::rational_scalar(p, q));
        }
    }
    out
}

fn criterion_1() -> Verdict {
    let grid = GridSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let set = PointSet::Sampled {
        description: "rationals in [sqrt 2, sqrt 3]".into(),
        points: oracle_rationals(1000, &mut rng),
    };
    let start = Instant::now();
    let (r, _) = analysis::probabilistic_radius(&PNSpace::ex25(), &set, &grid).unwrap();
    let elapsed = start.elapsed();
    let pts = grid.points();
    let stride = pts.len() / 50;
    let c = 3f64.sqrt();
    let worst = (1..=50)
        .map(|i| {
            let t = pts[i * stride];
            (r.at(t) - t / (t + c)).abs()
        })
        .fold(0.0, f64::max);
    verdict(
        worst <= RADIUS_TOL && elapsed < RADIUS_TIME,
        format!("max |R - t/(t+sqrt3)| = {worst:.2e} (tol {RADIUS_TOL}), {elapsed:?} (limit {RADIUS_TIME:?})"),
    )
}

fn criterion_2() -> Verdict {
    let grid = GridSpec::default();
    let space = PNSpace::ex22(0.5).unwrap();
    let terms: Vec<Vector> = (1..=1000).map(|m| Vector::rational_scalar(1, m)).collect();
    let r = analysis::radius_report(&space, &PointSet::explicit(terms.clone()), &grid).unwrap();
    let range_ok = r.class == BoundednessClass::PerhapsUnbounded && !r.d_bounded;
    let conv =
        pnspace::is_strongly_convergent(&space, &terms, &Vector::scalar(0.0), &pnspace::DEFAULT_LAMBDAS).unwrap();
    let uncertified: Vec<f64> = conv
        .per_lambda
        .iter()
        .filter(|v| !v.certified)
        .map(|v| v.lambda)
        .collect();
    let singletons_ok = [1e-3, 0.1, 1.0, -3.0, 10.0, 1e3].iter().all(|&x| {
        !analysis::radius_report(&space, &PointSet::explicit(vec![Vector::scalar(x)]), &grid)
            .unwrap()
            .d_bounded
    });
    verdict(
        range_ok && conv.holds && singletons_ok,
        format!(
            "range class {:?}; convergence {} (uncertified lambdas {:?}); nonzero singletons non-D-bounded: {}",
            r.class, conv.holds, uncertified, singletons_ok
        ),
    )
}

/// Sends every pair to ε_∞.
struct Collapse;

impl TriangleOp for Collapse {
    fn name(&self) -> String {
        "collapse".into()
    }

    fn apply(&self, _: &DistributionFunction, _: &DistributionFunction, _: &GridSpec) -> DistributionFunction {
        DistributionFunction::epsilon_inf()
    }
}

fn criterion_3() -> Verdict {
    let grid = GridSpec::default();
    let bound = 2.0 * grid.mesh;
    let ops = [
        TriangleFunction::TauT(TNorm::Product),
        TriangleFunction::TauM,
        TriangleFunction::TauTStar(TConorm::from_id("max").unwrap()),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, op) in ops.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + i as u64);
        let rep = check_triangle_axioms(op, 100, &grid, &mut rng);
        let worst = rep.laws.iter().map(|l| l.worst_violation).fold(0.0, f64::max);
        ok &= rep.laws.len() == 4 && worst <= bound;
        parts.push(format!("{} worst {worst:.1e}", op.id()));
    }
    let rep = check_triangle_axioms(&Collapse, 100, &grid, &mut ChaCha8Rng::seed_from_u64(SEED));
    let unit = rep.law("unit").map_or(0.0, |l| l.worst_violation);
    ok &= !rep.all_pass() && unit > bound;
    parts.push(format!("broken operator unit violation {unit}"));
    verdict(ok, format!("{} (bound 2*mesh = {bound})", parts.join(", ")))
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for (space, a) in [(PNSpace::ex25(), 1.0), (PNSpace::ex22(0.5).unwrap(), 0.5)] {
        let phi = space.phi.clone().unwrap_or_else(PhiTransform::identity);
        let nu = |r: f64, x: f64| if r == 0.0 { 1.0 } else { a * x / (x + r) };
        for _ in 0..1000 {
            let p: f64 = rng.gen_range(-50.0..50.0);
            let lambda: f64 = rng.gen_range(0.01..20.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let x: f64 = rng.gen_range(0.001..100.0);
            let lhs = space.nu_at(&Vector::scalar(lambda * p), ExtReal::Finite(x));
            let inner = match phi.phi_at(ExtReal::Finite(x)) {
                ExtReal::Finite(v) => phi.phi_hat_at(ExtReal::Finite(v / lambda.abs())),
                ExtReal::Infinity => ExtReal::Infinity,
            };
            let rhs = match inner {
                ExtReal::Finite(u) => nu(p.abs(), u),
                ExtReal::Infinity => 1.0,
            };
            worst = worst.max((lhs - rhs).abs());
        }
    }
    verdict(
        worst <= IDENTITY_TOL,
        format!("worst residual {worst:.2e} over 2000 triples (tol {IDENTITY_TOL})"),
    )
}

/// sup{u : φ(u) < t}, by bisection on the evaluated φ.
fn brute_quasi_inverse(phi: &PhiTransform, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let at = |u: f64| match phi.phi_at(ExtReal::Finite(u)) {
        ExtReal::Finite(v) => v,
        ExtReal::Infinity => f64::INFINITY,
    };
    let mut hi = 1.0;
    while at(hi) < t {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn criterion_5() -> Verdict {
    let mesh = GridSpec::default().mesh;
    let square: Vec<(f64, f64)> = (0..=64).map(|i| (i as f64 / 8.0, (i as f64 / 8.0).powi(2))).collect();
    let cases = [
        ("identity", validate_phi(vec![(0.0, 0.0)], Tail::Slope(1.0)).unwrap()),
        ("x^2", validate_phi(square, Tail::Slope(16.0)).unwrap()),
        (
            "flat",
            validate_phi(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 4.0)], Tail::Slope(2.0)).unwrap(),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, phi) in &cases {
        let mut worst_gap = 0.0f64;
        let mut worst_ineq = f64::NEG_INFINITY;
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(0.0..70.0);
            let hat = match phi.phi_hat_at(ExtReal::Finite(t)) {
                ExtReal::Finite(v) => v,
                ExtReal::Infinity => f64::INFINITY,
            };
            worst_gap = worst_gap.max((hat - brute_quasi_inverse(phi, t)).abs());
            // φ(φ̂(t)) ≤ t and φ̂(φ(x)) ≤ x, with x = t as the test point.
            if let ExtReal::Finite(v) = phi.phi_at(ExtReal::Finite(hat)) {
                worst_ineq = worst_ineq.max(v - t);
            }
            if let ExtReal::Finite(v) = phi.phi_at(ExtReal::Finite(t)) {
                if let ExtReal::Finite(back) = phi.phi_hat_at(ExtReal::Finite(v)) {
                    worst_ineq = worst_ineq.max(back - t);
                }
            }
        }
        ok &= worst_gap <= mesh && worst_ineq <= 1e-9;
        parts.push(format!("{name}: gap {worst_gap:.1e}, slack {worst_ineq:.1e}"));
    }
    verdict(ok, format!("{} (gap tol {mesh})", parts.join("; ")))
}

/// Two inputs and the exact τ_M of them.
type Case = (DistributionFunction, DistributionFunction, Box<dyn Fn(f64) -> f64>);

fn criterion_6() -> Verdict {
    let grid = GridSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_random = 0.0f64;
    for _ in 0..100 {
        let f = random_distribution(&mut rng);
        let g = random_distribution(&mut rng);
        let (fast, brute) = (tau_m(&f, &g), tau_m_brute(&f, &g, &grid));
        for x in grid.points() {
            worst_random = worst_random.max((fast.at(x) - brute.at(x)).abs());
        }
    }
    let rational = |c: f64| DistributionFunction::from_closed_form(&grid, 1.0, move |x| x / (x + c));
    let ramp = |c: f64| DistributionFunction::new(vec![(0.0, 0.0), (c, 1.0)], 1.0).unwrap();
    let step = |c: f64| DistributionFunction::step_at(c, &grid);
    let cases: [Case; 3] = [
        (rational(1.0), rational(1.0), Box::new(|x| x / (x + 2.0))),
        (ramp(1.0), ramp(2.0), Box::new(|x| (x / 3.0).min(1.0))),
        (step(1.0), step(2.0), Box::new(|x| if x > 3.0 { 1.0 } else { 0.0 })),
    ];
    let mut worst_analytic = 0.0f64;
    for (f, g, exact) in &cases {
        let h = tau_m(f, g);
        for x in grid.points() {
            worst_analytic = worst_analytic.max((h.at(x) - exact(x)).abs());
        }
    }
    verdict(
        worst_random <= TAU_M_TOL && worst_analytic <= TAU_M_TOL,
        format!("fast vs brute {worst_random:.1e} on 100 pairs, analytic cases {worst_analytic:.1e} (tol {TAU_M_TOL})"),
    )
}

fn criterion_7() -> Verdict {
    let grid = GridSpec::default();
    let opts = ProbeOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = Instant::now();
    let finite = PointSet::explicit(vec![Vector::scalar(1.0), Vector::scalar(2.0), Vector::scalar(3.0)]);
    let a = analysis::lemma_1_12_consistency(&PNSpace::ex25(), &finite, &grid, &opts, &mut rng).unwrap();
    let naturals = PointSet::Parametric(ParametricSet::Naturals);
    let b = analysis::lemma_1_12_consistency(&PNSpace::ex25(), &naturals, &grid, &opts, &mut rng).unwrap();
    let c = analysis::lemma_1_12_consistency(&PNSpace::ex22(0.5).unwrap(), &finite, &grid, &opts, &mut rng).unwrap();
    let elapsed = start.elapsed();
    verdict(
        a.status == ConsistencyStatus::AllBounded
            && b.status == ConsistencyStatus::AllUnbounded
            && c.status == ConsistencyStatus::HypothesisNotMet
            && elapsed < PROBE_TIME,
        format!(
            "{{1,2,3}} {:?}, N {:?}, non-characteristic {:?}, {elapsed:?} (limit {PROBE_TIME:?})",
            a.status, b.status, c.status
        ),
    )
}

fn criterion_8() -> Verdict {
    let grid = GridSpec::default();
    // Convergents of √3 from below: (p, q) -> (2p + 3q, p + 2q), from 5/3.
    let mut terms = Vec::new();
    let (mut p, mut q) = (5i64, 3i64);
    while q <= 10_000_000 {
        terms.push(Vector::rational_scalar(p, q));
        (p, q) = (2 * p + 3 * q, p + 2 * q);
    }
    let set = PointSet::Parametric(ParametricSet::Interval {
        lo: analysis::Endpoint::Sqrt { sqrt: 2 },
        hi: analysis::Endpoint::Sqrt { sqrt: 3 },
        rational_only: true,
    });
    let seqs = vec![NamedSequence {
        name: "sqrt3 convergents".into(),
        terms,
    }];
    let candidates = vec![
        Vector::scalar(3f64.sqrt()).with_rational(false),
        Vector::rational_scalar(3, 2),
        Vector::rational_scalar(5, 3),
        Vector::rational_scalar(1732, 1000),
        Vector::rational_scalar(173_205, 100_000),
    ];
    let r = analysis::d_compactness_probe(
        &PNSpace::ex25(),
        &set,
        &seqs,
        &candidates,
        &analysis::COMPACTNESS_LAMBDAS,
        &grid,
    )
    .unwrap();
    let outcome = &r.sequences[0];
    verdict(
        r.verdict == CompactnessVerdict::CounterexampleToDCompactness
            && outcome.outcome == "outside_carrier"
            && outcome.certificate.is_some()
            && r.d_bounded
            && !r.closedness_violated,
        format!(
            "verdict {:?}, outcome {}, D-bounded {}, closedness violated {}",
            r.verdict, outcome.outcome, r.d_bounded, r.closedness_violated
        ),
    )
}

fn criterion_9() -> Verdict {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_pnkit"))
            .args(["paper-demo", "--seed", "7"])
            .env_remove("PNSPACE_GRID")
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    verdict(
        a.status.code() == Some(0) && b.status.code() == Some(0) && a.stdout == b.stdout,
        format!(
            "exit codes {:?}/{:?}, identical bytes {}",
            a.status.code(),
            b.status.code(),
            a.stdout == b.stdout
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [fn() -> Verdict; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut failed = Vec::new();
    for (i, c) in criteria.iter().enumerate() {
        let v = c();
        println!(
            "criterion {}: {}  {}",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
