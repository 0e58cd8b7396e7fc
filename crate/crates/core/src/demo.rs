//! End-to-end reproduction of the two worked examples: the non-characteristic
//! space `a·x/(x+|p|)` and the rational line with `t/(t+|p|)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    self, BoundednessClass, CompactnessVerdict, ConsistencyStatus, Endpoint, NamedSequence, ParametricSet, PointSet,
    ProbeOptions, RangeStatus,
};
use crate::distfn::GridSpec;
use crate::error::Result;
use crate::pnspace::{self, PNSpace, Vector};

/// Test hooks that break one claim on purpose.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DemoHooks {
    /// Compare the rational-line radius against `t/(t+min|p|)` instead.
    pub wrong_radius: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Claim {
    pub id: String,
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub seed: u64,
    pub grid: GridSpec,
    pub claims: Vec<Claim>,
    pub all_passed: bool,
}

impl DemoReport {
    pub fn failed(&self) -> Vec<&Claim> {
        self.claims.iter().filter(|c| !c.passed).collect()
    }
}

/// Parameter of the non-characteristic example.
pub const EX22_A: f64 = 0.5;
/// Number of rational samples for the sampled radius.
pub const RADIUS_SAMPLES: usize = 1000;
/// Agreement required between the sampled radius and its closed form.
pub const RADIUS_TOL: f64 = 1e-3;

fn claim(id: &str, text: &str, passed: bool, detail: String) -> Claim {
    Claim {
        id: id.into(),
        claim: text.into(),
        passed,
        detail,
    }
}

/// Neighbourhood radii straddling the threshold for `{1/m} → 0` when
/// `a = 1/2`, with the expected verdict at each. `ν_{1/m}(λ) < a` for every
/// m, so the tail lies in `N_θ(λ)` exactly when `λ > 1 − a`.
pub const THRESHOLD_LAMBDAS: [(f64, bool); 6] = [
    (0.9, true),
    (0.75, true),
    (0.6, true),
    (0.5, false),
    (0.25, false),
    (0.1, false),
];

pub fn run_demo(seed: u64, grid: &GridSpec, hooks: DemoHooks) -> Result<DemoReport> {
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut claims = Vec::new();

    // Non-characteristic space.
    let ex22 = PNSpace::ex22(EX22_A)?;
    let harmonic: Vec<Vector> = (1..=1000).map(|m| Vector::rational_scalar(1, m)).collect();
    let theta = Vector::scalar(0.0);

    let classical = harmonic.iter().skip(99).all(|p| p.norm() <= 0.01);
    let mut pattern = Vec::new();
    for &(lambda, _) in &THRESHOLD_LAMBDAS {
        pattern.push(pnspace::is_strongly_convergent(&ex22, &harmonic, &theta, &[lambda])?.holds);
    }
    let expected: Vec<bool> = THRESHOLD_LAMBDAS.iter().map(|&(_, e)| e).collect();
    claims.push(claim(
        "ex22.convergence",
        "1/m -> 0; the neighbourhoods N_theta(lambda) capture its tail exactly when lambda > 1 - a",
        classical && pattern == expected,
        format!("lambdas {:?} certified {:?}", THRESHOLD_LAMBDAS.map(|p| p.0), pattern),
    ));

    let a_set = PointSet::explicit(harmonic.clone());
    let r = analysis::radius_report(&ex22, &a_set, grid)?;
    claims.push(claim(
        "ex22.range_not_d_bounded",
        "{1/m : m <= 1000} is PerhapsUnbounded, hence not D-bounded",
        r.class == BoundednessClass::PerhapsUnbounded && !r.d_bounded,
        format!("class {:?}, left limit {}", r.class, r.left_limit),
    ));

    let mut singles = Vec::new();
    for x in [1e-3, 0.5, 1.0, -2.0, 7.0, 1e3] {
        let c = analysis::radius_report(&ex22, &PointSet::explicit(vec![Vector::scalar(x)]), grid)?;
        singles.push((x, c.d_bounded));
    }
    let zero = analysis::radius_report(&ex22, &PointSet::explicit(vec![theta.clone()]), grid)?;
    claims.push(claim(
        "ex22.only_zero_d_bounded",
        "nonzero singletons are not D-bounded; {0} is",
        singles.iter().all(|s| !s.1) && zero.d_bounded,
        format!("singletons {singles:?}, zero class {:?}", zero.class),
    ));

    let th = analysis::theorem_2_1_check(&ex22, &harmonic, &theta, None, &[0.9, 0.75], grid)?;
    let consistency = analysis::lemma_1_12_consistency(&ex22, &a_set, grid, &ProbeOptions::default(), &mut rng)?;
    claims.push(claim(
        "ex22.not_characteristic",
        "the space is not characteristic: convergent range need not be D-bounded, boundedness probes do not apply",
        !th.characteristic
            && th.status == RangeStatus::CounterBehaviourObserved
            && consistency.status == ConsistencyStatus::HypothesisNotMet,
        format!(
            "range check {:?}, probe consistency {:?}",
            th.status, consistency.status
        ),
    ));

    // Rational line.
    let ex25 = PNSpace::ex25();
    let (lo, hi) = (Endpoint::Sqrt { sqrt: 2 }, Endpoint::Sqrt { sqrt: 3 });
    let samples = analysis::rational_samples(&lo, &hi, RADIUS_SAMPLES, &mut rng);
    let sampled = PointSet::Sampled {
        description: "rationals in [sqrt(2), sqrt(3)]".into(),
        points: samples,
    };
    let (radius, _) = analysis::probabilistic_radius(&ex25, &sampled, grid)?;
    let c = if hooks.wrong_radius { 2f64.sqrt() } else { 3f64.sqrt() };
    let worst = (1..=50)
        .map(|i| {
            let t = 0.2 * i as f64;
            (radius.at(t) - t / (t + c)).abs()
        })
        .fold(0.0f64, f64::max);
    claims.push(claim(
        "ex25.radius_formula",
        "sampled radius of Q ∩ [sqrt(2), sqrt(3)] equals t/(t + max(|a|,|b|)) = t/(t + sqrt(3))",
        worst <= RADIUS_TOL,
        format!("max deviation {worst:.3e} over 50 abscissae, tolerance {RADIUS_TOL}"),
    ));

    let a = PointSet::Parametric(ParametricSet::Interval {
        lo,
        hi,
        rational_only: true,
    });
    let r = analysis::radius_report(&ex25, &a, grid)?;
    claims.push(claim(
        "ex25.d_bounded",
        "A = Q ∩ [sqrt(2), sqrt(3)] is D-bounded",
        r.d_bounded && r.class == BoundednessClass::PerhapsBounded,
        format!("class {:?}", r.class),
    ));

    let conv = NamedSequence {
        name: "convergents of sqrt(3)".into(),
        terms: analysis::sqrt_convergents_in(3, &lo, &hi),
    };
    let mut candidates = vec![Vector::scalar(3f64.sqrt()).with_rational(false), lo.as_vector()];
    candidates.extend(
        [(5, 3), (173, 100), (1732, 1000), (3, 2)]
            .iter()
            .map(|&(p, q)| Vector::rational_scalar(p, q)),
    );
    let (mut seqs, mut more) = analysis::default_compactness_inputs(&a, &mut rng);
    seqs.insert(0, conv);
    candidates.append(&mut more);
    let comp = analysis::d_compactness_probe(&ex25, &a, &seqs, &candidates, &analysis::COMPACTNESS_LAMBDAS, grid)?;
    claims.push(claim(
        "ex25.closed",
        "no test sequence converges to a rational outside A",
        !comp.closedness_violated,
        format!("{} sequences probed", comp.sequences.len()),
    ));
    let cert = comp.sequences.first().and_then(|o| o.certificate.clone());
    claims.push(claim(
        "ex25.not_d_compact",
        "the sqrt(3) convergents converge to a limit outside Q, so A is not D-compact",
        comp.verdict == CompactnessVerdict::CounterexampleToDCompactness
            && comp.sequences[0].outcome == "outside_carrier",
        cert.unwrap_or_else(|| format!("verdict {:?}", comp.verdict)),
    ));

    let all_passed = claims.iter().all(|c| c.passed);
    Ok(DemoReport {
        seed,
        grid: *grid,
        claims,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_demo_passes() {
        let r = run_demo(7, &GridSpec::default(), DemoHooks::default()).unwrap();
        assert!(r.all_passed, "{:#?}", r.failed());
    }

    #[test]
    fn coarser_grid_passes() {
        let g = GridSpec::new(2.0 * crate::distfn::DEFAULT_MESH, 128.0, 1e-9).unwrap();
        let r = run_demo(7, &g, DemoHooks::default()).unwrap();
        assert!(r.all_passed, "{:#?}", r.failed());
    }

    #[test]
    fn wrong_radius_is_caught() {
        let r = run_demo(7, &GridSpec::default(), DemoHooks { wrong_radius: true }).unwrap();
        let failed: Vec<&str> = r.failed().iter().map(|c| c.id.as_str()).collect();
        assert_eq!(failed, ["ex25.radius_formula"]);
    }

    #[test]
    fn deterministic() {
        let a = serde_json::to_string(&run_demo(11, &GridSpec::default(), DemoHooks::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&run_demo(11, &GridSpec::default(), DemoHooks::default()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
