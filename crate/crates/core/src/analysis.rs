//! Probabilistic radius, boundedness classes and boundedness/compactness
//! probes.
//!
//! Every probe here is desk-scale: it inspects finite prefixes and finite
//! samples, and says so in its report. Negative answers (counterexamples,
//! certificates) are definite; positive answers mean "nothing found".

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distfn::{DistributionFunction, ExtReal, GridSpec, REFINE_TOL};
use crate::error::{Error, Result};
use crate::pnspace::{self, CharacteristicReport, ConvergenceReport, NormFamily, PNSpace, Vector};

/// Endpoint of a parametric interval: a number or `√n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Value(f64),
    Sqrt { sqrt: u64 },
}

impl Endpoint {
    pub fn value(&self) -> f64 {
        match *self {
            Endpoint::Value(v) => v,
            Endpoint::Sqrt { sqrt } => (sqrt as f64).sqrt(),
        }
    }

    /// Whether the endpoint is a rational number (floats are).
    pub fn is_rational(&self) -> bool {
        match *self {
            Endpoint::Value(_) => true,
            Endpoint::Sqrt { sqrt } => is_square(sqrt),
        }
    }

    /// The endpoint as a one-dimensional vector with an exact rational flag.
    pub fn as_vector(&self) -> Vector {
        Vector::scalar(self.value()).with_rational(self.is_rational())
    }

    /// `num/den ≥ self`, decided exactly for `√n`.
    fn below_or_at(&self, num: i64, den: i64) -> bool {
        match *self {
            Endpoint::Value(v) => num as f64 / den as f64 >= v,
            Endpoint::Sqrt { sqrt } => num >= 0 && (num as i128).pow(2) >= sqrt as i128 * (den as i128).pow(2),
        }
    }

    /// `num/den ≤ self`, decided exactly for `√n`.
    fn above_or_at(&self, num: i64, den: i64) -> bool {
        match *self {
            Endpoint::Value(v) => num as f64 / den as f64 <= v,
            Endpoint::Sqrt { sqrt } => num <= 0 || (num as i128).pow(2) <= sqrt as i128 * (den as i128).pow(2),
        }
    }
}

fn is_square(n: u64) -> bool {
    let r = (n as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).any(|k| k * k == n)
}

/// Subsets of ℝ given by a rule rather than a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ParametricSet {
    /// `[lo, hi]`, optionally intersected with ℚ.
    Interval {
        lo: Endpoint,
        hi: Endpoint,
        #[serde(default)]
        rational_only: bool,
    },
    /// `{1/m : m ∈ ℕ}`.
    Harmonic,
    /// `{m : m ∈ ℕ}`.
    Naturals,
}

impl ParametricSet {
    pub fn describe(&self) -> String {
        match self {
            ParametricSet::Interval { lo, hi, rational_only } => format!(
                "[{}, {}]{}",
                endpoint_label(lo),
                endpoint_label(hi),
                if *rational_only { " ∩ Q" } else { "" }
            ),
            ParametricSet::Harmonic => "{1/m : m in N}".into(),
            ParametricSet::Naturals => "{m : m in N}".into(),
        }
    }

    /// `sup{|p| : p ∈ A}` and whether some member attains it.
    pub fn sup_norm(&self) -> (f64, bool) {
        match self {
            ParametricSet::Interval { lo, hi, rational_only } => {
                let (l, h) = (lo.value().abs(), hi.value().abs());
                let end = if h >= l { hi } else { lo };
                (l.max(h), !*rational_only || end.is_rational())
            }
            ParametricSet::Harmonic => (1.0, true),
            ParametricSet::Naturals => (f64::INFINITY, false),
        }
    }

    pub fn contains(&self, v: &Vector) -> bool {
        if v.dim() != 1 {
            return false;
        }
        let x = v.coords[0];
        match self {
            ParametricSet::Interval { lo, hi, rational_only } => {
                x >= lo.value() && x <= hi.value() && (!*rational_only || v.rational == Some(true))
            }
            ParametricSet::Harmonic => {
                let m = (1.0 / x).round();
                x > 0.0 && m >= 1.0 && (1.0 / m - x).abs() <= 4.0 * f64::EPSILON * x
            }
            ParametricSet::Naturals => x >= 1.0 && x.fract() == 0.0,
        }
    }

    /// The first `n` members in a canonical order: `1/m` and `m` for the
    /// sequence families, random members for intervals.
    pub fn enumerate<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Vector> {
        match self {
            ParametricSet::Interval { lo, hi, rational_only } => {
                if *rational_only {
                    rational_samples(lo, hi, n, rng)
                } else {
                    let (l, h) = (lo.value(), hi.value());
                    let mut v: Vec<Vector> = (0..n.saturating_sub(2))
                        .map(|_| Vector::scalar(rng.gen_range(l..=h)))
                        .collect();
                    v.push(Vector::scalar(l));
                    v.push(Vector::scalar(h));
                    v.truncate(n.max(1));
                    v
                }
            }
            ParametricSet::Harmonic => (1..=n as i64).map(|m| Vector::rational_scalar(1, m)).collect(),
            ParametricSet::Naturals => (1..=n as i64).map(|m| Vector::rational_scalar(m, 1)).collect(),
        }
    }
}

fn endpoint_label(e: &Endpoint) -> String {
    match e {
        Endpoint::Value(v) => v.to_string(),
        Endpoint::Sqrt { sqrt } => format!("sqrt({sqrt})"),
    }
}

/// `n` random rationals `num/den` in `[lo, hi]`, with `den` drawn from
/// `1000..=100000`; membership is decided exactly.
pub fn rational_samples<R: Rng>(lo: &Endpoint, hi: &Endpoint, n: usize, rng: &mut R) -> Vec<Vector> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let den: i64 = rng.gen_range(1000..=100_000);
        let a = (lo.value() * den as f64).floor() as i64;
        let b = (hi.value() * den as f64).ceil() as i64;
        if b < a {
            continue;
        }
        let num = rng.gen_range(a..=b);
        if lo.below_or_at(num, den) && hi.above_or_at(num, den) {
            out.push(Vector::rational_scalar(num, den));
        }
    }
    out
}

/// Continued-fraction convergents `p/q` of `√n`, up to denominators of 10⁷.
pub fn sqrt_convergents(n: u64) -> Vec<(i64, i64)> {
    let a0 = (n as f64).sqrt().floor() as i64;
    let a0 = (a0 - 1..=a0 + 1).filter(|k| k * k <= n as i64).max().unwrap_or(0);
    if a0 * a0 == n as i64 {
        return vec![(a0, 1)];
    }
    let (mut m, mut d, mut a) = (0i64, 1i64, a0);
    let (mut p_prev, mut p) = (1i64, a0);
    let (mut q_prev, mut q) = (0i64, 1i64);
    let mut out = vec![(p, q)];
    loop {
        m = d * a - m;
        d = (n as i64 - m * m) / d;
        a = (a0 + m) / d;
        let (p_next, q_next) = (a * p + p_prev, a * q + q_prev);
        if q_next > 10_000_000 {
            break;
        }
        (p_prev, p, q_prev, q) = (p, p_next, q, q_next);
        out.push((p, q));
    }
    out
}

/// Convergents of `√n` that lie in `[lo, hi]`, decided exactly, as rational
/// vectors.
pub fn sqrt_convergents_in(n: u64, lo: &Endpoint, hi: &Endpoint) -> Vec<Vector> {
    sqrt_convergents(n)
        .into_iter()
        .filter(|&(p, q)| lo.below_or_at(p, q) && hi.above_or_at(p, q))
        .map(|(p, q)| Vector::rational_scalar(p, q))
        .collect()
}

/// A nonempty subset of the carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointSet {
    Explicit {
        points: Vec<Vector>,
    },
    Parametric(ParametricSet),
    /// A finite sample standing in for a described set.
    Sampled {
        description: String,
        points: Vec<Vector>,
    },
}

impl PointSet {
    pub fn explicit(points: Vec<Vector>) -> Self {
        PointSet::Explicit { points }
    }

    pub fn describe(&self) -> String {
        match self {
            PointSet::Explicit { points } => {
                let items: Vec<String> = points.iter().map(|p| p.to_string()).collect();
                format!("{{{}}}", items.join(", "))
            }
            PointSet::Parametric(p) => p.describe(),
            PointSet::Sampled { description, points } => format!("{description} ({} samples)", points.len()),
        }
    }

    pub fn validate(&self, space: &PNSpace) -> Result<()> {
        match self {
            PointSet::Explicit { points } | PointSet::Sampled { points, .. } => {
                if points.is_empty() {
                    return Err(Error::InvalidArgument("point set is empty".into()));
                }
                for p in points {
                    space.check_dim(p)?;
                }
                Ok(())
            }
            PointSet::Parametric(ParametricSet::Interval { lo, hi, .. }) => {
                if space.dim != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: space.dim,
                        got: 1,
                    });
                }
                if lo.value() > hi.value() {
                    return Err(Error::InvalidArgument("interval is empty".into()));
                }
                Ok(())
            }
            PointSet::Parametric(_) => {
                if space.dim != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: space.dim,
                        got: 1,
                    });
                }
                Ok(())
            }
        }
    }

    /// Membership; for sampled sets, membership in the sample.
    pub fn contains(&self, v: &Vector) -> bool {
        match self {
            PointSet::Explicit { points } | PointSet::Sampled { points, .. } => {
                points.iter().any(|p| p.coords == v.coords)
            }
            PointSet::Parametric(p) => p.contains(v),
        }
    }

    /// All listed members, or `n` members of a parametric set.
    pub fn members<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Vector> {
        match self {
            PointSet::Explicit { points } | PointSet::Sampled { points, .. } => points.clone(),
            PointSet::Parametric(p) => p.enumerate(n, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Sampled,
}

/// `R_A(x) = l⁻ inf{ν_p(x) : p ∈ A}`.
///
/// Explicit and sampled sets take the pointwise minimum of the closed forms.
/// A minimum of finitely many left-continuous non-decreasing functions is
/// left-continuous, so the left regularisation changes nothing. Parametric
/// sets use the family's monotonicity in `|p|`: the infimum is ν at the
/// supremum norm, and ε_∞ when that is infinite.
pub fn probabilistic_radius(
    space: &PNSpace,
    a: &PointSet,
    grid: &GridSpec,
) -> Result<(DistributionFunction, Exactness)> {
    a.validate(space)?;
    match a {
        PointSet::Explicit { points } => Ok((radius_of_points(space, points, grid), Exactness::Exact)),
        PointSet::Sampled { points, .. } => Ok((radius_of_points(space, points, grid), Exactness::Sampled)),
        PointSet::Parametric(p) => {
            if !space.norm.is_monotone_in_norm() {
                return Err(Error::Config(format!(
                    "no parametric radius rule for norm family {}",
                    space.norm.id()
                )));
            }
            let (s, _) = p.sup_norm();
            Ok((space.norm.distribution_at_norm(s, grid), Exactness::Exact))
        }
    }
}

fn radius_of_points(space: &PNSpace, points: &[Vector], grid: &GridSpec) -> DistributionFunction {
    let mut norms: Vec<f64> = points.iter().map(Vector::norm).collect();
    norms.sort_by(f64::total_cmp);
    norms.dedup();
    // ν_θ = ε₀ lies above every other ν_p.
    if norms.len() > 1 {
        norms.retain(|&r| r > 0.0);
    }
    if norms.len() == 1 {
        return space.norm.distribution_at_norm(norms[0], grid);
    }
    let limit = norms.iter().map(|&r| space.norm.limit_at_norm(r)).fold(1.0, f64::min);
    if let NormFamily::Simple = space.norm {
        // The minimum of the steps ε_r is the step at the largest r.
        return space.norm.distribution_at_norm(*norms.last().expect("nonempty"), grid);
    }
    DistributionFunction::from_closed_form(grid, limit, |x| {
        norms
            .iter()
            .map(|&r| space.norm.value_at_norm(r, ExtReal::Finite(x)))
            .fold(1.0, f64::min)
    })
}

/// Classes of a probabilistic radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundednessClass {
    /// `R_A(x₀) = 1` for some finite `x₀`.
    CertainlyBounded,
    /// `R_A < 1` everywhere, left limit 1 at +∞.
    PerhapsBounded,
    /// Left limit at +∞ in `(0, 1)`.
    PerhapsUnbounded,
    /// `R_A = ε_∞`.
    CertainlyUnbounded,
}

impl BoundednessClass {
    pub fn is_d_bounded(self) -> bool {
        matches!(
            self,
            BoundednessClass::CertainlyBounded | BoundednessClass::PerhapsBounded
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub class: BoundednessClass,
    pub d_bounded: bool,
    /// An abscissa where the radius reaches 1, for the first class.
    pub x0: Option<f64>,
    pub left_limit: f64,
    pub diagnostics: Vec<String>,
}

/// Assigns the boundedness class of a radius. "Reaches 1" means `≥ 1 − tol`;
/// the left limit is read in the bands `[1−tol, 1]`, `[tol, 1−tol)` and
/// `[0, tol)`.
pub fn classify_boundedness(r: &DistributionFunction, tol: f64) -> Result<Classification> {
    let left_limit = r.value_at_inf();
    let mut diagnostics = Vec::new();
    if let Some(&(x0, _)) = r.knots().iter().find(|k| k.1 >= 1.0 - tol) {
        return Ok(Classification {
            class: BoundednessClass::CertainlyBounded,
            d_bounded: true,
            x0: Some(x0),
            left_limit,
            diagnostics,
        });
    }
    let class = if left_limit >= 1.0 - tol {
        BoundednessClass::PerhapsBounded
    } else if left_limit >= tol {
        BoundednessClass::PerhapsUnbounded
    } else {
        if r.last_value() >= tol {
            return Err(Error::Classification(format!(
                "left limit {left_limit} below {tol} but the radius reaches {}",
                r.last_value()
            )));
        }
        diagnostics.push(format!(
            "left limit {left_limit} < {tol}; a non-decreasing radius with vanishing left limit is identically 0, i.e. eps_inf"
        ));
        BoundednessClass::CertainlyUnbounded
    };
    Ok(Classification {
        class,
        d_bounded: class.is_d_bounded(),
        x0: None,
        left_limit,
        diagnostics,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusReport {
    pub set: String,
    pub radius: DistributionFunction,
    pub class: BoundednessClass,
    pub d_bounded: bool,
    pub x0: Option<f64>,
    pub left_limit: f64,
    pub exactness: Exactness,
    pub diagnostics: Vec<String>,
    pub grid: GridSpec,
}

/// Radius plus class.
pub fn radius_report(space: &PNSpace, a: &PointSet, grid: &GridSpec) -> Result<RadiusReport> {
    let (radius, exactness) = probabilistic_radius(space, a, grid)?;
    let c = classify_boundedness(&radius, grid.tol_eq)?;
    Ok(RadiusReport {
        set: a.describe(),
        radius,
        class: c.class,
        d_bounded: c.d_bounded,
        x0: c.x0,
        left_limit: c.left_limit,
        exactness,
        diagnostics: c.diagnostics,
        grid: *grid,
    })
}

/// Members checked when a parametric set has to be sampled.
pub const PARAMETRIC_SAMPLES: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct DBoundedWitness {
    pub d_bounded: bool,
    /// `G = R_A`, when A is D-bounded.
    pub witness: Option<DistributionFunction>,
    pub members_checked: usize,
    /// For D-bounded sets: `ν_p ≥ G` held for every checked member.
    pub verified: bool,
    /// For other sets: test functions in D⁺ that stayed below every checked
    /// `ν_p`. Empty means none of them is a common lower bound.
    pub lower_bounding_tests: Vec<String>,
    pub tests_tried: usize,
}

fn d_plus_test_family(grid: &GridSpec) -> Vec<(String, DistributionFunction)> {
    let mut fam = Vec::new();
    for c in [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3] {
        let f = DistributionFunction::from_closed_form(grid, 1.0, move |x| x / (x + c));
        fam.push((format!("x/(x+{c})"), f));
    }
    for c in [1e-2, 1.0, 100.0] {
        fam.push((format!("eps_{c}"), DistributionFunction::step_at(c, grid)));
    }
    for c in [1.0, 1e3] {
        let f = DistributionFunction::new(vec![(0.0, 0.0), (c, 1.0)], 1.0).expect("valid ramp");
        fam.push((format!("min(1, x/{c})"), f));
    }
    fam
}

/// A common D⁺ lower bound of `{ν_p : p ∈ A}`, when one exists.
pub fn d_bounded_witness<R: Rng>(
    space: &PNSpace,
    a: &PointSet,
    grid: &GridSpec,
    rng: &mut R,
) -> Result<DBoundedWitness> {
    let (radius, _) = probabilistic_radius(space, a, grid)?;
    let class = classify_boundedness(&radius, grid.tol_eq)?;
    let members = a.members(PARAMETRIC_SAMPLES, rng);
    let tol = grid.tol_eq + REFINE_TOL;
    if class.d_bounded {
        let xs = crate::distfn::comparison_abscissae(&[&radius], grid);
        let verified = members.par_iter().all(|p| {
            xs.iter()
                .all(|&x| radius.at(x) <= space.nu_at(p, ExtReal::Finite(x)) + tol)
                && radius.value_at_inf() <= space.nu_limit(p) + tol
        });
        return Ok(DBoundedWitness {
            d_bounded: true,
            witness: Some(radius),
            members_checked: members.len(),
            verified,
            lower_bounding_tests: Vec::new(),
            tests_tried: 0,
        });
    }
    let probes: Vec<f64> = (-3..=6).map(|k| 10f64.powi(k)).collect();
    let family = d_plus_test_family(grid);
    let lower: Vec<String> = family
        .iter()
        .filter(|(_, g)| {
            members.iter().all(|p| {
                probes
                    .iter()
                    .all(|&x| g.at(x) <= space.nu_at(p, ExtReal::Finite(x)) + tol)
                    && g.value_at_inf() <= space.nu_limit(p) + tol
            })
        })
        .map(|(name, _)| name.clone())
        .collect();
    Ok(DBoundedWitness {
        d_bounded: false,
        witness: None,
        members_checked: members.len(),
        verified: lower.is_empty(),
        lower_bounding_tests: lower,
        tests_tried: family.len(),
    })
}

/// Scalar sequences tending to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarSequence {
    /// `1/n`
    Harmonic,
    /// `(−1)ⁿ/n`
    AlternatingHarmonic,
    /// `1/n²`
    InverseSquare,
    Custom {
        name: String,
        terms: Vec<f64>,
    },
}

impl ScalarSequence {
    pub fn name(&self) -> String {
        match self {
            ScalarSequence::Harmonic => "1/n".into(),
            ScalarSequence::AlternatingHarmonic => "(-1)^n/n".into(),
            ScalarSequence::InverseSquare => "1/n^2".into(),
            ScalarSequence::Custom { name, .. } => name.clone(),
        }
    }

    pub fn terms(&self, len: usize) -> Vec<f64> {
        let n = |i: usize| (i + 1) as f64;
        match self {
            ScalarSequence::Harmonic => (0..len).map(|i| 1.0 / n(i)).collect(),
            ScalarSequence::AlternatingHarmonic => (0..len)
                .map(|i| if (i + 1) % 2 == 0 { 1.0 } else { -1.0 } / n(i))
                .collect(),
            ScalarSequence::InverseSquare => (0..len).map(|i| 1.0 / (n(i) * n(i))).collect(),
            ScalarSequence::Custom { terms, .. } => terms.iter().take(len).copied().collect(),
        }
    }

    pub fn defaults() -> Vec<ScalarSequence> {
        vec![
            ScalarSequence::Harmonic,
            ScalarSequence::AlternatingHarmonic,
            ScalarSequence::InverseSquare,
        ]
    }
}

/// A named finite sequence of vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSequence {
    pub name: String,
    pub terms: Vec<Vector>,
}

/// Default point sequences drawn from `A`.
pub fn default_point_sequences<R: Rng>(a: &PointSet, len: usize, rng: &mut R) -> Vec<NamedSequence> {
    let members = match a {
        PointSet::Parametric(ParametricSet::Naturals) => {
            return vec![NamedSequence {
                name: "p_n = n".into(),
                terms: a.members(len, rng),
            }]
        }
        PointSet::Parametric(ParametricSet::Harmonic) => {
            return vec![NamedSequence {
                name: "p_n = 1/n".into(),
                terms: a.members(len, rng),
            }]
        }
        _ => a.members(len, rng),
    };
    let largest = members
        .iter()
        .max_by(|p, q| p.norm().total_cmp(&q.norm()))
        .expect("nonempty set")
        .clone();
    vec![
        NamedSequence {
            name: "members in order, cycled".into(),
            terms: (0..len).map(|i| members[i % members.len()].clone()).collect(),
        },
        NamedSequence {
            name: format!("constant at largest member {largest}"),
            terms: vec![largest; len],
        },
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct Pairing {
    pub scalars: String,
    pub points: String,
    pub converges_to_theta: bool,
    /// Radii at which no certified tail was found.
    pub failing_lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopoBoundednessReport {
    pub verdict: String,
    pub counterexample: Option<Pairing>,
    pub pairings: Vec<Pairing>,
    pub basis: String,
}

impl TopoBoundednessReport {
    pub fn no_counterexample(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks `α_n p_n → θ` for each pairing of a scalar sequence with a point
/// sequence, prefix-based. Point sequences shorter than `len` are cycled.
pub fn topological_boundedness_probe(
    space: &PNSpace,
    scalars: &[ScalarSequence],
    points: &[NamedSequence],
    lambdas: &[f64],
    len: usize,
) -> Result<TopoBoundednessReport> {
    if len == 0 || points.iter().any(|s| s.terms.is_empty()) {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    for s in scalars {
        let t = s.terms(len);
        let half = t.len() / 2;
        let head = t[..half.max(1)].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tail = t[half..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if t.is_empty() || !(tail <= 0.5 * head) {
            return Err(Error::InvalidArgument(format!(
                "scalar sequence {} does not visibly tend to 0 on its prefix",
                s.name()
            )));
        }
    }
    let theta = Vector::zero(space.dim);
    let mut jobs = Vec::new();
    for s in scalars {
        for p in points {
            jobs.push((s, p));
        }
    }
    let pairings: Vec<Pairing> = jobs
        .par_iter()
        .map(|&(s, p)| -> Result<Pairing> {
            let alphas = s.terms(len);
            let seq: Vec<Vector> = alphas
                .iter()
                .enumerate()
                .map(|(i, &a)| p.terms[i % p.terms.len()].scale(a))
                .collect();
            let r = pnspace::is_strongly_convergent(space, &seq, &theta, lambdas)?;
            Ok(Pairing {
                scalars: s.name(),
                points: p.name.clone(),
                converges_to_theta: r.holds,
                failing_lambdas: r.per_lambda.iter().filter(|v| !v.certified).map(|v| v.lambda).collect(),
            })
        })
        .collect::<Result<_>>()?;
    let counterexample = pairings.iter().find(|p| !p.converges_to_theta).cloned();
    Ok(TopoBoundednessReport {
        verdict: if counterexample.is_some() {
            "counterexample found".into()
        } else {
            "no counterexample found".into()
        },
        counterexample,
        pairings,
        basis: "prefix-based".into(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AbsorptionRow {
    pub n: u64,
    pub least_k: Option<u64>,
    pub unabsorbed: Option<Vector>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AbsorptionReport {
    pub rows: Vec<AbsorptionRow>,
    pub all_absorbed: bool,
    pub k_max: u64,
}

/// `p/k ∈ N_θ(1/n)` for a point of norm `r`; `inclusive` relaxes the strict
/// inequality, which is the right test at an unattained supremum norm.
fn absorbed(space: &PNSpace, r: f64, k: u64, n: u64, inclusive: bool) -> bool {
    let lambda = 1.0 / n as f64;
    let v = space.norm.value_at_norm(r / k as f64, ExtReal::Finite(lambda));
    if inclusive {
        v >= 1.0 - lambda
    } else {
        v > 1.0 - lambda
    }
}

/// Least `k ≤ k_max` with `p/k ∈ N_θ(1/n)`; membership is monotone in `k`,
/// so this is a binary search.
fn least_k(space: &PNSpace, r: f64, n: u64, k_max: u64, inclusive: bool) -> Option<u64> {
    if !absorbed(space, r, k_max, n, inclusive) {
        return None;
    }
    let (mut lo, mut hi) = (1u64, k_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if absorbed(space, r, mid, n, inclusive) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}

/// For each `n`, the least `k ≤ k_max` with `A ⊂ k·N_θ(1/n)`.
///
/// Listed sets are checked point by point. Parametric sets use their
/// supremum norm; when it is not attained the inequality is relaxed to `≥`,
/// since every member has a strictly smaller norm.
pub fn absorption_check(space: &PNSpace, a: &PointSet, n_values: &[u64], k_max: u64) -> Result<AbsorptionReport> {
    a.validate(space)?;
    if k_max == 0 || n_values.contains(&0) {
        return Err(Error::InvalidArgument("n and k_max must be positive".into()));
    }
    let rows: Vec<AbsorptionRow> = n_values
        .iter()
        .map(|&n| match a {
            PointSet::Explicit { points } | PointSet::Sampled { points, .. } => {
                let mut worst = Some(1u64);
                let mut unabsorbed = None;
                for p in points {
                    match least_k(space, p.norm(), n, k_max, false) {
                        Some(k) => worst = worst.map(|w| w.max(k)),
                        None => {
                            worst = None;
                            unabsorbed = Some(p.clone());
                            break;
                        }
                    }
                }
                AbsorptionRow {
                    n,
                    least_k: worst,
                    unabsorbed,
                }
            }
            PointSet::Parametric(set) => {
                let (s, attained) = set.sup_norm();
                if s.is_finite() {
                    let k = least_k(space, s, n, k_max, !attained);
                    AbsorptionRow {
                        n,
                        least_k: k,
                        unabsorbed: k.is_none().then(|| Vector::scalar(s)),
                    }
                } else {
                    // Unbounded norms: scan m = 2^j up to 2^53, the last
                    // exactly representable power.
                    let mut worst = Some(1u64);
                    let mut unabsorbed = None;
                    for j in 0..=53 {
                        let m = 1u64 << j;
                        match least_k(space, m as f64, n, k_max, false) {
                            Some(k) => worst = worst.map(|w| w.max(k)),
                            None => {
                                worst = None;
                                unabsorbed = Some(Vector::rational_scalar(m as i64, 1));
                                break;
                            }
                        }
                    }
                    AbsorptionRow {
                        n,
                        least_k: worst,
                        unabsorbed,
                    }
                }
            }
        })
        .collect();
    Ok(AbsorptionReport {
        all_absorbed: rows.iter().all(|r| r.least_k.is_some()),
        rows,
        k_max,
    })
}

/// Knobs shared by the multi-probe checks.
#[derive(Debug, Clone)]
pub struct ProbeOptions {
    pub n_values: Vec<u64>,
    pub k_max: u64,
    pub lambdas: Vec<f64>,
    pub len: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            n_values: vec![1, 2, 5, 10, 100],
            k_max: 1_000_000,
            lambdas: pnspace::DEFAULT_LAMBDAS.to_vec(),
            len: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyStatus {
    HypothesisNotMet,
    AllBounded,
    AllUnbounded,
    Inconsistent,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundednessConsistencyReport {
    pub status: ConsistencyStatus,
    pub characteristic: CharacteristicReport,
    pub d_bounded: Option<bool>,
    pub class: Option<BoundednessClass>,
    pub absorbed: Option<bool>,
    pub topologically_bounded: Option<bool>,
    pub absorption: Option<AbsorptionReport>,
    pub topology: Option<TopoBoundednessReport>,
}

/// Runs the three boundedness probes on a characteristic space and checks
/// that they agree.
pub fn lemma_1_12_consistency<R: Rng>(
    space: &PNSpace,
    a: &PointSet,
    grid: &GridSpec,
    opts: &ProbeOptions,
    rng: &mut R,
) -> Result<BoundednessConsistencyReport> {
    a.validate(space)?;
    let mut probe_points = a.members(PARAMETRIC_SAMPLES, rng);
    for c in [0.5, 1.0, 2.0, 10.0] {
        let mut e = Vector::zero(space.dim);
        e.coords[0] = c;
        probe_points.push(e);
    }
    let characteristic = pnspace::is_characteristic(space, &probe_points, grid.tol_eq)?;
    if !characteristic.characteristic {
        return Ok(BoundednessConsistencyReport {
            status: ConsistencyStatus::HypothesisNotMet,
            characteristic,
            d_bounded: None,
            class: None,
            absorbed: None,
            topologically_bounded: None,
            absorption: None,
            topology: None,
        });
    }
    let radius = radius_report(space, a, grid)?;
    let absorption = absorption_check(space, a, &opts.n_values, opts.k_max)?;
    let sequences = default_point_sequences(a, opts.len, rng);
    let topology =
        topological_boundedness_probe(space, &ScalarSequence::defaults(), &sequences, &opts.lambdas, opts.len)?;
    let verdicts = [radius.d_bounded, absorption.all_absorbed, topology.no_counterexample()];
    let status = if verdicts.iter().all(|&v| v) {
        ConsistencyStatus::AllBounded
    } else if verdicts.iter().all(|&v| !v) {
        ConsistencyStatus::AllUnbounded
    } else {
        ConsistencyStatus::Inconsistent
    };
    Ok(BoundednessConsistencyReport {
        status,
        characteristic,
        d_bounded: Some(radius.d_bounded),
        class: Some(radius.class),
        absorbed: Some(absorption.all_absorbed),
        topologically_bounded: Some(topology.no_counterexample()),
        absorption: Some(absorption),
        topology: Some(topology),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeStatus {
    /// Characteristic space, convergent prefix, D-bounded range.
    Confirmed,
    /// Characteristic space, convergent prefix, range not D-bounded.
    Violated,
    /// The prefix does not certify convergence.
    PreconditionNotMet,
    /// Non-characteristic space whose sequence range is not D-bounded.
    CounterBehaviourObserved,
    /// Non-characteristic space whose sequence range is D-bounded anyway.
    CounterBehaviourAbsent,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergentRangeReport {
    pub status: RangeStatus,
    pub characteristic: bool,
    pub convergence: ConvergenceReport,
    pub class: BoundednessClass,
    pub d_bounded: bool,
    pub radius_source: String,
}

/// In a characteristic space, the range of a strongly convergent sequence is
/// D-bounded. `range` optionally gives the full range as a parametric set so
/// the radius is exact; otherwise the given terms are used.
pub fn theorem_2_1_check(
    space: &PNSpace,
    sequence: &[Vector],
    limit: &Vector,
    range: Option<&ParametricSet>,
    lambdas: &[f64],
    grid: &GridSpec,
) -> Result<ConvergentRangeReport> {
    let convergence = pnspace::is_strongly_convergent(space, sequence, limit, lambdas)?;
    let mut pts = sequence.to_vec();
    pts.push(limit.clone());
    let characteristic = pnspace::is_characteristic(space, &pts, grid.tol_eq)?.characteristic;
    let (set, radius_source) = match range {
        Some(p) => (PointSet::Parametric(p.clone()), format!("parametric {}", p.describe())),
        None => (
            PointSet::explicit(sequence.to_vec()),
            format!("{} listed terms", sequence.len()),
        ),
    };
    let r = radius_report(space, &set, grid)?;
    let status = match (characteristic, convergence.holds, r.d_bounded) {
        (true, false, _) => RangeStatus::PreconditionNotMet,
        (true, true, true) => RangeStatus::Confirmed,
        (true, true, false) => RangeStatus::Violated,
        (false, _, false) => RangeStatus::CounterBehaviourObserved,
        (false, _, true) => RangeStatus::CounterBehaviourAbsent,
    };
    Ok(ConvergentRangeReport {
        status,
        characteristic,
        convergence,
        class: r.class,
        d_bounded: r.d_bounded,
        radius_source,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceOutcome {
    pub sequence: String,
    /// Candidates certified as limits. Several remain only when the prefix
    /// cannot separate them.
    pub convergent_candidates: Vec<Vector>,
    /// The λ below the given ones that was needed to separate candidates.
    pub resolved_at: Option<f64>,
    /// `in_set`, `outside_carrier`, `outside_set`, `ambiguous` or
    /// `undetermined`.
    pub outcome: String,
    pub certificate: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactnessVerdict {
    CounterexampleToDCompactness,
    /// A necessary condition (D-bounded, closed) fails.
    DCompactnessImpossible,
    NoCounterexampleFound,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactnessReport {
    pub verdict: CompactnessVerdict,
    pub d_bounded: bool,
    pub class: BoundednessClass,
    /// Some test sequence converges to a carrier point outside the set.
    pub closedness_violated: bool,
    pub sequences: Vec<SequenceOutcome>,
    pub basis: String,
}

/// Probes D-compactness with explicit sequences and candidate limits.
///
/// A sequence that converges (prefix-based) to a candidate outside the set
/// certifies non-compactness: the strong topology is Hausdorff, so every
/// subsequence has that same limit and none converges to a member. If the
/// limit still lies in the carrier, the set is in addition not closed.
pub fn d_compactness_probe(
    space: &PNSpace,
    a: &PointSet,
    sequences: &[NamedSequence],
    candidates: &[Vector],
    lambdas: &[f64],
    grid: &GridSpec,
) -> Result<CompactnessReport> {
    a.validate(space)?;
    for s in sequences {
        if s.terms.is_empty() {
            return Err(Error::InvalidArgument(format!("sequence {} is empty", s.name)));
        }
        if let Some((i, t)) = s
            .terms
            .iter()
            .enumerate()
            .find(|(_, t)| !(a.contains(t) && space.carrier.contains(t)))
        {
            return Err(Error::InvalidArgument(format!(
                "term {} ({t}) of sequence {} is not in the set",
                i + 1,
                s.name
            )));
        }
    }
    let radius = radius_report(space, a, grid)?;
    let outcomes: Vec<SequenceOutcome> = sequences
        .par_iter()
        .map(|s| -> Result<SequenceOutcome> {
            let mut convergent = Vec::new();
            for c in candidates {
                if pnspace::is_strongly_convergent(space, &s.terms, c, lambdas)?.holds {
                    convergent.push(c.clone());
                }
            }
            // Limits are unique: shrink λ until one candidate is left, or
            // until the prefix no longer certifies any of them.
            let mut lambda = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
            let mut resolved_at = None;
            while convergent.len() > 1 && lambda > MIN_RESOLVING_LAMBDA {
                lambda /= 10.0;
                let mut narrowed = Vec::new();
                for c in &convergent {
                    if pnspace::is_strongly_convergent(space, &s.terms, c, &[lambda])?.holds {
                        narrowed.push(c.clone());
                    }
                }
                if narrowed.is_empty() {
                    break;
                }
                convergent = narrowed;
                resolved_at = Some(lambda);
            }
            let in_set = |c: &Vector| a.contains(c) && space.carrier.contains(c);
            let outside_carrier = |c: &Vector| !space.carrier.contains(c);
            let (outcome, certificate) = if convergent.is_empty() {
                ("undetermined", None)
            } else if convergent.iter().all(in_set) {
                ("in_set", None)
            } else if convergent.iter().all(outside_carrier) {
                let c = &convergent[0];
                (
                    "outside_carrier",
                    Some(format!(
                        "{} converges to {c}, which is not a point of the carrier; limits are unique, so no subsequence converges to a member of the set",
                        s.name
                    )),
                )
            } else if convergent.iter().all(|c| !in_set(c) && !outside_carrier(c)) {
                let c = &convergent[0];
                (
                    "outside_set",
                    Some(format!(
                        "{} converges to {c}, a carrier point outside the set: the set is not closed",
                        s.name
                    )),
                )
            } else {
                ("ambiguous", None)
            };
            Ok(SequenceOutcome {
                sequence: s.name.clone(),
                convergent_candidates: convergent,
                resolved_at,
                outcome: outcome.into(),
                certificate,
            })
        })
        .collect::<Result<_>>()?;
    let closedness_violated = outcomes.iter().any(|o| o.outcome == "outside_set");
    let counterexample = outcomes.iter().any(|o| o.certificate.is_some());
    let verdict = if counterexample {
        CompactnessVerdict::CounterexampleToDCompactness
    } else if !radius.d_bounded {
        CompactnessVerdict::DCompactnessImpossible
    } else {
        CompactnessVerdict::NoCounterexampleFound
    };
    Ok(CompactnessReport {
        verdict,
        d_bounded: radius.d_bounded,
        class: radius.class,
        closedness_violated,
        sequences: outcomes,
        basis: "prefix-based".into(),
    })
}

/// Smallest λ tried when separating candidate limits.
pub const MIN_RESOLVING_LAMBDA: f64 = 1e-12;

/// Radii for compactness probes; small radii separate nearby limits.
pub const COMPACTNESS_LAMBDAS: [f64; 4] = [0.5, 0.1, 0.01, 0.001];

/// Default test sequences and candidate limits for a set: convergents of
/// irrational square-root endpoints, sequences running into each listed
/// point, and the points themselves as candidates.
pub fn default_compactness_inputs<R: Rng>(a: &PointSet, rng: &mut R) -> (Vec<NamedSequence>, Vec<Vector>) {
    match a {
        PointSet::Parametric(ParametricSet::Interval { lo, hi, .. }) => {
            let mut seqs = Vec::new();
            let mut cands = vec![lo.as_vector(), hi.as_vector()];
            for e in [lo, hi] {
                if let Endpoint::Sqrt { sqrt } = e {
                    if !e.is_rational() {
                        let terms = sqrt_convergents_in(*sqrt, lo, hi);
                        if !terms.is_empty() {
                            seqs.push(NamedSequence {
                                name: format!("convergents of sqrt({sqrt})"),
                                terms,
                            });
                        }
                    }
                }
            }
            let members = a.members(8, rng);
            let (l, h) = (lo.value(), hi.value());
            // Offsets w·2^-m with w a rational below half the width keep the
            // terms inside the interval and rational when c is.
            let w = 1.0 / (2.0 / (h - l).max(f64::MIN_POSITIVE)).ceil().max(1.0);
            for c in &members {
                let dir = if c.coords[0] <= 0.5 * (l + h) { 1.0 } else { -1.0 };
                let terms: Vec<Vector> = (1..=60)
                    .map(|m| {
                        let v = Vector::scalar(c.coords[0] + dir * w * 0.5f64.powi(m));
                        match c.rational {
                            Some(flag) => v.with_rational(flag),
                            None => v,
                        }
                    })
                    .collect();
                seqs.push(NamedSequence {
                    name: format!("approaching {c}"),
                    terms,
                });
            }
            cands.extend(members);
            (seqs, cands)
        }
        _ => {
            let members = a.members(PARAMETRIC_SAMPLES, rng);
            let seqs = members
                .iter()
                .take(16)
                .map(|p| NamedSequence {
                    name: format!("constant at {p}"),
                    terms: vec![p.clone(); 20],
                })
                .collect();
            (seqs, members)
        }
    }
}
