//! PN spaces over ℝⁿ.
//!
//! A [`PNSpace`] couples a norm family `p ↦ ν_p` with a triangle function τ,
//! a second triangle function τ*, and optionally a φ-transform. The built-in
//! families depend on `p` only through its Euclidean norm, so ν is given by a
//! closed form in `(|p|, x)`; axiom audits evaluate that closed form
//! directly and only go through a convolution where the axiom itself does.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::distfn::{DistributionFunction, ExtReal, GridSpec};
use crate::error::{Error, Result};
use crate::phi::PhiTransform;
use crate::tnorm::TNorm;
use crate::triangle::TriangleFunction;

pub const MAX_DIM: usize = 8;

/// Strong-neighbourhood radii used when the caller does not choose any.
pub const DEFAULT_LAMBDAS: [f64; 3] = [0.5, 0.25, 0.1];

/// Tolerance for identities that involve closed forms only.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Maximum number of abscissae at which a convolution side is evaluated.
const AUDIT_ABSCISSAE: usize = 257;

/// A point of ℝⁿ, optionally flagged as a member of ℚⁿ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vector {
    pub coords: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rational: Option<bool>,
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Scalar(f64),
            Coords(Vec<f64>),
            Full {
                coords: Vec<f64>,
                #[serde(default)]
                rational: Option<bool>,
            },
        }
        let (coords, rational) = match Raw::deserialize(deserializer)? {
            Raw::Scalar(x) => (vec![x], None),
            Raw::Coords(c) => (c, None),
            Raw::Full { coords, rational } => (coords, rational),
        };
        let mut v = Vector::new(coords).map_err(serde::de::Error::custom)?;
        v.rational = rational;
        Ok(v)
    }
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "vectors need 1..={MAX_DIM} coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("vector coordinates must be finite".into()));
        }
        Ok(Vector { coords, rational: None })
    }

    /// A one-dimensional vector.
    pub fn scalar(x: f64) -> Self {
        Vector {
            coords: vec![x],
            rational: None,
        }
    }

    /// A one-dimensional vector known to be rational.
    pub fn rational_scalar(num: i64, den: i64) -> Self {
        Vector {
            coords: vec![num as f64 / den as f64],
            rational: Some(true),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Vector {
            coords: vec![0.0; dim],
            rational: Some(true),
        }
    }

    pub fn with_rational(mut self, flag: bool) -> Self {
        self.rational = Some(flag);
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    fn combine_flags(a: Option<bool>, b: Option<bool>) -> Option<bool> {
        match (a, b) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
            rational: Self::combine_flags(self.rational, other.rational),
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
            rational: Self::combine_flags(self.rational, other.rational),
        }
    }

    /// `α·p`. The rational flag survives scaling by an integer or by the
    /// reciprocal of one.
    pub fn scale(&self, alpha: f64) -> Vector {
        let exact = alpha == 0.0 || alpha.fract() == 0.0 || (1.0 / alpha).fract() == 0.0;
        Vector {
            coords: self.coords.iter().map(|c| alpha * c).collect(),
            rational: if alpha == 0.0 {
                Some(true)
            } else if exact {
                self.rational
            } else {
                None
            },
        }
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            write!(f, "{}", self.coords[0])
        } else {
            write!(f, "{:?}", self.coords)
        }
    }
}

type NormRule = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type LimitRule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A norm family given by closed forms in `(|p|, x)`; used for audit
/// experiments.
#[derive(Clone)]
pub struct CustomNorm {
    pub name: String,
    value: NormRule,
    limit: LimitRule,
}

impl CustomNorm {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        limit: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomNorm {
            name: name.into(),
            value: Arc::new(value),
            limit: Arc::new(limit),
        }
    }
}

impl fmt::Debug for CustomNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNorm").field("name", &self.name).finish()
    }
}

/// Norm families `p ↦ ν_p`.
#[derive(Debug, Clone)]
pub enum NormFamily {
    /// `ν_p(x) = a·x/(x+|p|)` with `a ∈ (0, 1)`; limit `a` at +∞.
    Ex22 {
        a: f64,
    },
    /// `ν_p(x) = x/(x+|p|)`.
    Ex25,
    /// `ν_p = ε_{|p|}`, the embedding of an ordinary normed space.
    Simple,
    Custom(CustomNorm),
}

impl NormFamily {
    pub fn id(&self) -> String {
        match self {
            NormFamily::Ex22 { a } => format!("ex22(a={a})"),
            NormFamily::Ex25 => "ex25".into(),
            NormFamily::Simple => "simple".into(),
            NormFamily::Custom(c) => c.name.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let NormFamily::Ex22 { a } = self {
            if !(*a > 0.0 && *a < 1.0) {
                return Err(Error::Config(format!("a ∈ (0,1) violated: a = {a}")));
            }
        }
        Ok(())
    }

    /// `ν_p(x)` for `|p| = r`. `r = 0` gives ε₀.
    pub fn value_at_norm(&self, r: f64, x: ExtReal) -> f64 {
        let x = match x {
            ExtReal::Infinity => return 1.0,
            ExtReal::Finite(x) => x,
        };
        if !(x > 0.0) {
            return 0.0;
        }
        if r == 0.0 {
            return 1.0;
        }
        match self {
            NormFamily::Ex22 { a } => a * x / (x + r),
            NormFamily::Ex25 => x / (x + r),
            NormFamily::Simple => {
                if x > r {
                    1.0
                } else {
                    0.0
                }
            }
            NormFamily::Custom(c) => (c.value)(r, x),
        }
    }

    /// `l⁻ν_p(+∞)` for `|p| = r`.
    pub fn limit_at_norm(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 1.0;
        }
        match self {
            NormFamily::Ex22 { a } => *a,
            NormFamily::Ex25 | NormFamily::Simple => 1.0,
            NormFamily::Custom(c) => (c.limit)(r),
        }
    }

    /// Built-in families are non-increasing in `|p|`.
    pub fn is_monotone_in_norm(&self) -> bool {
        !matches!(self, NormFamily::Custom(_))
    }

    /// `ν` at norm `r` as a distribution function on `grid`.
    pub fn distribution_at_norm(&self, r: f64, grid: &GridSpec) -> DistributionFunction {
        if r == 0.0 {
            return DistributionFunction::epsilon0(grid);
        }
        if r.is_infinite() {
            return DistributionFunction::epsilon_inf();
        }
        match self {
            NormFamily::Simple => DistributionFunction::step_at(r, grid),
            _ => DistributionFunction::from_closed_form(grid, self.limit_at_norm(r), |x| {
                self.value_at_norm(r, ExtReal::Finite(x))
            }),
        }
    }
}

/// Whether vectors of the space are arbitrary reals or restricted to ℚⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Carrier {
    #[default]
    #[serde(rename = "R")]
    Reals,
    #[serde(rename = "Q")]
    Rationals,
}

impl Carrier {
    /// Membership of `v` in the carrier. Over ℚ only vectors flagged rational
    /// belong.
    pub fn contains(&self, v: &Vector) -> bool {
        match self {
            Carrier::Reals => true,
            Carrier::Rationals => v.rational == Some(true),
        }
    }
}

/// `(ℝⁿ or ℚⁿ, ν, τ, τ*)` with an optional φ.
#[derive(Debug, Clone)]
pub struct PNSpace {
    pub dim: usize,
    pub norm: NormFamily,
    pub tau: TriangleFunction,
    pub tau_star: TriangleFunction,
    pub phi: Option<PhiTransform>,
    pub carrier: Carrier,
}

impl PNSpace {
    pub fn new(dim: usize, norm: NormFamily, tau: TriangleFunction, tau_star: TriangleFunction) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!("dim must be in 1..={MAX_DIM}, got {dim}")));
        }
        norm.validate()?;
        Ok(PNSpace {
            dim,
            norm,
            tau,
            tau_star,
            phi: None,
            carrier: Carrier::Reals,
        })
    }

    pub fn with_phi(mut self, phi: PhiTransform) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn with_carrier(mut self, carrier: Carrier) -> Self {
        self.carrier = carrier;
        self
    }

    /// `ν_p = a·x/(x+|p|)` on ℝ with τ_π, τ_M and φ = identity.
    pub fn ex22(a: f64) -> Result<Self> {
        Ok(PNSpace::new(
            1,
            NormFamily::Ex22 { a },
            TriangleFunction::TauT(TNorm::Product),
            TriangleFunction::TauM,
        )?
        .with_phi(PhiTransform::identity()))
    }

    /// `ν_p = t/(t+|p|)` on ℚ with τ_π, τ_M and φ = identity.
    pub fn ex25() -> Self {
        PNSpace::new(
            1,
            NormFamily::Ex25,
            TriangleFunction::TauT(TNorm::Product),
            TriangleFunction::TauM,
        )
        .expect("valid built-in")
        .with_phi(PhiTransform::identity())
        .with_carrier(Carrier::Rationals)
    }

    /// `ν_p = ε_{|p|}` on ℝⁿ with τ_M on both sides.
    pub fn simple(dim: usize) -> Result<Self> {
        PNSpace::new(dim, NormFamily::Simple, TriangleFunction::TauM, TriangleFunction::TauM)
    }

    pub fn describe(&self) -> String {
        format!(
            "dim={} norm={} tau={} tau_star={}",
            self.dim,
            self.norm.id(),
            self.tau.id(),
            self.tau_star.id()
        )
    }

    pub fn check_dim(&self, p: &Vector) -> Result<()> {
        if p.dim() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            })
        }
    }

    /// `ν_p(x)` from the closed form.
    pub fn nu_at(&self, p: &Vector, x: ExtReal) -> f64 {
        self.norm.value_at_norm(p.norm(), x)
    }

    pub fn nu_limit(&self, p: &Vector) -> f64 {
        self.norm.limit_at_norm(p.norm())
    }
}

/// ν_p as a distribution function sampled on `grid`, with its analytic left
/// limit at +∞.
pub fn norm_eval(space: &PNSpace, p: &Vector, grid: &GridSpec) -> Result<DistributionFunction> {
    space.check_dim(p)?;
    Ok(space.norm.distribution_at_norm(p.norm(), grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomStatus {
    Pass,
    /// Passed on every sample of a universally quantified statement.
    PassSampled,
    Fail,
    Inconclusive,
}

impl AxiomStatus {
    pub fn is_pass(self) -> bool {
        matches!(self, AxiomStatus::Pass | AxiomStatus::PassSampled)
    }
}

/// Arguments at which an axiom was worst violated.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<ExtReal>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub status: AxiomStatus,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub space: String,
    pub grid: GridSpec,
    pub points: usize,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status.is_pass())
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

/// Tracks the worst violation seen and where.
struct Worst {
    value: f64,
    witness: Option<Witness>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            witness: None,
        }
    }

    fn offer(&mut self, value: f64, witness: impl FnOnce() -> Witness) {
        if value > self.value || (self.witness.is_none() && value >= self.value) {
            self.value = value.max(self.value);
            self.witness = Some(witness());
        }
    }
}

/// Every `stride`-th grid point plus the first few, at most
/// [`AUDIT_ABSCISSAE`] in total.
fn audit_abscissae(grid: &GridSpec) -> Vec<f64> {
    let pts = grid.points();
    let stride = pts.len().div_ceil(AUDIT_ABSCISSAE - 16).max(1);
    let mut xs: Vec<f64> = pts.iter().take(16).copied().collect();
    xs.extend(pts.iter().step_by(stride).copied());
    crate::distfn::sort_dedup(&mut xs);
    xs
}

/// Audits N1–N4 on the given points and scalars.
///
/// N1 forward and N2 are closed-form checks. N1's reverse direction (ν_p = ε₀
/// only for p = θ) can only be sampled. N3 and N4 compare the closed form of
/// one side with the convolution of the other at a strided subset of the grid
/// and at +∞, with tolerance `grid.conv_tol()`. N3 pairs each point with the
/// next one (cyclically) and with itself.
pub fn check_axioms(space: &PNSpace, points: &[Vector], scalars: &[f64], grid: &GridSpec) -> Result<AxiomReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    for p in points {
        space.check_dim(p)?;
    }
    let xs = grid.points();
    let theta = Vector::zero(space.dim);
    let exact = grid.tol_eq;
    let mut checks = Vec::new();

    // N1, forward: ν_θ = ε₀.
    let mut fwd = Worst::new();
    for &x in xs.iter().filter(|&&x| x > 0.0) {
        let gap = 1.0 - space.nu_at(&theta, ExtReal::Finite(x));
        fwd.offer(gap, || Witness {
            p: Some(theta.clone()),
            x: Some(ExtReal::Finite(x)),
            ..Witness::default()
        });
    }
    checks.push(AxiomCheck {
        axiom: "N1 (nu_theta = eps0)".into(),
        status: if fwd.value <= exact {
            AxiomStatus::Pass
        } else {
            AxiomStatus::Fail
        },
        worst_violation: fwd.value,
        tolerance: exact,
        witness: (fwd.value > exact).then(|| fwd.witness.clone()).flatten(),
        note: None,
    });

    // N1, reverse: ν_p ≠ ε₀ for sampled p ≠ θ.
    let mut rev: Option<Witness> = None;
    let mut closest = f64::INFINITY;
    for p in points.iter().filter(|p| !p.is_zero()) {
        let gap = xs
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| 1.0 - space.nu_at(p, ExtReal::Finite(x)))
            .fold(1.0 - space.nu_limit(p), f64::max);
        closest = closest.min(gap);
        if gap <= exact && rev.is_none() {
            rev = Some(Witness {
                p: Some(p.clone()),
                ..Witness::default()
            });
        }
    }
    checks.push(AxiomCheck {
        axiom: "N1 (nu_p = eps0 only if p = theta)".into(),
        status: if rev.is_some() {
            AxiomStatus::Fail
        } else {
            AxiomStatus::PassSampled
        },
        worst_violation: if rev.is_some() { 1.0 } else { 0.0 },
        tolerance: exact,
        witness: rev,
        note: Some(format!(
            "sampled; smallest sup-gap between nu_p and eps0 over p != theta: {}",
            if closest.is_finite() {
                closest.to_string()
            } else {
                "n/a".into()
            }
        )),
    });

    // N2: ν_{−p} = ν_p.
    let mut n2 = Worst::new();
    for p in points {
        let neg = p.scale(-1.0);
        for &x in &xs {
            let gap = (space.nu_at(&neg, ExtReal::Finite(x)) - space.nu_at(p, ExtReal::Finite(x))).abs();
            n2.offer(gap, || Witness {
                p: Some(p.clone()),
                x: Some(ExtReal::Finite(x)),
                ..Witness::default()
            });
        }
        let gap = (space.nu_limit(&neg) - space.nu_limit(p)).abs();
        n2.offer(gap, || Witness {
            p: Some(p.clone()),
            x: Some(ExtReal::Infinity),
            ..Witness::default()
        });
    }
    checks.push(status_check("N2 (nu_-p = nu_p)", n2, exact, AxiomStatus::PassSampled));

    let conv = grid.conv_tol();
    let sub = audit_abscissae(grid);

    // N3: ν_{p+q} ≥ τ(ν_p, ν_q).
    let mut pairs: Vec<(&Vector, &Vector)> = points.iter().map(|p| (p, p)).collect();
    for i in 0..points.len() {
        pairs.push((&points[i], &points[(i + 1) % points.len()]));
    }
    let n3_results: Vec<(f64, Witness)> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let fp = norm_eval(space, p, grid).expect("dimension checked");
            let fq = norm_eval(space, q, grid).expect("dimension checked");
            let rhs = space.tau.eval_points(&fp, &fq, &sub);
            let sum = p.add(q);
            let mut worst = (f64::NEG_INFINITY, ExtReal::Infinity);
            for (&x, &r) in sub.iter().zip(&rhs) {
                let d = r - space.nu_at(&sum, ExtReal::Finite(x));
                if d > worst.0 {
                    worst = (d, ExtReal::Finite(x));
                }
            }
            let d_inf = space.tau.value_at_inf(&fp, &fq) - space.nu_limit(&sum);
            if d_inf > worst.0 {
                worst = (d_inf, ExtReal::Infinity);
            }
            (
                worst.0.max(0.0),
                Witness {
                    p: Some(p.clone()),
                    q: Some(q.clone()),
                    x: Some(worst.1),
                    ..Witness::default()
                },
            )
        })
        .collect();
    let mut n3 = Worst::new();
    for (v, w) in n3_results {
        n3.offer(v, || w);
    }
    checks.push(status_check(
        "N3 (nu_p+q >= tau(nu_p, nu_q))",
        n3,
        conv,
        AxiomStatus::PassSampled,
    ));

    // N4: ν_p ≤ τ*(ν_{αp}, ν_{(1−α)p}).
    let mut jobs: Vec<(&Vector, f64)> = Vec::new();
    for p in points {
        for &alpha in scalars {
            jobs.push((p, alpha));
        }
    }
    for &alpha in scalars {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("N4 scalar {alpha} outside [0, 1]")));
        }
    }
    let n4_results: Vec<(f64, Witness)> = jobs
        .par_iter()
        .map(|&(p, alpha)| {
            let fa = norm_eval(space, &p.scale(alpha), grid).expect("dimension checked");
            let fb = norm_eval(space, &p.scale(1.0 - alpha), grid).expect("dimension checked");
            let rhs = space.tau_star.eval_points(&fa, &fb, &sub);
            let mut worst = (f64::NEG_INFINITY, ExtReal::Infinity);
            for (&x, &r) in sub.iter().zip(&rhs) {
                let d = space.nu_at(p, ExtReal::Finite(x)) - r;
                if d > worst.0 {
                    worst = (d, ExtReal::Finite(x));
                }
            }
            let d_inf = space.nu_limit(p) - space.tau_star.value_at_inf(&fa, &fb);
            if d_inf > worst.0 {
                worst = (d_inf, ExtReal::Infinity);
            }
            (
                worst.0.max(0.0),
                Witness {
                    p: Some(p.clone()),
                    alpha: Some(alpha),
                    x: Some(worst.1),
                    ..Witness::default()
                },
            )
        })
        .collect();
    let mut n4 = Worst::new();
    for (v, w) in n4_results {
        n4.offer(v, || w);
    }
    let mut n4_check = status_check(
        "N4 (nu_p <= tau*(nu_ap, nu_(1-a)p))",
        n4,
        conv,
        AxiomStatus::PassSampled,
    );
    if scalars.is_empty() {
        n4_check.status = AxiomStatus::Inconclusive;
        n4_check.note = Some("no scalars supplied".into());
    }
    checks.push(n4_check);

    Ok(AxiomReport {
        space: space.describe(),
        grid: *grid,
        points: points.len(),
        checks,
    })
}

fn status_check(name: &str, worst: Worst, tol: f64, pass: AxiomStatus) -> AxiomCheck {
    let failed = worst.value > tol;
    AxiomCheck {
        axiom: name.into(),
        status: if failed { AxiomStatus::Fail } else { pass },
        worst_violation: worst.value,
        tolerance: tol,
        witness: if failed { worst.witness } else { None },
        note: None,
    }
}

/// N4 scalars: the quarters of `[0, 1]` plus `extra` uniform draws.
pub fn default_scalars<R: Rng>(extra: usize, rng: &mut R) -> Vec<f64> {
    let mut s = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    s.extend((0..extra).map(|_| rng.gen::<f64>()));
    s
}

/// Result of checking a scaling identity at every grid abscissa.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub passed: bool,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub checked: usize,
    pub witness: Option<Witness>,
}

fn scaling_identity(
    name: &str,
    space: &PNSpace,
    points: &[Vector],
    lambdas: &[f64],
    grid: &GridSpec,
    inner: impl Fn(ExtReal, f64) -> ExtReal,
) -> Result<IdentityReport> {
    if let Some(&l) = lambdas.iter().find(|&&l| l == 0.0 || !l.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scalar must be a nonzero real, got {l}"
        )));
    }
    for p in points {
        space.check_dim(p)?;
    }
    let mut xs: Vec<ExtReal> = grid.points().into_iter().map(ExtReal::Finite).collect();
    xs.push(ExtReal::Infinity);
    let mut worst = Worst::new();
    let mut checked = 0usize;
    for p in points {
        for &lambda in lambdas {
            let lp = p.scale(lambda);
            for &x in &xs {
                let lhs = match x {
                    ExtReal::Infinity => space.nu_limit(&lp),
                    x => space.nu_at(&lp, x),
                };
                let arg = inner(x, lambda.abs());
                let rhs = match arg {
                    ExtReal::Infinity if x.is_infinite() => space.nu_limit(p),
                    arg => space.nu_at(p, arg),
                };
                checked += 1;
                worst.offer((lhs - rhs).abs(), || Witness {
                    p: Some(p.clone()),
                    alpha: Some(lambda),
                    x: Some(x),
                    ..Witness::default()
                });
            }
        }
    }
    let passed = worst.value <= IDENTITY_TOL;
    Ok(IdentityReport {
        identity: name.into(),
        passed,
        worst_residual: worst.value,
        tolerance: IDENTITY_TOL,
        checked,
        witness: if passed { None } else { worst.witness },
    })
}

/// `ν_{λp}(x) = ν_p(x/|λ|)` at every grid abscissa and at +∞ (left limits).
pub fn check_serstnev(space: &PNSpace, points: &[Vector], lambdas: &[f64], grid: &GridSpec) -> Result<IdentityReport> {
    scaling_identity("serstnev", space, points, lambdas, grid, |x, l| match x {
        ExtReal::Finite(x) => ExtReal::Finite(x / l),
        ExtReal::Infinity => ExtReal::Infinity,
    })
}

/// `ν_{λp}(x) = ν_p(φ̂(φ(x)/|λ|))` at every grid abscissa and at +∞.
pub fn check_phi_serstnev(
    space: &PNSpace,
    points: &[Vector],
    lambdas: &[f64],
    grid: &GridSpec,
) -> Result<IdentityReport> {
    let phi = space
        .phi
        .as_ref()
        .ok_or_else(|| Error::Config("phi-Serstnev check needs a phi in the space definition".into()))?;
    scaling_identity("phi-serstnev", space, points, lambdas, grid, |x, l| {
        let t = match phi.phi_at(x) {
            ExtReal::Finite(v) => ExtReal::Finite(v / l),
            ExtReal::Infinity => ExtReal::Infinity,
        };
        phi.phi_hat_at(t)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacteristicReport {
    pub characteristic: bool,
    pub points_checked: usize,
    /// A point whose ν is not in D⁺, with its left limit at +∞.
    pub witness: Option<(Vector, f64)>,
}

/// Whether every sampled ν_p lies in D⁺.
pub fn is_characteristic(space: &PNSpace, points: &[Vector], tol: f64) -> Result<CharacteristicReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let mut witness = None;
    for p in points {
        space.check_dim(p)?;
        let l = space.nu_limit(p);
        if l < 1.0 - tol {
            witness = Some((p.clone(), l));
            break;
        }
    }
    Ok(CharacteristicReport {
        characteristic: witness.is_none(),
        points_checked: points.len(),
        witness,
    })
}

/// `ν_{βp} ≤ ν_{αp}` on the grid and at +∞, for `|α| ≤ |β|`.
pub fn check_lemma_1_3(space: &PNSpace, p: &Vector, alpha: f64, beta: f64, grid: &GridSpec) -> Result<bool> {
    if alpha.abs() > beta.abs() {
        return Err(Error::InvalidArgument(format!(
            "|alpha| = {} exceeds |beta| = {}",
            alpha.abs(),
            beta.abs()
        )));
    }
    space.check_dim(p)?;
    let (pa, pb) = (p.scale(alpha), p.scale(beta));
    let ok = grid
        .points()
        .into_iter()
        .all(|x| space.nu_at(&pb, ExtReal::Finite(x)) <= space.nu_at(&pa, ExtReal::Finite(x)) + grid.tol_eq)
        && space.nu_limit(&pb) <= space.nu_limit(&pa) + grid.tol_eq;
    Ok(ok)
}

/// `q ∈ N_p(λ)`, i.e. `ν_{p−q}(λ) > 1 − λ`.
pub fn in_strong_neighborhood(space: &PNSpace, p: &Vector, lambda: f64, q: &Vector) -> Result<bool> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    space.check_dim(p)?;
    space.check_dim(q)?;
    Ok(neighborhood(space, &p.sub(q), lambda))
}

fn neighborhood(space: &PNSpace, diff: &Vector, lambda: f64) -> bool {
    space.nu_at(diff, ExtReal::Finite(lambda)) > 1.0 - lambda
}

/// Outcome for one neighbourhood radius.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaVerdict {
    pub lambda: f64,
    /// Least 1-based N such that every given term from N on satisfies the
    /// condition, if the last term does.
    pub tail_index: Option<usize>,
    /// The tail covers at least half of the prefix.
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub holds: bool,
    pub basis: String,
    pub prefix_len: usize,
    pub per_lambda: Vec<LambdaVerdict>,
}

fn verdict(lambda: f64, last_bad: Option<usize>, len: usize) -> LambdaVerdict {
    // last_bad is a 0-based index; the tail starts right after it.
    let start = last_bad.map_or(0, |i| i + 1);
    let tail_index = (start < len).then_some(start + 1);
    let certified = tail_index.is_some() && 2 * (len - start) >= len;
    LambdaVerdict {
        lambda,
        tail_index,
        certified,
    }
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("no neighbourhood radii given".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {l}")));
    }
    Ok(())
}

/// Prefix-based strong convergence of `sequence` to `limit`: for each λ, the
/// least N with every given term from N on inside `N_limit(λ)`. The verdict
/// holds when every λ has such an N and the certified tail covers at least
/// half of the prefix.
pub fn is_strongly_convergent(
    space: &PNSpace,
    sequence: &[Vector],
    limit: &Vector,
    lambdas: &[f64],
) -> Result<ConvergenceReport> {
    if sequence.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    check_lambdas(lambdas)?;
    space.check_dim(limit)?;
    for p in sequence {
        space.check_dim(p)?;
    }
    let per_lambda: Vec<LambdaVerdict> = lambdas
        .iter()
        .map(|&lambda| {
            let last_bad = sequence
                .iter()
                .rposition(|p| !neighborhood(space, &limit.sub(p), lambda));
            verdict(lambda, last_bad, sequence.len())
        })
        .collect();
    Ok(ConvergenceReport {
        holds: per_lambda.iter().all(|v| v.certified),
        basis: "prefix-based".into(),
        prefix_len: sequence.len(),
        per_lambda,
    })
}

/// Prefix-based strong Cauchy property: for each λ, the least N such that
/// every pair of given terms from N on satisfies `ν_{p_n−p_m}(λ) > 1 − λ`.
pub fn is_strongly_cauchy(space: &PNSpace, sequence: &[Vector], lambdas: &[f64]) -> Result<ConvergenceReport> {
    if sequence.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    check_lambdas(lambdas)?;
    for p in sequence {
        space.check_dim(p)?;
    }
    let n = sequence.len();
    let per_lambda: Vec<LambdaVerdict> = lambdas
        .iter()
        .map(|&lambda| {
            // For a violating pair (i, j), i < j, no tail starting at or
            // before i works.
            let last_bad = (0..n)
                .into_par_iter()
                .filter(|&i| ((i + 1)..n).any(|j| !neighborhood(space, &sequence[j].sub(&sequence[i]), lambda)))
                .max();
            verdict(lambda, last_bad, n)
        })
        .collect();
    Ok(ConvergenceReport {
        holds: per_lambda.iter().all(|v| v.certified),
        basis: "prefix-based".into(),
        prefix_len: n,
        per_lambda,
    })
}
