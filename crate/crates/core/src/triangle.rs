//! Triangle functions on Δ⁺.
//!
//! `τ_T(F, G)(x) = sup_{s+t=x} T(F(s), G(t))` and
//! `τ_{T*}(F, G)(x) = inf_{s+t=x} T*(F(s), G(t))` are evaluated exactly at
//! each output abscissa: on every interval between consecutive split
//! breakpoints both `F(s)` and `G(x − s)` are linear, so the extremum over
//! the interval has a closed form for the built-in t-norms. The output is the
//! piecewise-linear interpolant through those exact values.
//!
//! `τ_M` additionally has a fast path through quasi-inverses:
//! `τ_M(F, G)⁻¹ = F⁻¹ + G⁻¹`, which is exact for piecewise-linear input.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distfn::{sort_dedup, DistributionFunction, GridSpec};
use crate::error::{Error, Result};
use crate::tnorm::{TConorm, TNorm};

/// Knot-pair sums are added to the output abscissae below this product size.
const SUM_LIMIT: usize = 20_000;
/// Quasi-inverse level crossings are added below this total knot count.
const LEVEL_LIMIT: usize = 4_096;
const SIMPLIFY_TOL: f64 = 1e-12;

/// A binary operation on distribution functions that claims to be a
/// triangle function.
pub trait TriangleOp: Sync {
    fn name(&self) -> String;
    fn apply(&self, f: &DistributionFunction, g: &DistributionFunction, grid: &GridSpec) -> DistributionFunction;
}

/// The built-in triangle functions.
#[derive(Debug, Clone, PartialEq)]
pub enum TriangleFunction {
    /// Sup-convolution with a t-norm.
    TauT(TNorm),
    /// Inf-convolution with a t-conorm.
    TauTStar(TConorm),
    /// τ_M through the quasi-inverse fast path.
    TauM,
}

impl TriangleFunction {
    /// Parses `tauM`, `tauT:<tnorm>` or `tauTstar:<tconorm>`.
    pub fn from_id(id: &str) -> Result<Self> {
        if id == "tauM" {
            return Ok(TriangleFunction::TauM);
        }
        if let Some(t) = id.strip_prefix("tauTstar:") {
            return Ok(TriangleFunction::TauTStar(TConorm::from_id(t)?));
        }
        if let Some(t) = id.strip_prefix("tauT:") {
            return Ok(TriangleFunction::TauT(TNorm::from_id(t)?));
        }
        Err(Error::Config(format!(
            "unknown triangle function {id:?} (expected tauM, tauT:<M|pi>, tauTstar:<max|probsum>)"
        )))
    }

    pub fn id(&self) -> String {
        match self {
            TriangleFunction::TauM => "tauM".into(),
            TriangleFunction::TauT(t) => format!("tauT:{}", t.id()),
            TriangleFunction::TauTStar(c) => format!("tauTstar:{}", c.id()),
        }
    }

    pub fn apply(&self, f: &DistributionFunction, g: &DistributionFunction, grid: &GridSpec) -> DistributionFunction {
        match self {
            TriangleFunction::TauT(t) => tau_t(t, f, g, grid),
            TriangleFunction::TauTStar(c) => tau_t_star(c, f, g, grid),
            TriangleFunction::TauM => tau_m(f, g),
        }
    }

    /// Values of the convolution at the given abscissae, without building the
    /// full output.
    pub fn eval_points(&self, f: &DistributionFunction, g: &DistributionFunction, xs: &[f64]) -> Vec<f64> {
        match self {
            TriangleFunction::TauM => {
                let h = tau_m(f, g);
                xs.iter().map(|&x| h.at(x)).collect()
            }
            TriangleFunction::TauT(t) => xs.par_iter().map(|&x| sup_convolution_at(t, f, g, x)).collect(),
            TriangleFunction::TauTStar(c) => xs.par_iter().map(|&x| inf_convolution_at(c, f, g, x)).collect(),
        }
    }

    /// Left limit at +∞ of the convolution.
    pub fn value_at_inf(&self, f: &DistributionFunction, g: &DistributionFunction) -> f64 {
        let (a, b) = (f.value_at_inf(), g.value_at_inf());
        match self {
            TriangleFunction::TauT(t) => t.eval(a, b),
            TriangleFunction::TauTStar(_) | TriangleFunction::TauM => a.min(b),
        }
    }
}

impl TriangleOp for TriangleFunction {
    fn name(&self) -> String {
        self.id()
    }

    fn apply(&self, f: &DistributionFunction, g: &DistributionFunction, grid: &GridSpec) -> DistributionFunction {
        TriangleFunction::apply(self, f, g, grid)
    }
}

/// Walks every split `s + t = x` breakpoint and returns the supremum of
/// `T(F(s), G(x − s))`; with `complement` set it returns
/// `1 − sup T(1 − F(s), 1 − G(x − s))`, i.e. the dual-conorm infimum.
fn split_extremum(t: &TNorm, f: &DistributionFunction, g: &DistributionFunction, x: f64, complement: bool) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let fk = f.knots();
    let gk = g.knots();
    let (nf, ng) = (fk.len(), gk.len());
    let seg = |k: &[(f64, f64)], i: usize, u: f64| -> f64 {
        if i + 1 >= k.len() {
            k[k.len() - 1].1
        } else {
            let (x0, y0) = k[i];
            let (x1, y1) = k[i + 1];
            y0 + (y1 - y0) * ((u - x0) / (x1 - x0))
        }
    };
    let map = |v: f64| if complement { 1.0 - v } else { v };

    let mut i = 0usize;
    let mut j = gk.partition_point(|&(kx, _)| kx < x) - 1;
    debug_assert!(j < ng);
    let mut s_a = 0.0;
    let mut fa = 0.0;
    let mut ga = seg(gk, j, x);
    let mut best = f64::NEG_INFINITY;
    loop {
        let next_f = if i + 1 < nf { fk[i + 1].0 } else { f64::INFINITY };
        let next_g = x - gk[j].0;
        let s_b = next_f.min(next_g).min(x).max(s_a);
        let fb = seg(fk, i, s_b);
        let gb = seg(gk, j, (x - s_b).max(0.0));
        best = best.max(t.sup_on_segment(map(fa), map(fb), map(ga), map(gb)));
        if s_b >= x {
            break;
        }
        if s_b >= next_f {
            i += 1;
        }
        if s_b >= next_g && j > 0 {
            j -= 1;
        }
        s_a = s_b;
        fa = fb;
        ga = gb;
    }
    if complement {
        (1.0 - best).clamp(0.0, 1.0)
    } else {
        best.clamp(0.0, 1.0)
    }
}

/// `sup_{s+t=x} T(F(s), G(t))`, exact for piecewise-linear input and the
/// built-in t-norms.
pub fn sup_convolution_at(t: &TNorm, f: &DistributionFunction, g: &DistributionFunction, x: f64) -> f64 {
    split_extremum(t, f, g, x, false)
}

/// `inf_{s+t=x} T*(F(s), G(t))`.
pub fn inf_convolution_at(c: &TConorm, f: &DistributionFunction, g: &DistributionFunction, x: f64) -> f64 {
    split_extremum(&c.dual(), f, g, x, true)
}

/// Output abscissae: grid points, knots of both inputs, pairwise knot sums
/// and the crossings `F⁻¹(y) + G⁻¹(y)` at knot levels, up to the horizon
/// `min(last_F + last_G, max(x_max, last_F, last_G))`.
fn convolution_abscissae(f: &DistributionFunction, g: &DistributionFunction, grid: &GridSpec) -> Vec<f64> {
    let (lf, lg) = (f.last_knot_x(), g.last_knot_x());
    let horizon = (lf + lg).min(grid.x_max.max(lf).max(lg));
    let mut xs = if horizon > 0.0 {
        grid.points_up_to(horizon)
    } else {
        vec![0.0]
    };
    let (fk, gk) = (f.knots(), g.knots());
    xs.extend(fk.iter().chain(gk).map(|k| k.0).filter(|&x| x <= horizon));
    if fk.len() * gk.len() <= SUM_LIMIT {
        for a in fk {
            for b in gk {
                let s = a.0 + b.0;
                if s <= horizon {
                    xs.push(s);
                }
            }
        }
    }
    if fk.len() + gk.len() <= LEVEL_LIMIT {
        for &(_, y) in fk.iter().chain(gk) {
            for s in [
                f.lower_inverse(y) + g.lower_inverse(y),
                f.upper_inverse(y) + g.upper_inverse(y),
            ] {
                if s.is_finite() && s <= horizon {
                    xs.push(s);
                }
            }
        }
    }
    sort_dedup(&mut xs);
    xs
}

fn build(xs: Vec<f64>, value_at_inf: f64, eval: impl Fn(f64) -> f64 + Sync) -> DistributionFunction {
    let pts: Vec<(f64, f64)> = xs.into_par_iter().map(|x| (x, eval(x))).collect();
    DistributionFunction::from_points_lossy(&pts, value_at_inf).simplify(SIMPLIFY_TOL)
}

/// τ_T(F, G) by exact split enumeration at each output abscissa.
pub fn tau_t(t: &TNorm, f: &DistributionFunction, g: &DistributionFunction, grid: &GridSpec) -> DistributionFunction {
    let xs = convolution_abscissae(f, g, grid);
    let vinf = t.eval(f.value_at_inf(), g.value_at_inf());
    build(xs, vinf, |x| sup_convolution_at(t, f, g, x))
}

/// τ_{T*}(F, G) by exact split enumeration at each output abscissa. The left
/// limit at +∞ is `min(l⁻F(+∞), l⁻G(+∞))`: the splits `s = 0` and `s = x`
/// bound the infimum by `G(x)` and `F(x)`, and `T* ≥ max` bounds it below.
pub fn tau_t_star(
    c: &TConorm,
    f: &DistributionFunction,
    g: &DistributionFunction,
    grid: &GridSpec,
) -> DistributionFunction {
    let xs = convolution_abscissae(f, g, grid);
    let vinf = f.value_at_inf().min(g.value_at_inf());
    build(xs, vinf, |x| inf_convolution_at(c, f, g, x))
}

/// τ_M by brute-force split enumeration; equal to `tau_t(M, ..)`.
pub fn tau_m_brute(f: &DistributionFunction, g: &DistributionFunction, grid: &GridSpec) -> DistributionFunction {
    tau_t(&TNorm::Minimum, f, g, grid)
}

/// τ_M through quasi-inverse addition: the result reaches level `y` exactly
/// at `F⁻¹(y) + G⁻¹(y)`. Flat stretches of either input at level `y` become
/// flat stretches of the result from the lower to the upper inverse sum.
pub fn tau_m(f: &DistributionFunction, g: &DistributionFunction) -> DistributionFunction {
    let top = f.last_value().min(g.last_value());
    let mut levels: Vec<f64> = f
        .knots()
        .iter()
        .chain(g.knots())
        .map(|k| k.1)
        .filter(|&y| y <= top)
        .collect();
    levels.push(0.0);
    levels.push(top);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut pts = Vec::with_capacity(levels.len() * 2);
    for y in levels {
        let lo = f.lower_inverse(y) + g.lower_inverse(y);
        let hi = f.upper_inverse(y) + g.upper_inverse(y);
        pts.push((lo, y));
        if hi.is_finite() && hi > lo {
            pts.push((hi, y));
        }
    }
    DistributionFunction::from_points_lossy(&pts, f.value_at_inf().min(g.value_at_inf())).simplify(SIMPLIFY_TOL)
}

/// Random piecewise-linear distribution function: 3–10 knots with gaps in
/// `[0.2, 0.6)`, sorted uniform values, and a left limit at +∞ that is either
/// the last value or 1.
pub fn random_distribution<R: Rng>(rng: &mut R) -> DistributionFunction {
    let n: usize = rng.gen_range(3..=10);
    let mut ys: Vec<f64> = (0..n - 1).map(|_| rng.gen::<f64>()).collect();
    ys.sort_by(f64::total_cmp);
    let mut knots = Vec::with_capacity(n);
    knots.push((0.0, 0.0));
    let mut x = 0.0;
    for &y in &ys {
        x += rng.gen_range(0.2..0.6);
        knots.push((x, y));
    }
    let last = ys[ys.len() - 1];
    let vinf = if rng.gen_bool(0.5) { last } else { 1.0 };
    DistributionFunction::new(knots, vinf).expect("generator produces valid knots")
}

/// A random distribution function dominated by `g`: either `g` scaled by a
/// factor in `[0.3, 1)` or `g` delayed by a shift in `[0.1, 1)`.
pub fn random_minorant<R: Rng>(g: &DistributionFunction, rng: &mut R) -> DistributionFunction {
    if rng.gen_bool(0.5) {
        let c = rng.gen_range(0.3..1.0);
        let knots = g.knots().iter().map(|&(x, y)| (x, c * y)).collect();
        DistributionFunction::new(knots, c * g.value_at_inf()).expect("scaled knots stay valid")
    } else {
        let d = rng.gen_range(0.1..1.0);
        let mut knots = vec![(0.0, 0.0)];
        knots.extend(g.knots().iter().map(|&(x, y)| (x + d, y)));
        DistributionFunction::new(knots, g.value_at_inf()).expect("shifted knots stay valid")
    }
}

/// Outcome of one sampled law.
#[derive(Debug, Clone, Serialize)]
pub struct LawCheck {
    pub law: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    /// Index of the sample that produced the worst violation.
    pub worst_sample: Option<usize>,
    /// Inputs of that sample, in the order the law uses them.
    pub witness: Option<Vec<DistributionFunction>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleAxiomReport {
    pub operator: String,
    pub samples: usize,
    pub grid: GridSpec,
    /// Associativity, commutativity, monotonicity and unit law.
    pub laws: Vec<LawCheck>,
    /// Finite surrogate for continuity: output gap stays within input gap
    /// plus tolerance under a small perturbation. Partial check only.
    pub continuity_surrogate: LawCheck,
}

impl TriangleAxiomReport {
    pub fn all_pass(&self) -> bool {
        self.laws.iter().all(|l| l.passed)
    }

    pub fn law(&self, name: &str) -> Option<&LawCheck> {
        self.laws.iter().find(|l| l.law == name)
    }
}

struct Worst {
    value: f64,
    sample: Option<usize>,
    witness: Option<Vec<DistributionFunction>>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            sample: None,
            witness: None,
        }
    }

    fn offer(&mut self, value: f64, sample: usize, inputs: &[&DistributionFunction]) {
        if value > self.value || self.sample.is_none() {
            self.value = value.max(self.value);
            if value >= self.value {
                self.sample = Some(sample);
                self.witness = Some(inputs.iter().map(|d| (*d).clone()).collect());
            }
        }
    }

    fn into_check(self, law: &str, tol: f64) -> LawCheck {
        let passed = self.value <= tol;
        LawCheck {
            law: law.into(),
            passed,
            worst_violation: self.value,
            tolerance: tol,
            worst_sample: self.sample,
            witness: if passed { None } else { self.witness },
        }
    }
}

/// Draws `samples` random triples and measures the four triangle-function
/// laws. Violations are sup-gaps including the left limit at +∞; a law
/// passes when its worst violation is at most `grid.conv_tol()`.
pub fn check_triangle_axioms<R: Rng>(
    op: &dyn TriangleOp,
    samples: usize,
    grid: &GridSpec,
    rng: &mut R,
) -> TriangleAxiomReport {
    let tol = grid.conv_tol();
    let eps0 = DistributionFunction::epsilon0(grid);
    let mut assoc = Worst::new();
    let mut comm = Worst::new();
    let mut mono = Worst::new();
    let mut unit = Worst::new();
    let mut cont = Worst::new();
    for k in 0..samples.max(1) {
        let f = random_distribution(rng);
        let g = random_distribution(rng);
        let h = random_distribution(rng);
        let f_low = random_minorant(&f, rng);

        let fg = op.apply(&f, &g, grid);
        let gh = op.apply(&g, &h, grid);
        let left = op.apply(&fg, &h, grid);
        let right = op.apply(&f, &gh, grid);
        assoc.offer(left.uniform_gap(&right, grid), k, &[&f, &g, &h]);

        let gf = op.apply(&g, &f, grid);
        comm.offer(fg.uniform_gap(&gf, grid), k, &[&f, &g]);

        let lo = op.apply(&f_low, &h, grid);
        let hi = op.apply(&f, &h, grid);
        mono.offer(lo.max_excess_over(&hi, grid).0.max(0.0), k, &[&f_low, &f, &h]);

        let fe = op.apply(&f, &eps0, grid);
        unit.offer(fe.uniform_gap(&f, grid), k, &[&f]);

        let eta = grid.mesh;
        let knots: Vec<(f64, f64)> = f.knots().iter().map(|&(x, y)| (x, (1.0 - eta) * y)).collect();
        let f_eta = DistributionFunction::new(knots, (1.0 - eta) * f.value_at_inf()).expect("scaled knots stay valid");
        let input_gap = f.uniform_gap(&f_eta, grid);
        let output_gap = op.apply(&f_eta, &g, grid).uniform_gap(&fg, grid);
        cont.offer((output_gap - input_gap).max(0.0), k, &[&f, &g]);
    }
    TriangleAxiomReport {
        operator: op.name(),
        samples: samples.max(1),
        grid: *grid,
        laws: vec![
            assoc.into_check("associativity", tol),
            comm.into_check("commutativity", tol),
            mono.into_check("monotonicity", tol),
            unit.into_check("unit", tol),
        ],
        continuity_surrogate: cont.into_check("continuity (surrogate)", tol),
    }
}
