//! Distance distribution functions.
//!
//! A [`DistributionFunction`] is a non-decreasing, left-continuous map
//! `[0, +∞] → [0, 1]` with `F(0) = 0`. It is stored as a piecewise-linear
//! interpolant through explicit knots, constant after the last knot, together
//! with the left limit `l⁻F(+∞)`. The value *at* `+∞` is 1 by convention, so
//! every valid instance lies in Δ⁺; membership in D⁺ is decided by the stored
//! left limit.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const DEFAULT_MESH: f64 = 1.0 / 64.0;
pub const DEFAULT_X_MAX: f64 = 128.0;
pub const DEFAULT_TOL_EQ: f64 = 1e-9;

/// Width of the ramp used for the jump of ε₀, as a fraction of the mesh.
const EPS0_MESH_FRACTION: f64 = 1.0 / 1024.0;

/// Chord tolerance and depth limit for adaptive sampling of closed forms.
pub const REFINE_TOL: f64 = 1e-7;
const REFINE_MAX_DEPTH: u32 = 12;

/// A point of `[0, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    /// Builds a point of `[0, +∞]`; `f64::INFINITY` maps to [`ExtReal::Infinity`].
    pub fn new(x: f64) -> Result<Self> {
        if x.is_nan() {
            return Err(Error::Domain("NaN is not a point of [0, +inf]".into()));
        }
        if x < 0.0 {
            return Err(Error::Domain(format!("{x} is negative")));
        }
        if x.is_infinite() {
            Ok(ExtReal::Infinity)
        } else {
            Ok(ExtReal::Finite(x))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    /// The value as an `f64`, with `+∞` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::Infinity => f64::INFINITY,
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value().total_cmp(&other.value())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinity => write!(f, "+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::Infinity => serializer.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(x) => ExtReal::new(x).map_err(serde::de::Error::custom),
            Raw::Text(s) if matches!(s.as_str(), "+inf" | "inf" | "infinity") => Ok(ExtReal::Infinity),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"+inf\", got {s:?}"
            ))),
        }
    }
}

/// Evaluation grid and comparison tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub mesh: f64,
    pub x_max: f64,
    pub tol_eq: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            mesh: DEFAULT_MESH,
            x_max: DEFAULT_X_MAX,
            tol_eq: DEFAULT_TOL_EQ,
        }
    }
}

impl GridSpec {
    pub fn new(mesh: f64, x_max: f64, tol_eq: f64) -> Result<Self> {
        let grid = GridSpec { mesh, x_max, tol_eq };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mesh.is_finite() && self.mesh > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mesh must be positive, got {}",
                self.mesh
            )));
        }
        if !(self.x_max.is_finite() && self.x_max >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "x_max must be at least 1, got {}",
                self.x_max
            )));
        }
        if !(self.tol_eq.is_finite() && self.tol_eq > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tol_eq must be positive, got {}",
                self.tol_eq
            )));
        }
        Ok(())
    }

    /// Grid abscissae `0, mesh, 2·mesh, …` up to and including `x_max`.
    pub fn points(&self) -> Vec<f64> {
        self.points_up_to(self.x_max)
    }

    /// Grid abscissae up to `limit` (which is appended if it is off-grid).
    pub fn points_up_to(&self, limit: f64) -> Vec<f64> {
        let n = (limit / self.mesh + 1e-9).floor() as usize;
        let mut pts: Vec<f64> = (0..=n).map(|i| i as f64 * self.mesh).collect();
        if let Some(&last) = pts.last() {
            if limit - last > 1e-12 * limit.max(1.0) {
                pts.push(limit);
            }
        }
        pts
    }

    /// Width of the ramp that stands in for the jump of ε₀.
    pub fn eps0_width(&self) -> f64 {
        self.mesh * EPS0_MESH_FRACTION
    }

    /// Tolerance for comparisons that go through a convolution.
    pub fn conv_tol(&self) -> f64 {
        2.0 * self.mesh
    }
}

/// A piecewise-linear element of Δ⁺.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFunction {
    knots: Vec<(f64, f64)>,
    value_at_inf: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    knots: Vec<(f64, f64)>,
    value_at_inf: f64,
}

impl Serialize for DistributionFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawDistribution {
            knots: self.knots.clone(),
            value_at_inf: self.value_at_inf,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DistributionFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawDistribution::deserialize(deserializer)?;
        DistributionFunction::new(raw.knots, raw.value_at_inf).map_err(serde::de::Error::custom)
    }
}

impl DistributionFunction {
    /// Validates knots and left limit at +∞.
    pub fn new(knots: Vec<(f64, f64)>, value_at_inf: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        if knots.is_empty() {
            return bad("empty knot list".into());
        }
        if value_at_inf.is_nan() || knots.iter().any(|&(x, y)| x.is_nan() || y.is_nan()) {
            return bad("NaN in knots or value_at_inf".into());
        }
        if knots.iter().any(|&(x, _)| !x.is_finite()) {
            return bad("knot abscissae must be finite".into());
        }
        if knots[0] != (0.0, 0.0) {
            return bad(format!("first knot must be (0, 0), got {:?}", knots[0]));
        }
        for w in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x1 <= x0 {
                return bad(format!("knot abscissae not strictly increasing at {x1}"));
            }
            if y1 < y0 {
                return bad(format!("values decrease between x = {x0} and x = {x1}"));
            }
        }
        if knots.iter().any(|&(_, y)| !(0.0..=1.0).contains(&y)) {
            return bad("knot values must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&value_at_inf) {
            return bad(format!("value_at_inf {value_at_inf} outside [0, 1]"));
        }
        let last = knots[knots.len() - 1].1;
        if value_at_inf < last {
            return bad(format!("value_at_inf {value_at_inf} below the last knot value {last}"));
        }
        Ok(DistributionFunction { knots, value_at_inf })
    }

    /// Builds a distribution from computed samples, repairing round-off:
    /// values are clamped to [0, 1], made non-decreasing, and abscissae that
    /// do not advance are merged.
    pub(crate) fn from_points_lossy(points: &[(f64, f64)], value_at_inf: f64) -> Self {
        let mut knots: Vec<(f64, f64)> = Vec::with_capacity(points.len() + 1);
        knots.push((0.0, 0.0));
        let mut running = 0.0_f64;
        for &(x, y) in points {
            if !(x > 0.0) {
                continue;
            }
            running = running.max(y.clamp(0.0, 1.0));
            let (lx, _) = knots[knots.len() - 1];
            if x - lx <= 1e-13 * x.max(1.0) {
                let n = knots.len();
                if n > 1 {
                    knots[n - 1].1 = running;
                }
                continue;
            }
            knots.push((x, running));
        }
        let value_at_inf = value_at_inf.clamp(0.0, 1.0).max(running);
        DistributionFunction { knots, value_at_inf }
    }

    /// Samples `f` at the grid abscissae only.
    pub fn from_fn_on_grid(grid: &GridSpec, value_at_inf: f64, f: impl Fn(f64) -> f64) -> Self {
        let pts: Vec<(f64, f64)> = grid.points().into_iter().map(|x| (x, f(x))).collect();
        Self::from_points_lossy(&pts, value_at_inf)
    }

    /// Samples a closed form at the grid abscissae and bisects every grid cell
    /// whose midpoint deviates from the chord by more than [`REFINE_TOL`].
    pub fn from_closed_form(grid: &GridSpec, value_at_inf: f64, f: impl Fn(f64) -> f64) -> Self {
        let xs = grid.points();
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(xs.len() * 2);
        let mut prev = (0.0, 0.0);
        pts.push(prev);
        for &x in &xs[1..] {
            let fx = f(x);
            refine(&f, prev, (x, fx), 0, &mut pts);
            pts.push((x, fx));
            prev = (x, fx);
        }
        Self::from_points_lossy(&pts, value_at_inf)
    }

    /// ε₀: the unit step at 0⁺, with its jump spread over `grid.eps0_width()`.
    pub fn epsilon0(grid: &GridSpec) -> Self {
        Self::step_at(0.0, grid)
    }

    /// ε₀ on the default grid.
    pub fn epsilon0_default() -> Self {
        Self::epsilon0(&GridSpec::default())
    }

    /// ε_∞: identically zero with left limit 0 at +∞.
    pub fn epsilon_inf() -> Self {
        DistributionFunction {
            knots: vec![(0.0, 0.0)],
            value_at_inf: 0.0,
        }
    }

    /// ε_a: 0 up to and including `a`, 1 after (ramp of width `eps0_width`).
    pub fn step_at(a: f64, grid: &GridSpec) -> Self {
        let w = grid.eps0_width();
        let mut knots = vec![(0.0, 0.0)];
        if a > 0.0 {
            knots.push((a, 0.0));
        }
        knots.push((a + w, 1.0));
        DistributionFunction {
            knots,
            value_at_inf: 1.0,
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Left limit l⁻F(+∞).
    pub fn value_at_inf(&self) -> f64 {
        self.value_at_inf
    }

    /// Same as [`value_at_inf`](Self::value_at_inf).
    pub fn left_limit_at_inf(&self) -> f64 {
        self.value_at_inf
    }

    pub fn in_d_plus(&self, tol: f64) -> bool {
        self.value_at_inf >= 1.0 - tol
    }

    pub fn last_knot_x(&self) -> f64 {
        self.knots[self.knots.len() - 1].0
    }

    pub fn last_value(&self) -> f64 {
        self.knots[self.knots.len() - 1].1
    }

    /// Evaluates at a point of `[0, +∞]`; the value at `+∞` is 1.
    pub fn eval(&self, x: ExtReal) -> f64 {
        match x {
            ExtReal::Finite(x) => self.at(x),
            ExtReal::Infinity => 1.0,
        }
    }

    /// Evaluates at a finite abscissa, rejecting negative or NaN input.
    pub fn try_eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval(ExtReal::new(x)?))
    }

    /// Evaluates at a finite abscissa; non-positive input yields 0.
    pub fn at(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        let k = &self.knots;
        let idx = k.partition_point(|&(kx, _)| kx < x);
        if idx == k.len() {
            return k[k.len() - 1].1;
        }
        let (x1, y1) = k[idx];
        if x1 == x || idx == 0 {
            return y1;
        }
        let (x0, y0) = k[idx - 1];
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }

    /// Lower quasi-inverse `inf{s : F(s) ≥ y}`; `+∞` when `y` exceeds the
    /// last knot value.
    pub fn lower_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let k = &self.knots;
        if y > k[k.len() - 1].1 {
            return f64::INFINITY;
        }
        let i = k.partition_point(|&(_, ky)| ky < y);
        if i == 0 {
            return 0.0;
        }
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        x0 + (x1 - x0) * ((y - y0) / (y1 - y0))
    }

    /// Upper quasi-inverse `sup{s : F(s) ≤ y}`; `+∞` when `y` reaches the last
    /// knot value.
    pub fn upper_inverse(&self, y: f64) -> f64 {
        let k = &self.knots;
        if y >= k[k.len() - 1].1 {
            return f64::INFINITY;
        }
        let i = k.partition_point(|&(_, ky)| ky <= y);
        if i == 0 {
            return 0.0;
        }
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        x0 + (x1 - x0) * ((y - y0) / (y1 - y0))
    }

    /// Drops interior knots that are within `tol` of the line through their
    /// kept neighbours.
    pub fn simplify(&self, tol: f64) -> Self {
        let k = &self.knots;
        if k.len() <= 2 {
            return self.clone();
        }
        let mut out = vec![k[0]];
        let mut anchor = k[0];
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut pending = k[1];
        // Slope cone through the anchor that keeps every skipped knot within tol.
        for &p in &k[1..] {
            let dx = p.0 - anchor.0;
            let s = (p.1 - anchor.1) / dx;
            if s < lo || s > hi {
                out.push(pending);
                anchor = pending;
                let dx = p.0 - anchor.0;
                lo = (p.1 - tol - anchor.1) / dx;
                hi = (p.1 + tol - anchor.1) / dx;
            } else {
                lo = lo.max((p.1 - tol - anchor.1) / dx);
                hi = hi.min((p.1 + tol - anchor.1) / dx);
            }
            pending = p;
        }
        out.push(pending);
        DistributionFunction {
            knots: out,
            value_at_inf: self.value_at_inf,
        }
    }

    /// `true` iff `self ≤ other` at every knot of either function, every grid
    /// point, and at the left limit at +∞, all within `grid.tol_eq`.
    pub fn pointwise_leq(&self, other: &Self, grid: &GridSpec) -> bool {
        self.max_excess_over(other, grid).0 <= grid.tol_eq
    }

    /// Largest `self(x) − other(x)` over the comparison abscissae and the left
    /// limit at +∞, with the abscissa where it occurs (`None` for +∞).
    pub fn max_excess_over(&self, other: &Self, grid: &GridSpec) -> (f64, Option<f64>) {
        let xs = comparison_abscissae(&[self, other], grid);
        let mut worst = (self.value_at_inf - other.value_at_inf, None);
        for x in xs {
            let d = self.at(x) - other.at(x);
            if d > worst.0 {
                worst = (d, Some(x));
            }
        }
        worst
    }

    /// Largest `|F − G|` over the comparison abscissae and the left limit at
    /// +∞.
    pub fn uniform_gap(&self, other: &Self, grid: &GridSpec) -> f64 {
        df_distance(self, other, grid).max((self.value_at_inf - other.value_at_inf).abs())
    }

    /// CSV rows `x,F(x)` at the grid points and the knots within the grid.
    pub fn to_csv(&self, grid: &GridSpec) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["x", "F"])?;
        for x in comparison_abscissae(&[self], grid) {
            wtr.serialize((x, self.at(x)))?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn refine(f: &impl Fn(f64) -> f64, a: (f64, f64), b: (f64, f64), depth: u32, out: &mut Vec<(f64, f64)>) {
    if depth >= REFINE_MAX_DEPTH {
        return;
    }
    let m = 0.5 * (a.0 + b.0);
    let fm = f(m);
    if (fm - 0.5 * (a.1 + b.1)).abs() <= REFINE_TOL {
        return;
    }
    refine(f, a, (m, fm), depth + 1, out);
    out.push((m, fm));
    refine(f, (m, fm), b, depth + 1, out);
}

/// Sorted union of the grid points and the knot abscissae of `dfs` that lie
/// within the grid horizon `x_max`.
pub fn comparison_abscissae(dfs: &[&DistributionFunction], grid: &GridSpec) -> Vec<f64> {
    let mut xs = grid.points();
    for df in dfs {
        xs.extend(df.knots.iter().map(|&(x, _)| x).filter(|&x| x <= grid.x_max));
    }
    sort_dedup(&mut xs);
    xs
}

pub(crate) fn sort_dedup(xs: &mut Vec<f64>) {
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|b, a| (*b - *a).abs() <= 1e-13 * a.abs().max(1.0));
}

/// Sup-norm distance over the comparison abscissae. Piecewise-linear
/// functions are continuous on `[0, ∞)`, so every abscissa is a continuity
/// point of both arguments.
pub fn df_distance(f: &DistributionFunction, g: &DistributionFunction, grid: &GridSpec) -> f64 {
    comparison_abscissae(&[f, g], grid)
        .into_iter()
        .map(|x| (f.at(x) - g.at(x)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rational_df(c: f64, limit: f64, grid: &GridSpec) -> DistributionFunction {
        DistributionFunction::from_closed_form(grid, limit, |x| x / (x + c))
    }

    #[test]
    fn ext_real_rejects_negative_and_nan() {
        assert!(ExtReal::new(-1.0).is_err());
        assert!(ExtReal::new(f64::NAN).is_err());
        assert_eq!(ExtReal::new(f64::INFINITY).unwrap(), ExtReal::Infinity);
        assert!(ExtReal::Finite(1e300) < ExtReal::Infinity);
    }

    #[test]
    fn epsilon0_values() {
        let e0 = DistributionFunction::epsilon0_default();
        assert_eq!(e0.eval(ExtReal::Finite(5.0)), 1.0);
        assert_eq!(e0.eval(ExtReal::Finite(0.0)), 0.0);
        assert_eq!(e0.left_limit_at_inf(), 1.0);
        assert_eq!(e0.eval(ExtReal::Infinity), 1.0);
    }

    #[test]
    fn epsilon_inf_has_zero_left_limit() {
        let e = DistributionFunction::epsilon_inf();
        assert_eq!(e.left_limit_at_inf(), 0.0);
        assert_eq!(e.eval(ExtReal::Finite(1e6)), 0.0);
        assert_eq!(e.eval(ExtReal::Infinity), 1.0);
    }

    #[test]
    fn eval_on_integer_knots_matches_formula() {
        let knots: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, i as f64 / (i as f64 + 1.0))).collect();
        let f = DistributionFunction::new(knots, 1.0).unwrap();
        assert_eq!(f.eval(ExtReal::Finite(1.0)), 0.5);
        // constant after the last knot
        assert_eq!(f.at(100.0), 19.0 / 20.0);
        assert!(f.try_eval(-0.5).is_err());
    }

    #[test]
    fn left_limits_of_rational_families() {
        let g = GridSpec::default();
        let f = DistributionFunction::from_closed_form(&g, 0.5, |x| 0.5 * x / (x + 1.0));
        assert_eq!(f.left_limit_at_inf(), 0.5);
        // cross-check against the closed form far out
        let far: f64 = 0.5 * 1e6 / (1e6 + 1.0);
        assert!((far - 0.5).abs() < 1e-6);
        assert_eq!(rational_df(2.0, 1.0, &g).left_limit_at_inf(), 1.0);
    }

    #[test]
    fn validator_rejects_malformed_input() {
        assert!(DistributionFunction::new(vec![], 1.0).is_err());
        assert!(DistributionFunction::new(vec![(0.0, 0.1)], 1.0).is_err());
        assert!(DistributionFunction::new(vec![(0.0, 0.0), (1.0, f64::NAN)], 1.0).is_err());
        assert!(DistributionFunction::new(vec![(0.0, 0.0), (1.0, 0.5), (1.0, 0.6)], 1.0).is_err());
        assert!(DistributionFunction::new(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.4)], 1.0).is_err());
        assert!(DistributionFunction::new(vec![(0.0, 0.0), (1.0, 0.5)], 0.4).is_err());
        assert!(DistributionFunction::new(vec![(0.0, 0.0), (1.0, 1.5)], 1.0).is_err());
    }

    #[test]
    fn pointwise_order_examples() {
        let g = GridSpec::default();
        let f1 = rational_df(1.0, 1.0, &g);
        let f2 = rational_df(2.0, 1.0, &g);
        assert!(f2.pointwise_leq(&f1, &g));
        assert!(f1.pointwise_leq(&f1, &g));
        assert!(!f1.pointwise_leq(&f2, &g));
        assert!(f1.pointwise_leq(&DistributionFunction::epsilon0(&g), &g));
        assert!(DistributionFunction::epsilon_inf().pointwise_leq(&f1, &g));
    }

    #[test]
    fn distance_examples() {
        let g = GridSpec::new(DEFAULT_MESH, 100.0, DEFAULT_TOL_EQ).unwrap();
        let f1 = rational_df(1.0, 1.0, &g);
        let f2 = rational_df(2.0, 1.0, &g);
        assert_eq!(df_distance(&f1, &f1, &g), 0.0);
        let e0 = DistributionFunction::epsilon0(&g);
        let einf = DistributionFunction::epsilon_inf();
        assert_eq!(df_distance(&e0, &einf, &g), 1.0);
        // dense-scan oracle for sup |x/(x+1) − x/(x+2)|
        let oracle = (0..=1_000_000)
            .map(|i| i as f64 * 1e-4)
            .map(|x| x / (x + 1.0) - x / (x + 2.0))
            .fold(0.0, f64::max);
        assert!((oracle - (2f64.sqrt() - 1.0).powi(2)).abs() < 1e-8);
        let d = df_distance(&f1, &f2, &g);
        assert!(d > 0.0 && d <= 0.2);
        assert!((d - oracle).abs() < 1e-4);
    }

    #[test]
    fn quasi_inverses_of_rational_df() {
        let g = GridSpec::default();
        let f = rational_df(1.0, 1.0, &g);
        // x/(x+1) = y  <=>  x = y/(1-y)
        for &y in &[0.1, 0.5, 0.9] {
            let exact = y / (1.0 - y);
            assert!((f.lower_inverse(y) - exact).abs() < 1e-3);
            assert!((f.upper_inverse(y) - exact).abs() < 1e-3);
        }
        assert!(f.lower_inverse(0.999).is_infinite());
        let flat = DistributionFunction::new(vec![(0.0, 0.0), (1.0, 0.5), (3.0, 0.5), (4.0, 1.0)], 1.0).unwrap();
        assert_eq!(flat.lower_inverse(0.5), 1.0);
        assert_eq!(flat.upper_inverse(0.5), 3.0);
    }

    #[test]
    fn simplify_keeps_values() {
        let g = GridSpec::default();
        let lin = DistributionFunction::from_fn_on_grid(&g, 1.0, |x| (x / 200.0).min(1.0));
        let s = lin.simplify(1e-12);
        assert!(s.knots().len() <= 3, "{:?}", s.knots().len());
        assert!(df_distance(&lin, &s, &g) < 1e-12);
        let curved = rational_df(1.0, 1.0, &g);
        let s = curved.simplify(1e-9);
        assert!(df_distance(&curved, &s, &g) <= 1e-9 + 1e-15);
    }

    #[test]
    fn json_and_csv() {
        let g = GridSpec::new(0.5, 2.0, 1e-9).unwrap();
        let f = DistributionFunction::new(vec![(0.0, 0.0), (1.0, 0.5)], 0.75).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"knots":[[0.0,0.0],[1.0,0.5]],"value_at_inf":0.75}"#);
        let back: DistributionFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<DistributionFunction>(r#"{"knots":[],"value_at_inf":1}"#).is_err());
        let csv = f.to_csv(&g).unwrap();
        assert_eq!(csv.lines().next(), Some("x,F"));
        assert!(csv.contains("1.0,0.5"));
    }
}
