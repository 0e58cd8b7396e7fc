//! φ-transforms and their quasi-inverses.
//!
//! A [`MonotonePl`] is a non-decreasing, left-continuous, piecewise-linear
//! function on `[0, +∞]`. Two knots may share an abscissa to encode a jump;
//! the function takes the lower value there. Past the last knot the function
//! follows its [`Tail`].
//!
//! The quasi-inverse `φ̂(t) = sup{u : φ(u) < t}` of such a function is again
//! of this form: its graph is the mirror image of φ's graph with flats and
//! jumps exchanged, so it is computed exactly by swapping knot coordinates.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distfn::ExtReal;
use crate::error::{Error, Result};

/// Behaviour past the last knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Continue linearly with this slope.
    Slope(f64),
    /// Stay at the last knot value up to and including `b`, then `+∞`.
    JumpAt(f64),
}

/// A non-decreasing, left-continuous, piecewise-linear map on `[0, +∞]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonePl {
    knots: Vec<(f64, f64)>,
    tail: Tail,
}

impl MonotonePl {
    pub fn new(knots: Vec<(f64, f64)>, tail: Tail) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if knots.is_empty() {
            return bad("empty knot list".into());
        }
        if knots.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return bad("knots must be finite".into());
        }
        if knots[0].0 != 0.0 {
            return bad(format!("first knot must be at x = 0, got {}", knots[0].0));
        }
        if knots.iter().any(|&(_, y)| y < 0.0) {
            return bad("knot values must be non-negative".into());
        }
        for w in knots.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return bad(format!("knots not non-decreasing at {:?}", w[1]));
            }
        }
        if knots.windows(3).any(|w| w[0].0 == w[2].0) {
            return bad("at most two knots may share an abscissa".into());
        }
        let last_x = knots[knots.len() - 1].0;
        match tail {
            Tail::Slope(s) if !(s.is_finite() && s >= 0.0) => {
                return bad(format!("tail slope must be finite and non-negative, got {s}"))
            }
            Tail::JumpAt(b) if !(b.is_finite() && b >= last_x) => {
                return bad(format!(
                    "jump_at {b} must be finite and not before the last knot {last_x}"
                ))
            }
            _ => {}
        }
        Ok(MonotonePl { knots, tail })
    }

    pub fn identity() -> Self {
        MonotonePl {
            knots: vec![(0.0, 0.0)],
            tail: Tail::Slope(1.0),
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Value at a finite abscissa, `f64::INFINITY` past a jump tail.
    /// Non-positive input yields the value at 0.
    pub fn at(&self, x: f64) -> f64 {
        let k = &self.knots;
        if !(x > 0.0) {
            return k[0].1;
        }
        let idx = k.partition_point(|p| p.0 < x);
        if idx == k.len() {
            let (xl, yl) = k[k.len() - 1];
            return match self.tail {
                Tail::Slope(s) => yl + s * (x - xl),
                Tail::JumpAt(b) if x <= b => yl,
                Tail::JumpAt(_) => f64::INFINITY,
            };
        }
        let (x1, y1) = k[idx];
        if x1 == x || idx == 0 {
            return y1;
        }
        let (x0, y0) = k[idx - 1];
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }

    /// Value on `[0, +∞]`; `+∞` maps to `+∞`.
    pub fn eval(&self, x: ExtReal) -> ExtReal {
        match x {
            ExtReal::Infinity => ExtReal::Infinity,
            ExtReal::Finite(x) => {
                let v = self.at(x);
                if v.is_infinite() {
                    ExtReal::Infinity
                } else {
                    ExtReal::Finite(v)
                }
            }
        }
    }

    /// Strictly increasing and continuous onto `[0, +∞)`.
    pub fn is_bijective(&self) -> bool {
        self.knots[0].1 == 0.0
            && self.knots.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
            && matches!(self.tail, Tail::Slope(s) if s > 0.0)
    }

    /// `t ↦ sup{u : φ(u) < t}` in the same representation.
    pub fn quasi_inverse(&self) -> MonotonePl {
        let mut graph = self.knots.clone();
        let (xl, yl) = graph[graph.len() - 1];
        if let Tail::JumpAt(b) = self.tail {
            if b > xl {
                graph.push((b, yl));
            }
        }
        // A final flat that extends forever: φ̂ jumps to +∞ at its start.
        if let Tail::Slope(s) = self.tail {
            if s == 0.0 {
                while graph.len() > 1 && graph[graph.len() - 2].1 == yl {
                    graph.pop();
                }
            }
        }
        let n = graph.len();
        let mut knots: Vec<(f64, f64)> = Vec::with_capacity(n);
        for i in 0..n {
            let interior = i > 0 && i + 1 < n && graph[i - 1].1 == graph[i].1 && graph[i + 1].1 == graph[i].1;
            if !interior {
                knots.push((graph[i].1, graph[i].0));
            }
        }
        let y_last = knots[knots.len() - 1].0;
        let tail = match self.tail {
            Tail::Slope(s) if s > 0.0 => Tail::Slope(1.0 / s),
            Tail::Slope(_) => Tail::JumpAt(y_last),
            Tail::JumpAt(_) => Tail::Slope(0.0),
        };
        MonotonePl { knots, tail }
    }
}

/// JSON form of a φ-transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiSpec {
    pub phi_knots: Vec<(f64, f64)>,
    pub tail: Tail,
}

/// A validated member of M̃ together with its quasi-inverse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiTransform {
    pub phi: MonotonePl,
    pub phi_hat: MonotonePl,
    /// φ is a bijection of `[0, +∞]`, i.e. a member of M_{+∞}.
    pub bijective: bool,
}

impl PhiTransform {
    pub fn identity() -> Self {
        validate_phi(vec![(0.0, 0.0)], Tail::Slope(1.0)).expect("identity is in M~")
    }

    pub fn from_spec(spec: &PhiSpec) -> Result<Self> {
        validate_phi(spec.phi_knots.clone(), spec.tail)
    }

    /// The `b` for which φ ∈ M_b. Only `b = +∞` is ever reported: a
    /// piecewise-linear φ with a jump tail is not continuous onto `[0, +∞]`.
    pub fn m_b_bound(&self) -> Option<ExtReal> {
        self.bijective.then_some(ExtReal::Infinity)
    }

    pub fn phi_at(&self, x: ExtReal) -> ExtReal {
        self.phi.eval(x)
    }

    pub fn phi_hat_at(&self, t: ExtReal) -> ExtReal {
        self.phi_hat.eval(t)
    }
}

fn reject(condition: &str, witness: Option<f64>) -> Error {
    Error::PhiRejected {
        condition: condition.into(),
        witness,
    }
}

/// Checks membership in M̃ and computes the quasi-inverse.
pub fn validate_phi(knots: Vec<(f64, f64)>, tail: Tail) -> Result<PhiTransform> {
    if knots.is_empty() || knots[0] != (0.0, 0.0) {
        return Err(reject("φ(0)=0", Some(0.0)));
    }
    let phi = MonotonePl::new(knots, tail).map_err(|e| match e {
        Error::InvalidArgument(msg) => reject(&format!("non-decreasing, left-continuous ({msg})"), None),
        other => other,
    })?;
    if matches!(tail, Tail::Slope(s) if s <= 0.0) {
        return Err(reject("φ(+∞)=+∞", None));
    }
    let k = phi.knots();
    // End of the initial stretch where φ vanishes.
    let zero_end = if k[k.len() - 1].1 == 0.0 {
        match tail {
            Tail::Slope(_) => k[k.len() - 1].0,
            Tail::JumpAt(b) => b,
        }
    } else {
        let first_positive = k.iter().position(|p| p.1 > 0.0).expect("some knot is positive");
        k[first_positive - 1].0
    };
    if zero_end > 0.0 {
        return Err(reject("φ(x)>0 for x>0", Some(0.5 * zero_end)));
    }
    let phi_hat = phi.quasi_inverse();
    let bijective = phi.is_bijective();
    Ok(PhiTransform {
        phi,
        phi_hat,
        bijective,
    })
}

/// Worst slack of `φ̂(φ(x)) ≤ x` and `φ(φ̂(y)) ≤ y`.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiInverseReport {
    pub points_checked: usize,
    /// Largest `φ̂(φ(x)) − x`, over points where `φ(x)` is finite.
    pub worst_hat_of_phi: f64,
    /// Largest `φ(φ̂(y)) − y`.
    pub worst_phi_of_hat: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks both quasi-inverse inequalities at all knots of φ and φ̂ and at
/// `samples` random points.
pub fn check_quasi_inverse_inequalities<R: Rng>(phi: &PhiTransform, samples: usize, rng: &mut R) -> QuasiInverseReport {
    let span_x = match phi.phi.tail() {
        Tail::JumpAt(b) => b.max(phi.phi.knots().last().unwrap().0),
        Tail::Slope(_) => phi.phi.knots().last().unwrap().0,
    };
    let span_y = phi.phi_hat.knots().last().unwrap().0;
    let mut xs: Vec<f64> = phi.phi.knots().iter().map(|k| k.0).collect();
    let mut ys: Vec<f64> = phi.phi_hat.knots().iter().map(|k| k.0).collect();
    xs.extend((0..samples).map(|_| rng.gen_range(0.0..2.0 * span_x + 1.0)));
    ys.extend((0..samples).map(|_| rng.gen_range(0.0..2.0 * span_y + 1.0)));
    const TOL: f64 = 1e-9;
    let mut worst_a = f64::NEG_INFINITY;
    for &x in &xs {
        let fx = phi.phi.at(x);
        if fx.is_finite() {
            let back = phi.phi_hat.at(fx);
            worst_a = worst_a.max((back - x) / x.abs().max(1.0));
        }
    }
    let mut worst_b = f64::NEG_INFINITY;
    for &y in &ys {
        let back = phi.phi.at(phi.phi_hat.at(y));
        worst_b = worst_b.max((back - y) / y.abs().max(1.0));
    }
    QuasiInverseReport {
        points_checked: xs.len() + ys.len(),
        worst_hat_of_phi: worst_a,
        worst_phi_of_hat: worst_b,
        tolerance: TOL,
        passed: worst_a <= TOL && worst_b <= TOL,
    }
}
