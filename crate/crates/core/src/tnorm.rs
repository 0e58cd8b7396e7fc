//! Continuous t-norms and their dual t-conorms.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

type BinaryOp = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A user-supplied t-norm that has passed [`check_tnorm_axioms`].
#[derive(Clone)]
pub struct CustomTNorm {
    name: String,
    op: BinaryOp,
}

impl fmt::Debug for CustomTNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomTNorm").field("name", &self.name).finish()
    }
}

/// A continuous t-norm on `[0, 1]`.
#[derive(Debug, Clone)]
pub enum TNorm {
    /// M(x, y) = min(x, y)
    Minimum,
    /// π(x, y) = x·y
    Product,
    Custom(CustomTNorm),
}

impl PartialEq for TNorm {
    fn eq(&self, other: &Self) -> bool {
        self.id() == other.id()
    }
}

fn check_unit(x: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} = {x} is outside [0, 1]")))
    }
}

impl TNorm {
    /// Parses `"M"` or `"pi"`.
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "M" | "min" => Ok(TNorm::Minimum),
            "pi" | "product" => Ok(TNorm::Product),
            other => Err(Error::Config(format!("unknown t-norm id {other:?}"))),
        }
    }

    pub fn id(&self) -> &str {
        match self {
            TNorm::Minimum => "M",
            TNorm::Product => "pi",
            TNorm::Custom(c) => &c.name,
        }
    }

    /// Accepts a user-supplied t-norm once it passes the axiom sampler.
    pub fn custom<R: Rng>(
        name: impl Into<String>,
        op: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        samples: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let op: BinaryOp = Arc::new(op);
        let report = check_tnorm_axioms(op.as_ref(), samples, rng);
        if let Some(failure) = report.first_failure() {
            return Err(Error::TNormAxiom(failure));
        }
        Ok(TNorm::Custom(CustomTNorm { name: name.into(), op }))
    }

    /// T(x, y), rejecting arguments outside `[0, 1]`.
    pub fn apply(&self, x: f64, y: f64) -> Result<f64> {
        check_unit(x, "x")?;
        check_unit(y, "y")?;
        Ok(self.eval(x, y))
    }

    #[inline]
    pub(crate) fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            TNorm::Minimum => x.min(y),
            TNorm::Product => x * y,
            TNorm::Custom(c) => (c.op)(x, y),
        }
    }

    /// The dual t-conorm `T*(x, y) = 1 − T(1 − x, 1 − y)`.
    pub fn dual(&self) -> TConorm {
        TConorm { norm: self.clone() }
    }

    /// Maximum of `T(a(θ), b(θ))` for `θ ∈ [0, 1]`, where `a` and `b` are
    /// linear from `a0` to `a1` and from `b0` to `b1`.
    #[inline]
    pub(crate) fn sup_on_segment(&self, a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
        let mut best = self.eval(a0, b0).max(self.eval(a1, b1));
        let da = a1 - a0;
        let db = b1 - b0;
        match self {
            TNorm::Minimum => {
                let d0 = a0 - b0;
                let d1 = a1 - b1;
                if d0 * d1 < 0.0 {
                    let theta = d0 / (d0 - d1);
                    let a = a0 + theta * da;
                    let b = b0 + theta * db;
                    best = best.max(a.min(b));
                }
            }
            TNorm::Product => {
                // (a0 + θ·da)(b0 + θ·db) is a concave parabola when da·db < 0.
                if da * db < 0.0 {
                    let theta = -(da * b0 + db * a0) / (2.0 * da * db);
                    if theta > 0.0 && theta < 1.0 {
                        best = best.max((a0 + theta * da) * (b0 + theta * db));
                    }
                }
            }
            TNorm::Custom(c) => {
                for i in 1..8 {
                    let theta = i as f64 / 8.0;
                    best = best.max((c.op)(a0 + theta * da, b0 + theta * db));
                }
            }
        }
        best.clamp(0.0, 1.0)
    }
}

/// A continuous t-conorm, always carried together with the t-norm it is dual to.
#[derive(Debug, Clone, PartialEq)]
pub struct TConorm {
    norm: TNorm,
}

impl TConorm {
    /// Parses `"max"` (dual of M) or `"probsum"` (dual of π). The t-norm ids
    /// `"M"` and `"pi"` are accepted as aliases.
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "max" | "M" => Ok(TNorm::Minimum.dual()),
            "probsum" | "pi" => Ok(TNorm::Product.dual()),
            other => Err(Error::Config(format!("unknown t-conorm id {other:?}"))),
        }
    }

    pub fn id(&self) -> String {
        match &self.norm {
            TNorm::Minimum => "max".into(),
            TNorm::Product => "probsum".into(),
            TNorm::Custom(c) => format!("{}*", c.name),
        }
    }

    pub fn apply(&self, x: f64, y: f64) -> Result<f64> {
        check_unit(x, "x")?;
        check_unit(y, "y")?;
        Ok(self.eval(x, y))
    }

    #[inline]
    pub(crate) fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.norm {
            TNorm::Minimum => x.max(y),
            TNorm::Product => x + y - x * y,
            TNorm::Custom(c) => 1.0 - (c.op)(1.0 - x, 1.0 - y),
        }
    }

    /// The t-norm this conorm is dual to.
    pub fn dual(&self) -> TNorm {
        self.norm.clone()
    }
}

/// Worst violation of each t-norm law on sampled arguments.
#[derive(Debug, Clone)]
pub struct TNormAxiomReport {
    pub commutativity: f64,
    pub associativity: f64,
    pub monotonicity: f64,
    pub identity: f64,
    pub range: f64,
    pub tolerance: f64,
}

impl TNormAxiomReport {
    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    fn first_failure(&self) -> Option<String> {
        [
            ("commutativity", self.commutativity),
            ("associativity", self.associativity),
            ("monotonicity", self.monotonicity),
            ("identity T(x,1)=x", self.identity),
            ("range [0,1]", self.range),
        ]
        .into_iter()
        .find(|&(_, v)| !(v <= self.tolerance))
        .map(|(law, v)| format!("{law} (worst violation {v:e})"))
    }
}

/// Samples `samples` triples (plus the corners of the unit square) and
/// measures how far `op` is from being a t-norm.
pub fn check_tnorm_axioms<R: Rng>(
    op: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
    samples: usize,
    rng: &mut R,
) -> TNormAxiomReport {
    let mut pts: Vec<f64> = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    pts.extend((0..samples.max(1)).map(|_| rng.gen::<f64>()));
    let mut r = TNormAxiomReport {
        commutativity: 0.0,
        associativity: 0.0,
        monotonicity: 0.0,
        identity: 0.0,
        range: 0.0,
        tolerance: 1e-12,
    };
    let n = pts.len();
    for i in 0..n {
        let x = pts[i];
        let y = pts[(i * 7 + 3) % n];
        let z = pts[(i * 13 + 5) % n];
        let xy = op(x, y);
        r.range = r
            .range
            .max((-xy).max(xy - 1.0))
            .max(if xy.is_nan() { f64::INFINITY } else { 0.0 });
        r.commutativity = r.commutativity.max((xy - op(y, x)).abs());
        r.associativity = r.associativity.max((op(xy, z) - op(x, op(y, z))).abs());
        let (lo, hi) = if x <= z { (x, z) } else { (z, x) };
        r.monotonicity = r.monotonicity.max(op(lo, y) - op(hi, y));
        r.identity = r.identity.max((op(x, 1.0) - x).abs());
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn apply_examples() {
        assert_eq!(TNorm::Minimum.apply(0.3, 0.7).unwrap(), 0.3);
        assert_eq!(TNorm::Product.apply(0.5, 0.5).unwrap(), 0.25);
        assert!(TNorm::Product.apply(1.2, 0.5).is_err());
        assert!(TNorm::Minimum.apply(0.5, -0.1).is_err());
    }

    #[test]
    fn identity_law_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: f64 = rng.gen();
            assert_eq!(TNorm::Minimum.apply(x, 1.0).unwrap(), x);
            assert_eq!(TNorm::Product.apply(x, 1.0).unwrap(), x);
            assert_eq!(TNorm::Minimum.dual().apply(x, 0.0).unwrap(), x);
            assert_eq!(TNorm::Product.dual().apply(x, 0.0).unwrap(), x);
        }
    }

    #[test]
    fn dual_examples() {
        assert_eq!(TNorm::Minimum.dual().apply(0.3, 0.7).unwrap(), 0.7);
        assert_eq!(TNorm::Product.dual().apply(0.5, 0.5).unwrap(), 0.75);
        assert_eq!(TNorm::Minimum.dual().id(), "max");
        assert_eq!(TConorm::from_id("probsum").unwrap().dual(), TNorm::Product);
    }

    #[test]
    fn dual_of_dual_is_identity_on_grid() {
        for t in [TNorm::Minimum, TNorm::Product] {
            let back = t.dual().dual();
            assert_eq!(back, t);
            let conorm = t.dual();
            for i in 0..=100 {
                for j in 0..=100 {
                    let (x, y) = (i as f64 / 100.0, j as f64 / 100.0);
                    assert_eq!(back.apply(x, y).unwrap(), t.apply(x, y).unwrap());
                    // formula route 1 − T*(1 − x, 1 − y), up to round-off
                    let via_formula = 1.0 - conorm.apply(1.0 - x, 1.0 - y).unwrap();
                    assert!((via_formula - t.apply(x, y).unwrap()).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn custom_tnorm_must_pass_sampler() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let luk = TNorm::custom("lukasiewicz", |x, y| (x + y - 1.0).max(0.0), 200, &mut rng);
        assert!(luk.is_ok());
        let mean = TNorm::custom("mean", |x, y| 0.5 * (x + y), 200, &mut rng);
        assert!(matches!(mean, Err(Error::TNormAxiom(_))));
    }

    #[test]
    fn segment_maximiser_matches_dense_scan() {
        let cases = [
            (0.0, 0.8, 0.9, 0.1),
            (0.2, 0.3, 0.7, 0.6),
            (0.1, 0.9, 0.9, 0.0),
            (0.5, 0.5, 0.5, 0.5),
        ];
        for t in [TNorm::Minimum, TNorm::Product] {
            for &(a0, a1, b0, b1) in &cases {
                let scan = (0..=100_000)
                    .map(|i| i as f64 / 100_000.0)
                    .map(|th| t.eval(a0 + th * (a1 - a0), b0 + th * (b1 - b0)))
                    .fold(0.0, f64::max);
                let got = t.sup_on_segment(a0, a1, b0, b1);
                // the scan resolution is 1e-5 and slopes are at most 1
                assert!(got >= scan - 1e-12 && got - scan < 2e-5, "{t:?} {got} vs {scan}");
            }
        }
    }
}
