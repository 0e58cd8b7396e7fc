//! JSON input formats and run settings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::PointSet;
use crate::distfn::GridSpec;
use crate::error::{Error, Result};
use crate::phi::{PhiSpec, PhiTransform};
use crate::pnspace::{Carrier, NormFamily, PNSpace};
use crate::triangle::TriangleFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// `{"dim", "norm": {"id", "params"}, "tau", "tau_star", "phi"?, "carrier"?}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    pub norm: NormSpec,
    #[serde(default = "default_tau")]
    pub tau: String,
    #[serde(default = "default_tau_star")]
    pub tau_star: String,
    #[serde(default)]
    pub phi: Option<PhiSpec>,
    #[serde(default)]
    pub carrier: Option<Carrier>,
}

fn default_tau() -> String {
    "tauT:pi".into()
}

fn default_tau_star() -> String {
    "tauM".into()
}

impl SpaceSpec {
    pub fn build(&self) -> Result<PNSpace> {
        let p = &self.norm.params;
        let norm = match self.norm.id.as_str() {
            "ex22" => {
                let a = *p
                    .get("a")
                    .ok_or_else(|| Error::Config("norm ex22 needs params.a".into()))?;
                NormFamily::Ex22 { a }
            }
            "ex25" => NormFamily::Ex25,
            "simple" => NormFamily::Simple,
            other => return Err(Error::Config(format!("unknown norm id {other:?}"))),
        };
        if let Some(extra) = p.keys().find(|k| !(self.norm.id == "ex22" && k.as_str() == "a")) {
            return Err(Error::Config(format!("unexpected norm parameter {extra:?}")));
        }
        let tau = TriangleFunction::from_id(&self.tau)?;
        let tau_star = TriangleFunction::from_id(&self.tau_star)?;
        let mut space = PNSpace::new(self.dim, norm, tau, tau_star)?;
        if let Some(phi) = &self.phi {
            space = space.with_phi(PhiTransform::from_spec(phi)?);
        }
        if let Some(c) = self.carrier {
            space = space.with_carrier(c);
        }
        Ok(space)
    }
}

pub fn parse_space(json: &str) -> Result<PNSpace> {
    let spec: SpaceSpec = serde_json::from_str(json)?;
    spec.build()
}

pub fn parse_set(json: &str, space: &PNSpace) -> Result<PointSet> {
    let set: PointSet = serde_json::from_str(json)?;
    set.validate(space)?;
    Ok(set)
}

/// Applies `key=value` overrides (`mesh`, `xmax`, `tol`) separated by commas
/// or whitespace, the format of the `PNSPACE_GRID` variable.
pub fn apply_grid_overrides(grid: &GridSpec, text: &str) -> Result<GridSpec> {
    let mut g = *grid;
    for item in text.split([',', ' ', ';']).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {item:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("not a number: {v:?}")))?;
        match k.trim() {
            "mesh" => g.mesh = v,
            "xmax" | "x_max" => g.x_max = v,
            "tol" | "tol_eq" => g.tol_eq = v,
            other => return Err(Error::Config(format!("unknown grid key {other:?}"))),
        }
    }
    g.validate()?;
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridSpec,
    pub format: OutputFormat,
    pub verbose: bool,
}

impl RunConfig {
    /// Resolves the grid with precedence flag > `env` > default.
    pub fn resolve(
        seed: u64,
        mesh: Option<f64>,
        x_max: Option<f64>,
        env: Option<&str>,
        format: OutputFormat,
        verbose: bool,
    ) -> Result<Self> {
        let mut grid = GridSpec::default();
        if let Some(text) = env {
            grid = apply_grid_overrides(&grid, text)?;
        }
        if let Some(m) = mesh {
            grid.mesh = m;
        }
        if let Some(x) = x_max {
            grid.x_max = x;
        }
        grid.validate()?;
        Ok(RunConfig {
            seed,
            grid,
            format,
            verbose,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{ParametricSet, PointSet};

    #[test]
    fn builds_builtin_spaces() {
        let s =
            parse_space(r#"{"dim":1,"norm":{"id":"ex25"},"tau":"tauT:pi","tau_star":"tauM","carrier":"Q"}"#).unwrap();
        assert_eq!(s.carrier, Carrier::Rationals);
        let s = parse_space(r#"{"dim":1,"norm":{"id":"ex22","params":{"a":0.5}}}"#).unwrap();
        assert!(matches!(s.norm, NormFamily::Ex22 { a } if a == 0.5));
        let s = parse_space(
            r#"{"dim":2,"norm":{"id":"simple"},"tau":"tauM","tau_star":"tauM","phi":{"phi_knots":[[0,0]],"tail":{"slope":1}}}"#,
        )
        .unwrap();
        assert!(s.phi.unwrap().bijective);
    }

    #[test]
    fn rejects_bad_spaces() {
        let e = parse_space(r#"{"dim":1,"norm":{"id":"ex22","params":{"a":1.5}}}"#).unwrap_err();
        assert!(e.to_string().contains("a ∈ (0,1) violated"), "{e}");
        assert!(parse_space(r#"{"dim":1,"norm":{"id":"ex22"}}"#).is_err());
        assert!(parse_space(r#"{"dim":1,"norm":{"id":"nope"}}"#).is_err());
        assert!(parse_space(r#"{"dim":0,"norm":{"id":"ex25"}}"#).is_err());
        assert!(parse_space(r#"{"dim":1,"norm":{"id":"ex25"},"tau":"tauX"}"#).is_err());
        assert!(parse_space(r#"{"dim":1,"norm":{"id":"ex25"},"colour":"red"}"#).is_err());
        assert!(parse_space("{not json").is_err());
    }

    #[test]
    fn sets() {
        let space = PNSpace::ex25();
        let a = parse_set(r#"{"kind":"parametric","family":"harmonic"}"#, &space).unwrap();
        assert_eq!(a, PointSet::Parametric(ParametricSet::Harmonic));
        assert!(parse_set(r#"{"kind":"explicit","points":[[1,2]]}"#, &space).is_err());
        assert!(parse_set(r#"{"kind":"explicit","points":[]}"#, &space).is_err());
    }

    #[test]
    fn grid_precedence() {
        let c = RunConfig::resolve(7, None, None, None, OutputFormat::Json, false).unwrap();
        assert_eq!(c.grid, GridSpec::default());
        let c = RunConfig::resolve(7, None, None, Some("mesh=0.03125,xmax=64"), OutputFormat::Json, false).unwrap();
        assert_eq!((c.grid.mesh, c.grid.x_max), (0.03125, 64.0));
        let c = RunConfig::resolve(
            7,
            Some(0.125),
            None,
            Some("mesh=0.03125,xmax=64"),
            OutputFormat::Json,
            false,
        )
        .unwrap();
        assert_eq!((c.grid.mesh, c.grid.x_max), (0.125, 64.0));
        assert!(RunConfig::resolve(7, None, None, Some("mesh"), OutputFormat::Json, false).is_err());
        assert!(RunConfig::resolve(7, Some(-1.0), None, None, OutputFormat::Json, false).is_err());
    }
}
