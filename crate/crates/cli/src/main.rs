//! `pnkit`: audits, classification, convolution and probes for probabilistic
//! normed spaces described in JSON.
//!
//! Exit codes: 0 success, 1 analytic failure (a checked property does not
//! hold), 2 input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use pnkit::analysis::{self, NamedSequence, PointSet, ScalarSequence};
use pnkit::config::{self, OutputFormat, RunConfig};
use pnkit::demo::{self, DemoHooks};
use pnkit::phi::{self, PhiSpec, PhiTransform};
use pnkit::pnspace::{self, Carrier, PNSpace, Vector};
use pnkit::{DistributionFunction, ExtReal, TriangleFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "pnkit", version, about = "Probabilistic normed space toolkit")]
struct Cli {
    /// Space definition (JSON).
    #[arg(long, global = true)]
    space: Option<PathBuf>,
    /// Point set (JSON).
    #[arg(long, global = true)]
    set: Option<PathBuf>,
    /// Random sample size for audits.
    #[arg(long, global = true, default_value_t = 50)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Grid mesh; overrides PNSPACE_GRID.
    #[arg(long, global = true)]
    mesh: Option<f64>,
    /// Grid horizon; overrides PNSPACE_GRID.
    #[arg(long, global = true)]
    xmax: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Grid overrides, e.g. "mesh=0.03125,xmax=64".
    #[arg(long = "grid-env", env = "PNSPACE_GRID", hide = true)]
    grid_env: Option<String>,
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check N1–N4, the scaling identities and the characteristic condition.
    Audit,
    /// Probabilistic radius class of a set.
    Classify,
    /// Probabilistic radius of a set.
    Radius {
        /// Also write the radius as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Apply a triangle function to two distribution functions.
    Convolve {
        #[arg(long)]
        tau: String,
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quasi-inverse of a φ-transform.
    QuasiInverse {
        #[arg(long)]
        phi: PathBuf,
    },
    #[command(subcommand)]
    Probe(Probe),
    /// Reproduce both worked examples end to end.
    PaperDemo {
        #[arg(long, hide = true)]
        inject_wrong_radius: bool,
    },
}

#[derive(Subcommand, Debug)]
enum Probe {
    /// Look for sequences without a subsequence converging inside the set.
    Compact {
        /// JSON list of {"name", "terms"}.
        #[arg(long)]
        sequences: Option<PathBuf>,
        /// JSON list of candidate limits.
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Check α_n p_n → θ for scalar sequences tending to 0.
    TopoBounded {
        #[arg(long, default_value_t = 1000)]
        len: usize,
    },
    /// Least k with A ⊂ k·N_θ(1/n).
    Absorb {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1u64, 2, 5, 10, 100])]
        n: Vec<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        k_max: u64,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Analytic(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<pnkit::Error>() {
            Some(pnkit::Error::Classification(_)) | Some(pnkit::Error::TNormAxiom(_)) => {
                Failure::Analytic(format!("{e:#}"))
            }
            _ => Failure::Input(e),
        }
    }
}

impl From<pnkit::Error> for Failure {
    fn from(e: pnkit::Error) -> Self {
        Failure::from(anyhow::Error::new(e))
    }
}

struct Output {
    text: String,
    ok: bool,
    failure_note: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                if let Some(note) = out.failure_note {
                    eprintln!("pnkit: {note}");
                }
                ExitCode::from(1)
            }
        }
        Err(Failure::Analytic(msg)) => {
            eprintln!("pnkit: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("pnkit: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_space(cli: &Cli) -> anyhow::Result<PNSpace> {
    let path = cli.space.as_ref().ok_or_else(|| anyhow!("--space is required"))?;
    config::parse_space(&read(path)?).with_context(|| format!("invalid space file {}", path.display()))
}

fn load_set(cli: &Cli, space: &PNSpace) -> anyhow::Result<PointSet> {
    let path = cli.set.as_ref().ok_or_else(|| anyhow!("--set is required"))?;
    config::parse_set(&read(path)?, space).with_context(|| format!("invalid set file {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn json_only(rc: &RunConfig, cmd: &str) -> anyhow::Result<()> {
    if rc.format == OutputFormat::Csv {
        bail!("--format csv is only available for radius and convolve, not {cmd}");
    }
    Ok(())
}

fn ok(text: String) -> Result<Output, Failure> {
    Ok(Output {
        text,
        ok: true,
        failure_note: None,
    })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let format = match cli.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    let rc = RunConfig::resolve(
        cli.seed,
        cli.mesh,
        cli.xmax,
        cli.grid_env.as_deref(),
        format,
        cli.verbose,
    )
    .context("invalid grid settings")?;
    let mut rng = ChaCha8Rng::seed_from_u64(rc.seed);
    if rc.verbose {
        eprintln!("pnkit: seed {} grid {:?}", rc.seed, rc.grid);
    }
    match &cli.cmd {
        Cmd::Audit => {
            json_only(&rc, "audit")?;
            let space = load_space(cli)?;
            audit(&space, cli.samples, &rc, &mut rng)
        }
        Cmd::Classify => {
            json_only(&rc, "classify")?;
            let space = load_space(cli)?;
            let set = load_set(cli, &space)?;
            let r = analysis::radius_report(&space, &set, &rc.grid)?;
            let w = analysis::d_bounded_witness(&space, &set, &rc.grid, &mut rng)?;
            ok(json(&ClassifyOutput {
                set: r.set,
                class: r.class,
                d_bounded: r.d_bounded,
                x0: r.x0,
                left_limit: r.left_limit,
                exactness: r.exactness,
                diagnostics: r.diagnostics,
                witness_verified: w.verified,
                members_checked: w.members_checked,
                lower_bounding_tests: w.lower_bounding_tests,
                seed: rc.seed,
                grid: rc.grid,
            })?)
        }
        Cmd::Radius { csv } => {
            let space = load_space(cli)?;
            let set = load_set(cli, &space)?;
            let r = analysis::radius_report(&space, &set, &rc.grid)?;
            if let Some(path) = csv {
                fs::write(path, r.radius.to_csv(&rc.grid)?)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            match rc.format {
                OutputFormat::Csv => ok(r.radius.to_csv(&rc.grid)?),
                OutputFormat::Json => ok(json(&r)?),
            }
        }
        Cmd::Convolve { tau, lhs, rhs, out } => {
            let tau = TriangleFunction::from_id(tau)?;
            let f: DistributionFunction =
                serde_json::from_str(&read(lhs)?).with_context(|| format!("invalid distribution {}", lhs.display()))?;
            let g: DistributionFunction =
                serde_json::from_str(&read(rhs)?).with_context(|| format!("invalid distribution {}", rhs.display()))?;
            let h = tau.apply(&f, &g, &rc.grid);
            if let Some(path) = out {
                fs::write(path, json(&h)?).with_context(|| format!("cannot write {}", path.display()))?;
            }
            match rc.format {
                OutputFormat::Csv => ok(h.to_csv(&rc.grid)?),
                OutputFormat::Json => ok(json(&h)?),
            }
        }
        Cmd::QuasiInverse { phi } => {
            json_only(&rc, "quasi-inverse")?;
            let spec: PhiSpec =
                serde_json::from_str(&read(phi)?).with_context(|| format!("invalid phi file {}", phi.display()))?;
            let t = PhiTransform::from_spec(&spec)?;
            let check = phi::check_quasi_inverse_inequalities(&t, cli.samples.max(1) * 20, &mut rng);
            let passed = check.passed;
            let text = json(&QuasiInverseOutput {
                phi_knots: t.phi.knots().to_vec(),
                tail: t.phi.tail(),
                phi_hat_knots: t.phi_hat.knots().to_vec(),
                phi_hat_tail: t.phi_hat.tail(),
                bijective: t.bijective,
                m_b: t.m_b_bound(),
                inequalities: check,
            })?;
            Ok(Output {
                text,
                ok: passed,
                failure_note: (!passed).then(|| "quasi-inverse inequalities violated".into()),
            })
        }
        Cmd::Probe(p) => {
            json_only(&rc, "probe")?;
            let space = load_space(cli)?;
            let set = load_set(cli, &space)?;
            probe(p, &space, &set, &rc, &mut rng)
        }
        Cmd::PaperDemo { inject_wrong_radius } => {
            json_only(&rc, "paper-demo")?;
            let hooks = DemoHooks {
                wrong_radius: *inject_wrong_radius,
            };
            let report = demo::run_demo(rc.seed, &rc.grid, hooks)?;
            let failed: Vec<String> = report.failed().iter().map(|c| c.id.clone()).collect();
            Ok(Output {
                text: json(&report)?,
                ok: report.all_passed,
                failure_note: (!failed.is_empty()).then(|| format!("failed claim(s): {}", failed.join(", "))),
            })
        }
    }
}

#[derive(Serialize)]
struct ClassifyOutput {
    set: String,
    class: analysis::BoundednessClass,
    d_bounded: bool,
    x0: Option<f64>,
    left_limit: f64,
    exactness: analysis::Exactness,
    diagnostics: Vec<String>,
    witness_verified: bool,
    members_checked: usize,
    lower_bounding_tests: Vec<String>,
    seed: u64,
    grid: pnkit::GridSpec,
}

#[derive(Serialize)]
struct QuasiInverseOutput {
    phi_knots: Vec<(f64, f64)>,
    tail: pnkit::Tail,
    phi_hat_knots: Vec<(f64, f64)>,
    phi_hat_tail: pnkit::Tail,
    bijective: bool,
    m_b: Option<ExtReal>,
    inequalities: phi::QuasiInverseReport,
}

#[derive(Serialize)]
struct AuditOutput {
    space: String,
    seed: u64,
    samples: usize,
    axioms: pnspace::AxiomReport,
    serstnev: pnspace::IdentityReport,
    phi_serstnev: Option<pnspace::IdentityReport>,
    characteristic: bool,
    characteristic_witness: Option<(Vector, f64)>,
    all_pass: bool,
}

fn random_point(space: &PNSpace, rng: &mut ChaCha8Rng) -> Vector {
    let coords: Vec<f64> = (0..space.dim)
        .map(|_| match space.carrier {
            Carrier::Rationals => rng.gen_range(-10_000i64..=10_000) as f64 / 1000.0,
            Carrier::Reals => rng.gen_range(-10.0..=10.0),
        })
        .collect();
    let v = Vector::new(coords).expect("finite coordinates");
    match space.carrier {
        Carrier::Rationals => v.with_rational(true),
        Carrier::Reals => v,
    }
}

fn audit(space: &PNSpace, samples: usize, rc: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Output, Failure> {
    if samples == 0 {
        return Err(Failure::Input(anyhow!("--samples must be positive")));
    }
    let mut points = vec![Vector::zero(space.dim)];
    points.extend((0..samples).map(|_| random_point(space, rng)));
    let scalars = pnspace::default_scalars(4, rng);
    let mut lambdas = vec![-2.0, -0.5, 0.25, 3.0];
    lambdas.extend((0..4).map(|_| rng.gen_range(0.05..8.0)));
    let axioms = pnspace::check_axioms(space, &points, &scalars, &rc.grid)?;
    let serstnev = pnspace::check_serstnev(space, &points, &lambdas, &rc.grid)?;
    let phi_serstnev = match space.phi {
        Some(_) => Some(pnspace::check_phi_serstnev(space, &points, &lambdas, &rc.grid)?),
        None => None,
    };
    let ch = pnspace::is_characteristic(space, &points, rc.grid.tol_eq)?;
    let all_pass = axioms.all_pass() && phi_serstnev.as_ref().is_none_or(|r| r.passed);
    let failed: Vec<String> = axioms
        .checks
        .iter()
        .filter(|c| !c.status.is_pass())
        .map(|c| c.axiom.clone())
        .chain(phi_serstnev.iter().filter(|r| !r.passed).map(|r| r.identity.clone()))
        .collect();
    let text = json(&AuditOutput {
        space: space.describe(),
        seed: rc.seed,
        samples,
        axioms,
        serstnev,
        phi_serstnev,
        characteristic: ch.characteristic,
        characteristic_witness: ch.witness,
        all_pass,
    })?;
    Ok(Output {
        text,
        ok: all_pass,
        failure_note: (!all_pass).then(|| format!("failed: {}", failed.join(", "))),
    })
}

fn probe(p: &Probe, space: &PNSpace, set: &PointSet, rc: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Output, Failure> {
    match p {
        Probe::Compact { sequences, candidates } => {
            let (default_seqs, default_cands) = analysis::default_compactness_inputs(set, rng);
            let seqs: Vec<NamedSequence> = match sequences {
                Some(path) => serde_json::from_str(&read(path)?)
                    .with_context(|| format!("invalid sequences {}", path.display()))?,
                None => default_seqs,
            };
            let cands: Vec<Vector> = match candidates {
                Some(path) => serde_json::from_str(&read(path)?)
                    .with_context(|| format!("invalid candidates {}", path.display()))?,
                None => default_cands,
            };
            let r = analysis::d_compactness_probe(space, set, &seqs, &cands, &analysis::COMPACTNESS_LAMBDAS, &rc.grid)?;
            ok(json(&r)?)
        }
        Probe::TopoBounded { len } => {
            let seqs = analysis::default_point_sequences(set, *len, rng);
            let r = analysis::topological_boundedness_probe(
                space,
                &ScalarSequence::defaults(),
                &seqs,
                &pnspace::DEFAULT_LAMBDAS,
                *len,
            )?;
            ok(json(&r)?)
        }
        Probe::Absorb { n, k_max } => {
            let r = analysis::absorption_check(space, set, n, *k_max)?;
            ok(json(&r)?)
        }
    }
}
