//! Typed experiment configuration and the run pipeline: fixture lookup,
//! reference computation, ledger/summary/trace CSV emission, and per-radius
//! SVG charts.

use crate::config::{parse_config, ConfigError, ConfigValue};
use crate::svg;
use eblab_core::fixtures::{fixture, Fixture};
use eblab_core::numkit::Vector;
use eblab_core::reglab::{
    check_equivalences, write_ledger_csv, write_summary_csv, RegularityReport, SamplePlan,
    Stratification, Verdict, CLAIM_IDS,
};
use eblab_core::solvers::{prox_gradient_solve, write_trace_csv, SolveTrace};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] eblab_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub x0: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            x0: None,
            step: None,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

/// One experiment, fully determined by a config file (plus CLI overrides for
/// the seed and output directory).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub fixture: String,
    pub step: Option<f64>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub radii: Vec<f64>,
    pub per_radius: usize,
    pub stratification: Stratification,
    pub solver: SolverConfig,
    /// Per-claim toggles; absent claims default to enabled.
    pub claims: BTreeMap<String, bool>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            fixture: String::new(),
            step: None,
            seed: 42,
            out_dir: None,
            radii: vec![0.1, 0.05, 0.01],
            per_radius: 600,
            stratification: Stratification {
                on_manifold: 0.4,
                off_manifold: 0.4,
                mixed: 0.2,
            },
            solver: SolverConfig::default(),
            claims: BTreeMap::new(),
        }
    }
}

fn expect_num(key: &str, v: &ConfigValue) -> Result<f64, ConfigError> {
    match v {
        ConfigValue::Num(n) => Ok(*n),
        other => Err(ConfigError::key(
            key,
            format!("expected a number, found {}", other.type_name()),
        )),
    }
}

fn expect_count(key: &str, v: &ConfigValue) -> Result<u64, ConfigError> {
    let n = expect_num(key, v)?;
    if n < 0.0 || n.fract() != 0.0 || n > u64::MAX as f64 {
        return Err(ConfigError::key(key, "expected a nonnegative integer"));
    }
    Ok(n as u64)
}

fn expect_str(key: &str, v: &ConfigValue) -> Result<String, ConfigError> {
    match v {
        ConfigValue::Str(s) => Ok(s.clone()),
        other => Err(ConfigError::key(
            key,
            format!("expected a string, found {}", other.type_name()),
        )),
    }
}

fn expect_num_array(key: &str, v: &ConfigValue) -> Result<Vec<f64>, ConfigError> {
    match v {
        ConfigValue::Array(items) => items
            .iter()
            .map(|item| expect_num(key, item))
            .collect::<Result<Vec<_>, _>>(),
        other => Err(ConfigError::key(
            key,
            format!("expected an array of numbers, found {}", other.type_name()),
        )),
    }
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        Self::from_values(&parse_config(text)?)
    }

    pub fn from_values(map: &BTreeMap<String, ConfigValue>) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut have_fixture = false;
        for (key, value) in map {
            match key.as_str() {
                "fixture" => {
                    cfg.fixture = expect_str(key, value)?;
                    have_fixture = true;
                }
                "step" => cfg.step = Some(expect_num(key, value)?),
                "seed" => cfg.seed = expect_count(key, value)?,
                "out_dir" => cfg.out_dir = Some(PathBuf::from(expect_str(key, value)?)),
                "radii" => cfg.radii = expect_num_array(key, value)?,
                "per_radius" => cfg.per_radius = expect_count(key, value)? as usize,
                "stratification" => {
                    let t = match value {
                        ConfigValue::Table(t) => t,
                        other => {
                            return Err(ConfigError::key(
                                key,
                                format!("expected a table, found {}", other.type_name()),
                            ))
                        }
                    };
                    for (k, v) in t {
                        match k.as_str() {
                            "on" => cfg.stratification.on_manifold = expect_num(k, v)?,
                            "off" => cfg.stratification.off_manifold = expect_num(k, v)?,
                            "mixed" => cfg.stratification.mixed = expect_num(k, v)?,
                            other => {
                                return Err(ConfigError::key(
                                    other,
                                    "unknown stratification field (expected on/off/mixed)",
                                ))
                            }
                        }
                    }
                }
                "solver" => {
                    let t = match value {
                        ConfigValue::Table(t) => t,
                        other => {
                            return Err(ConfigError::key(
                                key,
                                format!("expected a table, found {}", other.type_name()),
                            ))
                        }
                    };
                    for (k, v) in t {
                        match k.as_str() {
                            "x0" => cfg.solver.x0 = Some(expect_num_array(k, v)?),
                            "step" => cfg.solver.step = Some(expect_num(k, v)?),
                            "tol" => cfg.solver.tol = expect_num(k, v)?,
                            "max_iter" => cfg.solver.max_iter = expect_count(k, v)? as usize,
                            other => {
                                return Err(ConfigError::key(
                                    other,
                                    "unknown solver field (expected x0/step/tol/max_iter)",
                                ))
                            }
                        }
                    }
                }
                "claims" => {
                    let t = match value {
                        ConfigValue::Table(t) => t,
                        other => {
                            return Err(ConfigError::key(
                                key,
                                format!("expected a table, found {}", other.type_name()),
                            ))
                        }
                    };
                    for (k, v) in t {
                        if !CLAIM_IDS.contains(&k.as_str()) {
                            return Err(ConfigError::key(k, "unknown claim id"));
                        }
                        match v {
                            ConfigValue::Bool(b) => {
                                cfg.claims.insert(k.clone(), *b);
                            }
                            other => {
                                return Err(ConfigError::key(
                                    k,
                                    format!("expected a boolean, found {}", other.type_name()),
                                ))
                            }
                        }
                    }
                }
                other => return Err(ConfigError::key(other, "unknown key")),
            }
        }
        if !have_fixture {
            return Err(ConfigError::key(
                "fixture",
                "missing (a fixture name is required)",
            ));
        }
        Ok(cfg)
    }
}

pub struct RunOutcome {
    pub report: RegularityReport,
    pub trace: Option<SolveTrace>,
    pub out_dir: PathBuf,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn failed(&self) -> bool {
        self.report.any_failed()
    }
}

fn resolve_fixture(cfg: &ExperimentConfig) -> Result<Fixture, CliError> {
    fixture(&cfg.fixture).ok_or_else(|| CliError::UnknownFixture(cfg.fixture.clone()))
}

fn build_plan(
    cfg: &ExperimentConfig,
    fx: &Fixture,
    center: Vector,
) -> Result<SamplePlan, CliError> {
    for &r in &cfg.radii {
        if r > fx.chart_radius {
            return Err(ConfigError::key(
                "radii",
                format!(
                    "radius {r} exceeds the chart radius {} of fixture {}",
                    fx.chart_radius, fx.name
                ),
            )
            .into());
        }
    }
    let plan = SamplePlan {
        center,
        radii: cfg.radii.clone(),
        per_radius_count: cfg.per_radius,
        seed: cfg.seed,
        stratification: cfg.stratification,
    };
    plan.validate()?;
    Ok(plan)
}

fn solver_trace(
    cfg: &ExperimentConfig,
    fx: &Fixture,
    warnings: &mut Vec<String>,
) -> Result<Option<SolveTrace>, CliError> {
    if matches!(
        fx.problem.nonsmooth(),
        eblab_core::problems::NonsmoothPart::Max { .. }
    ) {
        return Ok(None);
    }
    let x0 = match &cfg.solver.x0 {
        Some(v) => Vector::try_new(v.clone())?,
        None => fx.start_point.clone(),
    };
    let t = cfg.solver.step.or(cfg.step).unwrap_or(fx.default_step);
    if t > 1.0 / fx.problem.lipschitz() {
        warnings.push(format!(
            "solver step {t} exceeds 1/L = {}; descent is not guaranteed",
            1.0 / fx.problem.lipschitz()
        ));
    }
    let trace = prox_gradient_solve(&fx.problem, &x0, t, cfg.solver.tol, cfg.solver.max_iter)?;
    Ok(Some(trace))
}

/// Run the full experiment and write every artifact into the output
/// directory: ledger.csv, summary.csv, trace.csv, and eta/delta/mu SVG charts.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<RunOutcome, CliError> {
    let mut cfg = cfg.clone();
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let fx = resolve_fixture(&cfg)?;
    let reference = fx.reference_minimizer()?;
    let plan = build_plan(&cfg, &fx, reference)?;
    let t = cfg.step.unwrap_or(fx.default_step);

    let mut warnings = Vec::new();
    let mut report = check_equivalences(&fx, t, &plan)?;
    for verdict in report.verdicts.iter_mut() {
        if cfg.claims.get(verdict.claim) == Some(&false) {
            verdict.verdict = Verdict::Skipped;
            verdict.value = "disabled by config".to_string();
        }
    }
    let trace = solver_trace(&cfg, &fx, &mut warnings)?;

    let out_dir = out_override
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.fixture));
    write_artifacts(&fx, &report, trace.as_ref(), &out_dir)?;

    Ok(RunOutcome {
        report,
        trace,
        out_dir,
        warnings,
    })
}

/// Run only the solver and write trace.csv.
pub fn run_trace(
    cfg: &ExperimentConfig,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<(PathBuf, SolveTrace), CliError> {
    let mut cfg = cfg.clone();
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let fx = resolve_fixture(&cfg)?;
    let mut warnings = Vec::new();
    let trace = solver_trace(&cfg, &fx, &mut warnings)?
        .ok_or(CliError::Core(eblab_core::Error::ProxUnavailable))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let out_dir = out_override
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.fixture));
    std::fs::create_dir_all(&out_dir)?;
    let mut buf = Vec::new();
    write_trace_csv(&fx.problem, &trace, &mut buf)?;
    std::fs::write(out_dir.join("trace.csv"), buf)?;
    Ok((out_dir, trace))
}

fn write_artifacts(
    fx: &Fixture,
    report: &RegularityReport,
    trace: Option<&SolveTrace>,
    out_dir: &Path,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;

    let mut ledger = Vec::new();
    write_ledger_csv(fx.problem.dimension(), &report.ledger, &mut ledger)?;
    std::fs::write(out_dir.join("ledger.csv"), ledger)?;

    let mut summary = Vec::new();
    write_summary_csv(report, &mut summary)?;
    std::fs::write(out_dir.join("summary.csv"), summary)?;

    let mut trace_csv = Vec::new();
    match trace {
        Some(t) => write_trace_csv(&fx.problem, t, &mut trace_csv)?,
        None => {
            // no prox for this family: header-only trace
            let n = fx.problem.dimension();
            let mut header = String::from("k");
            for i in 1..=n {
                header.push_str(&format!(",x_{i}"));
            }
            header.push_str(",f,residual,support\n");
            trace_csv = header.into_bytes();
        }
    }
    std::fs::write(out_dir.join("trace.csv"), trace_csv)?;

    std::fs::write(
        out_dir.join("eta.svg"),
        svg::estimate_chart(
            "sharpness margin vs radius",
            "eta(r)",
            &[("eta", &report.eta_per_radius)],
        ),
    )?;
    std::fs::write(
        out_dir.join("delta.svg"),
        svg::estimate_chart(
            "linear growth vs radius",
            "delta(r)",
            &[("delta", &report.delta_per_radius)],
        ),
    )?;
    std::fs::write(
        out_dir.join("mu.svg"),
        svg::estimate_chart(
            "error-bound moduli vs radius",
            "mu(r)",
            &[
                ("mu_ambient", &report.mu_ambient_per_radius),
                ("mu_manifold", &report.mu_manifold_per_radius),
                ("mu_proximal", &report.mu_proximal_per_radius),
            ],
        ),
    )?;
    Ok(())
}

/// Text listing of the fixture registry.
pub fn list_fixtures() -> String {
    let mut out = String::new();
    out.push_str("name                 family  convex  strict-complementarity\n");
    for fx in eblab_core::fixtures::all_fixtures() {
        out.push_str(&format!(
            "{:<20} {:<7} {:<7} {}\n",
            fx.name,
            fx.family.tag(),
            fx.convex,
            fx.strict_complementarity
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let cfg = ExperimentConfig::from_text("fixture = \"lasso2d\"\n").unwrap();
        assert_eq!(cfg.fixture, "lasso2d");
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.radii, vec![0.1, 0.05, 0.01]);

        let cfg = ExperimentConfig::from_text(
            "fixture = \"noncvx2d\"\nseed = 7\nper_radius = 50\nradii = [0.2]\nstep = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.per_radius, 50);
        assert_eq!(cfg.step, Some(0.5));
    }

    #[test]
    fn config_rejects_unknown_keys_and_claims() {
        assert!(ExperimentConfig::from_text("fixture = \"x\"\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_text(
            "fixture = \"x\"\nclaims = { no-such-claim = true }\n"
        )
        .is_err());
        assert!(
            ExperimentConfig::from_text("step = 1\n").is_err(),
            "missing fixture"
        );
        assert!(ExperimentConfig::from_text("fixture = \"x\"\nseed = 1.5\n").is_err());
    }

    #[test]
    fn unknown_fixture_errors() {
        let cfg = ExperimentConfig::from_text("fixture = \"missing\"\n").unwrap();
        match run_experiment(&cfg, None, Some(std::env::temp_dir().join("eblab-nope"))) {
            Err(CliError::UnknownFixture(name)) => assert_eq!(name, "missing"),
            Err(other) => panic!("expected unknown fixture, got {other}"),
            Ok(_) => panic!("expected unknown fixture, got a successful run"),
        }
    }

    #[test]
    fn radius_beyond_chart_rejected() {
        let cfg = ExperimentConfig::from_text("fixture = \"lasso2d\"\nradii = [0.9]\n").unwrap();
        assert!(matches!(
            run_experiment(&cfg, None, Some(std::env::temp_dir().join("eblab-nope2"))),
            Err(CliError::Config(_))
        ));
    }
}
