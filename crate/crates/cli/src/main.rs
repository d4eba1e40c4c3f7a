//! `qproc`: run scenarios, simulate and reconstruct tomography records, and
//! check M-map sum rules.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 inconsistent data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qproc_core::io::entries_to_square;
use qproc_core::maps::{classify_positivity, PositivityClass, SuperOp};
use qproc_core::mmap::sum_rule_check;
use qproc_core::models::{heisenberg_unitary, standard_projective_preps, standard_stochastic_preps};
use qproc_core::tomo::{interpolation_residual, reconstruct_linear_map, simulate_process, simulate_process_with_shots};
use qproc_core::{
    run_scenario, BipartiteState, Error, PreparationMap, ScenarioResult, ToleranceConfig, TomographyRecord,
    TwoQubitParams, UnitaryOperator, CATALOG,
};

/// Interpolation residual above which a record is reported as inconsistent.
const MAX_INTERPOLATION_RESIDUAL: f64 = 1e-6;
const POSITIVITY_PROBES: usize = 256;

#[derive(Parser)]
#[command(name = "qproc", version, about = "Quantum process maps with initial system-environment correlations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a catalog scenario and emit its curves (CSV) or full result (JSON).
    Scenario {
        name: String,
        /// Parameter override, `key=value`; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Reconstruct the linear map of a tomography record and classify it.
    Reconstruct {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the linear and M-map sum rules of a twelve-projection record.
    Diagnose {
        #[arg(long)]
        record: PathBuf,
    },
    /// Simulate a tomography record from a unitary, an initial state and preparations.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ZeroProbability { .. }
            | Error::LinearDependence { .. }
            | Error::ProtocolDegenerate(_)
            | Error::Incompatible(_)
            | Error::OutsideSpan(_) => Failure::Data(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = apply_tolerance_override().and_then(|()| dispatch(cli.command)) {
        eprintln!("error: {}", f.message());
        return ExitCode::from(f.code());
    }
    ExitCode::SUCCESS
}

fn apply_tolerance_override() -> CliResult<()> {
    let Ok(raw) = std::env::var("QPROC_TOL") else {
        return Ok(());
    };
    match raw.trim().parse::<f64>() {
        Ok(base) if base.is_finite() && base > 0.0 => {
            qproc_core::tolerance::set_global(ToleranceConfig::from_base(base));
            Ok(())
        }
        _ => Err(Failure::Usage(format!("QPROC_TOL must be a positive number, got `{raw}`"))),
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Scenario { name, params, out, format } => cmd_scenario(&name, &params, out.as_deref(), format),
        Command::Reconstruct { record, out } => cmd_reconstruct(&record, out.as_deref()),
        Command::Diagnose { record } => cmd_diagnose(&record),
        Command::Simulate { config, out } => cmd_simulate(&config, out.as_deref()),
    }
}

fn parse_params(raw: &[String]) -> CliResult<BTreeMap<String, f64>> {
    raw.iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("parameter `{p}` is not of the form key=value")))?;
            let value = v
                .trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("parameter `{k}` has non-numeric value `{v}`")))?;
            Ok((k.trim().to_string(), value))
        })
        .collect()
}

fn cmd_scenario(name: &str, raw: &[String], out: Option<&Path>, format: Format) -> CliResult<()> {
    if !CATALOG.contains(&name) {
        return Err(Failure::Usage(format!(
            "unknown scenario `{name}`; available: {}",
            CATALOG.join(", ")
        )));
    }
    let result = run_scenario(name, &parse_params(raw)?)?;
    let text = match format {
        Format::Csv => scenario_csv(&result),
        Format::Json => to_json(&result)?,
    };
    emit(out, &text)
}

/// Header `two_omega_t,<columns>`, then one row per grid point with every
/// value at 12 significant digits.
fn scenario_csv(result: &ScenarioResult) -> String {
    let mut s = String::from("two_omega_t");
    for col in &result.columns {
        s.push(',');
        s.push_str(col);
    }
    s.push('\n');
    for point in &result.curves {
        let _ = write!(s, "{:.11e}", point.x);
        for v in &point.values {
            let _ = write!(s, ",{v:.11e}");
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct Reconstruction {
    map: SuperOp,
    positivity: PositivityClass,
    interpolation_residual: f64,
}

fn cmd_reconstruct(path: &Path, out: Option<&Path>) -> CliResult<()> {
    let record: TomographyRecord = read_json(path)?;
    let map = reconstruct_linear_map(&record)?;
    let residual = interpolation_residual(&map, &record)?;
    if residual > MAX_INTERPOLATION_RESIDUAL {
        return Err(Failure::Data(format!(
            "no linear map reproduces the record: interpolation residual {residual:e} exceeds {MAX_INTERPOLATION_RESIDUAL:e}"
        )));
    }
    let positivity = classify_positivity(&map, POSITIVITY_PROBES);
    let report = Reconstruction {
        map,
        positivity,
        interpolation_residual: residual,
    };
    emit(out, &to_json(&report)?)
}

fn cmd_diagnose(path: &Path) -> CliResult<()> {
    let record: TomographyRecord = read_json(path)?;
    let report = sum_rule_check(&record)?;
    let mut s = String::new();
    for (family, rules) in [("linear", &report.linear_rules), ("mmap", &report.mmap_rules)] {
        for rule in rules {
            let status = if rule.pass { "ok" } else { "violated" };
            let _ = writeln!(s, "{family:<6} {:<28} {:.3e} {status}", rule.name, rule.residual);
        }
    }
    for (j, dev) in report.probability_completeness.iter().enumerate() {
        let _ = writeln!(s, "prob   r({0},+) + r({0},-) = 1        {dev:.3e}", j + 1);
    }
    let _ = writeln!(s, "verdict: {:?}", report.verdict);
    print!("{s}");
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    #[serde(rename = "U")]
    u: UnitarySpec,
    #[serde(rename = "rhoSE")]
    rho_se: StateSpec,
    preps: PrepsSpec,
    #[serde(default)]
    shots: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum UnitarySpec {
    /// exp(−iωt Σ_j σ_j⊗σ_j); give either `omega_t` or `two_omega_t`.
    HeisenbergSwap {
        #[serde(default)]
        omega_t: Option<f64>,
        #[serde(default)]
        two_omega_t: Option<f64>,
    },
    Matrix { entries: Vec<[f64; 2]> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum StateSpec {
    /// The correlated two-qubit family with system polarization `a`.
    Family {
        #[serde(default)]
        a: [f64; 3],
        c23: f64,
    },
    TwoQubit(TwoQubitParams),
    Matrix {
        d_s: usize,
        d_e: usize,
        entries: Vec<[f64; 2]>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PrepsSpec {
    Named(NamedPreps),
    List(Vec<PreparationMap>),
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum NamedPreps {
    StandardStochastic,
    StandardProjective,
}

impl UnitarySpec {
    fn build(self) -> CliResult<UnitaryOperator> {
        match self {
            UnitarySpec::HeisenbergSwap { omega_t, two_omega_t } => match (omega_t, two_omega_t) {
                (Some(wt), None) => Ok(heisenberg_unitary(2.0 * wt)),
                (None, Some(x)) => Ok(heisenberg_unitary(x)),
                _ => Err(Failure::Usage(
                    "heisenberg_swap needs exactly one of `omega_t` or `two_omega_t`".into(),
                )),
            },
            UnitarySpec::Matrix { entries } => Ok(UnitaryOperator::new(entries_to_square(&entries)?)?),
        }
    }
}

impl StateSpec {
    fn build(self) -> CliResult<BipartiteState> {
        Ok(match self {
            StateSpec::Family { a, c23 } => BipartiteState::correlated_family(a, c23)?,
            StateSpec::TwoQubit(p) => BipartiteState::two_qubit(p)?,
            StateSpec::Matrix { d_s, d_e, entries } => BipartiteState::new(entries_to_square(&entries)?, d_s, d_e)?,
        })
    }
}

fn cmd_simulate(path: &Path, out: Option<&Path>) -> CliResult<()> {
    let config: SimulateConfig = read_json(path)?;
    let u = config.u.build()?;
    let rho = config.rho_se.build()?;
    let preps = match config.preps {
        PrepsSpec::Named(NamedPreps::StandardStochastic) => standard_stochastic_preps(),
        PrepsSpec::Named(NamedPreps::StandardProjective) => standard_projective_preps(),
        PrepsSpec::List(list) => list,
    };
    if let Some(bad) = preps.iter().find(|p| p.dim().is_some_and(|d| d != rho.d_s())) {
        return Err(Failure::Usage(format!(
            "preparation `{}` acts on dimension {}, the system has dimension {}",
            bad.label(),
            bad.dim().unwrap_or_default(),
            rho.d_s()
        )));
    }
    let record = match config.shots {
        Some(shots) => simulate_process_with_shots(&u, &rho, &preps, shots, config.seed.unwrap_or(0))?,
        None => simulate_process(&u, &rho, &preps)?,
    };
    emit(out, &to_json(&record)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Usage(format!("serialization failed: {e}")))
}

/// Write to `out` through a temporary file in the same directory and a
/// rename, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    let io_err = |e: std::io::Error| Failure::Usage(format!("cannot write output: {e}"));
    let Some(path) = out else {
        return std::io::stdout().write_all(text.as_bytes()).map_err(io_err);
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(text.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
