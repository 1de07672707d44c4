//! `kms-lcm`: configuration-driven reports on KMS states of right LCM
//! monoids with a scale.

mod config;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use lcm_kms::{Error, Monoid, Scale};
use serde_json::{json, Value};

use config::{Config, ConfigError};
use report::{or_skipped, SCHEMA};

#[derive(Parser)]
#[command(name = "kms-lcm", version, about = "KMS states of right LCM semigroup C*-algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structure checks, existence, ζ, uniqueness and boundary for every β.
    Analyze(Common),
    /// Existence certificate for the measure μ_{N,β}.
    Existence(Common),
    /// Partial sums of the partition function.
    Zeta(Common),
    /// State values φ(v_s v_t*) over β and traces.
    KmsEval {
        #[command(flatten)]
        common: Common,
        /// Overrides the configured pairs with a single pair.
        #[arg(requires = "t")]
        s: Option<String>,
        t: Option<String>,
    },
    /// Uniqueness verdicts from the extreme states φ′ ≤ φ″.
    Uniqueness(Common),
    /// Boundary-quotient residuals on foundation sets.
    Boundary(Common),
    /// Lists the built-in families with generator names and default weights.
    Families {
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated β values (`inf` allowed), replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Class cutoff (`p/q`, integer or `b^e`) for ζ and finite-type states.
    #[arg(long)]
    cutoff: Option<String>,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
    /// Seed for the sampled KMS-residual diagnostic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Config(String),
    Internal(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistency(_) | Error::NotAdmissible(_) => Failure::Internal(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

enum Format {
    Json,
    Csv,
}

struct Output {
    body: Value,
    /// Column order and rows for CSV output.
    table: Option<(&'static [&'static str], Vec<Value>)>,
}

fn load(common: &Common) -> Result<(Config, Option<PathBuf>), Failure> {
    let mut cfg = config::load(&common.config)?;
    if let Some(b) = &common.beta {
        cfg.betas = b.clone();
    }
    if let Some(c) = &common.cutoff {
        cfg.class_cutoff = config::parse_number(c).map_err(|m| Failure::Config(format!("--cutoff: {m}")))?;
    }
    let output = cfg.output.as_ref().map(|p| {
        let dir = common.config.parent().unwrap_or(Path::new("."));
        dir.join(p)
    });
    Ok((cfg, output))
}

fn header(command: &str, cfg: &Config) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("config".into(), report::config_echo(cfg));
    m
}

fn per_beta(
    cfg: &Config,
    f: impl Fn(&Config, f64) -> lcm_kms::Result<Value> + Sync,
) -> lcm_kms::Result<Vec<Value>> {
    cfg.betas.par_iter().map(|&b| f(cfg, b)).collect()
}

fn analyze(cfg: &Config, seed: u64) -> Result<Output, Failure> {
    let mut body = header("analyze", cfg);
    body.insert("structure".into(), report::structure(cfg)?);
    let betas = per_beta(cfg, |cfg, beta| {
        let existence = or_skipped(report::existence(cfg, beta))?;
        let exists = existence["passed"].as_bool() == Some(true);
        Ok(json!({
            "beta": report::beta_text(beta),
            "existence": existence,
            "zeta": or_skipped(report::zeta(cfg, beta))?,
            "uniqueness": or_skipped(report::uniqueness(cfg, beta, exists))?,
            "boundary": or_skipped(report::boundary(cfg, beta).map(Value::Array))?,
        }))
    })?;
    body.insert("betas".into(), Value::Array(betas));
    body.insert("kms_diagnostics".into(), or_skipped(report::kms_diagnostics(cfg, seed).map(Value::Array))?);
    Ok(Output { body: Value::Object(body), table: None })
}

fn tabular(command: &str, cfg: &Config, columns: &'static [&'static str], rows: Vec<Value>) -> Output {
    let mut body = header(command, cfg);
    body.insert("rows".into(), Value::Array(rows.clone()));
    Output {
        body: Value::Object(body),
        table: Some((columns, rows)),
    }
}

fn families() -> Output {
    let list = [
        Monoid::FreeMonoid { alphabet: 2 },
        Monoid::FreeAbelian { rank: 2 },
        Monoid::axb(),
        Monoid::C3,
        Monoid::Lamplighter,
    ];
    let mut rows = Vec::new();
    for m in list {
        let scale = Scale::standard(m.clone()).expect("built-in default scales are valid");
        for (name, w) in scale.weights() {
            rows.push(json!({
                "family": m.name(),
                "parameters": m,
                "generator": name,
                "default_weight": w.to_string(),
            }));
        }
    }
    let body = json!({ "schema": SCHEMA, "command": "families", "version": env!("CARGO_PKG_VERSION"), "rows": rows });
    Output {
        body,
        table: Some((&["family", "generator", "default_weight"], rows)),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn render(out: &Output, format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&out.body)
                .map_err(|e| Failure::Internal(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let (columns, rows) = out
                .table
                .as_ref()
                .ok_or_else(|| Failure::Config("this command has no tabular form; use --json".into()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Failure::Internal(e.to_string());
            w.write_record(*columns).map_err(io)?;
            for row in rows {
                w.write_record(columns.iter().map(|c| cell(&row[*c]))).map_err(io)?;
            }
            w.into_inner().map_err(|e| Failure::Internal(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Families { csv, .. } => {
            emit(&families(), if csv { Format::Csv } else { Format::Json }, None)
        }
        Command::KmsEval { common, s, t } => {
            let (mut cfg, path) = load(&common)?;
            if let (Some(s), Some(t)) = (s, t) {
                let m = cfg.scale.monoid();
                cfg.pairs = vec![(m.parse(&s)?, m.parse(&t)?)];
            }
            let rows = report::kms_eval(&cfg)?;
            let out = tabular("kms-eval", &cfg, report::KMS_COLUMNS, rows);
            emit(&out, format(&common), path.as_deref())
        }
        Command::Analyze(c) => run_common("analyze", &c),
        Command::Existence(c) => run_common("existence", &c),
        Command::Zeta(c) => run_common("zeta", &c),
        Command::Uniqueness(c) => run_common("uniqueness", &c),
        Command::Boundary(c) => run_common("boundary", &c),
    }
}

fn format(common: &Common) -> Format {
    if common.csv {
        Format::Csv
    } else {
        Format::Json
    }
}

fn run_common(name: &str, common: &Common) -> Result<(), Failure> {
    let (cfg, path) = load(common)?;
    let out = match name {
        "analyze" => analyze(&cfg, common.seed)?,
        "existence" => tabular(name, &cfg, report::EXISTENCE_COLUMNS, per_beta(&cfg, report::existence)?),
        "zeta" => tabular(name, &cfg, report::ZETA_COLUMNS, per_beta(&cfg, report::zeta)?),
        "uniqueness" => {
            let mut body = header(name, &cfg);
            let sections = per_beta(&cfg, |cfg, beta| {
                let exists = report::existence(cfg, beta)?["passed"].as_bool() == Some(true);
                report::uniqueness(cfg, beta, exists)
            })?;
            let rows = sections.iter().flat_map(report::uniqueness_rows).collect();
            body.insert("betas".into(), Value::Array(sections));
            Output {
                body: Value::Object(body),
                table: Some((report::UNIQUENESS_COLUMNS, rows)),
            }
        }
        "boundary" => {
            let mut rows = Vec::new();
            for &beta in &cfg.betas {
                rows.extend(report::boundary(&cfg, beta)?);
            }
            tabular(name, &cfg, report::BOUNDARY_COLUMNS, rows)
        }
        _ => unreachable!(),
    };
    emit(&out, format(common), path.as_deref())
}

fn emit(out: &Output, format: Format, path: Option<&Path>) -> Result<(), Failure> {
    let bytes = render(out, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure::Internal(e.to_string())),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
