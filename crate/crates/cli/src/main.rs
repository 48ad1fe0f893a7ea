use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrsel_cli::config::parse_assignment;
use qrsel_cli::{emit_report, run, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "qrsel", version, about = "QR-based feature selection")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Select features with one method and cross-validate the subset.
    Select {
        #[command(flatten)]
        common: Common,
        /// rrqr, nmfqr or qr-ga.
        #[arg(long)]
        method: Option<String>,
    },
    /// Cross-validate fixed features, or a method re-run inside each fold.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Option<String>,
        /// Comma-separated zero-based feature indices.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<usize>>,
    },
    /// RRQR selection and cross-validation over a grid of f.
    FSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f_min: Option<f64>,
        #[arg(long)]
        f_max: Option<f64>,
        #[arg(long)]
        f_step: Option<f64>,
    },
    /// Strong RRQR factorization summary.
    Factorize {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// CSV file, samples as rows unless --transpose.
    #[arg(long)]
    data: Option<String>,
    /// Label column name or zero-based index (default: last column).
    #[arg(long)]
    label_col: Option<String>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    f: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
    /// Flat TOML file of key = value settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// The file stores features as rows.
    #[arg(long)]
    transpose: bool,
    /// Any configuration key, e.g. --set nmf_alpha=0.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn overrides(common: &Common, extra: Vec<(&str, toml::Value)>) -> Result<toml::Table, CliError> {
    let mut t = toml::Table::new();
    for s in &common.set {
        let (k, v) = parse_assignment(s)?;
        t.insert(k, v);
    }
    let mut put = |k: &str, v: Option<toml::Value>| {
        if let Some(v) = v {
            t.insert(k.to_string(), v);
        }
    };
    put("data", common.data.clone().map(Into::into));
    put("label_col", common.label_col.clone().map(Into::into));
    put("top_k", common.top_k.map(|k| toml::Value::Integer(k as i64)));
    put("f", common.f.map(Into::into));
    put("seed", common.seed.map(|s| toml::Value::Integer(s as i64)));
    put("out", common.out.clone().map(Into::into));
    put("format", common.format.clone().map(Into::into));
    if common.transpose {
        put("transpose", Some(true.into()));
    }
    for (k, v) in extra {
        put(k, Some(v));
    }
    Ok(t)
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, common, extra): (Command, Common, Vec<(&str, toml::Value)>) = match cli.command {
        Sub::Select { common, method } => {
            (Command::Select, common, method.map(|m| ("method", m.into())).into_iter().collect())
        }
        Sub::Evaluate { common, method, features } => {
            let mut extra: Vec<(&str, toml::Value)> = Vec::new();
            if let Some(m) = method {
                extra.push(("method", m.into()));
            }
            if let Some(f) = features {
                let items = f.into_iter().map(|i| toml::Value::Integer(i as i64)).collect();
                extra.push(("features", toml::Value::Array(items)));
            }
            (Command::Evaluate, common, extra)
        }
        Sub::FSweep { common, f_min, f_max, f_step } => {
            let extra = [("f_min", f_min), ("f_max", f_max), ("f_step", f_step)]
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (k, toml::Value::Float(v))))
                .collect();
            (Command::FSweep, common, extra)
        }
        Sub::Factorize { common } => (Command::Factorize, common, Vec::new()),
    };
    let table = overrides(&common, extra)?;
    RunConfig::resolve(command, common.config.as_deref(), table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(cli).and_then(|cfg| {
        let report = run(cfg)?;
        let out = report.config.out.clone().map(PathBuf::from);
        emit_report(&report, out.as_deref(), report.config.format)
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
