//! `spherecode`: run decoding sweeps, learner experiments, bound tables and
//! net statistics from a JSON config or inline flags.
//!
//! Exit codes: 0 success, 2 config or validation error, 3 runtime error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spherecode_core::experiment::{self, BoundRecord, BoundsSpec, NetStatsSpec};
use spherecode_core::{Error, ExperimentKind, LearnerConfig, Report, SweepSpec};

#[derive(Parser)]
#[command(name = "spherecode", version, about = "Random spherical codebooks as Gaussian-mixture centers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo decoding error per (d, k, noise, decoder, codebook replicate).
    DecodeSweep(Common),
    /// Two-step center learner, one row per seed.
    Learn(Common),
    /// Closed-form bound table.
    Bounds(Common),
    /// Net sizes and covering fractions.
    NetStats(Common),
    /// Ensemble error pooled over codebook replicates.
    PhaseTransition(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON experiment config; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination (default: stdout, or `output` from the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Recompute a single row by its `row_id`.
    #[arg(long)]
    replay: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    beta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    sigma2: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Decoder specs as JSON objects separated by `;`, e.g.
    /// `{"kind":"nn"};{"kind":"mmse","tau1_factor":1.3}`.
    #[arg(long)]
    decoders: Option<String>,
    /// bounds: sample sizes.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    n: Option<Vec<f64>>,
    /// bounds: target losses; learn: target loss ε.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    eps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    delta: Option<Vec<f64>>,
    /// learn, net-stats: net resolution ε_I.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    eps_i: Option<Vec<f64>>,
    /// learn: Step-II budgets.
    #[arg(long, value_delimiter = ',')]
    n_bar: Option<Vec<usize>>,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::DecodeSweep(a) => (ExperimentKind::DecodeSweep, a),
        Command::Learn(a) => (ExperimentKind::Learn, a),
        Command::Bounds(a) => (ExperimentKind::Bounds, a),
        Command::NetStats(a) => (ExperimentKind::NetStats, a),
        Command::PhaseTransition(a) => (ExperimentKind::PhaseTransition, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn execute(kind: ExperimentKind, args: Common) -> Result<(), Failure> {
    let spec = build_spec(kind, &args)?;
    spec.validate()?;
    let report = experiment::with_workers(args.workers, || match args.replay {
        Some(row) => experiment::replay(&spec, row),
        None => experiment::run(&spec),
    })??;

    if let Report::Bounds(rows) = &report {
        print_bounds_table(rows);
    }
    let out = args.out.clone().or_else(|| spec.output.clone());
    match out {
        Some(path) => {
            report.write_csv(&spec, &path)?;
            eprintln!("wrote {} rows to {}", report.len(), path.display());
        }
        None if !matches!(report, Report::Bounds(_)) => {
            let text = report.to_csv(&spec)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Runtime(format!("writing stdout: {e}")))?;
        }
        None => {}
    }
    Ok(())
}

fn build_spec(kind: ExperimentKind, a: &Common) -> Result<SweepSpec, Failure> {
    let mut spec = match &a.config {
        Some(path) => {
            let spec = SweepSpec::from_path(path).map_err(|e| match e {
                // A config that cannot be read is a config error, not a runtime one.
                Error::Io { .. } => Failure::Validation(e.to_string()),
                e => e.into(),
            })?;
            if spec.experiment != kind {
                return Err(Failure::Validation(format!(
                    "config error in `experiment`: file describes `{}` but the subcommand is `{}`",
                    spec.experiment.name(),
                    kind.name()
                )));
            }
            spec
        }
        None => SweepSpec::new(kind),
    };
    if let Some(s) = a.seed {
        spec.master_seed = s;
    }
    if let Some(v) = &a.d {
        spec.d = v.clone();
    }
    if let Some(v) = &a.k {
        spec.k = v.clone();
    }
    if let Some(v) = &a.beta {
        spec.beta = v.clone();
        spec.sigma2.clear();
    }
    if let (Some(v), false) = (&a.sigma2, kind == ExperimentKind::Bounds) {
        spec.sigma2 = v.clone();
        spec.beta.clear();
    }
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if let Some(r) = a.replicates {
        spec.replicates = r;
    }
    if let Some(text) = &a.decoders {
        spec.decoders = text
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| serde_json_decoder(s.trim()))
            .collect::<Result<_, _>>()?;
    }
    if let Some(v) = &a.n_bar {
        spec.n_bar = v.clone();
    }
    match kind {
        ExperimentKind::Bounds => {
            if a.sigma2.is_some() || a.n.is_some() || a.eps.is_some() || a.delta.is_some() {
                let b = spec.bounds.get_or_insert_with(|| BoundsSpec {
                    sigma2: vec![],
                    n: vec![],
                    eps: vec![],
                    delta: vec![],
                    e_delta: None,
                    c0: 1.0,
                    curve_const: 1.0,
                });
                if let Some(v) = &a.sigma2 {
                    b.sigma2 = v.clone();
                }
                if let Some(v) = &a.n {
                    b.n = v.clone();
                }
                if let Some(v) = &a.eps {
                    b.eps = v.clone();
                }
                if let Some(v) = &a.delta {
                    b.delta = v.clone();
                }
            }
        }
        ExperimentKind::Learn => {
            let eps_i = a.eps_i.as_ref().and_then(|v| v.first().copied());
            let eps = a.eps.as_ref().and_then(|v| v.first().copied());
            match (&mut spec.learner, eps_i, eps) {
                (Some(l), _, _) => {
                    if let Some(e) = eps_i {
                        l.eps_i = e;
                    }
                    if let Some(e) = eps {
                        l.eps = e;
                    }
                }
                (None, Some(ei), Some(e)) => spec.learner = Some(LearnerConfig::new(ei, e)),
                (None, _, _) => {
                    return Err(Failure::Validation(
                        "config error in `learner`: missing (give a config or both --eps-i and --eps)".into(),
                    ))
                }
            }
        }
        ExperimentKind::NetStats => {
            if let Some(v) = &a.eps_i {
                let ns = spec.net_stats.get_or_insert_with(|| NetStatsSpec {
                    eps_i: vec![],
                    probes: 10_000,
                    net: Default::default(),
                });
                ns.eps_i = v.clone();
            }
        }
        _ => {}
    }
    Ok(spec)
}

fn serde_json_decoder(text: &str) -> Result<spherecode_core::DecoderSpec, Failure> {
    spherecode_core::DecoderSpec::from_json(text).map_err(Failure::from)
}

fn print_bounds_table(rows: &[BoundRecord]) {
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x}"));
    println!(
        "{:<28} {:>5} {:>6} {:>8} {:>10} {:>8} {:>8} {:>10} {:>22}  status",
        "quantity", "d", "k", "sigma2", "n", "eps", "delta", "e_delta", "value"
    );
    for r in rows {
        println!(
            "{:<28} {:>5} {:>6} {:>8} {:>10} {:>8} {:>8} {:>10} {:>22}  {}",
            r.quantity,
            r.d,
            r.k,
            cell(r.sigma2),
            cell(r.n),
            cell(r.eps),
            cell(r.delta),
            cell(r.e_delta),
            cell(r.value),
            r.status
        );
    }
    if let Some(r) = rows.first() {
        println!("# constants: c0={} curve_const={}", r.c0, r.curve_const);
    }
}
