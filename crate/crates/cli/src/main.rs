//! `nonlocality` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 failed invariant check.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nonlocality::chsh::{canonical_settings, violation_sweep_capped, CLASSICAL_BOUND};
use nonlocality::lhv::{
    enumerate_deterministic, loophole_demo_model, marginal_consistency_demo, postselection_report,
};
use nonlocality::measurement::{
    filter_projectors, protocol_statistics, sample_records, EmpiricalStatistics, FIRST_STAGE_ORDER,
};
use nonlocality::output::{
    envelope, format_sig, round_floats, sweep_json_rows, write_records_csv, write_sweep_csv, Meta,
};
use nonlocality::quantum_core::ComplexMatrix;
use nonlocality::werner::{flip_from_singlets, flip_operator_capped, werner_capped, DEFAULT_MAX_D};
use nonlocality::Error;

const MAX_D_ENV: &str = "NONLOCALITY_MAX_D";

#[derive(Parser)]
#[command(
    name = "nonlocality",
    version,
    about = "Werner states, filtered CHSH tests and LHV demos"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check trace, Hermiticity, positivity and the flip identity for werner(d).
    WernerCheck {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Tabulate the filtered CHSH value over a range of dimensions.
    Sweep {
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long, default_value_t = 10)]
        d_max: usize,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Sample the two-stage protocol and compare with the exact CHSH value.
    Simulate {
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Largest CHSH value over deterministic local strategies.
    LhvBound {
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Local model whose post-selected CHSH value is 4.
    LhvLoophole {
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Averaged marginals agree while per-λ marginals differ.
    LhvMarginals {
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// Output file; the table goes to stdout and the summary to stderr when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Marks an error that should exit with code 2.
#[derive(Debug)]
struct InvariantFailure(String);

impl std::fmt::Display for InvariantFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invariant check failed: {}", self.0)
    }
}

impl std::error::Error for InvariantFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InvariantFailure>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::DimensionTooSmall { .. }
            | Error::DimensionTooLarge { .. }
            | Error::DimensionOverflow { .. }
            | Error::InvalidRange { .. }
            | Error::NoTrials,
        )
        | None => 1,
        Some(_) => 2,
    }
}

fn max_d() -> anyhow::Result<usize> {
    match std::env::var(MAX_D_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{MAX_D_ENV} must be a positive integer, got {v:?}")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_D),
        Err(e) => Err(anyhow!("{MAX_D_ENV}: {e}")),
    }
}

/// Opens `--out`, or stdout when absent.
fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: &Option<PathBuf>, value: &Value) -> anyhow::Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_text(out: &Option<PathBuf>, lines: &[String]) -> anyhow::Result<()> {
    let mut w = sink(out)?;
    for l in lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

/// Summary lines go to stdout when the table went to a file, else to stderr.
fn summary(to_file: bool, lines: &[String]) {
    for l in lines {
        if to_file {
            println!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
}

fn werner_check(d: usize, report: &ReportArgs) -> anyhow::Result<()> {
    let cap = max_d()?;
    let w = werner_capped(d, cap)?;
    let diag = w.rho().diagnostics()?;
    let v = flip_operator_capped(d, cap)?;
    let flip_residual = v.matrix().frobenius_distance(&flip_from_singlets(d)?)?;
    let involution_residual = v
        .matrix()
        .matmul(v.matrix())?
        .frobenius_distance(&ComplexMatrix::identity(d * d))?;

    let checks = [
        ("trace", diag.trace, (diag.trace - 1.0).abs() <= 1e-9),
        (
            "hermiticity_deviation",
            diag.hermiticity_deviation,
            diag.hermiticity_deviation <= 1e-9,
        ),
        (
            "min_eigenvalue",
            diag.min_eigenvalue,
            diag.min_eigenvalue >= -1e-9,
        ),
        (
            "flip_identity_residual",
            flip_residual,
            flip_residual <= 1e-10,
        ),
        (
            "flip_squared_residual",
            involution_residual,
            involution_residual <= 1e-12,
        ),
    ];
    let trivial_filter = filter_projectors(d)?.p.matrix() == &ComplexMatrix::identity(d);
    let all_pass = checks.iter().all(|c| c.2);

    match report.format {
        ReportFormat::Text => {
            let mut lines = vec![format!("werner({d})")];
            for (name, value, ok) in &checks {
                let status = if *ok { "ok" } else { "FAIL" };
                lines.push(format!("{name:<24} {value:>14.6e}  {status}"));
            }
            if trivial_filter {
                lines.push(
                    "note: P and Q are the identity at d = 2, so the filter is trivial".into(),
                );
            }
            write_text(&report.out, &lines)?;
        }
        ReportFormat::Json => {
            let mut meta = Meta::new("werner-check");
            meta.d = Some(d);
            let mut data = serde_json::Map::new();
            for (name, value, ok) in &checks {
                data.insert(name.to_string(), json!({ "value": value, "pass": ok }));
            }
            data.insert("trivial_filter".into(), json!(trivial_filter));
            data.insert("pass".into(), json!(all_pass));
            write_json(&report.out, &envelope(&meta, Value::Object(data)))?;
        }
    }
    if !all_pass {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.2).map(|c| c.0).collect();
        return Err(InvariantFailure(failed.join(", ")).into());
    }
    Ok(())
}

fn sweep(d_min: usize, d_max: usize, table: &TableArgs) -> anyhow::Result<()> {
    let rows = violation_sweep_capped(d_min, d_max, max_d()?)?;
    match table.format {
        TableFormat::Csv => {
            let w = sink(&table.out)?;
            write_sweep_csv(&rows, w)?;
        }
        TableFormat::Json => {
            let mut meta = Meta::new("sweep");
            meta.d_min = Some(d_min);
            meta.d_max = Some(d_max);
            write_json(&table.out, &envelope(&meta, sweep_json_rows(&rows)))?;
        }
    }
    let first = rows.iter().find(|r| r.violates).map(|r| r.d.to_string());
    summary(
        table.out.is_some(),
        &[format!(
            "first violating d: {}",
            first.as_deref().unwrap_or("none")
        )],
    );
    Ok(())
}

fn simulate(d: usize, trials: usize, seed: u64, table: &TableArgs) -> anyhow::Result<()> {
    let w = werner_capped(d, max_d()?)?;
    let stats = protocol_statistics(w.rho(), &filter_projectors(d)?, &canonical_settings(d)?)?;
    let records = sample_records(&stats, seed, trials)?;
    let emp = EmpiricalStatistics::from_records(&records);
    let exact = stats.branch(1, 1).chsh();
    let empirical = emp.chsh(1, 1);

    match table.format {
        TableFormat::Csv => {
            let w = sink(&table.out)?;
            write_records_csv(&records, w)?;
        }
        TableFormat::Json => {
            let mut meta = Meta::new("simulate");
            meta.d = Some(d);
            meta.seed = Some(seed);
            meta.trials = Some(trials);
            write_json(
                &table.out,
                &envelope(&meta, serde_json::to_value(&records)?),
            )?;
        }
    }

    let fmt = |x: Option<f64>| x.map(format_sig).unwrap_or_else(|| "n/a".into());
    let z = match (empirical, exact) {
        (Some(e), Some(x)) if e.std_error > 0.0 => Some((e.value - x) / e.std_error),
        _ => None,
    };
    let mut lines = vec![
        format!("d: {d}  trials: {trials}  seed: {seed}"),
        format!(
            "subensemble {{1,1}} empirical CHSH: {}",
            fmt(empirical.map(|e| e.value))
        ),
        format!("standard error: {}", fmt(empirical.map(|e| e.std_error))),
        format!("exact CHSH: {}", fmt(exact)),
        format!("z-score: {}", fmt(z)),
    ];
    for (p, q) in FIRST_STAGE_ORDER {
        lines.push(format!(
            "branch {{{p},{q}}}: count {} frequency {} exact {}",
            emp.branch_count(p, q),
            format_sig(emp.branch_frequency(p, q)),
            format_sig(stats.branch(p, q).probability),
        ));
    }
    summary(table.out.is_some(), &lines);
    Ok(())
}

fn lhv_bound(report: &ReportArgs) -> anyhow::Result<()> {
    let en = enumerate_deterministic();
    match report.format {
        ReportFormat::Text => write_text(
            &report.out,
            &[
                format!("deterministic CHSH bound: {}", en.max),
                format!(
                    "strategy pairs: {}  maximizers: {}  minimum: {}",
                    en.pairs, en.maximizers, en.min
                ),
            ],
        )?,
        ReportFormat::Json => write_json(
            &report.out,
            &envelope(
                &Meta::new("lhv-bound"),
                round_floats(serde_json::to_value(&en)?),
            ),
        )?,
    }
    if en.max != CLASSICAL_BOUND {
        bail!(InvariantFailure(format!(
            "deterministic maximum {} differs from 2",
            en.max
        )));
    }
    Ok(())
}

fn lhv_loophole(report: &ReportArgs) -> anyhow::Result<()> {
    let rep = postselection_report(&loophole_demo_model())?;
    let value = round_floats(serde_json::to_value(&rep)?);
    match report.format {
        ReportFormat::Text => {
            let mut lines = vec![
                format!("post-selected CHSH: {}", rep.postselected_chsh),
                format!("full-ensemble CHSH: {}", rep.full_ensemble_chsh),
            ];
            lines.push(serde_json::to_string_pretty(&value)?);
            write_text(&report.out, &lines)?;
        }
        ReportFormat::Json => {
            write_json(&report.out, &envelope(&Meta::new("lhv-loophole"), value))?
        }
    }
    if rep.postselected_chsh != 4.0 {
        bail!(InvariantFailure(format!(
            "post-selected CHSH {}",
            rep.postselected_chsh
        )));
    }
    Ok(())
}

fn lhv_marginals(report: &ReportArgs) -> anyhow::Result<()> {
    let (model, rep) = marginal_consistency_demo();
    match report.format {
        ReportFormat::Text => {
            let mut lines = vec![
                format!(
                    "averaged P(A=0), P(A'=0): {}, {}",
                    rep.averaged_zero_prob[0], rep.averaged_zero_prob[1]
                ),
                format!("averaged equality holds: {}", rep.averaged_equal),
            ];
            for (k, l) in rep.per_lambda.iter().enumerate() {
                lines.push(format!(
                    "lambda {}: weight {}  P(A=0) {}  P(A'=0) {}  gap {}",
                    k + 1,
                    l.weight,
                    l.zero_prob[0],
                    l.zero_prob[1],
                    l.zero_gap
                ));
            }
            lines.push(format!(
                "pointwise marginals differ: {}",
                rep.pointwise_differs
            ));
            write_text(&report.out, &lines)?;
        }
        ReportFormat::Json => {
            let data = json!({ "model": model, "report": rep });
            write_json(
                &report.out,
                &envelope(&Meta::new("lhv-marginals"), round_floats(data)),
            )?;
        }
    }
    if !(rep.averaged_equal && rep.pointwise_differs) {
        bail!(InvariantFailure(
            "marginal demo lost its defining property".into()
        ));
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::WernerCheck { d, report } => werner_check(d, &report),
        Command::Sweep {
            d_min,
            d_max,
            table,
        } => sweep(d_min, d_max, &table),
        Command::Simulate {
            d,
            trials,
            seed,
            table,
        } => simulate(d, trials, seed, &table),
        Command::LhvBound { report } => lhv_bound(&report),
        Command::LhvLoophole { report } => lhv_loophole(&report),
        Command::LhvMarginals { report } => lhv_marginals(&report),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
