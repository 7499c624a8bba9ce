//! `ggc` — run the verdict pipeline on field records, perform standalone
//! exact algebra (Weierstrass preparation, Hensel lifting, Newton polygons,
//! invariants, nu polynomials, characteristic determinants), and render
//! survey tables.
//!
//! Exit codes: 0 when every checked record reaches at least the weak form
//! (and for successful algebra runs), 2 when some record stays
//! inconclusive, 1 for operational failures.  All numeric input is exact
//! decimal integers.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use iwasawa::bivar::{char_det, Orientation, SeriesMatrix};
use iwasawa::cas::{CasClient, CasTask};
use iwasawa::criteria::{char_analysis, p_split_p_rational, verdict_pipeline, VerdictLevel};
use iwasawa::record::{bundled_record, record_diff, FieldRecord, Tower};
use iwasawa::series::Lambda;
use iwasawa::{Error, PadicInt, PowerSeries, Verdict};

#[derive(Parser)]
#[command(
    name = "ggc",
    version,
    about = "Exact p-adic algebra and verdict engine for pseudo-nullity criteria \
             over imaginary quadratic fields in which p splits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the criteria pipeline on records and print verdicts with traces.
    Check(CheckArgs),
    /// Standalone algebra on explicit coefficient data.
    Algebra {
        #[command(subcommand)]
        op: AlgebraCmd,
    },
    /// Render a survey table, one row per record.
    Report(ReportArgs),
    /// Populate record fields from the external computer-algebra engine.
    Fetch(FetchArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct CheckArgs {
    /// Record files to check.
    paths: Vec<PathBuf>,
    /// Check the bundled record for this prime (with --d).
    #[arg(long)]
    p: Option<u64>,
    /// Check the bundled record for this discriminant part (with --p).
    #[arg(long)]
    d: Option<u64>,
    /// Refresh fetchable fields from the external engine before checking.
    #[arg(long)]
    fetch: bool,
    /// Engine binary (overrides GGC_ENGINE_PATH).
    #[arg(long)]
    engine_path: Option<PathBuf>,
    /// Per-task engine timeout in seconds (overrides GGC_TASK_TIMEOUT_SECS).
    #[arg(long)]
    timeout: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct ReportArgs {
    /// Record files (or directories scanned for *.json).
    paths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct FetchArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    d: u64,
    /// Comma-separated tasks: class_group, aux_class_number.
    #[arg(long, default_value = "class_group")]
    tasks: String,
    /// Base record supplying defining polynomials and receiving the patch
    /// (defaults to the bundled record when available).
    #[arg(long)]
    base: Option<PathBuf>,
    /// Write the merged record here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    engine_path: Option<PathBuf>,
    #[arg(long)]
    timeout: Option<u64>,
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Weierstrass preparation of a series in S.
    Prepare {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        prec: u32,
        #[arg(long, default_value_t = 32)]
        cutoff: usize,
        /// Ascending-degree coefficients, comma-separated.
        #[arg(long)]
        coeffs: String,
    },
    /// Hensel-lift a root of a polynomial in T from an initial residue.
    Hensel {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        prec: u32,
        #[arg(long)]
        coeffs: String,
        /// Initial approximation of the root.
        #[arg(long)]
        x0: i128,
    },
    /// Newton polygon and the one-sided irreducibility certificate.
    Newton {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        prec: u32,
        #[arg(long)]
        coeffs: String,
    },
    /// mu, lambda and the cofactor constant-term valuation of a polynomial
    /// in T.
    Invariants {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        prec: u32,
        #[arg(long)]
        coeffs: String,
    },
    /// The polynomial nu_m(S) = ((1+S)^{p^m} - 1)/S.
    Nu {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 12)]
        prec: u32,
        #[arg(long, default_value_t = 32)]
        cutoff: usize,
    },
    /// Characteristic determinant det(X*I - F) of a relation matrix.
    Det {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        prec: u32,
        #[arg(long, default_value_t = 16)]
        cutoff: usize,
        /// `t` for a result monic in T (entries univariate in S),
        /// `s` for a result monic in S (entries univariate in T).
        #[arg(long, default_value = "t")]
        orientation: String,
        /// Rows separated by `;`, entries by `|`, each entry an
        /// ascending-degree comma list, e.g. `0|1,2;3|0,0,1`.
        #[arg(long)]
        entries: String,
    },
}

fn main() -> ExitCode {
    // die quietly when the read end of a pipe goes away (check | head)
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Check(args) => cmd_check(args),
        Cmd::Algebra { op } => cmd_algebra(op).map(|()| ExitCode::SUCCESS),
        Cmd::Report(args) => cmd_report(args),
        Cmd::Fetch(args) => cmd_fetch(args).map(|()| ExitCode::SUCCESS),
    }
}

fn parse_coeffs(text: &str) -> Result<Vec<i128>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<i128>()
                .map_err(|e| Error::InvalidArgument(format!("coefficient `{part}`: {e}")))
        })
        .collect()
}

fn client(engine_path: &Option<PathBuf>, timeout: &Option<u64>) -> CasClient {
    let mut client = CasClient::from_env();
    if let Some(path) = engine_path {
        client = client.with_engine(path.clone());
    }
    if let Some(secs) = timeout {
        client = client.with_timeout(Duration::from_secs(*secs));
    }
    client
}

fn default_tasks(rec: &FieldRecord) -> Vec<CasTask> {
    let mut tasks = vec![CasTask::ClassGroup, CasTask::AuxClassNumber];
    if rec.defining_polynomials.is_some() {
        if let Some(layer) = rec.layer_sequence(Tower::N) {
            tasks.push(CasTask::LayerClassNumbers {
                tower: Tower::N,
                c: layer.c,
                depth: layer.ords.len() as u32,
            });
        }
    }
    tasks
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode, Error> {
    let mut records: Vec<FieldRecord> = Vec::new();
    for path in &args.paths {
        records.push(FieldRecord::load_path(path)?);
    }
    match (args.p, args.d) {
        (Some(p), Some(d)) => {
            let rec = bundled_record(p, d).ok_or_else(|| {
                Error::DataMissing(format!(
                    "no bundled record for (p, d) = ({p}, {d}); pass a record file instead"
                ))
            })?;
            records.push(rec);
        }
        (None, None) => {}
        _ => {
            return Err(Error::InvalidArgument(
                "--p and --d must be given together".into(),
            ))
        }
    }
    if records.is_empty() {
        return Err(Error::InvalidArgument(
            "nothing to check: pass record paths or --p/--d".into(),
        ));
    }
    if args.fetch {
        let client = client(&args.engine_path, &args.timeout);
        for rec in &mut records {
            let tasks = default_tasks(rec);
            let base = rec.clone();
            match client.fetch(rec.p, rec.d, &tasks, Some(&base)) {
                Ok(patch) => {
                    patch.apply_to(rec);
                    rec.validate()?;
                }
                // a missing engine downgrades the refresh to the data on hand
                Err(Error::EngineMissing(path)) => {
                    eprintln!(
                        "warning: engine `{path}` not found; checking (p={}, d={}) on unrefreshed data",
                        rec.p, rec.d
                    );
                }
                Err(e) => return Err(e),
            }
        }
    }
    let mut outputs = Vec::new();
    let mut worst = VerdictLevel::GgcHolds;
    for rec in &records {
        let verdict = verdict_pipeline(rec);
        worst = worst.min(verdict.level);
        outputs.push((rec.p, rec.d, verdict));
    }
    match args.format {
        Format::Text => {
            for (p, d, verdict) in &outputs {
                print_verdict_text(*p, *d, verdict);
            }
        }
        Format::Json => {
            let value: Vec<serde_json::Value> = outputs
                .iter()
                .map(|(p, d, verdict)| {
                    serde_json::json!({ "p": p, "d": d, "verdict": verdict })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        }
    }
    Ok(match worst {
        VerdictLevel::Inconclusive => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

fn print_verdict_text(p: u64, d: u64, verdict: &Verdict) {
    println!("record (p={p}, d={d}): {}", verdict.level);
    for (i, line) in verdict.trace.iter().enumerate() {
        println!("  [{i}] {} -> {}", line.id, line.outcome);
        if !line.inputs.is_empty() {
            let inputs = line
                .inputs
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(", ");
            println!("      inputs: {inputs}");
        }
        println!("      rule: {}", line.rule);
    }
}

fn cmd_algebra(op: AlgebraCmd) -> Result<(), Error> {
    match op {
        AlgebraCmd::Prepare {
            p,
            prec,
            cutoff,
            coeffs,
        } => {
            let coeffs = parse_coeffs(&coeffs)?;
            let series = PowerSeries::polynomial(p, prec, cutoff.max(coeffs.len()), &coeffs)?;
            let (mu, dist, unit) = series.weierstrass_prepare()?;
            println!("mu = {mu}");
            println!("P  = {}", dist.series().render("S", true));
            println!("U  = {}", unit.render("S", true));
        }
        AlgebraCmd::Hensel { p, prec, coeffs, x0 } => {
            let coeffs = parse_coeffs(&coeffs)?;
            let h = PowerSeries::polynomial(p, prec, coeffs.len().max(2), &coeffs)?;
            let root = h.hensel_lift_root(&PadicInt::from_int(p, prec, x0)?)?;
            println!("root = {root}");
        }
        AlgebraCmd::Newton { p, prec, coeffs } => {
            let coeffs = parse_coeffs(&coeffs)?;
            let h = PowerSeries::polynomial(p, prec, coeffs.len().max(2), &coeffs)?;
            println!("{}", render_newton(&h)?);
        }
        AlgebraCmd::Invariants { p, prec, coeffs } => {
            let coeffs = parse_coeffs(&coeffs)?;
            let h = PowerSeries::polynomial(p, prec, coeffs.len().max(2), &coeffs)?;
            let mu = h.mu_invariant();
            let lambda = match h.lambda_invariant() {
                Lambda::Known(l) => l.to_string(),
                Lambda::Undetermined { cutoff } => format!("undetermined(cutoff={cutoff})"),
            };
            match h.factor_out_x() {
                Ok((_, g)) => {
                    println!("mu={mu} lambda={lambda} g0_val={}", g.coeff(0).valuation())
                }
                Err(_) => println!("mu={mu} lambda={lambda} g0_val=ambiguous"),
            }
        }
        AlgebraCmd::Nu { p, m, prec, cutoff } => {
            let nu = PowerSeries::nu_polynomial(m, p, prec, cutoff)?;
            println!("{}", nu.render("S", false));
        }
        AlgebraCmd::Det {
            p,
            prec,
            cutoff,
            orientation,
            entries,
        } => {
            let orientation = match orientation.as_str() {
                "t" | "T" => Orientation::TDiagonal,
                "s" | "S" => Orientation::SDiagonal,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "orientation must be `t` or `s`, got `{other}`"
                    )))
                }
            };
            let rows: Vec<&str> = entries.split(';').collect();
            let n = rows.len();
            let mut cells = Vec::with_capacity(n * n);
            for row in &rows {
                let row_cells: Vec<&str> = row.split('|').collect();
                if row_cells.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "matrix must be square: got a row with {} entries in a {n}-row matrix",
                        row_cells.len()
                    )));
                }
                for cell in row_cells {
                    let coeffs = parse_coeffs(cell)?;
                    cells.push(PowerSeries::polynomial(p, prec, cutoff, &coeffs)?);
                }
            }
            let matrix = SeriesMatrix::new(n, cells)?;
            let det = char_det(&matrix, orientation)?;
            println!("{}", det.render("S", "T"));
        }
    }
    Ok(())
}

fn render_newton(h: &PowerSeries) -> Result<String, Error> {
    let polygon = h.newton_polygon()?;
    let decision = match h.irreducible_by_newton()? {
        iwasawa::series::Irreducibility::Irreducible => "irreducible",
        iwasawa::series::Irreducibility::Inconclusive => "inconclusive",
    };
    Ok(match polygon.segments.len() {
        0 => {
            let (i, v) = polygon.vertices[0];
            format!("degenerate polygon, single vertex ({i},{v}): {decision}")
        }
        1 => format!("single segment slope {}: {decision}", polygon.segments[0].0),
        n => {
            let slopes = polygon
                .segments
                .iter()
                .map(|(s, _)| s.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            format!("{n} segments with slopes [{slopes}]: {decision}")
        }
    })
}

/// One survey row; errors render as inconclusive rows with the message.
struct ReportRow {
    p: u64,
    d: u64,
    lambda: String,
    mu: String,
    g0_val: String,
    s: String,
    rational: String,
    verdict: String,
    failed: bool,
}

fn report_row(path: &PathBuf) -> ReportRow {
    match FieldRecord::load_path(path) {
        Err(e) => ReportRow {
            p: 0,
            d: 0,
            lambda: "-".into(),
            mu: "-".into(),
            g0_val: "-".into(),
            s: "-".into(),
            rational: "-".into(),
            verdict: format!("error: {e}"),
            failed: true,
        },
        Ok(rec) => {
            let (lambda, mu, g0_val) = match &rec.char_t {
                Some(c) => match c.to_series(rec.p).and_then(|h| char_analysis(&h)) {
                    Ok(cd) => (
                        cd.lambda_cyc.to_string(),
                        cd.mu.to_string(),
                        cd.g0_val.to_string(),
                    ),
                    Err(_) => ("?".into(), "?".into(), "?".into()),
                },
                None => ("-".into(), "-".into(), "-".into()),
            };
            let rational = p_split_p_rational(&rec)
                .map(|(d, _)| d.to_string())
                .unwrap_or_else(|_| "?".into());
            let verdict = verdict_pipeline(&rec).level.to_string();
            ReportRow {
                p: rec.p,
                d: rec.d,
                lambda,
                mu,
                g0_val,
                s: rec.s_exp.to_string(),
                rational,
                verdict,
                failed: false,
            }
        }
    }
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode, Error> {
    let mut files: Vec<PathBuf> = Vec::new();
    for path in &args.paths {
        if path.is_dir() {
            let mut inside: Vec<PathBuf> = std::fs::read_dir(path)?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                .collect();
            inside.sort();
            files.extend(inside);
        } else {
            files.push(path.clone());
        }
    }
    let mut rows: Vec<ReportRow> = files.iter().map(report_row).collect();
    rows.sort_by_key(|r| (r.failed, r.p, r.d));
    let all_failed = !rows.is_empty() && rows.iter().all(|r| r.failed);
    match args.format {
        Format::Text => {
            println!("| p | d | lambda_cyc | mu | g0_val | s | p-rational | verdict |");
            println!("|---|---|------------|----|--------|---|------------|---------|");
            for r in &rows {
                let (p, d) = if r.failed {
                    ("-".to_string(), "-".to_string())
                } else {
                    (r.p.to_string(), r.d.to_string())
                };
                println!(
                    "| {} | {} | {} | {} | {} | {} | {} | {} |",
                    p, d, r.lambda, r.mu, r.g0_val, r.s, r.rational, r.verdict
                );
            }
        }
        Format::Json => {
            let value: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "p": r.p, "d": r.d,
                        "lambda_cyc": r.lambda, "mu": r.mu, "g0_val": r.g0_val,
                        "s": r.s, "p_rational": r.rational, "verdict": r.verdict,
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        }
    }
    if rows.is_empty() || all_failed {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn parse_tasks(text: &str) -> Result<Vec<CasTask>, Error> {
    text.split(',')
        .map(|part| match part.trim() {
            "class_group" => Ok(CasTask::ClassGroup),
            "aux_class_number" => Ok(CasTask::AuxClassNumber),
            other => Err(Error::TaskUnsupported(format!(
                "`{other}` (layer and capitulation tasks need a base record; use --fetch on check)"
            ))),
        })
        .collect()
}

fn cmd_fetch(args: FetchArgs) -> Result<(), Error> {
    let base = match &args.base {
        Some(path) => FieldRecord::load_path(path)?,
        None => bundled_record(args.p, args.d).ok_or_else(|| {
            Error::DataMissing(format!(
                "no bundled record for (p, d) = ({}, {}); pass --base",
                args.p, args.d
            ))
        })?,
    };
    let tasks = parse_tasks(&args.tasks)?;
    let client = client(&args.engine_path, &args.timeout);
    let patch = client.fetch(args.p, args.d, &tasks, Some(&base))?;
    let mut merged = base.clone();
    patch.apply_to(&mut merged);
    merged.validate()?;
    for audit in &patch.audits {
        println!(
            "task {} done (engine {})",
            audit.task,
            audit.engine_version.as_deref().unwrap_or("unknown")
        );
    }
    let diff = record_diff(&base, &merged)?;
    if diff.is_empty() {
        println!("no content changes against the base record");
    } else {
        for line in &diff {
            println!("field {}: {} -> {}", line.field, line.left, line.right);
        }
    }
    if let Some(out) = &args.out {
        std::fs::write(out, merged.serialize_canonical())?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
