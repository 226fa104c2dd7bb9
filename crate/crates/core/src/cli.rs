//! The `bertini` command line: point counts, zeta values, density
//! verification and embedding-dimension strata for a JSON fixture.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::fixture::{Fixture, FixtureError};
use crate::geometry::{closed_point_counts, GeomError, Scheme};
use crate::sieve::{self, DensityReport, Mode, SieveContext, SieveError, Which};
use crate::zeta::{self, ZetaError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Count,
    Zeta,
    Verify,
    Classify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    X,
    U,
    Z,
    V,
}

#[derive(Debug, Parser)]
#[command(name = "bertini", about = "Bertini densities for hypersurfaces containing a subscheme, over small finite fields")]
pub struct Args {
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long, value_enum)]
    pub cmd: Command,
    #[arg(long, value_enum)]
    pub which: Option<Which>,
    #[arg(long)]
    pub d_min: Option<u32>,
    #[arg(long)]
    pub d_max: Option<u32>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Smoothness is certified at closed points of degree <= B.
    #[arg(long = "B")]
    pub b: Option<u32>,
    /// Zeta truncation degree.
    #[arg(long = "E")]
    pub e: Option<u32>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Largest extension degree for `count`.
    #[arg(long)]
    pub e_max: Option<u32>,
    /// Argument of the zeta function for `zeta`; defaults to dim U + 1.
    #[arg(long)]
    pub s: Option<u32>,
    /// Scheme for `count`, `zeta` and `classify`.
    #[arg(long, value_enum)]
    pub scheme: Option<Target>,
    /// Any config key, e.g. `--set r=3 --set k=1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Omit the timestamp from JSON output.
    #[arg(long)]
    pub no_timestamp: bool,
}

const DEFAULT_TOLERANCE: f64 = 0.02;

/// Runs one command; the returned code is 0 iff every check passed.
pub fn run(args: &Args, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut fixture = Fixture::load(&args.fixture)?;
    let c = &mut fixture.config;
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected KEY=VALUE, found {kv:?}")))?;
        c.set(k.trim(), v.trim())?;
    }
    macro_rules! take {
        ($($field:ident),*) => { $( if args.$field.is_some() { c.$field = args.$field; } )* };
    }
    take!(which, d_min, d_max, mode, samples, seed, b, e, tolerance, e_max, s);

    let mut out: Box<dyn Write + '_> = match &args.out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(&mut *stdout),
    };
    let code = match args.cmd {
        Command::Count => count(&fixture, args, &mut out)?,
        Command::Zeta => zeta_cmd(&fixture, args, &mut out)?,
        Command::Verify => verify(&fixture, args, &mut out)?,
        Command::Classify => classify(&fixture, args, &mut out)?,
    };
    out.flush()?;
    Ok(code)
}

fn target(fixture: &Fixture, args: &Args, default: Target) -> Result<Scheme, CliError> {
    Ok(match args.scheme.unwrap_or(default) {
        Target::X => fixture.x.clone(),
        Target::U => fixture.u.clone(),
        Target::Z => fixture.z.clone(),
        Target::V => fixture.z.intersect(&fixture.u)?,
    })
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_json(args: &Args, fixture: &Fixture, body: serde_json::Value, out: &mut dyn Write) -> Result<(), CliError> {
    let mut doc = json!({ "fixture": fixture.name, "command": format!("{:?}", args.cmd).to_lowercase() });
    if !args.no_timestamp {
        doc["timestamp"] = json!(timestamp());
    }
    if let serde_json::Value::Object(map) = body {
        for (k, v) in map {
            doc[k] = v;
        }
    }
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct CountRow {
    e: u32,
    points: u128,
    closed_points: u128,
}

fn count(fixture: &Fixture, args: &Args, out: &mut dyn Write) -> Result<i32, CliError> {
    let scheme = target(fixture, args, Target::U)?;
    let e_max = fixture.config.e_max.unwrap_or(4);
    let counts = (1..=e_max).map(|e| scheme.count_points(e)).collect::<Result<Vec<_>, _>>()?;
    let closed = closed_point_counts(&counts);
    let rows: Vec<CountRow> = counts
        .iter()
        .zip(&closed)
        .enumerate()
        .map(|(i, (&n, &a))| CountRow { e: i as u32 + 1, points: n, closed_points: a })
        .collect();
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["e", "N", "a"])?;
            for r in &rows {
                w.write_record([r.e.to_string(), r.points.to_string(), r.closed_points.to_string()])?;
            }
            w.flush()?;
        }
        Format::Json => write_json(args, fixture, json!({ "counts": rows }), out)?,
    }
    Ok(0)
}

fn zeta_cmd(fixture: &Fixture, args: &Args, out: &mut dyn Write) -> Result<i32, CliError> {
    let scheme = target(fixture, args, Target::U)?;
    let s = match fixture.config.s {
        Some(s) => s,
        None => {
            let dim = scheme.estimate_dimension(fixture.config.ext_bound.unwrap_or(4), None)?;
            dim.as_option().map_or(1, |d| d + 1)
        }
    };
    let e = fixture.config.e.unwrap_or(14);
    let truncated = zeta::zeta_truncated(&scheme, s, e)?;
    let closed = match zeta::closed_form_with_removals(&scheme) {
        Some(_) => Some(zeta::zeta_closed_form(&scheme, s)?),
        None => None,
    };
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["s", "E", "value", "inverse", "tail_bound", "closed_form", "closed_form_inverse"])?;
            w.write_record([
                s.to_string(),
                e.to_string(),
                format!("{:.10}", truncated.value),
                format!("{:.10}", truncated.inverse_value()),
                format!("{:.3e}", truncated.tail_bound),
                closed.as_ref().map_or(String::new(), |z| format!("{:.10}", z.value)),
                closed.as_ref().map_or(String::new(), |z| format!("{:.10}", z.inverse_value())),
            ])?;
            w.flush()?;
        }
        Format::Json => write_json(args, fixture, json!({ "truncated": truncated, "closed_form": closed }), out)?,
    }
    Ok(0)
}

fn verify(fixture: &Fixture, args: &Args, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = fixture.sieve_config()?;
    let which = cfg.which;
    let tolerance = fixture.config.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let mode = fixture.config.mode.unwrap_or(Mode::MonteCarlo);
    let c = cfg.resolve_c()?;
    let d_min = fixture.config.d_min.unwrap_or(c.max(1));
    let d_max = fixture.config.d_max.unwrap_or(d_min);
    if d_min > d_max {
        return Err(CliError::Usage(format!("d_min = {d_min} exceeds d_max = {d_max}")));
    }
    let hypotheses = sieve::check_hypotheses(&cfg)?;
    if !hypotheses.ok {
        eprintln!("hypothesis check failed: {}", hypotheses.failures.join("; "));
        if args.format == Format::Json {
            write_json(args, fixture, json!({ "which": which, "hypotheses": hypotheses }), out)?;
        }
        return Ok(1);
    }
    let prediction = sieve::theoretical_density(&cfg, which)?;
    let mut reports: Vec<DensityReport> = Vec::new();
    for d in d_min..=d_max {
        let ctx = SieveContext::new(&cfg, d)?;
        let report = sieve::estimate_with_context(&ctx, prediction.clone(), mode)?;
        let h = report.headline();
        eprintln!(
            "d={d} {}: empirical {:.4} ± {:.4}, prediction {:.4}",
            h.stratum,
            h.empirical,
            h.radius,
            h.prediction.unwrap_or(f64::NAN)
        );
        reports.push(report);
    }
    let ok = reports.iter().all(|r| r.within_tolerance(tolerance));
    match args.format {
        Format::Csv => sieve::write_csv(&reports, &mut *out)?,
        Format::Json => write_json(
            args,
            fixture,
            json!({ "which": which, "tolerance": tolerance, "within_tolerance": ok, "reports": reports }),
            out,
        )?,
    }
    Ok(if ok { 0 } else { 1 })
}

fn classify(fixture: &Fixture, args: &Args, out: &mut dyn Write) -> Result<i32, CliError> {
    let scheme = target(fixture, args, Target::V)?;
    let degree = fixture.config.hypothesis_degree.unwrap_or(3);
    let ext = fixture.config.ext_bound.unwrap_or(4);
    let strata = scheme.stratify_by_embedding_dim(degree, ext)?;
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["embedding_dim", "points", "dimension", "e_plus_dim"])?;
            for (e, s) in &strata.strata {
                let dim = s.dimension.as_option();
                w.write_record([
                    e.to_string(),
                    s.points.len().to_string(),
                    dim.map_or("empty".to_string(), |d| d.to_string()),
                    dim.map_or(String::new(), |d| (*e as i64 + d as i64).to_string()),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let strata_json: Vec<_> = strata
                .strata
                .iter()
                .map(|(e, s)| {
                    json!({
                        "embedding_dim": e,
                        "dimension": s.dimension,
                        "points": s.points.iter().map(|p| p.label()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            write_json(
                args,
                fixture,
                json!({ "strata": strata_json, "max_e_plus_dim": strata.max_e_plus_dim() }),
                out,
            )?
        }
    }
    Ok(0)
}
