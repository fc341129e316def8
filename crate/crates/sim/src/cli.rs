//! `dat-sim` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{
    apply_override, from_value, override_value, parse_document, ConfigError, ScenarioConfig,
};
use crate::summary::{run_summary, validation_report};
use crate::trajectory::Table;
use dat_core::simulator::integrate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dat-sim",
    version,
    about = "Distributed average tracking simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write `<stem>.csv` plus `<stem>.summary.txt`.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check a scenario and print the validator report without integrating.
    Validate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the cartesian product of parameter overrides, one output per cell.
    Sweep {
        config: PathBuf,
        /// `dotted.path=v1,v2,...`; repeat for more axes. The last axis varies fastest.
        #[arg(long, required = true)]
        grid: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the document's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses `args` (program name first) and runs the command; returns the exit
/// code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run { config, common } => cmd_run(&config, &common),
        Command::Validate { config, seed } => cmd_validate(&config, seed),
        Command::Sweep {
            config,
            grid,
            common,
        } => cmd_sweep(&config, &grid, &common),
    }
}

/// Why a scenario did not produce a complete run.
enum Failure {
    Io(String),
    Invalid(ConfigError),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Invalid(_) => EXIT_INVALID,
        }
    }

    fn report(&self) {
        match self {
            Failure::Io(msg) => eprintln!("error: {msg}"),
            Failure::Invalid(e) => eprintln!("{e}"),
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut doc = parse_document(&text).map_err(Failure::Invalid)?;
    if let Some(seed) = seed {
        apply_override(&mut doc, "seed", Value::from(seed)).map_err(Failure::Io)?;
    }
    Ok(doc)
}

fn stem_of(path: &Path) -> String {
    path.file_stem().map_or_else(
        || String::from("scenario"),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

/// Integrates `cfg` and writes its outputs under `dir` with file stem `stem`.
/// Returns whether the run aborted.
fn execute(cfg: &ScenarioConfig, dir: &Path, stem: &str) -> Result<bool, Failure> {
    let start = Instant::now();
    let log = integrate(&cfg.problem);
    let wall = start.elapsed();
    write_file(
        &dir.join(format!("{stem}.csv")),
        &Table::from_log(&log).to_bytes(),
    )?;
    if cfg.dump_states {
        let table = Table::from_states(&log.states, log.n, log.dim);
        write_file(&dir.join(format!("{stem}.states.csv")), &table.to_bytes())?;
    }
    let summary = run_summary(stem, cfg, &log, wall);
    write_file(&dir.join(format!("{stem}.summary.txt")), summary.as_bytes())?;
    Ok(log.abort.is_some())
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_run(path: &Path, common: &Common) -> i32 {
    let result = load(path, common.seed)
        .and_then(|doc| from_value(&doc).map_err(Failure::Invalid))
        .and_then(|cfg| {
            ensure_dir(&common.out)?;
            let stem = cfg.output.clone().unwrap_or_else(|| stem_of(path));
            let aborted = execute(&cfg, &common.out, &stem)?;
            println!("wrote {}", common.out.join(format!("{stem}.csv")).display());
            Ok(aborted)
        });
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => {
            eprintln!("run aborted on a non-finite state; see the summary");
            EXIT_ABORT
        }
        Err(f) => {
            f.report();
            f.code()
        }
    }
}

fn cmd_validate(path: &Path, seed: Option<u64>) -> i32 {
    match load(path, seed).and_then(|doc| from_value(&doc).map_err(Failure::Invalid)) {
        Ok(cfg) => {
            print!("{}", validation_report(&cfg));
            println!("valid");
            EXIT_OK
        }
        Err(f) => {
            f.report();
            f.code()
        }
    }
}

/// One axis of a sweep: a dotted path and its raw values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: String,
    pub values: Vec<String>,
}

pub fn parse_axis(spec: &str) -> Result<Axis, String> {
    let (path, values) = spec
        .split_once('=')
        .ok_or_else(|| format!("grid axis `{spec}` must look like path=v1,v2"))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_owned()).collect();
    if path.trim().is_empty() || values.iter().any(String::is_empty) {
        return Err(format!("grid axis `{spec}` has an empty path or value"));
    }
    Ok(Axis {
        path: path.trim().to_owned(),
        values,
    })
}

/// Cartesian product of axis value indices, last axis fastest.
pub fn cells(axes: &[Axis]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.values.len()).map(move |k| {
                    let mut cell = prefix.clone();
                    cell.push(k);
                    cell
                })
            })
            .collect();
    }
    out
}

pub fn cell_name(stem: &str, index: usize) -> String {
    format!("{stem}-cell-{index:03}")
}

enum CellOutcome {
    Ok,
    Aborted,
    Failed(Failure),
}

fn cmd_sweep(path: &Path, grid: &[String], common: &Common) -> i32 {
    let axes = match grid
        .iter()
        .map(|g| parse_axis(g))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(axes) => axes,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    let base = match load(path, common.seed) {
        Ok(doc) => doc,
        Err(f) => {
            f.report();
            return f.code();
        }
    };
    if let Err(f) = ensure_dir(&common.out) {
        f.report();
        return f.code();
    }
    let stem = base
        .get("output")
        .and_then(Value::as_str)
        .map_or_else(|| stem_of(path), String::from);
    let cells = cells(&axes);
    let done = AtomicUsize::new(0);

    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .enumerate()
        .map(|(index, cell)| {
            let name = cell_name(&stem, index);
            let mut doc = base.clone();
            let mut outcome = None;
            for (axis, &k) in axes.iter().zip(cell) {
                if let Err(e) =
                    apply_override(&mut doc, &axis.path, override_value(&axis.values[k]))
                {
                    outcome = Some(CellOutcome::Failed(Failure::Io(e)));
                }
            }
            // the output stem is fixed by the cell name
            if let Some(obj) = doc.as_object_mut() {
                obj.remove("output");
            }
            let outcome = outcome.unwrap_or_else(|| match from_value(&doc) {
                Err(e) => {
                    let text = format!("scenario: {name}\nstatus: INVALID\n{e}\n");
                    match write_file(
                        &common.out.join(format!("{name}.summary.txt")),
                        text.as_bytes(),
                    ) {
                        Ok(()) => CellOutcome::Failed(Failure::Invalid(e)),
                        Err(f) => CellOutcome::Failed(f),
                    }
                }
                Ok(cfg) => match execute(&cfg, &common.out, &name) {
                    Ok(false) => CellOutcome::Ok,
                    Ok(true) => CellOutcome::Aborted,
                    Err(f) => CellOutcome::Failed(f),
                },
            });
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!("[{k}/{}] {name}", cells.len());
            outcome
        })
        .collect();

    let mut lines = vec![{
        let mut h = vec![String::from("cell")];
        h.extend(axes.iter().map(|a| a.path.clone()));
        h.push(String::from("status"));
        h
    }];
    let mut code = EXIT_OK;
    for (i, (cell, outcome)) in cells.iter().zip(&outcomes).enumerate() {
        let mut line = vec![cell_name(&stem, i)];
        line.extend(axes.iter().zip(cell).map(|(a, &k)| a.values[k].clone()));
        line.push(String::from(match outcome {
            CellOutcome::Ok => "ok",
            CellOutcome::Aborted => "aborted",
            CellOutcome::Failed(Failure::Invalid(_)) => "invalid",
            CellOutcome::Failed(Failure::Io(_)) => "io_error",
        }));
        lines.push(line);
        let cell_code = match outcome {
            CellOutcome::Ok => EXIT_OK,
            CellOutcome::Aborted => EXIT_ABORT,
            CellOutcome::Failed(f) => {
                eprintln!("{}:", cell_name(&stem, i));
                f.report();
                f.code()
            }
        };
        code = worst(code, cell_code);
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for line in &lines {
            let _ = w.write_record(line);
        }
        let _ = w.flush();
    }
    if let Err(f) = write_file(&common.out.join(format!("{stem}-sweep.csv")), &buf) {
        f.report();
        return EXIT_IO;
    }
    code
}

/// Sweep exit precedence: I/O error, then validation failure, then abort.
fn worst(a: i32, b: i32) -> i32 {
    let rank = |c: i32| match c {
        EXIT_IO => 3,
        EXIT_INVALID => 2,
        EXIT_ABORT => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}
