//! The `border-eig` command line.
//!
//! Exit codes: 0 success, 1 criterion or accuracy failure, 2 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Config, StrategyHint};
use crate::error::{Error, Result};
use crate::interp::{points_from_value, synthesize};
use crate::json;
use crate::matrices::build_family;
use crate::spectral::{criterion, solve, CriterionReport, SolutionSet};
use crate::system::{index_set_from_value, system_from_value, BorderSystem, Point};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct Tolerances {
    #[arg(long, global = true, env = "BORDER_EIG_TOL_COMMUTE")]
    tol_commute: Option<f64>,
    #[arg(long, global = true, env = "BORDER_EIG_TOL_CLUSTER")]
    tol_cluster: Option<f64>,
    #[arg(long, global = true, env = "BORDER_EIG_TOL_RANK")]
    tol_rank: Option<f64>,
    #[arg(long, global = true, env = "BORDER_EIG_TOL_DEDUP")]
    tol_dedup: Option<f64>,
    #[arg(long, global = true, env = "BORDER_EIG_TOL_ACCEPT")]
    tol_accept: Option<f64>,
    #[arg(long, global = true, env = "BORDER_EIG_TOL_POISED")]
    tol_poised: Option<f64>,
    #[arg(long, global = true, env = "BORDER_EIG_TOL_EIG")]
    tol_eig: Option<f64>,
    /// Seed for the random combination of multiplication matrices.
    #[arg(long, global = true, env = "BORDER_EIG_SEED")]
    seed: Option<u64>,
    /// Gauss–Newton refinement steps per root.
    #[arg(long = "refine", global = true, env = "BORDER_EIG_REFINE")]
    refine_iters: Option<usize>,
    #[arg(long, global = true, env = "BORDER_EIG_MAX_RETRIES")]
    max_retries: Option<usize>,
    /// Largest accepted index set.
    #[arg(long, global = true, env = "BORDER_EIG_SIZE_CAP")]
    size_cap: Option<usize>,
    #[arg(long, global = true, value_enum, env = "BORDER_EIG_FORMAT", default_value = "json")]
    format: OutputFormat,
}

/// Solve border-form polynomial systems through multiplication-matrix eigenvalues.
#[derive(Debug, Parser)]
#[command(name = "border-eig", version)]
struct Cli {
    #[command(flatten)]
    opts: Tolerances,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the matrices commute and are semisimple.
    Check { system: String },
    /// Recover the roots of a system.
    Solve {
        system: String,
        /// Skip the single-matrix shortcut.
        #[arg(long, hide = true)]
        force_generic: bool,
    },
    /// Build the system vanishing on a poised node set.
    FromPoints {
        /// Index set as inline JSON or a file path.
        #[arg(long)]
        index_set: String,
        #[arg(long)]
        points: String,
    },
    /// Plug claimed roots into a system.
    Verify { system: String, roots: String },
    /// Dump the multiplication matrices.
    Matrices { system: String },
}

/// Effective settings for one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub solver: Config,
    pub format: OutputFormat,
}

impl Tolerances {
    fn resolve(&self) -> Result<RunConfig> {
        let d = Config::default();
        let solver = Config {
            tol_commute: self.tol_commute.unwrap_or(d.tol_commute),
            tol_cluster: self.tol_cluster.unwrap_or(d.tol_cluster),
            tol_rank: self.tol_rank.unwrap_or(d.tol_rank),
            tol_dedup: self.tol_dedup.unwrap_or(d.tol_dedup),
            tol_accept: self.tol_accept.unwrap_or(d.tol_accept),
            tol_poised: self.tol_poised.unwrap_or(d.tol_poised),
            tol_eig: self.tol_eig.unwrap_or(d.tol_eig),
            seed: self.seed.unwrap_or(d.seed),
            refine_iters: self.refine_iters.unwrap_or(d.refine_iters),
            max_retries: self.max_retries.unwrap_or(d.max_retries),
            size_cap: self.size_cap.unwrap_or(d.size_cap),
            strategy: StrategyHint::Auto,
        };
        solver.validate()?;
        Ok(RunConfig {
            solver,
            format: self.format,
        })
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
    stdout: &'a mut dyn Write,
}

impl Io<'_> {
    fn read(&mut self, path: &str) -> Result<String> {
        if path == "-" {
            if self.stdin_used {
                return Err(Error::InvalidParameter("stdin can be read only once".into()));
            }
            self.stdin_used = true;
            let mut text = String::new();
            self.stdin.read_to_string(&mut text)?;
            Ok(text)
        } else {
            Ok(fs::read_to_string(path)?)
        }
    }

    fn read_json(&mut self, path: &str) -> Result<Value> {
        let text = self.read(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn emit(&mut self, text: &str) -> Result<()> {
        self.stdout.write_all(text.as_bytes())?;
        if !text.ends_with('\n') {
            self.stdout.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Errors caused by the caller's files or flags rather than by the numerics.
fn is_input_error(e: &Error) -> bool {
    !matches!(
        e,
        Error::NonConvergence { .. } | Error::DegenerateSpectrum { .. } | Error::NotPoised(_)
    )
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Json(_) => "malformed_json",
        Error::Io(_) => "io",
        Error::Schema { .. }
        | Error::AlphaInsideBasis { .. }
        | Error::AlphaNotInBorder { .. }
        | Error::CoefficientLength { .. }
        | Error::DuplicateRelation { .. }
        | Error::MissingRelation(_) => "schema",
        Error::NotPoised(_) => "not_poised",
        Error::NonConvergence { .. } => "non_convergence",
        Error::DegenerateSpectrum { .. } => "degenerate_spectrum",
        Error::SizeLimit { .. } => "size_limit",
        _ => "invalid_input",
    }
}

/// Runs one command and returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let mut io = Io {
        stdin,
        stdin_used: false,
        stdout,
    };
    let outcome = cli
        .opts
        .resolve()
        .and_then(|cfg| dispatch(&cli.command, &cfg, &mut io));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let body = json!({"error": {"kind": error_kind(&e), "message": e.to_string()}});
            let _ = writeln!(stderr, "{body}");
            if is_input_error(&e) {
                EXIT_INPUT
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig, io: &mut Io<'_>) -> Result<i32> {
    match cmd {
        Command::Check { system } => cmd_check(system, cfg, io),
        Command::Solve {
            system,
            force_generic,
        } => {
            let mut cfg = cfg.clone();
            if *force_generic {
                cfg.solver.strategy = StrategyHint::ForceGeneric;
            }
            cmd_solve(system, &cfg, io)
        }
        Command::FromPoints { index_set, points } => cmd_from_points(index_set, points, cfg, io),
        Command::Verify { system, roots } => cmd_verify(system, roots, cfg, io),
        Command::Matrices { system } => cmd_matrices(system, cfg, io),
    }
}

fn load_system(path: &str, cfg: &RunConfig, io: &mut Io<'_>) -> Result<BorderSystem> {
    let doc = io.read_json(path)?;
    system_from_value(&doc, cfg.solver.size_cap)
}

fn fmt_scalar(z: &crate::system::Scalar) -> String {
    if z.im == 0.0 {
        format!("{:.17e}", z.re)
    } else {
        format!("{:.17e}{:+.17e}i", z.re, z.im)
    }
}

fn fmt_point(z: &Point) -> String {
    let parts: Vec<String> = z.coords().iter().map(fmt_scalar).collect();
    format!("({})", parts.join(", "))
}

fn criterion_text(r: &CriterionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "commuting: {}", r.verdict.commuting);
    let _ = writeln!(out, "semisimple: {}", r.verdict.all_semisimple);
    let _ = writeln!(out, "maximal: {}", r.verdict.maximal);
    let _ = writeln!(out, "max commutator defect: {:.3e}", r.commutation.max_defect);
    for (i, s) in r.semisimplicity.iter().enumerate() {
        let _ = writeln!(out, "A_{}: semisimple {}", i + 1, s.semisimple);
        for c in &s.clusters {
            let _ = writeln!(
                out,
                "  eigenvalue {} algebraic {} geometric {}",
                fmt_scalar(&c.representative),
                c.algebraic,
                c.geometric
            );
        }
    }
    out
}

pub fn cmd_check_report(sys: &BorderSystem, cfg: &Config) -> Result<CriterionReport> {
    criterion(&build_family(sys)?, cfg)
}

fn cmd_check(path: &str, cfg: &RunConfig, io: &mut Io<'_>) -> Result<i32> {
    let sys = load_system(path, cfg, io)?;
    let report = cmd_check_report(&sys, &cfg.solver)?;
    let text = match cfg.format {
        OutputFormat::Json => json::to_string(&report)?,
        OutputFormat::Text => criterion_text(&report),
    };
    io.emit(&text)?;
    Ok(if report.verdict.maximal { EXIT_OK } else { EXIT_FAILURE })
}

fn solution_text(sol: &SolutionSet) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "maximal: {} (commuting {}, semisimple {})",
        sol.verdict.maximal, sol.verdict.commuting, sol.verdict.all_semisimple
    );
    let _ = writeln!(out, "strategy: {}", sol.strategy);
    let _ = writeln!(out, "distinct roots: {} of {}", sol.distinct_count, sol.basis_size);
    for r in &sol.roots {
        let _ = writeln!(
            out,
            "{} residual {:.3e} {}{}",
            fmt_point(&r.z),
            r.residual,
            if r.real { "real" } else { "complex" },
            if r.accepted { "" } else { " REJECTED" }
        );
    }
    for w in &sol.diagnostics.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

fn cmd_solve(path: &str, cfg: &RunConfig, io: &mut Io<'_>) -> Result<i32> {
    let sys = load_system(path, cfg, io)?;
    let sol = solve(&sys, &cfg.solver)?;
    let text = match cfg.format {
        OutputFormat::Json => json::to_string(&sol)?,
        OutputFormat::Text => solution_text(&sol),
    };
    io.emit(&text)?;
    let ok = sol.verdict.maximal && sol.roots.iter().all(|r| r.accepted);
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_from_points(index_set: &str, points: &str, cfg: &RunConfig, io: &mut Io<'_>) -> Result<i32> {
    let index_doc: Value = if index_set.trim_start().starts_with('{') {
        serde_json::from_str(index_set)?
    } else {
        io.read_json(index_set)?
    };
    let basis = index_set_from_value(&index_doc, "index_set", cfg.solver.size_cap)?;
    let nodes = points_from_value(&io.read_json(points)?)?;
    match synthesize(&basis, &nodes, cfg.solver.tol_poised) {
        Ok(synth) => {
            let text = match cfg.format {
                OutputFormat::Json => {
                    let mut doc = serde_json::to_value(&synth.system)?;
                    let map = doc.as_object_mut().expect("system serializes to an object");
                    map.insert("poisedness".into(), serde_json::to_value(&synth.poisedness)?);
                    map.insert("max_node_residual".into(), json!(synth.max_node_residual));
                    json::to_string(&doc)?
                }
                OutputFormat::Text => format!(
                    "poised: true (condition {:.3e})\nmax node residual: {:.3e}\n{}",
                    synth.poisedness.condition,
                    synth.max_node_residual,
                    json::to_string(&synth.system)?
                ),
            };
            io.emit(&text)?;
            Ok(EXIT_OK)
        }
        Err(Error::NotPoised(report)) => {
            let text = match cfg.format {
                OutputFormat::Json => json::to_string(&json!({ "poisedness": &*report }))?,
                OutputFormat::Text => format!(
                    "poised: false (sigma_min {:.3e}, sigma_max {:.3e})",
                    report.smallest_singular_value, report.largest_singular_value
                ),
            };
            io.emit(&text)?;
            Err(Error::NotPoised(report))
        }
        Err(e) => Err(e),
    }
}

/// Accepts a solve output (`{"roots":[{"z":...}]}`) or a points file (`{"n":..,"points":[...]}`).
fn roots_from_value(doc: &Value, n: usize) -> Result<Vec<Point>> {
    if let Some(roots) = doc.get("roots") {
        let list = json::array(roots, "roots")?;
        return list
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let path = format!("roots[{k}].z");
                let coords = json::scalars(json::field(r, "z", &format!("roots[{k}]"))?, &path)?;
                if coords.len() != n {
                    return Err(Error::schema(path, format!("expected {n} coordinates")));
                }
                Ok(Point::new(coords))
            })
            .collect();
    }
    let set = points_from_value(doc)?;
    if set.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: set.dim(),
        });
    }
    Ok(set.nodes().to_vec())
}

#[derive(Serialize)]
struct VerifyRow {
    index: usize,
    z: Point,
    residual: f64,
    pass: bool,
}

fn cmd_verify(system: &str, roots: &str, cfg: &RunConfig, io: &mut Io<'_>) -> Result<i32> {
    let sys = load_system(system, cfg, io)?;
    let points = roots_from_value(&io.read_json(roots)?, sys.dim())?;
    let tol = cfg.solver.tol_accept;
    let rows: Vec<VerifyRow> = points
        .into_iter()
        .enumerate()
        .map(|(index, z)| {
            let residual = sys.residual(&z);
            VerifyRow {
                index,
                z,
                residual,
                pass: residual <= tol,
            }
        })
        .collect();
    let all_pass = rows.iter().all(|r| r.pass);
    let text = match cfg.format {
        OutputFormat::Json => json::to_string(&json!({
            "tol_accept": tol,
            "rows": rows,
            "all_pass": all_pass,
        }))?,
        OutputFormat::Text => {
            let mut out = String::new();
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:>4} {} {:.3e} {}",
                    r.index,
                    fmt_point(&r.z),
                    r.residual,
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
            let _ = writeln!(out, "all pass: {all_pass}");
            out
        }
    };
    io.emit(&text)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_matrices(path: &str, cfg: &RunConfig, io: &mut Io<'_>) -> Result<i32> {
    let sys = load_system(path, cfg, io)?;
    let fam = build_family(&sys)?;
    let text = match cfg.format {
        OutputFormat::Json => json::to_string(&fam.doc())?,
        OutputFormat::Text => {
            let mut out = String::new();
            let basis: Vec<String> = fam.basis.members().iter().map(|b| b.to_string()).collect();
            let _ = writeln!(out, "basis: {}", basis.join(" "));
            for (i, a) in fam.matrices.iter().enumerate() {
                let _ = writeln!(out, "A_{}:", i + 1);
                for row in a.row_iter() {
                    let cells: Vec<String> = row.iter().map(fmt_scalar).collect();
                    let _ = writeln!(out, "  [{}]", cells.join(", "));
                }
            }
            out
        }
    };
    io.emit(&text)?;
    Ok(EXIT_OK)
}
