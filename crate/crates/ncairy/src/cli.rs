//! The `ncairy` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::config::{parse_list, PartialConfig, RunConfig, CONFIG_ENV};
use crate::error::{Error, Result};
use crate::fredholm::DetResult;
use crate::ncp2::hm_solve;
use crate::table::{complex_cells, matrix_cells, matrix_columns, write_table, Cell, Format, Table};
use crate::tw::{
    det_airy, det_airy_from_grid, det_airy_sq, det_contour, existence_scan, GapQuery, GapResult, Route, ScalarTw,
    SCAN_POINTS,
};
use crate::verify::{self, Check};

#[derive(Parser, Debug)]
#[command(
    name = "ncairy",
    version,
    about = "Matrix Airy Fredholm determinants and noncommutative Painleve II / XXXIV"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// One determinant by the chosen route(s)
    Det,
    /// Hastings-McLeod samples of beta1 and D beta1
    HmSolve,
    /// Table of F1 over an x-range
    F1,
    /// Table of F2 over an x-range
    F2,
    /// det(Id - Ai^2) along s = (s, ..., s) with the first sign change
    Scan,
    /// Run the named checks and report PASS/FAIL for each
    Verify {
        /// Run only this check
        #[arg(long)]
        only: Option<String>,
        /// List check names and exit
        #[arg(long)]
        list: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// det(Id + sign Ai_s)
    Airy,
    /// det(Id - Ai_s^2)
    Airy2,
    /// det(Id + sign K) on the complex contour
    Contour,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Nystrom,
    Painleve,
    Both,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Nystrom => Route::Nystrom,
            RouteArg::Painleve => Route::Painleve,
            RouteArg::Both => Route::Both,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    /// Number of levels
    #[arg(long, global = true)]
    pub r: Option<usize>,
    /// Shifts s_1..s_r, comma separated
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub shifts: Option<String>,
    /// Real part of C, row-major, comma separated
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub coupling: Option<String>,
    /// Imaginary part of C, row-major, comma separated
    #[arg(long = "coupling-im", global = true, allow_hyphen_values = true)]
    pub coupling_im: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub kind: Option<Kind>,
    /// +1 or -1
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_sign)]
    pub sign: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub route: Option<RouteArg>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Initial quadrature nodes (per level, or per ray on the contour)
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Half-line cutoff
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,
    /// Start of the Picard region
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub s0: Option<f64>,
    /// Agreement tolerance between routes
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// key = value configuration file (fallback: NCAIRY_CONFIG)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_sign(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "+1" | "1" | "+" => Ok(1.0),
        "-1" | "-" => Ok(-1.0),
        other => Err(format!("sign must be +1 or -1, got '{other}'")),
    }
}

pub const DEFAULT_AGREEMENT_TOL: f64 = 1e-6;

impl Opts {
    fn flag_config(&self) -> Result<PartialConfig> {
        let list = |s: &Option<String>| s.as_deref().map(parse_list).transpose();
        Ok(PartialConfig {
            r: self.r,
            shifts: list(&self.shifts)?,
            coupling_re: list(&self.coupling)?,
            coupling_im: list(&self.coupling_im)?,
            quad_nodes: self.nodes,
            quad_cutoff: self.cutoff,
            hm_s0: self.s0,
            output_format: self.format,
            seed: self.seed,
            ..Default::default()
        })
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let path = self.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let file = match path {
            Some(p) => PartialConfig::from_file(&p)
                .map_err(|e| Error::InvalidInput(format!("config {}: {e}", p.display())))?,
            None => PartialConfig::default(),
        };
        file.overlay(self.flag_config()?).resolve()
    }
}

/// Output plus whether every emitted check held.
struct Outcome {
    bytes: Vec<u8>,
    ok: bool,
    notes: Vec<String>,
}

fn table_outcome(t: &Table, format: Format, ok: bool, notes: Vec<String>) -> Result<Outcome> {
    let mut bytes = Vec::new();
    write_table(t, format, &mut bytes)?;
    Ok(Outcome { bytes, ok, notes })
}

fn range(opts: &Opts, from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    let (a, b, h) = (opts.from.unwrap_or(from), opts.to.unwrap_or(to), opts.step.unwrap_or(step));
    if !(a <= b) || !(h > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("bad range from {a} to {b} step {h}")));
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| a + k as f64 * h).collect())
}

fn det_cmd(opts: &Opts, cfg: &RunConfig) -> Result<Outcome> {
    let kind = opts.kind.unwrap_or(Kind::Airy2);
    let sign = opts.sign.unwrap_or(-1.0);
    let route: Route = opts.route.map(Into::into).unwrap_or(Route::Both);
    let tol = opts.tol.unwrap_or(DEFAULT_AGREEMENT_TOL);
    let s = cfg.shift_vector()?;
    let c = cfg.coupling()?;
    let q = GapQuery::new(s.clone(), c.clone(), route, crate::fredholm::DEFAULT_TOL)?
        .with_quadrature(cfg.quad_nodes, cfg.quad_cutoff)
        .with_hm(cfg.hm_options());
    let res = match kind {
        Kind::Airy2 => det_airy_sq(&q)?,
        Kind::Airy => det_airy(&q, sign)?,
        Kind::Contour => {
            let nystrom = match route {
                Route::Painleve => None,
                _ => Some(det_contour(&s, &c, Complex64::new(sign, 0.0), cfg.quad_nodes)?),
            };
            let painleve = match route {
                Route::Nystrom => None,
                _ => {
                    let g = hm_solve(&c, &s.offsets(), s.barycenter() - 0.25, &cfg.hm_options())?;
                    Some(det_airy_from_grid(&g, s.barycenter(), sign)?)
                }
            };
            GapResult { nystrom, painleve }
        }
    };
    let kind_name = match kind {
        Kind::Airy => "airy",
        Kind::Airy2 => "airy2",
        Kind::Contour => "contour",
    };
    let route_name = match route {
        Route::Nystrom => "nystrom",
        Route::Painleve => "painleve",
        Route::Both => "both",
    };
    let mut t = Table::new([
        "kind",
        "sign",
        "route",
        "re_nystrom",
        "im_nystrom",
        "re_painleve",
        "im_painleve",
        "difference",
        "nodes_used",
        "est_error",
        "converged",
    ]);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let d: Option<DetResult> = res.nystrom;
    let sign_cell = if kind == Kind::Airy2 { -1.0 } else { sign };
    let mut row = vec![kind_name.into(), Cell::Num(sign_cell), route_name.into()];
    row.extend(complex_cells(d.map_or(nan, |d| d.value)));
    row.extend(complex_cells(res.painleve.unwrap_or(nan)));
    row.push(Cell::Num(res.difference().unwrap_or(f64::NAN)));
    row.push(Cell::Int(d.map_or(0, |d| d.nodes_used as i64)));
    row.push(Cell::Num(d.map_or(f64::NAN, |d| d.est_error)));
    row.push(d.map_or(Cell::Text(String::new()), |d| Cell::Bool(d.converged)));
    t.push(row)?;
    let mut notes = Vec::new();
    let ok = match res.difference() {
        Some(diff) if !(diff <= tol) => {
            notes.push(format!("routes differ by {diff:.3e} > {tol:.1e}"));
            false
        }
        _ => true,
    };
    table_outcome(&t, cfg.output_format, ok, notes)
}

fn hm_cmd(opts: &Opts, cfg: &RunConfig) -> Result<Outcome> {
    let s = cfg.shift_vector()?;
    let c = cfg.coupling()?;
    let xs = range(opts, -1.5, cfg.hm_s0, 0.1)?;
    let lo = xs[0];
    let (grid, pole) = match hm_solve(&c, &s.offsets(), lo, &cfg.hm_options()) {
        Ok(g) => (g, None),
        Err(Error::PoleEncountered { pole_at, grid }) => (*grid, Some(pole_at)),
        Err(e) => return Err(e),
    };
    let mut cols = vec!["S".to_string()];
    cols.extend(matrix_columns("b", cfg.r));
    cols.extend(matrix_columns("db", cfg.r));
    let mut t = Table::new(cols);
    for &x in &xs {
        if pole.is_some_and(|p| x <= p + grid.step()) || x > grid.s_max() {
            continue;
        }
        let mut row = vec![Cell::Num(x)];
        row.extend(matrix_cells(&grid.beta1(x)?));
        row.extend(matrix_cells(&grid.dbeta1(x)?));
        t.push(row)?;
    }
    let notes = pole.map(|p| format!("pole encountered near S = {p:.6}")).into_iter().collect::<Vec<_>>();
    table_outcome(&t, cfg.output_format, pole.is_none(), notes)
}

fn scalar_cmd(opts: &Opts, cfg: &RunConfig, which: &str) -> Result<Outcome> {
    let xs = range(opts, -4.0, 4.0, 0.5)?;
    let tw = ScalarTw::with_options(xs[0].min(0.0) - 0.5, &cfg.hm_options())?;
    let mut t = Table::new(["x", which]);
    let mut prev = f64::NEG_INFINITY;
    let mut ok = true;
    let mut notes = Vec::new();
    for &x in &xs {
        let v = if which == "F1" { tw.f1(x)? } else { tw.f2(x)? };
        if v < prev {
            ok = false;
            notes.push(format!("{which} decreases at x = {x}"));
        }
        prev = v;
        t.push(vec![Cell::Num(x), Cell::Num(v)])?;
    }
    table_outcome(&t, cfg.output_format, ok, notes)
}

fn scan_cmd(opts: &Opts, cfg: &RunConfig) -> Result<Outcome> {
    let (a, b) = (opts.from.unwrap_or(-4.0), opts.to.unwrap_or(2.0));
    let n = match opts.step {
        Some(h) if h > 0.0 => ((b - a) / h + 1e-9).floor() as usize + 1,
        Some(h) => return Err(Error::InvalidInput(format!("step {h} must be positive"))),
        None => SCAN_POINTS,
    };
    let rep = existence_scan(&cfg.coupling()?, a, b, n)?;
    let mut t = Table::new(["s", "det"]);
    for &(s, d) in &rep.samples {
        t.push(vec![Cell::Num(s), Cell::Num(d)])?;
    }
    let note = match rep.crossing {
        Some(x) => format!("sign change at s = {x:.4}"),
        None => "no sign change".to_string(),
    };
    table_outcome(&t, cfg.output_format, true, vec![note])
}

fn verify_cmd(cfg: &RunConfig, only: Option<&str>, list: bool) -> Result<Outcome> {
    if list {
        let names: Vec<&str> = verify::CRITERIA.iter().chain(verify::INVARIANTS.iter()).map(|c| c.0).collect();
        return Ok(Outcome {
            bytes: (names.join("\n") + "\n").into_bytes(),
            ok: true,
            notes: Vec::new(),
        });
    }
    let checks: Vec<Check> = match only {
        Some(name) => {
            let (n, f) = verify::find(name).ok_or_else(|| Error::InvalidInput(format!("unknown check '{name}'")))?;
            vec![verify::run_check(n, f, cfg.seed)]
        }
        None => verify::run_suite(cfg.seed, |_| {}),
    };
    let ok = checks.iter().all(Check::passed);
    let bytes = match cfg.output_format {
        Format::Csv => {
            let mut s: String = checks.iter().map(|c| c.line() + "\n").collect();
            let n = checks.iter().filter(|c| c.passed()).count();
            s.push_str(&format!("{n}/{} checks passed\n", checks.len()));
            s.into_bytes()
        }
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&checks).map_err(std::io::Error::from)?;
            v.push(b'\n');
            v
        }
    };
    Ok(Outcome {
        bytes,
        ok,
        notes: Vec::new(),
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Domain(_) | Error::OutOfRange { .. } | Error::Io(_) => 2,
        _ => 1,
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = cli.opts.resolve()?;
    match &cli.command {
        Command::Det => det_cmd(&cli.opts, &cfg),
        Command::HmSolve => hm_cmd(&cli.opts, &cfg),
        Command::F1 => scalar_cmd(&cli.opts, &cfg, "F1"),
        Command::F2 => scalar_cmd(&cli.opts, &cfg, "F2"),
        Command::Scan => scan_cmd(&cli.opts, &cfg),
        Command::Verify { only, list } => verify_cmd(&cfg, only.as_deref(), *list),
    }
}

/// Runs one command; returns the process exit code (0 success, 1 failed
/// check or computation, 2 bad input).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let out = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.opts.out {
        Some(p) => std::fs::write(p, &out.bytes),
        None => std::io::stdout().lock().write_all(&out.bytes),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    for n in &out.notes {
        eprintln!("{n}");
    }
    if out.ok {
        0
    } else {
        1
    }
}
