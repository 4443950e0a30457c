//! The `flho` command line.
//!
//! Each run executes one subcommand and writes one CSV table or one JSON
//! document. Exit codes: 0 success, 1 usage, 2 numerical failure, 3 I/O.
//! Diagnostics go to stderr as single `key=value` lines.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{self, Regime, RegimeThresholds};
use crate::liealg::{self, FlexParams, StructureConstants};
use crate::oscillator::{spectrum, BandedHamiltonian, SpectrumOptions};
use crate::output::{json_document, Cell, Table};
use crate::su2rep::{build_generators, make_constants, Generator, OscillatorConstants};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "flho", version, about = "Finite linear harmonic oscillator on so(3) representations")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Also write a gnuplot script next to the CSV output.
    #[arg(long, global = true)]
    pub plot: bool,

    /// Worker threads; falls back to FLHO_THREADS, then all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for randomized states.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

/// Either `(l, K, κ)` or the five physical constants.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long)]
    pub l: Option<u64>,
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[command(flatten)]
    pub physical: PhysicalArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhysicalArgs {
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub hbar1: Option<f64>,
    #[arg(long)]
    pub hbar2: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub stiffness: Option<f64>,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ThresholdArgs {
    /// Soft regime when κ is at or below this (default 1/l).
    #[arg(long)]
    pub soft_threshold: Option<f64>,
    /// Hard regime when κ is at or above this (default l).
    #[arg(long)]
    pub hard_threshold: Option<f64>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Eigenvalues of H with parity and degeneracy groups.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Only the lowest N eigenvalues.
        #[arg(long)]
        lowest: Option<usize>,
        /// Eigenvectors of the lowest N states.
        #[arg(long, default_value_t = 0)]
        vectors: usize,
    },
    /// Ground energy against the regime formula and the variational bound.
    Ground {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Position/momentum spreads of a state.
    Uncertainty {
        #[command(flatten)]
        model: ModelArgs,
        /// ground | lz-top | lx-zero | index:N | random
        #[arg(long, default_value = "ground")]
        state: String,
    },
    /// Zero-point energy over a κ grid.
    Sweep {
        #[arg(long)]
        l: u64,
        #[arg(long = "K", default_value_t = 1.0)]
        k: f64,
        /// LOG:a:b:step (10^a..10^b) or LIN:a:b:step
        #[arg(long)]
        kappa_grid: String,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Deviation of the κ = 1 spectrum from the uniform ladder.
    Limit {
        #[arg(long)]
        l: u64,
        #[arg(long = "K", default_value_t = 1.0)]
        k: f64,
        /// Highest level n.
        #[arg(long)]
        levels: u64,
    },
    /// Excitation interaction Δ(n1, n2).
    Interact {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Lie-algebra stability checks.
    Algebra {
        #[command(subcommand)]
        action: AlgebraCommand,
    },
    /// Derived oscillator constants and regime.
    Constants {
        #[command(flatten)]
        physical: PhysicalArgs,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Dense generator matrix in the Lz basis.
    Matrix {
        #[arg(long)]
        l: u64,
        #[arg(long, value_enum)]
        generator: GeneratorArg,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraCommand {
    /// Structure constants from a JSON file.
    Check {
        #[arg(long)]
        file: PathBuf,
    },
    /// Deformed Heisenberg bracket with three quanta.
    Flex {
        #[arg(long)]
        hbar: f64,
        #[arg(long)]
        hbar1: f64,
        #[arg(long)]
        hbar2: f64,
    },
    /// Contract ħ′, ħ″ through decades down to zero.
    Contract {
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar1: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar2: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorArg {
    /// Lx (symmetric)
    X,
    /// i·Ly (antisymmetric)
    Y,
    /// Lz (diagonal)
    Z,
}

/// Result of one subcommand before it is written.
struct Report {
    subcommand: &'static str,
    constants: Value,
    table: Table,
    extra: Option<Value>,
    /// Extra CSV written beside `--out` (suffix, table).
    side_tables: Vec<(&'static str, Table)>,
    plot: Option<PlotSpec>,
    warnings: Vec<String>,
}

impl Report {
    fn new(subcommand: &'static str, table: Table) -> Self {
        Self {
            subcommand,
            constants: json!({}),
            table,
            extra: None,
            side_tables: Vec::new(),
            plot: None,
            warnings: Vec::new(),
        }
    }
}

struct PlotSpec {
    x: usize,
    ys: Vec<usize>,
    logx: bool,
    logy: bool,
    style: &'static str,
}

/// Parses `argv` (program name first) and runs it, writing to the process streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(argv) {
        Ok(cfg) => cfg,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let kind = format!("{:?}", e.kind());
            let _ = writeln!(stderr, "{}", diagnostic("usage", EXIT_USAGE, &kind, &e.to_string()));
            return EXIT_USAGE;
        }
    };
    match execute(&cfg, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(stderr, "{}", diagnostic("error", code, error_kind(&e), &e.to_string()));
            code
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } | Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::InvalidStructure(_) => "invalid_structure",
        Error::JacobiViolation { .. } => "jacobi_violation",
        Error::OutOfRange(_) => "out_of_range",
        Error::NoConvergence { .. } => "no_convergence",
        Error::Numerical(_) => "numerical",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// `flho: <level> code=<n> kind=<kind> message="<one line>"`
fn diagnostic(level: &str, code: i32, kind: &str, message: &str) -> String {
    let flat: Vec<&str> = message
        .lines()
        .map(str::trim)
        .filter(|s| !s.is_empty() && !s.starts_with("For more information"))
        .collect();
    let msg = flat.join(" ").replace('\\', "\\\\").replace('"', "\\\"");
    format!("flho: {level} code={code} kind={kind} message=\"{msg}\"")
}

fn thread_count(cfg: &RunConfig) -> Result<Option<usize>> {
    let n = match cfg.threads {
        Some(n) => Some(n),
        None => match std::env::var("FLHO_THREADS") {
            Ok(s) if !s.trim().is_empty() => Some(s.trim().parse::<usize>().map_err(|_| {
                Error::invalid(format!("FLHO_THREADS must be a positive integer, got {s:?}"))
            })?),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(Error::invalid("thread count must be >= 1"));
    }
    Ok(n)
}

pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    if cfg.plot {
        if cfg.out.is_none() {
            return Err(Error::invalid("--plot needs --out so the script can reference the CSV"));
        }
        if cfg.format != Format::Csv {
            return Err(Error::invalid("--plot needs --format csv"));
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cfg)? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let report = pool.install(|| dispatch(cfg))?;
    for w in &report.warnings {
        let _ = writeln!(stderr, "{}", diagnostic("warning", EXIT_OK, "warning", w));
    }
    write_report(cfg, &report, stdout)
}

fn write_report(cfg: &RunConfig, report: &Report, stdout: &mut dyn Write) -> Result<()> {
    let body = match cfg.format {
        Format::Csv => report.table.to_csv(),
        Format::Json => {
            let mut extra = report.extra.clone().unwrap_or_else(|| json!({}));
            for (suffix, t) in &report.side_tables {
                extra[*suffix] = t.to_json_rows();
            }
            json_document(report.subcommand, cfg, report.constants.clone(), &report.table, Some(extra))?
        }
    };
    match &cfg.out {
        None => {
            stdout.write_all(body.as_bytes())?;
            if cfg.format == Format::Csv {
                for (suffix, t) in &report.side_tables {
                    writeln!(stdout)?;
                    writeln!(stdout, "# {suffix}")?;
                    stdout.write_all(t.to_csv().as_bytes())?;
                }
            }
            stdout.flush()?;
        }
        Some(path) => {
            std::fs::write(path, body)?;
            if cfg.format == Format::Csv {
                for (suffix, t) in &report.side_tables {
                    std::fs::write(side_path(path, suffix), t.to_csv())?;
                }
            }
            if cfg.plot {
                let gp = script_path(path)?;
                std::fs::write(gp, gnuplot_script(path, report))?;
            }
        }
    }
    Ok(())
}

fn side_path(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(format!("{suffix}.csv"))
}

/// `<out>` with its extension replaced by `.gp`.
pub fn script_path(out: &Path) -> Result<PathBuf> {
    let gp = out.with_extension("gp");
    if gp == out {
        return Err(Error::invalid("--out must not end in .gp when --plot is given"));
    }
    Ok(gp)
}

fn gnuplot_script(csv: &Path, report: &Report) -> String {
    let header = &report.table.header;
    let spec = report.plot.as_ref().map_or_else(|| default_plot(&report.table), |p| PlotSpec {
        x: p.x,
        ys: p.ys.clone(),
        logx: p.logx,
        logy: p.logy,
        style: p.style,
    });
    let file = csv.display().to_string().replace('\\', "\\\\").replace('"', "\\\"");
    let mut s = String::new();
    s.push_str(&format!("# flho {}\n", report.subcommand));
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set xlabel \"{}\"\n", header[spec.x]));
    if spec.logx {
        s.push_str("set logscale x\n");
    }
    if spec.logy {
        s.push_str("set logscale y\n");
    }
    let series: Vec<String> = spec
        .ys
        .iter()
        .map(|&y| {
            format!(
                "\"{file}\" using {}:{} with {} title \"{}\"",
                spec.x + 1,
                y + 1,
                spec.style,
                header[y]
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
    s
}

/// Row number against the first float column.
fn default_plot(table: &Table) -> PlotSpec {
    let y = table
        .rows
        .first()
        .and_then(|r| r.iter().position(|c| matches!(c, Cell::Float(_))))
        .unwrap_or(0);
    let x = table
        .rows
        .first()
        .and_then(|r| r.iter().position(|c| matches!(c, Cell::Int(_))))
        .unwrap_or(0);
    PlotSpec {
        x,
        ys: vec![y],
        logx: false,
        logy: false,
        style: "points",
    }
}

fn dispatch(cfg: &RunConfig) -> Result<Report> {
    match &cfg.command {
        Command::Spectrum {
            model,
            lowest,
            vectors,
        } => cmd_spectrum(model, *lowest, *vectors),
        Command::Ground { model, thresholds } => cmd_ground(model, thresholds),
        Command::Uncertainty { model, state } => cmd_uncertainty(model, state, cfg.seed),
        Command::Sweep {
            l,
            k,
            kappa_grid,
            thresholds,
        } => cmd_sweep(*l, *k, kappa_grid, thresholds),
        Command::Limit { l, k, levels } => cmd_limit(*l, *k, *levels),
        Command::Interact {
            model,
            n1,
            n2,
            thresholds,
        } => cmd_interact(model, *n1, *n2, thresholds),
        Command::Algebra { action } => match action {
            AlgebraCommand::Check { file } => cmd_algebra_check(file),
            AlgebraCommand::Flex { hbar, hbar1, hbar2 } => {
                cmd_algebra_flex(FlexParams::new(*hbar, *hbar1, *hbar2))
            }
            AlgebraCommand::Contract {
                steps,
                hbar,
                hbar1,
                hbar2,
            } => cmd_algebra_contract(*steps, FlexParams::new(*hbar, *hbar1, *hbar2)),
        },
        Command::Constants {
            physical,
            thresholds,
        } => cmd_constants(physical, thresholds),
        Command::Matrix { l, generator } => cmd_matrix(*l, *generator),
    }
}

impl PhysicalArgs {
    fn any(&self) -> bool {
        self.hbar.is_some()
            || self.hbar1.is_some()
            || self.hbar2.is_some()
            || self.mass.is_some()
            || self.stiffness.is_some()
    }

    fn resolve(&self) -> Result<OscillatorConstants> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::invalid(format!("--{name} is required with physical constants")))
        };
        make_constants(
            need(self.hbar, "hbar")?,
            need(self.hbar1, "hbar1")?,
            need(self.hbar2, "hbar2")?,
            need(self.mass, "mass")?,
            need(self.stiffness, "stiffness")?,
        )
    }
}

impl ModelArgs {
    /// Oscillator constants from whichever parameterization was given.
    fn resolve(&self) -> Result<OscillatorConstants> {
        if self.physical.any() {
            if self.k.is_some() || self.kappa.is_some() {
                return Err(Error::invalid(
                    "give either --K/--kappa or the physical constants, not both",
                ));
            }
            let c = self.physical.resolve()?;
            if let Some(l) = self.l {
                if l != c.l {
                    return Err(Error::invalid(format!(
                        "--l {l} disagrees with l = {} from hbar1, hbar2",
                        c.l
                    )));
                }
            }
            return Ok(c);
        }
        let l = self.l.ok_or_else(|| Error::invalid("--l is required"))?;
        let k = self.k.ok_or_else(|| Error::invalid("--K is required"))?;
        let kappa = self.kappa.ok_or_else(|| Error::invalid("--kappa is required"))?;
        OscillatorConstants::from_model(l, k, kappa, 1.0)
    }
}

impl ThresholdArgs {
    fn resolve(&self, l: u64) -> Result<RegimeThresholds> {
        let mut t = RegimeThresholds::for_l(l);
        if let Some(s) = self.soft_threshold {
            t.soft = s;
        }
        if let Some(h) = self.hard_threshold {
            t.hard = h;
        }
        if !(t.soft >= 0.0 && t.soft <= t.hard && t.hard.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 <= soft threshold <= hard threshold, got {} and {}",
                t.soft, t.hard
            )));
        }
        Ok(t)
    }
}

fn constants_json(c: &OscillatorConstants) -> Value {
    serde_json::to_value(c).unwrap_or(Value::Null)
}

fn model_report(name: &'static str, table: Table, c: &OscillatorConstants) -> Report {
    let mut r = Report::new(name, table);
    r.constants = constants_json(c);
    if let Some(w) = &c.warning {
        r.warnings.push(w.clone());
    }
    r
}

fn cmd_spectrum(model: &ModelArgs, lowest: Option<usize>, vectors: usize) -> Result<Report> {
    let c = model.resolve()?;
    let h = BandedHamiltonian::new(c.l, c.k_energy, c.kappa)?;
    let s = spectrum(
        &h,
        SpectrumOptions {
            lowest,
            vectors,
            group_tol: None,
        },
    )?;
    let mut t = Table::new(["index", "energy", "parity", "multiplicity_group", "multiplicity"]);
    for (i, &e) in s.eigenvalues.iter().enumerate() {
        let g = s.group_of[i];
        t.push(vec![
            i.into(),
            e.into(),
            s.parities[i].as_str().into(),
            g.into(),
            s.groups[g].multiplicity.into(),
        ]);
    }
    let mut r = model_report("spectrum", t, &c);
    r.extra = Some(json!({
        "complete": s.complete,
        "group_tol": s.group_tol,
        "norm_inf": h.norm_inf(),
    }));
    if vectors > 0 {
        let mut vt = Table::new(["state", "energy", "m", "component", "residual"]);
        for st in &s.vectors {
            let res = h.residual(st.energy, &st.components);
            for (j, &x) in st.components.iter().enumerate() {
                vt.push(vec![
                    st.index.into(),
                    st.energy.into(),
                    Cell::Int(c.l as i64 - j as i64),
                    x.into(),
                    res.into(),
                ]);
            }
        }
        r.side_tables.push(("vectors", vt));
    }
    r.plot = Some(PlotSpec {
        x: 0,
        ys: vec![1],
        logx: false,
        logy: false,
        style: "points",
    });
    if !s.complete {
        if let Some(w) = incomplete_group_warning(&s) {
            r.warnings.push(w);
        }
    }
    Ok(r)
}

fn incomplete_group_warning(s: &crate::oscillator::SpectrumResult) -> Option<String> {
    let last = s.groups.last()?;
    Some(format!(
        "partial spectrum: multiplicity of the highest group (energy {}) may be truncated",
        last.value
    ))
}

fn cmd_ground(model: &ModelArgs, thresholds: &ThresholdArgs) -> Result<Report> {
    let c = model.resolve()?;
    let th = thresholds.resolve(c.l)?;
    let diag = analysis::classify_kappa(c.kappa, th);
    let (e0, _) = analysis::ground_state(c.l, c.k_energy, c.kappa)?;
    let formula = analysis::zero_point_formula(c.l, c.k_energy, c.kappa, diag.regime);
    let bound = analysis::variational_bound(c.l, c.k_energy, c.kappa)?;
    let hw_half = 0.5 * c.hbar_omega();
    let half_kl = 0.5 * c.k_energy * c.l as f64;
    let mut t = Table::new([
        "l",
        "K",
        "kappa",
        "regime",
        "e0_numerical",
        "e0_formula",
        "variational_bound",
        "half_kl",
        "hbar_omega_half",
        "e0_over_formula",
        "e0_over_hbar_omega_half",
    ]);
    t.push(vec![
        c.l.into(),
        c.k_energy.into(),
        c.kappa.into(),
        diag.regime.as_str().into(),
        e0.into(),
        formula.into(),
        bound.numerical.into(),
        half_kl.into(),
        hw_half.into(),
        (e0 / formula).into(),
        (e0 / hw_half).into(),
    ]);
    let mut r = model_report("ground", t, &c);
    if e0 > half_kl {
        r.warnings.push(format!(
            "ground energy {e0} exceeds Kl/2 = {half_kl}; only (K/4)(1+kappa^2)l = {} bounds it for kappa != 1",
            bound.numerical
        ));
    }
    r.extra = Some(json!({ "regime": diag }));
    Ok(r)
}

fn cmd_uncertainty(model: &ModelArgs, state: &str, seed: u64) -> Result<Report> {
    let c = model.resolve()?;
    let rep = build_generators(c.l)?;
    let v = match state {
        "ground" => analysis::ground_state(c.l, c.k_energy, c.kappa)?.1,
        "lz-top" => analysis::lz_state(&rep, c.l as i64)?,
        "lx-zero" => analysis::lx_zero_state(&rep)?,
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<f64> = (0..rep.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            v
        }
        other => {
            let idx: usize = other
                .strip_prefix("index:")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "--state must be ground, lz-top, lx-zero, random or index:N, got {other:?}"
                    ))
                })?;
            let h = BandedHamiltonian::new(c.l, c.k_energy, c.kappa)?;
            if idx >= h.dim() {
                return Err(Error::OutOfRange(format!(
                    "state index {idx} outside 0..{}",
                    h.dim()
                )));
            }
            let s = spectrum(
                &h,
                SpectrumOptions {
                    lowest: Some(idx + 1),
                    vectors: idx + 1,
                    group_tol: None,
                },
            )?;
            s.vectors.into_iter().nth(idx).expect("requested vector").components
        }
    };
    let u = analysis::uncertainty_product(&rep, &c, state, &v)?;
    let eq = analysis::equipartition_ratio(&rep, c.k_energy, c.kappa, &v)?;
    let mut t = Table::new([
        "state",
        "mean_lx",
        "mean_lz",
        "delta_lx",
        "delta_ly",
        "delta_p",
        "delta_q",
        "product",
        "robertson_bound",
        "product_over_hbar_half",
        "kinetic_over_potential",
    ]);
    t.push(vec![
        u.state.clone().into(),
        u.mean_lx.into(),
        u.mean_lz.into(),
        u.delta_lx.into(),
        u.delta_ly.into(),
        u.delta_p.into(),
        u.delta_q.into(),
        u.product.into(),
        u.robertson_bound.into(),
        u.hbar_half_ratio.into(),
        eq.into(),
    ]);
    Ok(model_report("uncertainty", t, &c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Log,
    Lin,
}

/// Parses `LOG:a:b:step` (values `10^a … 10^b`) or `LIN:a:b:step`.
pub fn parse_grid(spec: &str) -> Result<(GridKind, Vec<f64>)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::invalid(format!("kappa grid must be LOG:a:b:step or LIN:a:b:step, got {spec:?}"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let kind = match parts[0].to_ascii_uppercase().as_str() {
        "LOG" => GridKind::Log,
        "LIN" => GridKind::Lin,
        _ => return Err(bad()),
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let (a, b, step) = (num(parts[1])?, num(parts[2])?, num(parts[3])?);
    if !(a.is_finite() && b.is_finite() && step.is_finite() && step > 0.0 && a <= b) {
        return Err(Error::invalid(format!("kappa grid needs a <= b and step > 0, got {spec:?}")));
    }
    let count = ((b - a) / step * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::invalid(format!("kappa grid has {count} points")));
    }
    let values = (0..count)
        .map(|i| {
            let x = a + i as f64 * step;
            match kind {
                GridKind::Lin => x,
                GridKind::Log => {
                    let r = x.round();
                    if (x - r).abs() < 1e-9 {
                        // exact decimal powers for integer exponents
                        format!("1e{}", r as i64).parse().expect("valid float")
                    } else {
                        10f64.powf(x)
                    }
                }
            }
        })
        .collect::<Vec<f64>>();
    if values.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("kappa grid values must be >= 0"));
    }
    Ok((kind, values))
}

fn cmd_sweep(l: u64, k: f64, grid: &str, thresholds: &ThresholdArgs) -> Result<Report> {
    let (kind, kappas) = parse_grid(grid)?;
    let th = thresholds.resolve(l)?;
    let rows = analysis::zero_point_sweep(l, k, &kappas, Some(th))?;
    let mut t = Table::new([
        "kappa",
        "regime",
        "e0_numerical",
        "e0_formula",
        "hbar_omega_half",
        "e0_over_hbar_omega_half",
    ]);
    for r in &rows {
        t.push(vec![
            r.kappa.into(),
            r.regime.as_str().into(),
            r.numerical.into(),
            r.formula.into(),
            r.hbar_omega_half.into(),
            r.ratio.into(),
        ]);
    }
    let mut rep = Report::new("sweep", t);
    rep.constants = json!({ "l": l, "K": k, "thresholds": th });
    let log = kind == GridKind::Log;
    rep.plot = Some(PlotSpec {
        x: 0,
        ys: vec![2, 3, 4],
        logx: log && kappas.iter().all(|&v| v > 0.0),
        logy: log && rows.iter().all(|r| r.numerical > 0.0 && r.formula > 0.0 && r.hbar_omega_half > 0.0),
        style: "linespoints",
    });
    Ok(rep)
}

fn cmd_limit(l: u64, k: f64, levels: u64) -> Result<Report> {
    let rows = analysis::qho_limit_numerical(l, k, levels)?;
    let mut t = Table::new([
        "n",
        "closed_form",
        "numerical",
        "qho",
        "delta",
        "delta_predicted",
        "delta_numerical",
    ]);
    for r in &rows {
        t.push(vec![
            r.n.into(),
            r.closed_form.into(),
            r.numerical.unwrap_or(f64::NAN).into(),
            r.qho.into(),
            r.deviation.into(),
            r.predicted.into(),
            r.numerical_deviation.unwrap_or(f64::NAN).into(),
        ]);
    }
    let mut rep = Report::new("limit", t);
    rep.constants = json!({ "l": l, "K": k, "hbar_omega": k * l as f64 });
    rep.plot = Some(PlotSpec {
        x: 0,
        ys: vec![4, 5],
        logx: false,
        logy: false,
        style: "linespoints",
    });
    Ok(rep)
}

/// Closed-form or first-order levels `0..count` for the regime, if one applies.
fn formula_levels(c: &OscillatorConstants, regime: Regime, count: usize) -> Result<Option<Vec<f64>>> {
    let top = (count as u64).saturating_sub(1).min(2 * c.l);
    let m_top = top.min(c.l) as i64;
    Ok(match regime {
        Regime::Soft => Some(
            analysis::soft_perturbative(c.l, c.k_energy, c.kappa, 0..=m_top)?
                .levels
                .into_iter()
                .map(|(_, e)| e)
                .collect(),
        ),
        Regime::Hard => Some(
            analysis::hard_perturbative(c.l, c.k_energy, c.kappa, 0..=m_top)?
                .levels
                .into_iter()
                .map(|(_, e)| e)
                .collect(),
        ),
        Regime::Medium if c.kappa == 1.0 => Some(analysis::medium_closed_form(c.l, c.k_energy, top)?),
        Regime::Medium => None,
    })
}

fn cmd_interact(model: &ModelArgs, n1: usize, n2: usize, thresholds: &ThresholdArgs) -> Result<Report> {
    let c = model.resolve()?;
    let th = thresholds.resolve(c.l)?;
    let regime = analysis::classify_kappa(c.kappa, th).regime;
    let count = n1 + n2 + 1;
    let levels = analysis::numerical_levels_with(c.l, c.k_energy, c.kappa, count, th)?;
    let numerical = analysis::excitation_interaction(&levels, n1, n2)?;
    let formula = match formula_levels(&c, regime, count)? {
        Some(f) => analysis::excitation_interaction(&f, n1, n2).unwrap_or(f64::NAN),
        None => f64::NAN,
    };
    let e1 = levels.get(1).map_or(f64::NAN, |e| e - levels[0]);
    let mut t = Table::new([
        "n1",
        "n2",
        "regime",
        "delta_numerical",
        "delta_formula",
        "e1_numerical",
        "level_tol",
    ]);
    t.push(vec![
        n1.into(),
        n2.into(),
        regime.as_str().into(),
        numerical.into(),
        formula.into(),
        e1.into(),
        analysis::level_tolerance(c.l, c.k_energy, c.kappa, regime).into(),
    ]);
    let mut r = model_report("interact", t, &c);
    r.extra = Some(json!({ "levels": levels }));
    Ok(r)
}

fn stability_table(rep: &liealg::StabilityReport) -> Table {
    let mut t = Table::new([
        "dim",
        "jacobi_defect",
        "killing_det",
        "killing_rank",
        "verdict",
        "radical_dim_estimate",
        "signature_positive",
        "signature_negative",
        "signature_zero",
        "killing",
    ]);
    let killing = serde_json::to_string(&rep.killing).unwrap_or_default();
    t.push(vec![
        rep.killing.len().into(),
        rep.jacobi_defect.into(),
        rep.killing_det.into(),
        rep.killing_rank.into(),
        rep.verdict.to_string().into(),
        rep.radical_dim_estimate.into(),
        rep.signature.positive.into(),
        rep.signature.negative.into(),
        rep.signature.zero.into(),
        killing.into(),
    ]);
    t
}

fn check_jacobi(sc: &StructureConstants) -> Result<()> {
    // killing_form rejects brackets that fail the Jacobi identity
    liealg::killing_form(sc).map(|_| ())
}

fn cmd_algebra_check(file: &Path) -> Result<Report> {
    let sc = StructureConstants::from_json_file(file)?;
    check_jacobi(&sc)?;
    let rep = liealg::semisimplicity_report(&sc, liealg::RANK_TOL);
    let mut r = Report::new("algebra-check", stability_table(&rep));
    r.constants = json!({ "file": file.display().to_string() });
    Ok(r)
}

fn cmd_algebra_flex(p: FlexParams) -> Result<Report> {
    let sc = liealg::flex_heisenberg(p)?;
    let rep = liealg::semisimplicity_report(&sc, liealg::RANK_TOL);
    let mut r = Report::new("algebra-flex", stability_table(&rep));
    r.constants = serde_json::to_value(p)?;
    Ok(r)
}

fn cmd_algebra_contract(steps: usize, base: FlexParams) -> Result<Report> {
    let scales = liealg::decade_scales(steps)?;
    let traj = liealg::contraction_trajectory(base, &scales)?;
    let mut t = Table::new(["step", "scale", "killing_det", "abs_killing_det", "killing_rank", "verdict"]);
    for (i, s) in traj.iter().enumerate() {
        t.push(vec![
            i.into(),
            s.scale_hbar1.into(),
            s.killing_det.into(),
            s.killing_det.abs().into(),
            s.killing_rank.into(),
            s.verdict.to_string().into(),
        ]);
    }
    let mut r = Report::new("algebra-contract", t);
    r.constants = serde_json::to_value(base)?;
    r.plot = Some(PlotSpec {
        x: 0,
        ys: vec![3],
        logx: false,
        logy: false,
        style: "linespoints",
    });
    Ok(r)
}

fn cmd_constants(physical: &PhysicalArgs, thresholds: &ThresholdArgs) -> Result<Report> {
    let c = physical.resolve()?;
    let th = thresholds.resolve(c.l)?;
    let diag = analysis::classify_kappa(c.kappa, th);
    let mut t = Table::new([
        "hbar", "hbar1", "hbar2", "mass", "stiffness", "Q", "P", "J", "l", "K", "kappa", "omega",
        "hbar_omega", "rescale", "regime",
    ]);
    t.push(vec![
        c.hbar.into(),
        c.hbar1.into(),
        c.hbar2.into(),
        c.mass.into(),
        c.stiffness.into(),
        c.q.into(),
        c.p.into(),
        c.j.into(),
        c.l.into(),
        c.k_energy.into(),
        c.kappa.into(),
        c.omega.into(),
        c.hbar_omega().into(),
        c.rescale.into(),
        diag.regime.as_str().into(),
    ]);
    let mut r = model_report("constants", t, &c);
    r.extra = Some(json!({ "regime": diag }));
    Ok(r)
}

fn cmd_matrix(l: u64, which: GeneratorArg) -> Result<Report> {
    let rep = build_generators(l)?;
    let m = match which {
        GeneratorArg::X => rep.dense_sx()?,
        GeneratorArg::Y => rep.dense_ay()?,
        GeneratorArg::Z => rep.dense_dz()?,
    };
    let n = rep.dim();
    let header: Vec<String> = std::iter::once("m".to_string())
        .chain((0..n).map(|j| format!("m{}", rep.m_of(j))))
        .collect();
    let mut t = Table::new(header);
    for r in 0..n {
        let mut row = vec![Cell::Int(rep.m_of(r))];
        row.extend((0..n).map(|c| Cell::Float(m[(r, c)])));
        t.push(row);
    }
    let mut out = Report::new("matrix", t);
    let generator = match which {
        GeneratorArg::X => Generator::Sx,
        GeneratorArg::Y => Generator::Ay,
        GeneratorArg::Z => Generator::Dz,
    };
    out.constants = json!({ "l": l, "generator": generator });
    Ok(out)
}
