//! The `corona-lab` command line: config loading, subcommands, JSON and CSV
//! emission, exit codes.
//!
//! Exit codes: `0` success, `2` a proven inequality failed numerically,
//! `3` invalid input or regime.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::continuation::{
    border_curves, cut_paste_build, lift_boundary, model_monodromy, monodromy_loop, record_crossings, topology,
    BorderCurve, PathSpec,
};
use crate::corona::{baseline_solution, eval_candidate, eval_data, sweep_csv, verify_data, Ansatz};
use crate::error::Error;
use crate::geometry::hole_disc;
use crate::interp::{choose_root_order, AnnulusRegime};
use crate::minimax::{solve_corona, solve_interp, CoronaSolveOptions};
use crate::params::{validate_chain, Mode, Params};
use crate::surface::{fmt_f64, sample_surface, SurfaceForm, SurfacePoint};
use crate::trace::{certify_lb, trace_consistency_check, QuadratureOptions, TraceFunction};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: io::Error },
    #[error("malformed config: {0}")]
    Config(#[from] serde_json::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
    /// The command ran and printed its output but a check failed.
    #[error("{0}")]
    Failed(String, i32),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::DataViolation { .. } | Error::InvariantViolation(_) | Error::NonConvergence { .. }) => {
                EXIT_VIOLATION
            }
            CliError::Failed(_, code) => *code,
            _ => EXIT_INVALID,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "corona-lab", version, about = "Corona certificates and solvers on explicit bordered Riemann surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for JSON and CSV artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Starting node count (power of two) for Cauchy quadrature.
    #[arg(long = "quad-nodes", global = true)]
    pub quad_nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Parameter chain and its inequality report.
    Params,
    /// Sample the surface and check the corona data bounds.
    Verify,
    /// Lower bounds on the norm of any corona solution.
    Certify,
    /// Trace of the exact witness and Cauchy reconstruction checks.
    TraceCheck,
    /// Minimax search for a small Bezout solution.
    SolveCorona,
    /// Minimax search for a small annulus interpolant.
    SolveInterp,
    /// Loop monodromy, slit model and topology.
    Monodromy,
    /// Every command, artifacts written to --out.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Verify => "verify",
            Command::Certify => "certify",
            Command::TraceCheck => "trace-check",
            Command::SolveCorona => "solve-corona",
            Command::SolveInterp => "solve-interp",
            Command::Monodromy => "monodromy",
            Command::Report => "report",
        }
    }
}

fn default_mode() -> Mode {
    Mode::DeltaChain
}
fn default_samples() -> usize {
    10_000
}
fn default_quad_nodes() -> usize {
    64
}
fn default_ansatz() -> Ansatz {
    Ansatz::new(2, 1)
}
fn default_boundary_nodes() -> usize {
    64
}
fn default_form() -> SurfaceForm {
    SurfaceForm::Reciprocal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default = "default_form")]
    pub form: SurfaceForm,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
    #[serde(default = "default_ansatz")]
    pub ansatz: Ansatz,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interp_n: Option<u32>,
    /// Laurent half-width of the interpolation ansatz.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub interp_k: Option<u32>,
    /// Bezout equality rows; absent takes every independent row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collocation: Option<usize>,
    /// Border nodes per curve and sheet (corona) or per circle (interpolation).
    #[serde(default = "default_boundary_nodes")]
    pub boundary_nodes: usize,
    /// Extra closed loops for `monodromy`, as `[re, im]` vertex lists.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loops: Vec<Vec<[f64; 2]>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Command-line flags take precedence over the file.
    pub fn apply_overrides(&mut self, cli: &Cli) {
        if let Some(s) = cli.seed {
            self.seed = s;
        }
        if let Some(s) = cli.samples {
            self.samples = s;
        }
        if let Some(q) = cli.quad_nodes {
            self.quad_nodes = q;
        }
    }

    /// SHA-256 of the canonical JSON of the effective config.
    pub fn hash(&self) -> String {
        let text = to_json_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn params(&self) -> CliResult<Params> {
        let p = match self.mode {
            Mode::DeltaChain => {
                let (delta, m) = match (self.delta, self.m) {
                    (Some(delta), Some(m)) => (delta, m),
                    _ => return Err(CliError::Usage("delta-chain mode needs delta and M".into())),
                };
                match self.n {
                    Some(n) => Params::delta_chain_with_n(delta, m, n)?,
                    None => Params::delta_chain(delta, m)?,
                }
            }
            Mode::Direct => {
                let (n, c, d) = match (self.n, self.c, self.d) {
                    (Some(n), Some(c), Some(d)) => (n, c, d),
                    _ => return Err(CliError::Usage("direct mode needs n, c and d".into())),
                };
                match self.delta {
                    Some(delta) => Params::direct_with_delta(n, c, d, delta, self.m)?,
                    None => Params::direct(n, c, d)?,
                }
            }
        };
        Ok(p)
    }

    fn quadrature(&self) -> QuadratureOptions {
        QuadratureOptions {
            start_nodes: self.quad_nodes,
            ..QuadratureOptions::default()
        }
    }

    fn annulus(&self) -> CliResult<(AnnulusRegime, u32)> {
        let eps = self.eps.unwrap_or(0.05);
        let n = self.interp_n.unwrap_or(5);
        Ok((AnnulusRegime::new(eps, n)?, self.interp_k.unwrap_or(12)))
    }
}

/// JSON formatter that prints every float with 17 significant digits.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config_hash: &'a str,
    config: &'a RunConfig,
    result: T,
}

/// What a command produced: the stdout JSON plus named artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub json: String,
    pub files: Vec<(String, String)>,
    /// Set when the run printed a result but a check failed.
    pub failure: Option<(String, i32)>,
}

fn envelope<T: Serialize>(cmd: Command, cfg: &RunConfig, hash: &str, result: &T) -> CliResult<String> {
    let mut s = to_json_string(&Envelope {
        command: cmd.name(),
        config_hash: hash,
        config: cfg,
        result,
    })?;
    s.push('\n');
    Ok(s)
}

fn csv_with_hash(hash: &str, body: &str) -> String {
    format!("# config_hash={hash}\n{body}")
}

#[derive(Serialize)]
struct ParamsResult {
    params: Params,
    validation: crate::params::ValidationReport,
    shape: crate::params::ShapeDiagnostics,
}

fn cmd_params(cfg: &RunConfig, hash: &str) -> CliResult<Output> {
    let p = cfg.params()?;
    let validation = validate_chain(&p);
    let failure = if validation.pass {
        None
    } else {
        let names: Vec<_> = validation.failed_links().map(|l| l.name.clone()).collect();
        Some((format!("parameter chain broken at: {}", names.join(", ")), EXIT_INVALID))
    };
    let result = ParamsResult {
        shape: p.shape_diagnostics(),
        params: p,
        validation,
    };
    Ok(Output {
        json: envelope(Command::Params, cfg, hash, &result)?,
        files: Vec::new(),
        failure,
    })
}

fn cmd_verify(cfg: &RunConfig, hash: &str) -> CliResult<Output> {
    let p = cfg.params()?;
    let samples = sample_surface(&p, cfg.samples, cfg.seed)?;
    let report = verify_data(&samples, &p)?;
    let csv = csv_with_hash(hash, &sweep_csv(&samples, &p)?);
    Ok(Output {
        json: envelope(Command::Verify, cfg, hash, &report)?,
        files: vec![("sweep.csv".into(), csv)],
        failure: None,
    })
}

fn cmd_certify(cfg: &RunConfig, hash: &str) -> CliResult<Output> {
    let p = cfg.params()?;
    let cert = certify_lb(&p)?;
    Ok(Output {
        json: envelope(Command::Certify, cfg, hash, &cert)?,
        files: Vec::new(),
        failure: None,
    })
}

#[derive(Serialize)]
struct TraceCheckResult {
    f_c_direct: Complex64,
    f_c_cauchy: Complex64,
    cauchy_nodes: usize,
    test_points: usize,
    /// Largest gap between direct and Cauchy values, per test function.
    discrepancies: Vec<(String, f64)>,
}

/// Seeded points in `A`, at least `0.1(1 - d)` inside both borders.
pub fn trace_test_points(p: &Params, count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 0.1 * (1.0 - p.d);
    let (lo, hi) = (p.d + margin, 1.0 - margin);
    (0..count)
        .map(|_| Complex64::from_polar(lo + (hi - lo) * rng.random::<f64>(), 2.0 * PI * rng.random::<f64>()))
        .collect()
}

fn cmd_trace_check(cfg: &RunConfig, hash: &str) -> CliResult<Output> {
    let p = cfg.params()?;
    let base = baseline_solution(&p)?;
    let witness = |pt: &SurfacePoint| -> crate::Result<Complex64> {
        Ok(eval_data(pt, &p)?.f1 * eval_candidate(&base, pt, &p)?.g1)
    };
    let opts = cfg.quadrature();
    let c = Complex64::new(p.c, 0.0);
    let f_c_direct = TraceFunction::new(witness, &p)?.value(c)?;
    let cauchy = TraceFunction::new(witness, &p)?.cauchy(c, opts)?;
    let points = trace_test_points(&p, 20, cfg.seed);
    let mut discrepancies = vec![(
        "F1*G1 (baseline)".to_string(),
        trace_consistency_check(witness, &p, &points, opts)?,
    )];
    discrepancies.push(("z1".into(), trace_consistency_check(|pt| Ok(pt.z1), &p, &points, opts)?));
    discrepancies.push((
        "z1^2*z2".into(),
        trace_consistency_check(|pt| Ok(pt.z1 * pt.z1 * pt.z2), &p, &points, opts)?,
    ));
    let result = TraceCheckResult {
        f_c_direct,
        f_c_cauchy: cauchy.value,
        cauchy_nodes: cauchy.nodes,
        test_points: points.len(),
        discrepancies,
    };
    let bad = (result.f_c_direct - 1.0).norm() > 1e-12 || (result.f_c_cauchy - 1.0).norm() > 1e-10;
    Ok(Output {
        json: envelope(Command::TraceCheck, cfg, hash, &result)?,
        files: Vec::new(),
        failure: bad.then(|| ("trace of the exact witness is not 1 at c".to_string(), EXIT_VIOLATION)),
    })
}

fn cmd_solve_corona(cfg: &RunConfig, hash: &str) -> CliResult<Output> {
    let p = cfg.params()?;
    let opts = CoronaSolveOptions {
        form: cfg.form,
        collocation: cfg.collocation,
        boundary_nodes: cfg.boundary_nodes,
        seed: cfg.seed,
        ..CoronaSolveOptions::default()
    };
    let res = solve_corona(&p, cfg.ansatz, &opts, None)?;
    // a feasible candidate below its certified floor contradicts the theorem
    let failure = (res.feasible && res.solution.measured_norm_g1 < 0.9 * res.certified_floor).then(|| {
        (
            format!(
                "measured norm {} below 0.9 x certified floor {}",
                res.solution.measured_norm_g1, res.certified_floor
            ),
            EXIT_VIOLATION,
        )
    });
    let solution = envelope(Command::SolveCorona, cfg, hash, &res.solution)?;
    Ok(Output {
        json: envelope(Command::SolveCorona, cfg, hash, &res)?,
        files: vec![("solution.json".into(), solution)],
        failure,
    })
}

fn cmd_solve_interp(cfg: &RunConfig, hash: &str) -> CliResult<Output> {
    let (r, k) = cfg.annulus()?;
    let res = solve_interp(&r, k, cfg.boundary_nodes, None)?;
    let failure = (res.achieved_norm < 0.98 * res.lb || (res.trace_check - 0.25).norm() > 1e-8).then(|| {
        (
            format!(
                "interpolant norm {} or trace {} violates the bound {}",
                res.achieved_norm, res.trace_check, res.lb
            ),
            EXIT_VIOLATION,
        )
    });
    #[derive(Serialize)]
    struct WithOrder<'a> {
        #[serde(flatten)]
        res: &'a crate::minimax::InterpResult,
        root_order: crate::interp::RootOrder,
        delta0: f64,
    }
    let result = WithOrder {
        res: &res,
        root_order: choose_root_order(r.n)?,
        delta0: crate::interp::delta0(&r, 4096),
    };
    Ok(Output {
        json: envelope(Command::SolveInterp, cfg, hash, &result)?,
        files: Vec::new(),
        failure,
    })
}

#[derive(Serialize)]
struct LoopReport {
    name: String,
    vertices: usize,
    offset: u32,
    model_offset: u32,
    crossings: Vec<crate::continuation::Crossing>,
    agree: bool,
}

/// Closed polygon with `k` vertices on a circle.
pub fn circle_loop(center: Complex64, radius: f64, k: usize) -> PathSpec {
    PathSpec::closed(
        (0..k)
            .map(|i| center + Complex64::from_polar(radius, 2.0 * PI * i as f64 / k as f64))
            .collect(),
    )
}

/// A loop around one hole, one around no hole and one around all holes.
pub fn standard_loops(p: &Params) -> crate::Result<Vec<(String, PathSpec)>> {
    let hole = hole_disc(p.c, p.d)?;
    let n2 = p.n_squared() as f64;
    let centre_radius = hole.center.norm().powf(1.0 / n2);
    let outer_extent = (hole.center.norm() + hole.radius).powf(1.0 / n2);
    let hole0 = Complex64::from_polar(centre_radius, PI / n2);
    let small = 0.5 * centre_radius * (PI / n2).sin();
    Ok(vec![
        ("single-hole".into(), circle_loop(hole0, small, 64)),
        ("contractible".into(), circle_loop(Complex64::new(0.0, 0.0), 0.5 * centre_radius, 64)),
        (
            "all-holes".into(),
            circle_loop(Complex64::new(0.0, 0.0), 0.5 * (1.0 + outer_extent), 256),
        ),
    ])
}

#[derive(Serialize)]
struct MonodromyResult {
    loops: Vec<LoopReport>,
    topology: crate::continuation::Topology,
    contours: Vec<ContourSummary>,
}

#[derive(Serialize)]
struct ContourSummary {
    curve: BorderCurve,
    sheet_cycles: Vec<Vec<u32>>,
}

fn cmd_monodromy(cfg: &RunConfig, hash: &str) -> CliResult<Output> {
    let p = cfg.params()?;
    let model = cut_paste_build(&p)?;
    let mut loops = standard_loops(&p)?;
    for (i, verts) in cfg.loops.iter().enumerate() {
        let vs = verts.iter().map(|v| Complex64::new(v[0], v[1])).collect();
        loops.push((format!("config-{i}"), PathSpec::closed(vs)));
    }
    let mut reports = Vec::new();
    for (name, path) in &loops {
        let offset = monodromy_loop(path, &p)?;
        let crossings = record_crossings(path, &model);
        let model_offset = model_monodromy(&model, &crossings);
        reports.push(LoopReport {
            name: name.clone(),
            vertices: path.vertices.len(),
            offset,
            model_offset,
            agree: offset == model_offset,
            crossings,
        });
    }
    let topo = topology(&p)?;
    let mut csv = String::from("curve,cycle,z1_re,z1_im,z2_re,z2_im\n");
    let mut contours = Vec::new();
    for curve in border_curves(&p) {
        let lifts = lift_boundary(curve, 0, &p, 64)?;
        let label = match curve {
            BorderCurve::Outer => "outer".to_string(),
            BorderCurve::Hole(k) => format!("hole{k}"),
        };
        for (cycle, lift) in lifts.iter().enumerate() {
            for pt in &lift.points {
                let _ = writeln!(
                    csv,
                    "{label},{cycle},{},{},{},{}",
                    fmt_f64(pt.z1.re),
                    fmt_f64(pt.z1.im),
                    fmt_f64(pt.z2.re),
                    fmt_f64(pt.z2.im)
                );
            }
        }
        contours.push(ContourSummary {
            curve,
            sheet_cycles: lifts.into_iter().map(|l| l.sheets).collect(),
        });
    }
    let failure = reports
        .iter()
        .find(|r| !r.agree)
        .map(|r| (format!("loop {} disagrees with the slit model", r.name), EXIT_VIOLATION));
    let result = MonodromyResult {
        loops: reports,
        topology: topo,
        contours,
    };
    Ok(Output {
        json: envelope(Command::Monodromy, cfg, hash, &result)?,
        files: vec![("lifted_contours.csv".into(), csv_with_hash(hash, &csv))],
        failure,
    })
}

#[derive(Serialize)]
struct ReportEntry {
    command: &'static str,
    file: String,
    exit_code: i32,
    message: Option<String>,
}

fn cmd_report(cfg: &RunConfig, hash: &str) -> CliResult<Output> {
    let mut files = Vec::new();
    let mut entries = Vec::new();
    let mut worst = EXIT_OK;
    for cmd in [
        Command::Params,
        Command::Certify,
        Command::Verify,
        Command::TraceCheck,
        Command::SolveCorona,
        Command::SolveInterp,
        Command::Monodromy,
    ] {
        let file = format!("{}.json", cmd.name());
        match execute(cmd, cfg) {
            Ok(out) => {
                let (message, code) = match &out.failure {
                    Some((m, c)) => (Some(m.clone()), *c),
                    None => (None, EXIT_OK),
                };
                worst = worst.max(code);
                files.push((file.clone(), out.json));
                files.extend(out.files);
                entries.push(ReportEntry {
                    command: cmd.name(),
                    file,
                    exit_code: code,
                    message,
                });
            }
            Err(e) => {
                worst = worst.max(e.exit_code());
                entries.push(ReportEntry {
                    command: cmd.name(),
                    file,
                    exit_code: e.exit_code(),
                    message: Some(e.to_string()),
                });
            }
        }
    }
    let failure = (worst != EXIT_OK).then(|| ("at least one report step failed".to_string(), worst));
    Ok(Output {
        json: envelope(Command::Report, cfg, hash, &entries)?,
        files,
        failure,
    })
}

/// Run one subcommand on an effective config.
pub fn execute(cmd: Command, cfg: &RunConfig) -> CliResult<Output> {
    let hash = cfg.hash();
    match cmd {
        Command::Params => cmd_params(cfg, &hash),
        Command::Verify => cmd_verify(cfg, &hash),
        Command::Certify => cmd_certify(cfg, &hash),
        Command::TraceCheck => cmd_trace_check(cfg, &hash),
        Command::SolveCorona => cmd_solve_corona(cfg, &hash),
        Command::SolveInterp => cmd_solve_interp(cfg, &hash),
        Command::Monodromy => cmd_monodromy(cfg, &hash),
        Command::Report => cmd_report(cfg, &hash),
    }
}

fn write_files(dir: &Path, files: &[(String, String)]) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|source| CliError::Write { path, source })?;
    }
    Ok(())
}

/// Parse-free entry point: load config, run, write artifacts, print JSON.
pub fn run(cli: &Cli, stdout: &mut dyn io::Write) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(cli);
    if cli.command == Command::Report && cli.out.is_none() {
        return Err(CliError::Usage("report needs --out <dir>".into()));
    }
    let out = execute(cli.command, &cfg)?;
    if let Some(dir) = &cli.out {
        let mut files = out.files.clone();
        if cli.command != Command::Report {
            files.push((format!("{}.json", cli.command.name()), out.json.clone()));
        } else {
            files.push(("report.json".into(), out.json.clone()));
        }
        write_files(dir, &files)?;
    }
    stdout
        .write_all(out.json.as_bytes())
        .map_err(|source| CliError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        })?;
    match out.failure {
        Some((msg, code)) => Err(CliError::Failed(msg, code)),
        None => Ok(()),
    }
}

/// Full entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("corona-lab: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regime_s() -> RunConfig {
        RunConfig::from_json(r#"{"mode": "direct", "n": 2, "c": 0.25, "d": 0.01, "samples": 2000}"#).unwrap()
    }

    #[test]
    fn floats_print_with_17_digits() {
        let s = to_json_string(&vec![0.1f64, 1.0 / 3.0]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("3.3333333333333331e-1"));
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 1.0 / 3.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"mode": "direct", "bogus": 1}"#).is_err());
        assert!(RunConfig::from_json("{not json").is_err());
    }

    #[test]
    fn hash_tracks_config() {
        let a = regime_s();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn params_exit_codes() {
        let cfg = RunConfig::from_json(r#"{"delta": 0.5, "M": 2}"#).unwrap();
        let out = execute(Command::Params, &cfg).unwrap();
        assert!(out.failure.is_none());
        assert!(out.json.contains("\"n\": 5"));
        let forced = RunConfig::from_json(r#"{"delta": 0.5, "M": 2, "n": 4}"#).unwrap();
        let out = execute(Command::Params, &forced).unwrap();
        assert_eq!(out.failure.unwrap().1, EXIT_INVALID);
    }

    #[test]
    fn certify_rejects_bad_order() {
        let cfg = RunConfig::from_json(r#"{"mode": "direct", "n": 2, "c": 0.01, "d": 0.25}"#).unwrap();
        let err = execute(Command::Certify, &cfg).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_INVALID);
    }

    #[test]
    fn verify_is_deterministic() {
        let cfg = regime_s();
        let a = execute(Command::Verify, &cfg).unwrap();
        let b = execute(Command::Verify, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.json.contains(&cfg.hash()));
    }

    #[test]
    fn monodromy_standard_loops() {
        let out = execute(Command::Monodromy, &regime_s()).unwrap();
        assert!(out.failure.is_none(), "{:?}", out.failure);
        let v: serde_json::Value = serde_json::from_str(&out.json).unwrap();
        let loops = v["result"]["loops"].as_array().unwrap();
        let offsets: Vec<u64> = loops.iter().map(|l| l["offset"].as_u64().unwrap()).collect();
        assert_eq!(offsets, vec![1, 0, 0]);
        assert_eq!(v["result"]["topology"]["genus"].as_i64(), Some(1));
    }

    #[test]
    fn violation_codes() {
        let e = CliError::Core(Error::InvariantViolation("x".into()));
        assert_eq!(e.exit_code(), EXIT_VIOLATION);
        let e = CliError::Core(Error::Underflow { log_c: -1e3, log_d: -2e3 });
        assert_eq!(e.exit_code(), EXIT_INVALID);
    }
}
