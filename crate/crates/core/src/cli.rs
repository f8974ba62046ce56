//! The `peg` command-line driver.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::FourierCurve;
use crate::error::PegError;
use crate::geometry::QuadData;
use crate::intersection::{perturb_diagonal_count, topology, Certificate};
use crate::residual::{Problem, RectAngle};
use crate::solver::{grid_seeds, solve, solve_from_seeds, SolveConfig, SolveReport, EMBED_SAMPLES};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_EMBEDDING: i32 = 2;
pub const EXIT_TOPOLOGY: i32 = 3;
pub const EXIT_BAD_ARGS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "peg", version, about = "Inscribed rectangles and cyclic quadrilaterals on Fourier Jordan curves")]
pub struct Cli {
    /// Worker threads for seed refinement [default: available parallelism]
    #[arg(long, global = true, env = "PEGLAB_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and write the report and an optional drawing.
    Find {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Solve over a family of perturbed curves and a list of angles.
    VerifyDoubling {
        #[command(flatten)]
        curve: CurveArgs,
        /// Rectangle angles, radians or `right-angle`; repeatable.
        #[arg(long, required = true)]
        phi: Vec<RectAngle>,
        #[arg(long, default_value_t = 20)]
        family_size: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the rectangle angle with continuation.
    ScanPhi {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 0.1)]
        phi_min: f64,
        #[arg(long, default_value_t = 1.5)]
        phi_max: f64,
        #[arg(long, default_value_t = 15)]
        steps: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the embedding check on a curve.
    CheckCurve {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = EMBED_SAMPLES)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Signed count, clean-intersection ledger and Euler bookkeeping.
    Topology {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Read a saved report instead of solving.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also run the near-diagonal perturbation count.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        global_sign: i8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Curve JSON file.
    #[arg(long, conflicts_with = "ellipse")]
    pub curve: Option<PathBuf>,
    /// Ellipse semi-axes.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub ellipse: Option<Vec<f64>>,
    /// Perturbation amplitude applied to the curve.
    #[arg(long, default_value_t = 0.0)]
    pub amplitude: f64,
    /// Highest perturbed mode.
    #[arg(long, default_value_t = 5)]
    pub modes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Diagonal angle: radians, or `right-angle` for an exact square.
    #[arg(long)]
    pub phi: Option<RectAngle>,
    /// Solve the cyclic quadrilateral system with `--s`, `--t`, `--phi`.
    #[arg(long)]
    pub quad: bool,
    #[arg(long, requires = "quad")]
    pub s: Option<f64>,
    #[arg(long, requires = "quad")]
    pub t: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Seeds per torus axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    #[arg(long)]
    pub cluster_radius: Option<f64>,
    #[arg(long)]
    pub diag_exclusion: Option<f64>,
    #[arg(long)]
    pub sv_ratio: Option<f64>,
    #[arg(long)]
    pub chain_min: Option<usize>,
}

/// Error carrying the process exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn bad_args(message: impl Into<String>) -> Self {
        Self { code: EXIT_BAD_ARGS, message: message.into() }
    }

    fn topology(message: impl Into<String>) -> Self {
        Self { code: EXIT_TOPOLOGY, message: message.into() }
    }
}

impl From<PegError> for CliError {
    fn from(e: PegError) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

/// Exit status for a library error.
pub fn exit_code(e: &PegError) -> i32 {
    use PegError::*;
    match e {
        NotEmbedded { .. } => EXIT_EMBEDDING,
        OrbitIntegrity(_) | LedgerImbalance { .. } | InconsistentParity(_) | DiagonalCount { .. }
        | EulerMismatch { .. } | DegenerateReport | PegInvariant(_) | UnsignedSolution(_)
        | NonTransverse { .. } | CoincidentVertices | DegenerateQuadruple { .. } | ResidualTooLarge { .. } => {
            EXIT_TOPOLOGY
        }
        InvalidCurve(_) | UnsupportedOrder(_) | NonPositiveAxis { .. } | InvalidData(_) | InvalidConfig(_) => {
            EXIT_BAD_ARGS
        }
        Io(_) | Json(_) => EXIT_IO,
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl CurveArgs {
    pub fn load(&self) -> CliResult<FourierCurve> {
        let base = self.base()?;
        if self.amplitude == 0.0 {
            return Ok(base);
        }
        if self.amplitude.is_nan() || self.amplitude < 0.0 {
            return Err(CliError::bad_args("amplitude must be nonnegative"));
        }
        Ok(base.perturb(self.amplitude, self.modes, self.seed)?)
    }

    fn base(&self) -> CliResult<FourierCurve> {
        match (&self.curve, &self.ellipse) {
            (Some(path), None) => read_curve(path),
            (None, Some(ab)) => Ok(FourierCurve::ellipse(ab[0], ab[1])?),
            _ => Err(CliError::bad_args("give exactly one of --curve FILE or --ellipse A B")),
        }
    }

    fn given(&self) -> bool {
        self.curve.is_some() || self.ellipse.is_some()
    }
}

fn read_curve(path: &Path) -> CliResult<FourierCurve> {
    let text = fs::read_to_string(path).map_err(PegError::from)?;
    serde_json::from_str(&text).map_err(|e| CliError::bad_args(format!("{}: {e}", path.display())))
}

impl ProblemArgs {
    pub fn problem(&self) -> CliResult<Problem> {
        let phi = self.phi.ok_or_else(|| CliError::bad_args("--phi is required"))?;
        let problem = if self.quad {
            let (Some(s), Some(t)) = (self.s, self.t) else {
                return Err(CliError::bad_args("--quad needs --s and --t"));
            };
            let RectAngle::Radians(phi) = phi else {
                return Err(CliError::bad_args("`right-angle` applies to rectangle problems only"));
            };
            Problem::quad(QuadData::new(s, t, phi)?)
        } else {
            Problem::Rectangle { phi }
        };
        problem.validate()?;
        Ok(problem)
    }
}

impl SolverArgs {
    pub fn config(&self) -> CliResult<SolveConfig> {
        let mut c = SolveConfig::default();
        if let Some(v) = self.grid {
            c.grid_per_axis = v;
        }
        if let Some(v) = self.max_iters {
            c.newton_max_iters = v;
        }
        if let Some(v) = self.newton_tol {
            c.newton_tol = v;
        }
        if let Some(v) = self.cluster_radius {
            c.cluster_radius = v;
        }
        if let Some(v) = self.diag_exclusion {
            c.diag_exclusion = v;
        }
        if let Some(v) = self.sv_ratio {
            c.sv_ratio_threshold = v;
        }
        if let Some(v) = self.chain_min {
            c.degenerate_chain_min = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(PegError::from)? + "\n";
    match out {
        Some(p) => fs::write(p, text).map_err(PegError::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn ensure_embedded(curve: &FourierCurve) -> CliResult<()> {
    let v = curve.check_embedded(EMBED_SAMPLES);
    if let (false, Some(w)) = (v.embedded, v.worst_pair) {
        return Err(PegError::NotEmbedded { s: w.s, t: w.t, distance: w.distance }.into());
    }
    Ok(())
}

/// One `(curve, phi)` run of the doubling check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingRow {
    pub member: usize,
    pub curve_fingerprint: String,
    pub phi: RectAngle,
    pub orbit_count: usize,
    pub raw_solution_count: usize,
    pub all_transverse: bool,
    pub degenerate: bool,
    pub signed_total: i64,
    pub euler_chi: Option<i64>,
    pub doubling_certificate: Option<Certificate>,
    pub error: Option<String>,
}

impl DoublingRow {
    fn failed(&self) -> bool {
        !self.degenerate
            && (self.error.is_some()
                || self.signed_total != 0
                || self.euler_chi != Some(0)
                || self.doubling_certificate == Some(Certificate::Holds(false)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingSummary {
    pub rows: Vec<DoublingRow>,
    /// Minimum orbit count over non-degenerate runs with a numeric angle.
    pub min_orbit_count: Option<usize>,
    pub degenerate_runs: usize,
    pub failed_runs: usize,
}

/// Solves every `(curve, phi)` pair and runs the topology checks on each.
pub fn verify_doubling(curves: &[FourierCurve], phis: &[RectAngle], config: &SolveConfig) -> DoublingSummary {
    let mut rows = Vec::with_capacity(curves.len() * phis.len());
    for (member, curve) in curves.iter().enumerate() {
        for &phi in phis {
            let problem = Problem::Rectangle { phi };
            let mut row = DoublingRow {
                member,
                curve_fingerprint: curve.fingerprint(),
                phi,
                orbit_count: 0,
                raw_solution_count: 0,
                all_transverse: false,
                degenerate: false,
                signed_total: 0,
                euler_chi: None,
                doubling_certificate: None,
                error: None,
            };
            match solve(curve, &problem, config) {
                Ok(report) => {
                    row.orbit_count = report.orbits.len();
                    row.raw_solution_count = report.raw_solution_count;
                    row.signed_total = report.signed_total;
                    row.degenerate = report.degenerate_family || !report.degeneracy.isolated.is_empty();
                    row.all_transverse = !row.degenerate && report.solutions().all(|s| s.transverse);
                    if !row.degenerate {
                        match topology(&report, 1) {
                            Ok(t) => {
                                row.euler_chi = Some(t.euler_chi);
                                row.doubling_certificate = Some(t.doubling_certificate);
                            }
                            Err(e) => row.error = Some(e.to_string()),
                        }
                    }
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            rows.push(row);
        }
    }
    let min_orbit_count = rows
        .iter()
        .filter(|r| !r.degenerate && r.error.is_none() && r.phi != RectAngle::RightAngle)
        .map(|r| r.orbit_count)
        .min();
    let degenerate_runs = rows.iter().filter(|r| r.degenerate).count();
    let failed_runs = rows.iter().filter(|r| r.failed()).count();
    DoublingSummary { rows, min_orbit_count, degenerate_runs, failed_runs }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanStep {
    pub phi: f64,
    pub orbit_count: usize,
    /// Whether continuation was lost and a fresh grid solve was run.
    pub fresh_solve: bool,
    pub pegs: Vec<[Complex64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTrace {
    pub steps: Vec<ScanStep>,
    /// Vertex sets of each tracked peg, one entry per step.
    pub paths: Vec<Vec<[Complex64; 4]>>,
    /// Largest step-to-step vertex-set distance along any path.
    pub max_vertex_jump: f64,
}

/// Hausdorff distance between two vertex sets.
pub fn vertex_set_distance(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    let one_way = |x: &[Complex64; 4], y: &[Complex64; 4]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Sweeps rectangle angles in order, warm-starting each solve from the
/// previous solutions. A change in orbit count or a solver error triggers a
/// fresh grid solve at that angle.
pub fn scan_phi(curve: &FourierCurve, phis: &[f64], config: &SolveConfig) -> crate::error::Result<ScanTrace> {
    let mut steps: Vec<ScanStep> = Vec::with_capacity(phis.len());
    let mut prev: Option<SolveReport> = None;
    for &phi in phis {
        let problem = Problem::rectangle(phi);
        problem.validate()?;
        let mut fresh = true;
        let mut report = None;
        if let Some(p) = &prev {
            let seeds: Vec<_> = p.solutions().map(|s| s.quadruple).collect();
            if let Ok(r) = solve_from_seeds(curve, &problem, config, &seeds) {
                if r.orbits.len() == p.orbits.len() && !r.orbits.is_empty() {
                    report = Some(r);
                    fresh = false;
                }
            }
        }
        let report = match report {
            Some(r) => r,
            None => {
                let seeds = grid_seeds(config.grid_per_axis, config.diag_exclusion);
                solve_from_seeds(curve, &problem, config, &seeds)?
            }
        };
        steps.push(ScanStep {
            phi,
            orbit_count: report.orbits.len(),
            fresh_solve: fresh,
            pegs: report.orbits.iter().map(|o| o.peg.vertices).collect(),
        });
        prev = Some(report);
    }

    let mut paths: Vec<Vec<[Complex64; 4]>> = Vec::new();
    let mut max_vertex_jump: f64 = 0.0;
    if let Some(first) = steps.first() {
        paths = first.pegs.iter().map(|p| vec![*p]).collect();
        for step in &steps[1..] {
            if step.pegs.len() != paths.len() {
                break;
            }
            let mut used = vec![false; step.pegs.len()];
            for path in paths.iter_mut() {
                let last = *path.last().expect("paths are never empty");
                let best = (0..step.pegs.len())
                    .filter(|&i| !used[i])
                    .min_by(|&i, &j| {
                        vertex_set_distance(&last, &step.pegs[i]).total_cmp(&vertex_set_distance(&last, &step.pegs[j]))
                    })
                    .expect("equal counts leave a candidate");
                used[best] = true;
                max_vertex_jump = max_vertex_jump.max(vertex_set_distance(&last, &step.pegs[best]));
                path.push(step.pegs[best]);
            }
        }
    }
    Ok(ScanTrace { steps, paths, max_vertex_jump })
}

/// Evenly spaced angles from `min` to `max` inclusive.
pub fn phi_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        n => (0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn cmd_find(
    curve: &CurveArgs,
    problem: &ProblemArgs,
    solver: &SolverArgs,
    out: Option<&Path>,
    svg_out: Option<&Path>,
) -> CliResult<()> {
    let problem = problem.problem()?;
    let config = solver.config()?;
    let curve = curve.load()?;
    let report = solve(&curve, &problem, &config)?;
    eprintln!(
        "{} orbit(s), {} raw solution(s), signed total {}, degenerate family: {}",
        report.orbits.len(),
        report.raw_solution_count,
        report.signed_total,
        report.degenerate_family
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(p) = svg_out {
        fs::write(p, svg::render(&curve, &report)).map_err(PegError::from)?;
    }
    write_json(&report, out)
}

fn cmd_verify_doubling(
    curve: &CurveArgs,
    phis: &[RectAngle],
    family_size: usize,
    solver: &SolverArgs,
    out: Option<&Path>,
) -> CliResult<()> {
    for phi in phis {
        phi.validate()?;
    }
    let config = solver.config()?;
    let base = curve.base()?;
    if family_size == 0 {
        return Err(CliError::bad_args("--family-size must be positive"));
    }
    let curves = (0..family_size)
        .map(|i| {
            if curve.amplitude == 0.0 {
                Ok(base.clone())
            } else {
                base.perturb(curve.amplitude, curve.modes, curve.seed.wrapping_add(i as u64))
            }
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    let summary = verify_doubling(&curves, phis, &config);
    eprintln!("member  phi           orbits  signed  chi  certificate  status");
    for r in &summary.rows {
        let status = if r.degenerate {
            "degenerate"
        } else if r.failed() {
            "FAILED"
        } else {
            "ok"
        };
        eprintln!(
            "{:>6}  {:<12}  {:>6}  {:>6}  {:>3}  {:>11}  {status}",
            r.member,
            r.phi.to_string(),
            r.orbit_count,
            r.signed_total,
            r.euler_chi.map_or("-".to_string(), |c| c.to_string()),
            r.doubling_certificate.map_or("-".to_string(), |c| c.to_string()),
        );
    }
    eprintln!(
        "min orbit count {}, degenerate runs {}, failed runs {}",
        summary.min_orbit_count.map_or("-".to_string(), |c| c.to_string()),
        summary.degenerate_runs,
        summary.failed_runs
    );
    write_json(&summary, out)?;
    if summary.failed_runs > 0 {
        return Err(CliError::topology(format!("{} run(s) failed", summary.failed_runs)));
    }
    Ok(())
}

fn cmd_scan_phi(
    curve: &CurveArgs,
    phi_min: f64,
    phi_max: f64,
    steps: usize,
    solver: &SolverArgs,
    out: Option<&Path>,
) -> CliResult<()> {
    if !(phi_min > 0.0 && phi_max < std::f64::consts::FRAC_PI_2 && phi_min <= phi_max) || steps == 0 {
        return Err(CliError::bad_args("scan range must satisfy 0 < phi-min <= phi-max < pi/2, steps >= 1"));
    }
    let config = solver.config()?;
    let curve = curve.load()?;
    ensure_embedded(&curve)?;
    let trace = scan_phi(&curve, &phi_grid(phi_min, phi_max, steps), &config)?;
    for s in &trace.steps {
        eprintln!("phi {:.6}  orbits {}{}", s.phi, s.orbit_count, if s.fresh_solve { "  (fresh)" } else { "" });
    }
    write_json(&trace, out)
}

#[derive(Debug, Serialize)]
struct CurveCheck {
    fingerprint: String,
    diameter: f64,
    verdict: crate::curve::EmbeddingVerdict,
}

fn cmd_check_curve(curve: &CurveArgs, samples: usize, out: Option<&Path>) -> CliResult<()> {
    if samples < 64 {
        return Err(CliError::bad_args("--samples must be at least 64"));
    }
    let curve = curve.load()?;
    let verdict = curve.check_embedded(samples);
    let embedded = verdict.embedded;
    write_json(&CurveCheck { fingerprint: curve.fingerprint(), diameter: curve.diameter(), verdict }, out)?;
    if !embedded {
        return Err(CliError { code: EXIT_EMBEDDING, message: "curve is not embedded".into() });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_topology(
    curve: &CurveArgs,
    problem: &ProblemArgs,
    solver: &SolverArgs,
    report_path: Option<&Path>,
    epsilon: Option<f64>,
    global_sign: i8,
    out: Option<&Path>,
) -> CliResult<()> {
    if global_sign != 1 && global_sign != -1 {
        return Err(CliError::bad_args("--global-sign must be 1 or -1"));
    }
    let config = solver.config()?;
    let (mut report, curve) = match report_path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(PegError::from)?;
            let report: SolveReport =
                serde_json::from_str(&text).map_err(|e| CliError::bad_args(format!("{}: {e}", p.display())))?;
            let curve = if curve.given() { Some(curve.load()?) } else { None };
            (report, curve)
        }
        None => {
            let problem = problem.problem()?;
            let curve = curve.load()?;
            (solve(&curve, &problem, &config)?, Some(curve))
        }
    };
    let mut block = topology(&report, global_sign)?;
    if let Some(eps) = epsilon {
        let curve = curve.ok_or_else(|| CliError::bad_args("--epsilon needs a curve"))?;
        block.diagonal = Some(perturb_diagonal_count(&curve, &report.problem, eps, &report.config, &report)?);
    }
    eprintln!(
        "signed total {}, chi {}, balanced {}, contradiction {}, doubling certificate {}",
        block.signed_total, block.euler_chi, block.balanced, block.contradiction, block.doubling_certificate
    );
    let failed = block.failed();
    let chi = block.euler_chi;
    report.topology = Some(block);
    write_json(&report, out)?;
    if failed {
        return Err(CliError::topology(format!("topology check failed (chi = {chi})")));
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.workers {
            if n == 0 {
                return Err(CliError::bad_args("--workers must be positive"));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CliError::bad_args(e.to_string()))?
    };
    pool.install(|| match &cli.command {
        Command::Find { curve, problem, solver, out, svg } => {
            cmd_find(curve, problem, solver, out.as_deref(), svg.as_deref())
        }
        Command::VerifyDoubling { curve, phi, family_size, solver, out } => {
            cmd_verify_doubling(curve, phi, *family_size, solver, out.as_deref())
        }
        Command::ScanPhi { curve, phi_min, phi_max, steps, solver, out } => {
            cmd_scan_phi(curve, *phi_min, *phi_max, *steps, solver, out.as_deref())
        }
        Command::CheckCurve { curve, samples, out } => cmd_check_curve(curve, *samples, out.as_deref()),
        Command::Topology { curve, problem, solver, report, epsilon, global_sign, out } => cmd_topology(
            curve,
            problem,
            solver,
            report.as_deref(),
            *epsilon,
            *global_sign,
            out.as_deref(),
        ),
    })
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_ARGS } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_grid_is_inclusive() {
        assert_eq!(phi_grid(0.1, 0.5, 5).len(), 5);
        let g = phi_grid(0.1, 0.5, 5);
        assert!((g[4] - 0.5).abs() < 1e-15 && (g[0] - 0.1).abs() < 1e-15);
        assert_eq!(phi_grid(0.3, 0.3, 1), vec![0.3]);
    }

    #[test]
    fn vertex_set_distance_ignores_order() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];
        let mut b = a;
        b.rotate_left(1);
        assert_eq!(vertex_set_distance(&a, &b), 0.0);
        b[0] += Complex64::new(0.1, 0.0);
        assert!((vertex_set_distance(&a, &b) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn bad_arguments_exit_4() {
        assert_eq!(main_with_args(["peg", "find", "--ellipse", "2", "1", "--phi", "60deg"]), EXIT_BAD_ARGS);
        assert_eq!(main_with_args(["peg", "find", "--ellipse", "2", "1", "--phi", "2.0"]), EXIT_BAD_ARGS);
        assert_eq!(
            main_with_args(["peg", "find", "--ellipse", "2", "1", "--quad", "--s", "0.3", "--t", "0.5", "--phi", "right-angle"]),
            EXIT_BAD_ARGS
        );
        assert_eq!(main_with_args(["peg", "find", "--phi", "1.0"]), EXIT_BAD_ARGS);
        assert_eq!(main_with_args(["peg", "bogus"]), EXIT_BAD_ARGS);
    }

    #[test]
    fn problem_args_build_problems() {
        let p = ProblemArgs { phi: Some(RectAngle::RightAngle), quad: false, s: None, t: None };
        assert!(p.problem().unwrap().is_right_angle());
        let q = ProblemArgs { phi: Some(RectAngle::Radians(2.0)), quad: true, s: Some(0.3), t: Some(0.5) };
        assert!(matches!(q.problem().unwrap(), Problem::Quad { .. }));
    }
}
