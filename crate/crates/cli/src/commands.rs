use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robinlab::boundary_ops::{plane_wave_form, BoundaryOperatorSpec};
use robinlab::eigen::SolveOptions;
use robinlab::geometry::{m2d, mesh_at_level};
use robinlab::harness::{
    coercivity_kappa, filonov_series, safarov_weak_check, trace_beta, verify_counting, verify_interlacing, BoundaryCondition,
    CountingReport, Discretization, FilonovOptions, FilonovSeries, HarnessOptions, InequalityReport, Problem, Verdict,
};
use robinlab::{BoundaryTraversal, PolygonalDomain};
use serde::Serialize;
use thiserror::Error;

use crate::args::{Command, SolverArgs, Verify, VerifyArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] robinlab::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
}

type Result<T> = std::result::Result<T, CliError>;

/// Resolved configuration, embedded in every JSON report. Output paths are
/// left out so that reruns written to different files stay byte-identical.
#[derive(Debug, Serialize)]
struct RunConfig {
    command: &'static str,
    domain: String,
    theta: String,
    levels: Vec<usize>,
    j: usize,
    rtol: f64,
    dense_threshold: usize,
    sign_tol: f64,
    delta: f64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    report: &'a T,
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::HoldsStrict => 0,
        Verdict::HoldsWeak | Verdict::Inconclusive => 2,
        Verdict::Violated => 3,
    }
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Mesh { domain, level, out } => {
            let domain = PolygonalDomain::parse(&domain)?;
            let mesh = mesh_at_level(&domain, level)?;
            info!("{} nodes, {} triangles, h = {}", mesh.n_nodes(), mesh.n_triangles(), mesh.h);
            emit(out.as_deref(), &m2d::write_m2d(&mesh))?;
            Ok(0)
        }
        Command::Solve { domain, bc, level, count, out, solver } => solve(&domain, &bc, level, count, out.as_deref(), solver),
        Command::Verify(v) => verify(v),
        Command::TraceBeta { domain, level, eps, out, solver } => {
            let mesh = mesh_at_level(&PolygonalDomain::parse(&domain)?, level)?;
            let mut csv = String::from("eps,beta\n");
            for e in eps {
                let beta = trace_beta(&mesh, e, &solve_options(solver))?;
                writeln!(csv, "{e:.16e},{beta:.16e}").unwrap();
            }
            emit(out.as_deref(), &csv)?;
            Ok(0)
        }
        Command::Coercivity { domain, theta, levels, solver } => {
            let domain = PolygonalDomain::parse(&domain)?;
            let spec = BoundaryOperatorSpec::parse(&theta)?;
            let mut csv = String::from("level,h,kappa\n");
            for l in levels {
                let mesh = mesh_at_level(&domain, l)?;
                let kappa = coercivity_kappa(&mesh, &spec, &solve_options(solver))?;
                writeln!(csv, "{l},{:.16e},{kappa:.16e}", mesh.h).unwrap();
            }
            emit(None, &csv)?;
            Ok(0)
        }
        Command::PlaneWave { domain, theta, level, eta, random, radius, seed } => {
            let domain = PolygonalDomain::parse(&domain)?;
            let spec = BoundaryOperatorSpec::parse(&theta)?;
            let mesh = mesh_at_level(&domain, level)?;
            let trav = BoundaryTraversal::new(&mesh)?;
            let mut etas = eta.iter().map(|e| parse_pair(e)).collect::<Result<Vec<_>>>()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..random {
                let a = rng.random::<f64>() * std::f64::consts::TAU;
                let r = radius * rng.random::<f64>().sqrt();
                etas.push([r * a.cos(), r * a.sin()]);
            }
            if etas.is_empty() {
                return Err(CliError::Usage("give --eta or --random".into()));
            }
            let mut csv = String::from("eta_x,eta_y,value\n");
            for e in etas {
                let v = plane_wave_form(&trav, &spec, e)?;
                writeln!(csv, "{:.16e},{:.16e},{v:.16e}", e[0], e[1]).unwrap();
            }
            emit(None, &csv)?;
            Ok(0)
        }
        Command::PlotData { from, out } => {
            let text = fs::read_to_string(&from).map_err(|source| CliError::Read { path: from.clone(), source })?;
            let report = InequalityReport::from_json(&text)?;
            let mut csv = String::from("j,lambda_theta,lambda_dirichlet,margin\n");
            for r in &report.rows {
                writeln!(csv, "{},{:.16e},{:.16e},{:.16e}", r.j, r.lambda_theta, r.lambda_dirichlet, r.margin).unwrap();
            }
            emit(out.as_deref(), &csv)?;
            Ok(0)
        }
    }
}

fn solve(domain: &str, bc: &str, level: usize, count: usize, out: Option<&Path>, solver: SolverArgs) -> Result<i32> {
    let domain = PolygonalDomain::parse(domain)?;
    let (bc, spec) = match bc {
        "dirichlet" => (BoundaryCondition::Dirichlet, BoundaryOperatorSpec::Zero),
        "neumann" => (BoundaryCondition::Neumann, BoundaryOperatorSpec::Zero),
        other => match other.strip_prefix("robin:") {
            Some(s) => (BoundaryCondition::Robin, BoundaryOperatorSpec::parse(s)?),
            None => {
                return Err(CliError::Usage(format!("unknown boundary condition `{other}`; expected dirichlet, neumann or robin:<spec>")))
            }
        },
    };
    let disc = Discretization::new(&Problem::new(domain, spec), level)?;
    let dim = disc.pencil(bc)?.0.dim();
    if count > dim {
        return Err(CliError::Core(robinlab::Error::InsufficientWindow(format!("{count} eigenvalues requested, dimension is {dim}"))));
    }
    let opts = SolveOptions { want_vectors: false, ..solve_options(solver) };
    let s = disc.solve(bc, count, &opts)?;
    info!("{} eigenvalues, dimension {dim}, h = {}", s.len(), disc.h());
    emit(out, &s.to_csv(None))?;
    Ok(0)
}

fn verify(v: Verify) -> Result<i32> {
    match v {
        Verify::Interlace { common, jmax, no_chain, eta_samples } => {
            let (problem, config) =
                setup(&common, "verify interlace", jmax, Some(serde_json::json!({ "chain": !no_chain, "eta_samples": eta_samples })))?;
            let opts = HarnessOptions { chain: !no_chain, eta_samples, ..harness_options(&common) };
            let report = verify_interlacing(&problem, jmax, &common.levels, &opts)?;
            let mut table = String::from("j  lambda_theta(j+1)  err  lambda_D(j)  err  margin  verdict\n");
            for r in &report.rows {
                writeln!(
                    table,
                    "{}  {:.10}  {:.2e}  {:.10}  {:.2e}  {:.3e}  {}",
                    r.j,
                    r.lambda_theta,
                    r.lambda_theta_err,
                    r.lambda_dirichlet,
                    r.lambda_dirichlet_err,
                    r.margin,
                    r.verdict.as_str()
                )
                .unwrap();
            }
            writeln!(table, "preconditions met: {}", report.conditions.preconditions_met).unwrap();
            write_report(&common, &config, &report, &table)?;
            Ok(report.exit_code())
        }
        Verify::Counting { common, jmax, dirichlet } => {
            #[derive(Serialize)]
            struct Out {
                rows: Vec<CountingReport>,
                worst: Verdict,
            }
            let extra = dirichlet.as_ref().map(|d| serde_json::json!({ "oracle_dirichlet": d }));
            let (problem, config) = setup(&common, "verify counting", jmax, extra)?;
            let opts = harness_options(&common);
            let rows = (1..=jmax)
                .map(|j| verify_counting(&problem, j, &common.levels, dirichlet.as_deref(), &opts))
                .collect::<robinlab::Result<Vec<_>>>()?;
            let worst = rows.iter().map(|r| r.verdict).max().unwrap_or(Verdict::HoldsStrict);
            let mut table = String::from("j  lambda_D(j)  N_D+1  certain_below  possible_below  verdict\n");
            for r in &rows {
                writeln!(
                    table,
                    "{}  {:.10}  {}  {}  {}  {}",
                    r.j,
                    r.lambda_dirichlet,
                    r.required,
                    r.certain_below,
                    r.possible_below,
                    r.verdict.as_str()
                )
                .unwrap();
            }
            write_report(&common, &config, &Out { rows, worst }, &table)?;
            Ok(exit_code(worst))
        }
        Verify::Filonov { common, jmax, eta, gram_threshold } => {
            #[derive(Serialize)]
            struct Out {
                series: Vec<FilonovSeries>,
                worst: Verdict,
            }
            let eta0 = eta.as_deref().map(parse_pair).transpose()?;
            let extra = serde_json::json!({ "eta0": eta0, "gram_threshold": gram_threshold });
            let (problem, config) = setup(&common, "verify filonov", jmax, Some(extra))?;
            let opts = FilonovOptions {
                eta0,
                gram_threshold,
                sign_tol: common.sign_tol,
                solve: solve_options(common.solver),
                seed: common.solver.seed,
                ..FilonovOptions::default()
            };
            let series = (1..=jmax).map(|j| filonov_series(&problem, j, &common.levels, &opts)).collect::<robinlab::Result<Vec<_>>>()?;
            let worst = series.iter().map(|s| s.verdict).max().unwrap_or(Verdict::HoldsStrict);
            let mut table = String::from("j  level  lambda  max_rayleigh/lambda  C  gram_det  verdict\n");
            for s in &series {
                for r in &s.reports {
                    writeln!(
                        table,
                        "{}  {}  {:.10}  {:.12}  {:.4e}  {:.3e}  {}",
                        s.j,
                        r.level,
                        r.lambda,
                        r.ratio,
                        r.measured_c,
                        r.gram_det,
                        s.verdict.as_str()
                    )
                    .unwrap();
                }
            }
            write_report(&common, &config, &Out { series, worst }, &table)?;
            Ok(exit_code(worst))
        }
        Verify::Safarov { common, j, eta } => {
            let etas = eta.iter().map(|e| parse_pair(e)).collect::<Result<Vec<_>>>()?;
            let (problem, config) = setup(&common, "verify safarov", j, Some(serde_json::json!({ "eta": etas })))?;
            let report = safarov_weak_check(&problem, j, &etas, &common.levels, &harness_options(&common))?;
            let mut table = String::from("eta_x  eta_y  value  certifies\n");
            for s in &report.samples {
                writeln!(table, "{:.8}  {:.8}  {:.6e}  {}", s.eta[0], s.eta[1], s.value, s.certifies).unwrap();
            }
            let row = &report.interlacing;
            writeln!(
                table,
                "weak: {}  strict: {}  interlacing j={}: margin {:.3e} {}",
                report.weak_certified,
                report.strict_certified,
                row.j,
                row.margin,
                row.verdict.as_str()
            )
            .unwrap();
            write_report(&common, &config, &report, &table)?;
            Ok(match row.verdict {
                Verdict::Violated => 3,
                Verdict::HoldsStrict if report.weak_certified => 0,
                _ => 2,
            })
        }
    }
}

fn setup(common: &VerifyArgs, command: &'static str, j: usize, extra: Option<serde_json::Value>) -> Result<(Problem, RunConfig)> {
    let domain = PolygonalDomain::parse(&common.domain)?;
    let spec = BoundaryOperatorSpec::parse(&common.theta)?;
    let config = RunConfig {
        command,
        domain: domain.label(),
        theta: spec.to_string(),
        levels: common.levels.clone(),
        j,
        rtol: common.solver.rtol,
        dense_threshold: common.solver.dense_threshold,
        sign_tol: common.sign_tol,
        delta: common.delta,
        seed: common.solver.seed,
        extra,
    };
    Ok((Problem::new(domain, spec), config))
}

fn solve_options(s: SolverArgs) -> SolveOptions {
    SolveOptions { rtol: s.rtol, dense_threshold: s.dense_threshold, seed: s.seed, ..SolveOptions::default() }
}

fn harness_options(common: &VerifyArgs) -> HarnessOptions {
    HarnessOptions {
        solve: solve_options(common.solver),
        sign_tol: common.sign_tol,
        delta: common.delta,
        seed: common.solver.seed,
        ..HarnessOptions::default()
    }
}

/// JSON to `--out` with the table on stdout, or JSON on stdout alone.
fn write_report<T: Serialize>(common: &VerifyArgs, config: &RunConfig, report: &T, table: &str) -> Result<()> {
    let mut json = serde_json::to_string_pretty(&Envelope { config, report }).map_err(robinlab::Error::from)?;
    json.push('\n');
    match &common.out {
        Some(path) => {
            write_file(path, &json)?;
            print!("{table}");
            Ok(())
        }
        None => emit(None, &json),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

fn parse_pair(text: &str) -> Result<[f64; 2]> {
    let bad = || CliError::Usage(format!("expected `x,y`, got `{text}`"));
    let mut it = text.split(',').map(|v| v.trim().parse::<f64>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(x)), Some(Ok(y)), None) if x.is_finite() && y.is_finite() => Ok([x, y]),
        _ => Err(bad()),
    }
}
