use log::{info, warn};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BoundaryCondition, Discretization, Problem, Verdict};
use crate::boundary_ops::plane_wave_form;
use crate::dense;
use crate::eigen::SolveOptions;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilonovOptions {
    /// Plane-wave direction; rescaled to `|eta|^2 = lambda`. Seeded from the
    /// problem when absent.
    pub eta0: Option<[f64; 2]>,
    /// Normalized Gram determinant below which the plane wave counts as
    /// dependent on the rest of the trial space.
    pub gram_threshold: f64,
    pub max_resamples: usize,
    /// Robin eigenvalues within this relative distance of `lambda` are
    /// treated as a discrete kernel.
    pub kernel_rtol: f64,
    pub sign_tol: f64,
    pub solve: SolveOptions,
    pub seed: u64,
}

impl Default for FilonovOptions {
    fn default() -> Self {
        Self {
            eta0: None,
            gram_threshold: 1e-10,
            max_resamples: 16,
            kernel_rtol: 1e-6,
            sign_tol: 1e-10,
            solve: SolveOptions::default(),
            seed: 42,
        }
    }
}

/// Trial space `W = U + ker + span{e}` at `lambda = lambda_{D,j}` on one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpaceReport {
    pub j: usize,
    pub level: usize,
    pub h: f64,
    /// Discrete Dirichlet eigenvalue `lambda_{D,j}` at this level.
    pub lambda: f64,
    pub dim_u: usize,
    pub dim_kernel: usize,
    pub dim_w: usize,
    pub eta0: [f64; 2],
    /// Directions rejected for Gram deficiency before `eta0`.
    pub resamples: usize,
    pub gram_det: f64,
    pub max_rayleigh: f64,
    /// `max_rayleigh / lambda`.
    pub ratio: f64,
    /// `max(0, ratio - 1) / h^2`.
    pub measured_c: f64,
    pub plane_wave_value: f64,
    pub plane_wave_ok: bool,
}

/// Real and imaginary parts of a complex nodal vector.
struct CVec {
    re: Vec<f64>,
    im: Vec<f64>,
}

/// `w^* S z` for real symmetric `S`.
fn hermitian(s: &CsrMatrix, w: &CVec, z: &CVec) -> (f64, f64) {
    let re = s.bilinear(&w.re, &z.re) + s.bilinear(&w.im, &z.im);
    let im = s.bilinear(&w.re, &z.im) - s.bilinear(&w.im, &z.re);
    (re, im)
}

/// Real `2d x 2d` embedding `[[Re, -Im], [Im, Re]]` of the Hermitian
/// matrix of `S` on the basis.
fn embed(s: &CsrMatrix, basis: &[CVec]) -> DMatrix<f64> {
    let d = basis.len();
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    for a in 0..d {
        for b in 0..d {
            let (re, im) = hermitian(s, &basis[a], &basis[b]);
            out[(a, b)] = re;
            out[(a + d, b + d)] = re;
            out[(a, b + d)] = -im;
            out[(a + d, b)] = im;
        }
    }
    (&out + out.transpose()) * 0.5
}

/// Builds the trial space on `level` and bounds the Robin Rayleigh quotient
/// over it by the largest eigenvalue of the projected pencil.
///
/// `U` holds the discrete Dirichlet eigenvectors with eigenvalue at most
/// `lambda (1 + 1e-8)`, extended by zero; Robin eigenvectors with eigenvalue
/// within `kernel_rtol` of `lambda` are added; the last direction is the
/// nodal interpolant of `exp(i x . eta0)` with `|eta0|^2 = lambda`. If the
/// plane wave is numerically dependent on the rest, new directions are drawn
/// uniformly on the circle, at most `max_resamples` times.
pub fn filonov_trial_check(problem: &Problem, j: usize, level: usize, opts: &FilonovOptions) -> Result<TrialSpaceReport> {
    if j == 0 {
        return Err(Error::InvalidArgument("j must be at least 1".into()));
    }
    let disc = Discretization::new(problem, level)?;
    let n = disc.mesh.n_nodes();
    let solve_opts = SolveOptions { want_vectors: true, ..opts.solve };

    // Dirichlet eigenvectors up to and including the cluster of lambda_j
    let dim_d = disc.dirichlet().dim();
    let mut count = (j + 4).min(dim_d);
    let (lambda, u_vecs) = loop {
        let s = disc.solve(BoundaryCondition::Dirichlet, count, &solve_opts)?;
        if s.len() < j {
            return Err(Error::InsufficientWindow(format!("only {} Dirichlet eigenvalues at level {level}", s.len())));
        }
        let lambda = s.eigenvalues[j - 1];
        let cut = lambda * (1.0 + 1e-8);
        let k = s.eigenvalues.iter().filter(|&&v| v <= cut).count();
        if k < s.len() || count == dim_d {
            let vecs = s.eigenvectors.expect("vectors requested");
            let u: Vec<Vec<f64>> = vecs[..k].iter().map(|v| disc.dirichlet().extend(v, n)).collect();
            break (lambda, u);
        }
        count = (2 * count).min(dim_d);
    };

    // Robin eigenvectors at lambda
    let mut count = (u_vecs.len() + 6).min(n);
    let kernel: Vec<Vec<f64>> = loop {
        let s = disc.solve(BoundaryCondition::Robin, count, &solve_opts)?;
        let top = s.largest().unwrap_or(f64::NEG_INFINITY);
        if top > lambda * (1.0 + opts.kernel_rtol) || count == n {
            let vecs = s.eigenvectors.expect("vectors requested");
            break s
                .eigenvalues
                .iter()
                .zip(vecs)
                .filter(|(v, _)| (*v - lambda).abs() <= opts.kernel_rtol * lambda.abs())
                .map(|(_, x)| x)
                .collect();
        }
        count = (2 * count).min(n);
    };
    if !kernel.is_empty() {
        info!("Robin kernel at lambda = {lambda} has dimension {}", kernel.len());
    }

    let k = disc.robin_matrix()?;
    let m = &disc.mass.matrix;
    let normalize = |re: Vec<f64>, im: Vec<f64>| {
        let c = CVec { re, im };
        let nrm = hermitian(m, &c, &c).0.sqrt();
        CVec { re: c.re.iter().map(|v| v / nrm).collect(), im: c.im.iter().map(|v| v / nrm).collect() }
    };
    let mut base: Vec<CVec> = Vec::new();
    for u in u_vecs.iter().chain(&kernel) {
        base.push(normalize(u.clone(), vec![0.0; n]));
    }

    let radius = lambda.max(0.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed(opts.seed) ^ (j as u64) << 32);
    let mut eta = match opts.eta0 {
        Some(e) => {
            let r = e[0].hypot(e[1]);
            if r == 0.0 {
                return Err(Error::InvalidArgument("eta0 must be nonzero".into()));
            }
            [e[0] * radius / r, e[1] * radius / r]
        }
        None => random_direction(&mut rng, radius),
    };
    let mut resamples = 0;
    loop {
        let phase: Vec<f64> = disc.mesh.nodes.iter().map(|x| x[0] * eta[0] + x[1] * eta[1]).collect();
        let wave = normalize(phase.iter().map(|p| p.cos()).collect(), phase.iter().map(|p| p.sin()).collect());
        let mut basis: Vec<CVec> = base.iter().map(|c| CVec { re: c.re.clone(), im: c.im.clone() }).collect();
        basis.push(wave);
        let g = embed(m, &basis);
        // det of the embedding is |det G|^2
        let gram_det = g.clone().determinant().max(0.0).sqrt();
        if gram_det > opts.gram_threshold {
            let a = embed(&k, &basis);
            let (vals, _) = dense::generalized_eigen(&a, &g)?;
            let max_rayleigh = *vals.last().expect("nonempty trial space");
            let plane_wave_value = plane_wave_form(&disc.traversal, &problem.spec, eta)?;
            let ratio = max_rayleigh / lambda;
            let h = disc.h();
            return Ok(TrialSpaceReport {
                j,
                level,
                h,
                lambda,
                dim_u: u_vecs.len(),
                dim_kernel: kernel.len(),
                dim_w: basis.len(),
                eta0: eta,
                resamples,
                gram_det,
                max_rayleigh,
                ratio,
                measured_c: (ratio - 1.0).max(0.0) / (h * h),
                plane_wave_value,
                plane_wave_ok: plane_wave_value <= opts.sign_tol,
            });
        }
        if resamples == opts.max_resamples {
            return Err(Error::TrialSpaceDegenerate(format!(
                "plane wave dependent on the trial space for all {} directions (last Gram determinant {gram_det:.3e})",
                resamples + 1
            )));
        }
        warn!("Gram determinant {gram_det:.3e} at eta = {eta:?}; resampling");
        resamples += 1;
        eta = random_direction(&mut rng, radius);
    }
}

fn random_direction(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 2] {
    let a = rng.random::<f64>() * std::f64::consts::TAU;
    [radius * a.cos(), radius * a.sin()]
}

/// Trial-space checks for one `j` on successive levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilonovSeries {
    pub j: usize,
    pub reports: Vec<TrialSpaceReport>,
    /// `measured_c` does not grow from one level to the next.
    pub c_nonincreasing: bool,
    /// `holds_strict` when `c_nonincreasing` and every plane wave passes the
    /// sign check, `inconclusive` otherwise.
    pub verdict: Verdict,
}

pub fn filonov_series(problem: &Problem, j: usize, levels: &[usize], opts: &FilonovOptions) -> Result<FilonovSeries> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("at least one level is required".into()));
    }
    let reports = levels.iter().map(|&l| filonov_trial_check(problem, j, l, opts)).collect::<Result<Vec<_>>>()?;
    let c_nonincreasing = reports.windows(2).all(|w| w[1].measured_c <= w[0].measured_c * (1.0 + 1e-9) + 1e-12);
    let ok = c_nonincreasing && reports.iter().all(|r| r.plane_wave_ok);
    Ok(FilonovSeries { j, reports, c_nonincreasing, verdict: if ok { Verdict::HoldsStrict } else { Verdict::Inconclusive } })
}
