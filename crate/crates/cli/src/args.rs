use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "robinlab",
    version,
    about = "Finite-element eigenvalue laboratory for Dirichlet, Neumann and Robin Laplacians on polygons"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the mesh of a domain at a refinement level.
    Mesh {
        /// Catalog name (`unit_square`, `lshape`, `disk`, `rectangle:A:B`,
        /// `ngon:N:R`) or `poly:x0,y0;x1,y1;...`.
        domain: String,
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one eigenvalue problem on one level and write a CSV spectrum.
    Solve {
        #[arg(long)]
        domain: String,
        /// `dirichlet`, `neumann` or `robin:<theta spec>`.
        #[arg(long)]
        bc: String,
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Verification campaigns; the exit code reflects the worst verdict.
    #[command(subcommand)]
    Verify(Verify),
    /// Trace-inequality constant beta(eps) on one level.
    TraceBeta {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Shift kappa making the form coercive with constant 1/2.
    Coercivity {
        #[arg(long)]
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, value_delimiter = ',', default_value = "4")]
        levels: Vec<usize>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Evaluate `<e, Theta e>` for plane waves `e = exp(i x.eta)`.
    PlaneWave {
        #[arg(long)]
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = 4)]
        level: usize,
        /// `x,y`; may be repeated.
        #[arg(long, allow_hyphen_values = true)]
        eta: Vec<String>,
        /// Additional directions drawn uniformly from the disk of radius `--radius`.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Convert an interlacing report into a `(j, lambda_theta, lambda_dirichlet, margin)` CSV.
    PlotData {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// `lambda_{Theta,j+1} < lambda_{D,j}` for `j = 1..jmax`.
    Interlace {
        #[command(flatten)]
        common: VerifyArgs,
        #[arg(long, default_value_t = 10)]
        jmax: usize,
        /// Skip the Neumann solve and the monotone chain.
        #[arg(long)]
        no_chain: bool,
        #[arg(long, default_value_t = 16)]
        eta_samples: usize,
    },
    /// Robin eigenvalues strictly below `lambda_{D,j}` versus `N_D(lambda_{D,j}) + 1`.
    Counting {
        #[command(flatten)]
        common: VerifyArgs,
        #[arg(long, default_value_t = 5)]
        jmax: usize,
        /// Exact Dirichlet eigenvalues, ascending with multiplicity; replaces the solver.
        #[arg(long, value_delimiter = ',')]
        dirichlet: Option<Vec<f64>>,
    },
    /// Rayleigh quotient bound on the Filonov trial space, per level.
    Filonov {
        #[command(flatten)]
        common: VerifyArgs,
        #[arg(long, default_value_t = 3)]
        jmax: usize,
        /// Fixed plane-wave direction `x,y` (rescaled); seeded when absent.
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        gram_threshold: f64,
    },
    /// Plane-wave sign conditions on the circle `|eta|^2 = lambda_{D,j}`.
    Safarov {
        #[command(flatten)]
        common: VerifyArgs,
        #[arg(long)]
        j: usize,
        /// `x,y`; may be repeated.
        #[arg(long, allow_hyphen_values = true)]
        eta: Vec<String>,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub domain: String,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    #[arg(long, value_delimiter = ',', default_value = "4,5")]
    pub levels: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    pub sign_tol: f64,
    /// Smallness threshold for `@t3` parts.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SolverArgs {
    /// Relative residual tolerance of the eigensolver.
    #[arg(long, default_value_t = 1e-9)]
    pub rtol: f64,
    /// Largest dimension solved densely.
    #[arg(long, default_value_t = 400)]
    pub dense_threshold: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}
