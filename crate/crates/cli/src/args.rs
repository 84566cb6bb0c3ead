use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "spectral-sens",
    version,
    about = "Directional derivatives of ordered eigenvalues and singular values"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Eigenvalue directional derivatives of a Hermitian family.
    Eig,
    /// Singular value directional derivatives (embedding and reduced paths).
    Sv,
    /// Derivative as a function of direction over a sphere sample.
    Scan,
    /// Compare analytic derivatives against finite differences.
    Verify,
    /// Critical-point analysis of sigma_{3n-2}(Q(xi)).
    Ikramov,
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Kato,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Affine family JSON: {"base": M, "coefficients": [M, ...], "hermitian": bool}.
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "builtin")]
    pub family: Option<PathBuf>,

    /// Built-in family.
    #[arg(long, global = true, value_enum)]
    pub builtin: Option<Builtin>,

    /// Square matrix JSON for `ikramov`.
    #[arg(long, global = true, value_name = "FILE")]
    pub matrix: Option<PathBuf>,

    /// Evaluation point, comma separated.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_hyphen_values = true,
        value_name = "CSV"
    )]
    pub x0: Option<Vec<f64>>,

    /// Candidate maximizer for `ikramov` (4 values); found by grid search when absent.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_hyphen_values = true,
        value_name = "CSV"
    )]
    pub xi0: Option<Vec<f64>>,

    /// Eigenvalue ranks (1-based).
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    pub m: Option<Vec<usize>>,

    /// Singular value ranks (1-based).
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    pub k: Option<Vec<usize>>,

    /// Direction, comma separated; repeat for several.
    #[arg(long = "d", global = true, allow_hyphen_values = true, value_name = "CSV")]
    pub directions: Vec<String>,

    /// Scale explicit directions to unit length instead of rejecting them.
    #[arg(long, global = true)]
    pub normalize: bool,

    /// Number of seeded quasi-uniform sphere directions.
    #[arg(long, global = true, value_name = "INT")]
    pub n_directions: Option<usize>,

    #[arg(long, global = true, default_value_t = spectral_sens::directions::DEFAULT_SEED)]
    pub seed: u64,

    /// Cluster tolerance; defaults to 1e-8 * max(1, ||A(x0)||_F).
    #[arg(long, global = true, value_name = "FLOAT")]
    pub cluster_tol: Option<f64>,

    /// Initial finite-difference step; defaults to 1e-3 * max(1, ||x0||).
    #[arg(long, global = true, value_name = "FLOAT")]
    pub h0: Option<f64>,

    /// Relative tolerance for `verify`.
    #[arg(long, global = true, default_value_t = 1e-5, value_name = "FLOAT")]
    pub verify_tol: f64,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
