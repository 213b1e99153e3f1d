use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cdforge", version, about = "Curvature-dimension calculus and heat semigroups on weighted graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads: a positive integer or `auto`.
    #[arg(long, global = true, env = "CDFORGE_THREADS", default_value = "auto")]
    pub threads: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summary constants of a graph file.
    Info {
        graph: PathBuf,
    },
    /// Write a generated graph.
    Generate(GenerateArgs),
    /// Per-vertex curvature constants.
    #[command(subcommand)]
    Curvature(CurvatureCommand),
    /// Heat kernels and the heat semigroup.
    #[command(subcommand)]
    Heat(HeatCommand),
    /// Numerical checks of the semigroup inequalities and identities.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// path, cycle, complete, star, hypercube or lattice_ball.
    pub family: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Uniform edge weight.
    #[arg(long, default_value_t = 1.0)]
    pub weight: f64,
    /// Uniform vertex measure.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
}

#[derive(Debug, Args)]
#[group(id = "vertices", required = true, multiple = false)]
pub struct VertexSelection {
    /// Every vertex of the graph.
    #[arg(long, group = "vertices")]
    pub all: bool,
    /// Selected vertices (repeatable or comma-separated).
    #[arg(long, group = "vertices", value_delimiter = ',')]
    pub vertex: Vec<String>,
}

#[derive(Debug, Args)]
#[group(id = "times", required = true, multiple = false)]
pub struct TimeGrid {
    /// Comma-separated times.
    #[arg(long = "t", group = "times", value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// Geometric grid `start:stop:count`.
    #[arg(long = "t-range", group = "times")]
    pub t_range: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum CurvatureCommand {
    /// Optimal CD(n,·) constant via the generalised eigenproblem.
    Cd {
        #[arg(long)]
        graph: PathBuf,
        /// Dimension `n`; `inf` for n = ∞.
        #[arg(long = "dim")]
        dim: String,
        #[command(flatten)]
        vertices: VertexSelection,
    },
    /// Heuristic upper bound on the CDE′(n,·) constant.
    Cde {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "dim")]
        dim: String,
        #[command(flatten)]
        vertices: VertexSelection,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 4000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct SubsetArgs {
    /// Centre of the ball used as Dirichlet domain (default: whole graph).
    #[arg(long)]
    pub center: Option<String>,
    /// Radius of that ball.
    #[arg(long, requires = "center", conflicts_with = "radii")]
    pub radius: Option<usize>,
    /// Exhaustion radii, `2,3,5` or `2:29`.
    #[arg(long, requires = "center")]
    pub radii: Option<String>,
    /// Convergence tolerance for exhaustion.
    #[arg(long, default_value_t = 1e-8, requires = "radii")]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum HeatCommand {
    /// Heat-kernel values p(t,x,y).
    Kernel {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[command(flatten)]
        times: TimeGrid,
        #[command(flatten)]
        subset: SubsetArgs,
    },
    /// Apply P_t to a function.
    Apply {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[command(flatten)]
        times: TimeGrid,
        #[arg(long)]
        center: Option<String>,
        #[arg(long, requires = "center")]
        radius: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct CurvatureBound {
    /// Curvature lower bound κ, or `auto` to use the graph's computed constant.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: String,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Gradient and (reverse) Poincaré bounds under CD(n, κ).
    Thm31 {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[arg(long = "dim")]
        dim: String,
        #[command(flatten)]
        kappa: CurvatureBound,
        #[command(flatten)]
        times: TimeGrid,
        /// Restrict reports to these vertices.
        #[arg(long, value_delimiter = ',')]
        vertex: Vec<String>,
        /// Gauss–Legendre order of the item-1 time integral.
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// Initial panel count of the item-1 time integral.
        #[arg(long, default_value_t = 8)]
        panels: usize,
        /// Add the small-time expansion check at each reported vertex.
        #[arg(long)]
        converse: bool,
    },
    /// Gradient bound for √(P_t f) under CDE′(∞, κ).
    Thm32 {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[command(flatten)]
        kappa: CurvatureBound,
        #[command(flatten)]
        times: TimeGrid,
        #[arg(long, value_delimiter = ',')]
        vertex: Vec<String>,
    },
    /// Heat-kernel and semigroup identities on the whole graph.
    Semigroup {
        #[arg(long)]
        graph: PathBuf,
        /// Test function; a seeded random field when omitted.
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long = "t", default_value_t = 1.0)]
        t: f64,
        #[arg(long = "s", default_value_t = 0.5)]
        s: f64,
    },
    /// Derivative identities of the flow functionals.
    Lemma32 {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[arg(long = "t", default_value_t = 1.0)]
        t: f64,
        /// Points in [0, t).
        #[arg(long = "s", value_delimiter = ',', default_value = "0,0.25,0.5")]
        s: Vec<f64>,
        #[command(flatten)]
        vertices: VertexSelection,
    },
}
