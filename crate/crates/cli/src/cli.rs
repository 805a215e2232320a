use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "lapcompress",
    version,
    about = "Laplacian-basis compressibility of network process snapshots",
    args_override_self = true,
    propagate_version = true
)]
pub struct Cli {
    /// key=value file supplying defaults for any flag; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for ensemble loops (1 runs sequentially).
    #[arg(long, global = true, env = "LAPCOMPRESS_THREADS", value_name = "N",
          value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random geometric digraph: edge list and coordinates.
    GenGraph(GenGraphArgs),
    /// Run a consensus or voter ensemble on a graph.
    Simulate(SimulateArgs),
    /// Energy fractions of K-sparse approximations of snapshots.
    Compress(CompressArgs),
    /// Closed-form second moment of the consensus model and its whitening basis.
    Stats(StatsArgs),
    /// Synthetic daily field data on a graph.
    SynthField(SynthFieldArgs),
    /// Plot-ready eigenvector overlay and spectrum tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Directory receiving all outputs and manifest.json.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Weights {
    /// row_sum / in-degree on every incoming edge.
    InDegree,
    /// row_sum / max in-degree on every edge (symmetric Laplacian).
    Uniform,
}

#[derive(Debug, Args)]
pub struct GenGraphArgs {
    /// Number of nodes (at least 2).
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    /// Connection radius in the unit square.
    #[arg(long, default_value_t = lapcompress::graph::DEFAULT_RADIUS)]
    pub radius: f64,
    /// Target sum of each node's incoming weights.
    #[arg(long, default_value_t = 0.8)]
    pub row_sum: f64,
    /// Edge weighting: in-degree scaling or one uniform weight.
    #[arg(long, value_enum, default_value = "in-degree")]
    pub weights: Weights,
    /// Redraws allowed before giving up on strong connectivity.
    #[arg(long, default_value_t = lapcompress::graph::DEFAULT_MAX_ATTEMPTS)]
    pub max_attempts: usize,
    /// Random seed for node placement.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Model {
    Consensus,
    Voter,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Dynamics to simulate.
    #[arg(long, value_enum)]
    pub model: Model,
    /// Edge-list file of the network.
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Last time step simulated.
    #[arg(long)]
    pub k_max: usize,
    /// Comma-separated snapshot times (default: k-max).
    #[arg(long, value_delimiter = ',', value_name = "K,...")]
    pub snapshot_times: Vec<usize>,
    /// Number of independent instances.
    #[arg(long, default_value_t = lapcompress::consensus::DEFAULT_ENSEMBLE_SIZE)]
    pub ensemble_size: usize,
    /// Random seed; instance i uses stream i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Consensus input node: an index or `random` (drawn per instance).
    #[arg(long, default_value = "0")]
    pub input_node: String,
    /// Voter pins as node:status pairs, e.g. `0:0,9:1` (default: first node
    /// at 0, last node at 1).
    #[arg(long, value_delimiter = ',', value_name = "NODE:STATUS,...")]
    pub pins: Vec<String>,
    /// Voter run with no pinned nodes.
    #[arg(long, conflicts_with = "pins")]
    pub no_pins: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    /// Snapshot CSV (ensemble or field layout).
    #[arg(long, value_name = "FILE")]
    pub snapshots: PathBuf,
    /// Edge-list file (default: bundled contiguous-US graph).
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Node-label file for labelled field headers.
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Comma-separated sparsity levels K.
    #[arg(long = "k", value_delimiter = ',', default_value = "1,2,5,10,20,40", value_name = "K,...")]
    pub k: Vec<usize>,
    /// Also report the match fraction of the rounded reconstruction.
    #[arg(long)]
    pub round: bool,
    /// Also report least-squares refit energy fractions.
    #[arg(long)]
    pub refit: bool,
    /// Rows in each dominant-basis table.
    #[arg(long, default_value_t = 5)]
    pub top: usize,
    /// Dataset name recorded in the report (default: snapshot file stem).
    #[arg(long)]
    pub label: Option<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Edge-list file of the network.
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Input node (0-based).
    #[arg(long, default_value_t = 0)]
    pub z: usize,
    /// Time step of the moment.
    #[arg(long = "k", default_value_t = 400)]
    pub k: usize,
    /// Use exact finite-k geometric sums instead of the asymptotic form.
    #[arg(long)]
    pub exact: bool,
    /// Also build the whitening basis and its variance profile.
    #[arg(long)]
    pub whiten: bool,
    /// Sparsity level for the lower bound on expected captured energy.
    #[arg(long, value_name = "K")]
    pub sparsity: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SynthFieldArgs {
    /// Edge-list file (default: bundled contiguous-US graph).
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Node-label file for the header.
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Number of days to generate.
    #[arg(long, default_value_t = lapcompress::ingest::FIXTURE_DAYS as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub days: u64,
    /// Random seed for the synthetic field.
    #[arg(long, default_value_t = lapcompress::ingest::FIXTURE_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Edge-list file (default: bundled contiguous-US graph with centroids).
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Coordinates CSV `node,x,y` (required with --graph).
    #[arg(long, value_name = "FILE")]
    pub coords: Option<PathBuf>,
    /// Node-label file, one label per line.
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Comma-separated basis indices to overlay (0-based).
    #[arg(long, value_delimiter = ',', default_value = "1", value_name = "I,...")]
    pub index: Vec<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}
