use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "lagfib", version, about = "Period lattices, monodromy and equivalence of singular Lagrangian fibrations")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// Harvey–Lawson map on ℂⁿ
    Hl,
    /// Focus-focus × S¹ normal form
    Ff22,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, global = true, value_enum)]
    pub family: Option<FamilyArg>,
    /// Base dimension of the Harvey–Lawson family.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// key=value file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long = "tol-root", global = true)]
    pub tol_root: Option<f64>,
    #[arg(long = "tol-disc", global = true)]
    pub tol_disc: Option<f64>,
    #[arg(long = "quad-rel", global = true)]
    pub quad_rel: Option<f64>,
    #[arg(long = "ode-rel", global = true)]
    pub ode_rel: Option<f64>,
}

/// `lo:hi:count`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        (0..self.count)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.count - 1) as f64)
            .collect()
    }
}

fn range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:count, got {s:?}"));
    }
    let lo = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let count = parts[2].trim().parse::<usize>().map_err(|e| e.to_string())?;
    if count == 0 || !(lo.is_finite() && hi.is_finite()) {
        return Err(format!("bad range {s:?}"));
    }
    Ok(Range { lo, hi, count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LoopName {
    Circle,
    Leg1,
    Leg2,
    Leg3,
    Vertex,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowMethod {
    Auto,
    Ode,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Alpha,
    Bound,
    Zeta0,
    Dist,
    Disc,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Discriminant membership on a regular grid.
    Discriminant {
        /// Points per axis.
        #[arg(long, default_value_t = 11)]
        grid: usize,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        hi: f64,
    },
    /// Singular period α(b) from both oracles, with the bound.
    Alpha {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        b: Vec<f64>,
    },
    /// Period basis along a straight segment.
    Periods {
        #[arg(long = "H", default_value = "0", allow_hyphen_values = true)]
        h: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        from: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        to: Vec<f64>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Monodromy matrices of loops around the discriminant.
    Monodromy {
        #[arg(long = "loop", value_enum)]
        loop_name: Option<LoopName>,
        #[arg(long)]
        radius: Option<f64>,
        /// Points on the loop.
        #[arg(long, default_value_t = 64)]
        k: usize,
        /// Height `r` of the focus-focus circle.
        #[arg(long, default_value_t = 0.5)]
        height: f64,
        #[arg(long = "H", default_value = "0", allow_hyphen_values = true)]
        h: String,
    },
    /// Trajectory of a Hamiltonian flow.
    Flow {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        z: Vec<f64>,
        /// Which component F_i generates the flow (1-based).
        #[arg(long, default_value_t = 1)]
        component: usize,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = 21)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = FlowMethod::Auto)]
        method: FlowMethod,
    },
    /// Equivalence verdict for two deformations.
    Classify {
        #[arg(long = "H", allow_hyphen_values = true)]
        h: String,
        #[arg(long = "Hp", allow_hyphen_values = true)]
        hp: String,
        #[arg(long = "k-max", default_value_t = 3)]
        k_max: usize,
    },
    /// A base-point quantity over a grid or a seeded random sample.
    Sweep {
        #[arg(long, value_enum, default_value_t = Quantity::Alpha)]
        quantity: Quantity,
        /// Axis varied along `x-range` (1-based).
        #[arg(long = "x-axis", default_value_t = 1)]
        x_axis: usize,
        #[arg(long = "y-axis", default_value_t = 2)]
        y_axis: usize,
        #[arg(long = "x-range", value_parser = range, default_value = "-1:1:11", allow_hyphen_values = true)]
        x_range: Range,
        #[arg(long = "y-range", value_parser = range, default_value = "-1:1:11", allow_hyphen_values = true)]
        y_range: Range,
        /// Base point supplying the remaining coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
        /// Draw this many seeded points from the x/y box instead of the grid.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Run the acceptance suite and report every criterion.
    Check {
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Discriminant { .. } => "discriminant",
            Command::Alpha { .. } => "alpha",
            Command::Periods { .. } => "periods",
            Command::Monodromy { .. } => "monodromy",
            Command::Flow { .. } => "flow",
            Command::Classify { .. } => "classify",
            Command::Sweep { .. } => "sweep",
            Command::Check { .. } => "check",
        }
    }
}
