use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use expfun::density_solver::{SchemeRegistry, DEFAULT_CELLS, DEFAULT_RATIO};
use expfun::levy_model::SubordinatorSpec;
use expfun::mc_oracle::check_cutoff;
use expfun::validation::RENEWAL_PROBES;

use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "expfun",
    version,
    about = "Densities of exponential functionals of killed subordinators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,

    /// Worker threads for the parallel parts.
    #[arg(long, global = true, env = "EXPFUN_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the density on a geometric grid.
    Solve,
    /// Solve, then run every applicable check against independent oracles.
    Validate,
    /// Moment table: recursion, recursion with quadrature exponent, solver.
    Moments {
        /// Highest integer order.
        #[arg(long, default_value_t = 5)]
        order: usize,
    },
    /// Write a transformed model and its density.
    Transform {
        /// Exponential tilt by `rho`.
        #[arg(long, conflicts_with = "dual", required_unless_present = "dual")]
        rho: Option<f64>,
        /// Density of the spectrally negative dual's functional.
        #[arg(long)]
        dual: bool,
    },
    /// Monte-Carlo samples and their KS distance to the solver.
    Mc {
        /// Simulate the increasing-subordinator functional and check the histogram shape.
        #[arg(long)]
        increasing: bool,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Model file (JSON).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Grid ratio.
    #[arg(long, global = true, default_value_t = DEFAULT_RATIO)]
    pub delta: f64,
    /// Number of grid cells.
    #[arg(long, global = true, default_value_t = DEFAULT_CELLS)]
    pub cells: usize,
    /// Right end of the grid (only without drift).
    #[arg(long, global = true)]
    pub xmax: Option<f64>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plot: bool,
    #[arg(long = "mc-samples", global = true, default_value_t = 100_000)]
    pub mc_samples: usize,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Small-jump cutoff; chosen from the model when absent.
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,
    /// Probe count for the renewal check.
    #[arg(long, global = true, default_value_t = RENEWAL_PROBES)]
    pub probes: usize,
    #[arg(long, global = true, default_value = SchemeRegistry::DEFAULT)]
    pub scheme: String,
}

/// Checked arguments plus the loaded model.
#[derive(Debug)]
pub struct RunConfig {
    pub command: Command,
    pub spec: SubordinatorSpec,
    pub delta: f64,
    pub cells: usize,
    pub xmax: Option<f64>,
    pub out: PathBuf,
    pub plot: bool,
    pub mc_samples: usize,
    pub seed: u64,
    pub cutoff: Option<f64>,
    pub probes: usize,
    pub scheme: String,
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, Failure> {
        let a = cli.common;
        let path = a.spec.ok_or_else(|| invalid("--spec is required"))?;
        if !(a.delta > 0.0 && a.delta < 1.0) {
            return Err(invalid(format!("--delta {} must lie in (0, 1)", a.delta)));
        }
        if a.cells < 2 {
            return Err(invalid(format!("--cells {} must be at least 2", a.cells)));
        }
        if let Some(x) = a.xmax {
            if !(x > 0.0 && x.is_finite()) {
                return Err(invalid(format!("--xmax {x} must be positive and finite")));
            }
        }
        if a.mc_samples < 100 {
            return Err(invalid(format!(
                "--mc-samples {} must be at least 100",
                a.mc_samples
            )));
        }
        if let Some(eps) = a.cutoff {
            check_cutoff(eps).map_err(|e| invalid(format!("--cutoff: {e}")))?;
        }
        if a.probes < 2 {
            return Err(invalid(format!("--probes {} must be at least 2", a.probes)));
        }
        SchemeRegistry::global().get(&a.scheme)?;
        if let Command::Transform { rho: Some(rho), .. } = cli.command {
            if !rho.is_finite() {
                return Err(invalid(format!("--rho {rho} must be finite")));
            }
        }
        if let Command::Moments { order } = cli.command {
            if order == 0 {
                return Err(invalid("--order must be at least 1"));
            }
        }
        let spec = SubordinatorSpec::load(&path).map_err(|e| match e {
            expfun::Error::Io(io) => invalid(format!("{}: {io}", path.display())),
            e => e.into(),
        })?;
        Ok(Self {
            command: cli.command,
            spec,
            delta: a.delta,
            cells: a.cells,
            xmax: a.xmax,
            out: a.out,
            plot: a.plot,
            mc_samples: a.mc_samples,
            seed: a.seed,
            cutoff: a.cutoff,
            probes: a.probes,
            scheme: a.scheme,
        })
    }
}
