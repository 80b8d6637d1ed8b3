use std::path::PathBuf;
use std::process::ExitCode;

use bimodal_nav::kinematics::Axis;
use bimodal_nav_cli::commands::{self, CalibrationRequest, Extras};
use bimodal_nav_cli::{CliError, RunConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Bi-modal (walk and fly) path planning and MPC path following.
#[derive(Parser)]
#[command(name = "bimodal-nav", version)]
struct Cli {
    /// Disturbance seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config (default `out`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Endpoints {
    /// Occupancy grid file.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Start point `x,y,z` in meters.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    start: Option<[f64; 3]>,
    /// Goal point `x,y,z` in meters.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    goal: Option<[f64; 3]>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a bi-modal path and write it as a waypoint file.
    Plan {
        #[command(flatten)]
        endpoints: Endpoints,
    },
    /// Track a ground path with and without the controller.
    Follow {
        /// Straight line of this length from the origin, meters.
        #[arg(long, conflicts_with = "path")]
        line: Option<f64>,
        /// Direction of `--line`.
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        /// Ground-only waypoint file (needs `--grid`).
        #[arg(long)]
        path: Option<PathBuf>,
        /// Grid that places the waypoint file's cells.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Run without injected noise.
        #[arg(long)]
        no_disturbance: bool,
        /// Also write the controller trace.
        #[arg(long)]
        trace: bool,
        /// Also write touchdown joint angles.
        #[arg(long)]
        joint_log: bool,
    },
    /// Plan and execute a full mission.
    Mission {
        #[command(flatten)]
        endpoints: Endpoints,
        /// Also write touchdown joint angles.
        #[arg(long)]
        joint_log: bool,
    },
    /// Fit the disturbance scale to a target open-loop RMSE.
    CalibrateNoise {
        /// Target mean open-loop full-step RMSE, meters.
        #[arg(long, default_value_t = 0.0977)]
        target_rmse: f64,
        /// Number of seeds, starting at 0.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Length of the straight calibration line, meters.
        #[arg(long, default_value_t = 3.6)]
        line: f64,
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
    },
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [x, y, z] = parts[..] else {
        return Err(format!("expected `x,y,z`, got `{s}`"));
    };
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("bad coordinate `{v}`: {e}"));
    Ok([num(x)?, num(y)?, num(z)?])
}

fn apply_endpoints(cfg: &mut RunConfig, e: Endpoints) {
    if let Some(g) = e.grid {
        cfg.mission.grid = Some(g);
        cfg.mission.grid_inline = None;
    }
    if e.start.is_some() {
        cfg.mission.start = e.start;
    }
    if e.goal.is_some() {
        cfg.mission.goal = e.goal;
    }
}

fn axis(a: AxisArg) -> Axis {
    match a {
        AxisArg::X => Axis::X,
        AxisArg::Y => Axis::Y,
    }
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.disturbance.seed = seed;
    }
    if let Some(dir) = cli.out_dir {
        cfg.output.dir = dir;
    }
    match cli.command {
        Command::Plan { endpoints } => {
            apply_endpoints(&mut cfg, endpoints);
            commands::plan(&cfg)
        }
        Command::Follow { line, axis: a, path, grid, no_disturbance, trace, joint_log } => {
            if line.is_some() || path.is_some() {
                cfg.follow.line = line;
                cfg.follow.path = path;
                cfg.follow.path_inline = None;
            }
            if let Some(a) = a {
                cfg.follow.axis = Some(axis(a));
            }
            if let Some(g) = grid {
                cfg.mission.grid = Some(g);
                cfg.mission.grid_inline = None;
            }
            if no_disturbance {
                cfg.disturbance.enabled = false;
            }
            commands::follow(&cfg, Extras { trace, joint_log })
        }
        Command::Mission { endpoints, joint_log } => {
            apply_endpoints(&mut cfg, endpoints);
            commands::mission(&cfg, Extras { trace: true, joint_log })
        }
        Command::CalibrateNoise { target_rmse, seeds, line, axis: a } => {
            cfg.follow.line = Some(line);
            cfg.follow.path = None;
            cfg.follow.path_inline = None;
            cfg.follow.axis = Some(a.map(axis).unwrap_or(Axis::X));
            commands::calibrate(&cfg, &CalibrationRequest { target_rmse, seeds })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
