use std::fs;
use std::path::{Path, PathBuf};

use bimodal_nav::kinematics::Axis;
use bimodal_nav::planner::{plan_bimodal, Mode, ModalPath, Transition};
use bimodal_nav::sim::{
    calibrate_noise, compute_errors, compute_errors_in, run_closed_loop, run_mission, run_open_loop,
    write_joint_csv, write_trace_csv, DisturbanceModel, Granularity, Polyline, RunOutput,
};
use bimodal_nav::OccupancyGrid;
use nalgebra::Vector2;

use crate::config::{DisturbanceSection, RunConfig};
use crate::error::{CliError, EXIT_BUDGET, EXIT_OK};

/// What a successful command prints and exits with.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub lines: Vec<String>,
    pub written: Vec<PathBuf>,
}

struct Output<'a> {
    dir: &'a Path,
    outcome: Outcome,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, outcome: Outcome::default() })
    }

    fn say(&mut self, line: impl Into<String>) {
        self.outcome.lines.push(line.into());
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        self.outcome.written.push(path);
        Ok(())
    }

    fn write_with(
        &mut self,
        name: &str,
        render: impl FnOnce(&mut Vec<u8>) -> Result<(), bimodal_nav::sim::SimError>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.write(name, buf)
    }

    fn finish(mut self, code: i32) -> Outcome {
        for p in &self.outcome.written {
            self.outcome.lines.push(format!("wrote {}", p.display()));
        }
        self.outcome.code = code;
        self.outcome
    }
}

fn path_summary(path: &ModalPath) -> Vec<String> {
    vec![
        format!("waypoints: {}", path.len()),
        format!("GROUND waypoints: {}", path.count_mode(Mode::Ground)),
        format!("AIR waypoints: {}", path.count_mode(Mode::Air)),
        format!("TAKEOFF: {}", path.count_transition(Transition::Takeoff)),
        format!("LANDING: {}", path.count_transition(Transition::Landing)),
    ]
}

pub fn plan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let (start, goal) = cfg.endpoints()?;
    let path = plan_bimodal(&grid, start, goal, &cfg.search)?;
    let mut out = Output::new(&cfg.output.dir)?;
    for line in path_summary(&path) {
        out.say(line);
    }
    out.write("path.txt", path.to_text())?;
    Ok(out.finish(EXIT_OK))
}

fn reference_polyline(cfg: &RunConfig) -> Result<(Polyline, Option<(OccupancyGrid, ModalPath)>), CliError> {
    if let Some(path) = cfg.follow_path()? {
        if cfg.follow.line.is_some() {
            return Err(CliError::invalid("give either a path file or --line, not both"));
        }
        if !path.is_ground_only() {
            return Err(CliError::invalid(
                "path contains AIR waypoints; use `mission` to execute bi-modal paths",
            ));
        }
        let grid = cfg.grid()?;
        let world = path.to_world(&grid).map_err(|e| CliError::invalid(format!("path does not fit the grid: {e}")))?;
        let line = Polyline::new(world.iter().map(|w| Vector2::new(w.point.x, w.point.y)))
            .ok_or_else(|| CliError::invalid("path file has no waypoints"))?;
        return Ok((line, Some((grid, path))));
    }
    let length = cfg.follow.line.ok_or_else(|| CliError::invalid("give --line LENGTH or --path FILE"))?;
    if !(length.is_finite() && length >= 0.0) {
        return Err(CliError::invalid(format!("line length must be non-negative, got {length}")));
    }
    let direction = match cfg.follow.axis.unwrap_or(Axis::X) {
        Axis::X => Vector2::x(),
        Axis::Y => Vector2::y(),
    };
    Ok((Polyline::line(Vector2::zeros(), direction, length), None))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Extras {
    pub trace: bool,
    pub joint_log: bool,
}

fn write_extras(out: &mut Output, run: &RunOutput, horizon: usize, extras: Extras, prefix: &str) -> Result<(), CliError> {
    if extras.trace {
        out.write_with(&format!("{prefix}mpc_trace.csv"), |b| write_trace_csv(&run.trace, horizon, b))?;
    }
    if extras.joint_log {
        out.write_with(&format!("{prefix}joints.csv"), |b| write_joint_csv(&run.joints, b))?;
    }
    Ok(())
}

pub fn follow(cfg: &RunConfig, extras: Extras) -> Result<Outcome, CliError> {
    let harness = cfg.harness()?;
    let (line, placed) = reference_polyline(cfg)?;
    let closed = run_closed_loop(&line, &harness)?;
    let open = run_open_loop(&line, &harness)?;
    let open_report = compute_errors(&open.log, Granularity::Fullstep)?;
    let closed_report = compute_errors(&closed.log, Granularity::Fullstep)?.with_baseline(&open_report);
    let gain = closed_report.improvement_over(&open_report);

    let mut out = Output::new(&cfg.output.dir)?;
    out.say(format!("closed-loop RMSE: {:.4} m, max {:.4} m", closed_report.rmse_m, closed_report.max_error_m));
    out.say(format!("open-loop RMSE: {:.4} m, max {:.4} m", open_report.rmse_m, open_report.max_error_m));
    out.say(format!("improvement: RMSE {:.2}%, max {:.2}%", gain.rmse_pct, gain.max_error_pct));
    out.write_with("closed_loop.csv", |b| closed.log.write_csv(b))?;
    out.write_with("open_loop.csv", |b| open.log.write_csv(b))?;
    out.write("closed_loop_report.json", closed_report.to_json())?;
    out.write("open_loop_report.json", open_report.to_json())?;
    write_extras(&mut out, &closed, harness.mpc.horizon, extras, "")?;
    let (grid, path) = match &placed {
        Some((g, p)) => (Some(g), Some(p)),
        None => (None, None),
    };
    out.write("manifest.toml", cfg.manifest(grid, path).to_toml())?;

    let code = if closed.converged {
        EXIT_OK
    } else {
        out.say(format!("step budget exhausted after {} steps", closed.steps));
        EXIT_BUDGET
    };
    Ok(out.finish(code))
}

pub fn mission(cfg: &RunConfig, extras: Extras) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let (start, goal) = cfg.endpoints()?;
    let harness = cfg.harness()?;
    let m = run_mission(&grid, start, goal, &cfg.search, &harness)?;
    let report = compute_errors_in(&m.output.log, Granularity::Fullstep, Some(Mode::Ground))?;

    let mut out = Output::new(&cfg.output.dir)?;
    for line in path_summary(&m.path) {
        out.say(line);
    }
    let phases: Vec<String> = m.output.log.phases().iter().map(Mode::to_string).collect();
    out.say(format!("phases: {}", phases.join(" -> ")));
    out.say(format!("ground RMSE: {:.4} m, max {:.4} m", report.rmse_m, report.max_error_m));
    out.write("path.txt", m.path.to_text())?;
    out.write_with("trajectory.csv", |b| m.output.log.write_csv(b))?;
    out.write("report.json", report.to_json())?;
    write_extras(&mut out, &m.output, harness.mpc.horizon, Extras { trace: true, ..extras }, "")?;
    out.write("manifest.toml", cfg.manifest(Some(&grid), None).to_toml())?;

    let code = if m.output.converged {
        EXIT_OK
    } else {
        out.say("step budget exhausted on a ground segment");
        EXIT_BUDGET
    };
    Ok(out.finish(code))
}

pub struct CalibrationRequest {
    pub target_rmse: f64,
    pub seeds: u64,
}

pub fn calibrate(cfg: &RunConfig, req: &CalibrationRequest) -> Result<Outcome, CliError> {
    let harness = cfg.harness()?;
    let (line, _) = reference_polyline(cfg)?;
    let base = DisturbanceModel { enabled: true, ..harness.disturbance };
    let cal = calibrate_noise(&line, &harness, &base, 0..req.seeds, req.target_rmse)?;
    let fitted = DisturbanceSection { seed: cfg.disturbance.seed, ..DisturbanceSection::from_model(&cal.model) };

    let mut out = Output::new(&cfg.output.dir)?;
    out.say(format!("scale factor: {}", cal.scale));
    out.say(format!("step_length_noise: {}", fitted.step_length_noise));
    out.say(format!("heading_noise_deg: {}", fitted.heading_noise_deg));
    out.say(format!("heading_bias_deg: {}", fitted.heading_bias_deg));
    out.say(format!(
        "mean open-loop RMSE over seeds 0..{}: {:.5} m",
        req.seeds, cal.mean_open_loop_rmse_m
    ));
    #[derive(serde::Serialize)]
    struct Snippet<'a> {
        disturbance: &'a DisturbanceSection,
    }
    let body = toml::to_string(&Snippet { disturbance: &fitted }).expect("serializes");
    let text = format!(
        "# calibrated: mean open-loop full-step RMSE {} m over seeds 0..{} on a {} m line\n{body}",
        cal.mean_open_loop_rmse_m,
        req.seeds,
        line.length()
    );
    out.write("calibration.toml", text)?;
    Ok(out.finish(EXIT_OK))
}
