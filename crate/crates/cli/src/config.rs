//! TOML run configuration.
//!
//! Lengths are meters and angles degrees. Every key is optional; missing
//! ones take the library defaults. A fully resolved configuration, with the
//! grid and any path file embedded, doubles as the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use bimodal_nav::kinematics::{AngleRange, Axis, CanterGait, LimbGeometry};
use bimodal_nav::mpc::MpcConfig;
use bimodal_nav::planner::{ModalPath, SearchConfig};
use bimodal_nav::sim::{DisturbanceModel, Harness, SimConfig};
use bimodal_nav::{OccupancyGrid, WorldPoint};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mission: MissionSection,
    pub follow: FollowSection,
    pub geometry: GeometrySection,
    pub mpc: MpcSection,
    pub disturbance: DisturbanceSection,
    pub search: SearchConfig,
    pub sim: SimConfig,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_inline: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FollowSection {
    /// Straight line from the origin, meters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    /// Waypoint file; needs the mission grid to place its cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_inline: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub femur_length: f64,
    pub tibia_length: f64,
    pub body_height: f64,
    pub shoulder_yaw_limits_deg: [f64; 2],
    pub hip_pitch_limits_deg: [f64; 2],
    pub knee_pitch_limits_deg: [f64; 2],
    /// Gait yaw of the diagonal strokes.
    pub gait_yaw_deg: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = LimbGeometry::default();
        let deg = |r: AngleRange| [r.min.to_degrees(), r.max.to_degrees()];
        Self {
            femur_length: g.femur_length,
            tibia_length: g.tibia_length,
            body_height: g.body_height,
            shoulder_yaw_limits_deg: deg(g.shoulder_yaw_limits),
            hip_pitch_limits_deg: deg(g.hip_pitch_limits),
            knee_pitch_limits_deg: deg(g.knee_pitch_limits),
            gait_yaw_deg: 45.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcSection {
    pub q_x: f64,
    pub q_y: f64,
    pub r: f64,
    pub horizon: usize,
    pub max_iterations: usize,
    pub step_tolerance: f64,
}

impl Default for MpcSection {
    fn default() -> Self {
        let m = MpcConfig::default();
        Self {
            q_x: m.q_x,
            q_y: m.q_y,
            r: m.r,
            horizon: m.horizon,
            max_iterations: m.max_iterations,
            step_tolerance: m.step_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceSection {
    pub seed: u64,
    pub enabled: bool,
    pub step_length_noise: f64,
    pub heading_noise_deg: f64,
    pub heading_bias_deg: f64,
}

impl Default for DisturbanceSection {
    fn default() -> Self {
        Self::from_model(&DisturbanceModel::default())
    }
}

impl DisturbanceSection {
    pub fn from_model(d: &DisturbanceModel) -> Self {
        Self {
            seed: d.seed,
            enabled: d.enabled,
            step_length_noise: d.step_length_noise,
            heading_noise_deg: d.heading_noise.to_degrees(),
            heading_bias_deg: d.heading_bias.to_degrees(),
        }
    }

    pub fn model(&self) -> DisturbanceModel {
        DisturbanceModel {
            seed: self.seed,
            enabled: self.enabled,
            step_length_noise: self.step_length_noise,
            heading_noise: self.heading_noise_deg.to_radians(),
            heading_bias: self.heading_bias_deg.to_radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::invalid(format!("bad configuration: {e}")))
    }

    /// Reads a config file. Relative file references inside it are taken
    /// relative to the file's own directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut cfg = Self::parse(&read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.mission.grid, &mut cfg.follow.path].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn grid(&self) -> Result<OccupancyGrid, CliError> {
        let text = match (&self.mission.grid, &self.mission.grid_inline) {
            (Some(_), Some(_)) => return Err(CliError::invalid("set either `grid` or `grid_inline`, not both")),
            (None, None) => return Err(CliError::invalid("no grid given (use --grid or `grid` in [mission])")),
            (Some(p), None) => read_text(p)?,
            (None, Some(t)) => t.clone(),
        };
        text.parse().map_err(|e| CliError::invalid(format!("bad grid: {e}")))
    }

    pub fn follow_path(&self) -> Result<Option<ModalPath>, CliError> {
        let text = match (&self.follow.path, &self.follow.path_inline) {
            (Some(_), Some(_)) => return Err(CliError::invalid("set either `path` or `path_inline`, not both")),
            (None, None) => return Ok(None),
            (Some(p), None) => read_text(p)?,
            (None, Some(t)) => t.clone(),
        };
        text.parse().map(Some).map_err(|e| CliError::invalid(format!("bad path file: {e}")))
    }

    pub fn endpoints(&self) -> Result<(WorldPoint, WorldPoint), CliError> {
        let point = |p: Option<[f64; 3]>, name: &str| {
            p.map(|[x, y, z]| WorldPoint::new(x, y, z))
                .ok_or_else(|| CliError::invalid(format!("no {name} point given")))
        };
        Ok((point(self.mission.start, "start")?, point(self.mission.goal, "goal")?))
    }

    pub fn geometry(&self) -> Result<LimbGeometry, CliError> {
        let g = &self.geometry;
        let range = |[lo, hi]: [f64; 2]| AngleRange::from_degrees(lo, hi);
        let geom = LimbGeometry {
            femur_length: g.femur_length,
            tibia_length: g.tibia_length,
            body_height: g.body_height,
            shoulder_yaw_limits: range(g.shoulder_yaw_limits_deg),
            hip_pitch_limits: range(g.hip_pitch_limits_deg),
            knee_pitch_limits: range(g.knee_pitch_limits_deg),
        };
        geom.validate().map_err(|e| CliError::invalid(format!("bad geometry: {e}")))?;
        Ok(geom)
    }

    pub fn harness(&self) -> Result<Harness, CliError> {
        let gait = CanterGait::new(self.geometry()?, self.geometry.gait_yaw_deg.to_radians())
            .map_err(|e| CliError::invalid(format!("bad gait: {e}")))?;
        let m = &self.mpc;
        let mpc = MpcConfig {
            q_x: m.q_x,
            q_y: m.q_y,
            r: m.r,
            horizon: m.horizon,
            a_max: gait.max_step(),
            max_iterations: m.max_iterations,
            step_tolerance: m.step_tolerance,
        };
        self.search.validate().map_err(|e| CliError::invalid(e.to_string()))?;
        Harness::new(gait, mpc, self.disturbance.model(), self.sim).map_err(|e| CliError::invalid(e.to_string()))
    }

    /// This configuration with every file reference replaced by its
    /// contents.
    pub fn manifest(&self, grid: Option<&OccupancyGrid>, path: Option<&ModalPath>) -> Self {
        let mut m = self.clone();
        if let Some(g) = grid {
            m.mission.grid = None;
            m.mission.grid_inline = Some(g.to_text());
        }
        if let Some(p) = path {
            m.follow.path = None;
            m.follow.path_inline = Some(p.to_text());
        }
        m
    }
}
