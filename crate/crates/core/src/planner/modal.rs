//! Mode-tagged waypoint paths and their line-oriented text format.
//!
//! One waypoint per line: `x y z MODE [TRANSITION]`, e.g.
//!
//! ```text
//! 9 4 0 GROUND
//! 9 4 1 AIR TAKEOFF
//! 11 4 0 GROUND LANDING
//! ```

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridIndex, OccupancyGrid, WorldPoint};

use super::search::{moves_2d, moves_3d, Move};
use super::SearchConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Ground,
    Air,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Transition {
    #[default]
    None,
    Takeoff,
    Landing,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ground => "GROUND",
            Mode::Air => "AIR",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "GROUND" => Ok(Mode::Ground),
            "AIR" => Ok(Mode::Air),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transition::None => "NONE",
            Transition::Takeoff => "TAKEOFF",
            Transition::Landing => "LANDING",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModalWaypoint {
    pub index: GridIndex,
    pub mode: Mode,
    pub transition: Transition,
}

/// A waypoint mapped into the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldWaypoint {
    pub point: WorldPoint,
    pub mode: Mode,
    pub transition: Transition,
}

/// Ordered, mode-tagged cell sequence from start to goal.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModalPath {
    pub waypoints: Vec<ModalWaypoint>,
}

/// A reason a path fails validation against a grid.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathDefect {
    #[error("path is empty")]
    Empty,
    #[error("waypoint {position} at {index} is not free")]
    Blocked { position: usize, index: GridIndex },
    #[error("waypoints {position} and {} are not neighbors", position + 1)]
    NotAdjacent { position: usize },
    #[error("waypoint {position}: mode {mode} does not match height z = {z}")]
    ModeMismatch { position: usize, mode: Mode, z: usize },
    #[error("waypoint {position}: transition {found} where {expected} was required")]
    BadTransition { position: usize, found: Transition, expected: Transition },
}

#[derive(Debug, Error)]
#[error("line {line}: {reason}")]
pub struct PathParseError {
    pub line: usize,
    pub reason: String,
}

impl ModalPath {
    /// Tags a raw cell sequence: `z > 0` is AIR, mode switches get
    /// TAKEOFF/LANDING on the first waypoint of the new mode.
    pub fn from_cells(cells: &[GridIndex]) -> Self {
        let mut waypoints: Vec<ModalWaypoint> = Vec::with_capacity(cells.len());
        for &index in cells {
            let mode = if index.is_ground() { Mode::Ground } else { Mode::Air };
            let transition = match (waypoints.last().map(|w| w.mode), mode) {
                (Some(Mode::Ground), Mode::Air) => Transition::Takeoff,
                (Some(Mode::Air), Mode::Ground) => Transition::Landing,
                _ => Transition::None,
            };
            waypoints.push(ModalWaypoint { index, mode, transition });
        }
        Self { waypoints }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = GridIndex> + '_ {
        self.waypoints.iter().map(|w| w.index)
    }

    pub fn count_mode(&self, mode: Mode) -> usize {
        self.waypoints.iter().filter(|w| w.mode == mode).count()
    }

    pub fn count_transition(&self, t: Transition) -> usize {
        self.waypoints.iter().filter(|w| w.transition == t).count()
    }

    pub fn is_ground_only(&self) -> bool {
        self.waypoints.iter().all(|w| w.mode == Mode::Ground)
    }

    /// Replays the path against `grid`: cells free, moves legal under
    /// `cfg`, and mode tags consistent with height.
    pub fn validate(&self, grid: &OccupancyGrid, cfg: &SearchConfig) -> Result<(), PathDefect> {
        if self.waypoints.is_empty() {
            return Err(PathDefect::Empty);
        }
        let planar = moves_2d(cfg.connectivity_2d);
        let spatial = moves_3d(cfg.connectivity_3d);
        let mut prev_mode = None;
        for (position, w) in self.waypoints.iter().enumerate() {
            if !grid.is_free(w.index) {
                return Err(PathDefect::Blocked { position, index: w.index });
            }
            if (w.mode == Mode::Air) != (w.index.z > 0) {
                return Err(PathDefect::ModeMismatch { position, mode: w.mode, z: w.index.z });
            }
            let expected = match (prev_mode, w.mode) {
                (Some(Mode::Ground), Mode::Air) => Transition::Takeoff,
                (Some(Mode::Air), Mode::Ground) => Transition::Landing,
                _ => Transition::None,
            };
            if w.transition != expected {
                return Err(PathDefect::BadTransition { position, found: w.transition, expected });
            }
            prev_mode = Some(w.mode);
        }
        for (position, pair) in self.waypoints.windows(2).enumerate() {
            let (a, b) = (pair[0].index, pair[1].index);
            let m = Move::between(a, b);
            let both_ground = a.is_ground() && b.is_ground();
            let legal = (both_ground && planar.contains(&m)) || spatial.contains(&m);
            if !legal || super::search::step(grid, a, m).is_none() {
                return Err(PathDefect::NotAdjacent { position });
            }
        }
        Ok(())
    }

    /// Cell centers in the world frame, preserving order and tags.
    pub fn to_world(&self, grid: &OccupancyGrid) -> Result<Vec<WorldWaypoint>, crate::grid::GridError> {
        self.waypoints
            .iter()
            .map(|w| {
                Ok(WorldWaypoint {
                    point: grid.grid_to_world(w.index)?,
                    mode: w.mode,
                    transition: w.transition,
                })
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.waypoints {
            let GridIndex { x, y, z } = w.index;
            let _ = match w.transition {
                Transition::None => writeln!(out, "{x} {y} {z} {}", w.mode),
                t => writeln!(out, "{x} {y} {z} {} {t}", w.mode),
            };
        }
        out
    }
}

impl FromStr for ModalPath {
    type Err = PathParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut waypoints = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let err = |reason: String| PathParseError { line, reason };
            let fields: Vec<&str> = content.split_whitespace().collect();
            if !(4..=5).contains(&fields.len()) {
                return Err(err(format!("expected `x y z MODE [TRANSITION]`, got {} fields", fields.len())));
            }
            let coord = |s: &str| s.parse::<usize>().map_err(|e| err(format!("bad index `{s}`: {e}")));
            let index = GridIndex::new(coord(fields[0])?, coord(fields[1])?, coord(fields[2])?);
            let mode: Mode = fields[3].parse().map_err(err)?;
            let transition = match fields.get(4) {
                None => Transition::None,
                Some(&"TAKEOFF") => Transition::Takeoff,
                Some(&"LANDING") => Transition::Landing,
                Some(other) => return Err(err(format!("unknown transition `{other}`"))),
            };
            waypoints.push(ModalWaypoint { index, mode, transition });
        }
        Ok(Self { waypoints })
    }
}
