//! Bi-modal path planning.
//!
//! The planner first looks for a walking route on the ground plane. Only
//! if none exists does it take the explored ground cell nearest the goal
//! and continue with a 3D search that drops toward the ground whenever the
//! cell below is free, so the robot lands as soon as an obstacle is
//! cleared.

mod modal;
mod search;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, GridIndex, OccupancyGrid, WorldPoint};

pub use modal::{
    Mode, ModalPath, ModalWaypoint, PathDefect, PathParseError, Transition, WorldWaypoint,
};
pub use search::{path_cost, ClosedSet};

use search::{astar, moves_2d, moves_3d, SearchParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity2d {
    Four,
    #[default]
    Eight,
}

/// `Ten` is the eight planar moves plus straight up and down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity3d {
    #[default]
    Six,
    Ten,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    #[default]
    Euclidean,
    Manhattan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub connectivity_2d: Connectivity2d,
    pub connectivity_3d: Connectivity3d,
    pub heuristic: Heuristic,
}

impl SearchConfig {
    /// Manhattan distance overestimates diagonal moves, so it is only
    /// admissible with axis-only connectivity.
    pub fn validate(&self) -> Result<(), PlanError> {
        let axis_only = self.connectivity_2d == Connectivity2d::Four
            && self.connectivity_3d == Connectivity3d::Six;
        if self.heuristic == Heuristic::Manhattan && !axis_only {
            return Err(PlanError::InadmissibleHeuristic);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("endpoint {0} is outside the grid")]
    OutOfBounds(GridIndex),
    #[error("endpoint {0} is occupied")]
    Occupied(GridIndex),
    #[error("ground search endpoint {0} is not on the ground plane")]
    NotOnGround(GridIndex),
    #[error("manhattan heuristic requires four/six connectivity")]
    InadmissibleHeuristic,
    #[error("no ground or aerial path between {start} and {goal}")]
    NoPath { start: GridIndex, goal: GridIndex },
    #[error("cannot pick a nearest point from an empty explored set")]
    EmptyExplored,
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl PlanError {
    /// True for failures caused by unusable endpoints or configuration, as
    /// opposed to a well-posed query with no answer.
    pub fn is_invalid_input(&self) -> bool {
        !matches!(self, PlanError::NoPath { .. })
    }
}

/// Result of the ground-plane search. The closed set is kept in both
/// cases; on failure it seeds the aerial handoff.
#[derive(Debug, Clone)]
pub struct GroundSearch {
    pub path: Option<Vec<GridIndex>>,
    pub closed: ClosedSet,
}

impl GroundSearch {
    pub fn cost(&self) -> Option<f64> {
        self.path.as_deref().map(path_cost)
    }
}

fn check_endpoint(grid: &OccupancyGrid, i: GridIndex) -> Result<(), PlanError> {
    if !grid.in_bounds(i) {
        return Err(PlanError::OutOfBounds(i));
    }
    if !grid.is_free(i) {
        return Err(PlanError::Occupied(i));
    }
    Ok(())
}

/// Minimum-cost A* path on the `z = 0` plane.
pub fn plan_2d(
    grid: &OccupancyGrid,
    start: GridIndex,
    goal: GridIndex,
    cfg: &SearchConfig,
) -> Result<GroundSearch, PlanError> {
    cfg.validate()?;
    for i in [start, goal] {
        check_endpoint(grid, i)?;
        if !i.is_ground() {
            return Err(PlanError::NotOnGround(i));
        }
    }
    let moves = moves_2d(cfg.connectivity_2d);
    let params = SearchParams { moves: &moves, heuristic: cfg.heuristic, prefer_descent: false };
    let outcome = astar(grid, start, goal, &params);
    Ok(GroundSearch { path: outcome.path, closed: outcome.closed })
}

/// Explored cell closest to `goal` by Euclidean distance; ties go to the
/// lexicographically smallest index.
pub fn nearest_to_goal<I>(explored: I, goal: GridIndex) -> Result<GridIndex, PlanError>
where
    I: IntoIterator<Item = GridIndex>,
{
    explored
        .into_iter()
        .min_by_key(|&i| (i.dist_sq(goal), i))
        .ok_or(PlanError::EmptyExplored)
}

/// 3D A* that, whenever the expanded cell has a free cell beneath it,
/// expands only downward. The cell's other neighbors are deferred behind
/// every undeferred open entry, which keeps the search complete while
/// forcing a landing as soon as one is possible. Not cost-optimal.
/// `Ok(None)` when the goal is unreachable.
pub fn plan_3d_landing(
    grid: &OccupancyGrid,
    start: GridIndex,
    goal: GridIndex,
    cfg: &SearchConfig,
) -> Result<Option<Vec<GridIndex>>, PlanError> {
    cfg.validate()?;
    check_endpoint(grid, start)?;
    check_endpoint(grid, goal)?;
    let moves = moves_3d(cfg.connectivity_3d);
    let params = SearchParams { moves: &moves, heuristic: cfg.heuristic, prefer_descent: true };
    Ok(astar(grid, start, goal, &params).path)
}

/// Full bi-modal plan between two world points.
///
/// Walks whenever a ground route exists. Otherwise walks to the explored
/// ground cell nearest the goal, then flies from there.
pub fn plan_bimodal(
    grid: &OccupancyGrid,
    start: WorldPoint,
    goal: WorldPoint,
    cfg: &SearchConfig,
) -> Result<ModalPath, PlanError> {
    cfg.validate()?;
    let s = grid.world_to_grid(start)?;
    let g = grid.world_to_grid(goal)?;
    plan_bimodal_cells(grid, s, g, cfg)
}

pub fn plan_bimodal_cells(
    grid: &OccupancyGrid,
    start: GridIndex,
    goal: GridIndex,
    cfg: &SearchConfig,
) -> Result<ModalPath, PlanError> {
    check_endpoint(grid, start)?;
    check_endpoint(grid, goal)?;

    // Airborne endpoints cannot be joined on the ground plane.
    let prefix = if start.is_ground() && goal.is_ground() {
        let ground = plan_2d(grid, start, goal, cfg)?;
        if let Some(path) = ground.path {
            return Ok(ModalPath::from_cells(&path));
        }
        let handoff = nearest_to_goal(ground.closed.nodes(), goal)?;
        ground.closed.path_to(handoff).expect("handoff comes from the closed set")
    } else {
        vec![start]
    };

    let handoff = *prefix.last().expect("prefix holds at least the start");
    let aerial = plan_3d_landing(grid, handoff, goal, cfg)?
        .ok_or(PlanError::NoPath { start, goal })?;

    let mut cells = prefix;
    cells.extend_from_slice(&aerial[1..]);
    Ok(ModalPath::from_cells(&cells))
}
