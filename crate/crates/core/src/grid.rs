//! 3D occupancy voxel world.
//!
//! Cells are addressed by [`GridIndex`]; `z = 0` is the walkable ground
//! plane. The grid is immutable once built, and every index outside the
//! declared dimensions is treated as occupied.
//!
//! # Text format
//!
//! ```text
//! # comment
//! dims 3 3 2
//! resolution 0.5
//! origin 0 0 0
//! obstacle 1 1 0
//! ```
//!
//! The header lines must appear in that order. Blank lines and lines
//! starting with `#` are ignored anywhere.

use std::fmt::{self, Write as _};
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer cell address. Ordering is lexicographic on `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl GridIndex {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Self { x, y, z }
    }

    /// Offset by a signed delta, `None` on underflow.
    pub fn offset(self, dx: i64, dy: i64, dz: i64) -> Option<Self> {
        let shift = |v: usize, d: i64| -> Option<usize> {
            let r = v as i64 + d;
            (r >= 0).then_some(r as usize)
        };
        Some(Self::new(shift(self.x, dx)?, shift(self.y, dy)?, shift(self.z, dz)?))
    }

    pub fn is_ground(self) -> bool {
        self.z == 0
    }

    /// Squared Euclidean distance in cell units.
    pub fn dist_sq(self, other: Self) -> u64 {
        let d = |a: usize, b: usize| (a as i64 - b as i64).unsigned_abs();
        let (dx, dy, dz) = (d(self.x, other.x), d(self.y, other.y), d(self.z, other.z));
        dx * dx + dy * dy + dz * dz
    }
}

impl fmt::Display for GridIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// A point in the world frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(self, other: Self) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid dimensions must all be at least 1, got {0:?}")]
    EmptyDims([usize; 3]),
    #[error("resolution must be positive and finite, got {0}")]
    BadResolution(f64),
    #[error("origin must be finite")]
    BadOrigin,
    #[error("index {index} is outside grid of dims {dims:?}")]
    OutOfBounds { index: GridIndex, dims: [usize; 3] },
    #[error("point ({}, {}, {}) lies outside the grid extent", .0.x, .0.y, .0.z)]
    OutsideExtent(WorldPoint),
}

/// Errors raised while reading the grid text format. Each carries the
/// 1-based line number it was detected on.
#[derive(Debug, Error)]
pub enum GridParseError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: `{keyword}` expects {expected} values, found {found}")]
    ArityMismatch { line: usize, keyword: String, expected: usize, found: usize },
    #[error("line {line}: obstacle {index} is outside dims {dims:?}")]
    ObstacleOutOfBounds { line: usize, index: GridIndex, dims: [usize; 3] },
    #[error("line {line}: malformed obstacle: {reason}")]
    MalformedObstacle { line: usize, reason: String },
    #[error("grid file ended before the {0} header line")]
    MissingHeader(&'static str),
    #[error(transparent)]
    Invalid(#[from] GridError),
    #[error("failed to read grid: {0}")]
    Io(#[from] std::io::Error),
}

/// Immutable boolean voxel field with a world-frame transform.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    dims: [usize; 3],
    resolution: f64,
    origin: WorldPoint,
    occupied: Vec<bool>,
}

impl OccupancyGrid {
    /// An obstacle-free grid.
    pub fn new(dims: [usize; 3], resolution: f64, origin: WorldPoint) -> Result<Self, GridError> {
        if dims.iter().any(|&d| d == 0) {
            return Err(GridError::EmptyDims(dims));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(GridError::BadResolution(resolution));
        }
        if ![origin.x, origin.y, origin.z].iter().all(|v| v.is_finite()) {
            return Err(GridError::BadOrigin);
        }
        Ok(Self { dims, resolution, origin, occupied: vec![false; dims[0] * dims[1] * dims[2]] })
    }

    pub fn with_obstacles<I>(
        dims: [usize; 3],
        resolution: f64,
        origin: WorldPoint,
        obstacles: I,
    ) -> Result<Self, GridError>
    where
        I: IntoIterator<Item = GridIndex>,
    {
        let mut grid = Self::new(dims, resolution, origin)?;
        for index in obstacles {
            let slot = grid.linear(index).ok_or(GridError::OutOfBounds { index, dims })?;
            grid.occupied[slot] = true;
        }
        Ok(grid)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> WorldPoint {
        self.origin
    }

    pub fn in_bounds(&self, i: GridIndex) -> bool {
        i.x < self.dims[0] && i.y < self.dims[1] && i.z < self.dims[2]
    }

    fn linear(&self, i: GridIndex) -> Option<usize> {
        self.in_bounds(i).then(|| (i.x * self.dims[1] + i.y) * self.dims[2] + i.z)
    }

    /// True iff `i` is in bounds and unoccupied.
    pub fn is_free(&self, i: GridIndex) -> bool {
        self.linear(i).is_some_and(|slot| !self.occupied[slot])
    }

    /// True iff `i` is above ground and the cell directly below is free.
    pub fn can_descend(&self, i: GridIndex) -> bool {
        i.z > 0 && self.is_free(GridIndex::new(i.x, i.y, i.z - 1))
    }

    pub fn check_in_bounds(&self, index: GridIndex) -> Result<(), GridError> {
        if self.in_bounds(index) {
            Ok(())
        } else {
            Err(GridError::OutOfBounds { index, dims: self.dims })
        }
    }

    /// Cell containing `p`: `floor((p - origin) / resolution)` per axis.
    pub fn world_to_grid(&self, p: WorldPoint) -> Result<GridIndex, GridError> {
        let axis = |v: f64, o: f64, n: usize| -> Option<usize> {
            let cell = ((v - o) / self.resolution).floor();
            (cell.is_finite() && cell >= 0.0 && cell < n as f64).then_some(cell as usize)
        };
        match (
            axis(p.x, self.origin.x, self.dims[0]),
            axis(p.y, self.origin.y, self.dims[1]),
            axis(p.z, self.origin.z, self.dims[2]),
        ) {
            (Some(x), Some(y), Some(z)) => Ok(GridIndex::new(x, y, z)),
            _ => Err(GridError::OutsideExtent(p)),
        }
    }

    /// Center of cell `i` in world coordinates.
    pub fn grid_to_world(&self, i: GridIndex) -> Result<WorldPoint, GridError> {
        self.check_in_bounds(i)?;
        let c = |k: usize, o: f64| o + (k as f64 + 0.5) * self.resolution;
        Ok(WorldPoint::new(c(i.x, self.origin.x), c(i.y, self.origin.y), c(i.z, self.origin.z)))
    }

    /// Occupied cells in lexicographic order.
    pub fn obstacles(&self) -> impl Iterator<Item = GridIndex> + '_ {
        let [_, ny, nz] = self.dims;
        self.occupied.iter().enumerate().filter(|(_, &o)| o).map(move |(slot, _)| {
            GridIndex::new(slot / (ny * nz), (slot / nz) % ny, slot % nz)
        })
    }

    /// Reads the text format from any byte stream.
    pub fn load<R: Read>(mut source: R) -> Result<Self, GridParseError> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        text.parse()
    }

    /// Canonical text form; parsing it back yields an equal grid.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let [nx, ny, nz] = self.dims;
        let o = self.origin;
        let _ = writeln!(out, "dims {nx} {ny} {nz}");
        let _ = writeln!(out, "resolution {}", self.resolution);
        let _ = writeln!(out, "origin {} {} {}", o.x, o.y, o.z);
        for i in self.obstacles() {
            let _ = writeln!(out, "obstacle {} {} {}", i.x, i.y, i.z);
        }
        out
    }
}

impl FromStr for OccupancyGrid {
    type Err = GridParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let mut header = |keyword: &'static str| -> Result<(usize, Vec<&str>), GridParseError> {
            let (line, content) = lines.next().ok_or(GridParseError::MissingHeader(keyword))?;
            let mut fields = content.split_whitespace();
            match fields.next() {
                Some(k) if k == keyword => Ok((line, fields.collect())),
                other => Err(GridParseError::MalformedHeader {
                    line,
                    reason: format!("expected `{keyword}`, found `{}`", other.unwrap_or("")),
                }),
            }
        };

        let (line, f) = header("dims")?;
        let dims: [usize; 3] = parse_fixed(line, "dims", &f, |line, s| {
            s.parse::<usize>().map_err(|e| GridParseError::MalformedHeader {
                line,
                reason: format!("bad dimension `{s}`: {e}"),
            })
        })?;
        let (line, f) = header("resolution")?;
        let [resolution]: [f64; 1] = parse_fixed(line, "resolution", &f, parse_header_f64)?;
        let (line, f) = header("origin")?;
        let [ox, oy, oz]: [f64; 3] = parse_fixed(line, "origin", &f, parse_header_f64)?;

        let mut grid = OccupancyGrid::new(dims, resolution, WorldPoint::new(ox, oy, oz))?;

        for (line, content) in lines {
            let mut fields = content.split_whitespace();
            let keyword = fields.next().unwrap_or_default();
            if keyword != "obstacle" {
                return Err(GridParseError::MalformedObstacle {
                    line,
                    reason: format!("unexpected keyword `{keyword}`"),
                });
            }
            let f: Vec<&str> = fields.collect();
            let [x, y, z]: [usize; 3] = parse_fixed(line, "obstacle", &f, |line, s| {
                s.parse::<usize>().map_err(|e| GridParseError::MalformedObstacle {
                    line,
                    reason: format!("bad index `{s}`: {e}"),
                })
            })?;
            let index = GridIndex::new(x, y, z);
            let slot = grid
                .linear(index)
                .ok_or(GridParseError::ObstacleOutOfBounds { line, index, dims })?;
            grid.occupied[slot] = true;
        }
        Ok(grid)
    }
}

fn parse_header_f64(line: usize, s: &str) -> Result<f64, GridParseError> {
    s.parse::<f64>().map_err(|e| GridParseError::MalformedHeader {
        line,
        reason: format!("bad number `{s}`: {e}"),
    })
}

fn parse_fixed<T, const N: usize>(
    line: usize,
    keyword: &str,
    fields: &[&str],
    parse: impl Fn(usize, &str) -> Result<T, GridParseError>,
) -> Result<[T; N], GridParseError> {
    if fields.len() != N {
        return Err(GridParseError::ArityMismatch {
            line,
            keyword: keyword.to_string(),
            expected: N,
            found: fields.len(),
        });
    }
    let values = fields.iter().map(|s| parse(line, s)).collect::<Result<Vec<T>, _>>()?;
    Ok(values.try_into().unwrap_or_else(|_| unreachable!("length checked above")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(text: &str) -> OccupancyGrid {
        text.parse().unwrap()
    }

    #[test]
    fn minimal_file_is_one_free_cell() {
        let g = grid("dims 1 1 1\nresolution 1\norigin 0 0 0\n");
        assert_eq!(g.dims(), [1, 1, 1]);
        assert!(g.is_free(GridIndex::new(0, 0, 0)));
        assert_eq!(g.obstacles().count(), 0);
    }

    #[test]
    fn obstacle_is_echoed() {
        let g = grid("# two layers\ndims 3 3 2\nresolution 0.5\norigin 0 0 0\nobstacle 1 1 0\n");
        assert!(!g.is_free(GridIndex::new(1, 1, 0)));
        assert!(g.is_free(GridIndex::new(0, 0, 0)));
        assert_eq!(g.obstacles().collect::<Vec<_>>(), vec![GridIndex::new(1, 1, 0)]);
    }

    #[test]
    fn out_of_bounds_obstacle_is_rejected() {
        let err = "dims 3 3 2\nresolution 1\norigin 0 0 0\nobstacle 5 0 0\n"
            .parse::<OccupancyGrid>()
            .unwrap_err();
        assert!(matches!(err, GridParseError::ObstacleOutOfBounds { line: 4, .. }), "{err}");
    }

    #[test]
    fn parse_errors_are_distinct() {
        let bad_header = "dimensions 3 3 2\nresolution 1\norigin 0 0 0\n".parse::<OccupancyGrid>();
        assert!(matches!(bad_header, Err(GridParseError::MalformedHeader { line: 1, .. })));

        let arity = "dims 3 3\nresolution 1\norigin 0 0 0\n".parse::<OccupancyGrid>();
        assert!(matches!(arity, Err(GridParseError::ArityMismatch { expected: 3, found: 2, .. })));

        let obstacle_arity =
            "dims 3 3 2\nresolution 1\norigin 0 0 0\nobstacle 1 1\n".parse::<OccupancyGrid>();
        assert!(matches!(obstacle_arity, Err(GridParseError::ArityMismatch { line: 4, .. })));

        let missing = "dims 3 3 2\nresolution 1\n".parse::<OccupancyGrid>();
        assert!(matches!(missing, Err(GridParseError::MissingHeader("origin"))));

        let zero = "dims 0 3 2\nresolution 1\norigin 0 0 0\n".parse::<OccupancyGrid>();
        assert!(matches!(zero, Err(GridParseError::Invalid(GridError::EmptyDims(_)))));

        let neg_res = "dims 1 1 1\nresolution -1\norigin 0 0 0\n".parse::<OccupancyGrid>();
        assert!(matches!(neg_res, Err(GridParseError::Invalid(GridError::BadResolution(_)))));
    }

    #[test]
    fn world_to_grid_examples() {
        let g = OccupancyGrid::new([4, 4, 4], 0.5, WorldPoint::default()).unwrap();
        assert_eq!(g.world_to_grid(WorldPoint::new(1.0, 0.0, 0.0)).unwrap(), GridIndex::new(2, 0, 0));
        assert_eq!(g.world_to_grid(g.origin()).unwrap(), GridIndex::new(0, 0, 0));

        let shifted = OccupancyGrid::new([3, 3, 1], 1.0, WorldPoint::new(-1.0, -1.0, 0.0)).unwrap();
        assert_eq!(
            shifted.world_to_grid(WorldPoint::new(0.2, 0.2, 0.0)).unwrap(),
            GridIndex::new(1, 1, 0)
        );
        assert!(matches!(
            shifted.world_to_grid(WorldPoint::new(2.0, 0.0, 0.0)),
            Err(GridError::OutsideExtent(_))
        ));
        assert!(shifted.world_to_grid(WorldPoint::new(-1.5, 0.0, 0.0)).is_err());
    }

    #[test]
    fn grid_to_world_examples() {
        let unit = OccupancyGrid::new([1, 1, 1], 1.0, WorldPoint::default()).unwrap();
        assert_eq!(unit.grid_to_world(GridIndex::new(0, 0, 0)).unwrap(), WorldPoint::new(0.5, 0.5, 0.5));
        let half = OccupancyGrid::new([4, 4, 4], 0.5, WorldPoint::default()).unwrap();
        assert_eq!(
            half.grid_to_world(GridIndex::new(2, 0, 0)).unwrap(),
            WorldPoint::new(1.25, 0.25, 0.25)
        );
        assert!(half.grid_to_world(GridIndex::new(4, 0, 0)).is_err());
    }

    #[test]
    fn round_trip_is_exhaustive_on_small_grid() {
        let g = OccupancyGrid::new([4, 4, 4], 0.37, WorldPoint::new(-1.3, 2.1, 0.0)).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    let i = GridIndex::new(x, y, z);
                    assert_eq!(g.world_to_grid(g.grid_to_world(i).unwrap()).unwrap(), i);
                }
            }
        }
    }

    #[test]
    fn can_descend_cases() {
        let open = OccupancyGrid::new([1, 1, 4], 1.0, WorldPoint::default()).unwrap();
        assert!(open.can_descend(GridIndex::new(0, 0, 3)));
        assert!(!open.can_descend(GridIndex::new(0, 0, 0)));
        let blocked = OccupancyGrid::with_obstacles(
            [1, 1, 4],
            1.0,
            WorldPoint::default(),
            [GridIndex::new(0, 0, 2)],
        )
        .unwrap();
        assert!(!blocked.can_descend(GridIndex::new(0, 0, 3)));
    }

    #[test]
    fn canonical_text_round_trips_byte_identically() {
        let text = "dims 5 4 3\nresolution 0.25\norigin -1.5 0 0.1\nobstacle 0 1 2\nobstacle 3 3 0\n";
        assert_eq!(grid(text).to_text(), text);
    }

    proptest! {
        #[test]
        fn out_of_bounds_is_never_free(
            dims in (1usize..6, 1usize..6, 1usize..6),
            extra in (0usize..50, 0usize..50, 0usize..50),
            axis in 0usize..3,
        ) {
            let g = OccupancyGrid::new([dims.0, dims.1, dims.2], 1.0, WorldPoint::default()).unwrap();
            let mut i = GridIndex::new(extra.0 % dims.0, extra.1 % dims.1, extra.2 % dims.2);
            match axis {
                0 => i.x = dims.0 + extra.0,
                1 => i.y = dims.1 + extra.1,
                _ => i.z = dims.2 + extra.2,
            }
            prop_assert!(!g.is_free(i));
        }

        #[test]
        fn serialization_round_trips(
            dims in (1usize..6, 1usize..6, 1usize..4),
            cells in proptest::collection::vec((0usize..6, 0usize..6, 0usize..4), 0..20),
            res in 0.05f64..2.0,
        ) {
            let dims = [dims.0, dims.1, dims.2];
            let obstacles = cells
                .into_iter()
                .map(|(x, y, z)| GridIndex::new(x % dims[0], y % dims[1], z % dims[2]));
            let g = OccupancyGrid::with_obstacles(dims, res, WorldPoint::new(0.5, -2.0, 0.0), obstacles).unwrap();
            let text = g.to_text();
            let back: OccupancyGrid = text.parse().unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(back.to_text(), text);
        }
    }
}
