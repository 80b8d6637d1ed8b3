//! A* over grid cells, shared by the ground and aerial phases.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::grid::{GridIndex, OccupancyGrid};

use super::{Connectivity2d, Connectivity3d, Heuristic};

/// A unit move between neighboring cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Move {
    pub dx: i64,
    pub dy: i64,
    pub dz: i64,
}

impl Move {
    const fn new(dx: i64, dy: i64, dz: i64) -> Self {
        Self { dx, dy, dz }
    }

    pub fn is_diagonal(self) -> bool {
        self.dx != 0 && self.dy != 0
    }

    pub fn cost(self) -> f64 {
        if self.is_diagonal() {
            std::f64::consts::SQRT_2
        } else {
            1.0
        }
    }

    pub fn between(a: GridIndex, b: GridIndex) -> Self {
        Self::new(
            b.x as i64 - a.x as i64,
            b.y as i64 - a.y as i64,
            b.z as i64 - a.z as i64,
        )
    }
}

const AXIS_PLANAR: [Move; 4] =
    [Move::new(1, 0, 0), Move::new(-1, 0, 0), Move::new(0, 1, 0), Move::new(0, -1, 0)];
const DIAGONAL_PLANAR: [Move; 4] =
    [Move::new(1, 1, 0), Move::new(1, -1, 0), Move::new(-1, 1, 0), Move::new(-1, -1, 0)];
const VERTICAL: [Move; 2] = [Move::new(0, 0, 1), Move::new(0, 0, -1)];

pub(crate) fn moves_2d(c: Connectivity2d) -> Vec<Move> {
    match c {
        Connectivity2d::Four => AXIS_PLANAR.to_vec(),
        Connectivity2d::Eight => AXIS_PLANAR.iter().chain(&DIAGONAL_PLANAR).copied().collect(),
    }
}

pub(crate) fn moves_3d(c: Connectivity3d) -> Vec<Move> {
    match c {
        Connectivity3d::Six => AXIS_PLANAR.iter().chain(&VERTICAL).copied().collect(),
        Connectivity3d::Ten => {
            AXIS_PLANAR.iter().chain(&DIAGONAL_PLANAR).chain(&VERTICAL).copied().collect()
        }
    }
}

/// Target cell of `m` from `from`, if the move is permitted. Diagonals may
/// not cut the corner of an occupied cell.
pub(crate) fn step(grid: &OccupancyGrid, from: GridIndex, m: Move) -> Option<GridIndex> {
    let to = from.offset(m.dx, m.dy, m.dz)?;
    if !grid.is_free(to) {
        return None;
    }
    if m.is_diagonal() {
        let side_a = from.offset(m.dx, 0, 0)?;
        let side_b = from.offset(0, m.dy, 0)?;
        if !grid.is_free(side_a) || !grid.is_free(side_b) {
            return None;
        }
    }
    Some(to)
}

pub(crate) fn heuristic(h: Heuristic, a: GridIndex, b: GridIndex) -> f64 {
    match h {
        Heuristic::Euclidean => (a.dist_sq(b) as f64).sqrt(),
        Heuristic::Manhattan => {
            let d = |p: usize, q: usize| (p as i64 - q as i64).unsigned_abs();
            (d(a.x, b.x) + d(a.y, b.y) + d(a.z, b.z)) as f64
        }
    }
}

/// Cost of a cell sequence: one per axis move, sqrt(2) per planar diagonal.
/// Summed from move counts so equal paths always yield bit-equal costs.
pub fn path_cost(path: &[GridIndex]) -> f64 {
    let diagonals = path.windows(2).filter(|w| Move::between(w[0], w[1]).is_diagonal()).count();
    let straight = path.len().saturating_sub(1) - diagonals;
    straight as f64 + diagonals as f64 * std::f64::consts::SQRT_2
}

/// Every node the search expanded, with the parent it was reached from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClosedSet {
    parents: BTreeMap<GridIndex, Option<GridIndex>>,
    order: Vec<GridIndex>,
}

impl ClosedSet {
    fn insert(&mut self, node: GridIndex, parent: Option<GridIndex>) {
        if self.parents.insert(node, parent).is_none() {
            self.order.push(node);
        }
    }

    pub fn contains(&self, node: GridIndex) -> bool {
        self.parents.contains_key(&node)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn parent(&self, node: GridIndex) -> Option<GridIndex> {
        self.parents.get(&node).copied().flatten()
    }

    /// Nodes in expansion order.
    pub fn expansion_order(&self) -> &[GridIndex] {
        &self.order
    }

    pub fn nodes(&self) -> impl Iterator<Item = GridIndex> + '_ {
        self.parents.keys().copied()
    }

    /// Follows parent links back to the search root, returned root-first.
    pub fn path_to(&self, node: GridIndex) -> Option<Vec<GridIndex>> {
        if !self.contains(node) {
            return None;
        }
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    g: f64,
    node: GridIndex,
    /// Set once the node has spent its descend-only expansion.
    deferred: bool,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // BinaryHeap pops the greatest: undeferred first, then lower f, then
    // higher g, then smaller index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .deferred
            .cmp(&self.deferred)
            .then(other.f.total_cmp(&self.f))
            .then(self.g.total_cmp(&other.g))
            .then(other.node.cmp(&self.node))
    }
}

pub(crate) struct SearchOutcome {
    pub path: Option<Vec<GridIndex>>,
    pub closed: ClosedSet,
}

pub(crate) struct SearchParams<'a> {
    pub moves: &'a [Move],
    pub heuristic: Heuristic,
    /// Expand a node that can descend into its downward neighbor only. Its
    /// remaining neighbors wait until no undeferred entry is left open.
    pub prefer_descent: bool,
}

pub(crate) fn astar(
    grid: &OccupancyGrid,
    start: GridIndex,
    goal: GridIndex,
    params: &SearchParams<'_>,
) -> SearchOutcome {
    let h = |n: GridIndex| heuristic(params.heuristic, n, goal);
    let mut open = BinaryHeap::new();
    let mut best_g: HashMap<GridIndex, f64> = HashMap::new();
    let mut parent: HashMap<GridIndex, GridIndex> = HashMap::new();
    let mut closed = ClosedSet::default();

    best_g.insert(start, 0.0);
    open.push(OpenEntry { f: h(start), g: 0.0, node: start, deferred: false });

    let relax = |open: &mut BinaryHeap<OpenEntry>,
                     best_g: &mut HashMap<GridIndex, f64>,
                     parent: &mut HashMap<GridIndex, GridIndex>,
                     from: GridIndex,
                     to: GridIndex,
                     g: f64| {
        if best_g.get(&to).is_none_or(|&old| g < old) {
            best_g.insert(to, g);
            parent.insert(to, from);
            open.push(OpenEntry { f: g + h(to), g, node: to, deferred: false });
        }
    };

    while let Some(entry) = open.pop() {
        let node = entry.node;
        if closed.contains(node) || best_g.get(&node).is_some_and(|&g| entry.g > g) {
            continue;
        }

        if node == goal {
            closed.insert(node, parent.get(&node).copied());
            let mut path = vec![goal];
            let mut cur = goal;
            while let Some(&p) = parent.get(&cur) {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return SearchOutcome { path: Some(path), closed };
        }

        if params.prefer_descent && !entry.deferred && grid.can_descend(node) {
            let below = GridIndex::new(node.x, node.y, node.z - 1);
            if !closed.contains(below) {
                relax(&mut open, &mut best_g, &mut parent, node, below, entry.g + 1.0);
                open.push(OpenEntry { deferred: true, ..entry });
                continue;
            }
        }

        closed.insert(node, parent.get(&node).copied());
        for &m in params.moves {
            if let Some(next) = step(grid, node, m) {
                if !closed.contains(next) {
                    relax(&mut open, &mut best_g, &mut parent, node, next, entry.g + m.cost());
                }
            }
        }
    }

    SearchOutcome { path: None, closed }
}
