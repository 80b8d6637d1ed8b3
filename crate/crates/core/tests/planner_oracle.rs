use std::cmp::Reverse;
use std::collections::BinaryHeap;

use bimodal_nav::planner::{
    path_cost, plan_2d, plan_bimodal_cells, Connectivity2d, Heuristic, Mode, SearchConfig,
};
use bimodal_nav::{GridIndex, OccupancyGrid, WorldPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_grid(rng: &mut ChaCha8Rng, dims: [usize; 3], density: f64) -> OccupancyGrid {
    let mut obstacles = Vec::new();
    for x in 0..dims[0] {
        for y in 0..dims[1] {
            for z in 0..dims[2] {
                if rng.random_bool(density) {
                    obstacles.push(GridIndex { x, y, z });
                }
            }
        }
    }
    OccupancyGrid::with_obstacles(dims, 0.1, WorldPoint::default(), obstacles).unwrap()
}

fn random_free_ground(rng: &mut ChaCha8Rng, grid: &OccupancyGrid) -> GridIndex {
    let [nx, ny, _] = grid.dims();
    loop {
        let i = GridIndex { x: rng.random_range(0..nx), y: rng.random_range(0..ny), z: 0 };
        if grid.is_free(i) {
            return i;
        }
    }
}

/// Plain Dijkstra on the ground plane. Costs are kept as (axis moves,
/// diagonal moves) so equal optima compare exactly.
fn dijkstra(grid: &OccupancyGrid, start: GridIndex, goal: GridIndex, diagonals: bool) -> Option<(u32, u32)> {
    let [nx, ny, _] = grid.dims();
    let free = |x: i64, y: i64| {
        x >= 0 && y >= 0 && grid.is_free(GridIndex { x: x as usize, y: y as usize, z: 0 })
    };
    let value = |c: (u32, u32)| c.0 as f64 + c.1 as f64 * std::f64::consts::SQRT_2;
    let mut best = vec![None::<(u32, u32)>; nx * ny];
    let mut heap = BinaryHeap::new();
    best[start.x * ny + start.y] = Some((0, 0));
    heap.push(Reverse((ordered(0.0), 0u32, 0u32, start.x, start.y)));
    while let Some(Reverse((_, a, d, x, y))) = heap.pop() {
        if best[x * ny + y] != Some((a, d)) {
            continue;
        }
        if (x, y) == (goal.x, goal.y) {
            return Some((a, d));
        }
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                if (dx, dy) == (0, 0) || (!diagonals && dx != 0 && dy != 0) {
                    continue;
                }
                let (tx, ty) = (x as i64 + dx, y as i64 + dy);
                if !free(tx, ty) {
                    continue;
                }
                let diagonal = dx != 0 && dy != 0;
                if diagonal && !(free(x as i64 + dx, y as i64) && free(x as i64, y as i64 + dy)) {
                    continue;
                }
                let next = if diagonal { (a, d + 1) } else { (a + 1, d) };
                let slot = &mut best[tx as usize * ny + ty as usize];
                if slot.is_none_or(|old| value(next) < value(old) - 1e-9) {
                    *slot = Some(next);
                    heap.push(Reverse((ordered(value(next)), next.0, next.1, tx as usize, ty as usize)));
                }
            }
        }
    }
    None
}

/// Total order on non-negative finite floats through their bit pattern.
fn ordered(v: f64) -> u64 {
    v.to_bits()
}

fn run_oracle(connectivity: Connectivity2d, heuristic: Heuristic, seed: u64) {
    let cfg = SearchConfig { connectivity_2d: connectivity, heuristic, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = 0;
    for trial in 0..100 {
        let grid = random_grid(&mut rng, [20, 20, 1], 0.2);
        let start = random_free_ground(&mut rng, &grid);
        let goal = random_free_ground(&mut rng, &grid);
        let planned = plan_2d(&grid, start, goal, &cfg).unwrap();
        let oracle = dijkstra(&grid, start, goal, connectivity == Connectivity2d::Eight);
        match (planned.path, oracle) {
            (Some(path), Some((a, d))) => {
                found += 1;
                let expected = a as f64 + d as f64 * std::f64::consts::SQRT_2;
                assert_eq!(path_cost(&path), expected, "trial {trial}");
                assert_eq!(path.first(), Some(&start));
                assert_eq!(path.last(), Some(&goal));
            }
            (None, None) => {}
            (p, o) => panic!("trial {trial}: planner {:?} oracle {:?}", p.map(|p| p.len()), o),
        }
    }
    assert!(found > 50, "too few solvable trials: {found}");
}

#[test]
fn eight_connected_costs_match_dijkstra() {
    run_oracle(Connectivity2d::Eight, Heuristic::Euclidean, 1);
}

#[test]
fn four_connected_costs_match_dijkstra() {
    run_oracle(Connectivity2d::Four, Heuristic::Euclidean, 2);
    run_oracle(Connectivity2d::Four, Heuristic::Manhattan, 3);
}

#[test]
fn walkable_worlds_never_fly() {
    let cfg = SearchConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let grid = random_grid(&mut rng, [20, 20, 5], 0.2);
        let start = random_free_ground(&mut rng, &grid);
        let goal = random_free_ground(&mut rng, &grid);
        if dijkstra(&grid, start, goal, true).is_none() {
            continue;
        }
        let path = plan_bimodal_cells(&grid, start, goal, &cfg).unwrap();
        assert_eq!(path.count_mode(Mode::Air), 0);
        path.validate(&grid, &cfg).unwrap();
        checked += 1;
    }
}

#[test]
fn blocked_ground_routes_are_valid_bimodal_paths() {
    let cfg = SearchConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    for _ in 0..400 {
        let grid = random_grid(&mut rng, [12, 12, 4], 0.3);
        let start = random_free_ground(&mut rng, &grid);
        let goal = random_free_ground(&mut rng, &grid);
        if dijkstra(&grid, start, goal, true).is_some() {
            continue;
        }
        if let Ok(path) = plan_bimodal_cells(&grid, start, goal, &cfg) {
            path.validate(&grid, &cfg).unwrap();
            assert!(path.count_mode(Mode::Air) > 0);
            checked += 1;
        }
    }
    assert!(checked > 10, "only {checked} flying cases");
}
