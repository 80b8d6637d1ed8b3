use bimodal_nav::kinematics::{Axis, BodyState, Direction};
use bimodal_nav::mpc::{sequence_cost, solve, MpcConfig, MpcProblem};
use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cost of `u` rolled forward by hand, without the library's helpers.
fn direct_cost(p: &MpcProblem, cfg: &MpcConfig, u: &[f64; 3]) -> f64 {
    let gain = p.direction.sign() * 2.0 * p.theta0.cos();
    let (mut x, mut y) = (p.x0.x, p.x0.y);
    let mut total = 0.0;
    for k in 0..3 {
        match p.axis {
            Axis::X => x += gain * u[k],
            Axis::Y => y += gain * u[k],
        }
        let r = p.reference[k];
        total += cfg.q_x * (x - r.x).powi(2) + cfg.q_y * (y - r.y).powi(2) + cfg.r * u[k] * u[k];
    }
    total
}

fn axis_grid(lo: f64, hi: f64, step: f64, a_max: f64) -> Vec<f64> {
    let lo = lo.max(0.0);
    let hi = hi.min(a_max);
    let mut v: Vec<f64> = (0..)
        .map(|i| lo + i as f64 * step)
        .take_while(|&u| u < hi)
        .collect();
    v.push(hi);
    v
}

/// Exhaustive search over the input box, refined twice around the incumbent.
fn grid_search(p: &MpcProblem, cfg: &MpcConfig) -> ([f64; 3], f64) {
    let mut best = ([0.0; 3], f64::INFINITY);
    let mut window = [(0.0, cfg.a_max); 3];
    for step in [1e-3, 1e-4, 1e-5] {
        let axes: Vec<Vec<f64>> = window.iter().map(|&(lo, hi)| axis_grid(lo, hi, step, cfg.a_max)).collect();
        for &u0 in &axes[0] {
            for &u1 in &axes[1] {
                for &u2 in &axes[2] {
                    let u = [u0, u1, u2];
                    let c = direct_cost(p, cfg, &u);
                    if c < best.1 {
                        best = (u, c);
                    }
                }
            }
        }
        let half = step * 5.0;
        window = best.0.map(|u| (u - half, u + half));
    }
    best
}

fn random_problem(rng: &mut ChaCha8Rng) -> MpcProblem {
    let axis = if rng.random_bool(0.5) { Axis::X } else { Axis::Y };
    let direction = if rng.random_bool(0.5) { Direction::Forward } else { Direction::Reverse };
    let x0 = BodyState::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let lateral = rng.random_range(-0.1..0.1);
    let reference = (0..3)
        .map(|_| {
            let along = rng.random_range(-0.8..0.8);
            match axis {
                Axis::X => Vector2::new(x0.x + along, x0.y + lateral),
                Axis::Y => Vector2::new(x0.x + lateral, x0.y + along),
            }
        })
        .collect();
    MpcProblem { x0, reference, axis, direction, theta0: std::f64::consts::FRAC_PI_4 }
}

#[test]
fn solver_matches_exhaustive_search() {
    let cfg = MpcConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..20 {
        let p = random_problem(&mut rng);
        let sol = solve(&p, &cfg).unwrap();
        let (_, oracle) = grid_search(&p, &cfg);
        assert!(
            (sol.cost - oracle).abs() <= 1e-6,
            "problem {i}: solver {} oracle {} u {:?}",
            sol.cost,
            oracle,
            sol.u
        );
        let u = [sol.u[0], sol.u[1], sol.u[2]];
        assert!((direct_cost(&p, &cfg, &u) - sequence_cost(&p, &sol.u, &cfg)).abs() < 1e-12);
    }
}

#[test]
fn saturation_and_reduction_examples_agree_with_search() {
    let cfg = MpcConfig::default();
    let far = MpcProblem {
        x0: BodyState::new(0.0, 0.0),
        reference: vec![Vector2::new(3.6, 0.0); 3],
        axis: Axis::X,
        direction: Direction::Forward,
        theta0: std::f64::consts::FRAC_PI_4,
    };
    let (u, _) = grid_search(&far, &cfg);
    assert_eq!(u[0], cfg.a_max);
    assert_eq!(solve(&far, &cfg).unwrap().u[0], cfg.a_max);

    let near = MpcProblem { x0: BodyState::new(3.55, 0.0), ..far };
    let (u, _) = grid_search(&near, &cfg);
    assert!(u[0] > 0.0 && u[0] < cfg.a_max);
    let sol = solve(&near, &cfg).unwrap();
    assert!((sol.u[0] - u[0]).abs() < 1e-4);
}
