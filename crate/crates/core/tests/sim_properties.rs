use bimodal_nav::sim::{
    compute_errors, run_closed_loop, run_open_loop, DisturbanceModel, Granularity, Harness, Polyline,
};
use nalgebra::Vector2;

fn line() -> Polyline {
    Polyline::line(Vector2::zeros(), Vector2::x(), 3.6)
}

#[test]
fn feedback_wins_on_every_paired_seed() {
    let h = Harness::default();
    for seed in 0..100 {
        let h = h.with_disturbance(h.disturbance.with_seed(seed));
        let closed = run_closed_loop(&line(), &h).unwrap();
        assert!(closed.converged, "seed {seed}");
        let c = compute_errors(&closed.log, Granularity::Fullstep).unwrap();
        let o = compute_errors(&run_open_loop(&line(), &h).unwrap().log, Granularity::Fullstep).unwrap();
        assert!(c.rmse_m < o.rmse_m, "seed {seed}: closed {} open {}", c.rmse_m, o.rmse_m);
        assert!(c.max_error_m >= c.rmse_m && o.max_error_m >= o.rmse_m);
    }
}

#[test]
fn full_step_error_stays_within_the_gait_envelope() {
    let h = Harness::default();
    let d = h.disturbance;
    let theta0 = h.gait.theta0();
    let bound = h.mpc.a_max * theta0.sin() + 3.0 * (d.heading_bias + d.heading_noise) * h.gait.max_stride();
    for seed in 0..100 {
        let run = run_closed_loop(&line(), &h.with_disturbance(d.with_seed(seed))).unwrap();
        let worst = compute_errors(&run.log, Granularity::Fullstep).unwrap().max_error_m;
        assert!(worst <= bound, "seed {seed}: {worst} > {bound}");
    }
}

#[test]
fn open_loop_drift_grows_with_distance() {
    let h = Harness::default().with_disturbance(DisturbanceModel { heading_bias: 0.0, step_length_noise: 0.0, heading_noise: 0.05, ..Default::default() });
    let mean_terminal = |len: f64| {
        let path = Polyline::line(Vector2::zeros(), Vector2::x(), len);
        (0..100)
            .map(|seed| {
                let run = run_open_loop(&path, &h.with_disturbance(h.disturbance.with_seed(seed))).unwrap();
                (run.final_position - path.end()).norm()
            })
            .sum::<f64>()
            / 100.0
    };
    let (short, mid, long) = (mean_terminal(0.9), mean_terminal(1.8), mean_terminal(3.6));
    assert!(short < mid && mid < long, "{short} {mid} {long}");
}

#[test]
fn paired_runs_share_noise_draws() {
    let h = Harness::default().with_disturbance(DisturbanceModel::default().with_seed(9));
    let closed = run_closed_loop(&line(), &h).unwrap();
    let open = run_open_loop(&line(), &h).unwrap();
    // both start with a saturated step along x, so the first sub-steps match
    let first = |log: &bimodal_nav::sim::TrajectoryLog| {
        let r = log.iter(Granularity::Substep).next().unwrap();
        (r.act_x, r.act_y)
    };
    let (cx, cy) = first(&closed.log);
    let (ox, oy) = first(&open.log);
    assert!((cx - ox).abs() < 1e-3 && (cy - oy).abs() < 1e-3);
}

#[test]
fn csv_and_json_outputs_are_byte_stable() {
    let h = Harness::default().with_disturbance(DisturbanceModel::default().with_seed(21));
    let render = || {
        let run = run_closed_loop(&line(), &h).unwrap();
        let mut csv = Vec::new();
        run.log.write_csv(&mut csv).unwrap();
        let json = compute_errors(&run.log, Granularity::Fullstep).unwrap().to_json();
        (csv, json)
    };
    assert_eq!(render(), render());
}
