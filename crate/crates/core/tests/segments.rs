//! Segment optimization and whole-plan properties on a wall with one gap.

use linkplan_core::anchors::{generate_anchor_states, square_configuration};
use linkplan_core::esdf::{voxelize, Bounds};
use linkplan_core::localopt::{optimize_segment, segment_duration};
use linkplan_core::planner::Sequential;
use linkplan_core::{plan, Ablation, AnchorParams, Configuration, EsdfGrid, PlannerParams, PointCloud, RobotModel};

/// A 0.1 m thick wall at x in [-0.1, 0) with a 0.7 m opening around y = 0.3,
/// sampled on the cell centers of a 0.1 m grid.
fn gap_grid() -> EsdfGrid {
    let mut points = Vec::new();
    for iy in -15..20 {
        let y = (iy as f64 + 0.5) * 0.1;
        if (y - 0.3).abs() < 0.35 {
            continue;
        }
        points.push([-0.05, y, 0.0]);
    }
    let bounds = Bounds { min: [-3.5, -1.5], max: [2.5, 2.0] };
    EsdfGrid::build(&voxelize(&PointCloud::new(points), 0.1, bounds, (-0.25, 0.25)).unwrap()).unwrap()
}

fn endpoints(model: &RobotModel, x: f64) -> (Configuration, Configuration) {
    let yaw = 5f64.to_radians();
    let start = square_configuration(model, [x, 0.25], yaw);
    // Same shape moved to the mirror image of the rotor centroid.
    let rotors = model.rotor_positions(&start).unwrap();
    let cx = rotors.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let shift = 2.0 * (-0.05 - cx);
    let goal = Configuration::from_parts([x + shift, 0.25], yaw, start.joints());
    (start, goal)
}

#[test]
fn optimized_segments_keep_their_contract() {
    let model = RobotModel::default();
    let esdf = gap_grid();
    let (start, goal) = endpoints(&model, 0.9);
    let anchors = generate_anchor_states(&start, &goal, &model, &esdf, &AnchorParams::default()).unwrap();
    let params = PlannerParams::default();
    let zero = vec![0.0; model.dof()];
    for w in anchors.states.windows(2) {
        let (seg, report) = optimize_segment(&w[0], &zero, &w[1], &zero, &model, &esdf, &params).unwrap();
        let (q0, q1) = (seg.evaluate(0.0).unwrap(), seg.evaluate(seg.duration).unwrap());
        assert_eq!(q0.as_slice(), w[0].as_slice());
        assert_eq!(q1.as_slice(), w[1].as_slice());
        for v in [seg.evaluate_velocity(0.0).unwrap(), seg.evaluate_velocity(seg.duration).unwrap()] {
            assert!(v.iter().all(|x| x.abs() < 1e-9), "boundary velocity {v:?}");
        }
        for r in 0..seg.control.nrows() {
            for c in 3..model.dof() {
                let t = seg.control[(r, c)];
                assert!(t >= model.theta_min - 1e-9 && t <= model.theta_max + 1e-9);
            }
        }
        assert!(report.max_velocity_residual <= 1e-6, "velocity residual {}", report.max_velocity_residual);
        for round in &report.rounds {
            assert!(round.history.windows(2).all(|h| h[1] <= h[0]), "best-so-far must not increase");
        }
    }
}

#[test]
fn segment_solves_are_repeatable() {
    let model = RobotModel::default();
    let esdf = gap_grid();
    let (start, goal) = endpoints(&model, 0.7);
    let anchors = generate_anchor_states(&start, &goal, &model, &esdf, &AnchorParams::default()).unwrap();
    let params = PlannerParams::default();
    let zero = vec![0.0; model.dof()];
    let (a, b) = (&anchors.states[1], &anchors.states[2]);
    let first = optimize_segment(a, &zero, b, &zero, &model, &esdf, &params).unwrap();
    let second = optimize_segment(a, &zero, b, &zero, &model, &esdf, &params).unwrap();
    assert_eq!(first, second);
}

#[test]
fn plans_are_continuous_and_timed_by_distance() {
    let model = RobotModel::default();
    let esdf = gap_grid();
    let params = PlannerParams::default();
    for x in [0.6, 1.1] {
        let (start, goal) = endpoints(&model, x);
        let p = plan(&start, &goal, &model, &esdf, &AnchorParams::default(), &params, Ablation::Full, &Sequential).unwrap();
        let (pos, vel) = p.trajectory.junction_gaps();
        assert!(pos <= 1e-9 && vel <= 1e-9, "junction gaps {pos} {vel}");
        let states = &p.anchors.as_ref().unwrap().states;
        assert_eq!(p.trajectory.segments.len(), states.len() - 1);
        let expected: f64 = states
            .windows(2)
            .filter_map(|w| segment_duration(w[0].as_slice(), w[1].as_slice(), params.alpha_v))
            .sum();
        assert!((p.trajectory.total_duration - expected).abs() < 1e-9);
        let first = p.trajectory.evaluate(0.0).unwrap();
        let last = p.trajectory.evaluate(p.trajectory.total_duration).unwrap();
        assert_eq!(first.as_slice(), start.as_slice());
        assert_eq!(last.as_slice(), goal.as_slice());
    }
}

#[test]
fn identical_endpoints_give_one_constant_segment() {
    let model = RobotModel::default();
    let esdf = gap_grid();
    let (start, _) = endpoints(&model, 0.9);
    let p = plan(&start, &start, &model, &esdf, &AnchorParams::default(), &PlannerParams::default(), Ablation::Full, &Sequential)
        .unwrap();
    assert_eq!(p.trajectory.segments.len(), 1);
    assert!(p.validation.success());
}

#[test]
fn corrupted_segment_is_located() {
    let model = RobotModel::default();
    let esdf = gap_grid();
    let params = PlannerParams::default();
    let (start, goal) = endpoints(&model, 0.9);
    let mut p = plan(&start, &goal, &model, &esdf, &AnchorParams::default(), &params, Ablation::Full, &Sequential).unwrap();
    // Drag the interior control points of the first segment into the wall.
    let seg = &mut p.trajectory.segments[0];
    for r in 2..seg.control.nrows() - 2 {
        seg.control[(r, 0)] = -0.05;
        seg.control[(r, 1)] = -0.8;
    }
    let report = linkplan_core::trajectory::validate(&p.trajectory, &model, &esdf, &params).unwrap();
    assert!(!report.success());
    assert!(report.collision_violations > 0);
    let t = report.first_violation.unwrap().t;
    assert!(t > 0.0 && t < p.trajectory.segments[0].duration);
}
