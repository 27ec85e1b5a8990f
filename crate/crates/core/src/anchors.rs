//! Global anchor states: a greedy chain of full configurations, each one link
//! length ahead of the previous one, that splits start-to-goal planning into
//! independent segments.
//!
//! A candidate keeps the whole body of the current state and prepends a new
//! root link, so the old root becomes link 2 and the last link is dropped.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::esdf::DistanceField;
use crate::guidance::{plan_reference_path, ReferencePath};
use crate::esdf::EsdfGrid;
use crate::math::{cos, hypot, sin};
use crate::model::{Configuration, RobotModel, BASE_DOF};
use crate::polytope;

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorParams {
    /// Number of lattice candidates per step.
    pub n_theta: usize,
    /// Termination radius around the goal root position (m).
    pub eps_goal: f64,
    /// Rotor clearance margin (m).
    pub delta_collision: f64,
    /// Minimum admissible control torque (N·m).
    pub delta_tau: f64,
    pub max_iters: usize,
    /// Interior samples of the straight joint-space move from the current
    /// anchor that must clear `delta_tau` plus the margin; 0 disables the check.
    pub transition_samples: usize,
    /// Extra torque and clearance margin required along checked moves.
    pub transition_margin: f64,
    /// Stop only once the move into the goal also passes, clearance included.
    /// Off by default: it lengthens the chain past the goal before folding.
    pub goal_transition: bool,
}

impl Default for AnchorParams {
    fn default() -> Self {
        Self { n_theta: 60, eps_goal: 0.6, delta_collision: 0.05, delta_tau: 0.001, max_iters: 200, transition_samples: 100, transition_margin: 0.01, goal_transition: false }
    }
}

impl AnchorParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 2 || !(self.eps_goal > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidModel("anchor parameters need n_theta >= 2, eps_goal > 0, max_iters > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSequence {
    pub states: Vec<Configuration>,
    /// Root reference path used to rank candidates.
    pub path: ReferencePath,
}

impl AnchorSequence {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Joint offsets `theta_min + k (theta_max - theta_min) / (n - 1)`, both ends
/// included.
pub fn candidate_offsets(model: &RobotModel, n_theta: usize) -> Vec<f64> {
    let step = (model.theta_max - model.theta_min) / (n_theta - 1) as f64;
    (0..n_theta).map(|k| model.theta_min + k as f64 * step).collect()
}

/// The configuration obtained by prepending a root link rotated by `offset`
/// relative to the current root.
pub fn advance(model: &RobotModel, q: &Configuration, offset: f64) -> Configuration {
    let yaw = q.yaw() - offset;
    let root = q.root();
    let new_root = [root[0] - model.link_length * cos(yaw), root[1] - model.link_length * sin(yaw)];
    let mut joints = Vec::with_capacity(model.n_joints);
    joints.push(offset);
    joints.extend_from_slice(&q.joints()[..model.n_joints.saturating_sub(1)]);
    Configuration::from_parts(new_root, yaw, &joints)
}

pub fn candidate_set(q: &Configuration, model: &RobotModel, params: &AnchorParams) -> Vec<Configuration> {
    candidate_offsets(model, params.n_theta).into_iter().map(|o| advance(model, q, o)).collect()
}

/// Strict rotor clearance: every rotor center farther than
/// `rotor_radius + delta_collision` from the nearest obstacle.
pub fn check_collision(model: &RobotModel, q: &Configuration, field: &dyn DistanceField, delta_collision: f64) -> bool {
    let threshold = model.rotor_radius + delta_collision;
    match model.rotor_positions(q) {
        Ok(rotors) => rotors.iter().all(|p| field.distance_and_gradient([p.x, p.y]).0 > threshold),
        Err(_) => false,
    }
}

pub fn check_controllability(model: &RobotModel, q: &Configuration, delta_tau: f64) -> bool {
    polytope::tau_min(model, q).map(|t| t > delta_tau).unwrap_or(false)
}

pub fn is_feasible(model: &RobotModel, q: &Configuration, field: &dyn DistanceField, params: &AnchorParams) -> bool {
    check_collision(model, q, field, params.delta_collision) && check_controllability(model, q, params.delta_tau)
}

/// Whether the straight joint-space move from `from` to `to` keeps
/// `tau_min` above `delta_tau + transition_margin` at `transition_samples`
/// interior points, and, when `field` is given, the rotor clearance above
/// `delta_collision + transition_margin` as well.
///
/// Near-straight chains otherwise flip joint signs across the singular
/// zigzag set between consecutive anchors, which no local optimizer started
/// from the straight move can repair.
pub fn transition_feasible(
    model: &RobotModel,
    from: &Configuration,
    to: &Configuration,
    field: Option<&dyn DistanceField>,
    params: &AnchorParams,
) -> bool {
    let n = params.transition_samples;
    let clearance = params.delta_collision + params.transition_margin;
    let torque = params.delta_tau + params.transition_margin;
    (1..=n).all(|k| {
        let s = k as f64 / (n + 1) as f64;
        let q = Configuration::new(from.as_slice().iter().zip(to.as_slice()).map(|(a, b)| a + s * (b - a)).collect());
        check_controllability(model, &q, torque) && field.map_or(true, |f| check_collision(model, &q, f, clearance))
    })
}

pub fn feasible_subset(
    candidates: &[Configuration],
    model: &RobotModel,
    field: &dyn DistanceField,
    params: &AnchorParams,
) -> Vec<Configuration> {
    candidates.iter().filter(|q| is_feasible(model, q, field, params)).cloned().collect()
}

/// Distance to the nearest waypoint plus the fraction of path left after it.
pub fn selection_cost(q: &Configuration, path: &ReferencePath) -> f64 {
    let root = q.root();
    let mut nearest = 0;
    let mut best = f64::INFINITY;
    for (i, w) in path.waypoints.iter().enumerate() {
        let d = hypot(w[0] - root[0], w[1] - root[1]);
        if d < best {
            best = d;
            nearest = i;
        }
    }
    // Waypoints are 1-indexed in the progress term.
    best + (1.0 - (nearest + 1) as f64 / path.len() as f64)
}

/// Index of the lowest-cost candidate; ties keep the earlier candidate.
pub fn select_best_index(feasible: &[Configuration], path: &ReferencePath) -> Result<usize> {
    if feasible.is_empty() || path.is_empty() {
        return Err(Error::EmptyFeasibleSet);
    }
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (i, q) in feasible.iter().enumerate() {
        let c = selection_cost(q, path);
        if c < best_cost {
            best_cost = c;
            best = i;
        }
    }
    Ok(best)
}

pub fn select_best(feasible: &[Configuration], path: &ReferencePath) -> Result<Configuration> {
    select_best_index(feasible, path).map(|i| feasible[i].clone())
}

/// Clearance used for the root reference path.
pub fn guidance_clearance(model: &RobotModel, params: &AnchorParams) -> f64 {
    model.rotor_radius + params.delta_collision
}

/// Greedy anchor chain from `start` to `goal`, both included.
pub fn generate_anchor_states(
    start: &Configuration,
    goal: &Configuration,
    model: &RobotModel,
    esdf: &EsdfGrid,
    params: &AnchorParams,
) -> Result<AnchorSequence> {
    params.validate()?;
    for (q, which) in [(start, "start"), (goal, "goal")] {
        if q.dim() != model.dof() {
            return Err(Error::InvalidConfiguration { expected: model.dof(), got: q.dim() });
        }
        if !is_feasible(model, q, esdf, params) {
            return Err(Error::InfeasibleEndpoint { which });
        }
    }
    let path = plan_reference_path(esdf, start.root(), goal.root(), guidance_clearance(model, params))?;
    let target = goal.root();
    let mut states = alloc::vec![start.clone()];
    let mut current = start.clone();
    let mut iteration = 0;
    let done = |q: &Configuration| {
        hypot(q[0] - target[0], q[1] - target[1]) <= params.eps_goal && (!params.goal_transition || transition_feasible(model, q, goal, Some(esdf), params))
    };
    while !done(&current) {
        if iteration >= params.max_iters {
            return Err(Error::AnchorGenerationFailed { iteration });
        }
        let candidates = candidate_set(&current, model, params);
        let mut feasible = feasible_subset(&candidates, model, esdf, params);
        feasible.retain(|q| transition_feasible(model, &current, q, None, params));
        let next = select_best(&feasible, &path).map_err(|_| Error::AnchorGenerationFailed { iteration })?;
        states.push(next.clone());
        current = next;
        iteration += 1;
    }
    states.push(goal.clone());
    Ok(AnchorSequence { states, path })
}

/// Square configuration (every joint at +90°) with the given root pose.
pub fn square_configuration(model: &RobotModel, root: [f64; 2], yaw: f64) -> Configuration {
    Configuration::from_parts(root, yaw, &alloc::vec![FRAC_PI_2.min(model.theta_max); model.n_joints])
}

/// Checks that `next` reuses the body of `prev` shifted one link down.
pub fn is_lattice_successor(model: &RobotModel, prev: &Configuration, next: &Configuration, tol: f64) -> bool {
    let (Ok(a), Ok(b)) = (model.link_frames(prev), model.link_frames(next)) else {
        return false;
    };
    a.iter().take(model.n_links() - 1).zip(b.iter().skip(1)).all(|(fa, fb)| {
        (fa.origin[0] - fb.origin[0]).abs() <= tol
            && (fa.origin[1] - fb.origin[1]).abs() <= tol
            && (fa.heading - fb.heading).abs() <= tol
    }) && next.as_slice().len() == BASE_DOF + model.n_joints
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esdf::{GridGeometry, OccupancyGrid};

    struct Open;

    impl DistanceField for Open {
        fn distance_and_gradient(&self, _: [f64; 2]) -> (f64, [f64; 2]) {
            (100.0, [0.0, 0.0])
        }
    }

    struct Constant(f64);

    impl DistanceField for Constant {
        fn distance_and_gradient(&self, _: [f64; 2]) -> (f64, [f64; 2]) {
            (self.0, [0.0, 0.0])
        }
    }

    #[test]
    fn zero_offset_extends_straight() {
        let model = RobotModel::default();
        let q = Configuration::from_parts([1.0, 2.0], 0.3, &[0.4, 0.5, 0.6]);
        let c = advance(&model, &q, 0.0);
        assert_eq!(c.yaw(), 0.3);
        assert!((c[0] - (1.0 - 0.6 * 0.3f64.cos())).abs() < 1e-15);
        assert_eq!(c.joints(), &[0.0, 0.4, 0.5]);
    }

    #[test]
    fn offsets_cover_limits() {
        let model = RobotModel::default();
        let o = candidate_offsets(&model, 60);
        assert_eq!(o.len(), 60);
        assert_eq!(o[0], model.theta_min);
        assert!((o[59] - model.theta_max).abs() < 1e-12);
        assert!(((o[1] - o[0]).to_degrees() - 180.0 / 59.0).abs() < 1e-9);
    }

    #[test]
    fn every_candidate_moves_root_by_link_length() {
        let model = RobotModel::default();
        let q = Configuration::from_parts([0.2, -0.4], 1.1, &[0.1, -0.9, 0.3]);
        for c in candidate_set(&q, &model, &AnchorParams::default()) {
            let d = hypot(c[0] - q[0], c[1] - q[1]);
            assert!((d - 0.6).abs() < 1e-12);
            assert!(is_lattice_successor(&model, &q, &c, 1e-12));
        }
    }

    #[test]
    fn collision_threshold_is_strict() {
        let model = RobotModel::default();
        let q = square_configuration(&model, [0.0, 0.0], 0.0);
        assert!(check_collision(&model, &q, &Open, 0.05));
        assert!(!check_collision(&model, &q, &Constant(model.rotor_radius + 0.05), 0.05));
    }

    #[test]
    fn straight_candidates_fail_controllability() {
        let model = RobotModel::default();
        let q = Configuration::from_parts([0.0, 0.0], 0.0, &[0.0; 3]);
        let c = advance(&model, &q, 0.0);
        assert!(!check_controllability(&model, &c, 0.001));
        let feasible = feasible_subset(&[c], &model, &Open, &AnchorParams::default());
        assert!(feasible.is_empty());
    }

    #[test]
    fn blocked_everywhere_gives_empty_subset() {
        let model = RobotModel::default();
        let q = square_configuration(&model, [0.0, 0.0], 0.0);
        let candidates = candidate_set(&q, &model, &AnchorParams::default());
        assert!(feasible_subset(&candidates, &model, &Constant(0.0), &AnchorParams::default()).is_empty());
    }

    #[test]
    fn selection_prefers_progress_then_index() {
        let path = ReferencePath { waypoints: alloc::vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]] };
        let at = |x: f64, y: f64| Configuration::from_parts([x, y], 0.0, &[1.0; 3]);
        assert_eq!(selection_cost(&at(2.0, 0.0), &path), 0.0);
        assert_eq!(select_best_index(&[at(0.0, 0.0), at(2.0, 0.0)], &path).unwrap(), 1);
        assert_eq!(select_best_index(&[at(1.0, 0.5), at(1.0, -0.5)], &path).unwrap(), 0);
        assert_eq!(select_best(&[], &path), Err(Error::EmptyFeasibleSet));
    }

    #[test]
    fn immediate_termination_near_goal() {
        let model = RobotModel::default();
        let geometry = GridGeometry { origin: [-3.0, -3.0], resolution: 0.1, nx: 60, ny: 60 };
        let esdf = EsdfGrid::build(&OccupancyGrid::new(geometry)).unwrap();
        let start = square_configuration(&model, [0.0, 0.0], 0.0);
        let goal = square_configuration(&model, [0.3, 0.0], 0.0);
        let seq = generate_anchor_states(&start, &goal, &model, &esdf, &AnchorParams::default()).unwrap();
        assert_eq!(seq.states, alloc::vec![start, goal]);
    }
}
