//! Per-segment trajectory optimization between two anchor states.
//!
//! The decision variables are the `N x D` free control points of a clamped
//! B-spline. The objective is the velocity energy plus a weighted sampled
//! collision penalty; controllability is a sampled constraint enforced by
//! escalating its penalty weight; joint limits and velocity limits are linear
//! inequalities on the control points.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::esdf::DistanceField;
use crate::math::{ceil, sqrt};
use crate::model::{Configuration, RobotModel, BASE_DOF};
use crate::polytope::{FaceDistance, TorqueState};
use crate::solver::{self, Budget, IterationBudget, LinearConstraints, SqpOptions, Termination};
use crate::spline::{
    assemble_control, energy_matrix, exact_derivative_scales, knot_interval, knot_vector, min_energy_init,
    basis_row, BoundaryRows, SplineSegment,
};

/// Duration given to segments whose endpoints coincide (s).
pub const TRIVIAL_DURATION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerParams {
    /// Generalized transition velocity (configuration-norm units per second).
    pub alpha_v: f64,
    /// Penalty samples per unit configuration distance.
    pub alpha_k: f64,
    /// Per-axis translational speed limit (m/s).
    pub v_max: f64,
    /// Yaw and joint rate limit (rad/s).
    pub omega_max: f64,
    pub delta_collision: f64,
    pub delta_tau: f64,
    pub collision_weight: f64,
    /// Relative objective change that ends a solve.
    pub f_tol: f64,
    /// Wall-clock allowance per segment (s); enforced by the caller's budget.
    pub time_budget: f64,
    pub n_free: usize,
    pub degree: usize,
    /// Deterministic cap on solver iterations per penalty round.
    pub max_iterations: usize,
    /// Starting weight of the controllability penalty.
    pub controllability_weight: f64,
    /// Additional rounds with the controllability weight multiplied by 10.
    pub escalation_rounds: usize,
    /// Extra width of the collision penalty band beyond the checked
    /// clearance (m), so penalty equilibria land on the admissible side.
    pub collision_margin: f64,
    /// Extra width of the controllability penalty band (N·m).
    pub controllability_margin: f64,
    /// Re-solves with doubled sample density after a failed dense check.
    pub refinement_rounds: usize,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            alpha_v: 0.3,
            alpha_k: 100.0,
            v_max: 1.0,
            omega_max: 0.5,
            delta_collision: 0.05,
            delta_tau: 0.001,
            collision_weight: 1000.0,
            f_tol: 1e-5,
            time_budget: 10.0,
            n_free: 5,
            degree: 3,
            max_iterations: 200,
            controllability_weight: 1000.0,
            escalation_rounds: 3,
            collision_margin: 0.01,
            controllability_margin: 0.01,
            refinement_rounds: 3,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.alpha_v,
            self.alpha_k,
            self.v_max,
            self.omega_max,
            self.delta_collision,
            self.delta_tau,
            self.f_tol,
            self.time_budget,
            self.controllability_weight,
        ];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidModel("planner parameters must be positive and finite"));
        }
        if !(self.collision_margin >= 0.0) || !(self.controllability_margin >= 0.0) {
            return Err(Error::InvalidModel("penalty margins must be nonnegative"));
        }
        if !(self.collision_weight >= 1.0) {
            return Err(Error::InvalidModel("collision weight must be at least 1"));
        }
        if self.n_free == 0 || self.degree == 0 || self.degree > self.n_free + 3 || self.max_iterations == 0 {
            return Err(Error::InvalidModel("invalid spline shape or iteration cap"));
        }
        Ok(())
    }

    /// Per-column speed limits: `v_max` for the root position, `omega_max`
    /// for yaw and joints.
    pub fn velocity_limits(&self, dim: usize) -> Vec<f64> {
        (0..dim).map(|c| if c < BASE_DOF - 1 { self.v_max } else { self.omega_max }).collect()
    }
}

/// Segment duration `||q_target - q_init|| / alpha_v`, or `None` when the
/// endpoints coincide.
pub fn segment_duration(q_init: &[f64], q_target: &[f64], alpha_v: f64) -> Option<f64> {
    let dist = sqrt(q_init.iter().zip(q_target).map(|(a, b)| (a - b) * (a - b)).sum());
    if dist < 1e-9 {
        None
    } else {
        Some(dist / alpha_v)
    }
}

pub fn boundary_rows(q_init: &[f64], v_init: &[f64], q_target: &[f64], v_target: &[f64], h: f64) -> BoundaryRows {
    BoundaryRows {
        rows: [
            q_init.to_vec(),
            q_init.iter().zip(v_init).map(|(q, v)| q + v * h).collect(),
            q_target.iter().zip(v_target).map(|(q, v)| q - v * h).collect(),
            q_target.to_vec(),
        ],
    }
}

/// `Tr(C^T M C)` and its gradient with respect to the free rows.
pub fn energy_and_grad(control: &DMatrix<f64>, m: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
    let mc = m * control;
    let value = control.dot(&mc);
    let n_free = control.nrows() - 4;
    let grad = mc.rows(2, n_free) * 2.0;
    (value, grad)
}

/// Velocity control-point residuals and their Jacobian with respect to
/// `vec` of the free control points.
///
/// Residuals are ordered `[upper; lower]`, each block column-major over
/// `(row i, column c)`: upper is `g_ic - nu_c`, lower is `-g_ic - nu_c`,
/// where `g_i = s_i (c_{i+1} - c_i)` and `s_i` is the exact clamped-knot
/// derivative scale, so nonpositive residuals bound the true velocity.
pub fn velocity_constraints_and_jac(
    control: &DMatrix<f64>,
    knots: &[f64],
    degree: usize,
    limits: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let n_ctrl = control.nrows();
    let n_free = n_ctrl - 4;
    let dim = control.ncols();
    let scales = exact_derivative_scales(knots, degree);
    let n_rows = n_ctrl - 1;
    let block = n_rows * dim;
    let mut residual = DVector::zeros(2 * block);
    let mut jac = DMatrix::zeros(2 * block, n_free * dim);
    for c in 0..dim {
        for i in 0..n_rows {
            let g = scales[i] * (control[(i + 1, c)] - control[(i, c)]);
            let k = c * n_rows + i;
            residual[k] = g - limits[c];
            residual[block + k] = -g - limits[c];
            for (row, sign) in [(i + 1, 1.0), (i, -1.0)] {
                if (2..n_free + 2).contains(&row) {
                    let col = c * n_free + (row - 2);
                    jac[(k, col)] = sign * scales[i];
                    jac[(block + k, col)] = -sign * scales[i];
                }
            }
        }
    }
    (residual, jac)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    /// Rotor distance to obstacles, one constraint per rotor.
    Collision,
    /// Torque-zonotope face distances, one constraint per ordered rotor pair.
    Controllability,
}

impl PenaltyKind {
    pub fn delta(self, model: &RobotModel, params: &PlannerParams) -> f64 {
        match self {
            PenaltyKind::Collision => model.rotor_radius + params.delta_collision,
            PenaltyKind::Controllability => params.delta_tau,
        }
    }

    pub fn count(self, model: &RobotModel) -> usize {
        let n = model.n_rotors();
        match self {
            PenaltyKind::Collision => n,
            PenaltyKind::Controllability => n * (n - 1),
        }
    }
}

/// `(d - delta)^2 / (2 delta)` inside the band, zero outside.
pub fn penalty(d: f64, delta: f64) -> f64 {
    if d < delta {
        (d - delta) * (d - delta) / (2.0 * delta)
    } else {
        0.0
    }
}

pub fn penalty_derivative(d: f64, delta: f64) -> f64 {
    if d < delta {
        (d - delta) / delta
    } else {
        0.0
    }
}

/// Sample count `ceil(alpha_k ||q_target - q_init||)`, at least one.
pub fn sample_count(q_init: &[f64], q_target: &[f64], alpha_k: f64) -> usize {
    let dist = sqrt(q_init.iter().zip(q_target).map(|(a, b)| (a - b) * (a - b)).sum());
    (ceil(alpha_k * dist) as usize).max(1)
}

/// Sample times `n T / K`, `n = 1..=K`, with their basis rows.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub times: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn new(knots: &[f64], degree: usize, duration: f64, k: usize) -> Result<Self> {
        let times: Vec<f64> = (1..=k).map(|n| n as f64 / k as f64 * duration).collect();
        let basis = times.iter().map(|&t| basis_row(knots, degree, t)).collect::<Result<Vec<_>>>()?;
        Ok(Self { times, basis })
    }
}

fn configuration_at(control: &DMatrix<f64>, basis: &[f64]) -> Configuration {
    let mut q = vec![0.0; control.ncols()];
    for (r, w) in basis.iter().enumerate() {
        if *w != 0.0 {
            for (c, v) in q.iter_mut().enumerate() {
                *v += w * control[(r, c)];
            }
        }
    }
    Configuration::new(q)
}

/// Penalty value and `d / d q` of the penalty at one configuration.
pub fn penalty_at(
    q: &Configuration,
    kind: PenaltyKind,
    model: &RobotModel,
    field: &dyn DistanceField,
    delta: f64,
) -> Result<(f64, Vec<f64>)> {
    let dof = model.dof();
    let mut value = 0.0;
    let mut grad = vec![0.0; dof];
    match kind {
        PenaltyKind::Collision => {
            let frames = model.link_frames(q)?;
            let rotors = model.rotor_positions(q)?;
            for (i, p) in rotors.iter().enumerate() {
                let (d, g) = field.distance_and_gradient([p.x, p.y]);
                if d >= delta {
                    continue;
                }
                value += penalty(d, delta);
                let dphi = penalty_derivative(d, delta);
                let jac = model.rotor_jacobian_from_frames(&frames, i);
                for (c, out) in grad.iter_mut().enumerate() {
                    *out += dphi * (g[0] * jac[(0, c)] + g[1] * jac[(1, c)]);
                }
            }
        }
        PenaltyKind::Controllability => {
            let state = TorqueState::new(model, q)?;
            let n = state.torques.len();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    match state.torques.face_distance(i, j)? {
                        FaceDistance::Degenerate => value += penalty(0.0, delta),
                        FaceDistance::Face(d) => {
                            if d >= delta {
                                continue;
                            }
                            value += penalty(d, delta);
                            let dphi = penalty_derivative(d, delta);
                            let g = state.face_distance_gradient(i, j)?;
                            for (c, out) in grad.iter_mut().enumerate() {
                                *out += dphi * g[c];
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((value, grad))
}

/// Sampled penalty summed over `samples` and its gradient with respect to the
/// free control points.
pub fn sampled_penalty_and_grad(
    control: &DMatrix<f64>,
    kind: PenaltyKind,
    model: &RobotModel,
    field: &dyn DistanceField,
    delta: f64,
    samples: &SampleSet,
) -> Result<(f64, DMatrix<f64>)> {
    let n_free = control.nrows() - 4;
    let mut value = 0.0;
    let mut grad = DMatrix::zeros(n_free, control.ncols());
    for basis in &samples.basis {
        let q = configuration_at(control, basis);
        let (v, g) = penalty_at(&q, kind, model, field, delta)?;
        if v == 0.0 {
            continue;
        }
        value += v;
        for r in 0..n_free {
            let w = basis[r + 2];
            if w == 0.0 {
                continue;
            }
            for (c, gc) in g.iter().enumerate() {
                grad[(r, c)] += w * gc;
            }
        }
    }
    Ok((value, grad))
}

/// One penalty-weight round of the solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub controllability_weight: f64,
    pub samples: usize,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// Best objective after each accepted iterate (nonincreasing).
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub trivial: bool,
    pub duration: f64,
    /// Penalty samples in the final solve.
    pub samples: usize,
    /// Times the sample density was doubled after a failed dense check.
    pub refinements: usize,
    /// Dense-check failures left in the returned segment.
    pub dense_violations: usize,
    pub used_fallback_init: bool,
    pub rounds: Vec<RoundReport>,
    pub energy: f64,
    pub collision_penalty: f64,
    pub controllability_penalty: f64,
    /// Largest velocity residual (positive means violated).
    pub max_velocity_residual: f64,
    /// Largest joint-bound excess over all free control points (rad).
    pub max_bound_violation: f64,
}

impl SolveReport {
    pub fn iterations(&self) -> usize {
        self.rounds.iter().map(|r| r.iterations).sum()
    }

    pub fn termination(&self) -> Option<Termination> {
        self.rounds.last().map(|r| r.termination)
    }
}

/// Joint bounds and velocity limits as `C x >= b` on `vec` of the free rows.
fn linear_constraints(
    boundary: &BoundaryRows,
    n_free: usize,
    knots: &[f64],
    degree: usize,
    model: &RobotModel,
    limits: &[f64],
) -> LinearConstraints {
    let dim = limits.len();
    let n = n_free * dim;
    let zero_free = DMatrix::zeros(n_free, dim);
    let (r0, jac) = velocity_constraints_and_jac(&assemble_control(boundary, &zero_free), knots, degree, limits);
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for k in 0..jac.nrows() {
        let row: Vec<f64> = jac.row(k).iter().map(|v| -v).collect();
        if row.iter().any(|v| *v != 0.0) {
            rows.push((row, r0[k]));
        }
    }
    for c in BASE_DOF..dim {
        for r in 0..n_free {
            let mut lower = vec![0.0; n];
            lower[c * n_free + r] = 1.0;
            rows.push((lower, model.theta_min));
            let mut upper = vec![0.0; n];
            upper[c * n_free + r] = -1.0;
            rows.push((upper, -model.theta_max));
        }
    }
    let c = DMatrix::from_fn(rows.len(), n, |i, j| rows[i].0[j]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    LinearConstraints { c, b }
}

struct Problem<'a> {
    boundary: BoundaryRows,
    n_free: usize,
    dim: usize,
    energy: DMatrix<f64>,
    samples: SampleSet,
    model: &'a RobotModel,
    field: &'a dyn DistanceField,
    collision_delta: f64,
    controllability_delta: f64,
    collision_weight: f64,
}

struct Terms {
    energy: f64,
    collision: f64,
    controllability: f64,
    gradient: DMatrix<f64>,
}

impl Problem<'_> {
    fn control(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let free = DMatrix::from_column_slice(self.n_free, self.dim, x.as_slice());
        assemble_control(&self.boundary, &free)
    }

    fn terms(&self, x: &DVector<f64>, controllability_weight: f64) -> Result<Terms> {
        let control = self.control(x);
        let (energy, mut gradient) = energy_and_grad(&control, &self.energy);
        let (collision, g_col) = sampled_penalty_and_grad(
            &control,
            PenaltyKind::Collision,
            self.model,
            self.field,
            self.collision_delta,
            &self.samples,
        )?;
        let (controllability, g_ctrl) = sampled_penalty_and_grad(
            &control,
            PenaltyKind::Controllability,
            self.model,
            self.field,
            self.controllability_delta,
            &self.samples,
        )?;
        gradient += g_col * self.collision_weight + g_ctrl * controllability_weight;
        Ok(Terms { energy, collision, controllability, gradient })
    }

    fn objective(&self, x: &DVector<f64>, controllability_weight: f64) -> (f64, DVector<f64>) {
        match self.terms(x, controllability_weight) {
            Ok(t) => (
                t.energy + self.collision_weight * t.collision + controllability_weight * t.controllability,
                DVector::from_column_slice(t.gradient.as_slice()),
            ),
            Err(_) => (f64::NAN, DVector::zeros(x.len())),
        }
    }
}

/// Optimizes one segment with the deterministic iteration cap from `params`.
pub fn optimize_segment(
    q_init: &Configuration,
    v_init: &[f64],
    q_target: &Configuration,
    v_target: &[f64],
    model: &RobotModel,
    field: &dyn DistanceField,
    params: &PlannerParams,
) -> Result<(SplineSegment, SolveReport)> {
    optimize_segment_with_budget(q_init, v_init, q_target, v_target, model, field, params, &IterationBudget(params.max_iterations))
}

/// Optimizes one segment; `budget` is consulted once per solver iteration in
/// addition to the iteration cap in `params`.
#[allow(clippy::too_many_arguments)]
pub fn optimize_segment_with_budget(
    q_init: &Configuration,
    v_init: &[f64],
    q_target: &Configuration,
    v_target: &[f64],
    model: &RobotModel,
    field: &dyn DistanceField,
    params: &PlannerParams,
    budget: &dyn Budget,
) -> Result<(SplineSegment, SolveReport)> {
    params.validate()?;
    let dim = model.dof();
    for q in [q_init, q_target] {
        if q.dim() != dim {
            return Err(Error::InvalidConfiguration { expected: dim, got: q.dim() });
        }
    }
    if v_init.len() != dim || v_target.len() != dim {
        return Err(Error::InvalidConfiguration { expected: dim, got: v_init.len().min(v_target.len()) });
    }
    let (n_free, degree) = (params.n_free, params.degree);
    let Some(duration) = segment_duration(q_init.as_slice(), q_target.as_slice(), params.alpha_v) else {
        let segment = SplineSegment::constant(q_init.as_slice(), n_free, degree, TRIVIAL_DURATION)?;
        let report = SolveReport {
            trivial: true,
            duration: TRIVIAL_DURATION,
            samples: 0,
            refinements: 0,
            dense_violations: 0,
            used_fallback_init: false,
            rounds: Vec::new(),
            energy: 0.0,
            collision_penalty: 0.0,
            controllability_penalty: 0.0,
            max_velocity_residual: -params.v_max.min(params.omega_max),
            max_bound_violation: 0.0,
        };
        return Ok((segment, report));
    };

    let knots = knot_vector(n_free, degree, duration)?;
    let h = knot_interval(n_free, degree, duration);
    let boundary = boundary_rows(q_init.as_slice(), v_init, q_target.as_slice(), v_target, h);
    let energy = energy_matrix(n_free, degree, duration)?;
    let (init, used_fallback_init) = min_energy_init(&boundary, &energy);
    let mut k = sample_count(q_init.as_slice(), q_target.as_slice(), params.alpha_k);
    let limits = params.velocity_limits(dim);
    let constraints = linear_constraints(&boundary, n_free, &knots, degree, model, &limits);

    // Exact Hessian of the energy term: block diagonal 2 M_ff per column.
    let mff = energy.view((2, 2), (n_free, n_free)).into_owned();
    let mut hessian0 = DMatrix::zeros(n_free * dim, n_free * dim);
    for c in 0..dim {
        hessian0.view_mut((c * n_free, c * n_free), (n_free, n_free)).copy_from(&(&mff * 2.0));
    }

    let mut problem = Problem {
        boundary: boundary.clone(),
        n_free,
        dim,
        energy: energy.clone(),
        samples: SampleSet::new(&knots, degree, duration, k)?,
        model,
        field,
        collision_delta: PenaltyKind::Collision.delta(model, params) + params.collision_margin,
        controllability_delta: PenaltyKind::Controllability.delta(model, params) + params.controllability_margin,
        collision_weight: params.collision_weight,
    };

    let options = SqpOptions { f_tol: params.f_tol, ..SqpOptions::default() };
    let cap = IterationBudget(params.max_iterations);
    let combined = Combined { a: &cap, b: budget };
    let mut x = DVector::from_column_slice(init.as_slice());
    let mut weight = params.controllability_weight;
    let mut rounds = Vec::new();
    let mut refinements = 0;
    let dense_count = |k: usize| (4 * k).max(1000);
    let mut dense_violations;
    loop {
        for round in 0..=params.escalation_rounds {
            let result =
                solver::minimize(|y| problem.objective(y, weight), &x, &hessian0, &constraints, &options, &combined)?;
            x = result.x;
            rounds.push(RoundReport {
                controllability_weight: weight,
                samples: k,
                iterations: result.iterations,
                evaluations: result.evaluations,
                termination: result.termination,
                history: result.history,
            });
            let terms = problem.terms(&x, weight)?;
            if terms.controllability == 0.0 || round == params.escalation_rounds || budget.exhausted(0) {
                break;
            }
            weight *= 10.0;
        }
        let segment = SplineSegment::new(n_free, degree, duration, problem.control(&x))?;
        dense_violations = dense_check(&segment, model, field, params, dense_count(k))?;
        if dense_violations == 0 || refinements == params.refinement_rounds || budget.exhausted(0) {
            break;
        }
        // Restart from the initial guess: the previous optimum may have
        // tunnelled through a thin infeasible band between samples.
        refinements += 1;
        k *= 2;
        problem.samples = SampleSet::new(&knots, degree, duration, k)?;
        x = DVector::from_column_slice(init.as_slice());
        weight = params.controllability_weight;
    }

    let terms = problem.terms(&x, weight)?;
    let control = problem.control(&x);
    let (residual, _) = velocity_constraints_and_jac(&control, &knots, degree, &limits);
    let max_velocity_residual = residual.iter().fold(f64::NEG_INFINITY, |a, v| a.max(*v));
    let mut max_bound_violation = 0.0f64;
    for c in BASE_DOF..dim {
        for r in 2..n_free + 2 {
            let v = control[(r, c)];
            max_bound_violation = max_bound_violation.max(model.theta_min - v).max(v - model.theta_max);
        }
    }
    let segment = SplineSegment::new(n_free, degree, duration, control)?;
    let report = SolveReport {
        trivial: false,
        duration,
        samples: k,
        refinements,
        dense_violations,
        used_fallback_init,
        rounds,
        energy: terms.energy,
        collision_penalty: terms.collision,
        controllability_penalty: terms.controllability,
        max_velocity_residual,
        max_bound_violation,
    };
    Ok((segment, report))
}

/// Number of the `n + 1` uniformly spaced states of `segment` that break the
/// strict rotor clearance or the controllability threshold.
pub fn dense_check(
    segment: &SplineSegment,
    model: &RobotModel,
    field: &dyn DistanceField,
    params: &PlannerParams,
    n: usize,
) -> Result<usize> {
    let threshold = model.rotor_radius + params.delta_collision;
    let mut count = 0;
    for j in 0..=n {
        let q = Configuration::new(segment.evaluate(j as f64 / n as f64 * segment.duration)?);
        let clear = model.rotor_positions(&q)?.iter().all(|p| field.distance_and_gradient([p.x, p.y]).0 > threshold);
        if !clear || !(crate::polytope::tau_min(model, &q)? > params.delta_tau) {
            count += 1;
        }
    }
    Ok(count)
}

struct Combined<'a> {
    a: &'a dyn Budget,
    b: &'a dyn Budget,
}

impl Budget for Combined<'_> {
    fn exhausted(&self, iterations: usize) -> bool {
        self.a.exhausted(iterations) || self.b.exhausted(iterations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anchors::square_configuration;

    struct Open;

    impl DistanceField for Open {
        fn distance_and_gradient(&self, _: [f64; 2]) -> (f64, [f64; 2]) {
            (f64::INFINITY, [0.0, 0.0])
        }
    }

    #[test]
    fn duration_from_distance() {
        assert!((segment_duration(&[0.0, 0.0], &[0.9, 1.2], 0.3).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(segment_duration(&[1.0], &[1.0], 0.3), None);
    }

    #[test]
    fn zero_velocity_boundary() {
        let b = boundary_rows(&[1.0, 2.0], &[0.0, 0.0], &[3.0, 4.0], &[0.0, 0.0], 0.5);
        assert_eq!(b.rows[0], b.rows[1]);
        assert_eq!(b.rows[2], b.rows[3]);
    }

    #[test]
    fn constant_control_points_have_no_energy() {
        let m = energy_matrix(5, 3, 2.0).unwrap();
        let c = DMatrix::from_element(9, 6, 0.7);
        let (e, g) = energy_and_grad(&c, &m);
        assert!(e.abs() < 1e-12 && g.amax() < 1e-12);
    }

    #[test]
    fn constant_control_points_satisfy_velocity_limits() {
        let knots = knot_vector(5, 3, 2.0).unwrap();
        let c = DMatrix::from_element(9, 6, 0.7);
        let limits = PlannerParams::default().velocity_limits(6);
        let (r, _) = velocity_constraints_and_jac(&c, &knots, 3, &limits);
        for (k, v) in r.iter().enumerate() {
            let col = (k % (8 * 6)) / 8;
            assert_eq!(*v, -limits[col]);
        }
    }

    #[test]
    fn penalty_band() {
        assert_eq!(penalty(0.3, 0.25), 0.0);
        assert!((penalty(0.2, 0.25) - 0.05f64.powi(2) / 0.5).abs() < 1e-15);
        assert_eq!(penalty_derivative(0.25, 0.25), 0.0);
    }

    #[test]
    fn open_space_segment_is_min_energy() {
        let model = RobotModel::default();
        let a = square_configuration(&model, [0.0, 0.0], 0.0);
        let b = square_configuration(&model, [0.3, 0.1], 0.2);
        let params = PlannerParams::default();
        let zero = vec![0.0; 6];
        let (seg, report) = optimize_segment(&a, &zero, &b, &zero, &model, &Open, &params).unwrap();
        assert!(!report.trivial);
        assert_eq!(report.collision_penalty, 0.0);
        assert_eq!(report.controllability_penalty, 0.0);
        assert!(report.iterations() <= 1);
        let end = seg.evaluate(seg.duration).unwrap();
        for (x, y) in end.iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn coincident_endpoints_are_trivial() {
        let model = RobotModel::default();
        let a = square_configuration(&model, [0.0, 0.0], 0.0);
        let zero = vec![0.0; 6];
        let (seg, report) = optimize_segment(&a, &zero, &a, &zero, &model, &Open, &PlannerParams::default()).unwrap();
        assert!(report.trivial);
        assert_eq!(seg.duration, TRIVIAL_DURATION);
    }
}
