//! Concatenated segment trajectories, command sampling and dense validation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::esdf::EsdfGrid;
use crate::localopt::{sample_count, PlannerParams, SolveReport};
use crate::math::floor;
use crate::model::{Configuration, RobotModel, BASE_DOF};
use crate::polytope;
use crate::spline::SplineSegment;

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalTrajectory {
    pub segments: Vec<SplineSegment>,
    /// Start time of each segment (s).
    pub start_times: Vec<f64>,
    pub total_duration: f64,
}

impl GlobalTrajectory {
    pub fn new(segments: Vec<SplineSegment>) -> Result<Self> {
        let Some(first) = segments.first() else {
            return Err(Error::InvalidSpline("a trajectory needs at least one segment"));
        };
        let dim = first.dim();
        if segments.iter().any(|s| s.dim() != dim) {
            return Err(Error::InvalidSpline("segments disagree on dimension"));
        }
        let mut start_times = Vec::with_capacity(segments.len());
        let mut t = 0.0;
        for s in &segments {
            start_times.push(t);
            t += s.duration;
        }
        Ok(Self { segments, start_times, total_duration: t })
    }

    pub fn dim(&self) -> usize {
        self.segments[0].dim()
    }

    /// Segment index and local time; junctions belong to the later segment.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        if !(t >= 0.0 && t <= self.total_duration) {
            return Err(Error::OutOfDomain { t, duration: self.total_duration });
        }
        let idx = match self.start_times.iter().rposition(|&s| s <= t) {
            Some(i) => i,
            None => 0,
        };
        let duration = self.segments[idx].duration;
        if t == self.total_duration {
            return Ok((idx, duration));
        }
        Ok((idx, (t - self.start_times[idx]).clamp(0.0, duration)))
    }

    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        let (i, local) = self.locate(t)?;
        self.segments[i].evaluate(local)
    }

    pub fn evaluate_velocity(&self, t: f64) -> Result<Vec<f64>> {
        let (i, local) = self.locate(t)?;
        self.segments[i].evaluate_velocity(local)
    }

    /// Largest position and velocity jumps over all junctions.
    pub fn junction_gaps(&self) -> (f64, f64) {
        let mut pos = 0.0f64;
        let mut vel = 0.0f64;
        for w in self.segments.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let (qa, qb) = (a.evaluate(a.duration).unwrap(), b.evaluate(0.0).unwrap());
            let (va, vb) = (a.evaluate_velocity(a.duration).unwrap(), b.evaluate_velocity(0.0).unwrap());
            for c in 0..qa.len() {
                pos = pos.max((qa[c] - qb[c]).abs());
                vel = vel.max((va[c] - vb[c]).abs());
            }
        }
        (pos, vel)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandSample {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

/// Uniform samples at `rate` Hz over `[0, T]`, both ends included.
pub fn sample_commands(traj: &GlobalTrajectory, rate: f64) -> Result<Vec<CommandSample>> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidSpline("sampling rate must be positive"));
    }
    let total = traj.total_duration;
    let steps = floor(total * rate + 1e-9) as usize;
    let mut times: Vec<f64> = (0..=steps).map(|i| (i as f64 / rate).min(total)).collect();
    if total - times[times.len() - 1] > 1e-12 {
        times.push(total);
    }
    times
        .into_iter()
        .map(|t| Ok(CommandSample { t, q: traj.evaluate(t)?, qdot: traj.evaluate_velocity(t)? }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Collision,
    Controllability,
    Velocity,
    JointRange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub kind: ViolationKind,
}

/// Tolerances of the dense checks.
pub const VELOCITY_TOLERANCE: f64 = 1e-6;
pub const JOINT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    /// Smallest rotor-center distance minus the propeller radius (m);
    /// infinite when the map has no obstacles.
    pub min_clearance: f64,
    pub min_tau: f64,
    /// Largest |q̇| per coordinate.
    pub max_speed: Vec<f64>,
    pub collision_violations: usize,
    pub controllability_violations: usize,
    pub velocity_violations: usize,
    pub joint_violations: usize,
    pub first_violation: Option<Violation>,
    pub solver: Vec<SolveReport>,
}

impl ValidationReport {
    pub fn success(&self) -> bool {
        self.collision_violations == 0
            && self.controllability_violations == 0
            && self.velocity_violations == 0
            && self.joint_violations == 0
    }

    pub fn violations(&self) -> usize {
        self.collision_violations + self.controllability_violations + self.velocity_violations + self.joint_violations
    }

    fn new(dim: usize) -> Self {
        Self {
            samples: 0,
            min_clearance: f64::INFINITY,
            min_tau: f64::INFINITY,
            max_speed: vec![0.0; dim],
            collision_violations: 0,
            controllability_violations: 0,
            velocity_violations: 0,
            joint_violations: 0,
            first_violation: None,
            solver: Vec::new(),
        }
    }

    fn flag(&mut self, t: f64, kind: ViolationKind) {
        if self.first_violation.is_none() {
            self.first_violation = Some(Violation { t, kind });
        }
    }

    /// Checks one state: strict rotor clearance `d > R_p + delta_collision`,
    /// `tau_min > delta_tau`, per-axis speed limits and joint ranges.
    #[allow(clippy::too_many_arguments)]
    fn check_state(
        &mut self,
        t: f64,
        q: &[f64],
        qdot: &[f64],
        model: &RobotModel,
        esdf: &EsdfGrid,
        obstacles: bool,
        params: &PlannerParams,
    ) -> Result<()> {
        let config = Configuration::new(q.to_vec());
        self.samples += 1;
        let threshold = model.rotor_radius + params.delta_collision;
        let mut collided = false;
        for p in model.rotor_positions(&config)? {
            let d = esdf.query([p.x, p.y]).distance;
            if obstacles {
                self.min_clearance = self.min_clearance.min(d - model.rotor_radius);
            }
            collided |= !(d > threshold);
        }
        if collided {
            self.collision_violations += 1;
            self.flag(t, ViolationKind::Collision);
        }
        let tau = polytope::tau_min(model, &config)?;
        self.min_tau = self.min_tau.min(tau);
        if !(tau > params.delta_tau) {
            self.controllability_violations += 1;
            self.flag(t, ViolationKind::Controllability);
        }
        let limits = params.velocity_limits(q.len());
        let mut fast = false;
        for (c, v) in qdot.iter().enumerate() {
            self.max_speed[c] = self.max_speed[c].max(v.abs());
            fast |= !(v.abs() <= limits[c] + VELOCITY_TOLERANCE);
        }
        if fast {
            self.velocity_violations += 1;
            self.flag(t, ViolationKind::Velocity);
        }
        let out_of_range = q[BASE_DOF..]
            .iter()
            .any(|th| !(*th >= model.theta_min - JOINT_TOLERANCE && *th <= model.theta_max + JOINT_TOLERANCE));
        if out_of_range {
            self.joint_violations += 1;
            self.flag(t, ViolationKind::JointRange);
        }
        Ok(())
    }
}

/// Dense samples per segment: `max(4 K, 1000)` intervals.
pub fn validation_samples(segment: &SplineSegment, params: &PlannerParams) -> usize {
    let q0 = segment.evaluate(0.0).unwrap_or_default();
    let q1 = segment.evaluate(segment.duration).unwrap_or_default();
    (4 * sample_count(&q0, &q1, params.alpha_k)).max(1000)
}

pub fn validate(traj: &GlobalTrajectory, model: &RobotModel, esdf: &EsdfGrid, params: &PlannerParams) -> Result<ValidationReport> {
    let mut report = ValidationReport::new(traj.dim());
    let obstacles = esdf.has_obstacles();
    for (seg, &start) in traj.segments.iter().zip(&traj.start_times) {
        let n = validation_samples(seg, params);
        for j in 0..=n {
            let local = j as f64 / n as f64 * seg.duration;
            let q = seg.evaluate(local)?;
            let qdot = seg.evaluate_velocity(local)?;
            report.check_state(start + local, &q, &qdot, model, esdf, obstacles, params)?;
        }
    }
    Ok(report)
}

/// Validates externally supplied `(t, q, q̇)` samples.
pub fn validate_samples(
    samples: &[CommandSample],
    model: &RobotModel,
    esdf: &EsdfGrid,
    params: &PlannerParams,
) -> Result<ValidationReport> {
    let dim = samples.first().map(|s| s.q.len()).unwrap_or(model.dof());
    let mut report = ValidationReport::new(dim);
    let obstacles = esdf.has_obstacles();
    for s in samples {
        report.check_state(s.t, &s.q, &s.qdot, model, esdf, obstacles, params)?;
    }
    Ok(report)
}
