//! Hierarchical planning: anchor states, independent segment solves,
//! concatenation and dense validation.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::anchors::{generate_anchor_states, AnchorParams, AnchorSequence};
use crate::error::{Error, Result};
use crate::esdf::EsdfGrid;
use crate::localopt::{optimize_segment_with_budget, segment_duration, PlannerParams, SolveReport, TRIVIAL_DURATION};
use crate::model::{Configuration, RobotModel};
use crate::solver::{Budget, IterationBudget};
use crate::spline::SplineSegment;
use crate::trajectory::{validate, GlobalTrajectory, ValidationReport};

pub type SegmentResult = Result<(SplineSegment, SolveReport)>;

/// Executes independent segment solves, possibly concurrently. Results must
/// come back in index order.
pub trait SegmentRunner: Sync {
    fn run(&self, count: usize, solve: &(dyn Fn(usize) -> SegmentResult + Sync)) -> Vec<SegmentResult>;

    /// Budget for one segment, created when that segment starts.
    fn budget(&self, params: &PlannerParams) -> Box<dyn Budget>;
}

/// Solves segments one after another on the calling thread, limited only by
/// the iteration cap.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl SegmentRunner for Sequential {
    fn run(&self, count: usize, solve: &(dyn Fn(usize) -> SegmentResult + Sync)) -> Vec<SegmentResult> {
        (0..count).map(solve).collect()
    }

    fn budget(&self, _params: &PlannerParams) -> Box<dyn Budget> {
        Box::new(IterationBudget(usize::MAX))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    Full,
    /// One segment straight from start to goal.
    NoAnchorStates,
    /// Anchors joined by straight configuration-space interpolation.
    NoLocalPlanning,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub anchors: Option<AnchorSequence>,
    pub trajectory: GlobalTrajectory,
    pub validation: ValidationReport,
}

/// Straight-line segment between two configurations with zero end velocity.
pub fn interpolate_segment(q_init: &Configuration, q_target: &Configuration, params: &PlannerParams) -> Result<SplineSegment> {
    let (n_free, degree) = (params.n_free, params.degree);
    let Some(duration) = segment_duration(q_init.as_slice(), q_target.as_slice(), params.alpha_v) else {
        return SplineSegment::constant(q_init.as_slice(), n_free, degree, TRIVIAL_DURATION);
    };
    let (a, b) = (q_init.as_slice(), q_target.as_slice());
    let control = DMatrix::from_fn(n_free + 4, a.len(), |r, c| {
        let s = (r.clamp(1, n_free + 2) - 1) as f64 / (n_free + 1) as f64;
        a[c] + s * (b[c] - a[c])
    });
    SplineSegment::new(n_free, degree, duration, control)
}

/// Optimizes every consecutive pair of `states` through `runner`.
pub fn solve_segments<R: SegmentRunner + ?Sized>(
    states: &[Configuration],
    model: &RobotModel,
    esdf: &EsdfGrid,
    params: &PlannerParams,
    runner: &R,
) -> Result<(Vec<SplineSegment>, Vec<SolveReport>)> {
    let zero = alloc::vec![0.0; model.dof()];
    let count = states.len().saturating_sub(1);
    let solve = |i: usize| -> SegmentResult {
        let budget = runner.budget(params);
        optimize_segment_with_budget(&states[i], &zero, &states[i + 1], &zero, model, esdf, params, budget.as_ref())
            .map_err(|e| match e {
                Error::SolverDiverged => Error::SegmentDiverged { index: i },
                Error::QpInfeasible => Error::SegmentInfeasible { index: i },
                other => other,
            })
    };
    let mut segments = Vec::with_capacity(count);
    let mut reports = Vec::with_capacity(count);
    for result in runner.run(count, &solve) {
        let (s, r) = result?;
        segments.push(s);
        reports.push(r);
    }
    Ok((segments, reports))
}

/// Plans from `start` to `goal` and validates the result.
#[allow(clippy::too_many_arguments)]
pub fn plan<R: SegmentRunner + ?Sized>(
    start: &Configuration,
    goal: &Configuration,
    model: &RobotModel,
    esdf: &EsdfGrid,
    anchor_params: &AnchorParams,
    params: &PlannerParams,
    ablation: Ablation,
    runner: &R,
) -> Result<Plan> {
    model.validate()?;
    params.validate()?;
    if start.dim() != model.dof() || goal.dim() != model.dof() {
        return Err(Error::InvalidConfiguration { expected: model.dof(), got: start.dim().min(goal.dim()) });
    }
    let (anchors, segments, reports) = if segment_duration(start.as_slice(), goal.as_slice(), 1.0).is_none() {
        let seg = SplineSegment::constant(start.as_slice(), params.n_free, params.degree, TRIVIAL_DURATION)?;
        (None, alloc::vec![seg], Vec::new())
    } else {
        match ablation {
            Ablation::NoAnchorStates => {
                let states = [start.clone(), goal.clone()];
                let (segments, reports) = solve_segments(&states, model, esdf, params, runner)?;
                (None, segments, reports)
            }
            Ablation::Full => {
                let anchors = generate_anchor_states(start, goal, model, esdf, anchor_params)?;
                let (segments, reports) = solve_segments(&anchors.states, model, esdf, params, runner)?;
                (Some(anchors), segments, reports)
            }
            Ablation::NoLocalPlanning => {
                let anchors = generate_anchor_states(start, goal, model, esdf, anchor_params)?;
                let segments = anchors
                    .states
                    .windows(2)
                    .map(|w| interpolate_segment(&w[0], &w[1], params))
                    .collect::<Result<Vec<_>>>()?;
                (Some(anchors), segments, Vec::new())
            }
        }
    };
    let trajectory = GlobalTrajectory::new(segments)?;
    let mut validation = validate(&trajectory, model, esdf, params)?;
    validation.solver = reports;
    Ok(Plan { anchors, trajectory, validation })
}
