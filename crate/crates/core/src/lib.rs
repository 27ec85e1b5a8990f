//! Planning core for planar floating-base multi-link robots.
//!
//! Everything in this crate is a pure function of its inputs and only needs
//! `alloc`: robot kinematics, the control-torque controllability metric, the
//! signed distance field, A* guidance, lattice anchor-state generation,
//! clamped B-spline machinery and the per-segment trajectory optimizer.
//! File formats, threading and the command-line tools live in the `linkplan`
//! crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]
// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod anchors;
pub mod error;
pub mod esdf;
pub mod guidance;
pub mod localopt;
pub mod model;
pub mod planner;
pub mod polytope;
pub mod qp;
pub mod solver;
pub mod spline;
pub mod trajectory;

mod math;

pub use anchors::{AnchorParams, AnchorSequence};
pub use error::{Error, Result};
pub use esdf::{DistanceField, EsdfGrid, OccupancyGrid, PointCloud};
pub use guidance::ReferencePath;
pub use localopt::{PlannerParams, SolveReport};
pub use model::{Configuration, RobotModel};
pub use planner::{plan, Ablation, Plan};
pub use spline::SplineSegment;
pub use trajectory::{GlobalTrajectory, ValidationReport};

