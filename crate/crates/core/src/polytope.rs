//! Controllability metric over the control-torque zonotope.
//!
//! Each rotor at full thrust contributes a generator `tau_i` about the center
//! of gravity; the reachable torques form the zonotope `sum_i [0, tau_i]`. Its
//! faces have normals `tau_i x tau_j`, and the distance from the origin to the
//! face with normal `n` is the support value `sum_k max(0, n . tau_k)`. The
//! smallest of these distances, `tau_min`, is zero exactly when the origin
//! leaves the interior.

use alloc::vec::Vec;

use nalgebra::{Dyn, OMatrix, RowDVector, Vector3, U3};

use crate::error::{Error, Result};
use crate::math::skew;
use crate::model::{Configuration, Jacobian3, RobotModel, RotorFrameQuantities};

/// Face normals shorter than this (N²·m²) are treated as degenerate.
pub const DEGENERATE_NORMAL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TorqueSet {
    pub taus: Vec<Vector3<f64>>,
}

impl TorqueSet {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Support function `h(n) = sum_k max(0, n . tau_k)` for a unit direction.
    pub fn support(&self, direction: &Vector3<f64>) -> f64 {
        self.taus.iter().map(|t| direction.dot(t).max(0.0)).sum()
    }

    /// Distance from the origin to the face whose normal is `tau_i x tau_j`.
    pub fn face_distance(&self, i: usize, j: usize) -> Result<FaceDistance> {
        let n = self.len();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        if i == j {
            return Err(Error::InvalidPair(i));
        }
        let normal = self.taus[i].cross(&self.taus[j]);
        let norm = normal.norm();
        if norm < DEGENERATE_NORMAL {
            return Ok(FaceDistance::Degenerate);
        }
        Ok(FaceDistance::Face(self.support(&(normal / norm))))
    }

    /// Minimum over ordered pairs of non-degenerate face distances, or zero if
    /// every pair is degenerate.
    pub fn tau_min(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i == j {
                    continue;
                }
                if let Ok(FaceDistance::Face(d)) = self.face_distance(i, j) {
                    best = best.min(d);
                }
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceDistance {
    Face(f64),
    Degenerate,
}

impl FaceDistance {
    pub fn value(self) -> Option<f64> {
        match self {
            FaceDistance::Face(d) => Some(d),
            FaceDistance::Degenerate => None,
        }
    }
}

fn generator(model: &RobotModel, rotor: &RotorFrameQuantities, spin: f64) -> Vector3<f64> {
    (rotor.position.cross(&rotor.thrust_axis) + rotor.thrust_axis * (model.kappa * spin)) * model.lambda_max
}

/// Full-thrust torque generators about the CoG.
pub fn rotor_torques(model: &RobotModel, q: &Configuration) -> Result<TorqueSet> {
    let rotors = model.cog_frame_quantities(q)?;
    Ok(torques_from_quantities(model, &rotors))
}

pub(crate) fn torques_from_quantities(model: &RobotModel, rotors: &[RotorFrameQuantities]) -> TorqueSet {
    TorqueSet {
        taus: rotors.iter().zip(&model.spin_signs).map(|(r, &s)| generator(model, r, s)).collect(),
    }
}

/// Jacobians `d tau_i / d q`, one 3×D block per rotor.
pub(crate) fn torque_jacobians(model: &RobotModel, rotors: &[RotorFrameQuantities]) -> Vec<Jacobian3> {
    rotors
        .iter()
        .zip(&model.spin_signs)
        .map(|(r, &s)| {
            (-skew(&r.thrust_axis) * &r.position_jacobian
                + skew(&r.position) * &r.axis_jacobian
                + &r.axis_jacobian * (model.kappa * s))
                * model.lambda_max
        })
        .collect()
}

pub fn tau_min(model: &RobotModel, q: &Configuration) -> Result<f64> {
    Ok(rotor_torques(model, q)?.tau_min())
}

/// Everything needed to differentiate face distances at one configuration.
#[derive(Debug, Clone)]
pub struct TorqueState {
    pub torques: TorqueSet,
    pub jacobians: Vec<Jacobian3>,
}

impl TorqueState {
    pub fn new(model: &RobotModel, q: &Configuration) -> Result<Self> {
        let rotors = model.cog_frame_quantities(q)?;
        Ok(Self { torques: torques_from_quantities(model, &rotors), jacobians: torque_jacobians(model, &rotors) })
    }

    /// Gradient of the face distance `d_ij` with respect to `q`.
    ///
    /// Terms with `tau_ijk <= 0` are dropped, which is the lower branch of
    /// `max(0, .)` at the kink.
    pub fn face_distance_gradient(&self, i: usize, j: usize) -> Result<RowDVector<f64>> {
        let taus = &self.torques.taus;
        let n = taus.len();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        if i == j {
            return Err(Error::InvalidPair(i));
        }
        let normal = taus[i].cross(&taus[j]);
        let norm = normal.norm();
        if norm < DEGENERATE_NORMAL {
            return Err(Error::DegenerateFace { i, j });
        }
        let dof = self.jacobians[i].ncols();
        let normal_jac: OMatrix<f64, U3, Dyn> =
            -skew(&taus[j]) * &self.jacobians[i] + skew(&taus[i]) * &self.jacobians[j];
        let norm_grad = normal_jac.tr_mul(&normal) / norm;

        let mut grad = RowDVector::zeros(dof);
        for k in 0..n {
            let dot = normal.dot(&taus[k]);
            if dot / norm <= 0.0 {
                continue;
            }
            let dot_grad = normal_jac.tr_mul(&taus[k]) + self.jacobians[k].tr_mul(&normal);
            let term = (dot_grad * norm - &norm_grad * dot) / (norm * norm);
            grad += term.transpose();
        }
        Ok(grad)
    }
}

/// Gradient of `d_ij` at `q`; fails with [`Error::DegenerateFace`] when the
/// pair spans no face.
pub fn face_distance_gradient(model: &RobotModel, q: &Configuration, i: usize, j: usize) -> Result<RowDVector<f64>> {
    TorqueState::new(model, q)?.face_distance_gradient(i, j)
}
