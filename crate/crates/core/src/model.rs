//! Robot parameters, planar forward kinematics and configuration Jacobians.
//!
//! A configuration is `[x, y, psi, theta_1, .., theta_nj]`: root-link origin,
//! root yaw and relative joint angles. Link `k + 1` starts at the tip of link
//! `k` (`origin + L [cos psi_k, sin psi_k]`) and its heading is
//! `psi_{k+1} = psi_k + theta_k`. Rotors sit at link midpoints and every link
//! carries the same point mass at its midpoint, so the center of gravity is
//! the mean rotor position.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::ops::Index;

use nalgebra::{Dyn, Matrix3, OMatrix, Vector3, U3};

use crate::error::{Error, Result};
use crate::math::{cos, sin, skew, sqrt};

/// Planar position dimension.
pub const WORKSPACE_DIM: usize = 2;

/// Columns preceding the joint angles: two root coordinates and yaw.
pub const BASE_DOF: usize = 3;

/// A 3×D Jacobian block.
pub type Jacobian3 = OMatrix<f64, U3, Dyn>;

#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub n_joints: usize,
    /// Link length (m).
    pub link_length: f64,
    /// Propeller radius (m).
    pub rotor_radius: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Rotor drag torque coefficient (m).
    pub kappa: f64,
    /// Rotor spin directions, `+1` counterclockwise, `-1` clockwise.
    pub spin_signs: Vec<f64>,
    /// Per-rotor thrust bound (N).
    pub lambda_max: f64,
    /// Mass of every link (kg).
    pub link_mass: f64,
}

impl Default for RobotModel {
    fn default() -> Self {
        Self {
            n_joints: 3,
            link_length: 0.6,
            rotor_radius: 0.2025,
            theta_min: -FRAC_PI_2,
            theta_max: FRAC_PI_2,
            kappa: -0.0182,
            spin_signs: vec![1.0, -1.0, 1.0, -1.0],
            lambda_max: 5.0,
            link_mass: 1.0,
        }
    }
}

impl RobotModel {
    pub fn n_links(&self) -> usize {
        self.n_joints + 1
    }

    pub fn n_rotors(&self) -> usize {
        self.n_links()
    }

    /// Configuration dimension `D`.
    pub fn dof(&self) -> usize {
        BASE_DOF + self.n_joints
    }

    pub fn validate(&self) -> Result<()> {
        if self.spin_signs.len() != self.n_rotors() {
            return Err(Error::InvalidModel("spin_signs length must equal the rotor count"));
        }
        if self.spin_signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::InvalidModel("spin signs must be +1 or -1"));
        }
        if !(self.link_length > 0.0 && self.rotor_radius > 0.0 && self.lambda_max > 0.0) {
            return Err(Error::InvalidModel("link length, rotor radius and thrust bound must be positive"));
        }
        if !(self.theta_min < self.theta_max) {
            return Err(Error::InvalidModel("theta_min must be below theta_max"));
        }
        if !(self.link_mass > 0.0) {
            return Err(Error::InvalidModel("link mass must be positive"));
        }
        Ok(())
    }

    fn check(&self, q: &Configuration) -> Result<()> {
        if q.dim() != self.dof() {
            return Err(Error::InvalidConfiguration { expected: self.dof(), got: q.dim() });
        }
        Ok(())
    }

    /// Origin and heading of every link frame, root first.
    pub fn link_frames(&self, q: &Configuration) -> Result<Vec<LinkFrame>> {
        self.check(q)?;
        let mut frames = Vec::with_capacity(self.n_links());
        let mut origin = [q[0], q[1]];
        let mut heading = q.yaw();
        frames.push(LinkFrame { origin, heading });
        for &theta in q.joints() {
            origin[0] += self.link_length * cos(heading);
            origin[1] += self.link_length * sin(heading);
            heading += theta;
            frames.push(LinkFrame { origin, heading });
        }
        Ok(frames)
    }

    /// Rotor centers (link midpoints) lifted to the z = 0 plane.
    pub fn rotor_positions(&self, q: &Configuration) -> Result<Vec<Vector3<f64>>> {
        let half = 0.5 * self.link_length;
        Ok(self
            .link_frames(q)?
            .iter()
            .map(|f| Vector3::new(f.origin[0] + half * cos(f.heading), f.origin[1] + half * sin(f.heading), 0.0))
            .collect())
    }

    /// Center of gravity in the world frame.
    pub fn cog(&self, q: &Configuration) -> Result<Vector3<f64>> {
        let rotors = self.rotor_positions(q)?;
        // Uniform link masses: the mass-weighted mean reduces to the plain mean.
        let total = self.link_mass * rotors.len() as f64;
        Ok(rotors.iter().fold(Vector3::zeros(), |acc, p| acc + p * self.link_mass) / total)
    }

    /// Jacobian of rotor `i` (0-based) world position with respect to `q`.
    pub fn rotor_jacobian(&self, q: &Configuration, i: usize) -> Result<Jacobian3> {
        if i >= self.n_rotors() {
            return Err(Error::IndexOutOfRange { index: i, len: self.n_rotors() });
        }
        let frames = self.link_frames(q)?;
        Ok(self.rotor_jacobian_from_frames(&frames, i))
    }

    pub(crate) fn rotor_jacobian_from_frames(&self, frames: &[LinkFrame], i: usize) -> Jacobian3 {
        let mut jac = Jacobian3::zeros(self.dof());
        jac[(0, 0)] = 1.0;
        jac[(1, 1)] = 1.0;
        // Lever arm of each heading angle psi_k on rotor i.
        let lever = |k: usize| -> [f64; 2] {
            let scale = if k == i { 0.5 * self.link_length } else { self.link_length };
            let h = frames[k].heading;
            [-scale * sin(h), scale * cos(h)]
        };
        // d psi_k / d yaw = 1 for all k; d psi_k / d theta_j = 1 for k > j.
        for k in 0..=i {
            let [lx, ly] = lever(k);
            jac[(0, 2)] += lx;
            jac[(1, 2)] += ly;
            for j in 0..k {
                jac[(0, BASE_DOF + j)] += lx;
                jac[(1, BASE_DOF + j)] += ly;
            }
        }
        jac
    }

    /// Jacobian of the center of gravity with respect to `q`.
    pub fn cog_jacobian(&self, q: &Configuration) -> Result<Jacobian3> {
        let frames = self.link_frames(q)?;
        Ok(self.cog_jacobian_from_frames(&frames))
    }

    fn cog_jacobian_from_frames(&self, frames: &[LinkFrame]) -> Jacobian3 {
        let n = self.n_rotors();
        let mut jac = Jacobian3::zeros(self.dof());
        for i in 0..n {
            jac += self.rotor_jacobian_from_frames(frames, i) * self.link_mass;
        }
        jac / (self.link_mass * n as f64)
    }

    /// Per-rotor quantities expressed in the world-aligned CoG frame.
    pub fn cog_frame_quantities(&self, q: &Configuration) -> Result<Vec<RotorFrameQuantities>> {
        let frames = self.link_frames(q)?;
        let dof = self.dof();
        let half = 0.5 * self.link_length;
        let rotors: Vec<Vector3<f64>> = frames
            .iter()
            .map(|f| Vector3::new(f.origin[0] + half * cos(f.heading), f.origin[1] + half * sin(f.heading), 0.0))
            .collect();
        let cog = rotors.iter().fold(Vector3::zeros(), |acc, p| acc + p) / rotors.len() as f64;
        let cog_frame = FrameJacobian { linear: self.cog_jacobian_from_frames(&frames), angular: Jacobian3::zeros(dof) };
        let world = FrameJacobian::zeros(dof);
        let identity = Matrix3::identity();

        let mut out = Vec::with_capacity(rotors.len());
        for (i, p) in rotors.iter().enumerate() {
            let jac_world = self.rotor_jacobian_from_frames(&frames, i);
            let position_jacobian = transform_jacobian_unchecked(
                p,
                &jac_world,
                &Vector3::zeros(),
                &cog,
                &world,
                &cog_frame,
                &identity,
                &identity,
            );
            out.push(RotorFrameQuantities {
                position: p - cog,
                thrust_axis: Vector3::z(),
                position_jacobian,
                axis_jacobian: Jacobian3::zeros(dof),
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkFrame {
    pub origin: [f64; 2],
    pub heading: f64,
}

/// Robot configuration `[x, y, psi, theta_1, .., theta_nj]`, yaw unwrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration(Vec<f64>);

impl Configuration {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn from_parts(root: [f64; 2], yaw: f64, joints: &[f64]) -> Self {
        let mut values = Vec::with_capacity(BASE_DOF + joints.len());
        values.extend_from_slice(&root);
        values.push(yaw);
        values.extend_from_slice(joints);
        Self(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn root(&self) -> [f64; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn yaw(&self) -> f64 {
        self.0[2]
    }

    pub fn joints(&self) -> &[f64] {
        &self.0[BASE_DOF..]
    }

    /// Euclidean distance in configuration space.
    pub fn distance(&self, other: &Configuration) -> f64 {
        sqrt(self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

impl Index<usize> for Configuration {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Configuration {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Translational and rotational Jacobian blocks of a frame, both 3×D.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameJacobian {
    pub linear: Jacobian3,
    pub angular: Jacobian3,
}

impl FrameJacobian {
    pub fn zeros(dof: usize) -> Self {
        Self { linear: Jacobian3::zeros(dof), angular: Jacobian3::zeros(dof) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotorFrameQuantities {
    /// Rotor position relative to the CoG.
    pub position: Vector3<f64>,
    /// Unit thrust axis.
    pub thrust_axis: Vector3<f64>,
    pub position_jacobian: Jacobian3,
    pub axis_jacobian: Jacobian3,
}

/// Re-expresses the Jacobian of a point given in a source frame `S` as the
/// Jacobian of its coordinates in a target frame `T`, going through the world
/// frame.
///
/// `rot_world_source` maps S coordinates to world, `rot_target_world` maps
/// world coordinates to T.
#[allow(clippy::too_many_arguments)]
pub fn transform_jacobian(
    point_source: &Vector3<f64>,
    jac_source: &Jacobian3,
    origin_source: &Vector3<f64>,
    origin_target: &Vector3<f64>,
    frame_source: &FrameJacobian,
    frame_target: &FrameJacobian,
    rot_world_source: &Matrix3<f64>,
    rot_target_world: &Matrix3<f64>,
) -> Result<Jacobian3> {
    for r in [rot_world_source, rot_target_world] {
        let deviation = (r.transpose() * r - Matrix3::identity()).abs().max();
        if !(deviation <= 1e-9) {
            return Err(Error::InvalidRotation { deviation });
        }
    }
    let dof = jac_source.ncols();
    for m in [&frame_source.linear, &frame_source.angular, &frame_target.linear, &frame_target.angular] {
        if m.ncols() != dof {
            return Err(Error::InvalidConfiguration { expected: dof, got: m.ncols() });
        }
    }
    Ok(transform_jacobian_unchecked(
        point_source,
        jac_source,
        origin_source,
        origin_target,
        frame_source,
        frame_target,
        rot_world_source,
        rot_target_world,
    ))
}

#[allow(clippy::too_many_arguments)]
fn transform_jacobian_unchecked(
    point_source: &Vector3<f64>,
    jac_source: &Jacobian3,
    origin_source: &Vector3<f64>,
    origin_target: &Vector3<f64>,
    frame_source: &FrameJacobian,
    frame_target: &FrameJacobian,
    rot_world_source: &Matrix3<f64>,
    rot_target_world: &Matrix3<f64>,
) -> Jacobian3 {
    let rotated = rot_world_source * point_source;
    let jac_world =
        rot_world_source * jac_source + &frame_source.linear - skew(&rotated) * &frame_source.angular;
    let point_target = rot_target_world * (rotated + origin_source - origin_target);
    rot_target_world * (jac_world - &frame_target.linear)
        + skew(&point_target) * rot_target_world * &frame_target.angular
}
