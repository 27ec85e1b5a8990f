//! Synthetic benchmark environments and start/goal sampling.
//!
//! Obstacles are emitted as points on a 0.1 m lattice aligned with the
//! planning grid, so every obstacle cell holds points at its center. Gap
//! edges therefore sit exactly on occupied cell centers and the distance
//! across a gap equals its nominal width.

use std::f64::consts::FRAC_PI_2;

use linkplan_core::esdf::{voxelize, Bounds};
use linkplan_core::{Configuration, EsdfGrid, PointCloud, RobotModel};
use rand::Rng;

use crate::ConfigError;

/// Lattice spacing of generated obstacle points (m).
pub const SPACING: f64 = 0.1;
/// Heights at which obstacle points are generated.
const LAYERS: [f64; 3] = [-0.1, 0.0, 0.1];
/// Vertical slab used when rasterizing clouds onto the planning plane.
pub const Z_SLAB: (f64, f64) = (-0.25, 0.25);

#[derive(Debug, Clone, PartialEq)]
pub enum Scene {
    /// Wall across the map at `x in [-thickness, 0)` with one opening
    /// centered at `center_y`.
    SingleGap { width: f64, wall_thickness: f64, center_y: f64 },
    /// Two such walls whose openings are `x_offset` apart along x.
    DualGap { width: f64, x_offset: f64, center_y: f64 },
    /// Three walls `spacing` apart, openings alternately shifted by `stagger`.
    TripleGap { width: f64, spacing: f64, stagger: f64, center_y: f64 },
    /// Solid discs.
    Poles { radius: f64, centers: Vec<[f64; 2]> },
    /// A corridor of the given width that turns back on itself.
    UPassage { corridor_width: f64 },
}

impl Scene {
    pub fn name(&self) -> &'static str {
        match self {
            Scene::SingleGap { .. } => "single_gap",
            Scene::DualGap { .. } => "dual_gap",
            Scene::TripleGap { .. } => "triple_gap",
            Scene::Poles { .. } => "poles",
            Scene::UPassage { .. } => "u_passage",
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: &str| Err(ConfigError::Invalid(format!("{}: {msg}", self.name())));
        match self {
            Scene::SingleGap { width, wall_thickness, .. } => {
                if !(*width > 0.0) || !(*wall_thickness > 0.0) {
                    return bad("gap width and wall thickness must be positive");
                }
            }
            Scene::DualGap { width, x_offset, .. } => {
                if !(*width > 0.0) || !(*x_offset > SPACING) {
                    return bad("gap width must be positive and walls must not overlap");
                }
            }
            Scene::TripleGap { width, spacing, .. } => {
                if !(*width > 0.0) || !(*spacing > SPACING) {
                    return bad("gap width must be positive and walls must not overlap");
                }
            }
            Scene::Poles { radius, centers } => {
                if !(*radius > 0.0) || centers.is_empty() {
                    return bad("need a positive radius and at least one pole");
                }
            }
            Scene::UPassage { corridor_width } => {
                if !(*corridor_width > 0.0) {
                    return bad("corridor width must be positive");
                }
            }
        }
        Ok(())
    }

    /// Planning-grid bounds (multiples of the lattice spacing).
    pub fn bounds(&self) -> Bounds {
        match self {
            Scene::SingleGap { .. } | Scene::DualGap { .. } => Bounds { min: [-3.5, -1.5], max: [2.5, 2.0] },
            Scene::TripleGap { .. } => Bounds { min: [-4.5, -1.5], max: [2.5, 2.0] },
            Scene::Poles { .. } => Bounds { min: [-3.5, -2.0], max: [2.5, 2.5] },
            Scene::UPassage { corridor_width } => {
                let top = snap_up(1.5 * corridor_width + 1.5 + 0.5);
                Bounds { min: [-3.5, -snap_up(corridor_width / 2.0 + 0.5)], max: [2.5, top] }
            }
        }
    }

    /// Walls as `(x_min, x_max)` slabs together with their opening in y.
    fn walls(&self) -> Vec<([f64; 2], [f64; 2])> {
        match self {
            Scene::SingleGap { width, wall_thickness, center_y } => {
                vec![([-*wall_thickness, 0.0], opening(*width, *center_y))]
            }
            Scene::DualGap { width, x_offset, center_y } => vec![
                ([-SPACING, 0.0], opening(*width, *center_y)),
                ([-x_offset - SPACING, -x_offset], opening(*width, *center_y)),
            ],
            Scene::TripleGap { width, spacing, stagger, center_y } => (0..3)
                .map(|k| {
                    let x = -(k as f64) * spacing;
                    let shift = if k % 2 == 1 { *stagger } else { 0.0 };
                    ([x - SPACING, x], opening(*width, center_y + shift))
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Mid-plane (x) of the wall arrangement, used to mirror start states.
    pub fn mirror_x(&self) -> f64 {
        let walls = self.walls();
        match (walls.first(), walls.last()) {
            (Some(a), Some(b)) => 0.5 * (a.0[1] + b.0[0]),
            _ => 0.0,
        }
    }

    /// Obstacle points on the lattice.
    pub fn point_cloud(&self) -> Result<PointCloud, ConfigError> {
        self.validate()?;
        let b = self.bounds();
        let mut cells: Vec<(i64, i64)> = Vec::new();
        let (ymin, ymax) = (b.min[1], b.max[1]);
        for (xs, gap) in self.walls() {
            fill(&mut cells, xs, [ymin, gap[0]]);
            fill(&mut cells, xs, [gap[1], ymax]);
        }
        match self {
            Scene::Poles { radius, centers } => {
                for c in centers {
                    let (ix0, ix1) = (cell(c[0] - radius) - 1, cell(c[0] + radius) + 1);
                    let (iy0, iy1) = (cell(c[1] - radius) - 1, cell(c[1] + radius) + 1);
                    for ix in ix0..=ix1 {
                        for iy in iy0..=iy1 {
                            let p = center(ix, iy);
                            if (p[0] - c[0]).hypot(p[1] - c[1]) <= *radius {
                                cells.push((ix, iy));
                            }
                        }
                    }
                }
            }
            Scene::UPassage { corridor_width } => {
                let w = *corridor_width;
                let upper = 1.5 + w;
                let left = -2.0;
                let t = 0.2;
                // Outer boundary: bottom, top and left walls.
                fill(&mut cells, [left - w / 2.0 - t, b.max[0]], [-w / 2.0 - t, -w / 2.0]);
                fill(&mut cells, [left - w / 2.0 - t, b.max[0]], [upper + w / 2.0, upper + w / 2.0 + t]);
                fill(&mut cells, [left - w / 2.0 - t, left - w / 2.0], [-w / 2.0, upper + w / 2.0]);
                // Divider between the two legs.
                fill(&mut cells, [left + w / 2.0, b.max[0]], [w / 2.0, upper - w / 2.0]);
            }
            _ => {}
        }
        cells.sort_unstable();
        cells.dedup();
        let mut points = Vec::with_capacity(cells.len() * LAYERS.len());
        for (ix, iy) in cells {
            let p = center(ix, iy);
            for z in LAYERS {
                points.push([p[0], p[1], z]);
            }
        }
        Ok(PointCloud::new(points))
    }

    pub fn esdf(&self, resolution: f64) -> Result<EsdfGrid, ConfigError> {
        grid_from_cloud(&self.point_cloud()?, resolution, self.bounds())
    }

    /// Default start and goal for a fixed (non-randomized) run.
    pub fn default_endpoints(&self, model: &RobotModel) -> (Configuration, Configuration) {
        match self {
            Scene::UPassage { corridor_width } => {
                let upper = 1.5 + corridor_width;
                let yaw = -FRAC_PI_2 + 5f64.to_radians();
                let start = square(model, [0.9, 0.3], 5f64.to_radians());
                let goal = square(model, [1.4, upper + 0.3], yaw + FRAC_PI_2 + std::f64::consts::PI);
                (start, goal)
            }
            Scene::Poles { .. } => {
                let yaw = 5f64.to_radians();
                (square(model, [1.2, 0.25], yaw), square(model, [-2.6, 0.25], yaw))
            }
            _ => {
                let start = square(model, [0.9, 0.25], 5f64.to_radians());
                let goal = mirrored_goal(model, &start, self.mirror_x());
                (start, goal)
            }
        }
    }
}

fn snap_up(v: f64) -> f64 {
    (v / SPACING).ceil() * SPACING
}

/// Opening `[lo, hi)` in y whose bounding obstacle cell centers are `width`
/// apart.
fn opening(width: f64, center_y: f64) -> [f64; 2] {
    [center_y - width / 2.0 + SPACING / 2.0, center_y + width / 2.0 - SPACING / 2.0]
}

fn cell(v: f64) -> i64 {
    (v / SPACING).floor() as i64
}

fn center(ix: i64, iy: i64) -> [f64; 2] {
    [(ix as f64 + 0.5) * SPACING, (iy as f64 + 0.5) * SPACING]
}

/// Lattice cells whose centers fall inside `[x0, x1) x [y0, y1)`.
fn fill(cells: &mut Vec<(i64, i64)>, xs: [f64; 2], ys: [f64; 2]) {
    let first = |v: f64| ((v / SPACING) - 0.5 - 1e-9).ceil() as i64;
    for ix in first(xs[0])..first(xs[1]) {
        for iy in first(ys[0])..first(ys[1]) {
            cells.push((ix, iy));
        }
    }
}

pub fn grid_from_cloud(cloud: &PointCloud, resolution: f64, bounds: Bounds) -> Result<EsdfGrid, ConfigError> {
    let occ = voxelize(cloud, resolution, bounds, Z_SLAB).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    EsdfGrid::build(&occ).map_err(|e| ConfigError::Invalid(e.to_string()))
}

pub fn square(model: &RobotModel, root: [f64; 2], yaw: f64) -> Configuration {
    linkplan_core::anchors::square_configuration(model, root, yaw)
}

/// The start shape translated to the far side of the mirror plane at the
/// same standoff, with unchanged orientation and joints.
pub fn mirrored_goal(model: &RobotModel, start: &Configuration, mirror_x: f64) -> Configuration {
    let rotors = model.rotor_positions(start).unwrap_or_default();
    let cx = rotors.iter().map(|p| p.x).sum::<f64>() / rotors.len().max(1) as f64;
    let root = start.root();
    let shift = 2.0 * (mirror_x - cx);
    Configuration::from_parts([root[0] + shift, root[1]], start.yaw(), start.joints())
}

/// Randomized start for the gap campaign: root x uniform in `x_range`, fixed
/// y and yaw, square shape; goal mirrored across the walls.
pub fn sample_instance<R: Rng + ?Sized>(
    rng: &mut R,
    model: &RobotModel,
    scene: &Scene,
    x_range: (f64, f64),
    y: f64,
    yaw: f64,
) -> (Configuration, Configuration) {
    let x = rng.gen_range(x_range.0..=x_range.1);
    let start = square(model, [x, y], yaw);
    let goal = mirrored_goal(model, &start, scene.mirror_x());
    (start, goal)
}
