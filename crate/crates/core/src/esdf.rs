//! Occupancy voxelization and the planar Euclidean signed distance field.
//!
//! Cells are half-open `[origin + i*res, origin + (i+1)*res)`; distances are
//! measured between cell centers. Free cells store the distance to the
//! nearest occupied cell, occupied cells store minus the distance to the
//! nearest free cell. Both transforms are exact (separable lower-envelope
//! algorithm on squared distances).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{floor, hypot, sqrt};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Axis-aligned planar bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

/// Uniform planar grid geometry shared by occupancy and distance grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub origin: [f64; 2],
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridGeometry {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.resolution,
            self.origin[1] + (iy as f64 + 0.5) * self.resolution,
        ]
    }

    /// Cell containing `p`, or `None` outside the grid.
    pub fn cell_of(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let fx = floor((p[0] - self.origin[0]) / self.resolution);
        let fy = floor((p[1] - self.origin[1]) / self.resolution);
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    /// Cell containing `p` after clamping into the grid.
    pub fn clamped_cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let clamp = |v: f64, n: usize| -> usize {
            if v < 0.0 {
                0
            } else if v >= n as f64 {
                n - 1
            } else {
                v as usize
            }
        };
        (
            clamp(floor((p[0] - self.origin[0]) / self.resolution), self.nx),
            clamp(floor((p[1] - self.origin[1]) / self.resolution), self.ny),
        )
    }

    pub fn extent(&self) -> [f64; 2] {
        [self.nx as f64 * self.resolution, self.ny as f64 * self.resolution]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub geometry: GridGeometry,
    pub occupied: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(geometry: GridGeometry) -> Self {
        Self { occupied: vec![false; geometry.len()], geometry }
    }

    pub fn is_occupied(&self, ix: usize, iy: usize) -> bool {
        self.occupied[self.geometry.index(ix, iy)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, value: bool) {
        let i = self.geometry.index(ix, iy);
        self.occupied[i] = value;
    }
}

/// Rasterizes the points whose z lies in `z_slab` (inclusive) onto a grid
/// covering `bounds`. Points outside the bounds are ignored.
pub fn voxelize(cloud: &PointCloud, resolution: f64, bounds: Bounds, z_slab: (f64, f64)) -> Result<OccupancyGrid> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidGrid("resolution must be positive"));
    }
    let span = [bounds.max[0] - bounds.min[0], bounds.max[1] - bounds.min[1]];
    if !(span[0] > 0.0 && span[1] > 0.0) {
        return Err(Error::InvalidGrid("bounds are degenerate"));
    }
    // Tolerate spans that are an integer number of cells up to rounding.
    let cells = |s: f64| -> usize { libm::ceil(s / resolution - 1e-9).max(2.0) as usize };
    let geometry = GridGeometry { origin: bounds.min, resolution, nx: cells(span[0]), ny: cells(span[1]) };
    let mut grid = OccupancyGrid::new(geometry);
    for p in &cloud.points {
        if p[2] < z_slab.0 || p[2] > z_slab.1 {
            continue;
        }
        if p[0] >= bounds.max[0] || p[1] >= bounds.max[1] {
            continue;
        }
        if let Some((ix, iy)) = geometry.cell_of([p[0], p[1]]) {
            grid.set(ix, iy, true);
        }
    }
    Ok(grid)
}

/// Exact 1-D squared distance transform of a sampled function (lower envelope
/// of parabolas). `f` holds 0 at sites and +inf elsewhere.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    // Skip leading non-sites so intersections stay finite.
    let first = f.iter().position(|x| x.is_finite());
    let Some(first) = first else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = first;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                // k == 0 cannot happen here since z[0] = -inf.
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Squared distance (in cells) from every cell to the nearest cell where
/// `site` is true; +inf when there are no sites.
pub fn squared_distance_transform(nx: usize, ny: usize, site: impl Fn(usize) -> bool) -> Vec<f64> {
    let n = nx.max(ny);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut col = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut grid: Vec<f64> = (0..nx * ny).map(|i| if site(i) { 0.0 } else { f64::INFINITY }).collect();
    // Along x for each row.
    for iy in 0..ny {
        let row = &mut grid[iy * nx..(iy + 1) * nx];
        col[..nx].copy_from_slice(row);
        edt_1d(&col[..nx], &mut tmp[..nx], &mut v, &mut z);
        row.copy_from_slice(&tmp[..nx]);
    }
    // Along y for each column.
    for ix in 0..nx {
        for iy in 0..ny {
            col[iy] = grid[iy * nx + ix];
        }
        edt_1d(&col[..ny], &mut tmp[..ny], &mut v, &mut z);
        for iy in 0..ny {
            grid[iy * nx + ix] = tmp[iy];
        }
    }
    grid
}

/// Anything that answers signed-distance queries with a gradient.
pub trait DistanceField: Sync {
    fn distance_and_gradient(&self, p: [f64; 2]) -> (f64, [f64; 2]);
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsdfGrid {
    pub geometry: GridGeometry,
    /// Signed distance at cell centers (m), row-major.
    pub distance: Vec<f64>,
    /// Central-difference gradient of `distance` (m/m).
    pub gradient: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query {
    pub distance: f64,
    pub gradient: [f64; 2],
    pub out_of_bounds: bool,
}

impl EsdfGrid {
    /// Signed distance field of an occupancy grid.
    pub fn build(occ: &OccupancyGrid) -> Result<Self> {
        let g = occ.geometry;
        if g.nx < 2 || g.ny < 2 {
            return Err(Error::InvalidGrid("at least two cells per axis required"));
        }
        let res = g.resolution;
        let diagonal = hypot(g.extent()[0], g.extent()[1]);
        let to_occupied = squared_distance_transform(g.nx, g.ny, |i| occ.occupied[i]);
        let to_free = squared_distance_transform(g.nx, g.ny, |i| !occ.occupied[i]);
        let distance: Vec<f64> = (0..g.len())
            .map(|i| {
                if occ.occupied[i] {
                    let d = to_free[i];
                    if d.is_finite() {
                        -sqrt(d) * res
                    } else {
                        -diagonal
                    }
                } else {
                    let d = to_occupied[i];
                    if d.is_finite() {
                        sqrt(d) * res
                    } else {
                        diagonal
                    }
                }
            })
            .collect();
        let gradient = central_gradient(&g, &distance);
        Ok(Self { geometry: g, distance, gradient })
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.distance[self.geometry.index(ix, iy)]
    }

    pub fn has_obstacles(&self) -> bool {
        self.distance.iter().any(|d| *d < 0.0)
    }

    /// Value used for cells with nothing to measure against.
    pub fn sentinel(&self) -> f64 {
        hypot(self.geometry.extent()[0], self.geometry.extent()[1])
    }

    /// Bilinear interpolation of distance and gradient between cell centers.
    /// Points outside the grid are clamped to the border and flagged.
    pub fn query(&self, p: [f64; 2]) -> Query {
        let g = &self.geometry;
        let gx = (p[0] - g.origin[0]) / g.resolution - 0.5;
        let gy = (p[1] - g.origin[1]) / g.resolution - 0.5;
        let ext = g.extent();
        let out_of_bounds = p[0] < g.origin[0]
            || p[1] < g.origin[1]
            || p[0] > g.origin[0] + ext[0]
            || p[1] > g.origin[1] + ext[1];
        let (ix, tx) = split(gx, g.nx);
        let (iy, ty) = split(gy, g.ny);
        let i00 = g.index(ix, iy);
        let i10 = g.index(ix + 1, iy);
        let i01 = g.index(ix, iy + 1);
        let i11 = g.index(ix + 1, iy + 1);
        let w = [(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty];
        let idx = [i00, i10, i01, i11];
        let mut distance = 0.0;
        let mut gradient = [0.0; 2];
        for (wi, &i) in w.iter().zip(&idx) {
            distance += wi * self.distance[i];
            gradient[0] += wi * self.gradient[i][0];
            gradient[1] += wi * self.gradient[i][1];
        }
        Query { distance, gradient, out_of_bounds }
    }
}

impl DistanceField for EsdfGrid {
    fn distance_and_gradient(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let q = self.query(p);
        (q.distance, q.gradient)
    }
}

/// Lower cell index and fractional offset for interpolation, clamped to the grid.
fn split(g: f64, n: usize) -> (usize, f64) {
    let max = (n - 1) as f64;
    let c = g.clamp(0.0, max);
    let i = (floor(c) as usize).min(n - 2);
    (i, c - i as f64)
}

/// Central differences inside, one-sided differences at the borders.
fn central_gradient(g: &GridGeometry, d: &[f64]) -> Vec<[f64; 2]> {
    let res = g.resolution;
    let mut out = vec![[0.0; 2]; g.len()];
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let dx = if ix == 0 {
                (d[g.index(1, iy)] - d[g.index(0, iy)]) / res
            } else if ix == g.nx - 1 {
                (d[g.index(ix, iy)] - d[g.index(ix - 1, iy)]) / res
            } else {
                (d[g.index(ix + 1, iy)] - d[g.index(ix - 1, iy)]) / (2.0 * res)
            };
            let dy = if iy == 0 {
                (d[g.index(ix, 1)] - d[g.index(ix, 0)]) / res
            } else if iy == g.ny - 1 {
                (d[g.index(ix, iy)] - d[g.index(ix, iy - 1)]) / res
            } else {
                (d[g.index(ix, iy + 1)] - d[g.index(ix, iy - 1)]) / (2.0 * res)
            };
            out[g.index(ix, iy)] = [dx, dy];
        }
    }
    out
}
