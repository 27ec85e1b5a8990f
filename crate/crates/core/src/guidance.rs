//! A* reference path for the root link on the distance grid.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::esdf::EsdfGrid;
use crate::math::hypot;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    pub waypoints: Vec<[f64; 2]>,
}

impl ReferencePath {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Polyline length (m).
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| hypot(w[1][0] - w[0][0], w[1][1] - w[0][1])).sum()
    }
}

#[derive(Clone, Copy)]
struct Open {
    f: f64,
    cell: (usize, usize),
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // Min-heap on f, then lexicographic (x, y).
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.cell.cmp(&self.cell))
    }
}

/// The 8-connected neighbor offsets and their step costs in cells.
pub const NEIGHBORS: [(isize, isize, f64); 8] = [
    (-1, -1, SQRT_2),
    (-1, 0, 1.0),
    (-1, 1, SQRT_2),
    (0, -1, 1.0),
    (0, 1, 1.0),
    (1, -1, SQRT_2),
    (1, 0, 1.0),
    (1, 1, SQRT_2),
];

/// Shortest 8-connected path between the cells containing `start` and `goal`
/// over cells whose center distance exceeds `clearance`.
pub fn plan_reference_path(esdf: &EsdfGrid, start: [f64; 2], goal: [f64; 2], clearance: f64) -> Result<ReferencePath> {
    let g = &esdf.geometry;
    let free = |ix: usize, iy: usize| esdf.at(ix, iy) > clearance;
    let s = g.clamped_cell_of(start);
    let t = g.clamped_cell_of(goal);
    if !free(s.0, s.1) {
        return Err(Error::StartBlocked);
    }
    if !free(t.0, t.1) {
        return Err(Error::GoalBlocked);
    }
    let res = g.resolution;
    let heuristic = |c: (usize, usize)| hypot(c.0 as f64 - t.0 as f64, c.1 as f64 - t.1 as f64) * res;

    let mut cost = vec![f64::INFINITY; g.len()];
    let mut parent = vec![usize::MAX; g.len()];
    let mut closed = vec![false; g.len()];
    let mut open = BinaryHeap::new();
    cost[g.index(s.0, s.1)] = 0.0;
    open.push(Open { f: heuristic(s), cell: s });

    while let Some(Open { cell, .. }) = open.pop() {
        let ci = g.index(cell.0, cell.1);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cell == t {
            let mut waypoints = Vec::new();
            let mut at = ci;
            loop {
                let (ix, iy) = (at % g.nx, at / g.nx);
                waypoints.push(g.cell_center(ix, iy));
                if parent[at] == usize::MAX {
                    break;
                }
                at = parent[at];
            }
            waypoints.reverse();
            return Ok(ReferencePath { waypoints });
        }
        for &(dx, dy, step) in &NEIGHBORS {
            let nx = cell.0 as isize + dx;
            let ny = cell.1 as isize + dy;
            if nx < 0 || ny < 0 || nx >= g.nx as isize || ny >= g.ny as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            let ni = g.index(nx, ny);
            if closed[ni] || !free(nx, ny) {
                continue;
            }
            let candidate = cost[ci] + step * res;
            if candidate < cost[ni] {
                cost[ni] = candidate;
                parent[ni] = ci;
                open.push(Open { f: candidate + heuristic((nx, ny)), cell: (nx, ny) });
            }
        }
    }
    Err(Error::NoPath)
}
