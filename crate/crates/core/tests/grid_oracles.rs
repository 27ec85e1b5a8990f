//! Distance transform and A* guidance against brute-force oracles.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use linkplan_core::esdf::{squared_distance_transform, GridGeometry};
use linkplan_core::guidance::{plan_reference_path, NEIGHBORS};
use linkplan_core::{EsdfGrid, Error, OccupancyGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_grid(rng: &mut ChaCha8Rng, n: usize, density: f64) -> OccupancyGrid {
    let geometry = GridGeometry { origin: [-1.0, 2.0], resolution: 0.1, nx: n, ny: n };
    let mut occ = OccupancyGrid::new(geometry);
    for iy in 0..n {
        for ix in 0..n {
            occ.set(ix, iy, rng.gen_bool(density));
        }
    }
    occ
}

fn brute_force_squared(occ: &OccupancyGrid, target: bool) -> Vec<f64> {
    let g = occ.geometry;
    let sites: Vec<(usize, usize)> =
        (0..g.ny).flat_map(|y| (0..g.nx).map(move |x| (x, y))).filter(|&(x, y)| occ.is_occupied(x, y) == target).collect();
    (0..g.len())
        .map(|i| {
            let (x, y) = (i % g.nx, i / g.nx);
            sites
                .iter()
                .map(|&(sx, sy)| {
                    let (dx, dy) = (x as f64 - sx as f64, y as f64 - sy as f64);
                    dx * dx + dy * dy
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[test]
fn distance_transform_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..20 {
        let density = [0.02, 0.1, 0.3, 0.6][trial % 4];
        let occ = random_grid(&mut rng, 40, density);
        let g = occ.geometry;
        let fast = squared_distance_transform(g.nx, g.ny, |i| occ.occupied[i]);
        let oracle = brute_force_squared(&occ, true);
        assert_eq!(fast, oracle);

        let esdf = EsdfGrid::build(&occ).unwrap();
        let to_free = brute_force_squared(&occ, false);
        for i in 0..g.len() {
            let expected = if occ.occupied[i] {
                if to_free[i].is_finite() {
                    -to_free[i].sqrt() * g.resolution
                } else {
                    -esdf.sentinel()
                }
            } else if oracle[i].is_finite() {
                oracle[i].sqrt() * g.resolution
            } else {
                esdf.sentinel()
            };
            assert_eq!(esdf.distance[i], expected, "cell {i}");
        }
    }
}

/// Plain Dijkstra over the same free cells and step costs.
fn dijkstra(esdf: &EsdfGrid, start: (usize, usize), goal: (usize, usize), clearance: f64) -> Option<f64> {
    let g = esdf.geometry;
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[g.index(start.0, start.1)] = 0.0;
    heap.push(Reverse((0u64, start)));
    while let Some(Reverse((key, cell))) = heap.pop() {
        let d = f64::from_bits(key);
        let ci = g.index(cell.0, cell.1);
        if d > dist[ci] {
            continue;
        }
        if cell == goal {
            return Some(d);
        }
        for &(dx, dy, step) in &NEIGHBORS {
            let (nx, ny) = (cell.0 as isize + dx, cell.1 as isize + dy);
            if nx < 0 || ny < 0 || nx >= g.nx as isize || ny >= g.ny as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if esdf.at(nx, ny) <= clearance {
                continue;
            }
            let nd = d + step * g.resolution;
            let ni = g.index(nx, ny);
            if nd < dist[ni] {
                dist[ni] = nd;
                // Nonnegative floats order like their bit patterns.
                heap.push(Reverse((nd.to_bits(), (nx, ny))));
            }
        }
    }
    None
}

#[test]
fn astar_cost_equals_dijkstra() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut solved = 0;
    let mut trials = 0;
    while solved < 20 {
        trials += 1;
        assert!(trials < 200, "too few connected instances");
        let occ = random_grid(&mut rng, 60, 0.25);
        let esdf = EsdfGrid::build(&occ).unwrap();
        let g = esdf.geometry;
        let clearance = [0.0, 0.05][trials % 2];
        let pick = |rng: &mut ChaCha8Rng| loop {
            let c = (rng.gen_range(0..g.nx), rng.gen_range(0..g.ny));
            if esdf.at(c.0, c.1) > clearance {
                return c;
            }
        };
        let (s, t) = (pick(&mut rng), pick(&mut rng));
        let oracle = dijkstra(&esdf, s, t, clearance);
        let found = plan_reference_path(&esdf, g.cell_center(s.0, s.1), g.cell_center(t.0, t.1), clearance);
        match (oracle, found) {
            (Some(cost), Ok(path)) => {
                assert!((path.length() - cost).abs() < 1e-9, "A* {} vs Dijkstra {cost}", path.length());
                for w in path.waypoints.windows(2) {
                    let step = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
                    assert!(step <= g.resolution * std::f64::consts::SQRT_2 + 1e-12);
                }
                for w in &path.waypoints {
                    let (ix, iy) = g.cell_of(*w).unwrap();
                    assert!(esdf.at(ix, iy) > clearance);
                }
                solved += 1;
            }
            (None, Err(Error::NoPath)) => {}
            (a, b) => panic!("oracle {a:?} but A* {b:?}"),
        }
    }
}
