//! Acceptance gate: one PASS/FAIL line per criterion, then a single verdict.
//!
//! Oracles here are written independently of the library code they check.
//! Run with `cargo test -p linkplan --test acceptance`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use linkplan::bench::{self, Execution, TrialRecord};
use linkplan::config::{Arm, ScenarioConfig};
use linkplan::gradcheck::{self, Module};
use linkplan::runner::{resolve_threads, PoolRunner};
use linkplan_core::anchors::advance;
use linkplan_core::esdf::{squared_distance_transform, GridGeometry};
use linkplan_core::guidance::{plan_reference_path, NEIGHBORS};
use linkplan_core::polytope::{rotor_torques, tau_min};
use linkplan_core::spline::{energy_matrix, knot_vector};
use linkplan_core::{plan, Ablation, Configuration, EsdfGrid, OccupancyGrid, Plan, RobotModel, SplineSegment};
use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

/// Writes past the test harness capture so every line shows up.
fn report(o: &Outcome) {
    let verdict = if o.passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "criterion {:>2} [{verdict}] {}: {}", o.id, o.name, o.detail);
}

fn config(name: &str) -> ScenarioConfig {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    ScenarioConfig::load(path).unwrap()
}

fn random_configuration(rng: &mut ChaCha8Rng) -> Configuration {
    let joints: Vec<f64> = (0..3).map(|_| rng.gen_range(-FRAC_PI_2..=FRAC_PI_2)).collect();
    Configuration::from_parts([rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)], rng.gen_range(-4.0..4.0), &joints)
}

fn gradients() -> Outcome {
    let clock = Instant::now();
    let checks: Vec<_> = Module::ALL.iter().flat_map(|&m| gradcheck::run(m, 20, 2024)).collect();
    let seconds = clock.elapsed().as_secs_f64();
    let worst = checks.iter().map(|c| c.max_error).fold(0.0, f64::max);
    let passed = checks.iter().all(|c| c.passed() && c.instances >= 20) && seconds < 60.0;
    Outcome {
        id: 1,
        name: "gradient suite",
        passed,
        detail: format!("{} checks x 20 instances, worst relative error {worst:.2e} (< 1e-4), {seconds:.1} s (< 60 s)", checks.len()),
    }
}

/// Cox–de Boor basis function and its derivative, straight from the recursion.
fn bspline(knots: &[f64], i: usize, p: usize, t: f64) -> f64 {
    if p == 0 {
        return if knots[i] <= t && t < knots[i + 1] { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    if knots[i + p] > knots[i] {
        v += (t - knots[i]) / (knots[i + p] - knots[i]) * bspline(knots, i, p - 1, t);
    }
    if knots[i + p + 1] > knots[i + 1] {
        v += (knots[i + p + 1] - t) / (knots[i + p + 1] - knots[i + 1]) * bspline(knots, i + 1, p - 1, t);
    }
    v
}

fn bspline_derivative(knots: &[f64], i: usize, p: usize, t: f64) -> f64 {
    let mut v = 0.0;
    if knots[i + p] > knots[i] {
        v += p as f64 / (knots[i + p] - knots[i]) * bspline(knots, i, p - 1, t);
    }
    if knots[i + p + 1] > knots[i + 1] {
        v -= p as f64 / (knots[i + p + 1] - knots[i + 1]) * bspline(knots, i + 1, p - 1, t);
    }
    v
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|k| {
            let mut x = (std::f64::consts::PI * (k as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn energy_matrix_oracle() -> Outcome {
    let rule = gauss_legendre(6);
    let (mut worst, mut row_sum, mut band_ok) = (0.0f64, 0.0f64, true);
    for duration in [0.37, 1.0, 2.5, 7.9] {
        let m = energy_matrix(5, 3, duration).unwrap();
        let knots = knot_vector(5, 3, duration).unwrap();
        let n = 9;
        let mut oracle = DMatrix::zeros(n, n);
        for w in knots.windows(2).filter(|w| w[1] > w[0]) {
            for &(x, wt) in &rule {
                let t = 0.5 * (w[0] + w[1]) + 0.5 * (w[1] - w[0]) * x;
                let d: Vec<f64> = (0..n).map(|i| bspline_derivative(&knots, i, 3, t)).collect();
                for i in 0..n {
                    for j in 0..n {
                        oracle[(i, j)] += 0.5 * (w[1] - w[0]) * wt * d[i] * d[j];
                    }
                }
            }
        }
        worst = worst.max((&m - &oracle).amax());
        for i in 0..n {
            row_sum = row_sum.max(m.row(i).sum().abs());
            for j in 0..n {
                band_ok &= i.abs_diff(j) <= 3 || m[(i, j)] == 0.0;
            }
        }
    }
    Outcome {
        id: 2,
        name: "energy matrix",
        passed: worst < 1e-10 && row_sum < 1e-12 && band_ok,
        detail: format!("N=5 p=3, max entry error {worst:.1e} (< 1e-10), max |row sum| {row_sum:.1e} (< 1e-12), bandwidth 3 {band_ok}"),
    }
}

fn spline_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut unity, mut ends, mut hull, mut fd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let duration = rng.gen_range(0.2..10.0);
        let control = DMatrix::from_fn(9, 6, |_, _| rng.gen_range(-3.0..3.0));
        let s = SplineSegment::new(5, 3, duration, control.clone()).unwrap();
        let (q0, q1) = (s.evaluate(0.0).unwrap(), s.evaluate(duration).unwrap());
        for c in 0..6 {
            ends = ends.max((q0[c] - control[(0, c)]).abs()).max((q1[c] - control[(8, c)]).abs());
        }
        for _ in 0..20 {
            let t = rng.gen_range(0.0..duration * 0.999_999);
            let b: Vec<f64> = (0..9).map(|i| bspline(&s.knots, i, 3, t)).collect();
            unity = unity.max((s.basis(t).unwrap().iter().sum::<f64>() - 1.0).abs());
            let q = s.evaluate(t).unwrap();
            let active: Vec<usize> = (0..9).filter(|&i| b[i] > 0.0).collect();
            for c in 0..6 {
                let lo = active.iter().map(|&i| control[(i, c)]).fold(f64::INFINITY, f64::min);
                let hi = active.iter().map(|&i| control[(i, c)]).fold(f64::NEG_INFINITY, f64::max);
                hull = hull.max(lo - q[c]).max(q[c] - hi);
            }
            let h = 1e-6 * duration;
            let (a, z) = ((t - h).max(0.0), (t + h).min(duration));
            let (qa, qz, v) = (s.evaluate(a).unwrap(), s.evaluate(z).unwrap(), s.evaluate_velocity(t).unwrap());
            for c in 0..6 {
                fd = fd.max(((qz[c] - qa[c]) / (z - a) - v[c]).abs() / (1.0 + v[c].abs()));
            }
        }
    }
    Outcome {
        id: 3,
        name: "B-spline identities",
        passed: unity < 1e-12 && ends <= 1e-12 && hull <= 1e-12 && fd < 1e-5,
        detail: format!(
            "100 splines: unity {unity:.1e}, end interpolation {ends:.1e}, hull excess {hull:.1e} (all <= 1e-12), velocity vs FD {fd:.1e} (< 1e-5)"
        ),
    }
}

/// Support of the zonotope `sum_k [0, tau_k]` along `d`.
fn support(taus: &[Vector3<f64>], d: &Vector3<f64>) -> f64 {
    taus.iter().map(|t| t.dot(d).max(0.0)).sum()
}

fn polytope_oracle() -> Outcome {
    let model = RobotModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut directions = Vec::with_capacity(10_000);
    while directions.len() < 10_000 {
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.norm() > 1e-3 && v.norm() <= 1.0 {
            directions.push(v.normalize());
        }
    }
    let (mut attained, mut gap) = (0.0f64, f64::INFINITY);
    for _ in 0..50 {
        let q = random_configuration(&mut rng);
        let taus = rotor_torques(&model, &q).unwrap().taus;
        let value = tau_min(&model, &q).unwrap();
        // The minimum support over all directions sits at a facet normal, so
        // adding those normals to the sample makes the sampled minimum exact.
        let mut sample = directions.clone();
        for i in 0..taus.len() {
            for j in i + 1..taus.len() {
                let n = taus[i].cross(&taus[j]);
                if n.norm() >= 1e-9 {
                    sample.push(n.normalize());
                    sample.push(-n.normalize());
                }
            }
        }
        let random_min = directions.iter().map(|d| support(&taus, d)).fold(f64::INFINITY, f64::min);
        let sampled = sample.iter().map(|d| support(&taus, d)).fold(f64::INFINITY, f64::min);
        attained = attained.max((sampled - value).abs());
        gap = gap.min(random_min - value);
    }
    let straight = tau_min(&model, &Configuration::from_parts([0.3, -0.2], 0.7, &[0.0; 3])).unwrap();
    let mut invariance = 0.0f64;
    for _ in 0..100 {
        let q = random_configuration(&mut rng);
        let moved = Configuration::from_parts(
            [q[0] + rng.gen_range(-10.0..10.0), q[1] + rng.gen_range(-10.0..10.0)],
            q.yaw() + rng.gen_range(-6.0..6.0),
            q.joints(),
        );
        invariance = invariance.max((tau_min(&model, &q).unwrap() - tau_min(&model, &moved).unwrap()).abs());
    }
    Outcome {
        id: 4,
        name: "torque-polytope oracle",
        passed: attained <= 1e-6 && gap >= -1e-6 && straight == 0.0 && invariance <= 1e-10,
        detail: format!(
            "50 configs, |sampled min - tau_min| {attained:.1e} (<= 1e-6), random directions alone stay {gap:.1e} above tau_min (>= -1e-6), straight {straight}, invariance {invariance:.1e} (<= 1e-10)"
        ),
    }
}

fn random_grid(rng: &mut ChaCha8Rng, n: usize, density: f64) -> OccupancyGrid {
    let mut occ = OccupancyGrid::new(GridGeometry { origin: [-1.0, 2.0], resolution: 0.1, nx: n, ny: n });
    for iy in 0..n {
        for ix in 0..n {
            occ.set(ix, iy, rng.gen_bool(density));
        }
    }
    occ
}

fn edt_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    for trial in 0..20 {
        let occ = random_grid(&mut rng, 40, [0.02, 0.1, 0.3, 0.6][trial % 4]);
        let g = occ.geometry;
        let fast = squared_distance_transform(g.nx, g.ny, |i| occ.occupied[i]);
        let esdf = EsdfGrid::build(&occ).unwrap();
        for i in 0..g.len() {
            let nearest = |target: bool| {
                (0..g.len())
                    .filter(|&j| occ.occupied[j] == target)
                    .map(|j| {
                        let dx = (i % g.nx) as f64 - (j % g.nx) as f64;
                        let dy = (i / g.nx) as f64 - (j / g.nx) as f64;
                        dx * dx + dy * dy
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            let to_occupied = nearest(true);
            let expected = if occ.occupied[i] {
                let to_free = nearest(false);
                if to_free.is_finite() { -to_free.sqrt() * g.resolution } else { -esdf.sentinel() }
            } else if to_occupied.is_finite() {
                to_occupied.sqrt() * g.resolution
            } else {
                esdf.sentinel()
            };
            mismatches += usize::from(fast[i] != to_occupied) + usize::from(esdf.distance[i] != expected);
        }
    }
    Outcome {
        id: 5,
        name: "EDT exactness",
        passed: mismatches == 0,
        detail: format!("20 random 40x40 grids vs brute-force scan, {mismatches} inexact cells"),
    }
}

fn dijkstra(esdf: &EsdfGrid, start: (usize, usize), goal: (usize, usize), clearance: f64) -> Option<f64> {
    let g = esdf.geometry;
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[g.index(start.0, start.1)] = 0.0;
    heap.push(Reverse((0u64, start)));
    while let Some(Reverse((key, cell))) = heap.pop() {
        let d = f64::from_bits(key);
        if d > dist[g.index(cell.0, cell.1)] {
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
            if nd < dist[g.index(nx, ny)] {
                dist[g.index(nx, ny)] = nd;
                heap.push(Reverse((nd.to_bits(), (nx, ny))));
            }
        }
    }
    None
}

fn astar_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut compared, mut worst, mut disagreements) = (0, 0.0f64, 0);
    let mut drawn = 0;
    while compared < 20 && drawn < 500 {
        drawn += 1;
        let esdf = EsdfGrid::build(&random_grid(&mut rng, 60, 0.25)).unwrap();
        let g = esdf.geometry;
        let clearance = [0.0, 0.05][drawn % 2];
        let pick = |rng: &mut ChaCha8Rng| loop {
            let c = (rng.gen_range(0..g.nx), rng.gen_range(0..g.ny));
            if esdf.at(c.0, c.1) > clearance {
                return c;
            }
        };
        let (s, t) = (pick(&mut rng), pick(&mut rng));
        match (dijkstra(&esdf, s, t, clearance), plan_reference_path(&esdf, g.cell_center(s.0, s.1), g.cell_center(t.0, t.1), clearance)) {
            (Some(cost), Ok(path)) => {
                worst = worst.max((path.length() - cost).abs());
                compared += 1;
            }
            (None, Err(_)) => {}
            _ => disagreements += 1,
        }
    }
    Outcome {
        id: 6,
        name: "A* optimality",
        passed: compared == 20 && worst < 1e-9 && disagreements == 0,
        detail: format!("{compared} connected 60x60 grids, max |A* - Dijkstra| {worst:.1e} (< 1e-9), {disagreements} reachability disagreements"),
    }
}

fn chain_consistency() -> Outcome {
    let model = RobotModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let q = random_configuration(&mut rng);
        let next = advance(&model, &q, rng.gen_range(-FRAC_PI_2..=FRAC_PI_2));
        let (before, after) = (model.link_frames(&q).unwrap(), model.link_frames(&next).unwrap());
        for k in 0..model.n_links() - 1 {
            worst = worst
                .max((before[k].origin[0] - after[k + 1].origin[0]).abs())
                .max((before[k].origin[1] - after[k + 1].origin[1]).abs())
                .max((before[k].heading - after[k + 1].heading).abs());
        }
    }
    Outcome {
        id: 7,
        name: "chain consistency",
        passed: worst <= 1e-12,
        detail: format!("1000 random (q, dtheta), link k moved onto link k+1 within {worst:.1e} (<= 1e-12)"),
    }
}

fn bitwise_equal(a: &Plan, b: &Plan) -> bool {
    let (ta, tb) = (&a.trajectory, &b.trajectory);
    ta.segments.len() == tb.segments.len()
        && ta.segments.iter().zip(&tb.segments).all(|(x, y)| {
            x.duration.to_bits() == y.duration.to_bits()
                && x.control.shape() == y.control.shape()
                && x.control.iter().zip(y.control.iter()).all(|(p, q)| p.to_bits() == q.to_bits())
        })
}

fn continuity_and_determinism() -> Outcome {
    let many = resolve_threads(None).max(4);
    let (one, pool) = (PoolRunner::new(1, false), PoolRunner::new(many, false));
    let mut cases = Vec::new();
    let dual = config("dual_gap.cfg");
    let (s, g) = dual.endpoints().unwrap();
    cases.push((dual.clone(), s, g));
    let gap = config("gap07.cfg");
    for i in 0..3 {
        let (_, s, g) = bench::trial_instance(&gap, i);
        cases.push((gap.clone(), s, g));
    }
    let (mut gap_pos, mut gap_vel, mut identical) = (0.0f64, 0.0f64, true);
    for (cfg, start, goal) in &cases {
        let esdf = cfg.esdf().unwrap();
        let run = |r: &PoolRunner| plan(start, goal, &cfg.robot, &esdf, &cfg.anchors, &cfg.planner, Ablation::Full, r).unwrap();
        let (a, b) = (run(&one), run(&pool));
        let (p, v) = a.trajectory.junction_gaps();
        gap_pos = gap_pos.max(p);
        gap_vel = gap_vel.max(v);
        identical &= bitwise_equal(&a, &b);
    }
    Outcome {
        id: 8,
        name: "continuity and determinism",
        passed: gap_pos <= 1e-9 && gap_vel <= 1e-9 && identical,
        detail: format!(
            "{} plans, junction gaps C0 {gap_pos:.1e} C1 {gap_vel:.1e} (<= 1e-9), 1 vs {many} threads bitwise identical {identical}",
            cases.len()
        ),
    }
}

fn dual_gap() -> (Outcome, Option<Plan>) {
    let cfg = config("dual_gap.cfg");
    let clock = Instant::now();
    let esdf = cfg.esdf().unwrap();
    let (start, goal) = cfg.endpoints().unwrap();
    let threads = resolve_threads(None);
    let runner = PoolRunner::new(threads, true);
    let result = plan(&start, &goal, &cfg.robot, &esdf, &cfg.anchors, &cfg.planner, Ablation::Full, &runner);
    let seconds = clock.elapsed().as_secs_f64();
    let (passed, detail, plan) = match result {
        Ok(p) => {
            let anchors = p.anchors.as_ref().map_or(0, |a| a.len());
            let v = &p.validation;
            let passed = (6..=8).contains(&anchors) && v.success() && v.violations() == 0 && seconds < 90.0;
            let detail = format!(
                "{anchors} anchors (6..=8), {} violations, min clearance {:.3} m, {seconds:.1} s on {threads} threads (< 90 s)",
                v.violations(),
                v.min_clearance
            );
            (passed, detail, Some(p))
        }
        Err(e) => (false, format!("plan failed: {e}"), None),
    };
    (Outcome { id: 9, name: "dual-gap regression", passed, detail }, plan)
}

fn ablation_campaign() -> (Outcome, Vec<TrialRecord>) {
    let cfg = config("gap07.cfg");
    let esdf = cfg.esdf().unwrap();
    let threads = resolve_threads(None);
    let arms = [Arm::Full, Arm::NoAnchorStates, Arm::NoLocalPlanning, Arm::NoParallel];
    // Without the wall-clock budget the outcome does not depend on machine load.
    let results = bench::run_benchmark(&cfg, &esdf, &arms, 50, Execution { threads, wall_clock: false }, |_| {});
    let stats = |arm| results.iter().find(|(s, _)| s.arm == arm).map(|(s, _)| s.clone()).unwrap();
    let (full, no_as, no_lp, no_pc) = (stats(Arm::Full), stats(Arm::NoAnchorStates), stats(Arm::NoLocalPlanning), stats(Arm::NoParallel));
    let lp_failures = no_lp.trials - no_lp.successes;

    let mut checks = vec![
        (format!("full {:.0}% (>= 80%)", 100.0 * full.success_rate), full.success_rate >= 0.80),
        (format!("w/o AS {:.0}% (<= 10%)", 100.0 * no_as.success_rate), no_as.success_rate <= 0.10),
        (
            format!("w/o LP {:.0}% (<= 40%) with {}/{lp_failures} failures colliding", 100.0 * no_lp.success_rate, no_lp.collision_failures),
            no_lp.success_rate <= 0.40 && no_lp.collision_failures == lp_failures,
        ),
        (
            format!("w/o PC {:.0}% (full +- 5 points)", 100.0 * no_pc.success_rate),
            (no_pc.success_rate - full.success_rate).abs() <= 0.05 + 1e-12,
        ),
    ];
    let ratio = no_pc.time_mean / full.time_mean;
    if threads >= 4 {
        checks.push((format!("w/o PC time {ratio:.2}x full (>= 1.5x)"), ratio >= 1.5));
    } else {
        checks.push((format!("w/o PC time {ratio:.2}x full, timing check n/a on {threads} core(s)"), true));
    }
    let passed = checks.iter().all(|c| c.1);
    let detail = checks.iter().map(|(d, ok)| if *ok { d.clone() } else { format!("{d} MISSED") }).collect::<Vec<_>>().join("; ");
    let records = results.into_iter().flat_map(|(_, r)| r).collect();
    (Outcome { id: 10, name: "ablation campaign", passed, detail: format!("50 trials per arm: {detail}") }, records)
}

fn limits(records: &[TrialRecord], dual: Option<&Plan>) -> (Outcome, Outcome) {
    let cfg = config("gap07.cfg");
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.success).collect();
    let mut excess = ok.iter().map(|r| r.speed_excess).fold(f64::NEG_INFINITY, f64::max);
    let mut lowest = ok.iter().map(|r| r.min_tau).fold(f64::INFINITY, f64::min);
    let mut count = ok.len();
    if let Some(p) = dual.filter(|p| p.validation.success()) {
        let v = &p.validation;
        let lim = cfg.planner.velocity_limits(v.max_speed.len());
        excess = v.max_speed.iter().zip(&lim).map(|(s, l)| s - l).fold(excess, f64::max);
        lowest = lowest.min(v.min_tau);
        count += 1;
    }
    let delta_tau = cfg.planner.delta_tau;
    (
        Outcome {
            id: 11,
            name: "velocity-limit compliance",
            passed: count > 0 && excess <= 1e-6,
            detail: format!("{count} successful trajectories, largest speed over its limit {excess:.2e} (<= 1e-6)"),
        },
        Outcome {
            id: 12,
            name: "controllability maintenance",
            passed: count > 0 && lowest > delta_tau,
            detail: format!("{count} successful trajectories, min tau_min {lowest:.4} N m (> {delta_tau})"),
        },
    )
}

#[test]
fn acceptance_criteria() {
    let mut outcomes = Vec::new();
    let mut record = |o: Outcome| {
        report(&o);
        outcomes.push(o);
    };
    record(gradients());
    record(energy_matrix_oracle());
    record(spline_identities());
    record(polytope_oracle());
    record(edt_exactness());
    record(astar_optimality());
    record(chain_consistency());
    record(continuity_and_determinism());
    let (dual, dual_plan) = dual_gap();
    record(dual);
    let (campaign, records) = ablation_campaign();
    record(campaign);
    let (speed, tau) = limits(&records, dual_plan.as_ref());
    record(speed);
    record(tau);

    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| format!("{} ({})", o.id, o.name)).collect();
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
