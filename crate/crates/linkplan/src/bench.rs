//! Randomized gap-crossing campaigns with ablation arms.

use std::time::Instant;

use linkplan_core::planner::SegmentRunner;
use linkplan_core::trajectory::validation_samples;
use linkplan_core::{plan, Ablation, Configuration, EsdfGrid, GlobalTrajectory, Plan, PlannerParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Arm, ScenarioConfig, SceneSource};
use crate::runner::PoolRunner;
use crate::scene;

/// Outcome of one planning attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub arm: Arm,
    pub seed: u64,
    pub start_x: f64,
    pub success: bool,
    /// Planner error, if `plan` itself failed.
    pub error: Option<String>,
    /// Wall-clock seconds spent in `plan`.
    pub time: f64,
    pub anchors: usize,
    pub collision_violations: usize,
    pub controllability_violations: usize,
    pub velocity_violations: usize,
    pub joint_violations: usize,
    pub root_length: f64,
    pub generalized_length: f64,
    /// Largest dense-sampled `|q̇_c| - limit_c` over all coordinates.
    pub speed_excess: f64,
    /// Smallest dense-sampled controllability metric (N m).
    pub min_tau: f64,
}

/// Per-arm summary. Lengths are averaged over successful trials only.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkStats {
    pub arm: Arm,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub time_mean: f64,
    pub time_std: f64,
    pub root_length_mean: f64,
    pub root_length_std: f64,
    pub generalized_length_mean: f64,
    pub generalized_length_std: f64,
    /// Failed trials whose trajectory collided.
    pub collision_failures: usize,
}

/// Mean and sample standard deviation; NaN for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl BenchmarkStats {
    pub fn from_trials(arm: Arm, trials: &[TrialRecord]) -> Self {
        let ok: Vec<&TrialRecord> = trials.iter().filter(|t| t.success).collect();
        let times: Vec<f64> = trials.iter().map(|t| t.time).collect();
        let root: Vec<f64> = ok.iter().map(|t| t.root_length).collect();
        let general: Vec<f64> = ok.iter().map(|t| t.generalized_length).collect();
        let (time_mean, time_std) = mean_std(&times);
        let (root_length_mean, root_length_std) = mean_std(&root);
        let (generalized_length_mean, generalized_length_std) = mean_std(&general);
        Self {
            arm,
            trials: trials.len(),
            successes: ok.len(),
            success_rate: if trials.is_empty() { 0.0 } else { ok.len() as f64 / trials.len() as f64 },
            time_mean,
            time_std,
            root_length_mean,
            root_length_std,
            generalized_length_mean,
            generalized_length_std,
            collision_failures: trials.iter().filter(|t| !t.success && t.collision_violations > 0).count(),
        }
    }
}

/// Arc lengths of the root position and of the full configuration, by
/// chords over the validator's dense sample grid.
pub fn trajectory_lengths(traj: &GlobalTrajectory, params: &PlannerParams) -> (f64, f64) {
    let (mut root, mut general) = (0.0, 0.0);
    for seg in &traj.segments {
        let n = validation_samples(seg, params);
        let mut prev = seg.evaluate(0.0).unwrap_or_default();
        for j in 1..=n {
            let q = seg.evaluate(j as f64 / n as f64 * seg.duration).unwrap_or_default();
            root += (q[0] - prev[0]).hypot(q[1] - prev[1]);
            general += q.iter().zip(&prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            prev = q;
        }
    }
    (root, general)
}

/// How trials execute segment solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Execution {
    pub threads: usize,
    /// Enforce the per-segment wall-clock budget. Without it only the
    /// iteration cap applies and results do not depend on machine speed.
    pub wall_clock: bool,
}

fn ablation(arm: Arm) -> Ablation {
    match arm {
        Arm::Full | Arm::NoParallel => Ablation::Full,
        Arm::NoAnchorStates => Ablation::NoAnchorStates,
        Arm::NoLocalPlanning => Ablation::NoLocalPlanning,
    }
}

pub fn runner_for(arm: Arm, exec: Execution) -> PoolRunner {
    match arm {
        Arm::NoParallel => PoolRunner::sequential(exec.wall_clock),
        _ => PoolRunner::new(exec.threads, exec.wall_clock),
    }
}

/// Plans once for `arm` and times the call.
pub fn plan_timed<R: SegmentRunner + ?Sized>(
    cfg: &ScenarioConfig,
    esdf: &EsdfGrid,
    arm: Arm,
    start: &Configuration,
    goal: &Configuration,
    runner: &R,
) -> (linkplan_core::Result<Plan>, f64) {
    let clock = Instant::now();
    let result = plan(start, goal, &cfg.robot, esdf, &cfg.anchors, &cfg.planner, ablation(arm), runner);
    (result, clock.elapsed().as_secs_f64())
}

pub fn run_trial(
    cfg: &ScenarioConfig,
    esdf: &EsdfGrid,
    arm: Arm,
    seed: u64,
    start: &Configuration,
    goal: &Configuration,
    runner: &PoolRunner,
) -> TrialRecord {
    let (result, time) = plan_timed(cfg, esdf, arm, start, goal, runner);
    let mut record = TrialRecord {
        arm,
        seed,
        start_x: start[0],
        success: false,
        error: None,
        time,
        anchors: 0,
        collision_violations: 0,
        controllability_violations: 0,
        velocity_violations: 0,
        joint_violations: 0,
        root_length: f64::NAN,
        generalized_length: f64::NAN,
        speed_excess: f64::NAN,
        min_tau: f64::NAN,
    };
    match result {
        Ok(p) => {
            let v = &p.validation;
            record.success = v.success();
            record.anchors = p.anchors.as_ref().map_or(0, |a| a.len());
            record.collision_violations = v.collision_violations;
            record.controllability_violations = v.controllability_violations;
            record.velocity_violations = v.velocity_violations;
            record.joint_violations = v.joint_violations;
            (record.root_length, record.generalized_length) = trajectory_lengths(&p.trajectory, &cfg.planner);
            let limits = cfg.planner.velocity_limits(v.max_speed.len());
            record.speed_excess = v.max_speed.iter().zip(&limits).map(|(s, l)| s - l).fold(f64::NEG_INFINITY, f64::max);
            record.min_tau = v.min_tau;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Start and goal of trial `index`: seeded from `cfg.seed + index`, so every
/// arm sees the same instances.
pub fn trial_instance(cfg: &ScenarioConfig, index: usize) -> (u64, Configuration, Configuration) {
    let seed = cfg.seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = &cfg.campaign;
    let (start, goal) = match &cfg.scene {
        SceneSource::Synthetic(s) => scene::sample_instance(&mut rng, &cfg.robot, s, c.x_range, c.y, c.yaw),
        SceneSource::Cloud { .. } => {
            let x = rand::Rng::gen_range(&mut rng, c.x_range.0..=c.x_range.1);
            let start = scene::square(&cfg.robot, [x, c.y], c.yaw);
            let goal = scene::mirrored_goal(&cfg.robot, &start, 0.0);
            (start, goal)
        }
    };
    (seed, start, goal)
}

/// Runs `trials` instances per arm. Trials run one after another so that
/// timings stay honest; failures are recorded, never fatal.
pub fn run_benchmark(
    cfg: &ScenarioConfig,
    esdf: &EsdfGrid,
    arms: &[Arm],
    trials: usize,
    exec: Execution,
    mut progress: impl FnMut(&TrialRecord),
) -> Vec<(BenchmarkStats, Vec<TrialRecord>)> {
    let instances: Vec<_> = (0..trials).map(|i| trial_instance(cfg, i)).collect();
    arms.iter()
        .map(|&arm| {
            let runner = runner_for(arm, exec);
            let records: Vec<TrialRecord> = instances
                .iter()
                .map(|(seed, start, goal)| {
                    let r = run_trial(cfg, esdf, arm, *seed, start, goal, &runner);
                    progress(&r);
                    r
                })
                .collect();
            (BenchmarkStats::from_trials(arm, &records), records)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_statistics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_std(&[]).0.is_nan());
    }

    #[test]
    fn instances_are_seeded() {
        let cfg = ScenarioConfig::default();
        assert_eq!(trial_instance(&cfg, 3), trial_instance(&cfg, 3));
        assert_ne!(trial_instance(&cfg, 3).1, trial_instance(&cfg, 4).1);
    }

    #[test]
    fn drawn_x_stays_in_range_and_reaches_its_ends() {
        let cfg = ScenarioConfig::default();
        let xs: Vec<f64> = (0..1000).map(|i| trial_instance(&cfg, i).1[0]).collect();
        let (lo, hi) = cfg.campaign.x_range;
        assert!(xs.iter().all(|x| (lo..=hi).contains(x)));
        assert!(xs.iter().cloned().fold(f64::INFINITY, f64::min) < lo + 0.01);
        assert!(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) > hi - 0.01);
    }

    #[test]
    fn lengths_of_a_constant_trajectory_vanish() {
        let seg = linkplan_core::SplineSegment::constant(&[1.0, 2.0, 0.0, 0.5, 0.5, 0.5], 5, 3, 1.0).unwrap();
        let traj = GlobalTrajectory::new(vec![seg]).unwrap();
        let (root, general) = trajectory_lengths(&traj, &PlannerParams::default());
        // The basis sums to one only up to rounding.
        assert!(root < 1e-11 && general < 1e-11, "{root} {general}");
    }

    #[test]
    fn stats_ignore_failed_lengths() {
        let base = TrialRecord {
            arm: Arm::Full,
            seed: 0,
            start_x: 1.0,
            success: true,
            error: None,
            time: 1.0,
            anchors: 5,
            collision_violations: 0,
            controllability_violations: 0,
            velocity_violations: 0,
            joint_violations: 0,
            root_length: 3.0,
            generalized_length: 4.0,
            speed_excess: -0.1,
            min_tau: 0.5,
        };
        let failed = TrialRecord { success: false, time: 3.0, collision_violations: 2, root_length: 100.0, ..base.clone() };
        let stats = BenchmarkStats::from_trials(Arm::Full, &[base, failed]);
        assert_eq!((stats.trials, stats.successes, stats.collision_failures), (2, 1, 1));
        assert_eq!(stats.success_rate, 0.5);
        assert_eq!((stats.root_length_mean, stats.time_mean), (3.0, 2.0));
    }
}
