//! `linkplan` command-line tool.
//!
//! Exit codes: 0 success, 1 planning or validation failure, 2 configuration
//! or input error.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use linkplan::bench::{self, Execution};
use linkplan::config::{parse_arms, ScenarioConfig};
use linkplan::export;
use linkplan::gradcheck::{self, Module};
use linkplan::runner::resolve_threads;
use linkplan::svg::{render_svg, Drawing};
use linkplan::ConfigError;
use linkplan_core::trajectory::{sample_commands, validate_samples};
use linkplan_core::ValidationReport;

#[derive(Parser)]
#[command(name = "linkplan", version, about = "Trajectory planning for planar multi-link aerial robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one scenario and write its artifacts.
    Plan {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write scene.svg.
        #[arg(long)]
        svg: bool,
        /// Also write anchors.csv and path.csv.
        #[arg(long)]
        csv: bool,
        /// Command sampling rate of trajectory.csv (Hz).
        #[arg(long, default_value_t = 40.0)]
        rate: f64,
        #[arg(long)]
        threads: Option<usize>,
        /// Also write esdf.csv, the row-major distance grid.
        #[arg(long)]
        dump_esdf: bool,
    },
    /// Run the randomized campaign over ablation arms.
    Bench {
        campaign: PathBuf,
        /// Comma-separated arms: full, no_as, no_lp, no_pc (long names work too).
        #[arg(long)]
        arms: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Drop the wall-clock budget so outcomes do not depend on machine speed.
        #[arg(long)]
        deterministic: bool,
    },
    /// Check sampled states of a trajectory CSV against a scenario's map.
    Validate { trajectory: PathBuf, scenario: PathBuf },
    /// Compare analytic derivatives with central differences.
    Gradcheck {
        #[arg(long, value_enum, default_value_t = GradModule::All)]
        module: GradModule,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GradModule {
    All,
    Spline,
    Penalty,
    Polytope,
}

enum Failure {
    Planning(String),
    Config(ConfigError),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan { scenario, out_dir, svg, csv, rate, threads, dump_esdf } => {
            plan(&scenario, &out_dir, svg, csv, rate, threads, dump_esdf)
        }
        Command::Bench { campaign, arms, trials, threads, out_dir, deterministic } => {
            bench(&campaign, arms.as_deref(), trials, threads, &out_dir, deterministic)
        }
        Command::Validate { trajectory, scenario } => validate(&trajectory, &scenario),
        Command::Gradcheck { module, instances, seed } => gradcheck(module, instances, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Planning(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn print_report(v: &ValidationReport) {
    let max_speed: Vec<String> = v.max_speed.iter().map(|s| format!("{s:.4}")).collect();
    println!("samples               {}", v.samples);
    println!("min clearance (m)     {:.4}", v.min_clearance);
    println!("min tau_min (N m)     {:.4}", v.min_tau);
    println!("max |qdot|            [{}]", max_speed.join(", "));
    println!(
        "violations            collision {} controllability {} velocity {} joint {}",
        v.collision_violations, v.controllability_violations, v.velocity_violations, v.joint_violations
    );
    if let Some(first) = v.first_violation {
        println!("first violation       {:?} at t = {:.3} s", first.kind, first.t);
    }
    println!("success               {}", v.success());
}

fn plan(
    scenario: &Path,
    out_dir: &Path,
    svg: bool,
    csv: bool,
    rate: f64,
    threads: Option<usize>,
    dump_esdf: bool,
) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load(scenario)?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(ConfigError::Invalid("--rate must be positive".into()).into());
    }
    let esdf = cfg.esdf()?;
    let (start, goal) = cfg.endpoints()?;
    fs::create_dir_all(out_dir)?;
    if dump_esdf {
        fs::write(out_dir.join("esdf.csv"), linkplan::io::esdf_csv(&esdf))?;
    }

    let exec = Execution { threads: resolve_threads(threads.or(cfg.threads)), wall_clock: true };
    let runner = bench::runner_for(cfg.ablation, exec);
    let (result, seconds) = bench::plan_timed(&cfg, &esdf, cfg.ablation, &start, &goal, &runner);
    let plan = result.map_err(|e| Failure::Planning(e.to_string()))?;

    let samples = sample_commands(&plan.trajectory, rate).map_err(|e| Failure::Planning(e.to_string()))?;
    export::write_trajectory_csv(create(out_dir, "trajectory.csv")?, &samples)?;
    if csv {
        if let Some(anchors) = &plan.anchors {
            export::write_anchors_csv(create(out_dir, "anchors.csv")?, anchors)?;
            export::write_path_csv(create(out_dir, "path.csv")?, &anchors.path)?;
        }
    }
    if svg {
        let drawing = Drawing {
            esdf: Some(&esdf),
            path: plan.anchors.as_ref().map(|a| &a.path),
            anchors: plan.anchors.as_ref().map_or(&[][..], |a| &a.states[..]),
            trajectory: Some(&plan.trajectory),
            snapshots: 0,
        };
        fs::write(out_dir.join("scene.svg"), render_svg(&cfg.robot, cfg.scene.bounds(), &drawing))?;
    }

    println!("scene                 {}", cfg.scene.name());
    println!("anchors               {}", plan.anchors.as_ref().map_or(0, |a| a.len()));
    println!("segments              {}", plan.trajectory.segments.len());
    println!("duration (s)          {:.3}", plan.trajectory.total_duration);
    println!("planning time (s)     {seconds:.3}");
    print_report(&plan.validation);
    if plan.validation.success() {
        Ok(())
    } else {
        Err(Failure::Planning("trajectory failed validation".into()))
    }
}

fn bench(
    campaign: &Path,
    arms: Option<&str>,
    trials: Option<usize>,
    threads: Option<usize>,
    out_dir: &Path,
    deterministic: bool,
) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load(campaign)?;
    let arms = match arms {
        Some(list) => parse_arms(list).map_err(ConfigError::Invalid)?,
        None => cfg.campaign.arms.clone(),
    };
    let trials = trials.unwrap_or(cfg.campaign.trials);
    let esdf = cfg.esdf()?;
    fs::create_dir_all(out_dir)?;
    let exec = Execution { threads: resolve_threads(threads.or(cfg.threads)), wall_clock: !deterministic };

    let results = bench::run_benchmark(&cfg, &esdf, &arms, trials, exec, |t| {
        let outcome = match (&t.error, t.success) {
            (Some(e), _) => format!("error: {e}"),
            (None, true) => "ok".into(),
            (None, false) => format!("violations c{} t{} v{} j{}", t.collision_violations, t.controllability_violations, t.velocity_violations, t.joint_violations),
        };
        eprintln!("{:<18} seed {:<4} x {:.3} {:>7.2} s  {outcome}", t.arm.name(), t.seed, t.start_x, t.time);
    });

    let stats: Vec<_> = results.iter().map(|(s, _)| s.clone()).collect();
    let records: Vec<_> = results.into_iter().flat_map(|(_, r)| r).collect();
    export::write_stats_csv(create(out_dir, "stats.csv")?, &stats)?;
    export::write_trials_csv(create(out_dir, "trials.csv")?, &records)?;

    println!(
        "{:<18} {:>6} {:>8} {:>16} {:>16} {:>16}",
        "arm", "trials", "success", "time (s)", "root length (m)", "generalized"
    );
    for s in &stats {
        println!(
            "{:<18} {:>6} {:>7.1}% {:>8.2} ± {:<5.2} {:>8.2} ± {:<5.2} {:>8.2} ± {:<5.2}",
            s.arm.name(),
            s.trials,
            100.0 * s.success_rate,
            s.time_mean,
            s.time_std,
            s.root_length_mean,
            s.root_length_std,
            s.generalized_length_mean,
            s.generalized_length_std
        );
    }
    Ok(())
}

fn validate(trajectory: &Path, scenario: &Path) -> Result<(), Failure> {
    let cfg = ScenarioConfig::load(scenario)?;
    let samples = export::read_trajectory_csv(File::open(trajectory)?)?;
    let dof = cfg.robot.dof();
    if samples.first().is_some_and(|s| s.q.len() != dof) {
        return Err(ConfigError::Invalid(format!("trajectory has {} coordinates, robot needs {dof}", samples[0].q.len())).into());
    }
    let esdf = cfg.esdf()?;
    let report = validate_samples(&samples, &cfg.robot, &esdf, &cfg.planner).map_err(|e| Failure::Planning(e.to_string()))?;
    print_report(&report);
    if report.success() {
        Ok(())
    } else {
        Err(Failure::Planning("trajectory failed validation".into()))
    }
}

fn gradcheck(module: GradModule, instances: usize, seed: u64) -> Result<(), Failure> {
    let modules: &[Module] = match module {
        GradModule::All => &Module::ALL,
        GradModule::Spline => &[Module::Spline],
        GradModule::Penalty => &[Module::Penalty],
        GradModule::Polytope => &[Module::Polytope],
    };
    let mut failed = Vec::new();
    for &m in modules {
        for c in gradcheck::run(m, instances, seed) {
            let verdict = if c.passed() { "pass" } else { "FAIL" };
            println!("{:<34} {:>4} instances  max rel error {:.2e}  {verdict}", c.name, c.instances, c.max_error);
            if !c.passed() {
                failed.push(c.name);
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Planning(format!("gradient mismatch in {}", failed.join(", "))))
    }
}
