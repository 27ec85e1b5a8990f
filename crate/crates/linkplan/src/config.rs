//! Scenario and campaign files.
//!
//! The format is flat `key = value` text. Keys are dotted paths such as
//! `planner.alpha_v`; a `[section]` line prefixes the keys that follow it
//! with `section.`. `#` starts a comment. Every key must be known: a typo is
//! a configuration error, never silently ignored. Angles are in radians
//! unless the key ends in `_deg`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use linkplan_core::esdf::Bounds;
use linkplan_core::{AnchorParams, Configuration, EsdfGrid, PlannerParams, PointCloud, RobotModel};

use crate::scene::{self, Scene};
use crate::ConfigError;

/// Benchmark arm; `NoParallel` runs the full pipeline one segment at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    Full,
    NoAnchorStates,
    NoLocalPlanning,
    NoParallel,
}

impl Arm {
    pub const ALL: [Arm; 4] = [Arm::Full, Arm::NoAnchorStates, Arm::NoLocalPlanning, Arm::NoParallel];

    pub fn name(self) -> &'static str {
        match self {
            Arm::Full => "full",
            Arm::NoAnchorStates => "no_anchor_states",
            Arm::NoLocalPlanning => "no_local_planning",
            Arm::NoParallel => "no_parallel",
        }
    }

    /// Accepts the long names and the `no_as`, `no_lp`, `no_pc` short forms.
    pub fn parse(s: &str) -> Option<Arm> {
        match s.trim() {
            "full" => Some(Arm::Full),
            "no_anchor_states" | "no_as" => Some(Arm::NoAnchorStates),
            "no_local_planning" | "no_lp" => Some(Arm::NoLocalPlanning),
            "no_parallel" | "no_pc" => Some(Arm::NoParallel),
            _ => None,
        }
    }
}

/// Obstacles either generated or read from a point-cloud file.
#[derive(Debug, Clone, PartialEq)]
pub enum SceneSource {
    Synthetic(Scene),
    Cloud { path: PathBuf, bounds: Bounds },
}

impl SceneSource {
    pub fn name(&self) -> &str {
        match self {
            SceneSource::Synthetic(s) => s.name(),
            SceneSource::Cloud { .. } => "cloud",
        }
    }

    pub fn point_cloud(&self) -> Result<PointCloud, ConfigError> {
        match self {
            SceneSource::Synthetic(s) => s.point_cloud(),
            SceneSource::Cloud { path, .. } => crate::io::load_point_cloud(path),
        }
    }

    pub fn bounds(&self) -> Bounds {
        match self {
            SceneSource::Synthetic(s) => s.bounds(),
            SceneSource::Cloud { bounds, .. } => *bounds,
        }
    }
}

/// Randomized start states for `bench`.
#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub trials: usize,
    pub x_range: (f64, f64),
    pub y: f64,
    pub yaw: f64,
    pub arms: Vec<Arm>,
}

impl Default for Campaign {
    fn default() -> Self {
        Self { trials: 50, x_range: (0.5, 1.32), y: 0.25, yaw: 5f64.to_radians(), arms: Arm::ALL.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scene: SceneSource,
    pub resolution: f64,
    pub robot: RobotModel,
    pub planner: PlannerParams,
    pub anchors: AnchorParams,
    /// Defaults to the scene's fixed endpoints when absent.
    pub start: Option<Configuration>,
    pub goal: Option<Configuration>,
    pub seed: u64,
    pub ablation: Arm,
    pub threads: Option<usize>,
    pub campaign: Campaign,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scene: SceneSource::Synthetic(Scene::SingleGap { width: 0.7, wall_thickness: 0.1, center_y: 0.3 }),
            resolution: 0.1,
            robot: RobotModel::default(),
            planner: PlannerParams::default(),
            anchors: AnchorParams::default(),
            start: None,
            goal: None,
            seed: 0,
            ablation: Arm::Full,
            threads: None,
            campaign: Campaign::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    /// Parses config text; relative cloud paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let mut entries = Entries::parse(text)?;
        let mut cfg = ScenarioConfig::default();

        cfg.scene = parse_scene(&mut entries, base_dir)?;
        if let Some(v) = entries.take("scene.resolution") {
            cfg.resolution = v.float()?;
        }

        let r = &mut cfg.robot;
        set(&mut entries, "robot.n_joints", &mut r.n_joints, Value::usize)?;
        set(&mut entries, "robot.link_length", &mut r.link_length, Value::float)?;
        set(&mut entries, "robot.rotor_radius", &mut r.rotor_radius, Value::float)?;
        set(&mut entries, "robot.theta_min", &mut r.theta_min, Value::float)?;
        set(&mut entries, "robot.theta_max", &mut r.theta_max, Value::float)?;
        set(&mut entries, "robot.kappa", &mut r.kappa, Value::float)?;
        set(&mut entries, "robot.lambda_max", &mut r.lambda_max, Value::float)?;
        set(&mut entries, "robot.link_mass", &mut r.link_mass, Value::float)?;
        match entries.take("robot.spin_signs") {
            Some(v) => r.spin_signs = v.floats()?,
            // Alternate spins when only the joint count changed.
            None => r.spin_signs = (0..=r.n_joints).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect(),
        }
        cfg.robot.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;

        let p = &mut cfg.planner;
        set(&mut entries, "planner.alpha_v", &mut p.alpha_v, Value::float)?;
        set(&mut entries, "planner.alpha_k", &mut p.alpha_k, Value::float)?;
        set(&mut entries, "planner.v_max", &mut p.v_max, Value::float)?;
        set(&mut entries, "planner.omega_max", &mut p.omega_max, Value::float)?;
        set(&mut entries, "planner.delta_collision", &mut p.delta_collision, Value::float)?;
        set(&mut entries, "planner.delta_tau", &mut p.delta_tau, Value::float)?;
        set(&mut entries, "planner.collision_weight", &mut p.collision_weight, Value::float)?;
        set(&mut entries, "planner.f_tol", &mut p.f_tol, Value::float)?;
        set(&mut entries, "planner.time_budget", &mut p.time_budget, Value::float)?;
        set(&mut entries, "planner.n_free", &mut p.n_free, Value::usize)?;
        set(&mut entries, "planner.degree", &mut p.degree, Value::usize)?;
        set(&mut entries, "planner.max_iterations", &mut p.max_iterations, Value::usize)?;
        set(&mut entries, "planner.controllability_weight", &mut p.controllability_weight, Value::float)?;
        set(&mut entries, "planner.escalation_rounds", &mut p.escalation_rounds, Value::usize)?;
        set(&mut entries, "planner.collision_margin", &mut p.collision_margin, Value::float)?;
        set(&mut entries, "planner.controllability_margin", &mut p.controllability_margin, Value::float)?;
        set(&mut entries, "planner.refinement_rounds", &mut p.refinement_rounds, Value::usize)?;
        cfg.planner.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;

        let a = &mut cfg.anchors;
        set(&mut entries, "anchors.n_theta", &mut a.n_theta, Value::usize)?;
        set(&mut entries, "anchors.eps_goal", &mut a.eps_goal, Value::float)?;
        set(&mut entries, "anchors.max_iters", &mut a.max_iters, Value::usize)?;
        set(&mut entries, "anchors.transition_samples", &mut a.transition_samples, Value::usize)?;
        set(&mut entries, "anchors.transition_margin", &mut a.transition_margin, Value::float)?;
        set(&mut entries, "anchors.goal_transition", &mut a.goal_transition, Value::boolean)?;
        // The anchor checks share the optimizer's thresholds.
        a.delta_collision = cfg.planner.delta_collision;
        a.delta_tau = cfg.planner.delta_tau;
        cfg.anchors.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;

        let dof = cfg.robot.dof();
        for (key, slot) in [("start", &mut cfg.start), ("goal", &mut cfg.goal)] {
            if let Some(v) = entries.take(key) {
                let values = v.floats()?;
                if values.len() != dof {
                    return Err(v.invalid(format!("expected {dof} values, found {}", values.len())));
                }
                *slot = Some(Configuration::new(values));
            }
        }
        if let Some(v) = entries.take("seed") {
            cfg.seed = v.parse_with(|s| s.parse::<u64>().ok(), "a nonnegative integer")?;
        }
        if let Some(v) = entries.take("ablation") {
            cfg.ablation = v.parse_with(Arm::parse, "an ablation arm")?;
        }
        if let Some(v) = entries.take("threads") {
            cfg.threads = Some(v.usize()?);
        }

        let c = &mut cfg.campaign;
        set(&mut entries, "campaign.trials", &mut c.trials, Value::usize)?;
        if let Some(v) = entries.take("campaign.x_range") {
            let r = v.floats()?;
            if r.len() != 2 || !(r[0] <= r[1]) {
                return Err(v.invalid("expected `lo hi` with lo <= hi"));
            }
            c.x_range = (r[0], r[1]);
        }
        set(&mut entries, "campaign.y", &mut c.y, Value::float)?;
        if let Some(v) = entries.take("campaign.yaw_deg") {
            c.yaw = v.float()?.to_radians();
        }
        if let Some(v) = entries.take("campaign.arms") {
            c.arms = parse_arms(&v.text).map_err(|m| v.invalid(m))?;
        }

        entries.finish()?;
        Ok(cfg)
    }

    pub fn esdf(&self) -> Result<EsdfGrid, ConfigError> {
        scene::grid_from_cloud(&self.scene.point_cloud()?, self.resolution, self.scene.bounds())
    }

    /// Start and goal, falling back to the scene defaults.
    pub fn endpoints(&self) -> Result<(Configuration, Configuration), ConfigError> {
        let defaults = match &self.scene {
            SceneSource::Synthetic(s) => Some(s.default_endpoints(&self.robot)),
            SceneSource::Cloud { .. } => None,
        };
        let pick = |given: &Option<Configuration>, fallback: Option<Configuration>, key: &str| {
            given.clone().or(fallback).ok_or_else(|| ConfigError::Invalid(format!("`{key}` is required for cloud scenes")))
        };
        let start = pick(&self.start, defaults.as_ref().map(|d| d.0.clone()), "start")?;
        let goal = pick(&self.goal, defaults.map(|d| d.1), "goal")?;
        for (q, key) in [(&start, "start"), (&goal, "goal")] {
            if q.dim() != self.robot.dof() {
                return Err(ConfigError::Invalid(format!("`{key}` has {} values, robot needs {}", q.dim(), self.robot.dof())));
            }
        }
        Ok((start, goal))
    }
}

/// Comma-separated arm list.
pub fn parse_arms(text: &str) -> Result<Vec<Arm>, String> {
    let mut arms = Vec::new();
    for name in text.split(',').filter(|s| !s.trim().is_empty()) {
        let arm = Arm::parse(name).ok_or_else(|| format!("unknown arm `{}`", name.trim()))?;
        if !arms.contains(&arm) {
            arms.push(arm);
        }
    }
    if arms.is_empty() {
        return Err("no arms given".into());
    }
    Ok(arms)
}

fn parse_scene(entries: &mut Entries, base_dir: Option<&Path>) -> Result<SceneSource, ConfigError> {
    let Some(kind) = entries.take("scene") else {
        return Ok(ScenarioConfig::default().scene);
    };
    let mut float = |key: &str, default: f64| -> Result<f64, ConfigError> {
        entries.take(key).map(|v| v.float()).unwrap_or(Ok(default))
    };
    let scene = match kind.text.as_str() {
        "single_gap" => Scene::SingleGap {
            width: float("scene.width", 0.7)?,
            wall_thickness: float("scene.wall_thickness", 0.1)?,
            center_y: float("scene.center_y", 0.3)?,
        },
        "dual_gap" => Scene::DualGap {
            width: float("scene.width", 0.8)?,
            x_offset: float("scene.x_offset", 1.2)?,
            center_y: float("scene.center_y", 0.25)?,
        },
        "triple_gap" => Scene::TripleGap {
            width: float("scene.width", 0.8)?,
            spacing: float("scene.spacing", 1.2)?,
            stagger: float("scene.stagger", 0.3)?,
            center_y: float("scene.center_y", 0.25)?,
        },
        "poles" => {
            let radius = float("scene.radius", 0.15)?;
            let centers = match entries.take("scene.centers") {
                Some(v) => parse_centers(&v.text).map_err(|m| v.invalid(m))?,
                None => vec![[-0.4, 0.9], [-0.4, -0.4], [-1.4, 0.25]],
            };
            Scene::Poles { radius, centers }
        }
        "u_passage" => Scene::UPassage { corridor_width: float("scene.corridor_width", 1.2)? },
        "cloud" => {
            let path = entries.take("scene.path").ok_or_else(|| ConfigError::Invalid("`scene.path` is required".into()))?;
            let bounds = entries.take("scene.bounds").ok_or_else(|| ConfigError::Invalid("`scene.bounds` is required".into()))?;
            let b = bounds.floats()?;
            if b.len() != 4 || !(b[0] < b[2] && b[1] < b[3]) {
                return Err(bounds.invalid("expected `x_min y_min x_max y_max`"));
            }
            let mut file = PathBuf::from(&path.text);
            if file.is_relative() {
                if let Some(dir) = base_dir {
                    file = dir.join(file);
                }
            }
            return Ok(SceneSource::Cloud { path: file, bounds: Bounds { min: [b[0], b[1]], max: [b[2], b[3]] } });
        }
        _ => return Err(kind.invalid("expected single_gap, dual_gap, triple_gap, poles, u_passage or cloud")),
    };
    scene.validate()?;
    Ok(SceneSource::Synthetic(scene))
}

/// `x,y; x,y; ...`
fn parse_centers(text: &str) -> Result<Vec<[f64; 2]>, String> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let v: Vec<f64> = pair.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            match v.as_slice() {
                [x, y] => Ok([*x, *y]),
                _ => Err(format!("`{}` is not an `x,y` pair", pair.trim())),
            }
        })
        .collect()
}

fn set<T>(
    entries: &mut Entries,
    key: &str,
    slot: &mut T,
    convert: impl Fn(&Value) -> Result<T, ConfigError>,
) -> Result<(), ConfigError> {
    if let Some(v) = entries.take(key) {
        *slot = convert(&v)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Value {
    key: String,
    text: String,
}

impl Value {
    fn invalid(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Value { key: self.key.clone(), message: message.into() }
    }

    fn parse_with<T>(&self, f: impl Fn(&str) -> Option<T>, what: &str) -> Result<T, ConfigError> {
        f(&self.text).ok_or_else(|| self.invalid(format!("`{}` is not {what}", self.text)))
    }

    fn float(&self) -> Result<f64, ConfigError> {
        let v = self.parse_with(|s| s.parse::<f64>().ok(), "a number")?;
        if !v.is_finite() {
            return Err(self.invalid("must be finite"));
        }
        Ok(v)
    }

    fn usize(&self) -> Result<usize, ConfigError> {
        self.parse_with(|s| s.parse::<usize>().ok(), "a nonnegative integer")
    }

    fn boolean(&self) -> Result<bool, ConfigError> {
        self.parse_with(|s| s.parse::<bool>().ok(), "`true` or `false`")
    }

    /// Numbers separated by whitespace or commas.
    fn floats(&self) -> Result<Vec<f64>, ConfigError> {
        self.text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| self.invalid(format!("`{s}` is not a number"))))
            .collect()
    }
}

/// Raw entries in file order, consumed as they are interpreted.
struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Parse { line: i + 1, message: format!("expected `key = value`, found `{line}`") });
            };
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Parse { line: i + 1, message: format!("malformed key `{key}`") });
            }
            let key = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            if map.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(ConfigError::Parse { line: i + 1, message: format!("duplicate key `{key}`") });
            }
        }
        Ok(Entries(map))
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.0.remove(key).map(|(_, text)| Value { key: key.to_string(), text })
    }

    /// Fails on the first (by line) key nobody asked for.
    fn finish(self) -> Result<(), ConfigError> {
        match self.0.into_iter().min_by_key(|(_, (line, _))| *line) {
            Some((key, _)) => Err(ConfigError::UnknownKey(key)),
            None => Ok(()),
        }
    }
}
