//! Central-difference checks of every analytic derivative the optimizer uses.

use std::f64::consts::FRAC_PI_2;

use linkplan_core::esdf::DistanceField;
use linkplan_core::localopt::{energy_and_grad, sampled_penalty_and_grad, velocity_constraints_and_jac, PenaltyKind, SampleSet};
use linkplan_core::polytope::{face_distance_gradient, rotor_torques, FaceDistance};
use linkplan_core::spline::{energy_matrix, knot_vector};
use linkplan_core::{Configuration, RobotModel};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-6;
pub const TOLERANCE: f64 = 1e-4;

const N_FREE: usize = 5;
const DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Module {
    Spline,
    Penalty,
    Polytope,
}

impl Module {
    pub const ALL: [Module; 3] = [Module::Spline, Module::Penalty, Module::Polytope];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub instances: usize,
    /// Largest relative error `|analytic - numeric| / |numeric|` seen.
    pub max_error: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error < TOLERANCE
    }
}

/// Signed distance to a union of discs, exact with its gradient.
pub struct Discs(pub Vec<([f64; 2], f64)>);

impl DistanceField for Discs {
    fn distance_and_gradient(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for (c, r) in &self.0 {
            let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
            let n = dx.hypot(dy);
            if n - r < best.0 {
                best = (n - r, [dx / n, dy / n]);
            }
        }
        best
    }
}

fn random_control(rng: &mut ChaCha8Rng, spread: f64) -> DMatrix<f64> {
    let base = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..3.0)];
    DMatrix::from_fn(N_FREE + 4, 6, |_, c| if c < 3 { base[c] + rng.gen_range(-spread..spread) } else { rng.gen_range(-1.4..1.4) })
}

/// Central differences of `f` over the free control rows, column-major.
fn numeric(control: &DMatrix<f64>, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> DMatrix<f64> {
    let base = f(control);
    let mut out = DMatrix::zeros(base.len(), N_FREE * control.ncols());
    for c in 0..control.ncols() {
        for r in 0..N_FREE {
            let (mut plus, mut minus) = (control.clone(), control.clone());
            plus[(r + 2, c)] += STEP;
            minus[(r + 2, c)] -= STEP;
            let diff = (f(&plus) - f(&minus)) / (2.0 * STEP);
            out.column_mut(c * N_FREE + r).copy_from_slice(diff.as_slice());
        }
    }
    out
}

fn relative(analytic: &DMatrix<f64>, numeric: &DMatrix<f64>) -> f64 {
    (analytic - numeric).norm() / numeric.norm().max(1e-12)
}

/// Free-row gradient as a 1×(N D) row, matching [`numeric`].
fn flatten_gradient(grad: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(1, grad.len(), grad.as_slice())
}

fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

/// Runs the checks of `module` on `instances` seeded random problems each.
pub fn run(module: Module, instances: usize, seed: u64) -> Vec<Check> {
    let model = RobotModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut check = |name, errors: Vec<f64>| {
        checks.push(Check { name, instances: errors.len(), max_error: errors.into_iter().fold(0.0, f64::max) })
    };
    match module {
        Module::Spline => {
            let errors = (0..instances)
                .map(|_| {
                    let m = energy_matrix(N_FREE, DEGREE, rng.gen_range(0.5..8.0)).unwrap();
                    let control = random_control(&mut rng, 1.0);
                    let analytic = flatten_gradient(&energy_and_grad(&control, &m).1);
                    relative(&analytic, &numeric(&control, |c| scalar(energy_and_grad(c, &m).0)))
                })
                .collect();
            check("energy gradient", errors);
            let limits = [1.0, 1.0, 0.5, 0.5, 0.5, 0.5];
            let errors = (0..instances)
                .map(|_| {
                    let knots = knot_vector(N_FREE, DEGREE, rng.gen_range(0.5..8.0)).unwrap();
                    let control = random_control(&mut rng, 1.0);
                    let (_, jac) = velocity_constraints_and_jac(&control, &knots, DEGREE, &limits);
                    let num = numeric(&control, |c| {
                        let v = velocity_constraints_and_jac(c, &knots, DEGREE, &limits).0;
                        DMatrix::from_column_slice(v.len(), 1, v.as_slice())
                    });
                    relative(&jac, &num)
                })
                .collect();
            check("velocity constraint jacobian", errors);
        }
        Module::Penalty => {
            let mut errors = Vec::new();
            while errors.len() < instances {
                let duration = rng.gen_range(1.0..6.0);
                let knots = knot_vector(N_FREE, DEGREE, duration).unwrap();
                let samples = SampleSet::new(&knots, DEGREE, duration, 40).unwrap();
                let control = random_control(&mut rng, 0.5);
                let field = Discs(
                    (0..3)
                        .map(|_| ([control[(3, 0)] + rng.gen_range(-1.5..1.5), control[(3, 1)] + rng.gen_range(-1.5..1.5)], 0.2))
                        .collect(),
                );
                let f = |c: &DMatrix<f64>| sampled_penalty_and_grad(c, PenaltyKind::Collision, &model, &field, 0.6, &samples).unwrap();
                let (value, grad) = f(&control);
                if value > 0.0 {
                    errors.push(relative(&flatten_gradient(&grad), &numeric(&control, |c| scalar(f(c).0))));
                }
            }
            check("collision penalty gradient", errors);

            let open = Discs(vec![([1e3, 1e3], 1.0)]);
            let mut errors = Vec::new();
            while errors.len() < instances {
                let duration = rng.gen_range(1.0..6.0);
                let knots = knot_vector(N_FREE, DEGREE, duration).unwrap();
                let samples = SampleSet::new(&knots, DEGREE, duration, 30).unwrap();
                let control = random_control(&mut rng, 0.5);
                let f = |c: &DMatrix<f64>| {
                    sampled_penalty_and_grad(c, PenaltyKind::Controllability, &model, &open, 1.5, &samples).unwrap()
                };
                let (value, grad) = f(&control);
                if value > 0.0 {
                    errors.push(relative(&flatten_gradient(&grad), &numeric(&control, |c| scalar(f(c).0))));
                }
            }
            check("controllability penalty gradient", errors);
        }
        Module::Polytope => {
            let mut errors = Vec::new();
            while errors.len() < instances {
                let joints: Vec<f64> = (0..3).map(|_| rng.gen_range(-FRAC_PI_2..=FRAC_PI_2)).collect();
                let q = Configuration::from_parts([rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)], rng.gen_range(-3.0..3.0), &joints);
                let (i, j) = (rng.gen_range(0..4), rng.gen_range(0..4));
                if i == j {
                    continue;
                }
                let Ok(analytic) = face_distance_gradient(&model, &q, i, j) else { continue };
                let face = |q: &Configuration| match rotor_torques(&model, q).and_then(|t| t.face_distance(i, j)) {
                    Ok(FaceDistance::Face(d)) => Some(d),
                    _ => None,
                };
                let mut num = DMatrix::zeros(1, q.dim());
                let mut ok = true;
                for k in 0..q.dim() {
                    let shifted = |h: f64| {
                        let mut v = q.as_slice().to_vec();
                        v[k] += h;
                        face(&Configuration::new(v))
                    };
                    match (shifted(STEP), shifted(-STEP)) {
                        (Some(a), Some(b)) => num[(0, k)] = (a - b) / (2.0 * STEP),
                        _ => ok = false,
                    }
                }
                if ok {
                    let analytic = DMatrix::from_row_slice(1, analytic.len(), analytic.as_slice());
                    errors.push(relative(&analytic, &num));
                }
            }
            check("face distance gradient", errors);
        }
    }
    checks
}
