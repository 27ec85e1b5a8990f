//! Quasi-Newton sequential quadratic programming over a polyhedron.
//!
//! Minimizes a smooth objective subject to linear inequalities `C x >= b`.
//! Each iteration solves a QP with a damped BFGS model, then backtracks along
//! the step; iterates stay feasible because the feasible set is convex.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qp;

/// Decides when a solve must stop regardless of convergence.
pub trait Budget {
    fn exhausted(&self, iterations: usize) -> bool;
}

/// Deterministic cap on outer iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationBudget(pub usize);

impl Budget for IterationBudget {
    fn exhausted(&self, iterations: usize) -> bool {
        iterations >= self.0
    }
}

impl<B: Budget + ?Sized> Budget for &B {
    fn exhausted(&self, iterations: usize) -> bool {
        (**self).exhausted(iterations)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Relative objective change fell below the tolerance.
    Converged,
    /// The QP step was not a descent direction: a KKT point of the model.
    Stationary,
    BudgetExhausted,
    LineSearchFailed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqpOptions {
    pub f_tol: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for SqpOptions {
    fn default() -> Self {
        Self { f_tol: 1e-5, armijo: 1e-4, max_backtracks: 40 }
    }
}

#[derive(Debug, Clone)]
pub struct SqpResult {
    pub x: DVector<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// Best objective after each accepted iterate, starting with the initial point.
    pub history: Vec<f64>,
}

/// Linear inequalities `C x >= b`.
#[derive(Debug, Clone)]
pub struct LinearConstraints {
    pub c: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LinearConstraints {
    pub fn none(n: usize) -> Self {
        Self { c: DMatrix::zeros(0, n), b: DVector::zeros(0) }
    }

    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        if self.c.nrows() == 0 {
            return 0.0;
        }
        (&self.b - &self.c * x).iter().fold(0.0f64, |acc, v| acc.max(*v))
    }

    /// Euclidean projection of `x` onto the polyhedron.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if self.max_violation(x) <= 0.0 {
            return Ok(x.clone());
        }
        let n = x.len();
        Ok(qp::solve(&DMatrix::identity(n, n), &-x, &self.c, &self.b, 0)?.x)
    }
}

fn damped_bfgs_update(h: &mut DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>) {
    let hs = &*h * s;
    let shs = s.dot(&hs);
    if !(shs > 0.0) {
        return;
    }
    let sy = s.dot(y);
    let r = if sy >= 0.2 * shs {
        y.clone()
    } else {
        let theta = 0.8 * shs / (shs - sy);
        y * theta + &hs * (1.0 - theta)
    };
    let sr = s.dot(&r);
    if !(sr > 0.0) {
        return;
    }
    *h += &r * r.transpose() / sr - &hs * hs.transpose() / shs;
    // Keep the matrix exactly symmetric against rounding drift.
    let sym = (&*h + h.transpose()) * 0.5;
    *h = sym;
}

/// Minimizes `objective` from `x0` (projected onto the constraints first).
///
/// `objective` returns the value and gradient; `hessian0` seeds the BFGS model
/// and must be symmetric positive definite.
pub fn minimize<F, B>(
    mut objective: F,
    x0: &DVector<f64>,
    hessian0: &DMatrix<f64>,
    constraints: &LinearConstraints,
    options: &SqpOptions,
    budget: B,
) -> Result<SqpResult>
where
    F: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
    B: Budget,
{
    let mut x = constraints.project(x0)?;
    let (mut f, mut g) = objective(&x);
    let mut evaluations = 1;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverDiverged);
    }
    let mut h = hessian0.clone();
    let mut history = alloc::vec![f];
    let mut iterations = 0;
    let mut reset = false;

    let termination = loop {
        if budget.exhausted(iterations) {
            break Termination::BudgetExhausted;
        }
        let slack = &constraints.b - &constraints.c * &x;
        let d = match qp::solve(&h, &g, &constraints.c, &slack, 0) {
            Ok(sol) => sol.x,
            Err(_) if !reset => {
                h = hessian0.clone();
                reset = true;
                continue;
            }
            Err(_) => break Termination::LineSearchFailed,
        };
        let slope = g.dot(&d);
        if !(slope < -1e-14 * (1.0 + f.abs())) {
            break Termination::Stationary;
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..options.max_backtracks {
            let trial = &x + &d * alpha;
            let (ft, gt) = objective(&trial);
            evaluations += 1;
            if ft.is_finite() && ft <= f + options.armijo * alpha * slope {
                if gt.iter().any(|v| !v.is_finite()) {
                    return Err(Error::SolverDiverged);
                }
                accepted = Some((trial, ft, gt, alpha));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new, g_new, step)) = accepted else {
            if !reset {
                h = hessian0.clone();
                reset = true;
                continue;
            }
            break Termination::LineSearchFailed;
        };
        reset = false;
        iterations += 1;

        let s = &x_new - &x;
        let y = &g_new - &g;
        damped_bfgs_update(&mut h, &s, &y);
        let change = (f - f_new).abs();
        x = x_new;
        g = g_new;
        let f_old = f;
        f = f_new;
        history.push(f.min(*history.last().unwrap_or(&f)));
        // A heavily backtracked step says little about convergence.
        if step == 1.0 && change <= options.f_tol * f_old.abs().max(f.abs()) {
            break Termination::Converged;
        }
    };

    Ok(SqpResult { x, f, iterations, evaluations, termination, history })
}
