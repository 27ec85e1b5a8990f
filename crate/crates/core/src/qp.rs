//! Dense strictly convex quadratic programs, solved with the Goldfarb–Idnani
//! dual active-set method.
//!
//! minimize `0.5 x^T G x + a^T x` subject to `c_i^T x = b_i` for the first
//! `n_eq` rows of `C` and `c_i^T x >= b_i` for the rest.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::hypot;

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Multipliers indexed like the rows of `C` (zero for inactive rows).
    pub multipliers: DVector<f64>,
    pub active: Vec<usize>,
    pub iterations: usize,
}

struct Workspace {
    n: usize,
    j: DMatrix<f64>,
    r: DMatrix<f64>,
    r_norm: f64,
}

impl Workspace {
    fn compute_d(&self, np: &DVector<f64>) -> DVector<f64> {
        self.j.tr_mul(np)
    }

    fn update_z(&self, d: &DVector<f64>, iq: usize) -> DVector<f64> {
        let mut z = DVector::zeros(self.n);
        for k in iq..self.n {
            z.axpy(d[k], &self.j.column(k), 1.0);
        }
        z
    }

    fn update_r(&self, d: &DVector<f64>, iq: usize) -> Vec<f64> {
        let mut r = vec![0.0; iq];
        for i in (0..iq).rev() {
            let mut sum = 0.0;
            for k in i + 1..iq {
                sum += self.r[(i, k)] * r[k];
            }
            r[i] = (d[i] - sum) / self.r[(i, i)];
        }
        r
    }

    fn add_constraint(&mut self, d: &mut DVector<f64>, iq: &mut usize) -> bool {
        let n = self.n;
        let mut j = n - 1;
        while j > *iq {
            let (mut cc, mut ss) = (d[j - 1], d[j]);
            let h = hypot(cc, ss);
            if h != 0.0 {
                d[j] = 0.0;
                ss /= h;
                cc /= h;
                if cc < 0.0 {
                    cc = -cc;
                    ss = -ss;
                    d[j - 1] = -h;
                } else {
                    d[j - 1] = h;
                }
                let xny = ss / (1.0 + cc);
                for k in 0..n {
                    let t1 = self.j[(k, j - 1)];
                    let t2 = self.j[(k, j)];
                    self.j[(k, j - 1)] = t1 * cc + t2 * ss;
                    self.j[(k, j)] = xny * (t1 + self.j[(k, j - 1)]) - t2;
                }
            }
            j -= 1;
        }
        *iq += 1;
        for i in 0..*iq {
            self.r[(i, *iq - 1)] = d[i];
        }
        if d[*iq - 1].abs() <= f64::EPSILON * self.r_norm {
            return false;
        }
        self.r_norm = self.r_norm.max(d[*iq - 1].abs());
        true
    }

    fn delete_constraint(&mut self, active: &mut [usize], u: &mut [f64], n_eq: usize, iq: &mut usize, l: usize) {
        let n = self.n;
        let Some(qq) = (n_eq..*iq).find(|&i| active[i] == l) else {
            return;
        };
        for i in qq..*iq - 1 {
            active[i] = active[i + 1];
            u[i] = u[i + 1];
            for k in 0..n {
                self.r[(k, i)] = self.r[(k, i + 1)];
            }
        }
        active[*iq - 1] = active[*iq];
        u[*iq - 1] = u[*iq];
        active[*iq] = 0;
        u[*iq] = 0.0;
        for k in 0..*iq {
            self.r[(k, *iq - 1)] = 0.0;
        }
        *iq -= 1;
        if *iq == 0 {
            return;
        }
        for j in qq..*iq {
            let (mut cc, mut ss) = (self.r[(j, j)], self.r[(j + 1, j)]);
            let h = hypot(cc, ss);
            if h == 0.0 {
                continue;
            }
            cc /= h;
            ss /= h;
            self.r[(j + 1, j)] = 0.0;
            if cc < 0.0 {
                self.r[(j, j)] = -h;
                cc = -cc;
                ss = -ss;
            } else {
                self.r[(j, j)] = h;
            }
            let xny = ss / (1.0 + cc);
            for k in j + 1..*iq {
                let t1 = self.r[(j, k)];
                let t2 = self.r[(j + 1, k)];
                self.r[(j, k)] = t1 * cc + t2 * ss;
                self.r[(j + 1, k)] = xny * (t1 + self.r[(j, k)]) - t2;
            }
            for k in 0..n {
                let t1 = self.j[(k, j)];
                let t2 = self.j[(k, j + 1)];
                self.j[(k, j)] = t1 * cc + t2 * ss;
                self.j[(k, j + 1)] = xny * (self.j[(k, j)] + t1) - t2;
            }
        }
    }
}

/// Solves the QP; `G` must be symmetric positive definite.
pub fn solve(
    g: &DMatrix<f64>,
    a: &DVector<f64>,
    c: &DMatrix<f64>,
    b: &DVector<f64>,
    n_eq: usize,
) -> Result<QpSolution> {
    let n = g.nrows();
    let m = c.nrows();
    if g.ncols() != n || a.len() != n || (m > 0 && c.ncols() != n) || b.len() != m || n_eq > m {
        return Err(Error::QpInfeasible);
    }
    let chol = g.clone().cholesky().ok_or(Error::QpInfeasible)?;
    let l = chol.l();
    // J = L^{-T}
    let j = l.transpose().solve_upper_triangular(&DMatrix::identity(n, n)).ok_or(Error::QpInfeasible)?;
    let mut ws = Workspace { n, j, r: DMatrix::zeros(n, n + 1), r_norm: 1.0 };

    let mut x = -chol.solve(a);
    let row = |i: usize| c.row(i).transpose();

    let mut active = vec![0usize; m + n + 1];
    let mut u = vec![0.0; m + n + 1];
    let mut iq = 0usize;

    for i in 0..n_eq {
        let np = row(i);
        let mut d = ws.compute_d(&np);
        let z = ws.update_z(&d, iq);
        let r = ws.update_r(&d, iq);
        let zn = z.dot(&np);
        let t2 = if z.norm_squared() > f64::EPSILON { (b[i] - np.dot(&x)) / zn } else { 0.0 };
        x.axpy(t2, &z, 1.0);
        u[iq] = t2;
        for k in 0..iq {
            u[k] -= t2 * r[k];
        }
        active[iq] = i;
        if !ws.add_constraint(&mut d, &mut iq) {
            return Err(Error::QpInfeasible);
        }
    }

    let n_in = m - n_eq;
    // iai[i] is true while inequality i is not in the active set.
    let mut iai = vec![true; n_in];
    let mut iaexcl = vec![true; n_in];
    let mut s = vec![0.0; n_in];
    // A row counts as satisfied within rounding of its own magnitude.
    let tol: Vec<f64> = (0..n_in)
        .map(|i| 1e-12 * (1.0 + b[n_eq + i].abs() + c.row(n_eq + i).amax()))
        .collect();
    let mut u_old = vec![0.0; m + n + 1];
    let mut active_old = vec![0usize; m + n + 1];
    let max_iter = 50 * (m + n) + 100;
    let mut iterations = 0usize;

    'outer: loop {
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::QpInfeasible);
        }
        for &k in &active[n_eq..iq] {
            iai[k - n_eq] = false;
        }
        let mut feasible = true;
        for i in 0..n_in {
            iaexcl[i] = true;
            s[i] = row(n_eq + i).dot(&x) - b[n_eq + i];
            feasible &= s[i] >= -tol[i] * (1.0 + x.amax());
        }
        if feasible {
            break;
        }
        u_old[..iq].copy_from_slice(&u[..iq]);
        active_old[..iq].copy_from_slice(&active[..iq]);
        let x_old = x.clone();

        'select: loop {
            let mut ss = 0.0;
            let mut ip = usize::MAX;
            for i in 0..n_in {
                if s[i] < ss && s[i] < -tol[i] * (1.0 + x.amax()) && iai[i] && iaexcl[i] {
                    ss = s[i];
                    ip = i;
                }
            }
            if ip == usize::MAX {
                break 'outer;
            }
            let np = row(n_eq + ip);
            u[iq] = 0.0;
            active[iq] = n_eq + ip;

            loop {
                iterations += 1;
                if iterations > max_iter {
                    return Err(Error::QpInfeasible);
                }
                let mut d = ws.compute_d(&np);
                let z = ws.update_z(&d, iq);
                let r = ws.update_r(&d, iq);
                let mut l = 0usize;
                let mut t1 = f64::INFINITY;
                for k in n_eq..iq {
                    if r[k] > 0.0 && u[k] / r[k] < t1 {
                        t1 = u[k] / r[k];
                        l = active[k];
                    }
                }
                let t2 = if z.norm_squared() > f64::EPSILON {
                    let t = -s[ip] / z.dot(&np);
                    if t < 0.0 {
                        f64::INFINITY
                    } else {
                        t
                    }
                } else {
                    f64::INFINITY
                };
                let t = t1.min(t2);
                if !t.is_finite() {
                    return Err(Error::QpInfeasible);
                }
                if !t2.is_finite() {
                    for k in 0..iq {
                        u[k] -= t * r[k];
                    }
                    u[iq] += t;
                    iai[l - n_eq] = true;
                    ws.delete_constraint(&mut active, &mut u, n_eq, &mut iq, l);
                    continue;
                }
                x.axpy(t, &z, 1.0);
                for k in 0..iq {
                    u[k] -= t * r[k];
                }
                u[iq] += t;
                if (t - t2).abs() <= f64::EPSILON * t2.abs().max(1.0) {
                    if !ws.add_constraint(&mut d, &mut iq) {
                        iaexcl[ip] = false;
                        ws.delete_constraint(&mut active, &mut u, n_eq, &mut iq, n_eq + ip);
                        iai.iter_mut().for_each(|v| *v = true);
                        for i in n_eq..iq {
                            active[i] = active_old[i];
                            u[i] = u_old[i];
                            iai[active[i] - n_eq] = false;
                        }
                        x.copy_from(&x_old);
                        continue 'select;
                    }
                    iai[ip] = false;
                    continue 'outer;
                }
                iai[l - n_eq] = true;
                ws.delete_constraint(&mut active, &mut u, n_eq, &mut iq, l);
                s[ip] = np.dot(&x) - b[n_eq + ip];
            }
        }
    }

    let mut multipliers = DVector::zeros(m);
    for k in 0..iq {
        multipliers[active[k]] = u[k];
    }
    Ok(QpSolution { x, multipliers, active: active[..iq].to_vec(), iterations })
}
