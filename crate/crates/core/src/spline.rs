//! Clamped uniform B-splines over configuration space.
//!
//! A segment with `N` free control points and degree `p` has `N + 4` control
//! points `c_0 .. c_{N+3}`; the first two and last two are fixed by the
//! boundary positions and velocities, the middle `N` are optimized.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Clamped knot vector `[0 x (p+1), h, 2h, .., (N+3-p) h, T x (p+1)]` with
/// `h = T / (N + 4 - p)`.
pub fn knot_vector(n_free: usize, degree: usize, duration: f64) -> Result<Vec<f64>> {
    if n_free < 1 || degree < 1 {
        return Err(Error::InvalidSpline("need at least one free control point and degree >= 1"));
    }
    if degree > n_free + 3 {
        return Err(Error::InvalidSpline("degree too high for the control point count"));
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidSpline("duration must be positive"));
    }
    let h = knot_interval(n_free, degree, duration);
    let mut knots = Vec::with_capacity(n_free + degree + 5);
    knots.extend(core::iter::repeat(0.0).take(degree + 1));
    for k in 1..=(n_free + 3 - degree) {
        knots.push(k as f64 * h);
    }
    knots.extend(core::iter::repeat(duration).take(degree + 1));
    Ok(knots)
}

pub fn knot_interval(n_free: usize, degree: usize, duration: f64) -> f64 {
    duration / (n_free + 4 - degree) as f64
}

fn control_count(knots: &[f64], degree: usize) -> usize {
    knots.len() - degree - 1
}

/// Span index `k` with `u_k <= t < u_{k+1}`; at the right end the last
/// non-degenerate span is used so the curve is left-continuous there.
fn find_span(knots: &[f64], degree: usize, t: f64) -> usize {
    let n = control_count(knots, degree) - 1;
    if t >= knots[n + 1] {
        return n;
    }
    if t <= knots[degree] {
        return degree;
    }
    let (mut lo, mut hi) = (degree, n + 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if t < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Nonzero basis values `B_{span-p..=span, p}(t)`.
fn nonzero_basis(knots: &[f64], degree: usize, span: usize, t: f64) -> Vec<f64> {
    let mut values = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    values[0] = 1.0;
    for j in 1..=degree {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { values[r] / denom };
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    values
}

fn check_domain(knots: &[f64], t: f64) -> Result<()> {
    let duration = *knots.last().unwrap_or(&0.0);
    if !(t >= knots[0] && t <= duration) {
        return Err(Error::OutOfDomain { t, duration });
    }
    Ok(())
}

/// Row `b(t) = [B_0(t), .., B_{n-1}(t)]` of all basis functions.
pub fn basis_row(knots: &[f64], degree: usize, t: f64) -> Result<Vec<f64>> {
    check_domain(knots, t)?;
    let mut row = vec![0.0; control_count(knots, degree)];
    // Clamped ends interpolate their control point exactly; the recurrence
    // would only get there up to rounding.
    let last = knots.len() - 1;
    if t == knots[0] && knots[degree] == knots[0] {
        row[0] = 1.0;
        return Ok(row);
    }
    if t == knots[last] && knots[last - degree] == knots[last] {
        row[control_count(knots, degree) - 1] = 1.0;
        return Ok(row);
    }
    let span = find_span(knots, degree, t);
    for (k, v) in nonzero_basis(knots, degree, span, t).into_iter().enumerate() {
        row[span - degree + k] = v;
    }
    Ok(row)
}

/// Exact time derivatives of all basis functions at `t`.
pub fn basis_derivative_row(knots: &[f64], degree: usize, t: f64) -> Result<Vec<f64>> {
    check_domain(knots, t)?;
    let n = control_count(knots, degree);
    let mut row = vec![0.0; n];
    if degree == 0 {
        return Ok(row);
    }
    // dB_{i,p} = p/(u_{i+p}-u_i) B_{i,p-1} - p/(u_{i+p+1}-u_{i+1}) B_{i+1,p-1}
    let lower = &knots[1..knots.len() - 1];
    let span = find_span(lower, degree - 1, t);
    let values = nonzero_basis(lower, degree - 1, span, t);
    let p = degree as f64;
    for (k, v) in values.into_iter().enumerate() {
        // Lower-degree basis index m corresponds to B_{m+1, p-1} on the full knots.
        let m = span - (degree - 1) + k;
        let i = m + 1;
        let denom = knots[i + degree] - knots[i];
        if denom > 0.0 {
            let w = p * v / denom;
            row[i] += w;
            row[i - 1] -= w;
        }
    }
    Ok(row)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineSegment {
    pub degree: usize,
    pub n_free: usize,
    pub duration: f64,
    pub knot_interval: f64,
    pub knots: Vec<f64>,
    /// `(N + 4) x D` control points, one configuration per row.
    pub control: DMatrix<f64>,
}

impl SplineSegment {
    pub fn new(n_free: usize, degree: usize, duration: f64, control: DMatrix<f64>) -> Result<Self> {
        let knots = knot_vector(n_free, degree, duration)?;
        if control.nrows() != n_free + 4 {
            return Err(Error::InvalidSpline("control matrix must have N + 4 rows"));
        }
        Ok(Self { degree, n_free, duration, knot_interval: knot_interval(n_free, degree, duration), knots, control })
    }

    /// A segment that holds `q` for `duration`.
    pub fn constant(q: &[f64], n_free: usize, degree: usize, duration: f64) -> Result<Self> {
        let control = DMatrix::from_fn(n_free + 4, q.len(), |_, c| q[c]);
        Self::new(n_free, degree, duration, control)
    }

    pub fn dim(&self) -> usize {
        self.control.ncols()
    }

    pub fn basis(&self, t: f64) -> Result<Vec<f64>> {
        basis_row(&self.knots, self.degree, t)
    }

    fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (r, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o += w * self.control[(r, c)];
            }
        }
        out
    }

    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.combine(&self.basis(t)?))
    }

    pub fn evaluate_velocity(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.combine(&basis_derivative_row(&self.knots, self.degree, t)?))
    }

    /// `integral ||q'(t)||^2 dt` via the energy matrix.
    pub fn energy(&self) -> f64 {
        let m = energy_matrix(self.n_free, self.degree, self.duration).expect("valid segment");
        (self.control.transpose() * m * &self.control).trace()
    }
}

/// Polynomial in the local span coordinate `s in [0, 1]`, lowest order first.
type Poly = Vec<f64>;

fn poly_mul_linear(p: &[f64], c0: f64, c1: f64) -> Poly {
    let mut out = vec![0.0; p.len() + 1];
    for (k, a) in p.iter().enumerate() {
        out[k] += a * c0;
        out[k + 1] += a * c1;
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (k, v) in a.iter().enumerate() {
        out[k] += v;
    }
    for (k, v) in b.iter().enumerate() {
        out[k] += v;
    }
    out
}

fn poly_derivative(p: &[f64]) -> Poly {
    p.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect()
}

fn poly_product_integral(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            sum += x * y / (i + j + 1) as f64;
        }
    }
    sum
}

/// Basis functions restricted to the non-degenerate span `[u_j, u_{j+1})`,
/// as polynomials in `s = (t - u_j) / (u_{j+1} - u_j)`.
fn span_polynomials(knots: &[f64], degree: usize, j: usize) -> Vec<Poly> {
    let h = knots[j + 1] - knots[j];
    let u0 = knots[j];
    let mut level: Vec<Poly> = (0..knots.len() - 1).map(|i| if i == j { vec![1.0] } else { vec![0.0] }).collect();
    for k in 1..=degree {
        let count = knots.len() - 1 - k;
        let mut next = Vec::with_capacity(count);
        for i in 0..count {
            let d1 = knots[i + k] - knots[i];
            let d2 = knots[i + k + 1] - knots[i + 1];
            let left = if d1 > 0.0 {
                poly_mul_linear(&level[i], (u0 - knots[i]) / d1, h / d1)
            } else {
                vec![0.0]
            };
            let right = if d2 > 0.0 {
                poly_mul_linear(&level[i + 1], (knots[i + k + 1] - u0) / d2, -h / d2)
            } else {
                vec![0.0]
            };
            next.push(poly_add(&left, &right));
        }
        level = next;
    }
    level
}

/// `M_ij = integral_0^T B'_i(t) B'_j(t) dt`, assembled span by span from exact
/// polynomial integrals.
pub fn energy_matrix(n_free: usize, degree: usize, duration: f64) -> Result<DMatrix<f64>> {
    let knots = knot_vector(n_free, degree, duration)?;
    let n = control_count(&knots, degree);
    let mut m = DMatrix::zeros(n, n);
    for j in 0..knots.len() - 1 {
        let h = knots[j + 1] - knots[j];
        if h <= 0.0 {
            continue;
        }
        let polys = span_polynomials(&knots, degree, j);
        let derivs: Vec<Poly> = polys.iter().map(|p| poly_derivative(p)).collect();
        // Only B_{j-p..=j} are nonzero on span j.
        let lo = j.saturating_sub(degree);
        for a in lo..=j.min(n - 1) {
            for b in a..=j.min(n - 1) {
                let v = poly_product_integral(&derivs[a], &derivs[b]) / h;
                m[(a, b)] += v;
                if a != b {
                    m[(b, a)] += v;
                }
            }
        }
    }
    Ok(m)
}

/// Banded difference matrix `A` ((N+3) x (N+4)) with rows `[-1, 1] / h`.
pub fn difference_matrix(n_free: usize, h: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n_free + 3, n_free + 4);
    for i in 0..n_free + 3 {
        a[(i, i)] = -1.0 / h;
        a[(i, i + 1)] = 1.0 / h;
    }
    a
}

/// Derivative control points `beta_i = (c_{i+1} - c_i) / h`.
pub fn derivative_control_points(control: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    difference_matrix(control.nrows() - 4, h) * control
}

/// Per-row scale of the exact clamped-knot derivative control points,
/// `p / (u_{i+p+1} - u_{i+1})`.
pub fn exact_derivative_scales(knots: &[f64], degree: usize) -> Vec<f64> {
    let n = control_count(knots, degree);
    (0..n - 1)
        .map(|i| {
            let span = knots[i + degree + 1] - knots[i + 1];
            if span > 0.0 {
                degree as f64 / span
            } else {
                0.0
            }
        })
        .collect()
}

/// Boundary rows `c_0, c_1, c_{N+2}, c_{N+3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRows {
    pub rows: [Vec<f64>; 4],
}

/// Free control points minimizing `Tr(C_full^T M C_full)` with the boundary
/// rows held fixed. Returns the `N x D` block and whether the straight-line
/// fallback was needed.
pub fn min_energy_init(boundary: &BoundaryRows, m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let n_ctrl = m.nrows();
    let n_free = n_ctrl - 4;
    let dim = boundary.rows[0].len();
    let fixed = [0, 1, n_ctrl - 2, n_ctrl - 1];
    let mff = m.view((2, 2), (n_free, n_free)).into_owned();
    let mut rhs = DMatrix::zeros(n_free, dim);
    for (b, &row) in fixed.iter().enumerate() {
        for r in 0..n_free {
            let w = m[(r + 2, row)];
            for c in 0..dim {
                rhs[(r, c)] -= w * boundary.rows[b][c];
            }
        }
    }
    match mff.cholesky() {
        Some(chol) => (chol.solve(&rhs), false),
        None => {
            let start = &boundary.rows[1];
            let end = &boundary.rows[2];
            let free = DMatrix::from_fn(n_free, dim, |r, c| {
                let s = (r + 1) as f64 / (n_free + 1) as f64;
                start[c] + s * (end[c] - start[c])
            });
            (free, true)
        }
    }
}

/// Stacks boundary rows and free rows into `C_full`.
pub fn assemble_control(boundary: &BoundaryRows, free: &DMatrix<f64>) -> DMatrix<f64> {
    let n_free = free.nrows();
    let dim = free.ncols();
    DMatrix::from_fn(n_free + 4, dim, |r, c| match r {
        0 => boundary.rows[0][c],
        1 => boundary.rows[1][c],
        r if r == n_free + 2 => boundary.rows[2][c],
        r if r == n_free + 3 => boundary.rows[3][c],
        r => free[(r - 2, c)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knots_for_default_shape() {
        let k = knot_vector(5, 3, 6.0).unwrap();
        assert_eq!(k, vec![0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 6.0, 6.0, 6.0]);
        assert_eq!(knot_interval(5, 3, 6.0), 1.0);
        assert!(knot_vector(5, 3, 0.0).is_err());
        assert!(knot_vector(5, 3, -1.0).is_err());
    }

    #[test]
    fn clamped_end_basis() {
        let k = knot_vector(5, 3, 2.0).unwrap();
        let b0 = basis_row(&k, 3, 0.0).unwrap();
        let bt = basis_row(&k, 3, 2.0).unwrap();
        assert_eq!(b0[0], 1.0);
        assert_eq!(bt[8], 1.0);
        assert_eq!(b0.iter().sum::<f64>(), 1.0);
        assert!(matches!(basis_row(&k, 3, 2.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(basis_row(&k, 3, -0.1), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn local_support() {
        let k = knot_vector(5, 3, 3.0).unwrap();
        for step in 0..=30 {
            let row = basis_row(&k, 3, step as f64 * 0.1).unwrap();
            assert!(row.iter().all(|b| *b >= 0.0));
            assert!(row.iter().filter(|b| **b > 0.0).count() <= 4);
        }
    }

    #[test]
    fn constant_spline() {
        let seg = SplineSegment::constant(&[1.0, -2.0, 0.5], 5, 3, 4.0).unwrap();
        for t in [0.0, 1.3, 4.0] {
            let q = seg.evaluate(t).unwrap();
            assert!((q[0] - 1.0).abs() < 1e-14 && (q[1] + 2.0).abs() < 1e-14);
            assert!(seg.evaluate_velocity(t).unwrap().iter().all(|v| v.abs() < 1e-12));
        }
        assert!(seg.energy().abs() < 1e-12);
    }

    #[test]
    fn energy_matrix_structure() {
        let m = energy_matrix(5, 3, 6.0).unwrap();
        assert_eq!(m.nrows(), 9);
        for i in 0..9 {
            assert!(m.row(i).sum().abs() < 1e-12);
            for j in 0..9 {
                assert_eq!(m[(i, j)], m[(j, i)]);
                if i.abs_diff(j) > 3 {
                    assert_eq!(m[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn difference_matrix_rows() {
        let a = difference_matrix(5, 0.5);
        assert_eq!((a.nrows(), a.ncols()), (8, 9));
        for i in 0..8 {
            assert!(a.row(i).sum().abs() < 1e-15);
        }
        let h = 0.5;
        let ramp = DMatrix::from_fn(9, 1, |r, _| r as f64 * 0.7 * h);
        let g = derivative_control_points(&ramp, h);
        assert!(g.iter().all(|b| (b - 0.7).abs() < 1e-12));
    }

    #[test]
    fn min_energy_with_equal_endpoints_is_constant() {
        let q = vec![0.4, -1.0, 2.0];
        let boundary = BoundaryRows { rows: [q.clone(), q.clone(), q.clone(), q.clone()] };
        let m = energy_matrix(5, 3, 3.0).unwrap();
        let (free, fallback) = min_energy_init(&boundary, &m);
        assert!(!fallback);
        for r in 0..5 {
            for c in 0..3 {
                assert!((free[(r, c)] - q[c]).abs() < 1e-12);
            }
        }
    }
}
