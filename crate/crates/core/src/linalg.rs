//! Tridiagonal storage and solvers, plus a small dense SPD solve for the
//! bubble normal equations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Square tridiagonal matrix. `sub[i]` is entry `(i+1, i)`, `sup[i]` is `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        let off = n.saturating_sub(1);
        Tridiagonal { sub: vec![0.0; off], diag: vec![0.0; n], sup: vec![0.0; off] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Adds a 2x2 block at rows/columns `(i, i+1)`.
    pub fn add_block(&mut self, i: usize, block: &[[f64; 2]; 2]) {
        self.diag[i] += block[0][0];
        self.sup[i] += block[0][1];
        self.sub[i] += block[1][0];
        self.diag[i + 1] += block[1][1];
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j == i + 1 {
            self.sup[i]
        } else if i == j + 1 {
            self.sub[j]
        } else {
            0.0
        }
    }

    /// Rows/columns `range` as a new matrix.
    pub fn principal_block(&self, start: usize, end: usize) -> Self {
        let n = end - start;
        Tridiagonal {
            diag: self.diag[start..end].to_vec(),
            sub: self.sub[start..start + n.saturating_sub(1)].to_vec(),
            sup: self.sup[start..start + n.saturating_sub(1)].to_vec(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// `a * self + b * other`
    pub fn combine(&self, a: f64, other: &Tridiagonal, b: f64) -> Tridiagonal {
        let zip = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        Tridiagonal {
            sub: zip(&self.sub, &other.sub),
            diag: zip(&self.diag, &other.diag),
            sup: zip(&self.sup, &other.sup),
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.sub.iter().zip(&self.sup).all(|(a, b)| (a - b).abs() <= tol * a.abs().max(b.abs()))
    }

    /// Pivots of the symmetric `LDL^T` factorisation (no pivoting), using `sup`
    /// as the off-diagonal. Zero pivots propagate as infinities.
    pub fn ldl_pivots(&self) -> Vec<f64> {
        let mut d = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let p = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.sup[i - 1] * self.sup[i - 1] / d[i - 1]
            };
            d.push(p);
        }
        d
    }

    /// True when every `LDL^T` pivot is positive, i.e. the (symmetric) matrix is SPD.
    pub fn is_positive_definite(&self) -> bool {
        self.ldl_pivots().iter().all(|&p| p > 0.0 && p.is_finite())
    }

    fn row_scale(&self, i: usize) -> f64 {
        let mut s = self.diag[i].abs();
        if i > 0 {
            s = s.max(self.sub[i - 1].abs());
        }
        if i + 1 < self.dim() {
            s = s.max(self.sup[i].abs());
        }
        s
    }
}

/// Assembled global matrix and right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub matrix: Tridiagonal,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

const PIVOT_TOL: f64 = 1e-14;

/// Thomas elimination, falling back to partially pivoted banded elimination
/// when a pivot is negligible against its row scale.
pub fn solve_tridiagonal(system: &TridiagonalSystem) -> Result<Vec<f64>> {
    let m = &system.matrix;
    let n = m.dim();
    if system.rhs.len() != n || m.sub.len() != n.saturating_sub(1) || m.sup.len() != m.sub.len() {
        return Err(Error::Argument("tridiagonal system has inconsistent lengths"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    match thomas(m, &system.rhs) {
        Some(x) => Ok(x),
        None => pivoted(m, &system.rhs),
    }
}

fn thomas(m: &Tridiagonal, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = m.dim();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = m.diag[0];
    if beta.abs() <= PIVOT_TOL * m.row_scale(0) || beta == 0.0 {
        return None;
    }
    d[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = m.sup[i - 1] / beta;
        beta = m.diag[i] - m.sub[i - 1] * c[i - 1];
        if beta.abs() <= PIVOT_TOL * m.row_scale(i) || beta == 0.0 {
            return None;
        }
        d[i] = (rhs[i] - m.sub[i - 1] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

/// Gaussian elimination with row interchanges on the band. One extra
/// superdiagonal absorbs the fill-in.
fn pivoted(m: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    let scale: Vec<f64> = (0..n).map(|i| m.row_scale(i)).collect();
    let mut dl = m.sub.clone();
    let mut d = m.diag.clone();
    let mut du = m.sup.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 || d[i].abs() <= PIVOT_TOL * scale[i] {
                return Err(Error::Singular { row: i });
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    let last = n - 1;
    if d[last] == 0.0 || d[last].abs() <= PIVOT_TOL * scale[last] {
        return Err(Error::Singular { row: last });
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    Ok(x)
}

/// Solves `G x_r = b_r` for several right-hand sides with `G` symmetric
/// positive definite (row-major, `n x n`). The matrix is equilibrated to unit
/// diagonal first; a Cholesky pivot below `1e-12` is reported as degenerate.
pub fn solve_spd(gram: &[f64], n: usize, rhs: &mut [Vec<f64>]) -> Result<()> {
    let diag_max = (0..n).map(|i| gram[i * n + i].abs()).fold(0.0, f64::max);
    let mut s = vec![0.0; n];
    for i in 0..n {
        let g = gram[i * n + i];
        if !(g > 0.0) || g <= 1e-300 {
            return Err(Error::DegenerateOperator { magnitude: g, scale: diag_max });
        }
        s[i] = 1.0 / libm::sqrt(g);
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = gram[i * n + j] * s[i] * s[j];
        }
    }
    // in-place lower Cholesky
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 1e-12) {
            return Err(Error::DegenerateOperator { magnitude: d, scale: 1.0 });
        }
        let d = libm::sqrt(d);
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / d;
        }
    }
    for b in rhs.iter_mut() {
        for i in 0..n {
            b[i] *= s[i];
        }
        for i in 0..n {
            let mut v = b[i];
            for k in 0..i {
                v -= a[i * n + k] * b[k];
            }
            b[i] = v / a[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            for k in i + 1..n {
                v -= a[k * n + i] * b[k];
            }
            b[i] = v / a[i * n + i];
        }
        for i in 0..n {
            b[i] *= s[i];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> TridiagonalSystem {
        TridiagonalSystem {
            matrix: Tridiagonal { sub: sub.to_vec(), diag: diag.to_vec(), sup: sup.to_vec() },
            rhs: rhs.to_vec(),
        }
    }

    #[test]
    fn identity() {
        let s = sys(&[0.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 0.0], &[3.0, -1.0, 2.5]);
        assert_eq!(solve_tridiagonal(&s).unwrap(), vec![3.0, -1.0, 2.5]);
    }

    #[test]
    fn two_by_two() {
        let s = sys(&[-1.0], &[2.0, 2.0], &[-1.0], &[1.0, 1.0]);
        let x = solve_tridiagonal(&s).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_leading_pivot_uses_fallback() {
        // [[0, 1], [1, 0]] x = [2, 3]  ->  x = [3, 2]
        let s = sys(&[1.0], &[0.0, 0.0], &[1.0], &[2.0, 3.0]);
        assert_eq!(solve_tridiagonal(&s).unwrap(), vec![3.0, 2.0]);
        // [[0,1,0],[1,0,1],[0,1,1]]
        let s = sys(&[1.0, 1.0], &[0.0, 0.0, 1.0], &[1.0, 1.0], &[1.0, 2.0, 3.0]);
        let x = solve_tridiagonal(&s).unwrap();
        let r = s.matrix.mul_vec(&x);
        for i in 0..3 {
            assert!((r[i] - s.rhs[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_is_reported() {
        let s = sys(&[1.0], &[1.0, 1.0], &[1.0], &[1.0, 2.0]);
        assert!(matches!(solve_tridiagonal(&s), Err(Error::Singular { .. })));
    }

    #[test]
    fn inconsistent_lengths() {
        let s = sys(&[1.0], &[1.0, 1.0], &[], &[1.0, 2.0]);
        assert!(solve_tridiagonal(&s).is_err());
    }

    #[test]
    fn spd_solve_two_rhs() {
        let g = [4.0, 1.0, 1.0, 3.0];
        let mut rhs = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
        solve_spd(&g, 2, &mut rhs).unwrap();
        // inverse of [[4,1],[1,3]] is [[3,-1],[-1,4]]/11
        assert!((rhs[0][0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((rhs[0][1] - 7.0 / 11.0).abs() < 1e-15);
        assert!((rhs[1][0] + 1.0 / 11.0).abs() < 1e-15);
        let singular = [1.0, 1.0, 1.0, 1.0];
        assert!(solve_spd(&singular, 2, &mut rhs).is_err());
    }
}
