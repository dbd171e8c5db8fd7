//! Dense primal simplex for small linear programs in standard form
//! `min c.x  s.t.  A x = b, x >= 0`, started from a feasible basis.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Solves the program from `basis`, which must index `A.nrows()` columns
/// forming a nonsingular matrix with `B^{-1} b >= 0`.
pub fn simplex(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    basis: Vec<usize>,
) -> Result<LpSolution> {
    let (m, n) = a.shape();
    if b.len() != m || c.len() != n || basis.len() != m {
        return Err(Error::shape("linear program dimensions disagree"));
    }
    let mut bmat = DMatrix::<f64>::zeros(m, m);
    for (k, &j) in basis.iter().enumerate() {
        if j >= n {
            return Err(Error::shape(format!("basis column {j} out of range")));
        }
        bmat.set_column(k, &a.column(j));
    }
    let lu = bmat.lu();
    let mut aug = DMatrix::<f64>::zeros(m, n + 1);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    aug.set_column(n, b);
    let mut t = lu
        .solve(&aug)
        .ok_or_else(|| Error::Numerical("initial basis is singular".into()))?;
    if t.column(n).iter().any(|&v| v < -1e-9) {
        return Err(Error::Numerical("initial basis is infeasible".into()));
    }
    for i in 0..m {
        if t[(i, n)] < 0.0 {
            t[(i, n)] = 0.0;
        }
    }
    let mut basis = basis;
    // reduced costs r_j = c_j - c_B . T_j, and the objective in r[n]
    let mut r = DVector::<f64>::zeros(n + 1);
    for j in 0..=n {
        let cb: f64 = (0..m).map(|i| c[basis[i]] * t[(i, j)]).sum();
        r[j] = if j < n { c[j] - cb } else { -cb };
    }

    let cap = 50 * (m + n) + 1000;
    let mut bland = false;
    let mut best = f64::INFINITY;
    let mut stall = 0usize;
    let mut iterations = 0usize;
    loop {
        if iterations >= cap {
            return Err(Error::Numerical(format!(
                "simplex did not converge in {cap} pivots"
            )));
        }
        let scale = 1.0 + r.iter().take(n).map(|v| v.abs()).fold(0.0, f64::max);
        let entering = if bland {
            (0..n).find(|&j| r[j] < -PIVOT_TOL * scale)
        } else {
            (0..n)
                .filter(|&j| r[j] < -PIVOT_TOL * scale)
                .min_by(|&p, &q| r[p].total_cmp(&r[q]).then(p.cmp(&q)))
        };
        let Some(j) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[(i, j)];
            if aij > PIVOT_TOL {
                let ratio = t[(i, n)] / aij;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((p, _)) = leave else {
            return Err(Error::Numerical("linear program is unbounded".into()));
        };
        let piv = t[(p, j)];
        for k in 0..=n {
            t[(p, k)] /= piv;
        }
        let prow = t.row(p).into_owned();
        for i in 0..m {
            if i != p {
                let f = t[(i, j)];
                if f != 0.0 {
                    for k in 0..=n {
                        t[(i, k)] -= f * prow[k];
                    }
                }
            }
        }
        let f = r[j];
        for k in 0..=n {
            r[k] -= f * prow[k];
        }
        basis[p] = j;
        iterations += 1;

        let obj = -r[n];
        if obj < best - 1e-14 * (1.0 + best.abs()) {
            best = obj;
            stall = 0;
        } else {
            stall += 1;
            if stall > 2 * m + 10 {
                bland = true;
            }
        }
    }
    let mut x = vec![0.0; n];
    for (i, &j) in basis.iter().enumerate() {
        x[j] = t[(i, n)].max(0.0);
    }
    let objective = x.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        x,
        objective,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 1.0, 0.0, 3.0, 1.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![4.0, 6.0]);
        let c = DVector::from_vec(vec![-1.0, -1.0, 0.0, 0.0]);
        let s = simplex(&a, &b, &c, vec![2, 3]).unwrap();
        assert!((s.x[0] - 1.6).abs() < 1e-12 && (s.x[1] - 1.2).abs() < 1e-12);
        assert!((s.objective + 2.8).abs() < 1e-12);
    }

    #[test]
    fn detects_unbounded() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let b = DVector::from_vec(vec![1.0]);
        let c = DVector::from_vec(vec![0.0, -1.0]);
        assert!(simplex(&a, &b, &c, vec![0]).is_err());
    }

    #[test]
    fn degenerate_program_terminates() {
        // Beale's cycling example in equality form
        let a = DMatrix::from_row_slice(
            3,
            7,
            &[
                0.25, -8.0, -1.0, 9.0, 1.0, 0.0, 0.0, //
                0.5, -12.0, -0.5, 3.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0,
            ],
        );
        let b = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let c = DVector::from_vec(vec![-0.75, 20.0, -0.5, 6.0, 0.0, 0.0, 0.0]);
        let s = simplex(&a, &b, &c, vec![4, 5, 6]).unwrap();
        assert!((s.objective + 1.25).abs() < 1e-12);
    }
}
