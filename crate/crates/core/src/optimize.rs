//! Small dense optimizers: Nelder–Mead simplex search and an eigen-filtered
//! Newton polish driven by an exact gradient.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_evals: usize,
    pub initial_step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            initial_step: 0.3,
            f_tol: 1e-15,
            x_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
}

impl NelderMead {
    /// Minimizes `f` from `x0`. The returned value is never above `f(x0)`.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        vals.push(eval(x0, &mut evals));
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += self.initial_step;
            vals.push(eval(&p, &mut evals));
            pts.push(p);
        }
        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let spread = vals[n] - vals[0];
            let size = pts[1..]
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&pts[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread <= self.f_tol * (1.0 + vals[0].abs()) && size <= self.x_tol {
                break;
            }

            let mut centroid = vec![0.0; n];
            for p in &pts[..n] {
                for (c, x) in centroid.iter_mut().zip(p) {
                    *c += x / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&pts[n])
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let xr = along(-alpha);
            let fr = eval(&xr, &mut evals);
            if fr < vals[0] {
                let xe = along(-gamma);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < vals[n] {
                let xc = along(-rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            let best = pts[0].clone();
            for i in 1..=n {
                let p: Vec<f64> = best
                    .iter()
                    .zip(&pts[i])
                    .map(|(b, x)| b + sigma * (x - b))
                    .collect();
                vals[i] = eval(&p, &mut evals);
                pts[i] = p;
            }
        }
        let best = (0..=n)
            .min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)))
            .unwrap_or(0);
        Minimum {
            x: pts[best].clone(),
            f: vals[best],
            evals,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton iterations towards a local maximum of `f` using its exact
/// gradient and a central-difference Hessian. Directions of non-negative or
/// negligible curvature (flat rings of maximizers) are left untouched.
/// Returns the point with the smallest gradient norm among those at least
/// as high as the start, and that norm.
pub fn newton_polish_max<F, G>(f: F, grad: G, x0: &[f64], iters: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let f0 = f(x0);
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut g = grad(&x);
    let mut gn = norm(&g);
    let h = 1e-6;
    // values within a few ulps of the start count as no loss
    let floor = 8.0 * f64::EPSILON * f0.abs();
    for _ in 0..iters {
        if gn <= 1e-15 {
            break;
        }
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let gp = grad(&xp);
            let gm = grad(&xm);
            for i in 0..n {
                hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let eig = hess.symmetric_eigen();
        let scale = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        let gv = DVector::from_column_slice(&g);
        let mut step = DVector::<f64>::zeros(n);
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam < -1e-8 * scale.max(1e-300) {
                let u = eig.eigenvectors.column(k);
                step -= u * (u.dot(&gv) / lam);
            }
        }
        if !step.iter().all(|s| s.is_finite()) || step.norm() == 0.0 {
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let fn_ = f(&xn);
            let gnext = grad(&xn);
            let gnn = norm(&gnext);
            if fn_ >= f0 - floor && (gnn < gn || fn_ > fx) {
                x = xn;
                fx = fn_;
                g = gnext;
                gn = gnn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, gn)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let nm = NelderMead {
            max_evals: 5000,
            ..Default::default()
        };
        let m = nm.minimize(f, &[-1.2, 1.0]);
        assert!(
            (m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5,
            "{:?}",
            m.x
        );
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| (x[0] * 3.0).sin() + x[1] * x[1];
        let x0 = [0.4, -0.2];
        let m = NelderMead::default().minimize(f, &x0);
        assert!(m.f <= f(&x0));
        assert!(m.evals <= 2000 + 4);
    }

    #[test]
    fn polish_reaches_tiny_gradient() {
        let f = |x: &[f64]| (-(x[0] - 0.3).powi(2) - 2.0 * (x[1] + 0.1).powi(2)).exp();
        let g = |x: &[f64]| {
            let v = f(x);
            vec![-2.0 * (x[0] - 0.3) * v, -4.0 * (x[1] + 0.1) * v]
        };
        let (x, gn) = newton_polish_max(f, g, &[0.31, -0.09], 20);
        assert!(gn < 1e-12);
        assert!((x[0] - 0.3).abs() < 1e-12 && (x[1] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn polish_leaves_flat_direction() {
        // maximum on the unit circle
        let f = |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            r2 * (-r2).exp()
        };
        let g = |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let d = (1.0 - r2) * (-r2).exp() * 2.0;
            vec![d * x[0], d * x[1]]
        };
        let (x, gn) = newton_polish_max(f, g, &[0.7, 0.75], 30);
        assert!(gn < 1e-12);
        assert!((x[0] * x[0] + x[1] * x[1] - 1.0).abs() < 1e-12);
    }
}
