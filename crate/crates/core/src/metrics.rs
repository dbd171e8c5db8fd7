//! Trace distance, fidelity and the measurement-based distances.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockVector, C64, DEFAULT_H_TOL};

/// Eigenvalues below `-CLIP_TOL` are an error for square roots; those in
/// `[-CLIP_TOL, 0)` are set to zero.
pub const CLIP_TOL: f64 = 1e-10;

/// Hermitian eigendecomposition with eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<C64>,
    pub residual: f64,
}

impl SpectralDecomp {
    /// Decomposes `(a + a^dagger)/2`.
    pub fn new(a: &DMatrix<C64>) -> Self {
        let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
        let eig = h.clone().symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[j]
                .total_cmp(&eig.eigenvalues[i])
                .then(i.cmp(&j))
        });
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = DMatrix::<C64>::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            eigenvectors.set_column(k, &eig.eigenvectors.column(i));
        }
        let lam = DMatrix::from_diagonal(&eigenvalues.map(|l| C64::new(l, 0.0)));
        let residual = (&eigenvectors * lam * eigenvectors.adjoint() - h)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        Self {
            eigenvalues,
            eigenvectors,
            residual,
        }
    }

    /// Projector onto the span of eigenvectors with positive eigenvalue.
    pub fn positive_projector(&self) -> DMatrix<C64> {
        let n = self.eigenvalues.len();
        let mut p = DMatrix::<C64>::zeros(n, n);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if l > 0.0 {
                let u = self.eigenvectors.column(k);
                p += u * u.adjoint();
            }
        }
        p
    }
}

fn check_pair(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    rho.trunc().check_same(sigma.trunc())?;
    rho.check_hermitian(DEFAULT_H_TOL)?;
    sigma.check_hermitian(DEFAULT_H_TOL)
}

/// Sum of absolute eigenvalues of the Hermitian part of `a`.
pub fn trace_norm_hermitian(a: &DMatrix<C64>) -> f64 {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().map(|l| l.abs()).sum()
}

/// `D = ||rho - sigma||_1 / 2`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    Ok(0.5 * trace_norm_hermitian(&(rho.mat() - sigma.mat())))
}

/// Trace norm of `sum_k p_k |x_k><x_k| - sum_k q_k |y_k><y_k|` through a
/// thin QR of the factor columns, so the eigenproblem has the size of the
/// combined rank rather than the basis dimension.
pub fn trace_norm_factored(
    pos: &[(f64, DVector<C64>)],
    neg: &[(f64, DVector<C64>)],
) -> Result<f64> {
    let r = pos.len() + neg.len();
    if r == 0 {
        return Ok(0.0);
    }
    let d = pos
        .first()
        .or(neg.first())
        .map(|(_, v)| v.len())
        .unwrap_or(0);
    if pos
        .iter()
        .chain(neg)
        .any(|(w, v)| v.len() != d || !(*w >= 0.0))
    {
        return Err(Error::shape(
            "factors must share a dimension and carry non-negative weights",
        ));
    }
    if r >= d {
        let mut m = DMatrix::<C64>::zeros(d, d);
        for (w, v) in pos {
            m += v * v.adjoint() * C64::new(*w, 0.0);
        }
        for (w, v) in neg {
            m -= v * v.adjoint() * C64::new(*w, 0.0);
        }
        return Ok(trace_norm_hermitian(&m));
    }
    let mut a = DMatrix::<C64>::zeros(d, r);
    for (k, (w, v)) in pos.iter().chain(neg).enumerate() {
        a.set_column(k, &(v * C64::new(w.sqrt(), 0.0)));
    }
    let rr = a.qr().r();
    let mut j = DMatrix::<C64>::identity(r, r);
    for k in pos.len()..r {
        j[(k, k)] = C64::new(-1.0, 0.0);
    }
    Ok(trace_norm_hermitian(&(&rr * j * rr.adjoint())))
}

/// Trace distance between a pure state and a finite mixture of vectors.
pub fn trace_distance_pure_mixture(
    psi: &FockVector,
    mixture: &[(f64, DVector<C64>)],
) -> Result<f64> {
    if mixture.iter().any(|(_, v)| v.len() != psi.amps().len()) {
        return Err(Error::shape(format!(
            "mixture vectors do not match dimension {}",
            psi.amps().len()
        )));
    }
    Ok(0.5 * trace_norm_factored(&[(1.0, psi.amps().clone())], mixture)?)
}

/// Trace norm of `z z^dagger - diag(lambda)` with `lambda >= 0`.
///
/// The rank-one positive update of a negative semidefinite matrix has at
/// most one positive eigenvalue `mu`, the root of
/// `sum_i |z_i|^2 / (mu + lambda_i) = 1`, so the norm is `2 mu - trace`.
pub fn trace_norm_rank_one_update(z_sqr: &[f64], lambda: &[f64]) -> f64 {
    let lam: Vec<f64> = lambda.iter().map(|l| l.max(0.0)).collect();
    let zz: f64 = z_sqr.iter().sum();
    let trace = zz - lam.iter().sum::<f64>();
    let g = |mu: f64| -> f64 {
        z_sqr
            .iter()
            .zip(&lam)
            .map(|(z, l)| if *z == 0.0 { 0.0 } else { z / (mu + l) })
            .sum::<f64>()
    };
    // g decreases from g(0+) to at most 1 at mu = |z|^2
    let has_kernel = z_sqr.iter().zip(&lam).any(|(z, l)| *z > 0.0 && *l == 0.0);
    let mu = if zz == 0.0 || (!has_kernel && g(0.0) <= 1.0) {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, zz);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (2.0 * mu - trace).max(trace.abs())
}

/// Square root of a positive semidefinite matrix; small negative
/// eigenvalues are clipped.
pub fn sqrt_psd(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let s = SpectralDecomp::new(a);
    let min = s.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -CLIP_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    let root = DMatrix::from_diagonal(&s.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)));
    Ok(&s.eigenvectors * root * s.eigenvectors.adjoint())
}

/// `F = Tr sqrt(sqrt(rho) sigma sqrt(rho))`, computed as the sum of singular
/// values of `sqrt(rho) sqrt(sigma)`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    let prod = sqrt_psd(rho.mat())? * sqrt_psd(sigma.mat())?;
    Ok(prod.singular_values().sum())
}

/// `F = sqrt(<psi|sigma|psi>)` for pure `psi`.
pub fn fidelity_pure(psi: &FockVector, sigma: &DensityMatrix) -> Result<f64> {
    Ok(sigma.expectation(psi)?.max(0.0).sqrt())
}

/// Returns `(1 - F, D, sqrt(1 - F^2))` after checking the chain
/// `1 - F <= D <= sqrt(1 - F^2)` within `1e-9`.
pub fn fuchs_vdg_check(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(f64, f64, f64)> {
    let f = fidelity(rho, sigma)?;
    let d = trace_distance(rho, sigma)?;
    let lower = 1.0 - f;
    let upper = (1.0 - f * f).max(0.0).sqrt();
    if lower > d + 1e-9 || d > upper + 1e-9 {
        return Err(Error::Numerical(format!(
            "fidelity chain violated: {lower} <= {d} <= {upper}"
        )));
    }
    Ok((lower, d, upper))
}

/// Kolmogorov distance of the outcome distributions of the projective
/// measurement onto the columns of `basis`.
pub fn kolmogorov_distance(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    basis: &DMatrix<C64>,
) -> Result<f64> {
    check_pair(rho, sigma)?;
    let d = rho.mat() - sigma.mat();
    Ok(0.5
        * (0..basis.ncols())
            .map(|k| {
                let b = basis.column(k);
                (b.adjoint() * &d * b)[(0, 0)].re.abs()
            })
            .sum::<f64>())
}

/// Kolmogorov distance of the two-outcome measurement `{P, 1 - P}` with `P`
/// the projector onto the positive part of `rho - sigma`. Equals the trace
/// distance for states of equal trace.
pub fn helstrom_saturation(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    let s = SpectralDecomp::new(&(rho.mat() - sigma.mat()));
    let p = s.positive_projector();
    let pr = (&p * rho.mat()).trace().re;
    let ps = (&p * sigma.mat()).trace().re;
    let p_rest = rho.trace() - pr;
    let s_rest = sigma.trace() - ps;
    Ok(0.5 * ((pr - ps).abs() + (p_rest - s_rest).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_amps, outer, CoherentPoint, TruncationSpec};
    use crate::husimi::gamma_n;
    use crate::special::heuristic_cutoff;
    use crate::states::{
        cat_classical_witness, cat_state, number_state, phase_randomized_coherent, CatParams,
        CatWitness,
    };

    fn ring(n: f64, t: &TruncationSpec) -> DensityMatrix {
        phase_randomized_coherent(n).unwrap().realize(t).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let t = TruncationSpec::uniform(1, 40).unwrap();
        let r = ring(2.0, &t);
        assert_eq!(trace_distance(&r, &r).unwrap(), 0.0);
        let zero = outer(&number_state(&[0], &t).unwrap());
        let one = outer(&number_state(&[1], &t).unwrap());
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
        let two = outer(&number_state(&[2], &t).unwrap());
        let d = trace_distance(&r, &two).unwrap();
        assert!((d - (1.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-12);
        assert!((d - 0.7293294335267746).abs() < 1e-12);
    }

    #[test]
    fn diagonal_pairs_use_l1() {
        let t = TruncationSpec::uniform(1, 3).unwrap();
        let a = DensityMatrix::diagonal(t.clone(), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let b = DensityMatrix::diagonal(t, &[0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let t = TruncationSpec::uniform(1, 30).unwrap();
        let r = ring(1.0, &t);
        assert!((fidelity(&r, &r).unwrap() - 1.0).abs() < 1e-9);
        let one = number_state(&[1], &t).unwrap();
        let f = fidelity(&outer(&one), &r).unwrap();
        assert!((f - (-0.5f64).exp()).abs() < 1e-9);
        assert!((fidelity_pure(&one, &r).unwrap() - gamma_n(1).sqrt()).abs() < 1e-15);
        let a0 = outer(&coherent_amps(&CoherentPoint::vacuum(1), &t).unwrap());
        let a1 = outer(&coherent_amps(&CoherentPoint::real(&[1.0]), &t).unwrap());
        assert!((fidelity(&a0, &a1).unwrap() - 0.6065306597126334).abs() < 1e-9);
    }

    #[test]
    fn fuchs_vdg_examples() {
        let t = TruncationSpec::uniform(1, 3).unwrap();
        let zero = outer(&number_state(&[0], &t).unwrap());
        let one = outer(&number_state(&[1], &t).unwrap());
        let (l, d, u) = fuchs_vdg_check(&zero, &zero).unwrap();
        assert!(l.abs() < 1e-9 && d == 0.0 && u < 1e-4);
        let (l, d, u) = fuchs_vdg_check(&zero, &one).unwrap();
        assert!((l - 1.0).abs() < 1e-9 && (d - 1.0).abs() < 1e-12 && (u - 1.0).abs() < 1e-9);

        let p = CatParams::even(1.0).unwrap();
        let tc = TruncationSpec::uniform(1, heuristic_cutoff(1.0)).unwrap();
        let psi = outer(&cat_state(&p, &tc).unwrap());
        let sigma = cat_classical_witness(CatWitness::AtBeta, &p)
            .unwrap()
            .realize(&tc)
            .unwrap();
        let (_, d, _) = fuchs_vdg_check(&psi, &sigma).unwrap();
        assert!((d - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-10);
    }

    #[test]
    fn helstrom_examples() {
        let t = TruncationSpec::uniform(1, 30).unwrap();
        let two = outer(&number_state(&[2], &t).unwrap());
        assert_eq!(helstrom_saturation(&two, &two).unwrap(), 0.0);
        let zero = outer(&number_state(&[0], &t).unwrap());
        assert!((helstrom_saturation(&zero, &two).unwrap() - 1.0).abs() < 1e-12);
        let r = ring(2.0, &t);
        let h = helstrom_saturation(&two, &r).unwrap();
        assert!((h - (1.0 - gamma_n(2))).abs() < 1e-9);
        let id = DMatrix::<C64>::identity(t.dim(), t.dim());
        assert!((kolmogorov_distance(&two, &r, &id).unwrap() - h).abs() < 1e-9);
    }

    #[test]
    fn factored_matches_dense() {
        let t = TruncationSpec::uniform(1, 30).unwrap();
        let p = CatParams::odd(1.4).unwrap();
        let psi = cat_state(&p, &t).unwrap();
        let a = coherent_amps(&CoherentPoint::real(&[1.4]), &t).unwrap();
        let b = coherent_amps(&CoherentPoint::real(&[-1.4]), &t).unwrap();
        let mix = [(0.5, a.amps().clone()), (0.5, b.amps().clone())];
        let fast = trace_distance_pure_mixture(&psi, &mix).unwrap();
        let sigma = cat_classical_witness(CatWitness::AtBeta, &p)
            .unwrap()
            .realize(&t)
            .unwrap();
        let dense = trace_distance(&outer(&psi), &sigma).unwrap();
        assert!((fast - dense).abs() < 1e-12);
        assert!((fast - p.mixture_distance()).abs() < 1e-10);
    }

    #[test]
    fn spectral_order_and_residual() {
        let t = TruncationSpec::uniform(1, 5).unwrap();
        let r = ring(1.5, &TruncationSpec::uniform(1, 30).unwrap());
        let s = SpectralDecomp::new(r.mat());
        for w in s.eigenvalues.as_slice().windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(s.residual <= 1e-9 * t.dim() as f64);
    }

    #[test]
    fn rank_one_update_matches_dense() {
        let lam = [0.4, 0.3, 0.0, 0.2, 0.1];
        let z = [
            C64::new(0.3, 0.1),
            C64::new(-0.5, 0.2),
            C64::new(0.2, 0.0),
            C64::new(0.0, 0.6),
            C64::new(0.1, -0.1),
        ];
        let zv = DVector::from_row_slice(&z);
        let m = &zv * zv.adjoint()
            - DMatrix::from_diagonal(&DVector::from_iterator(
                5,
                lam.iter().map(|l| C64::new(*l, 0.0)),
            ));
        let dense = trace_norm_hermitian(&m);
        let zs: Vec<f64> = z.iter().map(|c| c.norm_sqr()).collect();
        assert!((trace_norm_rank_one_update(&zs, &lam) - dense).abs() < 1e-13);
        // no positive eigenvalue
        let zs = [0.01, 0.0, 0.0, 0.0, 0.0];
        let lam = [0.5, 0.1, 0.1, 0.1, 0.2];
        assert!((trace_norm_rank_one_update(&zs, &lam) - 0.99).abs() < 1e-13);
        let m = DMatrix::from_diagonal(&DVector::from_iterator(
            5,
            zs.iter().zip(&lam).map(|(z, l)| C64::new(z - l, 0.0)),
        ));
        assert!((trace_norm_rank_one_update(&zs, &lam) - trace_norm_hermitian(&m)).abs() < 1e-13);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let m = DMatrix::<C64>::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1e-6, 0.0),
        ]));
        assert!(matches!(sqrt_psd(&m), Err(Error::NotPositive { .. })));
        let m = DMatrix::<C64>::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1e-12, 0.0),
        ]));
        assert!(sqrt_psd(&m).is_ok());
    }
}
