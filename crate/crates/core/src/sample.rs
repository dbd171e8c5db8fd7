//! Seeded random states and unitaries for property checks.

use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{DensityMatrix, FockVector, TruncationSpec, C64};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (core::f64::consts::TAU * v).cos()
}

fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(gauss(rng), gauss(rng)))
}

/// Random state of rank `rank` supported on the basis indices accepted by `keep`.
pub fn random_density_on(
    trunc: &TruncationSpec,
    seed: u64,
    rank: usize,
    keep: impl Fn(usize) -> bool,
) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = trunc.dim();
    let mut g = ginibre(&mut rng, d, rank.max(1));
    for i in 0..d {
        if !keep(i) {
            g.row_mut(i).fill(C64::new(0.0, 0.0));
        }
    }
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_parts(trunc.clone(), m / C64::new(tr, 0.0))
        .expect("normalized Gram matrix is a state")
}

/// Random state whose rank is drawn from the seed.
pub fn random_density(trunc: &TruncationSpec, seed: u64) -> DensityMatrix {
    let rank = 1 + (seed % trunc.dim() as u64) as usize;
    random_density_on(trunc, seed, rank, |_| true)
}

pub fn random_pure(trunc: &TruncationSpec, seed: u64) -> FockVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DVector::from_fn(trunc.dim(), |_, _| {
        C64::new(gauss(&mut rng), gauss(&mut rng))
    });
    FockVector::from_amplitudes(trunc.clone(), v.normalize()).expect("normalized vector")
}

/// Haar-random unitary.
pub fn random_unitary(n: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qr = ginibre(&mut rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution is Haar
    let phases = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    }));
    q * phases
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_valid_and_reproducible() {
        let t = TruncationSpec::uniform(2, 2).unwrap();
        let a = random_density(&t, 7);
        assert!((a.trace() - 1.0).abs() < 1e-12);
        assert_eq!(a.mat(), random_density(&t, 7).mat());
        let u = random_unitary(4, 3);
        assert!((&u * u.adjoint() - DMatrix::<C64>::identity(4, 4)).norm() < 1e-12);
        assert!((random_pure(&t, 1).norm_sqr() - 1.0).abs() < 1e-12);
    }
}
