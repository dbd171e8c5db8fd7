//! Channels that map classical states to classical states: affine optics
//! (passive unitary plus displacement), number dephasing, adjoining a
//! classical ancilla and discarding modes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{
    check_unitary, displacement, partial_trace, passive_unitary, sufficient_cutoffs, tensor,
    CoherentPoint, DensityMatrix, FockOperator, FockVector, TruncationSpec, C64,
};
use crate::states::{ClassicalComponent, ClassicalEnsemble, ClassicalKind};

/// `b = U a + gamma`: coherent states map as `|alpha> -> |U alpha + gamma>`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineOptics {
    u: DMatrix<C64>,
    gamma: Vec<C64>,
}

impl AffineOptics {
    pub fn new(u: DMatrix<C64>, gamma: Vec<C64>) -> Result<Self> {
        check_unitary(&u, 1e-12)?;
        if gamma.len() != u.nrows() {
            return Err(Error::shape(format!(
                "{} displacements for a {}-mode unitary",
                gamma.len(),
                u.nrows()
            )));
        }
        CoherentPoint::new(gamma.clone())?;
        Ok(Self { u, gamma })
    }

    pub fn passive(u: DMatrix<C64>) -> Result<Self> {
        let n = u.nrows();
        Self::new(u, vec![C64::zero(); n])
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            u: DMatrix::identity(modes, modes),
            gamma: vec![C64::zero(); modes],
        }
    }

    pub fn modes(&self) -> usize {
        self.gamma.len()
    }

    pub fn unitary(&self) -> &DMatrix<C64> {
        &self.u
    }

    pub fn gamma(&self) -> &[C64] {
        &self.gamma
    }

    pub fn map_point(&self, alpha: &CoherentPoint) -> Result<CoherentPoint> {
        if alpha.modes() != self.modes() {
            return Err(Error::shape("point has the wrong number of modes"));
        }
        let a = nalgebra::DVector::from_column_slice(alpha.amplitudes());
        let b = &self.u * a;
        Ok(CoherentPoint(
            b.iter().zip(&self.gamma).map(|(x, g)| x + g).collect(),
        ))
    }

    /// Image of a classical ensemble. Coherent components always map to
    /// coherent components; a ring maps to a ring when the images of its
    /// groups have disjoint supports that avoid the displaced modes.
    pub fn map_ensemble(&self, sigma: &ClassicalEnsemble) -> Result<ClassicalEnsemble> {
        let mut comps = Vec::with_capacity(sigma.components().len());
        for c in sigma.components() {
            let kind = match &c.kind {
                ClassicalKind::Coherent(a) => ClassicalKind::Coherent(self.map_point(a)?),
                ClassicalKind::PhaseRing { center, groups } => self.map_ring(center, groups)?,
            };
            comps.push(ClassicalComponent {
                weight: c.weight,
                kind,
            });
        }
        ClassicalEnsemble::new(comps)
    }

    fn map_ring(&self, center: &CoherentPoint, groups: &[Vec<usize>]) -> Result<ClassicalKind> {
        let modes = self.modes();
        let scale = center.energy().sqrt().max(1.0);
        let support = |part: &[usize]| -> Vec<usize> {
            (0..modes)
                .filter(|&r| {
                    part.iter()
                        .map(|&m| self.u[(r, m)] * center.0[m])
                        .sum::<C64>()
                        .norm()
                        > 1e-14 * scale
                })
                .collect()
        };
        let fixed: Vec<usize> = (0..modes)
            .filter(|m| !groups.iter().any(|g| g.contains(m)))
            .collect();
        let mut taken: Vec<usize> = support(&fixed);
        taken.extend((0..modes).filter(|&m| self.gamma[m] != C64::zero()));
        let mut new_groups = Vec::new();
        for g in groups {
            let s = support(g);
            if s.iter().any(|m| taken.contains(m)) {
                return Err(Error::param(
                    "ring image is not a ring of the supported family",
                ));
            }
            taken.extend(&s);
            if !s.is_empty() {
                new_groups.push(s);
            }
        }
        let mut c = self.map_point(center)?;
        // exact zeros outside the supports
        for m in 0..modes {
            if !taken.contains(&m) {
                c.0[m] = C64::zero();
            }
        }
        Ok(if new_groups.is_empty() {
            ClassicalKind::Coherent(c)
        } else {
            ClassicalKind::PhaseRing {
                center: c,
                groups: new_groups,
            }
        })
    }

    fn check_trunc(&self, trunc: &TruncationSpec) -> Result<()> {
        if trunc.modes() != self.modes() {
            return Err(Error::shape(format!(
                "{}-mode transformation on a {}-mode truncation",
                self.modes(),
                trunc.modes()
            )));
        }
        Ok(())
    }

    fn required_cutoffs(&self, trunc: &TruncationSpec, support_total: usize) -> Vec<usize> {
        let g = sufficient_cutoffs(&CoherentPoint(self.gamma.clone()), trunc.tail_tol());
        trunc
            .cutoffs()
            .iter()
            .zip(g)
            .map(|(&c, gc)| c.max(support_total + gc))
            .collect()
    }
}

/// Output of an affine-optics transformation with the probability mass the
/// truncation lost.
#[derive(Clone, Debug)]
pub struct AffineOutput {
    pub rho: DensityMatrix,
    pub leakage: f64,
}

fn max_support_total(rho: &DensityMatrix) -> usize {
    let t = rho.trunc();
    (0..t.dim())
        .filter(|&i| rho.mat()[(i, i)].re != 0.0)
        .map(|i| t.total_photons(i))
        .max()
        .unwrap_or(0)
}

/// `D(gamma) V(U) rho V(U)^dagger D(gamma)^dagger` on the truncated space.
/// The trace lost to the truncation must stay within `10 tail_tol`.
pub fn apply_affine_with_leakage(t: &AffineOptics, rho: &DensityMatrix) -> Result<AffineOutput> {
    let trunc = rho.trunc();
    t.check_trunc(trunc)?;
    let mut out = passive_unitary(&t.u, trunc)?.conjugate(rho)?;
    if t.gamma.iter().any(|g| *g != C64::zero()) {
        out = displacement(&t.gamma, trunc)?.conjugate(&out)?;
    }
    let leakage = (rho.trace() - out.trace()).max(0.0);
    if leakage > 10.0 * trunc.tail_tol() {
        return Err(Error::TruncationTooSmall {
            tail: leakage,
            tol: 10.0 * trunc.tail_tol(),
            required: t.required_cutoffs(trunc, max_support_total(rho)),
        });
    }
    Ok(AffineOutput { rho: out, leakage })
}

pub fn apply_affine(t: &AffineOptics, rho: &DensityMatrix) -> Result<DensityMatrix> {
    Ok(apply_affine_with_leakage(t, rho)?.rho)
}

/// Pure-state path of [`apply_affine`].
pub fn apply_affine_pure(t: &AffineOptics, psi: &FockVector) -> Result<FockVector> {
    let trunc = psi.trunc();
    t.check_trunc(trunc)?;
    let mut out = passive_unitary(&t.u, trunc)?.apply_state(psi)?;
    if t.gamma.iter().any(|g| *g != C64::zero()) {
        out = displacement(&t.gamma, trunc)?.apply_state(&out)?;
    }
    let leakage = (psi.norm_sqr() - out.norm_sqr()).max(0.0);
    if leakage > 10.0 * trunc.tail_tol() {
        let support = (0..trunc.dim())
            .filter(|&i| psi.amps()[i] != C64::zero())
            .map(|i| trunc.total_photons(i))
            .max()
            .unwrap_or(0);
        return Err(Error::TruncationTooSmall {
            tail: leakage,
            tol: 10.0 * trunc.tail_tol(),
            required: t.required_cutoffs(trunc, support),
        });
    }
    Ok(out)
}

/// Keeps only the diagonal in the multi-mode number basis: a number
/// measurement, or independent uniform phase shifts on every mode.
pub fn dephase_number(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.trunc().dim();
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(rho.mat()[(i, i)].re, 0.0)
        } else {
            C64::zero()
        }
    });
    DensityMatrix::from_parts(rho.trunc().clone(), diag).expect("diagonal of a valid state")
}

/// Image of a classical ensemble under [`dephase_number`]: every component
/// becomes a product of single-mode rings.
pub fn dephase_ensemble(sigma: &ClassicalEnsemble) -> Result<ClassicalEnsemble> {
    let modes = sigma.modes();
    ClassicalEnsemble::new(
        sigma
            .components()
            .iter()
            .map(|c| ClassicalComponent {
                weight: c.weight,
                kind: ClassicalKind::PhaseRing {
                    center: c.kind.center().clone(),
                    groups: (0..modes).map(|m| vec![m]).collect(),
                },
            })
            .collect(),
    )
}

/// `rho (x) sigma`, with `sigma` realized at `sigma_trunc`.
pub fn adjoin(
    rho: &DensityMatrix,
    sigma: &ClassicalEnsemble,
    sigma_trunc: &TruncationSpec,
) -> Result<DensityMatrix> {
    tensor(rho, &sigma.realize(sigma_trunc)?)
}

/// A channel acting on density matrices.
pub trait Channel {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix>;
}

impl Channel for AffineOptics {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply_affine(self, rho)
    }
}

/// [`dephase_number`] as a channel.
#[derive(Clone, Copy, Debug, Default)]
pub struct NumberDephasing;

impl Channel for NumberDephasing {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(dephase_number(rho))
    }
}

/// [`adjoin`] as a channel.
#[derive(Clone, Debug)]
pub struct Adjoin {
    pub sigma: ClassicalEnsemble,
    pub trunc: TruncationSpec,
}

impl Channel for Adjoin {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        adjoin(rho, &self.sigma, &self.trunc)
    }
}

/// Discards every mode not in `keep`.
#[derive(Clone, Debug)]
pub struct Discard {
    pub keep: Vec<usize>,
}

impl Channel for Discard {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        partial_trace(rho, &self.keep)
    }
}
