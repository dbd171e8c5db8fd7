//! Truncated multimode Fock space.
//!
//! Basis states are product number states `|n_1, ..., n_M>` with
//! `0 <= n_m <= N_m`. They are flattened row-major with mode 0 varying
//! slowest, so `(n_1, n_2)` sits at `n_1 * (N_2 + 1) + n_2`. Every dump of
//! amplitudes or matrices uses this order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::special::{min_cutoff_for_tail, poisson_upper_tail};

pub type C64 = Complex64;

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
pub const DEFAULT_H_TOL: f64 = 1e-10;
pub const DEFAULT_DIM_CAP: usize = 4_000_000;

/// Per-mode photon cutoffs plus the admissible neglected probability mass.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationSpec {
    cutoffs: Vec<usize>,
    tail_tol: f64,
    strides: Vec<usize>,
    dim: usize,
}

impl TruncationSpec {
    pub fn new(cutoffs: Vec<usize>, tail_tol: f64) -> Result<Self> {
        Self::with_cap(cutoffs, tail_tol, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(cutoffs: Vec<usize>, tail_tol: f64, cap: usize) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidTruncation("no modes".into()));
        }
        if let Some(m) = cutoffs.iter().position(|&n| n < 1) {
            return Err(Error::InvalidTruncation(format!("mode {m} has cutoff 0")));
        }
        if !(0.0..1.0).contains(&tail_tol) {
            return Err(Error::InvalidTruncation(format!(
                "tail_tol {tail_tol} outside [0, 1)"
            )));
        }
        let mut dim: u128 = 1;
        for &n in &cutoffs {
            dim = dim.saturating_mul(n as u128 + 1);
        }
        if dim > cap as u128 {
            return Err(Error::DimensionTooLarge { dim, cap });
        }
        let mut strides = vec![1usize; cutoffs.len()];
        for m in (0..cutoffs.len() - 1).rev() {
            strides[m] = strides[m + 1] * (cutoffs[m + 1] + 1);
        }
        Ok(Self {
            cutoffs,
            tail_tol,
            strides,
            dim: dim as usize,
        })
    }

    /// Same cutoff in every mode with the default tail tolerance.
    pub fn uniform(modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff; modes], DEFAULT_TAIL_TOL)
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_tail_tol(&self, tail_tol: f64) -> Result<Self> {
        Self::new(self.cutoffs.clone(), tail_tol)
    }

    pub fn contains(&self, ns: &[usize]) -> bool {
        ns.len() == self.modes() && ns.iter().zip(&self.cutoffs).all(|(n, c)| n <= c)
    }

    /// Flat index of a multi-index; errors when an occupation exceeds its cutoff.
    pub fn index(&self, ns: &[usize]) -> Result<usize> {
        if ns.len() != self.modes() {
            return Err(Error::shape(format!(
                "multi-index has {} modes, truncation has {}",
                ns.len(),
                self.modes()
            )));
        }
        let mut idx = 0;
        for (m, (&n, &cut)) in ns.iter().zip(&self.cutoffs).enumerate() {
            if n > cut {
                return Err(Error::CutoffExceeded {
                    mode: m,
                    n,
                    cutoff: cut,
                });
            }
            idx += n * self.strides[m];
        }
        Ok(idx)
    }

    pub fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx / self.strides[mode]) % (self.cutoffs[mode] + 1)
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        (0..self.modes()).map(|m| self.occupation(idx, m)).collect()
    }

    pub fn total_photons(&self, idx: usize) -> usize {
        (0..self.modes()).map(|m| self.occupation(idx, m)).sum()
    }

    pub fn max_total_photons(&self) -> usize {
        self.cutoffs.iter().sum()
    }

    /// Truncation of the composite system `self ⊗ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        Self::new(cutoffs, self.tail_tol.max(other.tail_tol))
    }

    /// Truncation restricted to the given (sorted, distinct) modes.
    pub fn select(&self, modes: &[usize]) -> Result<Self> {
        check_mode_set(modes, self.modes())?;
        Self::new(
            modes.iter().map(|&m| self.cutoffs[m]).collect(),
            self.tail_tol,
        )
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.cutoffs == other.cutoffs
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::shape(format!(
                "cutoffs {:?} vs {:?}",
                self.cutoffs, other.cutoffs
            )))
        }
    }
}

fn check_mode_set(modes: &[usize], total: usize) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::InvalidModes("empty mode set".into()));
    }
    for w in modes.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidModes(format!(
                "modes must be sorted and distinct: {modes:?}"
            )));
        }
    }
    if modes[modes.len() - 1] >= total {
        return Err(Error::InvalidModes(format!(
            "mode {} out of range for {total} modes",
            modes[modes.len() - 1]
        )));
    }
    Ok(())
}

/// A point of multimode phase space, one complex amplitude per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentPoint(pub Vec<C64>);

impl CoherentPoint {
    pub fn new(alpha: Vec<C64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::param("coherent point with no modes"));
        }
        if alpha.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::param("non-finite coherent amplitude"));
        }
        Ok(Self(alpha))
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(vec![C64::zero(); modes])
    }

    pub fn real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    /// Mean photon number `|alpha|^2`.
    pub fn energy(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Pure state over the truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    trunc: TruncationSpec,
    amps: DVector<C64>,
    norm_defect: f64,
}

impl FockVector {
    /// Wraps raw amplitudes; `norm_defect` is `|1 - sum |amps|^2|`.
    pub fn from_amplitudes(trunc: TruncationSpec, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != trunc.dim() {
            return Err(Error::shape(format!(
                "{} amplitudes for dimension {}",
                amps.len(),
                trunc.dim()
            )));
        }
        let norm_defect = (1.0 - amps.norm_squared()).abs();
        Ok(Self {
            trunc,
            amps,
            norm_defect,
        })
    }

    pub(crate) fn from_parts(trunc: TruncationSpec, amps: DVector<C64>, norm_defect: f64) -> Self {
        Self {
            trunc,
            amps,
            norm_defect,
        }
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_defect(&self) -> f64 {
        self.norm_defect
    }

    pub fn amp(&self, ns: &[usize]) -> Result<C64> {
        Ok(self.amps[self.trunc.index(ns)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// Errors with `TruncationTooSmall` when the defect exceeds `tail_tol`.
    pub fn certify(self, required: Vec<usize>) -> Result<Self> {
        if self.norm_defect > self.trunc.tail_tol() {
            return Err(Error::TruncationTooSmall {
                tail: self.norm_defect,
                tol: self.trunc.tail_tol(),
                required,
            });
        }
        Ok(self)
    }
}

/// Density operator over the truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    trunc: TruncationSpec,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian within `h_tol`, eigenvalues at least
    /// `-h_tol`, trace within `tail_tol` of one.
    pub fn new(trunc: TruncationSpec, mat: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_parts(trunc, mat)?;
        rho.check_hermitian(DEFAULT_H_TOL)?;
        let tr = rho.trace();
        if (1.0 - tr).abs() > rho.trunc.tail_tol().max(DEFAULT_H_TOL) {
            return Err(Error::param(format!("trace {tr} differs from one")));
        }
        let min = rho.hermitian_part().symmetric_eigenvalues().min();
        if min < -DEFAULT_H_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(rho)
    }

    /// Shape-checked constructor without spectral validation.
    pub fn from_parts(trunc: TruncationSpec, mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != trunc.dim() || mat.ncols() != trunc.dim() {
            return Err(Error::shape(format!(
                "{}x{} matrix for dimension {}",
                mat.nrows(),
                mat.ncols(),
                trunc.dim()
            )));
        }
        Ok(Self { trunc, mat })
    }

    pub fn diagonal(trunc: TruncationSpec, diag: &[f64]) -> Result<Self> {
        if diag.len() != trunc.dim() {
            return Err(Error::shape("diagonal length"));
        }
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self::from_parts(trunc, DMatrix::from_diagonal(&d))
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn mat(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_mat(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.mat.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn check_hermitian(&self, h_tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > h_tol {
            Err(Error::NotHermitian { defect })
        } else {
            Ok(())
        }
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0)
    }

    /// Largest off-diagonal magnitude in the number basis.
    pub fn off_diagonal_defect(&self) -> f64 {
        let n = self.mat.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    worst = worst.max(self.mat[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        self.mat.diagonal().iter().map(|z| z.re).collect()
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, psi: &FockVector) -> Result<f64> {
        self.trunc.check_same(psi.trunc())?;
        Ok(psi.amps().dotc(&(&self.mat * psi.amps())).re)
    }
}

/// Pure or mixed state; pure states keep their amplitude vector so the
/// low-rank fast paths can use it.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(FockVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn trunc(&self) -> &TruncationSpec {
        match self {
            State::Pure(psi) => psi.trunc(),
            State::Mixed(rho) => rho.trunc(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            State::Pure(psi) => outer(psi),
            State::Mixed(rho) => rho.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&FockVector> {
        match self {
            State::Pure(psi) => Some(psi),
            State::Mixed(_) => None,
        }
    }
}

/// Per-mode truncated coherent amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)`.
pub(crate) fn coherent_mode_amps(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    out.push(c);
    for n in 1..=cutoff {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Product of per-mode factors laid out in the flat basis order.
pub(crate) fn product_vector(trunc: &TruncationSpec, factors: &[Vec<C64>]) -> DVector<C64> {
    let mut v = vec![C64::new(1.0, 0.0)];
    for f in factors {
        let mut next = Vec::with_capacity(v.len() * f.len());
        for a in &v {
            for b in f {
                next.push(a * b);
            }
        }
        v = next;
    }
    debug_assert_eq!(v.len(), trunc.dim());
    DVector::from_vec(v)
}

/// Truncated coherent vector with no tail check; exact inside the truncation.
pub(crate) fn coherent_raw(alpha: &CoherentPoint, trunc: &TruncationSpec) -> DVector<C64> {
    let factors: Vec<Vec<C64>> = alpha
        .0
        .iter()
        .zip(trunc.cutoffs())
        .map(|(&a, &cut)| coherent_mode_amps(a, cut))
        .collect();
    product_vector(trunc, &factors)
}

/// Neglected mass of `|alpha>` under the truncation: `1 - prod_m (1 - tail_m)`.
pub fn coherent_tail(alpha: &CoherentPoint, trunc: &TruncationSpec) -> f64 {
    let log_kept: f64 = alpha
        .0
        .iter()
        .zip(trunc.cutoffs())
        .map(|(a, &cut)| (-poisson_upper_tail(a.norm_sqr(), cut)).ln_1p())
        .sum();
    -log_kept.exp_m1()
}

/// Per-mode cutoffs sufficient to hold `|alpha>` within `tol`.
pub fn sufficient_cutoffs(alpha: &CoherentPoint, tol: f64) -> Vec<usize> {
    let share = tol / alpha.modes() as f64;
    alpha
        .0
        .iter()
        .map(|a| min_cutoff_for_tail(a.norm_sqr(), share).max(1))
        .collect()
}

/// Multimode coherent state `|alpha>` expanded in the truncated basis.
pub fn coherent_amps(alpha: &CoherentPoint, trunc: &TruncationSpec) -> Result<FockVector> {
    if alpha.modes() != trunc.modes() {
        return Err(Error::shape(format!(
            "{}-mode point for {}-mode truncation",
            alpha.modes(),
            trunc.modes()
        )));
    }
    let amps = coherent_raw(alpha, trunc);
    let tail = coherent_tail(alpha, trunc);
    FockVector::from_parts(trunc.clone(), amps, tail)
        .certify(sufficient_cutoffs(alpha, trunc.tail_tol()))
}

/// `<psi|phi>`, conjugate-linear in `psi`.
pub fn overlap(psi: &FockVector, phi: &FockVector) -> Result<C64> {
    psi.trunc().check_same(phi.trunc())?;
    Ok(psi.amps().dotc(phi.amps()))
}

pub fn outer(psi: &FockVector) -> DensityMatrix {
    let a = psi.amps();
    DensityMatrix {
        trunc: psi.trunc().clone(),
        mat: a * a.adjoint(),
    }
}

/// `a ⊗ b`; modes of `a` come first.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let trunc = a.trunc().compose(b.trunc())?;
    Ok(DensityMatrix {
        trunc,
        mat: a.mat().kronecker(b.mat()),
    })
}

pub fn tensor_vectors(a: &FockVector, b: &FockVector) -> Result<FockVector> {
    let trunc = a.trunc().compose(b.trunc())?;
    let amps = a.amps().kronecker(b.amps());
    let defect = (a.norm_defect() + b.norm_defect()).min(1.0);
    Ok(FockVector::from_parts(trunc, amps, defect))
}

/// Traces out every mode not listed in `keep` (sorted, distinct).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let trunc = rho.trunc();
    let kept = trunc.select(keep)?;
    let traced: Vec<usize> = (0..trunc.modes()).filter(|m| !keep.contains(m)).collect();
    if traced.is_empty() {
        return Ok(rho.clone());
    }
    let traced_trunc = trunc.select(&traced)?;
    // group full indices by their traced-out multi-index
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); traced_trunc.dim()];
    for idx in 0..trunc.dim() {
        let mut k = 0;
        for (pos, &m) in keep.iter().enumerate() {
            k += trunc.occupation(idx, m) * kept.strides()[pos];
        }
        let mut t = 0;
        for (pos, &m) in traced.iter().enumerate() {
            t += trunc.occupation(idx, m) * traced_trunc.strides()[pos];
        }
        groups[t].push((idx, k));
    }
    let mut out = DMatrix::<C64>::zeros(kept.dim(), kept.dim());
    for g in &groups {
        for &(i, ki) in g {
            for &(j, kj) in g {
                out[(ki, kj)] += rho.mat()[(i, j)];
            }
        }
    }
    Ok(DensityMatrix {
        trunc: kept,
        mat: out,
    })
}

/// Linear operator on the truncated space that can act on vectors and
/// conjugate density matrices.
pub trait FockOperator {
    fn trunc(&self) -> &TruncationSpec;

    fn apply(&self, v: &DVector<C64>) -> DVector<C64>;

    fn apply_state(&self, psi: &FockVector) -> Result<FockVector> {
        self.trunc().check_same(psi.trunc())?;
        let out = self.apply(psi.amps());
        let defect = (1.0 - out.norm_squared()).abs();
        Ok(FockVector::from_parts(psi.trunc().clone(), out, defect))
    }

    /// `O rho O^dagger`.
    fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.trunc().check_same(rho.trunc())?;
        let d = rho.trunc().dim();
        let mut left = DMatrix::<C64>::zeros(d, d);
        for j in 0..d {
            let col = self.apply(&rho.mat().column(j).into_owned());
            left.set_column(j, &col);
        }
        // (O (O rho)^dagger)^dagger = O rho O^dagger
        let left_adj = left.adjoint();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for j in 0..d {
            let col = self.apply(&left_adj.column(j).into_owned());
            out.set_column(j, &col);
        }
        DensityMatrix::from_parts(rho.trunc().clone(), out.adjoint())
    }

    fn to_matrix(&self) -> DMatrix<C64> {
        let d = self.trunc().dim();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for j in 0..d {
            let mut e = DVector::<C64>::zeros(d);
            e[j] = C64::new(1.0, 0.0);
            m.set_column(j, &self.apply(&e));
        }
        m
    }
}

/// One total-photon-number sector of a passive unitary.
#[derive(Clone, Debug)]
struct PhotonBlock {
    indices: Vec<usize>,
    matrix: DMatrix<C64>,
}

/// Passive linear-optics unitary, block diagonal in total photon number.
///
/// Acts on coherent states as `|alpha> -> |U alpha>`: each creation
/// operator maps as `a_m^dagger -> sum_k U[k][m] a_k^dagger`. Blocks whose
/// total photon number exceeds the smallest cutoff are compressions of the
/// infinite-dimensional operator, not unitary.
#[derive(Clone, Debug)]
pub struct PassiveUnitary {
    trunc: TruncationSpec,
    blocks: Vec<PhotonBlock>,
}

pub fn check_unitary(u: &DMatrix<C64>, tol: f64) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::shape("unitary must be square"));
    }
    let n = u.nrows();
    let defect = (u.adjoint() * u - DMatrix::<C64>::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect > tol {
        Err(Error::NotUnitary { defect })
    } else {
        Ok(())
    }
}

/// Two-mode beam splitter of transmissivity `eta`:
/// `b1 = sqrt(eta) a1 - sqrt(1-eta) a2`, `b2 = sqrt(1-eta) a1 + sqrt(eta) a2`,
/// so `|beta>|0> -> |sqrt(eta) beta>|sqrt(1-eta) beta>`.
pub fn beam_splitter(eta: f64) -> Result<DMatrix<C64>> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param(format!("transmissivity {eta} outside [0, 1]")));
    }
    let t = eta.sqrt();
    let r = (1.0 - eta).sqrt();
    Ok(DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(t, 0.0),
            C64::new(-r, 0.0),
            C64::new(r, 0.0),
            C64::new(t, 0.0),
        ],
    ))
}

pub fn passive_unitary(u: &DMatrix<C64>, trunc: &TruncationSpec) -> Result<PassiveUnitary> {
    check_unitary(u, 1e-12)?;
    let modes = trunc.modes();
    if u.nrows() != modes {
        return Err(Error::shape(format!(
            "{}x{} unitary for {modes} modes",
            u.nrows(),
            u.ncols()
        )));
    }
    let mut by_total: Vec<Vec<usize>> = vec![Vec::new(); trunc.max_total_photons() + 1];
    for idx in 0..trunc.dim() {
        by_total[trunc.total_photons(idx)].push(idx);
    }
    let mut blocks = Vec::with_capacity(by_total.len());
    for indices in by_total {
        let pos: BTreeMap<usize, usize> =
            indices.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut matrix = DMatrix::<C64>::zeros(indices.len(), indices.len());
        for (col, &idx) in indices.iter().enumerate() {
            let ns = trunc.multi_index(idx);
            for (ms, amp) in monomial_image(u, &ns) {
                if trunc.contains(&ms) {
                    let row = pos[&trunc.index(&ms)?];
                    matrix[(row, col)] = amp;
                }
            }
        }
        blocks.push(PhotonBlock { indices, matrix });
    }
    Ok(PassiveUnitary {
        trunc: trunc.clone(),
        blocks,
    })
}

/// Image of `|ns>` under the passive map, expanded in normalized number
/// states. Each creation operator is applied with its `1/sqrt(k)` factor so
/// intermediate amplitudes stay of order one.
fn monomial_image(u: &DMatrix<C64>, ns: &[usize]) -> BTreeMap<Vec<usize>, C64> {
    let modes = ns.len();
    let mut state: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
    state.insert(vec![0; modes], C64::new(1.0, 0.0));
    for (m, &n) in ns.iter().enumerate() {
        for k in 1..=n {
            let scale = 1.0 / (k as f64).sqrt();
            let mut next: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
            for (occ, amp) in &state {
                for r in 0..modes {
                    let coef = u[(r, m)];
                    if coef == C64::zero() {
                        continue;
                    }
                    let mut up = occ.clone();
                    up[r] += 1;
                    let factor = coef * ((up[r] as f64).sqrt() * scale);
                    *next.entry(up).or_insert_with(C64::zero) += amp * factor;
                }
            }
            state = next;
        }
    }
    state
}

impl PassiveUnitary {
    /// Largest deviation from unitarity over the blocks that fit entirely
    /// inside the truncation.
    pub fn block_unitarity_defect(&self) -> f64 {
        let full = *self.trunc.cutoffs().iter().min().unwrap_or(&0);
        self.blocks
            .iter()
            .enumerate()
            .filter(|(total, _)| *total <= full)
            .map(|(_, b)| {
                let n = b.matrix.nrows();
                (b.matrix.adjoint() * &b.matrix - DMatrix::<C64>::identity(n, n))
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Matrix element between basis indices; zero across photon-number blocks.
    pub fn element(&self, row: usize, col: usize) -> C64 {
        let total = self.trunc.total_photons(col);
        if self.trunc.total_photons(row) != total {
            return C64::zero();
        }
        let b = &self.blocks[total];
        let r = b.indices.binary_search(&row).expect("row in block");
        let c = b.indices.binary_search(&col).expect("col in block");
        b.matrix[(r, c)]
    }
}

impl FockOperator for PassiveUnitary {
    fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::<C64>::zeros(v.len());
        for b in &self.blocks {
            let x = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| v[i]));
            let y = &b.matrix * x;
            for (p, &i) in b.indices.iter().enumerate() {
                out[i] = y[p];
            }
        }
        out
    }
}

/// Applies a single-mode matrix to one mode of a flat vector.
pub(crate) fn apply_mode_matrix(
    trunc: &TruncationSpec,
    mode: usize,
    a: &DMatrix<C64>,
    v: &DVector<C64>,
) -> DVector<C64> {
    let dm = trunc.cutoffs()[mode] + 1;
    let inner = trunc.strides()[mode];
    let outer_count = v.len() / (dm * inner);
    let mut out = DVector::<C64>::zeros(v.len());
    for o in 0..outer_count {
        let base = o * dm * inner;
        for q in 0..inner {
            for i in 0..dm {
                let mut acc = C64::zero();
                for j in 0..dm {
                    acc += a[(i, j)] * v[base + j * inner + q];
                }
                out[base + i * inner + q] = acc;
            }
        }
    }
    out
}

/// Product of per-mode displacement operators `D(gamma)`, each cropped from
/// an enlarged truncation.
#[derive(Clone, Debug)]
pub struct Displacement {
    trunc: TruncationSpec,
    factors: Vec<DMatrix<C64>>,
    leakage: f64,
    unitarity_defect: f64,
}

/// Single-mode displacement `exp(g a^dagger - g* a)` exponentiated at the
/// enlarged cutoff `N + ceil(4|g| sqrt N) + 10` and cropped to `N`.
pub fn single_mode_displacement(gamma: C64, cutoff: usize) -> DMatrix<C64> {
    if gamma == C64::zero() {
        return DMatrix::identity(cutoff + 1, cutoff + 1);
    }
    let big = cutoff + (4.0 * gamma.norm() * (cutoff as f64).sqrt()).ceil() as usize + 10;
    let d = big + 1;
    // H = i (g a^dagger - g* a) is Hermitian and D = exp(-i H)
    let mut h = DMatrix::<C64>::zeros(d, d);
    let i = C64::new(0.0, 1.0);
    for n in 0..big {
        let s = ((n + 1) as f64).sqrt();
        h[(n + 1, n)] = i * gamma * s;
        h[(n, n + 1)] = -i * gamma.conj() * s;
    }
    let eig = h.symmetric_eigen();
    let phases = DVector::from_iterator(d, eig.eigenvalues.iter().map(|&l| (-i * l).exp()));
    let v = &eig.eigenvectors;
    let full = v * DMatrix::from_diagonal(&phases) * v.adjoint();
    full.view((0, 0), (cutoff + 1, cutoff + 1)).into_owned()
}

pub fn displacement(gamma: &[C64], trunc: &TruncationSpec) -> Result<Displacement> {
    if gamma.len() != trunc.modes() {
        return Err(Error::shape("displacement vector length"));
    }
    let point = CoherentPoint::new(gamma.to_vec())?;
    let leakage = coherent_tail(&point, trunc);
    if leakage > 10.0 * trunc.tail_tol() {
        return Err(Error::TruncationTooSmall {
            tail: leakage,
            tol: 10.0 * trunc.tail_tol(),
            required: sufficient_cutoffs(&point, trunc.tail_tol()),
        });
    }
    let factors: Vec<DMatrix<C64>> = gamma
        .iter()
        .zip(trunc.cutoffs())
        .map(|(&g, &cut)| single_mode_displacement(g, cut))
        .collect();
    let unitarity_defect = factors
        .iter()
        .map(|f| {
            (0..f.ncols())
                .map(|j| (1.0 - f.column(j).norm_squared()).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    Ok(Displacement {
        trunc: trunc.clone(),
        factors,
        leakage,
        unitarity_defect,
    })
}

impl Displacement {
    /// Probability mass of `D(gamma)|0>` outside the truncation.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// Largest column-norm loss of the cropped factors; large only for
    /// columns near the cutoff.
    pub fn unitarity_defect(&self) -> f64 {
        self.unitarity_defect
    }

    pub fn factors(&self) -> &[DMatrix<C64>] {
        &self.factors
    }
}

impl FockOperator for Displacement {
    fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = v.clone();
        for (m, f) in self.factors.iter().enumerate() {
            out = apply_mode_matrix(&self.trunc, m, f, &out);
        }
        out
    }
}
