//! Lower and upper bounds on the nonclassical distance, and the report that
//! collects them into a certified interval.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{
    coherent_raw, tensor, CoherentPoint, DensityMatrix, FockVector, State, TruncationSpec, C64,
    DEFAULT_H_TOL,
};
use crate::husimi::{
    cat_qmax, gamma_n, noon_qmax_analytic, q_sup, q_tilde_pure, QMethod, QSupConfig, QSupremum,
};
use crate::lp::simplex;
use crate::metrics::{
    fidelity, trace_distance, trace_norm_factored, trace_norm_hermitian, trace_norm_rank_one_update,
};
use crate::special::{poisson_pmf, poisson_upper_tail};
use crate::states::{group_keys, ClassicalEnsemble, ClassicalKind, StateSpec};

/// Stable provenance identifiers.
pub mod provenance {
    pub const HUSIMI_PURE_LOWER: &str = "husimi-pure-lower";
    pub const HUSIMI_UPPER: &str = "husimi-upper";
    pub const WITNESS_UPPER: &str = "witness-upper";
    pub const SUPERFIDELITY_LOWER: &str = "superfidelity-lower";
    pub const TRIANGLE_LOWER: &str = "triangle-lower";
    pub const TRIANGLE_UPPER: &str = "triangle-upper";
    pub const CONVEXITY_UPPER: &str = "convexity-upper";
    pub const DIAG_CLASSICAL_UPPER: &str = "diag-classical-upper";
    pub const ADJOINING_LOWER: &str = "adjoining-lower";
    pub const FIDELITY_FAMILY_ESTIMATE: &str = "fidelity-family-estimate";
}

/// Largest admissible gap between a lower and an upper bound.
pub const ORDER_TOL: f64 = 1e-8;
/// Interval width below which the distance is reported as exact.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Ensemble(ClassicalEnsemble),
    Point(CoherentPoint),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bound {
    pub name: String,
    pub value: f64,
    pub provenance: String,
    pub witness: Option<Witness>,
}

impl Bound {
    fn new(name: impl Into<String>, value: f64, provenance: &str) -> Self {
        Self {
            name: name.into(),
            value,
            provenance: provenance.into(),
            witness: None,
        }
    }

    fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }
}

fn clip_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// `1 - m` for a pure state.
pub fn husimi_pure_lower(m: f64) -> Bound {
    Bound::new("husimi", clip_unit(1.0 - m), provenance::HUSIMI_PURE_LOWER)
}

/// `sqrt(1 - m)`, attached to a coherent maximizer.
pub fn husimi_upper(q: &QSupremum) -> Bound {
    let b = Bound::new(
        "husimi",
        clip_unit(1.0 - q.value).sqrt(),
        provenance::HUSIMI_UPPER,
    );
    match q.argmax.first() {
        Some(p) => b.with_witness(Witness::Point(p.clone())),
        None => b,
    }
}

pub fn lower_pure_q(psi: &FockVector, config: &QSupConfig) -> Result<Bound> {
    let q = q_sup(&State::Pure(psi.clone()), config)?;
    Ok(husimi_pure_lower(q.value))
}

pub fn upper_q(state: &State, config: &QSupConfig) -> Result<Bound> {
    Ok(husimi_upper(&q_sup(state, config)?))
}

/// Lower bound for any state from `F^2 <= Tr(rho sigma) + sqrt((1 - Tr rho^2)(1 - Tr sigma^2))`
/// and `Tr(rho sigma) <= m`.
pub fn superfidelity_lower(rho: &DensityMatrix, m: f64) -> Bound {
    let mixedness = (1.0 - rho.purity()).max(0.0).sqrt();
    let f2 = (m + mixedness).min(1.0);
    Bound::new(
        "superfidelity",
        clip_unit(1.0 - f2.sqrt()),
        provenance::SUPERFIDELITY_LOWER,
    )
}

/// `1 - max_family F(rho, sigma)`. Not a certified bound: the family is a
/// strict subset of the classical states, so this can exceed the distance.
pub fn lower_mixed_fidelity(rho: &DensityMatrix, family: &[ClassicalEnsemble]) -> Result<Bound> {
    if family.is_empty() {
        return Err(Error::param("empty classical family"));
    }
    let mut best = 0.0f64;
    for s in family {
        let sigma = s.realize_compressed(rho.trunc())?.matrix;
        best = best.max(fidelity(rho, &sigma)?);
    }
    Ok(Bound::new(
        format!("fidelity-family(n={})", family.len()),
        clip_unit(1.0 - best),
        provenance::FIDELITY_FAMILY_ESTIMATE,
    ))
}

fn support_max_total(state: &State) -> usize {
    let t = state.trunc();
    match state {
        State::Pure(psi) => (0..t.dim())
            .filter(|&i| psi.amps()[i] != C64::new(0.0, 0.0))
            .map(|i| t.total_photons(i))
            .max()
            .unwrap_or(0),
        State::Mixed(rho) => (0..t.dim())
            .filter(|&i| rho.mat()[(i, i)].re != 0.0)
            .map(|i| t.total_photons(i))
            .max()
            .unwrap_or(0),
    }
}

/// Compressed classical state restricted to one total-photon-number block.
fn block_matrix(sigma: &ClassicalEnsemble, trunc: &TruncationSpec, idx: &[usize]) -> DMatrix<C64> {
    let b = idx.len();
    let mut m = DMatrix::<C64>::zeros(b, b);
    for c in sigma.components() {
        let amps = coherent_raw(c.kind.center(), trunc);
        let a: Vec<C64> = idx.iter().map(|&i| amps[i]).collect();
        let keys = match &c.kind {
            ClassicalKind::Coherent(_) => None,
            ClassicalKind::PhaseRing { groups, .. } => {
                let all = group_keys(trunc, groups);
                Some(idx.iter().map(|&i| all[i].clone()).collect::<Vec<_>>())
            }
        };
        for i in 0..b {
            if a[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..b {
                if keys.as_ref().is_none_or(|k| k[i] == k[j]) {
                    m[(i, j)] += a[i] * a[j].conj() * c.weight;
                }
            }
        }
    }
    m
}

/// Half trace norm of `|psi><psi| - P sigma P` for a sigma block diagonal in
/// total photon number: per block, a rank-one update of the block's spectrum.
fn pure_block_distance(psi: &FockVector, sigma: &ClassicalEnsemble) -> f64 {
    let trunc = psi.trunc();
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..trunc.dim() {
        blocks.entry(trunc.total_photons(i)).or_default().push(i);
    }
    let mut z_sqr = Vec::new();
    let mut lambda = Vec::new();
    for idx in blocks.values() {
        let m = block_matrix(sigma, trunc, idx);
        let has_psi = idx.iter().any(|&i| psi.amps()[i] != C64::new(0.0, 0.0));
        if !has_psi {
            // contributes its trace only
            z_sqr.push(0.0);
            lambda.push(m.trace().re.max(0.0));
            continue;
        }
        let eig = ((&m + m.adjoint()) * C64::new(0.5, 0.0)).symmetric_eigen();
        let p = DVector::from_iterator(idx.len(), idx.iter().map(|&i| psi.amps()[i]));
        for k in 0..idx.len() {
            z_sqr.push(eig.eigenvectors.column(k).dotc(&p).norm_sqr());
            lambda.push(eig.eigenvalues[k]);
        }
    }
    0.5 * trace_norm_rank_one_update(&z_sqr, &lambda)
}

/// `D(rho, sigma)` for a classical `sigma`, computed as
/// `D(rho, P sigma P) + (1 - Tr P sigma P)/2` with `P` the truncation
/// projector. Exact when `sigma` commutes with `P`, or when it is block
/// diagonal in total photon number and every block touched by `rho` lies
/// inside the truncation; otherwise the discarded mass must be within the
/// tail tolerance.
pub fn witness_distance(state: &State, sigma: &ClassicalEnsemble) -> Result<f64> {
    let trunc = state.trunc();
    if sigma.modes() != trunc.modes() {
        return Err(Error::shape(format!(
            "{}-mode witness for a {}-mode state",
            sigma.modes(),
            trunc.modes()
        )));
    }
    let discarded = sigma.discarded_mass(trunc);
    let min_cut = trunc.cutoffs().iter().copied().min().unwrap_or(0);
    let exact = sigma.commutes_with_truncation()
        || (sigma.is_number_block_diagonal() && support_max_total(state) <= min_cut);
    if !exact && discarded > trunc.tail_tol() {
        let required = sigma
            .sufficient_cutoffs(trunc.tail_tol())
            .iter()
            .zip(trunc.cutoffs())
            .map(|(a, b)| (*a).max(*b))
            .collect();
        return Err(Error::TruncationTooSmall {
            tail: discarded,
            tol: trunc.tail_tol(),
            required,
        });
    }
    let all_coherent = sigma
        .components()
        .iter()
        .all(|c| matches!(c.kind, ClassicalKind::Coherent(_)));
    let d = match state {
        State::Pure(psi) if all_coherent && sigma.components().len() < trunc.dim() => {
            let mix: Vec<(f64, DVector<C64>)> = sigma
                .components()
                .iter()
                .map(|c| (c.weight, coherent_raw(c.kind.center(), trunc)))
                .collect();
            0.5 * trace_norm_factored(&[(1.0, psi.amps().clone())], &mix)?
        }
        State::Pure(psi) if sigma.is_number_block_diagonal() => pure_block_distance(psi, sigma),
        _ => {
            let rho = state.density();
            let comp = sigma.realize_compressed(trunc)?;
            0.5 * trace_norm_hermitian(&(rho.mat() - comp.matrix.mat()))
        }
    };
    Ok(d + 0.5 * discarded)
}

pub fn upper_witness(state: &State, sigma: &ClassicalEnsemble, name: &str) -> Result<Bound> {
    let d = witness_distance(state, sigma)?;
    Ok(Bound::new(name, clip_unit(d), provenance::WITNESS_UPPER)
        .with_witness(Witness::Ensemble(sigma.clone())))
}

/// Interval transported through `|delta(rho) - delta(rho_ref)| <= D(rho, rho_ref)`.
pub fn triangle_from_distance(d: f64, ref_lower: f64, ref_upper: f64) -> (Bound, Bound) {
    (
        Bound::new(
            "triangle",
            clip_unit(ref_lower - d),
            provenance::TRIANGLE_LOWER,
        ),
        Bound::new(
            "triangle",
            clip_unit(ref_upper + d),
            provenance::TRIANGLE_UPPER,
        ),
    )
}

pub fn triangle_bounds(
    rho: &DensityMatrix,
    rho_ref: &DensityMatrix,
    ref_lower: f64,
    ref_upper: f64,
) -> Result<(Bound, Bound)> {
    if ref_lower > ref_upper + ORDER_TOL {
        return Err(Error::param("reference interval is reversed"));
    }
    Ok(triangle_from_distance(
        trace_distance(rho, rho_ref)?,
        ref_lower,
        ref_upper,
    ))
}

/// `sum_i w_i upper_i` for a mixture whose components have the given reports.
pub fn convexity_upper(components: &[(f64, &BoundReport)]) -> Result<Bound> {
    if components.is_empty() {
        return Err(Error::param("no components"));
    }
    let total: f64 = components.iter().map(|(w, _)| *w).sum();
    if components.iter().any(|(w, _)| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("component weights sum to {total}")));
    }
    let v = components
        .iter()
        .map(|(w, r)| w * r.best_upper)
        .sum::<f64>()
        / total;
    Ok(Bound::new(
        "convexity",
        clip_unit(v),
        provenance::CONVEXITY_UPPER,
    ))
}

/// 41-point grid on `[0, 2 E + 4]`: 21 evenly spaced points and 20
/// geometric points towards zero.
pub fn default_energy_grid(mean_energy: f64) -> Vec<f64> {
    let top = 2.0 * mean_energy.max(0.0) + 4.0;
    let mut g: Vec<f64> = (0..=20).map(|k| top * k as f64 / 20.0).collect();
    g.extend((0..20).map(|k| top * 10f64.powf(-3.0 + 3.0 * k as f64 / 20.0)));
    normalize_grid(&g).unwrap_or_default()
}

fn normalize_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(Error::param(
            "grid energies must be finite and non-negative",
        ));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// Optimal mixture of (product) phase-randomized coherent states.
#[derive(Clone, Debug)]
pub struct DiagMinimum {
    pub value: f64,
    /// Per-mode energies of each atom.
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub iterations: usize,
}

impl DiagMinimum {
    /// Mixture of the atoms with positive weight.
    pub fn ensemble(&self) -> Result<ClassicalEnsemble> {
        let parts = self
            .atoms
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(a, w)| Ok((*w, ClassicalEnsemble::product_rings(a)?)))
            .collect::<Result<Vec<_>>>()?;
        ClassicalEnsemble::mix(parts)
    }

    pub fn bound(&self) -> Result<Bound> {
        Ok(Bound::new(
            "diag-classical",
            clip_unit(self.value),
            provenance::DIAG_CLASSICAL_UPPER,
        )
        .with_witness(Witness::Ensemble(self.ensemble()?)))
    }
}

/// Default cap on the number of product atoms.
pub const DEFAULT_MAX_ATOMS: usize = 4000;

struct DiagProblem {
    p: Vec<f64>,
    atoms: Vec<Vec<f64>>,
    q: DMatrix<f64>,
    tails: Vec<f64>,
}

impl DiagProblem {
    fn new(rho: &DensityMatrix, grid: &[f64], max_atoms: usize) -> Result<Self> {
        let defect = rho.off_diagonal_defect();
        if defect > DEFAULT_H_TOL {
            return Err(Error::NotDiagonal { defect });
        }
        let grid = normalize_grid(grid)?;
        let trunc = rho.trunc();
        let modes = trunc.modes();
        // per-mode subsample so the product grid stays under the cap
        let per_mode = {
            let mut k = grid.len();
            while k > 2 && k.checked_pow(modes as u32).is_none_or(|n| n > max_atoms) {
                k -= 1;
            }
            k
        };
        let sub: Vec<f64> = if per_mode == grid.len() {
            grid
        } else {
            let mut s: Vec<f64> = (0..per_mode)
                .map(|j| grid[j * (grid.len() - 1) / (per_mode - 1).max(1)])
                .collect();
            s.dedup();
            s
        };
        let mut atoms: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..modes {
            atoms = atoms
                .into_iter()
                .flat_map(|a| {
                    sub.iter().map(move |&e| {
                        let mut b = a.clone();
                        b.push(e);
                        b
                    })
                })
                .collect();
        }
        let d = trunc.dim();
        let mut q = DMatrix::<f64>::zeros(d, atoms.len());
        let mut tails = Vec::with_capacity(atoms.len());
        for (k, a) in atoms.iter().enumerate() {
            let pmf: Vec<Vec<f64>> = a
                .iter()
                .zip(trunc.cutoffs())
                .map(|(&e, &c)| (0..=c).map(|n| poisson_pmf(e, n)).collect())
                .collect();
            for i in 0..d {
                q[(i, k)] = (0..modes).map(|m| pmf[m][trunc.occupation(i, m)]).product();
            }
            let inside: f64 = a
                .iter()
                .zip(trunc.cutoffs())
                .map(|(&e, &c)| 1.0 - poisson_upper_tail(e, c))
                .product();
            tails.push((1.0 - inside).max(0.0));
        }
        Ok(Self {
            p: rho.diagonal_probabilities(),
            atoms,
            q,
            tails,
        })
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let qw = &self.q * DVector::from_column_slice(w);
        let l1: f64 = qw.iter().zip(&self.p).map(|(a, b)| (a - b).abs()).sum();
        0.5 * (l1 + self.tails.iter().zip(w).map(|(t, w)| t * w).sum::<f64>())
    }

    fn best_atom(&self) -> usize {
        let k = self.atoms.len();
        (0..k)
            .map(|j| {
                let mut w = vec![0.0; k];
                w[j] = 1.0;
                (j, self.objective(&w))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map_or(0, |(j, _)| j)
    }
}

/// Minimizes `D(rho, sum_k w_k sigma_k)` over mixtures of product
/// phase-randomized coherent states with per-mode energies from `grid`.
///
/// For a number-diagonal `rho` the distance is
/// `(||Q w - p||_1 + t.w)/2` with `Q` the truncated Poisson columns and `t`
/// their tails, a linear program in `(w, u, v)` with `Q w + u - v = p`.
pub fn diag_classical_minimize(rho: &DensityMatrix, grid: &[f64]) -> Result<DiagMinimum> {
    diag_classical_minimize_capped(rho, grid, DEFAULT_MAX_ATOMS)
}

pub fn diag_classical_minimize_capped(
    rho: &DensityMatrix,
    grid: &[f64],
    max_atoms: usize,
) -> Result<DiagMinimum> {
    let pr = DiagProblem::new(rho, grid, max_atoms)?;
    let d = pr.p.len();
    let k = pr.atoms.len();
    let rows = d + 1;
    let cols = k + 2 * d;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    a.view_mut((0, 0), (d, k)).copy_from(&pr.q);
    for i in 0..d {
        a[(i, k + i)] = 1.0;
        a[(i, k + d + i)] = -1.0;
    }
    for j in 0..k {
        a[(d, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(rows);
    for i in 0..d {
        b[i] = pr.p[i];
    }
    b[d] = 1.0;
    let mut c = DVector::<f64>::from_element(cols, 0.5);
    for j in 0..k {
        c[j] = 0.5 * pr.tails[j];
    }
    let k0 = pr.best_atom();
    let mut basis: Vec<usize> = (0..d)
        .map(|i| {
            if pr.p[i] - pr.q[(i, k0)] >= 0.0 {
                k + i
            } else {
                k + d + i
            }
        })
        .collect();
    basis.push(k0);
    let sol = simplex(&a, &b, &c, basis)?;
    let mut w: Vec<f64> = sol.x[..k].to_vec();
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter_mut().for_each(|x| *x /= s);
    }
    Ok(DiagMinimum {
        value: pr.objective(&w),
        atoms: pr.atoms,
        weights: w,
        iterations: sol.iterations,
    })
}

fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Projected subgradient with Polyak steps towards a shrinking estimate of
/// the optimum, started from the best single atom.
pub fn diag_classical_minimize_subgradient(
    rho: &DensityMatrix,
    grid: &[f64],
    iters: usize,
) -> Result<DiagMinimum> {
    let pr = DiagProblem::new(rho, grid, DEFAULT_MAX_ATOMS)?;
    let k = pr.atoms.len();
    let mut w = vec![0.0; k];
    w[pr.best_atom()] = 1.0;
    let mut best_w = w.clone();
    let mut best = pr.objective(&w);
    let mut delta = 0.5 * best.max(1e-3);
    let mut since = 0usize;
    let mut done = 0usize;
    for _ in 0..iters {
        done += 1;
        let f = pr.objective(&w);
        let qw = &pr.q * DVector::from_column_slice(&w);
        let s = DVector::from_iterator(
            pr.p.len(),
            qw.iter().zip(&pr.p).map(|(a, b)| match a.partial_cmp(b) {
                Some(core::cmp::Ordering::Greater) => 1.0,
                Some(core::cmp::Ordering::Less) => -1.0,
                _ => 0.0,
            }),
        );
        let g: Vec<f64> = (pr.q.transpose() * s)
            .iter()
            .zip(&pr.tails)
            .map(|(a, t)| 0.5 * (a + t))
            .collect();
        let gn: f64 = g.iter().map(|x| x * x).sum();
        if gn == 0.0 || best == 0.0 {
            break;
        }
        let step = (f - (best - delta)) / gn;
        let v: Vec<f64> = w.iter().zip(&g).map(|(x, gi)| x - step * gi).collect();
        w = project_simplex(&v);
        let fw = pr.objective(&w);
        if fw < best {
            if fw <= best - 0.5 * delta {
                since = 0;
            }
            best = fw;
            best_w = w.clone();
        } else {
            since += 1;
        }
        if since > 50 {
            delta *= 0.5;
            since = 0;
            w = best_w.clone();
        }
    }
    Ok(DiagMinimum {
        value: best,
        atoms: pr.atoms,
        weights: best_w,
        iterations: done,
    })
}

/// Mechanical check that a witness saturates the Husimi lower bound: `psi`
/// is an eigenvector of the witness, and every coherent point of the
/// witness reaches `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaturationCheck {
    pub eigenvalue: f64,
    pub eigen_residual: f64,
    pub min_component_q: f64,
    pub m: f64,
}

impl SaturationCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.eigen_residual <= tol && self.min_component_q >= self.m - tol
    }
}

fn orbit_samples(kind: &ClassicalKind) -> Vec<CoherentPoint> {
    match kind {
        ClassicalKind::Coherent(a) => vec![a.clone()],
        ClassicalKind::PhaseRing { center, groups } => (0..16)
            .map(|s| {
                let mut p = center.0.clone();
                for (g, modes) in groups.iter().enumerate() {
                    let step = ((g + 1) as f64 * 0.618_033_988_749_894_9).fract();
                    let th = core::f64::consts::TAU * (s as f64 * step).fract();
                    for &m in modes {
                        p[m] *= C64::from_polar(1.0, th);
                    }
                }
                CoherentPoint(p)
            })
            .collect(),
    }
}

pub fn saturation_check(
    psi: &FockVector,
    sigma: &ClassicalEnsemble,
    m: f64,
) -> Result<SaturationCheck> {
    let s_psi = sigma.apply_compressed(psi.trunc(), psi.amps())?;
    let lam = psi.amps().dotc(&s_psi).re / psi.norm_sqr();
    let eigen_residual = (s_psi - psi.amps() * C64::new(lam, 0.0)).norm();
    let mut min_q = f64::INFINITY;
    for c in sigma.components() {
        if c.weight == 0.0 {
            continue;
        }
        for p in orbit_samples(&c.kind) {
            min_q = min_q.min(q_tilde_pure(psi, &p)?);
        }
    }
    Ok(SaturationCheck {
        eigenvalue: lam,
        eigen_residual,
        min_component_q: min_q,
        m,
    })
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub state_id: String,
    pub lowers: Vec<Bound>,
    pub uppers: Vec<Bound>,
    pub best_lower: f64,
    pub best_upper: f64,
    pub exact: Option<f64>,
    /// Supremum of the Husimi function used by the Husimi bounds.
    pub q: QSupremum,
    /// Present when `exact` is set through a witness on a pure state.
    pub saturation: Option<SaturationCheck>,
    /// Witnesses that could not be evaluated at this truncation.
    pub skipped: Vec<String>,
}

impl BoundReport {
    pub fn best_upper_bound(&self) -> Option<&Bound> {
        self.uppers
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
    }

    pub fn best_lower_bound(&self) -> Option<&Bound> {
        self.lowers
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
    }

    pub fn upper(&self, provenance: &str, name: &str) -> Option<&Bound> {
        self.uppers
            .iter()
            .find(|b| b.provenance == provenance && b.name == name)
    }

    pub fn lower(&self, provenance: &str) -> Option<&Bound> {
        self.lowers.iter().find(|b| b.provenance == provenance)
    }
}

#[derive(Clone, Debug)]
pub struct ReportConfig {
    pub qsup: QSupConfig,
    /// Energy grid for the number-diagonal minimization; `None` uses
    /// [`default_energy_grid`].
    pub energy_grid: Option<Vec<f64>>,
    pub max_atoms: usize,
    /// Add witnesses built from the Husimi maximizers.
    pub auto_witnesses: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            qsup: QSupConfig::default(),
            energy_grid: None,
            max_atoms: DEFAULT_MAX_ATOMS,
            auto_witnesses: true,
        }
    }
}

/// Inputs the caller knows beyond the state itself.
#[derive(Clone, Debug, Default)]
pub struct ReportContext {
    pub witnesses: Vec<(String, ClassicalEnsemble)>,
    /// Supremum of the Husimi function, if known in closed form.
    pub q: Option<QSupremum>,
    pub extra_lowers: Vec<Bound>,
    pub extra_uppers: Vec<Bound>,
}

fn auto_witnesses(q: &QSupremum) -> Vec<(String, ClassicalEnsemble)> {
    let mut out = Vec::new();
    let Some(first) = q.argmax.first() else {
        return out;
    };
    if let Ok(e) = ClassicalEnsemble::uniform_coherent(q.argmax.clone()) {
        out.push(("argmax-coherent".to_string(), e));
    }
    let energies: Vec<f64> = first.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    if let Ok(e) = ClassicalEnsemble::product_rings(&energies) {
        out.push(("argmax-rings".to_string(), e));
    }
    if first.modes() > 1 {
        out.push((
            "argmax-joint-ring".to_string(),
            ClassicalEnsemble::joint_ring(first.clone()),
        ));
    }
    out
}

fn mean_energy_per_mode(state: &State) -> f64 {
    let t = state.trunc();
    let p: Vec<f64> = match state {
        State::Pure(psi) => psi.amps().iter().map(|a| a.norm_sqr()).collect(),
        State::Mixed(rho) => rho.diagonal_probabilities(),
    };
    (0..t.modes())
        .map(|m| {
            (0..t.dim())
                .map(|i| p[i] * t.occupation(i, m) as f64)
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Runs every applicable bound and assembles the interval.
///
/// Lowers: `1 - m` for pure states, the super-fidelity bound for mixed
/// ones. Uppers: `sqrt(1 - m)`, the distance to each witness, and for
/// number-diagonal states the optimal mixture of phase-randomized coherent
/// states on the energy grid. Fails with [`Error::BoundOrdering`] if a
/// lower exceeds an upper.
pub fn report(
    state_id: &str,
    state: &State,
    ctx: ReportContext,
    config: &ReportConfig,
) -> Result<BoundReport> {
    let q = match ctx.q {
        Some(q) => q,
        None => q_sup(state, &config.qsup)?,
    };
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    let mut skipped = Vec::new();
    match state {
        State::Pure(_) => lowers.push(husimi_pure_lower(q.value)),
        State::Mixed(rho) => lowers.push(superfidelity_lower(rho, q.value)),
    }
    lowers.extend(ctx.extra_lowers);
    uppers.push(husimi_upper(&q));

    let mut witnesses = ctx.witnesses;
    if config.auto_witnesses {
        witnesses.extend(auto_witnesses(&q));
    }
    let mut seen: Vec<&ClassicalEnsemble> = Vec::new();
    for (name, w) in &witnesses {
        if seen.contains(&w) {
            continue;
        }
        seen.push(w);
        match upper_witness(state, w, name) {
            Ok(b) => uppers.push(b),
            Err(Error::TruncationTooSmall { .. }) => skipped.push(name.clone()),
            Err(e) => return Err(e),
        }
    }
    if let State::Mixed(rho) = state {
        if rho.off_diagonal_defect() <= DEFAULT_H_TOL {
            let grid = match &config.energy_grid {
                Some(g) => g.clone(),
                None => default_energy_grid(mean_energy_per_mode(state)),
            };
            let dm = diag_classical_minimize_capped(rho, &grid, config.max_atoms)?;
            uppers.push(dm.bound()?);
        }
    }
    uppers.extend(ctx.extra_uppers);
    assemble(state_id, state, q, lowers, uppers, skipped)
}

fn assemble(
    state_id: &str,
    state: &State,
    q: QSupremum,
    lowers: Vec<Bound>,
    uppers: Vec<Bound>,
    skipped: Vec<String>,
) -> Result<BoundReport> {
    let lo = lowers.iter().max_by(|a, b| a.value.total_cmp(&b.value));
    let hi = uppers.iter().min_by(|a, b| a.value.total_cmp(&b.value));
    if let (Some(l), Some(u)) = (lo, hi) {
        if l.value > u.value + ORDER_TOL {
            return Err(Error::BoundOrdering {
                lower_name: format!("{}:{}", l.provenance, l.name),
                lower: l.value,
                upper_name: format!("{}:{}", u.provenance, u.name),
                upper: u.value,
            });
        }
    }
    let best_lower = lo.map_or(0.0, |b| b.value);
    let best_upper = hi.map_or(1.0, |b| b.value);
    let exact = (best_upper - best_lower <= EXACT_TOL).then_some(best_upper);
    let saturation = match (exact, state, hi.and_then(|b| b.witness.as_ref())) {
        (Some(_), State::Pure(psi), Some(Witness::Ensemble(sigma))) => {
            Some(saturation_check(psi, sigma, q.value)?)
        }
        _ => None,
    };
    Ok(BoundReport {
        state_id: state_id.into(),
        lowers,
        uppers,
        best_lower,
        best_upper,
        exact,
        q,
        saturation,
        skipped,
    })
}

/// Closed-form Husimi supremum for recipes that have one.
pub fn analytic_q(spec: &StateSpec) -> Result<Option<QSupremum>> {
    Ok(match spec {
        StateSpec::Number { ns } => Some(QSupremum {
            value: ns.iter().map(|&n| gamma_n(n)).product(),
            argmax: vec![CoherentPoint::real(
                &ns.iter().map(|&n| (n as f64).sqrt()).collect::<Vec<_>>(),
            )],
            method: QMethod::Analytic,
            certificate: 0.0,
        }),
        StateSpec::SinglePhoton { c } => Some(noon_qmax_analytic(1, c)?),
        StateSpec::Noon { n, c } => Some(noon_qmax_analytic(*n, c)?),
        StateSpec::Cat(p) => Some(cat_qmax(p)),
        StateSpec::Coherent { alpha } => Some(QSupremum {
            value: 1.0,
            argmax: vec![alpha.clone()],
            method: QMethod::Analytic,
            certificate: 0.0,
        }),
        _ => None,
    })
}

/// Report for a recipe at `trunc` (default: the recipe's own truncation).
/// Uses closed-form suprema and recipe witnesses where available, and for
/// mixtures adds convexity and triangle bounds from component reports.
pub fn report_for_spec(
    spec: &StateSpec,
    trunc: Option<&TruncationSpec>,
    config: &ReportConfig,
) -> Result<BoundReport> {
    let trunc = match trunc {
        Some(t) => t.clone(),
        None => spec.default_trunc()?,
    };
    let state = spec.build(&trunc)?;
    let mut ctx = ReportContext {
        witnesses: spec.witnesses()?,
        q: analytic_q(spec)?,
        ..Default::default()
    };
    let parts: Vec<(f64, StateSpec)> = match spec {
        StateSpec::Mixture { terms } => terms.clone(),
        StateSpec::VacuumNumberMixture { n, eta } => vec![
            (
                1.0 - eta,
                StateSpec::Coherent {
                    alpha: CoherentPoint::vacuum(1),
                },
            ),
            (*eta, StateSpec::Number { ns: vec![*n] }),
        ],
        _ => Vec::new(),
    };
    if !parts.is_empty() {
        let rho = state.density();
        let mut reports = Vec::with_capacity(parts.len());
        for (w, s) in &parts {
            let r = report_for_spec(s, None, config)?;
            let d = trace_distance(&rho, &s.build(&trunc)?.density())?;
            let (lo, hi) = triangle_from_distance(d, r.best_lower, r.best_upper);
            ctx.extra_lowers.push(Bound {
                name: format!("triangle[{}]", s.id()),
                ..lo
            });
            ctx.extra_uppers.push(Bound {
                name: format!("triangle[{}]", s.id()),
                ..hi
            });
            reports.push((*w, r));
        }
        let refs: Vec<(f64, &BoundReport)> = reports.iter().map(|(w, r)| (*w, r)).collect();
        ctx.extra_uppers.push(convexity_upper(&refs)?);
    }
    report(&spec.id(), &state, ctx, config)
}

/// Report for `rho (x) sigma0` with `sigma0` classical. The distance is
/// invariant under adjoining, so the base lower bound carries over; the
/// uppers are recomputed on the enlarged state from the base witnesses
/// tensored with `sigma0`.
pub fn report_adjoined(
    spec: &StateSpec,
    sigma0: &ClassicalEnsemble,
    config: &ReportConfig,
) -> Result<BoundReport> {
    let base_trunc = spec.default_trunc()?;
    let base = report_for_spec(spec, Some(&base_trunc), config)?;
    let extra = TruncationSpec::new(
        sigma0.sufficient_cutoffs(base_trunc.tail_tol() * 1e-2),
        base_trunc.tail_tol(),
    )?;
    let trunc = base_trunc.compose(&extra)?;
    let rho = spec.build(&base_trunc)?.density();
    let state = State::Mixed(tensor(&rho, &sigma0.realize(&extra)?)?);
    let mut witnesses = Vec::new();
    for b in &base.uppers {
        if let Some(Witness::Ensemble(w)) = &b.witness {
            witnesses.push((format!("{}(x)adjoined", b.name), w.product(sigma0)?));
        }
    }
    let ctx = ReportContext {
        witnesses,
        q: None,
        extra_lowers: vec![Bound::new(
            format!(
                "adjoining[{}]",
                base.best_lower_bound()
                    .map_or("", |b| b.provenance.as_str())
            ),
            base.best_lower,
            provenance::ADJOINING_LOWER,
        )],
        extra_uppers: Vec::new(),
    };
    debug_assert_eq!(state.trunc(), &trunc);
    report(&format!("{}(x)classical", spec.id()), &state, ctx, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{outer, TruncationSpec};
    use crate::states::{
        cat_classical_witness, number_state, phase_randomized_coherent, vacuum_number_mixture,
        CatParams, CatWitness,
    };

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cfg() -> ReportConfig {
        ReportConfig::default()
    }

    #[test]
    fn pure_lower_examples() {
        let t = TruncationSpec::uniform(1, 4).unwrap();
        let b = lower_pure_q(&number_state(&[1], &t).unwrap(), &QSupConfig::default()).unwrap();
        assert!((b.value - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
        assert!((b.value - 0.6321205588285577).abs() < 1e-9);
        let r = report_for_spec(
            &StateSpec::Coherent {
                alpha: CoherentPoint::real(&[1.0]),
            },
            None,
            &cfg(),
        )
        .unwrap();
        assert!(r.best_lower.abs() < 1e-9 && r.best_upper < 1e-9);
    }

    #[test]
    fn upper_q_examples() {
        let t = TruncationSpec::uniform(1, 4).unwrap();
        let b = upper_q(
            &State::Pure(number_state(&[1], &t).unwrap()),
            &QSupConfig::default(),
        )
        .unwrap();
        assert!((b.value - (1.0 - (-1.0f64).exp()).sqrt()).abs() < 1e-9);
        let p = CatParams::even(0.5).unwrap();
        let b = husimi_upper(&cat_qmax(&p));
        assert!((b.value - (1.0 - 1.0 / 0.25f64.cosh()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn witness_examples() {
        let t = TruncationSpec::uniform(1, 1).unwrap();
        let one = State::Pure(number_state(&[1], &t).unwrap());
        let d = witness_distance(&one, &phase_randomized_coherent(1.0).unwrap()).unwrap();
        assert!((d - (1.0 - (-1.0f64).exp())).abs() < 1e-13);

        let p = CatParams::even(2.0).unwrap();
        let spec = StateSpec::Cat(p);
        let cat = spec.build(&spec.default_trunc().unwrap()).unwrap();
        let w = cat_classical_witness(CatWitness::AtBeta, &p).unwrap();
        let d = witness_distance(&cat, &w).unwrap();
        assert!((d - (1.0 - (-8.0f64).exp()) / 2.0).abs() < 1e-10);

        let t = TruncationSpec::uniform(2, 1).unwrap();
        let s = State::Pure(number_state(&[1, 1], &t).unwrap());
        let d =
            witness_distance(&s, &ClassicalEnsemble::product_rings(&[1.0, 1.0]).unwrap()).unwrap();
        assert!((d - (1.0 - (-2.0f64).exp())).abs() < 1e-13);
        assert!((d - 0.8646647167633873).abs() < 1e-13);
    }

    #[test]
    fn witness_paths_agree() {
        // block path vs dense path on a state small enough for both
        let t = TruncationSpec::uniform(2, 3).unwrap();
        let psi = crate::states::multimode_noon(2, &[c(0.6, 0.0), c(0.0, 0.8)], &t).unwrap();
        let w = ClassicalEnsemble::mix(vec![
            (
                0.5,
                ClassicalEnsemble::joint_ring(CoherentPoint(vec![c(0.7, 0.1), c(0.2, -0.5)])),
            ),
            (0.5, ClassicalEnsemble::product_rings(&[1.2, 0.4]).unwrap()),
        ])
        .unwrap();
        let fast = witness_distance(&State::Pure(psi.clone()), &w).unwrap();
        let comp = w.realize_compressed(&t).unwrap();
        let dense = 0.5 * trace_norm_hermitian(&(outer(&psi).mat() - comp.matrix.mat()))
            + 0.5 * comp.discarded;
        assert!((fast - dense).abs() < 1e-12, "{fast} {dense}");
        let mixed = witness_distance(&State::Mixed(outer(&psi)), &w).unwrap();
        assert!((fast - mixed).abs() < 1e-12);
    }

    #[test]
    fn block_witness_is_truncation_exact() {
        // a joint ring truncated at the state's photon number gives the same
        // distance as at a much larger truncation
        let center = CoherentPoint(vec![c(0.6, 0.0), c(0.3, 0.4)]);
        let w = ClassicalEnsemble::joint_ring(center);
        let small = TruncationSpec::uniform(2, 1).unwrap();
        let big = TruncationSpec::uniform(2, 18).unwrap();
        let cs = [c(0.6, 0.0), c(0.6, 0.8) * 0.8];
        let a = witness_distance(
            &State::Pure(crate::states::single_photon_superposition(&cs, &small).unwrap()),
            &w,
        )
        .unwrap();
        let b = witness_distance(
            &State::Pure(crate::states::single_photon_superposition(&cs, &big).unwrap()),
            &w,
        )
        .unwrap();
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn witness_rejects_short_truncation() {
        let t = TruncationSpec::uniform(1, 3).unwrap();
        let s = State::Pure(number_state(&[1], &t).unwrap());
        let w = ClassicalEnsemble::coherent(CoherentPoint::real(&[2.0]));
        assert!(matches!(
            witness_distance(&s, &w),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn fidelity_family_examples() {
        let t = TruncationSpec::uniform(1, 30).unwrap();
        let r = phase_randomized_coherent(1.0).unwrap();
        let b = lower_mixed_fidelity(&r.realize(&t).unwrap(), std::slice::from_ref(&r)).unwrap();
        assert!(b.value < 1e-6);
        let two = outer(&number_state(&[2], &t).unwrap());
        let b = lower_mixed_fidelity(&two, &[phase_randomized_coherent(2.0).unwrap()]).unwrap();
        assert!((b.value - (1.0 - gamma_n(2).sqrt())).abs() < 1e-9);
        assert_eq!(b.provenance, provenance::FIDELITY_FAMILY_ESTIMATE);
    }

    #[test]
    fn triangle_examples() {
        let t = TruncationSpec::uniform(1, 2).unwrap();
        let r = vacuum_number_mixture(1, 0.9, &t).unwrap();
        let (lo, hi) = triangle_bounds(&r, &r, 0.2, 0.3).unwrap();
        assert_eq!((lo.value, hi.value), (0.2, 0.3));
        let g1 = gamma_n(1);
        let one = outer(&number_state(&[1], &t).unwrap());
        let (lo, _) = triangle_bounds(&r, &one, 1.0 - g1, 1.0 - g1).unwrap();
        assert!((lo.value - (0.9 - g1)).abs() < 1e-12);
        assert!((lo.value - 0.5321205588285577).abs() < 1e-12);
    }

    #[test]
    fn convexity_examples() {
        let r = report_for_spec(
            &StateSpec::VacuumNumberMixture { n: 2, eta: 0.5 },
            None,
            &cfg(),
        )
        .unwrap();
        let b = r
            .uppers
            .iter()
            .find(|b| b.provenance == provenance::CONVEXITY_UPPER)
            .unwrap();
        assert!((b.value - 0.5 * (1.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-10);
        assert!((b.value - 0.364_664_716_763_387_3).abs() < 1e-10);
        let single = report_for_spec(&StateSpec::Number { ns: vec![1] }, None, &cfg()).unwrap();
        let u = convexity_upper(&[(1.0, &single)]).unwrap();
        assert_eq!(u.value, single.best_upper);
        assert!(convexity_upper(&[(0.4, &single)]).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = default_energy_grid(1.0);
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 6.0);
        assert!(matches!(normalize_grid(&[]), Err(Error::EmptyGrid)));
    }

    #[test]
    fn diag_examples() {
        let t = TruncationSpec::uniform(1, 30).unwrap();
        let ring = phase_randomized_coherent(1.0).unwrap().realize(&t).unwrap();
        let m = diag_classical_minimize(&ring, &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert!(m.value < 1e-12);
        assert!((m.weights[2] - 1.0).abs() < 1e-9);

        for n in 1..=4usize {
            let t = TruncationSpec::uniform(1, n).unwrap();
            let rho = outer(&number_state(&[n], &t).unwrap());
            let grid: Vec<f64> = (0..=32).map(|k| k as f64 * 0.25).collect();
            let m = diag_classical_minimize(&rho, &grid).unwrap();
            assert!(
                (m.value - (1.0 - gamma_n(n))).abs() < 1e-6,
                "n={n}: {}",
                m.value
            );
        }

        let t = TruncationSpec::uniform(1, 1).unwrap();
        let rho = vacuum_number_mixture(1, 0.3, &t).unwrap();
        let grid: Vec<f64> = (0..=16).map(|k| k as f64 * 0.25).collect();
        let m = diag_classical_minimize(&rho, &grid).unwrap();
        let g1 = gamma_n(1);
        assert!(m.value >= (0.3 - g1).max(0.0) - 1e-6 && m.value <= 0.3 * (1.0 - g1) + 1e-6);
        // re-evaluating at the returned weights reproduces the value
        let d = witness_distance(&State::Mixed(rho.clone()), &m.ensemble().unwrap()).unwrap();
        assert!((d - m.value).abs() < 1e-9);
    }

    #[test]
    fn diag_refinement_is_monotone() {
        let t = TruncationSpec::uniform(1, 3).unwrap();
        let rho = DensityMatrix::diagonal(t, &[0.1, 0.5, 0.1, 0.3]).unwrap();
        let coarse: Vec<f64> = (0..=4).map(|k| k as f64).collect();
        let fine: Vec<f64> = (0..=16).map(|k| k as f64 * 0.25).collect();
        let a = diag_classical_minimize(&rho, &coarse).unwrap().value;
        let b = diag_classical_minimize(&rho, &fine).unwrap().value;
        assert!(b <= a + 1e-12);
    }

    #[test]
    fn subgradient_agrees_with_lp() {
        let t = TruncationSpec::uniform(1, 3).unwrap();
        let rho = DensityMatrix::diagonal(t, &[0.1, 0.5, 0.1, 0.3]).unwrap();
        let grid: Vec<f64> = (0..=12).map(|k| k as f64 * 0.5).collect();
        let lp = diag_classical_minimize(&rho, &grid).unwrap();
        let sg = diag_classical_minimize_subgradient(&rho, &grid, 10_000).unwrap();
        assert!(sg.value >= lp.value - 1e-12);
        assert!(sg.value - lp.value < 1e-3, "{} {}", sg.value, lp.value);
    }

    #[test]
    fn diag_rejects_coherences() {
        let t = TruncationSpec::uniform(1, 20).unwrap();
        let rho = outer(&crate::fock::coherent_amps(&CoherentPoint::real(&[1.0]), &t).unwrap());
        assert!(matches!(
            diag_classical_minimize(&rho, &[1.0]),
            Err(Error::NotDiagonal { .. })
        ));
    }

    #[test]
    fn report_examples() {
        let r = report_for_spec(&StateSpec::Number { ns: vec![1, 1] }, None, &cfg()).unwrap();
        let e = r.exact.unwrap();
        assert!((e - (1.0 - (-2.0f64).exp())).abs() < 1e-10);
        assert!(r.saturation.as_ref().unwrap().holds(1e-9));

        let noon = StateSpec::Noon {
            n: 2,
            c: vec![c(0.5, 0.0); 4],
        };
        let r = report_for_spec(&noon, None, &cfg()).unwrap();
        assert!((r.exact.unwrap() - (1.0 - gamma_n(2) / 4.0)).abs() < 1e-9);
        assert!(r.saturation.as_ref().unwrap().holds(1e-9));

        let p = CatParams::even(1.0).unwrap();
        let r = report_for_spec(&StateSpec::Cat(p), None, &cfg()).unwrap();
        assert!(r.exact.is_none());
        let q = cat_qmax(&p);
        assert!((r.best_lower - (1.0 - q.value)).abs() < 1e-12);
        assert!(r.best_upper <= (1.0 - (-2.0f64).exp()) / 2.0 + 1e-9);
    }

    #[test]
    fn affine_optics_invariance() {
        let s2 = 0.5f64.sqrt();
        let a = report_for_spec(
            &StateSpec::Noon {
                n: 2,
                c: vec![c(s2, 0.0), c(s2, 0.0)],
            },
            None,
            &cfg(),
        )
        .unwrap();
        let b = report_for_spec(&StateSpec::Number { ns: vec![1, 1] }, None, &cfg()).unwrap();
        assert!((a.exact.unwrap() - b.exact.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn product_lower_bound() {
        let p = CatParams::even(1.5).unwrap();
        let t = TruncationSpec::uniform(1, 26).unwrap();
        let psi = crate::states::cat_state(&p, &t).unwrap();
        let pp = crate::fock::tensor_vectors(&psi, &psi).unwrap();
        let m = cat_qmax(&p).value;
        let b = lower_pure_q(&pp, &QSupConfig::default()).unwrap();
        assert!(
            (b.value - (1.0 - m * m)).abs() < 1e-9,
            "{} {}",
            b.value,
            1.0 - m * m
        );
    }

    #[test]
    fn adjoining_invariance() {
        let ring = phase_randomized_coherent(1.0).unwrap();
        for spec in [
            StateSpec::Number { ns: vec![1] },
            StateSpec::Cat(CatParams::even(1.0).unwrap()),
        ] {
            let base = report_for_spec(&spec, None, &cfg()).unwrap();
            let adj = report_adjoined(&spec, &ring, &cfg()).unwrap();
            assert!((adj.best_lower - base.best_lower).abs() < 1e-8);
            assert!(
                (adj.best_upper - base.best_upper).abs() < 1e-8,
                "{} {}",
                adj.best_upper,
                base.best_upper
            );
        }
    }

    #[test]
    fn mixed_reports_are_ordered() {
        for (n, eta) in [(1usize, 0.3), (2, 0.9), (3, 1.0)] {
            let r =
                report_for_spec(&StateSpec::VacuumNumberMixture { n, eta }, None, &cfg()).unwrap();
            let g = gamma_n(n);
            assert!(r.best_lower >= (eta - g).max(0.0) - 1e-9);
            assert!(r.best_upper <= eta * (1.0 - g) + 1e-9);
        }
    }

    #[test]
    fn ordering_violation_is_an_error() {
        let t = TruncationSpec::uniform(1, 1).unwrap();
        let s = State::Pure(number_state(&[1], &t).unwrap());
        let ctx = ReportContext {
            extra_uppers: vec![Bound::new("bogus", 0.1, provenance::WITNESS_UPPER)],
            ..Default::default()
        };
        assert!(matches!(
            report("x", &s, ctx, &cfg()),
            Err(Error::BoundOrdering { .. })
        ));
    }
}
