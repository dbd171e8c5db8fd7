//! Named states: number, single-photon, N00N, cat and entangled coherent
//! states, the vacuum-number mixture, and classical reference ensembles.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{
    coherent_amps, coherent_raw, coherent_tail, outer, sufficient_cutoffs, CoherentPoint,
    DensityMatrix, FockVector, State, TruncationSpec, C64, DEFAULT_TAIL_TOL,
};
use crate::husimi::cat_alpha_star;
use crate::special::{heuristic_cutoff, min_cutoff_for_tail};

const WEIGHT_RENORM_TOL: f64 = 1e-9;
const COEFF_NORM_TOL: f64 = 1e-12;

pub fn number_state(ns: &[usize], trunc: &TruncationSpec) -> Result<FockVector> {
    let idx = trunc.index(ns)?;
    let mut amps = DVector::<C64>::zeros(trunc.dim());
    amps[idx] = C64::new(1.0, 0.0);
    FockVector::from_amplitudes(trunc.clone(), amps)
}

fn check_coefficients(c: &[C64], modes: usize) -> Result<()> {
    if c.len() != modes {
        return Err(Error::shape(format!(
            "{} coefficients for {modes} modes",
            c.len()
        )));
    }
    let norm_sqr: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > COEFF_NORM_TOL {
        return Err(Error::Unnormalized { norm_sqr });
    }
    Ok(())
}

/// `sum_m c_m |0..1_m..0>`.
pub fn single_photon_superposition(c: &[C64], trunc: &TruncationSpec) -> Result<FockVector> {
    multimode_noon(1, c, trunc)
}

/// `sum_m c_m |0..n_m..0>`: `n` photons, all in one mode, in superposition
/// over the modes.
pub fn multimode_noon(n: usize, c: &[C64], trunc: &TruncationSpec) -> Result<FockVector> {
    if n == 0 {
        return Err(Error::param("N00N photon number must be at least 1"));
    }
    check_coefficients(c, trunc.modes())?;
    let mut amps = DVector::<C64>::zeros(trunc.dim());
    let mut ns = vec![0usize; trunc.modes()];
    for (m, &cm) in c.iter().enumerate() {
        ns[m] = n;
        amps[trunc.index(&ns)?] = cm;
        ns[m] = 0;
    }
    FockVector::from_amplitudes(trunc.clone(), amps)
}

/// Two-mode `(|n,0> + e^{i theta}|0,n>)/sqrt 2`.
pub fn noon_pair(n: usize, theta: f64, trunc: &TruncationSpec) -> Result<FockVector> {
    let s = 0.5f64.sqrt();
    multimode_noon(n, &[C64::new(s, 0.0), C64::from_polar(s, theta)], trunc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn matches(self, n: usize) -> bool {
        n.is_multiple_of(2) == (self == Parity::Even)
    }
}

/// Even or odd coherent superposition `(|beta> +- |-beta>)/sqrt(2 N)` with
/// real `beta > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatParams {
    pub parity: Parity,
    pub beta: f64,
}

impl CatParams {
    pub fn new(parity: Parity, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param(format!(
                "cat amplitude {beta} must be positive"
            )));
        }
        Ok(Self { parity, beta })
    }

    pub fn even(beta: f64) -> Result<Self> {
        Self::new(Parity::Even, beta)
    }

    pub fn odd(beta: f64) -> Result<Self> {
        Self::new(Parity::Odd, beta)
    }

    /// `N = 1 +- e^{-2 beta^2}`.
    pub fn norm(&self) -> f64 {
        let x = -2.0 * self.beta * self.beta;
        match self.parity {
            Parity::Even => 1.0 + x.exp(),
            Parity::Odd => -x.exp_m1(),
        }
    }

    /// Upper bound `(1 -+ e^{-2 beta^2})/2` from the two-component mixture.
    pub fn mixture_distance(&self) -> f64 {
        1.0 - self.norm() / 2.0
    }
}

fn parity_factor(p: &CatParams) -> f64 {
    (2.0 / p.norm()).sqrt()
}

fn cat_required(p: &CatParams, tol: f64) -> usize {
    min_cutoff_for_tail(p.beta * p.beta, tol * p.norm() / 2.0).max(1)
}

pub fn cat_state(p: &CatParams, trunc: &TruncationSpec) -> Result<FockVector> {
    if trunc.modes() != 1 {
        return Err(Error::shape("cat state is single-mode"));
    }
    let cut = trunc.cutoffs()[0];
    let f = parity_factor(p);
    let mut amps = crate::fock::coherent_mode_amps(C64::new(p.beta, 0.0), cut);
    for (n, a) in amps.iter_mut().enumerate() {
        *a = if p.parity.matches(n) {
            *a * f
        } else {
            C64::zero()
        };
    }
    let v = FockVector::from_amplitudes(trunc.clone(), DVector::from_vec(amps))?;
    let req = cat_required(p, trunc.tail_tol());
    v.certify(vec![req])
}

/// `(|a b>|c b> +- |-a b>|-c b>)/sqrt(2 N)` with `a = sqrt(eta)`,
/// `c = sqrt(1 - eta)`: a cat state split on a beam splitter.
pub fn entangled_coherent(p: &CatParams, eta: f64, trunc: &TruncationSpec) -> Result<FockVector> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param(format!("transmissivity {eta} outside [0, 1]")));
    }
    if trunc.modes() != 2 {
        return Err(Error::shape("entangled coherent state is two-mode"));
    }
    let point = CoherentPoint::real(&[eta.sqrt() * p.beta, (1.0 - eta).sqrt() * p.beta]);
    let mut amps = coherent_raw(&point, trunc);
    let f = parity_factor(p);
    for (idx, a) in amps.iter_mut().enumerate() {
        *a = if p.parity.matches(trunc.total_photons(idx)) {
            *a * f
        } else {
            C64::zero()
        };
    }
    let v = FockVector::from_amplitudes(trunc.clone(), amps)?;
    let tol = trunc.tail_tol() * p.norm() / 4.0;
    let req = point
        .amplitudes()
        .iter()
        .map(|a| min_cutoff_for_tail(a.norm_sqr(), tol).max(1))
        .collect();
    v.certify(req)
}

/// `(1 - eta)|0><0| + eta |n><n|` on a single mode.
pub fn vacuum_number_mixture(n: usize, eta: f64, trunc: &TruncationSpec) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::param("number component must have n >= 1"));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param(format!("mixing weight {eta} outside [0, 1]")));
    }
    if trunc.modes() != 1 {
        return Err(Error::shape("vacuum-number mixture is single-mode"));
    }
    let idx = trunc.index(&[n])?;
    let mut diag = vec![0.0; trunc.dim()];
    diag[0] = 1.0 - eta;
    diag[idx] = eta;
    DensityMatrix::diagonal(trunc.clone(), &diag)
}

/// One term of a classical P-representation.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassicalKind {
    /// Coherent projector `|alpha><alpha|`.
    Coherent(CoherentPoint),
    /// `|center>` averaged over an independent uniform phase per group: for
    /// each group `g` the amplitudes of the modes in `g` share a common
    /// random phase. A single one-mode group with centre `sqrt(n)` is the
    /// phase-randomized coherent state of energy `n`.
    PhaseRing {
        center: CoherentPoint,
        groups: Vec<Vec<usize>>,
    },
}

impl ClassicalKind {
    pub fn center(&self) -> &CoherentPoint {
        match self {
            ClassicalKind::Coherent(a) => a,
            ClassicalKind::PhaseRing { center, .. } => center,
        }
    }

    fn groups(&self) -> &[Vec<usize>] {
        match self {
            ClassicalKind::Coherent(_) => &[],
            ClassicalKind::PhaseRing { groups, .. } => groups,
        }
    }

    fn in_group(&self, mode: usize) -> Option<usize> {
        self.groups().iter().position(|g| g.contains(&mode))
    }

    /// Diagonal in every mode's photon number, so it commutes with the
    /// truncation projector.
    pub fn commutes_with_truncation(&self) -> bool {
        self.center().amplitudes().iter().enumerate().all(|(m, a)| {
            *a == C64::zero()
                || self
                    .in_group(m)
                    .is_some_and(|g| self.groups()[g].len() == 1)
        })
    }

    /// Block diagonal in total photon number.
    pub fn is_number_block_diagonal(&self) -> bool {
        self.center()
            .amplitudes()
            .iter()
            .enumerate()
            .all(|(m, a)| *a == C64::zero() || self.in_group(m).is_some())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalComponent {
    pub weight: f64,
    pub kind: ClassicalKind,
}

/// Finite mixture of coherent projectors and phase rings: a classical state
/// given by its P-representation.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalEnsemble {
    modes: usize,
    components: Vec<ClassicalComponent>,
}

/// Compression `P sigma P` of a classical state onto a truncation, plus the
/// probability mass `1 - Tr P sigma P` it discards.
#[derive(Clone, Debug)]
pub struct Compressed {
    pub matrix: DensityMatrix,
    pub discarded: f64,
}

impl ClassicalEnsemble {
    /// Validates weights; sums within `1e-9` of one are renormalized.
    pub fn new(components: Vec<ClassicalComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::param("empty classical ensemble"))?;
        let modes = first.kind.center().modes();
        for (k, c) in components.iter().enumerate() {
            if !(c.weight >= 0.0) || !c.weight.is_finite() {
                return Err(Error::param(format!(
                    "component {k} has weight {}",
                    c.weight
                )));
            }
            if c.kind.center().modes() != modes {
                return Err(Error::shape(format!(
                    "component {k} has a different mode count"
                )));
            }
            let mut seen = vec![false; modes];
            for g in c.kind.groups() {
                if g.is_empty() {
                    return Err(Error::InvalidModes(format!(
                        "component {k} has an empty group"
                    )));
                }
                for &m in g {
                    if m >= modes || seen[m] {
                        return Err(Error::InvalidModes(format!(
                            "component {k}: groups must be disjoint modes below {modes}"
                        )));
                    }
                    seen[m] = true;
                }
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_RENORM_TOL {
            return Err(Error::param(format!("weights sum to {total}")));
        }
        let components = components
            .into_iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| ClassicalComponent {
                weight: c.weight / total,
                kind: c.kind,
            })
            .collect();
        Ok(Self { modes, components })
    }

    pub fn coherent(alpha: CoherentPoint) -> Self {
        Self {
            modes: alpha.modes(),
            components: vec![ClassicalComponent {
                weight: 1.0,
                kind: ClassicalKind::Coherent(alpha),
            }],
        }
    }

    /// Equal-weight mixture of coherent projectors.
    pub fn uniform_coherent(points: Vec<CoherentPoint>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        Self::new(
            points
                .into_iter()
                .map(|p| ClassicalComponent {
                    weight: w,
                    kind: ClassicalKind::Coherent(p),
                })
                .collect(),
        )
    }

    /// Phase-randomized coherent state of energy `energy` in `mode`, vacuum
    /// elsewhere.
    pub fn ring(mode: usize, energy: f64, modes: usize) -> Result<Self> {
        if !(energy >= 0.0) || !energy.is_finite() {
            return Err(Error::param(format!(
                "ring energy {energy} must be non-negative"
            )));
        }
        if mode >= modes {
            return Err(Error::InvalidModes(format!("mode {mode} of {modes}")));
        }
        let mut center = CoherentPoint::vacuum(modes);
        center.0[mode] = C64::new(energy.sqrt(), 0.0);
        Ok(Self {
            modes,
            components: vec![ClassicalComponent {
                weight: 1.0,
                kind: ClassicalKind::PhaseRing {
                    center,
                    groups: vec![vec![mode]],
                },
            }],
        })
    }

    /// Independent phase-randomized coherent states, one per mode.
    pub fn product_rings(energies: &[f64]) -> Result<Self> {
        if energies.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return Err(Error::param("ring energies must be non-negative"));
        }
        let center = CoherentPoint(energies.iter().map(|e| C64::new(e.sqrt(), 0.0)).collect());
        Self::new(vec![ClassicalComponent {
            weight: 1.0,
            kind: ClassicalKind::PhaseRing {
                center,
                groups: (0..energies.len()).map(|m| vec![m]).collect(),
            },
        }])
    }

    /// `|alpha>` with one common random phase over all modes.
    pub fn joint_ring(center: CoherentPoint) -> Self {
        let modes = center.modes();
        Self {
            modes,
            components: vec![ClassicalComponent {
                weight: 1.0,
                kind: ClassicalKind::PhaseRing {
                    center,
                    groups: vec![(0..modes).collect()],
                },
            }],
        }
    }

    /// Convex combination of ensembles.
    pub fn mix(parts: Vec<(f64, ClassicalEnsemble)>) -> Result<Self> {
        let mut comps = Vec::new();
        for (w, e) in parts {
            for c in e.components {
                comps.push(ClassicalComponent {
                    weight: w * c.weight,
                    kind: c.kind,
                });
            }
        }
        Self::new(comps)
    }

    /// `self ⊗ other`, modes of `self` first.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut comps = Vec::new();
        for a in &self.components {
            for b in &other.components {
                let mut center = a.kind.center().0.clone();
                center.extend_from_slice(&b.kind.center().0);
                let mut groups: Vec<Vec<usize>> = a.kind.groups().to_vec();
                groups.extend(
                    b.kind
                        .groups()
                        .iter()
                        .map(|g| g.iter().map(|m| m + self.modes).collect()),
                );
                let kind = if groups.is_empty() {
                    ClassicalKind::Coherent(CoherentPoint(center))
                } else {
                    ClassicalKind::PhaseRing {
                        center: CoherentPoint(center),
                        groups,
                    }
                };
                comps.push(ClassicalComponent {
                    weight: a.weight * b.weight,
                    kind,
                });
            }
        }
        Self::new(comps)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn components(&self) -> &[ClassicalComponent] {
        &self.components
    }

    pub fn commutes_with_truncation(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.kind.commutes_with_truncation())
    }

    pub fn is_number_block_diagonal(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.kind.is_number_block_diagonal())
    }

    /// Largest component energy `|alpha|^2`.
    pub fn max_energy(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.kind.center().energy())
            .fold(0.0, f64::max)
    }

    /// Per-mode cutoffs that hold every component within `tol`.
    pub fn sufficient_cutoffs(&self, tol: f64) -> Vec<usize> {
        let share = tol / self.components.len().max(1) as f64;
        let mut out = vec![1usize; self.modes];
        for c in &self.components {
            for (o, n) in out
                .iter_mut()
                .zip(sufficient_cutoffs(c.kind.center(), share))
            {
                *o = (*o).max(n);
            }
        }
        out
    }

    /// Probability mass of the ensemble outside the truncation.
    pub fn discarded_mass(&self, trunc: &TruncationSpec) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * coherent_tail(c.kind.center(), trunc))
            .sum()
    }

    /// `P sigma P v` without forming the matrix.
    pub fn apply_compressed(
        &self,
        trunc: &TruncationSpec,
        v: &DVector<C64>,
    ) -> Result<DVector<C64>> {
        if trunc.modes() != self.modes || v.len() != trunc.dim() {
            return Err(Error::shape(
                "vector does not match the ensemble truncation",
            ));
        }
        let mut out = DVector::<C64>::zeros(v.len());
        for c in &self.components {
            let amps = coherent_raw(c.kind.center(), trunc);
            let w = C64::new(c.weight, 0.0);
            match &c.kind {
                ClassicalKind::Coherent(_) => {
                    out += &amps * (amps.dotc(v) * w);
                }
                ClassicalKind::PhaseRing { groups, .. } => {
                    let keys = group_keys(trunc, groups);
                    let mut sums: alloc::collections::BTreeMap<&[usize], C64> = Default::default();
                    for (i, k) in keys.iter().enumerate() {
                        *sums.entry(k.as_slice()).or_insert_with(C64::zero) +=
                            amps[i].conj() * v[i];
                    }
                    for (i, k) in keys.iter().enumerate() {
                        out[i] += amps[i] * sums[k.as_slice()] * w;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `P sigma P` computed from the exact truncated coherent amplitudes.
    pub fn realize_compressed(&self, trunc: &TruncationSpec) -> Result<Compressed> {
        if trunc.modes() != self.modes {
            return Err(Error::shape(format!(
                "{}-mode ensemble at {}-mode truncation",
                self.modes,
                trunc.modes()
            )));
        }
        let d = trunc.dim();
        let mut mat = DMatrix::<C64>::zeros(d, d);
        let mut discarded = 0.0;
        for c in &self.components {
            let amps = coherent_raw(c.kind.center(), trunc);
            discarded += c.weight * coherent_tail(c.kind.center(), trunc);
            let w = C64::new(c.weight, 0.0);
            match &c.kind {
                ClassicalKind::Coherent(_) => {
                    mat += (&amps * amps.adjoint()) * w;
                }
                ClassicalKind::PhaseRing { groups, .. } => {
                    let keys = group_keys(trunc, groups);
                    for j in 0..d {
                        if amps[j] == C64::zero() {
                            continue;
                        }
                        let cj = amps[j].conj() * w;
                        for i in 0..d {
                            if keys[i] == keys[j] {
                                mat[(i, j)] += amps[i] * cj;
                            }
                        }
                    }
                }
            }
        }
        Ok(Compressed {
            matrix: DensityMatrix::from_parts(trunc.clone(), mat)?,
            discarded,
        })
    }

    /// Realization as a density matrix; the neglected mass must stay within
    /// the truncation's `tail_tol`.
    pub fn realize(&self, trunc: &TruncationSpec) -> Result<DensityMatrix> {
        let c = self.realize_compressed(trunc)?;
        if c.discarded > trunc.tail_tol() {
            return Err(Error::TruncationTooSmall {
                tail: c.discarded,
                tol: trunc.tail_tol(),
                required: self.sufficient_cutoffs(trunc.tail_tol()),
            });
        }
        Ok(c.matrix)
    }

    /// Realization of an ensemble that must be number-diagonal.
    pub fn realize_diag(&self, trunc: &TruncationSpec) -> Result<DensityMatrix> {
        if !self.commutes_with_truncation() {
            return Err(Error::NotDiagonal { defect: f64::NAN });
        }
        self.realize(trunc)
    }
}

/// Photon totals of each group, per basis index. A ring is diagonal in
/// these totals.
pub(crate) fn group_keys(trunc: &TruncationSpec, groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    (0..trunc.dim())
        .map(|i| {
            groups
                .iter()
                .map(|g| g.iter().map(|&m| trunc.occupation(i, m)).sum())
                .collect()
        })
        .collect()
}

/// Single-mode phase-randomized coherent state of mean photon number `energy`.
pub fn phase_randomized_coherent(energy: f64) -> Result<ClassicalEnsemble> {
    ClassicalEnsemble::ring(0, energy, 1)
}

/// Uniform mixture over modes of a ring of energy `n` in that mode, vacuum
/// elsewhere. Every equal-weight multimode N00N state is an eigenvector
/// with eigenvalue `gamma_n / M`.
pub fn noon_classical_witness(n: usize, modes: usize) -> Result<ClassicalEnsemble> {
    if n == 0 || modes == 0 {
        return Err(Error::param("need n >= 1 and at least one mode"));
    }
    let parts = (0..modes)
        .map(|m| {
            Ok((
                1.0 / modes as f64,
                ClassicalEnsemble::ring(m, n as f64, modes)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    ClassicalEnsemble::mix(parts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatWitness {
    AtBeta,
    AtAlphaStar,
}

/// `(|a><a| + |-a><-a|)/2` with `a = beta` or the Husimi maximizer; `a = 0`
/// collapses to the vacuum.
pub fn cat_classical_witness(kind: CatWitness, p: &CatParams) -> Result<ClassicalEnsemble> {
    let a = match kind {
        CatWitness::AtBeta => p.beta,
        CatWitness::AtAlphaStar => cat_alpha_star(p),
    };
    if a == 0.0 {
        return Ok(ClassicalEnsemble::coherent(CoherentPoint::vacuum(1)));
    }
    ClassicalEnsemble::uniform_coherent(vec![CoherentPoint::real(&[a]), CoherentPoint::real(&[-a])])
}

/// A state recipe. Each recipe knows a default truncation and the classical
/// witnesses that its structure suggests.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Number { ns: Vec<usize> },
    SinglePhoton { c: Vec<C64> },
    Noon { n: usize, c: Vec<C64> },
    Cat(CatParams),
    EntangledCoherent { params: CatParams, eta: f64 },
    Coherent { alpha: CoherentPoint },
    PhaseRandomized { energy: f64 },
    Mixture { terms: Vec<(f64, StateSpec)> },
    VacuumNumberMixture { n: usize, eta: f64 },
}

impl StateSpec {
    pub fn modes(&self) -> usize {
        match self {
            StateSpec::Number { ns } => ns.len(),
            StateSpec::SinglePhoton { c } | StateSpec::Noon { c, .. } => c.len(),
            StateSpec::Cat(_) | StateSpec::PhaseRandomized { .. } => 1,
            StateSpec::VacuumNumberMixture { .. } => 1,
            StateSpec::EntangledCoherent { .. } => 2,
            StateSpec::Coherent { alpha } => alpha.modes(),
            StateSpec::Mixture { terms } => terms.first().map_or(0, |(_, s)| s.modes()),
        }
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            StateSpec::Number { ns } => format!("number{ns:?}"),
            StateSpec::SinglePhoton { c } => format!("single_photon(M={})", c.len()),
            StateSpec::Noon { n, c } => format!("noon(n={n},M={})", c.len()),
            StateSpec::Cat(p) => format!(
                "cat({},beta={})",
                if p.parity == Parity::Even {
                    "even"
                } else {
                    "odd"
                },
                p.beta
            ),
            StateSpec::EntangledCoherent { params, eta } => format!(
                "entangled_coherent({},beta={},eta={eta})",
                if params.parity == Parity::Even {
                    "even"
                } else {
                    "odd"
                },
                params.beta
            ),
            StateSpec::Coherent { alpha } => format!("coherent(M={})", alpha.modes()),
            StateSpec::PhaseRandomized { energy } => format!("phase_randomized(n={energy})"),
            StateSpec::Mixture { terms } => format!("mixture({} terms)", terms.len()),
            StateSpec::VacuumNumberMixture { n, eta } => {
                format!("vacuum_number_mixture(n={n},eta={eta})")
            }
        }
    }

    /// Smallest per-mode cutoffs that represent the recipe: photon counts
    /// for Fock-type states, the amplitude heuristic for coherent-type ones.
    pub fn default_cutoffs(&self) -> Vec<usize> {
        match self {
            StateSpec::Number { ns } => ns.iter().map(|&n| n.max(1)).collect(),
            StateSpec::SinglePhoton { c } => vec![1; c.len()],
            StateSpec::Noon { n, c } => vec![(*n).max(1); c.len()],
            StateSpec::Cat(p) => vec![heuristic_cutoff(p.beta)],
            StateSpec::EntangledCoherent { params, eta } => vec![
                heuristic_cutoff(eta.sqrt() * params.beta),
                heuristic_cutoff((1.0 - eta).sqrt() * params.beta),
            ],
            StateSpec::Coherent { alpha } => alpha
                .amplitudes()
                .iter()
                .map(|a| heuristic_cutoff(a.norm()))
                .collect(),
            StateSpec::PhaseRandomized { energy } => vec![heuristic_cutoff(energy.sqrt())],
            StateSpec::VacuumNumberMixture { n, .. } => vec![(*n).max(1)],
            StateSpec::Mixture { terms } => {
                let mut out = vec![1usize; self.modes()];
                for (_, s) in terms {
                    for (o, c) in out.iter_mut().zip(s.default_cutoffs()) {
                        *o = (*o).max(c);
                    }
                }
                out
            }
        }
    }

    pub fn default_trunc(&self) -> Result<TruncationSpec> {
        TruncationSpec::new(self.default_cutoffs(), DEFAULT_TAIL_TOL)
    }

    pub fn build(&self, trunc: &TruncationSpec) -> Result<State> {
        if trunc.modes() != self.modes() {
            return Err(Error::shape(format!(
                "{}-mode state at {}-mode truncation",
                self.modes(),
                trunc.modes()
            )));
        }
        Ok(match self {
            StateSpec::Number { ns } => State::Pure(number_state(ns, trunc)?),
            StateSpec::SinglePhoton { c } => State::Pure(single_photon_superposition(c, trunc)?),
            StateSpec::Noon { n, c } => State::Pure(multimode_noon(*n, c, trunc)?),
            StateSpec::Cat(p) => State::Pure(cat_state(p, trunc)?),
            StateSpec::EntangledCoherent { params, eta } => {
                State::Pure(entangled_coherent(params, *eta, trunc)?)
            }
            StateSpec::Coherent { alpha } => State::Pure(coherent_amps(alpha, trunc)?),
            StateSpec::PhaseRandomized { energy } => {
                State::Mixed(phase_randomized_coherent(*energy)?.realize(trunc)?)
            }
            StateSpec::VacuumNumberMixture { n, eta } => {
                State::Mixed(vacuum_number_mixture(*n, *eta, trunc)?)
            }
            StateSpec::Mixture { terms } => {
                if terms.is_empty() {
                    return Err(Error::param("empty mixture"));
                }
                let total: f64 = terms.iter().map(|(w, _)| *w).sum();
                if terms.iter().any(|(w, _)| !(*w >= 0.0)) {
                    return Err(Error::param("mixture weights must be non-negative"));
                }
                if (total - 1.0).abs() > WEIGHT_RENORM_TOL {
                    return Err(Error::param(format!("mixture weights sum to {total}")));
                }
                let d = trunc.dim();
                let mut mat = DMatrix::<C64>::zeros(d, d);
                for (w, s) in terms {
                    let rho = s.build(trunc)?.density();
                    mat += rho.into_mat() * C64::new(w / total, 0.0);
                }
                State::Mixed(DensityMatrix::from_parts(trunc.clone(), mat)?)
            }
        })
    }

    /// Classical states suggested by the recipe's structure.
    pub fn witnesses(&self) -> Result<Vec<(String, ClassicalEnsemble)>> {
        let mut out = Vec::new();
        match self {
            StateSpec::Number { ns } => {
                let e: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
                out.push((
                    "phase-randomized".into(),
                    ClassicalEnsemble::product_rings(&e)?,
                ));
            }
            StateSpec::SinglePhoton { c } => {
                out.push((
                    "joint-ring".into(),
                    ClassicalEnsemble::joint_ring(CoherentPoint(c.clone())),
                ));
            }
            StateSpec::Noon { n, c } => {
                out.push(("noon-rings".into(), noon_classical_witness(*n, c.len())?));
                if *n == 1 {
                    out.push((
                        "joint-ring".into(),
                        ClassicalEnsemble::joint_ring(CoherentPoint(c.clone())),
                    ));
                }
            }
            StateSpec::Cat(p) => {
                out.push((
                    "cat-beta".into(),
                    cat_classical_witness(CatWitness::AtBeta, p)?,
                ));
                out.push((
                    "cat-alpha-star".into(),
                    cat_classical_witness(CatWitness::AtAlphaStar, p)?,
                ));
                let a = cat_alpha_star(p);
                out.push(("phase-randomized".into(), phase_randomized_coherent(a * a)?));
            }
            StateSpec::EntangledCoherent { params, eta } => {
                let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
                let b = params.beta;
                out.push((
                    "cat-beta".into(),
                    ClassicalEnsemble::uniform_coherent(vec![
                        CoherentPoint::real(&[t * b, r * b]),
                        CoherentPoint::real(&[-t * b, -r * b]),
                    ])?,
                ));
                let a = cat_alpha_star(params);
                let w = if a == 0.0 {
                    ClassicalEnsemble::coherent(CoherentPoint::vacuum(2))
                } else {
                    ClassicalEnsemble::uniform_coherent(vec![
                        CoherentPoint::real(&[t * a, r * a]),
                        CoherentPoint::real(&[-t * a, -r * a]),
                    ])?
                };
                out.push(("cat-alpha-star".into(), w));
            }
            StateSpec::Coherent { alpha } => {
                out.push(("self".into(), ClassicalEnsemble::coherent(alpha.clone())));
            }
            StateSpec::PhaseRandomized { energy } => {
                out.push(("self".into(), phase_randomized_coherent(*energy)?));
            }
            StateSpec::VacuumNumberMixture { n, eta } => {
                out.push((
                    "component-rings".into(),
                    ClassicalEnsemble::mix(vec![
                        (1.0 - eta, ClassicalEnsemble::ring(0, 0.0, 1)?),
                        (*eta, ClassicalEnsemble::ring(0, *n as f64, 1)?),
                    ])?,
                ));
            }
            StateSpec::Mixture { .. } => {}
        }
        Ok(out)
    }
}

/// Convenience: the density matrix of a pure state.
pub fn projector(psi: &FockVector) -> DensityMatrix {
    outer(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::husimi::gamma_n;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: &DVector<C64>, b: &DVector<C64>, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn number_states() {
        let t = TruncationSpec::uniform(1, 4).unwrap();
        assert_eq!(number_state(&[0], &t).unwrap().amps()[0], c(1.0, 0.0));
        assert_eq!(number_state(&[3], &t).unwrap().amps()[3], c(1.0, 0.0));
        let t2 = TruncationSpec::uniform(2, 2).unwrap();
        assert_eq!(
            number_state(&[1, 1], &t2).unwrap().amp(&[1, 1]).unwrap(),
            c(1.0, 0.0)
        );
        assert!(matches!(
            number_state(&[5], &t),
            Err(Error::CutoffExceeded { .. })
        ));
    }

    #[test]
    fn single_photon_states() {
        let t1 = TruncationSpec::uniform(1, 2).unwrap();
        let one = single_photon_superposition(&[c(1.0, 0.0)], &t1).unwrap();
        assert_eq!(one.amps(), number_state(&[1], &t1).unwrap().amps());
        let s = 1.0 / 3f64.sqrt();
        let t3 = TruncationSpec::uniform(3, 1).unwrap();
        let coeffs = [c(s, 0.0), c(0.0, s), c(-s, 0.0)];
        let v = single_photon_superposition(&coeffs, &t3).unwrap();
        assert_eq!(v.amp(&[1, 0, 0]).unwrap(), coeffs[0]);
        assert_eq!(v.amp(&[0, 1, 0]).unwrap(), coeffs[1]);
        assert_eq!(v.amp(&[0, 0, 1]).unwrap(), coeffs[2]);
        assert!(matches!(
            single_photon_superposition(
                &[c(1.0, 0.0), c(0.1, 0.0)],
                &TruncationSpec::uniform(2, 1).unwrap()
            ),
            Err(Error::Unnormalized { .. })
        ));
    }

    #[test]
    fn noon_states() {
        let t = TruncationSpec::uniform(2, 2).unwrap();
        let chi = noon_pair(2, 0.0, &t).unwrap();
        let s = 0.5f64.sqrt();
        assert!((chi.amp(&[2, 0]).unwrap() - c(s, 0.0)).norm() < 1e-15);
        assert!((chi.amp(&[0, 2]).unwrap() - c(s, 0.0)).norm() < 1e-15);
        let coeffs = [c(0.6, 0.0), c(0.0, 0.8)];
        let t1 = TruncationSpec::uniform(2, 1).unwrap();
        assert_eq!(
            multimode_noon(1, &coeffs, &t1).unwrap().amps(),
            single_photon_superposition(&coeffs, &t1).unwrap().amps()
        );
        let tm = TruncationSpec::uniform(1, 5).unwrap();
        assert_eq!(
            multimode_noon(5, &[c(1.0, 0.0)], &tm).unwrap().amps(),
            number_state(&[5], &tm).unwrap().amps()
        );
    }

    #[test]
    fn cat_limits_and_parity() {
        let t = TruncationSpec::uniform(1, 20).unwrap();
        let even = cat_state(&CatParams::even(1e-8).unwrap(), &t).unwrap();
        assert!(close(
            even.amps(),
            number_state(&[0], &t).unwrap().amps(),
            1e-7
        ));
        let odd = cat_state(&CatParams::odd(1e-4).unwrap(), &t).unwrap();
        assert!(close(
            odd.amps(),
            number_state(&[1], &t).unwrap().amps(),
            1e-6
        ));
        let p = CatParams::odd(1.3).unwrap();
        let v = cat_state(
            &p,
            &TruncationSpec::uniform(1, heuristic_cutoff(1.3)).unwrap(),
        )
        .unwrap();
        for (n, a) in v.amps().iter().enumerate() {
            if n % 2 == 0 {
                assert_eq!(*a, C64::zero());
            }
        }
        assert!(v.norm_defect() < 1e-12);
    }

    #[test]
    fn even_cat_vacuum_overlap() {
        let t = TruncationSpec::uniform(1, heuristic_cutoff(1.0)).unwrap();
        let v = cat_state(&CatParams::even(1.0).unwrap(), &t).unwrap();
        assert!((v.amps()[0].norm_sqr() - 1.0 / 1f64.cosh()).abs() < 1e-14);
    }

    #[test]
    fn cat_rejects_small_cutoff() {
        let t = TruncationSpec::uniform(1, 6).unwrap();
        match cat_state(&CatParams::even(2.0).unwrap(), &t) {
            Err(Error::TruncationTooSmall { required, .. }) => assert!(required[0] > 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cat_norms() {
        for &b in &[0.1, 1.0, 3.0] {
            let e = CatParams::even(b).unwrap().norm();
            let o = CatParams::odd(b).unwrap().norm();
            assert!((e + o - 2.0).abs() < 1e-15);
            assert!(e > 0.0 && e <= 2.0 && o > 0.0 && o <= 2.0);
        }
        assert!(CatParams::even(0.0).is_err());
        assert!(CatParams::odd(-1.0).is_err());
    }

    #[test]
    fn entangled_coherent_limits() {
        let p = CatParams::even(1.5).unwrap();
        let n = heuristic_cutoff(1.5);
        let t = TruncationSpec::new(vec![n, n], 1e-12).unwrap();
        let t1 = TruncationSpec::uniform(1, n).unwrap();
        let cat = cat_state(&p, &t1).unwrap();
        let vac = number_state(&[0], &t1).unwrap();
        let full = entangled_coherent(&p, 1.0, &t).unwrap();
        let expect = crate::fock::tensor_vectors(&cat, &vac).unwrap();
        assert!(close(full.amps(), expect.amps(), 1e-14));
        let none = entangled_coherent(&p, 0.0, &t).unwrap();
        let expect = crate::fock::tensor_vectors(&vac, &cat).unwrap();
        assert!(close(none.amps(), expect.amps(), 1e-14));
    }

    #[test]
    fn entangled_coherent_is_split_cat() {
        use crate::fock::{beam_splitter, passive_unitary, FockOperator};
        for parity in [Parity::Even, Parity::Odd] {
            for &(beta, eta) in &[(2.0, 0.5), (1.0, 0.3), (3.0, 0.8)] {
                let p = CatParams::new(parity, beta).unwrap();
                let n = heuristic_cutoff(beta);
                let t = TruncationSpec::new(vec![n, n], 1e-12).unwrap();
                let t1 = TruncationSpec::uniform(1, n).unwrap();
                let input = crate::fock::tensor_vectors(
                    &cat_state(&p, &t1).unwrap(),
                    &number_state(&[0], &t1).unwrap(),
                )
                .unwrap();
                let bs = passive_unitary(&beam_splitter(eta).unwrap(), &t).unwrap();
                let out = bs.apply_state(&input).unwrap();
                let ecs = entangled_coherent(&p, eta, &t).unwrap();
                let ov = crate::fock::overlap(&ecs, &out).unwrap();
                assert!((ov.norm() - 1.0).abs() < 1e-8, "{parity:?} {beta} {eta}");
                assert!(close(out.amps(), ecs.amps(), 1e-8));
            }
        }
    }

    #[test]
    fn vacuum_number_mixtures() {
        let t = TruncationSpec::uniform(1, 3).unwrap();
        let r = vacuum_number_mixture(1, 0.0, &t).unwrap();
        assert_eq!(r.diagonal_probabilities(), vec![1.0, 0.0, 0.0, 0.0]);
        let r = vacuum_number_mixture(3, 1.0, &t).unwrap();
        assert_eq!(r.diagonal_probabilities(), vec![0.0, 0.0, 0.0, 1.0]);
        let r = vacuum_number_mixture(1, 0.5, &t).unwrap();
        assert_eq!(r.diagonal_probabilities(), vec![0.5, 0.5, 0.0, 0.0]);
        assert!(r.off_diagonal_defect() == 0.0);
    }

    #[test]
    fn phase_randomized_is_poisson_diagonal() {
        let t = TruncationSpec::uniform(1, 40).unwrap();
        let vac = phase_randomized_coherent(0.0)
            .unwrap()
            .realize_diag(&t)
            .unwrap();
        assert_eq!(vac.mat()[(0, 0)], c(1.0, 0.0));
        assert!((vac.trace() - 1.0).abs() < 1e-15);
        let one = phase_randomized_coherent(1.0)
            .unwrap()
            .realize_diag(&t)
            .unwrap();
        let e = (-1.0f64).exp();
        assert!((one.mat()[(0, 0)].re - e).abs() < 1e-15);
        assert!((one.mat()[(1, 1)].re - e).abs() < 1e-15);
        assert!((one.mat()[(2, 2)].re - e / 2.0).abs() < 1e-15);
        assert!(one.off_diagonal_defect() == 0.0);
        let three = phase_randomized_coherent(3.0)
            .unwrap()
            .realize_diag(&t)
            .unwrap();
        assert!((three.mat()[(3, 3)].re - 0.22404180765538775).abs() < 1e-15);
        assert!((three.mat()[(3, 3)].re - gamma_n(3)).abs() < 1e-15);
    }

    #[test]
    fn realize_reports_truncation() {
        let t = TruncationSpec::uniform(1, 4).unwrap();
        assert!(matches!(
            phase_randomized_coherent(4.0).unwrap().realize(&t),
            Err(Error::TruncationTooSmall { .. })
        ));
        let comp = phase_randomized_coherent(4.0)
            .unwrap()
            .realize_compressed(&t)
            .unwrap();
        assert!((comp.matrix.trace() + comp.discarded - 1.0).abs() < 1e-14);
    }

    #[test]
    fn noon_witness_eigenvalue() {
        for &(n, m) in &[(2usize, 2usize), (2, 3), (3, 3), (1, 4)] {
            let t = TruncationSpec::uniform(m, n).unwrap();
            let sigma = noon_classical_witness(n, m)
                .unwrap()
                .realize_compressed(&t)
                .unwrap()
                .matrix;
            // equal moduli with arbitrary phases
            let coeffs: Vec<C64> = (0..m)
                .map(|k| C64::from_polar(1.0 / (m as f64).sqrt(), 0.7 * k as f64 + 0.3))
                .collect();
            let psi = multimode_noon(n, &coeffs, &t).unwrap();
            let lam = gamma_n(n) / m as f64;
            let residual = (sigma.mat() * psi.amps() - psi.amps() * C64::new(lam, 0.0)).norm();
            assert!(residual < 1e-10, "{n} {m} {residual}");
        }
        assert!((gamma_n(2) / 2.0 - 0.1353352832366127).abs() < 1e-15);
    }

    #[test]
    fn noon_witness_single_mode_is_ring() {
        let a = noon_classical_witness(3, 1).unwrap();
        let b = phase_randomized_coherent(3.0).unwrap();
        let t = TruncationSpec::uniform(1, 3).unwrap();
        let ra = a.realize_compressed(&t).unwrap();
        let rb = b.realize_compressed(&t).unwrap();
        assert_eq!(ra.matrix.mat(), rb.matrix.mat());
    }

    #[test]
    fn cat_witness_eigenvectors() {
        for parity in [Parity::Even, Parity::Odd] {
            for &beta in &[0.5, 1.0, 1.5, 2.0] {
                let p = CatParams::new(parity, beta).unwrap();
                let t = TruncationSpec::uniform(1, heuristic_cutoff(beta)).unwrap();
                let psi = cat_state(&p, &t).unwrap();
                let sigma = cat_classical_witness(CatWitness::AtBeta, &p)
                    .unwrap()
                    .realize(&t)
                    .unwrap();
                let lam = C64::new(p.norm() / 2.0, 0.0);
                let residual = (sigma.mat() * psi.amps() - psi.amps() * lam).norm();
                assert!(residual < 1e-10, "{parity:?} {beta} {residual}");
            }
        }
    }

    #[test]
    fn cat_witness_at_alpha_star_degenerates() {
        let w =
            cat_classical_witness(CatWitness::AtAlphaStar, &CatParams::even(0.8).unwrap()).unwrap();
        assert_eq!(w, ClassicalEnsemble::coherent(CoherentPoint::vacuum(1)));
    }

    #[test]
    fn ensemble_weights() {
        let k = ClassicalKind::Coherent(CoherentPoint::vacuum(1));
        let comp = |w| ClassicalComponent {
            weight: w,
            kind: k.clone(),
        };
        let e = ClassicalEnsemble::new(vec![comp(0.5), comp(0.5 + 5e-10)]).unwrap();
        let total: f64 = e.components().iter().map(|c| c.weight).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(ClassicalEnsemble::new(vec![comp(0.5), comp(0.6)]).is_err());
        assert!(ClassicalEnsemble::new(vec![comp(-0.5), comp(1.5)]).is_err());
        assert!(ClassicalEnsemble::new(vec![]).is_err());
    }

    #[test]
    fn product_rings_factorize() {
        let t2 = TruncationSpec::uniform(2, 30).unwrap();
        let t1 = TruncationSpec::uniform(1, 30).unwrap();
        let prod = ClassicalEnsemble::product_rings(&[1.0, 2.0])
            .unwrap()
            .realize(&t2)
            .unwrap();
        let a = phase_randomized_coherent(1.0)
            .unwrap()
            .realize(&t1)
            .unwrap();
        let b = phase_randomized_coherent(2.0)
            .unwrap()
            .realize(&t1)
            .unwrap();
        let ab = crate::fock::tensor(&a, &b).unwrap();
        assert!((prod.mat() - ab.mat()).norm() < 1e-14);
        let via = phase_randomized_coherent(1.0)
            .unwrap()
            .product(&phase_randomized_coherent(2.0).unwrap())
            .unwrap()
            .realize(&t2)
            .unwrap();
        assert!((via.mat() - ab.mat()).norm() < 1e-14);
    }

    #[test]
    fn joint_ring_structure() {
        let s = 0.5f64.sqrt();
        let e = ClassicalEnsemble::joint_ring(CoherentPoint(vec![c(s, 0.0), c(0.0, s)]));
        assert!(e.is_number_block_diagonal());
        assert!(!e.commutes_with_truncation());
        let t = TruncationSpec::uniform(2, 20).unwrap();
        let r = e.realize(&t).unwrap();
        for i in 0..t.dim() {
            for j in 0..t.dim() {
                if t.total_photons(i) != t.total_photons(j) {
                    assert_eq!(r.mat()[(i, j)], C64::zero());
                }
            }
        }
        let min = r.hermitian_part().symmetric_eigenvalues().min();
        assert!(min >= -1e-12);
    }

    #[test]
    fn apply_compressed_matches_matrix() {
        let t = TruncationSpec::uniform(2, 6).unwrap();
        let e = ClassicalEnsemble::mix(vec![
            (
                0.3,
                ClassicalEnsemble::joint_ring(CoherentPoint(vec![c(0.5, 0.2), c(-0.3, 0.4)])),
            ),
            (
                0.5,
                ClassicalEnsemble::coherent(CoherentPoint(vec![c(0.1, 0.0), c(0.0, -0.2)])),
            ),
            (0.2, ClassicalEnsemble::product_rings(&[0.7, 1.1]).unwrap()),
        ])
        .unwrap();
        let v = DVector::from_fn(t.dim(), |i, _| {
            c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())
        });
        let fast = e.apply_compressed(&t, &v).unwrap();
        let comp = e.realize_compressed(&t).unwrap();
        assert!((fast - comp.matrix.mat() * &v).norm() < 1e-13);
        assert!((e.discarded_mass(&t) - comp.discarded).abs() < 1e-15);
    }

    #[test]
    fn spec_builds_and_default_truncations() {
        let s = StateSpec::Mixture {
            terms: vec![
                (0.5, StateSpec::Number { ns: vec![0] }),
                (0.5, StateSpec::Number { ns: vec![2] }),
            ],
        };
        let t = s.default_trunc().unwrap();
        assert_eq!(t.cutoffs(), &[2]);
        let rho = s.build(&t).unwrap().density();
        let expect = vacuum_number_mixture(2, 0.5, &t).unwrap();
        assert_eq!(rho.mat(), expect.mat());
        let cat = StateSpec::Cat(CatParams::odd(1.2).unwrap());
        assert_eq!(cat.default_cutoffs(), vec![heuristic_cutoff(1.2)]);
        assert!(matches!(
            cat.build(&cat.default_trunc().unwrap()).unwrap(),
            State::Pure(_)
        ));
    }
}
