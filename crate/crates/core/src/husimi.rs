//! Husimi function `Q(alpha) = <alpha|rho|alpha>` and its supremum over
//! phase space.
//!
//! `Q` only involves the components of `|alpha>` inside the truncation, so
//! it is exact for the represented state at every `alpha`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{
    coherent_raw, CoherentPoint, DensityMatrix, State, TruncationSpec, C64, DEFAULT_H_TOL,
};
use crate::optimize::{newton_polish_max, NelderMead};
use crate::special::{ln_cosh, ln_factorial, ln_sinh};
use crate::states::{CatParams, Parity};

/// `gamma_n = e^{-n} n^n / n!`, the Poisson probability of the mean.
pub fn gamma_n(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let x = n as f64;
    (x * x.ln() - x - ln_factorial(n)).exp()
}

/// `<alpha| rho |alpha>`.
pub fn q_tilde(rho: &DensityMatrix, alpha: &CoherentPoint) -> Result<f64> {
    check_point(rho.trunc(), alpha)?;
    let v = coherent_raw(alpha, rho.trunc());
    Ok(v.dotc(&(rho.mat() * &v)).re)
}

/// `|<alpha|psi>|^2`.
pub fn q_tilde_pure(psi: &crate::fock::FockVector, alpha: &CoherentPoint) -> Result<f64> {
    check_point(psi.trunc(), alpha)?;
    Ok(coherent_raw(alpha, psi.trunc()).dotc(psi.amps()).norm_sqr())
}

fn check_point(trunc: &TruncationSpec, alpha: &CoherentPoint) -> Result<()> {
    if alpha.modes() != trunc.modes() {
        return Err(Error::shape(
            "coherent point and state have different mode counts",
        ));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QMethod {
    Analytic,
    RootFind,
    Multistart,
}

impl QMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            QMethod::Analytic => "analytic",
            QMethod::RootFind => "root_find",
            QMethod::Multistart => "multistart",
        }
    }
}

/// `m = sup Q` with the maximizers found and the gradient norm there.
#[derive(Clone, Debug, PartialEq)]
pub struct QSupremum {
    pub value: f64,
    pub argmax: Vec<CoherentPoint>,
    pub method: QMethod,
    pub certificate: f64,
}

/// Spectral form `rho = sum_k w_k |v_k><v_k|` with the lowered vectors
/// `a_m v_k` cached, giving `Q` and its exact gradient.
#[derive(Clone, Debug)]
pub struct HusimiModel {
    trunc: TruncationSpec,
    comps: Vec<(f64, DVector<C64>, Vec<DVector<C64>>)>,
}

fn lower(trunc: &TruncationSpec, mode: usize, v: &DVector<C64>) -> DVector<C64> {
    let stride = trunc.strides()[mode];
    let cut = trunc.cutoffs()[mode];
    DVector::from_fn(v.len(), |i, _| {
        let n = trunc.occupation(i, mode);
        if n < cut {
            v[i + stride] * ((n + 1) as f64).sqrt()
        } else {
            C64::zero()
        }
    })
}

impl HusimiModel {
    pub fn new(state: &State) -> Result<Self> {
        let trunc = state.trunc().clone();
        let raw: Vec<(f64, DVector<C64>)> = match state {
            State::Pure(psi) => vec![(1.0, psi.amps().clone())],
            State::Mixed(rho) => {
                rho.check_hermitian(DEFAULT_H_TOL)?;
                let eig = rho.hermitian_part().symmetric_eigen();
                let mut out = Vec::new();
                for (k, &w) in eig.eigenvalues.iter().enumerate() {
                    if w < -DEFAULT_H_TOL {
                        return Err(Error::NotPositive { min_eigenvalue: w });
                    }
                    if w > 1e-15 {
                        out.push((w, eig.eigenvectors.column(k).into_owned()));
                    }
                }
                out
            }
        };
        let comps = raw
            .into_iter()
            .map(|(w, v)| {
                let low = (0..trunc.modes()).map(|m| lower(&trunc, m, &v)).collect();
                (w, v, low)
            })
            .collect();
        Ok(Self { trunc, comps })
    }

    pub fn modes(&self) -> usize {
        self.trunc.modes()
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn value(&self, alpha: &CoherentPoint) -> f64 {
        let c = coherent_raw(alpha, &self.trunc);
        self.comps
            .iter()
            .map(|(w, v, _)| w * c.dotc(v).norm_sqr())
            .sum()
    }

    /// `dQ/d alpha_m^*` for each mode.
    pub fn wirtinger_gradient(&self, alpha: &CoherentPoint) -> Vec<C64> {
        let c = coherent_raw(alpha, &self.trunc);
        let mut out = vec![C64::zero(); self.modes()];
        for (w, v, low) in &self.comps {
            let g = c.dotc(v);
            for (m, o) in out.iter_mut().enumerate() {
                let ag = c.dotc(&low[m]);
                *o += (ag * g.conj() - alpha.0[m] * g.norm_sqr()) * *w;
            }
        }
        out
    }

    /// Gradient with respect to `(Re alpha_1, Im alpha_1, Re alpha_2, ...)`.
    pub fn real_gradient(&self, alpha: &CoherentPoint) -> Vec<f64> {
        self.wirtinger_gradient(alpha)
            .iter()
            .flat_map(|g| [2.0 * g.re, 2.0 * g.im])
            .collect()
    }

    /// `Tr(rho a_m)` per mode.
    pub fn mean_amplitudes(&self) -> Vec<C64> {
        (0..self.modes())
            .map(|m| {
                self.comps
                    .iter()
                    .map(|(w, v, low)| v.dotc(&low[m]) * *w)
                    .sum()
            })
            .collect()
    }

    /// `Tr(rho n_m)` per mode.
    pub fn mean_photons(&self) -> Vec<f64> {
        (0..self.modes())
            .map(|m| {
                self.comps
                    .iter()
                    .map(|(w, _, low)| w * low[m].norm_squared())
                    .sum()
            })
            .collect()
    }
}

fn to_point(x: &[f64]) -> CoherentPoint {
    CoherentPoint(x.chunks(2).map(|p| C64::new(p[0], p[1])).collect())
}

fn to_real(a: &CoherentPoint) -> Vec<f64> {
    a.0.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub const DEFAULT_SEED: u64 = 0x6e63_6430;

#[derive(Clone, Debug)]
pub struct QSupConfig {
    pub seed: u64,
    /// Random starts; `None` means `8 M + 2`.
    pub random_starts: Option<usize>,
    pub max_evals: usize,
    pub hints: Vec<CoherentPoint>,
    pub tie_tol: f64,
    pub distinct: f64,
}

impl Default for QSupConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            random_starts: None,
            max_evals: 2000,
            hints: Vec::new(),
            tie_tol: 1e-9,
            distinct: 1e-4,
        }
    }
}

/// Multistart maximization of `Q` over `C^M`.
///
/// Starts at the origin, at `Tr(rho a)`, at the hints, and at random
/// points in a disk of radius `sqrt(<n_m>) + 2` per mode. Each start runs a
/// Nelder–Mead search followed by a Newton polish on the exact gradient.
pub fn q_sup(state: &State, config: &QSupConfig) -> Result<QSupremum> {
    let model = HusimiModel::new(state)?;
    q_sup_model(&model, config)
}

pub fn q_sup_model(model: &HusimiModel, config: &QSupConfig) -> Result<QSupremum> {
    let modes = model.modes();
    for h in &config.hints {
        if h.modes() != modes {
            return Err(Error::shape("hint has the wrong number of modes"));
        }
    }
    let mut starts = vec![
        CoherentPoint::vacuum(modes),
        CoherentPoint(model.mean_amplitudes()),
    ];
    starts.extend(config.hints.iter().cloned());
    let radii: Vec<f64> = model
        .mean_photons()
        .iter()
        .map(|n| n.max(0.0).sqrt() + 2.0)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let count = config.random_starts.unwrap_or(8 * modes + 2);
    for _ in 0..count {
        let p = radii
            .iter()
            .map(|&r| {
                let u: f64 = rng.random();
                let t: f64 = rng.random();
                C64::from_polar(r * u.sqrt(), core::f64::consts::TAU * t)
            })
            .collect();
        starts.push(CoherentPoint(p));
    }

    let f = |x: &[f64]| model.value(&to_point(x));
    let grad = |x: &[f64]| model.real_gradient(&to_point(x));
    let nm = NelderMead {
        max_evals: config.max_evals,
        ..Default::default()
    };
    let mut found: Vec<(f64, Vec<f64>, f64)> = Vec::with_capacity(starts.len());
    for s in &starts {
        let x0 = to_real(s);
        let m = nm.minimize(|x| -f(x), &x0);
        let (x, gn) = newton_polish_max(f, grad, &m.x, 40);
        found.push((f(&x), x, gn));
    }
    let best = found.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(Error::Numerical(
            "Husimi search produced no finite value".into(),
        ));
    }
    let mut ties: Vec<(f64, Vec<f64>, f64)> = found
        .into_iter()
        .filter(|r| r.0 >= best - config.tie_tol * best.abs())
        .collect();
    ties.sort_by(|a, b| {
        a.1.iter()
            .zip(&b.1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut distinct: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    for r in ties {
        let far = distinct.iter().all(|d| {
            d.1.iter()
                .zip(&r.1)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                > config.distinct
        });
        if far {
            distinct.push(r);
        }
    }
    let certificate = distinct.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(QSupremum {
        value: best,
        argmax: distinct.iter().map(|r| to_point(&r.1)).collect(),
        method: QMethod::Multistart,
        certificate,
    })
}

/// Closed form for multimode N00N states `sum_m c_m |n in mode m>`:
/// `gamma_n max_m |c_m|^2` for `n >= 2`, and `e^{-1}` at `alpha = c` for
/// `n = 1`. For `n >= 2` the maximizers form rings; one point per maximal
/// mode is returned, phased so that `<alpha|psi>` is real.
pub fn noon_qmax_analytic(n: usize, c: &[C64]) -> Result<QSupremum> {
    if n == 0 || c.is_empty() {
        return Err(Error::param(
            "need n >= 1 and a non-empty coefficient vector",
        ));
    }
    let norm_sqr: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > 1e-12 {
        return Err(Error::Unnormalized { norm_sqr });
    }
    if n == 1 {
        return Ok(QSupremum {
            value: gamma_n(1),
            argmax: vec![CoherentPoint(c.to_vec())],
            method: QMethod::Analytic,
            certificate: 0.0,
        });
    }
    let top = c.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let r = (n as f64).sqrt();
    let argmax = c
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm_sqr() >= top * (1.0 - 1e-12))
        .map(|(m, z)| {
            let mut p = CoherentPoint::vacuum(c.len());
            p.0[m] = C64::from_polar(r, z.arg() / n as f64);
            p
        })
        .collect();
    Ok(QSupremum {
        value: gamma_n(n) * top,
        argmax,
        method: QMethod::Analytic,
        certificate: 0.0,
    })
}

fn bisect_newton<F, D>(g: F, dg: D, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let glo = g(lo);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let d = dg(x);
        if d != 0.0 {
            let next = x - g(x) / d;
            if next.is_finite() {
                x = next;
            }
        }
    }
    x
}

/// Positive Husimi maximizer of a cat state on the real axis. Zero for even
/// cats with `beta <= 1`.
pub fn cat_alpha_star(p: &CatParams) -> f64 {
    let b = p.beta;
    match p.parity {
        Parity::Even => {
            if b <= 1.0 {
                return 0.0;
            }
            bisect_newton(
                |a| b * (b * a).tanh() - a,
                |a| {
                    let s = 1.0 / (b * a).cosh();
                    b * b * s * s - 1.0
                },
                1e-12,
                b,
            )
        }
        Parity::Odd => bisect_newton(
            |a| b / (b * a).tanh() - a,
            |a| {
                let s = 1.0 / (b * a).sinh();
                -b * b * s * s - 1.0
            },
            b * (1.0 + 1e-12),
            b / (b * b).tanh() + 1.0,
        ),
    }
}

/// Husimi function of a cat state at real `alpha`, evaluated in log space.
pub fn cat_q_real(p: &CatParams, alpha: f64) -> f64 {
    let b = p.beta;
    match p.parity {
        Parity::Even => (-ln_cosh(b * b) - alpha * alpha + 2.0 * ln_cosh(b * alpha)).exp(),
        Parity::Odd => {
            if alpha == 0.0 {
                return 0.0;
            }
            (-ln_sinh(b * b) - alpha * alpha + 2.0 * ln_sinh((b * alpha).abs())).exp()
        }
    }
}

/// Supremum of the cat-state Husimi function from the one-dimensional
/// stationarity condition `beta tanh(beta a) = a` (even) or
/// `beta coth(beta a) = a` (odd). The certificate is `|dQ/da|` at the root.
pub fn cat_qmax(p: &CatParams) -> QSupremum {
    let a = cat_alpha_star(p);
    let m = cat_q_real(p, a);
    let b = p.beta;
    let slope = match p.parity {
        Parity::Even => 2.0 * m * (b * (b * a).tanh() - a),
        Parity::Odd => 2.0 * m * (b / (b * a).tanh() - a),
    };
    let argmax = if a == 0.0 {
        vec![CoherentPoint::real(&[0.0])]
    } else {
        vec![CoherentPoint::real(&[-a]), CoherentPoint::real(&[a])]
    };
    QSupremum {
        value: m,
        argmax,
        method: QMethod::RootFind,
        certificate: slope.abs(),
    }
}
