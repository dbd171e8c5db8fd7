//! Scalar special functions: log-factorials, Poisson masses and the
//! hyperbolic helpers used by the cat-state formulas.

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    libm::lgamma(n as f64 + 1.0)
}

/// Poisson probability `e^{-mean} mean^k / k!`.
pub fn poisson_pmf(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mean.ln() - mean - ln_factorial(k)).exp()
}

/// Upper tail `P[X > cutoff]` of a Poisson variable with the given mean.
///
/// Summed term by term above the cutoff when the tail is small, so tiny
/// tails keep full relative precision.
pub fn poisson_upper_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    if (cutoff as f64) < mean + 1.0 {
        let head: f64 = (0..=cutoff).map(|k| poisson_pmf(mean, k)).sum();
        return (1.0 - head).max(0.0);
    }
    let mut k = cutoff + 1;
    let mut term = poisson_pmf(mean, k);
    let mut sum = 0.0;
    while term > 0.0 && term > sum * 1e-18 {
        sum += term;
        k += 1;
        term *= mean / k as f64;
    }
    sum
}

/// Smallest cutoff `N` with `P[X > N] <= tol` for a Poisson variable.
pub fn min_cutoff_for_tail(mean: f64, tol: f64) -> usize {
    if mean == 0.0 {
        return 0;
    }
    let mut n = mean.floor() as usize;
    while poisson_upper_tail(mean, n) > tol {
        n += 1;
    }
    n
}

/// Cutoff heuristic `ceil(a^2 + 8a + 20)` for components of amplitude `a`.
pub fn heuristic_cutoff(amplitude: f64) -> usize {
    let a = amplitude.abs();
    (a * a + 8.0 * a + 20.0).ceil() as usize
}

/// `ln cosh x` without overflow.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - core::f64::consts::LN_2
}

/// `ln sinh x` for `x > 0` without overflow.
pub fn ln_sinh(x: f64) -> f64 {
    if x < 20.0 {
        x.sinh().ln()
    } else {
        x - core::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    }
}
