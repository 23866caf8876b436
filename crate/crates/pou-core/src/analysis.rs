//! Closed-form classical-OU characteristic functions, the deterministic
//! optimality metric, the series-bound check, rate fitting, time averages,
//! and CLT diagnostics.
//!
//! For the scalar chain `Y_{t_{n+1}} = (1 - eta_{n+1}) Y_{t_n} + dZ`, driven
//! by increments with characteristic function `exp(-eta |u|^alpha)`, the
//! marginal characteristic function is available in closed form:
//!
//! ```text
//! E exp(i u Y_{t_n}) = exp(-|u|^alpha sum_j eta_j prod_{k>j} (1 - eta_k)^alpha),
//! ```
//!
//! and the stationary law of the continuous OU process has
//! `E exp(i u X_inf) = exp(-|u|^alpha / alpha)`. The signed integral of the
//! difference over [-1, 1] is a deterministic, quadrature-computable
//! surrogate for the Wasserstein-1 lower bound, and its ratio to
//! `eta_n^(1/alpha)` probes rate optimality without any sampling.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{gauss_legendre, KahanSum};
use crate::scheme::StepSchedule;
use crate::special::normal_cdf;

/// Decay exponent `A_n = sum_j eta_j prod_{k=j+1}^n (1 - eta_k)^alpha`,
/// with the inner products evaluated in log space.
fn em_charfn_exponent(sched: &StepSchedule, n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("chain length n must be >= 1"));
    }
    // prefix log-products L_j = sum_{k<=j} ln(1 - eta_k)
    let mut lsum = KahanSum::new();
    let mut prefix = Vec::with_capacity(n);
    let mut etas = Vec::with_capacity(n);
    for k in 1..=n {
        let eta = sched.eta(k)?;
        if eta >= 1.0 {
            return Err(Error::invalid(format!("eta_{k} = {eta} >= 1: charfn formula invalid")));
        }
        lsum.add((1.0 - eta).ln());
        prefix.push(lsum.value());
        etas.push(eta);
    }
    let ln_total = lsum.value();
    let mut acc = KahanSum::new();
    for j in 0..n {
        acc.add(etas[j] * (alpha * (ln_total - prefix[j])).exp());
    }
    Ok(acc.value())
}

/// Characteristic function of the scalar decreasing-step OU chain at
/// frequency `u` after `n` steps.
pub fn ou_em_charfn(sched: &StepSchedule, n: usize, alpha: f64, u: f64) -> Result<f64> {
    let a_n = em_charfn_exponent(sched, n, alpha)?;
    Ok((-u.abs().powf(alpha) * a_n).exp())
}

/// Stationary characteristic function `exp(-|u|^alpha / alpha)` of the
/// classical OU process.
pub fn ou_stationary_charfn(alpha: f64, u: f64) -> f64 {
    (-u.abs().powf(alpha) / alpha).exp()
}

/// Signed characteristic-function distance
/// `D_n = int_{-1}^{1} [phi_n(u) - phi_inf(u)] du`
/// by Gauss-Legendre quadrature; fully deterministic.
pub fn ou_char_distance(
    sched: &StepSchedule,
    n: usize,
    alpha: f64,
    quad_points: usize,
) -> Result<f64> {
    if quad_points == 0 {
        return Err(Error::invalid("quadrature needs at least one node"));
    }
    let a_n = em_charfn_exponent(sched, n, alpha)?;
    let (nodes, weights) = gauss_legendre(quad_points);
    let mut acc = KahanSum::new();
    for (x, w) in nodes.iter().zip(&weights) {
        let ua = x.abs().powf(alpha);
        acc.add(w * ((-ua * a_n).exp() - (-ua / alpha).exp()));
    }
    Ok(acc.value())
}

/// `D_n / eta_n^(1/alpha)` for the schedule `eta_n = 1/(alpha^2 n)`;
/// boundedness of this ratio away from 0 and infinity is the checkable
/// content of rate optimality for the classical OU chain.
pub fn optimality_ratio(alpha: f64, n: usize) -> Result<f64> {
    if n < 10 {
        return Err(Error::invalid("optimality ratio probes need n >= 10"));
    }
    let sched = StepSchedule::alpha_harmonic(alpha)?;
    let d = ou_char_distance(&sched, n, alpha, 64)?;
    let eta = sched.eta(n)?;
    Ok(d / eta.powf(1.0 / alpha))
}

/// `sum_{i<=n} exp(-theta (t_n - t_i)) eta_i^(1 + 1/alpha) / eta_n^(1/alpha)`,
/// compensated summation throughout. Boundedness in `n` is the discrete
/// convolution estimate behind the scheme's rate.
pub fn series_bound_ratio(sched: &StepSchedule, theta: f64, alpha: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("series bound needs n >= 1"));
    }
    let mut t = KahanSum::new();
    let mut ts = Vec::with_capacity(n);
    let mut etas = Vec::with_capacity(n);
    for k in 1..=n {
        let eta = sched.eta(k)?;
        t.add(eta);
        ts.push(t.value());
        etas.push(eta);
    }
    let tn = ts[n - 1];
    let p = 1.0 + 1.0 / alpha;
    let mut acc = KahanSum::new();
    for i in 0..n {
        acc.add((-theta * (tn - ts[i])).exp() * etas[i].powf(p));
    }
    Ok(acc.value() / etas[n - 1].powf(1.0 / alpha))
}

#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `log w1` on `log eta`; probes an empirical
/// power-law rate.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::invalid("rate fit needs at least 4 points"));
    }
    if points.iter().any(|&(e, w)| !(e > 0.0) || !(w > 0.0)) {
        return Err(Error::invalid("rate fit needs strictly positive (eta, w1) pairs"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("rate fit needs at least two distinct eta values"));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit { slope, intercept, r2 })
}

/// Bounded scalar test functions for time averages and CLT checks, applied
/// to the first state coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// Constant 1; time averages of it are exactly 1.
    One,
    /// Indicator of the half-line `x_0 > 0`.
    IndicatorPositive,
    /// `clamp(x_0, -1, 1)`.
    ClipCoord,
    /// `sin(x_0)`.
    SinCoord,
}

impl TestFunction {
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            TestFunction::One => 1.0,
            TestFunction::IndicatorPositive => {
                if x[0] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::ClipCoord => x[0].clamp(-1.0, 1.0),
            TestFunction::SinCoord => x[0].sin(),
        }
    }
}

/// Left-endpoint Riemann time average of `h` along a discretised path:
/// `sum_i (t_i - t_{i-1}) h(x_{i-1}) / (t_n - t_0)`. Consistent with how the
/// chain is generated; no interpolation.
pub fn time_average(path: &[(f64, DVector<f64>)], h: TestFunction) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::invalid("time average of an empty path"));
    }
    let total = path[path.len() - 1].0 - path[0].0;
    if path.len() == 1 || total <= 0.0 {
        return Ok(h.eval(&path[0].1));
    }
    let mut acc = KahanSum::new();
    for w in path.windows(2) {
        acc.add((w[1].0 - w[0].0) * h.eval(&w[0].1));
    }
    Ok(acc.value() / total)
}

#[derive(Debug, Clone, Copy)]
pub struct CltDiagnostics {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Adjusted Fisher-Pearson skewness G1.
    pub skewness: f64,
    /// Adjusted excess kurtosis G2.
    pub excess_kurtosis: f64,
    /// KS distance against the normal with matched mean and variance;
    /// `None` when the sample is degenerate.
    pub ks_distance_vs_fitted_normal: Option<f64>,
    pub degenerate: bool,
}

/// Moment and Kolmogorov-Smirnov diagnostics of approximate normality.
pub fn clt_diagnostics(samples: &[f64]) -> Result<CltDiagnostics> {
    let n = samples.len();
    if n < 200 {
        return Err(Error::invalid(format!("CLT diagnostics need >= 200 samples (got {n})")));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let variance = m2 * nf / (nf - 1.0);
    if m2 <= 1e-300 * (1.0 + mean * mean) {
        return Ok(CltDiagnostics {
            mean,
            variance: 0.0,
            skewness: 0.0,
            excess_kurtosis: 0.0,
            ks_distance_vs_fitted_normal: None,
            degenerate: true,
        });
    }
    let g1 = m3 / m2.powf(1.5);
    let skewness = g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0);
    let g2 = m4 / (m2 * m2) - 3.0;
    let excess_kurtosis =
        ((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0));
    let sd = variance.sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = ks_distance_sorted(&sorted, |x| normal_cdf(x, mean, sd));
    Ok(CltDiagnostics {
        mean,
        variance,
        skewness,
        excess_kurtosis,
        ks_distance_vs_fitted_normal: Some(ks),
        degenerate: false,
    })
}

/// One-sample KS statistic against a CDF; input must be sorted ascending.
pub fn ks_distance_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    d
}

/// Two-sample KS statistic.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let t = a[i].min(b[j]);
        while i < n && a[i] <= t {
            i += 1;
        }
        while j < m && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Critical value of the (one- or two-sample) KS statistic at level `alpha`;
/// multiply by `sqrt((n + m)/(n m))` for two samples or `1/sqrt(n)` for one.
pub fn ks_critical_coefficient(level: f64) -> f64 {
    ((2.0 / level).ln() / 2.0).sqrt()
}
