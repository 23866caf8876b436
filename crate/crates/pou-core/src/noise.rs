//! Reproducible noise generation: counter-based random streams, symmetric
//! alpha-stable variates via the Chambers-Mallows-Stuck construction, and
//! the time-step increments used by the Euler-Maruyama chain.
//!
//! Scale conventions. The primitive stable variate returned by
//! [`sample_standard_stable`] has characteristic function `exp(-|u|^alpha)`.
//! Increments for the simulated SDE are calibrated by `1/sigma_tilde` with
//! `sigma_tilde = (alpha / (2 c_alpha))^(1/alpha)`, matching the scale in
//! which the model's Levy measure is stated; classical-OU analyses in
//! [`crate::analysis`] use the primitive directly.

use nalgebra::DVector;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::NoiseKind;
use crate::special::gamma;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based random stream. The pair `(master_seed, stream_index)`
/// determines the full output sequence; the counter is the position within
/// it. Distinct stream indices give statistically independent sequences, so
/// ensembles may hand one stream per trajectory to workers in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    counter: u64,
    key: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let key = mix(mix(master_seed) ^ mix(stream_index.wrapping_add(GOLDEN)));
        Self { master_seed, stream_index, counter: 0, key }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        out
    }

    /// Uniform on the open interval (0, 1); never returns an endpoint, so
    /// logarithms of the output are always finite.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal via Box-Muller (two uniforms per draw).
    #[inline]
    pub fn next_standard_normal(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_open01();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

/// Levy-measure normalisation
/// `c_alpha = alpha 2^(alpha-1) pi^(-1/2) Gamma((1+alpha)/2) / Gamma(1-alpha/2)`,
/// the density constant for which the one-dimensional symmetric stable
/// process has characteristic exponent `|u|^alpha`.
///
/// Defined for `alpha in (0, 2)`; the pole of `Gamma(1 - alpha/2)` makes
/// `alpha = 2` invalid. Values at and below 1 are a continuation used only
/// by tests.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::invalid(format!(
            "c_alpha requires alpha in (0, 2) (got {alpha}); alpha = 2 hits the Gamma pole"
        )));
    }
    Ok(alpha * 2f64.powf(alpha - 1.0) * PI.powf(-0.5) * gamma((1.0 + alpha) / 2.0)
        / gamma(1.0 - alpha / 2.0))
}

/// Increment calibration `sigma_tilde = (alpha / (2 c_alpha))^(1/alpha)`.
pub fn sigma_tilde(alpha: f64) -> Result<f64> {
    Ok((alpha / (2.0 * c_alpha(alpha)?)).powf(1.0 / alpha))
}

/// Symmetric alpha-stable variate with characteristic function
/// `exp(-|u|^alpha)`, by the Chambers-Mallows-Stuck construction
///
/// ```text
/// xi = sin(alpha U) / cos(U)^(1/alpha) * [cos((1 - alpha) U) / E]^((1-alpha)/alpha)
/// ```
///
/// with `U` uniform on (-pi/2, pi/2) and `E` unit exponential. At
/// `alpha = 2` this reduces to `2 sin(U) sqrt(E)`, a N(0, 2) variate.
pub fn sample_standard_stable(alpha: f64, stream: &mut RngStream) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::invalid(format!("alpha must lie in (1, 2] (got {alpha})")));
    }
    let u = PI * (stream.next_open01() - 0.5);
    let e = -stream.next_open01().ln();
    Ok((alpha * u).sin() / u.cos().powf(1.0 / alpha)
        * (((1.0 - alpha) * u).cos() / e).powf((1.0 - alpha) / alpha))
}

/// Positive (totally skewed) stable variate with Laplace transform
/// `E exp(-u S) = exp(-u^a)` for `a in (0, 1)`, one-sided CMS form.
pub fn sample_positive_stable(alpha_half: f64, stream: &mut RngStream) -> Result<f64> {
    if !(alpha_half > 0.0 && alpha_half < 1.0) {
        return Err(Error::invalid(format!(
            "positive-stable index must lie in (0, 1) (got {alpha_half})"
        )));
    }
    let a = alpha_half;
    let u = PI * stream.next_open01();
    let e = -stream.next_open01().ln();
    Ok((a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a))
}

/// One time-step noise increment `Delta Z_eta` in dimension `d`.
///
/// - `Brownian`: `sqrt(eta) * G` componentwise, `G` standard normal.
/// - `CylindricalStable`: `(1/sigma_tilde) eta^(1/alpha) xi_i` per component
///   with i.i.d. standard stable `xi_i`.
/// - `RotationalStable`: `(1/sigma_tilde) eta^(1/alpha) sqrt(2 S) G` with `S`
///   positive (alpha/2)-stable, so the uncalibrated vector has characteristic
///   function `exp(-eta |u|^alpha)` exactly (Gaussian subordination).
pub fn increment(
    kind: NoiseKind,
    alpha: f64,
    d: usize,
    eta: f64,
    stream: &mut RngStream,
) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(d);
    increment_into(kind, alpha, eta, stream, &mut out)?;
    Ok(out)
}

pub(crate) fn increment_into(
    kind: NoiseKind,
    alpha: f64,
    eta: f64,
    stream: &mut RngStream,
    out: &mut DVector<f64>,
) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::invalid(format!("step size eta must be positive (got {eta})")));
    }
    match kind {
        NoiseKind::Brownian => {
            if alpha != 2.0 {
                return Err(Error::invalid("Brownian increments require alpha = 2"));
            }
            let s = eta.sqrt();
            for i in 0..out.len() {
                out[i] = s * stream.next_standard_normal();
            }
        }
        NoiseKind::CylindricalStable => {
            if !(alpha > 1.0 && alpha < 2.0) {
                return Err(Error::invalid("cylindrical stable increments require alpha in (1, 2)"));
            }
            let scale = eta.powf(1.0 / alpha) / sigma_tilde(alpha)?;
            for i in 0..out.len() {
                out[i] = scale * sample_standard_stable(alpha, stream)?;
            }
        }
        NoiseKind::RotationalStable => {
            if !(alpha > 1.0 && alpha < 2.0) {
                return Err(Error::invalid("rotational stable increments require alpha in (1, 2)"));
            }
            let s = sample_positive_stable(alpha / 2.0, stream)?;
            let scale = eta.powf(1.0 / alpha) * (2.0 * s).sqrt() / sigma_tilde(alpha)?;
            for i in 0..out.len() {
                out[i] = scale * stream.next_standard_normal();
            }
        }
    }
    Ok(())
}
