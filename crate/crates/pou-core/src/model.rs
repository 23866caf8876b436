//! SDE parameterisation: the piecewise-linear drift, its C^2 mollification,
//! structural assumption checks, and the stability-certificate search.
//!
//! The drift switches between two linear regimes across the hyperplane
//! `<e, x> = 0`:
//!
//! ```text
//! g(x) = l - (M + (Gamma - M) v e') x   if e'x > 0
//!      = l - M x                        if e'x <= 0
//! ```
//!
//! Dissipativity is certified by a positive-definite matrix Q making both
//! `M'Q + QM` and `A'Q + QA` positive definite, where `A = M - (M - Gamma) v e'`
//! is the upper-regime matrix. From the smallest eigenvalues `lambda1`,
//! `lambda2` of those two symmetric matrices the contraction rate is
//! `theta = lambda / (2 lambda_max(Q)^2)` with `lambda = min(lambda1, lambda2)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Driving-noise family. `Brownian` is the `alpha = 2` case; the two stable
/// kinds differ in whether components jump independently or isotropically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Brownian,
    CylindricalStable,
    RotationalStable,
}

/// Full parameterisation of the piecewise OU model. Immutable after
/// construction; validation happens once in [`ModelSpec::new`].
#[derive(Debug, Clone)]
pub struct ModelSpec {
    d: usize,
    ell: DVector<f64>,
    m: DMatrix<f64>,
    /// Diagonal of Gamma, stored as a vector.
    gamma: DVector<f64>,
    v: DVector<f64>,
    sigma: DMatrix<f64>,
    alpha: f64,
    noise_kind: NoiseKind,
    /// Precomputed (Gamma - M) v, the drift jump direction.
    gm_v: DVector<f64>,
}

impl ModelSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        ell: DVector<f64>,
        m: DMatrix<f64>,
        gamma: DVector<f64>,
        v: DVector<f64>,
        sigma: DMatrix<f64>,
        alpha: f64,
        noise_kind: NoiseKind,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("state dimension d must be positive"));
        }
        if ell.len() != d || gamma.len() != d || v.len() != d {
            return Err(Error::invalid(format!(
                "vector lengths must equal d = {d}: ell {}, gamma {}, v {}",
                ell.len(),
                gamma.len(),
                v.len()
            )));
        }
        if m.nrows() != d || m.ncols() != d || sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::invalid("M and sigma must be d x d matrices"));
        }
        let finite = ell.iter().chain(gamma.iter()).chain(v.iter()).all(|x| x.is_finite())
            && m.iter().chain(sigma.iter()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("model coefficients must be finite"));
        }
        if v.iter().any(|&x| x < 0.0) {
            return Err(Error::invalid("control vector v must be componentwise nonnegative"));
        }
        let vsum: f64 = v.iter().sum();
        if (vsum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "control vector v must sum to 1 (got {vsum})"
            )));
        }
        if gamma.iter().any(|&g| g < 0.0) {
            return Err(Error::invalid("Gamma diagonal must be nonnegative"));
        }
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(Error::invalid(format!("alpha must lie in (1, 2] (got {alpha})")));
        }
        match noise_kind {
            NoiseKind::Brownian if alpha != 2.0 => {
                return Err(Error::invalid("Brownian noise requires alpha = 2"));
            }
            NoiseKind::CylindricalStable | NoiseKind::RotationalStable if alpha == 2.0 => {
                return Err(Error::invalid("stable noise requires alpha < 2"));
            }
            _ => {}
        }
        // nonsingularity of sigma via the singular values of sigma' sigma
        let sts = sigma.transpose() * &sigma;
        let eigs = linalg::symmetric_eigenvalues(&sts);
        let smin = eigs[0].max(0.0).sqrt();
        let smax = eigs[eigs.len() - 1].max(0.0).sqrt();
        if smin < 1e-12 * smax || smax == 0.0 {
            return Err(Error::invalid(
                "sigma is singular (smallest singular value below 1e-12 of the largest)",
            ));
        }
        let gm_v = DVector::from_fn(d, |i, _| gamma[i] * v[i]) - &m * &v;
        Ok(Self { d, ell, m, gamma, v, sigma, alpha, noise_kind, gm_v })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ell(&self) -> &DVector<f64> {
        &self.ell
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Diagonal of Gamma.
    pub fn gamma_diag(&self) -> &DVector<f64> {
        &self.gamma
    }

    pub fn v(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise_kind
    }

    /// The jump direction (Gamma - M) v of the drift's gradient across the
    /// switching hyperplane.
    pub fn drift_jump(&self) -> &DVector<f64> {
        &self.gm_v
    }

    /// Upper-regime drift matrix A = M - (M - Gamma) v e' (so that
    /// g(x) = l - A x for e'x > 0).
    pub fn upper_matrix(&self) -> DMatrix<f64> {
        let mut a = self.m.clone();
        for i in 0..self.d {
            for j in 0..self.d {
                a[(i, j)] += self.gm_v[i];
            }
        }
        a
    }

    /// Explicit Lipschitz bound on the mollified drift gradient:
    /// `||M||_op + ||(M - Gamma) v e'||_op`.
    pub fn gradient_norm_bound(&self) -> f64 {
        let mtm = self.m.transpose() * &self.m;
        let m_op = linalg::max_eigenvalue(&mtm).max(0.0).sqrt();
        // rank-one term: ||w e'||_op = |w| * |e| = |w| sqrt(d)
        m_op + self.gm_v.norm() * (self.d as f64).sqrt()
    }

    /// Explicit constant in the mollification gap bound: `|g_eps(x) - g(x)|`
    /// is zero for `|e'x| > eps` and at most `||(M - Gamma) v|| * eps`
    /// otherwise, since `|rho_eps(y) - y^+| <= eps` on `|y| <= eps`.
    pub fn gap_bound_constant(&self) -> f64 {
        self.gm_v.norm()
    }
}

/// C^2 smoothing of the positive part: identity above `eps`, zero below
/// `-eps`, quartic interpolation inside.
pub fn mollifier_rho(eps: f64, y: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(if y > eps {
        y
    } else if y < -eps {
        0.0
    } else {
        3.0 * eps / 16.0 - y.powi(4) / (16.0 * eps.powi(3)) + 3.0 * y * y / (8.0 * eps) + 0.5 * y
    })
}

/// Derivative of [`mollifier_rho`]; takes values in [0, 1].
pub fn mollifier_rho_dot(eps: f64, y: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(if y > eps {
        1.0
    } else if y < -eps {
        0.0
    } else {
        -y.powi(3) / (4.0 * eps.powi(3)) + 3.0 * y / (4.0 * eps) + 0.5
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1) (got {eps})")));
    }
    Ok(())
}

fn check_dim(spec: &ModelSpec, x: &DVector<f64>) -> Result<()> {
    if x.len() != spec.d {
        return Err(Error::invalid(format!(
            "state has dimension {}, model expects {}",
            x.len(),
            spec.d
        )));
    }
    Ok(())
}

/// Piecewise drift g(x). The switching value `e'x = 0` takes the lower
/// branch, matching the model's `e'x <= 0` case; both branches agree there.
pub fn drift(spec: &ModelSpec, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(spec, x)?;
    let mut out = DVector::zeros(spec.d);
    drift_into(spec, x, &mut out);
    Ok(out)
}

pub(crate) fn drift_into(spec: &ModelSpec, x: &DVector<f64>, out: &mut DVector<f64>) {
    out.copy_from(&spec.ell);
    out.gemv(-1.0, &spec.m, x, 1.0);
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        out.axpy(-s, &spec.gm_v, 1.0);
    }
}

/// Mollified drift g_eps(x) = l - [M x + (Gamma - M) v rho_eps(e'x)].
/// Agrees with [`drift`] whenever `|e'x| > eps`.
pub fn mollified_drift(spec: &ModelSpec, eps: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_eps(eps)?;
    check_dim(spec, x)?;
    let mut out = DVector::zeros(spec.d);
    mollified_drift_into(spec, eps, x, &mut out);
    Ok(out)
}

pub(crate) fn mollified_drift_into(
    spec: &ModelSpec,
    eps: f64,
    x: &DVector<f64>,
    out: &mut DVector<f64>,
) {
    out.copy_from(&spec.ell);
    out.gemv(-1.0, &spec.m, x, 1.0);
    let s: f64 = x.iter().sum();
    let rho = mollifier_rho(eps, s).expect("eps validated by caller");
    if rho != 0.0 {
        out.axpy(-rho, &spec.gm_v, 1.0);
    }
}

/// Gradient of the mollified drift:
/// `grad g_eps(x) = -M - rho_dot_eps(e'x) (Gamma - M) v e'`.
pub fn mollified_drift_jacobian(
    spec: &ModelSpec,
    eps: f64,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    check_eps(eps)?;
    check_dim(spec, x)?;
    let s: f64 = x.iter().sum();
    let rd = mollifier_rho_dot(eps, s)?;
    let mut j = -spec.m.clone();
    for i in 0..spec.d {
        for col in 0..spec.d {
            j[(i, col)] -= rd * spec.gm_v[i];
        }
    }
    Ok(j)
}

/// Checks the M-matrix property: nonpositive off-diagonal entries and, with
/// `s` the largest diagonal entry and `N = s I - M`, spectral radius
/// `rho(N) <= s` (power iteration, 1e-10 relative tolerance).
pub fn check_m_matrix(m: &DMatrix<f64>) -> Result<bool> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid("M-matrix check requires a square matrix"));
    }
    let d = m.nrows();
    for i in 0..d {
        for j in 0..d {
            if i != j && m[(i, j)] > 0.0 {
                return Ok(false);
            }
        }
    }
    let s = (0..d).map(|i| m[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let n = DMatrix::from_fn(d, d, |i, j| if i == j { s - m[(i, j)] } else { -m[(i, j)] });
    let rho = linalg::spectral_radius_nonneg(&n);
    Ok(rho <= s + 1e-10 * s.abs().max(1.0))
}

/// Which branch of the drift-structure assumption a model satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption1Branch {
    /// `M v >= Gamma v` componentwise with `Gamma v` nonnegative and nonzero.
    MvDominates,
    /// `M` diagonal with positive entries and `Gamma v != 0`.
    DiagonalM,
    Neither,
}

#[derive(Debug, Clone, Copy)]
pub struct Assumption1Report {
    pub holds: bool,
    pub branch: Assumption1Branch,
}

pub fn check_assumption1(spec: &ModelSpec) -> Assumption1Report {
    let d = spec.d;
    let mv = &spec.m * &spec.v;
    let gv = DVector::from_fn(d, |i, _| spec.gamma[i] * spec.v[i]);

    let dominates = (0..d).all(|i| mv[i] >= gv[i]);
    let gv_nonneg = gv.iter().all(|&x| x >= 0.0);
    let gv_nonzero = gv.iter().any(|&x| x != 0.0);
    if dominates && gv_nonneg && gv_nonzero {
        return Assumption1Report { holds: true, branch: Assumption1Branch::MvDominates };
    }

    let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || spec.m[(i, j)] == 0.0));
    let diag_positive = (0..d).all(|i| spec.m[(i, i)] > 0.0);
    if diagonal && diag_positive && gv_nonzero {
        return Assumption1Report { holds: true, branch: Assumption1Branch::DiagonalM };
    }

    Assumption1Report { holds: false, branch: Assumption1Branch::Neither }
}

/// Positive-definite matrix Q certifying one-sided dissipativity of the
/// drift, together with the contraction rates it induces.
#[derive(Debug, Clone)]
pub struct StabilityCertificate {
    pub q: DMatrix<f64>,
    /// Smallest eigenvalue of M'Q + QM.
    pub lambda1: f64,
    /// Smallest eigenvalue of A'Q + QA for the upper-regime matrix A.
    pub lambda2: f64,
    /// min(lambda1, lambda2).
    pub lambda: f64,
    /// lambda / (2 lambda_max(Q)^2).
    pub theta: f64,
}

/// Smallest eigenvalues (lambda1, lambda2) of the two certificate matrices
/// for a given Q.
pub fn certificate_lambdas(spec: &ModelSpec, q: &DMatrix<f64>) -> (f64, f64) {
    let m1 = spec.m.transpose() * q + q * &spec.m;
    let a = spec.upper_matrix();
    let m2 = a.transpose() * q + q * &a;
    (linalg::min_eigenvalue(&m1), linalg::min_eigenvalue(&m2))
}

fn certificate_from_q(spec: &ModelSpec, q: DMatrix<f64>) -> StabilityCertificate {
    let (l1, l2) = certificate_lambdas(spec, &q);
    let lambda = l1.min(l2);
    let qmax = linalg::max_eigenvalue(&q);
    StabilityCertificate { q, lambda1: l1, lambda2: l2, lambda, theta: 0.5 * lambda / (qmax * qmax) }
}

const CERT_POS_TOL: f64 = 1e-10;

/// Searches for a stability certificate.
///
/// Strategy: try Q = I first; on failure solve the two Lyapunov equations
/// `A_i' Q_i + Q_i A_i = I` for `A_1 = M` and the upper-regime matrix `A_2`,
/// then line-search `w` over `Q(w) = (1 - w) Q_1 + w Q_2` maximising
/// `min(lambda1(w), lambda2(w))`.
pub fn find_stability_certificate(
    spec: &ModelSpec,
    grid_steps: usize,
) -> Result<StabilityCertificate> {
    if grid_steps == 0 {
        return Err(Error::invalid("grid_steps must be positive"));
    }
    let d = spec.d;
    let eye = DMatrix::<f64>::identity(d, d);
    let (l1, l2) = certificate_lambdas(spec, &eye);
    if l1.min(l2) > CERT_POS_TOL {
        return Ok(certificate_from_q(spec, eye));
    }

    let q1 = linalg::solve_lyapunov_identity(&spec.m);
    let q2 = linalg::solve_lyapunov_identity(&spec.upper_matrix());
    let (q1, q2) = match (q1, q2) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::CertificateNotFound(
                "Lyapunov equation singular for one of the regime matrices".into(),
            ))
        }
    };

    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for k in 0..=grid_steps {
        let w = k as f64 / grid_steps as f64;
        let q = &q1 * (1.0 - w) + &q2 * w;
        if linalg::min_eigenvalue(&q) <= CERT_POS_TOL {
            continue;
        }
        let (l1, l2) = certificate_lambdas(spec, &q);
        let score = l1.min(l2);
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((score, q));
        }
    }
    match best {
        Some((score, q)) if score > CERT_POS_TOL => Ok(certificate_from_q(spec, q)),
        Some((score, _)) => Err(Error::CertificateNotFound(format!(
            "line search over {grid_steps} blend steps peaked at min-eigenvalue {score:.3e}"
        ))),
        None => Err(Error::CertificateNotFound(
            "no positive-definite blend of the Lyapunov solutions".into(),
        )),
    }
}

/// Signed slack of the dissipation inequality at one pair:
/// `<Q(x - y), g_eps(x) - g_eps(y)> + (lambda/2) |x - y|^2`, nonpositive
/// whenever Q is a valid certificate. `lambda` is recomputed from Q.
pub fn dissipation_gap(
    spec: &ModelSpec,
    eps: f64,
    q: &DMatrix<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    check_eps(eps)?;
    check_dim(spec, x)?;
    check_dim(spec, y)?;
    if x == y {
        return Err(Error::invalid("dissipation gap requires x != y"));
    }
    let (l1, l2) = certificate_lambdas(spec, q);
    let lambda = l1.min(l2);
    let gx = mollified_drift(spec, eps, x)?;
    let gy = mollified_drift(spec, eps, y)?;
    let diff = x - y;
    let gap = (q * &diff).dot(&(gx - gy)) + 0.5 * lambda * diff.norm_squared();
    Ok(gap)
}

/// Benchmark model configurations arising as heavy-traffic limits of
/// many-server queues; used across the test suites and the bundled example
/// configs.
pub mod presets {
    use super::*;

    /// One-dimensional single-class queue limit: `g(x) = -1 - 2x` above the
    /// origin and `-1 - x` below it.
    pub fn single_class_1d(alpha: f64) -> ModelSpec {
        let kind =
            if alpha == 2.0 { NoiseKind::Brownian } else { NoiseKind::CylindricalStable };
        ModelSpec::new(
            1,
            DVector::from_element(1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 2.0),
            DVector::from_element(1, 1.0),
            DMatrix::identity(1, 1),
            alpha,
            kind,
        )
        .expect("benchmark model is valid")
    }

    /// Two-class `V`-network limit with `M = diag(2, 1)`, `Gamma = diag(1, 2)`,
    /// `v = (1/2, 1/2)'`, `l = (-1/2, -1/4)'`.
    pub fn two_class_2d(alpha: f64) -> ModelSpec {
        let kind =
            if alpha == 2.0 { NoiseKind::Brownian } else { NoiseKind::CylindricalStable };
        ModelSpec::new(
            2,
            DVector::from_vec(vec![-0.5, -0.25]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::from_vec(vec![0.5, 0.5]),
            DMatrix::identity(2, 2),
            alpha,
            kind,
        )
        .expect("benchmark model is valid")
    }
}
