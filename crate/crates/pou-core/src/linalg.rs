//! Small dense linear-algebra and quadrature kernels used across the crate.
//!
//! Matrices here are tiny (state dimensions up to a few tens), so the
//! routines favour robustness and determinism over asymptotic speed:
//! symmetric eigenvalues by cyclic Jacobi rotations, spectral radius by
//! power iteration, Lyapunov equations by a vectorised (Kronecker) LU solve.

use nalgebra::{DMatrix, DVector};

/// Tolerance used by the eigenvalue and spectral-radius iterations.
pub const EIG_TOL: f64 = 1e-10;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// The input is symmetrised as (A + A')/2 first, so callers may pass the
/// raw sum `A'Q + QA` without worrying about rounding asymmetry.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    let scale = m.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    // cyclic sweeps until all off-diagonal mass is rotated away
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m[(i, j)].abs());
            }
        }
        if off <= EIG_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(a)[0]
}

pub fn max_eigenvalue(a: &DMatrix<f64>) -> f64 {
    *symmetric_eigenvalues(a).last().unwrap()
}

/// Spectral radius of an entrywise non-negative matrix by power iteration
/// with relative tolerance [`EIG_TOL`].
///
/// Defective boundary cases (Jordan blocks at the Perron root) converge only
/// polynomially; the iteration caps out and returns the best estimate.
pub fn spectral_radius_nonneg(n: &DMatrix<f64>) -> f64 {
    let d = n.nrows();
    assert_eq!(d, n.ncols(), "matrix must be square");
    if d == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(d, 1.0 / (d as f64).sqrt());
    let mut est = 0.0f64;
    for _ in 0..200_000 {
        let w = n * &v;
        let norm = w.norm();
        if norm <= 1e-300 {
            return 0.0; // nilpotent direction reached
        }
        let prev = est;
        est = norm;
        v = w / norm;
        if (est - prev).abs() <= EIG_TOL * est.max(1e-300) {
            break;
        }
    }
    est
}

/// Solves A'Q + QA = I for symmetric Q via the vectorised linear system
/// (I (x) A' + A' (x) I) vec(Q) = vec(I).
///
/// Returns `None` when the Kronecker system is singular (A and -A share an
/// eigenvalue), in which case the caller should skip the candidate.
pub fn solve_lyapunov_identity(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let d = a.nrows();
    assert_eq!(d, a.ncols(), "matrix must be square");
    let at = a.transpose();
    let eye = DMatrix::<f64>::identity(d, d);
    let k = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = DVector::from_fn(d * d, |i, _| if i % d == i / d { 1.0 } else { 0.0 });
    let lu = k.lu();
    let sol = lu.solve(&rhs)?;
    let mut q = DMatrix::zeros(d, d);
    // vec is column-major: sol[j*d + i] = Q[(i, j)]
    for j in 0..d {
        for i in 0..d {
            q[(i, j)] = sol[j * d + i];
        }
    }
    let qs = 0.5 * (&q + q.transpose());
    if qs.iter().all(|x| x.is_finite()) {
        Some(qs)
    } else {
        None
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
