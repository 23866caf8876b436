//! Empirical measures, the Sinkhorn-Knopp entropic Wasserstein-1 estimator,
//! and exact small-instance oracles.
//!
//! The solver runs the alternating-scaling fixed point
//!
//! ```text
//! c = b ./ (A' r),   r = a ./ (A c),   A_ij = exp(-tau M_ij),
//! ```
//!
//! from all-ones scalings, in log domain: the duals `log r`, `log c` are the
//! persistent state, and the working kernel `exp(-tau M + log r + log c)` is
//! periodically re-absorbed so the linear updates never overflow even at
//! large `tau * distance`. A plain log-sum-exp reference and the raw-kernel
//! iteration are kept alongside for cross-checks on small instances.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::KahanSum;

/// Weighted point cloud representing a discrete probability law.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<DVector<f64>>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<DVector<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("empirical measure needs at least one atom"));
        }
        if points.len() != weights.len() {
            return Err(Error::invalid("points and weights must have equal length"));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::invalid("all atoms must share one ambient dimension"));
        }
        if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::invalid("atom coordinates must be finite"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights must be nonnegative and finite"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights must sum to 1 (got {sum})")));
        }
        Ok(Self { points, weights })
    }

    /// Uniform weights over the given support.
    pub fn uniform(points: Vec<DVector<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::invalid("empirical measure needs at least one atom"));
        }
        let w = vec![1.0 / n as f64; n];
        Self::new(points, w)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&x| (x - w).abs() <= 1e-12)
    }
}

/// Matrix of Euclidean distances `M_ij = |x_i - y_j|`.
pub fn cost_matrix(nu1: &EmpiricalMeasure, nu2: &EmpiricalMeasure) -> Result<DMatrix<f64>> {
    if nu1.dim() != nu2.dim() {
        return Err(Error::invalid(format!(
            "ambient dimensions differ: {} vs {}",
            nu1.dim(),
            nu2.dim()
        )));
    }
    let n = nu1.len();
    let m = nu2.len();
    let mut cost = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            cost[(i, j)] = (&nu1.points[i] - &nu2.points[j]).norm();
        }
    }
    Ok(cost)
}

/// Converged (or best-iterate) scaling state of one Sinkhorn solve. The dual
/// scalings are stored in log form; `r()`/`c()` exponentiate on demand and
/// can overflow for large `tau * diameter`, while the plan entries
/// `exp(log_r_i - tau M_ij + log_c_j)` are always well scaled.
#[derive(Debug, Clone)]
pub struct SinkhornPlan {
    log_r: DVector<f64>,
    log_c: DVector<f64>,
    pub tau: f64,
    /// `<T, M>`, the Sinkhorn distance value.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max marginal violation of the returned iterate.
    pub marginal_error: f64,
}

impl SinkhornPlan {
    pub fn log_r(&self) -> &DVector<f64> {
        &self.log_r
    }

    pub fn log_c(&self) -> &DVector<f64> {
        &self.log_c
    }

    /// Row scalings `r = exp(log_r)`.
    pub fn r(&self) -> DVector<f64> {
        self.log_r.map(f64::exp)
    }

    /// Column scalings `c = exp(log_c)`.
    pub fn c(&self) -> DVector<f64> {
        self.log_c.map(f64::exp)
    }

    /// Transport plan `T = diag(r) exp(-tau M) diag(c)` rebuilt from the
    /// stored duals and the cost matrix.
    pub fn plan(&self, cost: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.log_r.len(), self.log_c.len(), |i, j| {
            (self.log_r[i] - self.tau * cost[(i, j)] + self.log_c[j]).exp()
        })
    }

    pub fn row_marginals(&self, cost: &DMatrix<f64>) -> DVector<f64> {
        let t = self.plan(cost);
        DVector::from_fn(t.nrows(), |i, _| t.row(i).sum())
    }

    pub fn col_marginals(&self, cost: &DMatrix<f64>) -> DVector<f64> {
        let t = self.plan(cost);
        DVector::from_fn(t.ncols(), |j, _| t.column(j).sum())
    }
}

fn validate_sinkhorn_inputs(a: &[f64], b: &[f64], cost: &DMatrix<f64>, tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("tau must be positive and finite (got {tau})")));
    }
    if cost.nrows() != a.len() || cost.ncols() != b.len() {
        return Err(Error::invalid(format!(
            "cost matrix is {}x{} but weights have lengths {} and {}",
            cost.nrows(),
            cost.ncols(),
            a.len(),
            b.len()
        )));
    }
    for w in [a, b] {
        if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::invalid("weights must be nonnegative and finite"));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights must sum to 1 (got {s})")));
        }
    }
    if cost.iter().any(|&x| !x.is_finite()) {
        return Err(Error::invalid("cost matrix entries must be finite"));
    }
    Ok(())
}

/// Residual scaling bounds beyond which the duals are re-absorbed.
const ABSORB_LIMIT: f64 = 1e30;
/// Reduction sums below this are treated as underflowed; dividing by them
/// would push the residual scalings outside the representable range.
const UNDERFLOW_FLOOR: f64 = 1e-280;

struct Absorbed<'a> {
    cost: &'a DMatrix<f64>,
    tau: f64,
    n: usize,
    m: usize,
    la: Vec<f64>,
    lb: Vec<f64>,
    lr: Vec<f64>,
    lc: Vec<f64>,
    /// Row-major working kernel `exp(-tau M + lr + lc)`.
    k: Vec<f64>,
}

impl<'a> Absorbed<'a> {
    fn new(cost: &'a DMatrix<f64>, tau: f64, a: &[f64], b: &[f64], warm: Option<(&[f64], &[f64])>) -> Self {
        let (n, m) = (cost.nrows(), cost.ncols());
        let (lr, lc) = match warm {
            Some((r, c)) => (r.to_vec(), c.to_vec()),
            None => (vec![0.0; n], vec![0.0; m]),
        };
        let la = a.iter().map(|&x| x.ln()).collect();
        let lb = b.iter().map(|&x| x.ln()).collect();
        let mut s = Self { cost, tau, n, m, la, lb, lr, lc, k: vec![0.0; n * m] };
        s.rebuild_safe();
        s
    }

    /// Recomputes the working kernel; returns false when any entry
    /// overflowed (stale duals against a shrunken cost can do this).
    fn rebuild(&mut self) -> bool {
        let mut finite = true;
        for i in 0..self.n {
            let lri = self.lr[i];
            let row = &mut self.k[i * self.m..(i + 1) * self.m];
            for (j, kij) in row.iter_mut().enumerate() {
                let e = lri - self.tau * self.cost[(i, j)] + self.lc[j];
                let val = if e == f64::NEG_INFINITY { 0.0 } else { e.exp() };
                finite &= val.is_finite();
                *kij = val;
            }
        }
        finite
    }

    /// Rebuild, falling back to one exact log-space dual update whenever
    /// the linear representation cannot hold the current duals.
    fn rebuild_safe(&mut self) {
        if !self.rebuild() {
            self.lse_update();
        }
    }

    fn absorb(&mut self, u: &mut [f64], v: &mut [f64]) {
        for (lri, ui) in self.lr.iter_mut().zip(u.iter_mut()) {
            *lri += ui.ln();
            *ui = 1.0;
        }
        for (lcj, vj) in self.lc.iter_mut().zip(v.iter_mut()) {
            *lcj += vj.ln();
            *vj = 1.0;
        }
        self.rebuild_safe();
    }

    /// One exact dual update in log space (column pass then row pass via
    /// log-sum-exp). Rescues states whose working kernel has underflowed
    /// rows or columns (far outlier atoms whose duals must climb by
    /// hundreds) or overflowed after a warm start against a smaller cost.
    /// The row pass leaves every row sum at exactly `a_i <= 1`, so the
    /// final rebuild is always representable.
    fn lse_update(&mut self) {
        for j in 0..self.m {
            let mut mx = f64::NEG_INFINITY;
            for i in 0..self.n {
                mx = mx.max(self.lr[i] - self.tau * self.cost[(i, j)]);
            }
            if mx == f64::NEG_INFINITY {
                continue; // no mass reaches this column; leave the dual
            }
            let mut sum = 0.0;
            for i in 0..self.n {
                sum += (self.lr[i] - self.tau * self.cost[(i, j)] - mx).exp();
            }
            self.lc[j] = self.lb[j] - (mx + sum.ln());
        }
        for i in 0..self.n {
            let mut mx = f64::NEG_INFINITY;
            for j in 0..self.m {
                mx = mx.max(self.lc[j] - self.tau * self.cost[(i, j)]);
            }
            if mx == f64::NEG_INFINITY {
                continue;
            }
            let mut sum = 0.0;
            for j in 0..self.m {
                sum += (self.lc[j] - self.tau * self.cost[(i, j)] - mx).exp();
            }
            self.lr[i] = self.la[i] - (mx + sum.ln());
        }
        let finite = self.rebuild();
        debug_assert!(finite, "kernel still non-finite after log-space update");
    }

    /// `out_j = sum_i k_ij u_i` (fixed-order row-major pass).
    fn kt_u(&self, u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for i in 0..self.n {
            let ui = u[i];
            if ui == 0.0 {
                continue;
            }
            let row = &self.k[i * self.m..(i + 1) * self.m];
            for (o, kij) in out.iter_mut().zip(row) {
                *o += kij * ui;
            }
        }
    }

    fn value(&self) -> f64 {
        let mut acc = KahanSum::new();
        for i in 0..self.n {
            let row = &self.k[i * self.m..(i + 1) * self.m];
            for (j, kij) in row.iter().enumerate() {
                acc.add(kij * self.cost[(i, j)]);
            }
        }
        acc.value()
    }

    /// Max marginal violation at the absorbed state (u = v = 1).
    fn marginal_error(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut err = 0.0f64;
        let mut col = vec![0.0; self.m];
        for i in 0..self.n {
            let row = &self.k[i * self.m..(i + 1) * self.m];
            let mut rs = 0.0;
            for (j, kij) in row.iter().enumerate() {
                rs += kij;
                col[j] += kij;
            }
            err = err.max((rs - a[i]).abs());
        }
        for (cj, bj) in col.iter().zip(b) {
            err = err.max((cj - bj).abs());
        }
        err
    }
}

/// Log-domain Sinkhorn-Knopp. Iterates the alternating scalings from
/// all-ones initial vectors until the max marginal violation drops to `tol`
/// or `max_iter` is reached (in which case the best iterate is returned
/// with `converged = false`).
pub fn sinkhorn(
    a: &[f64],
    b: &[f64],
    cost: &DMatrix<f64>,
    tau: f64,
    max_iter: usize,
    tol: f64,
) -> Result<SinkhornPlan> {
    sinkhorn_warm(a, b, cost, tau, max_iter, tol, None)
}

/// [`sinkhorn`] with optional initial log-domain duals, for solve sequences
/// over slowly varying measures (checkpoint sweeps reuse the previous
/// plan's duals and typically converge in a fraction of the iterations).
pub fn sinkhorn_warm(
    a: &[f64],
    b: &[f64],
    cost: &DMatrix<f64>,
    tau: f64,
    max_iter: usize,
    tol: f64,
    warm: Option<(&DVector<f64>, &DVector<f64>)>,
) -> Result<SinkhornPlan> {
    validate_sinkhorn_inputs(a, b, cost, tau)?;
    if let Some((r, c)) = warm {
        if r.len() != a.len() || c.len() != b.len() {
            return Err(Error::invalid("warm-start dual lengths must match the weights"));
        }
        if r.iter().chain(c.iter()).any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::invalid("warm-start duals must not contain NaN or +inf"));
        }
    }
    let (n, m) = (a.len(), b.len());
    let mut st = Absorbed::new(cost, tau, a, b, warm.map(|(r, c)| (r.as_slice(), c.as_slice())));
    let mut u = vec![1.0f64; n];
    let mut v = vec![1.0f64; m];
    // invariant across iterations: ktu = K' u for the current kernel and u
    let mut ktu = vec![0.0f64; m];
    st.kt_u(&u, &mut ktu);
    let mut iterations = 0usize;
    let mut converged = false;
    let mut consecutive_rescues = 0usize;

    'outer: while iterations < max_iter {
        let mut rescue = |st: &mut Absorbed,
                          u: &mut Vec<f64>,
                          v: &mut Vec<f64>,
                          ktu: &mut Vec<f64>,
                          count: &mut usize,
                          what: &str|
         -> Result<()> {
            st.absorb(u, v);
            st.lse_update();
            st.kt_u(u, ktu);
            *count += 1;
            if *count > 3 {
                return Err(Error::NumericalFailure(format!(
                    "kernel {what} keep underflowing against positive mass"
                )));
            }
            Ok(())
        };

        // column scaling first, matching the reference iteration order
        if ktu.iter().zip(b).any(|(&s, &bj)| s < UNDERFLOW_FLOOR && bj > 0.0) {
            rescue(&mut st, &mut u, &mut v, &mut ktu, &mut consecutive_rescues, "columns")?;
            iterations += 1;
            continue 'outer;
        }
        for j in 0..m {
            v[j] = if b[j] == 0.0 { 0.0 } else { b[j] / ktu[j] };
        }

        // fused sweep: each kernel row read once, producing the row scaling
        // u_i and accumulating K'u for the next column update
        let mut row_underflow = false;
        let mut acc = std::mem::take(&mut ktu);
        acc.fill(0.0);
        for i in 0..n {
            let row = &st.k[i * m..(i + 1) * m];
            let mut s = [0.0f64; 4];
            let chunks = m / 4;
            for c in 0..chunks {
                let b4 = 4 * c;
                s[0] += row[b4] * v[b4];
                s[1] += row[b4 + 1] * v[b4 + 1];
                s[2] += row[b4 + 2] * v[b4 + 2];
                s[3] += row[b4 + 3] * v[b4 + 3];
            }
            let mut kv_i = ((s[0] + s[1]) + (s[2] + s[3]));
            for j in 4 * chunks..m {
                kv_i += row[j] * v[j];
            }
            if a[i] == 0.0 {
                u[i] = 0.0;
                continue;
            }
            if kv_i < UNDERFLOW_FLOOR {
                row_underflow = true;
                break;
            }
            let ui = a[i] / kv_i;
            u[i] = ui;
            for (o, kij) in acc.iter_mut().zip(row) {
                *o += kij * ui;
            }
        }
        if row_underflow {
            ktu = acc;
            rescue(&mut st, &mut u, &mut v, &mut ktu, &mut consecutive_rescues, "rows")?;
            iterations += 1;
            continue 'outer;
        }
        ktu = acc;
        iterations += 1;
        consecutive_rescues = 0;

        // post-update column marginals come free from the maintained K'u
        let col_err = ktu
            .iter()
            .zip(v.iter())
            .zip(b)
            .map(|((&s, &vj), &bj)| (s * vj - bj).abs())
            .fold(0.0f64, f64::max);
        if col_err <= tol {
            converged = true;
            break;
        }

        let out_of_bounds = u
            .iter()
            .chain(v.iter())
            .any(|&x| !x.is_finite() || (x != 0.0 && !(ABSORB_LIMIT.recip()..=ABSORB_LIMIT).contains(&x)));
        if out_of_bounds {
            st.absorb(&mut u, &mut v);
            st.kt_u(&u, &mut ktu);
        }
    }

    st.absorb(&mut u, &mut v);
    Ok(SinkhornPlan {
        log_r: DVector::from_vec(st.lr.clone()),
        log_c: DVector::from_vec(st.lc.clone()),
        tau,
        value: st.value(),
        iterations,
        converged,
        marginal_error: st.marginal_error(a, b),
    })
}

/// Reference log-sum-exp implementation of the same iteration; one full
/// LSE per half-update, convergence checked every iteration. Slower than
/// [`sinkhorn`] but free of any absorption bookkeeping; the production
/// solver is cross-checked against it.
pub fn sinkhorn_lse(
    a: &[f64],
    b: &[f64],
    cost: &DMatrix<f64>,
    tau: f64,
    max_iter: usize,
    tol: f64,
) -> Result<SinkhornPlan> {
    validate_sinkhorn_inputs(a, b, cost, tau)?;
    let (n, m) = (a.len(), b.len());
    let la: Vec<f64> = a.iter().map(|&x| x.ln()).collect();
    let lb: Vec<f64> = b.iter().map(|&x| x.ln()).collect();
    let mut lr = vec![0.0f64; n];
    let mut lc = vec![0.0f64; m];
    let s = |i: usize, j: usize| -tau * cost[(i, j)];
    let mut iterations = 0usize;
    let mut converged = false;
    let mut err = f64::INFINITY;
    while iterations < max_iter {
        for j in 0..m {
            let mut mx = f64::NEG_INFINITY;
            for i in 0..n {
                mx = mx.max(s(i, j) + lr[i]);
            }
            let sum: f64 = (0..n).map(|i| (s(i, j) + lr[i] - mx).exp()).sum();
            lc[j] = lb[j] - (mx + sum.ln());
        }
        for i in 0..n {
            let mut mx = f64::NEG_INFINITY;
            for j in 0..m {
                mx = mx.max(s(i, j) + lc[j]);
            }
            let sum: f64 = (0..m).map(|j| (s(i, j) + lc[j] - mx).exp()).sum();
            lr[i] = la[i] - (mx + sum.ln());
        }
        iterations += 1;
        err = (0..m)
            .map(|j| {
                let col: f64 = (0..n).map(|i| (lr[i] + s(i, j) + lc[j]).exp()).sum();
                (col - b[j]).abs()
            })
            .fold(0.0f64, f64::max);
        if err <= tol {
            converged = true;
            break;
        }
    }
    let mut value = KahanSum::new();
    for i in 0..n {
        for j in 0..m {
            value.add((lr[i] + s(i, j) + lc[j]).exp() * cost[(i, j)]);
        }
    }
    Ok(SinkhornPlan {
        log_r: DVector::from_vec(lr),
        log_c: DVector::from_vec(lc),
        tau,
        value: value.value(),
        iterations,
        converged,
        marginal_error: err,
    })
}

/// The raw-kernel fixed point `c = b ./ (A'r)`, `r = a ./ (A c)` with
/// `A = exp(-tau M)` held in linear domain. Underflow of the kernel makes
/// this fail for large `tau * diameter`; it is kept for small instances and
/// as a cross-check of the log-domain paths.
pub fn sinkhorn_raw(
    a: &[f64],
    b: &[f64],
    cost: &DMatrix<f64>,
    tau: f64,
    max_iter: usize,
    tol: f64,
) -> Result<SinkhornPlan> {
    validate_sinkhorn_inputs(a, b, cost, tau)?;
    let (n, m) = (a.len(), b.len());
    let kernel = DMatrix::from_fn(n, m, |i, j| (-tau * cost[(i, j)]).exp());
    let mut r = vec![1.0f64; n];
    let mut c = vec![1.0f64; m];
    let mut iterations = 0usize;
    let mut converged = false;
    let mut err = f64::INFINITY;
    while iterations < max_iter {
        for j in 0..m {
            let s: f64 = (0..n).map(|i| kernel[(i, j)] * r[i]).sum();
            c[j] = if b[j] == 0.0 { 0.0 } else { b[j] / s };
        }
        for i in 0..n {
            let s: f64 = (0..m).map(|j| kernel[(i, j)] * c[j]).sum();
            r[i] = if a[i] == 0.0 { 0.0 } else { a[i] / s };
        }
        if r.iter().chain(c.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure(
                "raw-kernel scalings became non-finite; use the log-domain solver".into(),
            ));
        }
        iterations += 1;
        err = (0..m)
            .map(|j| {
                let col: f64 = (0..n).map(|i| r[i] * kernel[(i, j)] * c[j]).sum();
                (col - b[j]).abs()
            })
            .fold(0.0f64, f64::max);
        if err <= tol {
            converged = true;
            break;
        }
    }
    let mut value = KahanSum::new();
    for i in 0..n {
        for j in 0..m {
            value.add(r[i] * kernel[(i, j)] * c[j] * cost[(i, j)]);
        }
    }
    Ok(SinkhornPlan {
        log_r: DVector::from_vec(r.iter().map(|&x| x.ln()).collect()),
        log_c: DVector::from_vec(c.iter().map(|&x| x.ln()).collect()),
        tau,
        value: value.value(),
        iterations,
        converged,
        marginal_error: err,
    })
}

fn check_exact_preconditions(nu1: &EmpiricalMeasure, nu2: &EmpiricalMeasure) -> Result<()> {
    if nu1.len() != nu2.len() {
        return Err(Error::invalid("exact oracles require equal atom counts"));
    }
    if !nu1.is_uniform() || !nu2.is_uniform() {
        return Err(Error::invalid("exact oracles require uniform weights"));
    }
    Ok(())
}

/// Exact W1 between uniform equal-size measures by full enumeration of
/// assignments; brute-force oracle, `n <= 8`.
pub fn w1_exact_assignment(nu1: &EmpiricalMeasure, nu2: &EmpiricalMeasure) -> Result<f64> {
    check_exact_preconditions(nu1, nu2)?;
    let n = nu1.len();
    if n > 8 {
        return Err(Error::invalid("assignment oracle enumerates permutations only up to n = 8"));
    }
    let cost = cost_matrix(nu1, nu2)?;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    // Heap's algorithm
    let mut stack = vec![0usize; n];
    let eval = |perm: &[usize]| -> f64 {
        perm.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum::<f64>() / n as f64
    };
    best = best.min(eval(&idx));
    let mut i = 0;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                idx.swap(0, i);
            } else {
                idx.swap(stack[i], i);
            }
            best = best.min(eval(&idx));
            stack[i] += 1;
            i = 0;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

/// Exact W1 in one dimension for uniform equal-size measures: mean absolute
/// difference of the sorted samples (comonotone coupling).
pub fn w1_exact_1d(nu1: &EmpiricalMeasure, nu2: &EmpiricalMeasure) -> Result<f64> {
    check_exact_preconditions(nu1, nu2)?;
    if nu1.dim() != 1 || nu2.dim() != 1 {
        return Err(Error::invalid("1-d oracle requires scalar atoms"));
    }
    let mut xs: Vec<f64> = nu1.points().iter().map(|p| p[0]).collect();
    let mut ys: Vec<f64> = nu2.points().iter().map(|p| p[0]).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    let mut acc = KahanSum::new();
    for (x, y) in xs.iter().zip(&ys) {
        acc.add((x - y).abs());
    }
    Ok(acc.value() / n as f64)
}

/// Sinkhorn distance between two measures: cost matrix plus [`sinkhorn`]
/// with defaults `max_iter = 10_000`, `tol = 1e-9`.
pub fn w1_sinkhorn(nu1: &EmpiricalMeasure, nu2: &EmpiricalMeasure, tau: f64) -> Result<f64> {
    let cost = cost_matrix(nu1, nu2)?;
    let plan = sinkhorn(nu1.weights(), nu2.weights(), &cost, tau, 10_000, 1e-9)?;
    Ok(plan.value)
}
