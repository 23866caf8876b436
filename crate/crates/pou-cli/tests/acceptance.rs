//! Acceptance suite: one pass/fail line per criterion, covering the
//! mollifier and certificate closed forms, the dissipation and Jacobi-flow
//! inequalities, sampler calibration, the closed-form chain characteristic
//! function, rate-optimality and series bounds, transport oracle agreement,
//! the desk-scale distance-curve and CLT shapes, and byte-level determinism
//! across worker counts.
//!
//! Run with `cargo test -p pou-cli --test acceptance -- --nocapture` to see
//! every line; by default cargo prints output only for failing tests.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use pou_cli::config::{ExperimentKind, TestFunctionConfig};
use pou_cli::experiments::{self, example_config_1d};
use pou_core::analysis::{
    fit_rate, ks_critical_coefficient, ks_distance_sorted, ou_char_distance, ou_em_charfn,
};
use pou_core::model::presets::{single_class_1d, two_class_2d};
use pou_core::model::{
    dissipation_gap, find_stability_certificate, mollifier_rho, mollifier_rho_dot,
};
use pou_core::noise::{sample_standard_stable, RngStream};
use pou_core::scheme::{jacobian_flow, StepSchedule};
use pou_core::special::normal_cdf;
use pou_core::transport::{cost_matrix, sinkhorn, w1_exact_assignment, EmpiricalMeasure};

struct Criterion {
    id: usize,
    name: &'static str,
    started: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn new(id: usize, name: &'static str) -> Self {
        Self { id, name, started: Instant::now(), failures: Vec::new() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    /// Prints the pass/fail line and panics on failure.
    fn finish(self) {
        let elapsed = self.started.elapsed();
        if self.failures.is_empty() {
            println!("acceptance {:02} {}: PASS ({:.1?})", self.id, self.name, elapsed);
        } else {
            println!(
                "acceptance {:02} {}: FAIL ({:.1?}) — {}",
                self.id,
                self.name,
                elapsed,
                self.failures.join("; ")
            );
            panic!("criterion {:02} {} failed: {}", self.id, self.name, self.failures.join("; "));
        }
    }
}

#[test]
fn criterion_01_mollifier_exactness() {
    let mut c = Criterion::new(1, "mollifier-exactness");
    for eps in [0.01, 0.1, 0.5, 0.9] {
        let tol = 1e-12;
        c.check(
            format!("rho({eps}) = eps"),
            (mollifier_rho(eps, eps).unwrap() - eps).abs() <= tol,
        );
        c.check(format!("rho(-{eps}) = 0"), mollifier_rho(eps, -eps).unwrap().abs() <= tol);
        c.check(
            format!("rho_dot(-{eps}) = 0"),
            mollifier_rho_dot(eps, -eps).unwrap().abs() <= tol,
        );
        c.check(
            format!("rho_dot({eps}) = 1"),
            (mollifier_rho_dot(eps, eps).unwrap() - 1.0).abs() <= tol,
        );
        c.check(
            format!("rho_dot(0) = 1/2 at eps {eps}"),
            (mollifier_rho_dot(eps, 0.0).unwrap() - 0.5).abs() <= tol,
        );
        let mut sup: f64 = 0.0;
        let n = 10_000;
        for k in 0..n {
            let y = -3.0 * eps + 6.0 * eps * k as f64 / (n - 1) as f64;
            sup = sup.max(mollifier_rho_dot(eps, y).unwrap().abs());
        }
        c.check(format!("sup |rho_dot| <= 1 at eps {eps}"), sup <= 1.0 + 1e-12);
    }
    c.finish();
}

#[test]
fn criterion_02_certificate_reproduction() {
    let mut c = Criterion::new(2, "certificate-reproduction");
    let spec = two_class_2d(1.8);
    match find_stability_certificate(&spec, 32) {
        Ok(cert) => {
            c.check("Q = I", (cert.q.clone() - DMatrix::identity(2, 2)).norm() <= 1e-9);
            c.check(format!("lambda1 = 2 (got {})", cert.lambda1), (cert.lambda1 - 2.0).abs() <= 1e-9);
            c.check(format!("lambda2 = 3 (got {})", cert.lambda2), (cert.lambda2 - 3.0).abs() <= 1e-9);
            c.check(format!("theta = 1 (got {})", cert.theta), (cert.theta - 1.0).abs() <= 1e-9);
        }
        Err(e) => c.check(format!("certificate search: {e}"), false),
    }
    c.finish();
}

#[test]
fn criterion_03_dissipation_inequality() {
    let mut c = Criterion::new(3, "dissipation-inequality");
    for (tag, spec) in [("1d", single_class_1d(1.5)), ("2d", two_class_2d(1.8))] {
        let cert = find_stability_certificate(&spec, 32).unwrap();
        let d = spec.dim();
        let mut stream = RngStream::new(303, 0);
        let mut worst = f64::NEG_INFINITY;
        for eps in [0.01, 0.1, 0.5] {
            for _ in 0..10_000 {
                let x = DVector::from_fn(d, |_, _| 20.0 * (stream.next_open01() - 0.5));
                let mut y = DVector::from_fn(d, |_, _| 20.0 * (stream.next_open01() - 0.5));
                if x == y {
                    y[0] += 1.0;
                }
                worst = worst.max(dissipation_gap(&spec, eps, &cert.q, &x, &y).unwrap());
            }
        }
        c.check(format!("{tag}: max gap {worst:.2e} <= 1e-9"), worst <= 1e-9);
    }
    c.finish();
}

#[test]
fn criterion_04_stable_sampler_calibration() {
    let mut c = Criterion::new(4, "stable-sampler-calibration");
    let n = 1_000_000usize;

    // alpha = 2 reduces to N(0, 2): one-sample KS at the 0.1% level
    let mut stream = RngStream::new(404, 0);
    let mut xs: Vec<f64> =
        (0..n).map(|_| sample_standard_stable(2.0, &mut stream).unwrap()).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = ks_distance_sorted(&xs, |x| normal_cdf(x, 0.0, 2.0f64.sqrt()));
    let crit = ks_critical_coefficient(0.001) / (n as f64).sqrt();
    c.check(format!("KS vs N(0,2): {ks:.2e} <= {crit:.2e}"), ks <= crit);

    // empirical characteristic function against exp(-|u|^alpha)
    for (si, alpha) in [(1u64, 1.25f64), (2, 1.5), (3, 1.75)] {
        let mut stream = RngStream::new(404, si);
        let draws: Vec<f64> =
            (0..n).map(|_| sample_standard_stable(alpha, &mut stream).unwrap()).collect();
        for u in [0.5f64, 1.0] {
            let coss: Vec<f64> = draws.iter().map(|&x| (u * x).cos()).collect();
            let mean = coss.iter().sum::<f64>() / n as f64;
            let var =
                coss.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
            let se = (var / n as f64).sqrt();
            let want = (-u.powf(alpha)).exp();
            c.check(
                format!("ecf alpha {alpha} u {u}: |{mean:.6} - {want:.6}| <= 3se"),
                (mean - want).abs() <= 3.0 * se,
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_05_closed_form_em_charfn() {
    let mut c = Criterion::new(5, "closed-form-em-charfn");
    let alpha = 1.5f64;
    let n_steps = 200usize;
    let paths = 100_000usize;
    let sched = StepSchedule::harmonic_offset(10.0).unwrap();
    let etas: Vec<f64> = (1..=n_steps).map(|k| sched.eta(k).unwrap()).collect();
    // scalar chain Y <- (1 - eta) Y + eta^(1/alpha) xi, unit-exponent scale
    let mut endpoints = Vec::with_capacity(paths);
    for i in 0..paths {
        let mut stream = RngStream::new(505, i as u64);
        let mut y = 0.0f64;
        for &eta in &etas {
            let xi = sample_standard_stable(alpha, &mut stream).unwrap();
            y = (1.0 - eta) * y + eta.powf(1.0 / alpha) * xi;
        }
        endpoints.push(y);
    }
    for u in [0.5f64, 1.0] {
        let coss: Vec<f64> = endpoints.iter().map(|&y| (u * y).cos()).collect();
        let mean = coss.iter().sum::<f64>() / paths as f64;
        let var = coss.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (paths as f64 - 1.0);
        let se = (var / paths as f64).sqrt();
        let want = ou_em_charfn(&sched, n_steps, alpha, u).unwrap();
        c.check(
            format!("u {u}: MC {mean:.5} vs formula {want:.5} within 3se {:.1e}", 3.0 * se),
            (mean - want).abs() <= 3.0 * se,
        );
    }
    c.finish();
}

#[test]
fn criterion_06_rate_optimality_ratios() {
    let mut c = Criterion::new(6, "rate-optimality-ratios");
    for alpha in [1.25f64, 1.5, 1.75, 2.0] {
        let sched = StepSchedule::alpha_harmonic(alpha).unwrap();
        let mut ratios = Vec::new();
        let mut shape_pts = Vec::new();
        for k in 1..=50 {
            let n = 100 * k;
            let d = ou_char_distance(&sched, n, alpha, 64).unwrap();
            let eta = sched.eta(n).unwrap();
            ratios.push(d / eta.powf(1.0 / alpha));
            let t = sched.t(n).unwrap();
            shape_pts.push(((-alpha * t).exp() + eta, d));
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        c.check(format!("alpha {alpha}: ratios strictly positive (min {lo:.3e})"), lo > 0.0);
        c.check(
            format!("alpha {alpha}: band {:.2} <= 3", hi / lo),
            lo > 0.0 && hi / lo <= 3.0,
        );
        if shape_pts.iter().all(|p| p.1 > 0.0) {
            let fit = fit_rate(&shape_pts).unwrap();
            c.check(
                format!("alpha {alpha}: shape slope {:.3} within 1 +- 0.05", fit.slope),
                (fit.slope - 1.0).abs() <= 0.05,
            );
        } else {
            c.check(format!("alpha {alpha}: log-regression undefined (D_n <= 0)"), false);
        }
    }
    c.finish();
}

#[test]
fn criterion_07_series_bound() {
    let mut c = Criterion::new(7, "series-bound");
    let sched = StepSchedule::harmonic_offset(10.0).unwrap();
    for alpha in [1.25f64, 1.5, 2.0] {
        let grid: Vec<usize> = (1..=100).map(|k| 100 * k).collect();
        let ratios: Vec<f64> = grid
            .iter()
            .map(|&n| pou_core::analysis::series_bound_ratio(&sched, 1.0, alpha, n).unwrap())
            .collect();
        let non_increasing = ratios.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        c.check(format!("alpha {alpha}: non-increasing beyond n = 100"), non_increasing);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        c.check(
            format!("alpha {alpha}: plateau max/min {:.3} <= 2", hi / lo),
            hi / lo <= 2.0,
        );
    }
    c.finish();
}

#[test]
fn criterion_08_jacobi_flow_decay() {
    let mut c = Criterion::new(8, "jacobi-flow-decay");
    let spec = two_class_2d(1.8);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut all_ok = true;
    let mut init_stream = RngStream::new(808, 0);
    for case in 0..100u64 {
        let x0 = DVector::from_fn(2, |_, _| 10.0 * (init_stream.next_open01() - 0.5));
        let angle = 2.0 * std::f64::consts::PI * init_stream.next_open01();
        let u = DVector::from_vec(vec![angle.cos(), angle.sin()]);
        for (ti, t) in [1.0f64, 2.0, 4.0].into_iter().enumerate() {
            let mut noise = RngStream::new(809, case * 3 + ti as u64);
            let j = jacobian_flow(&spec, 0.1, &x0, t, 1e-3 * t, &mut noise).unwrap();
            let ratio = (&j * &u).norm_squared() / u.norm_squared();
            let bound = 1.2 * (-2.0 * t).exp();
            all_ok &= ratio <= bound;
            worst_excess = worst_excess.max(ratio / bound);
        }
    }
    c.check(
        format!("|J_t u|^2 <= 1.2 e^(-2t) over 100 cases (worst ratio/bound {worst_excess:.3})"),
        all_ok,
    );
    c.finish();
}

#[test]
fn criterion_09_sinkhorn_oracle_agreement() {
    let mut c = Criterion::new(9, "sinkhorn-oracle-agreement");
    let mut stream = RngStream::new(909, 0);
    let mut rand_measure = |stream: &mut RngStream, n: usize, d: usize| {
        let pts: Vec<DVector<f64>> =
            (0..n).map(|_| DVector::from_fn(d, |_, _| 2.0 * stream.next_open01())).collect();
        EmpiricalMeasure::uniform(pts).unwrap()
    };
    let solve = |a: &EmpiricalMeasure, b: &EmpiricalMeasure, tau: f64| {
        let cost = cost_matrix(a, b).unwrap();
        sinkhorn(a.weights(), b.weights(), &cost, tau, 10_000, 1e-9).unwrap().value
    };

    let mut agree = true;
    let mut worst = 0.0f64;
    let mut err80 = Vec::new();
    let mut err20 = Vec::new();
    for _ in 0..50 {
        let n = 1 + (stream.next_u64() % 6) as usize;
        let d = 1 + (stream.next_u64() % 2) as usize;
        let a = rand_measure(&mut stream, n, d);
        let b = rand_measure(&mut stream, n, d);
        let exact = w1_exact_assignment(&a, &b).unwrap();
        let s200 = solve(&a, &b, 200.0);
        let err = (s200 - exact).abs();
        agree &= err <= 1e-3 * (1.0 + exact);
        worst = worst.max(err / (1.0 + exact));
        err80.push((solve(&a, &b, 80.0) - exact).abs());
        err20.push((solve(&a, &b, 20.0) - exact).abs());
    }
    c.check(format!("tau 200 vs oracle: worst relative error {worst:.2e} <= 1e-3"), agree);

    let mut singles_ok = true;
    for _ in 0..10 {
        let a = rand_measure(&mut stream, 1, 2);
        let b = rand_measure(&mut stream, 1, 2);
        let exact = (&a.points()[0] - &b.points()[0]).norm();
        singles_ok &= (solve(&a, &b, 200.0) - exact).abs() <= 1e-12;
    }
    c.check("single-atom pairs exact to 1e-12", singles_ok);

    let median = |xs: &mut Vec<f64>| {
        xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        xs[xs.len() / 2]
    };
    let (m80, m20) = (median(&mut err80), median(&mut err20));
    c.check(format!("median error tau80 {m80:.2e} <= tau20 {m20:.2e}"), m80 <= m20);
    c.finish();
}

/// Criteria 10-12 share the two pipelines: each runs twice at different
/// worker counts, checked for shape (10, 11) and byte-identity (12).
#[test]
fn criteria_10_11_12_pipelines_and_determinism() {
    let base_seed = 2024u64;

    let mut w1_cfg = example_config_1d(1.5);
    w1_cfg.n_steps = 500;
    w1_cfg.n_trajectories = 500;
    w1_cfg.n_repeats = 5;
    w1_cfg.tau = 20.0;
    w1_cfg.master_seed = base_seed;

    let mut clt_cfg = example_config_1d(1.5);
    clt_cfg.experiment = ExperimentKind::CltCheck;
    clt_cfg.n_steps = 2000;
    clt_cfg.n_trajectories = 400;
    clt_cfg.test_function = TestFunctionConfig::IndicatorPositive;
    clt_cfg.master_seed = base_seed;

    let run = |cfg: &pou_cli::ExperimentConfig, workers: usize| {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = cfg.clone();
        cfg.workers = workers;
        cfg.output_dir = dir.path().to_path_buf();
        experiments::run(&cfg).unwrap();
        dir
    };

    let w1_a = run(&w1_cfg, 2);
    let w1_b = run(&w1_cfg, 3);
    let clt_a = run(&clt_cfg, 2);
    let clt_b = run(&clt_cfg, 3);

    // criterion 10: the distance curve decays and keeps a negative trend
    let mut c10 = Criterion::new(10, "w1-curve-shape");
    let table = std::fs::read_to_string(w1_a.path().join("w1_curve.csv")).unwrap();
    let rows: Vec<(usize, f64)> = table
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    let at = |k: usize| rows.iter().find(|r| r.0 == k).map(|r| r.1).unwrap();
    c10.check(
        format!("w1(500) {:.4} < w1(50) {:.4}", at(500), at(50)),
        at(500) < at(50),
    );
    let tail: Vec<(f64, f64)> =
        rows[rows.len() - 10..].iter().map(|&(k, w)| (k as f64, w)).collect();
    match fit_rate(&tail) {
        Ok(fit) => c10.check(
            format!("trend over last 10 checkpoints: slope {:.3} < 0", fit.slope),
            fit.slope < 0.0,
        ),
        Err(e) => c10.check(format!("trend fit failed: {e}"), false),
    }
    c10.finish();

    // criterion 11: moment diagnostics of the normalised CLT statistic
    let mut c11 = Criterion::new(11, "clt-shape");
    let summary = std::fs::read_to_string(clt_a.path().join("clt_summary.csv")).unwrap();
    let header: Vec<&str> = summary.lines().next().unwrap().split(',').collect();
    let data: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    let field = |name: &str| -> f64 {
        let idx = header.iter().position(|h| *h == name).unwrap();
        data[idx].parse().unwrap()
    };
    let (skew, kurt) = (field("skewness"), field("excess_kurtosis"));
    c11.check(format!("|skewness| {:.3} <= 0.35", skew.abs()), skew.abs() <= 0.35);
    c11.check(format!("|excess kurtosis| {:.3} <= 0.7", kurt.abs()), kurt.abs() <= 0.7);
    c11.finish();

    // criterion 12: byte-identical CSVs across worker counts
    let mut c12 = Criterion::new(12, "worker-count-determinism");
    for (dir_a, dir_b, file) in [
        (&w1_a, &w1_b, "w1_curve.csv"),
        (&clt_a, &clt_b, "clt.csv"),
        (&clt_a, &clt_b, "clt_summary.csv"),
    ] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        c12.check(format!("{file} identical across worker counts"), a == b);
    }
    c12.finish();
}
