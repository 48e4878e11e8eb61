//! Numerical checks of every closed-form identity the solver relies on.
//!
//! Each check returns one or more [`CheckReport`]s. Random sample points come
//! from a ChaCha generator seeded per check, so a suite run is reproducible
//! for a given seed regardless of thread scheduling.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contour::{linearization_check, resolved_quad_size, PatchPair, ResidualEvaluator};
use crate::quadrature::offset_trapezoid_mean;
use crate::specfun::{
    contiguous_residuals, gauss_2f1, gauss_2f1_euler, hyp2f1, lambda_coeff,
    lambda_integral_oracle, pochhammer_over_factorial, AnnulusConstants, Hyper2F1Input,
};
use crate::spectrum::{
    bifurcation_row, discriminant, eigenvalue_monotonicity_scan, kernel_vector, mode_matrix,
    quadratic_coeffs, threshold_by_inequality, threshold_n,
};
use crate::Result;

pub const DEFAULT_SEED: u64 = 0x5eed_5eed;

/// Tolerance of every named check.
pub const TOLERANCES: &[(&str, f64)] = &[
    ("annulus.residual", 1e-8),
    ("hyp2f1.contiguous", 1e-10),
    ("hyp2f1.euler", 1e-10),
    ("integrals.cross", 1e-7),
    ("integrals.self", 1e-7),
    ("integrals.self.rotation", 1e-12),
    ("lambda.oracle", 1e-8),
    ("linearization", 1e-5),
    ("linearization.off_block", 1e-7),
    ("spectral.determinant", 1e-12),
    ("spectral.discriminant", 1e-10),
    ("spectral.kernel", 1e-10),
    ("spectral.monotonicity", 0.0),
    ("spectral.threshold", 1e-12),
];

/// Looks up the tolerance of a named check.
///
/// # Panics
/// If `name` is not in [`TOLERANCES`].
pub fn tolerance(name: &str) -> f64 {
    TOLERANCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|&(_, tol)| tol)
        .unwrap_or_else(|| panic!("no tolerance registered for check {name}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub cases: usize,
}

impl CheckReport {
    /// Reduces per-case errors against the registered tolerance. A NaN error
    /// fails the check.
    pub fn from_errors<I: IntoIterator<Item = f64>>(name: &str, errors: I) -> Self {
        let mut max_error = 0.0f64;
        let mut cases = 0;
        for e in errors {
            cases += 1;
            if e.is_nan() || e > max_error {
                max_error = if e.is_nan() { f64::NAN } else { e };
            }
            if max_error.is_nan() {
                break;
            }
        }
        let tolerance = tolerance(name);
        Self {
            name: name.to_string(),
            max_error,
            tolerance,
            passed: max_error <= tolerance,
            cases,
        }
    }

    fn failed(name: &str, cases: usize) -> Self {
        Self {
            name: name.to_string(),
            max_error: f64::INFINITY,
            tolerance: tolerance(name),
            passed: false,
            cases,
        }
    }
}

fn rng_for(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a over the name keeps streams independent between checks
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for byte in name.bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn relative(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// Series against Euler's integral for random `(a, b, c, z)` with
/// `c > b > 0` and `z ∈ (0, 0.81]`; error scaled by `1 + |F|`.
pub fn check_hypergeometric(samples: usize, seed: u64) -> CheckReport {
    let name = "hyp2f1.euler";
    let mut rng = rng_for(seed, name);
    let errors = (0..samples).map(|_| {
        let a = rng.gen_range(-2.0..3.0);
        let b = rng.gen_range(0.05..3.0);
        let c = b + rng.gen_range(0.05..3.0);
        let z = 0.81 * (1.0 - rng.gen::<f64>());
        let input = Hyper2F1Input::new(a, b, c, z).expect("sampled inside the disc");
        match (gauss_2f1(&input), gauss_2f1_euler(&input)) {
            (Ok(s), Ok(e)) => (s - e).abs() / (1.0 + s.abs()),
            _ => f64::NAN,
        }
    });
    CheckReport::from_errors(name, errors.collect::<Vec<_>>())
}

/// Four contiguous relations at random parameters.
pub fn check_contiguous(samples: usize, seed: u64) -> CheckReport {
    let name = "hyp2f1.contiguous";
    let mut rng = rng_for(seed, name);
    let mut errors = Vec::with_capacity(4 * samples);
    for _ in 0..samples {
        let a = rng.gen_range(-1.5..2.5);
        let b = rng.gen_range(0.05..2.5);
        let c = b + rng.gen_range(0.05..2.5);
        let z = rng.gen_range(0.0..=0.81);
        let input = Hyper2F1Input::new(a, b, c, z).expect("sampled inside the disc");
        match contiguous_residuals(&input) {
            Ok(r) => errors.extend(r.iter().map(|v| v.abs())),
            Err(_) => errors.push(f64::NAN),
        }
    }
    CheckReport::from_errors(name, errors)
}

/// Hypergeometric `Λ_n(b)` against its integral representation, relative.
pub fn check_lambda(b_set: &[f64], n_max: usize) -> CheckReport {
    let mut errors = Vec::new();
    for &b in b_set {
        for n in 1..=n_max {
            errors.push(match (lambda_coeff(n, b), lambda_integral_oracle(n, b)) {
                (Ok(closed), Ok(oracle)) => relative(closed, oracle),
                _ => f64::NAN,
            });
        }
    }
    CheckReport::from_errors("lambda.oracle", errors)
}

/// The two perturbation identities on the unit circle for `n ≤ n_max` at
/// `samples` random points, plus a report on how much the error varies with
/// the point (it should not, up to rounding).
pub fn check_self_integrals(n_max: usize, samples: usize, seed: u64, quad: usize) -> Vec<CheckReport> {
    let mut rng = rng_for(seed, "integrals.self");
    let omegas: Vec<Complex64> = (0..samples)
        .map(|_| Complex64::cis(rng.gen_range(0.0..TAU)))
        .collect();
    let mut errors = Vec::new();
    let mut spread = Vec::new();
    for n in 1..=n_max {
        let partial: f64 = (1..n).map(|k| 1.0 / (2 * k + 1) as f64).sum();
        let c1_factor = -2.0 / PI * (1.0 + partial);
        let c2_factor = 2.0 / PI * (partial + 1.0 / (2 * n + 1) as f64);
        let mut per_identity = [Vec::new(), Vec::new()];
        for &w in &omegas {
            let wn = w.powu(n as u32);
            // τ = ω e^{iη}: nodes never hit the kink at τ = ω
            let (l1, l2) = offset_trapezoid_mean(quad, |eta| {
                let tau = w * Complex64::cis(eta);
                let diff = tau - w;
                let dist = diff.norm();
                let num = tau.powu(n as u32) - wn;
                Pair(num / dist, diff * diff * num / (dist * dist * dist))
            })
            .into();
            let e1 = (l1 - c1_factor * wn).norm();
            let e2 = (l2 - c2_factor * wn * w * w).norm();
            per_identity[0].push(e1);
            per_identity[1].push(e2);
            errors.extend([e1, e2]);
        }
        for errs in &per_identity {
            let hi = errs.iter().cloned().fold(f64::MIN, f64::max);
            let lo = errs.iter().cloned().fold(f64::MAX, f64::min);
            spread.push(hi - lo);
        }
    }
    vec![
        CheckReport::from_errors("integrals.self", errors),
        CheckReport::from_errors("integrals.self.rotation", spread),
    ]
}

#[derive(Default, Clone, Copy)]
struct Pair(Complex64, Complex64);

impl std::ops::Add for Pair {
    type Output = Pair;
    fn add(self, rhs: Pair) -> Pair {
        Pair(self.0 + rhs.0, self.1 + rhs.1)
    }
}

impl std::ops::Div<f64> for Pair {
    type Output = Pair;
    fn div(self, rhs: f64) -> Pair {
        Pair(self.0 / rhs, self.1 / rhs)
    }
}

impl From<Pair> for (Complex64, Complex64) {
    fn from(p: Pair) -> Self {
        (p.0, p.1)
    }
}

/// `(1/2πi)∮ f(τ) dτ` over the unit circle.
fn circle_mean<F: Fn(Complex64) -> Complex64>(quad: usize, f: F) -> Complex64 {
    offset_trapezoid_mean(quad, |eta| {
        let tau = Complex64::cis(eta);
        f(tau) * tau
    })
}

/// Interaction integrals between circles of radii `1` and `b`, each against
/// its hypergeometric value, at random points and random real weights.
pub fn check_cross_integrals(b_set: &[f64], n_max: usize, samples: usize, seed: u64, quad: usize) -> Result<CheckReport> {
    let mut rng = rng_for(seed, "integrals.cross");
    let mut errors = Vec::new();
    for &b in b_set {
        let b2 = b * b;
        let f_lin = 1.5 * hyp2f1(0.5, 2.5, 2.0, b2)?;
        let f_cross = 0.375 * hyp2f1(1.5, 2.5, 3.0, b2)?;
        for n in 1..=n_max {
            let nf = n as f64;
            let np = n as u32;
            let bn = b.powi(n as i32);
            let half = bn * pochhammer_over_factorial(0.5, n) * hyp2f1(0.5, nf + 0.5, nf + 1.0, b2)?;
            let three_half =
                bn * pochhammer_over_factorial(1.5, n) * hyp2f1(1.5, nf + 1.5, nf + 1.0, b2)?;
            let lin_tail =
                bn * pochhammer_over_factorial(1.5, n + 1) * hyp2f1(0.5, nf + 2.5, nf + 2.0, b2)?;
            let cross_tail =
                bn * pochhammer_over_factorial(0.5, n + 2) * hyp2f1(1.5, nf + 2.5, nf + 3.0, b2)?;
            for _ in 0..samples {
                let w = Complex64::cis(rng.gen_range(0.0..TAU));
                let a = rng.gen_range(-1.0..1.0);
                let c = rng.gen_range(-1.0..1.0);
                let wn = w.powu(np);
                let dist = |tau: Complex64| (w - b * tau).norm();

                let near = circle_mean(quad, |t| t.powu(np - 1) / dist(t));
                let near_conj = circle_mean(quad, |t| t.conj().powu(np + 1) / dist(t));
                let cube_conj = circle_mean(quad, |t| t.conj().powu(np + 1) / dist(t).powi(3));
                let cube = circle_mean(quad, |t| t.powu(np - 1) / dist(t).powi(3));
                let lin = circle_mean(quad, |t| {
                    (b * t - w) * (a * wn - c * t.powu(np)) / dist(t).powi(3)
                });
                let cross = circle_mean(quad, |t| {
                    (b * w - t) * (c * wn - a * t.powu(np)) / dist(t).powi(3)
                });

                let w2 = wn * w * w;
                errors.extend([
                    (near - wn * half).norm(),
                    (near_conj - wn.conj() * half).norm(),
                    (near_conj - near.conj()).norm(),
                    (cube_conj - wn.conj() * three_half).norm(),
                    (cube - wn * three_half).norm(),
                    (cube_conj - cube.conj()).norm(),
                    (lin + w2 * b * (a * f_lin - c * lin_tail)).norm(),
                    (cross + w2 * b2 * (c * f_cross - a * cross_tail)).norm(),
                ]);
            }
        }
    }
    Ok(CheckReport::from_errors("integrals.cross", errors))
}

/// Algebraic structure of the mode matrices at each `b`, for `n ≤ m_hi`.
pub fn check_spectral(b_set: &[f64], m_hi: usize) -> Result<Vec<CheckReport>> {
    let mut monotone = Vec::new();
    let mut determinant = Vec::new();
    let mut disc = Vec::new();
    let mut kernel = Vec::new();
    let mut threshold = Vec::new();

    let mut sorted = b_set.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tables = sorted
        .iter()
        .map(|&b| AnnulusConstants::new(b, m_hi))
        .collect::<Result<Vec<_>>>()?;

    for consts in &tables {
        let b = consts.b();
        let report = eigenvalue_monotonicity_scan(consts, m_hi)?;
        monotone.push(report.violations.len() as f64);
        let s = consts.s_table();
        let l = consts.lambda_table();
        monotone.push(s.windows(2).filter(|w| !(w[1] > w[0])).count() as f64);
        monotone.push(l.windows(2).filter(|w| !(w[1] < w[0])).count() as f64);

        for n in 2..=m_hi {
            let (c, d) = quadratic_coeffs(n, consts)?;
            for lambda in [-1.0, 0.0, 1.0] {
                let mm = mode_matrix(n, 0.5 * (1.0 - lambda), consts)?;
                let q = 0.25 * b * (lambda * lambda - 2.0 * c * lambda + d);
                determinant.push((mm.det() - q).abs() / mm.det_scale());
            }
            let dsc = discriminant(n, consts)?;
            disc.push((dsc.delta - (c * c - d)).abs() / (c * c).max(d.abs()).max(1.0));
        }

        let n_scan = threshold_n(consts)?;
        let n_remark = threshold_by_inequality(consts)?;
        threshold.push(if n_scan == n_remark { 0.0 } else { f64::INFINITY });

        for m in n_scan..=m_hi {
            let row = bifurcation_row(m, consts)?;
            for omega in [row.omega_minus, row.omega_plus] {
                let v = kernel_vector(m, omega, consts)?;
                let mm = mode_matrix(m, omega, consts)?;
                let r = mm.apply([v.v1, v.v2]);
                let scale = mm.max_abs_entry() * v.v1.hypot(v.v2);
                kernel.push(r[0].hypot(r[1]) / scale);
            }
        }
    }
    // Λ_n increases with b at fixed n
    for pair in tables.windows(2) {
        let lo = pair[0].lambda_table();
        let hi = pair[1].lambda_table();
        monotone.push(lo.iter().zip(hi).filter(|(x, y)| !(y > x)).count() as f64);
    }

    Ok(vec![
        CheckReport::from_errors("spectral.determinant", determinant),
        CheckReport::from_errors("spectral.discriminant", disc),
        CheckReport::from_errors("spectral.kernel", kernel),
        CheckReport::from_errors("spectral.monotonicity", monotone),
        CheckReport::from_errors("spectral.threshold", threshold),
    ])
}

/// Determinant and discriminant identities at random `(n, b, Ω)`.
pub fn check_random_determinants(samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut rng = rng_for(seed, "spectral.determinant");
    let mut det_err = Vec::with_capacity(samples);
    let mut disc_err = Vec::with_capacity(samples);
    for _ in 0..samples {
        let n = rng.gen_range(2..=200usize);
        let b = rng.gen_range(0.05..0.95);
        let omega = rng.gen_range(-2.0..2.0);
        let consts = AnnulusConstants::new(b, n)?;
        let (c, d) = quadratic_coeffs(n, &consts)?;
        let mm = mode_matrix(n, omega, &consts)?;
        let lambda = 1.0 - 2.0 * omega;
        let q = 0.25 * b * (lambda * lambda - 2.0 * c * lambda + d);
        det_err.push((mm.det() - q).abs() / mm.det_scale());
        let dsc = discriminant(n, &consts)?;
        disc_err.push((dsc.delta - (c * c - d)).abs() / (c * c).max(d.abs()).max(1.0));
    }
    Ok(vec![
        CheckReport::from_errors("spectral.determinant", det_err),
        CheckReport::from_errors("spectral.discriminant", disc_err),
    ])
}

/// Threshold by scan against the inequality form, and the closed form of
/// `E_1`, for each `b`.
pub fn check_threshold(b_set: &[f64]) -> Result<CheckReport> {
    let mut errors = Vec::new();
    for &b in b_set {
        let consts = AnnulusConstants::new(b, 200)?;
        let same = threshold_n(&consts)? == threshold_by_inequality(&consts)?;
        errors.push(if same { 0.0 } else { f64::INFINITY });
        let e1 = discriminant(1, &consts)?.e;
        errors.push(relative(e1, -(1.0 + b).powi(2) * consts.lambda(1)?));
    }
    Ok(CheckReport::from_errors("spectral.threshold", errors))
}

/// `‖G‖∞` of the discretised contour equations at the annulus.
pub fn check_annulus(b_set: &[f64], omegas: &[f64], quad: usize) -> Result<CheckReport> {
    let eval = ResidualEvaluator::new(quad)?;
    let mut errors = Vec::new();
    for &b in b_set {
        for &omega in omegas {
            let patch = PatchPair::annulus(b, 2, 1, omega)?;
            let g = eval.g_values(&patch)?;
            errors.push(g.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs())));
        }
    }
    Ok(CheckReport::from_errors("annulus.residual", errors))
}

/// Finite-difference Jacobian blocks at the annulus against `-nm·M_{nm}`, for
/// `m = N(b) + 1` at both bifurcation speeds and each `n ≤ modes`.
pub fn check_linearization(b_set: &[f64], modes: usize, quad: usize) -> Result<Vec<CheckReport>> {
    let mut rel = Vec::new();
    let mut off = Vec::new();
    for &b in b_set {
        let consts = AnnulusConstants::new(b, 200)?;
        let m = threshold_n(&consts)? + 1;
        let row = bifurcation_row(m, &consts)?;
        for omega in [row.omega_minus, row.omega_plus] {
            for n in 1..=modes {
                let p = resolved_quad_size(quad, n, m);
                let report = linearization_check(m, omega, n, 1e-6, p, &consts)?;
                rel.push(report.relative_error);
                off.push(report.off_block);
            }
        }
    }
    Ok(vec![
        CheckReport::from_errors("linearization", rel),
        CheckReport::from_errors("linearization.off_block", off),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: 100,
        }
    }
}

const STANDARD_B: [f64; 3] = [0.2, 0.5, 0.8];

/// Runs every check concurrently and returns the reports sorted by name.
/// A check that errors out is reported as failed with infinite error.
pub fn run_suite(config: &SuiteConfig) -> Vec<CheckReport> {
    let seed = config.seed;
    let samples = config.samples;
    type Job = Box<dyn FnOnce() -> (Vec<&'static str>, Result<Vec<CheckReport>>) + Send>;
    let jobs: Vec<Job> = vec![
        Box::new(move || (vec!["hyp2f1.euler"], Ok(vec![check_hypergeometric(samples, seed)]))),
        Box::new(move || (vec!["hyp2f1.contiguous"], Ok(vec![check_contiguous(samples, seed)]))),
        Box::new(|| (vec!["lambda.oracle"], Ok(vec![check_lambda(&STANDARD_B, 50)]))),
        Box::new(move || {
            (vec!["integrals.self", "integrals.self.rotation"], Ok(check_self_integrals(20, 8, seed, 65536)))
        }),
        Box::new(move || {
            (vec!["integrals.cross"], check_cross_integrals(&[0.3, 0.6], 10, 2, seed, 4096).map(|r| vec![r]))
        }),
        Box::new(|| {
            (
                vec![
                    "spectral.determinant",
                    "spectral.discriminant",
                    "spectral.kernel",
                    "spectral.monotonicity",
                    "spectral.threshold",
                ],
                check_spectral(&STANDARD_B, 200),
            )
        }),
        Box::new(move || {
            (
                vec!["spectral.determinant", "spectral.discriminant"],
                check_random_determinants(10 * samples, seed),
            )
        }),
        Box::new(|| {
            let bs: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
            (vec!["spectral.threshold"], check_threshold(&bs).map(|r| vec![r]))
        }),
        Box::new(|| {
            (
                vec!["annulus.residual"],
                check_annulus(&[0.3, 0.5, 0.7], &[-1.0, 0.0, 0.5, 1.0], 2048).map(|r| vec![r]),
            )
        }),
        Box::new(|| {
            (
                vec!["linearization", "linearization.off_block"],
                check_linearization(&[0.5, 0.7], 2, 4096),
            )
        }),
    ];

    let outcomes: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs.into_iter().map(|job| scope.spawn(job)).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("check thread panicked"))
            .collect()
    });

    let mut reports = Vec::new();
    for (names, outcome) in outcomes {
        match outcome {
            Ok(rs) => reports.extend(rs),
            Err(_) => reports.extend(names.into_iter().map(|n| CheckReport::failed(n, 0))),
        }
    }
    merge_by_name(reports)
}

/// Folds reports sharing a name into one, keeping the worst error.
fn merge_by_name(mut reports: Vec<CheckReport>) -> Vec<CheckReport> {
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    let mut merged: Vec<CheckReport> = Vec::new();
    for r in reports {
        match merged.last_mut() {
            Some(last) if last.name == r.name => {
                last.cases += r.cases;
                if r.max_error.is_nan() || r.max_error > last.max_error {
                    last.max_error = r.max_error;
                }
                last.passed = last.passed && r.passed;
            }
            _ => merged.push(r),
        }
    }
    merged
}

/// Plain-text table, one line per report.
pub fn format_table(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(5);
    let mut out = format!(
        "{:<width$}  {:>12}  {:>9}  {:>6}  {}\n",
        "check", "max_error", "tolerance", "cases", "result"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<width$}  {:>12.3e}  {:>9.0e}  {:>6}  {}\n",
            r.name,
            r.max_error,
            r.tolerance,
            r.cases,
            if r.passed { "pass" } else { "FAIL" }
        ));
    }
    out
}
