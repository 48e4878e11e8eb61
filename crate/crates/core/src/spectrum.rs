//! Spectral data of the boundary operator linearised at the annulus.
//!
//! At frequency `n` the linearised operator acts on the pair of Fourier
//! coefficients `(a, c)` through the 2×2 matrix
//!
//! ```text
//! M_n = | Ω - S_n + b²Λ_1      -b²Λ_n          |
//!       | bΛ_n                  bΩ + S_n - bΛ_1 |
//! ```
//!
//! In the variable `λ = 1 - 2Ω` its determinant is `(b/4)(λ² - 2C_nλ + D_n)`,
//! whose reduced discriminant `Δ_n = E_n F_n` decides whether the two roots
//! are real and distinct.
//!
//! The kernel vector is `(Ω + S_m/b - Λ_1, -Λ_m)`. The algebraic
//! transversality condition stated alongside it in the literature,
//! `(Ω + S_m - Λ_1)² - b²Λ_m² = 0`, is not homogeneous with that kernel
//! vector; transversality is therefore decided by `Δ_m > 0` alone.

use crate::specfun::AnnulusConstants;
use crate::{Error, Result};

/// Threshold on `Δ_m` above which an eigenvalue counts as simple.
pub const SIMPLE_EIGENVALUE_TOL: f64 = 1e-12;
/// Relative tolerance on `M_m v` for a kernel vector.
pub const KERNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMatrix {
    pub n: usize,
    pub b: f64,
    pub omega: f64,
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl ModeMatrix {
    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Magnitude against which a vanishing determinant is judged.
    pub fn det_scale(&self) -> f64 {
        1f64.max((self.m11 * self.m22).abs())
            .max((self.m12 * self.m21).abs())
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.m11
            .abs()
            .max(self.m12.abs())
            .max(self.m21.abs())
            .max(self.m22.abs())
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }
}

fn require_mode(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("mode n = {n} must be >= 2")));
    }
    Ok(())
}

pub fn mode_matrix(n: usize, omega: f64, consts: &AnnulusConstants) -> Result<ModeMatrix> {
    require_mode(n)?;
    let b = consts.b();
    let s = consts.s(n)?;
    let lam_n = consts.lambda(n)?;
    let lam_1 = consts.lambda(1)?;
    Ok(ModeMatrix {
        n,
        b,
        omega,
        m11: omega - s + b * b * lam_1,
        m12: -b * b * lam_n,
        m21: b * lam_n,
        m22: b * omega + s - b * lam_1,
    })
}

/// Coefficients `(C_n, D_n)` of `(4/b) det M_n = λ² - 2C_nλ + D_n`.
pub fn quadratic_coeffs(n: usize, consts: &AnnulusConstants) -> Result<(f64, f64)> {
    require_mode(n)?;
    let b = consts.b();
    let s = consts.s(n)?;
    let lam_n = consts.lambda(n)?;
    let lam_1 = consts.lambda(1)?;
    let c = 1.0 + (1.0 / b - 1.0) * s - (1.0 - b * b) * lam_1;
    let d = -4.0 / b * s * s + 2.0 * (1.0 / b - 1.0 + 2.0 * (1.0 + b) * lam_1) * s
        - 4.0 * b * b * (lam_1 * lam_1 - lam_n * lam_n)
        - 2.0 * (1.0 - b * b) * lam_1
        + 1.0;
    Ok((c, d))
}

/// Reduced discriminant and its factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discriminant {
    pub delta: f64,
    pub e: f64,
    pub f: f64,
}

/// `Δ_n = ((1/b+1)S_n - (1+b²)Λ_1)² - 4b²Λ_n² = E_n F_n`, defined for `n >= 1`.
pub fn discriminant(n: usize, consts: &AnnulusConstants) -> Result<Discriminant> {
    let b = consts.b();
    let s = consts.s(n)?;
    let lam_n = consts.lambda(n)?;
    let lam_1 = consts.lambda(1)?;
    let core = (1.0 / b + 1.0) * s - (1.0 + b * b) * lam_1;
    Ok(Discriminant {
        delta: core * core - 4.0 * b * b * lam_n * lam_n,
        e: core - 2.0 * b * lam_n,
        f: core + 2.0 * b * lam_n,
    })
}

/// Smallest `n >= 2` with `E_n(b) > 0`, found by a linear scan.
pub fn threshold_n(consts: &AnnulusConstants) -> Result<usize> {
    for n in 2..=consts.n_max() {
        if discriminant(n, consts)?.e > 0.0 {
            return Ok(n);
        }
    }
    Err(Error::TableExhausted {
        n_max: consts.n_max(),
    })
}

/// Smallest `N >= 2` with `S_N > b((1+b²)/(1+b) Λ_1 + 2b/(1+b) Λ_N)`.
///
/// Equivalent to [`threshold_n`]; the two inequalities differ by the positive
/// factor `b/(1+b)`.
pub fn threshold_by_inequality(consts: &AnnulusConstants) -> Result<usize> {
    let b = consts.b();
    let lam_1 = consts.lambda(1)?;
    for n in 2..=consts.n_max() {
        let rhs = b * ((1.0 + b * b) / (1.0 + b) * lam_1 + 2.0 * b / (1.0 + b) * consts.lambda(n)?);
        if consts.s(n)? > rhs {
            return Ok(n);
        }
    }
    Err(Error::TableExhausted {
        n_max: consts.n_max(),
    })
}

/// Per-mode bifurcation data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub m: usize,
    pub b: f64,
    pub c_m: f64,
    pub d_m: f64,
    pub delta_m: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub transversal: bool,
}

pub fn bifurcation_row(m: usize, consts: &AnnulusConstants) -> Result<SpectrumRow> {
    require_mode(m)?;
    let threshold = threshold_n(consts)?;
    if m < threshold {
        return Err(Error::BelowThreshold { m, threshold });
    }
    let (c_m, d_m) = quadratic_coeffs(m, consts)?;
    let delta_m = discriminant(m, consts)?.delta;
    if delta_m <= 0.0 {
        return Err(Error::NotSimple { m, delta: delta_m });
    }
    let root = delta_m.sqrt();
    let lambda_minus = c_m - root;
    let lambda_plus = c_m + root;
    Ok(SpectrumRow {
        m,
        b: consts.b(),
        c_m,
        d_m,
        delta_m,
        lambda_minus,
        lambda_plus,
        omega_minus: 0.5 * (1.0 - lambda_plus),
        omega_plus: 0.5 * (1.0 - lambda_minus),
        transversal: delta_m > SIMPLE_EIGENVALUE_TOL,
    })
}

/// Which of the two angular velocities `Ω_m^±` a branch leaves from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn omega(self, row: &SpectrumRow) -> f64 {
        match self {
            Sign::Plus => row.omega_plus,
            Sign::Minus => row.omega_minus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            other => Err(Error::InvalidInput(format!(
                "sign must be plus or minus, got {other:?}"
            ))),
        }
    }
}

/// Generator of the kernel of `M_m` at an eigenvalue `Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelVector {
    pub m: usize,
    pub omega: f64,
    pub v1: f64,
    pub v2: f64,
}

impl KernelVector {
    /// Unit vector along `(v1, v2)`.
    pub fn direction(&self) -> [f64; 2] {
        let norm = self.v1.hypot(self.v2);
        [self.v1 / norm, self.v2 / norm]
    }

    /// `v2 / v1`, the limiting ratio `c_1 / a_1` along the branch.
    pub fn ratio(&self) -> f64 {
        self.v2 / self.v1
    }
}

/// Kernel generator `(Ω + S_m/b - Λ_1, -Λ_m)` of `M_m` at `Ω`.
///
/// The first entry is the null vector of the second row. When that row is
/// the smaller one it is nearly zero and the subtraction cancels, so `v1` is
/// then taken from the first row with the same normalisation of `v2`.
pub fn kernel_vector(m: usize, omega: f64, consts: &AnnulusConstants) -> Result<KernelVector> {
    let matrix = mode_matrix(m, omega, consts)?;
    let b = consts.b();
    let v2 = -consts.lambda(m)?;
    let v1 = if matrix.m11.hypot(matrix.m12) > matrix.m21.hypot(matrix.m22) {
        -matrix.m12 * v2 / matrix.m11
    } else {
        omega + consts.s(m)? / b - consts.lambda(1)?
    };
    let image = matrix.apply([v1, v2]);
    let residual = image[0].abs().max(image[1].abs())
        / (matrix.max_abs_entry().max(1.0) * v1.abs().max(v2.abs()));
    if !(residual <= KERNEL_TOL) {
        return Err(Error::NotAnEigenvalue {
            m,
            omega,
            residual,
        });
    }
    Ok(KernelVector { m, omega, v1, v2 })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DiscriminantNotIncreasing { n: usize },
    LambdaPlusNotIncreasing { n: usize },
    LambdaMinusNotDecreasing { n: usize },
    NotInterleaved { n: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub b: f64,
    pub threshold: usize,
    pub n_hi: usize,
    pub violations: Vec<Violation>,
}

/// Checks, for `N(b) <= n < n_hi`, that `Δ_n` and `λ_n^+` increase, `λ_n^-`
/// decreases, and `λ_m^- < λ_n^- < λ_n^+ < λ_m^+` whenever `m > n`.
pub fn eigenvalue_monotonicity_scan(
    consts: &AnnulusConstants,
    n_hi: usize,
) -> Result<MonotonicityReport> {
    if n_hi > consts.n_max() {
        return Err(Error::IndexOutOfTable {
            n: n_hi,
            n_max: consts.n_max(),
        });
    }
    let threshold = threshold_n(consts)?;
    let mut violations = Vec::new();
    if n_hi <= threshold {
        return Ok(MonotonicityReport {
            b: consts.b(),
            threshold,
            n_hi,
            violations,
        });
    }
    let rows = (threshold..=n_hi)
        .map(|n| bifurcation_row(n, consts))
        .collect::<Result<Vec<_>>>()?;
    for pair in rows.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        if !(hi.delta_m > lo.delta_m) {
            violations.push(Violation::DiscriminantNotIncreasing { n: lo.m });
        }
        if !(hi.lambda_plus > lo.lambda_plus) {
            violations.push(Violation::LambdaPlusNotIncreasing { n: lo.m });
        }
        if !(hi.lambda_minus < lo.lambda_minus) {
            violations.push(Violation::LambdaMinusNotDecreasing { n: lo.m });
        }
    }
    for (i, inner) in rows.iter().enumerate() {
        for outer in &rows[i + 1..] {
            let nested = outer.lambda_minus < inner.lambda_minus
                && inner.lambda_minus < inner.lambda_plus
                && inner.lambda_plus < outer.lambda_plus;
            if !nested {
                violations.push(Violation::NotInterleaved {
                    n: inner.m,
                    m: outer.m,
                });
            }
        }
    }
    Ok(MonotonicityReport {
        b: consts.b(),
        threshold,
        n_hi,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn consts(b: f64) -> AnnulusConstants {
        AnnulusConstants::new(b, 200).unwrap()
    }

    /// Brute-force expansion of det M_n with Ω = (1-λ)/2, evaluated at three λ.
    fn expanded_det(n: usize, lambda: f64, c: &AnnulusConstants) -> f64 {
        mode_matrix(n, 0.5 * (1.0 - lambda), c).unwrap().det()
    }

    #[test]
    fn off_diagonal_ratio() {
        let c = consts(0.37);
        let m = mode_matrix(7, 0.21, &c).unwrap();
        assert!((m.m12 / m.m21 + 0.37).abs() < 1e-15);
        assert!(m.m12 * m.m21 < 0.0);
    }

    #[test]
    fn quadratic_matches_determinant_at_three_points() {
        for &b in &[0.15, 0.5, 0.85] {
            let c = consts(b);
            for n in [2, 3, 10, 57, 200] {
                let (cn, dn) = quadratic_coeffs(n, &c).unwrap();
                for lambda in [-1.0, 0.0, 1.0] {
                    let lhs = 4.0 / b * expanded_det(n, lambda, &c);
                    let rhs = lambda * lambda - 2.0 * cn * lambda + dn;
                    assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "{b} {n} {lambda}");
                }
            }
        }
    }

    #[test]
    fn near_unit_radius_is_finite() {
        let c = AnnulusConstants::new(0.999, 20).unwrap();
        let (cn, dn) = quadratic_coeffs(10, &c).unwrap();
        assert!(cn.is_finite() && dn.is_finite());
        let lam_1 = c.lambda(1).unwrap();
        let s = c.s(10).unwrap();
        assert!((cn - (1.0 - (1.0 - 0.999f64.powi(2)) * lam_1 + (1.0 / 0.999 - 1.0) * s)).abs() < 1e-14);
    }

    #[test]
    fn e1_is_negative() {
        for b in [0.05, 0.3, 0.6, 0.95] {
            let c = consts(b);
            let d = discriminant(1, &c).unwrap();
            let expected = -(1.0 + b) * (1.0 + b) * c.lambda(1).unwrap();
            assert!((d.e - expected).abs() <= 1e-12 * expected.abs());
            assert!(d.e < 0.0);
        }
    }

    #[test]
    fn threshold_scan_oracle() {
        // independent scan over the sign of E_n built from the raw tables
        for b in [0.1, 0.5, 0.9] {
            let c = consts(b);
            let lam_1 = c.lambda(1).unwrap();
            let scan = (2..=200)
                .find(|&n| {
                    (1.0 / b + 1.0) * c.s(n).unwrap() - (1.0 + b * b) * lam_1
                        - 2.0 * b * c.lambda(n).unwrap()
                        > 0.0
                })
                .unwrap();
            let n = threshold_n(&c).unwrap();
            assert_eq!(n, scan);
            assert_eq!(threshold_by_inequality(&c).unwrap(), n);
            assert!(discriminant(n - 1, &c).unwrap().e <= 0.0);
            for k in n..=200 {
                assert!(discriminant(k, &c).unwrap().e > 0.0);
            }
        }
    }

    #[test]
    fn threshold_table_exhausted() {
        let c = AnnulusConstants::new(0.9, 2).unwrap();
        assert!(matches!(threshold_n(&c), Err(Error::TableExhausted { n_max: 2 })));
    }

    #[test]
    fn row_identities() {
        let c = consts(0.5);
        let n = threshold_n(&c).unwrap();
        for m in n..n + 30 {
            let row = bifurcation_row(m, &c).unwrap();
            let b = 0.5;
            let sum = (1.0 - 1.0 / b) * c.s(m).unwrap() + (1.0 - b * b) * c.lambda(1).unwrap();
            assert!((row.omega_plus + row.omega_minus - sum).abs() < 1e-12);
            assert!((row.omega_plus - row.omega_minus - row.delta_m.sqrt()).abs() < 1e-12);
            assert!(((row.c_m * row.c_m - row.d_m) - row.delta_m).abs() <= 1e-10 * row.delta_m.abs());
            assert!(row.transversal);
            assert!(row.lambda_minus < row.lambda_plus);
            for omega in [row.omega_plus, row.omega_minus] {
                let mm = mode_matrix(m, omega, &c).unwrap();
                assert!(mm.det().abs() <= 1e-12 * mm.det_scale());
            }
        }
    }

    #[test]
    fn below_threshold_is_refused() {
        let c = consts(0.5);
        let n = threshold_n(&c).unwrap();
        if n > 2 {
            assert!(matches!(
                bifurcation_row(n - 1, &c),
                Err(Error::BelowThreshold { .. })
            ));
        }
        assert!(bifurcation_row(1, &c).is_err());
    }

    #[test]
    fn kernel_vectors() {
        let c = consts(0.6);
        let n = threshold_n(&c).unwrap();
        for m in [n, n + 1, n + 7] {
            let row = bifurcation_row(m, &c).unwrap();
            for omega in [row.omega_plus, row.omega_minus] {
                let k = kernel_vector(m, omega, &c).unwrap();
                let mm = mode_matrix(m, omega, &c).unwrap();
                let image = mm.apply([k.v1, k.v2]);
                let scale = mm.max_abs_entry().max(1.0) * k.v1.abs().max(k.v2.abs());
                assert!(image[0].abs() <= 1e-10 * scale && image[1].abs() <= 1e-10 * scale);
                let second = 0.6 * c.lambda(m).unwrap() * k.v1
                    + (0.6 * omega + c.s(m).unwrap() - 0.6 * c.lambda(1).unwrap()) * k.v2;
                assert!(second.abs() <= 1e-12 * scale);
                assert!(k.v2 < 0.0);
            }
            assert!(matches!(
                kernel_vector(m, row.omega_plus + 0.1, &c),
                Err(Error::NotAnEigenvalue { .. })
            ));
        }
    }

    #[test]
    fn monotonicity_scans_are_clean() {
        for b in [0.5, 0.9] {
            let c = consts(b);
            let report = eigenvalue_monotonicity_scan(&c, 200).unwrap();
            assert!(report.violations.is_empty(), "{:?}", report.violations);
        }
        let c = consts(0.5);
        let n = threshold_n(&c).unwrap();
        let report = eigenvalue_monotonicity_scan(&c, n + 1).unwrap();
        assert!(report.violations.is_empty());
        assert!(eigenvalue_monotonicity_scan(&c, 201).is_err());
    }

    proptest! {
        #[test]
        fn determinant_identity(n in 2usize..200, b in 0.05f64..0.95, omega in -2.0f64..2.0) {
            let c = AnnulusConstants::new(b, 200).unwrap();
            let mm = mode_matrix(n, omega, &c).unwrap();
            let (cn, dn) = quadratic_coeffs(n, &c).unwrap();
            let lambda = 1.0 - 2.0 * omega;
            let quad = b / 4.0 * (lambda * lambda - 2.0 * cn * lambda + dn);
            prop_assert!((mm.det() - quad).abs() <= 1e-12 * mm.det_scale());
            let d = discriminant(n, &c).unwrap();
            prop_assert!((d.delta - d.e * d.f).abs() <= 1e-12 * d.delta.abs().max(1e-300) + 1e-15);
        }

        #[test]
        fn determinant_sign_structure(b in 0.1f64..0.9, offset in 0usize..40, t in -0.99f64..0.99) {
            let c = AnnulusConstants::new(b, 200).unwrap();
            let m = threshold_n(&c).unwrap() + offset;
            let row = bifurcation_row(m, &c).unwrap();
            let mid = 0.5 * (row.omega_plus + row.omega_minus);
            let half = 0.5 * (row.omega_plus - row.omega_minus);
            let inside = mode_matrix(m, mid + t * half, &c).unwrap();
            prop_assert!(inside.det() < 0.0);
            let side = if t < 0.0 { -1.0 } else { 1.0 };
            let outside = mode_matrix(m, mid + (1.01 + t.abs()) * half * side, &c).unwrap();
            prop_assert!(outside.det() > 0.0);
        }
    }
}
