//! Special-function kernel: Pochhammer symbols, the Gauss hypergeometric
//! function `F(a, b, c; z)`, and the annulus constants `S_n` and `Λ_n(b)`.
//!
//! Every quantity has two independent evaluation routes. The hypergeometric
//! series is checked against Euler's integral representation, and the closed
//! form of `Λ_n(b)` against its Beta-type integral.

use std::f64::consts::PI;

use crate::quadrature::{integrate, AdaptiveOptions};
use crate::{Error, Result};

/// Relative size of the last retained series term.
pub const SERIES_TOL: f64 = 1e-15;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 100_000;

/// Rising factorial `(x)_n = x (x+1) ⋯ (x+n-1)`, with `(x)_0 = 1`.
pub fn pochhammer(x: f64, n: usize) -> Result<f64> {
    let mut acc = 1.0;
    for k in 0..n {
        acc *= x + k as f64;
        if !acc.is_finite() {
            return Err(Error::Range(format!("({x})_{n} overflows")));
        }
    }
    Ok(acc)
}

/// `(x)_n / n!`, accumulated as a product of ratios so it stays finite for
/// large `n`.
pub fn pochhammer_over_factorial(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x + k as f64) / (k as f64 + 1.0))
}

/// Parameters of `F(a, b, c; z)` on the real segment `0 <= z < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper2F1Input {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl Hyper2F1Input {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Result<Self> {
        let input = Self { a, b, c, z };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.a, self.b, self.c, self.z].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite 2F1 parameter".into()));
        }
        if self.c <= 0.0 && self.c == self.c.round() {
            return Err(Error::InvalidInput(format!(
                "c = {} is a non-positive integer",
                self.c
            )));
        }
        if !(0.0..1.0).contains(&self.z) {
            return Err(Error::InvalidInput(format!("z = {} outside [0, 1)", self.z)));
        }
        Ok(())
    }

    fn shifted(&self, da: f64, db: f64, dc: f64) -> Self {
        Self {
            a: self.a + da,
            b: self.b + db,
            c: self.c + dc,
            z: self.z,
        }
    }
}

/// Gauss hypergeometric function by direct summation of its power series.
///
/// Terms are generated by the ratio `(a+k)(b+k) z / ((c+k)(k+1))`. Summation
/// stops once a term is below `SERIES_TOL` relative to the partial sum and
/// the term ratio has dropped below one, so the tail is geometrically
/// dominated.
pub fn gauss_2f1(input: &Hyper2F1Input) -> Result<f64> {
    input.validate()?;
    let Hyper2F1Input { a, b, c, z } = *input;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= SERIES_TOL * sum.abs() && ratio.abs() < 1.0 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        terms: SERIES_MAX_TERMS,
        z,
    })
}

/// Shorthand for `gauss_2f1` on raw parameters.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    gauss_2f1(&Hyper2F1Input::new(a, b, c, z)?)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation (g = 7, nine terms), with the
/// reflection formula below one half.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &coef) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += coef / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * series
}

/// Euler's integral representation of `F(a, b, c; z)`, valid for `c > b > 0`.
///
/// The interval is split at one half. An algebraic endpoint factor with a
/// negative exponent is absorbed by the substitution `x = u^{1/b}` near 0 and
/// `1 - x = v^{1/(c-b)}` near 1, which leaves bounded integrands for the
/// adaptive rule.
pub fn gauss_2f1_euler(input: &Hyper2F1Input) -> Result<f64> {
    input.validate()?;
    let Hyper2F1Input { a, b, c, z } = *input;
    if b <= 0.0 || c <= b {
        return Err(Error::PreconditionViolated(format!(
            "Euler integral needs c > b > 0 (b = {b}, c = {c})"
        )));
    }
    let d = c - b;
    let opts = AdaptiveOptions::default();
    let weight = |x: f64| (1.0 - z * x).powf(-a);

    let left = if b < 1.0 {
        let upper = 0.5f64.powf(b);
        integrate(
            |u| {
                let x = u.powf(1.0 / b);
                (1.0 - x).powf(d - 1.0) * weight(x)
            },
            0.0,
            upper,
            opts,
        )
        .value
            / b
    } else {
        integrate(
            |x| x.powf(b - 1.0) * (1.0 - x).powf(d - 1.0) * weight(x),
            0.0,
            0.5,
            opts,
        )
        .value
    };

    let right = if d < 1.0 {
        let upper = 0.5f64.powf(d);
        integrate(
            |v| {
                let x = 1.0 - v.powf(1.0 / d);
                x.powf(b - 1.0) * weight(x)
            },
            0.0,
            upper,
            opts,
        )
        .value
            / d
    } else {
        integrate(
            |x| x.powf(b - 1.0) * (1.0 - x).powf(d - 1.0) * weight(x),
            0.5,
            1.0,
            opts,
        )
        .value
    };

    let prefactor = gamma(c) / (gamma(b) * gamma(d));
    Ok(prefactor * (left + right))
}

/// `S_n = (2/π) Σ_{k=1}^{n-1} 1/(2k+1)`.
pub fn s_sum(n: usize) -> f64 {
    assert!(n >= 1, "S_n is defined for n >= 1");
    let partial: f64 = (1..n).map(|k| 1.0 / (2 * k + 1) as f64).sum();
    2.0 / PI * partial
}

fn check_mode_and_radius(n: usize, b: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("mode index must be >= 1".into()));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidInput(format!("b = {b} outside (0, 1)")));
    }
    Ok(())
}

/// `Λ_n(b) = ((1/2)_n / n!) b^{n-1} F(1/2, n+1/2, n+1; b²)`.
///
/// For large `n` and small `b` the factor `b^{n-1}` underflows and the value
/// is reported as zero.
pub fn lambda_coeff(n: usize, b: f64) -> Result<f64> {
    check_mode_and_radius(n, b)?;
    let nf = n as f64;
    let f = hyp2f1(0.5, nf + 0.5, nf + 1.0, b * b)?;
    Ok(pochhammer_over_factorial(0.5, n) * b.powi(n as i32 - 1) * f)
}

/// `Λ_n(b)` from `b^{n-1}/π ∫₀¹ x^{n-1/2} (1-x)^{-1/2} (1-b²x)^{-1/2} dx`,
/// with `x = 1 - u²` removing the inverse square root at `x = 1`.
pub fn lambda_integral_oracle(n: usize, b: f64) -> Result<f64> {
    check_mode_and_radius(n, b)?;
    let b2 = b * b;
    let power = n as f64 - 0.5;
    let integral = integrate(
        |u| {
            let x = 1.0 - u * u;
            2.0 * x.powf(power) / (1.0 - b2 * x).sqrt()
        },
        0.0,
        1.0,
        AdaptiveOptions::default(),
    );
    Ok(b.powi(n as i32 - 1) / PI * integral.value)
}

/// Left-hand sides of four contiguous relations of `F`; each is identically
/// zero.
///
/// 0. `cF(a,b,c) - cF(a+1,b,c) + bzF(a+1,b+1,c+1)`
/// 1. `cF(a,b,c) - cF(a,b+1,c) + azF(a+1,b+1,c+1)`
/// 2. `bF(a,b+1,c) - aF(a+1,b,c) + (a-b)F(a,b,c)`
/// 3. `cF(a,b,c) - (c-b)F(a,b,c+1) - bF(a,b+1,c+1)`
pub fn contiguous_residuals(input: &Hyper2F1Input) -> Result<[f64; 4]> {
    let Hyper2F1Input { a, b, c, z } = *input;
    let f = |da, db, dc| gauss_2f1(&input.shifted(da, db, dc));
    let f0 = f(0.0, 0.0, 0.0)?;
    let fa = f(1.0, 0.0, 0.0)?;
    let fb = f(0.0, 1.0, 0.0)?;
    let fc = f(0.0, 0.0, 1.0)?;
    let fbc = f(0.0, 1.0, 1.0)?;
    let fabc = f(1.0, 1.0, 1.0)?;
    Ok([
        c * f0 - c * fa + b * z * fabc,
        c * f0 - c * fb + a * z * fabc,
        b * fb - a * fa + (a - b) * f0,
        c * f0 - (c - b) * fc - b * fbc,
    ])
}

/// Inner radius `b` together with eagerly built tables of `S_n` and `Λ_n(b)`
/// for `n = 1..=n_max`.
#[derive(Debug, Clone)]
pub struct AnnulusConstants {
    b: f64,
    n_max: usize,
    s_table: Vec<f64>,
    lambda_table: Vec<f64>,
}

impl AnnulusConstants {
    pub fn new(b: f64, n_max: usize) -> Result<Self> {
        check_mode_and_radius(1, b)?;
        if n_max < 2 {
            return Err(Error::InvalidInput("n_max must be >= 2".into()));
        }
        let mut s_table = Vec::with_capacity(n_max);
        let mut partial = 0.0;
        for n in 1..=n_max {
            if n > 1 {
                partial += 1.0 / (2 * n - 1) as f64;
            }
            s_table.push(2.0 / PI * partial);
        }
        let lambda_table = (1..=n_max)
            .map(|n| lambda_coeff(n, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            b,
            n_max,
            s_table,
            lambda_table,
        })
    }

    /// Table size used when branches with `k` modes of `m`-fold symmetry are
    /// computed.
    pub fn default_size(k: usize, m: usize) -> usize {
        200.max(4 * k * m)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn index(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.n_max {
            return Err(Error::IndexOutOfTable {
                n,
                n_max: self.n_max,
            });
        }
        Ok(n - 1)
    }

    pub fn s(&self, n: usize) -> Result<f64> {
        Ok(self.s_table[self.index(n)?])
    }

    pub fn lambda(&self, n: usize) -> Result<f64> {
        Ok(self.lambda_table[self.index(n)?])
    }

    pub fn s_table(&self) -> &[f64] {
        &self.s_table
    }

    pub fn lambda_table(&self) -> &[f64] {
        &self.lambda_table
    }
}
