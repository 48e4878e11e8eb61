use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Truncated Fourier representation of the two exterior conformal maps
///
/// ```text
/// Φ_1(w) = w   + Σ_{n=1}^{K} a_n w^{-(nm-1)}
/// Φ_2(w) = b w + Σ_{n=1}^{K} c_n w^{-(nm-1)}
/// ```
///
/// restricted to the unit circle. Real coefficients encode reflection
/// symmetry about the real axis; the exponents encode `m`-fold symmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchPair {
    pub b: f64,
    pub m: usize,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub omega: f64,
}

/// Boundary points and their derivatives with respect to the angle θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapValues {
    pub z1: Complex64,
    pub z2: Complex64,
    pub dz1: Complex64,
    pub dz2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub theta: f64,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl PatchPair {
    pub fn annulus(b: f64, m: usize, modes: usize, omega: f64) -> Result<Self> {
        let patch = Self {
            b,
            m,
            a: vec![0.0; modes],
            c: vec![0.0; modes],
            omega,
        };
        patch.validate_shape()?;
        Ok(patch)
    }

    pub fn modes(&self) -> usize {
        self.a.len()
    }

    /// Exponent magnitude `nm - 1` carried by coefficient `n` (1-based).
    pub fn exponent(&self, n: usize) -> usize {
        n * self.m - 1
    }

    pub fn validate_shape(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(Error::InvalidInput(format!("b = {} outside (0, 1)", self.b)));
        }
        if self.m < 2 {
            return Err(Error::InvalidInput(format!("fold m = {} must be >= 2", self.m)));
        }
        if self.a.len() != self.c.len() || self.a.is_empty() {
            return Err(Error::InvalidInput(format!(
                "coefficient lengths {} and {} must match and be non-zero",
                self.a.len(),
                self.c.len()
            )));
        }
        let finite = self.omega.is_finite()
            && self.a.iter().chain(&self.c).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite patch data".into()));
        }
        Ok(())
    }

    /// `Σ (nm-1)(|a_n| + |c_n|)`, which bounds how far each map strays from
    /// its circle in C¹.
    pub fn guard_sum(&self) -> f64 {
        (1..=self.modes())
            .map(|n| self.exponent(n) as f64 * (self.a[n - 1].abs() + self.c[n - 1].abs()))
            .sum()
    }

    pub fn guard_limit(&self) -> f64 {
        0.5 * self.b.min(1.0 - self.b)
    }

    pub fn check_guard(&self) -> Result<()> {
        self.validate_shape()?;
        let sum = self.guard_sum();
        let limit = self.guard_limit();
        if sum >= limit {
            return Err(Error::GuardViolation { sum, limit });
        }
        Ok(())
    }

    /// `Φ_1(e^{iθ})`, `Φ_2(e^{iθ})` and their θ-derivatives.
    pub fn eval_maps(&self, theta: f64) -> MapValues {
        let w = Complex64::cis(theta);
        let mut z1 = w;
        let mut z2 = self.b * w;
        let mut dz1 = Complex64::i() * w;
        let mut dz2 = Complex64::i() * self.b * w;
        for n in 1..=self.modes() {
            let p = self.exponent(n) as f64;
            let e = Complex64::cis(-p * theta);
            let de = Complex64::new(0.0, -p) * e;
            z1 += self.a[n - 1] * e;
            z2 += self.c[n - 1] * e;
            dz1 += self.a[n - 1] * de;
            dz2 += self.c[n - 1] * de;
        }
        MapValues { z1, z2, dz1, dz2 }
    }

    /// Boundary points at `count` equispaced angles starting from θ = 0.
    pub fn boundary_samples(&self, count: usize) -> Vec<BoundarySample> {
        (0..count)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / count as f64;
                let v = self.eval_maps(theta);
                BoundarySample {
                    theta,
                    x1: v.z1.re,
                    y1: v.z1.im,
                    x2: v.z2.re,
                    y2: v.z2.im,
                }
            })
            .collect()
    }
}
