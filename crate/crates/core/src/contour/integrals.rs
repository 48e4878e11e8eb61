//! Contour integrals `S(Φ_i, Φ_j)` and the boundary residuals `G_1`, `G_2`.
//!
//! With `τ = ω e^{iη}` the mean `⨍ … dτ/τ` becomes `(1/2π)∫₀^{2π} … dη`,
//! approximated by the trapezoidal rule at the half-offset nodes
//! `η_k = 2π(k + ½)/P`. The self-interaction integrand is bounded but has a
//! corner at `η = 0`, so that rule converges like `P⁻²` there; the
//! interaction between the two disjoint boundaries is smooth and converges
//! spectrally.
//!
//! For collocation angles `θ_i = 2πi/P` the nodes `θ_i + η_k` all fall on one
//! shared half-offset grid, so each boundary is tabulated once per residual
//! evaluation.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::patch::PatchPair;
use crate::{Error, Result};

/// Node distance below which two boundaries are considered to touch.
pub const COLLISION_DISTANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Outer,
    Inner,
}

impl Boundary {
    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Boundary::Outer),
            2 => Ok(Boundary::Inner),
            _ => Err(Error::InvalidInput(format!("boundary index {index} not in {{1, 2}}"))),
        }
    }
}

fn check_quadrature_size(p: usize) -> Result<()> {
    if p < 64 || !p.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "quadrature size P = {p} must be even and >= 64"
        )));
    }
    Ok(())
}

/// `S(Φ_src, Φ_dst)(e^{iθ})` by the offset trapezoidal rule with `p` nodes.
pub fn stream_integral(
    src: Boundary,
    dst: Boundary,
    patch: &PatchPair,
    theta: f64,
    p: usize,
) -> Result<Complex64> {
    check_quadrature_size(p)?;
    let here = patch.eval_maps(theta);
    let (z_dst, dz_dst) = match dst {
        Boundary::Outer => (here.z1, here.dz1),
        Boundary::Inner => (here.z2, here.dz2),
    };
    // ωΦ'(ω) = -i dΦ/dθ
    let w_dst = -Complex64::i() * dz_dst;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut min_dist = f64::INFINITY;
    for k in 0..p {
        let eta = TAU * (k as f64 + 0.5) / p as f64;
        let there = patch.eval_maps(theta + eta);
        let (z_src, dz_src) = match src {
            Boundary::Outer => (there.z1, there.dz1),
            Boundary::Inner => (there.z2, there.dz2),
        };
        let dist = (z_src - z_dst).norm();
        min_dist = min_dist.min(dist);
        sum += (-Complex64::i() * dz_src - w_dst) / dist;
    }
    if min_dist < COLLISION_DISTANCE {
        return Err(Error::BoundaryCollision { distance: min_dist });
    }
    Ok(sum / p as f64)
}

/// Sine and cosine coefficients of a real residual up to the Nyquist
/// frequency: `G(θ) ≈ cos[0] + Σ_p (cos[p] cos pθ + sin[p] sin pθ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSpectrum {
    pub sin: [Vec<f64>; 2],
    pub cos: [Vec<f64>; 2],
}

/// Sine coefficients of `G_1`, `G_2` at the retained frequencies `nm`,
/// `n = 1..=K`, plus symmetry diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSpectrum {
    pub m: usize,
    pub k: usize,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// Largest coefficient magnitude at frequencies that are not multiples of `m`.
    pub leak: f64,
    /// Largest cosine coefficient; zero for reflection-symmetric patches.
    pub cosine_leak: f64,
}

impl ResidualSpectrum {
    pub fn max_abs(&self) -> f64 {
        self.r1
            .iter()
            .chain(&self.r2)
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Boundary values on a set of angles, split into real and imaginary parts.
#[derive(Debug, Default)]
struct Grid {
    zr: Vec<f64>,
    zi: Vec<f64>,
    tr: Vec<f64>,
    ti: Vec<f64>,
}

impl Grid {
    fn with_capacity(n: usize) -> Self {
        Self {
            zr: Vec::with_capacity(n),
            zi: Vec::with_capacity(n),
            tr: Vec::with_capacity(n),
            ti: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, z: Complex64, t: Complex64) {
        self.zr.push(z.re);
        self.zi.push(z.im);
        self.tr.push(t.re);
        self.ti.push(t.im);
    }

    fn z(&self, i: usize) -> Complex64 {
        Complex64::new(self.zr[i], self.zi[i])
    }

    fn t(&self, i: usize) -> Complex64 {
        Complex64::new(self.tr[i], self.ti[i])
    }
}

const LANES: usize = 8;

/// Sum over source nodes of `(τΦ'(τ) - t) / |Φ(τ) - z|`, and the smallest
/// squared distance met.
fn kernel_sum(src: &Grid, z: Complex64, t: Complex64) -> (Complex64, f64) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
            // SAFETY: the required CPU features were detected at runtime
            return unsafe { kernel_sum_avx2(src, z, t) };
        }
    }
    kernel_sum_body(src, z, t)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn kernel_sum_avx2(src: &Grid, z: Complex64, t: Complex64) -> (Complex64, f64) {
    use std::arch::x86_64::*;

    let n = src.zr.len();
    let body = n - n % 8;
    let (zr, zi, tr, ti) = (src.zr.as_ptr(), src.zi.as_ptr(), src.tr.as_ptr(), src.ti.as_ptr());
    let z_re = _mm256_set1_pd(z.re);
    let z_im = _mm256_set1_pd(z.im);
    let t_re = _mm256_set1_pd(t.re);
    let t_im = _mm256_set1_pd(t.im);
    let half = _mm256_set1_pd(0.5);
    let three_halves = _mm256_set1_pd(1.5);
    let mut sr = [_mm256_setzero_pd(); 2];
    let mut si = [_mm256_setzero_pd(); 2];
    let mut dmin = [_mm256_set1_pd(f64::INFINITY); 2];
    let mut i = 0;
    while i < body {
        for h in 0..2 {
            let k = i + 4 * h;
            let dx = _mm256_sub_pd(_mm256_loadu_pd(zr.add(k)), z_re);
            let dy = _mm256_sub_pd(_mm256_loadu_pd(zi.add(k)), z_im);
            let d2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
            // single-precision seed, three Newton steps to full precision
            let mut inv = _mm256_cvtps_pd(_mm_rsqrt_ps(_mm256_cvtpd_ps(d2)));
            let half_d2 = _mm256_mul_pd(half, d2);
            for _ in 0..3 {
                let yy = _mm256_mul_pd(inv, inv);
                inv = _mm256_mul_pd(inv, _mm256_fnmadd_pd(half_d2, yy, three_halves));
            }
            sr[h] = _mm256_fmadd_pd(_mm256_sub_pd(_mm256_loadu_pd(tr.add(k)), t_re), inv, sr[h]);
            si[h] = _mm256_fmadd_pd(_mm256_sub_pd(_mm256_loadu_pd(ti.add(k)), t_im), inv, si[h]);
            dmin[h] = _mm256_min_pd(dmin[h], d2);
        }
        i += 8;
    }
    let mut lanes = [[0.0f64; 4]; 3];
    _mm256_storeu_pd(lanes[0].as_mut_ptr(), _mm256_add_pd(sr[0], sr[1]));
    _mm256_storeu_pd(lanes[1].as_mut_ptr(), _mm256_add_pd(si[0], si[1]));
    _mm256_storeu_pd(lanes[2].as_mut_ptr(), _mm256_min_pd(dmin[0], dmin[1]));
    let mut re: f64 = lanes[0].iter().sum();
    let mut im: f64 = lanes[1].iter().sum();
    let mut dm = lanes[2].iter().fold(f64::INFINITY, |a, &b| a.min(b));
    for idx in body..n {
        let dx = src.zr[idx] - z.re;
        let dy = src.zi[idx] - z.im;
        let d2 = dx * dx + dy * dy;
        let inv = 1.0 / d2.sqrt();
        re += (src.tr[idx] - t.re) * inv;
        im += (src.ti[idx] - t.im) * inv;
        dm = dm.min(d2);
    }
    (Complex64::new(re, im), dm)
}

#[inline(always)]
fn kernel_sum_body(src: &Grid, z: Complex64, t: Complex64) -> (Complex64, f64) {
    let mut sr = [0.0; LANES];
    let mut si = [0.0; LANES];
    let mut dmin = [f64::INFINITY; LANES];
    let chunks = src
        .zr
        .chunks_exact(LANES)
        .zip(src.zi.chunks_exact(LANES))
        .zip(src.tr.chunks_exact(LANES).zip(src.ti.chunks_exact(LANES)));
    for ((zr, zi), (tr, ti)) in chunks {
        let zr: &[f64; LANES] = zr.try_into().unwrap();
        let zi: &[f64; LANES] = zi.try_into().unwrap();
        let tr: &[f64; LANES] = tr.try_into().unwrap();
        let ti: &[f64; LANES] = ti.try_into().unwrap();
        for lane in 0..LANES {
            let dx = zr[lane] - z.re;
            let dy = zi[lane] - z.im;
            let d2 = dx * dx + dy * dy;
            let inv = 1.0 / d2.sqrt();
            sr[lane] += (tr[lane] - t.re) * inv;
            si[lane] += (ti[lane] - t.im) * inv;
            dmin[lane] = if d2 < dmin[lane] { d2 } else { dmin[lane] };
        }
    }
    let body = src.zr.len() - src.zr.len() % LANES;
    for idx in body..src.zr.len() {
        let dx = src.zr[idx] - z.re;
        let dy = src.zi[idx] - z.im;
        let d2 = dx * dx + dy * dy;
        let inv = 1.0 / d2.sqrt();
        sr[0] += (src.tr[idx] - t.re) * inv;
        si[0] += (src.ti[idx] - t.im) * inv;
        dmin[0] = dmin[0].min(d2);
    }
    let sum = Complex64::new(sr.iter().sum(), si.iter().sum());
    (sum, dmin.iter().fold(f64::INFINITY, |a, &b| a.min(b)))
}

/// Evaluates the discretised boundary equations with `P` collocation angles
/// and `P` quadrature nodes.
pub struct ResidualEvaluator {
    p: usize,
    /// `e^{iπj/P}` for `j = 0..2P`; collocation angles are even `j`, offset
    /// quadrature nodes odd `j`.
    roots: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ResidualEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResidualEvaluator").field("p", &self.p).finish()
    }
}

impl ResidualEvaluator {
    pub fn new(p: usize) -> Result<Self> {
        check_quadrature_size(p)?;
        let roots = (0..2 * p)
            .map(|j| Complex64::cis(PI * j as f64 / p as f64))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(p);
        Ok(Self { p, roots, fft })
    }

    pub fn quad_size(&self) -> usize {
        self.p
    }

    /// Checks that `P` is a multiple of `4Km`.
    pub fn check_resolution(&self, patch: &PatchPair) -> Result<()> {
        let step = 4 * patch.modes() * patch.m;
        if !self.p.is_multiple_of(step) {
            return Err(Error::InvalidInput(format!(
                "quadrature size P = {} must be a multiple of 4·K·m = {step}",
                self.p
            )));
        }
        Ok(())
    }

    fn root(&self, j: i64) -> Complex64 {
        let size = 2 * self.p as i64;
        self.roots[j.rem_euclid(size) as usize]
    }

    /// Boundary values `(Φ(w), wΦ'(w))` at `w = e^{iπj/P}` for each `j`.
    fn grid(&self, patch: &PatchPair, boundary: Boundary, half_steps: &[i64]) -> Grid {
        let (lead, coeffs) = match boundary {
            Boundary::Outer => (1.0, &patch.a),
            Boundary::Inner => (patch.b, &patch.c),
        };
        let mut grid = Grid::with_capacity(half_steps.len());
        for &j in half_steps {
            let w = self.root(j);
            let mut z = lead * w;
            let mut t = lead * w;
            for (n, &coef) in coeffs.iter().enumerate() {
                if coef == 0.0 {
                    continue;
                }
                let p = patch.exponent(n + 1) as i64;
                let e = self.root(-p * j);
                z += coef * e;
                t -= coef * p as f64 * e;
            }
            grid.push(z, t);
        }
        grid
    }

    /// `G_1`, `G_2` at the collocation angles `2πi/P` for the given `i`.
    fn g_at(&self, patch: &PatchPair, indices: &[usize]) -> Result<[Vec<f64>; 2]> {
        let offsets: Vec<i64> = (0..self.p as i64).map(|l| 2 * l + 1).collect();
        let sources = [
            self.grid(patch, Boundary::Outer, &offsets),
            self.grid(patch, Boundary::Inner, &offsets),
        ];
        let colloc: Vec<i64> = indices.iter().map(|&i| 2 * i as i64).collect();
        let targets = [
            self.grid(patch, Boundary::Outer, &colloc),
            self.grid(patch, Boundary::Inner, &colloc),
        ];
        let inv_p = 1.0 / self.p as f64;
        let mut min_d2 = f64::INFINITY;
        let mut out = [Vec::with_capacity(indices.len()), Vec::with_capacity(indices.len())];
        for (j, target) in targets.iter().enumerate() {
            for q in 0..indices.len() {
                let z = target.z(q);
                let t = target.t(q);
                let (s1, d1) = kernel_sum(&sources[0], z, t);
                let (s2, d2) = kernel_sum(&sources[1], z, t);
                min_d2 = min_d2.min(d1).min(d2);
                let bracket = patch.omega * z - s1 * inv_p + s2 * inv_p;
                out[j].push((bracket * t.conj()).im);
            }
        }
        let min_dist = min_d2.sqrt();
        if min_dist < COLLISION_DISTANCE {
            return Err(Error::BoundaryCollision { distance: min_dist });
        }
        Ok(out)
    }

    /// `G_1`, `G_2` at all `P` collocation angles.
    pub fn g_values(&self, patch: &PatchPair) -> Result<[Vec<f64>; 2]> {
        patch.validate_shape()?;
        let all: Vec<usize> = (0..self.p).collect();
        self.g_at(patch, &all)
    }

    /// Sine and cosine coefficients of both residuals up to `P/2`.
    pub fn spectrum(&self, patch: &PatchPair) -> Result<FullSpectrum> {
        let g = self.g_values(patch)?;
        let half = self.p / 2;
        let scale = 2.0 / self.p as f64;
        let mut sin = [vec![0.0; half + 1], vec![0.0; half + 1]];
        let mut cos = [vec![0.0; half + 1], vec![0.0; half + 1]];
        for j in 0..2 {
            let mut buf: Vec<Complex64> = g[j].iter().map(|&v| Complex64::new(v, 0.0)).collect();
            self.fft.process(&mut buf);
            for freq in 0..=half {
                let weight = if freq == 0 || freq == half { 0.5 } else { 1.0 };
                sin[j][freq] = -scale * weight * buf[freq].im;
                cos[j][freq] = scale * weight * buf[freq].re;
            }
            sin[j][0] = 0.0;
            sin[j][half] = 0.0;
        }
        Ok(FullSpectrum { sin, cos })
    }

    /// Retained sine coefficients and symmetry diagnostics from the full
    /// collocation grid.
    pub fn residual(&self, patch: &PatchPair) -> Result<ResidualSpectrum> {
        self.check_resolution(patch)?;
        let spec = self.spectrum(patch)?;
        let k = patch.modes();
        let m = patch.m;
        let retained = |j: usize| (1..=k).map(|n| spec.sin[j][n * m]).collect::<Vec<_>>();
        let mut leak = 0.0f64;
        let mut cosine_leak = 0.0f64;
        for j in 0..2 {
            for freq in 0..=self.p / 2 {
                let magnitude = spec.sin[j][freq].hypot(spec.cos[j][freq]);
                if freq % m != 0 {
                    leak = leak.max(magnitude);
                }
                cosine_leak = cosine_leak.max(spec.cos[j][freq].abs());
            }
        }
        Ok(ResidualSpectrum {
            m,
            k,
            r1: retained(0),
            r2: retained(1),
            leak,
            cosine_leak,
        })
    }

    /// Retained sine coefficients `(r1, r2)` concatenated, evaluated on the
    /// collocation angles in `(0, π/m)` only.
    ///
    /// An `m`-fold, reflection-symmetric patch yields residuals that are
    /// `2π/m`-periodic and odd, so the full discrete sine sum folds onto this
    /// half sector. Agrees with [`Self::residual`] to round-off.
    pub fn sine_coefficients(&self, patch: &PatchPair) -> Result<Vec<f64>> {
        self.check_resolution(patch)?;
        patch.validate_shape()?;
        let m = patch.m;
        let half_sector = self.p / (2 * m);
        let indices: Vec<usize> = (1..half_sector).collect();
        let g = self.g_at(patch, &indices)?;
        let k = patch.modes();
        let scale = 4.0 * m as f64 / self.p as f64;
        let mut out = Vec::with_capacity(2 * k);
        for values in &g {
            for n in 1..=k {
                let freq = (n * m) as i64;
                let acc: f64 = indices
                    .iter()
                    .zip(values)
                    .map(|(&i, &v)| v * self.root(2 * freq * i as i64).im)
                    .sum();
                out.push(scale * acc);
            }
        }
        Ok(out)
    }
}

/// Discretised residual of the boundary equations, see
/// [`ResidualEvaluator::residual`].
pub fn residual(patch: &PatchPair, p: usize) -> Result<ResidualSpectrum> {
    ResidualEvaluator::new(p)?.residual(patch)
}
