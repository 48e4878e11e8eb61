use super::integrals::ResidualEvaluator;
use super::patch::PatchPair;
use crate::specfun::AnnulusConstants;
use crate::spectrum::mode_matrix;
use crate::{Error, Result};

/// Finite-difference linearisation of the residual at the annulus compared
/// with the analytic block `-nm·M_{nm}`.
///
/// `(i/2)(ω^p - ω̄^p) = -sin pθ`, hence the minus sign: the sine coefficient
/// of `DG(h)` at frequency `p = nm` is `-p M_p (a_n, c_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationReport {
    pub m: usize,
    pub n: usize,
    pub b: f64,
    pub omega: f64,
    pub step: f64,
    pub quad: usize,
    /// `observed[row][col]`: derivative of the sine coefficient of `G_{row+1}`
    /// at frequency `nm` with respect to `a_n` (col 0) or `c_n` (col 1).
    pub observed: [[f64; 2]; 2],
    pub analytic: [[f64; 2]; 2],
    /// `max |observed - analytic| / max |analytic|`.
    pub relative_error: f64,
    /// Largest derivative of any other Fourier coefficient (sine or cosine).
    pub off_block: f64,
}

pub fn linearization_check(
    m: usize,
    omega: f64,
    n: usize,
    step: f64,
    quad: usize,
    consts: &AnnulusConstants,
) -> Result<LinearizationReport> {
    if n == 0 || n * m < 2 {
        return Err(Error::InvalidInput(format!("need nm - 1 >= 1 (n = {n}, m = {m})")));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("step h = {step} must be positive")));
    }
    let b = consts.b();
    let freq = n * m;
    let base = PatchPair::annulus(b, m, n, omega)?;
    let eval = ResidualEvaluator::new(quad)?;
    eval.check_resolution(&base)?;

    let mut observed = [[0.0; 2]; 2];
    let mut off_block = 0.0f64;
    for col in 0..2 {
        let perturbed = |h: f64| {
            let mut patch = base.clone();
            if col == 0 {
                patch.a[n - 1] = h;
            } else {
                patch.c[n - 1] = h;
            }
            eval.spectrum(&patch)
        };
        let plus = perturbed(step)?;
        let minus = perturbed(-step)?;
        for row in 0..2 {
            let d_sin: Vec<f64> = plus.sin[row]
                .iter()
                .zip(&minus.sin[row])
                .map(|(p, q)| (p - q) / (2.0 * step))
                .collect();
            observed[row][col] = d_sin[freq];
            for (f, v) in d_sin.iter().enumerate() {
                if f != freq {
                    off_block = off_block.max(v.abs());
                }
            }
            for (p, q) in plus.cos[row].iter().zip(&minus.cos[row]) {
                off_block = off_block.max(((p - q) / (2.0 * step)).abs());
            }
        }
    }

    let block = mode_matrix(freq, omega, consts)?;
    let scale = -(freq as f64);
    let analytic = block.entries().map(|row| row.map(|v| scale * v));
    let mut worst = 0.0f64;
    let mut size = 0.0f64;
    for row in 0..2 {
        for col in 0..2 {
            worst = worst.max((observed[row][col] - analytic[row][col]).abs());
            size = size.max(analytic[row][col].abs());
        }
    }
    Ok(LinearizationReport {
        m,
        n,
        b,
        omega,
        step,
        quad,
        observed,
        analytic,
        relative_error: worst / size,
        off_block,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{bifurcation_row, threshold_n};

    #[test]
    fn reproduces_mode_matrix() {
        let consts = AnnulusConstants::new(0.5, 200).unwrap();
        let m = threshold_n(&consts).unwrap() + 2;
        let omega = bifurcation_row(m, &consts).unwrap().omega_plus;
        let quad = crate::contour::resolved_quad_size(4096, 1, m);
        let report = linearization_check(m, omega, 1, 1e-6, quad, &consts).unwrap();
        assert!(report.relative_error <= 1e-5, "{report:?}");
        assert!(report.off_block <= 1e-7, "{report:?}");
    }

    #[test]
    fn central_difference_is_second_order() {
        // Large steps so truncation dominates rounding and quadrature error is
        // common to both: the FD error shrinks by ~100 per decade of h.
        let consts = AnnulusConstants::new(0.5, 200).unwrap();
        let m = 3;
        let quad = 480;
        let fine = linearization_check(m, 0.1, 1, 1e-4, quad, &consts).unwrap();
        let coarse = linearization_check(m, 0.1, 1, 1e-2, quad, &consts).unwrap();
        let coarse_fd: f64 = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| (coarse.observed[r][c] - fine.observed[r][c]).abs())
            .fold(0.0, f64::max);
        let mid = linearization_check(m, 0.1, 1, 1e-3, quad, &consts).unwrap();
        let mid_fd: f64 = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| (mid.observed[r][c] - fine.observed[r][c]).abs())
            .fold(0.0, f64::max);
        let ratio = coarse_fd / mid_fd;
        assert!(ratio > 50.0 && ratio < 200.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_input() {
        let consts = AnnulusConstants::new(0.5, 200).unwrap();
        assert!(linearization_check(3, 0.1, 0, 1e-6, 512, &consts).is_err());
        assert!(linearization_check(3, 0.1, 1, 0.0, 512, &consts).is_err());
        assert!(linearization_check(3, 0.1, 1, 1e-6, 500, &consts).is_err());
    }
}
