use nalgebra::{DMatrix, DVector};

use super::integrals::ResidualEvaluator;
use super::patch::PatchPair;
use super::{DEFAULT_MAX_ITER, DEFAULT_NEWTON_TOL, DEFAULT_QUAD};
use crate::spectrum::KernelVector;
use crate::{Error, Result};

/// Largest Jacobian condition number accepted by the linear solve.
pub const MAX_CONDITION: f64 = 1e14;
/// Relative finite-difference step per unknown.
const FD_STEP: f64 = 1e-7;
const MAX_HALVINGS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub quad: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            quad: DEFAULT_QUAD,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_NEWTON_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub patch: PatchPair,
    /// Largest retained sine coefficient of the residual.
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Square system in the unknowns `(a_1..a_K, c_1..c_K, Ω)`: the `2K` retained
/// residual coefficients plus the amplitude constraint
/// `d_1 a_1 + d_2 c_1 = s` along the unit kernel direction `d`.
pub(super) struct AugmentedSystem<'a> {
    eval: &'a ResidualEvaluator,
    template: PatchPair,
    direction: [f64; 2],
    amplitude: f64,
}

impl<'a> AugmentedSystem<'a> {
    pub(super) fn new(
        eval: &'a ResidualEvaluator,
        template: &PatchPair,
        kernel: &KernelVector,
        amplitude: f64,
    ) -> Self {
        Self {
            eval,
            template: template.clone(),
            direction: kernel.direction(),
            amplitude,
        }
    }

    fn modes(&self) -> usize {
        self.template.modes()
    }

    pub(super) fn pack(&self, patch: &PatchPair) -> DVector<f64> {
        let k = self.modes();
        let mut x = DVector::zeros(2 * k + 1);
        for n in 0..k {
            x[n] = patch.a[n];
            x[k + n] = patch.c[n];
        }
        x[2 * k] = patch.omega;
        x
    }

    pub(super) fn unpack(&self, x: &DVector<f64>) -> PatchPair {
        let k = self.modes();
        let mut patch = self.template.clone();
        patch.a.copy_from_slice(&x.as_slice()[..k]);
        patch.c.copy_from_slice(&x.as_slice()[k..2 * k]);
        patch.omega = x[2 * k];
        patch
    }

    pub(super) fn constraint(&self, patch: &PatchPair) -> f64 {
        self.direction[0] * patch.a[0] + self.direction[1] * patch.c[0] - self.amplitude
    }

    /// `(F(x), max retained residual coefficient)`.
    fn value(&self, x: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let patch = self.unpack(x);
        let coeffs = self.eval.sine_coefficients(&patch)?;
        let norm = coeffs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut f = DVector::zeros(coeffs.len() + 1);
        f.as_mut_slice()[..coeffs.len()].copy_from_slice(&coeffs);
        f[coeffs.len()] = self.constraint(&patch);
        Ok((f, norm))
    }

    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let dim = x.len();
        let mut jac = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let h = FD_STEP * x[j].abs().max(1.0);
            let mut plus = x.clone();
            plus[j] += h;
            let mut minus = x.clone();
            minus[j] -= h;
            let (fp, _) = self.value(&plus)?;
            let (fm, _) = self.value(&minus)?;
            jac.set_column(j, &((fp - fm) / (2.0 * h)));
        }
        Ok(jac)
    }
}

fn converged(norm: f64, constraint: f64, tol: f64, amplitude: f64) -> bool {
    norm <= tol && constraint.abs() <= 1e-12 * amplitude.abs().max(1.0)
}

pub(super) fn correct_with(
    eval: &ResidualEvaluator,
    guess: &PatchPair,
    amplitude: f64,
    kernel: &KernelVector,
    max_iter: usize,
    tol: f64,
) -> Result<NewtonOutcome> {
    let system = AugmentedSystem::new(eval, guess, kernel, amplitude);
    let mut x = system.pack(guess);
    let (mut f, mut norm) = system.value(&x)?;
    let mut iterations = 0;
    while !converged(norm, f[f.len() - 1], tol, amplitude) {
        if iterations == max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let jac = system.jacobian(&x)?;
        let svd = jac.svd(true, true);
        let sigma_max = svd.singular_values.max();
        let sigma_min = svd.singular_values.min();
        let condition = sigma_max / sigma_min;
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::SingularJacobian { condition });
        }
        let step = svd
            .solve(&(-&f), 0.0)
            .map_err(|_| Error::SingularJacobian { condition })?;

        let current = f.norm();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &x + alpha * &step;
            let patch = system.unpack(&trial);
            if patch.check_guard().is_ok() {
                if let Ok((ft, nt)) = system.value(&trial) {
                    if ft.iter().all(|v| v.is_finite()) && ft.norm() < current {
                        accepted = Some((trial, ft, nt));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((xn, fn_, nn)) => {
                x = xn;
                f = fn_;
                norm = nn;
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: norm,
                })
            }
        }
    }
    Ok(NewtonOutcome {
        patch: system.unpack(&x),
        residual_norm: norm,
        iterations,
    })
}

/// Damped Newton iteration for the branch point at amplitude `s` along the
/// kernel direction, starting from `patch`.
pub fn newton_correct(
    patch: &PatchPair,
    s: f64,
    kernel: &KernelVector,
    opts: &NewtonOptions,
) -> Result<NewtonOutcome> {
    patch.check_guard()?;
    let eval = ResidualEvaluator::new(opts.quad)?;
    correct_with(&eval, patch, s, kernel, opts.max_iter, opts.tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{resolved_quad_size, ResidualEvaluator};
    use crate::specfun::AnnulusConstants;
    use crate::spectrum::{bifurcation_row, kernel_vector, threshold_n};

    struct Setup {
        m: usize,
        kernel: KernelVector,
        omega: f64,
    }

    fn setup(b: f64) -> Setup {
        let consts = AnnulusConstants::new(b, 200).unwrap();
        let m = threshold_n(&consts).unwrap() + 1;
        let omega = bifurcation_row(m, &consts).unwrap().omega_plus;
        Setup {
            m,
            kernel: kernel_vector(m, omega, &consts).unwrap(),
            omega,
        }
    }

    #[test]
    fn zero_amplitude_returns_annulus() {
        let st = setup(0.6);
        let patch = PatchPair::annulus(0.6, st.m, 4, st.omega).unwrap();
        let opts = NewtonOptions {
            quad: resolved_quad_size(512, 4, st.m),
            ..Default::default()
        };
        let out = newton_correct(&patch, 0.0, &st.kernel, &opts).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.patch, patch);
    }

    #[test]
    fn small_amplitude_converges_along_kernel() {
        let b = 0.6;
        let st = setup(b);
        let modes = 6;
        let quad = resolved_quad_size(1024, modes, st.m);
        let s = 1e-3;
        let dir = st.kernel.direction();
        let mut guess = PatchPair::annulus(b, st.m, modes, st.omega).unwrap();
        guess.a[0] = s * dir[0];
        guess.c[0] = s * dir[1];
        let opts = NewtonOptions {
            quad,
            ..Default::default()
        };
        let out = newton_correct(&guess, s, &st.kernel, &opts).unwrap();
        assert!(out.residual_norm <= 1e-10);
        assert!((out.patch.omega - st.omega).abs() < 1e-3);
        let ratio = out.patch.c[0] / out.patch.a[0];
        assert!((ratio / st.kernel.ratio() - 1.0).abs() < 0.05, "{ratio} vs {}", st.kernel.ratio());
        let projection = dir[0] * out.patch.a[0] + dir[1] * out.patch.c[0];
        assert!((projection - s).abs() < 1e-12);
        let full = ResidualEvaluator::new(quad).unwrap().residual(&out.patch).unwrap();
        assert!(full.max_abs() <= 1e-10);
        assert!(full.leak <= 1e-10);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let b = 0.6;
        let st = setup(b);
        let modes = 2;
        let mut guess = PatchPair::annulus(b, st.m, modes, st.omega).unwrap();
        let dir = st.kernel.direction();
        guess.a[0] = 1e-3 * dir[0];
        guess.c[0] = 1e-3 * dir[1];
        let opts = NewtonOptions {
            quad: resolved_quad_size(256, modes, st.m),
            max_iter: 0,
            tol: 1e-10,
        };
        assert!(matches!(
            newton_correct(&guess, 2e-3, &st.kernel, &opts),
            Err(Error::NoConvergence { iterations: 0, .. })
        ));
    }
}
