use serde::{Deserialize, Serialize};

use super::integrals::ResidualEvaluator;
use super::newton::correct_with;
use super::patch::PatchPair;
use super::{DEFAULT_DS, DEFAULT_MAX_ITER, DEFAULT_MODES, DEFAULT_NEWTON_TOL, DEFAULT_QUAD};
use crate::specfun::AnnulusConstants;
use crate::spectrum::{bifurcation_row, kernel_vector, KernelVector, Sign, SpectrumRow};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOptions {
    pub modes: usize,
    pub quad: usize,
    pub steps: usize,
    pub ds: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Size of the constants table; defaults to `max(200, 4·K·m)`.
    pub table_size: Option<usize>,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            modes: DEFAULT_MODES,
            quad: DEFAULT_QUAD,
            steps: 10,
            ds: DEFAULT_DS,
            tol: DEFAULT_NEWTON_TOL,
            max_iter: DEFAULT_MAX_ITER,
            table_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    /// Amplitude along the unit kernel direction in the `(a_1, c_1)` plane.
    pub s: f64,
    pub patch: PatchPair,
    pub residual_norm: f64,
    pub step_index: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub b: f64,
    pub m: usize,
    pub modes: usize,
    pub quad: usize,
    pub sign: Sign,
    pub spectrum: SpectrumRow,
    pub kernel: KernelVector,
    pub points: Vec<BranchPoint>,
    /// Why continuation ended before the requested number of steps.
    pub stopped_reason: Option<String>,
}

/// Traces the `m`-fold branch leaving the annulus at `Ω_m^±`.
///
/// Each step predicts by moving the previous point a distance `ds` along the
/// kernel direction and corrects with Newton's method at fixed amplitude. A
/// failed guard or corrector ends the branch early; the points accepted so
/// far are returned with the reason recorded.
pub fn branch_continue(b: f64, m: usize, sign: Sign, opts: &BranchOptions) -> Result<Branch> {
    if !(opts.ds.is_finite() && opts.ds != 0.0) {
        return Err(Error::InvalidInput(format!("step ds = {} must be non-zero", opts.ds)));
    }
    if opts.modes == 0 {
        return Err(Error::InvalidInput("at least one mode is required".into()));
    }
    let size = opts
        .table_size
        .unwrap_or_else(|| AnnulusConstants::default_size(opts.modes, m));
    let consts = AnnulusConstants::new(b, size)?;
    let row = bifurcation_row(m, &consts)?;
    let omega0 = sign.omega(&row);
    let kernel = kernel_vector(m, omega0, &consts)?;
    let direction = kernel.direction();

    let eval = ResidualEvaluator::new(opts.quad)?;
    let annulus = PatchPair::annulus(b, m, opts.modes, omega0)?;
    eval.check_resolution(&annulus)?;
    let start_norm = eval
        .sine_coefficients(&annulus)?
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));

    let mut points = vec![BranchPoint {
        s: 0.0,
        patch: annulus,
        residual_norm: start_norm,
        step_index: 0,
        iterations: 0,
    }];
    let mut stopped_reason = None;
    for step in 1..=opts.steps {
        let prev = points.last().expect("branch starts with the annulus");
        let s = step as f64 * opts.ds;
        let mut guess = prev.patch.clone();
        guess.a[0] += opts.ds * direction[0];
        guess.c[0] += opts.ds * direction[1];
        if let Err(err) = guess.check_guard() {
            stopped_reason = Some(format!("step {step}: predictor {err}"));
            break;
        }
        match correct_with(&eval, &guess, s, &kernel, opts.max_iter, opts.tol) {
            Ok(out) => points.push(BranchPoint {
                s,
                patch: out.patch,
                residual_norm: out.residual_norm,
                step_index: step,
                iterations: out.iterations,
            }),
            Err(err) => {
                stopped_reason = Some(format!("step {step}: corrector {err}"));
                break;
            }
        }
    }
    Ok(Branch {
        b,
        m,
        modes: opts.modes,
        quad: opts.quad,
        sign,
        spectrum: row,
        kernel,
        points,
        stopped_reason,
    })
}

/// Serialised form of one branch point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub s: f64,
    pub omega: f64,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub residual_norm: f64,
}

/// Serialised branch: `{ b, m, K, P, sign, points, stopped_reason }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub b: f64,
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "P")]
    pub p: usize,
    pub sign: String,
    pub points: Vec<PointRecord>,
    #[serde(default)]
    pub stopped_reason: Option<String>,
}

impl From<&Branch> for BranchRecord {
    fn from(branch: &Branch) -> Self {
        Self {
            b: branch.b,
            m: branch.m,
            k: branch.modes,
            p: branch.quad,
            sign: branch.sign.as_str().to_string(),
            points: branch
                .points
                .iter()
                .map(|pt| PointRecord {
                    s: pt.s,
                    omega: pt.patch.omega,
                    a: pt.patch.a.clone(),
                    c: pt.patch.c.clone(),
                    residual_norm: pt.residual_norm,
                })
                .collect(),
            stopped_reason: branch.stopped_reason.clone(),
        }
    }
}

impl BranchRecord {
    /// Rebuilds the patch of point `index`, checking the record's shape.
    pub fn patch(&self, index: usize) -> Result<PatchPair> {
        let point = self.points.get(index).ok_or_else(|| {
            Error::InvalidInput(format!("points[{index}] does not exist"))
        })?;
        if point.a.len() != self.k {
            return Err(Error::InvalidInput(format!(
                "points[{index}].a has {} entries, expected K = {}",
                point.a.len(),
                self.k
            )));
        }
        if point.c.len() != self.k {
            return Err(Error::InvalidInput(format!(
                "points[{index}].c has {} entries, expected K = {}",
                point.c.len(),
                self.k
            )));
        }
        let patch = PatchPair {
            b: self.b,
            m: self.m,
            a: point.a.clone(),
            c: point.c.clone(),
            omega: point.omega,
        };
        patch.validate_shape()?;
        Ok(patch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::threshold_n;

    fn quick(m: usize) -> BranchOptions {
        BranchOptions {
            modes: 4,
            quad: super::super::resolved_quad_size(512, 4, m),
            steps: 3,
            ..Default::default()
        }
    }

    #[test]
    fn zero_steps_gives_annulus() {
        let consts = AnnulusConstants::new(0.6, 200).unwrap();
        let m = threshold_n(&consts).unwrap() + 1;
        let opts = BranchOptions {
            steps: 0,
            ..quick(m)
        };
        let branch = branch_continue(0.6, m, Sign::Minus, &opts).unwrap();
        assert_eq!(branch.points.len(), 1);
        assert_eq!(branch.points[0].s, 0.0);
        assert_eq!(branch.points[0].patch.omega, branch.spectrum.omega_minus);
        assert!(branch.points[0].patch.a.iter().all(|&v| v == 0.0));
        assert!(branch.stopped_reason.is_none());
    }

    #[test]
    fn accepted_points_satisfy_contract() {
        let consts = AnnulusConstants::new(0.6, 200).unwrap();
        let m = threshold_n(&consts).unwrap() + 1;
        let branch = branch_continue(0.6, m, Sign::Plus, &quick(m)).unwrap();
        assert_eq!(branch.points.len(), 4, "{:?}", branch.stopped_reason);
        let dir = branch.kernel.direction();
        for (i, pt) in branch.points.iter().enumerate() {
            assert_eq!(pt.step_index, i);
            assert!(pt.residual_norm <= 1e-10);
            assert!(pt.patch.check_guard().is_ok());
            let proj = dir[0] * pt.patch.a[0] + dir[1] * pt.patch.c[0];
            assert!((proj - pt.s).abs() <= 1e-12);
        }
    }

    #[test]
    fn guard_stops_branch_with_partial_result() {
        let consts = AnnulusConstants::new(0.6, 200).unwrap();
        let m = threshold_n(&consts).unwrap() + 1;
        let opts = BranchOptions {
            steps: 50,
            ds: 0.02,
            ..quick(m)
        };
        let branch = branch_continue(0.6, m, Sign::Plus, &opts).unwrap();
        assert!(branch.points.len() < 51);
        assert!(branch.stopped_reason.is_some());
        assert!(branch.points.iter().all(|pt| pt.residual_norm <= 1e-10));
    }

    #[test]
    fn refuses_below_threshold() {
        let consts = AnnulusConstants::new(0.6, 200).unwrap();
        let n = threshold_n(&consts).unwrap();
        let err = branch_continue(0.6, n - 1, Sign::Plus, &quick(n - 1).clone());
        assert!(matches!(
            err,
            Err(Error::BelowThreshold { .. }) | Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn record_round_trip_and_shape_errors() {
        let consts = AnnulusConstants::new(0.6, 200).unwrap();
        let m = threshold_n(&consts).unwrap() + 1;
        let branch = branch_continue(0.6, m, Sign::Minus, &BranchOptions { steps: 1, ..quick(m) }).unwrap();
        let record = BranchRecord::from(&branch);
        let json = serde_json::to_string(&record).unwrap();
        assert!(json.contains("\"K\":4") && json.contains("\"sign\":\"minus\""));
        let back: BranchRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, record);
        assert_eq!(back.patch(1).unwrap(), branch.points[1].patch);
        let mut broken = back.clone();
        broken.points[0].c.pop();
        let msg = broken.patch(0).unwrap_err().to_string();
        assert!(msg.contains("points[0].c"), "{msg}");
        assert!(back.patch(7).is_err());
    }
}
