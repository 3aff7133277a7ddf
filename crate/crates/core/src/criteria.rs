//! Classical model-selection criteria and their calibrated prior constants.
//!
//! A network with `k` bases has `ξ = k(c+1) + c(1+d)` parameters. The
//! penalties are `ξ` (AIC) and `(ξ/2) ln N` (BIC, MDL). Since `ξ` grows by
//! `c+1` per basis, a prior `p(k) ∝ exp(−C k)` with `C` equal to that per-basis
//! penalty increment makes the posterior's argmax coincide with the
//! penalized-likelihood argmax.

use std::fmt;
use std::str::FromStr;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_design_matrix, residual_quadratic, BasisKind, CentreSet, Dataset, Metric};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionKind {
    Aic,
    Bic,
    Mdl,
}

impl FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(CriterionKind::Aic),
            "bic" => Ok(CriterionKind::Bic),
            "mdl" => Ok(CriterionKind::Mdl),
            other => Err(Error::config("criterion", format!("expected aic, bic or mdl, got `{other}`"))),
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriterionKind::Aic => "aic",
            CriterionKind::Bic => "bic",
            CriterionKind::Mdl => "mdl",
        })
    }
}

/// A criterion bound to a problem shape: `N` samples, `c` outputs, `d` inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Criterion {
    kind: CriterionKind,
    samples: usize,
    outputs: usize,
    inputs: usize,
}

impl Criterion {
    pub fn new(kind: CriterionKind, samples: usize, outputs: usize, inputs: usize) -> Self {
        assert!(samples >= 1 && outputs >= 1 && inputs >= 1, "criterion needs N, c, d >= 1");
        Self {
            kind,
            samples,
            outputs,
            inputs,
        }
    }

    pub fn for_dataset<F: Real>(kind: CriterionKind, data: &Dataset<F>) -> Self {
        Self::new(kind, data.len(), data.output_dim(), data.input_dim())
    }

    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// `ξ = k(c+1) + c(1+d)`.
    pub fn parameter_count(&self, k: usize) -> usize {
        k * (self.outputs + 1) + self.outputs * (1 + self.inputs)
    }

    /// Multiplier turning a parameter count into a penalty.
    fn per_parameter<F: Real>(&self) -> F {
        match self.kind {
            CriterionKind::Aic => F::one(),
            // BIC and MDL share this arm so their values are bit-identical.
            CriterionKind::Bic | CriterionKind::Mdl => F::of_usize(self.samples).ln() / F::of(2.0),
        }
    }

    pub fn penalty<F: Real>(&self, k: usize) -> F {
        F::of_usize(self.parameter_count(k)) * self.per_parameter::<F>()
    }

    /// `C` in `p(k) ∝ exp(−C k)`: `c+1` for AIC, `(c+1) ln(N) / 2` for BIC/MDL.
    pub fn calibration_constant<F: Real>(&self) -> F {
        F::of_usize(self.outputs + 1) * self.per_parameter::<F>()
    }
}

/// Log of the penalized-likelihood objective: `−(N/2) Σ_i ln(y_iᵀ P y_i) − penalty(k)`.
///
/// This is the classical score, computed column by column without reference
/// to the calibrated prior.
pub fn penalized_score<F: Real>(
    data: &Dataset<F>,
    centres: &CentreSet<F>,
    basis: &BasisKind<F>,
    metric: &Metric<F>,
    criterion: &Criterion,
) -> Result<F> {
    let design = build_design_matrix(data.x(), centres, basis, metric)?;
    let mut log_sum = F::zero();
    for (i, col) in data.y().axis_iter(Axis(1)).enumerate() {
        let r = residual_quadratic(&design, col)?;
        if !(r > F::zero()) {
            return Err(Error::ZeroResidual { output: i });
        }
        log_sum = log_sum + r.ln();
    }
    let half_n = F::of_usize(data.len()) / F::of(2.0);
    Ok(-half_n * log_sum - criterion.penalty::<F>(centres.k()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parameter_counts() {
        assert_eq!(Criterion::new(CriterionKind::Aic, 10, 2, 2).parameter_count(0), 6);
        assert_eq!(Criterion::new(CriterionKind::Aic, 10, 2, 2).parameter_count(12), 42);
        assert_eq!(Criterion::new(CriterionKind::Aic, 10, 1, 1).parameter_count(1), 4);
    }

    #[test]
    fn penalties() {
        let aic = Criterion::new(CriterionKind::Aic, 200, 2, 2);
        assert_eq!(aic.penalty::<f64>(0), 6.0);
        let mdl = Criterion::new(CriterionKind::Mdl, 200, 2, 2);
        // 3·ln 200
        assert_relative_eq!(mdl.penalty::<f64>(0), 15.894_952_099_644_108, epsilon = 1e-10);
        let one = Criterion::new(CriterionKind::Mdl, 1, 2, 2);
        assert_eq!(one.penalty::<f64>(7), 0.0);
    }

    #[test]
    fn calibration_constants() {
        assert_eq!(Criterion::new(CriterionKind::Aic, 200, 2, 2).calibration_constant::<f64>(), 3.0);
        assert_relative_eq!(
            Criterion::new(CriterionKind::Mdl, 200, 2, 2).calibration_constant::<f64>(),
            7.947_476_049_822_054,
            epsilon = 1e-10
        );
    }

    #[test]
    fn calibration_is_per_basis_penalty_increment() {
        for kind in [CriterionKind::Aic, CriterionKind::Bic, CriterionKind::Mdl] {
            for (n, c, d) in [(200, 2, 2), (7, 1, 3), (1, 4, 1)] {
                let crit = Criterion::new(kind, n, c, d);
                let cc: f64 = crit.calibration_constant();
                for k in 0..60 {
                    let inc = crit.penalty::<f64>(k + 1) - crit.penalty::<f64>(k);
                    assert_relative_eq!(inc, cc, epsilon = 1e-12, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn bic_and_mdl_are_bit_identical() {
        for n in [1usize, 2, 50, 200, 12345] {
            let b = Criterion::new(CriterionKind::Bic, n, 2, 3);
            let m = Criterion::new(CriterionKind::Mdl, n, 2, 3);
            for k in 0..20 {
                assert_eq!(b.penalty::<f64>(k).to_bits(), m.penalty::<f64>(k).to_bits());
            }
            assert_eq!(
                b.calibration_constant::<f64>().to_bits(),
                m.calibration_constant::<f64>().to_bits()
            );
        }
    }

    #[test]
    fn parse_kind() {
        assert_eq!("MDL".parse::<CriterionKind>().unwrap(), CriterionKind::Mdl);
        let err = "bogus".parse::<CriterionKind>().unwrap_err();
        assert!(err.to_string().contains("criterion"));
    }
}
