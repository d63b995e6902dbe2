//! The elliptical selection rule: a PSD matrix plus a log-barrier weight
//! mapping each point to a query probability.

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Largest representable probability strictly below one.
const MAX_PROB: f64 = 1.0 - f64::EPSILON / 2.0;

/// Query rule `P(x)` derived from the ellipsoid `x^T L x <= 1` with barrier
/// weight `mu` in `[0, 1)`; `mu = 0` gives the hard threshold rule.
#[derive(Clone, Debug)]
pub struct SelectionRule {
    lambda_mat: SymMatrix,
    barrier_mu: f64,
}

impl SelectionRule {
    pub fn new(lambda_mat: SymMatrix, barrier_mu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&barrier_mu) {
            return Err(Error::InvalidInput(format!(
                "barrier weight must be in [0, 1), got {barrier_mu}"
            )));
        }
        if !lambda_mat.is_finite() {
            return Err(Error::InvalidInput(
                "selection rule matrix has non-finite entries".into(),
            ));
        }
        if !lambda_mat.is_psd() {
            return Err(Error::InvalidInput(
                "selection rule matrix must be positive semidefinite".into(),
            ));
        }
        Ok(SelectionRule {
            lambda_mat,
            barrier_mu,
        })
    }

    pub fn lambda_mat(&self) -> &SymMatrix {
        &self.lambda_mat
    }

    pub fn barrier_mu(&self) -> f64 {
        self.barrier_mu
    }

    pub fn dim(&self) -> usize {
        self.lambda_mat.dim()
    }

    /// Margin `q(x) = x^T L x - 1`.
    pub fn margin(&self, x: &DVector<f64>) -> f64 {
        self.lambda_mat.quad_form(x) - 1.0
    }

    /// Query probability `P(x)`.
    pub fn prob(&self, x: &DVector<f64>) -> f64 {
        prob_from_margin(self.barrier_mu, self.margin(x))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&SelectionRuleJson::from(self))
            .expect("selection rule serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: SelectionRuleJson = serde_json::from_str(s)
            .map_err(|e| Error::InvalidInput(format!("selection rule JSON: {e}")))?;
        SelectionRule::new(
            SymMatrix::from_row_major(doc.dim, &doc.lambda_mat)?,
            doc.barrier_mu,
        )
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectionRuleJson {
    dim: usize,
    lambda_mat: Vec<f64>,
    barrier_mu: f64,
}

impl From<&SelectionRule> for SelectionRuleJson {
    fn from(rule: &SelectionRule) -> Self {
        SelectionRuleJson {
            dim: rule.dim(),
            lambda_mat: rule.lambda_mat.to_row_major(),
            barrier_mu: rule.barrier_mu,
        }
    }
}

/// Query probability as a function of the margin `q`.
///
/// For `mu > 0` this evaluates the stationary point of the barrier problem,
/// `P = 1/2 - mu/q + sqrt(q^2 + 4 mu^2) / (2q)`, rewritten as
/// `P = 1/2 + q / (2 (sqrt(q^2 + 4 mu^2) + 2 mu))` which is cancellation-free
/// for every `q` and has the correct limit `1/2` (slope `1/(8 mu)`) at `q = 0`.
pub fn prob_from_margin(mu: f64, q: f64) -> f64 {
    if mu == 0.0 {
        return if q > 0.0 {
            1.0
        } else if q < 0.0 {
            0.0
        } else {
            0.5
        };
    }
    if q.abs() < 1e-12 {
        return 0.5;
    }
    let s = (q * q + 4.0 * mu * mu).sqrt();
    let p = 0.5 + q / (2.0 * (s + 2.0 * mu));
    p.min(MAX_PROB)
}

/// Integrand of the dual objective at margin `q`:
/// `h = P - mu (log(1 - P) + log P) - P (1 + q)`.
///
/// Uses `P (1 - P) = mu / (sqrt(q^2 + 4 mu^2) + 2 mu)`, which follows from the
/// stationarity equation, so no logarithm of a cancelled difference is taken.
pub fn dual_integrand_from_margin(mu: f64, q: f64) -> f64 {
    let p = prob_from_margin(mu, q);
    if mu == 0.0 {
        return -p * q;
    }
    let s = (q * q + 4.0 * mu * mu).sqrt();
    -p * q + mu * ((s + 2.0 * mu) / mu).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_zero_is_half() {
        for mu in [1e-6, 0.01, 0.25, 0.9] {
            assert_eq!(prob_from_margin(mu, 0.0), 0.5);
            assert_eq!(prob_from_margin(mu, 1e-13), 0.5);
        }
    }

    #[test]
    fn hard_threshold() {
        assert_eq!(prob_from_margin(0.0, 0.5), 1.0);
        assert_eq!(prob_from_margin(0.0, -0.5), 0.0);
        assert_eq!(prob_from_margin(0.0, 0.0), 0.5);
    }

    #[test]
    fn matches_raw_formula_away_from_zero() {
        for mu in [0.1f64, 0.25, 0.6] {
            for q in [-1.0f64, -0.5, 0.3, 2.0, 50.0] {
                let raw = 0.5 - mu / q + (q * q + 4.0 * mu * mu).sqrt() / (2.0 * q);
                assert!((prob_from_margin(mu, q) - raw).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stays_below_one() {
        assert!(prob_from_margin(2e-5, 1e20) < 1.0);
    }
}
