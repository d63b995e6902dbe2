//! Lagrangian dual of the barrier-smoothed query-probability design program.
//!
//! The design program picks a query probability P(x) for every stream point so
//! that the weighted second moment E_nu[P(X)XX^T] covers every direction y with
//! y^T E[P X X^T]^{-1} y <= c^2, at minimal expected query rate E[P]. Dualizing
//! the coverage constraints with one PSD multiplier per direction gives the
//! concave objective
//!
//!   D(L_1, ..., L_m) = E_nu[h_L(X)] + (1/c^2) sum_y y^T L_y y,
//!
//! where L = sum_y L_y and h_L folds the query cost and the log barrier at the
//! closed-form optimal probability. Stochastic ascent on D is what the design
//! solvers in [`crate::design::ascent`] run.

use nalgebra::DVector;

use crate::design::selection::{dual_integrand_from_margin, prob_from_margin};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// One PSD multiplier per coverage direction plus the shared radius `c`.
#[derive(Clone, Debug)]
pub struct DualState {
    shares: Vec<SymMatrix>,
    directions: Vec<DVector<f64>>,
    radius_c: f64,
}

impl DualState {
    /// All-zero multipliers for the given directions.
    pub fn zeros(directions: Vec<DVector<f64>>, radius_c: f64) -> Result<Self> {
        let dim = validate_directions(&directions)?;
        validate_radius(radius_c)?;
        let shares = vec![SymMatrix::zeros(dim); directions.len()];
        Ok(Self {
            shares,
            directions,
            radius_c,
        })
    }

    /// Wraps explicit multipliers, checking dimensions and semidefiniteness.
    pub fn with_shares(
        directions: Vec<DVector<f64>>,
        shares: Vec<SymMatrix>,
        radius_c: f64,
    ) -> Result<Self> {
        let dim = validate_directions(&directions)?;
        validate_radius(radius_c)?;
        if shares.len() != directions.len() {
            return Err(Error::InvalidInput(format!(
                "{} multiplier shares for {} directions",
                shares.len(),
                directions.len()
            )));
        }
        for share in &shares {
            if share.dim() != dim {
                return Err(Error::InvalidInput(format!(
                    "share dimension {} does not match direction dimension {dim}",
                    share.dim()
                )));
            }
            if !share.is_psd() {
                return Err(Error::InvalidInput(
                    "multiplier share is not positive semidefinite".into(),
                ));
            }
        }
        Ok(Self {
            shares,
            directions,
            radius_c,
        })
    }

    pub fn directions(&self) -> &[DVector<f64>] {
        &self.directions
    }

    pub fn shares(&self) -> &[SymMatrix] {
        &self.shares
    }

    pub fn radius_c(&self) -> f64 {
        self.radius_c
    }

    pub fn dim(&self) -> usize {
        self.shares.first().map_or(0, SymMatrix::dim)
    }

    /// Sum of the multipliers; the matrix that parameterizes the selection rule.
    pub fn lambda_sum(&self) -> SymMatrix {
        let mut sum = SymMatrix::zeros(self.dim());
        for share in &self.shares {
            sum.axpy(1.0, share);
        }
        sum
    }

    /// `(1/c^2) * sum_y y^T L_y y`, the part of the dual linear in the shares.
    pub fn linear_term(&self) -> f64 {
        let c2 = self.radius_c * self.radius_c;
        self.directions
            .iter()
            .zip(&self.shares)
            .map(|(y, share)| share.quad_form(y) / c2)
            .sum()
    }

    /// Same directions and radius with every multiplier scaled by `s >= 0`.
    pub fn scaled(&self, s: f64) -> Self {
        let shares = self
            .shares
            .iter()
            .map(|share| {
                let mut m = share.clone();
                m.scale(s);
                m
            })
            .collect();
        Self {
            shares,
            directions: self.directions.clone(),
            radius_c: self.radius_c,
        }
    }

}

fn validate_directions(directions: &[DVector<f64>]) -> Result<usize> {
    let first = directions
        .first()
        .ok_or_else(|| Error::InvalidInput("empty direction set".into()))?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidInput("zero-dimensional direction".into()));
    }
    for (i, y) in directions.iter().enumerate() {
        if y.len() != dim {
            return Err(Error::InvalidInput(format!(
                "direction {i} has dimension {} instead of {dim}",
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("direction {i} is not finite")));
        }
        if y.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidInput(format!("direction {i} is zero")));
        }
        for (j, other) in directions.iter().enumerate().take(i) {
            if y == other {
                return Err(Error::InvalidInput(format!(
                    "directions {j} and {i} are identical"
                )));
            }
        }
    }
    Ok(dim)
}

fn validate_radius(radius_c: f64) -> Result<()> {
    if radius_c > 0.0 && radius_c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "coverage radius must be positive and finite, got {radius_c}"
        )))
    }
}

/// How expectations over the stream distribution are evaluated.
#[derive(Clone, Copy, Debug)]
pub enum StreamAverage<'a> {
    /// Exact expectation over a finite support with the given probabilities.
    Exact {
        points: &'a [DVector<f64>],
        probs: &'a [f64],
    },
    /// Empirical mean over drawn samples.
    Samples(&'a [DVector<f64>]),
}

impl StreamAverage<'_> {
    /// Mean of `f` under the stream description.
    pub fn average<F: FnMut(&DVector<f64>) -> f64>(&self, mut f: F) -> f64 {
        match self {
            StreamAverage::Exact { points, probs } => points
                .iter()
                .zip(probs.iter())
                .map(|(x, w)| w * f(x))
                .sum(),
            StreamAverage::Samples(xs) => {
                let n = xs.len().max(1);
                xs.iter().map(&mut f).sum::<f64>() / n as f64
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let empty = match self {
            StreamAverage::Exact { points, probs } => {
                if points.len() != probs.len() {
                    return Err(Error::InvalidInput(format!(
                        "{} stream points with {} probabilities",
                        points.len(),
                        probs.len()
                    )));
                }
                points.is_empty()
            }
            StreamAverage::Samples(xs) => xs.is_empty(),
        };
        if empty {
            Err(Error::InvalidInput("empty stream description".into()))
        } else {
            Ok(())
        }
    }
}

/// Dual objective `D = E[h_L(X)] + (1/c^2) sum_y y^T L_y y`.
///
/// The expectation is exact for [`StreamAverage::Exact`] and an empirical mean
/// for [`StreamAverage::Samples`].
pub fn dual_value(state: &DualState, mu_b: f64, stream: &StreamAverage) -> Result<f64> {
    stream.validate()?;
    let lambda = state.lambda_sum();
    let mut finite = true;
    let mean = stream.average(|x| {
        let h = dual_integrand_from_margin(mu_b, lambda.quad_form(x) - 1.0);
        finite &= h.is_finite();
        h
    });
    if !finite {
        return Err(Error::InternalConsistency(
            "dual integrand evaluated to a non-finite value".into(),
        ));
    }
    Ok(mean + state.linear_term())
}

/// Stochastic dual gradient at one stream draw.
///
/// For each direction `y` the component is `yy^T/c^2 - P_L(x) xx^T`; when `x`
/// is drawn from the stream distribution this is an unbiased estimate of the
/// gradient of [`dual_value`] in the share of `y`.
pub fn dual_gradient(state: &DualState, mu_b: f64, x: &DVector<f64>) -> Vec<SymMatrix> {
    let lambda = state.lambda_sum();
    let p = prob_from_margin(mu_b, lambda.quad_form(x) - 1.0);
    let c2 = state.radius_c * state.radius_c;
    state
        .directions
        .iter()
        .map(|y| {
            let mut g = SymMatrix::outer(y);
            g.scale(1.0 / c2);
            g.axpy_outer(-p, x);
            g
        })
        .collect()
}

/// Exact-expectation dual gradient for a finite stream distribution:
/// `yy^T/c^2 - E_nu[P_L(X) XX^T]` per direction.
pub fn dual_gradient_exact(
    state: &DualState,
    mu_b: f64,
    points: &[DVector<f64>],
    probs: &[f64],
) -> Result<Vec<SymMatrix>> {
    StreamAverage::Exact { points, probs }.validate()?;
    let lambda = state.lambda_sum();
    let mut weighted = SymMatrix::zeros(state.dim());
    for (x, w) in points.iter().zip(probs) {
        let p = prob_from_margin(mu_b, lambda.quad_form(x) - 1.0);
        weighted.axpy_outer(w * p, x);
    }
    let c2 = state.radius_c * state.radius_c;
    Ok(state
        .directions
        .iter()
        .map(|y| {
            let mut g = SymMatrix::outer(y);
            g.scale(1.0 / c2);
            g.axpy(-1.0, &weighted);
            g
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_state() -> DualState {
        let dirs = vec![DVector::from_vec(vec![1.0, 0.0])];
        DualState::zeros(dirs, 1.0).unwrap()
    }

    #[test]
    fn zero_state_dual_matches_scalar_evaluation() {
        let state = tiny_state();
        let points = [DVector::from_vec(vec![1.0, 0.0])];
        let probs = [1.0];
        let d = dual_value(&state, 0.25, &StreamAverage::Exact {
            points: &points,
            probs: &probs,
        })
        .unwrap();
        // At L = 0 the margin is -1 for every x, so D = h(0.25, -1).
        let expected = dual_integrand_from_margin(0.25, -1.0);
        assert!((d - expected).abs() < 1e-15);
    }

    #[test]
    fn gradient_at_zero_state_is_outer_difference() {
        let state = tiny_state();
        let x = DVector::from_vec(vec![0.5, 0.5]);
        let g = dual_gradient(&state, 0.25, &x);
        let p = prob_from_margin(0.25, -1.0);
        assert!((g[0].get(0, 0) - (1.0 - p * 0.25)).abs() < 1e-15);
        assert!((g[0].get(1, 1) - (-p * 0.25)).abs() < 1e-15);
    }

    #[test]
    fn duplicate_directions_rejected() {
        let dirs = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.0]),
        ];
        assert!(DualState::zeros(dirs, 1.0).is_err());
    }
}
