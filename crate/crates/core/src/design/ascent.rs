//! Stochastic ascent solvers for the query-rule design dual.
//!
//! Both solvers maximize the dual objective from [`crate::design::dual`] with
//! adaptive-step first-order ascent and return the induced selection rule
//! together with a [`DesignCertificate`]:
//!
//! * [`optimize_design_sga`] keeps one PSD share per direction and follows
//!   stochastic gradients of the multi-share dual;
//! * [`optimize_design_subgrad`] keeps a single PSD matrix and obtains the
//!   share part of the gradient from the cover dual program, trading more
//!   work per step for `d^2` instead of `|Y| d^2` state.
//!
//! After averaging the iterates, both reassign shares optimally and rescale
//! the result by a line search, which restores the primal feasibility slack
//! that plain averaging loses.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::dual::{dual_value, DualState, StreamAverage};
use crate::design::selection::{dual_integrand_from_margin, prob_from_margin, SelectionRule};
use crate::design::shares::{assign_dual_shares, CoverDualSolver};
use crate::error::{Error, Result};
use crate::linalg::{psd_project, quad_form_inv, SymMatrix};

/// Post-solve diagnostics for a designed selection rule.
///
/// `max_violation` is `max_y y^T E[P X X^T]^{-1} y / c^2`, so 1 means the
/// coverage constraint holds with equality; `primal_cost` is the expected
/// query rate `E[P(X)]`; `dual_value` is the dual objective at the returned
/// state and lower-bounds the optimal query rate by weak duality. `stalled`
/// flags a run whose gradients were all zero, leaving the rule at its
/// initialization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignCertificate {
    pub max_violation: f64,
    pub primal_cost: f64,
    pub dual_value: f64,
    pub iters_used: usize,
    pub stalled: bool,
}

enum StreamSampler<'a> {
    Exact {
        points: &'a [DVector<f64>],
        cum: Vec<f64>,
    },
    Pool {
        points: &'a [DVector<f64>],
        next: usize,
    },
}

impl<'a> StreamSampler<'a> {
    fn new(stream: &StreamAverage<'a>) -> Result<Self> {
        match *stream {
            StreamAverage::Exact { points, probs } => {
                if points.is_empty() || points.len() != probs.len() {
                    return Err(Error::InvalidInput(
                        "stream support and probabilities must be non-empty and aligned".into(),
                    ));
                }
                let total: f64 = probs.iter().sum();
                if !(total > 0.0) || !total.is_finite() {
                    return Err(Error::InvalidInput(
                        "stream probabilities must have positive finite mass".into(),
                    ));
                }
                let mut acc = 0.0;
                let mut cum: Vec<f64> = probs
                    .iter()
                    .map(|p| {
                        acc += p / total;
                        acc
                    })
                    .collect();
                if let Some(last) = cum.last_mut() {
                    *last = 1.0;
                }
                Ok(StreamSampler::Exact { points, cum })
            }
            StreamAverage::Samples(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidInput("empty sample pool".into()));
                }
                Ok(StreamSampler::Pool { points, next: 0 })
            }
        }
    }

    fn draw<R: Rng>(&mut self, rng: &mut R) -> &'a DVector<f64> {
        match self {
            StreamSampler::Exact { points, cum } => {
                let t: f64 = rng.random();
                let idx = cum.partition_point(|c| *c < t).min(points.len() - 1);
                &points[idx]
            }
            StreamSampler::Pool { points, next } => {
                let x = &points[*next % points.len()];
                *next += 1;
                x
            }
        }
    }
}

fn validate_ascent_args(radius_c: f64, mu_b: f64, iters: usize, rescale_samples: usize) -> Result<()> {
    if !(radius_c > 0.0 && radius_c.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "coverage radius must be positive and finite, got {radius_c}"
        )));
    }
    if !(mu_b > 0.0 && mu_b < 1.0) {
        return Err(Error::InvalidInput(format!(
            "barrier weight must lie in (0, 1), got {mu_b}"
        )));
    }
    if iters == 0 {
        return Err(Error::InvalidInput("iteration count must be positive".into()));
    }
    if rescale_samples == 0 {
        return Err(Error::InvalidInput(
            "rescaling needs at least one sample".into(),
        ));
    }
    Ok(())
}

/// Maximizes the empirical dual along the scaling `s -> s * state`.
///
/// Returns the best `s` in `[0, 1]` found by golden-section search refined to
/// an interval of width `1e-4`; the endpoints are probed explicitly, so a
/// boundary maximizer is returned exactly. The objective is concave in `s`
/// (concave dual composed with a linear path), so the search is global.
pub fn rescale_line_search(
    state: &DualState,
    mu_b: f64,
    samples: &[DVector<f64>],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput(
            "rescaling needs at least one sample".into(),
        ));
    }
    let lambda = state.lambda_sum();
    let quads: Vec<f64> = samples.iter().map(|x| lambda.quad_form(x)).collect();
    let linear = state.linear_term();
    let n = samples.len() as f64;
    let eval = |s: f64| -> f64 {
        let mean: f64 = quads
            .iter()
            .map(|a| dual_integrand_from_margin(mu_b, s * a - 1.0))
            .sum::<f64>()
            / n;
        mean + s * linear
    };

    let mut best_s = 1.0;
    let mut best_v = eval(1.0);
    let v0 = eval(0.0);
    if v0 > best_v {
        best_s = 0.0;
        best_v = v0;
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while hi - lo > 1e-4 {
        if f1 > best_v {
            best_s = x1;
            best_v = f1;
        }
        if f2 > best_v {
            best_s = x2;
            best_v = f2;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        }
    }
    if f1 > best_v {
        best_s = x1;
        best_v = f1;
    }
    if f2 > best_v {
        best_s = x2;
    }
    Ok(best_s)
}

/// Multi-share stochastic gradient ascent on the design dual.
///
/// Runs `iters` adaptive-step ascent steps from zero shares, projecting each
/// share back onto the PSD cone after every step, averages the iterates,
/// reassigns the averaged sum into optimal shares, and rescales by a line
/// search over `rescale_samples` fresh draws. The certificate is evaluated on
/// `stream` itself: exactly for a finite distribution, empirically for a
/// sample pool.
pub fn optimize_design_sga<R: Rng>(
    directions: &[DVector<f64>],
    radius_c: f64,
    mu_b: f64,
    iters: usize,
    rescale_samples: usize,
    stream: &StreamAverage,
    rng: &mut R,
) -> Result<(SelectionRule, DesignCertificate)> {
    validate_ascent_args(radius_c, mu_b, iters, rescale_samples)?;
    let state = DualState::zeros(directions.to_vec(), radius_c)?;
    let dim = state.dim();
    let m = directions.len();
    let c2 = radius_c * radius_c;
    let scaled_outers: Vec<SymMatrix> = directions
        .iter()
        .map(|y| {
            let mut o = SymMatrix::outer(y);
            o.scale(1.0 / c2);
            o
        })
        .collect();

    let mut sampler = StreamSampler::new(stream)?;
    let mut shares = vec![SymMatrix::zeros(dim); m];
    let mut lambda = SymMatrix::zeros(dim);
    let mut averages = vec![SymMatrix::zeros(dim); m];
    let mut grads = vec![SymMatrix::zeros(dim); m];
    let mut grad_sq_sum = 0.0;
    let mut updates = 0usize;

    for _ in 0..iters {
        let x = sampler.draw(rng);
        let p = prob_from_margin(mu_b, lambda.quad_form(x) - 1.0);
        let mut step_sq = 0.0;
        for (g, outer) in grads.iter_mut().zip(&scaled_outers) {
            g.clone_from(outer);
            g.axpy_outer(-p, x);
            step_sq += g.frob_inner(g);
        }
        grad_sq_sum += step_sq;
        if grad_sq_sum > 0.0 {
            let eta = 1.0 / (2.0 * grad_sq_sum).sqrt();
            lambda = SymMatrix::zeros(dim);
            for (share, g) in shares.iter_mut().zip(&grads) {
                share.axpy(eta, g);
                *share = psd_project(share);
                lambda.axpy(1.0, share);
            }
            updates += 1;
        }
        for (avg, share) in averages.iter_mut().zip(&shares) {
            avg.axpy(1.0, share);
        }
    }

    let mut lambda_hat = SymMatrix::zeros(dim);
    for avg in &mut averages {
        avg.scale(1.0 / iters as f64);
        lambda_hat.axpy(1.0, avg);
    }
    finish(
        directions,
        radius_c,
        mu_b,
        lambda_hat,
        iters,
        updates == 0,
        rescale_samples,
        stream,
        &mut sampler,
        rng,
    )
}

/// Single-matrix stochastic subgradient ascent on the design dual.
///
/// Maintains one PSD matrix; the share part of each step comes from the cover
/// dual program (warm-started across iterations), the stream part from one
/// draw. Averaging, share reassignment, rescaling, and certification follow
/// [`optimize_design_sga`].
pub fn optimize_design_subgrad<R: Rng>(
    directions: &[DVector<f64>],
    radius_c: f64,
    mu_b: f64,
    iters: usize,
    rescale_samples: usize,
    stream: &StreamAverage,
    rng: &mut R,
) -> Result<(SelectionRule, DesignCertificate)> {
    validate_ascent_args(radius_c, mu_b, iters, rescale_samples)?;
    let state = DualState::zeros(directions.to_vec(), radius_c)?;
    let dim = state.dim();
    let c2 = radius_c * radius_c;

    let mut solver = CoverDualSolver::new(directions)?;
    let mut sampler = StreamSampler::new(stream)?;
    let mut lambda = SymMatrix::zeros(dim);
    let mut average = SymMatrix::zeros(dim);
    let mut grad = SymMatrix::zeros(dim);
    let mut grad_sq_sum = 0.0;
    let mut updates = 0usize;

    for _ in 0..iters {
        let x = sampler.draw(rng);
        let (_, gamma) = solver.solve(&lambda)?;
        let p = prob_from_margin(mu_b, lambda.quad_form(x) - 1.0);
        grad.clone_from(&gamma);
        grad.scale(1.0 / c2);
        grad.axpy_outer(-p, x);
        grad_sq_sum += grad.frob_inner(&grad);
        if grad_sq_sum > 0.0 {
            let eta = 1.0 / (2.0 * grad_sq_sum).sqrt();
            lambda.axpy(eta, &grad);
            lambda = psd_project(&lambda);
            updates += 1;
        }
        average.axpy(1.0, &lambda);
    }

    average.scale(1.0 / iters as f64);
    finish(
        directions,
        radius_c,
        mu_b,
        average,
        iters,
        updates == 0,
        rescale_samples,
        stream,
        &mut sampler,
        rng,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish<R: Rng>(
    directions: &[DVector<f64>],
    radius_c: f64,
    mu_b: f64,
    lambda_hat: SymMatrix,
    iters_used: usize,
    stalled: bool,
    rescale_samples: usize,
    stream: &StreamAverage,
    sampler: &mut StreamSampler,
    rng: &mut R,
) -> Result<(SelectionRule, DesignCertificate)> {
    let shares: Vec<SymMatrix> = assign_dual_shares(&lambda_hat, directions)?
        .into_iter()
        .map(|s| psd_project(&s))
        .collect();
    let state = DualState::with_shares(directions.to_vec(), shares, radius_c)?;

    let rescale_pool: Vec<DVector<f64>> = (0..rescale_samples)
        .map(|_| sampler.draw(rng).clone())
        .collect();
    let s_star = rescale_line_search(&state, mu_b, &rescale_pool)?;
    let final_state = state.scaled(s_star);
    let rule = SelectionRule::new(final_state.lambda_sum(), mu_b)?;

    let certificate = certify(&rule, &final_state, mu_b, stream, iters_used, stalled)?;
    Ok((rule, certificate))
}

fn certify(
    rule: &SelectionRule,
    state: &DualState,
    mu_b: f64,
    stream: &StreamAverage,
    iters_used: usize,
    stalled: bool,
) -> Result<DesignCertificate> {
    let dim = state.dim();
    let mut sigma_p = SymMatrix::zeros(dim);
    let mut primal_cost = 0.0;
    match *stream {
        StreamAverage::Exact { points, probs } => {
            for (x, w) in points.iter().zip(probs) {
                let p = rule.prob(x);
                primal_cost += w * p;
                sigma_p.axpy_outer(w * p, x);
            }
        }
        StreamAverage::Samples(points) => {
            let w = 1.0 / points.len() as f64;
            for x in points {
                let p = rule.prob(x);
                primal_cost += w * p;
                sigma_p.axpy_outer(w * p, x);
            }
        }
    }

    let c2 = state.radius_c() * state.radius_c();
    let mut max_violation = 0.0f64;
    for y in state.directions() {
        let v = match quad_form_inv(&sigma_p, y, 0.0) {
            Ok(v) => v / c2,
            Err(Error::SingularMatrix { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        max_violation = max_violation.max(v);
    }

    let dual = dual_value(state, mu_b, stream)?;
    Ok(DesignCertificate {
        max_violation,
        primal_cost,
        dual_value: dual,
        iters_used,
        stalled,
    })
}
