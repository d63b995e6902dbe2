//! Exact finite-support design programs and the weight functional `rho`.
//!
//! For a finite stream support with distribution `nu`, the ideal query rule
//! minimizes the expected label rate subject to estimating every competitor
//! arm gap to its target accuracy. Its value is governed by the weight
//! functional
//!
//!   rho(lambda) = max_{z != z*} ||z* - z||^2_{A(lambda)^{-1}} / max{gap_z^2, eps^2},
//!
//! with `A(lambda) = sum_i lambda_i x_i x_i^T`. This module evaluates `rho`,
//! solves the budgeted design program exactly over the support (query table
//! plus cost), solves the equivalent reparameterized weight program, and
//! provides the per-round coverage radius and a fourth-moment diagnostic.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::linalg::{default_ridge, weighted_second_moment, SpectralSolver, SymMatrix};

/// Budget for the entropic mirror-descent stage of the capped weight solve.
const MIRROR_ITERS: usize = 10_000;
/// Iterations per temperature stage of the smoothed polish.
const POLISH_ITERS: usize = 400;
/// Bisection steps over the density cap in the budgeted design solve.
const CAP_BISECTIONS: usize = 40;

/// Probability weights over the stream support (a simplex element).
#[derive(Clone, Debug, PartialEq)]
pub struct DesignWeights(Vec<f64>);

impl DesignWeights {
    /// Validates a simplex element: entries nonnegative and finite, total
    /// mass 1 within `1e-9`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        let mut total = 0.0;
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight {i} is {w}, expected a finite nonnegative value"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Difference vectors `z* - z` with their floored squared denominators.
struct GapDiffs {
    diffs: Vec<(DVector<f64>, f64)>,
}

fn gap_diffs(arms: &[DVector<f64>], theta_star: &DVector<f64>, eps: f64) -> Result<GapDiffs> {
    if arms.is_empty() {
        return Err(Error::InvalidInput("empty arm set".into()));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "accuracy floor must be a finite nonnegative value, got {eps}"
        )));
    }
    let best = arms
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| theta_star.dot(a).total_cmp(&theta_star.dot(b)))
        .map(|(i, _)| i)
        .expect("non-empty arm set");
    let mut diffs = Vec::with_capacity(arms.len().saturating_sub(1));
    for (i, z) in arms.iter().enumerate() {
        if i == best {
            continue;
        }
        let v = &arms[best] - z;
        let gap = theta_star.dot(&v);
        let floor = (gap * gap).max(eps * eps);
        if floor == 0.0 {
            return Err(Error::DegenerateInstance(
                "zero value gap with zero accuracy floor".into(),
            ));
        }
        diffs.push((v, floor));
    }
    Ok(GapDiffs { diffs })
}

/// Label-complexity functional of a design: the largest, over competitor
/// arms, of the design-induced squared norm of `z* - z` divided by the
/// squared value gap floored at `eps^2`. A single-arm set yields 0.
pub fn rho(
    weights: &DesignWeights,
    stream: &[DVector<f64>],
    arms: &[DVector<f64>],
    theta_star: &DVector<f64>,
    eps: f64,
) -> Result<f64> {
    if weights.len() != stream.len() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} stream points",
            weights.len(),
            stream.len()
        )));
    }
    let gd = gap_diffs(arms, theta_star, eps)?;
    if gd.diffs.is_empty() {
        return Ok(0.0);
    }
    let a = weighted_second_moment(stream, weights.as_slice())?;
    let solver = SpectralSolver::new(&a)?;
    let mut worst = 0.0f64;
    for (v, floor) in &gd.diffs {
        let num = solver.quad_form_pinv(v)?;
        worst = worst.max(num / floor);
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Capped weight minimization: min rho(lambda) over {simplex, lambda <= caps}.
// ---------------------------------------------------------------------------

/// Exact KL projection onto `{sum lambda = 1, 0 <= lambda <= caps}`:
/// `lambda_i = min(caps_i, w_i / z)` with `z` solving the mass constraint.
fn kl_project_capped(w: &[f64], caps: &[f64]) -> Vec<f64> {
    let n = w.len();
    let support: Vec<usize> = (0..n).filter(|&i| caps[i] > 0.0).collect();
    let w_total: f64 = support.iter().map(|&i| w[i]).sum();
    let cap_total: f64 = support.iter().map(|&i| caps[i]).sum();
    let mut out = vec![0.0; n];
    if w_total <= 0.0 || cap_total <= 1.0 + 1e-15 {
        // No usable multipliers (or the caps barely cover the simplex):
        // fill proportionally to the caps.
        for &i in &support {
            out[i] = caps[i] / cap_total;
        }
        return out;
    }

    let mut order = support.clone();
    order.sort_by(|&a, &b| (w[b] / caps[b]).total_cmp(&(w[a] / caps[a])));
    let ratio = |i: usize| w[i] / caps[i];

    // Walk the number of capped entries; uncapped mass is spread as w / z.
    let mut capped_mass = 0.0;
    let mut uncapped_w = w_total;
    let mut z_star = None;
    for k in 0..=order.len() {
        if capped_mass < 1.0 {
            let z = uncapped_w / (1.0 - capped_mass);
            let upper_ok = k == 0 || ratio(order[k - 1]) >= z * (1.0 - 1e-12);
            let lower_ok = k == order.len() || z >= ratio(order[k]) * (1.0 - 1e-12);
            if upper_ok && lower_ok && z > 0.0 {
                z_star = Some(z);
                break;
            }
        }
        if k < order.len() {
            capped_mass += caps[order[k]];
            uncapped_w -= w[order[k]];
        }
    }
    let z = z_star.unwrap_or_else(|| {
        // Numerical fallback: bisect the monotone mass function in z.
        let (mut lo, mut hi) = (f64::MIN_POSITIVE, w_total.max(1.0) * 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let mass: f64 = support.iter().map(|&i| (w[i] / mid).min(caps[i])).sum();
            if mass > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    });

    let mut total = 0.0;
    for &i in &support {
        out[i] = (w[i] / z).min(caps[i]);
        total += out[i];
    }
    if total > 0.0 {
        for v in &mut out {
            *v /= total;
        }
    }
    out
}

/// Euclidean projection onto `{sum lambda = 1, 0 <= lambda <= caps}`.
fn euclid_project_capped(y: &[f64], caps: &[f64]) -> Vec<f64> {
    let support: Vec<usize> = (0..y.len()).filter(|&i| caps[i] > 0.0).collect();
    let mut lo = y
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .min(0.0)
        - 1.0;
    let mut hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    for _ in 0..100 {
        let theta = 0.5 * (lo + hi);
        let mass: f64 = support
            .iter()
            .map(|&i| (y[i] - theta).clamp(0.0, caps[i]))
            .sum();
        if mass > 1.0 {
            lo = theta;
        } else {
            hi = theta;
        }
    }
    let theta = 0.5 * (lo + hi);
    let mut out = vec![0.0; y.len()];
    let mut total = 0.0;
    for &i in &support {
        out[i] = (y[i] - theta).clamp(0.0, caps[i]);
        total += out[i];
    }
    if total > 0.0 {
        for v in &mut out {
            *v /= total;
        }
    }
    out
}

/// Ridged factorization of the design moment matrix.
fn moment_factor(stream: &[DVector<f64>], lambda: &[f64]) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let moment = weighted_second_moment(stream, lambda)?;
    let dense: DMatrix<f64> = moment.to_dense();
    let dim = dense.nrows();
    let mut ridge = default_ridge(&moment).max(f64::MIN_POSITIVE);
    for _ in 0..4 {
        let mut shifted = dense.clone();
        for i in 0..dim {
            shifted[(i, i)] += ridge;
        }
        if let Some(chol) = Cholesky::new(shifted) {
            return Ok(chol);
        }
        ridge *= 1e3;
    }
    Err(Error::InternalConsistency(
        "design moment matrix could not be factored".into(),
    ))
}

/// `rho` value, per-arm values, and solved directions at a ridged moment.
fn rho_terms(
    stream: &[DVector<f64>],
    lambda: &[f64],
    diffs: &[(DVector<f64>, f64)],
) -> Result<(f64, Vec<f64>, Vec<DVector<f64>>)> {
    let chol = moment_factor(stream, lambda)?;
    let mut vals = Vec::with_capacity(diffs.len());
    let mut solves = Vec::with_capacity(diffs.len());
    let mut worst = 0.0f64;
    for (v, floor) in diffs {
        let u = chol.solve(v);
        let val = v.dot(&u) / floor;
        worst = worst.max(val);
        vals.push(val);
        solves.push(u);
    }
    Ok((worst, vals, solves))
}

/// Softmax-smoothed `rho` and its gradient in the weights.
fn smoothed_rho_grad(
    stream: &[DVector<f64>],
    lambda: &[f64],
    diffs: &[(DVector<f64>, f64)],
    temp: f64,
) -> Result<(f64, Vec<f64>)> {
    let (worst, vals, solves) = rho_terms(stream, lambda, diffs)?;
    let weights: Vec<f64> = vals
        .iter()
        .map(|v| ((v - worst) / temp).exp())
        .collect();
    let wsum: f64 = weights.iter().sum();
    let smooth = worst + temp * (wsum.ln());
    let mut grad = vec![0.0; lambda.len()];
    for ((w, u), (_, floor)) in weights.iter().zip(&solves).zip(diffs) {
        let share = w / wsum / floor;
        for (g, x) in grad.iter_mut().zip(stream) {
            let t = x.dot(u);
            *g -= share * t * t;
        }
    }
    Ok((smooth, grad))
}

/// Minimizes `rho` over the caps-restricted simplex.
///
/// Stage 1 is entropic mirror descent with the exact capped KL projection;
/// stage 2 polishes with projected gradient descent on a softmax smoothing of
/// the max, annealing the temperature. Returns the best weights found and
/// their (ridged) `rho` value.
fn min_rho_capped(
    stream: &[DVector<f64>],
    diffs: &[(DVector<f64>, f64)],
    caps: &[f64],
) -> Result<(Vec<f64>, f64)> {
    if diffs.is_empty() {
        return Err(Error::InvalidInput(
            "capped weight solve needs at least one competitor arm".into(),
        ));
    }
    let n = stream.len();
    let mut lambda = kl_project_capped(&vec![1.0; n], caps);
    let (mut best_val, _, _) = rho_terms(stream, &lambda, diffs)?;
    let mut best = lambda.clone();

    // Stage 1: mirror descent on the exact max with adaptive steps.
    for t in 0..MIRROR_ITERS {
        let (val, vals, solves) = rho_terms(stream, &lambda, diffs)?;
        if val < best_val {
            best_val = val;
            best.clone_from(&lambda);
        }
        let active = vals
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.total_cmp(b))
            .map(|(i, _)| i)
            .expect("non-empty diffs");
        let u = &solves[active];
        let floor = diffs[active].1;
        let mut grad = vec![0.0; n];
        let mut g_min = 0.0f64;
        for (g, x) in grad.iter_mut().zip(stream) {
            let d = x.dot(u);
            *g = -d * d / floor;
            g_min = g_min.min(*g);
        }
        if g_min > -1e-300 {
            break;
        }
        let eta = 1.0 / (g_min.abs() * ((t + 1) as f64).sqrt());
        let w: Vec<f64> = lambda
            .iter()
            .zip(&grad)
            .map(|(l, g)| l * (-eta * (g - g_min)).max(-60.0).exp())
            .collect();
        let next = kl_project_capped(&w, caps);
        let change = next
            .iter()
            .zip(&lambda)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        lambda = next;
        if change < 1e-13 {
            break;
        }
    }

    // Stage 2: temperature-annealed smoothing with backtracked steps.
    lambda.clone_from(&best);
    let scale = best_val.max(f64::MIN_POSITIVE);
    for rel_temp in [1e-2, 1e-4, 1e-6] {
        let temp = rel_temp * scale;
        let (mut f_cur, mut grad) = smoothed_rho_grad(stream, &lambda, diffs, temp)?;
        let mut step = 1.0 / grad.iter().map(|g| g.abs()).fold(1e-12, f64::max);
        for _ in 0..POLISH_ITERS {
            let mut accepted = false;
            for _ in 0..40 {
                let trial_point: Vec<f64> = lambda
                    .iter()
                    .zip(&grad)
                    .map(|(l, g)| l - step * g)
                    .collect();
                let trial = euclid_project_capped(&trial_point, caps);
                let (f_new, grad_new) = smoothed_rho_grad(stream, &trial, diffs, temp)?;
                if f_new < f_cur {
                    lambda = trial;
                    f_cur = f_new;
                    grad = grad_new;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
                if step < 1e-18 {
                    break;
                }
            }
            if !accepted {
                break;
            }
            let (exact, _, _) = rho_terms(stream, &lambda, diffs)?;
            if exact < best_val {
                best_val = exact;
                best.clone_from(&lambda);
            }
        }
        lambda.clone_from(&best);
    }

    Ok((best, best_val))
}

// ---------------------------------------------------------------------------
// Budgeted design program and its weight reparameterization.
// ---------------------------------------------------------------------------

/// Exact solution of the budgeted query-design program on a finite support.
#[derive(Clone, Debug)]
pub struct OracleDesign {
    /// Query probability at each stream support point.
    pub probs: Vec<f64>,
    /// Expected label count `tau * E_nu[P(X)]`.
    pub cost: f64,
    /// Minimizer of the equivalent weight program.
    pub weights: DesignWeights,
}

fn validate_budget(tau: f64, beta: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "stream budget must be positive and finite, got {tau}"
        )));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "confidence constant must be positive and finite, got {beta}"
        )));
    }
    Ok(())
}

/// Solves the budgeted design program over an explicit support.
///
/// Minimizes `E_nu[P(X)]` over query tables `P: support -> [0, 1]` subject
/// to every competitor direction satisfying its floored-gap accuracy
/// constraint under the moment `tau * E_nu[P(X) X X^T]`. Solved through the
/// equivalent weight program: bisection over the density cap `||lambda /
/// nu||_inf` with a capped-simplex solve inside. Infeasible when `tau <
/// beta * rho(nu)`.
pub fn oracle_design_over(
    stream: &[DVector<f64>],
    nu: &[f64],
    arms: &[DVector<f64>],
    theta_star: &DVector<f64>,
    round_eps: f64,
    tau: f64,
    beta: f64,
) -> Result<OracleDesign> {
    validate_budget(tau, beta)?;
    let nu_weights = DesignWeights::new(nu.to_vec())?;
    let rho_nu = rho(&nu_weights, stream, arms, theta_star, round_eps)?;
    let required = beta * rho_nu;
    if tau < required {
        return Err(Error::InfeasibleBudget { tau, required });
    }
    if rho_nu == 0.0 {
        return Ok(OracleDesign {
            probs: vec![0.0; stream.len()],
            cost: 0.0,
            weights: nu_weights,
        });
    }
    let gd = gap_diffs(arms, theta_star, round_eps)?;

    // Unconstrained optimum fixes the upper end of the cap range.
    let ones = vec![1.0; stream.len()];
    let (lam_free, _) = min_rho_capped(stream, &gd.diffs, &ones)?;
    let rho_free = rho(
        &DesignWeights::new(lam_free.clone())?,
        stream,
        arms,
        theta_star,
        round_eps,
    )?;
    let cap_hi = (tau / (beta * rho_free)).max(1.0);

    let solve_at = |m: f64| -> Result<(Vec<f64>, f64)> {
        let caps: Vec<f64> = nu.iter().map(|p| m * p).collect();
        let (lam, val) = min_rho_capped(stream, &gd.diffs, &caps)?;
        Ok((lam, beta * val))
    };

    // The scaled value m * phi(m) grows with the cap m, so the largest
    // budget-feasible cap is found by bisection; phi itself shrinks with m,
    // hence the best feasible probe wins.
    let mut best_lam = nu.to_vec();
    let mut best_val = required;
    let (lam_top, val_top) = solve_at(cap_hi)?;
    if cap_hi * val_top <= tau * (1.0 + 1e-9) {
        if val_top < best_val {
            best_lam = lam_top;
        }
    } else {
        let (mut lo, mut hi) = (1.0, cap_hi);
        for _ in 0..CAP_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let (lam_mid, val_mid) = solve_at(mid)?;
            if mid * val_mid <= tau * (1.0 + 1e-9) {
                lo = mid;
                if val_mid < best_val {
                    best_lam = lam_mid;
                    best_val = val_mid;
                }
            } else {
                hi = mid;
            }
        }
    }

    let weights = DesignWeights::new(best_lam)?;
    let value = beta * rho(&weights, stream, arms, theta_star, round_eps)?;
    let mut probs = Vec::with_capacity(stream.len());
    for (lam_i, nu_i) in weights.as_slice().iter().zip(nu) {
        let p = if *nu_i > 0.0 { value * lam_i / (tau * nu_i) } else { 0.0 };
        if p > 1.0 + 1e-6 {
            return Err(Error::InternalConsistency(format!(
                "design query probability {p} exceeds 1"
            )));
        }
        probs.push(p.clamp(0.0, 1.0));
    }
    let cost = tau * probs.iter().zip(nu).map(|(p, w)| p * w).sum::<f64>();
    Ok(OracleDesign {
        probs,
        cost,
        weights,
    })
}

/// [`oracle_design_over`] on an instance's own stream, arms, and parameter.
pub fn oracle_design(
    instance: &Instance,
    round_eps: f64,
    tau: f64,
    beta: f64,
) -> Result<OracleDesign> {
    oracle_design_over(
        instance.stream_points(),
        instance.stream_probs(),
        instance.arms(),
        instance.theta_star(),
        round_eps,
        tau,
        beta,
    )
}

/// Solves the reparameterized weight program over an explicit support:
/// `min beta * rho(lambda)` subject to `||lambda/nu||_inf * beta *
/// rho(lambda) <= tau` on the simplex.
///
/// Found by bisection on the program value `v`: `v` is attainable exactly
/// when the cap-`tau/v` simplex admits weights with `beta * rho <= v`, and
/// that test is monotone in `v`. Returns the minimizing weights and their
/// exact objective, which matches the budgeted design cost.
pub fn reparam_program_over(
    stream: &[DVector<f64>],
    nu: &[f64],
    arms: &[DVector<f64>],
    theta_star: &DVector<f64>,
    tau: f64,
    beta: f64,
    eps: f64,
) -> Result<(DesignWeights, f64)> {
    validate_budget(tau, beta)?;
    let nu_weights = DesignWeights::new(nu.to_vec())?;
    let rho_nu = rho(&nu_weights, stream, arms, theta_star, eps)?;
    let required = beta * rho_nu;
    if tau < required {
        return Err(Error::InfeasibleBudget { tau, required });
    }
    if rho_nu == 0.0 {
        return Ok((nu_weights, 0.0));
    }
    let gd = gap_diffs(arms, theta_star, eps)?;

    let ones = vec![1.0; stream.len()];
    let (lam_free, _) = min_rho_capped(stream, &gd.diffs, &ones)?;
    let free_weights = DesignWeights::new(lam_free)?;
    let v_free = beta * rho(&free_weights, stream, arms, theta_star, eps)?;

    // Does some weight vector under density cap tau/v reach value v?
    let attempt = |v: f64| -> Result<Option<Vec<f64>>> {
        let ratio = tau / v;
        let caps: Vec<f64> = nu.iter().map(|p| ratio * p).collect();
        let (lam, val) = min_rho_capped(stream, &gd.diffs, &caps)?;
        if beta * val <= v * (1.0 + 1e-9) {
            Ok(Some(lam))
        } else {
            Ok(None)
        }
    };

    let mut best = nu.to_vec();
    let (mut lo, mut hi) = (v_free * (1.0 - 1e-9), required);
    if let Some(lam) = attempt(lo.max(f64::MIN_POSITIVE))? {
        best = lam;
    } else {
        for _ in 0..60 {
            if hi - lo <= 1e-7 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match attempt(mid)? {
                Some(lam) => {
                    hi = mid;
                    best = lam;
                }
                None => lo = mid,
            }
        }
    }

    let weights = DesignWeights::new(best)?;
    let value = beta * rho(&weights, stream, arms, theta_star, eps)?;
    Ok((weights, value))
}

/// [`reparam_program_over`] on an instance's own stream, arms, and parameter.
pub fn reparam_program(
    instance: &Instance,
    tau: f64,
    beta: f64,
    eps: f64,
) -> Result<(DesignWeights, f64)> {
    reparam_program_over(
        instance.stream_points(),
        instance.stream_probs(),
        instance.arms(),
        instance.theta_star(),
        tau,
        beta,
        eps,
    )
}

/// Per-round coverage radius `c` with `c^2 = tau * eps^2 / beta`.
pub fn round_radius(tau: f64, eps_ell: f64, beta_ell: f64) -> Result<f64> {
    for (name, v) in [("budget", tau), ("accuracy", eps_ell), ("confidence constant", beta_ell)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    Ok((tau * eps_ell * eps_ell / beta_ell).sqrt())
}

/// Smallest eigenvalue of the symmetric-vectorized fourth moment
/// `E_nu[svec(XX^T) svec(XX^T)^T]`, a curvature diagnostic for the dual
/// ascent solvers.
pub fn fourth_moment_min_eig(points: &[DVector<f64>], probs: &[f64]) -> Result<f64> {
    if points.is_empty() || points.len() != probs.len() {
        return Err(Error::InvalidInput(
            "stream support and probabilities must be non-empty and aligned".into(),
        ));
    }
    let d = points[0].len();
    let vec_dim = d * (d + 1) / 2;
    let sqrt2 = 2.0f64.sqrt();
    let mut fourth = SymMatrix::zeros(vec_dim);
    for (x, w) in points.iter().zip(probs) {
        let mut svec = DVector::zeros(vec_dim);
        let mut k = 0;
        for i in 0..d {
            for j in 0..=i {
                svec[k] = if i == j { x[i] * x[i] } else { sqrt2 * x[i] * x[j] };
                k += 1;
            }
        }
        fourth.axpy_outer(*w, &svec);
    }
    Ok(fourth.min_eigenvalue())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> (Vec<DVector<f64>>, Vec<DVector<f64>>, DVector<f64>) {
        let pts = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
        ];
        (pts.clone(), pts, DVector::from_vec(vec![1.0, 0.0]))
    }

    #[test]
    fn rho_on_uniform_two_point_is_four() {
        let (stream, arms, theta) = two_point();
        let w = DesignWeights::uniform(2).unwrap();
        let r = rho(&w, &stream, &arms, &theta, 0.0).unwrap();
        assert!((r - 4.0).abs() < 1e-9);
    }

    #[test]
    fn rho_floor_caps_denominator() {
        let (stream, arms, theta) = two_point();
        let w = DesignWeights::uniform(2).unwrap();
        let r = rho(&w, &stream, &arms, &theta, 2.0).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_arm_rho_is_zero() {
        let (stream, _, theta) = two_point();
        let arms = vec![DVector::from_vec(vec![1.0, 0.0])];
        let w = DesignWeights::uniform(2).unwrap();
        assert_eq!(rho(&w, &stream, &arms, &theta, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn tight_budget_returns_full_querying() {
        let (stream, arms, theta) = two_point();
        let nu = [0.5, 0.5];
        let beta = 10.0;
        // Exactly the feasibility threshold tau = rho(nu) * beta.
        let tau = 4.0 * beta;
        let d = oracle_design_over(&stream, &nu, &arms, &theta, 0.0, tau, beta).unwrap();
        assert!(d.cost <= tau * (1.0 + 1e-6));
        assert!(d.probs.iter().all(|p| *p > 0.9));
    }

    #[test]
    fn infeasible_budget_reports_requirement() {
        let (stream, arms, theta) = two_point();
        let nu = [0.5, 0.5];
        let err = oracle_design_over(&stream, &nu, &arms, &theta, 0.0, 1.0, 10.0).unwrap_err();
        match err {
            Error::InfeasibleBudget { tau, required } => {
                assert_eq!(tau, 1.0);
                assert!((required - 40.0).abs() < 1e-6);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
