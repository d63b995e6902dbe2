//! Inner semidefinite programs used by the design solvers.
//!
//! Two mutually dual programs are solved here, both over the direction set
//! `Y` with `S = sum_y y y^T`:
//!
//! * share assignment: split a PSD matrix `L` into PSD shares `L_y` with
//!   `sum_y L_y = L`, maximizing `sum_y y^T L_y y` (its optimum is `f(L)`);
//! * the cover dual: `min <Gamma, L>` over `Gamma >= y y^T` for every
//!   direction with the norm cap `||Gamma||_F <= 2 ||S||_F`, whose optimum
//!   equals `f(L)` by strong duality whenever the cap is slack and whose
//!   minimizer is then a supergradient of `f` at `L`. The cap keeps the
//!   supergradients bounded; `S` sits strictly inside every constraint, so
//!   the program has an interior regardless of how the directions overlap.
//!
//! Both are solved by first-order operator splitting with spectral
//! projections; matrices are tiny (d up to ~20), so full eigendecompositions
//! per step are cheap. Splitting penalties are tied to `||L||_F / ||S||_F`,
//! which makes the iterate trajectory exactly covariant under `L -> s L` and
//! hence preserves the scaling identity `f(s L) = s f(L)` to rounding error.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{psd_project, SymMatrix};

const MAX_SPLIT_ITERS: usize = 20_000;
// Splitting residuals only need to sit well below the 1e-6-scaled duality-gap
// certificate; demanding much more stalls on near-degenerate inputs.
const SPLIT_RTOL: f64 = 1e-8;

/// Tolerance on the primal-dual gap of the share-assignment program.
pub fn sdp_gap_tol(objective: f64) -> f64 {
    1e-6 * (1.0 + objective.abs())
}

fn direction_outers(directions: &[DVector<f64>]) -> Result<(Vec<SymMatrix>, SymMatrix)> {
    if directions.is_empty() {
        return Err(Error::InvalidInput("empty direction set".into()));
    }
    let dim = directions[0].len();
    let mut outers = Vec::with_capacity(directions.len());
    let mut sum = SymMatrix::zeros(dim);
    for y in directions {
        if y.len() != dim {
            return Err(Error::InvalidInput(
                "directions have mixed dimensions".into(),
            ));
        }
        let outer = SymMatrix::outer(y);
        sum.axpy(1.0, &outer);
        outers.push(outer);
    }
    Ok((outers, sum))
}

/// Projection onto `{X : X >= floor}` (spectral clip of `X - floor`).
fn project_above(x: &SymMatrix, floor: &SymMatrix) -> SymMatrix {
    let mut shifted = x.clone();
    shifted.axpy(-1.0, floor);
    let mut out = psd_project(&shifted);
    out.axpy(1.0, floor);
    out
}

/// Projection onto the Frobenius ball `{X : ||X||_F <= radius}`.
fn project_ball(x: &SymMatrix, radius: f64) -> SymMatrix {
    let norm = x.frob_norm();
    let mut out = x.clone();
    if norm > radius {
        out.scale(radius / norm);
    }
    out
}

/// Iterative solver for the cover dual program `min <Gamma, L>` subject to
/// `Gamma >= y y^T` for every direction and `||Gamma||_F <= 2 ||S||_F`.
///
/// The splitting state persists across [`CoverDualSolver::solve`] calls, so
/// repeated solves at slowly moving `L` warm start and converge in a handful
/// of sweeps.
pub struct CoverDualSolver {
    floors: Vec<SymMatrix>,
    /// `S`, feasible for every constraint; the cold-start point.
    start: SymMatrix,
    radius: f64,
    scale: f64,
    copies: Vec<SymMatrix>,
    duals: Vec<SymMatrix>,
}

impl CoverDualSolver {
    pub fn new(directions: &[DVector<f64>]) -> Result<Self> {
        let (floors, sum) = direction_outers(directions)?;
        let scale = sum.frob_norm();
        if scale == 0.0 {
            return Err(Error::InvalidInput("all directions are zero".into()));
        }
        // One copy per floor constraint plus one for the norm cap.
        let copies = vec![sum.clone(); floors.len() + 1];
        let duals = vec![SymMatrix::zeros(sum.dim()); floors.len() + 1];
        Ok(Self {
            floors,
            start: sum,
            radius: 2.0 * scale,
            scale,
            copies,
            duals,
        })
    }

    /// Optimal value (`= f(lambda)`) and minimizer of the cover dual.
    ///
    /// The first attempt continues from the previous call's splitting state
    /// (the warm path used by the subgradient ascent); if it stalls, the
    /// solver restarts cold over a ladder of splitting penalties.
    pub fn solve(&mut self, lambda: &SymMatrix) -> Result<(f64, SymMatrix)> {
        let dim = self.start.dim();
        if lambda.dim() != dim {
            return Err(Error::InvalidInput(format!(
                "matrix dimension {} does not match direction dimension {dim}",
                lambda.dim()
            )));
        }
        let lam_norm = lambda.frob_norm();
        if lam_norm == 0.0 {
            // Any feasible point is optimal with value 0; S is feasible.
            return Ok((0.0, self.start.clone()));
        }
        let base_rho = lam_norm / self.scale;

        let mut last_err = None;
        for (boost, iters) in [
            (1.0, MAX_SPLIT_ITERS),
            (10.0, MAX_SPLIT_ITERS),
            (0.1, MAX_SPLIT_ITERS),
            (100.0, 3 * MAX_SPLIT_ITERS),
            (0.01, 3 * MAX_SPLIT_ITERS),
        ] {
            if boost != 1.0 {
                // Dual variables are penalty-scaled; a new penalty needs a
                // cold start from the feasible point S.
                self.copies = vec![self.start.clone(); self.floors.len() + 1];
                self.duals = vec![SymMatrix::zeros(dim); self.floors.len() + 1];
            }
            match self.run_splitting(lambda, base_rho * boost, iters) {
                Ok(gamma) => {
                    // Polish onto the cap so the norm bound of a feasible
                    // point holds exactly.
                    let gamma = project_ball(&gamma, self.radius);
                    return Ok((gamma.frob_inner(lambda), gamma));
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("penalty ladder is non-empty"))
    }

    fn run_splitting(
        &mut self,
        lambda: &SymMatrix,
        rho0: f64,
        max_iters: usize,
    ) -> Result<SymMatrix> {
        let dim = self.start.dim();
        let m = self.copies.len();
        let mut rho = rho0;
        // Offset applied in every consensus step: L / (rho * m), precomputed.
        let mut offset = lambda.clone();
        offset.scale(1.0 / (rho * m as f64));
        let tol = SPLIT_RTOL * (1.0 + 2.0 * self.scale);

        let mut gamma;
        let mut residual = f64::INFINITY;
        for iter in 0..max_iters {
            // Consensus step: mean of (copy - dual) minus the objective pull.
            gamma = SymMatrix::zeros(dim);
            for (z, u) in self.copies.iter().zip(&self.duals) {
                gamma.axpy(1.0, z);
                gamma.axpy(-1.0, u);
            }
            gamma.scale(1.0 / m as f64);
            gamma.axpy(-1.0, &offset);

            // Constraint steps, one spectral projection per constraint.
            let mut primal_res: f64 = 0.0;
            let mut shift: f64 = 0.0;
            for (j, (z, u)) in self.copies.iter_mut().zip(&mut self.duals).enumerate() {
                let mut target = gamma.clone();
                target.axpy(1.0, u);
                let new_z = if j < self.floors.len() {
                    project_above(&target, &self.floors[j])
                } else {
                    project_ball(&target, self.radius)
                };
                let mut dz = new_z.clone();
                dz.axpy(-1.0, z);
                shift = shift.max(dz.frob_norm());
                *z = new_z;
                let mut r = gamma.clone();
                r.axpy(-1.0, z);
                u.axpy(1.0, &r);
                primal_res = primal_res.max(r.frob_norm());
            }

            if primal_res <= tol && shift <= tol {
                return Ok(gamma);
            }
            if std::env::var("SHARES_TRACE").is_ok() && iter % 500 == 0 {
                eprintln!(
                    "iter={iter} rho={:.3e} primal={primal_res:.3e} shift={shift:.3e} val={:.9}",
                    rho,
                    gamma.frob_inner(lambda)
                );
            }
            residual = primal_res.max(shift);
            if let Some(factor) = penalty_rebalance(iter, primal_res, shift, rho / rho0) {
                rho *= factor;
                for u in &mut self.duals {
                    u.scale(1.0 / factor);
                }
                offset = lambda.clone();
                offset.scale(1.0 / (rho * m as f64));
            }
        }
        Err(Error::InnerSolver {
            context: "cover dual program",
            residual,
            tolerance: tol,
        })
    }
}

/// Residual-balancing penalty update for the splitting loops: when one
/// residual dominates the other by a decade, move the penalty to re-balance
/// them (doubling shrinks the primal residual, halving shrinks the dual one),
/// rescaling the scaled dual variables inversely. Checked every fourth sweep
/// within an eight-decade band so the penalty cannot oscillate or run away;
/// all inputs are invariant under rescaling the objective matrix, which keeps
/// the iterate trajectory exactly covariant.
fn penalty_rebalance(iter: usize, primal_res: f64, shift: f64, ratio: f64) -> Option<f64> {
    if std::env::var("SHARES_NO_REBALANCE").is_ok() {
        return None;
    }
    if iter % 4 != 3 {
        return None;
    }
    if primal_res > 10.0 * shift && ratio < 1e8 {
        Some(2.0)
    } else if shift > 10.0 * primal_res && ratio > 1e-8 {
        Some(0.5)
    } else {
        None
    }
}

/// Optimal value and minimizer of the cover dual program at `lambda`.
///
/// Cold-start wrapper around [`CoverDualSolver`]; the minimizer is a
/// supergradient of the share-assignment optimum `f` wherever the norm cap
/// `||Gamma||_F <= 2 ||S||_F` is slack, and the value satisfies
/// `f(s * lambda) = s * f(lambda)` covariance for `s >= 0`. When the cap
/// binds the value can exceed `f(lambda)`; [`assign_dual_shares`] certifies
/// against the uncapped dual instead.
pub fn f_dual_value(
    lambda: &SymMatrix,
    directions: &[DVector<f64>],
) -> Result<(f64, SymMatrix)> {
    if !lambda.is_psd() {
        return Err(Error::InvalidInput(
            "cover dual requires a positive semidefinite matrix".into(),
        ));
    }
    CoverDualSolver::new(directions)?.solve(lambda)
}

/// Upper bound on the exact Lagrange dual of the share-assignment program:
/// `inf <Gamma, lambda>` subject to `Gamma >= y y^T` for every direction,
/// with no norm cap. Strong duality makes the infimum equal `f(lambda)`.
///
/// For singular `lambda` the infimum need not be attained (minimizing
/// sequences escape along the kernel), so no iterate-convergence test can be
/// required. Instead the splitting tracks the best value over feasible
/// pushes of its consensus iterate; every such value is a sound bound, and
/// the caller's duality-gap check decides whether it is tight enough.
fn floor_dual_value(lambda: &SymMatrix, outers: &[SymMatrix], scale: f64) -> Result<f64> {
    let lam_norm = lambda.frob_norm();
    if lam_norm == 0.0 {
        return Ok(0.0);
    }
    let base_rho = lam_norm / scale;
    let mut best = f64::INFINITY;
    for (boost, iters) in [
        (1.0, MAX_SPLIT_ITERS),
        (10.0, MAX_SPLIT_ITERS),
        (0.1, MAX_SPLIT_ITERS),
    ] {
        let (value, converged) =
            floor_dual_splitting(lambda, outers, scale, base_rho * boost, iters);
        best = best.min(value);
        if converged {
            break;
        }
    }
    Ok(best)
}

fn floor_dual_splitting(
    lambda: &SymMatrix,
    outers: &[SymMatrix],
    scale: f64,
    rho0: f64,
    max_iters: usize,
) -> (f64, bool) {
    let dim = lambda.dim();
    let m = outers.len();
    let mut rho = rho0;
    let mut offset = lambda.clone();
    offset.scale(1.0 / (rho * m as f64));
    let tol = SPLIT_RTOL * (1.0 + 2.0 * scale);
    // Pushing the consensus iterate feasible gives `<Gamma, lambda>` bounds
    // along the way; feasibility makes each one sound on its own.
    let probe_value = |gamma: &SymMatrix| -> f64 {
        let mut feasible = gamma.clone();
        for outer in outers {
            feasible = project_above(&feasible, outer);
        }
        feasible.frob_inner(lambda)
    };

    let mut start = SymMatrix::zeros(dim);
    for outer in outers {
        start.axpy(1.0, outer);
    }
    let mut best = start.frob_inner(lambda);
    let mut last_probe = best;
    let mut copies = vec![start; m];
    let mut duals = vec![SymMatrix::zeros(dim); m];
    let mut gamma = SymMatrix::zeros(dim);
    for iter in 0..max_iters {
        gamma = SymMatrix::zeros(dim);
        for (z, u) in copies.iter().zip(&duals) {
            gamma.axpy(1.0, z);
            gamma.axpy(-1.0, u);
        }
        gamma.scale(1.0 / m as f64);
        gamma.axpy(-1.0, &offset);

        let mut primal_res: f64 = 0.0;
        let mut shift: f64 = 0.0;
        for (j, (z, u)) in copies.iter_mut().zip(&mut duals).enumerate() {
            let mut target = gamma.clone();
            target.axpy(1.0, u);
            let new_z = project_above(&target, &outers[j]);
            let mut dz = new_z.clone();
            dz.axpy(-1.0, z);
            shift = shift.max(dz.frob_norm());
            *z = new_z;
            let mut r = gamma.clone();
            r.axpy(-1.0, z);
            u.axpy(1.0, &r);
            primal_res = primal_res.max(r.frob_norm());
        }
        if primal_res <= tol && shift <= tol {
            return (best.min(probe_value(&gamma)), true);
        }
        if iter % 50 == 49 {
            let value = probe_value(&gamma);
            best = best.min(value);
            // Two probes in a row without movement: more sweeps cannot
            // sharpen the bound at this penalty.
            if (last_probe - value).abs() <= 1e-10 * (1.0 + value.abs()) {
                return (best, true);
            }
            last_probe = value;
        }
        if let Some(factor) = penalty_rebalance(iter, primal_res, shift, rho / rho0) {
            rho *= factor;
            for u in &mut duals {
                u.scale(1.0 / factor);
            }
            offset = lambda.clone();
            offset.scale(1.0 / (rho * m as f64));
        }
    }
    (best.min(probe_value(&gamma)), false)
}

/// Splits `lambda_hat` into PSD shares, one per direction, summing exactly to
/// `lambda_hat` and maximizing `sum_y y^T L_y y`.
///
/// The returned shares satisfy `||sum_y L_y - lambda_hat||_F <= 1e-8 *
/// ||lambda_hat||_F` and their objective is within [`sdp_gap_tol`] of the
/// cover dual value, which certifies near-optimality by strong duality.
///
/// Every feasible share has its range inside the range of `lambda_hat`, so
/// the program is solved after the substitution `L_y = R M_y R^T` with
/// `R R^T = lambda_hat`: the coupling becomes `sum_y M_y = I` on the range,
/// which keeps the splitting well conditioned even when `lambda_hat` is
/// nearly singular, and the directions map to `w_y = R^T y`.
pub fn assign_dual_shares(
    lambda_hat: &SymMatrix,
    directions: &[DVector<f64>],
) -> Result<Vec<SymMatrix>> {
    let (_, sum) = direction_outers(directions)?;
    let dim = lambda_hat.dim();
    if dim != sum.dim() {
        return Err(Error::InvalidInput(format!(
            "matrix dimension {dim} does not match direction dimension {}",
            sum.dim()
        )));
    }
    if !lambda_hat.is_psd() {
        return Err(Error::InvalidInput(
            "share assignment requires a positive semidefinite matrix".into(),
        ));
    }
    let m = directions.len();
    let hat_norm = lambda_hat.frob_norm();
    if hat_norm == 0.0 {
        return Ok(vec![SymMatrix::zeros(dim); m]);
    }
    if m == 1 {
        // The coupling constraint pins the single share.
        return Ok(vec![lambda_hat.clone()]);
    }

    // Factor lambda_hat = R R^T through its spectral decomposition, dropping
    // the numerically zero part of the spectrum; the dropped part is folded
    // back into the shares by the final rebalancing below.
    let (vals, vecs) = lambda_hat.eigh();
    let lam_max = vals.iter().fold(0.0_f64, |a, &b| a.max(b));
    let kept: Vec<usize> = (0..vals.len())
        .filter(|&i| vals[i] > 1e-14 * lam_max)
        .collect();
    let rank = kept.len();
    let factor = DMatrix::from_fn(dim, rank, |i, k| vecs[(i, kept[k])] * vals[kept[k]].sqrt());
    let reduced: Vec<DVector<f64>> = directions.iter().map(|y| factor.transpose() * y).collect();
    let w_outers: Vec<SymMatrix> = reduced.iter().map(SymMatrix::outer).collect();
    let mut w_sum = SymMatrix::zeros(rank);
    for outer in &w_outers {
        w_sum.axpy(1.0, outer);
    }
    let eye = SymMatrix::identity(rank);
    let expand = |small: &SymMatrix| {
        let dense = &factor * small.to_dense() * factor.transpose();
        SymMatrix::from_dense(&dense)
    };
    if w_sum.frob_norm() == 0.0 {
        // Every direction is orthogonal to the range, so all assignments
        // score zero and an even split is optimal.
        let mut share = lambda_hat.clone();
        share.scale(1.0 / m as f64);
        return Ok(vec![share; m]);
    }

    // The splitting penalty controls the convergence basin; overlapping
    // directions can stall one penalty while another converges, so sweep a
    // few scales and keep the best objective found.
    let dual_opt = floor_dual_value(&eye, &w_outers, w_sum.frob_norm())?;
    let gap_tol = sdp_gap_tol(dual_opt);
    let base_rho = w_sum.frob_norm() / eye.frob_norm();
    let mut best: Option<(f64, Vec<SymMatrix>)> = None;
    for (scale, iters) in [
        (1.0, MAX_SPLIT_ITERS),
        (10.0, MAX_SPLIT_ITERS),
        (0.1, MAX_SPLIT_ITERS),
        (100.0, 3 * MAX_SPLIT_ITERS),
        (0.01, 3 * MAX_SPLIT_ITERS),
    ] {
        let Ok(parts) = split_shares(&eye, &w_outers, base_rho * scale, iters) else {
            continue;
        };
        let objective: f64 = parts
            .iter()
            .zip(&w_outers)
            .map(|(part, outer)| part.frob_inner(outer))
            .sum();
        if best.as_ref().is_none_or(|(obj, _)| objective > *obj) {
            best = Some((objective, parts));
        }
        if (objective - dual_opt).abs() <= gap_tol {
            break;
        }
    }
    let parts = match best {
        Some((objective, parts)) if (objective - dual_opt).abs() <= gap_tol => parts,
        Some((objective, _)) => {
            return Err(Error::InnerSolver {
                context: "share-assignment duality gap",
                residual: (objective - dual_opt).abs(),
                tolerance: gap_tol,
            });
        }
        None => {
            return Err(Error::InnerSolver {
                context: "share-assignment program",
                residual: f64::INFINITY,
                tolerance: SPLIT_RTOL * (1.0 + hat_norm),
            });
        }
    };

    // Map back to the full space and absorb the dropped spectrum plus mapping
    // round-off so the shares sum to lambda_hat exactly.
    let mut shares: Vec<SymMatrix> = parts.iter().map(expand).collect();
    let mut residual = SymMatrix::zeros(dim);
    residual.axpy(-1.0, lambda_hat);
    for share in &shares {
        residual.axpy(1.0, share);
    }
    residual.scale(1.0 / m as f64);
    for share in &mut shares {
        share.axpy(-1.0, &residual);
        *share = psd_project(share);
    }
    let mut final_residual = SymMatrix::zeros(dim);
    final_residual.axpy(-1.0, lambda_hat);
    for share in &shares {
        final_residual.axpy(1.0, share);
    }
    let sum_residual = final_residual.frob_norm();
    if sum_residual > 1e-8 * hat_norm {
        return Err(Error::InnerSolver {
            context: "share-assignment coupling residual",
            residual: sum_residual,
            tolerance: 1e-8 * hat_norm,
        });
    }
    Ok(shares)
}

/// One splitting run for the share-assignment program at a fixed penalty.
fn split_shares(
    lambda_hat: &SymMatrix,
    outers: &[SymMatrix],
    rho0: f64,
    max_iters: usize,
) -> Result<Vec<SymMatrix>> {
    let dim = lambda_hat.dim();
    let m = outers.len();
    let mut rho = rho0;
    let hat_norm = lambda_hat.frob_norm();
    let tol = SPLIT_RTOL * (1.0 + hat_norm);
    let mut shares = vec![{
        let mut s = lambda_hat.clone();
        s.scale(1.0 / m as f64);
        s
    }; m];
    let mut copies = shares.clone();
    let mut duals = vec![SymMatrix::zeros(dim); m];

    for iter in 0..max_iters {
        // Objective + coupling step: unconstrained maximizer per share, then
        // an exact projection onto {sum_y L_y = lambda_hat}.
        let mut correction = SymMatrix::zeros(dim);
        correction.axpy(-1.0, lambda_hat);
        for ((share, z), (u, outer)) in shares
            .iter_mut()
            .zip(&copies)
            .zip(duals.iter().zip(outers))
        {
            *share = z.clone();
            share.axpy(-1.0, u);
            share.axpy(1.0 / rho, outer);
            correction.axpy(1.0, share);
        }
        correction.scale(1.0 / m as f64);
        for share in &mut shares {
            share.axpy(-1.0, &correction);
        }

        // Cone step plus dual update.
        let mut primal_res: f64 = 0.0;
        let mut shift: f64 = 0.0;
        for ((share, z), u) in shares.iter().zip(&mut copies).zip(&mut duals) {
            let mut target = share.clone();
            target.axpy(1.0, u);
            let new_z = psd_project(&target);
            let mut dz = new_z.clone();
            dz.axpy(-1.0, z);
            shift = shift.max(dz.frob_norm());
            *z = new_z;
            let mut r = share.clone();
            r.axpy(-1.0, z);
            u.axpy(1.0, &r);
            primal_res = primal_res.max(r.frob_norm());
        }

        if primal_res <= tol && shift <= tol {
            break;
        }
        if iter + 1 == max_iters {
            return Err(Error::InnerSolver {
                context: "share-assignment program",
                residual: primal_res.max(shift),
                tolerance: tol,
            });
        }
        if let Some(factor) = penalty_rebalance(iter, primal_res, shift, rho / rho0) {
            rho *= factor;
            for u in &mut duals {
                u.scale(1.0 / factor);
            }
        }
    }

    // Clip the tiny negative tails left by splitting, re-balance so the shares
    // sum back to lambda_hat, then clip once more: the second clip touches at
    // most the rebalancing shift, so the final sum error stays within the
    // coupling tolerance while every returned share is semidefinite.
    let mut shares: Vec<SymMatrix> = shares.iter().map(psd_project).collect();
    let mut residual = SymMatrix::zeros(dim);
    residual.axpy(-1.0, lambda_hat);
    for share in &shares {
        residual.axpy(1.0, share);
    }
    residual.scale(1.0 / m as f64);
    for share in &mut shares {
        share.axpy(-1.0, &residual);
        *share = psd_project(share);
    }
    let mut final_residual = SymMatrix::zeros(dim);
    final_residual.axpy(-1.0, lambda_hat);
    for share in &shares {
        final_residual.axpy(1.0, share);
    }
    let sum_residual = final_residual.frob_norm();
    if sum_residual > 1e-8 * hat_norm {
        return Err(Error::InnerSolver {
            context: "share-assignment coupling residual",
            residual: sum_residual,
            tolerance: 1e-8 * hat_norm,
        });
    }
    Ok(shares)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_direction_share_is_whole_matrix() {
        let dirs = vec![DVector::from_vec(vec![1.0, 0.0])];
        let lam = SymMatrix::identity(2);
        let shares = assign_dual_shares(&lam, &dirs).unwrap();
        assert_eq!(shares.len(), 1);
        let mut diff = shares[0].clone();
        diff.axpy(-1.0, &lam);
        assert!(diff.frob_norm() < 1e-12);
    }

    #[test]
    fn cover_dual_single_direction_identity() {
        let dirs = vec![DVector::from_vec(vec![1.0, 0.0])];
        let (f, gamma) = f_dual_value(&SymMatrix::identity(2), &dirs).unwrap();
        assert!((f - 1.0).abs() < 1e-6);
        assert!(gamma.frob_norm() <= 2.0 * 1.0 + 1e-6);
    }

    #[test]
    fn zero_matrix_gives_zero_value() {
        let dirs = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
        ];
        let (f, _) = f_dual_value(&SymMatrix::zeros(2), &dirs).unwrap();
        assert_eq!(f, 0.0);
        let shares = assign_dual_shares(&SymMatrix::zeros(2), &dirs).unwrap();
        assert!(shares.iter().all(|s| s.frob_norm() == 0.0));
    }
}
