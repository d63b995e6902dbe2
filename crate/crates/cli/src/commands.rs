//! The four CLI commands: label-complexity sweep, design dump, trade-off
//! curves, and the classification-bound demo.
//!
//! Each command is a pure function of (config, seed): every random stream is
//! derived from the config seed, parallel work is assembled in a fixed order,
//! and files are rendered to buffers before a single write.

use std::path::Path;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use stream_bai_core::bounds::{
    disagreement_coefficient, lower_bound_label_curve, lower_bound_unlabeled, rho_pi,
    upper_bound_label_curve, classification_label_bound, LogForm,
};
use stream_bai_core::design::{
    optimize_design_sga, oracle_design, round_radius, DesignWeights, StreamAverage,
};
use stream_bai_core::estimators::{beta_constant, BetaVariant};
use stream_bai_core::instance::ClassificationInstance;
use stream_bai_core::sampler::{label_complexity_sweep, SweepRow};

use crate::config::ExperimentConfig;
use crate::output::{ensure_dir, fmt_f64, write_json, CsvFile};
use crate::{CliError, CliResult};

/// Stream-seed tag for the design-dump solver, keeping its draws disjoint
/// from the sweep cells derived from the same master seed.
const DUMP_SEED_TAG: u64 = 0xD1B5_4A32_D192_ED03;

fn echo_config(config: &ExperimentConfig, out_dir: &Path) -> CliResult<()> {
    write_json(&out_dir.join("config.json"), config)
}

/// Runs the full (tau, mode) sweep and writes `sweep.csv` plus the config
/// echo. Cell-level failures become stderr warnings and `nan`/`inf` fields;
/// the command only fails when no cell produced a run.
pub fn cmd_sweep(config: &ExperimentConfig, out_dir: &Path) -> CliResult<()> {
    let out_dir = ensure_dir(out_dir)?;
    echo_config(config, &out_dir)?;
    let instance = config.resolve_instance()?;
    let params = config.solver_params();
    let rows = label_complexity_sweep(
        &instance,
        &config.tau_grid,
        config.delta,
        &config.modes,
        config.trials,
        &params,
        config.seed,
    )?;

    let mut csv = CsvFile::new(&[
        "tau",
        "mode",
        "trials",
        "mean_labels",
        "std_labels",
        "mean_unlabeled",
        "success_rate",
        "mean_rounds",
    ])?;
    for row in &rows {
        if let Some(err) = &row.error {
            eprintln!("warning: tau={} mode={}: {err}", row.tau, row.mode);
        }
        csv.write_row([
            row.tau.to_string(),
            row.mode.to_string(),
            row.trials.to_string(),
            fmt_f64(row.mean_labels),
            fmt_f64(row.std_labels),
            fmt_f64(row.mean_unlabeled),
            fmt_f64(row.success_rate),
            fmt_f64(row.mean_rounds),
        ])?;
    }
    csv.save(&out_dir.join("sweep.csv"))?;

    let all_failed = rows.iter().all(|r| !r.success_rate.is_finite());
    if all_failed {
        let first = first_error(&rows);
        if rows.iter().all(|r| r.success_rate.is_infinite()) {
            return Err(CliError::Infeasible(format!(
                "every sweep cell was over budget: {first}"
            )));
        }
        return Err(CliError::Failure(format!(
            "every sweep cell failed: {first}"
        )));
    }
    println!("sweep: {} rows -> {}", rows.len(), out_dir.join("sweep.csv").display());
    Ok(())
}

fn first_error(rows: &[SweepRow]) -> String {
    rows.iter()
        .find_map(|r| r.error.clone())
        .unwrap_or_else(|| "unknown failure".into())
}

/// Solves the query design at budget `tau` both exactly and with the
/// stochastic solver, and writes per-point probabilities to `design.csv`.
///
/// The target accuracy is the instance's final elimination scale
/// `2^-ceil(log2(4/gap))`, so the floored gaps equal the true gaps and the
/// dumped rule is the one that settles the hardest comparison. The learned
/// rule solves the same program through gap-normalized directions.
pub fn cmd_dump_design(config: &ExperimentConfig, tau: f64, out_dir: &Path) -> CliResult<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(CliError::Config(format!(
            "tau must be positive and finite, got {tau}"
        )));
    }
    let out_dir = ensure_dir(out_dir)?;
    echo_config(config, &out_dir)?;
    let instance = config.resolve_instance()?;
    let (best, gap) = instance.gap_and_best().map_err(CliError::from)?;
    if !gap.is_finite() {
        return Err(CliError::Config(
            "design dump needs an instance with at least two arms".into(),
        ));
    }

    let round = (4.0 / gap).log2().ceil().max(1.0);
    let eps = 0.5f64.powi(round as i32);
    let beta = beta_constant(
        BetaVariant::Round {
            round: round as usize,
        },
        instance.bound_b(),
        instance.noise_sigma(),
        instance.arms().len(),
        config.delta,
        1.0,
    )?;

    let exact = oracle_design(&instance, eps, tau, beta)?;

    // The stochastic route: coverage constraints on gap-normalized
    // differences reproduce the floored-gap accuracy program.
    let theta = instance.theta_star();
    let star = &instance.arms()[best];
    let directions: Vec<DVector<f64>> = instance
        .arms()
        .iter()
        .enumerate()
        .filter(|&(z, _)| z != best)
        .map(|(_, arm)| {
            let diff = star - arm;
            let gap_z = theta.dot(&diff);
            &diff * (eps / gap_z.max(eps))
        })
        .collect();
    let radius = round_radius(tau, eps, beta)?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed ^ DUMP_SEED_TAG);
    let (rule, certificate) = optimize_design_sga(
        &directions,
        radius,
        config.solver.mu_b,
        config.solver.k,
        config.solver.u,
        &StreamAverage::Exact {
            points: instance.stream_points(),
            probs: instance.stream_probs(),
        },
        &mut rng,
    )?;
    if certificate.max_violation > 1.0 + config.solver.epsilon_cert {
        // Expected whenever tau is far above the feasibility threshold: the
        // optimal query region then carries little stream mass and the
        // stochastic solver needs far more iterations than any desk-scale K.
        // The exact solution is in the p_oracle column either way.
        eprintln!(
            "warning: learned rule certificate {:.4} exceeds 1 + {} at K = {}; \
             increase K or tighten tau for a certified rule",
            certificate.max_violation, config.solver.epsilon_cert, config.solver.k
        );
    }

    let mut csv = CsvFile::new(&["index", "angle", "nu", "p_oracle", "p_learned"])?;
    let mut learned_cost = 0.0;
    for (i, (x, nu_i)) in instance
        .stream_points()
        .iter()
        .zip(instance.stream_probs())
        .enumerate()
    {
        let angle = if x.len() == 2 {
            let a = x[1].atan2(x[0]);
            if a < 0.0 {
                a + std::f64::consts::TAU
            } else {
                a
            }
        } else {
            f64::NAN
        };
        let p_learned = rule.prob(x);
        learned_cost += tau * nu_i * p_learned;
        csv.write_row([
            i.to_string(),
            fmt_f64(angle),
            fmt_f64(*nu_i),
            fmt_f64(exact.probs[i]),
            fmt_f64(p_learned),
        ])?;
    }
    csv.save(&out_dir.join("design.csv"))?;

    let rule_doc: serde_json::Value = serde_json::from_str(&rule.to_json_string())
        .map_err(|e| CliError::Failure(format!("rule encode: {e}")))?;
    let meta = serde_json::json!({
        "tau": tau,
        "round": round as usize,
        "eps": eps,
        "beta": beta,
        "radius_c": radius,
        "oracle_cost": exact.cost,
        "learned_cost": learned_cost,
        "certificate": certificate,
        "rule": rule_doc,
    });
    write_json(&out_dir.join("design_meta.json"), &meta)?;

    println!("oracle cost: {}", fmt_f64(exact.cost));
    println!("learned cost: {}", fmt_f64(learned_cost));
    println!("design: {} points -> {}", exact.probs.len(), out_dir.join("design.csv").display());
    Ok(())
}

/// Writes the feasible-pair curve: at each unlabeled budget, the label floor
/// any correct algorithm must pay and the elimination algorithm's matching
/// achievable value, both at the same confidence factor.
pub fn cmd_tradeoff(config: &ExperimentConfig, out_dir: &Path) -> CliResult<()> {
    let out_dir = ensure_dir(out_dir)?;
    echo_config(config, &out_dir)?;
    let instance = config.resolve_instance()?;
    let form = LogForm::ProofFaithful;
    let threshold = lower_bound_unlabeled(&instance, config.delta, form)?;
    if threshold <= 0.0 {
        return Err(CliError::Failure(
            "trade-off curve needs a positive unlabeled floor".into(),
        ));
    }

    // Geometric grid bracketing the critical budget, reaching the largest
    // configured stream budget.
    let lo = 0.6 * threshold;
    let hi = (*config.tau_grid.last().expect("validated non-empty") as f64).max(100.0 * threshold);
    let steps = 48usize;
    let ratio = (hi / lo).powf(1.0 / (steps - 1) as f64);
    let grid: Vec<f64> = (0..steps).map(|k| lo * ratio.powi(k as i32)).collect();

    let log_factor = form.log_factor(config.delta);
    let lower = lower_bound_label_curve(&instance, config.delta, &grid, form)?;
    let upper = upper_bound_label_curve(&instance, log_factor, &grid)?;

    let mut csv = CsvFile::new(&[
        "budget",
        "min_labels",
        "feasible",
        "witness_linf_ratio",
        "upper_labels",
    ])?;
    for (lo_pt, up_pt) in lower.iter().zip(&upper) {
        csv.write_row([
            fmt_f64(lo_pt.unlabeled_budget),
            fmt_f64(lo_pt.min_labels),
            lo_pt.feasible.to_string(),
            fmt_f64(lo_pt.witness_linf_ratio),
            fmt_f64(up_pt.min_labels),
        ])?;
    }
    csv.save(&out_dir.join("tradeoff.csv"))?;
    println!(
        "tradeoff: threshold {} over {} budgets -> {}",
        fmt_f64(threshold),
        grid.len(),
        out_dir.join("tradeoff.csv").display()
    );
    Ok(())
}

/// An 8-point threshold-class instance: increasing label noise, uniform
/// stream, Bayes split in the middle.
fn threshold_class_demo() -> CliResult<ClassificationInstance> {
    let m = 8usize;
    let points: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect();
    let hypotheses: Vec<Vec<i8>> = (0..=m)
        .map(|k| {
            let t = k as f64 / m as f64;
            points
                .iter()
                .map(|&x| if x >= t { 1i8 } else { -1 })
                .collect()
        })
        .collect();
    let eta: Vec<f64> = points.iter().map(|&x| 0.15 + 0.7 * x).collect();
    let uniform = vec![1.0 / m as f64; m];
    ClassificationInstance::new(points, hypotheses, eta, uniform.clone(), uniform)
        .map_err(CliError::from)
}

/// Tabulates both label bounds of the threshold-class demo across target
/// accuracies, at the smallest comfortably feasible stream budget for each.
pub fn cmd_classify_demo(config: &ExperimentConfig, out_dir: &Path) -> CliResult<()> {
    let out_dir = ensure_dir(out_dir)?;
    echo_config(config, &out_dir)?;
    let ci = threshold_class_demo()?;
    let num_h = ci.hypotheses().len();
    let star = ci.best_hypothesis()?;
    let best_risk = ci.risk(star);
    let nu = DesignWeights::new(ci.nu_probs().to_vec())?;

    let mut csv = CsvFile::new(&[
        "eps",
        "tau",
        "design_bound",
        "disagreement_bound",
        "coefficient",
        "best_risk",
    ])?;
    for eps in [0.8, 0.4, 0.2, 0.1, 0.05] {
        let beta = beta_constant(
            BetaVariant::Classification { eps },
            1.0,
            1.0,
            num_h,
            config.delta,
            1.0,
        )?;
        let required = 16.0 * rho_pi(&ci, &nu, eps)? * beta;
        let tau = 4.0 * required;
        let bound = classification_label_bound(&ci, eps, config.delta, tau)?;
        let coefficient = disagreement_coefficient(&ci, 2.0 * best_risk + eps)?;
        csv.write_row([
            fmt_f64(eps),
            fmt_f64(tau),
            fmt_f64(bound.design_form),
            fmt_f64(bound.disagreement_form),
            fmt_f64(coefficient),
            fmt_f64(best_risk),
        ])?;
    }
    csv.save(&out_dir.join("classify.csv"))?;
    println!("classify demo -> {}", out_dir.join("classify.csv").display());
    Ok(())
}

