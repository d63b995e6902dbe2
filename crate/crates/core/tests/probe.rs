//! Temporary diagnostics; delete before finalizing.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use stream_bai_core::design::{optimize_design_sga, oracle_design, round_radius, StreamAverage};
use stream_bai_core::estimators::{beta_constant, BetaVariant};
use stream_bai_core::instance::benchmark_instance;
use stream_bai_core::sampler::{label_complexity_sweep, SamplerMode, SolverParams};

#[test]
#[ignore]
fn probe_dump_closeness() {
    let inst = benchmark_instance();
    let (best, gap) = inst.gap_and_best().unwrap();
    let round = ((4.0 / gap).log2().ceil()).max(1.0) as usize;
    let eps = 0.5f64.powi(round as i32);
    let beta = beta_constant(
        BetaVariant::Round { round },
        inst.bound_b(),
        inst.noise_sigma(),
        inst.arms().len(),
        0.05,
        1.0,
    )
    .unwrap();
    let best_arm = inst.arms()[best].clone();
    let dirs: Vec<DVector<f64>> = inst
        .arms()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, z)| {
            let diff = &best_arm - z;
            let g = inst.theta_star().dot(&diff);
            &diff * (eps / g.max(eps))
        })
        .collect();
    for tau in [3.6e4, 4.0e4, 5.0e4, 6.0e4, 8.0e4] {
        let oracle = oracle_design(&inst, eps, tau, beta).unwrap();
        let c = round_radius(tau, eps, beta).unwrap();
        let stream = StreamAverage::Exact {
            points: inst.stream_points(),
            probs: inst.stream_probs(),
        };
        for k in [400_000usize, 1_600_000] {
            let mut rng = ChaCha12Rng::seed_from_u64(11);
            let (rule, cert) =
                optimize_design_sga(&dirs, c, 2e-5, k, 20_000, &stream, &mut rng).unwrap();
            let mut max_diff = 0.0f64;
            let mut max_idx = 0;
            for (i, x) in inst.stream_points().iter().enumerate() {
                let d = (rule.prob(x) - oracle.probs[i]).abs();
                if d > max_diff {
                    max_diff = d;
                    max_idx = i;
                }
            }
            println!(
                "tau={tau:.0} round={round} beta={beta:.1} c={c:.4} K={k}: viol={:.4} \
                 cost={:.5} dual={:.5} oracle_rate={:.5} maxdiff={max_diff:.4} at idx {max_idx} \
                 (p_o={:.4} p_l={:.4})",
                cert.max_violation,
                cert.primal_cost,
                cert.dual_value,
                oracle.cost / tau,
                oracle.probs[max_idx],
                rule.prob(&inst.stream_points()[max_idx]),
            );
        }
    }
}

#[test]
#[ignore]
fn probe_share_gap() {
    use rand::Rng;
    use stream_bai_core::design::{
        assign_dual_shares, dual_gradient, f_dual_value, DualState,
    };
    use stream_bai_core::linalg::{psd_project, SymMatrix};

    let inst = benchmark_instance();
    let (best, _) = inst.gap_and_best().unwrap();
    let eps = 0.5;
    let beta = beta_constant(
        BetaVariant::Round { round: 1 },
        inst.bound_b(),
        inst.noise_sigma(),
        inst.arms().len(),
        0.05,
        1.0,
    )
    .unwrap();
    let best_arm = inst.arms()[best].clone();
    let dirs: Vec<DVector<f64>> = inst
        .arms()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, z)| {
            let diff = &best_arm - z;
            let g = inst.theta_star().dot(&diff);
            &diff * (eps / g.max(eps))
        })
        .collect();
    let tau = 1.5 * 663.0;
    let c = round_radius(tau, eps, beta).unwrap();
    println!("dirs: {:?} {:?} c={c:.4}", dirs[0].as_slice(), dirs[1].as_slice());

    // Hand-rolled ascent to capture the averaged matrix.
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let cum: Vec<f64> = inst
        .stream_probs()
        .iter()
        .scan(0.0, |a, p| {
            *a += p;
            Some(*a)
        })
        .collect();
    let mut state = DualState::zeros(dirs.clone(), c).unwrap();
    let mut grad_sq = 0.0f64;
    let mut mean = vec![SymMatrix::zeros(2); dirs.len()];
    let k_total = 200_000usize;
    for k in 1..=k_total {
        let t: f64 = rng.random();
        let idx = cum.partition_point(|v| *v < t).min(29);
        let x = &inst.stream_points()[idx];
        let grads = dual_gradient(&state, 2e-5, x);
        grad_sq += grads.iter().map(|g| g.frob_norm().powi(2)).sum::<f64>();
        let eta = 1.0 / (2.0 * grad_sq).sqrt();
        let shares: Vec<SymMatrix> = state
            .shares()
            .iter()
            .zip(&grads)
            .map(|(s, g)| {
                let mut n = s.clone();
                n.axpy(eta, g);
                psd_project(&n)
            })
            .collect();
        state = DualState::with_shares(dirs.clone(), shares, c).unwrap();
        for (m, s) in mean.iter_mut().zip(state.shares()) {
            m.axpy(1.0 / k_total as f64, s);
        }
    }
    let mut hat = SymMatrix::zeros(2);
    for m in &mean {
        hat.axpy(1.0, m);
    }
    println!(
        "hat = [[{}, {}], [{}, {}]]",
        hat.get(0, 0),
        hat.get(0, 1),
        hat.get(1, 0),
        hat.get(1, 1)
    );
    let (dual_opt, gamma) = f_dual_value(&hat, &dirs).unwrap();
    println!(
        "cover dual value = {dual_opt:.9}, gamma = [[{}, {}], [.., {}]]",
        gamma.get(0, 0),
        gamma.get(0, 1),
        gamma.get(1, 1)
    );
    match assign_dual_shares(&hat, &dirs) {
        Ok(shares) => {
            let obj: f64 = shares.iter().zip(&dirs).map(|(s, y)| s.quad_form(y)).sum();
            println!("assignment objective = {obj:.9}");
        }
        Err(e) => println!("assignment failed: {e}"),
    }

    // Independent reference: direct grid + polish over 2x2 Gamma for the
    // uncapped program min <Gamma, hat> s.t. Gamma >= y y^T for all y.
    let mut best_val = f64::INFINITY;
    let mut best_g = (0.0, 0.0, 0.0);
    let s_mat = {
        let mut s = SymMatrix::zeros(2);
        for y in &dirs {
            s.axpy_outer(1.0, y);
        }
        s
    };
    let lim = 2.5 * s_mat.trace();
    let n = 160;
    for ia in 0..=n {
        let a = lim * ia as f64 / n as f64;
        for ic in 0..=n {
            let cc = lim * ic as f64 / n as f64;
            for ib in -(n as i64)..=(n as i64) {
                let b = lim * ib as f64 / n as f64;
                let g = SymMatrix::from_row_major(2, &[a, b, b, cc]).unwrap();
                let feas = dirs.iter().all(|y| {
                    let mut d = g.clone();
                    d.axpy_outer(-1.0, y);
                    d.min_eigenvalue() >= -1e-12
                });
                if feas {
                    let v = g.frob_inner(&hat);
                    if v < best_val {
                        best_val = v;
                        best_g = (a, b, cc);
                    }
                }
            }
        }
    }
    println!(
        "grid uncapped dual = {best_val:.9} at Gamma = [[{}, {}], [.., {}]]",
        best_g.0, best_g.1, best_g.2
    );
    // Cap check on the grid optimum.
    let mut capd = s_mat.clone();
    capd.scale(2.0);
    let g = SymMatrix::from_row_major(2, &[best_g.0, best_g.1, best_g.1, best_g.2]).unwrap();
    capd.axpy(-1.0, &g);
    println!("cap slack min-eig at grid opt: {}", capd.min_eigenvalue());
}

#[test]
#[ignore]
fn probe_round1_gapnorm() {
    let inst = benchmark_instance();
    let (best, _) = inst.gap_and_best().unwrap();
    let eps = 0.5;
    let beta = beta_constant(
        BetaVariant::Round { round: 1 },
        inst.bound_b(),
        inst.noise_sigma(),
        inst.arms().len(),
        0.05,
        1.0,
    )
    .unwrap();
    let best_arm = inst.arms()[best].clone();
    let dirs: Vec<DVector<f64>> = inst
        .arms()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, z)| {
            let diff = &best_arm - z;
            let g = inst.theta_star().dot(&diff);
            &diff * (eps / g.max(eps))
        })
        .collect();
    let threshold = beta
        * stream_bai_core::design::rho(
            &stream_bai_core::design::DesignWeights::new(inst.stream_probs().to_vec()).unwrap(),
            inst.stream_points(),
            inst.arms(),
            inst.theta_star(),
            eps,
        )
        .unwrap();
    println!("beta1={beta:.3} floored threshold={threshold:.1}");
    for tau in [1.5 * threshold, 2.5 * threshold, 4.0 * threshold] {
        let oracle = oracle_design(&inst, eps, tau, beta).unwrap();
        let reparam =
            stream_bai_core::design::reparam_program(&inst, tau, beta, eps).unwrap();
        let c = round_radius(tau, eps, beta).unwrap();
        let stream = StreamAverage::Exact {
            points: inst.stream_points(),
            probs: inst.stream_probs(),
        };
        for k in [200_000usize, 400_000] {
            let mut rng = ChaCha12Rng::seed_from_u64(11);
            let t0 = std::time::Instant::now();
            let (_, cert) =
                optimize_design_sga(&dirs, c, 2e-5, k, 20_000, &stream, &mut rng).unwrap();
            println!(
                "tau={tau:.0} c={c:.4} K={k}: viol={:.4} cost={:.5} dual={:.5} \
                 oracle_rate={:.5} reparam_rate={:.5} [{:.1}s]",
                cert.max_violation,
                cert.primal_cost,
                cert.dual_value,
                oracle.cost / tau,
                reparam.1 / tau,
                t0.elapsed().as_secs_f64(),
            );
        }
    }
}

fn grid_two_atom_value(
    points: &[DVector<f64>],
    nu: &[f64],
    arms: &[DVector<f64>],
    theta: &DVector<f64>,
    eps: f64,
    beta: f64,
    tau: f64,
    steps: usize,
) -> f64 {
    let best = (0..arms.len())
        .max_by(|&a, &b| {
            theta
                .dot(&arms[a])
                .partial_cmp(&theta.dot(&arms[b]))
                .unwrap()
        })
        .unwrap();
    let denoms: Vec<(DVector<f64>, f64)> = arms
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, z)| {
            let y = &arms[best] - z;
            let g: f64 = theta.dot(&y);
            (y, g.powi(2).max(eps * eps))
        })
        .collect();
    let mut bestv = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            for k in 1..steps {
                let t = k as f64 / steps as f64;
                let (xi, xj) = (&points[i], &points[j]);
                let a = t * xi[0] * xi[0] + (1.0 - t) * xj[0] * xj[0];
                let b = t * xi[0] * xi[1] + (1.0 - t) * xj[0] * xj[1];
                let c = t * xi[1] * xi[1] + (1.0 - t) * xj[1] * xj[1];
                let det = a * c - b * b;
                if det <= 1e-14 {
                    continue;
                }
                let rho = denoms
                    .iter()
                    .map(|(y, d)| (c * y[0] * y[0] - 2.0 * b * y[0] * y[1] + a * y[1] * y[1]) / (det * d))
                    .fold(0.0f64, f64::max);
                let value = beta * rho;
                let cap = (t / nu[i]).max((1.0 - t) / nu[j]);
                if cap * value <= tau && value < bestv {
                    bestv = value;
                }
            }
        }
    }
    bestv
}

#[test]
#[ignore]
fn probe_grid_reference() {
    let inst = benchmark_instance();
    let eps = 0.5;
    let beta = beta_constant(
        BetaVariant::Round { round: 1 },
        inst.bound_b(),
        inst.noise_sigma(),
        inst.arms().len(),
        0.05,
        1.0,
    )
    .unwrap();
    let threshold = 663.0;
    for mult in [1.0, 2.5, 4.0, 100.0] {
        let tau = mult * threshold;
        let reparam = stream_bai_core::design::reparam_program(&inst, tau, beta, eps).unwrap();
        let grid = grid_two_atom_value(
            inst.stream_points(),
            inst.stream_probs(),
            inst.arms(),
            inst.theta_star(),
            eps,
            beta,
            tau,
            100,
        );
        println!(
            "tau={tau:.0} reparam={:.6} grid2={grid:.6} rel={:.5}",
            reparam.1,
            (grid - reparam.1).abs() / reparam.1
        );
    }
}

#[test]
#[ignore]
fn probe_run_timing() {
    use stream_bai_core::sampler::run;
    let inst = benchmark_instance();
    let params = SolverParams::default();
    for (mode, tau) in [
        (SamplerMode::Naive, 10_000usize),
        (SamplerMode::Naive, 20_000),
        (SamplerMode::Naive, 40_000),
        (SamplerMode::Oracle, 40_000),
        (SamplerMode::Oracle, 100_000),
        (SamplerMode::Learned, 40_000),
        (SamplerMode::Learned, 100_000),
    ] {
        let t0 = std::time::Instant::now();
        let mut ok = 0usize;
        let n = 5;
        for trial in 0..n {
            let mut rng = ChaCha12Rng::seed_from_u64(1000 + trial);
            let r = run(&inst, tau, 0.05, mode, &params, &mut rng).unwrap();
            ok += r.correct as usize;
        }
        println!(
            "mode={mode} tau={tau}: {:.3}s/trial correct {ok}/{n}",
            t0.elapsed().as_secs_f64() / n as f64
        );
    }
}

#[test]
#[ignore]
fn probe_fdual_timing() {
    use rand::Rng;
    use stream_bai_core::design::f_dual_value;
    use stream_bai_core::linalg::{psd_project, SymMatrix};
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let t0 = std::time::Instant::now();
    let reps = 200usize;
    for _ in 0..reps {
        let dim = 2;
        let m: Vec<f64> = (0..dim * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut raw = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                raw.set(i, j, (m[i * dim + j] + m[j * dim + i]) / 2.0);
            }
        }
        let lam = psd_project(&raw);
        let dirs: Vec<DVector<f64>> = (0..3)
            .map(|_| DVector::from_vec(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]))
            .collect();
        let _ = f_dual_value(&lam, &dirs).unwrap();
    }
    println!("f_dual_value: {:.4}s/call", t0.elapsed().as_secs_f64() / reps as f64);
}

#[test]
#[ignore]
fn probe_subgrad_timing() {
    use stream_bai_core::design::optimize_design_subgrad;
    let inst = benchmark_instance();
    let (best, _) = inst.gap_and_best().unwrap();
    let eps = 0.5;
    let beta = beta_constant(
        BetaVariant::Round { round: 1 },
        inst.bound_b(),
        inst.noise_sigma(),
        inst.arms().len(),
        0.05,
        1.0,
    )
    .unwrap();
    let best_arm = inst.arms()[best].clone();
    let dirs: Vec<DVector<f64>> = inst
        .arms()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, z)| {
            let diff = &best_arm - z;
            let g = inst.theta_star().dot(&diff);
            &diff * (eps / g.max(eps))
        })
        .collect();
    let tau = 2.5 * 663.0;
    let c = round_radius(tau, eps, beta).unwrap();
    let stream = StreamAverage::Exact {
        points: inst.stream_points(),
        probs: inst.stream_probs(),
    };
    for k in [5_000usize, 20_000] {
        let t0 = std::time::Instant::now();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let (_, cert) =
            stream_bai_core::design::optimize_design_sga(&dirs, c, 2e-5, 4 * k, 10_000, &stream, &mut rng)
                .unwrap();
        let sga_d = cert.dual_value;
        let sga_t = t0.elapsed().as_secs_f64();
        let t0 = std::time::Instant::now();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let res = optimize_design_subgrad(&dirs, c, 2e-5, k, 10_000, &stream, &mut rng);
        match res {
            Ok((_, cert2)) => println!(
                "K={k}: sga({}) D={sga_d:.5} [{sga_t:.1}s]  subgrad D={:.5} viol={:.4} [{:.1}s]",
                4 * k,
                cert2.dual_value,
                cert2.max_violation,
                t0.elapsed().as_secs_f64()
            ),
            Err(e) => println!("K={k}: subgrad failed: {e}"),
        }
    }
}

#[test]
#[ignore]
fn probe_tradeoff_timing() {
    use stream_bai_core::bounds::{lower_bound_label_curve, upper_bound_label_curve, LogForm};
    let inst = benchmark_instance();
    let t0 = std::time::Instant::now();
    let grid: Vec<f64> = (0..48).map(|k| 100.0 * 1.2f64.powi(k)).collect();
    let lower = lower_bound_label_curve(&inst, 0.05, &grid, LogForm::ProofFaithful).unwrap();
    let upper = upper_bound_label_curve(&inst, LogForm::ProofFaithful.log_factor(0.05), &grid).unwrap();
    let feas = lower.iter().filter(|p| p.feasible).count();
    println!(
        "tradeoff 48 budgets: {:.2}s ({} feasible, first lower {:.2} upper {:.2})",
        t0.elapsed().as_secs_f64(),
        feas,
        lower.last().unwrap().min_labels,
        upper.last().unwrap().min_labels
    );
}

#[test]
#[ignore]
fn probe_sweep_timing() {
    let inst = benchmark_instance();
    let params = SolverParams::default();
    let modes = [SamplerMode::Naive, SamplerMode::Oracle, SamplerMode::Learned];
    let t0 = std::time::Instant::now();
    let rows = label_complexity_sweep(
        &inst,
        &[40_000, 100_000, 400_000],
        0.05,
        &modes,
        3,
        &params,
        7,
    )
    .unwrap();
    println!("sweep wall time: {:.1}s", t0.elapsed().as_secs_f64());
    for r in &rows {
        println!(
            "tau={} mode={} labels={:.0}±{:.0} unlabeled={:.0} success={:.2} rounds={:.1} err={:?}",
            r.tau, r.mode, r.mean_labels, r.std_labels, r.mean_unlabeled, r.success_rate,
            r.mean_rounds, r.error
        );
    }
}
