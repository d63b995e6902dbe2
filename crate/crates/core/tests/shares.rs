//! Checks for the share-assignment program (splitting a PSD matrix across
//! coverage directions) and its cover dual.

use nalgebra::DVector;
use proptest::prelude::*;
use stream_bai_core::design::{assign_dual_shares, f_dual_value, sdp_gap_tol};
use stream_bai_core::linalg::{psd_project, SymMatrix};

fn sym_from(dim: usize, raw: &[f64]) -> SymMatrix {
    let mut m = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(i, j, (raw[i * dim + j] + raw[j * dim + i]) / 2.0);
        }
    }
    m
}

fn objective(shares: &[SymMatrix], dirs: &[DVector<f64>]) -> f64 {
    shares
        .iter()
        .zip(dirs)
        .map(|(share, y)| share.quad_form(y))
        .sum()
}

fn share_sum(shares: &[SymMatrix]) -> SymMatrix {
    let mut sum = SymMatrix::zeros(shares[0].dim());
    for share in shares {
        sum.axpy(1.0, share);
    }
    sum
}

#[test]
fn single_direction_takes_everything() {
    let dirs = vec![DVector::from_vec(vec![1.0, 2.0])];
    let lambda = sym_from(2, &[3.0, 0.5, 0.5, 1.0]);
    let shares = assign_dual_shares(&lambda, &dirs).unwrap();
    assert_eq!(shares.len(), 1);
    let (a, b) = (shares[0].to_row_major(), lambda.to_row_major());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn rank_one_matrix_goes_to_the_aligned_direction() {
    // lambda = y1 y1^T with y2 orthogonal to y1: the assignment optimum is
    // attained by giving everything to y1, with value ||y1||^4 = 16.
    let y1 = DVector::from_vec(vec![2.0, 0.0]);
    let y2 = DVector::from_vec(vec![0.0, 1.0]);
    let lambda = SymMatrix::outer(&y1);
    let shares = assign_dual_shares(&lambda, &[y1.clone(), y2]).unwrap();
    let obj = objective(&shares, &[y1, DVector::from_vec(vec![0.0, 1.0])]);
    assert!((obj - 16.0).abs() <= sdp_gap_tol(16.0) + 1e-9, "obj {obj}");
}

#[test]
fn cover_dual_examples() {
    let e1 = vec![DVector::from_vec(vec![1.0, 0.0])];
    let (value, gamma) = f_dual_value(&SymMatrix::identity(2), &e1).unwrap();
    // min <Gamma, I> over Gamma >= e1 e1^T is 1, at Gamma = e1 e1^T.
    assert!((value - 1.0).abs() < 1e-6);
    assert!(gamma.is_psd());

    let (zero_value, zero_gamma) = f_dual_value(&SymMatrix::zeros(2), &e1).unwrap();
    assert_eq!(zero_value, 0.0);
    assert!(zero_gamma.frob_norm() <= 2.0 + 1e-12);

    let mut indefinite = SymMatrix::zeros(2);
    indefinite.set(0, 0, 1.0);
    indefinite.set(1, 1, -1.0);
    assert!(f_dual_value(&indefinite, &e1).is_err());
}

/// A matrix that previously stalled the splitting solver mid-run; the
/// assignment must succeed and land near the known optimum 0.2327627.
#[test]
fn near_degenerate_assignment_regression() {
    let lambda = sym_from(
        2,
        &[
            0.6515004615419752,
            -0.2297825320232666,
            -0.2297825320232666,
            1.7197780698470204,
        ],
    );
    let dirs = vec![
        DVector::from_vec(vec![0.25, -0.25]),
        DVector::from_vec(vec![0.04466351087439402, -0.29552020666133955]),
    ];
    let shares = assign_dual_shares(&lambda, &dirs).unwrap();
    let obj = objective(&shares, &dirs);
    assert!((obj - 0.2327627).abs() < 1e-3, "obj {obj}");
    let mut resid = share_sum(&shares);
    resid.axpy(-1.0, &lambda);
    assert!(resid.frob_norm() <= 1e-8 * (1.0 + lambda.frob_norm()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Assignment output is feasible (PSD shares summing to the input) and its
    /// objective is sandwiched between an explicit feasible decomposition and
    /// the cover dual value.
    #[test]
    fn assignment_is_feasible_and_near_optimal(
        v_raw in prop::collection::vec(-2.0f64..2.0, 4),
        dir_raw in prop::collection::vec(-2.0f64..2.0, 6),
        n_dirs in 1usize..=3,
    ) {
        let dirs: Vec<DVector<f64>> = (0..n_dirs)
            .map(|k| DVector::from_vec(vec![dir_raw[2 * k] + 0.01 * k as f64, dir_raw[2 * k + 1]]))
            .collect();
        prop_assume!(dirs.iter().all(|y| y.norm() > 1e-2));
        prop_assume!((0..n_dirs).all(|i| (0..i).all(|j| dirs[i] != dirs[j])));

        let vs = [
            DVector::from_vec(vec![v_raw[0], v_raw[1]]),
            DVector::from_vec(vec![v_raw[2], v_raw[3]]),
        ];
        let mut lambda = SymMatrix::outer(&vs[0]);
        lambda.axpy(1.0, &SymMatrix::outer(&vs[1]));

        let shares = assign_dual_shares(&lambda, &dirs).unwrap();
        prop_assert_eq!(shares.len(), dirs.len());
        for share in &shares {
            prop_assert!(share.is_psd());
        }
        let mut resid = share_sum(&shares);
        resid.axpy(-1.0, &lambda);
        prop_assert!(resid.frob_norm() <= 1e-8 * (1.0 + lambda.frob_norm()));

        let obj = objective(&shares, &dirs);
        // Assigning each rank-one piece wholly to its best direction is
        // feasible, so the optimum (hence obj + gap) is at least its value.
        let explicit: f64 = vs
            .iter()
            .map(|v| {
                dirs.iter()
                    .map(|y| y.dot(v) * y.dot(v))
                    .fold(0.0, f64::max)
            })
            .sum();
        let tol = sdp_gap_tol(obj.abs().max(explicit)) + 1e-9;
        prop_assert!(obj >= explicit - tol, "obj {obj} < explicit {explicit}");

        // The cap-restricted dual minimum can only sit above the optimum.
        let (capped, gamma) = f_dual_value(&lambda, &dirs).unwrap();
        prop_assert!(obj <= capped + tol, "obj {obj} > capped {capped}");

        let cap: f64 = 2.0 * share_sum(
            &dirs.iter().map(SymMatrix::outer).collect::<Vec<_>>()
        ).frob_norm();
        prop_assert!(gamma.frob_norm() <= cap * (1.0 + 1e-6) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// The cover dual value scales linearly: `f(s lambda) = s f(lambda)`.
    #[test]
    fn dual_value_scales_linearly(
        raw in prop::collection::vec(-3.0f64..3.0, 4),
        dir_raw in prop::collection::vec(-2.0f64..2.0, 4),
        n_dirs in 1usize..=2,
    ) {
        let dirs: Vec<DVector<f64>> = (0..n_dirs)
            .map(|k| DVector::from_vec(vec![dir_raw[2 * k] + 0.01 * k as f64, dir_raw[2 * k + 1]]))
            .collect();
        prop_assume!(dirs.iter().all(|y| y.norm() > 1e-2));
        prop_assume!(n_dirs == 1 || dirs[0] != dirs[1]);

        let lambda = psd_project(&sym_from(2, &raw));
        let (base, _) = f_dual_value(&lambda, &dirs).unwrap();
        for s in [0.25f64, 0.5, 2.0] {
            let mut scaled = lambda.clone();
            scaled.scale(s);
            let (value, _) = f_dual_value(&scaled, &dirs).unwrap();
            prop_assert!(
                (value - s * base).abs() <= 1e-8 * (1.0 + (s * base).abs()),
                "f({s} L) = {value} vs {s} f(L) = {}",
                s * base
            );
        }
    }
}
