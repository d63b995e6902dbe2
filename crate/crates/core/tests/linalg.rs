//! Checks for the symmetric-matrix layer: cone projection, inverse quadratic
//! forms, Schur feasibility, and weighted second moments.

use nalgebra::DVector;
use proptest::prelude::*;
use stream_bai_core::error::Error;
use stream_bai_core::instance::benchmark_instance;
use stream_bai_core::linalg::{
    psd_project, quad_form_inv, schur_feasible, weighted_second_moment, SymMatrix,
};

fn sym_from(dim: usize, raw: &[f64]) -> SymMatrix {
    let mut m = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(i, j, (raw[i * dim + j] + raw[j * dim + i]) / 2.0);
        }
    }
    m
}

/// `B^T B + ridge * I`, positive semidefinite by construction.
fn gram(dim: usize, raw: &[f64], ridge: f64) -> SymMatrix {
    let mut m = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = if i == j { ridge } else { 0.0 };
            for k in 0..dim {
                acc += raw[k * dim + i] * raw[k * dim + j];
            }
            m.set(i, j, acc);
        }
    }
    m
}

fn frob_dist(a: &SymMatrix, b: &SymMatrix) -> f64 {
    let mut d = a.clone();
    d.axpy(-1.0, b);
    d.frob_norm()
}

fn diag(entries: &[f64]) -> SymMatrix {
    let mut m = SymMatrix::zeros(entries.len());
    for (i, &v) in entries.iter().enumerate() {
        m.set(i, i, v);
    }
    m
}

#[test]
fn projection_keeps_identity() {
    let eye = SymMatrix::identity(3);
    assert!(frob_dist(&psd_project(&eye), &eye) < 1e-12);
}

#[test]
fn projection_clips_negative_eigenvalue() {
    let m = diag(&[1.0, -1.0]);
    assert!(frob_dist(&psd_project(&m), &diag(&[1.0, 0.0])) < 1e-12);
}

#[test]
fn unit_quad_form_on_identity() {
    let v = DVector::from_vec(vec![1.0, 0.0]);
    let q = quad_form_inv(&SymMatrix::identity(2), &v, 0.0).unwrap();
    assert!((q - 1.0).abs() < 1e-12);
}

#[test]
fn half_identity_difference_direction() {
    let a = diag(&[0.5, 0.5]);
    let v = DVector::from_vec(vec![1.0, -1.0]);
    let q = quad_form_inv(&a, &v, 0.0).unwrap();
    assert!((q - 4.0).abs() < 1e-12);
}

#[test]
fn rank_deficient_direction_is_singular() {
    let a = diag(&[1.0, 0.0]);
    let v = DVector::from_vec(vec![0.0, 1.0]);
    assert!(matches!(
        quad_form_inv(&a, &v, 0.0),
        Err(Error::SingularMatrix { .. })
    ));
}

#[test]
fn schur_boundary_and_interior() {
    let eye = SymMatrix::identity(2);
    let e1 = DVector::from_vec(vec![1.0, 0.0]);
    // Boundary: smallest eigenvalue of I - e1 e1^T is exactly zero.
    assert!(schur_feasible(&eye, &e1, 1.0).unwrap());
    assert!(!schur_feasible(&eye, &e1, 0.9).unwrap());
}

#[test]
fn two_point_second_moment() {
    let points = vec![
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![0.0, 1.0]),
    ];
    let m = weighted_second_moment(&points, &[0.5, 0.5]).unwrap();
    assert!(frob_dist(&m, &diag(&[0.5, 0.5])) < 1e-15);
}

#[test]
fn single_point_second_moment_is_outer_product() {
    let x = DVector::from_vec(vec![0.3, -1.2, 0.7]);
    let m = weighted_second_moment(std::slice::from_ref(&x), &[1.0]).unwrap();
    assert!(frob_dist(&m, &SymMatrix::outer(&x)) < 1e-15);
}

#[test]
fn empty_second_moment_is_invalid() {
    assert!(matches!(
        weighted_second_moment(&[], &[]),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn benchmark_second_moment_has_unit_trace() {
    // Unit-circle support: trace = sum_i nu_i ||x_i||^2 = sum_i nu_i = 1.
    let inst = benchmark_instance();
    let m = weighted_second_moment(inst.stream_points(), inst.stream_probs()).unwrap();
    assert!((m.trace() - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Projection lands in the cone, is idempotent, and is Frobenius-nearest:
    /// no sampled PSD competitor is closer to the input.
    #[test]
    fn projection_idempotent_and_nearest(
        dim in 2usize..=4,
        raw in prop::collection::vec(-5.0f64..5.0, 16),
        competitor_raw in prop::collection::vec(-2.0f64..2.0, 16),
        competitor_scale in 0.0f64..4.0,
    ) {
        let m = sym_from(dim, &raw);
        let p = psd_project(&m);
        prop_assert!(p.is_psd());
        prop_assert!(frob_dist(&psd_project(&p), &p) <= 1e-10 * (1.0 + p.frob_norm()));

        let mut q = gram(dim, &competitor_raw, 0.0);
        q.scale(competitor_scale);
        prop_assert!(frob_dist(&m, &p) <= frob_dist(&m, &q) + 1e-9 * (1.0 + m.frob_norm()));
    }

    /// Projection fixes every PSD matrix.
    #[test]
    fn projection_fixes_psd_inputs(
        dim in 2usize..=4,
        raw in prop::collection::vec(-3.0f64..3.0, 16),
    ) {
        let m = gram(dim, &raw, 0.0);
        prop_assert!(frob_dist(&psd_project(&m), &m) <= 1e-10 * (1.0 + m.frob_norm()));
    }

    /// The eigenvalue test of `A >= y y^T / c^2` agrees with the quadratic
    /// form `y^T A^{-1} y <= c^2` whenever `A` is invertible.
    #[test]
    fn schur_matches_quadratic_form(
        dim in 2usize..=4,
        raw in prop::collection::vec(-2.0f64..2.0, 16),
        y_raw in prop::collection::vec(-2.0f64..2.0, 4),
        c in 0.2f64..3.0,
    ) {
        let a = gram(dim, &raw, 0.1);
        let y = DVector::from_vec(y_raw[..dim].to_vec());
        let q = quad_form_inv(&a, &y, 0.0).unwrap();
        // Skip inputs that sit on the decision boundary, where both routes
        // are tolerance-limited.
        prop_assume!((q - c * c).abs() > 1e-6 * (1.0 + q));
        prop_assert_eq!(schur_feasible(&a, &y, c).unwrap(), q <= c * c);
    }

    /// Growing the matrix in the Loewner order can only shrink the inverse
    /// quadratic form.
    #[test]
    fn inverse_form_is_loewner_monotone(
        dim in 2usize..=4,
        raw in prop::collection::vec(-2.0f64..2.0, 16),
        bump_raw in prop::collection::vec(-2.0f64..2.0, 16),
        v_raw in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let a = gram(dim, &raw, 0.05);
        let mut b = a.clone();
        b.axpy(1.0, &gram(dim, &bump_raw, 0.0));
        let v = DVector::from_vec(v_raw[..dim].to_vec());
        let qa = quad_form_inv(&a, &v, 0.0).unwrap();
        let qb = quad_form_inv(&b, &v, 0.0).unwrap();
        prop_assert!(qb <= qa + 1e-9 * (1.0 + qa.abs()));
    }
}
