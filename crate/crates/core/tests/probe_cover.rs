use nalgebra::DVector;
use stream_bai_core::design::f_dual_value;
use stream_bai_core::linalg::SymMatrix;

#[test]
fn probe_cover_stall() {
    let v1 = DVector::from_vec(vec![-0.6028985310685209, 0.8952774606050485]);
    let v2 = DVector::from_vec(vec![0.7784576701561223, -1.490703724382965]);
    let mut lam = SymMatrix::outer(&v1);
    lam.axpy(1.0, &SymMatrix::outer(&v2));
    let dirs = vec![
        DVector::from_vec(vec![1.86225272487709, 1.5711425365885496]),
        DVector::from_vec(vec![1.5850913328738157, 1.0472937528709088]),
    ];
    match f_dual_value(&lam, &dirs) {
        Ok((v, g)) => println!("ok value={v} gamma_norm={}", g.frob_norm()),
        Err(e) => println!("err {e:?}"),
    }
}
