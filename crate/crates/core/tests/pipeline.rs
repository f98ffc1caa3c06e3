//! End-to-end regressions for the decomposition pipeline.

use meskit::classify::{Classifier, Config};
use meskit::extension;
use meskit::superop::{self, Sigma};
use meskit::tensor::{self, kron, Dims};
use meskit::Error;
use num_complex::Complex64;

#[test]
fn decomposition_is_invariant_under_phase_gauge() {
    let u = tensor::haar_unitary(2, 1);
    let v = tensor::haar_unitary(6, 2);
    let classifier = Classifier::new(Config::default());
    for sigma in [Sigma::Identity, Sigma::Transpose] {
        let base = classifier.decompose(&superop::make_adjoint_preserver(&u, &v, sigma).unwrap()).unwrap();
        for (alpha, beta) in [(0.3, -1.1), (2.0, 0.7), (-2.9, 3.1)] {
            let ua = &u * Complex64::from_polar(1.0, alpha);
            let vb = &v * Complex64::from_polar(1.0, beta);
            let phi = superop::make_adjoint_preserver(&ua, &vb, sigma).unwrap();
            let dec = classifier.decompose(&phi).unwrap();
            assert_eq!(dec.sigma, sigma);
            assert!((&dec.u - &base.u).norm() < 1e-10, "U changed under phase gauge");
            assert!((&dec.v - &base.v).norm() < 1e-10, "V changed under phase gauge");
        }
    }
}

#[test]
fn transpose_decomposition_at_two_three() {
    let dims = Dims::new(2, 3).unwrap();
    let u = tensor::haar_unitary(2, 5);
    let v = tensor::haar_unitary(dims.n(), 6);
    let phi = superop::make_adjoint_preserver(&u, &v, Sigma::Transpose).unwrap();
    let dec = Classifier::new(Config::default()).decompose(&phi).unwrap();
    assert_eq!(dec.sigma, Sigma::Transpose);
    assert!(tensor::phase_aligned_distance(&dec.conjugation(), &kron(&u, &v)) < 1e-8);
    assert!(dec.to_superoperator(dims).unwrap().distance(&phi) < 1e-8);
}

#[test]
fn swap_form_witness_breaks_block_symmetry() {
    let dims = Dims::new(2, 2).unwrap();
    for sigma in [Sigma::Identity, Sigma::Transpose] {
        for seed in 0..5 {
            let a = tensor::haar_unitary(4, 10 + seed);
            let b = tensor::haar_unitary(4, 20 + seed);
            let swap = superop::make_swap_preserver(&a, &b, sigma).unwrap();
            let witness = extension::switch_witness(&a, sigma, dims).unwrap();
            let p1 = extension::p_operator_on_pair(0, dims).unwrap();
            let residual = extension::commutation_residual(&swap, &p1, &witness).unwrap();
            assert!(residual > 1.0, "witness residual {residual} at seed {seed}");
        }
    }
}

#[test]
fn swap_form_is_rejected_as_kronecker_conjugation() {
    let swap = superop::make_swap_preserver(&tensor::haar_unitary(2, 1), &tensor::haar_unitary(2, 2), Sigma::Identity)
        .unwrap();
    let err = Classifier::new(Config::default()).decompose(&swap).unwrap_err();
    assert!(matches!(err, Error::Dimension(_)), "unexpected error {err}");
}
