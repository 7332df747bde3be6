//! End-to-end: equilibria, frozen chains and error handling through the public API.

use ellchain::freezing::{freeze, real_spectrum_base, spectrum_imaginary_part};
use ellchain::modular::build_eval_context;
use ellchain::rmatrix::RKind;
use ellchain::verify::{self, Bound, Check};
use ellchain::{c64, linalg, Error};

#[test]
fn frozen_chain_hamiltonians_commute() {
    let ctx = build_eval_context(&"TS".parse().unwrap(), &verify::default_base(), 3, 1e-9).unwrap();
    for kind in [RKind::Vertex, RKind::Face] {
        let chain = freeze(kind, 2, &ctx, &verify::full_range(3)).unwrap();
        assert_eq!(chain.hamiltonians.len(), 4);
        for (n, m, c) in chain.commutators().unwrap() {
            assert!(c < 1e-9, "[H_{n}, H_{m}] = {c:e} for {}", kind.name());
        }
        let checks = verify::chain_suite(&chain, 7, true).unwrap();
        assert!(verify::all_pass(&checks), "{checks:#?}");
    }
}

#[test]
fn the_full_length_flow_is_rejected() {
    let ctx = build_eval_context(&"1".parse().unwrap(), &verify::default_base(), 3, 1e-9).unwrap();
    assert!(freeze(RKind::Vertex, 2, &ctx, &[3]).is_err());
}

#[test]
fn small_imaginary_tau_is_rejected() {
    let mut base = verify::default_base();
    base.omega = c64(0.0, 0.2);
    let err = build_eval_context(&"1".parse().unwrap(), &base, 4, 1e-9).unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)), "{err}");
}

#[test]
fn face_spectrum_is_real_in_documented_regime() {
    let ctx = build_eval_context(&"S".parse().unwrap(), &real_spectrum_base(), 3, 1e-9).unwrap();
    let chain = freeze(RKind::Face, 2, &ctx, &[1, -1]).unwrap();
    let (im, scale) = spectrum_imaginary_part(&chain).unwrap();
    assert!(im < 1e-8 * scale.max(1.0), "max |Im| = {im:e}");
}

#[test]
fn chiral_hamiltonians_are_finite() {
    let ctx = build_eval_context(&"S".parse().unwrap(), &verify::default_base(), 4, 1e-9).unwrap();
    let chain = freeze(RKind::Vertex, 2, &ctx, &[1, -1]).unwrap();
    for h in chain.hamiltonians.values() {
        assert!(h.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!(linalg::frobenius(h) > 0.0);
    }
}

#[test]
fn check_bounds() {
    assert!(Check::below("a", 1e-12, 1e-10, "x").pass());
    assert!(!Check::below("a", f64::NAN, 1e-10, "x").pass());
    assert!(Check::above("a", 0.5, 1e-3, "x").pass());
    assert!(Check::exact("a", 0.0, "x").pass());
    let info = Check::below("a", 1.0, 1e-10, "x").informative();
    assert_eq!(info.bound, Bound::Below);
    assert!(verify::all_pass(&[info]));
}

#[test]
fn hybrid_suite_passes_at_the_s_equilibrium() {
    let checks = verify::hybrid_suite(
        RKind::Vertex,
        &verify::default_base(),
        3,
        &"S".parse().unwrap(),
    )
    .unwrap();
    assert!(verify::all_pass(&checks), "{checks:#?}");
}
