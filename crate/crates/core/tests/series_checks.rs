//! Integration checks of the periodized series: truncated-sum annihilation,
//! periodicity defect decay, the critical-rank regularized series and the
//! Hopf dilation sweep — at reduced radii so they stay quick.

use higherspin::cylinder::{
    cot_partial_sums, tail_decay_estimate, CotangentField, CylinderSpec,
};
use higherspin::hopf::{HopfSpec, SpinStructure};
use higherspin::kernels::{KernelParams, ULinearField};
use higherspin::operators::{higher_spin_apply, OperatorSpec};
use higherspin::verify::{
    check_annihilation, check_dilation, check_periodicity, KernelSelector,
};

fn cyl(m: usize, k: usize, l: usize, p: usize, r: i64) -> CylinderSpec {
    CylinderSpec::new(KernelParams::new(m, k).unwrap(), l, p, r).unwrap()
}

#[test]
fn truncated_cot_is_annihilated_termwise() {
    // every summand is a translate of E_{1,k}, so the operator kills the
    // truncated sum at any radius
    let spec = cyl(6, 1, 1, 0, 2);
    let v = [0.4, -0.2, 1.0, 0.1, 0.0, 0.3];
    let u = [1.0, 0.3, 0.0, -0.5, 0.2, 0.0];
    let x = [0.37, 0.21, -0.4, 0.5, 0.11, -0.6];
    let field = CotangentField::new(spec, &v).unwrap();
    let op = OperatorSpec::new(6, 1).unwrap();
    let out = higher_spin_apply(&op, &field, &x).unwrap();
    let scale = field.value_at(&x).unwrap().eval(&u).norm();
    assert!(out.eval(&u).norm() < 1e-8 * scale.max(1.0));
}

#[test]
fn twisted_cot_is_annihilated_termwise() {
    let spec = cyl(5, 2, 2, 1, 2);
    let v = [0.4, -0.2, 1.0, 0.1, 0.0];
    let u = [1.0, 0.3, 0.0, -0.5, 0.2];
    let x = [0.42, 0.27, -0.3, 0.55, 0.2];
    let field = CotangentField::new(spec, &v).unwrap();
    let op = OperatorSpec::new(5, 2).unwrap();
    let out = higher_spin_apply(&op, &field, &x).unwrap();
    let scale = field.value_at(&x).unwrap().eval(&u).norm();
    assert!(out.eval(&u).norm() < 1e-8 * scale.max(1.0));
}

#[test]
fn annihilation_report_on_truncated_cot() {
    let spec = cyl(6, 1, 1, 0, 2);
    let rep = check_annihilation(&KernelSelector::Cylinder(spec), 4, 5, 1e-8, 1.0).unwrap();
    assert!(rep.pass(), "max stat {}", rep.summary.max_statistic);
}

#[test]
fn periodicity_defect_decays_small_radii() {
    let spec = cyl(6, 1, 1, 0, 8);
    let rep = check_periodicity(&spec, &[0], &[4, 8, 16, 32], 3).unwrap();
    assert!(rep.pass(), "{:?}", rep.samples);
}

#[test]
fn twisted_antiperiodicity_small_radii() {
    let spec = cyl(6, 1, 2, 1, 8);
    let rep = check_periodicity(&spec, &[0, 1], &[4, 8, 16, 32], 3).unwrap();
    assert!(rep.pass(), "{:?}", rep.samples);
}

#[test]
fn wrong_sign_expectation_fails() {
    // power check: asking for antiperiodicity of an untwisted series must fail
    let spec = cyl(6, 1, 1, 1, 8); // p = 1 twists direction 0
    // evaluate against the *untwisted* expectation by building a p=0 spec and
    // checking its direction-0 defect against antiperiodic pairing via a
    // twisted spec with mismatched p... simplest: treat the twisted series as
    // periodic (p=0 claim) and require failure.
    let lying_spec = CylinderSpec { p: 0, ..spec };
    let honest = check_periodicity(&spec, &[0], &[4, 8, 16, 32], 3).unwrap();
    assert!(honest.pass());
    // same series summed with twist, but the check now expects plain
    // periodicity in direction 0
    let x_defect_does_not_decay = {
        let radii = [4i64, 8, 16];  // wrong-sign plateau shows already at small radii
        let m = 6;
        let mut rng = higherspin::verify::rng_for(3);
        let x = higherspin::verify::sample_point(&mut rng, m, |_| true).unwrap();
        let u = higherspin::verify::sample_unit_vector(&mut rng, m);
        let v = higherspin::verify::sample_unit_vector(&mut rng, m);
        let mut xs = x.clone();
        xs[0] += 1.0;
        let all: Vec<i64> = vec![4, 8, 16, 32];
        let base = cot_partial_sums(&x, &u, &v, &spec, &all).unwrap();
        let shifted = cot_partial_sums(&xs, &u, &v, &spec, &radii.to_vec()).unwrap();
        // periodic pairing (wrong for a twisted direction): defect plateaus
        let d: Vec<f64> = radii
            .iter()
            .zip(&shifted)
            .enumerate()
            .map(|(i, (_, s))| (s - &base[i + 1]).norm())
            .collect();
        d
    };
    let _ = lying_spec;
    let first = x_defect_does_not_decay[0];
    let last = *x_defect_does_not_decay.last().unwrap();
    assert!(
        last > 0.1 * first,
        "wrong-sign defect should not keep decaying: {x_defect_does_not_decay:?}"
    );
}

#[test]
fn critical_rank_pairs_are_cauchy() {
    // (m,k) = (5,2), l = 3: successive defects decrease over doublings
    let spec = cyl(5, 2, 3, 0, 16);
    let x = [0.31, 0.47, 0.22, 0.55, 0.13];
    let u = [0.2, -0.6, 1.0, 0.1, 0.3];
    let v = [1.0, 0.4, 0.0, -0.3, 0.5];
    let sums = cot_partial_sums(&x, &u, &v, &spec, &[2, 4, 8, 16]).unwrap();
    let defects: Vec<f64> = sums.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
    assert!(
        defects.windows(2).all(|w| w[1] < w[0]),
        "defects not decreasing: {defects:?}"
    );
}

#[test]
fn tail_fit_reports_exponents() {
    let spec = cyl(5, 2, 1, 0, 8);
    let x = [0.31, 0.47, 0.22, 0.55, 0.13];
    let u = [0.2, -0.6, 1.0, 0.1, 0.3];
    let v = [1.0, 0.4, 0.0, -0.3, 0.5];
    let fit = tail_decay_estimate(&spec, &x, &u, &v, &[2, 4, 8]).unwrap();
    assert!(!fit.saturated);
    let em = fit.exponent_majorant.unwrap();
    // m - k - l = 2
    assert!((em - 2.0).abs() < 0.7, "majorant exponent {em}");
}

#[test]
fn tail_fit_saturation_flag() {
    // far from the lattice in a free coordinate every term is ~2000^{-5}, so
    // all ring differences sit below the 1e-14 floor
    let spec = cyl(6, 1, 1, 0, 8);
    let x = [0.5, 2000.0, 0.0, 0.0, 0.0, 0.0];
    let u = [0.0, 1.0, 0.0, 0.2, 0.0, 0.0];
    let v = [1.0, 0.0, 0.0, 0.0, -0.4, 0.0];
    let fit = tail_decay_estimate(&spec, &x, &u, &v, &[2, 4, 8]).unwrap();
    assert!(fit.saturated, "defects {:?}", fit.signed_defects);
    assert!(fit.exponent_signed.is_none());
}

#[test]
fn hopf_truncation_stability() {
    // ||S_{N+1} - S_N|| / ||S_N|| shrinks geometrically
    let spec = HopfSpec::new(KernelParams::new(5, 1).unwrap(), 2.0, 6, SpinStructure::F1).unwrap();
    let x = [1.2, 0.3, -0.4, 0.5, 0.1];
    let y = [0.4, 0.3, 0.2, -0.1, 0.3];
    let u = [1.0, 0.0, 0.0, 0.0, 0.0];
    let v = [0.0, 1.0, 0.0, 0.0, 0.0];
    let sums: Vec<_> = (0..=6)
        .map(|n| {
            let sp = HopfSpec { n_trunc: n, ..spec };
            higherspin::hopf::hopf_kernel(&x, &y, &u, &v, &sp).unwrap()
        })
        .collect();
    let steps: Vec<f64> = sums
        .windows(2)
        .map(|w| (&w[1] - &w[0]).norm() / w[0].norm())
        .collect();
    // the N=0 -> 1 step is transient (the inverted branch enters with its
    // fixed tau^{2(m-k)} weight); from there the ratio settles to t^{-(m-k)}
    for pair in steps[1..].windows(2) {
        let ratio = pair[1] / pair[0];
        assert!((ratio - 2f64.powi(-4)).abs() < 0.005, "{steps:?}");
    }
}

#[test]
fn sampler_errors_out_near_dense_singular_set() {
    let mut rng = higherspin::verify::rng_for(1);
    let err = higherspin::verify::sample_point(&mut rng, 4, |_| false);
    assert!(err.is_err());
}

#[test]
fn hopf_dilation_report() {
    for k in [1usize, 2] {
        let spec = HopfSpec::new(KernelParams::new(5, k).unwrap(), 2.0, 4, SpinStructure::F1)
            .unwrap();
        let rep = check_dilation(&spec, &[1, 2, 3, 4], 9).unwrap();
        assert!(rep.pass(), "k={k}: {:?}", rep.samples);
        assert!(rep.summary.saturated, "exact invariance expected");
    }
}
