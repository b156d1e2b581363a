mod common;

use common::synthetic;
use fockspectra::finiteness::{
    assess, estimate_exponents, finiteness_verdict, is_cauchy, locate_t0, phi_s, write_exponents_csv,
    ExponentEstimate, Verdict, VerdictParams,
};
use fockspectra::spectra::{essential_spectrum, EssSpecReport, SearchParams};
use fockspectra::{builtin, Error, Grid, ModelSpec, PairGrid, QuadratureRule};

fn grids(spec: &ModelSpec, levels: &[usize]) -> Vec<Grid> {
    levels
        .iter()
        .map(|&n| Grid::new(spec.d, spec.a, n, QuadratureRule::Midpoint).unwrap())
        .collect()
}

fn ess(spec: &ModelSpec, g: &Grid) -> EssSpecReport {
    essential_spectrum(spec, g, &PairGrid::new(g), &SearchParams::default()).unwrap()
}

fn run(spec: &ModelSpec, delta: f64) -> (ExponentEstimate, fockspectra::finiteness::FinitenessReport) {
    let gs = grids(spec, &[32, 64, 128]);
    let r = ess(spec, &gs[1]);
    let t0 = locate_t0(spec, &gs[1], &r).expect("minimizer");
    let est = estimate_exponents(spec, &gs[1], &r, &t0, delta).unwrap();
    let f = finiteness_verdict(spec, &gs, &est, &VerdictParams::default()).unwrap();
    (est, f)
}

#[test]
fn synthetic_exponents_recovered() {
    let (est, f) = run(&synthetic(2, 1.0, 10.0), 0.25);
    assert!(est.t0[0].abs() < 1e-6);
    assert!((est.alpha_hat.unwrap() - 2.0).abs() < 0.1);
    assert!((est.beta_hat.unwrap() - 2.0).abs() < 0.1);
    assert!((est.gamma_hat.unwrap() - 1.0).abs() < 0.1);
    assert!(est.fit_r2.iter().all(|&r| r >= 0.95));
    assert_eq!(f.verdict, Verdict::FinitePredicted);
    assert!(f.hs_cauchy && f.radial_finite && f.legs_agree);
}

#[test]
fn boundary_case_is_inconclusive() {
    let (est, f) = run(&synthetic(1, 1.0, 10.0), 0.25);
    assert!((est.beta_hat.unwrap() - 1.0).abs() < 0.1);
    assert_eq!(f.verdict, Verdict::Inconclusive);
}

#[test]
fn mnr_is_never_finite_predicted() {
    let b = builtin("mnr-infinite").unwrap();
    let (est, f) = run(&b.spec, b.spec.a / 4.0);
    assert!((est.alpha_hat.unwrap() - 2.0).abs() < 0.1);
    assert!(est.beta_hat.unwrap().abs() < 0.1);
    assert_ne!(f.verdict, Verdict::FinitePredicted);
}

#[test]
fn vanishing_coupling_gives_infinite_beta() {
    let spec = synthetic(2, 1.0, 10.0).with_real_v1(|_, y| {
        let t = y[0].abs();
        if t < 0.5 { 0.0 } else { t * t }
    });
    let g = Grid::new(1, 1.0, 64, QuadratureRule::Midpoint).unwrap();
    let r = ess(&spec, &g);
    let est = estimate_exponents(&spec, &g, &r, &[0.0], 0.25).unwrap();
    assert_eq!(est.beta_hat, Some(f64::INFINITY));
    let f = assess(1, &est, vec![], true, &VerdictParams::default());
    assert!(f.criterion_rhs.is_infinite());
    assert!(f.radial_finite);
}

#[test]
fn phi_s_degenerate_exponent() {
    let d = 0.5;
    assert_eq!(phi_s(&[0.1], &[-0.2], 0.0, d), 2.0);
    assert_eq!(phi_s(&[0.6], &[0.0], 0.0, d), 1.0);
    assert!((phi_s(&[0.1], &[0.2], 2.0, d) - 0.05).abs() < 1e-15);
}

#[test]
fn cauchy_rule() {
    assert!(is_cauchy(&[1.0, 1.01, 1.011], 0.05));
    assert!(!is_cauchy(&[1.0, 1.001, 1.1], 0.05));
    assert!(!is_cauchy(&[1.0, 2.0], 0.05));
    assert!(!is_cauchy(&[1.0, f64::NAN, 1.0], 0.05));
}

#[test]
fn too_few_levels() {
    let spec = synthetic(2, 1.0, 10.0);
    let gs = grids(&spec, &[32, 64, 128]);
    let r = ess(&spec, &gs[1]);
    let est = estimate_exponents(&spec, &gs[1], &r, &[0.0], 0.25).unwrap();
    assert!(matches!(
        finiteness_verdict(&spec, &gs[..2], &est, &VerdictParams::default()),
        Err(Error::TooFewLevels { need: 3, got: 2 })
    ));
}

#[test]
fn exponents_csv() {
    let spec = synthetic(2, 1.0, 10.0);
    let g = Grid::new(1, 1.0, 32, QuadratureRule::Midpoint).unwrap();
    let r = ess(&spec, &g);
    let est = estimate_exponents(&spec, &g, &r, &[0.0], 0.25).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.csv");
    write_exponents_csv(&est, &p).unwrap();
    let text = std::fs::read_to_string(p).unwrap();
    assert_eq!(text.lines().count(), 1 + est.shells.len());
    assert_eq!(est.shells.len(), 3 * 13);
    for name in ["alpha", "beta", "gamma"] {
        assert_eq!(text.lines().filter(|l| l.starts_with(name)).count(), 13);
    }
}
