mod common;

use common::random_smooth;
use fockspectra::operators::assemble_blocks;
use fockspectra::spectra::{
    birman_schwinger_check, count_above, count_below, counting_sweep, discrete_spectrum_above,
    discrete_spectrum_below, essential_spectrum, frobenius_schur_check, Side, SearchParams,
};
use fockspectra::{builtin, Grid, HermitianMatrix, ModelSpec, PairGrid, QuadratureRule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(spec: &ModelSpec, n: usize) -> (Grid, PairGrid) {
    let g = Grid::new(spec.d, spec.a, n, QuadratureRule::Midpoint).unwrap();
    let pg = PairGrid::new(&g);
    (g, pg)
}

#[test]
fn decoupled_sigma2_is_range_of_w1_outside_sigma1() {
    let spec = ModelSpec::zero(1, 1.0)
        .with_w1(|x| 3.0 * x[0])
        .with_w2(|x, y| 1.0 + x[0] * x[0] + y[0] * y[0]);
    let (g, pg) = setup(&spec, 16);
    let r = essential_spectrum(&spec, &g, &pg, &SearchParams::default()).unwrap();
    assert_eq!(r.resolution_lo, 0.0);
    let mut expect: Vec<f64> = g.points().map(|x| 3.0 * x[0]).filter(|&v| v < r.m).collect();
    expect.sort_by(f64::total_cmp);
    let mut got: Vec<f64> = r.lower_roots().map(|s| s.z).collect();
    got.sort_by(f64::total_cmp);
    assert_eq!(got.len(), expect.len());
    for (a, b) in got.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-11);
    }
    let above: Vec<f64> = g.points().map(|x| 3.0 * x[0]).filter(|&v| v > r.big_m).collect();
    assert_eq!(r.upper_roots().count(), above.len());
    for root in r.upper_roots() {
        assert!(above.iter().any(|v| (v - root.z).abs() < 1e-11));
    }
    assert!((r.sess_min - expect[0]).abs() < 1e-11);
}

#[test]
fn sigma2_empty_builtin_has_no_roots() {
    let b = builtin("sigma2-empty").unwrap();
    for n in [32, 64] {
        let (g, pg) = setup(&b.spec, n);
        let r = essential_spectrum(&b.spec, &g, &pg, &SearchParams::default()).unwrap();
        assert!(r.sigma2_roots.is_empty());
        assert!(r.sigma2_hull.is_empty());
        assert_eq!(r.sess_min, r.m);
        assert_eq!(r.sess_max, r.big_m);
    }
}

#[test]
fn discrete_above_mirrors_negated_model() {
    let b = builtin("sigma2-empty").unwrap();
    let (g, pg) = setup(&b.spec, 16);
    let r = essential_spectrum(&b.spec, &g, &pg, &SearchParams::default()).unwrap();
    let up = discrete_spectrum_above(&b.spec, &g, &pg, &r).unwrap();
    let neg = b.spec.negated();
    let rn = essential_spectrum(&neg, &g, &pg, &SearchParams::default()).unwrap();
    let down = discrete_spectrum_below(&neg, &g, &pg, &rn).unwrap();
    assert_eq!(up.eigenvalues.len(), down.eigenvalues.len());
    for (u, d) in up.eigenvalues.iter().zip(down.eigenvalues.iter().rev()) {
        assert!((u + d).abs() < 1e-9);
    }
    assert!(up.eigenvalues.iter().all(|&v| v > up.threshold));
    let below = discrete_spectrum_below(&b.spec, &g, &pg, &r).unwrap();
    assert!(below.eigenvalues.iter().all(|&v| v < below.threshold));
}

#[test]
fn three_way_counts_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut nontrivial = 0;
    for _ in 0..8 {
        let spec = random_smooth(&mut rng);
        let (g, pg) = setup(&spec, 16);
        let r = essential_spectrum(&spec, &g, &pg, &SearchParams::default()).unwrap();
        let zs: Vec<f64> = (1..=4).map(|k| r.lower_threshold() - 0.4 * k as f64).collect();
        for c in counting_sweep(&spec, &g, &pg, &zs).unwrap() {
            if c.boundary == 0 {
                assert!(c.agree, "{c:?}");
                nontrivial += usize::from(c.count_a > 0);
            }
        }
    }
    assert!(nontrivial > 0);
}

#[test]
fn congruence_preserves_inertia() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = random_smooth(&mut rng);
    let (g, pg) = setup(&spec, 10);
    let blocks = assemble_blocks(&spec, &g, &pg).unwrap();
    let min_w2 = blocks.h22.iter().copied().fold(f64::INFINITY, f64::min);
    let chk = frobenius_schur_check(&blocks, &spec, &g, min_w2 - 0.5).unwrap();
    assert_eq!(chk.inertia_shifted_a, chk.inertia_block);
    assert!(chk.congruence_residual < 1e-10);
    assert!(frobenius_schur_check(&blocks, &spec, &g, min_w2 + 0.1).is_err());
}

#[test]
fn counting_conventions() {
    let m = HermitianMatrix::from_diagonal(&[-2.0, -1.0, 0.5, 3.0]);
    assert_eq!(count_above(&m, 0.0).unwrap().count, 2);
    assert_eq!(count_below(&m, 0.0).unwrap().count, 2);
    let edge = count_below(&m, 0.5).unwrap();
    assert_eq!((edge.count, edge.boundary), (2, 1));
}

#[test]
fn bs_check_rejects_z_in_range() {
    let b = builtin("mnr-infinite").unwrap();
    let (g, pg) = setup(&b.spec, 16);
    assert!(birman_schwinger_check(&b.spec, &g, &pg, 0.5).is_err());
    let ok = birman_schwinger_check(&b.spec, &g, &pg, -0.25).unwrap();
    assert!(ok.agree);
}

#[test]
fn mnr_upper_roots_sit_above_range() {
    let b = builtin("mnr-infinite").unwrap();
    let (g, pg) = setup(&b.spec, 64);
    let r = essential_spectrum(&b.spec, &g, &pg, &SearchParams::default()).unwrap();
    assert_eq!(r.lower_roots().count(), 0);
    for root in r.upper_roots() {
        assert_eq!(root.side, Side::Above);
        assert!(root.z > r.big_m);
    }
}

#[test]
fn mnr_coarse_grid_has_no_eigenvalue_below_zero() {
    let spec = builtin("mnr-infinite").unwrap().spec;
    let (g, pg) = setup(&spec, 8);
    let a = assemble_blocks(&spec, &g, &pg).unwrap().assemble_a();
    assert_eq!(count_below(&a, 0.0).unwrap().count, 0);
    let delta = fockspectra::schur::delta_at(&spec, &g, &[0.0], 0.0).unwrap();
    assert!((delta - 1.0).abs() < 1e-12);
}
