mod common;

use std::f64::consts::PI;

use common::simpson;
use fockspectra::model::{self, check_assumption_a, sigma2_empty_from_base};
use fockspectra::spectra::{essential_spectrum, SearchParams};
use fockspectra::{builtin, load_model, Error, Grid, PairGrid, QuadratureRule};

#[test]
fn assumption_a_norms_match_simpson_oracle() {
    let b = builtin("mnr-infinite").unwrap();
    let g = Grid::new(1, PI, 64, QuadratureRule::Midpoint).unwrap();
    let rep = check_assumption_a(&b.spec, &g).unwrap();
    let c = (3.0 / PI).sqrt();

    // argmax node of |sin x| on the midpoint grid
    let xi = g
        .points()
        .map(|x| x[0])
        .max_by(|p, q| p.sin().abs().total_cmp(&q.sin().abs()))
        .unwrap();
    let p = 2.0 + b.spec.epsilon;
    let row = simpson(-PI, PI, 1_000_000, |_| (c * xi.sin()).abs().powf(p)).powf(1.0 / p);
    assert!((rep.sup_norm_2pe - row).abs() < 1e-9 * row);

    let q = 2.0 + 4.0 / b.spec.epsilon;
    let col = simpson(-PI, PI, 1_000_000, |x| (c * x.sin()).abs().powf(q)).powf(1.0 / q);
    assert!((rep.sup_norm_2p4e - col).abs() < 1e-9 * col);
    // closed form: int sin^4 = 3 pi / 4
    assert!((col - c * (0.75 * PI).powf(0.25)).abs() < 1e-12);
    assert!(rep.pass);
    assert!((rep.sup_w2 - 6.25).abs() < 1e-2);
}

#[test]
fn mnr_range_matches_dense_sampling() {
    let b = builtin("mnr-infinite").unwrap();
    let k = 1000;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=k {
        for j in 0..=k {
            let x = -PI + 2.0 * PI * i as f64 / k as f64;
            let y = -PI + 2.0 * PI * j as f64 / k as f64;
            let v = (b.spec.w2)(&[x], &[y]);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    assert!((lo - b.expected.m).abs() < 1e-12);
    assert!((hi - b.expected.big_m).abs() < 1e-4);

    let g = Grid::new(1, PI, 64, QuadratureRule::Midpoint).unwrap();
    let r = essential_spectrum(&b.spec, &g, &PairGrid::new(&g), &SearchParams::default()).unwrap();
    assert!(r.m >= b.expected.m && r.m - b.expected.m < 5e-3);
    assert!(r.big_m <= b.expected.big_m && b.expected.big_m - r.big_m < 5e-3);
}

#[test]
fn sigma2_empty_facts() {
    for (d, a) in [(1, 1.0), (1, 2.0), (2, model::sigma2_empty_default_a(2))] {
        let b = model::sigma2_empty(d, a);
        assert_eq!(b.expected.m, 0.0);
        assert!((b.expected.big_m - 2.0 * d as f64 * (1.0 - a.cos())).abs() < 1e-15);
        assert_eq!(b.expected.sigma2_empty, Some(true));
        let x = vec![0.3; d];
        let y = vec![-0.7; d];
        let w2 = (b.spec.w2)(&x, &y);
        assert!((w2 - (b.spec.w2)(&y, &x)).abs() < 1e-15);
        assert!(b.spec.w0 > b.expected.big_m);
        // v1 vanishes where w2 hits either end of its range
        assert_eq!((b.spec.v1)(&vec![0.0; d], &vec![0.0; d]).norm(), 0.0);
    }
    assert_eq!(model::sigma2_empty_default_a(1), 1.0);
    assert!((model::sigma2_empty_default_a(2) - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn quadrature_base_agrees_with_closed_form() {
    let a = 1.0;
    let b = model::sigma2_empty(1, a);
    let spec = sigma2_empty_from_base(
        1,
        a,
        b.spec.w2.clone(),
        b.expected.m,
        b.expected.big_m,
        40,
    )
    .unwrap();
    for x in [-0.9, -0.2, 0.0, 0.55] {
        assert!(((spec.w1)(&[x]) - (b.spec.w1)(&[x])).abs() < 1e-12);
        for y in [-0.4, 0.8] {
            assert!(((spec.v1)(&[x], &[y]) - (b.spec.v1)(&[x], &[y])).norm() < 1e-12);
        }
    }
}

#[test]
fn config_round_trip_with_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("x,y,value\n");
    let nodes = [-1.0, 0.0, 1.0];
    for x in nodes {
        for y in nodes {
            csv.push_str(&format!("{x},{y},{}\n", 1.0 + x * x + y * y));
        }
    }
    std::fs::write(dir.path().join("w2.csv"), csv).unwrap();
    let cfg = dir.path().join("model.toml");
    std::fs::write(
        &cfg,
        r#"
[domain]
name = "tabled"
d = 1
a = 1.0
epsilon = 1.5

[functions]
w0 = 2.0
v0 = { expr = "cos(x)" }
w1 = { expr = "1 + x^2" }
v1 = { expr = "sqrt(abs(x*y))" }
w2 = { table = "w2.csv" }
"#,
    )
    .unwrap();
    let spec = load_model(cfg.to_str().unwrap()).unwrap();
    assert_eq!(spec.name, "tabled");
    assert_eq!(spec.epsilon, 1.5);
    assert_eq!(spec.w0, 2.0);
    assert!(spec.real_coupling);
    assert!(((spec.w1)(&[0.5]) - 1.25).abs() < 1e-15);
    assert!(((spec.v1)(&[0.5], &[-0.5]).re - 0.5).abs() < 1e-15);
    // bilinear interpolation of the tabled w2
    assert!(((spec.w2)(&[0.5], &[0.0]) - 1.5).abs() < 1e-15);
    assert!(((spec.v0)(&[0.0]).re - 1.0).abs() < 1e-15);
}

#[test]
fn builtin_lookup() {
    for name in model::BUILTIN_NAMES {
        assert_eq!(builtin(name).unwrap().name, name);
        assert_eq!(load_model(name).unwrap().name, name);
    }
    assert!(matches!(builtin("nope"), Err(Error::UnknownBuiltin(_))));
}

#[test]
fn nan_coupling_is_rejected() {
    let spec = fockspectra::ModelSpec::zero(1, 1.0).with_real_v1(|x, _| if x[0] > 0.5 { f64::NAN } else { 0.0 });
    let g = Grid::new(1, 1.0, 8, QuadratureRule::Midpoint).unwrap();
    assert!(matches!(check_assumption_a(&spec, &g), Err(Error::NonFinite { .. })));
}
