#![allow(dead_code)]

use fockspectra::ModelSpec;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Composite Simpson rule on `[lo, hi]` with `panels` (even) subintervals.
pub fn simpson(lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (hi - lo) / panels as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..panels {
        let c = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += c * f(lo + k as f64 * h);
    }
    acc * h / 3.0
}

/// `I(x) = int_{-a}^{a} |y|^{2 beta} / (x^2 + y^2) dy` for `beta` in `{1, 2}`.
fn coupling_integral(beta: i32, a: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if beta == 1 { 2.0 * a } else { 2.0 * a.powi(3) / 3.0 };
    }
    if beta == 1 {
        2.0 * a - 2.0 * t * (a / t).atan()
    } else {
        2.0 * a.powi(3) / 3.0 - 2.0 * a * t * t + 2.0 * t.powi(3) * (a / t).atan()
    }
}

/// `d = 1`, `a = 1`, `w2 = x^2 + y^2`, `v1 = |y|^beta`, and `w1` chosen so that
/// `Delta(x; 0) = c |x|^gamma`.
pub fn synthetic(beta: i32, gamma: f64, c: f64) -> ModelSpec {
    let a = 1.0;
    ModelSpec::zero(1, a)
        .with_name("synthetic")
        .with_w2(|x, y| x[0] * x[0] + y[0] * y[0])
        .with_real_v1(move |_, y| y[0].abs().powi(beta))
        .with_w1(move |x| {
            let t = x[0].abs();
            c * t.powf(gamma) + 0.5 * coupling_integral(beta, a, t)
        })
        .with_t0(vec![0.0])
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Smooth real `d = 1` model on `(-1, 1)` with random coefficients.
pub fn random_smooth(rng: &mut ChaCha8Rng) -> ModelSpec {
    let (c0, c1, c2) = (uniform(rng, -2.0, 3.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
    let (b0, b1, b2) = (uniform(rng, 0.0, 2.0), uniform(rng, 0.5, 2.0), uniform(rng, -0.5, 0.5));
    let lam = uniform(rng, 0.2, 1.5);
    let p: [f64; 4] = std::array::from_fn(|_| uniform(rng, -1.0, 1.0));
    let w0 = uniform(rng, -3.0, 3.0);
    let q = uniform(rng, -1.0, 1.0);
    ModelSpec::zero(1, 1.0)
        .with_name("random-smooth")
        .with_w0(w0)
        .with_real_v0(move |x| q * (1.0 + x[0]))
        .with_w1(move |x| c0 + c1 * x[0] + c2 * x[0].cos())
        .with_w2(move |x, y| b0 + b1 * (x[0] * x[0] + y[0] * y[0]) + b2 * (x[0] - y[0]).cos())
        .with_real_v1(move |x, y| lam * (p[0] + p[1] * x[0] + p[2] * y[0] + p[3] * (x[0] * y[0]).sin()))
}

/// Like [`random_smooth`] with a genuinely complex coupling.
pub fn random_complex(rng: &mut ChaCha8Rng) -> ModelSpec {
    let base = random_smooth(rng);
    let k = uniform(rng, -2.0, 2.0);
    let s = uniform(rng, 0.2, 1.0);
    base.with_v1(move |x, y| Complex64::from_polar(s * (1.0 + x[0] * y[0]), k * (x[0] - 2.0 * y[0])))
        .with_v0(move |x| Complex64::new(0.3, x[0]))
}
