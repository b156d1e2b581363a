//! Parameter functions of the operator matrix and the built-in models.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{gauss_legendre_on, Grid, QuadratureRule};
use crate::table::Table;

pub type RealPointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type ComplexPointFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
pub type RealPairFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type ComplexPairFn = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

/// Tolerance on `|w2(x,y) - w2(y,x)|`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// The data `(w0, v0, w1, v1, w2)` on `Omega = (-a, a)^d`.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub d: usize,
    pub a: f64,
    pub w0: f64,
    pub v0: ComplexPointFn,
    pub w1: RealPointFn,
    pub v1: ComplexPairFn,
    pub w2: RealPairFn,
    /// Integrability exponent offset; `v1(x, .)` is measured in `L^{2+epsilon}`.
    pub epsilon: f64,
    /// Hint for the diagonal minimizer of `w2`.
    pub t0: Option<Vec<f64>>,
    /// True when `v1` (and `v0`) take only real values.
    pub real_coupling: bool,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("a", &self.a)
            .field("w0", &self.w0)
            .field("epsilon", &self.epsilon)
            .field("t0", &self.t0)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    /// All functions zero.
    pub fn zero(d: usize, a: f64) -> Self {
        Self {
            name: "custom".into(),
            d,
            a,
            w0: 0.0,
            v0: Arc::new(|_| Complex64::new(0.0, 0.0)),
            w1: Arc::new(|_| 0.0),
            v1: Arc::new(|_, _| Complex64::new(0.0, 0.0)),
            w2: Arc::new(|_, _| 0.0),
            epsilon: 2.0,
            t0: None,
            real_coupling: true,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_w0(mut self, w0: f64) -> Self {
        self.w0 = w0;
        self
    }

    pub fn with_v0(mut self, f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        self.v0 = Arc::new(f);
        self.real_coupling = false;
        self
    }

    pub fn with_real_v0(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.v0 = Arc::new(move |x| Complex64::new(f(x), 0.0));
        self
    }

    pub fn with_w1(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.w1 = Arc::new(f);
        self
    }

    pub fn with_v1(
        mut self,
        f: impl Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        self.v1 = Arc::new(f);
        self.real_coupling = false;
        self
    }

    pub fn with_real_v1(mut self, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.v1 = Arc::new(move |x, y| Complex64::new(f(x, y), 0.0));
        self
    }

    pub fn with_w2(mut self, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.w2 = Arc::new(f);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_t0(mut self, t0: Vec<f64>) -> Self {
        self.t0 = Some(t0);
        self
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.a).powi(self.d as i32)
    }

    /// The model of `-H`: every parameter function changes sign. Spectral
    /// statements above `max sigma_ess(H)` become statements below
    /// `min sigma_ess(-H)`.
    pub fn negated(&self) -> Self {
        let (v0, w1, v1, w2) = (
            self.v0.clone(),
            self.w1.clone(),
            self.v1.clone(),
            self.w2.clone(),
        );
        Self {
            name: format!("-({})", self.name),
            w0: -self.w0,
            v0: Arc::new(move |x| -v0(x)),
            w1: Arc::new(move |x| -w1(x)),
            v1: Arc::new(move |x, y| -v1(x, y)),
            w2: Arc::new(move |x, y| -w2(x, y)),
            t0: None,
            ..self.clone()
        }
    }

    /// Multiplies `v1` by `lambda`.
    pub fn scaled_coupling(&self, lambda: f64) -> Self {
        let v1 = self.v1.clone();
        Self {
            v1: Arc::new(move |x, y| v1(x, y) * lambda),
            ..self.clone()
        }
    }

    /// Checks symmetry of `w2` and finiteness of every function on the grid.
    pub fn validate_on(&self, grid: &Grid) -> Result<()> {
        if grid.d() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "grid has d = {}, model has d = {}",
                grid.d(),
                self.d
            )));
        }
        if !self.w0.is_finite() {
            return Err(Error::NonFinite {
                function: "w0",
                point: vec![],
            });
        }
        for (i, x) in grid.points().enumerate() {
            finite_c("v0", (self.v0)(x), x)?;
            finite_r("w1", (self.w1)(x), x)?;
            for y in grid.points().skip(i) {
                let fwd = (self.w2)(x, y);
                let bwd = (self.w2)(y, x);
                let xy = || [x, y].concat();
                finite_r("w2", fwd, &xy())?;
                finite_r("w2", bwd, &xy())?;
                finite_c("v1", (self.v1)(x, y), &xy())?;
                finite_c("v1", (self.v1)(y, x), &xy())?;
                let deviation = (fwd - bwd).abs();
                if deviation > SYMMETRY_TOL {
                    return Err(Error::AsymmetricW2 {
                        deviation,
                        x: x.to_vec(),
                        y: y.to_vec(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn finite_r(function: &'static str, v: f64, point: &[f64]) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            function,
            point: point.to_vec(),
        })
    }
}

fn finite_c(function: &'static str, v: Complex64, point: &[f64]) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            function,
            point: point.to_vec(),
        })
    }
}

/// Discrete integrability norms of `v1` on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionAReport {
    /// `max_i (sum_j w_j |v1(x_i, x_j)|^{2+eps})^{1/(2+eps)}`.
    pub sup_norm_2pe: f64,
    /// `max_j (sum_i w_i |v1(x_i, x_j)|^{2+4/eps})^{1/(2+4/eps)}`.
    pub sup_norm_2p4e: f64,
    pub sup_w1: f64,
    pub sup_w2: f64,
    pub pass: bool,
}

#[allow(clippy::needless_range_loop)]
pub fn check_assumption_a(spec: &ModelSpec, grid: &Grid) -> Result<AssumptionAReport> {
    spec.validate_on(grid)?;
    let p = 2.0 + spec.epsilon;
    let q = 2.0 + 4.0 / spec.epsilon;
    let n = grid.len();
    let mut row = vec![0.0; n];
    let mut col = vec![0.0; n];
    let mut sup_w1 = 0.0f64;
    let mut sup_w2 = 0.0f64;
    for i in 0..n {
        let x = grid.point(i);
        sup_w1 = sup_w1.max((spec.w1)(x).abs());
        for j in 0..n {
            let y = grid.point(j);
            let v = (spec.v1)(x, y).norm();
            row[i] += grid.weight(j) * v.powf(p);
            col[j] += grid.weight(i) * v.powf(q);
            sup_w2 = sup_w2.max((spec.w2)(x, y).abs());
        }
    }
    let sup_norm_2pe = row.iter().map(|s| s.powf(1.0 / p)).fold(0.0, f64::max);
    let sup_norm_2p4e = col.iter().map(|s| s.powf(1.0 / q)).fold(0.0, f64::max);
    let pass = [sup_norm_2pe, sup_norm_2p4e, sup_w1, sup_w2]
        .iter()
        .all(|v| v.is_finite());
    if !pass {
        return Err(Error::NonFinite {
            function: "v1 integrability norm",
            point: vec![],
        });
    }
    Ok(AssumptionAReport {
        sup_norm_2pe,
        sup_norm_2p4e,
        sup_w1,
        sup_w2,
        pass,
    })
}

/// Reference facts attached to a built-in model.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedFacts {
    /// `inf w2`.
    pub m: f64,
    /// `sup w2`.
    pub big_m: f64,
    pub sigma2_empty: Option<bool>,
    pub t0: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct BuiltinModel {
    pub name: &'static str,
    pub spec: ModelSpec,
    pub expected: ExpectedFacts,
}

pub const BUILTIN_NAMES: [&str; 2] = ["mnr-infinite", "sigma2-empty"];

pub fn builtin(name: &str) -> Result<BuiltinModel> {
    match name {
        "mnr-infinite" => Ok(mnr_infinite()),
        "sigma2-empty" => {
            let d = 1;
            Ok(sigma2_empty(d, sigma2_empty_default_a(d)))
        }
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

fn eps_cos(t: f64) -> f64 {
    1.0 - t.cos()
}

/// `d = 1`, `Omega = (-pi, pi)`, `w1 = 1 + sin^2 x`, `v1 = sqrt(3/pi) sin x`,
/// `w2 = e(x) + 2 e(x+y) + e(y)` with `e(t) = 1 - cos t`; `w0 = 1`, `v0 = 0`.
pub fn mnr_infinite() -> BuiltinModel {
    let c = (3.0 / std::f64::consts::PI).sqrt();
    let spec = ModelSpec::zero(1, std::f64::consts::PI)
        .with_name("mnr-infinite")
        .with_w0(1.0)
        .with_w1(|x| 1.0 + x[0].sin().powi(2))
        .with_real_v1(move |x, _| c * x[0].sin())
        .with_w2(|x, y| eps_cos(x[0]) + 2.0 * eps_cos(x[0] + y[0]) + eps_cos(y[0]))
        .with_t0(vec![0.0]);
    BuiltinModel {
        name: "mnr-infinite",
        spec,
        expected: ExpectedFacts {
            m: 0.0,
            // attained on the diagonal where cos x = -1/4
            big_m: 6.25,
            sigma2_empty: None,
            t0: Some(vec![0.0]),
        },
    }
}

/// Half-width giving `vol(Omega) = 2`.
pub fn sigma2_empty_default_a(d: usize) -> f64 {
    2f64.powf((1.0 - d as f64) / d as f64)
}

/// Model with empty `Sigma_2` over the base `w2 = sum_k (2 - cos x_k - cos y_k)`
/// (requires `a <= pi`), for which `m = 0` and `M = 2d(1 - cos a)`.
pub fn sigma2_empty(d: usize, a: f64) -> BuiltinModel {
    let w2 = move |x: &[f64], y: &[f64]| -> f64 {
        x.iter().zip(y).map(|(p, q)| 2.0 - p.cos() - q.cos()).sum()
    };
    let m = 0.0;
    let big_m = 2.0 * d as f64 * (1.0 - a.cos());
    let vol = (2.0 * a).powi(d as i32);
    // int_Omega w2(x, y) dy
    let side = (2.0 * a).powi(d as i32 - 1);
    let integral = move |x: &[f64]| -> f64 {
        vol * x.iter().map(|p| 2.0 - p.cos()).sum::<f64>() - d as f64 * side * 2.0 * a.sin()
    };
    let spec = sigma2_empty_with(d, a, Arc::new(w2), m, big_m, Arc::new(integral));
    BuiltinModel {
        name: "sigma2-empty",
        spec,
        expected: ExpectedFacts {
            m,
            big_m,
            sigma2_empty: Some(true),
            t0: Some(vec![0.0; d]),
        },
    }
}

/// The same construction over an arbitrary symmetric base `w2` with known
/// range `[m, big_m]`; `int w2(x, y) dy` is computed by Gauss-Legendre
/// quadrature with `n_quad` nodes per axis.
pub fn sigma2_empty_from_base(
    d: usize,
    a: f64,
    w2: RealPairFn,
    m: f64,
    big_m: f64,
    n_quad: usize,
) -> Result<ModelSpec> {
    let grid = Grid::new(d, a, n_quad, QuadratureRule::GaussLegendre)?;
    let w2_int = w2.clone();
    let integral = move |x: &[f64]| -> f64 {
        grid.points()
            .zip(grid.weights())
            .map(|(y, w)| w * w2_int(x, y))
            .sum()
    };
    Ok(sigma2_empty_with(d, a, w2, m, big_m, Arc::new(integral)))
}

fn sigma2_empty_with(
    d: usize,
    a: f64,
    w2: RealPairFn,
    m: f64,
    big_m: f64,
    integral: RealPointFn,
) -> ModelSpec {
    let vol = (2.0 * a).powi(d as i32);
    let scale = (2.0 / vol).sqrt();
    let w2_v = w2.clone();
    let w2_s = w2.clone();
    ModelSpec::zero(d, a)
        .with_name("sigma2-empty")
        .with_w0(big_m + 1.0)
        .with_w1(move |x| m + big_m - integral(x) / vol)
        .with_real_v1(move |x, y| {
            let t = w2_v(x, y);
            scale * ((t - m).max(0.0) * (big_m - t).max(0.0)).sqrt()
        })
        .with_w2(move |x, y| w2_s(x, y))
        .with_t0(vec![0.0; d])
}

/// One parameter function as written in a config document.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum FunctionSource {
    Number(f64),
    Expr { expr: String },
    Table { table: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainSection {
    d: usize,
    a: f64,
    epsilon: Option<f64>,
    t0: Option<Vec<f64>>,
    name: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionsSection {
    w0: Option<FunctionSource>,
    v0: Option<FunctionSource>,
    w1: Option<FunctionSource>,
    v1: Option<FunctionSource>,
    w2: Option<FunctionSource>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    domain: DomainSection,
    #[serde(default)]
    functions: FunctionsSection,
}

/// Resolves a builtin name, or otherwise reads a TOML config file.
pub fn load_model(source: &str) -> Result<ModelSpec> {
    if BUILTIN_NAMES.contains(&source) {
        return builtin(source).map(|b| b.spec);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(Error::UnknownBuiltin(source.to_string()));
    }
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}

/// Parses a config document; relative table paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ModelSpec> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let dom = doc.domain;
    if dom.d == 0 || !(dom.a > 0.0) || !dom.a.is_finite() {
        return Err(Error::Config(format!(
            "domain needs d >= 1 and a > 0, got d = {}, a = {}",
            dom.d, dom.a
        )));
    }
    let (d, a) = (dom.d, dom.a);
    if let Some(t0) = &dom.t0 {
        if t0.len() != d || t0.iter().any(|c| c.abs() >= a) {
            return Err(Error::Config(format!("t0 = {t0:?} is not a point of the domain")));
        }
    }
    let epsilon = dom.epsilon.unwrap_or(2.0);
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }

    let mut spec = ModelSpec::zero(d, a).with_epsilon(epsilon);
    spec.name = dom.name.unwrap_or_else(|| "custom".into());
    spec.t0 = dom.t0;
    let f = doc.functions;
    let ctx = Ctx { d, a, base_dir };

    if let Some(src) = f.w0 {
        spec.w0 = match src {
            FunctionSource::Number(v) => v,
            FunctionSource::Expr { expr } => {
                let e = Expr::parse(&expr, d, 1)?;
                real_only("w0", &e)?;
                e.eval(&vec![0.0; d], &[]).re
            }
            FunctionSource::Table { .. } => {
                return Err(Error::Config("w0 is a number, not a table".into()))
            }
        };
    }
    if let Some(src) = f.v0 {
        let (fun, real) = ctx.complex_fn(src, 1)?;
        spec.v0 = Arc::new(move |x| fun(x, &[]));
        spec.real_coupling &= real;
    }
    if let Some(src) = f.w1 {
        let fun = ctx.real_fn(src, 1, "w1")?;
        spec.w1 = Arc::new(move |x| fun(x, &[]));
    }
    if let Some(src) = f.v1 {
        let (fun, real) = ctx.complex_fn(src, 2)?;
        spec.v1 = fun;
        spec.real_coupling &= real;
    }
    if let Some(src) = f.w2 {
        let is_table = matches!(src, FunctionSource::Table { .. });
        let fun = ctx.real_fn(src.clone(), 2, "w2")?;
        if is_table {
            if let FunctionSource::Table { table } = &src {
                check_table_symmetry(&Table::from_path(&base_dir.join(table), 2 * d)?, d)?;
            }
        }
        spec.w2 = fun;
    }

    // Catch asymmetric or non-finite expressions early on a coarse grid.
    spec.validate_on(&Grid::new(d, a, if d == 1 { 16 } else { 6 }, QuadratureRule::Midpoint)?)?;
    Ok(spec)
}

fn real_only(name: &str, e: &Expr) -> Result<()> {
    if e.uses_imaginary() {
        Err(Error::Config(format!("{name} must be real-valued")))
    } else {
        Ok(())
    }
}

struct Ctx<'a> {
    d: usize,
    a: f64,
    base_dir: &'a Path,
}

impl Ctx<'_> {
    fn table(&self, path: &Path, arity: usize) -> Result<Table> {
        let full = self.base_dir.join(path);
        let t = Table::from_path(&full, arity * self.d)?;
        if !t.covers(self.a) {
            return Err(Error::Table {
                path: full.display().to_string(),
                msg: format!("nodes do not cover [-{a}, {a}]", a = self.a),
            });
        }
        Ok(t)
    }

    fn complex_fn(&self, src: FunctionSource, arity: usize) -> Result<(ComplexPairFn, bool)> {
        match src {
            FunctionSource::Number(v) => Ok((Arc::new(move |_, _| Complex64::new(v, 0.0)), true)),
            FunctionSource::Expr { expr } => {
                let e = Expr::parse(&expr, self.d, arity)?;
                let real = !e.uses_imaginary();
                Ok((Arc::new(move |x, y| e.eval(x, y)), real))
            }
            FunctionSource::Table { table } => {
                let t = self.table(&table, arity)?;
                let real = !t.is_complex();
                Ok((Arc::new(move |x, y| t.eval(&[x, y].concat())), real))
            }
        }
    }

    fn real_fn(&self, src: FunctionSource, arity: usize, name: &str) -> Result<RealPairFn> {
        match src {
            FunctionSource::Number(v) => Ok(Arc::new(move |_, _| v)),
            FunctionSource::Expr { expr } => {
                let e = Expr::parse(&expr, self.d, arity)?;
                real_only(name, &e)?;
                Ok(Arc::new(move |x, y| e.eval(x, y).re))
            }
            FunctionSource::Table { table } => {
                let t = self.table(&table, arity)?;
                if t.is_complex() {
                    return Err(Error::Config(format!("{name} must be real-valued")));
                }
                Ok(Arc::new(move |x, y| t.eval(&[x, y].concat()).re))
            }
        }
    }
}

/// Compares the tabulated `w2` at every node with its value at the swapped node.
fn check_table_symmetry(t: &Table, d: usize) -> Result<()> {
    let axes = t.axes();
    let counts: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = counts.iter().product();
    let mut idx = vec![0usize; 2 * d];
    for _ in 0..total {
        let p: Vec<f64> = idx.iter().zip(axes).map(|(&k, ax)| ax[k]).collect();
        let (x, y) = p.split_at(d);
        let swapped = [y, x].concat();
        let deviation = (t.eval(&p) - t.eval(&swapped)).norm();
        if deviation > SYMMETRY_TOL {
            return Err(Error::AsymmetricW2 {
                deviation,
                x: x.to_vec(),
                y: y.to_vec(),
            });
        }
        for pos in (0..2 * d).rev() {
            idx[pos] += 1;
            if idx[pos] < counts[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
    Ok(())
}

/// `int_Omega f(x, y) dy` by Gauss-Legendre quadrature (used for reference values).
pub fn integrate_y(d: usize, a: f64, n: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre_on(-a, a, n);
    let total = n.pow(d as u32);
    let mut idx = vec![0usize; d];
    let mut y = vec![0.0; d];
    let mut acc = 0.0;
    for _ in 0..total {
        let mut w = 1.0;
        for k in 0..d {
            y[k] = nodes[idx[k]];
            w *= weights[idx[k]];
        }
        acc += w * f(&y);
        for pos in (0..d).rev() {
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
    acc
}
