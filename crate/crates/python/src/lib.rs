//! Python bindings.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fockspectra::finiteness::{
    estimate_exponents, finiteness_verdict, locate_t0, VerdictParams,
};
use fockspectra::spectra::{
    birman_schwinger_check as bs_check, discrete_spectrum_above, discrete_spectrum_below,
    essential_spectrum as ess_spec, SearchParams, Side,
};
use fockspectra::verify::{singular_sequence_norms, SingularSeqConfig};
use fockspectra::{model, schur, Grid as CoreGrid, ModelSpec, PairGrid, QuadratureRule};

create_exception!(fockspectra_py, FockspectraError, PyException);

fn err(e: fockspectra::Error) -> PyErr {
    FockspectraError::new_err(e.to_string())
}

fn check_dim(what: &str, p: &[f64], d: usize) -> PyResult<()> {
    if p.len() != d {
        return Err(FockspectraError::new_err(format!(
            "{what} has {} coordinates, model has d = {d}",
            p.len()
        )));
    }
    Ok(())
}

#[pyclass(name = "Model", frozen, skip_from_py_object, module = "fockspectra_py")]
#[derive(Clone)]
struct Model {
    spec: ModelSpec,
}

#[pymethods]
impl Model {
    /// Built-in model by name.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(Self {
            spec: model::builtin(name).map_err(err)?.spec,
        })
    }

    /// Built-in name or path to a TOML config.
    #[staticmethod]
    fn load(source: &str) -> PyResult<Self> {
        Ok(Self {
            spec: fockspectra::load_model(source).map_err(err)?,
        })
    }

    #[staticmethod]
    fn builtin_names() -> Vec<&'static str> {
        model::BUILTIN_NAMES.to_vec()
    }

    #[getter]
    fn name(&self) -> String {
        self.spec.name.clone()
    }

    #[getter]
    fn d(&self) -> usize {
        self.spec.d
    }

    #[getter]
    fn a(&self) -> f64 {
        self.spec.a
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    #[getter]
    fn w0(&self) -> f64 {
        self.spec.w0
    }

    fn w1(&self, x: Vec<f64>) -> PyResult<f64> {
        check_dim("x", &x, self.spec.d)?;
        Ok((self.spec.w1)(&x))
    }

    fn w2(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        check_dim("x", &x, self.spec.d)?;
        check_dim("y", &y, self.spec.d)?;
        Ok((self.spec.w2)(&x, &y))
    }

    fn v1(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<num_complex::Complex64> {
        check_dim("x", &x, self.spec.d)?;
        check_dim("y", &y, self.spec.d)?;
        Ok((self.spec.v1)(&x, &y))
    }

    /// The same model with `v0` and `v1` multiplied by `lam`.
    fn scaled_coupling(&self, lam: f64) -> Self {
        Self {
            spec: self.spec.scaled_coupling(lam),
        }
    }

    fn negated(&self) -> Self {
        Self {
            spec: self.spec.negated(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(name={:?}, d={}, a={})",
            self.spec.name, self.spec.d, self.spec.a
        )
    }
}

#[pyclass(name = "Grid", frozen, module = "fockspectra_py")]
struct Grid {
    inner: CoreGrid,
    pairs: PairGrid,
}

#[pymethods]
impl Grid {
    #[new]
    #[pyo3(signature = (d, a, n, rule = "midpoint"))]
    fn new(d: usize, a: f64, n: usize, rule: &str) -> PyResult<Self> {
        let rule: QuadratureRule = rule.parse().map_err(err)?;
        let inner = CoreGrid::new(d, a, n, rule).map_err(err)?;
        Ok(Self {
            pairs: PairGrid::new(&inner),
            inner,
        })
    }

    /// Grid matching the domain of `model`.
    #[staticmethod]
    #[pyo3(signature = (model, n, rule = "midpoint"))]
    fn for_model(model: &Model, n: usize, rule: &str) -> PyResult<Self> {
        Self::new(model.spec.d, model.spec.a, n, rule)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points().map(<[f64]>::to_vec).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }
}

fn same_domain(m: &Model, g: &Grid) -> PyResult<()> {
    if m.spec.d != g.inner.d() || m.spec.a != g.inner.a() {
        return Err(FockspectraError::new_err(
            "grid domain does not match the model domain",
        ));
    }
    Ok(())
}

/// Integrability norms of `v1` and sup norms of `w1`, `w2`.
#[pyfunction]
fn check_assumption_a<'py>(py: Python<'py>, model: &Model, grid: &Grid) -> PyResult<Bound<'py, PyDict>> {
    same_domain(model, grid)?;
    let r = model::check_assumption_a(&model.spec, &grid.inner).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("sup_norm_2pe", r.sup_norm_2pe)?;
    out.set_item("sup_norm_2p4e", r.sup_norm_2p4e)?;
    out.set_item("sup_w1", r.sup_w1)?;
    out.set_item("sup_w2", r.sup_w2)?;
    out.set_item("pass", r.pass)?;
    Ok(out)
}

/// `Delta(x; z)`.
#[pyfunction]
fn delta(model: &Model, grid: &Grid, x: Vec<f64>, z: f64) -> PyResult<f64> {
    same_domain(model, grid)?;
    check_dim("x", &x, model.spec.d)?;
    schur::delta_at(&model.spec, &grid.inner, &x, z).map_err(err)
}

/// Hilbert-Schmidt norms of `K(z)` and, when defined, `T(z)`.
#[pyfunction]
fn hs_norms<'py>(py: Python<'py>, model: &Model, grid: &Grid, z: f64) -> PyResult<Bound<'py, PyDict>> {
    same_domain(model, grid)?;
    let e = schur::schur_eval(&model.spec, &grid.inner, z).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("k", e.hs_norm_k)?;
    out.set_item("t", schur::bs_from_eval(&e).ok().map(|t| t.hs_norm_t))?;
    Ok(out)
}

#[pyfunction]
fn essential_spectrum<'py>(py: Python<'py>, model: &Model, grid: &Grid) -> PyResult<Bound<'py, PyDict>> {
    same_domain(model, grid)?;
    let r = ess_spec(&model.spec, &grid.inner, &grid.pairs, &SearchParams::default()).map_err(err)?;
    let side = |s: Side| r.sigma2_roots.iter().filter(|q| q.side == s).map(|q| q.z).collect::<Vec<_>>();
    let out = PyDict::new(py);
    out.set_item("m", r.m)?;
    out.set_item("M", r.big_m)?;
    out.set_item("sigma2_below", side(Side::Below))?;
    out.set_item("sigma2_above", side(Side::Above))?;
    out.set_item("sigma2_hull", r.sigma2_hull.clone())?;
    out.set_item("sess_min", r.sess_min)?;
    out.set_item("sess_max", r.sess_max)?;
    out.set_item("lower_threshold", r.lower_threshold())?;
    out.set_item("upper_threshold", r.upper_threshold())?;
    Ok(out)
}

/// Eigenvalues of the discretized operator below (or above) the essential spectrum.
#[pyfunction]
#[pyo3(signature = (model, grid, above = false))]
fn discrete_spectrum(model: &Model, grid: &Grid, above: bool) -> PyResult<Vec<f64>> {
    same_domain(model, grid)?;
    let r = ess_spec(&model.spec, &grid.inner, &grid.pairs, &SearchParams::default()).map_err(err)?;
    let s = if above {
        discrete_spectrum_above(&model.spec, &grid.inner, &grid.pairs, &r)
    } else {
        discrete_spectrum_below(&model.spec, &grid.inner, &grid.pairs, &r)
    }
    .map_err(err)?;
    Ok(s.eigenvalues)
}

/// Three-way eigenvalue count below `z`.
#[pyfunction]
fn birman_schwinger_check<'py>(py: Python<'py>, model: &Model, grid: &Grid, z: f64) -> PyResult<Bound<'py, PyDict>> {
    same_domain(model, grid)?;
    let c = bs_check(&model.spec, &grid.inner, &grid.pairs, z).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("z", c.z)?;
    out.set_item("count_a", c.count_a)?;
    out.set_item("count_s", c.count_s)?;
    out.set_item("count_t", c.count_t)?;
    out.set_item("boundary", c.boundary)?;
    out.set_item("agree", c.agree)?;
    Ok(out)
}

/// Exponent estimates and the finiteness verdict.
#[pyfunction]
#[pyo3(signature = (model, n = 64, levels = vec![32, 64, 128], delta = None, rule = "midpoint"))]
fn finiteness<'py>(
    py: Python<'py>,
    model: &Model,
    n: usize,
    levels: Vec<usize>,
    delta: Option<f64>,
    rule: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = &model.spec;
    let rule: QuadratureRule = rule.parse().map_err(err)?;
    let grid = CoreGrid::new(spec.d, spec.a, n, rule).map_err(err)?;
    let r = ess_spec(spec, &grid, &PairGrid::new(&grid), &SearchParams::default()).map_err(err)?;
    let t0 = locate_t0(spec, &grid, &r)
        .ok_or_else(|| FockspectraError::new_err("no isolated minimizer of w2 on the diagonal"))?;
    let est = estimate_exponents(spec, &grid, &r, &t0, delta.unwrap_or(spec.a / 4.0)).map_err(err)?;
    let grids = levels
        .iter()
        .map(|&k| CoreGrid::new(spec.d, spec.a, k, rule))
        .collect::<fockspectra::Result<Vec<_>>>()
        .map_err(err)?;
    let f = finiteness_verdict(spec, &grids, &est, &VerdictParams::default()).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("t0", t0)?;
    out.set_item("alpha", est.alpha_hat)?;
    out.set_item("beta", est.beta_hat)?;
    out.set_item("gamma", est.gamma_hat)?;
    out.set_item("fit_r2", est.fit_r2.to_vec())?;
    out.set_item("hs_trend", f.hs_trend.clone())?;
    out.set_item("verdict", f.verdict.name())?;
    Ok(out)
}

/// `(n, ||H12 psi_n||, ||(H22 - z0) psi_n||, bound)` rows.
#[pyfunction]
#[pyo3(signature = (model, x0, y0, n_max = 6))]
fn singular_sequence(model: &Model, x0: Vec<f64>, y0: Vec<f64>, n_max: usize) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let rep = singular_sequence_norms(&model.spec, &SingularSeqConfig::new(x0, y0, n_max)).map_err(err)?;
    Ok(rep
        .rows
        .iter()
        .map(|r| (r.n, r.norm_h12, r.norm_h22_shift, r.bound))
        .collect())
}

#[pymodule]
fn fockspectra_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FockspectraError", m.py().get_type::<FockspectraError>())?;
    m.add_class::<Model>()?;
    m.add_class::<Grid>()?;
    m.add_function(wrap_pyfunction!(check_assumption_a, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(hs_norms, m)?)?;
    m.add_function(wrap_pyfunction!(essential_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(birman_schwinger_check, m)?)?;
    m.add_function(wrap_pyfunction!(finiteness, m)?)?;
    m.add_function(wrap_pyfunction!(singular_sequence, m)?)?;
    Ok(())
}
