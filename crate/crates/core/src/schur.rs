//! The Schur complement `S(z) = Delta(z) + K(z)` of `A - z` and the
//! Birman-Schwinger operator `T(z) = -Delta^{-1/2} K Delta^{-1/2}`.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::HermitianMatrix;
use crate::model::ModelSpec;

/// `|w2 - z|` below this is treated as a pole.
pub const POLE_TOL: f64 = 1e-12;

fn pole(z: f64, node: usize, gap: f64) -> Error {
    Error::PoleProximity { z, node, gap }
}

/// Sums `w_j |v1(x, x_j)|^2 / (w2(x, x_j) - z)^power` over the grid.
fn weighted_sum(spec: &ModelSpec, grid: &Grid, x: &[f64], z: f64, power: i32) -> Result<f64> {
    let mut acc = 0.0;
    for (j, y) in grid.points().enumerate() {
        let num = (spec.v1)(x, y).norm_sqr();
        if num == 0.0 {
            continue;
        }
        let gap = (spec.w2)(x, y) - z;
        if gap.abs() < POLE_TOL {
            return Err(pole(z, j, gap.abs()));
        }
        acc += grid.weight(j) * num / gap.powi(power);
    }
    Ok(acc)
}

/// `Delta(x; z) = w1(x) - z - (1/2) int |v1(x,y)|^2 / (w2(x,y) - z) dy`.
pub fn delta_at(spec: &ModelSpec, grid: &Grid, x: &[f64], z: f64) -> Result<f64> {
    Ok((spec.w1)(x) - z - 0.5 * weighted_sum(spec, grid, x, z, 1)?)
}

/// `d Delta / dz = -1 - (1/2) int |v1(x,y)|^2 / (w2(x,y) - z)^2 dy`.
pub fn delta_derivative_at(spec: &ModelSpec, grid: &Grid, x: &[f64], z: f64) -> Result<f64> {
    Ok(-1.0 - 0.5 * weighted_sum(spec, grid, x, z, 2)?)
}

/// `Delta(x_i; z)` at every node.
pub fn delta_profile(spec: &ModelSpec, grid: &Grid, z: f64) -> Result<Vec<f64>> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| delta_at(spec, grid, grid.point(i), z))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SchurEval {
    pub z: f64,
    pub delta_vals: Vec<f64>,
    /// `sqrt(w_i) K(x_i, x_j; z) sqrt(w_j)`.
    pub k_matrix: HermitianMatrix,
    pub hs_norm_k: f64,
}

impl SchurEval {
    pub fn min_delta(&self) -> f64 {
        self.delta_vals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `S_h(z) = diag(Delta) + K`.
    pub fn schur_matrix(&self) -> HermitianMatrix {
        let mut s = self.k_matrix.clone();
        match &mut s {
            HermitianMatrix::Real(m) => {
                for (k, d) in self.delta_vals.iter().enumerate() {
                    m[(k, k)] += d;
                }
            }
            HermitianMatrix::Complex(m) => {
                for (k, d) in self.delta_vals.iter().enumerate() {
                    m[(k, k)] += d;
                }
            }
        }
        s
    }
}

/// Weight-normalized `K(z)` with
/// `K(x,y;z) = -(1/2) v1(x,y) v1(y,x)* / (w2(x,y) - z)`.
pub fn k_matrix(spec: &ModelSpec, grid: &Grid, z: f64) -> Result<HermitianMatrix> {
    let n = grid.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            (0..n)
                .map(|j| {
                    let y = grid.point(j);
                    let num = (spec.v1)(x, y) * (spec.v1)(y, x).conj();
                    if num.norm_sqr() == 0.0 {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                    let gap = (spec.w2)(x, y) - z;
                    if gap.abs() < POLE_TOL {
                        return Err(pole(z, j, gap.abs()));
                    }
                    Ok(num * (-0.5 * (grid.weight(i) * grid.weight(j)).sqrt() / gap))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(n, n, |i, j| {
        0.5 * (rows[i][j] + rows[j][i].conj())
    });
    Ok(HermitianMatrix::from_complex(m))
}

pub fn schur_eval(spec: &ModelSpec, grid: &Grid, z: f64) -> Result<SchurEval> {
    let delta_vals = delta_profile(spec, grid, z)?;
    let k = k_matrix(spec, grid, z)?;
    let hs_norm_k = k.frobenius_norm();
    Ok(SchurEval {
        z,
        delta_vals,
        k_matrix: k,
        hs_norm_k,
    })
}

/// Upper bound for `hs_norm_k` from `|v1(x,y) v1(y,x)| <= (|v1(x,y)|^2 + |v1(y,x)|^2) / 2`:
/// `(1 / (2 dist)) (sum_ij w_i w_j |v1(x_i,x_j)|^4)^{1/2}` with `dist = min |w2 - z|`.
pub fn hs_bound_k(spec: &ModelSpec, grid: &Grid, z: f64) -> f64 {
    let mut dist = f64::INFINITY;
    let mut l4 = 0.0;
    for (i, x) in grid.points().enumerate() {
        for (j, y) in grid.points().enumerate() {
            dist = dist.min(((spec.w2)(x, y) - z).abs());
            l4 += grid.weight(i) * grid.weight(j) * (spec.v1)(x, y).norm_sqr().powi(2);
        }
    }
    0.5 / dist * l4.sqrt()
}

#[derive(Debug, Clone)]
pub struct BSOperator {
    pub z: f64,
    pub t_matrix: HermitianMatrix,
    pub hs_norm_t: f64,
}

/// `T_h(z) = -D^{-1/2} K D^{-1/2}`, `D = diag(Delta(x_i; z))`.
pub fn bs_operator(spec: &ModelSpec, grid: &Grid, z: f64) -> Result<BSOperator> {
    bs_from_eval(&schur_eval(spec, grid, z)?)
}

pub fn bs_from_eval(eval: &SchurEval) -> Result<BSOperator> {
    let z = eval.z;
    if let Some((node, &value)) = eval
        .delta_vals
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v > 0.0))
    {
        return Err(Error::NonPositiveDelta { z, node, value });
    }
    let s: Vec<f64> = eval.delta_vals.iter().map(|d| 1.0 / d.sqrt()).collect();
    let t_matrix = match &eval.k_matrix {
        HermitianMatrix::Real(k) => {
            HermitianMatrix::Real(DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| -s[i] * k[(i, j)] * s[j]))
        }
        HermitianMatrix::Complex(k) => HermitianMatrix::Complex(DMatrix::from_fn(
            k.nrows(),
            k.ncols(),
            |i, j| -k[(i, j)] * (s[i] * s[j]),
        )),
    };
    let hs_norm_t = t_matrix.frobenius_norm();
    Ok(BSOperator {
        z,
        t_matrix,
        hs_norm_t,
    })
}

/// Writes `x.., z, delta` rows for every node and every `z`.
pub fn write_delta_profile_csv(
    spec: &ModelSpec,
    grid: &Grid,
    zs: &[f64],
    path: &Path,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let coords: Vec<String> = if grid.d() == 1 {
        vec!["x".into()]
    } else {
        (1..=grid.d()).map(|k| format!("x{k}")).collect()
    };
    writeln!(out, "{},z,delta", coords.join(","))?;
    for &z in zs {
        let prof = delta_profile(spec, grid, z)?;
        for (x, d) in grid.points().zip(prof) {
            let xs: Vec<String> = x.iter().map(|c| format!("{c:.12e}")).collect();
            writeln!(out, "{},{z:.12e},{d:.12e}", xs.join(","))?;
        }
    }
    out.flush()?;
    Ok(())
}
