//! Matrix blocks of the discretized operator in weight-normalized coordinates
//! `u_i = sqrt(w_i) f(x_i)`, `u_ij = sqrt(W_ij) f(x_i, x_j)`.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, PairGrid};
use crate::linalg::HermitianMatrix;
use crate::model::ModelSpec;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBlocks {
    pub h00: f64,
    /// Row `h01_s = sqrt(w_s) v0(x_s)`.
    pub h01: Vec<Complex64>,
    /// Diagonal of `H11`.
    pub h11: Vec<f64>,
    /// Row `i` of `H12` as `(pair index, value)`; only pairs containing `i`.
    pub h12: Vec<Vec<(usize, Complex64)>>,
    /// Diagonal of `H22`.
    pub h22: Vec<f64>,
}

pub fn assemble_blocks(spec: &ModelSpec, grid: &Grid, pair_grid: &PairGrid) -> Result<DiscreteBlocks> {
    if grid.d() != spec.d {
        return Err(Error::DimensionMismatch(format!(
            "grid has d = {}, model has d = {}",
            grid.d(),
            spec.d
        )));
    }
    if pair_grid.base() != grid {
        return Err(Error::DimensionMismatch(
            "pair grid was built over a different base grid".into(),
        ));
    }
    let n = grid.len();
    let h01 = (0..n)
        .map(|s| (spec.v0)(grid.point(s)) * grid.weight(s).sqrt())
        .collect();
    let h11 = grid.points().map(|x| (spec.w1)(x)).collect();
    let h12 = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            (0..n)
                .map(|j| {
                    let mult = if i == j { 1.0 } else { 2.0 };
                    let coef = (grid.weight(j) / mult).sqrt();
                    (pair_grid.index_of(i, j), (spec.v1)(x, grid.point(j)) * coef)
                })
                .collect()
        })
        .collect();
    let h22 = pair_grid
        .pairs()
        .iter()
        .map(|&(i, j)| (spec.w2)(grid.point(i), grid.point(j)))
        .collect();
    let blocks = DiscreteBlocks {
        h00: spec.w0,
        h01,
        h11,
        h12,
        h22,
    };
    blocks.check_finite()?;
    Ok(blocks)
}

impl DiscreteBlocks {
    /// Number of base nodes `N`.
    pub fn n(&self) -> usize {
        self.h11.len()
    }

    /// Number of pairs `P = N(N+1)/2`.
    pub fn p(&self) -> usize {
        self.h22.len()
    }

    fn check_finite(&self) -> Result<()> {
        let ok_c = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !self.h00.is_finite()
            || !self.h01.iter().all(ok_c)
            || !self.h11.iter().all(|v| v.is_finite())
            || !self.h12.iter().flatten().all(|(_, z)| ok_c(z))
            || !self.h22.iter().all(|v| v.is_finite())
        {
            return Err(Error::NonFinite {
                function: "discretized operator block",
                point: vec![],
            });
        }
        Ok(())
    }

    fn is_real(&self) -> bool {
        self.h01.iter().all(|z| z.im == 0.0) && self.h12.iter().flatten().all(|(_, z)| z.im == 0.0)
    }

    /// `[[H11, H12], [H12*, H22]]`, dimension `N + P`.
    pub fn assemble_a(&self) -> HermitianMatrix {
        let (n, p) = (self.n(), self.p());
        let dim = n + p;
        if self.is_real() {
            let mut m = DMatrix::<f64>::zeros(dim, dim);
            for i in 0..n {
                m[(i, i)] = self.h11[i];
                for &(q, v) in &self.h12[i] {
                    m[(i, n + q)] = v.re;
                    m[(n + q, i)] = v.re;
                }
            }
            for q in 0..p {
                m[(n + q, n + q)] = self.h22[q];
            }
            HermitianMatrix::Real(m)
        } else {
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            for i in 0..n {
                m[(i, i)] = self.h11[i].into();
                for &(q, v) in &self.h12[i] {
                    m[(i, n + q)] = v;
                    m[(n + q, i)] = v.conj();
                }
            }
            for q in 0..p {
                m[(n + q, n + q)] = self.h22[q].into();
            }
            HermitianMatrix::Complex(m)
        }
    }

    /// The full three-by-three block matrix, dimension `1 + N + P`.
    pub fn assemble_full(&self) -> HermitianMatrix {
        let n = self.n();
        let a = self.assemble_a().to_complex();
        let dim = 1 + a.nrows();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        m.view_mut((1, 1), (dim - 1, dim - 1)).copy_from(&a);
        m[(0, 0)] = self.h00.into();
        for s in 0..n {
            m[(0, 1 + s)] = self.h01[s];
            m[(1 + s, 0)] = self.h01[s].conj();
        }
        HermitianMatrix::from_complex(m)
    }

    /// `H12 u2` for a pair-space vector `u2`.
    pub fn apply_h12(&self, u2: &[Complex64]) -> Vec<Complex64> {
        self.h12
            .iter()
            .map(|row| row.iter().map(|&(q, v)| v * u2[q]).sum())
            .collect()
    }

    /// `H12^dagger u1` (conjugate transpose).
    pub fn apply_h12_adjoint(&self, u1: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.p()];
        for (i, row) in self.h12.iter().enumerate() {
            for &(q, v) in row {
                out[q] += v.conj() * u1[i];
            }
        }
        out
    }
}

/// Largest deviation between `H12^dagger` applied to the probe `f` and the
/// discretized adjoint `(1/2) v1(x,y)* f(x) + (1/2) v1(y,x)* f(y)` in
/// weight-normalized coordinates.
pub fn consistency_check_adjoint(
    blocks: &DiscreteBlocks,
    spec: &ModelSpec,
    grid: &Grid,
    pair_grid: &PairGrid,
    f: &[Complex64],
) -> f64 {
    let u1: Vec<Complex64> = f
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| v * w.sqrt())
        .collect();
    let lhs = blocks.apply_h12_adjoint(&u1);
    pair_grid
        .pairs()
        .iter()
        .zip(pair_grid.pair_weights())
        .zip(&lhs)
        .map(|((&(i, j), &w), l)| {
            let (x, y) = (grid.point(i), grid.point(j));
            let direct = (spec.v1)(x, y).conj() * f[i] * 0.5 + (spec.v1)(y, x).conj() * f[j] * 0.5;
            (l - direct * w.sqrt()).norm()
        })
        .fold(0.0, f64::max)
}

/// Writes the nonzero entries as `row,col,re,im`.
pub fn write_matrix_csv(m: &HermitianMatrix, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "row,col,re,im")?;
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if v.re != 0.0 || v.im != 0.0 {
                writeln!(out, "{i},{j},{:e},{:e}", v.re, v.im)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
