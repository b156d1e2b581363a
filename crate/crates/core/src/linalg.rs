//! Dense Hermitian matrices with a real fast path.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum HermitianMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl HermitianMatrix {
    /// Stores `m` as real when every imaginary part is exactly zero.
    pub fn from_complex(m: DMatrix<Complex64>) -> Self {
        if m.iter().all(|z| z.im == 0.0) {
            HermitianMatrix::Real(m.map(|z| z.re))
        } else {
            HermitianMatrix::Complex(m)
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        HermitianMatrix::Real(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            diag,
        )))
    }

    pub fn dim(&self) -> usize {
        match self {
            HermitianMatrix::Real(m) => m.nrows(),
            HermitianMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, HermitianMatrix::Real(_))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            HermitianMatrix::Real(m) => Complex64::new(m[(i, j)], 0.0),
            HermitianMatrix::Complex(m) => m[(i, j)],
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match self {
            HermitianMatrix::Real(m) => m.map(|v| Complex64::new(v, 0.0)),
            HermitianMatrix::Complex(m) => m.clone(),
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            HermitianMatrix::Real(m) => HermitianMatrix::Real(-m),
            HermitianMatrix::Complex(m) => HermitianMatrix::Complex(-m),
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(match (self, other) {
            (HermitianMatrix::Real(a), HermitianMatrix::Real(b)) => HermitianMatrix::Real(a + b),
            _ => HermitianMatrix::Complex(self.to_complex() + other.to_complex()),
        })
    }

    /// `self - z I`.
    pub fn shifted(&self, z: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            HermitianMatrix::Real(m) => {
                for k in 0..m.nrows() {
                    m[(k, k)] -= z;
                }
            }
            HermitianMatrix::Complex(m) => {
                for k in 0..m.nrows() {
                    m[(k, k)] -= z;
                }
            }
        }
        out
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// `<A u, u>`.
    pub fn quadratic_form(&self, u: &[Complex64]) -> Complex64 {
        let v = nalgebra::DVector::from_column_slice(u);
        let av = self.to_complex() * &v;
        v.dotc(&av)
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            HermitianMatrix::Real(m) => m.norm(),
            HermitianMatrix::Complex(m) => m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let finite = match self {
            HermitianMatrix::Real(m) => m.ncols() == n && m.iter().all(|v| v.is_finite()),
            HermitianMatrix::Complex(m) => {
                m.ncols() == n && m.iter().all(|v| v.re.is_finite() && v.im.is_finite())
            }
        };
        if !finite {
            return Err(Error::Eigen(format!("{n}x{n} input")));
        }
        if n == 0 {
            return Ok(vec![]);
        }
        let mut ev: Vec<f64> = match self {
            HermitianMatrix::Real(m) => m.clone().symmetric_eigenvalues().iter().copied().collect(),
            HermitianMatrix::Complex(m) => {
                m.clone().symmetric_eigenvalues().iter().copied().collect()
            }
        };
        if ev.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("eigensolver produced non-finite values".into()));
        }
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}
