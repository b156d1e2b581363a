//! Tabulated parameter functions on a rectilinear node grid, evaluated by
//! multilinear interpolation.
//!
//! CSV layout: a header row naming `k` coordinate columns followed by either
//! `value` or `re,im`; rows in row-major order (last coordinate fastest) with
//! strictly increasing nodes along every axis.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    axes: Vec<Vec<f64>>,
    values: Vec<Complex64>,
    complex: bool,
}

impl Table {
    /// Reads a table with `coords` coordinate columns.
    pub fn from_path(path: &Path, coords: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Table {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::from_csv_str(&text, coords).map_err(|e| match e {
            Error::Table { msg, .. } => Error::Table {
                path: path.display().to_string(),
                msg,
            },
            other => other,
        })
    }

    pub fn from_csv_str(text: &str, coords: usize) -> Result<Self> {
        let err = |msg: String| Error::Table {
            path: "<inline>".into(),
            msg,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        let complex = match header.len().checked_sub(coords) {
            Some(1) if &header[coords] == "value" => false,
            Some(2) if &header[coords] == "re" && &header[coords + 1] == "im" => true,
            _ => {
                return Err(err(format!(
                    "expected {coords} coordinate columns followed by `value` or `re,im`, got {:?}",
                    header.iter().collect::<Vec<_>>()
                )))
            }
        };

        let mut rows: Vec<(Vec<f64>, Complex64)> = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| err(format!("row {}: column {k} is not a number", line + 2)))
            };
            let coords_v = (0..coords).map(parse).collect::<Result<Vec<_>>>()?;
            let value = if complex {
                Complex64::new(parse(coords)?, parse(coords + 1)?)
            } else {
                Complex64::new(parse(coords)?, 0.0)
            };
            rows.push((coords_v, value));
        }
        if rows.is_empty() {
            return Err(err("no data rows".into()));
        }

        // Axis k is read off the rows where all later coordinates sit at
        // their first node.
        let mut axes: Vec<Vec<f64>> = Vec::with_capacity(coords);
        let mut stride = 1usize;
        for k in (0..coords).rev() {
            let mut axis = Vec::new();
            let mut r = 0;
            while r < rows.len() {
                axis.push(rows[r].0[k]);
                r += stride;
                if r < rows.len() && rows[r].0[k] <= *axis.last().unwrap() {
                    break;
                }
            }
            if axis.len() < 2 {
                return Err(err(format!("axis {k} needs at least two nodes")));
            }
            stride *= axis.len();
            axes.push(axis);
        }
        axes.reverse();

        let expected: usize = axes.iter().map(Vec::len).product();
        if expected != rows.len() {
            return Err(err(format!(
                "{} rows do not form a full tensor grid ({} expected)",
                rows.len(),
                expected
            )));
        }
        for axis in &axes {
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(err("nodes must be strictly increasing".into()));
            }
        }
        let mut idx = vec![0usize; coords];
        for (r, (c, _)) in rows.iter().enumerate() {
            for k in 0..coords {
                if c[k] != axes[k][idx[k]] {
                    return Err(err(format!(
                        "row {} is out of row-major order (coordinate {k})",
                        r + 2
                    )));
                }
            }
            for pos in (0..coords).rev() {
                idx[pos] += 1;
                if idx[pos] < axes[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
        if rows.iter().any(|(_, v)| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite {
                function: "table value",
                point: rows
                    .iter()
                    .find(|(_, v)| !v.re.is_finite() || !v.im.is_finite())
                    .map(|(c, _)| c.clone())
                    .unwrap_or_default(),
            });
        }

        Ok(Self {
            axes,
            values: rows.into_iter().map(|(_, v)| v).collect(),
            complex,
        })
    }

    pub fn coords(&self) -> usize {
        self.axes.len()
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// Whether every axis spans `[-a, a]`.
    pub fn covers(&self, a: f64) -> bool {
        let tol = 1e-9 * a.max(1.0);
        self.axes
            .iter()
            .all(|ax| ax[0] <= -a + tol && *ax.last().unwrap() >= a - tol)
    }

    /// Multilinear interpolation; coordinates outside the table are clamped.
    pub fn eval(&self, point: &[f64]) -> Complex64 {
        let k = self.axes.len();
        let mut lo = vec![0usize; k];
        let mut frac = vec![0.0; k];
        for (c, axis) in self.axes.iter().enumerate() {
            let x = point[c].clamp(axis[0], *axis.last().unwrap());
            let j = axis.partition_point(|&t| t <= x).clamp(1, axis.len() - 1) - 1;
            lo[c] = j;
            frac[c] = (x - axis[j]) / (axis[j + 1] - axis[j]);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << k) {
            let mut weight = 1.0;
            let mut flat = 0usize;
            for c in 0..k {
                let up = (corner >> (k - 1 - c)) & 1;
                weight *= if up == 1 { frac[c] } else { 1.0 - frac[c] };
                flat = flat * self.axes[c].len() + lo[c] + up;
            }
            if weight != 0.0 {
                acc += self.values[flat] * weight;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_linear_functions() {
        let mut csv = String::from("x,y,value\n");
        for &x in &[-1.0, 0.0, 1.0] {
            for &y in &[-1.0, 0.5, 1.0] {
                csv += &format!("{x},{y},{}\n", 2.0 * x - y + 0.25);
            }
        }
        let t = Table::from_csv_str(&csv, 2).unwrap();
        assert!(t.covers(1.0));
        assert!(!t.covers(1.5));
        for &(x, y) in &[(0.3, -0.2), (-0.9, 0.9), (0.0, 0.5)] {
            let v = t.eval(&[x, y]);
            assert!((v.re - (2.0 * x - y + 0.25)).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_columns() {
        let csv = "x,re,im\n-1,0,1\n1,2,3\n";
        let t = Table::from_csv_str(csv, 1).unwrap();
        assert!(t.is_complex());
        assert_eq!(t.eval(&[0.0]), Complex64::new(1.0, 2.0));
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(Table::from_csv_str("x,value\n", 1).is_err());
        assert!(Table::from_csv_str("x,val\n0,1\n1,2\n", 1).is_err());
        assert!(Table::from_csv_str("x,value\n1,1\n0,2\n", 1).is_err());
        assert!(Table::from_csv_str("x,y,value\n0,0,1\n0,1,1\n1,0,1\n", 2).is_err());
        assert!(Table::from_csv_str("x,value\n0,abc\n1,2\n", 1).is_err());
        assert!(Table::from_csv_str("x,value\n0,inf\n1,2\n", 1).is_err());
    }
}
