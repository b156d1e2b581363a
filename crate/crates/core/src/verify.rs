//! Singular sequences for points of `Sigma_1` and brute-force comparisons
//! between discretizations.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{gauss_legendre_on, Grid, PairGrid, QuadratureRule};
use crate::model::{check_assumption_a, ModelSpec};
use crate::operators::assemble_blocks;
use crate::spectra::count_below_values;

#[derive(Debug, Clone, PartialEq)]
pub struct SingularSeqConfig {
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub n_max: usize,
    /// Gauss-Legendre nodes per radial interval.
    pub quad_depth: usize,
    /// Outer radius of the level-0 annulus; chosen automatically if `None`.
    pub scale: Option<f64>,
}

impl SingularSeqConfig {
    pub fn new(x0: Vec<f64>, y0: Vec<f64>, n_max: usize) -> Self {
        Self {
            x0,
            y0,
            n_max,
            quad_depth: 12,
            scale: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSeqRow {
    pub n: usize,
    pub norm_h12: f64,
    pub norm_h22_shift: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularSeqReport {
    pub z0: f64,
    pub scale: f64,
    /// Holder conjugate of `2 + epsilon`.
    pub q: f64,
    /// `sup_x ||v1(x, .)||_{L^{2+epsilon}}` measured on a fine grid.
    pub constant_c: f64,
    pub rows: Vec<SingularSeqRow>,
}

/// Quadrature of the annulus `{r1 <= ||u - c|| <= r2}`.
fn annulus_rule(c: &[f64], r1: f64, r2: f64, depth: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let (rs, ws) = gauss_legendre_on(r1, r2, depth);
    match c.len() {
        1 => {
            let mut out = Vec::with_capacity(2 * depth);
            for (r, w) in rs.iter().zip(&ws) {
                out.push((vec![c[0] - r], *w));
                out.push((vec![c[0] + r], *w));
            }
            Ok(out)
        }
        2 => {
            let m = 4 * depth;
            let mut out = Vec::with_capacity(depth * m);
            for (r, w) in rs.iter().zip(&ws) {
                for k in 0..m {
                    let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
                    let wt = w * r * 2.0 * std::f64::consts::PI / m as f64;
                    out.push((vec![c[0] + r * t.cos(), c[1] + r * t.sin()], wt));
                }
            }
            Ok(out)
        }
        d => Err(Error::Unsupported(format!("singular sequences in dimension {d}"))),
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

fn boundary_distance(a: f64, x: &[f64]) -> f64 {
    x.iter().fold(f64::INFINITY, |acc, c| acc.min(a - c.abs()))
}

/// Level-`n` bump: quadrature of its support and its constant value.
struct Bump {
    rule: Vec<(Vec<f64>, f64)>,
    value: f64,
}

fn bump(center: &[f64], scale: f64, n: usize, depth: usize) -> Result<Bump> {
    let r2 = scale * 0.5f64.powi(n as i32);
    let rule = annulus_rule(center, 0.5 * r2, r2, depth)?;
    let area: f64 = rule.iter().map(|p| p.1).sum();
    Ok(Bump {
        rule,
        value: 1.0 / area.sqrt(),
    })
}

fn resolve_scale(spec: &ModelSpec, cfg: &SingularSeqConfig) -> Result<f64> {
    let (x0, y0) = (&cfg.x0, &cfg.y0);
    if x0.len() != spec.d || y0.len() != spec.d {
        return Err(Error::DimensionMismatch("x0 and y0 must have d coordinates".into()));
    }
    let room = boundary_distance(spec.a, x0).min(boundary_distance(spec.a, y0));
    if !(room > 0.0) {
        return Err(Error::SupportEscapes(format!(
            "centers {x0:?}, {y0:?} are not interior points"
        )));
    }
    let sep = dist(x0, y0);
    let auto = if sep > 0.0 { (1.8 * room).min(0.9 * sep) } else { 1.8 * room };
    let scale = cfg.scale.unwrap_or(auto);
    // level 1 has outer radius scale / 2
    if !(scale > 0.0) || 0.5 * scale >= room {
        return Err(Error::SupportEscapes(format!(
            "annulus of outer radius {} around {x0:?}, {y0:?} leaves the domain",
            0.5 * scale
        )));
    }
    if sep > 0.0 && scale >= sep {
        return Err(Error::SupportEscapes(format!(
            "annuli around {x0:?} and {y0:?} overlap at scale {scale}"
        )));
    }
    Ok(scale)
}

/// `||H12 psi_n||` and `||(H22 - z0) psi_n||` for `n = 1..=n_max`, with
/// `psi_n` the (symmetrized) product of dyadic annulus bumps around `x0`, `y0`.
pub fn singular_sequence_norms(spec: &ModelSpec, cfg: &SingularSeqConfig) -> Result<SingularSeqReport> {
    let scale = resolve_scale(spec, cfg)?;
    let (x0, y0) = (&cfg.x0, &cfg.y0);
    let z0 = (spec.w2)(x0, y0);
    let same = x0 == y0;
    let d = spec.d as f64;
    let p = 2.0 + spec.epsilon;
    let q = p / (p - 1.0);

    // Holder constant over Omega, and at least the value at every support node
    let fine = Grid::new(spec.d, spec.a, if spec.d == 1 { 256 } else { 48 }, QuadratureRule::GaussLegendre)?;
    let lp_norm = |x: &[f64]| -> f64 {
        fine.points()
            .zip(fine.weights())
            .map(|(y, w)| w * (spec.v1)(x, y).norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    };
    let mut constant_c = check_assumption_a(spec, &fine)?.sup_norm_2pe;

    // int v1(x, y) phi(y) dy
    let apply = |x: &[f64], b: &Bump| -> num_complex::Complex64 {
        b.rule
            .iter()
            .map(|(y, w)| (spec.v1)(x, y) * (w * b.value))
            .sum()
    };
    // sum over x in the support of `outer` of |outer(x)|^2 |int v1(x, y) inner(y) dy|^2
    let leg = |outer: &Bump, inner: &Bump| -> f64 {
        outer
            .rule
            .iter()
            .map(|(x, w)| w * outer.value.powi(2) * apply(x, inner).norm_sqr())
            .sum()
    };
    let shift = |bx: &Bump, by: &Bump| -> f64 {
        let mut acc = 0.0;
        for (x, wx) in &bx.rule {
            for (y, wy) in &by.rule {
                acc += wx * wy * ((spec.w2)(x, y) - z0).powi(2);
            }
        }
        acc * (bx.value * by.value).powi(2)
    };

    let unit_annulus = if spec.d == 1 {
        1.0
    } else {
        std::f64::consts::PI * 0.75
    };
    let prefactor = (unit_annulus * scale.powf(d)).powf(1.0 / q - 0.5);

    let mut rows = Vec::with_capacity(cfg.n_max);
    for n in 1..=cfg.n_max {
        let bx = bump(x0, scale, n, cfg.quad_depth)?;
        let by = if same { None } else { Some(bump(y0, scale, n, cfg.quad_depth)?) };
        for (x, _) in bx.rule.iter().chain(by.iter().flat_map(|b| b.rule.iter())) {
            if !x.iter().all(|c| c.abs() < spec.a) {
                return Err(Error::SupportEscapes(format!("node {x:?} at level {n}")));
            }
        }
        if n == 1 {
            for (x, _) in bx.rule.iter().chain(by.iter().flat_map(|b| b.rule.iter())) {
                constant_c = constant_c.max(lp_norm(x));
            }
        }
        let (h12_sq, h22_sq) = match &by {
            None => (leg(&bx, &bx), shift(&bx, &bx)),
            Some(by) => (
                0.5 * (leg(&bx, by) + leg(by, &bx)),
                0.5 * (shift(&bx, by) + shift(by, &bx)),
            ),
        };
        rows.push(SingularSeqRow {
            n,
            norm_h12: h12_sq.sqrt(),
            norm_h22_shift: h22_sq.sqrt(),
            bound: 0.0,
        });
    }
    for row in &mut rows {
        row.bound =
            constant_c * prefactor * 2f64.powf(row.n as f64 * d * (0.5 - 1.0 / q) + 1.0);
    }
    Ok(SingularSeqReport {
        z0,
        scale,
        q,
        constant_c,
        rows,
    })
}

/// `max |<psi_n, psi_m> - delta_nm|` over `n, m = 1..=n_max`, computed on
/// the union of all annulus quadratures.
pub fn singular_sequence_gram_deviation(spec: &ModelSpec, cfg: &SingularSeqConfig) -> Result<f64> {
    let scale = resolve_scale(spec, cfg)?;
    let (x0, y0) = (&cfg.x0, &cfg.y0);
    let same = x0 == y0;
    let levels: Vec<usize> = (1..=cfg.n_max).collect();

    // union quadrature over every support
    let mut nodes: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut bumps = Vec::new();
    for center in if same { vec![x0] } else { vec![x0, y0] } {
        for &n in &levels {
            let b = bump(center, scale, n, cfg.quad_depth)?;
            nodes.extend(b.rule.iter().cloned());
            let r2 = scale * 0.5f64.powi(n as i32);
            bumps.push((center.clone(), 0.5 * r2, r2, b.value));
        }
    }
    let eval = |k: usize, x: &[f64]| -> f64 {
        let (c, r1, r2, v) = &bumps[k];
        let r = dist(c, x);
        if r >= *r1 && r <= *r2 {
            *v
        } else {
            0.0
        }
    };
    let nb = bumps.len();
    let mut g = vec![vec![0.0; nb]; nb];
    for (x, w) in &nodes {
        let vals: Vec<f64> = (0..nb).map(|k| eval(k, x)).collect();
        for a in 0..nb {
            if vals[a] == 0.0 {
                continue;
            }
            for b in 0..nb {
                g[a][b] += w * vals[a] * vals[b];
            }
        }
    }

    let l = levels.len();
    let mut worst = 0.0f64;
    for n in 0..l {
        for m in 0..l {
            let ip = if same {
                g[n][m] * g[n][m]
            } else {
                // psi = (phi(x) phit(y) + phi(y) phit(x)) / sqrt(2)
                g[n][m] * g[l + n][l + m] + g[n][l + m] * g[l + n][m]
            };
            let target = if n == m { 1.0 } else { 0.0 };
            worst = worst.max((ip - target).abs());
        }
    }
    Ok(worst)
}

pub fn write_singular_seq_csv(report: &SingularSeqReport, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "n,norm_h12,norm_h22_shift,bound")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{:.12e},{:.12e},{:.12e}",
            r.n, r.norm_h12, r.norm_h22_shift, r.bound
        )?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullVsReduced {
    pub z: f64,
    pub count_full: usize,
    pub count_reduced: usize,
    pub boundary: usize,
    /// `|N(z; H_h) - N(z; A_h)| <= 3`.
    pub within_rank_bound: bool,
}

impl FullVsReduced {
    pub fn difference(&self) -> i64 {
        self.count_full as i64 - self.count_reduced as i64
    }
}

/// Counts below `z` of the full and the reduced discretization.
pub fn oracle_full_vs_reduced(
    spec: &ModelSpec,
    grid: &Grid,
    pair_grid: &PairGrid,
    z: f64,
) -> Result<FullVsReduced> {
    let blocks = assemble_blocks(spec, grid, pair_grid)?;
    let full = count_below_values(&blocks.assemble_full().eigenvalues()?, z);
    let reduced = count_below_values(&blocks.assemble_a().eigenvalues()?, z);
    Ok(FullVsReduced {
        z,
        count_full: full.count,
        count_reduced: reduced.count,
        boundary: full.boundary + reduced.boundary,
        within_rank_bound: (full.count as i64 - reduced.count as i64).abs() <= 3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_area() {
        let r = annulus_rule(&[0.1, -0.2], 0.25, 0.5, 8).unwrap();
        let area: f64 = r.iter().map(|p| p.1).sum();
        assert!((area - std::f64::consts::PI * (0.25 - 0.0625)).abs() < 1e-14);
        let r1 = annulus_rule(&[0.0], 0.25, 0.5, 4).unwrap();
        assert!((r1.iter().map(|p| p.1).sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_has_zero_h12() {
        let spec = ModelSpec::zero(1, 1.0).with_w2(|x, y| x[0] + y[0]);
        let rep = singular_sequence_norms(&spec, &SingularSeqConfig::new(vec![0.2], vec![0.2], 5)).unwrap();
        assert!(rep.rows.iter().all(|r| r.norm_h12 == 0.0));
    }

    #[test]
    fn escaping_support_rejected() {
        let spec = ModelSpec::zero(1, 1.0);
        let mut cfg = SingularSeqConfig::new(vec![0.9], vec![0.9], 3);
        cfg.scale = Some(0.5);
        assert!(matches!(
            singular_sequence_norms(&spec, &cfg),
            Err(Error::SupportEscapes(_))
        ));
        let cfg = SingularSeqConfig::new(vec![1.0], vec![1.0], 3);
        assert!(singular_sequence_norms(&spec, &cfg).is_err());
    }
}
