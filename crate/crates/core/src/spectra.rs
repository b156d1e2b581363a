//! Eigenvalue counting, the essential spectrum `Sigma_1 u Sigma_2`, and the
//! discrete spectrum outside it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, PairGrid};
use crate::linalg::HermitianMatrix;
use crate::model::ModelSpec;
use crate::operators::{assemble_blocks, DiscreteBlocks};
use crate::schur::{bs_from_eval, delta_at, schur_eval};

/// Eigenvalues within this distance of a counting threshold are reported
/// as boundary cases.
pub const BOUNDARY_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EigenCount {
    pub count: usize,
    pub boundary: usize,
}

/// `#{ev > lambda}` among sorted or unsorted eigenvalues.
pub fn count_above_values(ev: &[f64], lambda: f64) -> EigenCount {
    let mut c = EigenCount {
        count: 0,
        boundary: 0,
    };
    for &v in ev {
        if (v - lambda).abs() <= BOUNDARY_BAND {
            c.boundary += 1;
        } else if v > lambda {
            c.count += 1;
        }
    }
    c
}

/// `n(lambda; A)`: eigenvalues strictly above `lambda`.
pub fn count_above(m: &HermitianMatrix, lambda: f64) -> Result<EigenCount> {
    Ok(count_above_values(&m.eigenvalues()?, lambda))
}

/// `N(z; A) = n(-z; -A)`: eigenvalues strictly below `z`.
pub fn count_below(m: &HermitianMatrix, z: f64) -> Result<EigenCount> {
    count_above(&m.negated(), -z)
}

/// `N(z; A)` from precomputed eigenvalues.
pub fn count_below_values(ev: &[f64], z: f64) -> EigenCount {
    let neg: Vec<f64> = ev.iter().map(|v| -v).collect();
    count_above_values(&neg, -z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeylCheck {
    /// `n(l1 + l2; V1 + V2)`.
    pub lhs: usize,
    /// `n(l1; V1) + n(l2; V2)`.
    pub rhs: usize,
    pub holds: bool,
}

/// Subadditivity of `n(.; .)` under sums.
pub fn weyl_check(v1: &HermitianMatrix, v2: &HermitianMatrix, l1: f64, l2: f64) -> Result<WeylCheck> {
    let lhs = count_above(&v1.sum(v2)?, l1 + l2)?.count;
    let rhs = count_above(v1, l1)?.count + count_above(v2, l2)?.count;
    Ok(WeylCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// A zero of `z -> Delta(x_node; z)` outside `[m, M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma2Root {
    pub node: usize,
    pub x: Vec<f64>,
    pub z: f64,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub z_lo: Option<f64>,
    pub z_hi: Option<f64>,
    pub bisection_tol: f64,
    /// Offset from the sampled range at which root existence is tested.
    pub delta: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            z_lo: None,
            z_hi: None,
            bisection_tol: 1e-12,
            delta: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EssSpecReport {
    /// Sampled `min w2`.
    pub m: f64,
    /// Sampled `max w2`.
    pub big_m: f64,
    /// Grid-resolution band below `m`: roots in `(m - resolution_lo, m)`
    /// cannot be told apart from `Sigma_1`.
    pub resolution_lo: f64,
    pub resolution_hi: f64,
    /// Pair attaining the sampled minimum of `w2`.
    pub argmin_pair: (usize, usize),
    pub argmax_pair: (usize, usize),
    pub sigma2_roots: Vec<Sigma2Root>,
    pub sigma2_hull: Vec<(f64, f64)>,
    pub sess_min: f64,
    pub sess_max: f64,
    pub window: (f64, f64),
    /// Number of times the search window had to be enlarged.
    pub widened: usize,
}

impl EssSpecReport {
    pub fn lower_roots(&self) -> impl Iterator<Item = &Sigma2Root> {
        self.sigma2_roots.iter().filter(|r| r.side == Side::Below)
    }

    pub fn upper_roots(&self) -> impl Iterator<Item = &Sigma2Root> {
        self.sigma2_roots.iter().filter(|r| r.side == Side::Above)
    }

    /// Threshold below which eigenvalues are separated from the essential
    /// spectrum at this resolution.
    pub fn lower_threshold(&self) -> f64 {
        self.lower_roots()
            .map(|r| r.z)
            .fold(self.m - self.resolution_lo, f64::min)
    }

    pub fn upper_threshold(&self) -> f64 {
        self.upper_roots()
            .map(|r| r.z)
            .fold(self.big_m + self.resolution_hi, f64::max)
    }

    /// The report of the negated model.
    pub fn negated(&self) -> Self {
        let flip = |side| match side {
            Side::Below => Side::Above,
            Side::Above => Side::Below,
        };
        let mut hull: Vec<(f64, f64)> = self.sigma2_hull.iter().map(|&(a, b)| (-b, -a)).collect();
        hull.sort_by(|p, q| p.0.total_cmp(&q.0));
        Self {
            m: -self.big_m,
            big_m: -self.m,
            resolution_lo: self.resolution_hi,
            resolution_hi: self.resolution_lo,
            argmin_pair: self.argmax_pair,
            argmax_pair: self.argmin_pair,
            sigma2_roots: self
                .sigma2_roots
                .iter()
                .map(|r| Sigma2Root {
                    z: -r.z,
                    side: flip(r.side),
                    ..r.clone()
                })
                .collect(),
            sigma2_hull: hull,
            sess_min: -self.sess_max,
            sess_max: -self.sess_min,
            window: (-self.window.1, -self.window.0),
            widened: self.widened,
        }
    }
}

/// Sampled `w2` on the pair grid with the positions of its extrema.
fn w2_range(spec: &ModelSpec, pair_grid: &PairGrid) -> (f64, usize, f64, usize) {
    let g = pair_grid.base();
    let mut lo = (f64::INFINITY, 0);
    let mut hi = (f64::NEG_INFINITY, 0);
    for (q, &(i, j)) in pair_grid.pairs().iter().enumerate() {
        let v = (spec.w2)(g.point(i), g.point(j));
        if v < lo.0 {
            lo = (v, q);
        }
        if v > hi.0 {
            hi = (v, q);
        }
    }
    (lo.0, lo.1, hi.0, hi.1)
}

/// Sum over the `2d` coordinate axes of the largest change of `w2` between
/// the pair `(i, j)` and its grid neighbours along that axis.
fn neighbour_spread(spec: &ModelSpec, grid: &Grid, i: usize, j: usize) -> f64 {
    let n = grid.n_per_dim();
    let base = (spec.w2)(grid.point(i), grid.point(j));
    let (ii, jj) = (grid.multi_index(i), grid.multi_index(j));
    let mut total = 0.0;
    for slot in 0..2 {
        for k in 0..grid.d() {
            let mut worst = 0.0f64;
            for step in [-1i64, 1] {
                let (mut a, mut b) = (ii.clone(), jj.clone());
                let idx = if slot == 0 { &mut a } else { &mut b };
                let moved = idx[k] as i64 + step;
                if moved < 0 || moved >= n as i64 {
                    continue;
                }
                idx[k] = moved as usize;
                let v = (spec.w2)(grid.point(grid.flat_index(&a)), grid.point(grid.flat_index(&b)));
                worst = worst.max((v - base).abs());
            }
            total += worst;
        }
    }
    total
}

fn bisect(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    // f decreasing: f(lo) > 0 > f(hi)
    for _ in 0..200 {
        if hi - lo <= tol * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gap-merged interval hull of sorted points; the merge threshold is four
/// times the median positive spacing.
pub fn merge_hull(sorted: &[f64]) -> Vec<(f64, f64)> {
    if sorted.is_empty() {
        return vec![];
    }
    let mut gaps: Vec<f64> = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 0.0)
        .collect();
    let threshold = if gaps.is_empty() {
        0.0
    } else {
        gaps.sort_by(f64::total_cmp);
        4.0 * gaps[gaps.len() / 2]
    };
    let mut hull = vec![(sorted[0], sorted[0])];
    for &z in &sorted[1..] {
        let last = hull.last_mut().unwrap();
        if z - last.1 <= threshold {
            last.1 = z;
        } else {
            hull.push((z, z));
        }
    }
    hull
}

pub fn essential_spectrum(
    spec: &ModelSpec,
    grid: &Grid,
    pair_grid: &PairGrid,
    search: &SearchParams,
) -> Result<EssSpecReport> {
    let (m, qmin, big_m, qmax) = w2_range(spec, pair_grid);
    let n = grid.len();

    // Half of the largest sampled coupling integral bounds Delta's integral
    // term by b / dist(z, [m, M]).
    let coupling: Vec<f64> = (0..n)
        .map(|i| {
            let x = grid.point(i);
            0.5 * grid
                .points()
                .zip(grid.weights())
                .map(|(y, w)| w * (spec.v1)(x, y).norm_sqr())
                .sum::<f64>()
        })
        .collect();
    let b = coupling.iter().copied().fold(0.0, f64::max);
    let coupled = b > 0.0;

    let (resolution_lo, resolution_hi) = if coupled {
        let (i, j) = pair_grid.pairs()[qmin];
        let (k, l) = pair_grid.pairs()[qmax];
        (neighbour_spread(spec, grid, i, j), neighbour_spread(spec, grid, k, l))
    } else {
        (0.0, 0.0)
    };

    let w1: Vec<f64> = grid.points().map(|x| (spec.w1)(x)).collect();
    let w1_min = w1.iter().copied().fold(f64::INFINITY, f64::min);
    let w1_max = w1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 1.0 + 2.0 * b.sqrt();
    let mut z_lo = search.z_lo.unwrap_or(m.min(w1_min) - pad);
    let mut z_hi = search.z_hi.unwrap_or(big_m.max(w1_max) + pad);
    let mut widened = 0;

    let lo_edge = m - resolution_lo - search.delta;
    let hi_edge = big_m + resolution_hi + search.delta;

    let delta = |i: usize, z: f64| delta_at(spec, grid, grid.point(i), z);

    let mut has_lower = vec![false; n];
    let mut has_upper = vec![false; n];
    for i in 0..n {
        has_lower[i] = delta(i, lo_edge)? < 0.0;
        has_upper[i] = delta(i, hi_edge)? > 0.0;
    }

    // Widen until the window brackets every root.
    loop {
        let lo_ok = z_lo < lo_edge
            && (0..n).filter(|&i| has_lower[i]).try_fold(true, |ok, i| {
                Ok::<_, Error>(ok && delta(i, z_lo)? > 0.0)
            })?;
        let hi_ok = z_hi > hi_edge
            && (0..n).filter(|&i| has_upper[i]).try_fold(true, |ok, i| {
                Ok::<_, Error>(ok && delta(i, z_hi)? < 0.0)
            })?;
        if lo_ok && hi_ok {
            break;
        }
        if widened >= 64 {
            let node = (0..n).find(|&i| has_lower[i] || has_upper[i]).unwrap_or(0);
            return Err(Error::SearchWindow { z_lo, z_hi, node });
        }
        widened += 1;
        if !lo_ok {
            z_lo = lo_edge - 2.0 * (lo_edge - z_lo).max(1.0);
        }
        if !hi_ok {
            z_hi = hi_edge + 2.0 * (z_hi - hi_edge).max(1.0);
        }
    }

    let tol = search.bisection_tol;
    let roots: Vec<Vec<Sigma2Root>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let f = |z| delta(i, z);
            if has_lower[i] {
                out.push(Sigma2Root {
                    node: i,
                    x: grid.point(i).to_vec(),
                    z: bisect(f, z_lo, lo_edge, tol)?,
                    side: Side::Below,
                });
            }
            if has_upper[i] {
                out.push(Sigma2Root {
                    node: i,
                    x: grid.point(i).to_vec(),
                    z: bisect(f, hi_edge, z_hi, tol)?,
                    side: Side::Above,
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let sigma2_roots: Vec<Sigma2Root> = roots.into_iter().flatten().collect();

    let sorted_side = |side| {
        let mut v: Vec<f64> = sigma2_roots
            .iter()
            .filter(|r| r.side == side)
            .map(|r| r.z)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let mut sigma2_hull = merge_hull(&sorted_side(Side::Below));
    sigma2_hull.extend(merge_hull(&sorted_side(Side::Above)));

    let sess_min = sigma2_roots.iter().map(|r| r.z).fold(m, f64::min);
    let sess_max = sigma2_roots.iter().map(|r| r.z).fold(big_m, f64::max);

    Ok(EssSpecReport {
        m,
        big_m,
        resolution_lo,
        resolution_hi,
        argmin_pair: pair_grid.pairs()[qmin],
        argmax_pair: pair_grid.pairs()[qmax],
        sigma2_roots,
        sigma2_hull,
        sess_min,
        sess_max,
        window: (z_lo, z_hi),
        widened,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    pub threshold: f64,
    pub eigenvalues: Vec<f64>,
}

/// Eigenvalues of `A_h` strictly below `report.lower_threshold() - BOUNDARY_BAND`.
pub fn discrete_spectrum_below(
    spec: &ModelSpec,
    grid: &Grid,
    pair_grid: &PairGrid,
    report: &EssSpecReport,
) -> Result<DiscreteSpectrum> {
    let blocks = assemble_blocks(spec, grid, pair_grid)?;
    let ev = blocks.assemble_a().eigenvalues()?;
    Ok(below_threshold(&ev, report.lower_threshold()))
}

fn below_threshold(ev: &[f64], threshold: f64) -> DiscreteSpectrum {
    DiscreteSpectrum {
        threshold,
        eigenvalues: ev
            .iter()
            .copied()
            .filter(|&v| v < threshold - BOUNDARY_BAND)
            .collect(),
    }
}

/// Eigenvalues above the essential spectrum, found as minus the eigenvalues
/// of the negated model below its essential spectrum. Ascending order.
pub fn discrete_spectrum_above(
    spec: &ModelSpec,
    grid: &Grid,
    pair_grid: &PairGrid,
    report: &EssSpecReport,
) -> Result<DiscreteSpectrum> {
    let below = discrete_spectrum_below(&spec.negated(), grid, pair_grid, &report.negated())?;
    let mut eigenvalues: Vec<f64> = below.eigenvalues.iter().map(|v| -v).collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(DiscreteSpectrum {
        threshold: -below.threshold,
        eigenvalues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingResult {
    pub z: f64,
    /// `N(z; A_h)`.
    pub count_a: usize,
    /// `N(0; S_h(z))`.
    pub count_s: usize,
    /// `n(1; T_h(z))`.
    pub count_t: usize,
    /// Eigenvalues within `BOUNDARY_BAND` of any of the three thresholds.
    pub boundary: usize,
    pub agree: bool,
}

fn counting_from(a_eigs: &[f64], spec: &ModelSpec, grid: &Grid, min_w2: f64, z: f64) -> Result<CountingResult> {
    if !(z < min_w2) {
        return Err(Error::NotBelowRange { z, m: min_w2 });
    }
    let eval = schur_eval(spec, grid, z)?;
    let t = bs_from_eval(&eval)?;
    let a = count_below_values(a_eigs, z);
    let s = count_below(&eval.schur_matrix(), 0.0)?;
    let tc = count_above(&t.t_matrix, 1.0)?;
    Ok(CountingResult {
        z,
        count_a: a.count,
        count_s: s.count,
        count_t: tc.count,
        boundary: a.boundary + s.boundary + tc.boundary,
        agree: a.count == s.count && s.count == tc.count,
    })
}

/// Three-way count `N(z; A_h)`, `N(0; S_h(z))`, `n(1; T_h(z))`.
pub fn birman_schwinger_check(
    spec: &ModelSpec,
    grid: &Grid,
    pair_grid: &PairGrid,
    z: f64,
) -> Result<CountingResult> {
    Ok(counting_sweep(spec, grid, pair_grid, &[z])?.remove(0))
}

/// [`birman_schwinger_check`] at several `z` sharing one eigensolve of `A_h`.
pub fn counting_sweep(
    spec: &ModelSpec,
    grid: &Grid,
    pair_grid: &PairGrid,
    zs: &[f64],
) -> Result<Vec<CountingResult>> {
    let blocks = assemble_blocks(spec, grid, pair_grid)?;
    let ev = blocks.assemble_a().eigenvalues()?;
    let min_w2 = blocks.h22.iter().copied().fold(f64::INFINITY, f64::min);
    zs.par_iter()
        .map(|&z| counting_from(&ev, spec, grid, min_w2, z))
        .collect()
}

/// `(negative, zero, positive)` eigenvalue counts, zero meaning within
/// `BOUNDARY_BAND`.
pub fn inertia(m: &HermitianMatrix) -> Result<(usize, usize, usize)> {
    let ev = m.eigenvalues()?;
    let zero = ev.iter().filter(|v| v.abs() <= BOUNDARY_BAND).count();
    let neg = ev.iter().filter(|&&v| v < -BOUNDARY_BAND).count();
    Ok((neg, zero, ev.len() - neg - zero))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InertiaCheck {
    pub inertia_shifted_a: (usize, usize, usize),
    pub inertia_block: (usize, usize, usize),
    /// `max |V (A - z) V^* - diag(S(z), H22 - z)|`.
    pub congruence_residual: f64,
}

/// Inertia of `A_h - z` against that of `diag(S_h(z), H22 - z)`, which are
/// congruent through `V = [[I, -H12 (H22 - z)^{-1}], [0, I]]`.
pub fn frobenius_schur_check(blocks: &DiscreteBlocks, spec: &ModelSpec, grid: &Grid, z: f64) -> Result<InertiaCheck> {
    let (n, p) = (blocks.n(), blocks.p());
    let min_w2 = blocks.h22.iter().copied().fold(f64::INFINITY, f64::min);
    if !(z < min_w2) {
        return Err(Error::NotBelowRange { z, m: min_w2 });
    }
    let shifted = blocks.assemble_a().shifted(z);
    let s = schur_eval(spec, grid, z)?.schur_matrix().to_complex();

    let dim = n + p;
    let mut block = DMatrix::<Complex64>::zeros(dim, dim);
    block.view_mut((0, 0), (n, n)).copy_from(&s);
    for q in 0..p {
        block[(n + q, n + q)] = (blocks.h22[q] - z).into();
    }

    let mut v = DMatrix::<Complex64>::identity(dim, dim);
    for (i, row) in blocks.h12.iter().enumerate() {
        for &(q, h) in row {
            v[(i, n + q)] -= h / (blocks.h22[q] - z);
        }
    }
    let w = &v * shifted.to_complex() * v.adjoint();
    let congruence_residual = (w - &block).iter().map(|z| z.norm()).fold(0.0, f64::max);

    Ok(InertiaCheck {
        inertia_shifted_a: inertia(&shifted)?,
        inertia_block: inertia(&HermitianMatrix::from_complex(block))?,
        congruence_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::QuadratureRule;

    #[test]
    fn diagonal_counts() {
        let m = HermitianMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(count_above(&m, 1.5).unwrap().count, 2);
        assert_eq!(count_below(&m, 2.0).unwrap(), EigenCount { count: 1, boundary: 1 });
        let zero = HermitianMatrix::from_diagonal(&[0.0; 4]);
        assert_eq!(count_above(&zero, 0.0).unwrap(), EigenCount { count: 0, boundary: 4 });
    }

    #[test]
    fn hull_merging() {
        assert_eq!(merge_hull(&[]), vec![]);
        assert_eq!(merge_hull(&[1.0]), vec![(1.0, 1.0)]);
        assert_eq!(
            merge_hull(&[0.0, 0.1, 0.2, 0.3, 5.0]),
            vec![(0.0, 0.3), (5.0, 5.0)]
        );
        assert_eq!(merge_hull(&[1.0, 1.0, 1.1, 1.1, 1.2]), vec![(1.0, 1.2)]);
    }

    #[test]
    fn decoupled_essential_spectrum() {
        let spec = ModelSpec::zero(1, 1.0).with_w1(|x| x[0]).with_w2(|_, _| 5.0);
        let g = Grid::new(1, 1.0, 8, QuadratureRule::Midpoint).unwrap();
        let pg = PairGrid::new(&g);
        let r = essential_spectrum(&spec, &g, &pg, &SearchParams::default()).unwrap();
        assert_eq!((r.m, r.big_m), (5.0, 5.0));
        assert_eq!(r.sigma2_roots.len(), 8);
        for root in &r.sigma2_roots {
            assert_eq!(root.side, Side::Below);
            assert!((root.z - root.x[0]).abs() < 1e-10);
        }
        assert_eq!(r.sigma2_hull.len(), 1);
        assert!((r.sess_min - g.axis()[0]).abs() < 1e-10);
        assert_eq!(r.sess_max, 5.0);
    }

    #[test]
    fn user_window_is_widened() {
        let spec = ModelSpec::zero(1, 1.0).with_w1(|x| x[0]).with_w2(|_, _| 5.0);
        let g = Grid::new(1, 1.0, 4, QuadratureRule::Midpoint).unwrap();
        let pg = PairGrid::new(&g);
        let params = SearchParams {
            z_lo: Some(0.0),
            z_hi: Some(5.5),
            ..Default::default()
        };
        let r = essential_spectrum(&spec, &g, &pg, &params).unwrap();
        assert!(r.widened > 0);
        assert_eq!(r.sigma2_roots.len(), 4);
    }

    #[test]
    fn decoupled_counting() {
        let spec = ModelSpec::zero(1, 1.0).with_w1(|x| x[0]).with_w2(|_, _| 5.0);
        let g = Grid::new(1, 1.0, 8, QuadratureRule::Midpoint).unwrap();
        let pg = PairGrid::new(&g);
        let c = birman_schwinger_check(&spec, &g, &pg, -1.5).unwrap();
        assert_eq!((c.count_a, c.count_s, c.count_t), (0, 0, 0));
        assert!(c.agree);
        assert!(matches!(
            birman_schwinger_check(&spec, &g, &pg, 0.1),
            Err(Error::NonPositiveDelta { .. })
        ));
    }
}
