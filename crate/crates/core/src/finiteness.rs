//! Local exponents of `w2`, `v1` and `Delta` at the bottom of the essential
//! spectrum, and the finiteness criterion `alpha + gamma < 2 beta + d`.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::ModelSpec;
use crate::schur::{bs_operator, delta_at};
use crate::spectra::EssSpecReport;

/// `||x||^s + ||y||^s` when both lie in the open `delta`-ball, 1 otherwise.
pub fn phi_s(x: &[f64], y: &[f64], s: f64, delta: f64) -> f64 {
    let nx = norm(x);
    let ny = norm(y);
    if nx < delta && ny < delta {
        nx.powf(s) + ny.powf(s)
    } else {
        1.0
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn add(t: &[f64], v: &[f64]) -> Vec<f64> {
    t.iter().zip(v).map(|(a, b)| a + b).collect()
}

/// Regularly spread unit vectors.
fn unit_sphere(d: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    match d {
        1 => Ok(vec![vec![-1.0], vec![1.0]]),
        2 => Ok((0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Ok((0..count)
                .map(|k| {
                    let zc = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let rho = (1.0 - zc * zc).sqrt();
                    let t = golden * k as f64;
                    vec![rho * t.cos(), rho * t.sin(), zc]
                })
                .collect())
        }
        _ => Err(Error::Unsupported(format!(
            "shell sampling in dimension {d}"
        ))),
    }
}

/// Points of the closed unit ball (center included).
fn unit_ball(d: usize) -> Result<Vec<Vec<f64>>> {
    if d == 1 {
        return Ok((0..=200).map(|k| vec![-1.0 + k as f64 / 100.0]).collect());
    }
    let dirs = unit_sphere(d, 40)?;
    let mut pts = vec![vec![0.0; d]];
    for k in 1..=10 {
        let rho = k as f64 / 10.0;
        pts.extend(dirs.iter().map(|u| u.iter().map(|c| c * rho).collect()));
    }
    Ok(pts)
}

/// Grid of sample points of `Omega` (`per_dim` per axis, endpoints excluded).
fn domain_samples(d: usize, a: f64, per_dim: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..per_dim)
        .map(|k| -a + (k as f64 + 0.5) * 2.0 * a / per_dim as f64)
        .collect();
    let total = per_dim.pow(d as u32);
    (0..total)
        .map(|mut i| {
            let mut p = vec![0.0; d];
            for slot in (0..d).rev() {
                p[slot] = axis[i % per_dim];
                i /= per_dim;
            }
            p
        })
        .collect()
}

/// Locates the unique diagonal minimizer `(t0, t0)` of `w2`.
///
/// Returns `None` when the sampled minimum over the pair grid lies clearly
/// below the diagonal minimum, or when the diagonal minimum is attained in
/// separated places.
pub fn locate_t0(spec: &ModelSpec, _grid: &Grid, report: &EssSpecReport) -> Option<Vec<f64>> {
    let d = spec.d;
    let per_dim = match d {
        1 => 4096,
        2 => 256,
        _ => 32,
    };
    let pts = domain_samples(d, spec.a, per_dim);
    let diag: Vec<f64> = pts.iter().map(|t| (spec.w2)(t, t)).collect();
    let (gmin, gmax) = diag
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if report.m < gmin - report.resolution_lo - 1e-12 {
        return None;
    }
    let tol = 1e-6 * (gmax - gmin) + 1e-12;

    // connected clusters of near-minimal samples
    let near: Vec<bool> = diag.iter().map(|&v| v <= gmin + tol).collect();
    let mut label = vec![usize::MAX; pts.len()];
    let mut clusters = 0;
    for start in 0..pts.len() {
        if !near[start] || label[start] != usize::MAX {
            continue;
        }
        clusters += 1;
        if clusters > 1 {
            return None;
        }
        let mut stack = vec![start];
        label[start] = clusters;
        while let Some(i) = stack.pop() {
            let mut rem = i;
            let mut idx = vec![0usize; d];
            for slot in (0..d).rev() {
                idx[slot] = rem % per_dim;
                rem /= per_dim;
            }
            for k in 0..d {
                for step in [-1i64, 1] {
                    let moved = idx[k] as i64 + step;
                    if moved < 0 || moved >= per_dim as i64 {
                        continue;
                    }
                    let mut nb = idx.clone();
                    nb[k] = moved as usize;
                    let j = nb.iter().fold(0, |acc, &c| acc * per_dim + c);
                    if near[j] && label[j] == usize::MAX {
                        label[j] = clusters;
                        stack.push(j);
                    }
                }
            }
        }
    }

    let best = (0..pts.len())
        .min_by(|&i, &j| diag[i].total_cmp(&diag[j]))
        .unwrap();
    let start = match &spec.t0 {
        Some(hint) if (spec.w2)(hint, hint) <= gmin + tol => hint.clone(),
        _ => pts[best].clone(),
    };
    Some(refine_min(|t| (spec.w2)(t, t), start, 2.0 * spec.a / per_dim as f64, spec.a))
}

/// Compass search for a local minimum inside `(-a, a)^d`.
fn refine_min(f: impl Fn(&[f64]) -> f64, mut t: Vec<f64>, mut step: f64, a: f64) -> Vec<f64> {
    let mut ft = f(&t);
    while step > 1e-13 {
        let mut improved = false;
        for k in 0..t.len() {
            for dir in [-1.0, 1.0] {
                let mut c = t.clone();
                c[k] += dir * step;
                if c[k].abs() >= a {
                    continue;
                }
                let fc = f(&c);
                if fc < ft {
                    t = c;
                    ft = fc;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    t
}

/// Least-squares line through `(ln r, ln s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn loglog_fit(radii: &[f64], stats: &[f64]) -> Option<LogLogFit> {
    if radii.len() < 2 || stats.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = stats.iter().map(|s| s.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    // flat data is a perfect fit of slope zero
    let r2 = 1.0 - ss_res / ss_tot.max(1e-12 * n);
    Some(LogLogFit {
        slope,
        intercept,
        r2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    Alpha,
    Beta,
    Gamma,
}

impl Exponent {
    pub fn name(self) -> &'static str {
        match self {
            Exponent::Alpha => "alpha",
            Exponent::Beta => "beta",
            Exponent::Gamma => "gamma",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellStat {
    pub exponent: Exponent,
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentEstimate {
    pub t0: Vec<f64>,
    /// Critical energy `min(w2(t0, t0), lowest Sigma_2 root)`.
    pub e_crit: f64,
    pub alpha_hat: Option<f64>,
    /// `f64::INFINITY` when `v1` vanishes on every sampled `y`-shell.
    pub beta_hat: Option<f64>,
    pub gamma_hat: Option<f64>,
    /// Coefficients of determination for alpha, beta, gamma (NaN if unavailable).
    pub fit_r2: [f64; 3],
    pub delta_radius: f64,
    pub shells: Vec<ShellStat>,
}

/// Shell radii `delta 2^{-k/2}`, `k = 12, ..., 0`.
pub fn shell_radii(delta: f64) -> Vec<f64> {
    (0..=12).rev().map(|k| delta * 2f64.powf(-0.5 * k as f64)).collect()
}

pub fn estimate_exponents(
    spec: &ModelSpec,
    grid: &Grid,
    report: &EssSpecReport,
    t0: &[f64],
    delta: f64,
) -> Result<ExponentEstimate> {
    let d = spec.d;
    let room = t0.iter().fold(spec.a, |acc, c| acc.min(spec.a - c.abs()));
    if !(delta > 0.0) || !(room > 0.0) {
        return Err(Error::Unsupported(format!(
            "delta = {delta} with t0 = {t0:?} leaves no ball inside the domain"
        )));
    }
    let delta = delta.min(0.999 * room);
    let radii = shell_radii(delta);
    let sphere = unit_sphere(d, 200)?;
    let ball = unit_ball(d)?;

    let lowest_root = report.lower_roots().map(|r| r.z).fold(f64::INFINITY, f64::min);
    let e_crit = (spec.w2)(t0, t0).min(lowest_root);

    let mut shells = Vec::new();
    let mut alpha_stats = Vec::new();
    let mut beta_stats = Vec::new();
    let mut gamma_stats = Vec::new();
    let mut gamma_ok = true;
    let xs = domain_samples(d, spec.a, if d == 1 { 512 } else { 48 });

    for &r in &radii {
        let on_sphere: Vec<Vec<f64>> = sphere
            .iter()
            .map(|u| add(t0, &u.iter().map(|c| c * r).collect::<Vec<_>>()))
            .collect();
        let in_ball: Vec<Vec<f64>> = ball
            .iter()
            .map(|u| add(t0, &u.iter().map(|c| c * r).collect::<Vec<_>>()))
            .collect();

        let a_stat = on_sphere
            .iter()
            .flat_map(|x| in_ball.iter().map(move |y| (x, y)))
            .map(|(x, y)| (spec.w2)(x, y) - e_crit)
            .fold(f64::INFINITY, f64::min);
        let b_stat = xs
            .iter()
            .flat_map(|x| on_sphere.iter().map(move |y| (x, y)))
            .map(|(x, y)| (spec.v1)(x, y).norm())
            .fold(0.0, f64::max);
        let mut g_stat = f64::INFINITY;
        for x in &on_sphere {
            match delta_at(spec, grid, x, e_crit) {
                Ok(v) => g_stat = g_stat.min(v),
                Err(_) => gamma_ok = false,
            }
        }

        alpha_stats.push(a_stat);
        beta_stats.push(b_stat);
        gamma_stats.push(g_stat);
        shells.push(ShellStat { exponent: Exponent::Alpha, radius: r, value: a_stat });
        shells.push(ShellStat { exponent: Exponent::Beta, radius: r, value: b_stat });
        shells.push(ShellStat { exponent: Exponent::Gamma, radius: r, value: g_stat });
    }

    let alpha = loglog_fit(&radii, &alpha_stats);
    let beta = if beta_stats.iter().all(|&s| s == 0.0) {
        Some(LogLogFit {
            slope: f64::INFINITY,
            intercept: f64::NEG_INFINITY,
            r2: 1.0,
        })
    } else {
        loglog_fit(&radii, &beta_stats)
    };
    let gamma = if gamma_ok { loglog_fit(&radii, &gamma_stats) } else { None };

    let r2 = |f: &Option<LogLogFit>| f.map_or(f64::NAN, |f| f.r2);
    Ok(ExponentEstimate {
        t0: t0.to_vec(),
        e_crit,
        alpha_hat: alpha.map(|f| f.slope.max(0.0)),
        beta_hat: beta.map(|f| f.slope),
        gamma_hat: gamma.map(|f| f.slope.max(0.0)),
        fit_r2: [r2(&alpha), r2(&beta), r2(&gamma)],
        delta_radius: delta,
        shells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    FinitePredicted,
    Inconclusive,
    CriterionViolated,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::FinitePredicted => "finite-predicted",
            Verdict::Inconclusive => "inconclusive",
            Verdict::CriterionViolated => "criterion-violated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictParams {
    pub margin: f64,
    pub min_r2: f64,
    /// Largest relative change allowed between the two finest levels.
    pub cauchy_tol: f64,
}

impl Default for VerdictParams {
    fn default() -> Self {
        Self {
            margin: 0.1,
            min_r2: 0.9,
            cauchy_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinitenessReport {
    pub estimate: ExponentEstimate,
    /// `alpha + gamma`.
    pub criterion_lhs: f64,
    /// `2 beta + d`.
    pub criterion_rhs: f64,
    pub verdict: Verdict,
    /// `(N, ||T_h(E)||_HS)` per refinement level (NaN where undefined).
    pub hs_trend: Vec<(usize, f64)>,
    pub hs_cauchy: bool,
    /// Whether `int_0^delta t^{rhs - lhs - 1} dt` is finite.
    pub radial_finite: bool,
    /// The radial integral `delta^p / p` when finite.
    pub radial_value: Option<f64>,
    /// The radial test agrees with `lhs < rhs`.
    pub legs_agree: bool,
}

/// Successive relative differences decrease and the last is below `tol`.
pub fn is_cauchy(values: &[f64], tol: f64) -> bool {
    if values.len() < 3 || values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let diffs: Vec<f64> = values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / w[1].abs().max(f64::MIN_POSITIVE))
        .collect();
    diffs.windows(2).all(|p| p[1] <= p[0]) && *diffs.last().unwrap() < tol
}

pub fn finiteness_verdict(
    spec: &ModelSpec,
    grids: &[Grid],
    estimate: &ExponentEstimate,
    params: &VerdictParams,
) -> Result<FinitenessReport> {
    if grids.len() < 3 {
        return Err(Error::TooFewLevels {
            need: 3,
            got: grids.len(),
        });
    }
    let hs_trend: Vec<(usize, f64)> = grids
        .iter()
        .map(|g| {
            let hs = bs_operator(spec, g, estimate.e_crit).map_or(f64::NAN, |t| t.hs_norm_t);
            (g.len(), hs)
        })
        .collect();
    let values: Vec<f64> = hs_trend.iter().map(|p| p.1).collect();
    let hs_cauchy = is_cauchy(&values, params.cauchy_tol);
    Ok(assess(spec.d, estimate, hs_trend, hs_cauchy, params))
}

/// Verdict from exponents and a precomputed trend.
pub fn assess(
    d: usize,
    estimate: &ExponentEstimate,
    hs_trend: Vec<(usize, f64)>,
    hs_cauchy: bool,
    params: &VerdictParams,
) -> FinitenessReport {
    let nan = f64::NAN;
    let alpha = estimate.alpha_hat.unwrap_or(nan);
    let beta = estimate.beta_hat.unwrap_or(nan);
    let gamma = estimate.gamma_hat.unwrap_or(nan);
    let lhs = alpha + gamma;
    let rhs = 2.0 * beta + d as f64;

    let p = rhs - lhs;
    let radial_finite = p > 0.0;
    let radial_value = (radial_finite && p.is_finite())
        .then(|| estimate.delta_radius.powf(p) / p);
    let legs_agree = radial_finite == (lhs < rhs);

    let usable = lhs.is_finite()
        && !rhs.is_nan()
        && estimate.fit_r2.iter().all(|&r| r >= params.min_r2);
    let verdict = if !usable {
        Verdict::Inconclusive
    } else if lhs < rhs - params.margin && hs_cauchy {
        Verdict::FinitePredicted
    } else if lhs > rhs + params.margin {
        Verdict::CriterionViolated
    } else {
        Verdict::Inconclusive
    };
    FinitenessReport {
        estimate: estimate.clone(),
        criterion_lhs: lhs,
        criterion_rhs: rhs,
        verdict,
        hs_trend,
        hs_cauchy,
        radial_finite,
        radial_value,
        legs_agree,
    }
}

/// Writes `exponent,radius,value` rows.
pub fn write_exponents_csv(estimate: &ExponentEstimate, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "exponent,radius,value")?;
    for s in &estimate.shells {
        writeln!(out, "{},{:.12e},{:.12e}", s.exponent.name(), s.radius, s.value)?;
    }
    out.flush()?;
    Ok(())
}
