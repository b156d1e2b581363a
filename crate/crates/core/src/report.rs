//! Plain-text reports and CSV tables.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::finiteness::FinitenessReport;
use crate::model::AssumptionAReport;
use crate::spectra::{CountingResult, DiscreteSpectrum, EssSpecReport, Side};
use crate::verify::{FullVsReduced, SingularSeqReport};

/// A report made of titled sections of `key: value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TextReport {
    sections: Vec<(String, Vec<String>)>,
}

impl TextReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, title: &str, lines: Vec<String>) -> &mut Self {
        self.sections.push((title.to_string(), lines));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, (title, lines)) in self.sections.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{title}]");
            for l in lines {
                let _ = writeln!(out, "{l}");
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

fn fmt_intervals(v: &[(f64, f64)]) -> String {
    if v.is_empty() {
        return "empty".into();
    }
    v.iter()
        .map(|(a, b)| format!("[{a:.10}, {b:.10}]"))
        .collect::<Vec<_>>()
        .join(" u ")
}

pub fn model_lines(name: &str, d: usize, a: f64, n: usize, rule: &str) -> Vec<String> {
    vec![
        format!("model: {name}"),
        format!("d: {d}"),
        format!("a: {a:.12}"),
        format!("nodes: {n}"),
        format!("rule: {rule}"),
    ]
}

pub fn assumption_lines(r: &AssumptionAReport) -> Vec<String> {
    vec![
        format!("sup_x ||v1(x,.)||_(2+eps): {:.10e}", r.sup_norm_2pe),
        format!("sup_y ||v1(.,y)||_(2+4/eps): {:.10e}", r.sup_norm_2p4e),
        format!("sup |w1|: {:.10e}", r.sup_w1),
        format!("sup |w2|: {:.10e}", r.sup_w2),
        format!("pass: {}", r.pass),
    ]
}

pub fn sigma1_lines(r: &EssSpecReport) -> Vec<String> {
    vec![
        format!("m: {:.12}", r.m),
        format!("M: {:.12}", r.big_m),
        format!("resolution below m: {:.6e}", r.resolution_lo),
        format!("resolution above M: {:.6e}", r.resolution_hi),
    ]
}

pub fn sigma2_lines(r: &EssSpecReport) -> Vec<String> {
    let below = r.lower_roots().count();
    let above = r.upper_roots().count();
    vec![
        format!("roots below m: {below}"),
        format!("roots above M: {above}"),
        format!("hull: {}", fmt_intervals(&r.sigma2_hull)),
        format!("sess_min: {:.12}", r.sess_min),
        format!("sess_max: {:.12}", r.sess_max),
        format!("search window: [{:.6}, {:.6}]", r.window.0, r.window.1),
        format!("window enlargements: {}", r.widened),
    ]
}

pub fn discrete_lines(s: &DiscreteSpectrum) -> Vec<String> {
    let mut v = vec![
        format!("threshold: {:.12}", s.threshold),
        format!("count: {}", s.eigenvalues.len()),
    ];
    v.extend(s.eigenvalues.iter().map(|e| format!("eigenvalue: {e:.12}")));
    v
}

pub fn counting_lines(rows: &[CountingResult]) -> Vec<String> {
    rows.iter()
        .map(|c| {
            format!(
                "z = {:.8}: N(z;A) = {}, N(0;S) = {}, n(1;T) = {}, boundary = {}, agree = {}",
                c.z, c.count_a, c.count_s, c.count_t, c.boundary, c.agree
            )
        })
        .collect()
}

pub fn full_vs_reduced_lines(r: &FullVsReduced) -> Vec<String> {
    vec![format!(
        "z = {:.8}: N(z;H) = {}, N(z;A) = {}, difference = {}, within rank bound = {}",
        r.z,
        r.count_full,
        r.count_reduced,
        r.difference(),
        r.within_rank_bound
    )]
}

fn opt(v: Option<f64>) -> String {
    v.map_or("unavailable".into(), |x| format!("{x:.6}"))
}

pub fn finiteness_lines(f: &FinitenessReport) -> Vec<String> {
    let e = &f.estimate;
    let mut v = vec![
        format!("t0: {:?}", e.t0),
        format!("critical energy: {:.12}", e.e_crit),
        format!("delta: {:.6}", e.delta_radius),
        format!("alpha: {} (r2 {:.4})", opt(e.alpha_hat), e.fit_r2[0]),
        format!("beta: {} (r2 {:.4})", opt(e.beta_hat), e.fit_r2[1]),
        format!("gamma: {} (r2 {:.4})", opt(e.gamma_hat), e.fit_r2[2]),
        format!("alpha + gamma: {:.6}", f.criterion_lhs),
        format!("2 beta + d: {:.6}", f.criterion_rhs),
        format!("radial integral finite: {}", f.radial_finite),
        format!("legs agree: {}", f.legs_agree),
        format!("hs trend cauchy: {}", f.hs_cauchy),
    ];
    v.extend(
        f.hs_trend
            .iter()
            .map(|(n, h)| format!("hs norm at N = {n}: {h:.10e}")),
    );
    v.push(format!("verdict: {}", f.verdict.name()));
    v
}

pub fn singular_lines(s: &SingularSeqReport) -> Vec<String> {
    let mut v = vec![
        format!("z0: {:.12}", s.z0),
        format!("scale: {:.6}", s.scale),
        format!("q: {:.6}", s.q),
        format!("C: {:.10e}", s.constant_c),
    ];
    v.extend(s.rows.iter().map(|r| {
        format!(
            "n = {}: ||H12 psi|| = {:.6e}, ||(H22 - z0) psi|| = {:.6e}, bound = {:.6e}",
            r.n, r.norm_h12, r.norm_h22_shift, r.bound
        )
    }));
    v
}

/// `node, x.., side, z` rows.
pub fn write_sigma2_csv(r: &EssSpecReport, d: usize, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let coords: Vec<String> = if d == 1 {
        vec!["x".into()]
    } else {
        (1..=d).map(|k| format!("x{k}")).collect()
    };
    writeln!(out, "node,{},side,z", coords.join(","))?;
    for root in &r.sigma2_roots {
        let xs: Vec<String> = root.x.iter().map(|c| format!("{c:.12e}")).collect();
        let side = match root.side {
            Side::Below => "below",
            Side::Above => "above",
        };
        writeln!(out, "{},{},{side},{:.12e}", root.node, xs.join(","), root.z)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_counting_csv(rows: &[CountingResult], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "z,count_a,count_s,count_t,boundary,agree")?;
    for c in rows {
        writeln!(
            out,
            "{:.12e},{},{},{},{},{}",
            c.z, c.count_a, c.count_s, c.count_t, c.boundary, c.agree
        )?;
    }
    out.flush()?;
    Ok(())
}
