//! Reproduction of the digamma figure: samples of
//! Re psi(1/2(1/2 + it) + mu) over a t grid for several mu, emitted as
//! CSV (data first) or a simple SVG line chart.

use thiserror::Error;

use crate::special::{digamma_re, ComplexPoint, SpecialFnError};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error("step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("empty mu list")]
    EmptyMuList,
}

/// Sampling grid for the figure. Defaults mirror the published plot:
/// mu in {0, 1, 4, 8}, t in [-30, 30], step 0.1.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub mu: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self { mu: vec![0.0, 1.0, 4.0, 8.0], t_min: -30.0, t_max: 30.0, step: 0.1 }
    }
}

/// One row per grid point t: (t, one value per mu).
pub fn digamma_rows(spec: &PlotSpec) -> Result<Vec<(f64, Vec<f64>)>, PlotError> {
    if !(spec.step > 0.0) {
        return Err(PlotError::InvalidStep(spec.step));
    }
    if spec.mu.is_empty() {
        return Err(PlotError::EmptyMuList);
    }
    let count = ((spec.t_max - spec.t_min) / spec.step).round() as usize + 1;
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let t = spec.t_min + i as f64 * spec.step;
        let mut values = Vec::with_capacity(spec.mu.len());
        for &mu in &spec.mu {
            values.push(digamma_re(ComplexPoint::new(0.25 + mu, 0.5 * t))?);
        }
        rows.push((t, values));
    }
    Ok(rows)
}

/// RFC-4180-style CSV with a header row: t, then one column per mu.
pub fn to_csv(spec: &PlotSpec, rows: &[(f64, Vec<f64>)]) -> String {
    let mut out = String::from("t");
    for mu in &spec.mu {
        out.push_str(&format!(",re_digamma_mu_{mu}"));
    }
    out.push('\n');
    for (t, values) in rows {
        out.push_str(&format!("{t:.6}"));
        for v in values {
            out.push_str(&format!(",{v:.10}"));
        }
        out.push('\n');
    }
    out
}

/// SVG 1.1 line chart: one polyline per mu, plus a frame.
pub fn to_svg(spec: &PlotSpec, rows: &[(f64, Vec<f64>)]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const MARGIN: f64 = 50.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, values) in rows {
        for &v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let span = (hi - lo).max(1e-12);
    let x_of = |t: f64| {
        MARGIN + (t - spec.t_min) / (spec.t_max - spec.t_min) * (W - 2.0 * MARGIN)
    };
    let y_of = |v: f64| H - MARGIN - (v - lo) / span * (H - 2.0 * MARGIN);
    let colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" \
         fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for (j, &mu) in spec.mu.iter().enumerate() {
        let points: Vec<String> = rows
            .iter()
            .map(|(t, values)| format!("{:.2},{:.2}", x_of(*t), y_of(values[j])))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" \
             points=\"{}\"><title>mu = {mu}</title></polyline>\n",
            colors[j % colors.len()],
            points.join(" ")
        ));
    }
    out.push_str("</svg>\n");
    out
}
