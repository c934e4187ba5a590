//! Minimal static SVG plots: line charts (linear or log axes), stacked panels and heatmaps.

use std::fmt::Write as _;

const W: f64 = 640.0;
const PANEL_H: f64 = 300.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 45.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    scale: Scale,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, scale: Scale) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (scale == Scale::Linear || *v > 0.0)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = if scale == Scale::Log { (1.0, 10.0) } else { (0.0, 1.0) };
        }
        if hi <= lo {
            (lo, hi) = if scale == Scale::Log { (lo / 2.0, hi * 2.0) } else { (lo - 0.5, hi + 0.5) };
        }
        if scale == Scale::Linear {
            let pad = 0.05 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Axis { lo, hi, scale }
    }

    /// Position in [0, 1], `None` for values a log axis cannot show.
    fn frac(&self, v: f64) -> Option<f64> {
        match self.scale {
            Scale::Linear => Some((v - self.lo) / (self.hi - self.lo)),
            Scale::Log if v > 0.0 => Some((v / self.lo).ln() / (self.hi / self.lo).ln()),
            Scale::Log => None,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        match self.scale {
            Scale::Log => {
                let (a, b) = (self.lo.log10().ceil() as i32, self.hi.log10().floor() as i32);
                let step = ((b - a) / 6 + 1).max(1);
                (a..=b).step_by(step as usize).map(|e| 10f64.powi(e)).collect()
            }
            Scale::Linear => {
                let raw = (self.hi - self.lo) / 5.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
                let mut t = (self.lo / step).ceil() * step;
                let mut out = Vec::new();
                while t <= self.hi + 1e-9 * step {
                    out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
                    t += step;
                }
                out
            }
        }
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, y0: f64, title: &str, xl: &str, yl: &str, xa: &Axis, ya: &Axis) -> (f64, f64, f64, f64) {
    let (x0, x1) = (LEFT, W - RIGHT);
    let (py0, py1) = (y0 + TOP, y0 + PANEL_H - BOTTOM);
    let _ = writeln!(out, r##"<rect x="{x0}" y="{py0}" width="{}" height="{}" fill="none" stroke="#333"/>"##, x1 - x0, py1 - py0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, y0 + 18.0, esc(title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, (x0 + x1) / 2.0, py1 + 36.0, esc(xl));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {})">{}</text>"#,
        (py0 + py1) / 2.0,
        (py0 + py1) / 2.0,
        esc(yl)
    );
    for t in xa.ticks() {
        if let Some(f) = xa.frac(t).filter(|f| (0.0..=1.0).contains(f)) {
            let x = x0 + f * (x1 - x0);
            let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{py1}" x2="{x:.2}" y2="{}" stroke="#333"/>"##, py1 + 5.0);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, py1 + 18.0, tick_label(t));
        }
    }
    for t in ya.ticks() {
        if let Some(f) = ya.frac(t).filter(|f| (0.0..=1.0).contains(f)) {
            let y = py1 - f * (py1 - py0);
            let _ = writeln!(out, r##"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="#333"/>"##, x0 - 5.0);
            let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#, x0 - 8.0, y + 4.0, tick_label(t));
        }
    }
    (x0, x1, py0, py1)
}

fn panel(out: &mut String, y0: f64, p: &Panel) {
    let xa = Axis::fit(p.series.iter().flat_map(|s| s.points.iter().map(|q| q.0)), p.x_scale);
    let ya = Axis::fit(p.series.iter().flat_map(|s| s.points.iter().map(|q| q.1)), p.y_scale);
    let (x0, x1, py0, py1) = frame(out, y0, &p.title, &p.x_label, &p.y_label, &xa, &ya);
    for (k, s) in p.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter_map(|&(x, y)| {
                let (fx, fy) = (xa.frac(x)?, ya.frac(y)?);
                (fx.is_finite() && fy.is_finite()).then(|| format!("{:.2},{:.2}", x0 + fx * (x1 - x0), py1 - fy * (py1 - py0)))
            })
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        if !s.label.is_empty() {
            let ly = py0 + 14.0 + 14.0 * k as f64;
            let _ = writeln!(out, r#"<text x="{}" y="{ly}" text-anchor="end" font-size="11" fill="{color}">{}</text>"#, x1 - 6.0, esc(&s.label));
        }
    }
}

/// Panels stacked vertically in one document.
pub fn stacked(panels: &[Panel]) -> String {
    let h = PANEL_H * panels.len() as f64;
    let mut out = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{h}" viewBox="0 0 {W} {h}" font-family="sans-serif">"#);
    out.push('\n');
    let _ = writeln!(out, r#"<rect width="{W}" height="{h}" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        panel(&mut out, i as f64 * PANEL_H, p);
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap with one column per (evenly spaced) sweep value and one row per T2 point (log axis); colour is weight.
pub fn heatmap(title: &str, x_label: &str, sweep: &[f64], t2: &[f64], weights: &[Vec<f64>]) -> String {
    let mut out = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{PANEL_H}" viewBox="0 0 {W} {PANEL_H}" font-family="sans-serif">"#);
    out.push('\n');
    let _ = writeln!(out, r#"<rect width="{W}" height="{PANEL_H}" fill="white"/>"#);
    let n = sweep.len().max(1);
    let (s0, s1) = (sweep.first().cloned().unwrap_or(0.0), sweep.last().cloned().unwrap_or(1.0));
    let d = if n > 1 && s1 > s0 { (s1 - s0) / (n - 1) as f64 } else { 1.0 };
    let xa = Axis { lo: s0 - d / 2.0, hi: s1 + d / 2.0, scale: Scale::Linear };
    let ya = Axis::fit(t2.iter().cloned(), Scale::Log);
    let (x0, x1, py0, py1) = frame(&mut out, 0.0, title, x_label, "T2 (s)", &xa, &ya);
    let wmax = weights.iter().flatten().cloned().fold(0.0, f64::max);
    let cw = (x1 - x0) / n as f64;
    let ch = (py1 - py0) / t2.len().max(1) as f64;
    for (i, col) in weights.iter().enumerate() {
        for (j, &w) in col.iter().enumerate() {
            if w <= 0.0 || wmax <= 0.0 {
                continue;
            }
            // white to dark blue
            let f = (w / wmax).sqrt();
            let c = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({},{},{})"/>"#,
                x0 + xa.frac(sweep[i]).unwrap_or(0.0) * (x1 - x0) - cw / 2.0,
                py1 - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                c(255.0, 8.0),
                c(255.0, 48.0),
                c(255.0, 107.0)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
