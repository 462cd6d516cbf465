//! Small self-contained SVG renderer for line plots, histograms and heatmaps.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

pub struct Bars {
    /// `(left edge, right edge, height)`.
    pub bins: Vec<(f64, f64, f64)>,
}

#[derive(Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub bars: Option<Bars>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    pixel_lo: f64,
    pixel_hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool, pixel_lo: f64, pixel_hi: f64) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log, pixel_lo, pixel_hi }
    }

    fn map(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some(self.pixel_lo + (v - self.lo) / (self.hi - self.lo) * (self.pixel_hi - self.pixel_lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|i| {
                let v = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                let label = if self.log { format!("1e{v:.1}") } else { format!("{v:.3}") };
                let pixel = self.pixel_lo + (self.pixel_hi - self.pixel_lo) * i as f64 / 4.0;
                (pixel, label)
            })
            .collect()
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, x: &Axis, y: &Axis, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for (px, label) in x.ticks() {
        let _ = writeln!(out, r#"<line x1="{px:.1}" y1="{y0}" x2="{px:.1}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{}" text-anchor="middle">{label}</text>"#, y0 + 18.0);
    }
    for (py, label) in y.ticks() {
        let _ = writeln!(out, r#"<line x1="{}" y1="{py:.1}" x2="{x0}" y2="{py:.1}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#, x0 - 8.0, py + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

impl Plot {
    pub fn render(&self) -> String {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .chain(self.bars.iter().flat_map(|b| b.bins.iter().flat_map(|&(l, r, _)| [l, r])));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(self.bars.iter().flat_map(|b| b.bins.iter().map(|bin| bin.2)))
            .chain(self.bars.as_ref().map(|_| 0.0));
        let x = Axis::new(xs, self.log_x, LEFT, WIDTH - RIGHT);
        let y = Axis::new(ys, self.log_y, HEIGHT - BOTTOM, TOP);

        let mut out = String::new();
        header(&mut out, &self.title);
        if let Some(bars) = &self.bars {
            for &(l, r, h) in &bars.bins {
                if let (Some(px0), Some(px1), Some(py), Some(base)) = (x.map(l), x.map(r), y.map(h), y.map(0.0)) {
                    let _ = writeln!(
                        out,
                        r##"<rect x="{px0:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="#aec7e8" stroke="#1f77b4" stroke-width="0.5"/>"##,
                        px1 - px0,
                        base - py
                    );
                }
            }
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter_map(|&(px, py)| Some(format!("{:.2},{:.2}", x.map(px)?, y.map(py)?)))
                .collect();
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#,
                path.join(" ")
            );
            let ly = TOP + 16.0 + 16.0 * i as f64;
            let lx = WIDTH - RIGHT - 150.0;
            let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#, lx + 24.0);
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&s.label));
        }
        frame(&mut out, &x, &y, &self.x_label, &self.y_label);
        out.push_str("</svg>\n");
        out
    }
}

/// Heatmap of `values[i * ys.len() + j]` at `(xs[i], ys[j])`; NaN cells stay blank.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64], values: &[f64]) -> String {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let half_step = |axis: &[f64]| if axis.len() > 1 { 0.5 * (axis[1] - axis[0]) } else { 0.5 };
    let (hx, hy) = (half_step(xs), half_step(ys));
    let x = Axis::new([xs[0] - hx, xs[xs.len() - 1] + hx].into_iter(), false, LEFT, WIDTH - RIGHT - 60.0);
    let y = Axis::new([ys[0] - hy, ys[ys.len() - 1] + hy].into_iter(), false, HEIGHT - BOTTOM, TOP);

    let mut out = String::new();
    header(&mut out, title);
    for (i, &xv) in xs.iter().enumerate() {
        for (j, &yv) in ys.iter().enumerate() {
            let v = values[i * ys.len() + j];
            if !v.is_finite() {
                continue;
            }
            let (px0, px1) = (x.map(xv - hx).unwrap_or(0.0), x.map(xv + hx).unwrap_or(0.0));
            let (py0, py1) = (y.map(yv + hy).unwrap_or(0.0), y.map(yv - hy).unwrap_or(0.0));
            let _ = writeln!(
                out,
                r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{xv:.4}, {yv:.4}: {v:.4}</title></rect>"#,
                px1 - px0,
                py1 - py0,
                colormap((v - lo) / span)
            );
        }
    }
    // Color bar.
    let bx = WIDTH - RIGHT - 40.0;
    for k in 0..50 {
        let frac = k as f64 / 49.0;
        let py = (HEIGHT - BOTTOM) - frac * (HEIGHT - BOTTOM - TOP);
        let _ = writeln!(out, r#"<rect x="{bx}" y="{:.2}" width="14" height="{:.2}" fill="{}"/>"#, py - 7.0, 7.5, colormap(frac));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="10">{hi:.3}</text>"#, bx - 2.0, TOP - 4.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="10">{lo:.3}</text>"#, bx - 2.0, HEIGHT - BOTTOM + 14.0);
    frame(&mut out, &x, &y, x_label, y_label);
    out.push_str("</svg>\n");
    out
}

/// Blue → yellow ramp for `t ∈ [0, 1]`.
fn colormap(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (68.0 + t * (253.0 - 68.0)) as u8;
    let g = (1.0 + t * (231.0 - 1.0)) as u8;
    let b = (84.0 + t * (37.0 - 84.0)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}
