//! Minimal native SVG charts: line and point series with error bars,
//! horizontal reference lines, annotated markers and boxplots, on linear or
//! log axes.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

#[derive(Debug, Clone)]
pub struct Axis {
    pub label: String,
    pub log: bool,
    pub range: Option<(f64, f64)>,
}

impl Axis {
    pub fn linear(label: &str) -> Self {
        Self {
            label: label.into(),
            log: false,
            range: None,
        }
    }

    pub fn log(label: &str) -> Self {
        Self {
            label: label.into(),
            log: true,
            range: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Line,
    Points,
    LinePoints,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Per-point `(lo, hi)` error bar.
    pub errors: Option<Vec<(f64, f64)>>,
    pub mark: Mark,
    pub color: &'static str,
}

#[derive(Debug, Clone)]
pub struct RefLine {
    pub y: f64,
    pub label: String,
    pub color: &'static str,
}

#[derive(Debug, Clone)]
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct BoxSpec {
    pub x: f64,
    pub width: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub color: &'static str,
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub series: Vec<Series>,
    pub ref_lines: Vec<RefLine>,
    pub markers: Vec<Marker>,
    pub boxes: Vec<BoxSpec>,
    /// Custom x tick labels (for categorical boxplot axes).
    pub x_ticks: Option<Vec<(f64, String)>>,
    /// Extra legend entries `(name, color)` for boxes.
    pub legend: Vec<(String, &'static str)>,
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        let (a, b, v) = if self.log {
            (self.lo.log10(), self.hi.log10(), v.log10())
        } else {
            (self.lo, self.hi, v)
        };
        self.px_lo + (v - a) / (b - a) * (self.px_hi - self.px_lo)
    }
}

fn extent(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return if log { (1.0, 10.0) } else { (0.0, 1.0) };
    }
    if log {
        let (a, b) = (lo.log10().floor(), hi.log10().ceil());
        let b = if b <= a { a + 1.0 } else { b };
        (10f64.powf(a), 10f64.powf(b))
    } else {
        let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let m = raw / mag;
    let nice = if m < 1.5 {
        1.0
    } else if m < 3.5 {
        2.0
    } else if m < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let (a, b) = (lo.log10().ceil() as i32, hi.log10().floor() as i32);
        (a..=b).map(|k| 10f64.powi(k)).collect()
    } else {
        let step = nice_step(hi - lo);
        let mut t = (lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= hi + 1e-9 * step {
            out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
            t += step;
        }
        out
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Figure {
    pub fn new(title: &str, x: Axis, y: Axis) -> Self {
        Self {
            title: title.into(),
            x,
            y,
            series: Vec::new(),
            ref_lines: Vec::new(),
            markers: Vec::new(),
            boxes: Vec::new(),
            x_ticks: None,
            legend: Vec::new(),
        }
    }

    fn x_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .collect();
        v.extend(self.markers.iter().map(|m| m.x));
        for b in &self.boxes {
            v.push(b.x - b.width);
            v.push(b.x + b.width);
        }
        v
    }

    fn y_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for s in &self.series {
            v.extend(s.points.iter().map(|p| p.1));
            if let Some(e) = &s.errors {
                v.extend(e.iter().flat_map(|(a, b)| [*a, *b]));
            }
        }
        v.extend(self.ref_lines.iter().map(|r| r.y));
        v.extend(self.markers.iter().map(|m| m.y));
        for b in &self.boxes {
            v.extend([b.whisker_lo, b.whisker_hi]);
        }
        v
    }

    pub fn render(&self) -> String {
        let (x_lo, x_hi) = self
            .x
            .range
            .unwrap_or_else(|| extent(self.x_values().into_iter(), self.x.log));
        let (y_lo, y_hi) = self
            .y
            .range
            .unwrap_or_else(|| extent(self.y_values().into_iter(), self.y.log));
        let sx = Scale {
            lo: x_lo,
            hi: x_hi,
            log: self.x.log,
            px_lo: LEFT,
            px_hi: WIDTH - RIGHT,
        };
        let sy = Scale {
            lo: y_lo,
            hi: y_hi,
            log: self.y.log,
            px_lo: HEIGHT - BOTTOM,
            px_hi: TOP,
        };
        let inside = |x: f64, y: f64| {
            x.is_finite() && y.is_finite() && (!self.x.log || x > 0.0) && (!self.y.log || y > 0.0)
        };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            esc(&self.title)
        );
        let (px0, px1, py0, py1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            s,
            r#"<rect x="{px0}" y="{py1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            px1 - px0,
            py0 - py1
        );

        let xt: Vec<(f64, String)> = match &self.x_ticks {
            Some(t) => t.clone(),
            None => ticks(x_lo, x_hi, self.x.log)
                .into_iter()
                .map(|v| (v, tick_label(v)))
                .collect(),
        };
        for (v, label) in xt {
            let px = sx.map(v);
            let _ = writeln!(
                s,
                r##"<line x1="{px:.1}" y1="{py0}" x2="{px:.1}" y2="{py1}" stroke="#e5e5e5"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                py0 + 16.0,
                esc(&label)
            );
        }
        for v in ticks(y_lo, y_hi, self.y.log) {
            let py = sy.map(v);
            let _ = writeln!(
                s,
                r##"<line x1="{px0}" y1="{py:.1}" x2="{px1}" y2="{py:.1}" stroke="#e5e5e5"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                px0 - 6.0,
                py + 4.0,
                tick_label(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (px0 + px1) / 2.0,
            HEIGHT - 18.0,
            esc(&self.x.label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (py0 + py1) / 2.0,
            (py0 + py1) / 2.0,
            esc(&self.y.label)
        );

        for r in &self.ref_lines {
            if !inside(x_lo, r.y) {
                continue;
            }
            let py = sy.map(r.y);
            let _ = writeln!(
                s,
                r#"<line x1="{px0}" y1="{py:.1}" x2="{px1}" y2="{py:.1}" stroke="{}" stroke-dasharray="6 4"/>"#,
                r.color
            );
        }

        for b in &self.boxes {
            let (xl, xr, xc) = (
                sx.map(b.x - b.width / 2.0),
                sx.map(b.x + b.width / 2.0),
                sx.map(b.x),
            );
            let (q1, q3, med) = (sy.map(b.q1), sy.map(b.q3), sy.map(b.median));
            let (wl, wh) = (sy.map(b.whisker_lo), sy.map(b.whisker_hi));
            let _ = writeln!(
                s,
                r#"<g stroke="{c}" fill="none"><line x1="{xc:.1}" y1="{wl:.1}" x2="{xc:.1}" y2="{q1:.1}"/><line x1="{xc:.1}" y1="{q3:.1}" x2="{xc:.1}" y2="{wh:.1}"/><line x1="{xl:.1}" y1="{wl:.1}" x2="{xr:.1}" y2="{wl:.1}"/><line x1="{xl:.1}" y1="{wh:.1}" x2="{xr:.1}" y2="{wh:.1}"/><rect x="{xl:.1}" y="{q3:.1}" width="{:.1}" height="{:.1}" fill="{c}" fill-opacity="0.2"/><line x1="{xl:.1}" y1="{med:.1}" x2="{xr:.1}" y2="{med:.1}" stroke-width="2"/></g>"#,
                xr - xl,
                (q1 - q3).max(0.0),
                c = b.color
            );
        }

        for series in &self.series {
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .copied()
                .filter(|&(x, y)| inside(x, y))
                .collect();
            if let Some(errs) = &series.errors {
                for (&(x, _), &(lo, hi)) in series.points.iter().zip(errs) {
                    if !inside(x, lo) || !inside(x, hi) {
                        continue;
                    }
                    let px = sx.map(x);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="{}"/>"#,
                        sy.map(lo),
                        sy.map(hi),
                        series.color
                    );
                }
            }
            if matches!(series.mark, Mark::Line | Mark::LinePoints) && pts.len() > 1 {
                let path: Vec<String> = pts
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx.map(x), sy.map(y)))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"/>"#,
                    path.join(" "),
                    series.color
                );
            }
            if matches!(series.mark, Mark::Points | Mark::LinePoints) {
                for &(x, y) in &pts {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{}"/>"#,
                        sx.map(x),
                        sy.map(y),
                        series.color
                    );
                }
            }
        }

        for m in &self.markers {
            if !inside(m.x, m.y) {
                continue;
            }
            let (px, py) = (sx.map(m.x), sy.map(m.y));
            let _ = writeln!(
                s,
                r#"<circle cx="{px:.1}" cy="{py:.1}" r="5" fill="none" stroke="black" stroke-width="1.5"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                px + 8.0,
                py - 8.0,
                esc(&m.label)
            );
        }

        let mut entries: Vec<(String, &str, bool)> = self
            .series
            .iter()
            .map(|se| (se.name.clone(), se.color, false))
            .collect();
        entries.extend(self.legend.iter().map(|(n, c)| (n.clone(), *c, false)));
        entries.extend(
            self.ref_lines
                .iter()
                .map(|r| (r.label.clone(), r.color, true)),
        );
        for (i, (name, c, dashed)) in entries.iter().enumerate() {
            let y = TOP + 10.0 + 18.0 * i as f64;
            let x = WIDTH - RIGHT + 12.0;
            let dash = if *dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                s,
                r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{c}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
                x + 22.0,
                x + 28.0,
                y + 4.0,
                esc(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_element() {
        let mut fig = Figure::new("t <1>", Axis::log("rho"), Axis::linear("sigma"));
        fig.series.push(Series {
            name: "a".into(),
            points: vec![(0.1, 1.0), (1.0, 2.0), (10.0, 1.5)],
            errors: Some(vec![(0.9, 1.1), (1.8, 2.2), (1.4, 1.6)]),
            mark: Mark::LinePoints,
            color: color(0),
        });
        fig.ref_lines.push(RefLine {
            y: 1.7,
            label: "ref".into(),
            color: color(1),
        });
        fig.markers.push(Marker {
            x: 1.4,
            y: 1.36,
            label: "max".into(),
        });
        fig.boxes.push(BoxSpec {
            x: 1.0,
            width: 0.2,
            q1: 1.2,
            median: 1.3,
            q3: 1.4,
            whisker_lo: 1.0,
            whisker_hi: 1.9,
            color: color(2),
        });
        let svg = fig.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(
            svg.contains("<polyline")
                && svg.contains("stroke-dasharray")
                && svg.contains("<rect x=")
        );
        assert!(svg.contains("t &lt;1&gt;"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn tick_generation() {
        assert_eq!(ticks(0.001, 100.0, true).len(), 6);
        let t = ticks(0.0, 1.0, false);
        assert_eq!(t.first(), Some(&0.0));
        assert!((t.last().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(tick_label(0.5), "0.5");
        assert_eq!(tick_label(1e-5), "1e-5");
    }
}
