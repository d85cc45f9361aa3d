//! Minimal SVG charts rendered from the CSV files a run emits.

use std::fmt::Write as _;
use std::path::Path;

use fbmlab::io::read_csv;
use fbmlab::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn map(self, v: f64) -> Option<f64> {
        match self {
            Scale::Linear => v.is_finite().then_some(v),
            Scale::Log => (v > 0.0 && v.is_finite()).then(|| v.log10()),
        }
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, xs: Scale, ys: Scale) {
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let label = |v: f64, s: Scale| match s {
        Scale::Linear => format!("{v:.3}"),
        Scale::Log => format!("1e{v:.1}"),
    };
    let _ = writeln!(out, r#"<text x="{PAD}" y="{}" text-anchor="start">{}</text>"#, H - PAD + 16.0, label(f.x0, xs));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, W - PAD, H - PAD + 16.0, label(f.x1, xs));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, H - PAD, label(f.y0, ys));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, PAD + 10.0, label(f.y1, ys));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of columns `ys` against column `x` of a CSV file.
pub fn lines_from_csv(csv: &Path, x: &str, ys: &[String], xs: Scale, yscale: Scale, title: &str) -> Result<String> {
    let (head, rows) = read_csv(csv)?;
    let col = |name: &str| {
        head.iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Input(format!("column `{name}` missing from {}", csv.display())))
    };
    let xi = col(x)?;
    let yi = ys.iter().map(|y| col(y)).collect::<Result<Vec<_>>>()?;
    let series: Vec<Vec<(f64, f64)>> = yi
        .iter()
        .map(|&j| {
            rows.iter()
                .filter_map(|r| Some((xs.map(r[xi])?, yscale.map(r[j])?)))
                .collect()
        })
        .collect();
    let all = series.iter().flatten();
    let (x0, x1) = span(
        all.clone().map(|p| p.0).fold(f64::INFINITY, f64::min),
        all.clone().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = span(
        all.clone().map(|p| p.1).fold(f64::INFINITY, f64::min),
        all.map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let frame = Frame { x0, x1, y0, y1 };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x, &ys.join(", "), xs, yscale);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s.iter().map(|&(a, b)| format!("{:.2},{:.2}", frame.px(a), frame.py(b))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, pts.join(" "));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Histogram of one CSV column.
pub fn histogram_from_csv(csv: &Path, column: &str, bins: usize, title: &str) -> Result<String> {
    let (head, rows) = read_csv(csv)?;
    let j = head
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Input(format!("column `{column}` missing from {}", csv.display())))?;
    let vals: Vec<f64> = rows.iter().map(|r| r[j]).filter(|v| v.is_finite()).collect();
    let (lo, hi) = span(
        vals.iter().copied().fold(f64::INFINITY, f64::min),
        vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for v in &vals {
        let b = (((v - lo) / (hi - lo)) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let frame = Frame { x0: lo, x1: hi, y0: 0.0, y1: top };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, column, "count", Scale::Linear, Scale::Linear);
    let width = (hi - lo) / bins as f64;
    for (b, &c) in counts.iter().enumerate() {
        let xa = frame.px(lo + b as f64 * width);
        let xb = frame.px(lo + (b + 1) as f64 * width);
        let y = frame.py(c as f64);
        let _ = writeln!(
            out,
            r#"<rect x="{xa:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            (xb - xa).max(0.0),
            frame.py(0.0) - y,
            COLORS[0]
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        std::fs::write(&p, "t,y,z\n0,1,2\n1,0.5,3\n2,0.25,4\n").unwrap();
        let s = lines_from_csv(&p, "t", &["y".into(), "z".into()], Scale::Linear, Scale::Log, "demo").unwrap();
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(lines_from_csv(&p, "t", &["w".into()], Scale::Linear, Scale::Linear, "x").is_err());
        let h = histogram_from_csv(&p, "z", 3, "hist").unwrap();
        assert_eq!(h.matches("<rect").count(), 2 + 3);
    }
}
