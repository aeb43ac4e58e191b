//! Deterministic artifact writers: CSV tables and native SVG figures.
//! All numbers are written with Rust's shortest-roundtrip float
//! formatting, so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub struct OutDir {
    pub path: PathBuf,
}

impl OutDir {
    pub fn create(path: &Path) -> io::Result<Self> {
        fs::create_dir_all(path)?;
        Ok(Self {
            path: path.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, content: &str) -> io::Result<PathBuf> {
        let p = self.path.join(name);
        fs::write(&p, content)?;
        Ok(p)
    }
}

/// A CSV table under construction.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) {
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                self.buf.push(',');
            }
            write!(self.buf, "{f}").unwrap();
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// A minimal line-plot SVG: fixed frame, ticks, colored polylines with
/// legend entries.
pub struct SvgPlot {
    width: f64,
    height: f64,
    margin: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    title: String,
    body: String,
    legend: Vec<(String, String)>,
}

impl SvgPlot {
    pub fn new(title: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Self {
            width: 640.0,
            height: 420.0,
            margin: 48.0,
            x_range,
            y_range,
            title: title.to_string(),
            body: String::new(),
            legend: Vec::new(),
        }
    }

    fn x(&self, v: f64) -> f64 {
        let (a, b) = self.x_range;
        self.margin + (v - a) / (b - a) * (self.width - 2.0 * self.margin)
    }

    fn y(&self, v: f64) -> f64 {
        let (a, b) = self.y_range;
        self.height - self.margin - (v - a) / (b - a) * (self.height - 2.0 * self.margin)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str, label: &str) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for (k, &(px, py)) in points.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2},{:.2}",
                if k == 0 { "" } else { " " },
                self.x(px),
                self.y(py)
            );
        }
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{d}"/>"#
        );
        if !label.is_empty() {
            self.legend.push((label.to_string(), color.to_string()));
        }
    }

    pub fn segment(&mut self, from: (f64, f64), to: (f64, f64), color: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="0.8"/>"#,
            self.x(from.0),
            self.y(from.1),
            self.x(to.0),
            self.y(to.1)
        );
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(
            s,
            r#"<rect width="{}" height="{}" fill="white"/>"#,
            self.width, self.height
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
            self.margin, self.title
        );
        // frame
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="1"/>"#,
            self.margin,
            self.margin,
            self.width - 2.0 * self.margin,
            self.height - 2.0 * self.margin
        );
        // ticks: 5 per axis with labels
        for k in 0..=4 {
            let fx = self.x_range.0 + (self.x_range.1 - self.x_range.0) * k as f64 / 4.0;
            let fy = self.y_range.0 + (self.y_range.1 - self.y_range.0) * k as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{:.3}</text>"#,
                self.x(fx),
                self.height - self.margin + 16.0,
                fx
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{:.3}</text>"#,
                self.margin - 6.0,
                self.y(fy) + 3.0,
                fy
            );
        }
        s.push_str(&self.body);
        for (k, (label, color)) in self.legend.iter().enumerate() {
            let ly = self.margin + 14.0 * (k as f64 + 1.0);
            let lx = self.width - self.margin - 150.0;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                lx,
                ly,
                lx + 20.0,
                ly
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
                lx + 26.0,
                ly + 4.0,
                label
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
    fn csv_rows_are_joined_with_commas() {
        let mut c = Csv::new("a,b");
        c.row(&[&1, &2.5]);
        c.row(&[&"x", &0.125]);
        assert_eq!(c.finish(), "a,b\n1,2.5\nx,0.125\n");
    }

    #[test]
    fn svg_contains_polyline_and_legend() {
        let mut p = SvgPlot::new("test", (0.0, 1.0), (0.0, 1.0));
        p.polyline(&[(0.0, 0.0), (1.0, 1.0)], "#1f77b4", "diag");
        let svg = p.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("diag"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let make = || {
            let mut p = SvgPlot::new("t", (0.0, 2.0), (0.0, 1.0));
            p.polyline(&[(0.1, 0.3), (1.7, 0.9)], "#d62728", "curve");
            p.segment((0.0, 0.0), (2.0, 1.0), "#888888");
            p.render()
        };
        assert_eq!(make(), make());
    }
}
