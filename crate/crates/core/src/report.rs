//! Output files: CSV tables, the JSON run manifest and SVG log–log plots.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! results give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub fn write_csv<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
    /// Finished, but some grid points failed.
    Partial,
    Failed,
}

/// Provenance record written before a run starts and rewritten when it ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub status: RunStatus,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl Manifest {
    pub fn new<T: Serialize>(command: &str, seed: Option<u64>, config: &T) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: serde_json::to_value(config)?,
            status: RunStatus::Running,
            outputs: Vec::new(),
            warnings: Vec::new(),
            error: None,
        })
    }
}

/// Output location for one run: `<dir>/<name>.<ext>`.
#[derive(Debug, Clone)]
pub struct OutputSet {
    pub dir: PathBuf,
    pub name: String,
}

impl OutputSet {
    pub fn new(dir: impl Into<PathBuf>, name: &str) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, name: name.to_string() })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.name))
    }

    pub fn manifest(&self) -> PathBuf {
        self.path(".manifest.json")
    }

    pub fn timings(&self) -> PathBuf {
        self.path(".timings.json")
    }
}

/// One plotted series point with an optional error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Log–log scatter with error bars, an optional fitted line
/// `log y = intercept + slope log x` and a reference line of the given slope
/// through the geometric centre of the data.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<PlotPoint>,
    pub fit: Option<(f64, f64)>,
    pub reference_slope: Option<f64>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const PAD: f64 = 60.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LogLogPlot {
    pub fn to_svg(&self) -> String {
        let pts: Vec<PlotPoint> =
            self.points.iter().copied().filter(|p| p.x > 0.0 && p.y > 0.0 && p.x.is_finite() && p.y.is_finite()).collect();
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, esc(&self.title));
        if pts.is_empty() {
            svg.push_str("</svg>\n");
            return svg;
        }
        let lx: Vec<f64> = pts.iter().map(|p| p.x.log10()).collect();
        let ly: Vec<f64> = pts
            .iter()
            .flat_map(|p| [p.y, p.lo, p.hi])
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(f64::log10)
            .collect();
        let span = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = ((hi - lo) * 0.08).max(0.05);
            (lo - pad, hi + pad)
        };
        let (x0, x1) = span(&lx);
        let (y0, y1) = span(&ly);
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * PAD);
        let sy = |y: f64| HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * PAD);
        let _ = writeln!(
            svg,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * PAD,
            HEIGHT - 2.0 * PAD
        );
        for (lo, hi, horizontal) in [(x0, x1, true), (y0, y1, false)] {
            let mut t = lo.ceil() as i32;
            while (t as f64) <= hi {
                let v = t as f64;
                if horizontal {
                    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">1e{t}</text>"#, sx(v), HEIGHT - PAD + 18.0);
                } else {
                    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{t}</text>"#, PAD - 6.0, sy(v) + 4.0);
                }
                t += 1;
            }
        }
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, esc(&self.x_label));
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            esc(&self.y_label)
        );
        let line = |svg: &mut String, slope: f64, intercept: f64, style: &str| {
            let (ya, yb) = (intercept + slope * x0, intercept + slope * x1);
            let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style}/>"#, sx(x0), sy(ya), sx(x1), sy(yb));
        };
        let _ = writeln!(svg, r#"<clipPath id="plot"><rect x="{PAD}" y="{PAD}" width="{}" height="{}"/></clipPath>"#, WIDTH - 2.0 * PAD, HEIGHT - 2.0 * PAD);
        svg.push_str("<g clip-path=\"url(#plot)\">\n");
        if let Some(slope) = self.reference_slope {
            let cx = lx.iter().sum::<f64>() / lx.len() as f64;
            let cy = pts.iter().map(|p| p.y.log10()).sum::<f64>() / pts.len() as f64;
            line(&mut svg, slope, cy - slope * cx, r##"stroke="#888" stroke-dasharray="6 4""##);
        }
        if let Some((slope, intercept)) = self.fit {
            // The fit is in natural logarithms.
            let b = intercept / std::f64::consts::LN_10;
            line(&mut svg, slope, b, r##"stroke="#c0392b""##);
        }
        for p in &pts {
            let (x, y) = (sx(p.x.log10()), sy(p.y.log10()));
            if p.lo > 0.0 && p.hi > 0.0 && p.hi.is_finite() {
                let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, sy(p.lo.log10()), sy(p.hi.log10()));
            }
            let _ = writeln!(svg, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="#1f4e99"/>"##);
        }
        svg.push_str("</g>\n");
        let mut legend = Vec::new();
        if let Some((slope, _)) = self.fit {
            legend.push(format!("fitted slope {slope:.4}"));
        }
        if let Some(slope) = self.reference_slope {
            legend.push(format!("reference slope {slope:.4}"));
        }
        for (i, l) in legend.iter().enumerate() {
            let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, PAD + 8.0, PAD + 16.0 + 15.0 * i as f64, esc(l));
        }
        svg.push_str("</svg>\n");
        svg
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_svg())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_deterministic_and_well_formed() {
        let plot = LogLogPlot {
            title: "Var f_0 <disk>".into(),
            x_label: "lambda".into(),
            y_label: "variance".into(),
            points: (10..14).map(|i| 2f64.powi(i)).map(|x| PlotPoint { x, y: x.cbrt(), lo: 0.9 * x.cbrt(), hi: 1.1 * x.cbrt() }).collect(),
            fit: Some((1.0 / 3.0, 0.0)),
            reference_slope: Some(1.0 / 3.0),
        };
        let a = plot.to_svg();
        assert_eq!(a, plot.to_svg());
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert!(a.contains("&lt;disk&gt;"));
        assert_eq!(a.matches("<circle").count(), 4);
    }
}
