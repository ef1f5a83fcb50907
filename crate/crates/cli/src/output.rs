//! CSV and SVG emission.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;

/// Buffered CSV file with a `# key=value` metadata block and a header row.
pub struct CsvFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvFile {
    pub fn create(path: &Path, meta: &[(&str, String)], header: &str) -> anyhow::Result<Self> {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut out = BufWriter::new(file);
        for (k, v) in meta {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "{header}")?;
        Ok(CsvFile {
            path: path.to_path_buf(),
            out,
        })
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) -> anyhow::Result<()> {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.out.write_all(b",")?;
            }
            write!(self.out, "{f}")?;
        }
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<PathBuf> {
        self.out
            .flush()
            .with_context(|| format!("cannot write {}", self.path.display()))?;
        Ok(self.path)
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

/// Maps data coordinates onto the plotting area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Frame { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn open(&self, title: &str, x_label: &str, y_label: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(s, r#"<text x="{}" y="25" text-anchor="middle">{title}</text>"#, WIDTH / 2.0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0
        );
        let bottom = HEIGHT - MARGIN + 15.0;
        for (v, anchor) in [(self.x.0, "start"), (self.x.1, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{bottom}" text-anchor="{anchor}">{}</text>"#,
                self.px(v),
                tick(v)
            );
        }
        for v in [self.y.0, self.y.1] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN - 4.0,
                self.py(v) + 4.0,
                tick(v)
            );
        }
        s
    }
}

fn tick(v: f64) -> String {
    format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Aggregate positions against time. `slices` holds `(t, positions)`; the
/// points of each slice are thinned to one per pixel row.
pub fn positions_svg(slices: &[(f64, Vec<f64>)], y_range: (f64, f64)) -> String {
    let t_range = (
        slices.first().map_or(0.0, |s| s.0),
        slices.last().map_or(1.0, |s| s.0),
    );
    let frame = Frame::new(t_range, y_range);
    let mut s = frame.open("aggregate positions", "t", "x");
    for (t, ys) in slices {
        let px = frame.px(*t);
        let mut last_row = f64::NAN;
        for &y in ys {
            let row = frame.py(y).round();
            if row != last_row {
                let _ = writeln!(s, r#"<rect x="{:.1}" y="{row}" width="1.5" height="1.5" fill="navy"/>"#, px);
                last_row = row;
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Field profiles `(t, xs, values)` drawn as polylines.
pub fn profiles_svg(title: &str, profiles: &[(f64, Vec<f64>, Vec<f64>)]) -> String {
    let mut x_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y_range = (0.0f64, f64::NEG_INFINITY);
    for (_, xs, vs) in profiles {
        for (&x, &v) in xs.iter().zip(vs) {
            x_range = (x_range.0.min(x), x_range.1.max(x));
            y_range = (y_range.0.min(v), y_range.1.max(v));
        }
    }
    if !x_range.0.is_finite() {
        x_range = (0.0, 1.0);
    }
    if !y_range.1.is_finite() {
        y_range.1 = 1.0;
    }
    let frame = Frame::new(x_range, y_range);
    let mut s = frame.open(title, "x", "S");
    let n = profiles.len().max(2) as f64 - 1.0;
    for (k, (t, xs, vs)) in profiles.iter().enumerate() {
        // light to dark with time
        let shade = (200.0 * (1.0 - k as f64 / n)).round();
        let points: Vec<String> = xs
            .iter()
            .zip(vs)
            .map(|(&x, &v)| format!("{:.1},{:.1}", frame.px(x), frame.py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="rgb({shade},{shade},255)" stroke-width="1.2" points="{}"><title>t={t}</title></polyline>"#,
            points.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<PathBuf> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path.to_path_buf())
}
