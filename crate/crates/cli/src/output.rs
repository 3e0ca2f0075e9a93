//! CSV tables and minimal SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use swdl_core::analytic::SATURATED_DB;

use crate::config::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn value(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
}

/// Line plot of some columns of a table against another.
#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x: usize,
    pub ys: Vec<usize>,
    pub y_label: String,
}

#[derive(Debug, Clone)]
pub struct Table {
    /// File stem.
    pub name: String,
    /// Column names, units included (`freq_hz`, `il_db`, ...).
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub plot: Option<Plot>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), plot: None }
    }

    pub fn with_columns(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new(), plot: None }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn plot(mut self, title: &str, x: usize, ys: Vec<usize>, y_label: &str) -> Self {
        self.plot = Some(Plot { title: title.into(), x, ys, y_label: y_label.into() });
        self
    }

    pub fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Render `plot` over `table`. Saturated dB values break the line.
pub fn svg(table: &Table, plot: &Plot) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 50.0);
    let usable = |v: f64| v.is_finite() && v.abs() < SATURATED_DB - 1.0;
    let points: Vec<Vec<Option<(f64, f64)>>> = plot
        .ys
        .iter()
        .map(|&yi| {
            table
                .rows
                .iter()
                .map(|r| match (r[plot.x].value(), r[yi].value()) {
                    (Some(x), Some(y)) if usable(x) && usable(y) => Some((x, y)),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = points.iter().flatten().flatten().copied().collect();
    let (mut x0, mut x1, mut y0, mut y1) = all.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if all.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, plot.title);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{0:.2}" y1="{top}" x2="{0:.2}" y2="{1}" stroke="#ddd"/><text x="{0:.2}" y="{2}" text-anchor="middle">{3}</text>"##,
            sx(fx),
            top + ph,
            top + ph + 16.0,
            tick_label(fx)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#ddd"/><text x="{2}" y="{3:.2}" text-anchor="end">{4}</text>"##,
            sy(fy),
            left + pw,
            left - 6.0,
            sy(fy) + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 10.0, table.columns[plot.x]);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        top + ph / 2.0,
        plot.y_label
    );
    for (k, (series, &yi)) in points.iter().zip(&plot.ys).enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        for run in series.split(|p| p.is_none()).filter(|r| !r.is_empty()) {
            let coords: Vec<String> = run.iter().flatten().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        }
        let ly = top + 14.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{colour}" stroke-width="2"/><text x="{3}" y="{4}">{5}</text>"#,
            left + pw + 10.0,
            ly,
            left + pw + 30.0,
            left + pw + 36.0,
            ly + 4.0,
            table.columns[yi]
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Write every table (and its plot when SVG is requested) into `dir`.
/// Nothing is left behind if any write fails.
pub fn write_all(dir: &Path, tables: &[Table], formats: &[Format]) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    for t in tables {
        if formats.contains(&Format::Csv) {
            files.push((dir.join(format!("{}.csv", t.name)), t.csv()));
        }
        if formats.contains(&Format::Svg) {
            if let Some(p) = &t.plot {
                files.push((dir.join(format!("{}.svg", t.name)), svg(t, p)));
            }
        }
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (path, body) in files {
        if let Err(e) = fs::write(&path, body) {
            let _ = fs::remove_file(&path);
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_round_trip_floats() {
        let mut t = Table::new("x", &["a_hz", "b_db"]);
        t.push(vec![Cell::Num(0.1), Cell::Num(-3.0)]);
        assert_eq!(t.csv(), "a_hz,b_db\n0.1,-3.0\n");
    }

    #[test]
    fn saturated_points_break_the_polyline() {
        let mut t = Table::new("x", &["x", "y_db"]);
        for (x, y) in [(0.0, 1.0), (1.0, 2.0), (2.0, SATURATED_DB), (3.0, 1.0), (4.0, 0.0)] {
            t.push(vec![Cell::Num(x), Cell::Num(y)]);
        }
        let t = t.plot("t", 0, vec![1], "dB");
        let s = svg(&t, t.plot.as_ref().unwrap());
        assert_eq!(s.matches("<polyline").count(), 2);
    }
}
