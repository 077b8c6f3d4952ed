//! Artifact emission: CSV with fixed schemas, self-contained SVG plots,
//! and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Str(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {

            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => format_sig(*v, 6),
            Cell::Str(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

/// Formats with the given number of significant digits, plain notation.
pub fn format_sig(x: f64, digits: i32) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (digits - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Renders rows under an exact header; byte-deterministic.
pub fn render_csv(schema: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = String::new();
    out.push_str(&schema.join(","));
    out.push('\n');
    for row in rows {
        assert_eq!(row.len(), schema.len(), "row width does not match schema");
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(path: &Path, schema: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    std::fs::write(path, render_csv(schema, rows))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    Scatter,
}

/// Renders a self-contained SVG from parsed CSV content: the x column,
/// the y column, and an optional series column that splits the rows into
/// separately drawn (and legended) series. Deterministic bytes.
pub fn render_plot(
    csv: &str,
    x_col: &str,
    y_col: &str,
    series_col: Option<&str>,
    kind: PlotKind,
    title: &str,
) -> Result<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines
        .next()
        .context("empty csv")?
        .split(',')
        .collect();
    let xi = header
        .iter()
        .position(|c| *c == x_col)
        .with_context(|| format!("column {x_col} missing"))?;
    let yi = header
        .iter()
        .position(|c| *c == y_col)
        .with_context(|| format!("column {y_col} missing"))?;
    let si = match series_col {
        Some(s) => Some(
            header
                .iter()
                .position(|c| *c == s)
                .with_context(|| format!("column {s} missing"))?,
        ),
        None => None,
    };

    // series label -> points, in first-appearance order
    let mut order: Vec<String> = Vec::new();
    let mut series: std::collections::HashMap<String, Vec<(f64, f64)>> =
        std::collections::HashMap::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let x: f64 = cells[xi].parse().context("bad x cell")?;
        let y: f64 = cells[yi].parse().context("bad y cell")?;
        let label = match si {
            Some(i) => cells[i].to_string(),
            None => y_col.to_string(),
        };
        if !series.contains_key(&label) {
            order.push(label.clone());
        }
        series.entry(label).or_default().push((x, y));
    }
    if order.is_empty() {
        anyhow::bail!("no data rows to plot");
    }

    let (w, h) = (640.0, 420.0);
    let (ml, mr, mt, mb) = (60.0, 150.0, 40.0, 50.0);
    let all: Vec<(f64, f64)> = series.values().flatten().copied().collect();
    let (mut x0, mut x1) = all
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = all
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if x0 == x1 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y0 == y1 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    const PALETTE: [&str; 6] = [
        "#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#d68910", "#17a589",
    ];
    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    )?;
    write!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n")?;
    write!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        (ml + w - mr) / 2.0,
        title
    )?;
    // axes
    write!(
        svg,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb
    )?;
    write!(
        svg,
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    )?;
    // ticks: 5 per axis
    for t in 0..=4 {
        let fx = x0 + (x1 - x0) * t as f64 / 4.0;
        let fy = y0 + (y1 - y0) * t as f64 / 4.0;
        let px = sx(fx);
        let py = sy(fy);
        write!(
            svg,
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
            h - mb,
            h - mb + 5.0
        )?;
        write!(
            svg,
            "<text x=\"{px}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            h - mb + 18.0,
            format_sig(fx, 4)
        )?;
        write!(
            svg,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{ml}\" y2=\"{py}\" stroke=\"black\"/>\n",
            ml - 5.0
        )?;
        write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            ml - 8.0,
            py + 4.0,
            format_sig(fy, 4)
        )?;
    }
    // axis labels
    write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        (ml + w - mr) / 2.0,
        h - 12.0,
        x_col
    )?;
    write!(
        svg,
        "<text x=\"16\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0,
        y_col
    )?;

    for (i, label) in order.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = series[label].clone();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if kind == PlotKind::Line && pts.len() > 1 {
            let path: Vec<String> = pts
                .iter()
                .enumerate()
                .map(|(j, p)| {
                    format!(
                        "{}{},{}",
                        if j == 0 { "M" } else { "L" },
                        format_sig(sx(p.0), 6),
                        format_sig(sy(p.1), 6)
                    )
                })
                .collect();
            write!(
                svg,
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                path.join(" ")
            )?;
        }
        for p in &pts {
            write!(
                svg,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                format_sig(sx(p.0), 6),
                format_sig(sy(p.1), 6)
            )?;
        }
        // legend
        let ly = mt + 16.0 * i as f64;
        write!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            w - mr + 10.0,
            ly
        )?;
        write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n",
            w - mr + 26.0,
            ly + 9.0,
            label
        )?;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// The run manifest: everything needed to reproduce the run.
pub struct Manifest {
    pub kind: String,
    pub seed: u64,
    pub threads: usize,
    pub config_sha256: String,
    pub config_text: String,
    pub artifacts: Vec<PathBuf>,
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_manifest(out_dir: &Path, m: &Manifest) -> Result<PathBuf> {
    let mut doc = toml::Table::new();
    doc.insert("tool".into(), toml::Value::String("perclab".into()));
    doc.insert(
        "version".into(),
        toml::Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    doc.insert("kind".into(), toml::Value::String(m.kind.clone()));
    doc.insert("seed".into(), toml::Value::Integer(m.seed as i64));
    doc.insert("threads".into(), toml::Value::Integer(m.threads as i64));
    doc.insert(
        "config_sha256".into(),
        toml::Value::String(m.config_sha256.clone()),
    );
    doc.insert(
        "artifacts".into(),
        toml::Value::Array(
            m.artifacts
                .iter()
                .map(|p| toml::Value::String(p.display().to_string()))
                .collect(),
        ),
    );
    doc.insert(
        "config".into(),
        toml::Value::String(m.config_text.clone()),
    );
    let path = out_dir.join("manifest.toml");
    std::fs::write(&path, toml::to_string_pretty(&doc)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.6523414, 6), "0.652341");
        assert_eq!(format_sig(1.0, 6), "1.00000");
        assert_eq!(format_sig(51521.0, 6), "51521.0");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(-0.25, 6), "-0.250000");
    }

    #[test]
    fn csv_header_only_for_empty_rows() {
        let text = render_csv(&["a", "b"], &[]);
        assert_eq!(text, "a,b\n");
    }

    #[test]
    fn csv_one_row_two_lines() {
        let text = render_csv(&["a", "b"], &[vec![Cell::UInt(1), Cell::Float(0.5)]]);
        assert_eq!(text, "a,b\n1,0.500000\n");
    }

    #[test]
    fn plot_is_deterministic() {
        let csv = "p,n,p_hat\n0.6,4,0.41\n0.6,8,0.52\n0.7,4,0.81\n0.7,8,0.92\n";
        let a = render_plot(csv, "n", "p_hat", Some("p"), PlotKind::Line, "test").unwrap();
        let b = render_plot(csv, "n", "p_hat", Some("p"), PlotKind::Line, "test").unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("</svg>"));
        assert_eq!(a.matches("<path").count(), 2); // one polyline per p
    }

    #[test]
    fn scatter_single_point() {
        let csv = "x,y\n1.0,2.0\n";
        let svg = render_plot(csv, "x", "y", None, PlotKind::Scatter, "pt").unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<path").count(), 0);
    }
}
