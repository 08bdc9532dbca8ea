use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::config::PlotFormat;
use super::runner::SummaryRow;
use crate::error::{Error, Result};

const FLOOR: f64 = 1e-6;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

impl FromStr for PlotFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svg" => Ok(PlotFormat::Svg),
            "gnuplot" | "gnuplot_script" => Ok(PlotFormat::Gnuplot),
            other => Err(Error::invalid(format!("unknown plot format {other:?}"))),
        }
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

/// One series per method and SNR, mean error against M.
fn collect(summary: &[SummaryRow]) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for row in summary {
        let label = format!("{} @ {} dB", row.method, row.snr_db);
        let y = row.mean_abs_err_deg.unwrap_or(f64::NAN).max(FLOOR);
        let point = (row.m as f64, if row.mean_abs_err_deg.is_some() { y } else { f64::NAN });
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(point),
            None => series.push(Series { label, points: vec![point] }),
        }
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    series
}

pub fn render_plot(summary: &[SummaryRow], format: PlotFormat) -> Result<String> {
    if summary.is_empty() {
        return Err(Error::invalid("cannot plot an empty summary"));
    }
    let series = collect(summary);
    Ok(match format {
        PlotFormat::Svg => svg(&series),
        PlotFormat::Gnuplot => gnuplot(&series),
    })
}

pub fn emit_plot(summary: &[SummaryRow], path: &Path, format: PlotFormat) -> Result<()> {
    let text = render_plot(summary, format)?;
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn gnuplot(series: &[Series]) -> String {
    let mut out = String::new();
    for (k, s) in series.iter().enumerate() {
        let _ = writeln!(out, "$s{k} << EOD");
        for (x, y) in s.points.iter().filter(|p| p.1.is_finite()) {
            let _ = writeln!(out, "{x} {y}");
        }
        out.push_str("EOD\n");
    }
    out.push_str("set logscale y\nset logscale x 2\n");
    out.push_str("set xlabel \"array size M\"\nset ylabel \"mean absolute error (deg)\"\nset key outside right\n");
    let plots: Vec<String> = series
        .iter()
        .enumerate()
        .map(|(k, s)| format!("$s{k} using 1:2 with linespoints title \"{}\"", s.label))
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}

fn svg(series: &[Series]) -> String {
    let (w, h) = (760.0, 480.0);
    let (left, right, top, bottom) = (70.0, 560.0, 20.0, 420.0);
    let finite = || series.iter().flat_map(|s| s.points.iter()).filter(|p| p.1.is_finite());
    let (mut x0, mut x1) = finite().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = finite().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (1.0, 2.0, 0.1, 1.0);
    }
    let (lx0, mut lx1) = (x0.log2(), x1.log2());
    if lx1 - lx0 < 1e-9 {
        lx1 = lx0 + 1.0;
    }
    let ly0 = y0.log10().floor();
    let ly1 = y1.log10().ceil().max(ly0 + 1.0);
    let px = |x: f64| left + (x.log2() - lx0) / (lx1 - lx0) * (right - left);
    let py = |y: f64| bottom - (y.log10() - ly0) / (ly1 - ly0) * (bottom - top);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
    );
    let mut e = ly0 as i32;
    while e as f64 <= ly1 {
        let y = py(10f64.powi(e));
        let _ = writeln!(
            out,
            r##"<line x1="{left}" y1="{y:.1}" x2="{right}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">1e{e}</text>"##,
            left - 6.0,
            y + 4.0
        );
        e += 1;
    }
    let mut ms: Vec<f64> = finite().map(|p| p.0).collect();
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    for m in ms {
        let x = px(m);
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">{m}</text>"#,
            bottom + 18.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">array size M</text>"#,
        (left + right) / 2.0,
        bottom + 42.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">mean absolute error (deg, log scale)</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    );
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-label="{}" points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#,
            s.label,
            pts.join(" ")
        );
        for p in &pts {
            let (x, y) = p.split_once(',').unwrap();
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
        let ly = top + 16.0 * k as f64 + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            right + 15.0,
            right + 35.0,
            right + 40.0,
            ly + 4.0,
            s.label
        );
    }
    out.push_str("</svg>\n");
    out
}
