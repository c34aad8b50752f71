//! Static SVG rendering of a result CSV: one file per (model, ρ) with size,
//! raw power and size-adjusted power panels against α, one line per β.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sct_core::simulate::CSV_HEADER;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub model: String,
    pub rho: f64,
    pub method: String,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub metric: String,
    pub value: f64,
}

const METRICS: [(&str, &str); 3] = [
    ("size", "Size"),
    ("raw_power", "Raw power"),
    ("adj_power", "Size-adjusted power"),
];

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22",
    "#7f7f7f", "#393b79",
];

const PANEL_W: f64 = 300.0;
const PANEL_H: f64 = 240.0;
const MARGIN_L: f64 = 50.0;
const MARGIN_T: f64 = 40.0;
const GAP: f64 = 70.0;
const LEGEND_W: f64 = 110.0;

pub fn parse_csv(path: &Path, text: &str) -> Result<Vec<CsvRow>, CliError> {
    let bad = |line: usize, message: String| CliError::Input {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(bad(
                line_no,
                format!("expected 10 fields, found {}", f.len()),
            ));
        }
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(line_no, format!("bad {what} `{s}`")))
        };
        let opt = |s: &str, what: &str| {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s, what).map(Some)
            }
        };
        rows.push(CsvRow {
            model: f[0].to_string(),
            rho: num(f[1], "rho")?,
            method: f[2].to_string(),
            alpha: opt(f[3], "alpha")?,
            beta: opt(f[4], "beta")?,
            metric: f[5].to_string(),
            value: num(f[6], "value")?,
        });
    }
    Ok(rows)
}

/// Model and ρ in first-seen order, each with its rows.
fn group(rows: &[CsvRow]) -> Vec<((String, f64), Vec<&CsvRow>)> {
    let mut out: Vec<((String, f64), Vec<&CsvRow>)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(k, _)| k.0 == r.model && k.1 == r.rho) {
            Some((_, v)) => v.push(r),
            None => out.push(((r.model.clone(), r.rho), vec![r])),
        }
    }
    out
}

pub fn file_name(model: &str, rho: f64) -> String {
    format!("{model}_rho{rho}.svg")
}

/// Writes one SVG per (model, ρ) and returns the paths.
pub fn write_figures(rows: &[CsvRow], out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut written = Vec::new();
    for ((model, rho), group) in group(rows) {
        let path = out_dir.join(file_name(&model, rho));
        std::fs::write(&path, render(&model, rho, &group)).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

struct Frame {
    x0: f64,
    x_lo: f64,
    x_hi: f64,
}

impl Frame {
    fn x(&self, a: f64) -> f64 {
        self.x0 + (a - self.x_lo) / (self.x_hi - self.x_lo) * PANEL_W
    }

    fn y(&self, v: f64) -> f64 {
        MARGIN_T + (1.0 - v.clamp(0.0, 1.0)) * PANEL_H
    }
}

pub fn render(model: &str, rho: f64, rows: &[&CsvRow]) -> String {
    let sct: Vec<&&CsvRow> = rows.iter().filter(|r| r.method == "sct").collect();
    let mut betas: Vec<f64> = Vec::new();
    for r in &sct {
        if let Some(b) = r.beta {
            if !betas.contains(&b) {
                betas.push(b);
            }
        }
    }
    betas.sort_by(f64::total_cmp);
    let x_lo = sct
        .iter()
        .filter_map(|r| r.alpha)
        .fold(1.0f64, f64::min)
        .min(1.0);
    let (x_lo, x_hi) = ((x_lo * 10.0).floor() / 10.0, 2.0);

    let width = MARGIN_L + 3.0 * PANEL_W + 2.0 * GAP + LEGEND_W;
    let height = MARGIN_T + PANEL_H + 50.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let title = if model == "independent" {
        model.to_string()
    } else {
        format!("{model}, rho = {rho}")
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="16" font-size="13" text-anchor="middle">{title}</text>"#,
        width / 2.0
    );

    for (k, (metric, label)) in METRICS.iter().enumerate() {
        let frame = Frame {
            x0: MARGIN_L + k as f64 * (PANEL_W + GAP),
            x_lo,
            x_hi,
        };
        axes(&mut s, &frame, label);
        if *metric == "size" {
            let y = frame.y(0.05);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-dasharray="4 3"/>"#,
                frame.x(x_lo),
                frame.x(x_hi)
            );
        }
        for (i, beta) in betas.iter().enumerate() {
            let mut pts: Vec<(f64, f64)> = sct
                .iter()
                .filter(|r| r.metric == *metric && r.beta == Some(*beta))
                .filter_map(|r| r.alpha.map(|a| (a, r.value)))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pts.is_empty() {
                continue;
            }
            let colour = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = pts
                .iter()
                .map(|&(a, v)| format!("{:.2},{:.2}", frame.x(a), frame.y(v)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for (method, colour) in [("cct", "red"), ("stouffer", "black")] {
            for r in rows
                .iter()
                .filter(|r| r.method == method && r.metric == *metric)
            {
                if let Some(a) = r.alpha {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{colour}"/>"#,
                        frame.x(a),
                        frame.y(r.value)
                    );
                }
            }
        }
    }

    let lx = MARGIN_L + 3.0 * PANEL_W + 2.0 * GAP + 15.0;
    let mut ly = MARGIN_T + 8.0;
    for (i, beta) in betas.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="1.5"/><text x="{}" y="{}">beta = {beta}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0
        );
        ly += 16.0;
    }
    for (name, colour) in [("CCT", "red"), ("Stouffer", "black")] {
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{ly}" r="3.5" fill="{colour}"/><text x="{}" y="{}">{name}</text>"#,
            lx + 9.0,
            lx + 24.0,
            ly + 4.0
        );
        ly += 16.0;
    }
    s.push_str("</svg>\n");
    s
}

fn axes(s: &mut String, f: &Frame, label: &str) {
    let (left, right) = (f.x(f.x_lo), f.x(f.x_hi));
    let (top, bottom) = (f.y(1.0), f.y(0.0));
    let _ = writeln!(
        s,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="dimgray"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
        (left + right) / 2.0,
        top - 6.0
    );
    for v in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let y = f.y(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="dimgray"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            left - 4.0,
            left - 6.0,
            y + 4.0
        );
    }
    let mut a = (f.x_lo * 10.0).ceil() / 10.0;
    while a <= f.x_hi + 1e-9 {
        let x = f.x(a);
        let major = ((a * 2.0).round() - a * 2.0).abs() < 1e-9;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="dimgray"/>"#,
            bottom + if major { 5.0 } else { 3.0 }
        );
        if major {
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{a:.1}</text>"#,
                bottom + 17.0
            );
        }
        a = ((a + 0.1) * 10.0).round() / 10.0;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">alpha</text>"#,
        (left + right) / 2.0,
        bottom + 32.0
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "model,rho,method,alpha,beta,metric,value,mc_se,reps,seed
exchangeable,0.8,sct,0.5,0,size,0.040000,0.006197,1000,1
exchangeable,0.8,sct,1.5,0,size,0.060000,0.007510,1000,1
exchangeable,0.8,sct,0.5,1,size,0.030000,0.005394,1000,1
exchangeable,0.8,cct,1,0,size,0.050000,0.006892,1000,1
exchangeable,0.8,stouffer,2,0,size,0.300000,0.014491,1000,1
exchangeable,0.8,fisher,,,size,0.200000,0.012649,1000,1
independent,0,cct,1,0,raw_power,0.700000,0.014491,1000,1
";

    #[test]
    fn parses_rows_with_empty_index() {
        let rows = parse_csv(Path::new("r.csv"), CSV).unwrap();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[5].alpha, None);
        assert_eq!(rows[3].alpha, Some(1.0));
        assert_eq!(group(&rows).len(), 2);
    }

    #[test]
    fn rejects_foreign_csv() {
        assert!(parse_csv(Path::new("r.csv"), "a,b\n1,2\n").is_err());
        let e = parse_csv(
            Path::new("r.csv"),
            &format!("{CSV_HEADER}\nx,0,sct,1,0,size,zz,0,1,1\n"),
        )
        .unwrap_err();
        assert!(e.to_string().contains(":2:"), "{e}");
    }

    #[test]
    fn svg_structure() {
        let rows = parse_csv(Path::new("r.csv"), CSV).unwrap();
        let groups = group(&rows);
        let svg = render("exchangeable", 0.8, &groups[0].1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
        // One CCT and one Stouffer point on the size panel, plus the legend.
        assert_eq!(svg.matches(r#"fill="red""#).count(), 2);
        assert_eq!(svg.matches(r#"fill="black""#).count(), 2);
        assert!(svg.contains("Size-adjusted power"));
        assert_eq!(file_name("exchangeable", 0.8), "exchangeable_rho0.8.svg");
    }
}
