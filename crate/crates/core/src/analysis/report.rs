//! Report files: CSV tables, per-attribute SVG plots and a JSON summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{AttributeKind, DemographicGroup};
use crate::error::{Error, Result};
use crate::jsonl::{write_atomic, write_json};

use super::curves::BiasCurve;
use super::Analysis;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

pub fn curves_csv(analysis: &Analysis) -> String {
    let rows = analysis
        .models
        .iter()
        .flat_map(|m| &m.curves)
        .flat_map(|c| {
            c.points.iter().map(move |p| {
                format!(
                    "{},{},{},{},{},{},{}",
                    c.model_id,
                    c.attribute,
                    c.group,
                    fmt17(c.t_hcic),
                    fmt17(p.threshold),
                    fmt17(p.fnmr),
                    fmt17(p.fmr)
                )
            })
        });
    csv("model,attribute,group,t_hcic,threshold,fnmr,fmr", rows)
}

pub fn operating_points_csv(analysis: &Analysis) -> String {
    let rows = analysis.models.iter().flat_map(|m| &m.curves).map(|c| {
        let p = &c.operating_point;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.model_id,
            c.attribute,
            c.group,
            fmt17(c.t_hcic),
            fmt17(p.threshold),
            fmt17(p.fnmr),
            fmt17(p.fmr),
            p.false_rejects,
            p.positives,
            p.false_accepts,
            p.negatives
        )
    });
    csv("model,attribute,group,t_hcic,threshold,fnmr,fmr,false_rejects,positives,false_accepts,negatives", rows)
}

pub fn boxstats_csv(analysis: &Analysis) -> String {
    let rows = analysis.models.iter().flat_map(|m| &m.boxstats).map(|b| {
        format!(
            "{},{},{},{},{},{},{},{}",
            b.model_id,
            b.grouping.name(),
            b.attribute,
            b.bucket,
            b.n,
            fmt17(b.median),
            fmt17(b.p15),
            fmt17(b.p85)
        )
    });
    csv("model,grouping,attribute,bucket,n,median,p15,p85", rows)
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];
const FMR_FLOOR: f64 = 1e-3;

/// FNMR against log-scaled FMR for the six groups, with the fixed-threshold
/// operating points drawn as triangles.
pub fn curve_svg(title: &str, curves: &[&BiasCurve]) -> String {
    let (w, h, left, top, pw, ph) = (640.0, 480.0, 70.0, 40.0, 520.0, 360.0);
    let x = |fmr: f64| {
        left + (fmr.max(FMR_FLOOR).log10() - FMR_FLOOR.log10()) / -FMR_FLOOR.log10() * pw
    };
    let y = |fnmr: f64| top + (1.0 - fnmr) * ph;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{title}</text>"#,
        left + pw / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for e in -3..=0 {
        let xv = x(10f64.powi(e));
        let _ = writeln!(
            s,
            r##"<line x1="{xv:.2}" y1="{top}" x2="{xv:.2}" y2="{}" stroke="#ddd"/>"##,
            top + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{xv:.2}" y="{}" text-anchor="middle">1e{e}</text>"#,
            top + ph + 16.0
        );
    }
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let yv = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{yv:.2}" x2="{}" y2="{yv:.2}" stroke="#ddd"/>"##,
            left + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            left - 6.0,
            yv + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">FMR</text>"#,
        left + pw / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">FNMR</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for c in curves {
        let color = COLORS[c.group.index()];
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", x(p.fmr), y(p.fnmr)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let (ox, oy) = (x(c.operating_point.fmr), y(c.operating_point.fnmr));
        let _ = writeln!(
            s,
            r#"<polygon fill="{color}" stroke="black" stroke-width="0.5" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"#,
            ox,
            oy - 6.0,
            ox - 5.0,
            oy + 4.0,
            ox + 5.0,
            oy + 4.0
        );
    }
    for (i, g) in DemographicGroup::ALL.iter().enumerate() {
        let ly = top + 14.0 + 16.0 * i as f64;
        let lx = left + pw - 60.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="3"/>"#,
            lx + 18.0,
            COLORS[g.index()]
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            g.code()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Worst-case FNMR per group at one FMR level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub fmr_target: f64,
    /// Group code -> highest FNMR over attributes.
    pub by_group: BTreeMap<String, f64>,
    pub worst_group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_id: String,
    pub t_hcic: f64,
    pub worst_case: Vec<WorstCase>,
    pub curves: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub models: Vec<ModelSummary>,
}

pub fn summarize(analysis: &Analysis) -> Summary {
    let t = analysis.config.t_hcic;
    let models = analysis
        .models
        .iter()
        .map(|m| {
            let worst_case = analysis
                .config
                .fmr_grid
                .iter()
                .map(|&f| {
                    let mut by_group: BTreeMap<String, f64> = BTreeMap::new();
                    for r in m
                        .matched
                        .iter()
                        .filter(|r| r.t_hcic == t && r.point.fmr_target == f)
                    {
                        let e = by_group
                            .entry(r.group.code().to_owned())
                            .or_insert(f64::NEG_INFINITY);
                        *e = e.max(r.point.fnmr);
                    }
                    let worst_group = by_group
                        .iter()
                        .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(a.0)))
                        .map(|(g, _)| g.clone());
                    WorstCase {
                        fmr_target: f,
                        by_group,
                        worst_group,
                    }
                })
                .collect();
            ModelSummary {
                model_id: m.model_id.clone(),
                t_hcic: t,
                worst_case,
                curves: m.curves.len(),
                notes: m.notes.clone(),
            }
        })
        .collect();
    Summary { models }
}

/// Writes every report file into `dir` and returns their paths.
pub fn emit_report(analysis: &Analysis, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir.join("plots")).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, body) in [
        ("curves.csv", curves_csv(analysis)),
        ("operating_points.csv", operating_points_csv(analysis)),
        ("boxstats.csv", boxstats_csv(analysis)),
    ] {
        let p = dir.join(name);
        write_atomic(&p, body.as_bytes())?;
        written.push(p);
    }
    let t = analysis.config.t_hcic;
    for m in &analysis.models {
        for attribute in AttributeKind::VARIED {
            let curves: Vec<&BiasCurve> = m
                .curves
                .iter()
                .filter(|c| c.attribute == attribute && c.t_hcic == t)
                .collect();
            let title = format!("{} / {} (t_hcic = {t})", m.model_id, attribute);
            let p = dir
                .join("plots")
                .join(format!("{}_{}.svg", m.model_id, attribute));
            write_atomic(&p, curve_svg(&title, &curves).as_bytes())?;
            written.push(p);
        }
    }
    let p = dir.join("summary.json");
    write_json(&p, &summarize(analysis))?;
    written.push(p);
    Ok(written)
}
