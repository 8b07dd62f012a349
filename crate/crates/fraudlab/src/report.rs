//! Report files: per-model JSON / CSV / Markdown / SVG, sweep curves, and a
//! manifest listing every artifact with its SHA-256.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fraudlab_core::metrics::ClassReport;
use fraudlab_core::EvalReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format};
use crate::error::{Error, Result};
use crate::experiments::{ExperimentKind, ExperimentResult, SweepRecord};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";

/// Markdown table header used for every metrics table.
pub const TABLE_HEADER: [&str; 5] = ["Model", "Precision", "Recall", "F1-Score", "Accuracy"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    pub artifacts: Vec<Artifact>,
    /// Wall-clock timings file; listed without a hash because it differs
    /// between otherwise identical runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Creates `dir` and proves it is writable, so a bad output path fails
/// before any training starts.
pub fn prepare_output(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".fraudlab-write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Writes files under a root directory and records each one.
pub struct Emitter {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Emitter {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Emitter {
            root: root.into(),
            artifacts: Vec::new(),
        }
    }

    pub fn write(&mut self, rel: &str, content: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        self.artifacts.push(Artifact {
            path: rel.to_string(),
            sha256: sha256_hex(content),
            bytes: content.len() as u64,
        });
        Ok(())
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(
        mut self,
        experiment: Option<ExperimentKind>,
        config: Option<ExperimentConfig>,
        timings: Option<String>,
    ) -> Result<Manifest> {
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment,
            // The output location is not part of what was computed.
            config: config.map(|c| ExperimentConfig { out: None, ..c }),
            artifacts: self.artifacts,
            timings,
        };
        let path = self.root.join(MANIFEST_FILE);
        fs::write(&path, to_json(&manifest)?).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("JSON encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Two rows, one per class, with the confusion counts repeated on each.
pub fn report_csv(name: &str, r: &EvalReport) -> String {
    let mut out = String::from(
        "model,class,precision,recall,f1,accuracy,support,tp,tn,fp,fn,threshold,split\n",
    );
    for c in [&r.class_1, &r.class_0] {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(name),
            c.positive_class,
            c.precision,
            c.recall,
            c.f1,
            c.accuracy,
            c.support,
            r.confusion.tp,
            r.confusion.tn,
            r.confusion.fp,
            r.confusion.fn_,
            r.threshold,
            csv_field(&r.provenance.split),
        );
    }
    out
}

/// `| Model | Precision | Recall | F1-Score | Accuracy |` with four decimals.
pub fn markdown_table<'a>(rows: impl IntoIterator<Item = (&'a str, &'a ClassReport)>) -> String {
    let mut out = format!("| {} |\n", TABLE_HEADER.join(" | "));
    out.push_str("|---|---:|---:|---:|---:|\n");
    for (name, c) in rows {
        let _ = writeln!(
            out,
            "| {name} | {:.4} | {:.4} | {:.4} | {:.4} |",
            c.precision, c.recall, c.f1, c.accuracy
        );
    }
    out
}

pub fn report_markdown(name: &str, r: &EvalReport) -> String {
    let cm = &r.confusion;
    let mut out = format!("## {name} ({})\n\nClass 1\n\n", r.provenance.split);
    out.push_str(&markdown_table([(name, &r.class_1)]));
    out.push_str("\nClass 0\n\n");
    out.push_str(&markdown_table([(name, &r.class_0)]));
    let _ = writeln!(
        out,
        "\nTP {} | TN {} | FP {} | FN {} | threshold {} | rows {} | fraud {}",
        cm.tp, cm.tn, cm.fp, cm.fn_, r.threshold, r.dataset.rows, r.dataset.frauds
    );
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const METRIC_COLORS: [&str; 4] = ["#4e79a7", "#f28e2b", "#59a14f", "#9c755f"];
const METRIC_NAMES: [&str; 4] = ["Precision", "Recall", "F1-Score", "Accuracy"];

/// Grouped bar chart: four bars (precision, recall, F1, accuracy) per model.
pub fn metrics_svg(title: &str, rows: &[(&str, &ClassReport)]) -> String {
    let (left, top, plot_h, group_w) = (60.0, 50.0, 240.0, 120.0);
    let width = left + group_w * rows.len().max(1) as f64 + 20.0;
    let height = top + plot_h + 80.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{left}\" y=\"24\" font-size=\"15\">{}</text>",
        xml_escape(title)
    );
    for t in 0..=4 {
        let v = t as f64 / 4.0;
        let y = top + plot_h * (1.0 - v);
        let _ = writeln!(
            s,
            "<line x1=\"{left}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#ddd\"/><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{v:.2}</text>",
            width - 20.0,
            left - 6.0,
            y + 4.0
        );
    }
    for (g, (name, c)) in rows.iter().enumerate() {
        let x0 = left + group_w * g as f64 + 10.0;
        for (m, v) in [c.precision, c.recall, c.f1, c.accuracy]
            .into_iter()
            .enumerate()
        {
            let h = plot_h * v;
            let _ = writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"22\" height=\"{h}\" fill=\"{}\"><title>{} {}: {v:.4}</title></rect>",
                x0 + 24.0 * m as f64,
                top + plot_h - h,
                METRIC_COLORS[m],
                xml_escape(name),
                METRIC_NAMES[m]
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            x0 + 47.0,
            top + plot_h + 18.0,
            xml_escape(name)
        );
    }
    for (m, name) in METRIC_NAMES.iter().enumerate() {
        let x = left + 110.0 * m as f64;
        let y = top + plot_h + 50.0;
        let _ = writeln!(
            s,
            "<rect x=\"{x}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/><text x=\"{}\" y=\"{y}\">{name}</text>",
            y - 10.0,
            METRIC_COLORS[m],
            x + 16.0
        );
    }
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>",
        top + plot_h
    );
    s.push_str("</svg>\n");
    s
}

/// `ratio,precision,recall,f1,skipped_reason`; skipped points leave the
/// metric columns empty.
pub fn sweep_csv(record: &SweepRecord) -> String {
    let mut out = String::from("ratio,precision,recall,f1,skipped_reason\n");
    for p in &record.sweep.points {
        match p.report() {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},",
                    p.ratio, r.class_1.precision, r.class_1.recall, r.class_1.f1
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "{},,,,{}",
                    p.ratio,
                    csv_field(p.skipped_reason().unwrap_or_default())
                );
            }
        }
    }
    out
}

type Series = (&'static str, &'static str, fn(&EvalReport) -> f64);

/// Precision, recall and F1 against training fraud ratio on a log axis, with
/// the selected ratio marked.
pub fn sweep_svg(record: &SweepRecord) -> String {
    let (left, top, w, h) = (70.0, 50.0, 560.0, 280.0);
    let (width, height) = (left + w + 30.0, top + h + 90.0);
    let ratios: Vec<f64> = record.sweep.points.iter().map(|p| p.ratio).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (llo, lhi) = if hi > lo {
        (lo.ln(), hi.ln())
    } else {
        (lo.ln() - 1.0, lo.ln() + 1.0)
    };
    let x = |r: f64| left + w * (r.ln() - llo) / (lhi - llo);
    let y = |v: f64| top + h * (1.0 - v);

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{left}\" y=\"24\" font-size=\"15\">{}: scores vs training fraud ratio ({})</text>",
        record.model.display_name(),
        xml_escape(&record.scored_on)
    );
    for t in 0..=4 {
        let v = t as f64 / 4.0;
        let _ = writeln!(
            s,
            "<line x1=\"{left}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#ddd\"/><text x=\"{2}\" y=\"{3}\" text-anchor=\"end\">{v:.2}</text>",
            y(v),
            left + w,
            left - 6.0,
            y(v) + 4.0
        );
    }
    for tick in [0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5] {
        if tick >= lo * 0.999 && tick <= hi * 1.001 {
            let _ = writeln!(
                s,
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/><text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{tick}</text>",
                x(tick),
                top + h,
                top + h + 5.0,
                top + h + 18.0
            );
        }
    }
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/><line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{0}\" stroke=\"black\"/>",
        top + h,
        left + w
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">Training fraud ratio (log scale)</text>",
        left + w / 2.0,
        top + h + 40.0
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">Class-1 score</text>",
        top + h / 2.0
    );
    let series: [Series; 3] = [
        ("Precision", METRIC_COLORS[0], |r| r.class_1.precision),
        ("Recall", METRIC_COLORS[1], |r| r.class_1.recall),
        ("F1-Score", METRIC_COLORS[2], |r| r.class_1.f1),
    ];
    for (i, (name, color, get)) in series.iter().enumerate() {
        let pts: Vec<String> = record
            .sweep
            .points
            .iter()
            .filter_map(|p| {
                p.report()
                    .map(|r| format!("{:.2},{:.2}", x(p.ratio), y(get(r))))
            })
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            pts.join(" ")
        );
        let lx = left + 130.0 * i as f64;
        let ly = top + h + 70.0;
        let _ = writeln!(
            s,
            "<line x1=\"{lx}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{2}\" y=\"{ly}\">{name}</text>",
            ly - 4.0,
            lx + 20.0,
            lx + 26.0
        );
    }
    let sx = x(record.selected_ratio);
    let _ = writeln!(
        s,
        "<line x1=\"{sx}\" y1=\"{top}\" x2=\"{sx}\" y2=\"{}\" stroke=\"#e15759\" stroke-dasharray=\"4 3\"/><text x=\"{}\" y=\"{}\" fill=\"#e15759\">selected {}</text>",
        top + h,
        sx + 4.0,
        top + 12.0,
        record.selected_ratio
    );
    s.push_str("</svg>\n");
    s
}

fn summary_markdown(result: &ExperimentResult) -> String {
    let mut out = format!(
        "# Experiment: {}\n\nData: {}\n\n",
        result.experiment,
        result.config.data.describe()
    );
    out.push_str("| Set | Non-fraud | Fraud |\n|---|---:|---:|\n");
    for c in &result.class_counts {
        let _ = writeln!(out, "| {} | {} | {} |", c.set, c.non_fraud, c.fraud);
    }
    for group in result.groups() {
        let _ = writeln!(out, "\n## {group} (class 1)\n");
        out.push_str(&markdown_table(
            result
                .group(group)
                .map(|e| (e.model.display_name(), &e.report.class_1)),
        ));
    }
    if !result.sweeps.is_empty() {
        out.push_str("\n## Baseline vs hybrid (class 1)\n\n");
        out.push_str("| Model | Ratio | Precision | Recall | F1-Score | Hybrid Precision | Hybrid Recall | Hybrid F1-Score |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|\n");
        for sweep in &result.sweeps {
            if let (Some(b), Some(h)) = (
                result.find("hybrid-baseline", sweep.model),
                result.find("hybrid", sweep.model),
            ) {
                let _ = writeln!(
                    out,
                    "| {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
                    sweep.model.display_name(),
                    sweep.selected_ratio,
                    b.class_1.precision,
                    b.class_1.recall,
                    b.class_1.f1,
                    h.class_1.precision,
                    h.class_1.recall,
                    h.class_1.f1
                );
            }
        }
    }
    out
}

fn comparison_rows(result: &ExperimentResult) -> Vec<(String, ClassReport)> {
    let mut rows = Vec::new();
    for sweep in &result.sweeps {
        for (group, tag) in [("hybrid-baseline", "base"), ("hybrid", "hybrid")] {
            if let Some(r) = result.find(group, sweep.model) {
                rows.push((format!("{} {tag}", sweep.model.slug()), r.class_1.clone()));
            }
        }
    }
    rows
}

/// Writes the sweep artifacts of one model.
pub fn emit_sweep(
    emitter: &mut Emitter,
    record: &SweepRecord,
    formats: &BTreeSet<Format>,
) -> Result<()> {
    let stem = format!("sweeps/{}", record.model.slug());
    if formats.contains(&Format::Csv) {
        emitter.write(&format!("{stem}.csv"), sweep_csv(record).as_bytes())?;
    }
    if formats.contains(&Format::Svg) {
        emitter.write(&format!("{stem}.svg"), sweep_svg(record).as_bytes())?;
    }
    if formats.contains(&Format::Json) {
        emitter.write(&format!("{stem}.json"), to_json(record)?.as_bytes())?;
    }
    Ok(())
}

/// Writes every report of `result` under `out` and the manifest. With an
/// empty format set only the manifest (and timings) is written.
pub fn emit_reports(
    result: &ExperimentResult,
    out: &Path,
    formats: &BTreeSet<Format>,
) -> Result<Manifest> {
    prepare_output(out)?;
    let mut em = Emitter::new(out);
    for e in &result.evaluations {
        let stem = format!("reports/{}/{}", e.group, e.model.slug());
        let name = e.model.display_name();
        for &f in formats {
            let body = match f {
                Format::Json => to_json(&e.report)?,
                Format::Csv => report_csv(name, &e.report),
                Format::Markdown => report_markdown(name, &e.report),
                Format::Svg => metrics_svg(
                    &format!("{name}: {} (class 1)", e.group),
                    &[(name, &e.report.class_1)],
                ),
            };
            em.write(&format!("{stem}.{}", f.extension()), body.as_bytes())?;
        }
    }
    for group in result.groups() {
        if formats.contains(&Format::Markdown) {
            let table = markdown_table(
                result
                    .group(group)
                    .map(|e| (e.model.display_name(), &e.report.class_1)),
            );
            em.write(&format!("reports/{group}/summary.md"), table.as_bytes())?;
        }
        if formats.contains(&Format::Svg) {
            let rows: Vec<(&str, &ClassReport)> = result
                .group(group)
                .map(|e| (e.model.slug(), &e.report.class_1))
                .collect();
            em.write(
                &format!("reports/{group}/summary.svg"),
                metrics_svg(&format!("{group} (class 1)"), &rows).as_bytes(),
            )?;
        }
    }
    if formats.contains(&Format::Markdown) {
        em.write(
            &format!("summary-{}.md", result.experiment),
            summary_markdown(result).as_bytes(),
        )?;
    }
    if formats.contains(&Format::Svg) && !result.sweeps.is_empty() {
        let rows = comparison_rows(result);
        let refs: Vec<(&str, &ClassReport)> = rows.iter().map(|(n, c)| (n.as_str(), c)).collect();
        em.write(
            "reports/hybrid/comparison.svg",
            metrics_svg("Baseline vs hybrid (class 1)", &refs).as_bytes(),
        )?;
    }
    for record in &result.sweeps {
        emit_sweep(&mut em, record, formats)?;
    }
    let timings_path = out.join(TIMINGS_FILE);
    fs::write(&timings_path, to_json(&result.timings)?).map_err(|e| Error::io(&timings_path, e))?;
    em.finish(
        Some(result.experiment),
        Some(result.config.clone()),
        Some(TIMINGS_FILE.to_string()),
    )
}
