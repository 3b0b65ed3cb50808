// SPDX-License-Identifier: Apache-2.0

//! Markdown report over a workspace: design metrics, pooled statistics,
//! correlations, fidelity, datasets and heatmap links. Sections without
//! data are left out.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{correlate, feature_map, net_metric_columns, render_heatmap, summarize, CorrMatrix, InsightError, Palette, Quartiles, StatSummary};
use crate::engines::{DatasetManifest, DATASET_MANIFEST};
use crate::fidelity::FidelityReport;
use crate::store::{json, mkdirs, read, write, StoreError, Workspace};
use crate::vector::{DesignVec, Foundation};

/// One row of the design table, split into intermediate and PPA metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMetrics {
    pub name: String,
    pub instances: usize,
    pub nets: usize,
    /// Microns.
    pub hpwl: f64,
    pub rsmt: f64,
    pub rwl: f64,
    pub vias: usize,
    pub overflow_patches: usize,
    pub core_usage: f64,
    /// Seconds.
    pub wns: f64,
    pub tns: f64,
    pub violating_paths: usize,
    /// Watt.
    pub power: f64,
}

impl DesignMetrics {
    pub fn of(d: &DesignVec) -> Self {
        let um = |v: i64| v as f64 / d.dbu_per_micron.max(1) as f64;
        Self {
            name: d.name.clone(),
            instances: d.num_instances,
            nets: d.num_nets,
            hpwl: um(d.total_hpwl),
            rsmt: um(d.total_rsmt),
            rwl: um(d.total_rwl),
            vias: d.num_vias,
            overflow_patches: d.overflow_patches,
            core_usage: d.core_usage,
            wns: d.wns,
            tns: d.tns,
            violating_paths: d.violating_paths,
            power: d.total_power,
        }
    }
}

/// Everything the report shows. Optional parts are omitted when empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    pub summary: StatSummary,
    pub designs: Vec<DesignMetrics>,
    pub correlation: Option<CorrMatrix>,
    pub fidelity: Option<FidelityReport>,
    pub datasets: Option<DatasetManifest>,
    /// `(design, channel, path relative to the report)`.
    pub heatmaps: Vec<(String, String, String)>,
}

fn fmt_q(s: &mut String, label: &str, q: &Quartiles, scale: f64) {
    let _ = writeln!(
        s,
        "| {label} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
        q.count,
        q.min * scale,
        q.q1 * scale,
        q.median * scale,
        q.q3 * scale,
        q.max * scale,
        q.mean * scale
    );
}

/// Renders the report. Same inputs give the same text.
pub fn generate_report(r: &ReportInputs) -> String {
    let mut s = String::new();
    let sm = &r.summary;
    let _ = writeln!(s, "# Design data report\n");
    let _ = writeln!(s, "Designs: {}\n", sm.designs.join(", "));

    if !r.designs.is_empty() {
        let _ = writeln!(s, "## Designs\n");
        let _ = writeln!(s, "Intermediate metrics (wirelength in um, vias, overflowing patches, core usage) then PPA metrics (timing in ns, power in mW).\n");
        let _ = writeln!(s, "| Design | Instances | Nets | HPWL | RSMT | RWL | Vias | Overflow | Core usage | WNS | TNS | Violating paths | Power |");
        let _ = writeln!(s, "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|");
        for d in &r.designs {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.3} | {:.3} | {:.3} | {} | {} | {:.4} | {:.4} | {:.4} | {} | {:.4} |",
                d.name,
                d.instances,
                d.nets,
                d.hpwl,
                d.rsmt,
                d.rwl,
                d.vias,
                d.overflow_patches,
                d.core_usage,
                d.wns * 1e9,
                d.tns * 1e9,
                d.violating_paths,
                d.power * 1e3
            );
        }
        s.push('\n');
    }

    let _ = writeln!(s, "## Statistics\n");
    let _ = writeln!(s, "- Nets: {}", sm.num_nets);
    let _ = writeln!(s, "- Instances: {}", sm.num_instances);
    let _ = writeln!(s, "- Two- and three-pin nets: {:.2}%", sm.small_net_share * 100.0);
    if let Some(c) = sm.rwl_hpwl_correlation {
        let _ = writeln!(s, "- Pearson(RWL, HPWL) over routed nets: {c:.4}");
    }
    s.push('\n');
    let _ = writeln!(s, "| Distribution | Count | Min | Q1 | Median | Q3 | Max | Mean |");
    let _ = writeln!(s, "|---|---:|---:|---:|---:|---:|---:|---:|");
    fmt_q(&mut s, "Core usage", &sm.core_usage, 1.0);
    if let Some(q) = &sm.path_delay {
        fmt_q(&mut s, "Path delay (ns)", q, 1e9);
    }
    if let Some(q) = &sm.path_stages {
        fmt_q(&mut s, "Path stages", q, 1.0);
    }
    let _ = writeln!(s, "\nQuantiles interpolate linearly between closest ranks.\n");

    if !sm.pin_histogram.is_empty() {
        let _ = writeln!(s, "### Pin count\n\n| Pins | Nets | Share |\n|---:|---:|---:|");
        let total = sm.num_nets.max(1) as f64;
        let mut tail = 0;
        for (&k, &v) in &sm.pin_histogram {
            if k > 10 {
                tail += v;
            } else {
                let _ = writeln!(s, "| {k} | {v} | {:.2}% |", v as f64 / total * 100.0);
            }
        }
        if tail > 0 {
            let _ = writeln!(s, "| >10 | {tail} | {:.2}% |", tail as f64 / total * 100.0);
        }
        s.push('\n');
    }
    if !sm.class_shares.is_empty() {
        let _ = writeln!(s, "### Instance classes\n\n| Class | Share |\n|---|---:|");
        for (c, v) in &sm.class_shares {
            let _ = writeln!(s, "| {c} | {:.2}% |", v * 100.0);
        }
        s.push('\n');
    }
    if !sm.layer_shares.is_empty() {
        let _ = writeln!(s, "### Wirelength by layer\n\n| Layer | Share |\n|---|---:|");
        for (l, v) in &sm.layer_shares {
            let _ = writeln!(s, "| M{l} | {:.2}% |", v * 100.0);
        }
        s.push('\n');
    }

    if let Some(c) = &r.correlation {
        let _ = writeln!(s, "## Net metric correlation\n");
        let _ = writeln!(s, "| | {} |", c.labels.join(" | "));
        let _ = writeln!(s, "|---|{}", "---:|".repeat(c.labels.len()));
        for (l, row) in c.labels.iter().zip(&c.values) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
            let _ = writeln!(s, "| {l} | {} |", cells.join(" | "));
        }
        s.push('\n');
    }

    if let Some(f) = &r.fidelity {
        let _ = writeln!(s, "## Reconstruction fidelity\n");
        let _ = writeln!(s, "Design {}: {}.\n", f.design, if f.passed() { "all checks pass" } else { "some checks fail" });
        let _ = writeln!(s, "| Metric | Original | Reconstructed | Ratio |\n|---|---:|---:|---:|");
        for (name, m) in [("Wirelength (DBU)", &f.wirelength), ("WNS (s)", &f.wns), ("TNS (s)", &f.tns), ("Power (W)", &f.power)] {
            let ratio = m.ratio.map_or_else(|| format!("n/a (diff {:.4e})", m.abs_diff), |v| format!("{v:.6}"));
            let _ = writeln!(s, "| {name} | {:.6e} | {:.6e} | {ratio} |", m.original, m.reconstructed);
        }
        let (a, b) = f.violating_paths;
        let _ = writeln!(s, "| Violating paths | {a} | {b} | |");
        let [g, h] = f.density_grids;
        let _ = writeln!(
            s,
            "\nCell density correlation {:.4} ({}x{} grid against {}x{} grid).\n",
            f.density_correlation, g.0, g.1, h.0, h.1
        );
    }

    if let Some(d) = r.datasets.as_ref().filter(|d| !d.counts.is_empty()) {
        let _ = writeln!(s, "## Datasets\n\n| Dataset | Samples |\n|---|---:|");
        for (k, v) in &d.counts {
            let _ = writeln!(s, "| {k} | {v} |");
        }
        let split: Vec<String> = d.splits.iter().map(|(k, v)| format!("{k} {}", v.len())).collect();
        let _ = writeln!(s, "\nDesign split: {}.\n", split.join(", "));
    }

    if !r.heatmaps.is_empty() {
        let _ = writeln!(s, "## Heatmaps\n");
        let _ = writeln!(s, "Each map is scaled linearly from its own minimum (black) to its maximum (white); constant maps are mid-gray. Top of the image is the top of the die.\n");
        for (design, channel, path) in &r.heatmaps {
            let _ = writeln!(s, "- {design} {channel}: [{path}]({path})");
        }
        s.push('\n');
    }
    s
}

/// Files written by [`write_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub report: PathBuf,
    pub stats: PathBuf,
    pub heatmaps: Vec<PathBuf>,
}

fn json_out<T: Serialize>(name: &str, v: &T) -> Result<Vec<u8>, InsightError> {
    Ok(json::to_bytes(v).map_err(|source| StoreError::Json { file: name.to_string(), source })?)
}

impl ReportInputs {
    /// Summaries of `bundles` plus whatever fidelity and dataset results the
    /// workspace holds.
    pub fn gather(ws: &Workspace, bundles: &[Foundation]) -> Result<Self, InsightError> {
        let summary = summarize(bundles)?;
        let fidelity = match ws.fidelity_path() {
            p if p.is_file() => Some(
                json::from_bytes(&read(&p)?)
                    .map_err(|source| StoreError::Json { file: p.display().to_string(), source })?,
            ),
            _ => None,
        };
        let dm = ws.dataset_dir().join(DATASET_MANIFEST);
        let datasets = if dm.is_file() {
            Some(json::from_bytes(&read(&dm)?).map_err(|source| StoreError::Json { file: dm.display().to_string(), source })?)
        } else {
            None
        };
        let correlation = correlate(&net_metric_columns(bundles)).ok();
        Ok(Self {
            summary,
            designs: bundles.iter().map(|b| DesignMetrics::of(&b.design)).collect(),
            correlation,
            fidelity,
            datasets,
            heatmaps: Vec::new(),
        })
    }
}

/// Writes heatmaps, `stats.json` and `report.md` under the report directory.
pub fn write_report(ws: &Workspace, bundles: &[Foundation]) -> Result<ReportFiles, InsightError> {
    let mut inputs = ReportInputs::gather(ws, bundles)?;
    let dir = ws.report_dir();
    let hdir = dir.join("heatmaps");
    mkdirs(&hdir)?;
    let mut heatmaps = Vec::new();
    for (k, b) in bundles.iter().enumerate() {
        if b.patches.is_empty() {
            continue;
        }
        for ch in super::HEATMAP_CHANNELS {
            let map = feature_map(b, ch)?;
            for palette in [Palette::Gray, Palette::Heat] {
                let file = format!("{k}_{}_{ch}.{}", sanitize(&b.design.name), palette.extension());
                let path = hdir.join(&file);
                write(&path, &render_heatmap(&map, palette)?)?;
                if palette == Palette::Heat {
                    inputs.heatmaps.push((b.design.name.clone(), ch.to_string(), format!("heatmaps/{file}")));
                }
                heatmaps.push(path);
            }
        }
    }
    let stats = dir.join("stats.json");
    #[derive(Serialize)]
    struct Stats<'a> {
        summary: &'a StatSummary,
        designs: &'a [DesignMetrics],
        correlation: &'a Option<CorrMatrix>,
    }
    let body = Stats { summary: &inputs.summary, designs: &inputs.designs, correlation: &inputs.correlation };
    write(&stats, &json_out("stats.json", &body)?)?;
    let report = dir.join("report.md");
    write(&report, generate_report(&inputs).as_bytes())?;
    Ok(ReportFiles { report, stats, heatmaps })
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}
