//! Table and chart rendering: a summary table in markdown or CSV, and one
//! grouped-bar SVG per architecture with a CSV of the plotted values.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::samplers::SamplerKind;

use super::report::{ArchTable, EvalReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
}

/// Renders the summary table: rows are datasets, columns the samplers (the
/// baseline shown as "imbalanced"), cells to 4 decimals. The best cell per
/// row is bold in markdown and carries a trailing `*` in CSV; ties mark
/// every winner, failed cells render as `—`.
pub fn render_summary_table(report: &EvalReport, format: TableFormat) -> String {
    let columns: Vec<&str> = report.samplers.iter().map(|s| s.display_name()).collect();
    let mut out = String::new();
    match format {
        TableFormat::Markdown => {
            let _ = writeln!(out, "| Dataset | {} |", columns.join(" | "));
            let _ = writeln!(out, "|---{}|", "|---".repeat(columns.len()));
            for (row, best) in report
                .summary_table
                .rows
                .iter()
                .zip(&report.best_method_per_dataset)
            {
                let cells: Vec<String> = report
                    .samplers
                    .iter()
                    .zip(&row.cells)
                    .map(|(&s, cell)| match cell {
                        Some(v) if best.best.contains(&s) => format!("**{v:.4}**"),
                        Some(v) => format!("{v:.4}"),
                        None => "—".to_string(),
                    })
                    .collect();
                let _ = writeln!(out, "| {} | {} |", row.dataset, cells.join(" | "));
            }
        }
        TableFormat::Csv => {
            let _ = writeln!(out, "dataset,{}", columns.join(","));
            for (row, best) in report
                .summary_table
                .rows
                .iter()
                .zip(&report.best_method_per_dataset)
            {
                let cells: Vec<String> = report
                    .samplers
                    .iter()
                    .zip(&row.cells)
                    .map(|(&s, cell)| match cell {
                        Some(v) if best.best.contains(&s) => format!("{v:.4}*"),
                        Some(v) => format!("{v:.4}"),
                        None => "—".to_string(),
                    })
                    .collect();
                let _ = writeln!(out, "{},{}", csv_escape(&row.dataset), cells.join(","));
            }
        }
    }
    out
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Writes one grouped bar chart per architecture (`macro_f1_<arch>.svg`)
/// plus a CSV with the exact plotted values (`macro_f1_<arch>.csv`).
/// Groups are datasets, bars are samplers, the y-axis spans [0, 1].
/// Returns the written paths.
pub fn render_architecture_charts(report: &EvalReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let mut written = Vec::new();
    for arch_table in &report.per_architecture_table {
        let stem = format!(
            "macro_f1_{}",
            arch_table.architecture.name().to_lowercase()
        );

        let csv_path = out_dir.join(format!("{stem}.csv"));
        let mut csv = String::from("dataset,sampler,macro_f1\n");
        for row in &arch_table.table.rows {
            for (&sampler, cell) in report.samplers.iter().zip(&row.cells) {
                if let Some(v) = cell {
                    let _ = writeln!(csv, "{},{},{v}", csv_escape(&row.dataset), sampler);
                }
            }
        }
        std::fs::write(&csv_path, csv).map_err(|e| Error::Io {
            path: csv_path.clone(),
            source: e,
        })?;
        written.push(csv_path);

        let svg_path = out_dir.join(format!("{stem}.svg"));
        let svg = bar_chart_svg(report, arch_table);
        std::fs::write(&svg_path, svg).map_err(|e| Error::Io {
            path: svg_path.clone(),
            source: e,
        })?;
        written.push(svg_path);
    }
    Ok(written)
}

const PALETTE: [&str; 6] = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bar_chart_svg(report: &EvalReport, arch_table: &ArchTable) -> String {
    const WIDTH: f64 = 960.0;
    const HEIGHT: f64 = 540.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 40.0;
    const TOP: f64 = 60.0;
    const BOTTOM: f64 = 80.0;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;

    let samplers: Vec<SamplerKind> = report.samplers.clone();
    let n_groups = arch_table.table.rows.len().max(1);
    let n_bars = samplers.len().max(1);
    let group_w = plot_w / n_groups as f64;
    let bar_w = group_w * 0.8 / n_bars as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="30" font-family="sans-serif" font-size="20" text-anchor="middle">Macro-average F1 — {}</text>"#,
        WIDTH / 2.0,
        xml_escape(arch_table.architecture.name())
    );

    // Horizontal gridlines every 0.1 with axis labels.
    for tick in 0..=10 {
        let v = tick as f64 / 10.0;
        let y = TOP + (1.0 - v) * plot_h;
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd" stroke-width="1"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="end">{v:.1}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
    }

    for (g, row) in arch_table.table.rows.iter().enumerate() {
        let group_left = LEFT + g as f64 * group_w + group_w * 0.1;
        for (b, cell) in row.cells.iter().enumerate() {
            let Some(v) = cell else { continue };
            let v = v.clamp(0.0, 1.0);
            let x = group_left + b as f64 * bar_w;
            let h = v * plot_h;
            let y = TOP + plot_h - h;
            let _ = writeln!(
                svg,
                r#"<rect class="bar" x="{x:.2}" y="{y:.2}" width="{:.2}" height="{h:.2}" fill="{}"/>"#,
                bar_w * 0.92,
                PALETTE[b % PALETTE.len()]
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            LEFT + g as f64 * group_w + group_w / 2.0,
            TOP + plot_h + 22.0,
            xml_escape(&row.dataset)
        );
    }

    // Axes and legend.
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.1}" stroke="black" stroke-width="1"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="1"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    for (b, sampler) in samplers.iter().enumerate() {
        let lx = LEFT + plot_w - 110.0;
        let ly = TOP + 8.0 + b as f64 * 20.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.1}" y="{:.1}" width="14" height="14" fill="{}"/>"#,
            ly - 11.0,
            PALETTE[b % PALETTE.len()]
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{ly:.1}" font-family="sans-serif" font-size="13">{}</text>"#,
            lx + 20.0,
            xml_escape(sampler.display_name())
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::report::{BestMethod, Table, TableRow};
    use crate::metrics::ScorePair;
    use crate::mlp::{MlpArchitecture, TrainConfig};

    fn summary_fixture_report() -> EvalReport {
        let samplers = vec![
            SamplerKind::None,
            SamplerKind::Kde,
            SamplerKind::Ros,
            SamplerKind::Rus,
        ];
        let rows = vec![
            TableRow {
                dataset: "abalone".to_string(),
                cells: vec![Some(0.54), Some(0.6167), Some(0.58), Some(0.5833)],
            },
            TableRow {
                dataset: "spectrometer".to_string(),
                cells: vec![Some(0.7533), Some(0.93), Some(0.93), Some(0.80)],
            },
        ];
        let summary = Table { rows };
        let best = vec![
            BestMethod {
                dataset: "abalone".to_string(),
                best: vec![SamplerKind::Kde],
                score: Some(0.6167),
            },
            BestMethod {
                dataset: "spectrometer".to_string(),
                best: vec![SamplerKind::Kde, SamplerKind::Ros],
                score: Some(0.93),
            },
        ];
        EvalReport {
            schema_version: 1,
            base_seed: 0,
            test_fraction: 0.25,
            n_trials: 1,
            train: TrainConfig::default(),
            datasets: vec!["abalone".to_string(), "spectrometer".to_string()],
            samplers: samplers.clone(),
            architectures: vec![MlpArchitecture::Mlp1],
            runs: vec![RunResultFixture::make(&samplers)],
            per_architecture_table: vec![ArchTable {
                architecture: MlpArchitecture::Mlp1,
                table: summary.clone(),
            }],
            summary_table: summary,
            best_method_per_dataset: best,
        }
    }

    struct RunResultFixture;
    impl RunResultFixture {
        fn make(samplers: &[SamplerKind]) -> crate::experiment::RunResult {
            crate::experiment::RunResult {
                dataset: "abalone".to_string(),
                sampler: samplers[0],
                architecture: MlpArchitecture::Mlp1,
                trial: 0,
                score: Some(ScorePair {
                    f1_major: 0.54,
                    f1_minor: 0.54,
                    macro_f1: 0.54,
                }),
                failure: None,
                wall_time_secs: 0.0,
                seed_used: 0,
            }
        }
    }

    #[test]
    fn markdown_marks_best_and_ties() {
        let report = summary_fixture_report();
        let md = render_summary_table(&report, TableFormat::Markdown);
        assert!(md.contains("| Dataset | imbalanced | KDE | ROS | RUS |"));
        assert!(md.contains("| abalone | 0.5400 | **0.6167** | 0.5800 | 0.5833 |"));
        assert!(md.contains("| spectrometer | 0.7533 | **0.9300** | **0.9300** | 0.8000 |"));
    }

    #[test]
    fn csv_marks_best_with_star() {
        let report = summary_fixture_report();
        let csv = render_summary_table(&report, TableFormat::Csv);
        assert!(csv.starts_with("dataset,imbalanced,KDE,ROS,RUS\n"));
        assert!(csv.contains("abalone,0.5400,0.6167*,0.5800,0.5833"));
        assert!(csv.contains("spectrometer,0.7533,0.9300*,0.9300*,0.8000"));
    }

    #[test]
    fn charts_write_svg_and_exact_csv() {
        let report = summary_fixture_report();
        let dir = tempfile::tempdir().unwrap();
        let paths = render_architecture_charts(&report, dir.path()).unwrap();
        assert_eq!(paths.len(), 2);

        let csv = std::fs::read_to_string(dir.path().join("macro_f1_mlp-1.csv")).unwrap();
        let mut parsed = Vec::new();
        for line in csv.lines().skip(1) {
            let parts: Vec<&str> = line.split(',').collect();
            parsed.push((
                parts[0].to_string(),
                parts[1].to_string(),
                parts[2].parse::<f64>().unwrap(),
            ));
        }
        // Re-parsed values equal report cells exactly.
        for (d, row) in report.per_architecture_table[0].table.rows.iter().enumerate() {
            for (s, cell) in row.cells.iter().enumerate() {
                let expect = cell.unwrap();
                let got = parsed
                    .iter()
                    .find(|(ds, sampler, _)| {
                        *ds == report.datasets[d] && *sampler == report.samplers[s].to_string()
                    })
                    .unwrap()
                    .2;
                assert_eq!(got, expect);
            }
        }

        let svg = std::fs::read_to_string(dir.path().join("macro_f1_mlp-1.svg")).unwrap();
        assert!(svg.starts_with("<svg"));
        let bars = svg.matches(r#"<rect class="bar""#).count();
        assert_eq!(bars, 8); // 2 datasets × 4 samplers
        assert!(svg.contains("MLP-1"));
    }

    #[test]
    fn failed_cells_render_as_dash() {
        let mut report = summary_fixture_report();
        report.summary_table.rows[0].cells[2] = None;
        let md = render_summary_table(&report, TableFormat::Markdown);
        assert!(md.contains("| abalone | 0.5400 | **0.6167** | — | 0.5833 |"));
    }

    #[test]
    fn full_grid_chart_structure() {
        // 8 datasets × 4 samplers → 32 bars per chart, one chart file per
        // architecture.
        let mut report = summary_fixture_report();
        report.architectures = MlpArchitecture::ALL.to_vec();
        report.datasets = (0..8).map(|i| format!("ds{i}")).collect();
        let rows: Vec<TableRow> = report
            .datasets
            .iter()
            .map(|ds| TableRow {
                dataset: ds.clone(),
                cells: vec![Some(0.5), Some(0.75), Some(0.6), Some(0.55)],
            })
            .collect();
        report.summary_table = Table { rows: rows.clone() };
        report.per_architecture_table = MlpArchitecture::ALL
            .iter()
            .map(|&architecture| ArchTable {
                architecture,
                table: Table { rows: rows.clone() },
            })
            .collect();

        let dir = tempfile::tempdir().unwrap();
        let paths = render_architecture_charts(&report, dir.path()).unwrap();
        let svgs: Vec<_> = paths.iter().filter(|p| p.extension().unwrap() == "svg").collect();
        assert_eq!(svgs.len(), 3);
        for svg_path in svgs {
            let svg = std::fs::read_to_string(svg_path).unwrap();
            assert_eq!(svg.matches(r#"<rect class="bar""#).count(), 32);
        }
    }
}
