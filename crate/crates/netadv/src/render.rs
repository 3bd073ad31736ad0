//! Report rendering: JSON, CSV tables, a markdown summary and an SVG bar
//! chart of validity per attack.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use netadv_core::constraints::ReasonCode;
use netadv_core::evaluation::EvaluationReport;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{to_json, write_bytes};

/// Placeholder for a severity that does not exist (empty evaluated set).
pub const ABSENT: &str = "—";

pub const SEVERITY_CSV: &str = "severity.csv";
pub const VALIDITY_CSV: &str = "validity.csv";
pub const TRANSFER_CSV: &str = "transfer.csv";
pub const MARKDOWN_FILE: &str = "report.md";
pub const SVG_FILE: &str = "validity.svg";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Markdown,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "svg" | "svg-bars" => Ok(Format::Svg),
            other => Err(Error::Usage(format!("unknown render format '{other}'"))),
        }
    }
}

/// Parses a comma-separated format list such as `csv,markdown,svg`.
pub fn parse_formats(list: &str) -> Result<Vec<Format>> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let f: Format = part.parse()?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| ABSENT.to_string(), |v| format!("{v:.2}"))
}

pub fn report_json(report: &EvaluationReport) -> String {
    to_json(report)
}

pub fn parse_report_json(text: &str) -> Result<EvaluationReport> {
    serde_json::from_str(text).map_err(|e| Error::Data(format!("report JSON: {e}")))
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn severity_csv(report: &EvaluationReport) -> String {
    let header: Vec<String> = [
        "attack",
        "target",
        "severity_before",
        "severity_after",
        "n_before",
        "n_after",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = report
        .severity
        .iter()
        .map(|c| {
            vec![
                c.attack.id().to_string(),
                c.target.clone(),
                pct(c.severity_before),
                pct(c.severity_after),
                c.n_before.to_string(),
                c.n_after.to_string(),
            ]
        })
        .collect();
    csv_bytes(&header, &rows)
}

pub fn validity_csv(report: &EvaluationReport) -> String {
    let mut header: Vec<String> = [
        "attack",
        "valid_count",
        "invalid_count",
        "validity_pct",
        "invalidity_pct",
    ]
    .map(String::from)
    .to_vec();
    header.extend(ReasonCode::ALL.iter().map(|r| r.as_str().to_string()));
    let rows: Vec<Vec<String>> = report
        .validity
        .iter()
        .map(|v| {
            let mut row = vec![
                v.attack.id().to_string(),
                v.valid_count.to_string(),
                v.invalid_count.to_string(),
                pct(v.validity_pct),
                pct(v.invalidity_pct),
            ];
            row.extend(
                ReasonCode::ALL
                    .iter()
                    .map(|r| v.violations.get(r).copied().unwrap_or(0).to_string()),
            );
            row
        })
        .collect();
    csv_bytes(&header, &rows)
}

/// Attacks as rows, a before/after column pair per target.
pub fn transfer_csv(report: &EvaluationReport) -> String {
    let targets = report.targets();
    let mut header = vec!["attack".to_string()];
    for t in &targets {
        header.push(format!("{t}_before"));
        header.push(format!("{t}_after"));
    }
    let rows: Vec<Vec<String>> = report
        .validity
        .iter()
        .map(|v| {
            let mut row = vec![v.attack.id().to_string()];
            for t in &targets {
                let cell = report.cell(v.attack, t);
                row.push(pct(cell.and_then(|c| c.severity_before)));
                row.push(pct(cell.and_then(|c| c.severity_after)));
            }
            row
        })
        .collect();
    csv_bytes(&header, &rows)
}

pub fn markdown(report: &EvaluationReport) -> String {
    let m = &report.metadata;
    let mut s = String::new();
    let _ = writeln!(s, "# Evaluation report\n");
    let _ = writeln!(s, "- Surrogate: `{}`", m.surrogate);
    let _ = writeln!(
        s,
        "- Attacked samples: {} ({} excluded)",
        m.attacked_samples, m.excluded_samples
    );
    let _ = writeln!(s, "- Dataset fingerprint: `{}`", m.dataset_fingerprint);
    let _ = writeln!(s, "- Severity: {}", m.severity_definition);
    if !m.seeds.is_empty() {
        let seeds: Vec<String> = m.seeds.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "- Seeds: {}", seeds.join(", "));
    }

    let _ = writeln!(s, "\n## Validity\n");
    let _ = writeln!(
        s,
        "| Attack | Valid | Invalid | Validity % | Invalidity % | Violations |"
    );
    let _ = writeln!(s, "|---|---:|---:|---:|---:|---|");
    for v in &report.validity {
        let reasons: Vec<String> = v
            .violations
            .iter()
            .map(|(r, n)| format!("{} {n}", r.as_str()))
            .collect();
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            v.attack.display_name(),
            v.valid_count,
            v.invalid_count,
            pct(v.validity_pct),
            pct(v.invalidity_pct),
            if reasons.is_empty() {
                ABSENT.to_string()
            } else {
                reasons.join(", ")
            }
        );
    }

    let targets = report.targets();
    let _ = writeln!(s, "\n## Severity before → after filtering\n");
    let _ = writeln!(s, "| Attack | {} |", targets.join(" | "));
    let _ = writeln!(s, "|---|{}", "---:|".repeat(targets.len()));
    for v in &report.validity {
        let cells: Vec<String> = targets
            .iter()
            .map(|t| match report.cell(v.attack, t) {
                Some(c) => format!("{} → {}", pct(c.severity_before), pct(c.severity_after)),
                None => ABSENT.to_string(),
            })
            .collect();
        let _ = writeln!(s, "| {} | {} |", v.attack.display_name(), cells.join(" | "));
    }
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Grouped bars, one group per attack: valid % and invalid %.
pub fn svg_bars(report: &EvaluationReport) -> String {
    const GROUP_W: f64 = 90.0;
    const BAR_W: f64 = 30.0;
    const PLOT_H: f64 = 200.0;
    const LEFT: f64 = 50.0;
    const TOP: f64 = 40.0;
    let n = report.validity.len().max(1) as f64;
    let width = LEFT + GROUP_W * n + 20.0;
    let height = TOP + PLOT_H + 60.0;
    let y_of = |p: f64| TOP + PLOT_H * (1.0 - p / 100.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<title>Validity of adversarial examples per attack</title>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">Validity of adversarial examples (%)</text>"#,
        width / 2.0
    );
    for tick in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let y = y_of(tick);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{tick}</text>"##,
            width - 20.0,
            LEFT - 5.0,
            y + 4.0
        );
    }
    for (i, v) in report.validity.iter().enumerate() {
        let x0 = LEFT + GROUP_W * i as f64 + (GROUP_W - 2.0 * BAR_W) / 2.0;
        let name = xml_escape(v.attack.display_name());
        let _ = writeln!(s, r#"<g class="attack" data-attack="{}">"#, v.attack.id());
        for (k, (label, value, color)) in [
            ("valid", v.validity_pct, "#4c78a8"),
            ("invalid", v.invalidity_pct, "#e45756"),
        ]
        .into_iter()
        .enumerate()
        {
            let p = value.unwrap_or(0.0);
            let x = x0 + BAR_W * k as f64;
            let _ = writeln!(
                s,
                r#"<rect class="{label}" x="{x}" y="{}" width="{BAR_W}" height="{}" fill="{color}"><title>{name} {label}: {}</title></rect>"#,
                y_of(p),
                PLOT_H * p / 100.0,
                pct(value)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{name}</text>"#,
            x0 + BAR_W,
            TOP + PLOT_H + 16.0
        );
        let _ = writeln!(s, "</g>");
    }
    let ly = TOP + PLOT_H + 40.0;
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{}" width="10" height="10" fill="#4c78a8"/><text x="{}" y="{ly}">valid</text>"##,
        ly - 9.0,
        LEFT + 14.0
    );
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="10" height="10" fill="#e45756"/><text x="{}" y="{ly}">invalid</text>"##,
        LEFT + 70.0,
        ly - 9.0,
        LEFT + 84.0
    );
    s.push_str("</svg>\n");
    s
}

/// Writes the report JSON to `json_path` and the requested extra formats
/// next to it. Returns every written path.
pub fn render_report(report: &EvaluationReport, json_path: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    let dir = json_path.parent().unwrap_or(Path::new(""));
    let mut files: Vec<(PathBuf, String)> = vec![(json_path.to_path_buf(), report_json(report))];
    for f in formats {
        match f {
            Format::Json => {}
            Format::Csv => {
                files.push((dir.join(SEVERITY_CSV), severity_csv(report)));
                files.push((dir.join(VALIDITY_CSV), validity_csv(report)));
                files.push((dir.join(TRANSFER_CSV), transfer_csv(report)));
            }
            Format::Markdown => files.push((dir.join(MARKDOWN_FILE), markdown(report))),
            Format::Svg => files.push((dir.join(SVG_FILE), svg_bars(report))),
        }
    }
    for (path, text) in &files {
        write_bytes(path, text.as_bytes())?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use netadv_core::attacks::AttackKind;
    use netadv_core::evaluation::{ReportMetadata, SeverityCell, ValidityEntry, REPORT_VERSION};
    use std::collections::BTreeMap;

    fn sample_report() -> EvaluationReport {
        let validity = vec![
            ValidityEntry {
                attack: AttackKind::Fgsm,
                valid_count: 0,
                invalid_count: 4,
                validity_pct: Some(0.0),
                invalidity_pct: Some(100.0),
                violations: BTreeMap::from([(ReasonCode::OneHotSum, 4)]),
            },
            ValidityEntry {
                attack: AttackKind::Cw,
                valid_count: 3,
                invalid_count: 1,
                validity_pct: Some(75.0),
                invalidity_pct: Some(25.0),
                violations: BTreeMap::from([(ReasonCode::BinaryDomain, 1)]),
            },
        ];
        let cell = |attack, target: &str, before, after, n_after| SeverityCell {
            attack,
            target: target.into(),
            severity_before: before,
            severity_after: after,
            n_before: 4,
            n_after,
            evaded_before: 0,
            evaded_after: 0,
        };
        EvaluationReport {
            report_version: REPORT_VERSION,
            validity,
            severity: vec![
                cell(AttackKind::Fgsm, "svm", Some(50.0), None, 0),
                cell(AttackKind::Fgsm, "knn", Some(25.0), None, 0),
                cell(AttackKind::Cw, "svm", Some(100.0), Some(66.67), 3),
                cell(AttackKind::Cw, "knn", Some(75.0), Some(33.33), 3),
            ],
            metadata: ReportMetadata {
                surrogate: "mlp".into(),
                ..Default::default()
            },
        }
    }

    #[test]
    fn severity_csv_layout() {
        let csv = severity_csv(&sample_report());
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("attack,target,severity_before,severity_after,n_before,n_after")
        );
        assert_eq!(lines.next(), Some("FGSM,svm,50.00,—,4,0"));
        assert_eq!(lines.nth(1), Some("CW,svm,100.00,66.67,4,3"));
    }

    #[test]
    fn validity_and_transfer_csv_layout() {
        let r = sample_report();
        let v = validity_csv(&r);
        assert_eq!(
            v.lines().next().unwrap(),
            "attack,valid_count,invalid_count,validity_pct,invalidity_pct,ONE_HOT_SUM,BINARY_DOMAIN,\
             SERVICE_PROTOCOL_MISMATCH,FLAG_PROTOCOL_MISMATCH,NUMERIC_RANGE"
        );
        assert_eq!(v.lines().nth(2).unwrap(), "CW,3,1,75.00,25.00,0,1,0,0,0");
        let t = transfer_csv(&r);
        assert_eq!(
            t.lines().next().unwrap(),
            "attack,svm_before,svm_after,knn_before,knn_after"
        );
        assert_eq!(t.lines().nth(1).unwrap(), "FGSM,50.00,—,25.00,—");
    }

    #[test]
    fn json_round_trip() {
        let r = sample_report();
        assert_eq!(parse_report_json(&report_json(&r)).unwrap(), r);
    }

    #[test]
    fn markdown_shows_absent_cells() {
        let md = markdown(&sample_report());
        assert!(md.contains("| FGSM | 50.00 → — | 25.00 → — |"), "{md}");
        assert!(md.contains("| C&W | 3 | 1 | 75.00 | 25.00 | BINARY_DOMAIN 1 |"), "{md}");
    }

    #[test]
    fn svg_escapes_names() {
        let svg = svg_bars(&sample_report());
        assert!(svg.contains("C&amp;W"));
        assert!(!svg.contains("C&W"));
        assert_eq!(svg.matches(r#"<g class="attack""#).count(), 2);
    }

    #[test]
    fn format_list_parsing() {
        assert_eq!(
            parse_formats("csv, markdown,svg,csv").unwrap(),
            vec![Format::Csv, Format::Markdown, Format::Svg]
        );
        assert_eq!(parse_formats("").unwrap(), vec![]);
        assert_eq!(parse_formats("pdf").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn unwritable_destination_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        let blocker = tmp.path().join("file");
        std::fs::write(&blocker, b"x").unwrap();
        let err = render_report(&sample_report(), &blocker.join("report.json"), &[]).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
