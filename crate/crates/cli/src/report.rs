//! Collects report files into a results table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::audit::FileAudit;
use crate::dataset::{Split, SCHEMA_VERSION};
use crate::error::{HarnessError, Result};
use crate::evaluate::ReportFile;

/// Every `*.json` report under `dirs`, sorted by property, estimator, task
/// and split.
pub fn collect_reports(dirs: &[PathBuf], audit: &FileAudit) -> Result<Vec<ReportFile>> {
    let mut reports = Vec::new();
    for dir in dirs {
        for path in audit.list_dir(dir)? {
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            reports.push(read_report(&path, audit)?);
        }
    }
    if reports.is_empty() {
        return Err(HarnessError::Data("no report files found".into()));
    }
    reports.sort_by(|a, b| {
        let key = |r: &ReportFile| {
            (
                r.report.property.as_str(),
                r.estimator.as_str(),
                r.task.as_str(),
                r.report.split.clone(),
            )
        };
        key(a).cmp(&key(b))
    });
    Ok(reports)
}

fn read_report(path: &Path, audit: &FileAudit) -> Result<ReportFile> {
    let text = audit.read_to_string(path)?;
    let report: ReportFile = serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(HarnessError::Schema {
            path: path.to_path_buf(),
            found: report.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(report)
}

fn value_for(reports: &[&ReportFile], split: Split) -> String {
    reports
        .iter()
        .find(|r| r.report.split == split.as_str())
        .map_or_else(|| "-".to_string(), |r| format!("{:.2}", r.report.value))
}

/// One row per (property, estimator, task) with test-1 and test-2 columns.
pub fn render_table(reports: &[ReportFile]) -> String {
    let mut out =
        String::from("| property | estimator | task | metric | test-1 | test-2 | noise px |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    let mut i = 0;
    while i < reports.len() {
        let head = &reports[i];
        let group: Vec<&ReportFile> = reports[i..]
            .iter()
            .take_while(|r| {
                r.report.property == head.report.property
                    && r.estimator == head.estimator
                    && r.task == head.task
            })
            .collect();
        let metric = serde_json::to_value(head.report.metric)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            head.report.property,
            head.estimator.as_str(),
            head.task.as_str(),
            metric,
            value_for(&group, Split::Test1),
            value_for(&group, Split::Test2),
            head.noise_sigma
        )
        .expect("write to string");
        i += group.len();
    }
    out
}

pub fn table_csv(reports: &[ReportFile]) -> String {
    let mut out = String::from(
        "property,estimator,task,split,metric,value,sample_count,noise_sigma,fallbacks,failures\n",
    );
    for r in reports {
        let metric = serde_json::to_value(r.report.metric)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.report.property,
            r.estimator.as_str(),
            r.task.as_str(),
            r.report.split,
            metric,
            r.report.value,
            r.report.sample_count,
            r.noise_sigma,
            r.fallbacks,
            r.failures.len()
        )
        .expect("write to string");
    }
    out
}
