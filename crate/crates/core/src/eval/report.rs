//! Report files: `metrics.json`, `comparisons.json`, `breakdown_{key}.csv` and `report.md`.
//! Output depends only on the inputs; every real is written with six significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BreakdownTable, ComparisonReport, CorrelationMatrix, EvalError, MetricsRecord, PASS_THRESHOLD};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBlock {
    pub label: String,
    #[serde(flatten)]
    pub metrics: MetricsRecord,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metrics: Vec<MetricsBlock>,
    #[serde(default)]
    pub breakdowns: Vec<BreakdownTable>,
    #[serde(default)]
    pub comparisons: Vec<ComparisonReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlations: Option<CorrelationMatrix>,
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().expect("formatted float parses")
}

pub fn fmt_real(x: f64) -> String {
    format!("{}", round_sig(x, 6))
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64"), 6);
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every real rounded to six significant digits.
pub fn to_rounded_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report serializes");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

fn metrics_json(report: &Report) -> String {
    let mut v = serde_json::json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "pass_threshold": PASS_THRESHOLD,
        "metrics": report.metrics,
        "breakdowns": report.breakdowns,
    });
    if let Some(c) = &report.correlations {
        v["correlations"] = serde_json::to_value(c).expect("serializes");
    }
    to_rounded_json(&v)
}

fn breakdown_csv(table: &BreakdownTable) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| EvalError::Serialization(e.to_string());
    w.write_record(["group", "n", "n_correct", "accuracy", "f1", "passes_threshold"]).map_err(io)?;
    for g in &table.groups {
        let m = &g.metrics;
        w.write_record([
            g.group.clone(),
            m.n.to_string(),
            m.n_correct.to_string(),
            fmt_real(m.accuracy),
            fmt_real(m.f1),
            m.passes_threshold.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| EvalError::Serialization(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn markdown(report: &Report) -> String {
    let mut md = String::from("# Evaluation report\n\n");
    let pct = |x: f64| format!("{}%", fmt_real(100.0 * x));
    let _ = writeln!(md, "Pass threshold: accuracy ≥ {}\n", pct(PASS_THRESHOLD));
    md.push_str("## Metrics\n\n| Run | N | Correct | Accuracy | F1 | Pass |\n|---|---:|---:|---:|---:|:---:|\n");
    for b in &report.metrics {
        let m = &b.metrics;
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} |",
            b.label,
            m.n,
            m.n_correct,
            pct(m.accuracy),
            fmt_real(m.f1),
            if m.passes_threshold { "yes" } else { "no" }
        );
    }
    if !report.comparisons.is_empty() {
        md.push_str("\n## Comparisons\n\n| A | B | A correct/incorrect | B correct/incorrect | p | Significant |\n|---|---|---:|---:|---:|:---:|\n");
        for c in &report.comparisons {
            let _ = writeln!(
                md,
                "| {} | {} | {}/{} | {}/{} | {} | {} |",
                c.method_a,
                c.method_b,
                c.table[0][0],
                c.table[0][1],
                c.table[1][0],
                c.table[1][1],
                fmt_real(c.p_value),
                if c.significant { "yes" } else { "no" }
            );
        }
    }
    for t in &report.breakdowns {
        let _ = write!(md, "\n## Breakdown: {}\n\n", t.key);
        md.push_str("| Group | N | Correct | Accuracy | F1 | Pass |\n|---|---:|---:|---:|---:|:---:|\n");
        for g in &t.groups {
            let m = &g.metrics;
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} |",
                g.group.replace('|', "\\|"),
                m.n,
                m.n_correct,
                pct(m.accuracy),
                fmt_real(m.f1),
                if m.passes_threshold { "yes" } else { "no" }
            );
        }
        if t.unlabeled > 0 {
            let _ = writeln!(md, "\n{} of {} results unlabeled for this key.", t.unlabeled, t.labeled + t.unlabeled);
        }
    }
    if let Some(c) = &report.correlations {
        let _ = write!(md, "\n## Complexity correlations (n = {})\n\n| Pair | r |\n|---|---:|\n", c.n);
        for p in &c.pairs {
            let r = p.r.map_or_else(|| p.error.clone().unwrap_or_default(), fmt_real);
            let _ = writeln!(md, "| {}-{} | {} |", p.pair.0.name().to_uppercase(), p.pair.1.name().to_uppercase(), r);
        }
    }
    md
}

fn write(dir: &Path, name: &str, content: &str, out: &mut Vec<PathBuf>) -> Result<(), EvalError> {
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    out.push(path);
    Ok(())
}

/// Writes the report in `format` into `dir` and returns the files written.
pub fn emit_report(report: &Report, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    match format {
        ReportFormat::Json => {
            write(dir, "metrics.json", &metrics_json(report), &mut out)?;
            write(dir, "comparisons.json", &to_rounded_json(&report.comparisons), &mut out)?;
        }
        ReportFormat::Csv => {
            for t in &report.breakdowns {
                write(dir, &format!("breakdown_{}.csv", t.key), &breakdown_csv(t)?, &mut out)?;
            }
        }
        ReportFormat::Markdown => write(dir, "report.md", &markdown(report), &mut out)?,
    }
    Ok(out)
}

/// The `metrics.json` text for `report`.
pub fn render_metrics_json(report: &Report) -> String {
    metrics_json(report)
}
