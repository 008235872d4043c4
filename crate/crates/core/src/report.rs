//! Table, CSV and JSON renderings.
//!
//! Every rendering of a computation carries the same numbers: rationals are
//! printed as decimals with at most six fractional digits, trailing zeros
//! trimmed.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use indexmap::IndexMap;
use serde_json::{json, Value};

use crate::plan::{Plan, PlanCounts};
use crate::rational::{self, Rational};
use crate::risk::{RiskRow, SelectionResult};
use crate::sim::{Aggregate, ComparisonReport, VersionMetrics};
use crate::tree::{Classification, MissingAnswer, PathStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?} (expected table, csv or json)")),
        }
    }
}

fn num(r: Rational) -> Value {
    rational::to_json_number(r, false)
}

fn to_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Left-aligned columns separated by two spaces; no trailing whitespace.
fn to_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut l = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i + 1 == cells.len() {
                l.push_str(c);
            } else {
                let pad = widths[i] - c.chars().count();
                l.push_str(c);
                l.push_str(&" ".repeat(pad + 2));
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

// ---------------------------------------------------------------------------
// Risk tables

/// Risk table: id, C, N, S, N×S, P, RE, plus a selected/skipped column when a
/// selection is supplied.
pub fn render_risk(rows: &[RiskRow], selection: Option<&SelectionResult>, format: OutputFormat) -> String {
    let selected: Option<BTreeSet<&str>> =
        selection.map(|s| s.selected.iter().map(String::as_str).collect());
    let mark = |id: &str| {
        selected
            .as_ref()
            .map(|s| if s.contains(id) { "selected" } else { "skipped" })
    };
    match format {
        OutputFormat::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut v = json!({
                        "id": r.test_id,
                        "C": r.cost,
                        "N": r.stats.defects,
                        "S": num(r.stats.mean_severity),
                        "NS": num(r.stats.ns),
                        "P": r.probability,
                        "weight": num(r.weight),
                        "RE": num(r.exposure),
                    });
                    if let Some(m) = mark(&r.test_id) {
                        v["status"] = Value::String(m.into());
                    }
                    v
                })
                .collect();
            let mut doc = json!({ "rows": items });
            if let Some(s) = selection {
                doc["selection"] = json!({
                    "fraction": num(s.fraction),
                    "quota": s.quota,
                    "selected": s.selected.len(),
                    "shortfall": s.shortfall,
                });
            }
            to_json(&doc)
        }
        OutputFormat::Csv | OutputFormat::Table => {
            let csv = format == OutputFormat::Csv;
            let mut header = vec!["id", "C", "N", "S", if csv { "NS" } else { "N×S" }, "P", "RE"];
            if selection.is_some() {
                header.push(if csv { "selected" } else { "status" });
            }
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut cells = vec![
                        r.test_id.clone(),
                        r.cost.to_string(),
                        r.stats.defects.to_string(),
                        r.stats.mean_severity.to_string(),
                        r.stats.ns.to_string(),
                        r.probability.to_string(),
                        r.exposure.to_string(),
                    ];
                    if let Some(m) = mark(&r.test_id) {
                        cells.push(if csv {
                            (m == "selected").to_string()
                        } else {
                            m.to_string()
                        });
                    }
                    cells
                })
                .collect();
            if csv {
                to_csv(&header, &body)
            } else {
                to_table(&header, &body)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Classification tables

fn path_json(path: &[PathStep]) -> Value {
    Value::Array(
        path.iter()
            .map(|(q, a)| json!([q.get(), a.letter()]))
            .collect(),
    )
}

pub fn render_classifications(
    results: &IndexMap<String, Result<Classification, MissingAnswer>>,
    explain: bool,
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Json => {
            let items: Vec<Value> = results
                .iter()
                .map(|(id, r)| match r {
                    Ok(c) => json!({
                        "id": id,
                        "decision": c.decision.as_str(),
                        "path": path_json(&c.path),
                    }),
                    Err(MissingAnswer(q)) => json!({ "id": id, "missing_answer": q.get() }),
                })
                .collect();
            to_json(&Value::Array(items))
        }
        OutputFormat::Csv => {
            let body: Vec<Vec<String>> = results
                .iter()
                .map(|(id, r)| match r {
                    Ok(c) => vec![
                        id.clone(),
                        c.decision.as_str().to_string(),
                        c.path_string(),
                        String::new(),
                    ],
                    Err(MissingAnswer(q)) => vec![id.clone(), "unclassified".into(), String::new(), q.to_string()],
                })
                .collect();
            to_csv(&["id", "decision", "path", "missing_question"], &body)
        }
        OutputFormat::Table => {
            let body: Vec<Vec<String>> = results
                .iter()
                .map(|(id, r)| {
                    let result = match r {
                        Ok(c) if explain => format!("{}; {}", c.decision, c.path_string()),
                        Ok(c) => c.decision.to_string(),
                        Err(MissingAnswer(q)) => format!("missing answer: Q{q}"),
                    };
                    vec![id.clone(), result]
                })
                .collect();
            let mut out = to_table(&["id", "result"], &body);
            if explain {
                for (id, r) in results {
                    if let Ok(c) = r {
                        let _ = writeln!(out, "\n{id}:");
                        for (q, a) in &c.path {
                            let _ = writeln!(out, "  Q{q} {} [{a}]: {}", q.topic(), q.text());
                        }
                        let _ = writeln!(out, "  => {}", c.decision);
                    }
                }
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// Plans

pub fn render_plan_summary(plan: &Plan, format: OutputFormat) -> String {
    let PlanCounts {
        automate,
        select,
        run,
        skip,
    } = plan.counts();
    match format {
        OutputFormat::Json => to_json(&json!({
            "policy": plan.policy.as_str(),
            "automate": automate,
            "select": select,
            "run": run,
            "skip": skip,
        })),
        OutputFormat::Csv => to_csv(
            &["policy", "automate", "select", "run", "skip"],
            &[vec![
                plan.policy.to_string(),
                automate.to_string(),
                select.to_string(),
                run.to_string(),
                skip.to_string(),
            ]],
        ),
        OutputFormat::Table => format!(
            "policy {}: automate {automate}, select {select}, run {run}, skip {skip}\n",
            plan.policy
        ),
    }
}

/// Per-test plan listing (the JSON form is the plan file itself).
pub fn render_plan(plan: &Plan, format: OutputFormat) -> String {
    if format == OutputFormat::Json {
        return crate::plan::plan_to_json(plan);
    }
    let header = ["id", "disposition", "rationale", "RE", "path"];
    let body: Vec<Vec<String>> = plan
        .entries
        .iter()
        .map(|e| {
            vec![
                e.test_id.clone(),
                e.disposition.as_str().to_string(),
                e.rationale.as_str().to_string(),
                e.risk.as_ref().map(|r| r.exposure.to_string()).unwrap_or_default(),
                e.path
                    .as_ref()
                    .map(|p| {
                        p.iter()
                            .map(|(q, a)| format!("{q}:{a}"))
                            .collect::<Vec<_>>()
                            .join(" → ")
                    })
                    .unwrap_or_default(),
            ]
        })
        .collect();
    match format {
        OutputFormat::Csv => to_csv(&header, &body),
        _ => {
            let mut out = to_table(&header, &body);
            out.push('\n');
            out.push_str(&render_plan_summary(plan, OutputFormat::Table));
            out
        }
    }
}

// ---------------------------------------------------------------------------
// Campaign comparisons

const COMPARISON_HEADER: [&str; 9] = [
    "policy",
    "version",
    "exec_minutes",
    "deploy_minutes",
    "faults_detected",
    "faults_missed",
    "inclusiveness",
    "precision",
    "deploy_share",
];

fn version_cells(v: &VersionMetrics) -> [String; 7] {
    [
        v.exec_minutes.to_string(),
        v.deploy_minutes.to_string(),
        v.faults_detected.to_string(),
        v.faults_missed.to_string(),
        v.inclusiveness.to_string(),
        v.precision.to_string(),
        v.deploy_share.to_string(),
    ]
}

fn aggregate_cells(a: &Aggregate) -> [String; 7] {
    [
        a.exec_minutes.to_string(),
        a.deploy_minutes.to_string(),
        a.faults_detected.to_string(),
        a.faults_missed.to_string(),
        a.inclusiveness.to_string(),
        a.precision.to_string(),
        a.deploy_share.to_string(),
    ]
}

fn comparison_rows(report: &ComparisonReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for c in &report.campaigns {
        let policy = c.policy.to_string();
        for v in &c.versions {
            let mut row = vec![policy.clone(), v.label.clone()];
            row.extend(version_cells(v));
            rows.push(row);
        }
        for (label, agg) in [("total", &c.total), ("average", &c.average)] {
            let mut row = vec![policy.clone(), label.to_string()];
            row.extend(aggregate_cells(agg));
            rows.push(row);
        }
    }
    rows
}

fn aggregate_json(a: &Aggregate) -> Value {
    json!({
        "exec_minutes": num(a.exec_minutes),
        "deploy_minutes": num(a.deploy_minutes),
        "faults_detected": num(a.faults_detected),
        "faults_missed": num(a.faults_missed),
        "inclusiveness": num(a.inclusiveness),
        "precision": num(a.precision),
        "deploy_share": num(a.deploy_share),
    })
}

/// One row per policy × version, then `total` and `average` rows per policy.
pub fn render_comparison(report: &ComparisonReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(&COMPARISON_HEADER, &comparison_rows(report)),
        OutputFormat::Table => {
            let mut out = format!("seed {}\n", report.seed);
            out.push_str(&to_table(&COMPARISON_HEADER, &comparison_rows(report)));
            out
        }
        OutputFormat::Json => {
            let campaigns: Vec<Value> = report
                .campaigns
                .iter()
                .map(|c| {
                    let versions: Vec<Value> = c
                        .versions
                        .iter()
                        .map(|v| {
                            json!({
                                "version": v.label,
                                "exec_minutes": num(v.exec_minutes),
                                "deploy_minutes": num(v.deploy_minutes),
                                "faults_detected": v.faults_detected,
                                "faults_missed": v.faults_missed,
                                "inclusiveness": num(v.inclusiveness),
                                "precision": num(v.precision),
                                "deploy_share": num(v.deploy_share),
                                "executed": v.executed,
                                "skipped": v.skipped,
                                "automated": v.automated,
                                "newly_automated": v.newly_automated,
                                "risk_scored": v.risk_scored,
                            })
                        })
                        .collect();
                    json!({
                        "policy": c.policy.as_str(),
                        "versions": versions,
                        "total": aggregate_json(&c.total),
                        "average": aggregate_json(&c.average),
                    })
                })
                .collect();
            to_json(&json!({ "seed": report.seed, "campaigns": campaigns }))
        }
    }
}
