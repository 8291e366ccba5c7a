//! Run reports: a flat key-value text block and a structured JSON document.
//! The JSON schema is documented in the repository README.

use anyhow::Result;
use serde::Serialize;

use gridroute::engine::{IterationRecord, RunOutcome};
use gridroute::metrics::MetricsReport;
use gridroute::repair::{RepairOutcome, RepairReport};

pub fn text_report(metrics: &MetricsReport, outcome: &RunOutcome) -> String {
    let s = &outcome.solution;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push(' ');
        out.push_str(&v);
        out.push('\n');
    };
    kv("abs_violation", format!("{}", metrics.abs_violation));
    kv("total_excess", format!("{}", metrics.total_excess));
    kv("violating_edges", format!("{}", metrics.violating_edges));
    kv("min_channel_width", format!("{}", metrics.min_channel_width));
    kv("total_wire_length", format!("{}", metrics.total_wire_length));
    kv(
        "critical_path_delay",
        format!("{}", metrics.critical_path_delay),
    );
    kv("runtime_seconds", format!("{:.6}", metrics.runtime_seconds));
    kv("threads", format!("{}", metrics.threads));
    kv("iterations", format!("{}", s.history.len()));
    kv("initial_width", format!("{}", s.initial_width));
    kv("final_width", format!("{}", s.width));
    kv(
        "best_feasible_width",
        s.best_feasible_width
            .map_or_else(|| "none".into(), |w| w.to_string()),
    );
    kv("repair_edges", format!("{}", outcome.repair.entries.len()));
    kv(
        "repair_eliminated",
        format!("{}", outcome.repair.count(RepairOutcome::Eliminated)),
    );
    kv(
        "repair_reduced",
        format!("{}", outcome.repair.count(RepairOutcome::Reduced)),
    );
    kv(
        "repair_no_path",
        format!("{}", outcome.repair.count(RepairOutcome::NoPath)),
    );
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    metrics: &'a MetricsReport,
    width: WidthSummary,
    iterations: usize,
    history: &'a [IterationRecord],
    repair: Vec<RepairEntry>,
}

#[derive(Serialize)]
struct WidthSummary {
    initial: u32,
    r#final: u32,
    best_feasible: Option<u32>,
}

#[derive(Serialize)]
struct RepairEntry {
    edge: usize,
    d_before: u32,
    passes: usize,
    q_total: u32,
    outcome: RepairOutcome,
}

fn repair_entries(report: &RepairReport) -> Vec<RepairEntry> {
    report
        .entries
        .iter()
        .map(|e| RepairEntry {
            edge: e.edge.index(),
            d_before: e.d_before,
            passes: e.passes.len(),
            q_total: e.q_total,
            outcome: e.outcome,
        })
        .collect()
}

pub fn json_report(metrics: &MetricsReport, outcome: &RunOutcome) -> Result<String> {
    let s = &outcome.solution;
    let doc = JsonReport {
        metrics,
        width: WidthSummary {
            initial: s.initial_width,
            r#final: s.width,
            best_feasible: s.best_feasible_width,
        },
        iterations: s.history.len(),
        history: &s.history,
        repair: repair_entries(&outcome.repair),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gridroute::engine::{run_engine, EngineConfig};
    use gridroute::grid::generate_synthetic;
    use gridroute::metrics::compute_metrics;

    #[test]
    fn text_report_is_flat_key_value() {
        let inst = generate_synthetic(4, 4, 3, 2, 1).unwrap();
        let outcome = run_engine(&inst, &EngineConfig::default()).unwrap();
        let metrics = compute_metrics(&outcome.solution, &inst, 0.5, 2);
        let text = text_report(&metrics, &outcome);
        for line in text.lines() {
            assert!(line.splitn(2, ' ').count() == 2, "bad line: {line}");
        }
        assert!(text.contains("min_channel_width"));
        assert!(text.contains("threads 2"));
    }

    #[test]
    fn json_report_round_trips() {
        let inst = generate_synthetic(4, 4, 3, 2, 1).unwrap();
        let outcome = run_engine(&inst, &EngineConfig::default()).unwrap();
        let metrics = compute_metrics(&outcome.solution, &inst, 0.5, 1);
        let json = json_report(&metrics, &outcome).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value["metrics"]["total_wire_length"].is_u64());
        assert_eq!(
            value["iterations"].as_u64().unwrap() as usize,
            outcome.solution.history.len()
        );
        assert!(value["history"].is_array());
        assert!(value["repair"].is_array());
    }
}
