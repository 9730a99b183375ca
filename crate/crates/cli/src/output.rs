//! CSV emitters and the aggregate reader.

use std::io::{Read, Write};

use cab_core::engine::{AggregateCurve, CurvePoint};
use cab_core::RawRecord;

use crate::CliError;

pub const RAW_HEADER: [&str; 8] = [
    "policy",
    "checkpoint",
    "replication",
    "pseudo_regret",
    "epochs_used",
    "arms_queried",
    "commit_time",
    "committed_optimal",
];

pub const AGGREGATE_HEADER: [&str; 5] = [
    "policy",
    "checkpoint",
    "mean_regret",
    "ci_halfwidth",
    "replications",
];

fn csv_err(e: csv::Error) -> CliError {
    CliError::io(e.to_string())
}

pub fn write_raw<W: Write>(out: W, rows: &[RawRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RAW_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.policy.clone(),
            r.checkpoint.to_string(),
            r.replication.to_string(),
            r.pseudo_regret.to_string(),
            r.epochs_used.to_string(),
            r.arms_queried.to_string(),
            r.commit_time.map_or_else(String::new, |t| t.to_string()),
            r.committed_optimal
                .map_or_else(String::new, |b| b.to_string()),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(e.to_string()))
}

pub fn write_aggregate<W: Write>(out: W, curves: &[AggregateCurve]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER).map_err(csv_err)?;
    for curve in curves {
        for p in &curve.points {
            w.write_record([
                curve.policy.clone(),
                p.checkpoint.to_string(),
                p.mean_regret.to_string(),
                p.ci_halfwidth.to_string(),
                p.replications.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| CliError::io(e.to_string()))
}

/// Reference curves (no replications) in aggregate form.
pub fn reference_curve(name: &str, points: &[(f64, f64)]) -> AggregateCurve {
    AggregateCurve {
        policy: name.to_string(),
        points: points
            .iter()
            .map(|&(t, v)| CurvePoint {
                checkpoint: t as u64,
                mean_regret: v,
                ci_halfwidth: 0.0,
                replications: 0,
            })
            .collect(),
        single_sample: false,
    }
}

/// Parses an aggregate CSV, grouping rows by policy in first-seen order.
pub fn read_aggregate<R: Read>(input: R) -> Result<Vec<AggregateCurve>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r
        .headers()
        .map_err(|e| CliError::config(format!("aggregate csv: {e}")))?;
    if header.iter().ne(AGGREGATE_HEADER) {
        return Err(CliError::config(format!(
            "aggregate csv: header {:?} does not match {:?}",
            header.iter().collect::<Vec<_>>(),
            AGGREGATE_HEADER
        )));
    }
    let mut curves: Vec<AggregateCurve> = Vec::new();
    for (i, row) in r.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CliError::config(format!("aggregate csv line {line}: {e}")))?;
        let field = |j: usize| row.get(j).unwrap_or_default();
        let bad = |what: &str| CliError::config(format!("aggregate csv line {line}: bad {what}"));
        let point = CurvePoint {
            checkpoint: field(1).parse().map_err(|_| bad("checkpoint"))?,
            mean_regret: field(2).parse().map_err(|_| bad("mean_regret"))?,
            ci_halfwidth: field(3).parse().map_err(|_| bad("ci_halfwidth"))?,
            replications: field(4).parse().map_err(|_| bad("replications"))?,
        };
        let policy = field(0);
        match curves.iter_mut().find(|c| c.policy == policy) {
            Some(c) => c.points.push(point),
            None => curves.push(AggregateCurve {
                policy: policy.to_string(),
                points: vec![point],
                single_sample: point.replications == 1,
            }),
        }
    }
    if curves.is_empty() {
        return Err(CliError::config("aggregate csv has no data rows"));
    }
    Ok(curves)
}
