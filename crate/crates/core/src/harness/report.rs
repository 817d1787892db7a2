use std::fmt;

use super::plot::{components_in, trailing_mean};
use crate::error::{Error, Result};
use crate::optimizer::TraceRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    /// Last logged full objective.
    pub final_full_f: Option<f64>,
    /// Mean of `f_j_after` over the last `m` records, `m = max j + 1`.
    pub trailing_mean: f64,
    /// Elapsed seconds at the last record.
    pub wall_time: f64,
    /// Diagnostic of an aborted run.
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
    /// `(metric, label)`; lower is better for every metric.
    pub winners: Vec<(&'static str, String)>,
}

impl ReportRow {
    pub fn from_trace(label: &str, trace: &[TraceRecord], aborted: Option<String>) -> Self {
        ReportRow {
            label: label.to_string(),
            final_full_f: trace.iter().rev().find_map(|r| r.full_f),
            trailing_mean: trailing_mean(trace, components_in(trace)).last().copied().unwrap_or(f64::NAN),
            wall_time: trace.last().map_or(0.0, |r| r.elapsed),
            aborted,
        }
    }
}

impl ComparisonReport {
    /// Builds a report; labels must be unique. Aborted runs never win.
    pub fn new(rows: Vec<ReportRow>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if rows[..i].iter().any(|o| o.label == r.label) {
                return Err(Error::InvalidArgument(format!("duplicate report label `{}`", r.label)));
            }
        }
        let metrics: [(&'static str, fn(&ReportRow) -> Option<f64>); 3] = [
            ("final_full_f", |r| r.final_full_f),
            ("trailing_mean", |r| Some(r.trailing_mean)),
            ("wall_time", |r| Some(r.wall_time)),
        ];
        let mut winners = Vec::new();
        for (name, metric) in metrics {
            let best = rows
                .iter()
                .filter(|r| r.aborted.is_none())
                .filter_map(|r| metric(r).filter(|v| !v.is_nan()).map(|v| (v, r)))
                .fold(None::<(f64, &ReportRow)>, |acc, (v, r)| match acc {
                    Some((bv, _)) if bv <= v => acc,
                    _ => Some((v, r)),
                });
            if let Some((_, r)) = best {
                winners.push((name, r.label.clone()));
            }
        }
        Ok(ComparisonReport { rows, winners })
    }

    pub fn from_traces(traces: &[(String, Vec<TraceRecord>)]) -> Result<Self> {
        Self::new(traces.iter().map(|(l, t)| ReportRow::from_trace(l, t, None)).collect())
    }

    pub fn winner(&self, metric: &str) -> Option<&str> {
        self.winners.iter().find(|(m, _)| *m == metric).map(|(_, l)| l.as_str())
    }

    pub fn any_aborted(&self) -> bool {
        self.rows.iter().any(|r| r.aborted.is_some())
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(5).max(5);
        writeln!(f, "{:<width$}  {:>24}  {:>24}  {:>12}  status", "label", "final_full_f", "trailing_mean", "wall_s")?;
        for r in &self.rows {
            let full = r.final_full_f.map_or_else(|| "-".to_string(), |v| format!("{v:.16e}"));
            let status = r.aborted.as_deref().map_or_else(|| "ok".to_string(), |m| format!("aborted: {m}"));
            writeln!(
                f,
                "{:<width$}  {:>24}  {:>24}  {:>12.6}  {}",
                r.label,
                full,
                format!("{:.16e}", r.trailing_mean),
                r.wall_time,
                status
            )?;
        }
        for (metric, label) in &self.winners {
            writeln!(f, "winner {metric}: {label}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(values: &[f64], full: f64) -> Vec<TraceRecord> {
        values
            .iter()
            .enumerate()
            .map(|(k, &f)| TraceRecord {
                k,
                j: k % 2,
                f_j_before: f,
                f_j_after: f,
                full_f: (k + 1 == values.len()).then_some(full),
                alpha: 1.0,
                mu: None,
                fallback_used: false,
                elapsed: k as f64,
                slope: -1.0,
            })
            .collect()
    }

    #[test]
    fn single_row_wins_everything() {
        let r = ComparisonReport::from_traces(&[("only".into(), trace(&[3.0, 2.0, 1.0], 0.5))]).unwrap();
        assert_eq!(r.rows[0].trailing_mean, 1.5);
        assert_eq!(r.rows[0].final_full_f, Some(0.5));
        assert_eq!(r.winners.len(), 3);
        assert!(r.winners.iter().all(|(_, l)| l == "only"));
    }

    #[test]
    fn per_metric_winners_and_aborted_rows() {
        let a = ReportRow::from_trace("a", &trace(&[1.0, 1.0], 2.0), None);
        let b = ReportRow::from_trace("b", &trace(&[0.0, 0.0, 0.0], 3.0), None);
        let c = ReportRow::from_trace("c", &trace(&[-9.0], -9.0), Some("nan".into()));
        let r = ComparisonReport::new(vec![a, b, c]).unwrap();
        assert_eq!(r.winner("final_full_f"), Some("a"));
        assert_eq!(r.winner("trailing_mean"), Some("b"));
        assert_eq!(r.winner("wall_time"), Some("a"));
        assert!(r.any_aborted());
        let text = r.to_string();
        assert!(text.contains("aborted: nan"));
        assert!(text.contains("winner trailing_mean: b"));
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let t = trace(&[1.0], 1.0);
        assert!(ComparisonReport::from_traces(&[("x".into(), t.clone()), ("x".into(), t)]).is_err());
    }
}
