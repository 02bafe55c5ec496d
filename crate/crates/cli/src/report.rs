use std::fmt::Write as _;
use std::time::Duration;

use clap::ValueEnum;
use romdd::search::{SearchStats, SolveOutcome, SolveResult};
use romdd::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StatsFormat {
    /// Aligned `name   value` lines.
    Text,
    /// One `name=value` line per entry.
    Kv,
}

/// Everything `solve` prints.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub outcome: SolveOutcome,
    pub stats: SearchStats,
    pub constraint_sizes: Vec<(usize, usize)>,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn new(result: SolveResult, wall_time: Duration) -> Self {
        RunReport {
            outcome: result.outcome,
            stats: result.stats,
            constraint_sizes: result.constraint_sizes,
            wall_time,
        }
    }

    fn entries(&self) -> Vec<(String, String)> {
        let (outcome, solution) = match &self.outcome {
            SolveOutcome::Solution(s) => ("solution", join(s)),
            SolveOutcome::Unsat => ("unsat", "-".to_string()),
            SolveOutcome::LimitReached => ("limit", "-".to_string()),
        };
        let mut out = vec![
            ("outcome".to_string(), outcome.to_string()),
            ("solution".to_string(), solution),
        ];
        out.extend(
            self.stats
                .fields()
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string())),
        );
        out.push((
            "constraints".to_string(),
            self.constraint_sizes.len().to_string(),
        ));
        for (i, (nodes, edges)) in self.constraint_sizes.iter().enumerate() {
            out.push((format!("constraint.{}.nodes", i + 1), nodes.to_string()));
            out.push((format!("constraint.{}.edges", i + 1), edges.to_string()));
        }
        out.push((
            "wall_time_ms".to_string(),
            format!("{:.3}", self.wall_time.as_secs_f64() * 1e3),
        ));
        out
    }

    pub fn render(&self, format: StatsFormat) -> String {
        let entries = self.entries();
        let width = entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut s = String::new();
        for (k, v) in entries {
            match format {
                StatsFormat::Text => writeln!(s, "{k:<width$}  {v}").unwrap(),
                StatsFormat::Kv => writeln!(s, "{k}={v}").unwrap(),
            }
        }
        s
    }
}

pub fn join(values: &[Value]) -> String {
    values
        .iter()
        .map(Value::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}
