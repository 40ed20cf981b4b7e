//! Side-by-side comparison of two closed-loop runs.

use std::fmt::Write as _;

use log::warn;

use super::SimResult;

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: &'static str,
    pub baseline: f64,
    pub candidate: f64,
    /// `candidate / baseline`; 1 when both are zero.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonReport {
    pub common_steps: usize,
    pub metrics: Vec<Metric>,
    pub warnings: Vec<String>,
}

impl ComparisonReport {
    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn ratio(&self, name: &str) -> Option<f64> {
        self.metric(name).map(|m| m.ratio)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("common steps: {}\n", self.common_steps);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        for m in &self.metrics {
            let _ = writeln!(
                s,
                "{:<26} baseline {:>14.6e}  candidate {:>14.6e}  ratio {:>10.4}",
                m.name, m.baseline, m.candidate, m.ratio
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,baseline,candidate,ratio\n");
        for m in &self.metrics {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e}",
                m.name, m.baseline, m.candidate, m.ratio
            );
        }
        s
    }
}

fn ratio(b: f64, c: f64) -> f64 {
    if b == 0.0 && c == 0.0 {
        1.0
    } else {
        c / b
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Compares `candidate` against `baseline` over their common prefix of
/// sampling instants: total Krylov iterations, operator applications with
/// and without preconditioner assembly, and the max and median of `‖F‖`.
pub fn compare_runs(baseline: &SimResult, candidate: &SimResult) -> ComparisonReport {
    let mut report = ComparisonReport::default();
    let common = baseline
        .records
        .iter()
        .zip(&candidate.records)
        .take_while(|(a, b)| a.step == b.step && (a.t - b.t).abs() <= 1e-9 * a.t.abs().max(1.0))
        .count();
    report.common_steps = common;
    if common == 0 {
        let msg = "runs share no common sampling instants".to_string();
        warn!("{msg}");
        report.warnings.push(msg);
        return report;
    }
    if common != baseline.records.len() || common != candidate.records.len() {
        let msg = format!(
            "step grids differ ({} vs {} records); comparing the first {common}",
            baseline.records.len(),
            candidate.records.len()
        );
        warn!("{msg}");
        report.warnings.push(msg);
    }

    let b = &baseline.records[..common];
    let c = &candidate.records[..common];
    let iters = |r: &[super::StepRecord]| r.iter().map(|s| s.iterations).sum::<usize>() as f64;
    let rebuild =
        |r: &[super::StepRecord], m: usize| (r.iter().filter(|s| s.rebuilt).count() * m) as f64;
    let norms = |r: &[super::StepRecord]| r.iter().map(|s| s.norm_f).collect::<Vec<_>>();
    let max = |v: Vec<f64>| v.into_iter().fold(f64::NEG_INFINITY, f64::max);

    let (bi, ci) = (iters(b), iters(c));
    let (br, cr) = (
        rebuild(b, baseline.decision_dim),
        rebuild(c, candidate.decision_dim),
    );
    let rows = [
        ("iterations", bi, ci),
        ("map_evals_solver", bi, ci),
        ("map_evals_with_rebuild", bi + br, ci + cr),
        ("max_norm_F", max(norms(b)), max(norms(c))),
        ("median_norm_F", median(norms(b)), median(norms(c))),
    ];
    report.metrics = rows
        .into_iter()
        .map(|(name, baseline, candidate)| Metric {
            name,
            baseline,
            candidate,
            ratio: ratio(baseline, candidate),
        })
        .collect();
    report
}
