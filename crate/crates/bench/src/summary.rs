//! Per-cell statistics and slopes of the stopping time against `log(1/delta)`.

use std::collections::BTreeMap;

use bandit_cluster_core::psi::kl_bernoulli;
use serde::{Deserialize, Serialize};

use crate::config::Algorithm;
use crate::runner::TrialRecord;

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub delta: f64,
    pub log_inv_delta: f64,
    /// Trials that ran to a result (capped ones included).
    pub trials: usize,
    pub failures: usize,
    pub capped: usize,
    pub mean_tau: f64,
    pub stderr_tau: f64,
    pub error_rate: f64,
    /// `kl(delta, 1 - delta) T*`, when `T*` is known.
    pub lower_bound: Option<f64>,
}

/// One row of `slopes.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub algorithm: Algorithm,
    pub points: usize,
    /// Least-squares slope of mean tau against `log(1/delta)`; absent below two deltas.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub t_star: Option<f64>,
    /// Slope of the lower bound over the same deltas.
    pub lower_bound_slope: Option<f64>,
    /// `2 T*`.
    pub upper_slope_reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
    pub slopes: Vec<SlopeFit>,
}

/// Ordinary least squares `y = a + b x`; `None` unless at least two distinct `x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Some((b, my - b * mx))
}

pub fn lower_bound_at(delta: f64, t_star: f64) -> f64 {
    kl_bernoulli(delta, 1.0 - delta).map_or(f64::NAN, |kl| kl * t_star)
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn summarize(records: &[TrialRecord], t_star: Option<f64>) -> Summary {
    let mut groups: BTreeMap<(Algorithm, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.algorithm, r.delta_index)).or_default().push(r);
    }
    let mut cells = Vec::new();
    for ((algorithm, _), rs) in &groups {
        let ok: Vec<&&TrialRecord> = rs.iter().filter(|r| r.error.is_none()).collect();
        let taus: Vec<f64> = ok.iter().map(|r| r.stopping_time as f64).collect();
        let (mean_tau, stderr_tau) = mean_stderr(&taus);
        let delta = rs[0].delta;
        let errors = ok.iter().filter(|r| !r.correct).count();
        cells.push(CellSummary {
            algorithm: *algorithm,
            delta,
            log_inv_delta: -delta.ln(),
            trials: ok.len(),
            failures: rs.len() - ok.len(),
            capped: ok.iter().filter(|r| r.capped).count(),
            mean_tau,
            stderr_tau,
            error_rate: if ok.is_empty() { f64::NAN } else { errors as f64 / ok.len() as f64 },
            lower_bound: t_star.map(|t| lower_bound_at(delta, t)),
        });
    }
    let mut slopes = Vec::new();
    let mut algorithms: Vec<Algorithm> = cells.iter().map(|c| c.algorithm).collect();
    algorithms.dedup();
    for algorithm in algorithms {
        let pts: Vec<&CellSummary> = cells.iter().filter(|c| c.algorithm == algorithm && c.trials > 0).collect();
        let xs: Vec<f64> = pts.iter().map(|c| c.log_inv_delta).collect();
        let ys: Vec<f64> = pts.iter().map(|c| c.mean_tau).collect();
        let fit = fit_line(&xs, &ys);
        let lb_slope = t_star.and_then(|t| {
            let lbs: Vec<f64> = pts.iter().map(|c| lower_bound_at(c.delta, t)).collect();
            fit_line(&xs, &lbs).map(|f| f.0)
        });
        slopes.push(SlopeFit {
            algorithm,
            points: pts.len(),
            slope: fit.map(|f| f.0),
            intercept: fit.map(|f| f.1),
            t_star,
            lower_bound_slope: lb_slope,
            upper_slope_reference: t_star.map(|t| 2.0 * t),
        });
    }
    Summary { cells, slopes }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(alg: Algorithm, di: usize, delta: f64, tau: u64, correct: bool) -> TrialRecord {
        TrialRecord {
            algorithm: alg,
            delta,
            delta_index: di,
            trial: 0,
            seed: 0,
            stopping_time: tau,
            correct,
            capped: false,
            declared: vec![],
            error: None,
        }
    }

    #[test]
    fn exact_linear_data_recovers_slope() {
        let (a, b) = (4.0, 7.5);
        let rs: Vec<TrialRecord> = [2.0f64, 4.0, 6.0, 8.0]
            .into_iter()
            .enumerate()
            .map(|(i, x)| record(Algorithm::Atboc, i, (-x).exp(), (a + b * x) as u64, true))
            .collect();
        let s = summarize(&rs, Some(2.0));
        assert_eq!(s.slopes.len(), 1);
        assert!((s.slopes[0].slope.unwrap() - b).abs() < 1e-9);
        assert!((s.slopes[0].intercept.unwrap() - a).abs() < 1e-9);
        assert_eq!(s.slopes[0].upper_slope_reference, Some(4.0));
        let xs = [2.0f64, 4.0, 6.0, 8.0];
        let kl: Vec<f64> = xs.iter().map(|x| {
            let d = (-x).exp();
            2.0 * (1.0 - 2.0 * d) * ((1.0 - d) / d).ln()
        }).collect();
        let expected = fit_line(&xs, &kl).unwrap().0;
        assert!((s.slopes[0].lower_bound_slope.unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn single_delta_has_no_slope() {
        let rs = vec![record(Algorithm::Lucbboc, 0, 0.1, 10, true), record(Algorithm::Lucbboc, 0, 0.1, 20, false)];
        let s = summarize(&rs, None);
        assert_eq!(s.slopes[0].slope, None);
        let c = &s.cells[0];
        assert_eq!(c.mean_tau, 15.0);
        assert!((c.stderr_tau - 5.0).abs() < 1e-12);
        assert_eq!(c.error_rate, 0.5);
        assert_eq!(c.lower_bound, None);
    }

    #[test]
    fn failed_trials_are_excluded() {
        let mut bad = record(Algorithm::BocElim, 0, 0.1, 0, false);
        bad.error = Some("boom".into());
        let s = summarize(&[bad, record(Algorithm::BocElim, 0, 0.1, 8, true)], None);
        assert_eq!((s.cells[0].trials, s.cells[0].failures), (1, 1));
        assert_eq!(s.cells[0].mean_tau, 8.0);
    }
}
