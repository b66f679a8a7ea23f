//! Error metrics, timed evaluation and the benchmark csv report.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::factorization::{train_funksvd, FactorizationConfig};
use crate::io::PredictionRecord;
use crate::model::{Algorithm, Predictor};
use crate::store::{RatingStore, RatingTriple};

/// Mean absolute error over `(actual, predicted)` pairs.
pub fn mae(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    Ok(pairs.iter().map(|(a, p)| (a - p).abs()).sum::<f64>() / pairs.len() as f64)
}

/// Root mean squared error over `(actual, predicted)` pairs.
pub fn rmse(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let mse = pairs.iter().map(|(a, p)| (a - p).powi(2)).sum::<f64>() / pairs.len() as f64;
    Ok(mse.sqrt())
}

/// Monotonic time source; only differences between readings matter.
pub trait Clock {
    fn now(&self) -> Duration;
}

#[derive(Clone, Copy, Debug)]
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> Self {
        MonotonicClock {
            origin: Instant::now(),
        }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }
}

/// Runs `f` and returns its result with the elapsed time on `clock`.
pub fn timed<T>(clock: &dyn Clock, f: impl FnOnce() -> T) -> (T, Duration) {
    let start = clock.now();
    let out = f();
    (out, clock.now().saturating_sub(start))
}

/// Outcome of one train/test run.
///
/// `mae` and `rmse` are absent for recommendation-only algorithms.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub algorithm: Algorithm,
    pub hyperparameters: Vec<(&'static str, String)>,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub n_test: usize,
    pub n_fallback: usize,
    pub train_time_ms: u64,
    pub test_time_ms: u64,
}

impl EvalReport {
    pub fn factors(&self) -> Option<usize> {
        self.hyperparameters
            .iter()
            .find(|(k, _)| *k == "factors")
            .and_then(|(_, v)| v.parse().ok())
    }

    /// Identical reports apart from wall-clock fields.
    pub fn same_results(&self, other: &EvalReport) -> bool {
        EvalReport {
            train_time_ms: 0,
            test_time_ms: 0,
            ..self.clone()
        } == EvalReport {
            train_time_ms: 0,
            test_time_ms: 0,
            ..other.clone()
        }
    }
}

pub(crate) fn millis(d: Duration) -> u64 {
    d.as_millis() as u64
}

/// Predicts every test triple and scores the results.
///
/// Only the prediction loop is timed. `train_time_ms` is left at zero for
/// the caller to fill in.
pub fn evaluate<P: Predictor + ?Sized>(
    model: &P,
    test: &[RatingTriple],
    clock: &dyn Clock,
) -> Result<(EvalReport, Vec<PredictionRecord>)> {
    if test.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let (estimates, elapsed) = timed(clock, || {
        test.iter()
            .map(|t| model.estimate(&t.user, &t.item))
            .collect::<Vec<_>>()
    });
    let pairs: Vec<(f64, f64)> = test
        .iter()
        .zip(&estimates)
        .map(|(t, e)| (t.rating, e.value))
        .collect();
    let report = EvalReport {
        algorithm: model.algorithm(),
        hyperparameters: model.hyperparameters(),
        mae: Some(mae(&pairs)?),
        rmse: Some(rmse(&pairs)?),
        n_test: test.len(),
        n_fallback: estimates.iter().filter(|e| e.fallback).count(),
        train_time_ms: 0,
        test_time_ms: millis(elapsed),
    };
    let records = test
        .iter()
        .zip(&estimates)
        .map(|(t, e)| PredictionRecord {
            user: t.user.clone(),
            item: t.item.clone(),
            predicted: e.value,
            actual: Some(t.rating),
        })
        .collect();
    Ok((report, records))
}

/// Trains and tests Funk SVD once per factor count, all else fixed.
pub fn timing_sweep(
    train: &RatingStore,
    test: &[RatingTriple],
    factor_grid: &[usize],
    config: &FactorizationConfig,
    clock: &dyn Clock,
) -> Result<Vec<EvalReport>> {
    if factor_grid.is_empty() {
        return Err(Error::InvalidConfig("factor grid is empty".into()));
    }
    if factor_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "factor grid must be strictly ascending".into(),
        ));
    }
    factor_grid
        .iter()
        .map(|&factors| {
            let config = FactorizationConfig {
                factors,
                ..config.clone()
            };
            let (model, train_time) = timed(clock, || train_funksvd(train, &config));
            let (mut report, _) = evaluate(&model?, test, clock)?;
            report.train_time_ms = millis(train_time);
            Ok(report)
        })
        .collect()
}

pub const CSV_HEADER: &str =
    "algorithm,factors,mae,rmse,n_test,n_fallback,train_time_ms,test_time_ms";

/// Writes reports as benchmark csv; reals carry six decimals.
pub fn write_csv<W: Write>(mut out: W, reports: &[EvalReport]) -> std::io::Result<()> {
    let real = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.algorithm,
            r.factors().map(|f| f.to_string()).unwrap_or_default(),
            real(r.mae),
            real(r.rmse),
            r.n_test,
            r.n_fallback,
            r.train_time_ms,
            r.test_time_ms
        )?;
    }
    Ok(())
}

pub fn csv_string(reports: &[EvalReport]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, reports).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv is ascii")
}
