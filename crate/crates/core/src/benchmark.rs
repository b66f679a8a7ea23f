//! Train, persist, reload and test a set of algorithms on one split.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::eval::{evaluate, millis, timed, Clock, EvalReport};
use crate::model::Algorithm;
use crate::persist::{load_model, save_model, TrainSource};
use crate::store::{RatingStore, RatingTriple};
use crate::trained::{train, TrainParams, TrainedModel};

/// List length used to time recommendation-only algorithms.
pub const DEFAULT_TOP_N: usize = 10;

#[derive(Clone, Debug)]
pub struct BenchmarkOptions {
    pub algorithms: Vec<Algorithm>,
    pub params: TrainParams,
    /// Directory receiving one `<algorithm>.json` model file per run.
    pub model_dir: PathBuf,
    pub train_source: Option<TrainSource>,
    pub top_n: usize,
}

pub fn model_path(dir: &Path, algorithm: Algorithm) -> PathBuf {
    dir.join(format!("{algorithm}.json"))
}

/// Runs every requested algorithm in order and reports on each.
///
/// Models go through their file format between training and testing, so
/// the reported errors are those of the persisted model. Rating
/// predictors are scored on every test triple; the popularity model is
/// timed producing one list per distinct test user and has no error metrics.
pub fn run_benchmark(
    train_store: &RatingStore,
    test: &[RatingTriple],
    options: &BenchmarkOptions,
    clock: &dyn Clock,
) -> Result<Vec<EvalReport>> {
    options
        .algorithms
        .iter()
        .map(|&algorithm| {
            let (model, train_time) =
                timed(clock, || train(algorithm, train_store, &options.params));
            let path = model_path(&options.model_dir, algorithm);
            save_model(&path, &model?, options.train_source.as_ref())?;
            let model = load_model(&path, Some(train_store))?.model;
            let mut report = test_model(&model, train_store, test, options.top_n, clock)?;
            report.train_time_ms = millis(train_time);
            Ok(report)
        })
        .collect()
}

/// Scores (or, for recommendation-only models, times) a trained model on `test`.
pub fn test_model(
    model: &TrainedModel,
    profiles: &RatingStore,
    test: &[RatingTriple],
    top_n: usize,
    clock: &dyn Clock,
) -> Result<EvalReport> {
    match model.predictor() {
        Some(predictor) => Ok(evaluate(predictor, test, clock)?.0),
        None => {
            let users: BTreeSet<&str> = test.iter().map(|t| t.user.as_str()).collect();
            let (lists, elapsed) = timed(clock, || {
                users
                    .iter()
                    .map(|u| model.recommend(Some(profiles), u, top_n, false))
                    .collect::<Vec<_>>()
            });
            Ok(EvalReport {
                algorithm: model.algorithm(),
                hyperparameters: vec![],
                mae: None,
                rmse: None,
                n_test: lists.len(),
                n_fallback: 0,
                train_time_ms: 0,
                test_time_ms: millis(elapsed),
            })
        }
    }
}
