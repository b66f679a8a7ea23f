//! Biased latent-factor model trained with stochastic gradient descent.
//!
//! Predictions are `mu + b_u + b_i + p_u . q_i`. Every rating is visited
//! once per epoch in a seeded shuffled order, so a given seed, config and
//! store always yield the same parameters bit for bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Algorithm, Estimate, Predictor};
use crate::store::{IdMap, RatingBounds, RatingStore};

/// Upper bound (exclusive) of the uniform factor initialization.
pub const INIT_SCALE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationConfig {
    pub factors: usize,
    pub max_iter: usize,
    pub learn_rate: f64,
    pub regularization: f64,
    pub seed: u64,
    pub use_biases: bool,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        FactorizationConfig {
            factors: 100,
            max_iter: 100,
            learn_rate: 0.01,
            regularization: 0.1,
            seed: 42,
            use_biases: true,
        }
    }
}

impl FactorizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.factors == 0 {
            return Err(Error::InvalidConfig("factors must be at least 1".into()));
        }
        if !(self.learn_rate > 0.0 && self.learn_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive (got {})",
                self.learn_rate
            )));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "regularization must be non-negative (got {})",
                self.regularization
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorModel {
    pub(crate) config: FactorizationConfig,
    pub(crate) users: IdMap,
    pub(crate) items: IdMap,
    /// Row-major, `users.len() x factors`.
    pub(crate) user_factors: Vec<f64>,
    /// Row-major, `items.len() x factors`.
    pub(crate) item_factors: Vec<f64>,
    pub(crate) user_bias: Vec<f64>,
    pub(crate) item_bias: Vec<f64>,
    pub(crate) global_mean: f64,
    pub(crate) bounds: RatingBounds,
}

/// One SGD step on a single rating; returns the pre-update error.
///
/// All right-hand sides use the values from before the step. Biases are
/// left alone when `use_biases` is false.
#[allow(clippy::too_many_arguments)]
pub fn sgd_step(
    p: &mut [f64],
    q: &mut [f64],
    b_u: &mut f64,
    b_i: &mut f64,
    global_mean: f64,
    rating: f64,
    learn_rate: f64,
    regularization: f64,
    use_biases: bool,
) -> f64 {
    let dot: f64 = p.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
    let err = rating - (global_mean + *b_u + *b_i + dot);
    if use_biases {
        *b_u += learn_rate * (err - regularization * *b_u);
        *b_i += learn_rate * (err - regularization * *b_i);
    }
    for (pk, qk) in p.iter_mut().zip(q.iter_mut()) {
        let (p_old, q_old) = (*pk, *qk);
        *pk += learn_rate * (err * q_old - regularization * p_old);
        *qk += learn_rate * (err * p_old - regularization * q_old);
    }
    err
}

pub fn train_funksvd(store: &RatingStore, config: &FactorizationConfig) -> Result<FactorModel> {
    let mut trainer = Trainer::new(store, config)?;
    for epoch in 1..=config.max_iter {
        trainer.epoch(epoch)?;
    }
    Ok(trainer.model)
}

/// Epoch-by-epoch access to training, e.g. to track the loss curve.
pub struct Trainer {
    model: FactorModel,
    ratings: Vec<(usize, usize, f64)>,
    order: Vec<usize>,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(store: &RatingStore, config: &FactorizationConfig) -> Result<Self> {
        config.validate()?;
        let global_mean = store.global_mean()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let f = config.factors;
        let mut init = |rows: usize| -> Vec<f64> {
            (0..rows * f)
                .map(|_| rng.gen_range(0.0..INIT_SCALE))
                .collect()
        };
        let user_factors = init(store.num_users());
        let item_factors = init(store.num_items());
        let model = FactorModel {
            config: config.clone(),
            users: store.users().clone(),
            items: store.items().clone(),
            user_factors,
            item_factors,
            user_bias: vec![0.0; store.num_users()],
            item_bias: vec![0.0; store.num_items()],
            global_mean,
            bounds: RatingBounds::of(store),
        };
        let ratings: Vec<_> = store.entries().collect();
        let order = (0..ratings.len()).collect();
        Ok(Trainer {
            model,
            ratings,
            order,
            rng,
        })
    }

    /// Runs one pass over the ratings; `epoch` only labels errors.
    pub fn epoch(&mut self, epoch: usize) -> Result<()> {
        self.order.shuffle(&mut self.rng);
        let m = &mut self.model;
        let f = m.config.factors;
        let (lr, reg, biases) = (
            m.config.learn_rate,
            m.config.regularization,
            m.config.use_biases,
        );
        for &n in &self.order {
            let (u, i, r) = self.ratings[n];
            sgd_step(
                &mut m.user_factors[u * f..(u + 1) * f],
                &mut m.item_factors[i * f..(i + 1) * f],
                &mut m.user_bias[u],
                &mut m.item_bias[i],
                m.global_mean,
                r,
                lr,
                reg,
                biases,
            );
        }
        if m.is_finite() {
            Ok(())
        } else {
            Err(Error::TrainingDiverged { epoch })
        }
    }

    /// Root mean squared error of the unclamped predictions over the training ratings.
    pub fn training_rmse(&self) -> f64 {
        let m = &self.model;
        let sse: f64 = self
            .ratings
            .iter()
            .map(|&(u, i, r)| (r - m.raw_score(u, i)).powi(2))
            .sum();
        (sse / self.ratings.len() as f64).sqrt()
    }

    pub fn model(&self) -> &FactorModel {
        &self.model
    }

    pub fn into_model(self) -> FactorModel {
        self.model
    }
}

impl FactorModel {
    pub fn config(&self) -> &FactorizationConfig {
        &self.config
    }

    pub fn factors(&self) -> usize {
        self.config.factors
    }

    pub fn global_mean(&self) -> f64 {
        self.global_mean
    }

    pub fn user_factors(&self, u: usize) -> &[f64] {
        let f = self.config.factors;
        &self.user_factors[u * f..(u + 1) * f]
    }

    pub fn item_factors(&self, i: usize) -> &[f64] {
        let f = self.config.factors;
        &self.item_factors[i * f..(i + 1) * f]
    }

    pub fn user_bias(&self, u: usize) -> f64 {
        self.user_bias[u]
    }

    pub fn item_bias(&self, i: usize) -> f64 {
        self.item_bias[i]
    }

    fn raw_score(&self, u: usize, i: usize) -> f64 {
        let dot: f64 = self
            .user_factors(u)
            .iter()
            .zip(self.item_factors(i))
            .map(|(a, b)| a * b)
            .sum();
        self.global_mean + self.user_bias[u] + self.item_bias[i] + dot
    }

    fn is_finite(&self) -> bool {
        self.user_factors
            .iter()
            .chain(&self.item_factors)
            .chain(&self.user_bias)
            .chain(&self.item_bias)
            .all(|v| v.is_finite())
    }

    /// Assembles a model from raw parameters, checking shapes.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        config: FactorizationConfig,
        users: IdMap,
        items: IdMap,
        user_factors: Vec<f64>,
        item_factors: Vec<f64>,
        user_bias: Vec<f64>,
        item_bias: Vec<f64>,
        global_mean: f64,
        bounds: RatingBounds,
    ) -> Result<Self> {
        config.validate()?;
        let f = config.factors;
        if user_factors.len() != users.len() * f
            || item_factors.len() != items.len() * f
            || user_bias.len() != users.len()
            || item_bias.len() != items.len()
        {
            return Err(Error::ModelFormat("factor matrix shape mismatch".into()));
        }
        let model = FactorModel {
            config,
            users,
            items,
            user_factors,
            item_factors,
            user_bias,
            item_bias,
            global_mean,
            bounds,
        };
        if !model.is_finite() || !global_mean.is_finite() {
            return Err(Error::ModelFormat("non-finite parameter".into()));
        }
        Ok(model)
    }
}

impl Predictor for FactorModel {
    fn users(&self) -> &IdMap {
        &self.users
    }

    fn items(&self) -> &IdMap {
        &self.items
    }

    fn estimate_indexed(&self, user: Option<usize>, item: Option<usize>) -> Estimate {
        let est = match (user, item) {
            (Some(u), Some(i)) => Estimate::model(self.raw_score(u, i)),
            (None, Some(i)) => Estimate::fallback(self.global_mean + self.item_bias[i]),
            (Some(u), None) => Estimate::fallback(self.global_mean + self.user_bias[u]),
            (None, None) => Estimate::fallback(self.global_mean),
        };
        Estimate {
            value: self.bounds.clamp(est.value),
            ..est
        }
    }

    fn algorithm(&self) -> Algorithm {
        Algorithm::FunkSvd
    }

    fn hyperparameters(&self) -> Vec<(&'static str, String)> {
        let c = &self.config;
        vec![
            ("factors", c.factors.to_string()),
            ("max_iter", c.max_iter.to_string()),
            ("learn_rate", c.learn_rate.to_string()),
            ("regularization", c.regularization.to_string()),
            ("seed", c.seed.to_string()),
            ("use_biases", c.use_biases.to_string()),
        ]
    }
}
