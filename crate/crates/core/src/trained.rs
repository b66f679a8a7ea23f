use crate::baseline::{train_means, train_popularity, MeansModel, PopularityModel};
use crate::error::Result;
use crate::factorization::{train_funksvd, FactorModel, FactorizationConfig};
use crate::io::RecommendationList;
use crate::model::{rated_mask, recommend, Algorithm, Predictor};
use crate::neighborhood::{train_knn, train_slopeone, DeviationModel, SimilarityModel, DEFAULT_K};
use crate::store::{Axis, RatingStore};

/// Hyperparameters for every algorithm; each uses only its own fields.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainParams {
    pub k: usize,
    pub factorization: FactorizationConfig,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            k: DEFAULT_K,
            factorization: FactorizationConfig::default(),
        }
    }
}

/// Any trained model.
#[derive(Clone, Debug, PartialEq)]
pub enum TrainedModel {
    Means(MeansModel),
    Popularity(PopularityModel),
    SlopeOne(DeviationModel),
    Knn(SimilarityModel),
    FunkSvd(FactorModel),
}

pub fn train(
    algorithm: Algorithm,
    store: &RatingStore,
    params: &TrainParams,
) -> Result<TrainedModel> {
    Ok(match algorithm {
        Algorithm::UserAvg => TrainedModel::Means(train_means(store, Axis::User)?),
        Algorithm::ItemAvg => TrainedModel::Means(train_means(store, Axis::Item)?),
        Algorithm::MostPopular => TrainedModel::Popularity(train_popularity(store)?),
        Algorithm::SlopeOne => TrainedModel::SlopeOne(train_slopeone(store)?),
        Algorithm::UserKnn => TrainedModel::Knn(train_knn(store, Axis::User, params.k)?),
        Algorithm::ItemKnn => TrainedModel::Knn(train_knn(store, Axis::Item, params.k)?),
        Algorithm::FunkSvd => TrainedModel::FunkSvd(train_funksvd(store, &params.factorization)?),
    })
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            TrainedModel::Popularity(_) => Algorithm::MostPopular,
            other => other
                .predictor()
                .expect("non-popularity models predict")
                .algorithm(),
        }
    }

    /// The rating predictor, or `None` for recommendation-only models.
    pub fn predictor(&self) -> Option<&dyn Predictor> {
        match self {
            TrainedModel::Means(m) => Some(m),
            TrainedModel::Popularity(_) => None,
            TrainedModel::SlopeOne(m) => Some(m),
            TrainedModel::Knn(m) => Some(m),
            TrainedModel::FunkSvd(m) => Some(m),
        }
    }

    /// Top-`n` items for `user`.
    ///
    /// Rated items are looked up in `profiles` when given. Otherwise
    /// memory-based models use their own training ratings, the popularity
    /// model uses the profiles it was built with, and the rest exclude nothing.
    pub fn recommend(
        &self,
        profiles: Option<&RatingStore>,
        user: &str,
        n: usize,
        include_rated: bool,
    ) -> RecommendationList {
        let own = match self {
            TrainedModel::SlopeOne(m) => Some(m.store()),
            TrainedModel::Knn(m) => Some(m.store()),
            _ => None,
        };
        match (self, profiles.or(own)) {
            (TrainedModel::Popularity(m), None) => m.recommend(user, n, include_rated),
            (TrainedModel::Popularity(m), Some(store)) => {
                let mask = if include_rated {
                    vec![false; m.items().len()]
                } else {
                    rated_mask(m.items(), store, user)
                };
                let items = m
                    .ranking()
                    .into_iter()
                    .enumerate()
                    .filter(|&(pos, _)| !mask[m.ranked[pos]])
                    .map(|(_, t)| t)
                    .take(n)
                    .collect();
                RecommendationList {
                    user: user.to_owned(),
                    items,
                }
            }
            (model, Some(store)) => recommend(
                model.predictor().expect("predictor"),
                store,
                user,
                n,
                include_rated,
            ),
            (model, None) => {
                let empty = RatingStore::build(&[]).expect("empty store");
                recommend(
                    model.predictor().expect("predictor"),
                    &empty,
                    user,
                    n,
                    include_rated,
                )
            }
        }
    }
}
