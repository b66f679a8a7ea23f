//! Behaviour shared by every rating predictor: lookup, fallback, ranking.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::io::RecommendationList;
use crate::store::{Axis, IdMap, RatingStore};

/// A predicted rating and whether the fallback chain produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub fallback: bool,
}

impl Estimate {
    pub fn model(value: f64) -> Self {
        Estimate {
            value,
            fallback: false,
        }
    }

    pub fn fallback(value: f64) -> Self {
        Estimate {
            value,
            fallback: true,
        }
    }
}

/// A trained model able to score any (user, item) pair.
///
/// Scoring is total: pairs the model cannot handle are answered by a
/// fallback and flagged as such.
pub trait Predictor: Send + Sync {
    /// Users known at training time.
    fn users(&self) -> &IdMap;

    /// Items known at training time; also the candidate set for ranking.
    fn items(&self) -> &IdMap;

    /// Scores dense indices; `None` marks an entity unseen in training.
    fn estimate_indexed(&self, user: Option<usize>, item: Option<usize>) -> Estimate;

    fn estimate(&self, user: &str, item: &str) -> Estimate {
        self.estimate_indexed(self.users().index(user), self.items().index(item))
    }

    fn predict(&self, user: &str, item: &str) -> f64 {
        self.estimate(user, item).value
    }

    /// Short algorithm tag, e.g. `slopeone`.
    fn algorithm(&self) -> Algorithm;

    /// Hyperparameters echoed in reports as `name=value` pairs.
    fn hyperparameters(&self) -> Vec<(&'static str, String)> {
        Vec::new()
    }
}

/// Ranks `user`'s candidate items by predicted score.
///
/// Items the user rated in `profiles` are skipped unless `include_rated`.
/// Ties keep dense-index order.
pub fn recommend<P: Predictor + ?Sized>(
    model: &P,
    profiles: &RatingStore,
    user: &str,
    n: usize,
    include_rated: bool,
) -> RecommendationList {
    let items = model.items();
    let excluded = if include_rated {
        vec![false; items.len()]
    } else {
        rated_mask(items, profiles, user)
    };
    let u = model.users().index(user);
    let mut scored: Vec<(usize, f64)> = (0..items.len())
        .filter(|&i| !excluded[i])
        .map(|i| (i, model.estimate_indexed(u, Some(i)).value))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    RecommendationList {
        user: user.to_owned(),
        items: scored
            .into_iter()
            .take(n)
            .map(|(i, _)| items.token(i).to_owned())
            .collect(),
    }
}

/// Marks the entries of `items` that `user` rated in `profiles`.
pub(crate) fn rated_mask(items: &IdMap, profiles: &RatingStore, user: &str) -> Vec<bool> {
    let mut mask = vec![false; items.len()];
    if let Ok(row) = profiles.profile(Axis::User, user) {
        for (i, _) in row.iter() {
            if let Some(idx) = items.index(profiles.items().token(i)) {
                mask[idx] = true;
            }
        }
    }
    mask
}

/// Substitute predictions: user mean, then item mean, then global mean.
#[derive(Clone, Debug, PartialEq)]
pub struct FallbackChain {
    pub user_means: Vec<f64>,
    pub item_means: Vec<f64>,
    pub global_mean: f64,
}

impl FallbackChain {
    pub fn of(store: &RatingStore) -> crate::Result<Self> {
        Ok(FallbackChain {
            user_means: store.means(Axis::User),
            item_means: store.means(Axis::Item),
            global_mean: store.global_mean()?,
        })
    }

    pub fn resolve(&self, user: Option<usize>, item: Option<usize>) -> f64 {
        match (user, item) {
            (Some(u), _) => self.user_means[u],
            (None, Some(i)) => self.item_means[i],
            (None, None) => self.global_mean,
        }
    }
}

/// The recommenders this crate can train.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    UserAvg,
    ItemAvg,
    MostPopular,
    SlopeOne,
    UserKnn,
    ItemKnn,
    FunkSvd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::UserAvg,
        Algorithm::ItemAvg,
        Algorithm::MostPopular,
        Algorithm::SlopeOne,
        Algorithm::UserKnn,
        Algorithm::ItemKnn,
        Algorithm::FunkSvd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::UserAvg => "useravg",
            Algorithm::ItemAvg => "itemavg",
            Algorithm::MostPopular => "mostpopular",
            Algorithm::SlopeOne => "slopeone",
            Algorithm::UserKnn => "userknn",
            Algorithm::ItemKnn => "itemknn",
            Algorithm::FunkSvd => "funksvd",
        }
    }

    /// Whether the algorithm predicts ratings (only MostPopular does not).
    pub fn predicts_ratings(self) -> bool {
        self != Algorithm::MostPopular
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown algorithm {s:?} (expected one of {})",
                    Algorithm::ALL.map(|a| a.name()).join(", ")
                ))
            })
    }
}
