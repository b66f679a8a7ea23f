//! Average-rating predictors and the most-popular recommender.

use crate::error::{Error, Result};
use crate::io::RecommendationList;
use crate::model::{Algorithm, Estimate, Predictor};
use crate::store::{Axis, IdMap, RatingBounds, RatingStore};

/// Predicts a user's (or an item's) mean rating.
#[derive(Clone, Debug, PartialEq)]
pub struct MeansModel {
    pub(crate) axis: Axis,
    pub(crate) users: IdMap,
    pub(crate) items: IdMap,
    /// Indexed by the dense ids of `axis`.
    pub(crate) means: Vec<f64>,
    pub(crate) global_mean: f64,
    pub(crate) bounds: RatingBounds,
}

pub fn train_means(store: &RatingStore, axis: Axis) -> Result<MeansModel> {
    let global_mean = store.global_mean()?;
    Ok(MeansModel {
        axis,
        users: store.users().clone(),
        items: store.items().clone(),
        means: store.means(axis),
        global_mean,
        bounds: RatingBounds::of(store),
    })
}

impl MeansModel {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn global_mean(&self) -> f64 {
        self.global_mean
    }

    pub fn mean_of(&self, token: &str) -> Option<f64> {
        self.ids().index(token).map(|idx| self.means[idx])
    }

    fn ids(&self) -> &IdMap {
        match self.axis {
            Axis::User => &self.users,
            Axis::Item => &self.items,
        }
    }
}

impl Predictor for MeansModel {
    fn users(&self) -> &IdMap {
        &self.users
    }

    fn items(&self) -> &IdMap {
        &self.items
    }

    fn estimate_indexed(&self, user: Option<usize>, item: Option<usize>) -> Estimate {
        let key = match self.axis {
            Axis::User => user,
            Axis::Item => item,
        };
        match key {
            Some(idx) => Estimate::model(self.bounds.clamp(self.means[idx])),
            None => Estimate::fallback(self.bounds.clamp(self.global_mean)),
        }
    }

    fn algorithm(&self) -> Algorithm {
        match self.axis {
            Axis::User => Algorithm::UserAvg,
            Axis::Item => Algorithm::ItemAvg,
        }
    }
}

/// Ranks items by how many ratings they received.
#[derive(Clone, Debug, PartialEq)]
pub struct PopularityModel {
    pub(crate) items: IdMap,
    /// Dense item indices, most rated first.
    pub(crate) ranked: Vec<usize>,
    pub(crate) users: IdMap,
    /// Per user, the sorted dense indices of rated items.
    pub(crate) rated_by: Vec<Vec<usize>>,
}

pub fn train_popularity(store: &RatingStore) -> Result<PopularityModel> {
    if store.is_empty() {
        return Err(Error::EmptyScope("rating store"));
    }
    let mut ranked: Vec<usize> = (0..store.num_items()).collect();
    // Stable sort keeps ascending dense index among equal counts.
    ranked.sort_by_key(|&i| std::cmp::Reverse(store.item_ratings(i).len()));
    let rated_by = (0..store.num_users())
        .map(|u| store.user_ratings(u).indices().to_vec())
        .collect();
    Ok(PopularityModel {
        items: store.items().clone(),
        ranked,
        users: store.users().clone(),
        rated_by,
    })
}

impl PopularityModel {
    /// Rebuilds a model from a stored ranking.
    ///
    /// Rated-item exclusion uses `profiles` when given; without it every
    /// user is treated as unknown.
    pub fn from_ranking(ranking: &[String], profiles: Option<&RatingStore>) -> Result<Self> {
        let items = IdMap::from_tokens(ranking.iter().cloned())?;
        let ranked = (0..items.len()).collect();
        let (users, rated_by) = match profiles {
            Some(store) => {
                let rated_by = (0..store.num_users())
                    .map(|u| {
                        let mut idx: Vec<usize> = store
                            .user_ratings(u)
                            .indices()
                            .iter()
                            .filter_map(|&i| items.index(store.items().token(i)))
                            .collect();
                        idx.sort_unstable();
                        idx
                    })
                    .collect();
                (store.users().clone(), rated_by)
            }
            None => (IdMap::new(), Vec::new()),
        };
        Ok(PopularityModel {
            items,
            ranked,
            users,
            rated_by,
        })
    }

    /// Item tokens from most to least popular.
    pub fn ranking(&self) -> Vec<String> {
        self.ranked
            .iter()
            .map(|&i| self.items.token(i).to_owned())
            .collect()
    }

    pub fn recommend(&self, user: &str, n: usize, include_rated: bool) -> RecommendationList {
        let rated: &[usize] = match (include_rated, self.users.index(user)) {
            (false, Some(u)) => &self.rated_by[u],
            _ => &[],
        };
        let items = self
            .ranked
            .iter()
            .filter(|i| rated.binary_search(i).is_err())
            .take(n)
            .map(|&i| self.items.token(i).to_owned())
            .collect();
        RecommendationList {
            user: user.to_owned(),
            items,
        }
    }

    pub fn items(&self) -> &IdMap {
        &self.items
    }
}
