use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Algorithm, Estimate, FallbackChain, Predictor};
use crate::store::{Axis, IdMap, Profile, RatingBounds, RatingStore};

/// Neighborhood size used when none is given.
pub const DEFAULT_K: usize = 50;

/// Pearson correlation of two profiles over their co-rated entries.
///
/// Each side is centered by its own mean over the shared entries. Fewer
/// than two shared entries, or a constant side, gives 0.
pub fn pearson(a: Profile<'_>, b: Profile<'_>) -> f64 {
    let mut shared: Vec<(f64, f64)> = Vec::new();
    let (ia, va) = (a.indices(), a.values());
    let (ib, vb) = (b.indices(), b.values());
    let (mut x, mut y) = (0, 0);
    while x < ia.len() && y < ib.len() {
        match ia[x].cmp(&ib[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                shared.push((va[x], vb[y]));
                x += 1;
                y += 1;
            }
        }
    }
    if shared.len() < 2 {
        return 0.0;
    }
    let n = shared.len() as f64;
    let mean_a = shared.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_b = shared.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut cross, mut norm_a, mut norm_b) = (0.0, 0.0, 0.0);
    for &(ra, rb) in &shared {
        let (da, db) = (ra - mean_a, rb - mean_b);
        cross += da * db;
        norm_a += da * da;
        norm_b += db * db;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    (cross / (norm_a * norm_b).sqrt()).clamp(-1.0, 1.0)
}

/// Similarity between two entities of `store` along `axis`.
pub fn similarity(store: &RatingStore, axis: Axis, e1: usize, e2: usize) -> f64 {
    pearson(store.ratings(axis, e1), store.ratings(axis, e2))
}

/// User- or item-based k-nearest-neighbor predictor.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityModel {
    pub(crate) axis: Axis,
    pub(crate) k: usize,
    pub(crate) store: RatingStore,
    /// Per entity: every positive-similarity neighbor, best first.
    pub(crate) neighbors: Vec<Vec<(usize, f64)>>,
    pub(crate) means: Vec<f64>,
    pub(crate) fallback: FallbackChain,
    pub(crate) bounds: RatingBounds,
}

pub fn train_knn(store: &RatingStore, axis: Axis, k: usize) -> Result<SimilarityModel> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if store.is_empty() {
        return Err(Error::EmptyScope("rating store"));
    }
    let count = store.ids(axis).len();
    // Rows are independent, so the parallel result equals the sequential one.
    let neighbors = (0..count)
        .into_par_iter()
        .map(|e| {
            let profile = store.ratings(axis, e);
            let mut row: Vec<(usize, f64)> = (0..count)
                .filter(|&other| other != e)
                .map(|other| (other, pearson(profile, store.ratings(axis, other))))
                .filter(|&(_, s)| s > 0.0)
                .collect();
            sort_neighbors(&mut row);
            row
        })
        .collect();
    SimilarityModel::from_neighbors(store.clone(), axis, k, neighbors)
}

pub(crate) fn sort_neighbors(row: &mut [(usize, f64)]) {
    row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

impl SimilarityModel {
    pub(crate) fn from_neighbors(
        store: RatingStore,
        axis: Axis,
        k: usize,
        neighbors: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        let count = store.ids(axis).len();
        if neighbors.len() != count {
            return Err(Error::ModelFormat(format!(
                "expected {count} neighbor lists, found {}",
                neighbors.len()
            )));
        }
        if neighbors.iter().enumerate().any(|(e, row)| {
            row.iter()
                .any(|&(o, s)| o == e || o >= count || !s.is_finite())
        }) {
            return Err(Error::ModelFormat("invalid neighbor entry".into()));
        }
        Ok(SimilarityModel {
            axis,
            k,
            means: store.means(axis),
            fallback: FallbackChain::of(&store)?,
            bounds: RatingBounds::of(&store),
            store,
            neighbors,
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Same similarities, different neighborhood size at prediction time.
    pub fn with_k(mut self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        self.k = k;
        Ok(self)
    }

    pub fn neighbors(&self, entity: usize) -> &[(usize, f64)] {
        &self.neighbors[entity]
    }

    pub fn store(&self) -> &RatingStore {
        &self.store
    }
}

impl Predictor for SimilarityModel {
    fn users(&self) -> &IdMap {
        self.store.users()
    }

    fn items(&self) -> &IdMap {
        self.store.items()
    }

    fn estimate_indexed(&self, user: Option<usize>, item: Option<usize>) -> Estimate {
        if let (Some(u), Some(i)) = (user, item) {
            // The target entity, and the fixed counterpart whose ratings neighbors must have.
            let (target, counterpart) = match self.axis {
                Axis::User => (u, i),
                Axis::Item => (i, u),
            };
            let other_axis = self.axis.other();
            let column = self.store.ratings(other_axis, counterpart);
            let mut num = 0.0;
            let mut den = 0.0;
            let mut used = 0;
            for &(neighbor, sim) in &self.neighbors[target] {
                if used == self.k {
                    break;
                }
                if let Some(r) = column.get(neighbor) {
                    num += sim * (r - self.means[neighbor]);
                    den += sim.abs();
                    used += 1;
                }
            }
            if used > 0 {
                return Estimate::model(self.bounds.clamp(self.means[target] + num / den));
            }
        }
        Estimate::fallback(self.bounds.clamp(self.fallback.resolve(user, item)))
    }

    fn algorithm(&self) -> Algorithm {
        match self.axis {
            Axis::User => Algorithm::UserKnn,
            Axis::Item => Algorithm::ItemKnn,
        }
    }

    fn hyperparameters(&self) -> Vec<(&'static str, String)> {
        vec![("k", self.k.to_string())]
    }
}
