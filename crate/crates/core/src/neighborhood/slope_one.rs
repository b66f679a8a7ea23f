use crate::error::{Error, Result};
use crate::model::{Algorithm, Estimate, FallbackChain, Predictor};
use crate::store::{IdMap, RatingBounds, RatingStore};

/// Weighted Slope One: average pairwise item deviations plus co-rating counts.
///
/// Only pairs `i < j` are stored; `dev(j, i)` is `-dev(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationModel {
    pub(crate) store: RatingStore,
    pub(crate) deviations: Vec<f64>,
    pub(crate) counts: Vec<u32>,
    pub(crate) fallback: FallbackChain,
    pub(crate) bounds: RatingBounds,
}

/// Position of the pair `(i, j)`, `i < j`, in a packed upper triangle over `n` items.
#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub fn train_slopeone(store: &RatingStore) -> Result<DeviationModel> {
    if store.is_empty() {
        return Err(Error::EmptyScope("rating store"));
    }
    let n = store.num_items();
    let pairs = n * n.saturating_sub(1) / 2;
    let mut sums = vec![0.0f64; pairs];
    let mut counts = vec![0u32; pairs];
    for u in 0..store.num_users() {
        let row = store.user_ratings(u);
        let (idx, val) = (row.indices(), row.values());
        for a in 0..idx.len() {
            let base = idx[a] * (2 * n - idx[a] - 1) / 2;
            for b in a + 1..idx.len() {
                let slot = base + (idx[b] - idx[a] - 1);
                sums[slot] += val[a] - val[b];
                counts[slot] += 1;
            }
        }
    }
    let deviations = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    Ok(DeviationModel {
        store: store.clone(),
        deviations,
        counts,
        fallback: FallbackChain::of(store)?,
        bounds: RatingBounds::of(store),
    })
}

impl DeviationModel {
    pub(crate) fn from_pairs(
        store: RatingStore,
        pairs: impl IntoIterator<Item = (usize, usize, u32, f64)>,
    ) -> Result<Self> {
        let n = store.num_items();
        let len = n * n.saturating_sub(1) / 2;
        let mut deviations = vec![0.0; len];
        let mut counts = vec![0; len];
        for (i, j, c, d) in pairs {
            if i >= j || j >= n || c == 0 {
                return Err(Error::ModelFormat(format!(
                    "bad deviation entry ({i}, {j}, {c})"
                )));
            }
            let slot = packed(n, i, j);
            deviations[slot] = d;
            counts[slot] = c;
        }
        Ok(DeviationModel {
            fallback: FallbackChain::of(&store)?,
            bounds: RatingBounds::of(&store),
            store,
            deviations,
            counts,
        })
    }

    /// Average deviation `dev(i, j)` and co-rating count; `None` when no user rated both.
    pub fn deviation(&self, i: usize, j: usize) -> Option<(f64, u32)> {
        let n = self.store.num_items();
        if i == j || i >= n || j >= n {
            return None;
        }
        let (slot, sign) = if i < j {
            (packed(n, i, j), 1.0)
        } else {
            (packed(n, j, i), -1.0)
        };
        match self.counts[slot] {
            0 => None,
            c => Some((sign * self.deviations[slot], c)),
        }
    }

    /// Stored pairs `(i, j, count, dev)` with `i < j`, in packed order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, u32, f64)> + '_ {
        let n = self.store.num_items();
        (0..n).flat_map(move |i| {
            (i + 1..n).filter_map(move |j| {
                let slot = packed(n, i, j);
                let c = self.counts[slot];
                (c > 0).then(|| (i, j, c, self.deviations[slot]))
            })
        })
    }

    pub fn store(&self) -> &RatingStore {
        &self.store
    }
}

impl Predictor for DeviationModel {
    fn users(&self) -> &IdMap {
        self.store.users()
    }

    fn items(&self) -> &IdMap {
        self.store.items()
    }

    fn estimate_indexed(&self, user: Option<usize>, item: Option<usize>) -> Estimate {
        if let (Some(u), Some(i)) = (user, item) {
            let mut num = 0.0;
            let mut den = 0.0;
            for (j, r_uj) in self.store.user_ratings(u).iter() {
                if let Some((d, c)) = self.deviation(i, j) {
                    num += c as f64 * (d + r_uj);
                    den += c as f64;
                }
            }
            if den > 0.0 {
                return Estimate::model(self.bounds.clamp(num / den));
            }
        }
        Estimate::fallback(self.bounds.clamp(self.fallback.resolve(user, item)))
    }

    fn algorithm(&self) -> Algorithm {
        Algorithm::SlopeOne
    }
}
