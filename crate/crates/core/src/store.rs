//! Sparse rating storage with user-major and item-major views.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the rating matrix an operation works along.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    User,
    Item,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::User => Axis::Item,
            Axis::Item => Axis::User,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::User => "user",
            Axis::Item => "item",
        })
    }
}

/// One observed rating.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingTriple {
    pub user: String,
    pub item: String,
    pub rating: f64,
}

impl RatingTriple {
    pub fn new(user: impl Into<String>, item: impl Into<String>, rating: f64) -> Self {
        RatingTriple {
            user: user.into(),
            item: item.into(),
            rating,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.user.is_empty() || self.item.is_empty() {
            return Err(Error::InvalidTriple(format!(
                "empty identifier in ({:?}, {:?})",
                self.user, self.item
            )));
        }
        if !self.rating.is_finite() {
            return Err(Error::InvalidTriple(format!(
                "non-finite rating {} for ({:?}, {:?})",
                self.rating, self.user, self.item
            )));
        }
        Ok(())
    }
}

/// Bidirectional mapping between external tokens and dense indices.
///
/// Indices are handed out in first-seen order starting at zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMap {
    forward: HashMap<String, usize>,
    backward: Vec<String>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a map from tokens listed in index order.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut map = IdMap::new();
        for token in tokens {
            let token = token.into();
            if map.forward.contains_key(&token) {
                return Err(Error::ModelFormat(format!("repeated identifier {token:?}")));
            }
            map.insert(token);
        }
        Ok(map)
    }

    fn insert(&mut self, token: String) -> usize {
        let idx = self.backward.len();
        self.forward.insert(token.clone(), idx);
        self.backward.push(token);
        idx
    }

    pub fn get_or_insert(&mut self, token: &str) -> usize {
        match self.forward.get(token) {
            Some(&idx) => idx,
            None => self.insert(token.to_owned()),
        }
    }

    pub fn index(&self, token: &str) -> Option<usize> {
        self.forward.get(token).copied()
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.backward[idx]
    }

    pub fn tokens(&self) -> &[String] {
        &self.backward
    }

    pub fn len(&self) -> usize {
        self.backward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backward.is_empty()
    }
}

/// Borrowed view of one user's row or one item's column.
///
/// Entries are sorted by counterpart index.
#[derive(Clone, Copy, Debug)]
pub struct Profile<'a> {
    indices: &'a [usize],
    values: &'a [f64],
}

impl<'a> Profile<'a> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &'a [usize] {
        self.indices
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (usize, f64)> + 'a {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, idx: usize) -> Option<f64> {
        self.indices
            .binary_search(&idx)
            .ok()
            .map(|pos| self.values[pos])
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.indices.binary_search(&idx).is_ok()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Mean of the profile; `None` when empty.
    pub fn mean(&self) -> Option<f64> {
        if self.is_empty() {
            None
        } else {
            Some(self.sum() / self.len() as f64)
        }
    }

    pub fn to_vec(&self) -> Vec<(usize, f64)> {
        self.iter().collect()
    }
}

/// Compressed row storage: `offsets[r]..offsets[r + 1]` spans row `r`.
#[derive(Clone, Debug, Default, PartialEq)]
struct Compressed {
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Compressed {
    /// `entries` must be sorted by (row, column).
    fn from_sorted(rows: usize, entries: impl Iterator<Item = (usize, usize, f64)>) -> Self {
        let mut out = Compressed {
            offsets: vec![0; rows + 1],
            ..Default::default()
        };
        for (row, col, value) in entries {
            out.offsets[row + 1] += 1;
            out.indices.push(col);
            out.values.push(value);
        }
        for r in 0..rows {
            out.offsets[r + 1] += out.offsets[r];
        }
        out
    }

    fn row(&self, r: usize) -> Profile<'_> {
        let span = self.offsets[r]..self.offsets[r + 1];
        Profile {
            indices: &self.indices[span.clone()],
            values: &self.values[span],
        }
    }

    fn rows(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Scope selector for [`RatingStore::mean`].
#[derive(Clone, Copy, Debug)]
pub enum MeanScope<'a> {
    Global,
    User(&'a str),
    Item(&'a str),
}

/// Immutable, dual-indexed sparse rating matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RatingStore {
    users: IdMap,
    items: IdMap,
    by_user: Compressed,
    by_item: Compressed,
    rating_min: f64,
    rating_max: f64,
}

impl RatingStore {
    /// Builds a store from triples; dense indices follow first-seen order.
    pub fn build<'a, I>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a RatingTriple>,
    {
        let mut users = IdMap::new();
        let mut items = IdMap::new();
        let mut entries = Vec::new();
        for t in triples {
            t.validate()?;
            let u = users.get_or_insert(&t.user);
            let i = items.get_or_insert(&t.item);
            entries.push((u, i, t.rating));
        }
        Self::from_parts(users, items, entries)
    }

    /// Assembles a store from pre-assigned index maps and `(user, item, rating)` entries.
    pub fn from_parts(
        users: IdMap,
        items: IdMap,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(u, i, r) in &entries {
            if u >= users.len() || i >= items.len() {
                return Err(Error::ModelFormat(format!(
                    "rating entry ({u}, {i}) out of range"
                )));
            }
            if !r.is_finite() {
                return Err(Error::InvalidTriple(format!(
                    "non-finite rating {r} for ({:?}, {:?})",
                    users.token(u),
                    items.token(i)
                )));
            }
        }
        entries.sort_by_key(|&(u, i, _)| (u, i));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::DuplicateRating {
                user: users.token(w[0].0).to_owned(),
                item: items.token(w[0].1).to_owned(),
            });
        }

        let (rating_min, rating_max) = entries.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), &(_, _, r)| (lo.min(r), hi.max(r)),
        );
        let (rating_min, rating_max) = if entries.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (rating_min, rating_max)
        };

        let by_user = Compressed::from_sorted(users.len(), entries.iter().copied());
        // A stable sort by item keeps users ascending within each item.
        let mut transposed: Vec<_> = entries.iter().map(|&(u, i, r)| (i, u, r)).collect();
        transposed.sort_by_key(|&(i, _, _)| i);
        let by_item = Compressed::from_sorted(items.len(), transposed.into_iter());

        Ok(RatingStore {
            users,
            items,
            by_user,
            by_item,
            rating_min,
            rating_max,
        })
    }

    pub fn users(&self) -> &IdMap {
        &self.users
    }

    pub fn items(&self) -> &IdMap {
        &self.items
    }

    pub fn ids(&self, axis: Axis) -> &IdMap {
        match axis {
            Axis::User => &self.users,
            Axis::Item => &self.items,
        }
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn len(&self) -> usize {
        self.by_user.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest observed rating (NaN for an empty store).
    pub fn rating_min(&self) -> f64 {
        self.rating_min
    }

    /// Largest observed rating (NaN for an empty store).
    pub fn rating_max(&self) -> f64 {
        self.rating_max
    }

    pub fn user_ratings(&self, user: usize) -> Profile<'_> {
        self.by_user.row(user)
    }

    pub fn item_ratings(&self, item: usize) -> Profile<'_> {
        self.by_item.row(item)
    }

    /// Row (user axis) or column (item axis) of a dense index.
    pub fn ratings(&self, axis: Axis, idx: usize) -> Profile<'_> {
        match axis {
            Axis::User => self.by_user.row(idx),
            Axis::Item => self.by_item.row(idx),
        }
    }

    /// Profile of an entity by external token.
    pub fn profile(&self, axis: Axis, token: &str) -> Result<Profile<'_>> {
        let idx = self
            .ids(axis)
            .index(token)
            .ok_or_else(|| Error::UnknownEntity {
                axis,
                token: token.to_owned(),
            })?;
        Ok(self.ratings(axis, idx))
    }

    pub fn rating(&self, user: usize, item: usize) -> Option<f64> {
        self.user_ratings(user).get(item)
    }

    /// All ratings as `(user, item, rating)` in user-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.by_user.rows())
            .flat_map(move |u| self.user_ratings(u).iter().map(move |(i, r)| (u, i, r)))
    }

    pub fn triples(&self) -> impl Iterator<Item = RatingTriple> + '_ {
        self.entries()
            .map(|(u, i, r)| RatingTriple::new(self.users.token(u), self.items.token(i), r))
    }

    pub fn global_mean(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyScope("rating store"));
        }
        Ok(self.by_user.values.iter().sum::<f64>() / self.len() as f64)
    }

    pub fn mean(&self, scope: MeanScope<'_>) -> Result<f64> {
        let (axis, token) = match scope {
            MeanScope::Global => return self.global_mean(),
            MeanScope::User(t) => (Axis::User, t),
            MeanScope::Item(t) => (Axis::Item, t),
        };
        self.profile(axis, token)?
            .mean()
            .ok_or(Error::EmptyScope(match axis {
                Axis::User => "user profile",
                Axis::Item => "item profile",
            }))
    }

    /// Per-entity means along an axis, in dense-index order.
    pub fn means(&self, axis: Axis) -> Vec<f64> {
        (0..self.ids(axis).len())
            .map(|idx| self.ratings(axis, idx).mean().unwrap_or(f64::NAN))
            .collect()
    }

    /// Clamps a value into the observed rating range.
    pub fn clamp(&self, value: f64) -> f64 {
        RatingBounds::of(self).clamp(value)
    }
}

/// Observed rating range carried by trained models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingBounds {
    pub min: f64,
    pub max: f64,
}

impl RatingBounds {
    pub fn of(store: &RatingStore) -> Self {
        RatingBounds {
            min: store.rating_min(),
            max: store.rating_max(),
        }
    }

    pub fn clamp(&self, value: f64) -> f64 {
        if value < self.min {
            self.min
        } else if value > self.max {
            self.max
        } else {
            value
        }
    }
}
