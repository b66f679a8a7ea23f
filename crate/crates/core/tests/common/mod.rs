//! Dense-matrix reference implementations and random small stores.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reclab::factorization::FactorizationConfig;
use reclab::neighborhood::similarity;
use reclab::{train, Algorithm, Axis, RatingStore, RatingTriple, TrainParams, TrainedModel};

/// MovieLens 100K directory: `RECLAB_ML100K`, else `data/ml-100k` at the workspace root.
pub fn ml100k_dir() -> PathBuf {
    std::env::var_os("RECLAB_ML100K")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ml-100k"))
}

pub const TOLERANCE: f64 = 1e-9;
pub const UNKNOWN: &str = "never-seen";

/// Ratings as a dense matrix; rows and columns follow first-seen order.
pub struct Dense {
    pub users: Vec<String>,
    pub items: Vec<String>,
    pub r: Vec<Vec<Option<f64>>>,
}

impl Dense {
    pub fn new(triples: &[RatingTriple]) -> Dense {
        let mut users: Vec<String> = Vec::new();
        let mut items: Vec<String> = Vec::new();
        for t in triples {
            if !users.contains(&t.user) {
                users.push(t.user.clone());
            }
            if !items.contains(&t.item) {
                items.push(t.item.clone());
            }
        }
        let mut r = vec![vec![None; items.len()]; users.len()];
        for t in triples {
            let u = users.iter().position(|x| *x == t.user).unwrap();
            let i = items.iter().position(|x| *x == t.item).unwrap();
            r[u][i] = Some(t.rating);
        }
        Dense { users, items, r }
    }

    pub fn user(&self, token: &str) -> Option<usize> {
        self.users.iter().position(|x| x == token)
    }

    pub fn item(&self, token: &str) -> Option<usize> {
        self.items.iter().position(|x| x == token)
    }

    fn all(&self) -> Vec<f64> {
        self.r.iter().flatten().flatten().copied().collect()
    }

    /// Ratings of entity `e` along `axis`, indexed by the other axis.
    pub fn vector(&self, axis: Axis, e: usize) -> Vec<Option<f64>> {
        match axis {
            Axis::User => self.r[e].clone(),
            Axis::Item => self.r.iter().map(|row| row[e]).collect(),
        }
    }

    pub fn count(&self, axis: Axis) -> usize {
        match axis {
            Axis::User => self.users.len(),
            Axis::Item => self.items.len(),
        }
    }

    pub fn global_mean(&self) -> f64 {
        let all = self.all();
        all.iter().sum::<f64>() / all.len() as f64
    }

    pub fn mean(&self, axis: Axis, e: usize) -> f64 {
        let v: Vec<f64> = self.vector(axis, e).into_iter().flatten().collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    pub fn clamp(&self, x: f64) -> f64 {
        let all = self.all();
        let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        x.max(lo).min(hi)
    }

    pub fn fallback(&self, u: Option<usize>, i: Option<usize>) -> f64 {
        let v = match (u, i) {
            (Some(u), _) => self.mean(Axis::User, u),
            (None, Some(i)) => self.mean(Axis::Item, i),
            (None, None) => self.global_mean(),
        };
        self.clamp(v)
    }

    pub fn average(&self, axis: Axis, u: Option<usize>, i: Option<usize>) -> (f64, bool) {
        let key = match axis {
            Axis::User => u,
            Axis::Item => i,
        };
        match key {
            Some(e) => (self.clamp(self.mean(axis, e)), false),
            None => (self.clamp(self.global_mean()), true),
        }
    }

    /// Items by rating count, most first; ties by first appearance.
    pub fn popularity(&self) -> Vec<String> {
        let counts: Vec<usize> = (0..self.items.len())
            .map(|i| self.r.iter().filter(|row| row[i].is_some()).count())
            .collect();
        let mut out = Vec::new();
        let max = counts.iter().copied().max().unwrap_or(0);
        for c in (0..=max).rev() {
            for (i, _) in counts.iter().enumerate().filter(|&(_, &n)| n == c) {
                out.push(self.items[i].clone());
            }
        }
        out
    }

    pub fn deviation(&self, i: usize, j: usize) -> Option<(f64, usize)> {
        let diffs: Vec<f64> = self
            .r
            .iter()
            .filter_map(|row| Some(row[i]? - row[j]?))
            .collect();
        if i == j || diffs.is_empty() {
            return None;
        }
        Some((diffs.iter().sum::<f64>() / diffs.len() as f64, diffs.len()))
    }

    pub fn slope_one(&self, u: Option<usize>, i: Option<usize>) -> (f64, bool) {
        if let (Some(u), Some(i)) = (u, i) {
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..self.items.len() {
                if let (Some(r), Some((d, c))) = (self.r[u][j], self.deviation(i, j)) {
                    num += c as f64 * (d + r);
                    den += c as f64;
                }
            }
            if den > 0.0 {
                return (self.clamp(num / den), false);
            }
        }
        (self.fallback(u, i), true)
    }

    pub fn similarity(&self, axis: Axis, a: usize, b: usize) -> f64 {
        pearson(&self.vector(axis, a), &self.vector(axis, b))
    }

    /// Positive-similarity neighbors of `e`, best first, ties by index.
    pub fn neighbors(&self, axis: Axis, e: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = (0..self.count(axis))
            .filter(|&o| o != e)
            .map(|o| (o, self.similarity(axis, e, o)))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out
    }

    pub fn knn(&self, axis: Axis, k: usize, u: Option<usize>, i: Option<usize>) -> (f64, bool) {
        if let (Some(u), Some(i)) = (u, i) {
            let (target, counterpart) = match axis {
                Axis::User => (u, i),
                Axis::Item => (i, u),
            };
            let rating_of = |o: usize| match axis {
                Axis::User => self.r[o][counterpart],
                Axis::Item => self.r[counterpart][o],
            };
            let chosen: Vec<(usize, f64, f64)> = self
                .neighbors(axis, target)
                .into_iter()
                .filter_map(|(o, s)| rating_of(o).map(|r| (o, s, r)))
                .take(k)
                .collect();
            if !chosen.is_empty() {
                let num: f64 = chosen
                    .iter()
                    .map(|&(o, s, r)| s * (r - self.mean(axis, o)))
                    .sum();
                let den: f64 = chosen.iter().map(|&(_, s, _)| s.abs()).sum();
                return (self.clamp(self.mean(axis, target) + num / den), false);
            }
        }
        (self.fallback(u, i), true)
    }
}

/// Pearson correlation over the entries both vectors have.
pub fn pearson(a: &[Option<f64>], b: &[Option<f64>]) -> f64 {
    let shared: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .collect();
    if shared.len() < 2 {
        return 0.0;
    }
    let n = shared.len() as f64;
    let ma = shared.iter().map(|p| p.0).sum::<f64>() / n;
    let mb = shared.iter().map(|p| p.1).sum::<f64>() / n;
    let cross: f64 = shared.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum();
    let na: f64 = shared.iter().map(|p| (p.0 - ma).powi(2)).sum();
    let nb: f64 = shared.iter().map(|p| (p.1 - mb).powi(2)).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (cross / (na * nb).sqrt()).clamp(-1.0, 1.0)
}

/// Straightforward re-implementation of seeded SGD training.
pub struct FactorOracle {
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub bu: Vec<f64>,
    pub bi: Vec<f64>,
    pub mu: f64,
}

impl FactorOracle {
    pub fn train(d: &Dense, cfg: &FactorizationConfig) -> FactorOracle {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let f = cfg.factors;
        let mut init = |rows: usize| -> Vec<Vec<f64>> {
            (0..rows)
                .map(|_| (0..f).map(|_| rng.gen_range(0.0..0.1)).collect())
                .collect()
        };
        let p = init(d.users.len());
        let q = init(d.items.len());
        let mut m = FactorOracle {
            p,
            q,
            bu: vec![0.0; d.users.len()],
            bi: vec![0.0; d.items.len()],
            mu: d.global_mean(),
        };
        let mut ratings = Vec::new();
        for (u, row) in d.r.iter().enumerate() {
            for (i, r) in row.iter().enumerate() {
                if let Some(r) = r {
                    ratings.push((u, i, *r));
                }
            }
        }
        let mut order: Vec<usize> = (0..ratings.len()).collect();
        for _ in 0..cfg.max_iter {
            order.shuffle(&mut rng);
            for &n in &order {
                let (u, i, r) = ratings[n];
                let e = r - m.raw(u, i);
                let (lr, reg) = (cfg.learn_rate, cfg.regularization);
                if cfg.use_biases {
                    m.bu[u] += lr * (e - reg * m.bu[u]);
                    m.bi[i] += lr * (e - reg * m.bi[i]);
                }
                let (pu, qi) = (m.p[u].clone(), m.q[i].clone());
                for k in 0..f {
                    m.p[u][k] += lr * (e * qi[k] - reg * pu[k]);
                    m.q[i][k] += lr * (e * pu[k] - reg * qi[k]);
                }
            }
        }
        m
    }

    fn raw(&self, u: usize, i: usize) -> f64 {
        let dot: f64 = self.p[u].iter().zip(&self.q[i]).map(|(a, b)| a * b).sum();
        self.mu + self.bu[u] + self.bi[i] + dot
    }

    pub fn predict(&self, d: &Dense, u: Option<usize>, i: Option<usize>) -> (f64, bool) {
        match (u, i) {
            (Some(u), Some(i)) => (d.clamp(self.raw(u, i)), false),
            (Some(u), None) => (d.clamp(self.mu + self.bu[u]), true),
            (None, Some(i)) => (d.clamp(self.mu + self.bi[i]), true),
            (None, None) => (d.clamp(self.mu), true),
        }
    }
}

/// A random store with at most 8 users and 8 items, half-star ratings.
pub fn random_triples(seed: u64) -> Vec<RatingTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = rng.gen_range(1..=8);
    let items = rng.gen_range(1..=8);
    let density = rng.gen_range(0.2..1.0);
    let mut out = Vec::new();
    for u in 0..users {
        for i in 0..items {
            if rng.gen_bool(density) {
                let r = rng.gen_range(2..=10) as f64 / 2.0;
                out.push(RatingTriple::new(format!("u{u}"), format!("i{i}"), r));
            }
        }
    }
    if out.is_empty() {
        out.push(RatingTriple::new("u0", "i0", 3.0));
    }
    out.shuffle(&mut rng);
    out
}

/// Hyperparameters drawn from `seed` for oracle comparison.
pub fn random_params(seed: u64) -> TrainParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    TrainParams {
        k: rng.gen_range(1..=6),
        factorization: FactorizationConfig {
            factors: rng.gen_range(1..=4),
            max_iter: rng.gen_range(1..=20),
            learn_rate: 0.01,
            regularization: rng.gen_range(0.0..0.2),
            seed: rng.gen(),
            use_biases: rng.gen_bool(0.7),
        },
    }
}

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= TOLERANCE
}

/// Checks every algorithm against its oracle on all known and unknown pairs.
pub fn check_against_oracles(triples: &[RatingTriple], params: &TrainParams) -> Result<(), String> {
    let store = RatingStore::build(triples).map_err(|e| e.to_string())?;
    let d = Dense::new(triples);
    let factor = FactorOracle::train(&d, &params.factorization);
    let mut users: Vec<&str> = d.users.iter().map(String::as_str).collect();
    users.push(UNKNOWN);
    let mut items: Vec<&str> = d.items.iter().map(String::as_str).collect();
    items.push(UNKNOWN);

    for alg in Algorithm::ALL {
        let model = train(alg, &store, params).map_err(|e| format!("{alg}: {e}"))?;
        if alg == Algorithm::MostPopular {
            check_popularity(&model, &d, &store)?;
            continue;
        }
        let pred = model.predictor().expect("rating predictor");
        for &u in &users {
            for &i in &items {
                let (ui, ii) = (d.user(u), d.item(i));
                let (want, fallback) = match alg {
                    Algorithm::UserAvg => d.average(Axis::User, ui, ii),
                    Algorithm::ItemAvg => d.average(Axis::Item, ui, ii),
                    Algorithm::SlopeOne => d.slope_one(ui, ii),
                    Algorithm::UserKnn => d.knn(Axis::User, params.k, ui, ii),
                    Algorithm::ItemKnn => d.knn(Axis::Item, params.k, ui, ii),
                    Algorithm::FunkSvd => factor.predict(&d, ui, ii),
                    Algorithm::MostPopular => unreachable!(),
                };
                let got = pred.estimate(u, i);
                if !close(got.value, want) || got.fallback != fallback {
                    return Err(format!(
                        "{alg} ({u}, {i}): got {:?} want ({want}, fallback {fallback})",
                        got
                    ));
                }
                if !(store.rating_min() <= got.value && got.value <= store.rating_max()) {
                    return Err(format!("{alg} ({u}, {i}): {} outside bounds", got.value));
                }
            }
        }
    }
    Ok(())
}

fn check_popularity(model: &TrainedModel, d: &Dense, store: &RatingStore) -> Result<(), String> {
    let TrainedModel::Popularity(pop) = model else {
        return Err("popularity model expected".into());
    };
    let want = d.popularity();
    if pop.ranking() != want {
        return Err(format!("ranking {:?} want {want:?}", pop.ranking()));
    }
    for (u, token) in d.users.iter().enumerate() {
        let list = model.recommend(Some(store), token, d.items.len(), false);
        let expected: Vec<String> = want
            .iter()
            .filter(|it| d.r[u][d.item(it).unwrap()].is_none())
            .cloned()
            .collect();
        if list.items != expected {
            return Err(format!("{token}: {:?} want {expected:?}", list.items));
        }
    }
    Ok(())
}

/// `dev(i, j) = -dev(j, i)` exactly, with equal counts.
pub fn check_antisymmetry(store: &RatingStore) -> Result<(), String> {
    let TrainedModel::SlopeOne(m) =
        train(Algorithm::SlopeOne, store, &TrainParams::default()).unwrap()
    else {
        unreachable!()
    };
    let n = store.num_items();
    for i in 0..n {
        for j in 0..n {
            match (m.deviation(i, j), m.deviation(j, i)) {
                (None, None) => {}
                (Some((a, ca)), Some((b, cb))) if a + b == 0.0 && ca == cb => {}
                other => return Err(format!("pair ({i}, {j}): {other:?}")),
            }
        }
    }
    Ok(())
}

/// Symmetric to 1e-12 and bounded by 1 + 1e-9 on both axes.
pub fn check_similarity(store: &RatingStore) -> Result<(), String> {
    for axis in [Axis::User, Axis::Item] {
        let n = store.ids(axis).len();
        for a in 0..n {
            for b in 0..n {
                let (s, t) = (similarity(store, axis, a, b), similarity(store, axis, b, a));
                if (s - t).abs() > 1e-12 || s.abs() > 1.0 + 1e-9 {
                    return Err(format!("{axis} ({a}, {b}): {s} vs {t}"));
                }
            }
        }
    }
    Ok(())
}

/// Mean absolute and root mean squared error, computed in two separate passes.
pub fn two_pass_metrics(pairs: &[(f64, f64)]) -> (f64, f64) {
    let mut abs = 0.0;
    for (a, p) in pairs {
        abs += (a - p).abs();
    }
    let mut sq = 0.0;
    for (a, p) in pairs {
        sq += (a - p) * (a - p);
    }
    let n = pairs.len() as f64;
    (abs / n, (sq / n).sqrt())
}

/// Implied gradient from one SGD step against central differences of the per-rating loss.
///
/// Returns the largest relative error over every parameter touched by the step.
pub fn gradient_check(
    p: &[f64],
    q: &[f64],
    b_u: f64,
    b_i: f64,
    mu: f64,
    rating: f64,
    regularization: f64,
) -> f64 {
    let lr = 1e-3;
    let (mut p1, mut q1, mut bu1, mut bi1) = (p.to_vec(), q.to_vec(), b_u, b_i);
    reclab::factorization::sgd_step(
        &mut p1,
        &mut q1,
        &mut bu1,
        &mut bi1,
        mu,
        rating,
        lr,
        regularization,
        true,
    );
    let mut implied: Vec<f64> = p1.iter().zip(p).map(|(n, o)| (o - n) / lr).collect();
    implied.extend(q1.iter().zip(q).map(|(n, o)| (o - n) / lr));
    implied.push((b_u - bu1) / lr);
    implied.push((b_i - bi1) / lr);

    let f = p.len();
    let mut theta: Vec<f64> = p.iter().chain(q).copied().collect();
    theta.push(b_u);
    theta.push(b_i);
    let loss = |t: &[f64]| {
        let (pp, rest) = t.split_at(f);
        let (qq, b) = rest.split_at(f);
        let dot: f64 = pp.iter().zip(qq).map(|(a, b)| a * b).sum();
        let e = rating - (mu + b[0] + b[1] + dot);
        let norm: f64 = t.iter().map(|v| v * v).sum();
        0.5 * e * e + 0.5 * regularization * norm
    };
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..theta.len() {
        let mut plus = theta.clone();
        let mut minus = theta.clone();
        plus[k] += h;
        minus[k] -= h;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
        let scale = numeric.abs().max(implied[k].abs()).max(1e-6);
        worst = worst.max((numeric - implied[k]).abs() / scale);
    }
    worst
}

/// Largest gradient-check error over a 3-rating store after a few epochs.
pub fn three_rating_gradient_error() -> f64 {
    let triples = [("x", "a", 4.0), ("x", "b", 2.0), ("y", "a", 5.0)]
        .map(|(u, i, r)| RatingTriple::new(u, i, r));
    let store = RatingStore::build(&triples).unwrap();
    let config = FactorizationConfig {
        factors: 4,
        max_iter: 5,
        regularization: 0.1,
        ..FactorizationConfig::default()
    };
    let mut trainer = reclab::factorization::Trainer::new(&store, &config).unwrap();
    for epoch in 1..=config.max_iter {
        trainer.epoch(epoch).unwrap();
    }
    let m = trainer.model();
    store
        .entries()
        .map(|(u, i, r)| {
            gradient_check(
                m.user_factors(u),
                m.item_factors(i),
                m.user_bias(u),
                m.item_bias(i),
                m.global_mean(),
                r,
                config.regularization,
            )
        })
        .fold(0.0, f64::max)
}
