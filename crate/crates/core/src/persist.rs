//! Versioned json model files.
//!
//! Every file is one object with `version`, `kind` and an optional
//! `train_source`, followed by kind-specific tables. Identifiers appear as
//! token arrays; tables refer to entities by their position in those arrays.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::baseline::{MeansModel, PopularityModel};
use crate::error::{Error, Result};
use crate::factorization::{FactorModel, FactorizationConfig};
use crate::io::{parse_ratings, DataFileSpec};
use crate::model::Algorithm;
use crate::neighborhood::{DeviationModel, SimilarityModel};
use crate::store::{Axis, IdMap, RatingBounds, RatingStore};
use crate::trained::TrainedModel;

pub const FORMAT_VERSION: u32 = 1;

/// Where a model's training ratings came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainSource {
    pub path: PathBuf,
    pub spec: DataFileSpec,
}

impl TrainSource {
    pub fn load(&self) -> Result<RatingStore> {
        RatingStore::build(&parse_ratings(&self.path, &self.spec)?)
    }
}

#[derive(Serialize, Deserialize)]
struct Document {
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    train_source: Option<TrainSource>,
    #[serde(flatten)]
    body: Body,
}

#[derive(Deserialize)]
struct Header {
    version: Option<u32>,
    #[serde(default)]
    kind: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Body {
    UserAvg(MeansDoc),
    ItemAvg(MeansDoc),
    MostPopular(PopularityDoc),
    SlopeOne(DeviationDoc),
    UserKnn(KnnDoc),
    ItemKnn(KnnDoc),
    FunkSvd(FactorDoc),
}

#[derive(Serialize, Deserialize)]
struct MeansDoc {
    axis: Axis,
    global_mean: f64,
    rating_min: f64,
    rating_max: f64,
    users: Vec<String>,
    items: Vec<String>,
    means: IndexMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct PopularityDoc {
    ranking: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RatingsDoc {
    users: Vec<String>,
    items: Vec<String>,
    /// `[user, item, rating]`, user-major.
    ratings: Vec<(usize, usize, f64)>,
}

impl RatingsDoc {
    fn of(store: &RatingStore) -> Self {
        RatingsDoc {
            users: store.users().tokens().to_vec(),
            items: store.items().tokens().to_vec(),
            ratings: store.entries().collect(),
        }
    }

    fn into_store(self) -> Result<RatingStore> {
        RatingStore::from_parts(
            IdMap::from_tokens(self.users)?,
            IdMap::from_tokens(self.items)?,
            self.ratings,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct DeviationDoc {
    training: RatingsDoc,
    /// `[i, j, count, dev]` with `i < j`; `dev(j, i) = -dev`.
    deviations: Vec<(usize, usize, u32, f64)>,
}

#[derive(Serialize, Deserialize)]
struct KnnDoc {
    k: usize,
    training: RatingsDoc,
    /// Per entity along the model axis: `[neighbor, similarity]`, best first.
    neighbors: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct FactorDoc {
    config: FactorizationConfig,
    global_mean: f64,
    rating_min: f64,
    rating_max: f64,
    users: Vec<String>,
    items: Vec<String>,
    user_bias: Vec<f64>,
    item_bias: Vec<f64>,
    /// Row-major, one row of `factors` values per user.
    user_factors: Vec<f64>,
    item_factors: Vec<f64>,
}

fn body_of(model: &TrainedModel) -> Body {
    match model {
        TrainedModel::Means(m) => {
            let ids = match m.axis {
                Axis::User => &m.users,
                Axis::Item => &m.items,
            };
            let doc = MeansDoc {
                axis: m.axis,
                global_mean: m.global_mean,
                rating_min: m.bounds.min,
                rating_max: m.bounds.max,
                users: m.users.tokens().to_vec(),
                items: m.items.tokens().to_vec(),
                means: ids
                    .tokens()
                    .iter()
                    .cloned()
                    .zip(m.means.iter().copied())
                    .collect(),
            };
            match m.axis {
                Axis::User => Body::UserAvg(doc),
                Axis::Item => Body::ItemAvg(doc),
            }
        }
        TrainedModel::Popularity(m) => Body::MostPopular(PopularityDoc {
            ranking: m.ranking(),
        }),
        TrainedModel::SlopeOne(m) => Body::SlopeOne(DeviationDoc {
            training: RatingsDoc::of(&m.store),
            deviations: m.pairs().collect(),
        }),
        TrainedModel::Knn(m) => {
            let doc = KnnDoc {
                k: m.k,
                training: RatingsDoc::of(&m.store),
                neighbors: m.neighbors.clone(),
            };
            match m.axis {
                Axis::User => Body::UserKnn(doc),
                Axis::Item => Body::ItemKnn(doc),
            }
        }
        TrainedModel::FunkSvd(m) => Body::FunkSvd(FactorDoc {
            config: m.config.clone(),
            global_mean: m.global_mean,
            rating_min: m.bounds.min,
            rating_max: m.bounds.max,
            users: m.users.tokens().to_vec(),
            items: m.items.tokens().to_vec(),
            user_bias: m.user_bias.clone(),
            item_bias: m.item_bias.clone(),
            user_factors: m.user_factors.clone(),
            item_factors: m.item_factors.clone(),
        }),
    }
}

fn means_model(doc: MeansDoc, expected: Axis) -> Result<MeansModel> {
    if doc.axis != expected {
        return Err(Error::ModelFormat(format!(
            "axis {} does not match model kind",
            doc.axis
        )));
    }
    let users = IdMap::from_tokens(doc.users)?;
    let items = IdMap::from_tokens(doc.items)?;
    let ids = match doc.axis {
        Axis::User => &users,
        Axis::Item => &items,
    };
    if doc.means.len() != ids.len() || doc.means.keys().zip(ids.tokens()).any(|(a, b)| a != b) {
        return Err(Error::ModelFormat(
            "means do not match the identifier list".into(),
        ));
    }
    Ok(MeansModel {
        axis: doc.axis,
        means: doc.means.into_values().collect(),
        users,
        items,
        global_mean: doc.global_mean,
        bounds: RatingBounds {
            min: doc.rating_min,
            max: doc.rating_max,
        },
    })
}

fn model_of(body: Body, profiles: Option<&RatingStore>) -> Result<TrainedModel> {
    Ok(match body {
        Body::UserAvg(doc) => TrainedModel::Means(means_model(doc, Axis::User)?),
        Body::ItemAvg(doc) => TrainedModel::Means(means_model(doc, Axis::Item)?),
        Body::MostPopular(doc) => {
            TrainedModel::Popularity(PopularityModel::from_ranking(&doc.ranking, profiles)?)
        }
        Body::SlopeOne(doc) => TrainedModel::SlopeOne(DeviationModel::from_pairs(
            doc.training.into_store()?,
            doc.deviations,
        )?),
        Body::UserKnn(doc) => TrainedModel::Knn(SimilarityModel::from_neighbors(
            doc.training.into_store()?,
            Axis::User,
            doc.k,
            doc.neighbors,
        )?),
        Body::ItemKnn(doc) => TrainedModel::Knn(SimilarityModel::from_neighbors(
            doc.training.into_store()?,
            Axis::Item,
            doc.k,
            doc.neighbors,
        )?),
        Body::FunkSvd(doc) => TrainedModel::FunkSvd(FactorModel::from_parts(
            doc.config,
            IdMap::from_tokens(doc.users)?,
            IdMap::from_tokens(doc.items)?,
            doc.user_factors,
            doc.item_factors,
            doc.user_bias,
            doc.item_bias,
            doc.global_mean,
            RatingBounds {
                min: doc.rating_min,
                max: doc.rating_max,
            },
        )?),
    })
}

/// Serializes a model; identical models give identical bytes.
pub fn write_model<W: Write>(
    out: W,
    model: &TrainedModel,
    source: Option<&TrainSource>,
) -> Result<()> {
    let doc = Document {
        version: FORMAT_VERSION,
        train_source: source.cloned(),
        body: body_of(model),
    };
    serde_json::to_writer(out, &doc)?;
    Ok(())
}

pub fn save_model(
    path: impl AsRef<Path>,
    model: &TrainedModel,
    source: Option<&TrainSource>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path)
        .map_err(|e| Error::io(format!("cannot create {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    write_model(&mut out, model, source)?;
    out.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// A model read back from disk.
#[derive(Debug)]
pub struct LoadedModel {
    pub model: TrainedModel,
    pub train_source: Option<TrainSource>,
}

/// Parses a model document.
///
/// A popularity model gets its per-user exclusions from `profiles`, or
/// else from the recorded training file when it is still readable.
pub fn read_model(text: &str, profiles: Option<&RatingStore>) -> Result<LoadedModel> {
    let header: Header = serde_json::from_str(text)
        .map_err(|e| Error::ModelFormat(format!("not a model document: {e}")))?;
    match header.version {
        Some(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {v} (expected {FORMAT_VERSION})"
            )))
        }
        None => return Err(Error::ModelFormat("missing version".into())),
    }
    if let Some(kind) = &header.kind {
        kind.parse::<Algorithm>()
            .map_err(|_| Error::ModelFormat(format!("unknown model kind {kind:?}")))?;
    }
    let doc: Document =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let loaded_profiles;
    let profiles = match (profiles, &doc.body, &doc.train_source) {
        (Some(p), _, _) => Some(p),
        (None, Body::MostPopular(_), Some(source)) if source.path.exists() => {
            loaded_profiles = source.load()?;
            Some(&loaded_profiles)
        }
        _ => None,
    };
    Ok(LoadedModel {
        model: model_of(doc.body, profiles)?,
        train_source: doc.train_source,
    })
}

pub fn load_model(path: impl AsRef<Path>, profiles: Option<&RatingStore>) -> Result<LoadedModel> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .map(BufReader::new)
        .and_then(|mut r| r.read_to_string(&mut text))
        .map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
    read_model(&text, profiles)
}
