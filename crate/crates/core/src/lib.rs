//! Collaborative-filtering recommenders over a sparse rating store.
//!
//! The crate reads delimited rating files into a [`RatingStore`], trains
//! one of seven algorithms on it, and scores test ratings with MAE and
//! RMSE. Rating predictors implement [`Predictor`]; all of them, plus the
//! recommendation-only popularity model, can be saved to and loaded from
//! versioned json files.
//!
//! ```
//! use reclab::{train, Algorithm, RatingStore, RatingTriple, TrainParams};
//!
//! let ratings = vec![
//!     RatingTriple::new("alice", "matrix", 5.0),
//!     RatingTriple::new("alice", "alien", 3.0),
//!     RatingTriple::new("bob", "matrix", 4.0),
//!     RatingTriple::new("bob", "heat", 2.0),
//! ];
//! let store = RatingStore::build(&ratings).unwrap();
//! let model = train(Algorithm::SlopeOne, &store, &TrainParams::default()).unwrap();
//! let predicted = model.predictor().unwrap().predict("alice", "heat");
//! assert!((1.0..=5.0).contains(&predicted));
//! let top = model.recommend(None, "alice", 1, false);
//! assert_eq!(top.items, ["heat"]);
//! ```

pub mod baseline;
pub mod benchmark;
mod error;
pub mod eval;
pub mod factorization;
pub mod io;
mod model;
pub mod neighborhood;
pub mod persist;
mod store;
mod trained;

pub use baseline::{MeansModel, PopularityModel};
pub use error::{Error, Result};
pub use eval::{EvalReport, MonotonicClock};
pub use factorization::{FactorModel, FactorizationConfig};
pub use io::{DataFileSpec, OutputFormat, PredictionRecord, RecommendationList};
pub use model::{recommend, Algorithm, Estimate, FallbackChain, Predictor};
pub use neighborhood::{DeviationModel, SimilarityModel};
pub use persist::{load_model, save_model, LoadedModel, TrainSource};
pub use store::{Axis, IdMap, MeanScope, Profile, RatingBounds, RatingStore, RatingTriple};
pub use trained::{train, TrainParams, TrainedModel};
