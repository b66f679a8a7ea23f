//! Memory-based predictors: Slope One and user/item KNN.

mod knn;
mod slope_one;

pub use knn::{pearson, similarity, train_knn, SimilarityModel, DEFAULT_K};
pub use slope_one::{train_slopeone, DeviationModel};
