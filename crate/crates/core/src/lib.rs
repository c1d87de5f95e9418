//! Randomised sphere cover classifiers and the tooling around them.
//!
//! * [`data`]: CSV datasets, normalisation, splits, folds, bootstrap, synthetic problems.
//! * [`rsc`]: the base classifier, a randomised pure cover of the training set by spheres.
//! * [`ensemble`]: majority-vote ensembles of sphere covers (plain, border-resampling, random subspace).
//! * [`filters`]: chi-squared, information gain and Relief attribute ranking.
//! * [`evaluation`]: accuracy, cross-validation, model selection and bias/variance decomposition.
//! * [`stats`]: Friedman / Iman-Davenport test, Nemenyi critical difference, CD diagrams.
//! * [`persist`]: JSON model documents.

pub mod data;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod filters;
pub mod persist;
pub mod rng;
pub mod rsc;
pub mod stats;

pub use data::{Dataset, MinMax};
pub use ensemble::{EnsembleModel, Scheme, VoteTally};
pub use error::{Error, Result};
pub use rsc::{Sphere, SphereCoverModel};
