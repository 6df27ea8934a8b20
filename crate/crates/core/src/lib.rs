//! Hashing-based neighborhood density estimation for outlier scoring and
//! streaming classification.
//!
//! The crate bundles:
//!
//! * [`fire`]: thresholded-bit sketching scorer with IQR dichotomization.
//! * [`fire1`]: quantized random-projection scorer that can also score
//!   points it was not trained on.
//! * [`outlierness`]: the o-score local/global criterion and its histogram
//!   featurization.
//! * [`metrics`]: P@n, average precision, their chance-adjusted forms,
//!   ROC-AUC and Friedman ranking.
//! * [`enhash`]: a projection-hash ensemble classifier for drifting streams,
//!   evaluated prequentially.
//! * [`streams`]: seeded synthetic generators for all of the above.
//!
//! Every randomized component draws from an [`RngSpec`] so results are
//! bit-identical across runs and thread schedules.

pub mod data;
pub mod enhash;
pub mod error;
pub mod fire;
pub mod fire1;
pub mod hashing;
pub mod metrics;
pub mod model_io;
pub mod numeric;
pub mod outlierness;
pub mod rng;
pub mod streams;
pub mod timing;

pub use data::{load_csv, write_scores, DataMatrix, LabelKind, LabelVector};
pub use enhash::{EnhashModel, EnhashParams, EvalReport, Prediction, Variant};
pub use error::{Error, Result};
pub use fire::{FireParams, FireScoreReport, SketchEnsemble};
pub use fire1::{Fire1Params, Fire1ScoreReport, ProjectionEnsemble};
pub use hashing::{ProjectionEstimator, SketchEstimator};
pub use metrics::{MethodMeasureTable, RankedScores};
pub use model_io::{load_model, save_model, Model};
pub use outlierness::{OScoreConfig, OScoreHistogram};
pub use rng::RngSpec;
