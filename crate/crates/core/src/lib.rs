//! Joint segmentation and clustering of a 1-D signal by penalized least
//! squares.
//!
//! A first dynamic program finds the best segmentation for every number of
//! segments; a second clusters the segment means (sorted) for every number of
//! clusters; a penalty on the pair of dimensions picks the model.

pub mod clusterdp;
pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod penalty;
pub mod segdp;
pub mod selector;
pub mod signal;
pub mod stats;

pub use clusterdp::{ClusterAssignment, FullPartition};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentOutput, NoiseLevel};
pub use penalty::{Penalty, PenaltySpec, ZeroDimConvention, DEFAULT_K};
pub use segdp::Segmentation;
pub use selector::{select, SelectionResult};
pub use signal::{Cluster, PiecewiseSpec, Signal};
