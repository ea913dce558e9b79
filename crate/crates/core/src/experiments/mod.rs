//! Monte Carlo and deterministic experiments producing [`ExperimentReport`]s.

pub mod band_projection;
pub mod common;
pub mod decay;
pub mod h1;
pub mod ids;
pub mod offdiag;
pub mod percolation;
pub mod projector;
pub mod report;
pub mod ribbon;
pub mod spectral_averaging;
pub mod wegner;

pub use percolation::{circuit_experiment, crossing_experiment, CircuitParams, CrossingParams};
pub use projector::{projector_experiment, ProjectorParams};
pub use report::{Check, ExperimentReport, Fit, Series, SCHEMA_VERSION};
pub use ribbon::{ribbon_experiment, RibbonParams};
pub use spectral_averaging::{spectral_averaging_experiment, SpectralAveragingParams};
pub use wegner::{wegner_experiment, WegnerParams};
pub use ids::{ids_experiment, IdsParams};
pub use band_projection::{band_projection_experiment, BandProjectionParams};
pub use offdiag::{offdiag_experiment, OffdiagParams};
pub use decay::{decay_experiment, DecayParams};
pub use h1::{h1_experiment, H1Params};
