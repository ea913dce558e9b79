pub mod band;
pub mod eigen;
pub mod norm;

pub use band::{BandLu, HermitianBand};
pub use eigen::{dense_hermitian, window, EigenPairs, WindowOptions};
pub use norm::{operator_norm, NormEstimate, NormOptions};
