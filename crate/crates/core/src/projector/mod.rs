//! Landau-level projector kernels, their localized norms and magnetic
//! translations.

pub mod identities;
pub mod kernel;
pub mod norms;
pub mod translate;

pub use identities::{default_box_lengths, projector_identities_check, IdentityTolerances, ProjectorCheck};
pub use kernel::{laguerre, ProjectorKernel};
pub use norms::{hs_norm_localized, op_norm_localized, trace_norm_localized, QuadratureEstimate};
pub use translate::magnetic_translate;
