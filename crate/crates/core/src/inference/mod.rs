//! Inference with the expected Euler characteristic: EC densities,
//! thresholds, maxima of t-fields and the FWER simulation protocol.

pub mod ec;
pub mod fwer;
pub mod localization;
pub mod maxima;
pub mod nondegeneracy;
pub mod optimize;
pub mod threshold;

pub use ec::{ec_density, eec, FieldType};
pub use fwer::{fwer_experiment, FwerConfig, FwerReport, ModeSummary, Replication, ResolutionMode};
pub use localization::localization_support;
pub use maxima::{count_local_maxima_above, local_maxima, top_local_maxima};
pub use nondegeneracy::{nondegeneracy_check, NondegeneracyReport};
pub use optimize::{ascend, maximize_t_field, t_on_grid, Ascent, AscentOptions, Maximum};
pub use threshold::threshold;
