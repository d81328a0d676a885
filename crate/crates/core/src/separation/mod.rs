//! Determined frequency-domain IVA: demixing model, source model and the
//! AuxIVA majorize-minimize map.

mod auxiva;
mod contrast;
mod demixing;

pub use auxiva::{
    broadband_magnitude, cost, ip_update, mm_map, mm_map_ordered, weighted_covariance,
    BroadbandMagnitudes, MmStats, WeightedCovariance, DEGENERATE_LOADING,
};
pub use contrast::{ContrastModel, SourcePrior};
pub use demixing::{demix, projection_back, DemixingSystem};
