//! Demand model and the simulators that serve as estimator oracles.

mod demand;
mod depreciation;
mod simulate;

pub use demand::{demand, demand_comparative_statics, ComparativeStatics, DemandParams, DemandRegime};
pub use depreciation::{simulate_depreciation, DepreciationPath, DepreciationSpec};
pub use simulate::{simulate_panel, SimPanelSpec, SimTruth};
