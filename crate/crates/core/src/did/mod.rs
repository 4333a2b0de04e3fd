//! Difference-in-differences estimators on a [`PanelDataset`](crate::panel::PanelDataset).

mod demean;
mod did_m;
mod dose;
mod event;
mod interaction;
mod ols;
mod result;
mod sdid;
mod simplex;
mod table;
mod twfe;

pub use demean::{max_group_mean, within_transform, Demeaned, FeGroup};
pub use did_m::{did_m, DID_M};
pub use dose::{decile_label, dose_response, N_DECILES};
pub use event::{event_label, event_study, EventWindow};
pub use interaction::{interaction_design, interaction_did, interaction_names};
pub use ols::{cluster_robust_vcov, column_norms, ols_fit, rank_tolerance, OlsFit, CONDITION_WARN};
pub use result::{BinInfo, Diagnostics, EstimateResult};
pub use sdid::{synthetic_did, SdidConfig, SdidWeights, SDID};
pub use simplex::{FrankWolfeConfig, SimplexLeastSquares, SimplexSolution};
pub use table::{bin_rows, emit_bin_table, BinRow};
pub use twfe::{twfe_did, twfe_ols, ClusterBy, DesignMatrix, EstimateOptions, FixedEffects, TREAT_POST};
