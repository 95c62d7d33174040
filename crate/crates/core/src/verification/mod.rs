//! Numerical cross-checks of the flow: the scalar-curvature evolution
//! identity, a Moser-type bound on `|Ric|`, closed-form shrinking solitons
//! and the end-of-run gap report.

mod moser;
mod report;
mod residual;
mod soliton;

pub use moser::{moser_check, moser_windows, MoserEstimate};
pub use report::{gap_report, GapEntry, GapReport, Verdict, GAP_ENTRY_NAMES, MAX_FIT_RESIDUAL, RATE_TOL};
pub use residual::{evolution_residual, ResidualSnapshot, RELIABLE_Q_GROWTH};
pub use soliton::{product_curvature, soliton_gallery, ProductCurvature, SolitonEntry};
