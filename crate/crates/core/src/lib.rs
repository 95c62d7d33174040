//! Numerical laboratory for curvature blowup along rotationally symmetric
//! Ricci flow on spheres.
//!
//! The crate is split along the pipeline a run goes through:
//!
//! * [`geometry`] holds the warped-product metric `φ(x)²dx² + ψ(x)²g_{S^{n-1}}`,
//!   its curvatures, meridian geodesic distances and geodesic ball volumes.
//! * [`flow`] integrates the reduced Ricci flow and records a [`FlowTrace`].
//! * [`functionals`] turns a trace into sup-norm series, blowup products,
//!   dyadic curvature-doubling decompositions, divergence integrals and
//!   non-collapsing estimates.
//! * [`metric_spaces`] is a small finite metric space toolkit
//!   (Gromov–Hausdorff bounds, ε-approximations, distance distortion).
//! * [`verification`] cross-checks evolution identities and gap inequalities
//!   and assembles the end-of-run [`GapReport`].

pub mod error;
pub mod flow;
pub mod functionals;
pub mod geometry;
pub mod metric_spaces;
pub mod verification;
pub use error::{LabError, Result};
pub use functionals::{
    divergence_integrals, doubling_bound_check, dyadic_decompose, kappa_monitor, sup_norms,
    DivergenceIntegrals, DoublingVerdict, DyadicDecomposition, DyadicLevel, FunctionalSeries,
    KappaSeries,
};
pub use flow::{
    estimate_singular_time, initial_profile, run, step, FlowStatus, FlowTrace, InitialFamily,
    Scenario, SingularTimeEstimate, SnapshotFunctionals,
};
pub use geometry::{
    arclength, ball_volume, curvature, geodesic_distance, BallVolume, CurvatureField, Distance,
    DistanceMethod, MeridianPoint, MeridianSurface, WarpedProfile,
};
pub use metric_spaces::{
    check_eps_approx, distortion_ledger, gh_brute_force, gh_brute_force_pointed, gh_upper_bound,
    sample_ball, ApproxReport, Correspondence, FiniteMetricSpace, LedgerEntry, SampledBall,
};
pub use verification::{
    evolution_residual, gap_report, moser_check, moser_windows, soliton_gallery, GapEntry,
    GapReport, MoserEstimate, ResidualSnapshot, SolitonEntry, Verdict,
};
