//! Post-processing of a [`FlowTrace`](crate::flow::FlowTrace): sup-norm
//! series and blowup products, dyadic curvature-doubling decompositions,
//! divergence integrals and the non-collapsing monitor.
//!
//! Everything here is a pure function of an immutable trace.

mod divergence;
mod dyadic;
mod kappa;
mod series;

pub use divergence::{divergence_integrals, DivergenceIntegrals};
pub use dyadic::{doubling_bound_check, dyadic_decompose, log_interp, DoublingVerdict, DyadicDecomposition, DyadicLevel};
pub use kappa::{kappa_monitor, kappa_monitor_strided, KappaSeries};
pub use series::{last_decade_start, sup_norms, BlowupProducts, FunctionalSeries, DEFAULT_LAMBDAS};
