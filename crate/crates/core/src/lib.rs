//! Rate–fidelity analysis of remote entanglement swapping between atom–cavity
//! photon sources.
//!
//! The reduced master equation for one source is integrated on
//! {|u0>, |g1>, |e0>, |g0>}, two-time field correlations follow from the
//! quantum regression theorem, and the swap fidelity, heralding rate and the
//! cooperativity bound are built from them. Multipartite post-selected
//! fidelities are evaluated from pairwise waveform overlaps.

pub mod error;
pub mod grid;
pub mod lindblad;
pub mod metrics;
pub mod model;
pub mod multipartite;
pub mod ode;
pub mod pipeline;
pub mod qrt;
pub mod sweep;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use lindblad::{DensityTrajectory, SolverSettings};
pub use metrics::{BoundReport, SwapResult};
pub use model::{PulsePolicy, Regime, SystemParams};
pub use qrt::{CorrelationSummary, TwoTimeCorrelation};
