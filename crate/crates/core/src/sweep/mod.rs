//! Batch sweeps over pulse widths and shapes.

pub mod bound;
pub mod config;
pub mod output;
pub mod pareto;
pub mod tradeoff;

pub use bound::{bound_check_from_curves, run_bound_check, BestPoint, BoundCheck};
pub use config::{PulseConfig, RunConfig};
pub use pareto::{run_asymmetric_scan, Family, Frontier, FrontierEntry, ParetoScan, ScanPlan, ScanSample};
pub use tradeoff::{
    loop_orientation, run_tradeoff_sweep, signed_area, Orientation, SigmaRange, Spacing, TradeoffCurve,
    TradeoffPoint,
};
