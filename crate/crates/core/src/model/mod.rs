pub mod adiabatic;
pub mod hamiltonian;
pub mod params;
pub mod pulse;

pub use adiabatic::{adiabaticity_report, AdiabaticityReport, Condition};
pub use hamiltonian::{effective_hamiltonian, hamiltonian_with_drive, Mat3, Vec3};
pub use params::{Regime, SystemParams};
pub use pulse::PulsePolicy;
