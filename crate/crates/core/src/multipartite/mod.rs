//! Time-averaged fidelity of heralded multipartite atomic states.
//!
//! A scheme lists the terms of the pre-detection state. Only the terms whose
//! photons sit exactly in the clicked modes survive, and the fidelity then
//! depends on the photon waveforms only through their pairwise overlaps.

pub mod fidelity;
pub mod network;
pub mod scheme;
pub mod waveform;

pub use fidelity::{
    averaged_fidelity, averaged_fidelity_with_kernels, fidelity_report, kernel_fidelity_report, FidelityReport,
};
pub use network::{bell, build_network_scheme, expand_network, ghz, w_state, Network, NetworkSetup, Source, SourceBranch};
pub use scheme::{overlap_matrix, surviving_terms, PostSelectedScheme, SchemeTerm};
pub use waveform::{KernelTable, WaveformTable};
