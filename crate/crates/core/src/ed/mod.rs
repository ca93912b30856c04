//! Exact finite-`N` dynamics used to check the semiclassical results.

pub mod chebyshev;
pub mod dicke;
pub mod entropy;
pub mod kicked_top;
pub mod spin;

pub use dicke::{
    capped_cutoff, dicke_hamiltonian, dicke_initial_state, estimate_cutoff, evolve_and_entropy_dicke, DickeEdSeries, DickeOperator,
};
pub use entropy::{page_entropy, spin_bipartition_rdm, spin_entanglement};
pub use kicked_top::{kicked_top_ed_series, kicked_top_floquet, FloquetOperator, KickedTopEd, KickedTopEdOptions};
pub use spin::{
    collective_spin_matrices, qfi_exact, spin_coherent_state, squeezing_exact, Basis, CollectiveSpinOps, QuantumState,
};
