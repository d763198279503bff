pub mod decomposition;
pub mod diagnostics;
pub mod moving;
pub mod preferred;

pub use decomposition::{
    decompose_samples, decompose_two_branch, ComplexMode, EntryExpansion, EntrywiseModeDecomposition,
};
pub use diagnostics::{coherent_basis_fidelity, diagonality_report, DiagonalityRow, FidelityRow};
pub use moving::{moving_basis, BasisFrame, BasisTrajectory};
pub use preferred::{pooled_gamma_eff, preferred_state, PreferredState, PreferredStateTrajectory};
