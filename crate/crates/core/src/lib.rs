pub mod error;
pub mod fragmentation;
pub mod lanczos;
pub mod models;
pub mod operator;
pub mod oracle;
pub mod recursion;
pub mod weyl;

pub use error::{Error, Result};
pub use lanczos::{moments_from_b, run_lanczos, LanczosOptions, LanczosResult, Termination};
pub use models::{
    build_hamiltonian, build_total_magnetization, coupling_convention, decompose_local, spin_matrices, Extent,
    LatticeSpec, ModelSpec, SpinValue,
};
pub use operator::{apply_liouvillian, axpy, canonical_anchor, Boundary, Mode, OperatorVector, TermList};
pub use weyl::{LocalExponents, Phase, PhasedString, Site, WeylString};
