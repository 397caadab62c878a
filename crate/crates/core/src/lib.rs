//! Information-preserving structures of finite-dimensional quantum channels.
//!
//! The pipeline runs channel -> superoperator spectrum -> fixed (or rotating)
//! spaces -> joint support -> algebra shape, with operational checks for
//! codes on top. Everything is dense `nalgebra` linear algebra over `C64`.

pub mod algebra;
pub mod channel;
pub mod cli;
pub mod codes;
pub mod error;
pub mod matcore;
pub mod random;
pub mod spectral;

pub use algebra::{
    commutant, echo_map, fixed_state_form, structure_from_fixed_spaces, AlgebraStructure, EchoMap,
};
pub use channel::{compose, make_paper_example, make_planted, power_mean, BlockSpec, Channel};
pub use codes::{
    analyze, helstrom, is_correctable, is_noiseless, is_preserved, is_unitarily_noiseless,
    transpose_channel, AnalysisMode, Code, IpsReport, VerificationMode, VerificationReport,
};
pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, OperatorSubspace, Tolerance, C64};
pub use spectral::{
    fixed_spaces, joint_support, rotating_space, FixedSpaces, RotatingSpace, SupportInfo,
};
