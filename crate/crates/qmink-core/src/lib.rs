//! Explicit numerics for quantum Minkowski spaces: the seven deformation
//! families, their R-matrices, metrics and gamma matrices, the
//! noncommutative coordinate algebra with its differential calculus, and
//! Dirac-equation machinery with truncated momentum representations.

pub mod catalog;
pub mod diracsolve;
pub mod error;
pub mod matrixcore;
pub mod qalgebra;
pub mod structures;
pub mod text;
pub mod verify;

pub use catalog::{build_lorentz_data, pauli, CaseSpec, LorentzData};
pub use error::QminkError;
pub use matrixcore::{CMat, CVec, SpectrumReport, C64};
pub use structures::{build_structures, StructureSet};
