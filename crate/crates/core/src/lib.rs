pub mod balls;
pub mod completion;
pub mod error;
pub mod extremal;
pub mod matcore;
pub mod random;
pub mod schur;
pub mod sector;
pub mod triangular;
pub mod verify;

pub use error::{Error, Result};
pub use matcore::{CMatrix, Inertia, Tolerances, C64};
pub use sector::{Angle, ClassReport, Region};
