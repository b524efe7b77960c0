//! Command-line front end: JSON file formats and the `opext` subcommands.

pub mod app;
pub mod io;

pub use app::run;
pub use io::{BallFile, HoleFile, MatrixFile, PairFile};
