//! Numerical laboratory for Mann-type fixed-point iteration on bounded
//! pseudometric spaces with a linear structure.

pub mod csvout;
pub mod error;
pub mod geom;
pub mod glformula;
pub mod iterate;
pub mod maps;
pub mod metastab;
pub mod tbound;

pub use error::{Error, Result};
