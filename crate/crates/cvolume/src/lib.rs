//! Complex volumes of 3-manifolds computed crossing by crossing from shaped,
//! flattened link diagrams and generalized surgery presentations.


pub mod diagram;
pub mod dilog;
pub mod error;
pub mod fixtures;
pub mod flatten;
pub mod glue;
pub mod io;
pub mod shapes;
pub mod selftest;
pub mod solver;
pub mod surgery;
pub mod volume;

pub use dilog::{ModKind, ModValue, C64};
pub use error::{Error, Result};
