//! Ends of locally finite graphs, finitely generated groups and finite
//! scaled Boolean algebras, computed inside a finite horizon.

pub mod bitset;
pub mod cli;
pub mod eigensets;
pub mod ends;
pub mod error;
pub mod fuzz;
pub mod graph;
pub mod groups;
pub mod oracles;
pub mod scaled_ba;

pub use bitset::{PointSet, VertexSet};
pub use error::{Error, Result};
