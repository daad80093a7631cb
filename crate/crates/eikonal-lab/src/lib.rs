//! Numerical laboratory for the Eikonal equation's entropy structure:
//! spectral entropies on the circle and disc, discrete calculus for
//! entropy productions of unit vector fields, canonical singular fields,
//! the correspondence with a differential inclusion into a fixed matrix
//! family, and an executable suite of the algebraic identities tying
//! these together.

pub mod angular;
pub mod besov;
pub mod energy;
pub mod entropy;
pub mod error;
pub mod fields;
pub mod grid;
pub mod harmonic;
pub mod inclusion;
pub mod jin_kohn;
pub mod mollify;
pub mod production;
pub mod rng;
pub mod vec2;
pub mod verify;

pub use error::{Error, Result};
pub use vec2::{Mat2, Vec2};
