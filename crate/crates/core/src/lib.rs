//! Symbolic-numeric toolkit for weighted Hörmander systems.

pub mod bchflow;
pub mod error;
pub mod filtration;
pub mod hncone;
pub mod linalg;
pub mod osculating;
pub mod polyfield;
pub mod rockland;
pub mod scalar;
pub mod symbols;

pub use error::{Error, Result};
pub use scalar::{Field, Rational, Real, Ring};

pub type Poly = polyfield::MultiPoly<Rational>;
pub type PolyF64 = polyfield::MultiPoly<f64>;
pub type PolyVectorField = polyfield::VectorField<Rational>;
pub type PolyVectorFieldF64 = polyfield::VectorField<f64>;
