//! Exact polynomial vector fields on ℝᵐ: arithmetic, brackets, evaluation,
//! jets and numeric time-one flows.

pub mod field;
pub mod flow;
pub mod jet;
pub mod parse;
pub mod poly;

pub use field::{basis_name, VectorField};
pub use flow::{flow_time_one, CompiledField, FlowOptions};
pub use jet::{jet_at, Jet};
pub use parse::{parse_field, parse_poly};
pub use poly::{Monomial, MultiPoly};
