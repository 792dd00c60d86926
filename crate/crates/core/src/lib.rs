//! Exact arithmetic for torus orbits on Hilbert modular spaces
//! `SL(2,K_1) × … × SL(2,K_r) / SL(2,O)` and for value sets of split
//! binary quadratic forms over number fields.
//!
//! The numeric layers are generic over [`scalar::Real`]; aliases for the
//! common instantiations live at the crate root.

pub mod catalog;
pub mod classifier;
pub mod error;
pub mod linalg;
pub mod numfield;
pub mod orbitflow;
pub mod poly;
pub mod qforms;
pub mod scalar;
pub mod sl2k;
pub mod units;

pub use error::{Error, Result};
pub use numfield::{FieldElement, NumberField};
pub use sl2k::MatK;
pub use scalar::{ArchPoint, CBall, Cx, Mp, PlaceValue, RBall, Real};

pub type ArchPoint64 = ArchPoint<f64>;
pub type ArchPointMp = ArchPoint<Mp>;
pub type PlaceValue64 = PlaceValue<f64>;
pub type PlaceValueMp = PlaceValue<Mp>;
