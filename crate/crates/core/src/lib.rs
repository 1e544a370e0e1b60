//! Jet-based evaluation of extrinsic conformal submanifold invariants.

pub mod ambient;
pub mod config;
pub mod conformal;
pub mod error;
pub mod extrinsic;
pub mod field;
pub mod gauss_bonnet;
pub mod identities;
pub mod immersion;
pub mod invariants;
pub mod jet;
pub mod metric;
pub mod random;
pub mod renorm;
pub mod report;
pub mod scalar;
pub mod scene;
pub mod submanifold;
pub mod suites;
pub mod tensor;

pub use error::{GeoError, Result};
pub use jet::Jet;
pub use scalar::{Dual, Real};

pub type Jet64 = Jet<f64>;
pub type Jet32 = Jet<f32>;
pub type DualJet64 = Jet<Dual<f64>>;
