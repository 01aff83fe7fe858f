//! Disordered zero-range process on a ring.
//!
//! Site fitnesses `X_i` are i.i.d. with a regularly varying upper tail at 1.
//! The occupancy weights `p_k` have a power tail `k^{-β}`. The crate covers the
//! grand-canonical and canonical stationary laws, the clockwise hopping dynamics,
//! and the observables and tests used to check condensation limit laws.

pub mod disorder;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod numerics;
pub mod rng;
pub mod stats;
pub mod weights;

pub use disorder::{DisorderSample, FitnessLaw};
pub use ensemble::OccupancyVector;
pub use error::{Result, ZrpError};
pub use weights::WeightSeq;
