//! Stein-coupling samplers and normal-approximation bounds for permutation
//! statistics, independent sums and locally dependent sums.
//!
//! `no_std` with `alloc`. Randomness comes from caller-supplied generators;
//! see [`rng::substream`] for the seeded streams used across the workspace.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod zero_bias;
pub mod laws;
pub mod math;
pub mod perm;
pub mod rng;
pub mod score;
pub mod size_bias;
pub mod verify;

pub use error::{Error, Result};
pub use laws::{DiscreteLaw, IidGroup, IndependentSum};
pub use perm::{CycleType, Permutation, PermutationModel};
pub use score::{MomentMethod, MomentSummary, ScoreArray};
