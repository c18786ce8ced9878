#![no_std]
extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod ambiguity;
pub mod baselines;
pub mod datagen;
pub mod fixtures;
pub mod graph;
pub mod lp;
pub mod moment;
pub mod solver;
