//! Random exponential sums on the circle and on Z_N, their Chernoff-type
//! tail bounds, random frequency sets, and exact sparse recovery by ℓ¹
//! minimization from partial Fourier data, with a reproducible Monte Carlo
//! harness that checks empirical frequencies against the bounds.

pub mod arith;
pub mod error;
pub mod exp_sums;
pub mod experiments;
pub mod group_fourier;
pub mod omega_models;
pub mod parallel;
pub mod recovery;
pub mod seed;
pub mod tail_bounds;

pub use arith::CyclicIndex;
pub use error::{Error, Result};
pub use exp_sums::{FrequencyDraw, KernelProfile};
pub use group_fourier::{dft, idft, Signal, Spectrum};
pub use parallel::Execution;
