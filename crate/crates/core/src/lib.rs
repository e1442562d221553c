//! Continuously increasing subsequences in random multiset permutations.
//!
//! The crate computes `E[L¹]`, `E[L]` and related quantities for words drawn
//! uniformly from `S_{m,n}` (each of `1..=n` used exactly `m` times) through
//! three engines that check one another:
//!
//! * [`exact`]: rational arithmetic (Horton–Kurn counts, generating functions),
//! * [`spectral`]: zeros of the truncated exponential and the closed form,
//! * [`montecarlo`]: seeded, parallel sampling.
//!
//! [`bounds`] holds the tail and lower bounds for `L`, and [`cardgame`]
//! simulates guessing strategies in the partial feedback model.

pub mod bounds;
pub mod cardgame;
mod combin;
pub mod error;
pub mod exact;
pub mod montecarlo;
pub mod precision;
pub mod spectral;
pub mod words;

pub use combin::{binomial, factorial};
pub use error::{Error, Result};
pub use words::{RandomSource, Word};
