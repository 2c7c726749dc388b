//! Continuous-time optimal selling with Poisson offer arrivals.
//!
//! A seller must sell an asset before a deadline. Price offers arrive as a
//! Poisson process with rate `lambda`, drawn i.i.d. from an offer
//! distribution `F`; if the deadline passes unsold, the asset fetches a
//! salvage price drawn from a residual distribution `F0`. The expected-price
//! optimal policy is a time-varying acceptance threshold `mu(t)` (`t` = time
//! remaining), and everything about the outcome — the law of the realized
//! sale price, the law of the time to sale, and their large-`t` asymptotics —
//! can be computed exactly from the excess-value function
//! `phi(x) = E[(X - x)+]`.
//!
//! The crate provides:
//! - [`dist`]: offer / residual distribution models and `phi`,
//! - [`policy`]: the optimal threshold curve, its inverse problem, and
//!   growth bounds,
//! - [`price`]: the exact distribution of the realized sale price,
//! - [`stoptime`]: the distribution of the time to sale (with its atom at
//!   the deadline),
//! - [`asymptotics`]: tail classification and large-`t` limits,
//! - [`sim`]: a seeded, reproducible Monte Carlo simulator of the bidding
//!   process,
//! - [`validate`]: empirical-vs-analytic goodness-of-fit harness.

pub mod asymptotics;
#[cfg(feature = "cli")]
pub mod cli;
pub mod dist;
pub mod numeric;
pub mod policy;
pub mod price;
pub mod sim;
pub mod stoptime;
pub mod validate;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
