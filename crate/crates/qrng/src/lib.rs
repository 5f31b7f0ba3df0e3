//! Semi-device-independent quantum random number generation.
//!
//! End-to-end toolkit for a prepare-and-measure QRNG whose measurement
//! device is uncharacterized: Bloch-sphere geometry of states and binary
//! POVMs ([`bloch`]), the analytic min-entropy bound chain with finite-size
//! corrections ([`entropy`]), Monte-Carlo simulation of the photonic
//! experiment ([`sim`]), an independent numerical adversary that
//! cross-checks the bounds ([`oracle`]), Toeplitz two-universal extraction
//! ([`toeplitz`]), and a four-test statistical battery ([`randtests`]).
//!
//! The `examples/` directory has one runnable walkthrough per capability;
//! the `qrng` binary exposes the protocol stages as subcommands
//! (simulate, bound, extract, randtest, verify, table).

pub mod bits;
pub mod bloch;
pub mod commands;
pub mod config;
pub mod entropy;
pub mod error;
pub mod oracle;
pub mod randtests;
pub mod reference;
pub mod sim;
pub mod toeplitz;

pub use error::{AbortReason, Error, Result};
