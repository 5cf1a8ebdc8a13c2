//! Swap-steering witnesses for bipartite quantum states.
//!
//! Two independent sources feed a trusted party (Alice) and an untrusted one
//! (Bob), each performing a single fixed measurement. This crate builds linear
//! witnesses on the resulting correlations for NPT states, for realignment
//! (CCN) violating states in aligned form, and for any state with a known
//! entanglement witness when Alice may measure tomographically. It simulates
//! the network, and certifies the bounds attainable by separable
//! outcome-independent hidden state (SOHS) models numerically.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod network;
pub mod qlinalg;
pub mod sohs;
pub mod states;
pub mod tol;
pub mod witnesses;

pub use error::{Error, Result};
