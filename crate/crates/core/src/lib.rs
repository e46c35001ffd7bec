//! Probabilistic-shaping signaling chain for optical region-of-interest links.
//!
//! A low-rate bit selects one of two ones-ratio ranges; a flexible
//! distribution controller maps high-rate message bits onto words inside that
//! range; a systematic polar code with run-length-aware frozen values protects
//! them without a run-length-limited line code. The [`harness`] module wires
//! the chain through an AWGN channel for Monte-Carlo evaluation.

pub mod analysis;
pub mod channel;
pub mod combinatorics;
pub mod error;
pub mod frame;
pub mod harness;
pub mod polar;
pub mod shaping;

pub use channel::{ChannelParams, SoftFrame};
pub use error::{Error, Result};
pub use frame::BitFrame;
pub use polar::{CheckRule, FrozenMode, PolarCodeSpec};
pub use shaping::{LowRateBit, ShapingCodebook};
