//! Cache-enabled vehicular edge network simulator.
//!
//! Connected vehicles on a Manhattan grid request contents from an edge
//! server. A cache placement policy refreshes the server cache at the start of
//! every duration of interest (DoI), and a radio access technique delivers
//! payloads under hard deadlines, either by forming user-centric virtual cells
//! of cooperating access points or through a single network-centric base
//! station.

pub mod agent;
pub mod cache;
pub mod config;
pub mod content;
pub mod delivery;
pub mod error;
pub mod harness;
pub mod mobility;
pub mod radio;
pub mod rat;
pub mod rng;
pub mod validate;

pub use config::{AgentConfig, Policy, RatKind, SimConfig};
pub use error::{Error, Result};
