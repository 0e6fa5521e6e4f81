//! Simulation and benchmarking harness for the private spectrum-access
//! stack: stands up database replicas, access points, relays, and a service
//! endpoint, drives the full query-to-service flow for honest and
//! adversarial clients, and reports per-phase metrics.

pub mod bench;
pub mod config;
pub mod dbtool;
pub mod sim;

pub use config::{ConfigError, PowChoice, SchemeChoice, SimConfig};
pub use sim::{run_sim, AttackKind, SimError, SimReport};
