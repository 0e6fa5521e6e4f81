//! Three-hop anonymity transport over an in-process simulated network.
//!
//! Clients build entry→middle→exit circuits by telescoping key
//! encapsulations, then exchange fixed 512-byte cells whose payload is
//! wrapped in three authenticated-encryption layers (exit key innermost).
//! Each relay strips or adds exactly one layer and learns only its
//! predecessor and successor; the exit reassembles fragments and delivers
//! plaintext to the destination node. Replies wrap in reverse with
//! direction-scoped nonces.
//!
//! The network itself is a deterministic discrete-event queue with
//! configurable per-link delay, so protocol runs replay bit-exactly under a
//! fixed seed and every frame lands in a transcript.

mod cell;
mod circuit;
mod directory;
mod net;
mod relay;

pub use cell::{Cell, Command as CellCommand, CELL_LEN, DATA_CHUNK};
pub use circuit::{Circuit, CircuitBuilder, OnionClient};
pub use directory::{Directory, RelayDescriptor, RelayRole};
pub use net::{Frame, NetCtx, Node, NodeId, SimNet, TranscriptEntry, CLIENT_NODE};
pub use relay::{parse_deliver, reply_frame, RelayNode, FRAME_CELL, FRAME_DELIVER, FRAME_REPLY};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OnionError {
    #[error("circuit build failed: {0}")]
    Build(String),
    #[error("directory cannot supply three distinct relays")]
    NotEnoughRelays,
    #[error("malformed frame: {0}")]
    Frame(String),
    #[error("authentication failed; circuit torn down")]
    Teardown,
    #[error("kem failure: {0}")]
    Kem(String),
}
