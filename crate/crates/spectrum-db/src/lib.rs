//! The geolocation spectrum database shared by all private-database replicas.
//!
//! A database is an r × b bit matrix: one b-bit block per
//! (grid cell, channel, time window) tuple, each block holding the serialized
//! spectrum record, the client puzzles bound to that index, and the issuer's
//! signature over them. Replicas built from the same record set and binding
//! seed are bitwise identical row for row, which is what lets the multi-server
//! retrieval schemes treat them as one logical database.

mod block;
mod compress;
mod file;
mod grid;
mod matrix;
mod record;

pub use block::{puzzle_signing_message, BoundPuzzle, DbEntryBlock};
pub use compress::{compress_rows, decompress_rows};
pub use file::{db_load, db_save, DbFileHeader, SchemeId};
pub use grid::{db_index, db_unindex, GridCoordinate, IndexDims};
pub use matrix::{build_matrix, puzzle_bind, BindConfig, DbMatrix};
pub use record::{SpectrumRecord, RECORD_BYTES};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DbError {
    #[error("{field} {value} out of range (limit {limit})")]
    Dimension { field: &'static str, value: u64, limit: u64 },
    #[error("block capacity exceeded: need {needed} bytes, block holds {capacity} (raise the block size)")]
    Capacity { needed: usize, capacity: usize },
    #[error("records not sorted by index: position {position}")]
    Ordering { position: usize },
    #[error("malformed block: {0}")]
    Block(String),
    #[error("database file error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}
