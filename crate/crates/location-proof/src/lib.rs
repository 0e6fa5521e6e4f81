//! Proof of location issued by nearby access points.
//!
//! A client commits to its coordinates under the access point's current
//! beacon, the AP checks physical proximity from signal measurements, then
//! signs the commitment with an event-oriented linkable ring signature: the
//! signature proves some ring member signed without revealing which, while
//! the per-(signer, event) tag makes repeats within one event linkable. The
//! event id is derived from the AP secret and the beacon window, so the tag
//! doubles as a per-AP, per-window rate-limiting handle.
//!
//! The signature-of-knowledge backend is pluggable; the default in-process
//! attestor checks the witness (key preimage, Merkle membership, tag
//! recomputation) and certifies the statement with an ordinary signature.
//! Every protocol-visible property (verification, linkability, anonymity of
//! the signer toward database servers) is preserved; the proof bytes are
//! just much smaller than a zero-knowledge backend would produce.

mod beacon;
mod commit;
mod lrs;
mod merkle;
mod protocol;
mod prox;

pub use beacon::Beacon;
pub use commit::{commit_location, verify_opening, LocXY, LocationCommitment, Opening};
pub use lrs::{
    derive_event_id, lrs_keygen, lrs_link, lrs_sign, lrs_verify, IdealAttestor, LrsKeypair,
    ProofOfLocation, RingContext, SokBackend, SokStatement, SokWitness,
};
pub use merkle::MerkleTree;
pub use protocol::{AccessPoint, Measurements, PolReject, PolRequest};
pub use prox::{prox_verif, rss_at_distance, EnvParams};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PolError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("signer's key is not a ring member")]
    NotAMember,
    #[error("proof backend cannot prove (verify-only handle)")]
    ProveUnavailable,
    #[error("malformed proof encoding: {0}")]
    Encoding(String),
}
