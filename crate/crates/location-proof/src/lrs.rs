//! Event-oriented linkable ring signature with pluggable proof backend.
//!
//! Keys are hash commitments: PK = H'(sk). A ring is the Merkle tree over
//! its members' PKs. A signature on message m under event e is the tuple
//! (tag T = H'(sk ∥ e), proof), where the proof attests the relation
//!
//!   PK = H'(sk)  ∧  PK is a leaf of the ring root  ∧  T = H'(sk ∥ e)
//!
//! bound to (e, root, T, m, window). Signatures by one signer under one
//! event share the tag, which is the whole linkability mechanism; the proof
//! itself carries neither the PK nor the leaf index.

use std::sync::Arc;

use crypto_backends::{sha256_tagged, sig, SigBackend, SigKeypair};
use rand::RngCore;

use crate::merkle::MerkleTree;
use crate::PolError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LrsKeypair {
    pub sk: [u8; 32],
    pub pk: [u8; 32],
}

pub fn lrs_keygen(rng: &mut dyn RngCore) -> LrsKeypair {
    let mut sk = [0u8; 32];
    rng.fill_bytes(&mut sk);
    LrsKeypair { sk, pk: member_pk(&sk) }
}

pub fn member_pk(sk: &[u8; 32]) -> [u8; 32] {
    sha256_tagged("lrs-member-pk", &[sk])
}

/// e_ID = H'(sk_AP ∥ β ∥ window): deterministic per (AP, window), distinct
/// across windows.
pub fn derive_event_id(sk: &[u8; 32], beacon_nonce: &[u8; 8], window_id: u64) -> [u8; 32] {
    sha256_tagged("lrs-event-id", &[sk, beacon_nonce, &window_id.to_le_bytes()])
}

fn tag_for(sk: &[u8; 32], event_id: &[u8; 32]) -> [u8; 32] {
    sha256_tagged("lrs-tag", &[sk, event_id])
}

/// Static ring: member keys and their Merkle tree, built once.
#[derive(Debug, Clone)]
pub struct RingContext {
    pub members: Vec<[u8; 32]>,
    tree: MerkleTree,
}

impl RingContext {
    /// Member count must be a power of two (pad the key list upstream).
    pub fn new(members: Vec<[u8; 32]>) -> Result<RingContext, PolError> {
        if members.is_empty() || !members.len().is_power_of_two() {
            return Err(PolError::Parameter(format!(
                "ring size {} is not a power of two",
                members.len()
            )));
        }
        let tree = MerkleTree::build(&members);
        Ok(RingContext { members, tree })
    }

    pub fn root(&self) -> [u8; 32] {
        self.tree.root()
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn index_of(&self, pk: &[u8; 32]) -> Option<usize> {
        self.members.iter().position(|m| m == pk)
    }

    pub fn membership_path(&self, index: usize) -> Vec<[u8; 32]> {
        self.tree.path(index)
    }
}

/// Public statement the proof attests, including the verifier-side window so
/// stale proofs fail statement reconstruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SokStatement {
    pub event_id: [u8; 32],
    pub ring_root: [u8; 32],
    pub tag: [u8; 32],
    pub message: [u8; 32],
    pub window_id: u64,
}

impl SokStatement {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 * 4 + 8);
        out.extend_from_slice(&self.event_id);
        out.extend_from_slice(&self.ring_root);
        out.extend_from_slice(&self.tag);
        out.extend_from_slice(&self.message);
        out.extend_from_slice(&self.window_id.to_le_bytes());
        out
    }
}

/// Private witness: the signing key and its ring membership.
#[derive(Debug, Clone)]
pub struct SokWitness {
    pub sk: [u8; 32],
    pub leaf_index: usize,
    pub path: Vec<[u8; 32]>,
}

/// Signature-of-knowledge backend. A production zero-knowledge prover slots
/// in here; the statement/witness split carries everything it needs.
pub trait SokBackend: Send + Sync {
    fn prove(&self, statement: &SokStatement, witness: &SokWitness) -> Result<Vec<u8>, PolError>;
    fn verify(&self, statement: &SokStatement, proof: &[u8]) -> bool;
    fn name(&self) -> &'static str;
}

/// In-simulation attestor: checks the witness locally and certifies the
/// statement under its signing key. Parties holding the attestor's public
/// key verify the certificate. The proof reveals nothing about the signer.
pub struct IdealAttestor {
    role: AttestorRole,
}

enum AttestorRole {
    Full(SigKeypair),
    VerifyOnly { backend: SigBackend, public: Vec<u8> },
}

impl IdealAttestor {
    pub fn new(signer: SigKeypair) -> Arc<IdealAttestor> {
        Arc::new(IdealAttestor { role: AttestorRole::Full(signer) })
    }

    /// Verifier-side handle: knows only the attestor's public key.
    pub fn verify_only(backend: SigBackend, public: Vec<u8>) -> Arc<IdealAttestor> {
        Arc::new(IdealAttestor { role: AttestorRole::VerifyOnly { backend, public } })
    }

    pub fn public_key(&self) -> &[u8] {
        match &self.role {
            AttestorRole::Full(kp) => kp.public_key(),
            AttestorRole::VerifyOnly { public, .. } => public,
        }
    }

    pub fn backend_kind(&self) -> SigBackend {
        match &self.role {
            AttestorRole::Full(kp) => kp.backend(),
            AttestorRole::VerifyOnly { backend, .. } => *backend,
        }
    }
}

impl SokBackend for IdealAttestor {
    fn prove(&self, statement: &SokStatement, witness: &SokWitness) -> Result<Vec<u8>, PolError> {
        let AttestorRole::Full(signer) = &self.role else {
            return Err(PolError::ProveUnavailable);
        };
        // The attested relation: key preimage, Merkle membership, tag.
        let pk = member_pk(&witness.sk);
        let folded = MerkleTree::fold_path(&pk, witness.leaf_index, &witness.path);
        if folded != statement.ring_root {
            return Err(PolError::NotAMember);
        }
        if tag_for(&witness.sk, &statement.event_id) != statement.tag {
            return Err(PolError::Parameter("tag does not match witness".into()));
        }
        Ok(signer.sign(&statement.to_bytes()))
    }

    fn verify(&self, statement: &SokStatement, proof: &[u8]) -> bool {
        sig::verify(self.backend_kind(), self.public_key(), &statement.to_bytes(), proof).is_ok()
    }

    fn name(&self) -> &'static str {
        "ideal-attestor"
    }
}

/// A full proof of location: commitment, event id, tag, ring root, window,
/// and the backend proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofOfLocation {
    pub commitment: [u8; 32],
    pub event_id: [u8; 32],
    pub tag: [u8; 32],
    pub ring_root: [u8; 32],
    pub window_id: u64,
    pub sok_proof: Vec<u8>,
}

impl ProofOfLocation {
    /// Wire blob: C ∥ e_ID ∥ T ∥ rt ∥ proof-length(u32) ∥ proof bytes.
    /// The window travels in the enclosing request frame.
    pub fn wire_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(132 + self.sok_proof.len());
        out.extend_from_slice(&self.commitment);
        out.extend_from_slice(&self.event_id);
        out.extend_from_slice(&self.tag);
        out.extend_from_slice(&self.ring_root);
        out.extend_from_slice(&(self.sok_proof.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.sok_proof);
        out
    }

    pub fn from_wire(bytes: &[u8], window_id: u64) -> Result<ProofOfLocation, PolError> {
        if bytes.len() < 132 {
            return Err(PolError::Encoding("proof blob shorter than header".into()));
        }
        let len = u32::from_le_bytes(bytes[128..132].try_into().unwrap()) as usize;
        if bytes.len() != 132 + len {
            return Err(PolError::Encoding("proof length mismatch".into()));
        }
        let take = |a: usize| -> [u8; 32] { bytes[a..a + 32].try_into().unwrap() };
        Ok(ProofOfLocation {
            commitment: take(0),
            event_id: take(32),
            tag: take(64),
            ring_root: take(96),
            window_id,
            sok_proof: bytes[132..].to_vec(),
        })
    }

    fn statement(&self) -> SokStatement {
        SokStatement {
            event_id: self.event_id,
            ring_root: self.ring_root,
            tag: self.tag,
            message: self.commitment,
            window_id: self.window_id,
        }
    }
}

/// Sign a commitment under an event id. The signer must be a ring member.
pub fn lrs_sign(
    event_id: [u8; 32],
    keypair: &LrsKeypair,
    message: [u8; 32],
    ring: &RingContext,
    window_id: u64,
    backend: &dyn SokBackend,
) -> Result<ProofOfLocation, PolError> {
    let leaf_index = ring.index_of(&keypair.pk).ok_or(PolError::NotAMember)?;
    let tag = tag_for(&keypair.sk, &event_id);
    let statement = SokStatement {
        event_id,
        ring_root: ring.root(),
        tag,
        message,
        window_id,
    };
    let witness = SokWitness {
        sk: keypair.sk,
        leaf_index,
        path: ring.membership_path(leaf_index),
    };
    let sok_proof = backend.prove(&statement, &witness)?;
    Ok(ProofOfLocation {
        commitment: message,
        event_id,
        tag,
        ring_root: ring.root(),
        window_id,
        sok_proof,
    })
}

/// Verify a proof against the verifier's ring root, current window, and the
/// message it should cover.
pub fn lrs_verify(
    event_id: &[u8; 32],
    pol: &ProofOfLocation,
    message: &[u8; 32],
    ring_root: &[u8; 32],
    window_id: u64,
    backend: &dyn SokBackend,
) -> bool {
    pol.event_id == *event_id
        && pol.commitment == *message
        && pol.ring_root == *ring_root
        && pol.window_id == window_id
        && backend.verify(&pol.statement(), &pol.sok_proof)
}

/// Linked ⟺ same event id and equal tags.
pub fn lrs_link(a: &ProofOfLocation, b: &ProofOfLocation) -> bool {
    a.event_id == b.event_id && a.tag == b.tag
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn setup(ring_size: usize) -> (Vec<LrsKeypair>, RingContext, Arc<IdealAttestor>) {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let keys: Vec<LrsKeypair> = (0..ring_size).map(|_| lrs_keygen(&mut rng)).collect();
        let ring = RingContext::new(keys.iter().map(|k| k.pk).collect()).unwrap();
        let attestor = IdealAttestor::new(SigKeypair::from_seed(SigBackend::InsecureStub, [4; 32]));
        (keys, ring, attestor)
    }

    #[test]
    fn tag_determinism_across_messages() {
        let (keys, ring, att) = setup(8);
        let e = [9u8; 32];
        let a = lrs_sign(e, &keys[3], [1; 32], &ring, 5, att.as_ref()).unwrap();
        let b = lrs_sign(e, &keys[3], [2; 32], &ring, 5, att.as_ref()).unwrap();
        assert_eq!(a.tag, b.tag);
        let c = lrs_sign([10u8; 32], &keys[3], [1; 32], &ring, 5, att.as_ref()).unwrap();
        assert_ne!(a.tag, c.tag);
    }

    #[test]
    fn sign_verify_and_wire_roundtrip() {
        let (keys, ring, att) = setup(8);
        let e = derive_event_id(&keys[0].sk, &[1; 8], 7);
        let pol = lrs_sign(e, &keys[2], [3; 32], &ring, 7, att.as_ref()).unwrap();
        assert!(lrs_verify(&e, &pol, &[3; 32], &ring.root(), 7, att.as_ref()));
        // Stale window fails statement reconstruction.
        assert!(!lrs_verify(&e, &pol, &[3; 32], &ring.root(), 8, att.as_ref()));
        let wire = pol.wire_bytes();
        let parsed = ProofOfLocation::from_wire(&wire, 7).unwrap();
        assert_eq!(parsed, pol);
    }

    #[test]
    fn outsider_cannot_sign() {
        let (_, ring, att) = setup(4);
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let outsider = lrs_keygen(&mut rng);
        assert_eq!(
            lrs_sign([0; 32], &outsider, [0; 32], &ring, 0, att.as_ref()).unwrap_err(),
            PolError::NotAMember
        );
    }

    #[test]
    fn link_requires_same_signer_and_event() {
        let (keys, ring, att) = setup(8);
        let e1 = [1u8; 32];
        let e2 = [2u8; 32];
        let a = lrs_sign(e1, &keys[0], [0; 32], &ring, 1, att.as_ref()).unwrap();
        let a2 = lrs_sign(e1, &keys[0], [9; 32], &ring, 1, att.as_ref()).unwrap();
        let b = lrs_sign(e1, &keys[1], [0; 32], &ring, 1, att.as_ref()).unwrap();
        let c = lrs_sign(e2, &keys[0], [0; 32], &ring, 1, att.as_ref()).unwrap();
        assert!(lrs_link(&a, &a2));
        assert!(!lrs_link(&a, &b));
        assert!(!lrs_link(&a, &c));
    }
}
