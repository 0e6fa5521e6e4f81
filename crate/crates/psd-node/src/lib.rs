//! A private spectrum database server.
//!
//! Each node holds one immutable replica, verifies the proof of location
//! attached to every query, enforces the per-(AP, window) rate limit through
//! tag linkability, and only then answers the retrieval query. Check order
//! is fixed: proof verification, link check, record, respond — a request
//! that is both invalid and linked reports the proof failure.

use std::collections::HashSet;
use std::sync::Arc;

use crypto_backends::SigKeypair;
use location_proof::{lrs_verify, ProofOfLocation, SokBackend};
use parallel_kernels::KernelBackend;
use pir_core::oop::{OopServer, OopSubQuery};
use pir_core::wire::{bytes_to_words, words_to_bytes, WireFrame};
use pir_core::{ens, ftr, PirError};
use spectrum_db::{puzzle_signing_message, BindConfig, DbMatrix, SchemeId};
use thiserror::Error;

/// One-byte rejection codes carried on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    BadProof = 0x01,
    RateLimited = 0x02,
    Protocol = 0x03,
}

impl RejectReason {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<RejectReason> {
        match c {
            0x01 => Some(RejectReason::BadProof),
            0x02 => Some(RejectReason::RateLimited),
            0x03 => Some(RejectReason::Protocol),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PsdError {
    #[error("pir: {0}")]
    Pir(#[from] PirError),
    #[error("database: {0}")]
    Db(#[from] spectrum_db::DbError),
}

/// A spectrum query as received over the anonymity transport:
/// window ∥ event-id ∥ proof-blob-len ∥ proof blob ∥ query frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumRequest {
    pub window_id: u64,
    pub event_id: [u8; 32],
    pub pol: ProofOfLocation,
    pub query: WireFrame,
}

impl SpectrumRequest {
    pub fn encode(&self) -> Vec<u8> {
        let pol = self.pol.wire_bytes();
        let query = self.query.encode();
        let mut out = Vec::with_capacity(48 + pol.len() + query.len());
        out.extend_from_slice(&self.window_id.to_le_bytes());
        out.extend_from_slice(&self.event_id);
        out.extend_from_slice(&(pol.len() as u32).to_le_bytes());
        out.extend_from_slice(&pol);
        out.extend_from_slice(&query);
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<SpectrumRequest> {
        if bytes.len() < 44 {
            return None;
        }
        let window_id = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let event_id: [u8; 32] = bytes[8..40].try_into().unwrap();
        let pol_len = u32::from_le_bytes(bytes[40..44].try_into().unwrap()) as usize;
        if bytes.len() < 44 + pol_len {
            return None;
        }
        let pol = ProofOfLocation::from_wire(&bytes[44..44 + pol_len], window_id).ok()?;
        let query = WireFrame::decode(&bytes[44 + pol_len..]).ok()?;
        Some(SpectrumRequest { window_id, event_id, pol, query })
    }
}

/// Server state: one logical writer, immutable database shared with readers.
pub struct PsdNode {
    pub server_id: u8,
    pub scheme: SchemeId,
    db: Arc<DbMatrix>,
    sig: SigKeypair,
    window_id: u64,
    pol_log: HashSet<([u8; 32], [u8; 32])>,
    ring_root: [u8; 32],
    sok_verifier: Arc<dyn SokBackend>,
    kernel: KernelBackend,
    ftr_view: Option<ftr::FtrDbView>,
    pub oop: Option<OopServer>,
    /// Accepted queries this window, for rate-bound assertions.
    pub accepted_this_window: u64,
}

impl PsdNode {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        server_id: u8,
        scheme: SchemeId,
        db: Arc<DbMatrix>,
        sig: SigKeypair,
        window_id: u64,
        ring_root: [u8; 32],
        sok_verifier: Arc<dyn SokBackend>,
        kernel: KernelBackend,
    ) -> PsdNode {
        let ftr_view = (scheme == SchemeId::Ftr)
            .then(|| ftr::FtrDbView::new(&db, pir_core::DEFAULT_FTR_MODULUS));
        PsdNode {
            server_id,
            scheme,
            db,
            sig,
            window_id,
            pol_log: HashSet::new(),
            ring_root,
            sok_verifier,
            kernel,
            ftr_view,
            oop: None,
            accepted_this_window: 0,
        }
    }

    pub fn db(&self) -> &DbMatrix {
        &self.db
    }

    pub fn window_id(&self) -> u64 {
        self.window_id
    }

    pub fn public_key(&self) -> &[u8] {
        self.sig.public_key()
    }

    /// Alg-1 response path. Returns the PIR answer frame or a rejection.
    pub fn handle_spectrum_query(&mut self, request: &SpectrumRequest) -> Result<WireFrame, RejectReason> {
        // (1) proof of location, bound to the current window;
        if request.window_id != self.window_id {
            return Err(RejectReason::BadProof);
        }
        let ok = lrs_verify(
            &request.event_id,
            &request.pol,
            &request.pol.commitment,
            &self.ring_root,
            self.window_id,
            self.sok_verifier.as_ref(),
        );
        if !ok {
            return Err(RejectReason::BadProof);
        }
        // (2) link check against this window's log;
        let link_key = (request.pol.event_id, request.pol.tag);
        if self.pol_log.contains(&link_key) {
            return Err(RejectReason::RateLimited);
        }
        // (3) record;
        self.pol_log.insert(link_key);
        // (4) answer.
        let payload = self.respond_pir(&request.query).map_err(|_| RejectReason::Protocol)?;
        self.accepted_this_window += 1;
        Ok(WireFrame { scheme: self.scheme, server_id: self.server_id, payload })
    }

    fn respond_pir(&mut self, query: &WireFrame) -> Result<Vec<u8>, PsdError> {
        if query.scheme != self.scheme {
            return Err(PsdError::Pir(PirError::Parameter("scheme mismatch".into())));
        }
        match self.scheme {
            SchemeId::Ens => Ok(ens::ens_respond(&query.payload, &self.db)?),
            SchemeId::Ftr => {
                let view = self.ftr_view.as_ref().expect("view built for scheme");
                let vec = bytes_to_words(&query.payload)?;
                Ok(words_to_bytes(&ftr::ftr_respond(&vec, view)?))
            }
            SchemeId::Oop => {
                if query.payload.len() < 8 {
                    return Err(PsdError::Pir(PirError::Wire("missing session id".into())));
                }
                let session = u64::from_le_bytes(query.payload[..8].try_into().unwrap());
                let sub = OopSubQuery { session, bits: query.payload[8..].to_vec() };
                let server = self
                    .oop
                    .as_mut()
                    .ok_or(PsdError::Pir(PirError::Parameter("offline state missing".into())))?;
                Ok(server.respond(&self.db, sub.session, &sub.bits)?)
            }
            SchemeId::Unassigned => Err(PsdError::Pir(PirError::Parameter("no scheme".into()))),
        }
    }

    /// Batched answering for queued share queries (scheme-homogeneous).
    pub fn respond_batch(&mut self, queries: &[WireFrame]) -> Result<Vec<WireFrame>, PsdError> {
        match self.scheme {
            SchemeId::Ens => {
                let shares: Vec<Vec<u8>> = queries.iter().map(|q| q.payload.clone()).collect();
                let outs = ens::ens_respond_batch(&shares, &self.db, self.kernel)?;
                Ok(outs
                    .into_iter()
                    .map(|payload| WireFrame { scheme: self.scheme, server_id: self.server_id, payload })
                    .collect())
            }
            SchemeId::Ftr => {
                let view = self.ftr_view.as_ref().expect("view built for scheme");
                let vecs: Result<Vec<Vec<u32>>, PirError> =
                    queries.iter().map(|q| bytes_to_words(&q.payload)).collect();
                let outs = ftr::ftr_respond_batch(&vecs?, view, self.kernel)?;
                Ok(outs
                    .into_iter()
                    .map(|w| WireFrame {
                        scheme: self.scheme,
                        server_id: self.server_id,
                        payload: words_to_bytes(&w),
                    })
                    .collect())
            }
            _ => queries.iter().map(|q| self.respond_pir(q).map(|payload| WireFrame {
                scheme: self.scheme,
                server_id: self.server_id,
                payload,
            })).collect(),
        }
    }

    /// Periodic refresh: bind fresh puzzles for the new validity window and
    /// rotate the proof log. Produces a new immutable replica.
    pub fn refresh_puzzles(&mut self, cfg: &BindConfig) -> Result<(), PsdError> {
        let rebound = spectrum_db::puzzle_bind(&self.db, &self.sig, cfg)?;
        self.db = Arc::new(rebound);
        if self.scheme == SchemeId::Ftr {
            self.ftr_view = Some(ftr::FtrDbView::new(&self.db, pir_core::DEFAULT_FTR_MODULUS));
        }
        self.window_id = cfg.window_id;
        self.pol_log.clear();
        self.accepted_this_window = 0;
        Ok(())
    }

    /// Issuer signature over (θ ∥ puzzle section ∥ validity window).
    pub fn sign_puzzle(&self, theta: u64, puzzle_section: &[u8]) -> Vec<u8> {
        let msg = puzzle_signing_message(theta, self.window_id, puzzle_section);
        self.sig.sign(&msg)
    }
}
