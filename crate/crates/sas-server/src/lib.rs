//! Service endpoint: work-before-service admission.
//!
//! Clients retrieve a signed puzzle from the spectrum database, solve it,
//! and present the token (puzzle, issuer signature, solution) together with
//! their proof of location. The server's stage order is fixed: issuer
//! signature, proof-of-work verification, replay log, proof of location,
//! then the optional commitment opening — each stage rejects with its own
//! code, and an invalid signature never triggers puzzle verification.

use std::collections::HashSet;
use std::sync::Arc;

use crypto_backends::{sha256_tagged, sig, SigBackend};
use location_proof::{lrs_verify, verify_opening, LocationCommitment, Opening, ProofOfLocation, SokBackend};
use pow::{PowError, Puzzle, Solution};
use spectrum_db::{puzzle_signing_message, BoundPuzzle};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TokenError {
    #[error("issuer signature invalid; refusing to spend work on an unsigned puzzle")]
    BadIssuerSignature,
    #[error("puzzle: {0}")]
    Pow(#[from] PowError),
}

/// Admission stages, doubling as rejection codes on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    IssuerSig = 1,
    PowVerify = 2,
    Replay = 3,
    Pol = 4,
    Opening = 5,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Granted,
    Rejected(Stage),
}

/// Decision record kept by the server for auditing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceDecision {
    pub outcome: Outcome,
    pub token_digest: [u8; 32],
}

impl ServiceDecision {
    /// Wire form: u8 outcome ∥ u8 stage code (0 when granted).
    pub fn encode(&self) -> [u8; 2] {
        match self.outcome {
            Outcome::Granted => [1, 0],
            Outcome::Rejected(stage) => [0, stage as u8],
        }
    }
}

/// The token of Alg-1 phase 4: puzzle section, issuer signature, solution.
/// θ and the validity window travel along because the signature covers them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub theta: u64,
    pub window_id: u64,
    /// The full signed puzzle section of the block.
    pub puzzle_section: Vec<u8>,
    /// Which puzzle of the section was solved.
    pub puzzle_index: u8,
    pub issuer_sig: Vec<u8>,
    pub solution: Vec<u8>,
}

impl Token {
    pub fn digest(&self) -> [u8; 32] {
        sha256_tagged(
            "service-token",
            &[&self.theta.to_le_bytes(), &self.window_id.to_le_bytes(), &self.puzzle_section, &self.solution],
        )
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.theta.to_le_bytes());
        out.extend_from_slice(&self.window_id.to_le_bytes());
        out.push(self.puzzle_index);
        for part in [&self.puzzle_section, &self.issuer_sig, &self.solution] {
            out.extend_from_slice(&(part.len() as u32).to_le_bytes());
            out.extend_from_slice(part);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<Token> {
        if bytes.len() < 17 {
            return None;
        }
        let theta = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let window_id = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let puzzle_index = bytes[16];
        let mut cur = 17usize;
        let mut parts = Vec::new();
        for _ in 0..3 {
            if cur + 4 > bytes.len() {
                return None;
            }
            let len = u32::from_le_bytes(bytes[cur..cur + 4].try_into().unwrap()) as usize;
            cur += 4;
            if cur + len > bytes.len() {
                return None;
            }
            parts.push(bytes[cur..cur + len].to_vec());
            cur += len;
        }
        if cur != bytes.len() {
            return None;
        }
        let solution = parts.pop().unwrap();
        let issuer_sig = parts.pop().unwrap();
        let puzzle_section = parts.pop().unwrap();
        Some(Token { theta, window_id, puzzle_section, puzzle_index, issuer_sig, solution })
    }
}

/// Parse a block's puzzle section into its puzzles.
pub fn parse_puzzle_section(section: &[u8]) -> Option<Vec<BoundPuzzle>> {
    let count = *section.first()? as usize;
    let mut cur = 1usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let head = section.get(cur..cur + 9)?;
        let kind = pow::PowKind::from_tag(head[0])?;
        let kappa = u32::from_le_bytes(head[1..5].try_into().unwrap());
        let len = u32::from_le_bytes(head[5..9].try_into().unwrap()) as usize;
        cur += 9;
        let bytes = section.get(cur..cur + len)?.to_vec();
        cur += len;
        out.push(BoundPuzzle { kind, kappa, bytes });
    }
    (cur == section.len()).then_some(out)
}

/// Client side: verify the issuer signature, then solve. An unsigned puzzle
/// aborts before any work is spent.
pub fn create_token(
    theta: u64,
    window_id: u64,
    puzzle_section: &[u8],
    issuer_sig: &[u8],
    puzzle_index: u8,
    psd_public: &[u8],
    backend: SigBackend,
) -> Result<Token, TokenError> {
    let msg = puzzle_signing_message(theta, window_id, puzzle_section);
    sig::verify(backend, psd_public, &msg, issuer_sig).map_err(|_| TokenError::BadIssuerSignature)?;
    let puzzles = parse_puzzle_section(puzzle_section)
        .ok_or_else(|| TokenError::Pow(PowError::Encoding("bad puzzle section".into())))?;
    let bound = puzzles
        .get(puzzle_index as usize)
        .ok_or_else(|| TokenError::Pow(PowError::Parameter("puzzle index out of range".into())))?;
    let puzzle = Puzzle::from_bytes(bound.kind, &bound.bytes)?;
    let solution = puzzle.solve()?;
    Ok(Token {
        theta,
        window_id,
        puzzle_section: puzzle_section.to_vec(),
        puzzle_index,
        issuer_sig: issuer_sig.to_vec(),
        solution: solution.to_bytes(),
    })
}

/// A full service request: token ∥ proof of location ∥ optional opening.
#[derive(Debug, Clone)]
pub struct ServiceRequest {
    pub token: Token,
    pub pol: ProofOfLocation,
    pub event_id: [u8; 32],
    pub opening: Option<Opening>,
}

impl ServiceRequest {
    pub fn encode(&self) -> Vec<u8> {
        let token = self.token.encode();
        let pol = self.pol.wire_bytes();
        let mut out = Vec::new();
        out.extend_from_slice(&self.pol.window_id.to_le_bytes());
        out.extend_from_slice(&self.event_id);
        out.extend_from_slice(&(token.len() as u32).to_le_bytes());
        out.extend_from_slice(&token);
        out.extend_from_slice(&(pol.len() as u32).to_le_bytes());
        out.extend_from_slice(&pol);
        match &self.opening {
            None => out.push(0),
            Some(o) => {
                out.push(1);
                out.extend_from_slice(&o.loc.x.to_le_bytes());
                out.extend_from_slice(&o.loc.y.to_le_bytes());
                out.extend_from_slice(&o.beacon_nonce);
                out.extend_from_slice(&o.window_id.to_le_bytes());
                out.extend_from_slice(&o.r);
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<ServiceRequest> {
        if bytes.len() < 44 {
            return None;
        }
        let window_id = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let event_id: [u8; 32] = bytes[8..40].try_into().unwrap();
        let mut cur = 40usize;
        let token_len = u32::from_le_bytes(bytes.get(cur..cur + 4)?.try_into().unwrap()) as usize;
        cur += 4;
        let token = Token::decode(bytes.get(cur..cur + token_len)?)?;
        cur += token_len;
        let pol_len = u32::from_le_bytes(bytes.get(cur..cur + 4)?.try_into().unwrap()) as usize;
        cur += 4;
        let pol = ProofOfLocation::from_wire(bytes.get(cur..cur + pol_len)?, window_id).ok()?;
        cur += pol_len;
        let opening = match *bytes.get(cur)? {
            0 => {
                cur += 1;
                None
            }
            1 => {
                cur += 1;
                let o = bytes.get(cur..cur + 36)?;
                cur += 36;
                Some(Opening {
                    loc: location_proof::LocXY {
                        x: u64::from_le_bytes(o[..8].try_into().unwrap()),
                        y: u64::from_le_bytes(o[8..16].try_into().unwrap()),
                    },
                    beacon_nonce: o[16..24].try_into().unwrap(),
                    window_id: u64::from_le_bytes(o[24..32].try_into().unwrap()),
                    r: o[32..36].try_into().unwrap(),
                })
            }
            _ => return None,
        };
        (cur == bytes.len()).then_some(ServiceRequest { token, pol, event_id, opening })
    }
}

/// The service endpoint.
pub struct SasServer {
    psd_public: Vec<u8>,
    sig_backend: SigBackend,
    ring_root: [u8; 32],
    sok_verifier: Arc<dyn SokBackend>,
    pub window_id: u64,
    replay_log: HashSet<[u8; 32]>,
    pub decisions: Vec<ServiceDecision>,
    /// Instrumentation: puzzle verifications attempted.
    pub pow_verify_calls: u64,
}

impl SasServer {
    pub fn new(
        psd_public: Vec<u8>,
        sig_backend: SigBackend,
        ring_root: [u8; 32],
        sok_verifier: Arc<dyn SokBackend>,
        window_id: u64,
    ) -> SasServer {
        SasServer {
            psd_public,
            sig_backend,
            ring_root,
            sok_verifier,
            window_id,
            replay_log: HashSet::new(),
            decisions: Vec::new(),
            pow_verify_calls: 0,
        }
    }

    /// Window rollover: the replay log is retained per validity window.
    pub fn roll_window(&mut self, window_id: u64) {
        self.window_id = window_id;
        self.replay_log.clear();
    }

    pub fn handle_service_request(&mut self, request: &ServiceRequest) -> ServiceDecision {
        let outcome = self.admit(request);
        let decision = ServiceDecision { outcome, token_digest: request.token.digest() };
        self.decisions.push(decision.clone());
        decision
    }

    fn admit(&mut self, request: &ServiceRequest) -> Outcome {
        let token = &request.token;
        // (1) issuer signature over (θ ∥ window ∥ puzzle section);
        let msg = puzzle_signing_message(token.theta, token.window_id, &token.puzzle_section);
        if sig::verify(self.sig_backend, &self.psd_public, &msg, &token.issuer_sig).is_err() {
            return Outcome::Rejected(Stage::IssuerSig);
        }
        // (2) proof of work;
        self.pow_verify_calls += 1;
        if !self.pow_solution_valid(token, &msg) {
            return Outcome::Rejected(Stage::PowVerify);
        }
        // (3) replay log: record-or-reject, keyed by hash(Π ∥ Ψ);
        let replay_key = sha256_tagged("token-replay", &[&token.puzzle_section, &token.solution]);
        if !self.replay_log.insert(replay_key) {
            return Outcome::Rejected(Stage::Replay);
        }
        // (4) proof of location for the current window;
        let ok = lrs_verify(
            &request.event_id,
            &request.pol,
            &request.pol.commitment,
            &self.ring_root,
            self.window_id,
            self.sok_verifier.as_ref(),
        );
        if !ok {
            return Outcome::Rejected(Stage::Pol);
        }
        // (5) optional commitment disclosure over the attested side channel.
        if let Some(opening) = &request.opening {
            let commitment = LocationCommitment { digest: request.pol.commitment };
            if !verify_opening(&commitment, opening) || opening.window_id != self.window_id {
                return Outcome::Rejected(Stage::Opening);
            }
        }
        Outcome::Granted
    }

    fn pow_solution_valid(&self, token: &Token, signed_msg: &[u8]) -> bool {
        let Some(puzzles) = parse_puzzle_section(&token.puzzle_section) else { return false };
        let Some(bound) = puzzles.get(token.puzzle_index as usize) else { return false };
        let Ok(puzzle) = Puzzle::from_bytes(bound.kind, &bound.bytes) else { return false };
        let Ok(solution) = Solution::from_bytes(bound.kind, &token.solution) else { return false };
        // The non-interactive challenge context binds the solution to the
        // signed puzzle message.
        puzzle.verify(&solution, signed_msg).is_ok()
    }

    /// Audit: no grant without a previously-unseen token in the log.
    pub fn replay_log_len(&self) -> usize {
        self.replay_log.len()
    }
}
