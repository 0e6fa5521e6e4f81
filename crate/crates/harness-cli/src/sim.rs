//! End-to-end simulation: database setup and binding, proof-of-location
//! acquisition, anonymized spectrum queries, token creation, and service
//! admission — for honest users, a flooder, and an attack matrix.

use std::sync::Arc;
use std::time::Instant;

use crypto_backends::{KemBackend, Prg, SigBackend, SigKeypair};
use location_proof::{
    commit_location, derive_event_id, lrs_keygen, lrs_sign, lrs_verify, rss_at_distance,
    AccessPoint, EnvParams, IdealAttestor, LocXY, LrsKeypair, Measurements, Opening, PolRequest,
    ProofOfLocation, RingContext,
};
use onion_transport::{
    parse_deliver, reply_frame, Circuit, CircuitBuilder, Directory, Frame, NetCtx, Node,
    OnionClient, RelayDescriptor, RelayNode, RelayRole, SimNet,
};
use parallel_kernels::KernelBackend;
use pir_core::oop::{oop_query_gen, OopLayout, OopServer, Seed};
use pir_core::wire::{bytes_to_words, WireFrame};
use pir_core::{ens, ftr, DEFAULT_FTR_MODULUS};
use psd_node::{PsdNode, RejectReason, SpectrumRequest};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sas_server::{create_token, SasServer, ServiceRequest, Stage, Token};
use spectrum_db::{
    build_matrix, db_index, db_unindex, BindConfig, DbEntryBlock, DbMatrix, IndexDims, SchemeId,
    SpectrumRecord,
};
use thiserror::Error;

use crate::config::{PowChoice, SchemeChoice, SimConfig};

const RELAY_IDS: [u32; 3] = [1, 2, 3];
const PSD_BASE: u32 = 10;
const SAS_ID: u32 = 200;

/// Request tags inside delivered payloads.
const REQ_SPECTRUM: u8 = 1;
const REQ_OOP_HANDSHAKE: u8 = 2;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulation assertion failed: {0}")]
    Assertion(String),
    #[error("{0}")]
    Infra(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    ReplayedPol,
    ForeignWindowPol,
    WrongRingSignature,
    UnsignedPuzzle,
    ReusedToken,
}

impl AttackKind {
    pub fn all() -> [AttackKind; 5] {
        [
            AttackKind::ReplayedPol,
            AttackKind::ForeignWindowPol,
            AttackKind::WrongRingSignature,
            AttackKind::UnsignedPuzzle,
            AttackKind::ReusedToken,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::ReplayedPol => "replayed-pol",
            AttackKind::ForeignWindowPol => "foreign-window-pol",
            AttackKind::WrongRingSignature => "wrong-ring-signature",
            AttackKind::UnsignedPuzzle => "unsigned-puzzle",
            AttackKind::ReusedToken => "reused-token",
        }
    }

    /// The rejection code this attack must map to: a PSD reason code for
    /// query-phase attacks, a service stage code otherwise.
    pub fn expected_code(&self) -> u8 {
        match self {
            AttackKind::ReplayedPol => RejectReason::RateLimited.code(),
            AttackKind::ForeignWindowPol => RejectReason::BadProof.code(),
            AttackKind::WrongRingSignature => RejectReason::BadProof.code(),
            AttackKind::UnsignedPuzzle => Stage::IssuerSig as u8,
            AttackKind::ReusedToken => Stage::Replay as u8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhaseRow {
    pub phase: &'static str,
    pub user: usize,
    pub ms: f64,
    pub wire_bytes: u64,
    pub outcome: String,
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub transcript_digest: [u8; 32],
    pub honest_total: usize,
    pub honest_granted: usize,
    pub attack_results: Vec<(AttackKind, u8)>,
    pub flood_attempts: usize,
    pub flood_accepted: usize,
    pub phase_rows: Vec<PhaseRow>,
    pub frames_total: usize,
    pub wire_bytes_total: u64,
}

impl SimReport {
    pub fn digest_hex(&self) -> String {
        hex::encode(self.transcript_digest)
    }
}

struct PsdAdapter {
    node: PsdNode,
    byzantine: bool,
}

impl Node for PsdAdapter {
    fn as_any(&self) -> Option<&dyn std::any::Any> {
        Some(self)
    }

    fn on_frame(&mut self, frame: &Frame, ctx: &mut NetCtx) {
        let Some((circuit, payload)) = parse_deliver(&frame.bytes) else { return };
        let reply = match payload.split_first() {
            Some((&REQ_SPECTRUM, body)) => match SpectrumRequest::decode(body) {
                None => vec![RejectReason::Protocol.code()],
                Some(request) => match self.node.handle_spectrum_query(&request) {
                    Ok(mut answer) => {
                        if self.byzantine {
                            // A lying replica flips its answer bits.
                            for b in answer.payload.iter_mut() {
                                *b ^= 0xff;
                            }
                        }
                        let mut out = vec![0u8];
                        out.extend_from_slice(&answer.encode());
                        out
                    }
                    Err(reason) => vec![reason.code()],
                },
            },
            Some((&REQ_OOP_HANDSHAKE, _)) => match self.node.oop.as_mut() {
                Some(server) => match server.handshake() {
                    Ok((session, seed)) => {
                        let mut out = vec![0u8];
                        out.extend_from_slice(&session.to_le_bytes());
                        out.extend_from_slice(&seed);
                        out
                    }
                    Err(_) => vec![RejectReason::Protocol.code()],
                },
                None => vec![RejectReason::Protocol.code()],
            },
            _ => vec![RejectReason::Protocol.code()],
        };
        ctx.send(frame.src, reply_frame(circuit, &reply));
    }
}

struct SasAdapter {
    server: SasServer,
}

impl Node for SasAdapter {
    fn as_any(&self) -> Option<&dyn std::any::Any> {
        Some(self)
    }

    fn on_frame(&mut self, frame: &Frame, ctx: &mut NetCtx) {
        let Some((circuit, payload)) = parse_deliver(&frame.bytes) else { return };
        let reply = match ServiceRequest::decode(payload) {
            None => vec![0u8, 0u8],
            Some(request) => self.server.handle_service_request(&request).encode().to_vec(),
        };
        ctx.send(frame.src, reply_frame(circuit, &reply));
    }
}

struct World {
    net: SimNet,
    directory: Directory,
    dims: IndexDims,
    window_id: u64,
    n_psd: usize,
    scheme: SchemeId,
    psd_public: Vec<u8>,
    sig_backend: SigBackend,
    kem_backend: KemBackend,
    ring: Arc<RingContext>,
    verify_handle: Arc<IdealAttestor>,
    aps: Vec<AccessPoint>,
    ap_keys: Vec<LrsKeypair>,
    oop_layout: Option<OopLayout>,
    env: EnvParams,
    ftr_t: usize,
    db: Arc<DbMatrix>,
    next_circuit: u32,
}

fn scheme_id(choice: SchemeChoice) -> SchemeId {
    match choice {
        SchemeChoice::Ens => SchemeId::Ens,
        SchemeChoice::Ftr => SchemeId::Ftr,
        SchemeChoice::Oop => SchemeId::Oop,
    }
}

fn build_world(cfg: &SimConfig, rng: &mut ChaCha12Rng) -> Result<World, SimError> {
    let window_id = 1u64;
    let sig_backend = if cfg.mldsa { SigBackend::MlDsa44 } else { SigBackend::InsecureStub };
    let kem_backend = if cfg.mldsa { KemBackend::MlKem768 } else { KemBackend::InsecureStub };

    // Synchronized record set over a flat grid.
    let dims = IndexDims { n_cols: cfg.db_rows as u32, n_rows: 1, n_ch: 1, n_tv: 1 };
    let records: Vec<SpectrumRecord> = (0..cfg.db_rows)
        .map(|theta| {
            let (coord, channel, time_window) = db_unindex(theta, &dims).unwrap();
            SpectrumRecord {
                coord,
                channel,
                time_window,
                eirp_centi_dbm: 3600 - (theta as i32 % 7) * 10,
                available: theta % 5 != 0,
                aux: vec![(theta % 251) as u8; 32],
            }
        })
        .collect();
    let unbound = build_matrix(&records, &dims, cfg.block_bytes * 8)
        .map_err(|e| SimError::Infra(format!("database build: {e}")))?;

    let mut issuer_seed = [0u8; 32];
    rng.fill_bytes(&mut issuer_seed);
    let issuer = SigKeypair::from_seed(sig_backend, issuer_seed);
    let mut bind_seed = [0u8; 32];
    rng.fill_bytes(&mut bind_seed);
    let bind = BindConfig {
        pow_kind: match cfg.pow_kind {
            PowChoice::Hct => pow::PowKind::Hct,
            PowChoice::Lbp => pow::PowKind::Lbp,
        },
        difficulties: vec![cfg.kappa],
        window_id,
        bind_seed,
    };
    let db = Arc::new(
        spectrum_db::puzzle_bind(&unbound, &issuer, &bind)
            .map_err(|e| SimError::Infra(format!("puzzle binding: {e}")))?,
    );

    // Region ring and access points.
    let ap_keys: Vec<LrsKeypair> = (0..cfg.ring_size).map(|_| lrs_keygen(rng)).collect();
    let ring = Arc::new(
        RingContext::new(ap_keys.iter().map(|k| k.pk).collect())
            .map_err(|e| SimError::Infra(e.to_string()))?,
    );
    let mut attestor_seed = [0u8; 32];
    rng.fill_bytes(&mut attestor_seed);
    let attestor = IdealAttestor::new(SigKeypair::from_seed(sig_backend, attestor_seed));
    let verify_handle = IdealAttestor::verify_only(sig_backend, attestor.public_key().to_vec());
    let env = EnvParams::default();
    let mut aps: Vec<AccessPoint> = ap_keys
        .iter()
        .enumerate()
        .map(|(i, k)| {
            AccessPoint::new(i as u64, k.clone(), ring.clone(), attestor.clone(), env, 50.0)
        })
        .collect();
    for ap in aps.iter_mut() {
        ap.issue_beacon(window_id, rng);
    }

    // Network: relays, replicas, service endpoint.
    let mut net = SimNet::new(cfg.link_delay);
    let mut directory = Directory::new(kem_backend);
    for (i, id) in RELAY_IDS.iter().enumerate() {
        let mut seed = [0u8; 64];
        rng.fill_bytes(&mut seed);
        let kp = crypto_backends::KemKeypair::from_seed(kem_backend, seed);
        let role = [RelayRole::Entry, RelayRole::Middle, RelayRole::Exit][i];
        directory.register(RelayDescriptor { node_id: *id, role, kem_public: kp.public_key().to_vec() });
        net.add_node(*id, Box::new(RelayNode::new(*id, kp)));
    }

    let scheme = scheme_id(cfg.scheme);
    let oop_layout = (scheme == SchemeId::Oop).then(|| OopLayout::shuffled(cfg.n_psd, cfg.n_psd, rng));
    let kernel = KernelBackend::DataParallel { workers: cfg.workers };
    for i in 0..cfg.n_psd {
        let mut node = PsdNode::new(
            i as u8,
            scheme,
            db.clone(),
            issuer.clone(),
            window_id,
            ring.root(),
            verify_handle.clone(),
            kernel,
        );
        if let Some(layout) = &oop_layout {
            let depth = cfg.n_users + cfg.flood_queries + 16;
            let mut server =
                OopServer::new(i as u8, layout.per_server[i].clone(), cfg.db_rows / cfg.n_psd, Prg::Shake256);
            server.preprocess(&db, depth, rng);
            node.oop = Some(server);
        }
        let byzantine = cfg.byzantine_psd && i == cfg.n_psd - 1;
        net.add_node(PSD_BASE + i as u32, Box::new(PsdAdapter { node, byzantine }));
    }

    let sas = SasServer::new(
        issuer.public_key().to_vec(),
        sig_backend,
        ring.root(),
        verify_handle.clone(),
        window_id,
    );
    net.add_node(SAS_ID, Box::new(SasAdapter { server: sas }));

    Ok(World {
        net,
        directory,
        dims,
        window_id,
        n_psd: cfg.n_psd,
        scheme,
        psd_public: issuer.public_key().to_vec(),
        sig_backend,
        kem_backend,
        ring,
        verify_handle,
        aps,
        ap_keys,
        oop_layout,
        env,
        ftr_t: cfg.ftr_privacy_t,
        db,
        next_circuit: 100,
    })
}

struct ClientOutcome {
    granted: bool,
    phase_rows: Vec<PhaseRow>,
}

impl World {
    fn wire_bytes(&self) -> u64 {
        self.net.transcript().iter().map(|e| e.len as u64).sum()
    }

    fn acquire_pol(
        &mut self,
        ap_index: usize,
        loc: LocXY,
        rng: &mut ChaCha12Rng,
    ) -> Result<(ProofOfLocation, [u8; 32], Opening), SimError> {
        let ap = &self.aps[ap_index];
        let beacon = ap.latest_beacon().expect("beacon issued at window start");
        let (commitment, opening) = commit_location(loc, &beacon, rng);
        let distance = 5.0 + (ap_index % 3) as f64;
        let measured = Measurements {
            rss_dbm: rss_at_distance(distance, &self.env),
            rtt_s: 2.0 * distance / self.env.c_mps,
        };
        let (pol, event_id) = ap
            .pol_respond(&PolRequest { beacon, commitment }, measured)
            .map_err(|e| SimError::Assertion(format!("honest proof rejected: {e:?}")))?;
        if !lrs_verify(
            &event_id,
            &pol,
            &commitment.digest,
            &self.ring.root(),
            self.window_id,
            self.verify_handle.as_ref(),
        ) {
            return Err(SimError::Assertion("client-side proof verification failed".into()));
        }
        Ok((pol, event_id, opening))
    }

    fn build_circuit(&mut self, rng: &mut ChaCha12Rng) -> Result<Circuit, SimError> {
        let id = self.next_circuit;
        self.next_circuit += 1;
        let builder = CircuitBuilder { kem_backend: self.kem_backend };
        builder
            .build(&mut self.net, &self.directory, id, rng)
            .map_err(|e| SimError::Infra(format!("circuit build: {e}")))
    }

    /// Send one spectrum request to one replica; returns the status byte and
    /// (for status 0) the answer frame.
    fn query_psd(
        &mut self,
        circuit: &mut Circuit,
        psd: usize,
        request: &SpectrumRequest,
    ) -> Result<(u8, Option<WireFrame>), SimError> {
        let mut msg = vec![REQ_SPECTRUM];
        msg.extend_from_slice(&request.encode());
        let replies = OnionClient::exchange(&mut self.net, circuit, PSD_BASE + psd as u32, &msg)
            .map_err(|e| SimError::Infra(format!("transport: {e}")))?;
        let reply = replies
            .first()
            .ok_or_else(|| SimError::Infra("no reply from replica".into()))?;
        match reply.split_first() {
            Some((&0, rest)) => {
                let frame = WireFrame::decode(rest)
                    .map_err(|e| SimError::Infra(format!("answer frame: {e}")))?;
                Ok((0, Some(frame)))
            }
            Some((&code, _)) => Ok((code, None)),
            None => Err(SimError::Infra("empty reply".into())),
        }
    }

    fn oop_handshake(
        &mut self,
        circuit: &mut Circuit,
        psd: usize,
    ) -> Result<(u64, Seed), SimError> {
        let replies = OnionClient::exchange(
            &mut self.net,
            circuit,
            PSD_BASE + psd as u32,
            &[REQ_OOP_HANDSHAKE],
        )
        .map_err(|e| SimError::Infra(format!("transport: {e}")))?;
        let reply = replies.first().ok_or_else(|| SimError::Infra("no handshake reply".into()))?;
        if reply.len() != 1 + 8 + 16 || reply[0] != 0 {
            return Err(SimError::Infra("offline handshake refused".into()));
        }
        let session = u64::from_le_bytes(reply[1..9].try_into().unwrap());
        let seed: Seed = reply[9..25].try_into().unwrap();
        Ok((session, seed))
    }

    /// The full retrieval: per-scheme query generation, fan-out, and
    /// reconstruction. Returns (block bytes, rejection codes observed).
    fn retrieve_block(
        &mut self,
        circuit: &mut Circuit,
        theta: usize,
        pol: &ProofOfLocation,
        event_id: [u8; 32],
        rng: &mut ChaCha12Rng,
    ) -> Result<Result<Vec<u8>, u8>, SimError> {
        let rows = self.db.rows();
        let make_request = |query: WireFrame, window: u64| SpectrumRequest {
            window_id: window,
            event_id,
            pol: pol.clone(),
            query,
        };
        match self.scheme {
            SchemeId::Ens => {
                let q = ens::ens_query_gen(theta, rows, self.n_psd, rng)
                    .map_err(|e| SimError::Infra(e.to_string()))?;
                let mut answers = Vec::new();
                for (i, share) in q.shares.iter().enumerate() {
                    let frame =
                        WireFrame { scheme: SchemeId::Ens, server_id: i as u8, payload: share.clone() };
                    let (code, ans) = self.query_psd(circuit, i, &make_request(frame, self.window_id))?;
                    if code != 0 {
                        return Ok(Err(code));
                    }
                    answers.push(Some(ans.unwrap().payload));
                }
                Ok(Ok(ens::ens_reconstruct(&answers).map_err(|e| SimError::Infra(e.to_string()))?))
            }
            SchemeId::Ftr => {
                let q = ftr::ftr_query_gen(theta, rows, self.n_psd, self.ftr_t, DEFAULT_FTR_MODULUS, rng)
                    .map_err(|e| SimError::Infra(e.to_string()))?;
                let mut responses = Vec::new();
                for (i, vec) in q.per_server.iter().enumerate() {
                    let frame = WireFrame {
                        scheme: SchemeId::Ftr,
                        server_id: i as u8,
                        payload: pir_core::wire::words_to_bytes(vec),
                    };
                    let (code, ans) = self.query_psd(circuit, i, &make_request(frame, self.window_id))?;
                    if code != 0 {
                        return Ok(Err(code));
                    }
                    let words = bytes_to_words(&ans.unwrap().payload)
                        .map_err(|e| SimError::Infra(e.to_string()))?;
                    responses.push((q.eval_points[i], words));
                }
                let radius = (responses.len() - self.ftr_t - 1) / 2;
                let block = ftr::ftr_reconstruct(
                    &responses,
                    self.ftr_t,
                    DEFAULT_FTR_MODULUS,
                    self.db.block_bytes(),
                    radius,
                )
                .map_err(|e| SimError::Infra(format!("robust reconstruction: {e}")))?;
                Ok(Ok(block))
            }
            SchemeId::Oop => {
                let layout = self.oop_layout.clone().expect("layout configured");
                let mut seeds = Vec::with_capacity(self.n_psd);
                for i in 0..self.n_psd {
                    seeds.push(self.oop_handshake(circuit, i)?);
                }
                let subs = oop_query_gen(theta, rows, &seeds, &layout, Prg::Shake256)
                    .map_err(|e| SimError::Infra(e.to_string()))?;
                let mut answers = Vec::new();
                for (i, sub) in subs.iter().enumerate() {
                    let mut payload = Vec::with_capacity(8 + sub.bits.len());
                    payload.extend_from_slice(&sub.session.to_le_bytes());
                    payload.extend_from_slice(&sub.bits);
                    let frame = WireFrame { scheme: SchemeId::Oop, server_id: i as u8, payload };
                    let (code, ans) = self.query_psd(circuit, i, &make_request(frame, self.window_id))?;
                    if code != 0 {
                        return Ok(Err(code));
                    }
                    answers.push(Some(ans.unwrap().payload));
                }
                Ok(Ok(pir_core::oop::oop_reconstruct(&answers)
                    .map_err(|e| SimError::Infra(e.to_string()))?))
            }
            SchemeId::Unassigned => Err(SimError::Infra("scheme unassigned".into())),
        }
    }

    fn service_request(
        &mut self,
        circuit: &mut Circuit,
        token: Token,
        pol: &ProofOfLocation,
        event_id: [u8; 32],
        opening: Option<Opening>,
    ) -> Result<(bool, u8), SimError> {
        let request = ServiceRequest { token, pol: pol.clone(), event_id, opening };
        let replies = OnionClient::exchange(&mut self.net, circuit, SAS_ID, &request.encode())
            .map_err(|e| SimError::Infra(format!("transport: {e}")))?;
        let reply = replies.first().ok_or_else(|| SimError::Infra("no service decision".into()))?;
        if reply.len() != 2 {
            return Err(SimError::Infra("malformed decision frame".into()));
        }
        Ok((reply[0] == 1, reply[1]))
    }

    /// The whole honest flow for one user.
    fn run_user(&mut self, user: usize, rng: &mut ChaCha12Rng) -> Result<ClientOutcome, SimError> {
        let mut rows = Vec::new();
        // Top row index is reserved for the attack matrix so honest tokens
        // never collide with the replayed one in the service log.
        let theta = rng.random_range(0..self.db.rows() - 1);
        let (coord, channel, time_window) = db_unindex(theta, &self.dims).unwrap();
        debug_assert_eq!(db_index(coord, channel, time_window, &self.dims).unwrap(), theta);
        let loc = LocXY { x: coord.cell_x as u64, y: coord.cell_y as u64 };
        // One AP per honest user: a tag binds (AP, window), so an AP's
        // allowance is consumed system-wide once a query under it is
        // accepted. The ring's tail is reserved for the attack matrix and
        // the flooder.
        let ap_index = user;

        // Phase: proof of location.
        let t0 = Instant::now();
        let bytes0 = self.wire_bytes();
        let (pol, event_id, opening) = self.acquire_pol(ap_index, loc, rng)?;
        rows.push(PhaseRow {
            phase: "pol",
            user,
            ms: t0.elapsed().as_secs_f64() * 1e3,
            wire_bytes: self.wire_bytes() - bytes0,
            outcome: "ok".into(),
        });

        // Phase: circuit creation.
        let t0 = Instant::now();
        let bytes0 = self.wire_bytes();
        let mut circuit = self.build_circuit(rng)?;
        rows.push(PhaseRow {
            phase: "circuit",
            user,
            ms: t0.elapsed().as_secs_f64() * 1e3,
            wire_bytes: self.wire_bytes() - bytes0,
            outcome: "ok".into(),
        });

        // Phase: spectrum query + reconstruction.
        let t0 = Instant::now();
        let bytes0 = self.wire_bytes();
        let block = match self.retrieve_block(&mut circuit, theta, &pol, event_id, rng)? {
            Ok(block) => block,
            Err(code) => {
                rows.push(PhaseRow {
                    phase: "query",
                    user,
                    ms: t0.elapsed().as_secs_f64() * 1e3,
                    wire_bytes: self.wire_bytes() - bytes0,
                    outcome: format!("rejected:{code:#04x}"),
                });
                return Ok(ClientOutcome { granted: false, phase_rows: rows });
            }
        };
        // Oracle: the retrieved block is exactly the database row.
        if block != self.db.row_bytes(theta) {
            return Err(SimError::Assertion(format!("user {user}: retrieved block mismatch")));
        }
        rows.push(PhaseRow {
            phase: "query",
            user,
            ms: t0.elapsed().as_secs_f64() * 1e3,
            wire_bytes: self.wire_bytes() - bytes0,
            outcome: "ok".into(),
        });

        // Phase: puzzle solving and token creation.
        let t0 = Instant::now();
        let entry = DbEntryBlock::decode(&block)
            .map_err(|e| SimError::Assertion(format!("block decode: {e}")))?;
        let token = create_token(
            theta as u64,
            self.window_id,
            &entry.puzzle_section(),
            &entry.issuer_sig,
            0,
            &self.psd_public,
            self.sig_backend,
        )
        .map_err(|e| SimError::Assertion(format!("token creation: {e}")))?;
        rows.push(PhaseRow {
            phase: "solve",
            user,
            ms: t0.elapsed().as_secs_f64() * 1e3,
            wire_bytes: 0,
            outcome: "ok".into(),
        });

        // Phase: service admission.
        let t0 = Instant::now();
        let bytes0 = self.wire_bytes();
        let (granted, stage) =
            self.service_request(&mut circuit, token, &pol, event_id, Some(opening))?;
        rows.push(PhaseRow {
            phase: "service",
            user,
            ms: t0.elapsed().as_secs_f64() * 1e3,
            wire_bytes: self.wire_bytes() - bytes0,
            outcome: if granted { "granted".into() } else { format!("stage:{stage}") },
        });
        Ok(ClientOutcome { granted, phase_rows: rows })
    }
}

pub fn run_sim(cfg: &SimConfig) -> Result<SimReport, SimError> {
    cfg.validate().map_err(|e| SimError::Infra(e.to_string()))?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut world = build_world(cfg, &mut rng)?;

    let mut phase_rows = Vec::new();
    let mut honest_granted = 0;
    for user in 0..cfg.n_users {
        let outcome = world.run_user(user, &mut rng)?;
        if outcome.granted {
            honest_granted += 1;
        }
        phase_rows.extend(outcome.phase_rows);
    }

    // Flooder: one AP identity, many fresh commitments in one window.
    let mut flood_accepted = 0;
    if cfg.flood_queries > 0 {
        let mut circuit = world.build_circuit(&mut rng)?;
        let flood_ap = world.aps.len() - 1;
        for _ in 0..cfg.flood_queries {
            let theta = rng.random_range(0..world.db.rows() - 1);
            let (pol, event_id, _) = world.acquire_pol(flood_ap, LocXY { x: 0, y: 0 }, &mut rng)?;
            match world.retrieve_block(&mut circuit, theta, &pol, event_id, &mut rng)? {
                Ok(_) => flood_accepted += 1,
                Err(code) => {
                    if code != RejectReason::RateLimited.code() {
                        return Err(SimError::Assertion(format!(
                            "flood query rejected with {code:#04x}, expected rate limit"
                        )));
                    }
                }
            }
        }
    }

    let attack_results = run_attacks(&mut world, &mut rng)?;

    let report = SimReport {
        transcript_digest: world.net.transcript_digest(),
        honest_total: cfg.n_users,
        honest_granted,
        attack_results,
        flood_attempts: cfg.flood_queries,
        flood_accepted,
        phase_rows,
        frames_total: world.net.transcript().len(),
        wire_bytes_total: world.wire_bytes(),
    };
    Ok(report)
}

/// The attack matrix: every archetype must land on its specific code.
fn run_attacks(world: &mut World, rng: &mut ChaCha12Rng) -> Result<Vec<(AttackKind, u8)>, SimError> {
    let mut results = Vec::new();
    let theta = world.db.rows() - 1;

    // A baseline honest proof and token to replay and tamper with; the four
    // APs just below the flooder's are reserved for this matrix.
    let ap_base = world.aps.len() - 5;
    let (pol, event_id, _) = world.acquire_pol(ap_base, LocXY { x: 1, y: 0 }, rng)?;
    let mut circuit = world.build_circuit(rng)?;
    let block = match world.retrieve_block(&mut circuit, theta, &pol, event_id, rng)? {
        Ok(b) => b,
        Err(code) => {
            return Err(SimError::Assertion(format!("baseline attack query rejected: {code:#04x}")))
        }
    };
    let entry = DbEntryBlock::decode(&block).map_err(|e| SimError::Assertion(e.to_string()))?;
    let token = create_token(
        theta as u64,
        world.window_id,
        &entry.puzzle_section(),
        &entry.issuer_sig,
        0,
        &world.psd_public,
        world.sig_backend,
    )
    .map_err(|e| SimError::Assertion(e.to_string()))?;

    for kind in AttackKind::all() {
        let observed = match kind {
            AttackKind::ReplayedPol => {
                // Same proof again in the same window: linked by tag.
                match world.retrieve_block(&mut circuit, theta, &pol, event_id, rng)? {
                    Ok(_) => 0,
                    Err(code) => code,
                }
            }
            AttackKind::ForeignWindowPol => {
                let old_window = world.window_id - 1;
                let ap_key = world.ap_keys[ap_base].clone();
                let old_nonce = [0x55u8; 8];
                let e = derive_event_id(&ap_key.sk, &old_nonce, old_window);
                let mut commit_rng = ChaCha12Rng::seed_from_u64(7777);
                let beacon = location_proof::Beacon {
                    ap_hint: 1,
                    window_id: old_window,
                    nonce: old_nonce,
                };
                let (commitment, _) = commit_location(LocXY { x: 1, y: 0 }, &beacon, &mut commit_rng);
                // Signed with the region's attestor, but for a past window.
                let stale = lrs_sign(
                    e,
                    &ap_key,
                    commitment.digest,
                    &world.ring,
                    old_window,
                    world.attestor_handle().as_ref(),
                )
                .map_err(|err| SimError::Infra(err.to_string()))?;
                match world.retrieve_block(&mut circuit, theta, &stale, e, rng)? {
                    Ok(_) => 0,
                    Err(code) => code,
                }
            }
            AttackKind::WrongRingSignature => {
                // A rogue ring the verifiers never accepted.
                let rogue_key = lrs_keygen(rng);
                let rogue_ring = RingContext::new(vec![rogue_key.pk]).unwrap();
                let beacon = world.aps[ap_base].latest_beacon().unwrap();
                let (commitment, _) = commit_location(LocXY { x: 2, y: 0 }, &beacon, rng);
                let e = derive_event_id(&rogue_key.sk, &beacon.nonce, world.window_id);
                let rogue = lrs_sign(
                    e,
                    &rogue_key,
                    commitment.digest,
                    &rogue_ring,
                    world.window_id,
                    world.attestor_handle().as_ref(),
                )
                .map_err(|err| SimError::Infra(err.to_string()))?;
                match world.retrieve_block(&mut circuit, theta, &rogue, e, rng)? {
                    Ok(_) => 0,
                    Err(code) => code,
                }
            }
            AttackKind::UnsignedPuzzle => {
                let mut bad = token.clone();
                bad.issuer_sig[16] ^= 0x01;
                let (pol2, e2, _) = world.acquire_pol(ap_base + 1, LocXY { x: 2, y: 0 }, rng)?;
                let (_, stage) = world.service_request(&mut circuit, bad, &pol2, e2, None)?;
                stage
            }
            AttackKind::ReusedToken => {
                let (pol2, e2, _) = world.acquire_pol(ap_base + 2, LocXY { x: 3, y: 0 }, rng)?;
                let (granted, _) =
                    world.service_request(&mut circuit, token.clone(), &pol2, e2, None)?;
                if !granted {
                    return Err(SimError::Assertion("first token use must be granted".into()));
                }
                let (pol3, e3, _) = world.acquire_pol(ap_base + 3, LocXY { x: 4, y: 0 }, rng)?;
                let (_, stage) =
                    world.service_request(&mut circuit, token.clone(), &pol3, e3, None)?;
                stage
            }
        };
        results.push((kind, observed));
    }
    Ok(results)
}

impl World {
    fn attestor_handle(&self) -> Arc<dyn location_proof::SokBackend> {
        // The attack construction needs a proving handle; the APs share one.
        self.aps[0].backend_handle()
    }
}
