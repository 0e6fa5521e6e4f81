//! Seed-masked chunk scheme with server-side offline precomputation.
//!
//! The database's r blocks split into n chunks of k = r/n blocks. Each
//! server owns one flip chunk (the flip chunks partition the database) plus
//! t−1 non-flip chunks. Offline, a server draws a seed S, expands it to a
//! k·(t−1)-bit mask over its non-flip chunks, folds the selected blocks into
//! a value A, and queues (S, A). The handshake hands the client one seed and
//! pins its A to the session. Online, the client builds e_θ, XORs in every
//! server's expanded mask, and sends each server only the k query bits of
//! that server's flip chunk; the answer is A ⊕ (bits · flip chunk), so the
//! online pass reads 1/n of the database. XOR of all n answers telescopes
//! every mask away, leaving the target block.

use std::collections::{HashMap, VecDeque};

use crypto_backends::{xof_bits, Prg};
use rand::RngCore;
use spectrum_db::DbMatrix;

use crate::PirError;

const MASK_DOMAIN: &str = "oop-chunk-mask";
/// Seed width λ in bytes.
pub const SEED_LEN: usize = 16;

pub type Seed = [u8; SEED_LEN];

/// One server's chunk assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerChunks {
    /// Chunk served online.
    pub flip: usize,
    /// Chunks covered by offline precomputation, in mask-slot order.
    pub nonflip: Vec<usize>,
}

/// Per-deployment chunk layout. Flip chunks must form a permutation of the
/// chunk set or reconstruction cannot telescope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OopLayout {
    pub n_chunks: usize,
    pub per_server: Vec<ServerChunks>,
}

impl OopLayout {
    /// Canonical layout: server i flips chunk i and covers the next t−1
    /// chunks cyclically.
    pub fn standard(n: usize, t: usize) -> OopLayout {
        let per_server = (0..n)
            .map(|i| ServerChunks {
                flip: i,
                nonflip: (1..t).map(|d| (i + d) % n).collect(),
            })
            .collect();
        OopLayout { n_chunks: n, per_server }
    }

    /// Random flip permutation and shuffled non-flip order; chunk order may
    /// differ per replica without affecting correctness.
    pub fn shuffled(n: usize, t: usize, rng: &mut dyn RngCore) -> OopLayout {
        let mut flips: Vec<usize> = (0..n).collect();
        shuffle(&mut flips, rng);
        let per_server = (0..n)
            .map(|i| {
                let flip = flips[i];
                let mut others: Vec<usize> = (0..n).filter(|&c| c != flip).collect();
                shuffle(&mut others, rng);
                others.truncate(t - 1);
                ServerChunks { flip, nonflip: others }
            })
            .collect();
        OopLayout { n_chunks: n, per_server }
    }

    pub fn validate(&self) -> Result<(), PirError> {
        let n = self.n_chunks;
        if self.per_server.len() != n {
            return Err(PirError::Parameter("one flip chunk per server is required".into()));
        }
        let mut seen = vec![false; n];
        for s in &self.per_server {
            if s.flip >= n || seen[s.flip] {
                return Err(PirError::Parameter(
                    "flip chunks must form a permutation of the chunk set".into(),
                ));
            }
            seen[s.flip] = true;
            if s.nonflip.iter().any(|&c| c >= n) {
                return Err(PirError::Parameter("non-flip chunk out of range".into()));
            }
        }
        Ok(())
    }
}

fn shuffle(v: &mut [usize], rng: &mut dyn RngCore) {
    for i in (1..v.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        v.swap(i, j);
    }
}

/// Expand a seed into the per-slot masks over a server's non-flip chunks.
fn expand_mask(prg: Prg, seed: &Seed, k: usize, slots: usize) -> Vec<u8> {
    xof_bits(prg, MASK_DOMAIN, seed, k * slots)
}

#[inline]
fn mask_bit(mask: &[u8], slot: usize, j: usize, k: usize) -> bool {
    let bit = slot * k + j;
    (mask[bit / 8] >> (bit % 8)) & 1 == 1
}

/// One server's offline queue and pinned sessions.
#[derive(Debug, Clone)]
pub struct OopServer {
    pub server_id: u8,
    pub chunks: ServerChunks,
    /// Blocks per chunk.
    pub k: usize,
    pub prg: Prg,
    queue: VecDeque<(Seed, Vec<u8>)>,
    pending: HashMap<u64, Vec<u8>>,
    next_session: u64,
}

impl OopServer {
    pub fn new(server_id: u8, chunks: ServerChunks, k: usize, prg: Prg) -> OopServer {
        OopServer {
            server_id,
            chunks,
            k,
            prg,
            queue: VecDeque::new(),
            pending: HashMap::new(),
            next_session: 1,
        }
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Client-independent precomputation: extend the queue with fresh (S, A)
    /// pairs covering the server's t−1 non-flip chunks.
    pub fn preprocess(&mut self, db: &DbMatrix, count: usize, rng: &mut dyn RngCore) {
        let slots = self.chunks.nonflip.len();
        for _ in 0..count {
            let mut seed = [0u8; SEED_LEN];
            rng.fill_bytes(&mut seed);
            let mask = expand_mask(self.prg, &seed, self.k, slots);
            let mut a = vec![0u8; db.block_bytes()];
            for (slot, &chunk) in self.chunks.nonflip.iter().enumerate() {
                for j in 0..self.k {
                    if mask_bit(&mask, slot, j, self.k) {
                        for (acc, b) in a.iter_mut().zip(db.row_bytes(chunk * self.k + j)) {
                            *acc ^= b;
                        }
                    }
                }
            }
            self.queue.push_back((seed, a));
        }
    }

    /// Pop one precomputed pair, pin its value to a fresh session, and hand
    /// the seed to the client.
    pub fn handshake(&mut self) -> Result<(u64, Seed), PirError> {
        let (seed, a) = self.queue.pop_front().ok_or(PirError::Backpressure)?;
        let session = self.next_session;
        self.next_session += 1;
        self.pending.insert(session, a);
        Ok((session, seed))
    }

    /// Online answer: pinned A ⊕ fold of the flip chunk under the k query
    /// bits. Consumes the session; a second use is rejected.
    pub fn respond(&mut self, db: &DbMatrix, session: u64, q_bits: &[u8]) -> Result<Vec<u8>, PirError> {
        if q_bits.len() != self.k.div_ceil(8) {
            return Err(PirError::Geometry(format!(
                "sub-query is {} bytes for a {}-block chunk",
                q_bits.len(),
                self.k
            )));
        }
        let mut answer = self.pending.remove(&session).ok_or(PirError::SessionReplay)?;
        let base = self.chunks.flip * self.k;
        for j in 0..self.k {
            if (q_bits[j / 8] >> (j % 8)) & 1 == 1 {
                for (acc, b) in answer.iter_mut().zip(db.row_bytes(base + j)) {
                    *acc ^= b;
                }
            }
        }
        Ok(answer)
    }
}

/// Whole-deployment state: every server's queue plus the shared geometry.
#[derive(Debug, Clone)]
pub struct OopState {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub layout: OopLayout,
    pub servers: Vec<OopServer>,
    pub prg: Prg,
}

/// Build per-server offline state over a replicated database.
/// Full replication (t = n) matches servers holding identical data.
pub fn oop_preprocess(
    db: &DbMatrix,
    layout: &OopLayout,
    t: usize,
    queue_depth: usize,
    prg: Prg,
    rng: &mut dyn RngCore,
) -> Result<OopState, PirError> {
    layout.validate()?;
    let n = layout.n_chunks;
    if t == 0 || t > n {
        return Err(PirError::Parameter(format!("replication t={t} outside [1, {n}]")));
    }
    if db.rows() % n != 0 {
        return Err(PirError::Geometry(format!(
            "{} rows do not split into {n} equal chunks",
            db.rows()
        )));
    }
    if layout.per_server.iter().any(|s| s.nonflip.len() != t - 1) {
        return Err(PirError::Parameter("each server must cover exactly t−1 non-flip chunks".into()));
    }
    let k = db.rows() / n;
    let mut servers = Vec::with_capacity(n);
    for (i, chunks) in layout.per_server.iter().enumerate() {
        let mut s = OopServer::new(i as u8, chunks.clone(), k, prg);
        s.preprocess(db, queue_depth, rng);
        servers.push(s);
    }
    Ok(OopState { n, t, k, layout: layout.clone(), servers, prg })
}

/// One server's online sub-query: the session it answers under and k bits
/// over that server's flip chunk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OopSubQuery {
    pub session: u64,
    pub bits: Vec<u8>,
}

/// Build the n sub-queries for index θ from the seeds obtained in the
/// offline handshakes (one per server, in server order).
pub fn oop_query_gen(
    theta: usize,
    rows: usize,
    seeds: &[(u64, Seed)],
    layout: &OopLayout,
    prg: Prg,
) -> Result<Vec<OopSubQuery>, PirError> {
    layout.validate()?;
    let n = layout.n_chunks;
    if seeds.len() != n {
        return Err(PirError::Incomplete { have: seeds.len(), need: n });
    }
    if rows % n != 0 {
        return Err(PirError::Geometry(format!("{rows} rows do not split into {n} equal chunks")));
    }
    let k = rows / n;
    if theta >= rows {
        return Err(PirError::Parameter(format!("index {theta} outside [0, {rows})")));
    }

    // Full selector with every server's expanded mask folded in.
    let mut full = vec![0u8; rows.div_ceil(8)];
    full[theta / 8] ^= 1 << (theta % 8);
    for (i, (_, seed)) in seeds.iter().enumerate() {
        let slots = layout.per_server[i].nonflip.len();
        let mask = expand_mask(prg, seed, k, slots);
        for (slot, &chunk) in layout.per_server[i].nonflip.iter().enumerate() {
            for j in 0..k {
                if mask_bit(&mask, slot, j, k) {
                    let bit = chunk * k + j;
                    full[bit / 8] ^= 1 << (bit % 8);
                }
            }
        }
    }

    // Residual restricted to each server's flip chunk.
    Ok((0..n)
        .map(|i| {
            let base = layout.per_server[i].flip * k;
            let mut bits = vec![0u8; k.div_ceil(8)];
            for j in 0..k {
                let bit = base + j;
                if (full[bit / 8] >> (bit % 8)) & 1 == 1 {
                    bits[j / 8] |= 1 << (j % 8);
                }
            }
            OopSubQuery { session: seeds[i].0, bits }
        })
        .collect())
}

/// XOR of all n answers.
pub fn oop_reconstruct(responses: &[Option<Vec<u8>>]) -> Result<Vec<u8>, PirError> {
    crate::ens::ens_reconstruct(responses)
}
