//! Client-side circuit construction and layered messaging.

use crypto_backends::{kem, Aead256, KemBackend};
use rand::RngCore;

use crate::cell::{handshake_chunks, Cell, Command, Terminal, DATA_CHUNK};
use crate::directory::Directory;
use crate::net::{Frame, NodeId, SimNet};
use crate::relay::{back_aad, fwd_aad, FRAME_CELL, HANDSHAKE_CHUNK};
use crate::OnionError;

struct Hop {
    node: NodeId,
    key: Aead256,
    fwd_count: u64,
    back_count: u64,
}

/// An open three-hop circuit. Keys are never reused across circuits; all
/// nonces are direction-scoped counters per hop.
pub struct Circuit {
    pub id: u32,
    hops: Vec<Hop>,
    next_msg_id: u32,
    state: CircuitHealth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CircuitHealth {
    Open,
    Closed,
}

impl Circuit {
    pub fn entry(&self) -> NodeId {
        self.hops[0].node
    }

    pub fn hop_nodes(&self) -> Vec<NodeId> {
        self.hops.iter().map(|h| h.node).collect()
    }

    pub fn is_open(&self) -> bool {
        self.state == CircuitHealth::Open
    }
}

/// Builds circuits for one client over the simulated network.
pub struct CircuitBuilder {
    pub kem_backend: KemBackend,
}

impl CircuitBuilder {
    /// Telescoping build: CREATE to the entry, then one EXTEND per further
    /// hop, each tunnelled through the already-established prefix.
    pub fn build(
        &self,
        net: &mut SimNet,
        directory: &Directory,
        circuit_id: u32,
        rng: &mut dyn RngCore,
    ) -> Result<Circuit, OnionError> {
        let path = directory.select_path()?;
        let mut circuit =
            Circuit { id: circuit_id, hops: Vec::with_capacity(3), next_msg_id: 1, state: CircuitHealth::Open };

        for (depth, relay) in path.iter().enumerate() {
            let mut entropy = [0u8; 32];
            rng.fill_bytes(&mut entropy);
            let (ct, shared) = kem::encapsulate(self.kem_backend, &relay.kem_public, entropy)
                .map_err(|e| OnionError::Kem(e.to_string()))?;

            if depth == 0 {
                for (idx, count, chunk) in handshake_chunks(&ct, HANDSHAKE_CHUNK) {
                    let mut body = Vec::with_capacity(5 + chunk.len());
                    body.extend_from_slice(&(ct.len() as u16).to_le_bytes());
                    body.push(idx);
                    body.push(count);
                    body.push(0); // entry depth
                    body.extend_from_slice(&chunk);
                    let cell = Cell { circuit_id, command: Command::Create, body };
                    send_cell_from_client(net, relay.node_id, &cell);
                }
                let inbox = net.pump();
                let created = find_cell(&inbox, circuit_id, Command::Created);
                if created.is_none() {
                    return Err(OnionError::Build("entry did not acknowledge".into()));
                }
            } else {
                for (idx, count, chunk) in handshake_chunks(&ct, HANDSHAKE_CHUNK) {
                    let term = Terminal::Extend {
                        next: relay.node_id,
                        total: ct.len() as u16,
                        idx,
                        count,
                        chunk,
                    };
                    // Addressed to the last established hop: wrapped once per
                    // established layer.
                    let cell = seal_onion(&mut circuit, circuit_id, &term.padded(depth));
                    send_cell_from_client(net, circuit.entry(), &cell);
                }
                let inbox = net.pump();
                let Some(back) = find_cell(&inbox, circuit_id, Command::OnionBack) else {
                    return Err(OnionError::Build(format!("no extension ack at depth {depth}")));
                };
                match open_onion(&mut circuit, circuit_id, &back)? {
                    Terminal::Extended => {}
                    other => {
                        return Err(OnionError::Build(format!(
                            "unexpected control during build: {other:?}"
                        )))
                    }
                }
            }
            circuit.hops.push(Hop {
                node: relay.node_id,
                key: Aead256::new(&shared),
                fwd_count: 0,
                back_count: 0,
            });
        }
        Ok(circuit)
    }
}

fn send_cell_from_client(net: &mut SimNet, dst: NodeId, cell: &Cell) {
    let mut frame = vec![FRAME_CELL];
    frame.extend_from_slice(&cell.encode());
    net.send_from_client(dst, frame);
}

fn find_cell(inbox: &[Frame], circuit_id: u32, command: Command) -> Option<Cell> {
    inbox.iter().find_map(|f| {
        if f.bytes.first() != Some(&FRAME_CELL) {
            return None;
        }
        let cell = Cell::decode(&f.bytes[1..]).ok()?;
        (cell.circuit_id == circuit_id && cell.command == command).then_some(cell)
    })
}

/// Wrap a plaintext for the current hop set: innermost layer is the last
/// hop's key, outermost the entry's.
fn seal_onion(circuit: &mut Circuit, circuit_id: u32, plaintext: &[u8]) -> Cell {
    let mut body = plaintext.to_vec();
    for hop in circuit.hops.iter_mut().rev() {
        let nonce = Aead256::nonce(0, 0, hop.fwd_count);
        hop.fwd_count += 1;
        body = hop.key.seal(&nonce, &fwd_aad(circuit_id), &body);
    }
    Cell { circuit_id, command: Command::Onion, body }
}

/// Strip every established hop's backward layer and parse the terminal.
fn open_onion(circuit: &mut Circuit, circuit_id: u32, cell: &Cell) -> Result<Terminal, OnionError> {
    let mut body = cell.body.clone();
    for hop in circuit.hops.iter_mut() {
        let nonce = Aead256::nonce(1, 0, hop.back_count);
        hop.back_count += 1;
        body = hop
            .key
            .open(&nonce, &back_aad(circuit_id), &body)
            .ok_or(OnionError::Teardown)?;
    }
    match Terminal::parse(&body) {
        Some(Ok(t)) => Ok(t),
        _ => Err(OnionError::Frame("backward cell is not a terminal payload".into())),
    }
}

/// Messaging over an open circuit.
pub struct OnionClient;

impl OnionClient {
    /// Send `message` to `destination` through the circuit and collect every
    /// reply message that arrives while the network drains.
    pub fn exchange(
        net: &mut SimNet,
        circuit: &mut Circuit,
        destination: NodeId,
        message: &[u8],
    ) -> Result<Vec<Vec<u8>>, OnionError> {
        if !circuit.is_open() {
            return Err(OnionError::Teardown);
        }
        let msg_id = circuit.next_msg_id;
        circuit.next_msg_id += 1;

        let mut payload = Vec::with_capacity(4 + message.len());
        payload.extend_from_slice(&destination.to_le_bytes());
        payload.extend_from_slice(message);
        let chunks: Vec<&[u8]> =
            if payload.is_empty() { vec![&[]] } else { payload.chunks(DATA_CHUNK).collect() };
        let total = chunks.len() as u16;
        let depth = circuit.hops.len();
        for (i, chunk) in chunks.into_iter().enumerate() {
            let term = Terminal::DataFrag { msg_id, idx: i as u16, total, chunk: chunk.to_vec() };
            let cell = seal_onion(circuit, circuit.id, &term.padded(depth));
            send_cell_from_client(net, circuit.entry(), &cell);
        }
        let inbox = net.pump();
        Self::receive(circuit, &inbox)
    }

    /// Unwrap backward cells addressed to this circuit and reassemble the
    /// contained messages.
    pub fn receive(circuit: &mut Circuit, inbox: &[Frame]) -> Result<Vec<Vec<u8>>, OnionError> {
        let mut assemblies: Vec<(u32, u16, Vec<Option<Vec<u8>>>)> = Vec::new();
        for frame in inbox {
            if frame.bytes.first() != Some(&FRAME_CELL) {
                continue;
            }
            let Ok(cell) = Cell::decode(&frame.bytes[1..]) else { continue };
            if cell.circuit_id != circuit.id {
                continue;
            }
            match cell.command {
                Command::Destroy => {
                    circuit.state = CircuitHealth::Closed;
                    return Err(OnionError::Teardown);
                }
                Command::OnionBack => {
                    let term = open_onion(circuit, circuit.id, &cell)?;
                    if let Terminal::DataFrag { msg_id, idx, total, chunk } = term {
                        let entry = assemblies.iter_mut().find(|(id, _, _)| *id == msg_id);
                        let slot = match entry {
                            Some(e) => e,
                            None => {
                                assemblies.push((msg_id, total, vec![None; total as usize]));
                                assemblies.last_mut().unwrap()
                            }
                        };
                        if (idx as usize) < slot.2.len() {
                            slot.2[idx as usize] = Some(chunk);
                        }
                    }
                }
                _ => {}
            }
        }
        let mut messages = Vec::new();
        for (_, _, chunks) in assemblies {
            if chunks.iter().all(|c| c.is_some()) {
                let mut m = Vec::new();
                for c in chunks {
                    m.extend_from_slice(&c.unwrap());
                }
                messages.push(m);
            }
        }
        Ok(messages)
    }
}
