//! Deterministic discrete-event network.
//!
//! Frames are delivered in (time, sequence) order with configurable
//! per-link delay. Nodes are single-threaded actors; the driving client is
//! outside the event loop and collects its inbound frames when pumping.
//! Every delivery lands in the transcript exactly once.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crypto_backends::sha256_tagged;

pub type NodeId = u32;

/// Reserved id for the driving client.
pub const CLIENT_NODE: NodeId = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub src: NodeId,
    pub dst: NodeId,
    pub bytes: Vec<u8>,
}

/// Outbound queue handed to a node while it processes a frame.
pub struct NetCtx {
    out: Vec<Frame>,
    src: NodeId,
}

impl NetCtx {
    pub fn send(&mut self, dst: NodeId, bytes: Vec<u8>) {
        self.out.push(Frame { src: self.src, dst, bytes });
    }
}

pub trait Node {
    fn on_frame(&mut self, frame: &Frame, ctx: &mut NetCtx);

    /// Introspection hook for tests and harness assertions.
    fn as_any(&self) -> Option<&dyn std::any::Any> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub time: u64,
    pub seq: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub len: usize,
    pub digest: [u8; 32],
}

pub struct SimNet {
    nodes: HashMap<NodeId, Box<dyn Node>>,
    queue: BinaryHeap<Reverse<(u64, u64, NodeId, NodeId)>>,
    payloads: HashMap<(u64, u64), Vec<u8>>,
    clock: u64,
    seq: u64,
    default_delay: u64,
    link_delay: HashMap<(NodeId, NodeId), u64>,
    transcript: Vec<TranscriptEntry>,
    /// Full frame copies for introspection tests (sentinel scans).
    pub recorded_frames: Vec<Frame>,
    pub record_payloads: bool,
    client_inbox: Vec<Frame>,
}

impl SimNet {
    pub fn new(default_delay: u64) -> SimNet {
        SimNet {
            nodes: HashMap::new(),
            queue: BinaryHeap::new(),
            payloads: HashMap::new(),
            clock: 0,
            seq: 0,
            default_delay,
            link_delay: HashMap::new(),
            transcript: Vec::new(),
            recorded_frames: Vec::new(),
            record_payloads: true,
            client_inbox: Vec::new(),
        }
    }

    pub fn add_node(&mut self, id: NodeId, node: Box<dyn Node>) {
        assert!(id != CLIENT_NODE, "node id 0 is reserved for the client");
        assert!(self.nodes.insert(id, node).is_none(), "duplicate node id {id}");
    }

    pub fn set_link_delay(&mut self, src: NodeId, dst: NodeId, delay: u64) {
        self.link_delay.insert((src, dst), delay);
    }

    pub fn now(&self) -> u64 {
        self.clock
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Digest of the whole transcript, stable across identical runs.
    pub fn transcript_digest(&self) -> [u8; 32] {
        let mut buf = Vec::with_capacity(self.transcript.len() * 64);
        for e in &self.transcript {
            buf.extend_from_slice(&e.time.to_le_bytes());
            buf.extend_from_slice(&e.seq.to_le_bytes());
            buf.extend_from_slice(&e.src.to_le_bytes());
            buf.extend_from_slice(&e.dst.to_le_bytes());
            buf.extend_from_slice(&(e.len as u64).to_le_bytes());
            buf.extend_from_slice(&e.digest);
        }
        sha256_tagged("sim-transcript", &[&buf])
    }

    pub fn send_from_client(&mut self, dst: NodeId, bytes: Vec<u8>) {
        self.enqueue(Frame { src: CLIENT_NODE, dst, bytes });
    }

    /// Inject a frame under an arbitrary source identity (Byzantine
    /// behaviour in tests).
    pub fn inject(&mut self, src: NodeId, dst: NodeId, bytes: Vec<u8>) {
        self.enqueue(Frame { src, dst, bytes });
    }

    /// Immutable introspection of a node through its `as_any` hook.
    pub fn inspect<T: 'static, R>(&self, id: NodeId, f: impl FnOnce(&T) -> R) -> Option<R> {
        let node = self.nodes.get(&id)?;
        let any = node.as_any()?;
        any.downcast_ref::<T>().map(f)
    }

    fn enqueue(&mut self, frame: Frame) {
        let delay = *self
            .link_delay
            .get(&(frame.src, frame.dst))
            .unwrap_or(&self.default_delay);
        let at = self.clock + delay;
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse((at, seq, frame.src, frame.dst)));
        self.payloads.insert((at, seq), frame.bytes);
    }

    /// Run the event loop until no frames remain; returns frames addressed
    /// to the client in delivery order.
    pub fn pump(&mut self) -> Vec<Frame> {
        while let Some(Reverse((at, seq, src, dst))) = self.queue.pop() {
            self.clock = self.clock.max(at);
            let bytes = self.payloads.remove(&(at, seq)).expect("payload for queued frame");
            let frame = Frame { src, dst, bytes };
            self.transcript.push(TranscriptEntry {
                time: at,
                seq,
                src,
                dst,
                len: frame.bytes.len(),
                digest: sha256_tagged("sim-frame", &[&frame.bytes]),
            });
            if self.record_payloads {
                self.recorded_frames.push(frame.clone());
            }
            if dst == CLIENT_NODE {
                self.client_inbox.push(frame);
                continue;
            }
            let Some(node) = self.nodes.get_mut(&dst) else {
                continue; // dropped: unknown destination
            };
            let mut ctx = NetCtx { out: Vec::new(), src: dst };
            node.on_frame(&frame, &mut ctx);
            for out in ctx.out {
                self.enqueue(out);
            }
        }
        std::mem::take(&mut self.client_inbox)
    }

    /// Borrow a node back for protocol-level assertions.
    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut Box<dyn Node>> {
        self.nodes.get_mut(&id)
    }
}
