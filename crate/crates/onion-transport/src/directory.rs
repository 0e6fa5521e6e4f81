//! Pre-trusted relay directory.

use crypto_backends::KemBackend;

use crate::net::NodeId;
use crate::OnionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayRole {
    Entry,
    Middle,
    Exit,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayDescriptor {
    pub node_id: NodeId,
    pub role: RelayRole,
    pub kem_public: Vec<u8>,
}

/// Consensus stand-in: a list of relays every participant trusts.
#[derive(Debug, Clone, Default)]
pub struct Directory {
    pub relays: Vec<RelayDescriptor>,
    pub kem_backend: Option<KemBackend>,
}

impl Directory {
    pub fn new(kem_backend: KemBackend) -> Directory {
        Directory { relays: Vec::new(), kem_backend: Some(kem_backend) }
    }

    pub fn register(&mut self, descriptor: RelayDescriptor) {
        self.relays.push(descriptor);
    }

    fn pick(&self, role: RelayRole, exclude: &[NodeId]) -> Option<&RelayDescriptor> {
        self.relays
            .iter()
            .find(|r| !exclude.contains(&r.node_id) && (r.role == role || r.role == RelayRole::Any))
    }

    /// Deterministic path assignment: first eligible relay per role in
    /// registration order. With exactly three relays the path is forced.
    pub fn select_path(&self) -> Result<[RelayDescriptor; 3], OnionError> {
        let exit = self.pick(RelayRole::Exit, &[]).ok_or(OnionError::NotEnoughRelays)?.clone();
        let middle = self
            .pick(RelayRole::Middle, &[exit.node_id])
            .ok_or(OnionError::NotEnoughRelays)?
            .clone();
        let entry = self
            .pick(RelayRole::Entry, &[exit.node_id, middle.node_id])
            .ok_or(OnionError::NotEnoughRelays)?
            .clone();
        Ok([entry, middle, exit])
    }
}
