//! Binary Merkle tree over ring member keys.

use crypto_backends::sha256_tagged;

/// Full tree kept in memory; rings are static per region so this is built
/// once and shared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    /// levels[0] = leaves, last level = [root].
    levels: Vec<Vec<[u8; 32]>>,
}

fn node(left: &[u8; 32], right: &[u8; 32]) -> [u8; 32] {
    sha256_tagged("ring-merkle-node", &[left, right])
}

impl MerkleTree {
    /// Leaf count must be a power of two.
    pub fn build(leaves: &[[u8; 32]]) -> MerkleTree {
        assert!(leaves.len().is_power_of_two() && !leaves.is_empty());
        let mut levels = vec![leaves.to_vec()];
        while levels.last().unwrap().len() > 1 {
            let prev = levels.last().unwrap();
            let next: Vec<[u8; 32]> =
                prev.chunks_exact(2).map(|pair| node(&pair[0], &pair[1])).collect();
            levels.push(next);
        }
        MerkleTree { levels }
    }

    pub fn root(&self) -> [u8; 32] {
        self.levels.last().unwrap()[0]
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[0].len()
    }

    /// Sibling digests from leaf to root.
    pub fn path(&self, leaf_index: usize) -> Vec<[u8; 32]> {
        let mut idx = leaf_index;
        let mut path = Vec::with_capacity(self.levels.len() - 1);
        for level in &self.levels[..self.levels.len() - 1] {
            path.push(level[idx ^ 1]);
            idx /= 2;
        }
        path
    }

    /// Recompute a root from a leaf and its sibling path.
    pub fn fold_path(leaf: &[u8; 32], leaf_index: usize, path: &[[u8; 32]]) -> [u8; 32] {
        let mut acc = *leaf;
        let mut idx = leaf_index;
        for sib in path {
            acc = if idx % 2 == 0 { node(&acc, sib) } else { node(sib, &acc) };
            idx /= 2;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_path_folds_to_root() {
        let leaves: Vec<[u8; 32]> = (0..8u8).map(|i| [i; 32]).collect();
        let tree = MerkleTree::build(&leaves);
        for (i, leaf) in leaves.iter().enumerate() {
            assert_eq!(MerkleTree::fold_path(leaf, i, &tree.path(i)), tree.root());
        }
        // A foreign leaf does not fold to the root.
        assert_ne!(MerkleTree::fold_path(&[99; 32], 0, &tree.path(0)), tree.root());
    }
}
