//! Huffman coding over vocabulary frequencies, the tree behind the
//! hierarchical softmax.
//!
//! Every vocabulary word becomes a leaf; the V−1 inner nodes each carry a
//! trainable vector (owned by the embedding model, addressed here by dense
//! inner index). A word's probability is read off its root-to-leaf path, so
//! the tree stores, per word, the bit string (`code`) and the inner nodes
//! passed (`path`).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::textprep::Vocabulary;

/// Prefix code and root paths for a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTree {
    /// codes[w]: bits on w's root→leaf path; `false` is the first-popped
    /// (lighter) child of each merge.
    codes: Vec<Vec<bool>>,
    /// paths[w]: inner-node indices on w's root→leaf path, aligned with
    /// codes[w] (paths[w][j] is the node whose bit is codes[w][j]).
    paths: Vec<Vec<u32>>,
}

impl HuffmanTree {
    /// Standard Huffman construction over `counts` (index = word).
    ///
    /// Deterministic tie-breaking: the heap orders by (count, node id) with
    /// leaves numbered 0..V−1 and merged nodes V, V+1, … in creation order,
    /// so equal-count leaves pop before later merges and lower indices pop
    /// first. Inner index of a merged node = creation order; the final merge
    /// (root) has inner index V−2.
    pub fn build(counts: &[u64]) -> Result<Self> {
        let v = counts.len();
        if v < 2 {
            return Err(Error::VocabularyTooSmall { len: v });
        }
        let total = 2 * v - 1;
        // parent[i] / bit[i]: edge from node i up to its parent; leaves are
        // nodes 0..v, merges v..total, root = total−1 (parentless).
        let mut parent = vec![0u32; total];
        let mut bit = vec![false; total];
        let mut heap: BinaryHeap<Reverse<(u64, u32)>> = (0..v)
            .map(|i| Reverse((counts[i], i as u32)))
            .collect();
        let mut next_id = v as u32;
        while heap.len() > 1 {
            let Reverse((c0, n0)) = heap.pop().expect("len checked");
            let Reverse((c1, n1)) = heap.pop().expect("len checked");
            parent[n0 as usize] = next_id;
            bit[n0 as usize] = false;
            parent[n1 as usize] = next_id;
            bit[n1 as usize] = true;
            heap.push(Reverse((c0 + c1, next_id)));
            next_id += 1;
        }
        let root = (total - 1) as u32;
        let mut codes = Vec::with_capacity(v);
        let mut paths = Vec::with_capacity(v);
        for w in 0..v as u32 {
            let mut code = Vec::new();
            let mut path = Vec::new();
            let mut node = w;
            while node != root {
                code.push(bit[node as usize]);
                let p = parent[node as usize];
                path.push(p - v as u32); // parent is always a merged node
                node = p;
            }
            code.reverse();
            path.reverse();
            codes.push(code);
            paths.push(path);
        }
        Ok(HuffmanTree { codes, paths })
    }

    /// Builds over a vocabulary's corpus frequencies.
    pub fn from_vocabulary(vocab: &Vocabulary) -> Result<Self> {
        Self::build(vocab.counts())
    }

    /// Reassembles a persisted tree, re-validating structure: equal
    /// code/path lengths per word, nonempty codes, inner indices < V−1,
    /// and prefix-freeness of the code set.
    pub(crate) fn from_parts(
        codes: Vec<Vec<bool>>,
        paths: Vec<Vec<u32>>,
    ) -> std::result::Result<Self, String> {
        let v = codes.len();
        if v < 2 || paths.len() != v {
            return Err(format!("{v} codes / {} paths", paths.len()));
        }
        let inner = (v - 1) as u32;
        for (w, (code, path)) in codes.iter().zip(&paths).enumerate() {
            if code.is_empty() {
                return Err(format!("word {w}: empty code"));
            }
            if code.len() != path.len() {
                return Err(format!(
                    "word {w}: code length {} != path length {}",
                    code.len(),
                    path.len()
                ));
            }
            if let Some(bad) = path.iter().find(|&&n| n >= inner) {
                return Err(format!("word {w}: inner node {bad} out of range"));
            }
        }
        let set: std::collections::HashSet<&[bool]> =
            codes.iter().map(Vec::as_slice).collect();
        if set.len() != v {
            return Err("duplicate codes".to_string());
        }
        for code in &codes {
            for end in 1..code.len() {
                if set.contains(&code[..end]) {
                    return Err("code set is not prefix-free".to_string());
                }
            }
        }
        Ok(HuffmanTree { codes, paths })
    }

    /// Number of leaves (vocabulary size).
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Number of inner nodes, always V−1.
    pub fn inner_count(&self) -> usize {
        self.codes.len() - 1
    }

    /// Code bits of word `w`, root to leaf.
    pub fn code(&self, w: usize) -> &[bool] {
        &self.codes[w]
    }

    /// Inner nodes on word `w`'s path, root to leaf, aligned with
    /// [`code`](Self::code).
    pub fn path(&self, w: usize) -> &[u32] {
        &self.paths[w]
    }

    /// Σ counts[w] · |code(w)| — the quantity Huffman coding minimizes.
    pub fn weighted_code_length(&self, counts: &[u64]) -> u64 {
        self.codes
            .iter()
            .zip(counts)
            .map(|(code, &c)| code.len() as u64 * c)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_case_five_two_one() {
        // {a:5, b:2, c:1}: b and c merge first (3), then the merge joins a.
        let tree = HuffmanTree::build(&[5, 2, 1]).unwrap();
        assert_eq!(tree.code(0).len(), 1);
        assert_eq!(tree.code(1).len(), 2);
        assert_eq!(tree.code(2).len(), 2);
        assert_eq!(tree.weighted_code_length(&[5, 2, 1]), 5 + 4 + 2);
        assert_eq!(tree.inner_count(), 2);
        // Root is the last-created inner node; every path starts there.
        for w in 0..3 {
            assert_eq!(tree.path(w)[0], 1);
            assert_eq!(tree.path(w).len(), tree.code(w).len());
        }
    }

    #[test]
    fn two_symbols_get_one_bit_each() {
        let tree = HuffmanTree::build(&[10, 1]).unwrap();
        // The lighter word (count 1) pops first and takes bit 0.
        assert_eq!(tree.code(1), &[false]);
        assert_eq!(tree.code(0), &[true]);
        assert_eq!(tree.inner_count(), 1);
    }

    #[test]
    fn too_small_vocabularies_are_rejected() {
        assert!(matches!(
            HuffmanTree::build(&[]),
            Err(Error::VocabularyTooSmall { len: 0 })
        ));
        assert!(matches!(
            HuffmanTree::build(&[3]),
            Err(Error::VocabularyTooSmall { len: 1 })
        ));
    }

    #[test]
    fn codes_are_prefix_free_and_deterministic() {
        let counts: Vec<u64> = vec![7, 7, 3, 3, 3, 1, 1, 20, 2, 2];
        let a = HuffmanTree::build(&counts).unwrap();
        let b = HuffmanTree::build(&counts).unwrap();
        assert_eq!(a, b);
        for w1 in 0..counts.len() {
            for w2 in 0..counts.len() {
                if w1 == w2 {
                    continue;
                }
                let (c1, c2) = (a.code(w1), a.code(w2));
                let shared = c1.len().min(c2.len());
                assert_ne!(&c1[..shared], &c2[..shared], "codes {w1}/{w2} overlap");
            }
        }
    }

    #[test]
    fn from_parts_validates_structure() {
        let tree = HuffmanTree::build(&[4, 2, 1, 1]).unwrap();
        let rebuilt =
            HuffmanTree::from_parts(tree.codes.clone(), tree.paths.clone()).unwrap();
        assert_eq!(tree, rebuilt);

        // Mismatched code/path lengths.
        let mut bad = tree.paths.clone();
        bad[0].pop();
        assert!(HuffmanTree::from_parts(tree.codes.clone(), bad).is_err());

        // Prefix violation.
        let codes = vec![vec![false], vec![false, true]];
        let paths = vec![vec![0], vec![0, 0]];
        assert!(HuffmanTree::from_parts(codes, paths).is_err());
    }
}
