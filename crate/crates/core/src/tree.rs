//! Greedy CART-style classification tree on Gini impurity.
//!
//! Splits are axis-aligned with integer thresholds: rows with
//! `value <= threshold` go left. Split quality is compared exactly in integer
//! arithmetic, so ties are real ties and are broken by the lowest parameter
//! index, then the lowest threshold.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::domain::{LabeledDataset, PointInput};
use crate::error::{Error, Result};
use crate::model::{Alphabet, Classifier, Label, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Kept for interface parity with the other trainers; the greedy builder
    /// consumes no randomness.
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_leaf: 1,
            seed: 0,
        }
    }
}

/// Node of a tree in preorder: a split is followed by its whole left subtree,
/// then its right subtree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeNode {
    Split { param: usize, threshold: i64 },
    Leaf { label: Label },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Split { param: usize, threshold: i64, right: usize },
    Leaf(Label),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    arity: usize,
    // Preorder arena; a split's left child is the next node.
    nodes: Vec<Node>,
    alphabet: Alphabet,
}

impl DecisionTree {
    /// Rebuilds a tree from its preorder node list.
    pub fn from_preorder(arity: usize, preorder: &[TreeNode], alphabet: Alphabet) -> Result<Self> {
        let mut nodes = Vec::with_capacity(preorder.len());
        let end = link(preorder, 0, arity, &mut nodes)?;
        if end != preorder.len() {
            return Err(Error::Spec("trailing nodes after a complete tree".to_string()));
        }
        for node in &nodes {
            if let Node::Leaf(label) = node {
                if !alphabet.contains(*label) {
                    return Err(Error::Spec(alloc::format!("leaf label {label} outside alphabet")));
                }
            }
        }
        Ok(Self { arity, nodes, alphabet })
    }

    pub fn preorder(&self) -> Vec<TreeNode> {
        self.nodes
            .iter()
            .map(|n| match *n {
                Node::Split { param, threshold, .. } => TreeNode::Split { param, threshold },
                Node::Leaf(label) => TreeNode::Leaf { label },
            })
            .collect()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.depth_from(0)
    }

    fn depth_from(&self, at: usize) -> usize {
        match self.nodes[at] {
            Node::Leaf(_) => 0,
            Node::Split { right, .. } => 1 + self.depth_from(at + 1).max(self.depth_from(right)),
        }
    }

    /// Preorder position of the leaf `input` falls into.
    pub fn leaf_index(&self, input: &PointInput) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(_) => return at,
                Node::Split {
                    param,
                    threshold,
                    right,
                } => {
                    at = if input.values()[param] <= threshold {
                        at + 1
                    } else {
                        right
                    };
                }
            }
        }
    }
}

fn link(preorder: &[TreeNode], at: usize, arity: usize, out: &mut Vec<Node>) -> Result<usize> {
    match preorder.get(at) {
        None => Err(Error::Spec("truncated preorder node list".to_string())),
        Some(TreeNode::Leaf { label }) => {
            out.push(Node::Leaf(*label));
            Ok(at + 1)
        }
        Some(&TreeNode::Split { param, threshold }) => {
            if param >= arity {
                return Err(Error::Spec(alloc::format!("split on parameter {param} of {arity}")));
            }
            let slot = out.len();
            out.push(Node::Split {
                param,
                threshold,
                right: 0,
            });
            let after_left = link(preorder, at + 1, arity, out)?;
            let right = out.len();
            out[slot] = Node::Split {
                param,
                threshold,
                right,
            };
            link(preorder, after_left, arity, out)
        }
    }
}

impl Classifier for DecisionTree {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn predict(&self, input: &PointInput) -> Result<Label, ModelError> {
        if input.len() != self.arity {
            return Err(ModelError::Protocol(alloc::format!(
                "input arity {} != model arity {}",
                input.len(),
                self.arity
            )));
        }
        match self.nodes[self.leaf_index(input)] {
            Node::Leaf(label) => Ok(label),
            Node::Split { .. } => unreachable!("leaf_index stops at leaves"),
        }
    }
}

/// Grows a tree greedily on Gini impurity.
pub fn train_tree(data: &LabeledDataset, params: &TreeParams) -> Result<DecisionTree> {
    if data.is_empty() {
        return Err(Error::Training("empty dataset".to_string()));
    }
    let labels = Alphabet::new(data.rows().iter().map(|(_, l)| *l));
    let class_of: Vec<usize> = data
        .rows()
        .iter()
        .map(|(_, l)| labels.labels().binary_search(l).unwrap_or(0))
        .collect();
    let builder = Builder {
        data,
        class_of,
        classes: labels.labels().to_vec(),
        max_depth: params.max_depth,
        min_leaf: params.min_leaf.max(1),
    };
    let mut nodes = Vec::new();
    let rows: Vec<usize> = (0..data.len()).collect();
    builder.grow(&rows, 0, &mut nodes);

    let binary = Alphabet::binary();
    let alphabet = if labels.labels().iter().all(|l| binary.contains(*l)) {
        binary
    } else {
        labels
    };
    Ok(DecisionTree {
        arity: data.domain().len(),
        nodes,
        alphabet,
    })
}

struct Builder<'a> {
    data: &'a LabeledDataset,
    class_of: Vec<usize>,
    classes: Vec<Label>,
    max_depth: usize,
    min_leaf: usize,
}

struct SplitChoice {
    param: usize,
    threshold: i64,
    // Split score as the fraction num / den (see `Builder::best_split`).
    num: u128,
    den: u128,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<u64> {
        let mut c = alloc::vec![0u64; self.classes.len()];
        for &r in rows {
            c[self.class_of[r]] += 1;
        }
        c
    }

    fn grow(&self, rows: &[usize], depth: usize, out: &mut Vec<Node>) {
        let counts = self.counts(rows);
        let majority = majority(&counts, &self.classes);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= self.max_depth || pure || rows.len() < 2 * self.min_leaf {
            out.push(Node::Leaf(majority));
            return;
        }
        let Some(split) = self.best_split(rows, &counts) else {
            out.push(Node::Leaf(majority));
            return;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.data.rows()[r].0.values()[split.param] <= split.threshold);
        let slot = out.len();
        out.push(Node::Split {
            param: split.param,
            threshold: split.threshold,
            right: 0,
        });
        self.grow(&left, depth + 1, out);
        let right_at = out.len();
        out[slot] = Node::Split {
            param: split.param,
            threshold: split.threshold,
            right: right_at,
        };
        self.grow(&right, depth + 1, out);
    }

    /// Maximizes `Σ_k l_k²/n_l + Σ_k r_k²/n_r`, which is equivalent to
    /// minimizing the size-weighted Gini impurity of the children. Only splits
    /// that strictly improve on the parent are returned.
    fn best_split(&self, rows: &[usize], parent: &[u64]) -> Option<SplitChoice> {
        let n = rows.len() as u128;
        let parent_sq: u128 = parent.iter().map(|&c| (c as u128).pow(2)).sum();
        let mut best: Option<SplitChoice> = None;
        let mut sorted = rows.to_vec();

        for param in 0..self.data.domain().len() {
            let value = |r: usize| self.data.rows()[r].0.values()[param];
            sorted.sort_by_key(|&r| (value(r), r));
            let mut left = alloc::vec![0u64; self.classes.len()];
            for i in 0..sorted.len() - 1 {
                left[self.class_of[sorted[i]]] += 1;
                let v = value(sorted[i]);
                if v == value(sorted[i + 1]) {
                    continue;
                }
                let nl = (i + 1) as u128;
                let nr = n - nl;
                if nl < self.min_leaf as u128 || nr < self.min_leaf as u128 {
                    continue;
                }
                let a: u128 = left.iter().map(|&c| (c as u128).pow(2)).sum();
                let b: u128 = left.iter().zip(parent).map(|(&l, &p)| ((p - l) as u128).pow(2)).sum();
                let num = a * nr + b * nl;
                let den = nl * nr;
                // Strict gain over the parent: num/den > parent_sq/n.
                if num * n <= parent_sq * den {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(cur) => num * cur.den > cur.num * den,
                };
                if better {
                    best = Some(SplitChoice {
                        param,
                        threshold: v,
                        num,
                        den,
                    });
                }
            }
        }
        best
    }
}

/// Most frequent class; ties go to the lowest label.
fn majority(counts: &[u64], classes: &[Label]) -> Label {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    classes[best]
}
