//! Witness trees reconstructed from an execution log.
//!
//! `W_t` is rooted at the event resampled at step `t`. Walking the log
//! backwards from step `t - 1`, each event that overlaps (shares a variable
//! with, or equals) some current node label is attached as a child of a
//! deepest such node; the most recently added node wins ties.
//!
//! # Canonical encoding
//!
//! Trees are compared as unordered labeled rooted trees through a string
//! form: a node is its decimal label, followed by its children in
//! parentheses when it has any, separated by commas and sorted by
//! `(label, encoding)`. For example `0(1,2(0))` is a root labeled 0 with
//! children 1 and 2, where 2 has one child labeled 0.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::engine::ExecutionLog;
use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::model::{DependencyGraph, EventId, Instance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WitnessNode {
    pub label: EventId,
    pub parent: Option<usize>,
    pub depth: usize,
}

/// A rooted tree with event labels. Node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WitnessTree {
    nodes: Vec<WitnessNode>,
}

/// The trees produced by the branching processes share the representation.
pub type LabeledRootedTree = WitnessTree;

impl WitnessTree {
    pub fn leaf(label: EventId) -> Self {
        WitnessTree {
            nodes: vec![WitnessNode {
                label,
                parent: None,
                depth: 0,
            }],
        }
    }

    /// Appends a child of `parent` and returns its node id.
    ///
    /// Panics if `parent` is not a node of the tree.
    pub fn add_child(&mut self, parent: usize, label: EventId) -> usize {
        let depth = self.nodes[parent].depth + 1;
        self.nodes.push(WitnessNode {
            label,
            parent: Some(parent),
            depth,
        });
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[WitnessNode] {
        &self.nodes
    }

    pub fn root_label(&self) -> EventId {
        self.nodes[0].label
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false: a tree has at least its root.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn label_count(&self, label: EventId) -> usize {
        self.nodes.iter().filter(|n| n.label == label).count()
    }

    /// Children of every node, in insertion order.
    pub fn children_lists(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                out[p].push(id);
            }
        }
        out
    }

    pub fn canonical_encoding(&self) -> String {
        let children = self.children_lists();
        // Post-order so every child is encoded before its parent.
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(&children[v]);
        }
        let mut enc: Vec<String> = vec![String::new(); self.nodes.len()];
        for &v in order.iter().rev() {
            let mut parts: Vec<(EventId, String)> = children[v]
                .iter()
                .map(|&c| (self.nodes[c].label, std::mem::take(&mut enc[c])))
                .collect();
            parts.sort();
            let mut s = self.nodes[v].label.to_string();
            if !parts.is_empty() {
                s.push('(');
                for (i, (_, p)) in parts.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    s.push_str(p);
                }
                s.push(')');
            }
            enc[v] = s;
        }
        std::mem::take(&mut enc[0])
    }

    /// Parses the canonical string form. Child order in the input is
    /// preserved; it need not be sorted.
    pub fn from_canonical(text: &str) -> std::result::Result<Self, ParseError> {
        let err = |kind| ParseError::new(1, kind);
        let bytes = text.trim().as_bytes();
        let mut tree: Option<WitnessTree> = None;
        // Parent node for each open parenthesis.
        let mut open: Vec<usize> = Vec::new();
        let mut last: Option<usize> = None;
        let mut i = 0;
        // Expecting a label next (start, after '(' or ',').
        let mut want_label = true;
        while i < bytes.len() {
            let c = bytes[i];
            if want_label {
                if !c.is_ascii_digit() {
                    return Err(err(ParseErrorKind::UnexpectedChar(c as char)));
                }
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let token = &text.trim()[start..i];
                let label: EventId = token
                    .parse()
                    .map_err(|_| err(ParseErrorKind::InvalidToken(token.to_string())))?;
                last = Some(match (&mut tree, open.last()) {
                    (None, _) => {
                        tree = Some(WitnessTree::leaf(label));
                        0
                    }
                    (Some(t), Some(&p)) => t.add_child(p, label),
                    (Some(_), None) => return Err(err(ParseErrorKind::UnexpectedChar(c as char))),
                });
                want_label = false;
                continue;
            }
            match c {
                b'(' => {
                    open.push(last.expect("label precedes '('"));
                    want_label = true;
                }
                b',' if !open.is_empty() => want_label = true,
                b')' if !open.is_empty() => {
                    last = open.pop();
                }
                other => return Err(err(ParseErrorKind::UnexpectedChar(other as char))),
            }
            i += 1;
        }
        if want_label || !open.is_empty() {
            return Err(err(ParseErrorKind::UnexpectedEnd));
        }
        tree.ok_or_else(|| err(ParseErrorKind::UnexpectedEnd))
    }
}

/// Builds `W_t` (1-based `t`) from the log of a run.
pub fn build_witness_tree(log: &ExecutionLog, t: usize, instance: &Instance) -> Result<WitnessTree> {
    build_witness_tree_from_steps(&log.steps, t, instance)
}

pub fn build_witness_tree_from_steps(steps: &[EventId], t: usize, instance: &Instance) -> Result<WitnessTree> {
    if t == 0 || t > steps.len() {
        return Err(Error::StepOutOfRange { t, len: steps.len() });
    }
    if let Some(&bad) = steps[..t].iter().find(|&&e| e >= instance.num_events()) {
        return Err(Error::UnknownEvent(bad));
    }
    let mut tree = WitnessTree::leaf(steps[t - 1]);
    for &event in steps[..t - 1].iter().rev() {
        let target = tree
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| instance.overlaps(n.label, event))
            .max_by_key(|&(id, n)| (n.depth, id))
            .map(|(id, _)| id);
        if let Some(parent) = target {
            tree.add_child(parent, event);
        }
    }
    Ok(tree)
}

/// `W_1, ..., W_T` for a whole log.
pub fn all_witness_trees(log: &ExecutionLog, instance: &Instance) -> Result<Vec<WitnessTree>> {
    (1..=log.steps.len())
        .map(|t| build_witness_tree(log, t, instance))
        .collect()
}

/// Children overlap their parents and siblings carry distinct labels.
pub fn is_proper(tree: &WitnessTree, graph: &DependencyGraph) -> bool {
    let n = graph.num_vertices();
    if tree.nodes.iter().any(|node| node.label >= n) {
        return false;
    }
    tree.children_lists().iter().enumerate().all(|(v, kids)| {
        let parent = tree.nodes[v].label;
        let mut labels: Vec<EventId> = kids.iter().map(|&c| tree.nodes[c].label).collect();
        let overlap = labels.iter().all(|&l| graph.overlaps(parent, l));
        labels.sort_unstable();
        overlap && labels.windows(2).all(|w| w[0] != w[1])
    })
}

/// Proper, and every sibling label set is independent in the graph.
pub fn is_strongly_proper(tree: &WitnessTree, graph: &DependencyGraph) -> bool {
    is_proper(tree, graph)
        && tree.children_lists().iter().all(|kids| {
            let labels: Vec<EventId> = kids.iter().map(|&c| tree.nodes[c].label).collect();
            graph.is_independent(&labels)
        })
}

/// `prod_{v in T} p(A_v)` with exact event probabilities.
pub fn tree_probability_product(tree: &WitnessTree, instance: &Instance) -> Result<f64> {
    let mut cache: HashMap<EventId, f64> = HashMap::new();
    let mut product = 1.0;
    for node in &tree.nodes {
        let p = match cache.get(&node.label) {
            Some(&p) => p,
            None => {
                let p = instance.event_probability(node.label)?;
                cache.insert(node.label, p);
                p
            }
        };
        product *= p;
    }
    Ok(product)
}
