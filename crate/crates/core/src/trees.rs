//! Nested LUT tree structures for variable-node updates.
//!
//! A high-arity node update is realized as a tree of small lookup tables.
//! Leaves are either message inputs (`mu`) or the channel LLR (`L`);
//! internal nodes are the tables. The expression grammar is
//!
//! ```text
//! tree := "L" | "mu" | "(" tree tree+ ")"
//! ```
//!
//! Child order is preserved by the parser and defines the input indexing of
//! designed tables, even though nestings differing only in argument order
//! realize the same update family.

use crate::error::{Error, Result};
use std::collections::HashSet;
use std::fmt;

/// A rooted LUT nesting: message/LLR leaves under internal table nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LutTree {
    MsgLeaf,
    LlrLeaf,
    Node(Vec<LutTree>),
}

/// What a tree is used for; fixes the required message-leaf count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeRole {
    /// VN update: `d_v - 1` message leaves plus one LLR leaf.
    VnUpdate,
    /// Bit decision: `d_v` message leaves plus one LLR leaf.
    Decision,
}

/// Structured arity violation from [`LutTree::validate_for_degree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    MsgLeafCount { expected: usize, found: usize },
    LlrLeafCount { expected: usize, found: usize },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::MsgLeafCount { expected, found } => {
                write!(f, "expected {expected} message leaves, found {found}")
            }
            TreeViolation::LlrLeafCount { expected, found } => {
                write!(f, "expected {expected} LLR leaves, found {found}")
            }
        }
    }
}

impl LutTree {
    /// Parses a tree expression; errors carry the byte offset.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pos = 0usize;
        let bytes = text.as_bytes();
        let tree = parse_tree(bytes, &mut pos)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(Error::TreeSyntax {
                position: pos,
                message: "trailing input after tree expression".into(),
            });
        }
        Ok(tree)
    }

    /// Order-preserving serialization; `parse(to_expression(t)) == t`.
    pub fn to_expression(&self) -> String {
        match self {
            LutTree::MsgLeaf => "mu".to_string(),
            LutTree::LlrLeaf => "L".to_string(),
            LutTree::Node(children) => {
                let inner: Vec<String> = children.iter().map(|c| c.to_expression()).collect();
                format!("({})", inner.join(" "))
            }
        }
    }

    /// Canonical form with children sorted by (subtree depth, leaf count,
    /// canonical expression); stable across order-equivalent nestings.
    pub fn canonical(&self) -> LutTree {
        match self {
            LutTree::Node(children) => {
                let mut cs: Vec<LutTree> = children.iter().map(|c| c.canonical()).collect();
                cs.sort_by_key(|c| (c.depth(), c.leaf_count(), c.to_expression()));
                LutTree::Node(cs)
            }
            leaf => leaf.clone(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, LutTree::Node(_))
    }

    pub fn depth(&self) -> usize {
        match self {
            LutTree::Node(children) => 1 + children.iter().map(|c| c.depth()).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.msg_leaves() + self.llr_leaves()
    }

    pub fn msg_leaves(&self) -> usize {
        match self {
            LutTree::MsgLeaf => 1,
            LutTree::LlrLeaf => 0,
            LutTree::Node(children) => children.iter().map(|c| c.msg_leaves()).sum(),
        }
    }

    pub fn llr_leaves(&self) -> usize {
        match self {
            LutTree::MsgLeaf => 0,
            LutTree::LlrLeaf => 1,
            LutTree::Node(children) => children.iter().map(|c| c.llr_leaves()).sum(),
        }
    }

    /// Number of internal nodes (designed tables).
    pub fn internal_count(&self) -> usize {
        match self {
            LutTree::Node(children) => {
                1 + children.iter().map(|c| c.internal_count()).sum::<usize>()
            }
            _ => 0,
        }
    }

    /// Cumulative depth: the sum of leaf-to-root distances.
    pub fn cumulative_depth(&self) -> usize {
        fn walk(t: &LutTree, depth: usize) -> usize {
            match t {
                LutTree::Node(children) => children.iter().map(|c| walk(c, depth + 1)).sum(),
                _ => depth,
            }
        }
        walk(self, 0)
    }

    /// Checks the leaf counts required for `role` at VN degree `dv`.
    pub fn validate_for_degree(&self, dv: usize, role: TreeRole) -> Vec<TreeViolation> {
        let expected_msg = match role {
            TreeRole::VnUpdate => dv.saturating_sub(1),
            TreeRole::Decision => dv,
        };
        let mut v = Vec::new();
        if self.msg_leaves() != expected_msg {
            v.push(TreeViolation::MsgLeafCount {
                expected: expected_msg,
                found: self.msg_leaves(),
            });
        }
        if self.llr_leaves() != 1 {
            v.push(TreeViolation::LlrLeafCount {
                expected: 1,
                found: self.llr_leaves(),
            });
        }
        v
    }

    /// Decision tree derived from a VN-update tree: one extra message leaf
    /// at the root (inserted just before the LLR leaf when it sits there).
    pub fn decision_tree(&self) -> LutTree {
        match self {
            LutTree::Node(children) => {
                let mut cs = children.clone();
                let at = cs
                    .iter()
                    .position(|c| matches!(c, LutTree::LlrLeaf))
                    .unwrap_or(cs.len());
                cs.insert(at, LutTree::MsgLeaf);
                LutTree::Node(cs)
            }
            // degenerate single-leaf "trees" become a 2-input star
            leaf => LutTree::Node(vec![LutTree::MsgLeaf, leaf.clone()]),
        }
    }

    /// Moves a root-level LLR leaf one level deeper by swapping it with a
    /// message leaf inside the smallest internal root subtree (the
    /// least-informative aggregation). Returns `None` when the tree has no
    /// internal root child or the LLR leaf is not at the root.
    pub fn push_llr_deeper(&self) -> Option<LutTree> {
        let LutTree::Node(children) = self else {
            return None;
        };
        let llr_at = children
            .iter()
            .position(|c| matches!(c, LutTree::LlrLeaf))?;
        let target = children
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_leaf())
            .min_by_key(|(i, c)| (c.msg_leaves(), *i))
            .map(|(i, _)| i)?;
        let mut cs = children.clone();
        let LutTree::Node(sub) = &mut cs[target] else {
            unreachable!()
        };
        let swap_at = sub.iter().position(|c| matches!(c, LutTree::MsgLeaf))?;
        sub[swap_at] = LutTree::LlrLeaf;
        cs[llr_at] = LutTree::MsgLeaf;
        Some(LutTree::Node(cs))
    }
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_tree(bytes: &[u8], pos: &mut usize) -> Result<LutTree> {
    skip_ws(bytes, pos);
    if *pos >= bytes.len() {
        return Err(Error::TreeSyntax {
            position: *pos,
            message: "unexpected end of input".into(),
        });
    }
    match bytes[*pos] {
        b'(' => {
            let open = *pos;
            *pos += 1;
            let mut children = Vec::new();
            loop {
                skip_ws(bytes, pos);
                if *pos >= bytes.len() {
                    return Err(Error::TreeSyntax {
                        position: *pos,
                        message: "unclosed parenthesis".into(),
                    });
                }
                if bytes[*pos] == b')' {
                    *pos += 1;
                    break;
                }
                children.push(parse_tree(bytes, pos)?);
            }
            if children.len() < 2 {
                return Err(Error::TreeSyntax {
                    position: open,
                    message: format!(
                        "internal node needs at least 2 children, found {}",
                        children.len()
                    ),
                });
            }
            Ok(LutTree::Node(children))
        }
        b')' => Err(Error::TreeSyntax {
            position: *pos,
            message: "unexpected ')'".into(),
        }),
        _ => {
            let start = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_alphabetic() {
                *pos += 1;
            }
            match &bytes[start..*pos] {
                b"mu" => Ok(LutTree::MsgLeaf),
                b"L" => Ok(LutTree::LlrLeaf),
                other => Err(Error::TreeSyntax {
                    position: start,
                    message: format!(
                        "expected 'mu', 'L' or '(', found {:?}",
                        String::from_utf8_lossy(if other.is_empty() {
                            &bytes[start..(start + 1).min(bytes.len())]
                        } else {
                            other
                        })
                    ),
                }),
            }
        }
    }
}

/// `(msg leaves, llr leaves)` signature used by the refinement matcher.
fn sig(t: &LutTree) -> (usize, usize) {
    (t.msg_leaves(), t.llr_leaves())
}

/// Tests whether `coarse` can be obtained from `fine` by contracting
/// internal edges, with message leaves matched up to permutation and the
/// LLR leaf matched to the LLR leaf.
///
/// Errors when the two trees do not have the same leaf multiset.
pub fn is_refinement(fine: &LutTree, coarse: &LutTree) -> Result<bool> {
    if sig(fine) != sig(coarse) {
        return Err(Error::InvalidArgument(format!(
            "leaf multisets differ: fine has {:?} (msg, llr), coarse has {:?}",
            sig(fine),
            sig(coarse)
        )));
    }
    Ok(refines(fine, coarse))
}

fn refines(fine: &LutTree, coarse: &LutTree) -> bool {
    match (fine, coarse) {
        (LutTree::MsgLeaf, LutTree::MsgLeaf) => true,
        (LutTree::LlrLeaf, LutTree::LlrLeaf) => true,
        (LutTree::Node(fc), LutTree::Node(cc)) => {
            let pool: Vec<&LutTree> = fc.iter().collect();
            let targets: Vec<&LutTree> = cc.iter().collect();
            let mut failed = HashSet::new();
            match_pool(pool, &targets, &mut failed)
        }
        _ => false,
    }
}

/// Backtracking matcher: consume `targets` one at a time, either matching a
/// pool element of equal signature or expanding an internal pool element
/// into its children (an edge contraction seen from the coarse side).
fn match_pool(pool: Vec<&LutTree>, targets: &[&LutTree], failed: &mut HashSet<String>) -> bool {
    if targets.is_empty() {
        return pool.is_empty();
    }
    // leaves are invariant under expansion, so aggregate signatures prune
    let pool_sig = pool.iter().fold((0, 0), |a, t| {
        let s = sig(t);
        (a.0 + s.0, a.1 + s.1)
    });
    let target_sig = targets.iter().fold((0, 0), |a, t| {
        let s = sig(t);
        (a.0 + s.0, a.1 + s.1)
    });
    if pool_sig != target_sig {
        return false;
    }
    let key = state_key(&pool, targets.len());
    if failed.contains(&key) {
        return false;
    }
    let t = targets[0];
    // Try direct matches first.
    for i in 0..pool.len() {
        if sig(pool[i]) == sig(t) && refines(pool[i], t) {
            let mut rest = pool.clone();
            rest.remove(i);
            if match_pool(rest, &targets[1..], failed) {
                return true;
            }
        }
    }
    // Then try expanding internal pool elements.
    for i in 0..pool.len() {
        if let LutTree::Node(children) = pool[i] {
            let mut expanded = pool.clone();
            expanded.remove(i);
            expanded.extend(children.iter());
            if match_pool(expanded, targets, failed) {
                return true;
            }
        }
    }
    failed.insert(key);
    false
}

fn state_key(pool: &[&LutTree], targets_left: usize) -> String {
    let mut parts: Vec<String> = pool.iter().map(|t| t.to_expression()).collect();
    parts.sort();
    format!("{targets_left}|{}", parts.join(","))
}
