//! Tanner graphs: alist parsing, random regular construction, syndromes.
//!
//! Neighbors are kept sorted ascending within each node; message arrays in
//! the decoder are indexed by (node, neighbor-rank) through the edge ids
//! assigned here, so the ordering is part of the decoder's determinism.

use crate::error::{AlistError, Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Bipartite variable-node / check-node adjacency with edge ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TannerGraph {
    n_vn: usize,
    n_cn: usize,
    /// CSR over VNs: neighbor CN indices, sorted ascending per VN.
    vn_off: Vec<usize>,
    vn_nbr: Vec<u32>,
    /// Edge id of each (vn, rank) slot; edges are numbered in (vn, rank) order.
    vn_edge: Vec<u32>,
    /// CSR over CNs: neighbor VN indices, sorted ascending per CN.
    cn_off: Vec<usize>,
    cn_nbr: Vec<u32>,
    cn_edge: Vec<u32>,
}

impl TannerGraph {
    /// Builds a graph from per-VN neighbor lists (validated).
    pub fn from_vn_adjacency(n_cn: usize, vn_lists: Vec<Vec<usize>>) -> Result<Self> {
        let n_vn = vn_lists.len();
        if n_vn == 0 || n_cn == 0 {
            return Err(Error::InvalidArgument(
                "graph needs at least one VN and one CN".into(),
            ));
        }
        let mut vn_off = Vec::with_capacity(n_vn + 1);
        let mut vn_nbr: Vec<u32> = Vec::new();
        vn_off.push(0);
        let mut cn_lists: Vec<Vec<u32>> = vec![Vec::new(); n_cn];
        for (v, mut nbrs) in vn_lists.into_iter().enumerate() {
            nbrs.sort_unstable();
            for w in nbrs.windows(2) {
                if w[0] == w[1] {
                    return Err(AlistError::DuplicateEdge { vn: v + 1, cn: w[0] + 1 }.into());
                }
            }
            for &c in &nbrs {
                if c >= n_cn {
                    return Err(AlistError::IndexOutOfRange {
                        line: 0,
                        value: c + 1,
                        max: n_cn,
                    }
                    .into());
                }
                vn_nbr.push(c as u32);
                cn_lists[c].push(v as u32);
            }
            vn_off.push(vn_nbr.len());
        }
        // edge ids in (vn, rank) order
        let vn_edge: Vec<u32> = (0..vn_nbr.len() as u32).collect();
        let mut cn_off = Vec::with_capacity(n_cn + 1);
        let mut cn_nbr: Vec<u32> = Vec::new();
        cn_off.push(0);
        for list in &mut cn_lists {
            list.sort_unstable();
            cn_nbr.extend_from_slice(list);
            cn_off.push(cn_nbr.len());
        }
        // map each (cn, rank) slot to the edge id assigned on the VN side
        let mut cn_edge = vec![0u32; cn_nbr.len()];
        for c in 0..n_cn {
            for slot in cn_off[c]..cn_off[c + 1] {
                let v = cn_nbr[slot] as usize;
                let rank = vn_nbr[vn_off[v]..vn_off[v + 1]]
                    .binary_search(&(c as u32))
                    .expect("edge exists on both sides");
                cn_edge[slot] = vn_edge[vn_off[v] + rank];
            }
        }
        Ok(TannerGraph {
            n_vn,
            n_cn,
            vn_off,
            vn_nbr,
            vn_edge,
            cn_off,
            cn_nbr,
            cn_edge,
        })
    }

    pub fn n_vn(&self) -> usize {
        self.n_vn
    }

    pub fn n_cn(&self) -> usize {
        self.n_cn
    }

    pub fn n_edges(&self) -> usize {
        self.vn_nbr.len()
    }

    /// Design rate `1 - M/N` of the parity-check matrix shape.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.n_cn as f64 / self.n_vn as f64
    }

    pub fn vn_degree(&self, v: usize) -> usize {
        self.vn_off[v + 1] - self.vn_off[v]
    }

    pub fn cn_degree(&self, c: usize) -> usize {
        self.cn_off[c + 1] - self.cn_off[c]
    }

    /// CN neighbors of a VN (ascending).
    pub fn vn_neighbors(&self, v: usize) -> &[u32] {
        &self.vn_nbr[self.vn_off[v]..self.vn_off[v + 1]]
    }

    /// VN neighbors of a CN (ascending).
    pub fn cn_neighbors(&self, c: usize) -> &[u32] {
        &self.cn_nbr[self.cn_off[c]..self.cn_off[c + 1]]
    }

    /// Edge ids of a VN's slots, ascending neighbor rank.
    pub fn vn_edges(&self, v: usize) -> &[u32] {
        &self.vn_edge[self.vn_off[v]..self.vn_off[v + 1]]
    }

    /// Edge ids of a CN's slots, ascending neighbor rank.
    pub fn cn_edges(&self, c: usize) -> &[u32] {
        &self.cn_edge[self.cn_off[c]..self.cn_off[c + 1]]
    }

    /// `(dv, dc)` when the graph is regular.
    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        let dv = self.vn_degree(0);
        let dc = self.cn_degree(0);
        let ok = (0..self.n_vn).all(|v| self.vn_degree(v) == dv)
            && (0..self.n_cn).all(|c| self.cn_degree(c) == dc);
        ok.then_some((dv, dc))
    }

    /// Per-CN parity of a candidate word (H·c over GF(2)).
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.len() != self.n_vn {
            return Err(Error::InvalidArgument(format!(
                "word length {} does not match N = {}",
                bits.len(),
                self.n_vn
            )));
        }
        let mut out = vec![0u8; self.n_cn];
        for (c, slot) in out.iter_mut().enumerate() {
            let mut parity = 0u8;
            for &v in self.cn_neighbors(c) {
                parity ^= bits[v as usize] & 1;
            }
            *slot = parity;
        }
        Ok(out)
    }

    /// Serializes to the alist interchange format (no zero padding).
    pub fn to_alist(&self) -> String {
        let mut s = String::new();
        let max_dv = (0..self.n_vn).map(|v| self.vn_degree(v)).max().unwrap_or(0);
        let max_dc = (0..self.n_cn).map(|c| self.cn_degree(c)).max().unwrap_or(0);
        s.push_str(&format!("{} {}\n", self.n_vn, self.n_cn));
        s.push_str(&format!("{max_dv} {max_dc}\n"));
        let degs: Vec<String> = (0..self.n_vn).map(|v| self.vn_degree(v).to_string()).collect();
        s.push_str(&degs.join(" "));
        s.push('\n');
        let degs: Vec<String> = (0..self.n_cn).map(|c| self.cn_degree(c).to_string()).collect();
        s.push_str(&degs.join(" "));
        s.push('\n');
        for v in 0..self.n_vn {
            let row: Vec<String> = self
                .vn_neighbors(v)
                .iter()
                .map(|&c| (c + 1).to_string())
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        for c in 0..self.n_cn {
            let row: Vec<String> = self
                .cn_neighbors(c)
                .iter()
                .map(|&v| (v + 1).to_string())
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Parses the alist format, cross-checking both adjacency halves.
pub fn parse_alist(text: &str) -> Result<TannerGraph> {
    let mut lines = text.lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, Vec<usize>)> {
        for (ln, raw) in lines.by_ref() {
            if raw.trim().is_empty() {
                continue;
            }
            let mut vals = Vec::new();
            for tok in raw.split_whitespace() {
                let v: usize = tok.parse().map_err(|_| {
                    Error::from(AlistError::Malformed {
                        line: ln + 1,
                        message: format!("expected integer, found {tok:?} ({what})"),
                    })
                })?;
                vals.push(v);
            }
            return Ok((ln + 1, vals));
        }
        Err(AlistError::Malformed {
            line: 0,
            message: format!("unexpected end of input, expected {what}"),
        }
        .into())
    };

    let (ln, head) = next_line("N M")?;
    if head.len() != 2 || head[0] == 0 || head[1] == 0 {
        return Err(AlistError::Malformed {
            line: ln,
            message: "first line must be 'N M' with positive values".into(),
        }
        .into());
    }
    let (n, m) = (head[0], head[1]);
    let (ln, maxdeg) = next_line("max degrees")?;
    if maxdeg.len() != 2 {
        return Err(AlistError::Malformed {
            line: ln,
            message: "second line must be 'max_dv max_dc'".into(),
        }
        .into());
    }
    let (ln, vn_degs) = next_line("VN degrees")?;
    if vn_degs.len() != n {
        return Err(AlistError::Malformed {
            line: ln,
            message: format!("expected {n} VN degrees, found {}", vn_degs.len()),
        }
        .into());
    }
    let (ln, cn_degs) = next_line("CN degrees")?;
    if cn_degs.len() != m {
        return Err(AlistError::Malformed {
            line: ln,
            message: format!("expected {m} CN degrees, found {}", cn_degs.len()),
        }
        .into());
    }

    let read_block = |lines_needed: usize,
                      max: usize,
                      degs: &[usize],
                      next: &mut dyn FnMut(&str) -> Result<(usize, Vec<usize>)>,
                      node: &'static str|
     -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::with_capacity(lines_needed);
        for (i, &deg) in degs.iter().enumerate().take(lines_needed) {
            let (ln, mut vals) = next("adjacency line")?;
            // zero padding tolerated on read
            vals.retain(|&v| v != 0);
            if vals.len() != deg {
                return Err(AlistError::DegreeMismatch {
                    node,
                    index: i + 1,
                    declared: deg,
                    actual: vals.len(),
                }
                .into());
            }
            for &v in &vals {
                if v > max {
                    return Err(AlistError::IndexOutOfRange {
                        line: ln,
                        value: v,
                        max,
                    }
                    .into());
                }
            }
            let mut sorted = vals.clone();
            sorted.sort_unstable();
            for w in sorted.windows(2) {
                if w[0] == w[1] {
                    let (vn, cn) = if node == "VN" { (i + 1, w[0]) } else { (w[0], i + 1) };
                    return Err(AlistError::DuplicateEdge { vn, cn }.into());
                }
            }
            out.push(vals);
        }
        Ok(out)
    };

    let mut next = |what: &str| next_line(what);
    let vn_lists = read_block(n, m, &vn_degs, &mut next, "VN")?;
    let cn_lists = read_block(m, n, &cn_degs, &mut next, "CN")?;

    // cross-check the halves edge by edge
    use std::collections::HashSet;
    let mut from_vn: HashSet<(usize, usize)> = HashSet::new();
    for (v, list) in vn_lists.iter().enumerate() {
        for &c in list {
            from_vn.insert((v + 1, c));
        }
    }
    let mut from_cn: HashSet<(usize, usize)> = HashSet::new();
    for (c, list) in cn_lists.iter().enumerate() {
        for &v in list {
            from_cn.insert((v, c + 1));
        }
    }
    if let Some(&(vn, cn)) = from_vn.symmetric_difference(&from_cn).min() {
        return Err(AlistError::InconsistentHalves { vn, cn }.into());
    }

    let vn_zero_based: Vec<Vec<usize>> = vn_lists
        .into_iter()
        .map(|l| l.into_iter().map(|c| c - 1).collect())
        .collect();
    TannerGraph::from_vn_adjacency(m, vn_zero_based)
}

/// Random (dv, dc)-regular Tanner graph via the configuration model with
/// deterministic parallel-edge resolution by socket swaps.
pub fn generate_regular(n: usize, dv: usize, dc: usize, seed: u64) -> Result<TannerGraph> {
    if n == 0 || dv == 0 || dc == 0 {
        return Err(Error::InvalidArgument("degrees and N must be positive".into()));
    }
    if (n * dv) % dc != 0 {
        return Err(Error::InvalidArgument(format!(
            "N*dv = {} is not divisible by dc = {dc}",
            n * dv
        )));
    }
    let m = n * dv / dc;
    if dv > m || dc > n {
        return Err(Error::InvalidArgument(
            "degrees exceed the opposite side's node count".into(),
        ));
    }
    let e = n * dv;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // vn socket i belongs to VN i / dv; cn sockets are shuffled
    let mut cn_socket: Vec<u32> = (0..e).map(|i| (i / dc) as u32).collect();
    cn_socket.shuffle(&mut rng);

    let edge_of = |i: usize, cn_socket: &[u32]| ((i / dv) as u32, cn_socket[i]);
    for _attempt in 0..1000 {
        // find duplicate (vn, cn) pairs deterministically via sorting
        let mut order: Vec<usize> = (0..e).collect();
        order.sort_unstable_by_key(|&i| edge_of(i, &cn_socket));
        let mut dups: Vec<usize> = Vec::new();
        for w in order.windows(2) {
            if edge_of(w[0], &cn_socket) == edge_of(w[1], &cn_socket) {
                dups.push(w[1]);
            }
        }
        if dups.is_empty() {
            let mut vn_lists: Vec<Vec<usize>> = vec![Vec::with_capacity(dv); n];
            for i in 0..e {
                vn_lists[i / dv].push(cn_socket[i] as usize);
            }
            return TannerGraph::from_vn_adjacency(m, vn_lists);
        }
        for &i in &dups {
            let j = rng.gen_range(0..e);
            cn_socket.swap(i, j);
        }
    }
    Err(Error::Generation(format!(
        "could not remove parallel edges after 1000 swap passes (N={n}, dv={dv}, dc={dc})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    // 2x4 all-ones single-parity pair: every VN checks into both CNs
    const TOY: &str = "4 2\n2 4\n2 2 2 2\n4 4\n1 2\n1 2\n1 2\n1 2\n1 2 3 4\n1 2 3 4\n";

    fn toy_graph() -> TannerGraph {
        TannerGraph::from_vn_adjacency(2, vec![vec![0, 1]; 4]).unwrap()
    }

    #[test]
    fn parse_single_parity_toy() {
        let g = parse_alist(TOY).unwrap();
        assert_eq!(g.n_vn(), 4);
        assert_eq!(g.n_cn(), 2);
        assert_eq!(g.cn_neighbors(0), &[0, 1, 2, 3]);
        assert_eq!(g.vn_neighbors(2), &[0, 1]);
        assert_eq!(g.regular_degrees(), Some((2, 4)));
    }

    #[test]
    fn parse_rejects_inconsistent_halves() {
        // VN 2 lists CN 2, but CN 1 claims VN 2
        let bad = "3 2\n1 2\n1 1 1\n2 1\n1\n2\n2\n1 2\n3\n";
        match parse_alist(bad) {
            Err(Error::Alist(AlistError::InconsistentHalves { vn, cn })) => {
                assert_eq!((vn, cn), (2, 1));
            }
            other => panic!("expected inconsistency, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_bad_tokens_and_ranges() {
        assert!(matches!(
            parse_alist("x y\n"),
            Err(Error::Alist(AlistError::Malformed { .. }))
        ));
        let out_of_range = "2 1\n1 2\n1 1\n2\n1\n9\n1 2\n";
        assert!(matches!(
            parse_alist(out_of_range),
            Err(Error::Alist(AlistError::IndexOutOfRange { .. }))
        ));
        let dup = "2 1\n2 2\n2 1\n2\n1 1\n1\n1 2\n";
        assert!(matches!(
            parse_alist(dup),
            Err(Error::Alist(AlistError::DuplicateEdge { .. }))
        ));
    }

    #[test]
    fn zero_padding_tolerated_on_read_never_written() {
        let padded = "4 2\n2 4\n2 2 2 2\n4 4\n1 2 0\n1 2 0\n1 2 0\n1 2 0\n1 2 3 4\n1 2 3 4\n";
        let g = parse_alist(padded).unwrap();
        assert_eq!(g, parse_alist(TOY).unwrap());
        assert!(!g.to_alist().contains(" 0"));
        assert_eq!(parse_alist(&g.to_alist()).unwrap(), g);
    }

    #[test]
    fn alist_roundtrip() {
        let g = generate_regular(32, 3, 6, 7).unwrap();
        let text = g.to_alist();
        assert_eq!(parse_alist(&text).unwrap(), g);
    }

    #[test]
    fn ieee_class_header_counts() {
        let g = generate_regular(2048, 6, 32, 1).unwrap();
        assert_eq!(g.n_cn(), 384);
        assert_eq!(g.regular_degrees(), Some((6, 32)));
        assert_eq!(2048 * 6, 384 * 32);
        // no parallel edges means girth >= 4
        for v in 0..g.n_vn() {
            let nb = g.vn_neighbors(v);
            assert!(nb.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn generator_is_deterministic_and_regular() {
        let a = generate_regular(8, 2, 4, 3).unwrap();
        let b = generate_regular(8, 2, 4, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_cn(), 4);
        assert_eq!(a.regular_degrees(), Some((2, 4)));
        let c = generate_regular(8, 2, 4, 4).unwrap();
        assert!(a != c, "different seeds should differ");
        assert!(generate_regular(8, 3, 5, 0).is_err());
    }

    #[test]
    fn syndrome_matches_dense_multiply() {
        let g = generate_regular(24, 3, 6, 5).unwrap();
        // dense H from adjacency
        let mut h = vec![vec![0u8; g.n_vn()]; g.n_cn()];
        for c in 0..g.n_cn() {
            for &v in g.cn_neighbors(c) {
                h[c][v as usize] = 1;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let bits: Vec<u8> = (0..g.n_vn()).map(|_| rng.gen_range(0..2u8)).collect();
            let dense: Vec<u8> = h
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&bits)
                        .fold(0u8, |acc, (hh, bb)| acc ^ (hh & bb))
                })
                .collect();
            assert_eq!(g.syndrome(&bits).unwrap(), dense);
        }
        assert_eq!(g.syndrome(&vec![0; 24]).unwrap(), vec![0; g.n_cn()]);
        // single 1 at VN v lights exactly its neighborhood
        let mut one = vec![0u8; 24];
        one[5] = 1;
        let syn = g.syndrome(&one).unwrap();
        for c in 0..g.n_cn() {
            let expect = g.cn_neighbors(c).contains(&5) as u8;
            assert_eq!(syn[c], expect);
        }
        assert!(g.syndrome(&[0, 1]).is_err());
    }

    #[test]
    fn edge_ids_are_consistent_between_sides() {
        let g = toy_graph();
        for c in 0..g.n_cn() {
            for (rank, &v) in g.cn_neighbors(c).iter().enumerate() {
                let e = g.cn_edges(c)[rank];
                let v = v as usize;
                let vrank = g.vn_neighbors(v).iter().position(|&x| x as usize == c).unwrap();
                assert_eq!(g.vn_edges(v)[vrank], e);
            }
        }
    }
}
