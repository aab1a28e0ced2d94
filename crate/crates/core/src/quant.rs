//! Mutual-information-maximizing quantizers for binary-input channels.
//!
//! A deterministic quantizer is a [`Lut`] mapping input labels to a smaller
//! output alphabet. For binary-input channels and the MI objective, an
//! optimal deterministic quantizer maps a *contiguous* run of labels (in
//! sorted-LLR order) to each output label, so the search reduces to a
//! dynamic program over partition boundaries. The symmetric variant fixes
//! the central (zero-LLR) cut and designs the upper half only, mirroring the
//! result, which yields tables satisfying the label-domain sign symmetry
//! `map[K-1-a] = out-1-map[a]`.

use crate::error::{Error, Result};
use crate::pmf::ConditionalPmf;

/// A deterministic lookup table from an input label alphabet onto a smaller
/// (or equal) output alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Lut {
    input_size: usize,
    output_size: usize,
    map: Vec<u16>,
    symmetric: bool,
    degenerate: bool,
}

impl Lut {
    pub fn new(input_size: usize, output_size: usize, map: Vec<u16>) -> Result<Self> {
        if map.len() != input_size {
            return Err(Error::InvalidArgument(format!(
                "lut map length {} does not match input size {input_size}",
                map.len()
            )));
        }
        if map.iter().any(|&m| (m as usize) >= output_size) {
            return Err(Error::InvalidArgument(
                "lut map entry outside output alphabet".into(),
            ));
        }
        Ok(Lut {
            input_size,
            output_size,
            map,
            symmetric: false,
            degenerate: false,
        })
    }

    pub fn identity(n: usize) -> Self {
        Lut {
            input_size: n,
            output_size: n,
            map: (0..n as u16).collect(),
            symmetric: true,
            degenerate: false,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn map(&self) -> &[u16] {
        &self.map
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub(crate) fn set_degenerate(&mut self, v: bool) {
        self.degenerate = v;
    }

    pub(crate) fn with_symmetric_flag(mut self, v: bool) -> Self {
        self.symmetric = v;
        self
    }

    /// Verifies the label-domain sign symmetry `map[n-1-a] = K-1-map[a]`.
    pub fn check_symmetry(&self) -> bool {
        let n = self.input_size;
        let k = self.output_size as u16;
        (0..n).all(|a| self.map[n - 1 - a] == k - 1 - self.map[a])
    }

    /// Every output label used by at least one input.
    pub fn is_surjective(&self) -> bool {
        let mut used = vec![false; self.output_size];
        for &m in &self.map {
            used[m as usize] = true;
        }
        used.iter().all(|&u| u)
    }

    /// Inputs mapping to each output form contiguous runs ordered by the
    /// output label (the shape of optimal quantizers on sorted inputs).
    pub fn is_contiguous(&self) -> bool {
        self.map.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1)
            && self.map.first().copied() == Some(0)
            && self.map.last().copied() == Some(self.output_size as u16 - 1)
    }
}

/// Stable sort of the labels by LLR; returns `(perm, sorted)` where
/// `perm[pos]` is the original label at sorted position `pos`.
pub fn sort_by_llr(pmf: &ConditionalPmf) -> (Vec<usize>, ConditionalPmf) {
    let keys = pmf.llrs();
    let mut perm: Vec<usize> = (0..pmf.len()).collect();
    perm.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap());
    let p0 = perm.iter().map(|&i| pmf.p0()[i]).collect();
    let p1 = perm.iter().map(|&i| pmf.p1()[i]).collect();
    // mass and entries already validated on pmf
    let sorted = ConditionalPmf::new(p0, p1).expect("permuted pmf stays valid");
    (perm, sorted)
}

/// LLR sort of a symmetric pmf that keeps the mirror identity exact: label
/// `a` and its mirror `n-1-a` land at mirrored sorted positions. Plain
/// stable sorting can break the pairing when distinct labels share an LLR.
pub fn sort_by_llr_symmetric(pmf: &ConditionalPmf) -> Result<(Vec<usize>, ConditionalPmf)> {
    let n = pmf.len();
    if n % 2 != 0 {
        return Err(Error::InvalidArgument(
            "symmetric sort needs an even alphabet".into(),
        ));
    }
    if !pmf.verify_symmetry(1e-12) {
        return Err(Error::InvalidArgument(
            "symmetric sort needs a symmetric pmf".into(),
        ));
    }
    // One representative per mirror pair: the member with non-negative LLR
    // (ties resolved toward the lower index).
    let mut uppers: Vec<(f64, usize)> = Vec::with_capacity(n / 2);
    for a in 0..n / 2 {
        let l = pmf.llr(a);
        let u = if l > 0.0 { a } else { n - 1 - a };
        let c = pmf.llr(u).abs(); // |llr| of the pair, NaN-free by llr()
        uppers.push((c, u));
    }
    uppers.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
    let mut perm = vec![0usize; n];
    for (t, &(_, u)) in uppers.iter().enumerate() {
        perm[n / 2 + t] = u;
        perm[n / 2 - 1 - t] = n - 1 - u;
    }
    let p0: Vec<f64> = perm.iter().map(|&i| pmf.p0()[i]).collect();
    let sorted = ConditionalPmf::symmetric_from_p0(p0)?;
    Ok((perm, sorted))
}

/// MI contribution of one cluster with conditional masses `(q0, q1)`:
/// `Σ_x (1/2) q_x log2(q_x / ((q0+q1)/2))`, with `0 log 0 = 0`.
#[inline]
fn cluster_term(q0: f64, q1: f64) -> f64 {
    let q0 = q0.max(0.0);
    let q1 = q1.max(0.0);
    let m = 0.5 * (q0 + q1);
    let mut t = 0.0;
    if q0 > 0.0 {
        t += 0.5 * q0 * (q0 / m).log2();
    }
    if q1 > 0.0 {
        t += 0.5 * q1 * (q1 / m).log2();
    }
    t
}

/// Maximizes `Σ_j cluster_term(cluster j)` over partitions of `0..n` into
/// `k` contiguous non-empty clusters. Returns the cluster end indices
/// (exclusive, ascending, last = n) and the achieved total.
///
/// Uses divide-and-conquer monotonicity of the leftmost argmax; ties inside
/// a layer resolve to the smallest boundary index.
fn contiguous_partition_dp(pre0: &[f64], pre1: &[f64], k: usize) -> (Vec<usize>, f64) {
    let n = pre0.len() - 1;
    debug_assert!(k >= 1 && k <= n);
    let term = |a: usize, b: usize| cluster_term(pre0[b] - pre0[a], pre1[b] - pre1[a]);

    let mut prev = vec![f64::NEG_INFINITY; n + 1];
    prev[0] = 0.0;
    let mut cur = vec![f64::NEG_INFINITY; n + 1];
    let mut args: Vec<Vec<u32>> = Vec::with_capacity(k);
    for j in 1..=k {
        let ilo = j;
        let ihi = n - (k - j);
        let mut arg = vec![0u32; n + 1];
        if j == 1 {
            // single feasible predecessor a = 0
            for i in ilo..=ihi {
                cur[i] = term(0, i);
            }
        } else {
            let alo = j - 1;
            let ahi = ihi - 1;
            dnc_fill(&prev, &term, ilo, ihi, alo, ahi, &mut cur, &mut arg);
        }
        args.push(arg);
        std::mem::swap(&mut prev, &mut cur);
        for v in cur.iter_mut() {
            *v = f64::NEG_INFINITY;
        }
    }
    let total = prev[n];
    let mut ends = vec![0usize; k];
    ends[k - 1] = n;
    for j in (1..k).rev() {
        ends[j - 1] = args[j][ends[j]] as usize;
    }
    (ends, total)
}

#[allow(clippy::too_many_arguments)]
fn dnc_fill(
    prev: &[f64],
    term: &impl Fn(usize, usize) -> f64,
    ilo: usize,
    ihi: usize,
    alo: usize,
    ahi: usize,
    cur: &mut [f64],
    arg: &mut [u32],
) {
    if ilo > ihi {
        return;
    }
    let mid = ilo + (ihi - ilo) / 2;
    let hi_a = ahi.min(mid - 1);
    let mut best = f64::NEG_INFINITY;
    let mut best_a = alo;
    for a in alo..=hi_a {
        let v = prev[a] + term(a, mid);
        if v > best {
            best = v;
            best_a = a;
        }
    }
    cur[mid] = best;
    arg[mid] = best_a as u32;
    if mid > ilo {
        dnc_fill(prev, term, ilo, mid - 1, alo, best_a, cur, arg);
    }
    if mid < ihi {
        dnc_fill(prev, term, mid + 1, ihi, best_a, ahi, cur, arg);
    }
}

fn lut_from_ends(n: usize, ends: &[usize]) -> Vec<u16> {
    let mut map = vec![0u16; n];
    let mut start = 0usize;
    for (j, &end) in ends.iter().enumerate() {
        for m in map.iter_mut().take(end).skip(start) {
            *m = j as u16;
        }
        start = end;
    }
    map
}

/// MI-optimal deterministic quantizer of a sorted pmf onto `k` output labels.
///
/// Returns the table, the induced output pmf, and the achieved mutual
/// information. If the input has fewer labels than `k`, the result is the
/// identity flagged degenerate.
pub fn optimal_quantizer(pmf: &ConditionalPmf, k: usize) -> Result<(Lut, ConditionalPmf, f64)> {
    if k < 1 {
        return Err(Error::InvalidArgument("output size must be at least 1".into()));
    }
    let n = pmf.len();
    if !pmf.is_llr_sorted(1e-12) {
        return Err(Error::InvalidArgument(
            "optimal_quantizer requires a pmf sorted by LLR".into(),
        ));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "output size {k} exceeds input size {n}"
        )));
    }
    let mut pre0 = vec![0.0; n + 1];
    let mut pre1 = vec![0.0; n + 1];
    for i in 0..n {
        pre0[i + 1] = pre0[i] + pmf.p0()[i];
        pre1[i + 1] = pre1[i] + pmf.p1()[i];
    }
    let (ends, _) = contiguous_partition_dp(&pre0, &pre1, k);
    let lut = Lut::new(n, k, lut_from_ends(n, &ends))?;
    let out = apply_lut(pmf, &lut)?;
    let mi = out.mutual_information();
    Ok((lut, out, mi))
}

/// MI-optimal *symmetric* quantizer of a sorted symmetric pmf onto `k`
/// (even) output labels. The central zero-LLR cut is fixed; the upper half
/// is partitioned by the DP and mirrored onto the lower half.
pub fn optimal_symmetric_quantizer(
    pmf: &ConditionalPmf,
    k: usize,
) -> Result<(Lut, ConditionalPmf, f64)> {
    let n = pmf.len();
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "symmetric quantizer output size must be even and >= 2, got {k}"
        )));
    }
    if n % 2 != 0 {
        return Err(Error::InvalidArgument(
            "symmetric quantizer input size must be even".into(),
        ));
    }
    if !pmf.verify_symmetry(1e-12) {
        return Err(Error::InvalidArgument(
            "optimal_symmetric_quantizer requires a symmetric pmf".into(),
        ));
    }
    if !pmf.is_llr_sorted(1e-9) {
        return Err(Error::InvalidArgument(
            "optimal_symmetric_quantizer requires a pmf sorted by LLR".into(),
        ));
    }
    if k > n {
        // Degenerate: cannot split n inputs into more than n clusters.
        let mut lut = Lut::identity(n);
        lut.set_degenerate(true);
        let out = pmf.clone();
        let mi = out.mutual_information();
        return Ok((lut, out, mi));
    }
    let half = n / 2;
    let kh = k / 2;
    let mut pre0 = vec![0.0; half + 1];
    let mut pre1 = vec![0.0; half + 1];
    for i in 0..half {
        pre0[i + 1] = pre0[i] + pmf.p0()[half + i];
        pre1[i + 1] = pre1[i] + pmf.p1()[half + i];
    }
    let (ends, _) = contiguous_partition_dp(&pre0, &pre1, kh);
    let upper_map = lut_from_ends(half, &ends);
    let mut map = vec![0u16; n];
    for i in 0..half {
        let c = upper_map[i];
        map[half + i] = kh as u16 + c;
        map[half - 1 - i] = kh as u16 - 1 - c;
    }
    let lut = Lut::new(n, k, map)?.with_symmetric_flag(true);
    debug_assert!(lut.check_symmetry());
    // Output pmf: cluster masses on the upper half, mirrored exactly.
    // Summed directly (not as prefix differences) so that tiny tail masses
    // survive; a prefix difference near a large accumulated sum would round
    // them to zero.
    let mut out0 = vec![0.0; k];
    let mut start = 0usize;
    for (c, &end) in ends.iter().enumerate() {
        let q0: f64 = pmf.p0()[half + start..half + end].iter().sum();
        let q1: f64 = pmf.p1()[half + start..half + end].iter().sum();
        out0[kh + c] = q0;
        out0[kh - 1 - c] = q1;
        start = end;
    }
    let out = ConditionalPmf::symmetric_from_p0(out0)?;
    let mi = out.mutual_information();
    Ok((lut, out, mi))
}

/// Push-forward of a pmf through a lut: `out(j|x) = Σ_{map[a]=j} in(a|x)`.
pub fn apply_lut(pmf: &ConditionalPmf, lut: &Lut) -> Result<ConditionalPmf> {
    if pmf.len() != lut.input_size() {
        return Err(Error::InvalidArgument(format!(
            "pmf size {} does not match lut input size {}",
            pmf.len(),
            lut.input_size()
        )));
    }
    let k = lut.output_size();
    let mut out0 = vec![0.0; k];
    if pmf.is_symmetric() && lut.is_symmetric() {
        for (a, &m) in lut.map().iter().enumerate() {
            out0[m as usize] += pmf.p0()[a];
        }
        ConditionalPmf::symmetric_from_p0(out0)
    } else {
        let mut out1 = vec![0.0; k];
        for (a, &m) in lut.map().iter().enumerate() {
            out0[m as usize] += pmf.p0()[a];
            out1[m as usize] += pmf.p1()[a];
        }
        ConditionalPmf::new(out0, out1)
    }
}
