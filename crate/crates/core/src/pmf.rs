//! Conditional probability mass functions over ordered label alphabets.
//!
//! A [`ConditionalPmf`] is the pair of distributions of a label given the
//! transmitted code bit `x ∈ {0, 1}`. Symmetric pmfs satisfy
//! `p0[k] = p1[K-1-k]` exactly; every construction path in this crate keeps
//! that identity bitwise by storing `p0` and mirroring it into `p1`.

use crate::error::{Error, Result};

/// Tolerance for total-mass validation of a freshly constructed pmf.
pub const MASS_TOL: f64 = 1e-9;

/// Compensated (Kahan) summation; keeps mass checks meaningful for
/// joint alphabets with tens of thousands of entries.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// A pair of pmfs over a common ordered label alphabet, conditioned on the
/// code bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPmf {
    p0: Vec<f64>,
    p1: Vec<f64>,
    symmetric: bool,
}

impl ConditionalPmf {
    /// General constructor; validates non-negativity and unit mass.
    pub fn new(p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        if p0.len() != p1.len() || p0.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "pmf halves must be non-empty and of equal length (got {} and {})",
                p0.len(),
                p1.len()
            )));
        }
        for (name, v) in [("p0", &p0), ("p1", &p1)] {
            if v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} has a negative or non-finite entry"
                )));
            }
            let s = kahan_sum(v);
            if (s - 1.0).abs() > MASS_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{name} sums to {s}, expected 1"
                )));
            }
        }
        Ok(ConditionalPmf {
            p0,
            p1,
            symmetric: false,
        })
    }

    /// Builds a symmetric pmf from `p0` alone; `p1` is the exact mirror.
    pub fn symmetric_from_p0(p0: Vec<f64>) -> Result<Self> {
        let p1: Vec<f64> = p0.iter().rev().copied().collect();
        let mut pmf = Self::new(p0, p1)?;
        pmf.symmetric = true;
        Ok(pmf)
    }

    /// Validates that the two halves mirror each other within `tol` and
    /// enforces the identity exactly (p1 is replaced by the mirror of p0).
    pub fn new_symmetric(p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        let pmf = Self::new(p0, p1)?;
        let k = pmf.len();
        for i in 0..k {
            let d = (pmf.p0[i] - pmf.p1[k - 1 - i]).abs();
            if d > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "pmf is not symmetric: |p0[{i}] - p1[{}]| = {d}",
                    k - 1 - i
                )));
            }
        }
        // Average mirror-image bins, then mirror exactly.
        let avg: Vec<f64> = (0..k)
            .map(|i| 0.5 * (pmf.p0[i] + pmf.p1[k - 1 - i]))
            .collect();
        Self::symmetric_from_p0(avg)
    }

    /// Uniform symmetric pmf (both halves `1/n` everywhere).
    pub fn uniform(n: usize) -> Self {
        let p = vec![1.0 / n as f64; n];
        ConditionalPmf {
            p0: p.clone(),
            p1: p,
            symmetric: true,
        }
    }

    pub fn len(&self) -> usize {
        self.p0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p0.is_empty()
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    /// Whether this pmf was constructed through a symmetry-preserving path.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Checks the mirror identity numerically, regardless of the flag.
    pub fn verify_symmetry(&self, tol: f64) -> bool {
        let k = self.len();
        (0..k).all(|i| (self.p0[i] - self.p1[k - 1 - i]).abs() <= tol)
    }

    /// Log-likelihood ratio of label `k` (natural log).
    ///
    /// `0/0` bins carry no mass and get the neutral value 0 so that sorting
    /// stays total; `x/0` ratios map to the signed infinities.
    pub fn llr(&self, k: usize) -> f64 {
        let (a, b) = (self.p0[k], self.p1[k]);
        if a == 0.0 && b == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else if a == 0.0 {
            f64::NEG_INFINITY
        } else {
            (a / b).ln()
        }
    }

    pub fn llrs(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.llr(k)).collect()
    }

    /// Whether the labels are in non-decreasing LLR order. Zero-mass bins are
    /// skipped; `slack` absorbs round-off from mirrored float ratios.
    pub fn is_llr_sorted(&self, slack: f64) -> bool {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..self.len() {
            if self.p0[k] == 0.0 && self.p1[k] == 0.0 {
                continue;
            }
            let l = self.llr(k);
            if l < prev - slack {
                return false;
            }
            prev = prev.max(l);
        }
        true
    }

    /// Mutual information `I(label; x)` in bits, for uniform `x`.
    pub fn mutual_information(&self) -> f64 {
        let mut sum = 0.0;
        for k in 0..self.len() {
            let a = self.p0[k];
            let b = self.p1[k];
            let m = 0.5 * (a + b);
            if a > 0.0 {
                sum += 0.5 * a * (a / m).log2();
            }
            if b > 0.0 {
                sum += 0.5 * b * (b / m).log2();
            }
        }
        sum
    }

    /// Total-mass drift of either half from 1.
    pub fn mass_drift(&self) -> f64 {
        let d0 = (kahan_sum(&self.p0) - 1.0).abs();
        let d1 = (kahan_sum(&self.p1) - 1.0).abs();
        d0.max(d1)
    }

    /// Renormalizes both halves; returns the drift that was removed.
    /// Symmetric pmfs are renormalized via `p0` and re-mirrored so the
    /// identity stays exact.
    pub fn renormalize(&mut self) -> f64 {
        let drift = self.mass_drift();
        if self.symmetric {
            let s = kahan_sum(&self.p0);
            for x in &mut self.p0 {
                *x /= s;
            }
            self.p1 = self.p0.iter().rev().copied().collect();
        } else {
            let s0 = kahan_sum(&self.p0);
            let s1 = kahan_sum(&self.p1);
            for x in &mut self.p0 {
                *x /= s0;
            }
            for x in &mut self.p1 {
                *x /= s1;
            }
        }
        drift
    }
}
