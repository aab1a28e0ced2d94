//! BI-AWGN channel model with a symmetric quantized-LLR front end.
//!
//! Sign convention: bit 0 maps to symbol +1, bit 1 to -1, `y = symbol +
//! noise`, and the channel LLR is `2y/sigma^2`, so positive LLR means bit 0.
//! Under bit 0 the LLR is Gaussian with mean `2/sigma^2` and variance
//! `4/sigma^2`.

use crate::error::{Error, Result};
use crate::pmf::ConditionalPmf;
use crate::quant::{self, Lut};
use rand::Rng;
use rand_distr::StandardNormal;

/// Eb/N0 in dB to noise standard deviation for a rate-`R` code with
/// unit-energy BPSK: `sigma = sqrt(1 / (2 R 10^(gamma/10)))`.
pub fn snr_to_sigma(gamma_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rate must be in (0, 1], got {rate}"
        )));
    }
    if !gamma_db.is_finite() {
        return Err(Error::InvalidArgument("gamma_db must be finite".into()));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(gamma_db / 10.0))).sqrt())
}

/// Mass of a `N(mean, sd^2)` variable inside `(lo, hi]`, tail-stable.
fn gaussian_mass(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    let za = (lo - mean) / sd;
    let zb = (hi - mean) / sd;
    // upper-tail and lower-tail cdf forms, each accurate in its own tail
    let q = |z: f64| {
        if z == f64::NEG_INFINITY {
            1.0
        } else if z == f64::INFINITY {
            0.0
        } else {
            0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
        }
    };
    let phi = |z: f64| q(-z);
    // Evaluate in the direction that avoids cancellation in the far tail.
    let m = if za + zb > 0.0 {
        q(za) - q(zb)
    } else {
        phi(zb) - phi(za)
    };
    m.max(0.0)
}

/// Continuous channel LLR discretized onto a fine uniform grid, the input to
/// LLR-quantizer design. Bundles the pmf with the grid geometry.
#[derive(Debug, Clone)]
pub struct FineLlrGrid {
    pmf: ConditionalPmf,
    clip: f64,
}

impl FineLlrGrid {
    pub fn pmf(&self) -> &ConditionalPmf {
        &self.pmf
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    pub fn grid_size(&self) -> usize {
        self.pmf.len()
    }

    pub fn step(&self) -> f64 {
        2.0 * self.clip / self.grid_size() as f64
    }

    /// LLR value of bin edge `e` (0..=grid_size), antisymmetric exactly.
    pub fn edge(&self, e: usize) -> f64 {
        (e as f64 - self.grid_size() as f64 / 2.0) * self.step()
    }

    /// LLR value of the center of bin `k`.
    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5 - self.grid_size() as f64 / 2.0) * self.step()
    }
}

/// Default fine-grid resolution used by the designer.
pub const DEFAULT_FINE_GRID: usize = 2000;
/// Default fine-grid clip in LLR units.
pub const DEFAULT_FINE_CLIP: f64 = 40.0;

/// Discretizes the channel LLR density onto `grid_size` uniform bins over
/// `[-clip, clip]`, folding tail mass into the end bins. The result is
/// symmetric by construction (p1 is the exact mirror of p0, which equals the
/// analytic mirror here).
pub fn fine_llr_density(sigma: f64, grid_size: usize, clip: f64) -> Result<FineLlrGrid> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if grid_size < 64 || grid_size % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "grid_size must be even and at least 64, got {grid_size}"
        )));
    }
    if !(clip > 0.0) {
        return Err(Error::InvalidArgument("clip must be positive".into()));
    }
    let mean = 2.0 / (sigma * sigma);
    let sd = 2.0 / sigma;
    let step = 2.0 * clip / grid_size as f64;
    let edge = |e: usize| (e as f64 - grid_size as f64 / 2.0) * step;
    let mut p0 = vec![0.0; grid_size];
    for (k, slot) in p0.iter_mut().enumerate() {
        let lo = if k == 0 { f64::NEG_INFINITY } else { edge(k) };
        let hi = if k == grid_size - 1 {
            f64::INFINITY
        } else {
            edge(k + 1)
        };
        *slot = gaussian_mass(lo, hi, mean, sd);
    }
    let pmf = ConditionalPmf::symmetric_from_p0(p0)?;
    Ok(FineLlrGrid { pmf, clip })
}

/// Symmetric scalar quantizer of the channel LLR: an even number of regions
/// delimited by antisymmetric boundaries, plus the reproducer LLR value of
/// each region.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrQuantizer {
    boundaries: Vec<f64>,
    reproducers: Vec<f64>,
    interpolated: bool,
}

impl LlrQuantizer {
    pub fn from_parts(boundaries: Vec<f64>, reproducers: Vec<f64>) -> Result<Self> {
        let q = LlrQuantizer {
            boundaries,
            reproducers,
            interpolated: false,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn num_levels(&self) -> usize {
        self.reproducers.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn reproducers(&self) -> &[f64] {
        &self.reproducers
    }

    /// True when a dead (zero/zero) region forced reproducer interpolation.
    pub fn has_interpolated_reproducers(&self) -> bool {
        self.interpolated
    }

    /// Region index of an LLR value: `#{i : boundary[i] < llr}`.
    pub fn label_of(&self, llr: f64) -> usize {
        self.boundaries.partition_point(|&b| b < llr)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_levels();
        if k < 2 || k % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "quantizer must have an even number of levels >= 2, got {k}"
            )));
        }
        if self.boundaries.len() != k - 1 {
            return Err(Error::InvalidArgument(
                "boundary count must be num_levels - 1".into(),
            ));
        }
        if !self.boundaries.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "boundaries must be strictly increasing".into(),
            ));
        }
        for i in 0..self.boundaries.len() {
            let j = self.boundaries.len() - 1 - i;
            if (self.boundaries[i] + self.boundaries[j]).abs() > 1e-9 {
                return Err(Error::InvalidArgument(
                    "boundaries must be antisymmetric about 0".into(),
                ));
            }
        }
        // strictly increasing, except that saturated tails may repeat ±inf
        if !self
            .reproducers
            .windows(2)
            .all(|w| w[0] < w[1] || (w[0] == w[1] && w[0].is_infinite()))
        {
            return Err(Error::InvalidArgument(
                "reproducers must be strictly increasing".into(),
            ));
        }
        for i in 0..k {
            let a = self.reproducers[i];
            let b = self.reproducers[k - 1 - i];
            let ok = if a.is_infinite() || b.is_infinite() {
                a == -b
            } else {
                (a + b).abs() <= 1e-9
            };
            if !ok {
                return Err(Error::InvalidArgument(
                    "reproducers must be antisymmetric".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Designs the MI-optimal symmetric LLR quantizer for a fine-grid density.
///
/// Returns the quantizer together with the lut over the grid bins and the
/// quantized channel pmf it induces on the grid.
pub fn design_llr_quantizer(fine: &FineLlrGrid, num_levels: usize) -> Result<LlrQuantizer> {
    let (q, _, _) = design_llr_quantizer_full(fine, num_levels)?;
    Ok(q)
}

/// As [`design_llr_quantizer`], also returning the grid lut and the
/// grid-level quantized pmf (useful for MI comparisons).
pub fn design_llr_quantizer_full(
    fine: &FineLlrGrid,
    num_levels: usize,
) -> Result<(LlrQuantizer, Lut, ConditionalPmf)> {
    if num_levels % 2 != 0 || num_levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "num_levels must be even and >= 2, got {num_levels}"
        )));
    }
    if num_levels > fine.grid_size() {
        return Err(Error::InvalidArgument(
            "num_levels exceeds the fine grid size".into(),
        ));
    }
    let (lut, out, _) = quant::optimal_symmetric_quantizer(fine.pmf(), num_levels)?;
    // Cluster boundaries in LLR units: the lut is contiguous over the grid,
    // so each output transition sits at a grid edge. Build the upper half
    // and mirror so antisymmetry is exact; the middle boundary is 0.
    let k = num_levels;
    let mut cuts = vec![0usize; k - 1];
    for a in 1..fine.grid_size() {
        let (lo, hi) = (lut.map()[a - 1] as usize, lut.map()[a] as usize);
        if hi != lo {
            // optimal maps are contiguous: hi == lo + 1
            cuts[lo] = a;
        }
    }
    let mut boundaries = vec![0.0; k - 1];
    let mid = (k - 1) / 2;
    boundaries[mid] = 0.0;
    for j in mid + 1..k - 1 {
        boundaries[j] = fine.edge(cuts[j]);
        boundaries[k - 2 - j] = -boundaries[j];
    }
    let reproducers = reproducers_from_pmf(&out);
    let interpolated = out
        .p0()
        .iter()
        .zip(out.p1())
        .any(|(&a, &b)| a == 0.0 && b == 0.0);
    let q = LlrQuantizer {
        boundaries,
        reproducers,
        interpolated,
    };
    q.validate()?;
    Ok((q, lut, out))
}

/// Reproducer values of a symmetric pmf: `ln(p0/p1)` per label, with dead
/// (zero/zero) labels filled by linear interpolation of finite neighbors.
/// The lower half is the exact negated mirror of the upper half.
pub fn reproducers_from_pmf(pmf: &ConditionalPmf) -> Vec<f64> {
    let k = pmf.len();
    let half = k / 2;
    let mut upper: Vec<f64> = (half..k).map(|j| pmf.llr(j)).collect();
    // dead labels got the neutral 0 from llr(); rebuild them from neighbors
    let dead: Vec<bool> = (half..k)
        .map(|j| pmf.p0()[j] == 0.0 && pmf.p1()[j] == 0.0)
        .collect();
    if dead.iter().any(|&d| d) {
        for i in 0..upper.len() {
            if !dead[i] {
                continue;
            }
            let prev = (0..i).rev().find(|&p| !dead[p]);
            let next = (i + 1..upper.len()).find(|&p| !dead[p]);
            upper[i] = match (prev, next) {
                (Some(p), Some(q)) => {
                    let w = (i - p) as f64 / (q - p) as f64;
                    upper[p] + w * (upper[q] - upper[p])
                }
                (Some(p), None) => upper[p] + (i - p) as f64,
                (None, Some(q)) => upper[q] - (q - i) as f64,
                (None, None) => i as f64 + 1.0,
            };
        }
    }
    let mut out = vec![0.0; k];
    for (i, &v) in upper.iter().enumerate() {
        out[half + i] = v;
        out[half - 1 - i] = -v;
    }
    out
}

/// Exact Gaussian-tail integration of the channel LLR over each quantization
/// region; symmetric and LLR-sorted by construction.
pub fn channel_pmf(quantizer: &LlrQuantizer, sigma: f64) -> Result<ConditionalPmf> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let mean = 2.0 / (sigma * sigma);
    let sd = 2.0 / sigma;
    let k = quantizer.num_levels();
    let b = quantizer.boundaries();
    let mut p0 = vec![0.0; k];
    for (j, slot) in p0.iter_mut().enumerate() {
        let lo = if j == 0 { f64::NEG_INFINITY } else { b[j - 1] };
        let hi = if j == k - 1 { f64::INFINITY } else { b[j] };
        *slot = gaussian_mass(lo, hi, mean, sd);
    }
    ConditionalPmf::symmetric_from_p0(p0)
}

/// Draws one quantized-LLR label for a transmitted bit.
pub fn sample_llr_label<R: Rng + ?Sized>(
    bit: u8,
    sigma: f64,
    quantizer: &LlrQuantizer,
    rng: &mut R,
) -> usize {
    let symbol = if bit == 0 { 1.0 } else { -1.0 };
    let z: f64 = rng.sample(StandardNormal);
    let y = symbol + sigma * z;
    let llr = 2.0 * y / (sigma * sigma);
    quantizer.label_of(llr)
}

/// Uniform mid-tread quantizer for the fixed-point min-sum baseline:
/// `q(llr) = clamp(round(llr/step), -max_mag, max_mag)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformLlrQuantizer {
    step: f64,
    max_mag: i32,
}

impl UniformLlrQuantizer {
    pub fn new(step: f64, max_mag: i32) -> Result<Self> {
        if !(step > 0.0) || max_mag < 1 {
            return Err(Error::InvalidArgument(
                "uniform quantizer needs step > 0 and max_mag >= 1".into(),
            ));
        }
        Ok(UniformLlrQuantizer { step, max_mag })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn max_mag(&self) -> i32 {
        self.max_mag
    }

    pub fn quantize(&self, llr: f64) -> i32 {
        let q = (llr / self.step).round();
        q.clamp(-self.max_mag as f64, self.max_mag as f64) as i32
    }

    /// Conditional pmf of the quantized output over the BI-AWGN channel at
    /// `sigma` (levels ordered `-max..=max`).
    pub fn pmf(&self, sigma: f64) -> Result<ConditionalPmf> {
        let mean = 2.0 / (sigma * sigma);
        let sd = 2.0 / sigma;
        let n = (2 * self.max_mag + 1) as usize;
        let mut p0 = vec![0.0; n];
        let mut p1 = vec![0.0; n];
        for (i, lvl) in (-self.max_mag..=self.max_mag).enumerate() {
            let lo = if lvl == -self.max_mag {
                f64::NEG_INFINITY
            } else {
                (lvl as f64 - 0.5) * self.step
            };
            let hi = if lvl == self.max_mag {
                f64::INFINITY
            } else {
                (lvl as f64 + 0.5) * self.step
            };
            p0[i] = gaussian_mass(lo, hi, mean, sd);
            p1[i] = gaussian_mass(lo, hi, -mean, sd);
        }
        ConditionalPmf::new(p0, p1)
    }
}

/// Picks the step of a `bits`-bit mid-tread uniform LLR quantizer that
/// maximizes mutual information at the given noise level. Deterministic
/// geometric scan plus local refinement.
pub fn design_uniform_llr_quantizer(sigma: f64, bits: u32) -> Result<UniformLlrQuantizer> {
    if !(sigma > 0.0) || bits < 2 || bits > 15 {
        return Err(Error::InvalidArgument(
            "need sigma > 0 and 2 <= bits <= 15".into(),
        ));
    }
    let max_mag = (1i32 << (bits - 1)) - 1;
    let mi_of = |step: f64| -> f64 {
        UniformLlrQuantizer { step, max_mag }
            .pmf(sigma)
            .map(|p| p.mutual_information())
            .unwrap_or(0.0)
    };
    // scale the scan around the LLR dynamic range
    let scale = 2.0 / (sigma * sigma) / max_mag as f64;
    let mut best_step = scale;
    let mut best_mi = mi_of(scale);
    let mut lo = scale / 64.0;
    let mut hi = scale * 64.0;
    for _round in 0..3 {
        let pts = 64;
        let ratio = (hi / lo).powf(1.0 / (pts - 1) as f64);
        let mut s = lo;
        for _ in 0..pts {
            let mi = mi_of(s);
            if mi > best_mi {
                best_mi = mi;
                best_step = s;
            }
            s *= ratio;
        }
        lo = best_step / ratio;
        hi = best_step * ratio;
    }
    UniformLlrQuantizer::new(best_step, max_mag)
}
