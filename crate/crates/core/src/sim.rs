//! Deterministic parallel Monte Carlo error-rate simulation.
//!
//! All-zero-codeword frames are sampled through the channel, decoded, and
//! counted. Every frame owns a counter-derived random stream keyed by
//! `(master_seed, snr_index, frame_index)`, and the stopping rule is
//! evaluated over the frame-index prefix, so results are byte-identical for
//! any worker count.

use crate::channel::{snr_to_sigma, LlrQuantizer, UniformLlrQuantizer};
use crate::decoder::{
    decode_minsum_fixed, decode_minsum_float, DecodeOutcome, MinLutDecoder,
};
use crate::decoder_spec::DecoderSpec;
use crate::error::{Error, Result};
use crate::tanner::TannerGraph;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Which decoder a simulation run drives.
pub enum SimDecoder {
    MinLut(DecoderSpec),
    MinsumFloat {
        max_iterations: usize,
    },
    /// Fixed-point min-sum; the channel quantizer step is tuned per SNR
    /// point for maximum mutual information unless overridden.
    MinsumFixed {
        q_mu: u32,
        q_llr: u32,
        step: Option<f64>,
        max_iterations: usize,
    },
}

/// Stopping rule and reproducibility knobs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Eb/N0 sweep points in dB.
    pub ebn0_db: Vec<f64>,
    pub rate: f64,
    pub max_frames: u64,
    pub min_frame_errors: u64,
    pub master_seed: u64,
    /// 0 = rayon default.
    pub workers: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ebn0_db.is_empty() || self.ebn0_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "SNR sweep must be non-empty and finite".into(),
            ));
        }
        if self.min_frame_errors < 1 {
            return Err(Error::InvalidArgument(
                "min_frame_errors must be at least 1".into(),
            ));
        }
        if self.max_frames < 1 {
            return Err(Error::InvalidArgument("max_frames must be at least 1".into()));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::InvalidArgument("rate must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Aggregated counters of one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub ebn0_db: f64,
    pub sigma: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub iterations_total: u64,
    pub elapsed_s: f64,
}

impl PointResult {
    pub fn ber(&self, n: usize) -> f64 {
        self.bit_errors as f64 / (self.frames as f64 * n as f64)
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames as f64
    }

    pub fn avg_iterations(&self) -> f64 {
        self.iterations_total as f64 / self.frames as f64
    }

    /// Binomial standard error of the frame error rate.
    pub fn fer_stderr(&self) -> f64 {
        let p = self.fer();
        (p * (1.0 - p) / self.frames as f64).sqrt()
    }
}

fn frame_rng(master_seed: u64, snr_index: u64, frame_index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&snr_index.to_le_bytes());
    seed[16..24].copy_from_slice(&frame_index.to_le_bytes());
    seed[24..32].copy_from_slice(b"minlutMC");
    ChaCha8Rng::from_seed(seed)
}

struct FrameStats {
    bit_errors: u64,
    frame_error: bool,
    iterations: u64,
}

fn stats_of(out: &DecodeOutcome) -> FrameStats {
    let bit_errors = out.bits.iter().map(|&b| b as u64).sum();
    FrameStats {
        bit_errors,
        frame_error: bit_errors > 0,
        iterations: out.iterations_used as u64,
    }
}

/// Per-frame worker shared across the pool; everything it needs is
/// immutable.
enum FrameKernel<'a> {
    MinLut {
        decoder: MinLutDecoder<'a>,
        quantizer: &'a LlrQuantizer,
    },
    Float {
        graph: &'a TannerGraph,
        max_iterations: usize,
    },
    Fixed {
        graph: &'a TannerGraph,
        quantizer: UniformLlrQuantizer,
        q_mu: u32,
        max_iterations: usize,
    },
}

impl FrameKernel<'_> {
    fn run(&self, n: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Result<FrameStats> {
        // all-zero codeword: every bit transmits symbol +1
        match self {
            FrameKernel::MinLut { decoder, quantizer } => {
                let mut labels = vec![0u8; n];
                for l in labels.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    let y = 1.0 + sigma * z;
                    *l = quantizer.label_of(2.0 * y / (sigma * sigma)) as u8;
                }
                Ok(stats_of(&decoder.decode(&labels)?))
            }
            FrameKernel::Float {
                graph,
                max_iterations,
            } => {
                let mut llrs = vec![0.0f64; n];
                for l in llrs.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    let y = 1.0 + sigma * z;
                    *l = 2.0 * y / (sigma * sigma);
                }
                Ok(stats_of(&decode_minsum_float(graph, &llrs, *max_iterations)?))
            }
            FrameKernel::Fixed {
                graph,
                quantizer,
                q_mu,
                max_iterations,
            } => {
                let mut llrs = vec![0i32; n];
                for l in llrs.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    let y = 1.0 + sigma * z;
                    *l = quantizer.quantize(2.0 * y / (sigma * sigma));
                }
                Ok(stats_of(&decode_minsum_fixed(
                    graph,
                    &llrs,
                    *q_mu,
                    *max_iterations,
                )?))
            }
        }
    }
}

const CHUNK: u64 = 1024;

/// Runs the sweep. Per point, frames are decoded in fixed-size chunks (in
/// parallel) and accounted in frame-index order until `min_frame_errors`
/// errors or `max_frames` frames, whichever comes first.
pub fn simulate(
    graph: &TannerGraph,
    decoder: &SimDecoder,
    cfg: &SimConfig,
) -> Result<Vec<PointResult>> {
    use rayon::prelude::*;

    cfg.validate()?;
    let n = graph.n_vn();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;

    let mut results = Vec::with_capacity(cfg.ebn0_db.len());
    for (snr_idx, &ebn0) in cfg.ebn0_db.iter().enumerate() {
        let sigma = snr_to_sigma(ebn0, cfg.rate)?;
        let kernel = match decoder {
            SimDecoder::MinLut(spec) => FrameKernel::MinLut {
                decoder: MinLutDecoder::new(spec, graph)?,
                quantizer: &spec.quantizer,
            },
            SimDecoder::MinsumFloat { max_iterations } => FrameKernel::Float {
                graph,
                max_iterations: *max_iterations,
            },
            SimDecoder::MinsumFixed {
                q_mu,
                q_llr,
                step,
                max_iterations,
            } => {
                let quantizer = match step {
                    Some(s) => UniformLlrQuantizer::new(*s, (1 << (q_llr - 1)) - 1)?,
                    None => crate::channel::design_uniform_llr_quantizer(sigma, *q_llr)?,
                };
                FrameKernel::Fixed {
                    graph,
                    quantizer,
                    q_mu: *q_mu,
                    max_iterations: *max_iterations,
                }
            }
        };

        let start = std::time::Instant::now();
        let mut acc = PointResult {
            ebn0_db: ebn0,
            sigma,
            frames: 0,
            bit_errors: 0,
            frame_errors: 0,
            iterations_total: 0,
            elapsed_s: 0.0,
        };
        let mut next_frame = 0u64;
        'point: while acc.frames < cfg.max_frames {
            let chunk_end = (next_frame + CHUNK).min(cfg.max_frames);
            let stats: Vec<Result<FrameStats>> = pool.install(|| {
                (next_frame..chunk_end)
                    .into_par_iter()
                    .map(|f| {
                        let mut rng = frame_rng(cfg.master_seed, snr_idx as u64, f);
                        kernel.run(n, sigma, &mut rng)
                    })
                    .collect()
            });
            for st in stats {
                let st = st?;
                acc.frames += 1;
                acc.bit_errors += st.bit_errors;
                acc.frame_errors += st.frame_error as u64;
                acc.iterations_total += st.iterations;
                if acc.frame_errors >= cfg.min_frame_errors || acc.frames == cfg.max_frames {
                    break 'point;
                }
            }
            next_frame = chunk_end;
        }
        acc.elapsed_s = start.elapsed().as_secs_f64();
        results.push(acc);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{design_decoder, DesignParams};
    use crate::tanner::generate_regular;
    use crate::trees::LutTree;

    fn small_spec() -> DecoderSpec {
        let mut params = DesignParams::regular(
            3,
            6,
            10,
            4,
            8,
            LutTree::parse("(mu mu L)").unwrap(),
        );
        params.fine_grid = 512;
        design_decoder(2.0, 0.5, &params).unwrap()
    }

    fn cfg(points: Vec<f64>) -> SimConfig {
        SimConfig {
            ebn0_db: points,
            rate: 0.5,
            max_frames: 2000,
            min_frame_errors: 50,
            master_seed: 7,
            workers: 0,
        }
    }

    #[test]
    fn noiseless_point_has_zero_fer() {
        let spec = small_spec();
        let graph = generate_regular(96, 3, 6, 3).unwrap();
        let mut c = cfg(vec![20.0]);
        c.max_frames = 200;
        let r = simulate(&graph, &SimDecoder::MinLut(spec), &c).unwrap();
        assert_eq!(r[0].frame_errors, 0);
        assert_eq!(r[0].frames, 200);
        assert_eq!(r[0].fer(), 0.0);
        // early decode: everything stops after one iteration
        assert_eq!(r[0].iterations_total, 200);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let spec = small_spec();
        let graph = generate_regular(96, 3, 6, 3).unwrap();
        let mut one = cfg(vec![2.0, 3.0]);
        one.workers = 1;
        let mut eight = cfg(vec![2.0, 3.0]);
        eight.workers = 8;
        let a = simulate(&graph, &SimDecoder::MinLut(spec.clone()), &one).unwrap();
        let b = simulate(&graph, &SimDecoder::MinLut(spec), &eight).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.frames, y.frames);
            assert_eq!(x.bit_errors, y.bit_errors);
            assert_eq!(x.frame_errors, y.frame_errors);
            assert_eq!(x.iterations_total, y.iterations_total);
        }
    }

    #[test]
    fn stopping_rule_is_prefix_based() {
        let spec = small_spec();
        let graph = generate_regular(96, 3, 6, 3).unwrap();
        // noisy point: errors plentiful, stop at exactly min_frame_errors
        let mut c = cfg(vec![0.0]);
        c.min_frame_errors = 17;
        let r = simulate(&graph, &SimDecoder::MinLut(spec), &c).unwrap();
        assert_eq!(r[0].frame_errors, 17);
        assert!(r[0].frames <= c.max_frames);
        // fer = frame_errors / frames by definition
        assert!((r[0].fer() - 17.0 / r[0].frames as f64).abs() < 1e-15);
    }

    #[test]
    fn baselines_run_and_improve_with_snr() {
        let graph = generate_regular(96, 3, 6, 5).unwrap();
        let c = cfg(vec![1.0, 4.0]);
        let float = simulate(
            &graph,
            &SimDecoder::MinsumFloat { max_iterations: 10 },
            &c,
        )
        .unwrap();
        assert!(float[1].fer() < float[0].fer());
        let fixed = simulate(
            &graph,
            &SimDecoder::MinsumFixed {
                q_mu: 4,
                q_llr: 4,
                step: None,
                max_iterations: 10,
            },
            &c,
        )
        .unwrap();
        assert!(fixed[1].fer() < fixed[0].fer());
    }
}
