//! Cross-module integration: designed specs driving the decoder and the
//! Monte Carlo harness, checked against independent re-implementations.

use minlut::decoder::{cn_labels_minsum, decode_min_lut, MessageAlphabet, MinLutDecoder};
use minlut::decoder_spec::{eval_stage, DecoderSpec};
use minlut::design::{design_decoder, DesignParams};
use minlut::sim::{simulate, SimConfig, SimDecoder};
use minlut::tanner::{generate_regular, TannerGraph};
use minlut::trees::LutTree;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn small_spec_3reg() -> DecoderSpec {
    let mut params = DesignParams::regular(3, 6, 8, 4, 4, LutTree::parse("(mu mu L)").unwrap());
    params.fine_grid = 512;
    design_decoder(2.5, 0.5, &params).unwrap()
}

fn spec_632() -> DecoderSpec {
    let params = DesignParams::regular(
        6,
        32,
        8,
        8,
        8,
        LutTree::parse("((mu mu) (mu mu) mu L)").unwrap(),
    );
    design_decoder(4.0, 13.0 / 16.0, &params).unwrap()
}

#[test]
fn noiseless_frame_decodes_in_one_iteration() {
    let spec = spec_632();
    let graph = generate_regular(512, 6, 32, 11).unwrap();
    let labels = vec![(spec.llr_levels - 1) as u8; 512];
    let out = decode_min_lut(&spec, &graph, &labels).unwrap();
    assert!(out.syndrome_ok);
    assert_eq!(out.iterations_used, 1);
    assert!(out.bits.iter().all(|&b| b == 0));
}

#[test]
fn vn_eval_matches_hand_indexed_tables() {
    // d_v = 3 star tree: the single node table is indexed as
    // ((m1 * M) + m2) * L_levels + L, first child most significant.
    let spec = small_spec_3reg();
    let stage = &spec.stages[0];
    assert_eq!(stage.node_luts.len(), 1);
    let lut = &stage.node_luts[0];
    for m1 in 0..4usize {
        for m2 in 0..4usize {
            for l in 0..4usize {
                let idx = ((m1 * 4) + m2) * 4 + l;
                let expect = lut.map()[idx] as usize;
                assert_eq!(
                    eval_stage(stage, 4, l, &[m1, m2]).unwrap(),
                    expect
                );
            }
        }
    }

    // nested tree: hand-compose two tables
    let mut params =
        DesignParams::regular(3, 6, 8, 4, 4, LutTree::parse("((mu mu) L)").unwrap());
    params.fine_grid = 512;
    let spec = design_decoder(2.5, 0.5, &params).unwrap();
    let stage = &spec.stages[2];
    let inner = &stage.node_luts[0];
    let root = &stage.node_luts[1];
    for m1 in 0..4usize {
        for m2 in 0..4usize {
            for l in 0..4usize {
                let a = inner.map()[m1 * 4 + m2] as usize;
                let expect = root.map()[a * 4 + l] as usize;
                assert_eq!(eval_stage(stage, 4, l, &[m1, m2]).unwrap(), expect);
            }
        }
    }
}

#[test]
fn vn_eval_complement_identity_exhaustive() {
    let spec = small_spec_3reg();
    for iteration in 2..=spec.iterations {
        let stage = spec.vn_stage_at(iteration).unwrap();
        let m = stage.msg_in;
        let out_m = stage.output_size();
        for l in 0..spec.llr_levels {
            for m1 in 0..m {
                for m2 in 0..m {
                    let y = minlut::decoder::vn_lut_eval(&spec, iteration, l, &[m1, m2]).unwrap();
                    let yc = minlut::decoder::vn_lut_eval(
                        &spec,
                        iteration,
                        spec.llr_levels - 1 - l,
                        &[m - 1 - m1, m - 1 - m2],
                    )
                    .unwrap();
                    assert_eq!(yc, out_m - 1 - y, "iter {iteration} l={l} m=({m1},{m2})");
                }
            }
        }
    }
}

/// Independent reference decoder: flooding schedule re-implemented on top of
/// the label-level primitives, no compiled tables.
fn reference_decode(
    spec: &DecoderSpec,
    graph: &TannerGraph,
    labels: &[u8],
) -> minlut::decoder::DecodeOutcome {
    let n = graph.n_vn();
    let e = graph.n_edges();
    let mut v2c = vec![0usize; e];
    let mut c2v = vec![0usize; e];
    let mut bits = vec![0u8; n];
    for iter in 1..=spec.iterations {
        if iter == 1 {
            for v in 0..n {
                for &eid in graph.vn_edges(v) {
                    v2c[eid as usize] = spec.init_lut.map()[labels[v] as usize] as usize;
                }
            }
        } else {
            let mut next = vec![0usize; e];
            for v in 0..n {
                let edges = graph.vn_edges(v);
                for (r, &eid) in edges.iter().enumerate() {
                    let incoming: Vec<usize> = edges
                        .iter()
                        .enumerate()
                        .filter(|(q, _)| *q != r)
                        .map(|(_, &x)| c2v[x as usize])
                        .collect();
                    next[eid as usize] =
                        minlut::decoder::vn_lut_eval(spec, iter, labels[v] as usize, &incoming)
                            .unwrap();
                }
            }
            v2c = next;
        }
        let m = spec.msg_alphabet_at(iter);
        let alpha = MessageAlphabet::new(m).unwrap();
        for c in 0..graph.n_cn() {
            let edges = graph.cn_edges(c);
            for (r, &eid) in edges.iter().enumerate() {
                let others: Vec<usize> = edges
                    .iter()
                    .enumerate()
                    .filter(|(q, _)| *q != r)
                    .map(|(_, &x)| v2c[x as usize])
                    .collect();
                c2v[eid as usize] = cn_labels_minsum(&alpha, &others);
            }
        }
        if m == spec.decision.msg_in {
            for v in 0..n {
                let incoming: Vec<usize> = graph
                    .vn_edges(v)
                    .iter()
                    .map(|&x| c2v[x as usize])
                    .collect();
                bits[v] =
                    eval_stage(&spec.decision, spec.llr_levels, labels[v] as usize, &incoming)
                        .unwrap() as u8;
            }
            let ok = graph.syndrome(&bits).unwrap().iter().all(|&s| s == 0);
            if ok || iter == spec.iterations {
                return minlut::decoder::DecodeOutcome {
                    bits,
                    iterations_used: iter,
                    syndrome_ok: ok,
                };
            }
        }
    }
    unreachable!()
}

#[test]
fn compiled_decoder_matches_reference_decoder() {
    let spec = small_spec_3reg();
    let graph = generate_regular(60, 3, 6, 5).unwrap();
    let dec = MinLutDecoder::new(&spec, &graph).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..25 {
        let labels: Vec<u8> = (0..60).map(|_| rng.gen_range(0..4u8)).collect();
        let fast = dec.decode(&labels).unwrap();
        let slow = reference_decode(&spec, &graph, &labels);
        assert_eq!(fast, slow);
    }
    // also on the (6,32) spec with a few frames
    let spec = spec_632();
    let graph = generate_regular(256, 6, 32, 6).unwrap();
    let dec = MinLutDecoder::new(&spec, &graph).unwrap();
    for _ in 0..5 {
        let labels: Vec<u8> = (0..256).map(|_| rng.gen_range(0..8u8)).collect();
        let fast = dec.decode(&labels).unwrap();
        let slow = reference_decode(&spec, &graph, &labels);
        assert_eq!(fast, slow);
    }
}

#[test]
fn global_sign_symmetry_on_random_frames() {
    let spec = spec_632();
    let graph = generate_regular(512, 6, 32, 12).unwrap();
    let dec = MinLutDecoder::new(&spec, &graph).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let k = spec.llr_levels as u8;
    for _ in 0..100 {
        let labels: Vec<u8> = (0..512).map(|_| rng.gen_range(0..k)).collect();
        let flipped: Vec<u8> = labels.iter().map(|&l| k - 1 - l).collect();
        let a = dec.decode(&labels).unwrap();
        let b = dec.decode(&flipped).unwrap();
        let complemented: Vec<u8> = a.bits.iter().map(|&x| 1 - x).collect();
        assert_eq!(b.bits, complemented);
        assert_eq!(a.iterations_used, b.iterations_used);
        assert_eq!(a.syndrome_ok, b.syndrome_ok);
    }
}

#[test]
fn early_stop_reports_sound_syndromes() {
    let spec = spec_632();
    let graph = generate_regular(512, 6, 32, 13).unwrap();
    let dec = MinLutDecoder::new(&spec, &graph).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let labels: Vec<u8> = (0..512).map(|_| rng.gen_range(0..8u8)).collect();
        let out = dec.decode(&labels).unwrap();
        let syn = graph.syndrome(&out.bits).unwrap();
        assert_eq!(out.syndrome_ok, syn.iter().all(|&s| s == 0));
    }
}

#[test]
fn high_snr_frames_nearly_always_decode() {
    // generated (6,32), N = 2048 at Eb/N0 = 6 dB: decoding failures are
    // essentially absent across ten thousand frames
    let spec = spec_632();
    let graph = generate_regular(2048, 6, 32, 1).unwrap();
    let cfg = SimConfig {
        ebn0_db: vec![6.0],
        rate: 13.0 / 16.0,
        max_frames: 10_000,
        min_frame_errors: u64::MAX,
        master_seed: 9,
        workers: 0,
    };
    let r = &simulate(&graph, &SimDecoder::MinLut(spec), &cfg).unwrap()[0];
    assert_eq!(r.frames, 10_000);
    assert!(
        r.frame_errors < 10,
        "frame errors {} of {}",
        r.frame_errors,
        r.frames
    );
}

#[test]
fn fer_is_statistically_monotone_in_snr() {
    let spec = spec_632();
    let graph = generate_regular(512, 6, 32, 7).unwrap();
    let cfg = SimConfig {
        ebn0_db: vec![4.0, 4.5, 5.0],
        rate: 13.0 / 16.0,
        max_frames: 200_000,
        min_frame_errors: 100,
        master_seed: 4,
        workers: 0,
    };
    let rs = simulate(&graph, &SimDecoder::MinLut(spec), &cfg).unwrap();
    let mut inversions = 0;
    for w in rs.windows(2) {
        if w[1].fer() > w[0].fer() {
            inversions += 1;
            let se = (w[0].fer_stderr().powi(2) + w[1].fer_stderr().powi(2)).sqrt();
            assert!(w[1].fer() - w[0].fer() <= 2.0 * se);
        }
        assert!(w[1].frame_errors >= 100);
    }
    assert!(inversions <= 1);
}
