//! Scratch: design-SNR trade-off scouting across downsize splits.

use minlut::design::{design_decoder, DesignParams};
use minlut::sim::{simulate, PointResult, SimConfig, SimDecoder};
use minlut::tanner::generate_regular;
use minlut::trees::LutTree;

fn run(
    graph: &minlut::tanner::TannerGraph,
    dec: &SimDecoder,
    ebn0: f64,
    min_fe: u64,
    max_frames: u64,
) -> PointResult {
    let cfg = SimConfig {
        ebn0_db: vec![ebn0],
        rate: 13.0 / 16.0,
        max_frames,
        min_frame_errors: min_fe,
        master_seed: 29,
        workers: 0,
    };
    simulate(graph, dec, &cfg).unwrap().remove(0)
}

fn main() {
    let graph = generate_regular(2048, 6, 32, 1).unwrap();
    let tree = LutTree::parse("((mu mu) (mu mu) mu L)").unwrap();
    for schedule in [
        vec![8, 8, 4, 4, 4, 4, 4, 4],
        vec![8, 4, 4, 4, 4, 4, 4, 4],
    ] {
        let mut params = DesignParams::regular(6, 32, 8, 8, 8, tree.clone());
        params.alphabet_schedule = schedule.clone();
        let low = SimDecoder::MinLut(design_decoder(3.85, 13.0 / 16.0, &params).unwrap());
        let high = SimDecoder::MinLut(design_decoder(4.15, 13.0 / 16.0, &params).unwrap());
        println!("=== schedule {schedule:?}");
        for ebn0 in [4.3f64, 4.7, 5.1, 5.5] {
            let a = run(&graph, &low, ebn0, 60, 400_000);
            let b = run(&graph, &high, ebn0, 60, 400_000);
            println!(
                "  {ebn0:.1} dB: low {:.3e} ({}/{})  high {:.3e} ({}/{})  {}",
                a.fer(),
                a.frame_errors,
                a.frames,
                b.fer(),
                b.frame_errors,
                b.frames,
                if b.fer() < a.fer() { "REVERSED" } else { "" }
            );
        }
    }
}
