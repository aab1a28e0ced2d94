//! Design a 3-bit min-LUT decoder for the (6,32) ensemble, run it over a
//! few noisy frames, and compare against the fixed-point min-sum baseline.

use minlut::design::{design_decoder, DesignParams};
use minlut::sim::{simulate, SimConfig, SimDecoder};
use minlut::tanner::generate_regular;
use minlut::trees::LutTree;

fn main() -> Result<(), minlut::Error> {
    let tree = LutTree::parse("((mu mu) (mu mu) mu L)")?;
    let params = DesignParams::regular(6, 32, 8, 8, 8, tree);
    let spec = design_decoder(4.0, 13.0 / 16.0, &params)?;
    println!("designed decoder, final I(m; x) = {:.6}", spec.mi_trace.last().unwrap());

    let graph = generate_regular(2048, 6, 32, 1)?;
    let cfg = SimConfig {
        ebn0_db: vec![4.5],
        rate: 13.0 / 16.0,
        max_frames: 5_000,
        min_frame_errors: 50,
        master_seed: 1,
        workers: 0,
    };
    for (name, dec) in [
        ("min-LUT 3-bit", SimDecoder::MinLut(spec)),
        (
            "min-sum 4-bit",
            SimDecoder::MinsumFixed {
                q_mu: 4,
                q_llr: 4,
                step: None,
                max_iterations: 8,
            },
        ),
    ] {
        let r = &simulate(&graph, &dec, &cfg)?[0];
        println!(
            "{name}: fer {:.3e} ({} errors / {} frames)",
            r.fer(),
            r.frame_errors,
            r.frames
        );
    }
    Ok(())
}
