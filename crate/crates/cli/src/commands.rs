//! The four subcommands. Each returns its human-readable report as a string
//! (the binary prints it) and writes any artifact files itself.

use crate::config::{ConfigFile, DesignSection, SimulateSection, ThresholdSection};
use crate::{CliError, CliResult};
use minlut::channel::snr_to_sigma;
use minlut::decoder_spec::DecoderSpec;
use minlut::design::{design_decoder, find_threshold, DesignParams};
use minlut::sim::{simulate, PointResult, SimConfig, SimDecoder};
use minlut::tanner::{generate_regular, parse_alist, TannerGraph};
use minlut::trees::LutTree;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn design_params_from(section: &DesignSection) -> CliResult<DesignParams> {
    let tree = LutTree::parse(&section.tree)
        .map_err(|e| CliError::Config(format!("design.tree: {e}")))?;
    let alphabet_schedule = section.alphabet.schedule(section.iterations);
    let design_set = section
        .design_set
        .clone()
        .unwrap_or_else(|| (1..=section.iterations).collect());
    let params = DesignParams {
        dv: section.dv,
        dc: section.dc,
        iterations: section.iterations,
        design_set,
        alphabet_schedule,
        tree,
        llr_policy: section.llr_policy.into(),
        llr_levels: section.llr_levels,
        epsilon: section.epsilon,
        fine_grid: section.fine_grid,
        fine_clip: section.fine_clip,
    };
    params
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(params)
}

fn sigma_to_ebn0(sigma: f64, rate: f64) -> f64 {
    10.0 * (1.0 / (2.0 * rate * sigma * sigma)).log10()
}

pub struct DesignReport {
    pub spec_path: Option<PathBuf>,
    pub text: String,
}

pub fn cmd_design(
    cfg: &ConfigFile,
    output_override: Option<PathBuf>,
) -> CliResult<DesignReport> {
    let section = cfg
        .design
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no [design] section".into()))?;
    let params = design_params_from(section)?;
    let sigma = snr_to_sigma(section.ebn0_db, section.rate)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "design: ({}, {})-regular, I = {}, |L| = {}, tree {}",
        params.dv,
        params.dc,
        params.iterations,
        params.llr_levels,
        params.tree.to_expression()
    );
    let _ = writeln!(
        text,
        "design point: Eb/N0 = {} dB, R = {}, sigma = {:.6}",
        section.ebn0_db, section.rate, sigma
    );

    if section.check_threshold {
        let mut tparams = params.clone();
        tparams.iterations = 200;
        tparams.design_set = (1..=200).collect();
        tparams.alphabet_schedule = vec![params.alphabet_schedule[0]; 200];
        let th = find_threshold(&tparams, 0.3, 0.8, 1e-4)?;
        let _ = writeln!(text, "threshold check: sigma* = {:.5}", th.sigma_star);
        if sigma >= th.sigma_star {
            let _ = writeln!(
                text,
                "warning: design sigma {sigma:.5} is not below the threshold; proceeding"
            );
        }
    }

    let spec = design_decoder(section.ebn0_db, section.rate, &params)?;
    let _ = writeln!(text, "mi trace:");
    for (i, mi) in spec.mi_trace.iter().enumerate() {
        let _ = writeln!(text, "  iteration {:>3}: I(m; x) = {mi:.8}", i + 1);
    }
    let _ = writeln!(
        text,
        "llr reproducers: {}",
        join_floats(spec.quantizer.reproducers())
    );
    for stage in &spec.stages {
        let _ = writeln!(
            text,
            "stage {:>3} reproducers: {}",
            stage.designed_at,
            join_floats(&stage.output_reproducers)
        );
    }

    let spec_path = output_override.or_else(|| section.output.clone());
    if let Some(ref path) = spec_path {
        std::fs::write(path, spec.to_text())
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        let _ = writeln!(text, "wrote {}", path.display());
    }
    Ok(DesignReport { spec_path, text })
}

fn join_floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_threshold(cfg: &ConfigFile, csv_override: Option<PathBuf>) -> CliResult<String> {
    let section: &ThresholdSection = cfg
        .threshold
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no [threshold] section".into()))?;
    let rate = 1.0 - section.dv as f64 / section.dc as f64;
    let mut text = String::new();
    let mut csv = String::from("tree_index,tree,lambda,sigma_star,ebn0_star_db,hit_upper_end\n");
    let _ = writeln!(
        text,
        "threshold search: ({}, {})-regular, |L| = {}, I = {}, epsilon = {}, \
         interval [{}, {}], delta = {}",
        section.dv,
        section.dc,
        section.llr_levels,
        section.iterations,
        section.epsilon,
        section.sigma_min,
        section.sigma_max,
        section.delta_sigma
    );
    for (idx, tree_text) in section.trees.iter().enumerate() {
        let tree = LutTree::parse(tree_text)
            .map_err(|e| CliError::Config(format!("threshold.trees[{idx}]: {e}")))?;
        let params = DesignParams {
            dv: section.dv,
            dc: section.dc,
            iterations: section.iterations,
            design_set: (1..=section.iterations).collect(),
            alphabet_schedule: section.alphabet.schedule(section.iterations),
            tree: tree.clone(),
            llr_policy: minlut::design::LlrPolicy::FixedAtRoot,
            llr_levels: section.llr_levels,
            epsilon: section.epsilon,
            fine_grid: section.fine_grid,
            fine_clip: section.fine_clip,
        };
        params
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let r = find_threshold(&params, section.sigma_min, section.sigma_max, section.delta_sigma)?;
        let lambda = tree.cumulative_depth();
        let ebn0 = sigma_to_ebn0(r.sigma_star, rate);
        let _ = writeln!(
            text,
            "tree {} = {}  lambda = {lambda}",
            idx + 1,
            tree.to_expression()
        );
        let _ = writeln!(
            text,
            "  sigma* = {:.5}  (Eb/N0* = {ebn0:.4} dB at design rate {rate}){}",
            r.sigma_star,
            if r.hit_upper_end {
                "  [entire interval converges]"
            } else {
                ""
            }
        );
        for p in &r.probes {
            let _ = writeln!(
                text,
                "    probe sigma {:.5}: {} after {} iterations",
                p.sigma,
                if p.achieved { "achieved" } else { "not achieved" },
                p.iterations_run
            );
        }
        let _ = writeln!(
            csv,
            "{},{},{lambda},{},{},{}",
            idx + 1,
            tree.to_expression(),
            r.sigma_star,
            ebn0,
            r.hit_upper_end
        );
    }
    if let Some(path) = csv_override.or_else(|| section.csv.clone()) {
        std::fs::write(&path, csv)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        let _ = writeln!(text, "wrote {}", path.display());
    }
    Ok(text)
}

fn load_graph(section: &SimulateSection) -> CliResult<TannerGraph> {
    match (&section.graph.alist, &section.graph.random) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok(parse_alist(&text)?)
        }
        (None, Some(r)) => Ok(generate_regular(r.n, r.dv, r.dc, r.seed)?),
        _ => Err(CliError::Config(
            "simulate.graph needs exactly one of `alist` or `random`".into(),
        )),
    }
}

fn load_decoder(section: &SimulateSection) -> CliResult<(SimDecoder, String, Option<f64>)> {
    let choice = &section.decoder;
    let picked = [
        choice.spec.is_some(),
        choice.minsum.is_some(),
        choice.minsum_fixed.is_some(),
    ]
    .iter()
    .filter(|&&x| x)
    .count();
    if picked != 1 {
        return Err(CliError::Config(
            "simulate.decoder needs exactly one of `spec`, `minsum`, `minsum_fixed`".into(),
        ));
    }
    if let Some(path) = &choice.spec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let spec = DecoderSpec::parse(&text)?;
        let label = format!("min-LUT {}", path.display());
        let rate = spec.rate;
        return Ok((SimDecoder::MinLut(spec), label, Some(rate)));
    }
    if let Some(kind) = &choice.minsum {
        if kind != "float" {
            return Err(CliError::Config(format!(
                "simulate.decoder.minsum must be \"float\", got {kind:?}"
            )));
        }
        return Ok((
            SimDecoder::MinsumFloat {
                max_iterations: section.max_iterations,
            },
            "min-sum float".into(),
            None,
        ));
    }
    let fx = choice.minsum_fixed.clone().unwrap();
    let label = format!("min-sum fixed Qmu={} QL={}", fx.q_mu, fx.q_llr);
    Ok((
        SimDecoder::MinsumFixed {
            q_mu: fx.q_mu,
            q_llr: fx.q_llr,
            step: fx.step,
            max_iterations: section.max_iterations,
        },
        label,
        None,
    ))
}

pub fn format_csv(points: &[PointResult], n: usize, emit_timing: bool) -> String {
    let mut csv =
        String::from("ebn0_db,frames,bit_errors,frame_errors,ber,fer,avg_iterations,elapsed_s\n");
    for p in points {
        let elapsed = if emit_timing {
            format!("{:.3}", p.elapsed_s)
        } else {
            "0.000".into()
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{elapsed}",
            p.ebn0_db,
            p.frames,
            p.bit_errors,
            p.frame_errors,
            p.ber(n),
            p.fer(),
            p.avg_iterations()
        );
    }
    csv
}

pub struct SimulateReport {
    pub points: Vec<PointResult>,
    pub csv_path: PathBuf,
    pub text: String,
}

pub fn cmd_simulate(
    cfg: &ConfigFile,
    output_override: Option<PathBuf>,
    workers_flag: Option<usize>,
) -> CliResult<SimulateReport> {
    let section = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no [simulate] section".into()))?;
    let graph = load_graph(section)?;
    let (decoder, label, spec_rate) = load_decoder(section)?;
    let rate = section
        .rate
        .or(spec_rate)
        .unwrap_or_else(|| graph.design_rate());
    let workers = crate::config::resolve_workers(workers_flag, section.workers);
    let sim_cfg = SimConfig {
        ebn0_db: section.ebn0_db.clone(),
        rate,
        max_frames: section.max_frames,
        min_frame_errors: section.min_frame_errors,
        master_seed: section.master_seed,
        workers,
    };
    let points = simulate(&graph, &decoder, &sim_cfg)?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "simulate: {label} on N = {}, M = {} graph, R = {rate}, seed {}",
        graph.n_vn(),
        graph.n_cn(),
        section.master_seed
    );
    for p in &points {
        let _ = writeln!(
            text,
            "  Eb/N0 {:>6} dB: fer {:.4e} ({} errors / {} frames), ber {:.4e}, \
             avg iterations {:.2} [{:.1}s]",
            p.ebn0_db,
            p.fer(),
            p.frame_errors,
            p.frames,
            p.ber(graph.n_vn()),
            p.avg_iterations(),
            p.elapsed_s
        );
    }
    let csv = format_csv(&points, graph.n_vn(), section.emit_timing);
    let csv_path = output_override.unwrap_or_else(|| section.output.clone());
    std::fs::write(&csv_path, csv)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    let _ = writeln!(text, "wrote {}", csv_path.display());
    Ok(SimulateReport {
        points,
        csv_path,
        text,
    })
}

pub fn cmd_inspect(spec_path: &Path) -> CliResult<String> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", spec_path.display())))?;
    let spec = DecoderSpec::parse(&text)?;
    let mut out = String::new();
    let tree = &spec.stages[0].tree;
    let _ = writeln!(out, "decoder spec {}", spec_path.display());
    let _ = writeln!(
        out,
        "  ensemble: ({}, {})-regular, R = {}",
        spec.dv, spec.dc, spec.rate
    );
    let _ = writeln!(
        out,
        "  design point: Eb/N0 = {} dB (sigma = {:.6})",
        spec.design_ebn0_db, spec.design_sigma
    );
    let _ = writeln!(
        out,
        "  vn tree: {}  (lambda = {})",
        tree.to_expression(),
        tree.cumulative_depth()
    );
    let _ = writeln!(
        out,
        "  decision tree: {}",
        spec.decision.tree.to_expression()
    );
    let _ = writeln!(out, "  llr levels: {}", spec.llr_levels);
    let _ = writeln!(
        out,
        "  alphabet schedule: {}",
        spec.alphabet_schedule
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    // reuse structure: iteration -> designing iteration
    let mut reuse: Vec<String> = Vec::new();
    let mut run_start = 1usize;
    for i in 1..=spec.iterations {
        let here = spec.stages[spec.stage_ref[i - 1]].designed_at;
        let next = if i < spec.iterations {
            Some(spec.stages[spec.stage_ref[i]].designed_at)
        } else {
            None
        };
        if next != Some(here) {
            if run_start == i {
                reuse.push(format!("{i}->{here}"));
            } else {
                reuse.push(format!("{run_start}..{i}->{here}"));
            }
            run_start = i + 1;
        }
    }
    let _ = writeln!(out, "  stage map (iteration -> designed at): {}", reuse.join(", "));
    let _ = writeln!(out, "  mi trace:");
    for (i, mi) in spec.mi_trace.iter().enumerate() {
        let _ = writeln!(out, "    iteration {:>3}: {mi:.8}", i + 1);
    }
    let _ = writeln!(
        out,
        "  llr quantizer boundaries: {}",
        join_floats(spec.quantizer.boundaries())
    );
    let _ = writeln!(
        out,
        "  llr reproducers: {}",
        join_floats(spec.quantizer.reproducers())
    );
    for stage in &spec.stages {
        let _ = writeln!(
            out,
            "  stage {:>3}: tree {}, reproducers {}",
            stage.designed_at,
            stage.tree.to_expression(),
            join_floats(&stage.output_reproducers)
        );
    }
    Ok(out)
}
