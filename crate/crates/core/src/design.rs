//! Discretized density evolution and per-iteration LUT stack design for
//! (d_v, d_c)-regular ensembles with label-domain min-sum CN updates and
//! designed LUT VN updates, plus noise-threshold bisection.
//!
//! Conventions:
//!
//! - `alphabet_schedule[i-1]` is the output alphabet of the stage designed at
//!   DE iteration `i`; the stage's message inputs come from the previous
//!   stage's output (iteration 1 reads the init-reduced channel messages).
//! - All distribution updates construct `p1` as the exact mirror of `p0`, so
//!   symmetry never drifts.

use crate::channel::{
    channel_pmf, design_llr_quantizer, fine_llr_density, reproducers_from_pmf, snr_to_sigma,
    LlrQuantizer, DEFAULT_FINE_CLIP, DEFAULT_FINE_GRID,
};
use crate::decoder::{cn_labels_minsum, MessageAlphabet};
use crate::decoder_spec::{DecoderSpec, StageLuts};
use crate::error::{Error, Result};
use crate::pmf::ConditionalPmf;
use crate::quant::{apply_lut, optimal_symmetric_quantizer, sort_by_llr_symmetric, Lut};
use crate::trees::{LutTree, TreeRole};

/// Placement policy for the channel LLR leaf across iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlrPolicy {
    /// Keep the tree as configured.
    FixedAtRoot,
    /// Once the CN-to-VN message information passes the channel information,
    /// swap the LLR leaf one level deeper at the next design point.
    SwitchAtCrossover,
}

/// Everything that parameterizes a density-evolution design run.
#[derive(Debug, Clone)]
pub struct DesignParams {
    pub dv: usize,
    pub dc: usize,
    /// Maximum iterations I.
    pub iterations: usize,
    /// Iterations that design fresh tables (sorted, unique, contains 1).
    pub design_set: Vec<usize>,
    /// Stage output alphabet per iteration, non-increasing, all even.
    pub alphabet_schedule: Vec<usize>,
    pub tree: LutTree,
    pub llr_policy: LlrPolicy,
    pub llr_levels: usize,
    /// Convergence gap: achieved when I(m; x) > 1 - epsilon.
    pub epsilon: f64,
    pub fine_grid: usize,
    pub fine_clip: f64,
}

impl DesignParams {
    /// Constant-alphabet params with a full design set and library defaults.
    pub fn regular(
        dv: usize,
        dc: usize,
        iterations: usize,
        msg_levels: usize,
        llr_levels: usize,
        tree: LutTree,
    ) -> Self {
        DesignParams {
            dv,
            dc,
            iterations,
            design_set: (1..=iterations).collect(),
            alphabet_schedule: vec![msg_levels; iterations],
            tree,
            llr_policy: LlrPolicy::FixedAtRoot,
            llr_levels,
            epsilon: 1e-4,
            fine_grid: DEFAULT_FINE_GRID,
            fine_clip: DEFAULT_FINE_CLIP,
        }
    }

    /// Message alphabet feeding the stage of iteration `i` (1-based).
    fn stage_input(&self, i: usize) -> usize {
        if i <= 1 {
            self.alphabet_schedule[0]
        } else {
            self.alphabet_schedule[i - 2]
        }
    }

    pub fn validate(&self) -> Result<()> {
        let inv = |m: String| Err(Error::InvalidArgument(m));
        if self.dv < 2 || self.dc < 2 {
            return inv(format!("degrees must be at least 2, got ({}, {})", self.dv, self.dc));
        }
        if self.iterations == 0 {
            return inv("need at least one iteration".into());
        }
        if self.alphabet_schedule.len() != self.iterations {
            return inv("alphabet schedule length must equal iterations".into());
        }
        if self.alphabet_schedule.iter().any(|&m| m < 2 || m % 2 != 0) {
            return inv("alphabet sizes must be even and at least 2".into());
        }
        if !self.alphabet_schedule.windows(2).all(|w| w[1] <= w[0]) {
            return inv("alphabet schedule must be non-increasing".into());
        }
        if self.llr_levels < 2 || self.llr_levels % 2 != 0 {
            return inv("llr_levels must be even and at least 2".into());
        }
        if self.alphabet_schedule[0] > self.llr_levels {
            return inv("first message alphabet cannot exceed the LLR alphabet".into());
        }
        if self.design_set.first() != Some(&1) {
            return inv("the first iteration always designs fresh tables (1 must be in the design set)".into());
        }
        if !self.design_set.windows(2).all(|w| w[0] < w[1])
            || *self.design_set.last().unwrap() > self.iterations
        {
            return inv("design set must be sorted, unique, within 1..=iterations".into());
        }
        for i in 1..=self.iterations {
            let designed_here = self.design_set.binary_search(&i).is_ok();
            if !designed_here {
                if self.alphabet_schedule[i - 1] != self.alphabet_schedule[i - 2] {
                    return inv(format!(
                        "reducing the message resolution at iteration {i} prevents reuse; \
                         add {i} to the design set"
                    ));
                }
                // the referenced stage must type-check against the evolved alphabets
                let j = *self.design_set.iter().rev().find(|&&j| j <= i).unwrap();
                if self.stage_input(j) != self.stage_input(i)
                    || self.alphabet_schedule[j - 1] != self.alphabet_schedule[i - 1]
                {
                    return inv(format!(
                        "iteration {i} reuses the stage of iteration {j}, whose alphabets \
                         ({} -> {}) do not match ({} -> {}); a stage that downsizes cannot \
                         be reused at the following iteration",
                        self.stage_input(j),
                        self.alphabet_schedule[j - 1],
                        self.stage_input(i),
                        self.alphabet_schedule[i - 1]
                    ));
                }
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return inv("epsilon must be in (0, 1]".into());
        }
        let violations = self.tree.validate_for_degree(self.dv, TreeRole::VnUpdate);
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return inv(format!("tree does not fit d_v = {}: {}", self.dv, msgs.join("; ")));
        }
        Ok(())
    }
}

/// Distribution of the label-domain min-sum combination of two independent
/// messages attached to bits whose XOR is the conditioning bit.
pub fn cn_pair_combine(a: &ConditionalPmf, b: &ConditionalPmf) -> Result<ConditionalPmf> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "alphabet mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let m = a.len();
    let alpha = MessageAlphabet::new(m)?;
    let mut out0 = vec![0.0; m];
    for m1 in 0..m {
        let a0 = a.p0()[m1];
        let a1 = a.p1()[m1];
        for m2 in 0..m {
            let out = cn_labels_minsum(&alpha, &[m1, m2]);
            out0[out] += 0.5 * (a0 * b.p0()[m2] + a1 * b.p1()[m2]);
        }
    }
    // p1 is the exact mirror (the op commutes with global negation)
    ConditionalPmf::symmetric_from_p0(out0)
}

/// Distribution of the outgoing CN-to-VN message for CN degree `dc`: the
/// pairwise combination folded over the `dc - 1` iid incoming messages.
pub fn cn_update_distribution(msg: &ConditionalPmf, dc: usize) -> Result<ConditionalPmf> {
    if dc < 2 {
        return Err(Error::InvalidArgument("dc must be at least 2".into()));
    }
    let mut acc = msg.clone();
    for _ in 0..dc - 2 {
        acc = cn_pair_combine(&acc, msg)?;
    }
    Ok(acc)
}

/// Result of designing (or re-applying) one VN stage.
#[derive(Debug, Clone)]
pub struct VnStageDesign {
    /// Tables in postorder over the tree's internal nodes.
    pub node_luts: Vec<Lut>,
    /// Root output distribution.
    pub output: ConditionalPmf,
    pub output_mi: f64,
    /// Some node could not fill its requested output alphabet.
    pub degenerate: bool,
}

/// Greedy bottom-up stage design: every internal node gets the
/// MI-optimal symmetric quantizer of its children's joint distribution.
/// `node_out_sizes` is indexed in postorder; the last entry is the root.
pub fn design_vn_stage(
    tree: &LutTree,
    p_llr: &ConditionalPmf,
    p_msg: &ConditionalPmf,
    node_out_sizes: &[usize],
) -> Result<VnStageDesign> {
    if node_out_sizes.len() != tree.internal_count() {
        return Err(Error::InvalidArgument(format!(
            "need {} node output sizes, got {}",
            tree.internal_count(),
            node_out_sizes.len()
        )));
    }
    let mut ctx = DesignCtx {
        p_llr,
        p_msg,
        sizes: node_out_sizes,
        node_pos: 0,
        luts: Vec::with_capacity(node_out_sizes.len()),
        degenerate: false,
    };
    let output = design_node(tree, &mut ctx)?;
    let output_mi = output.mutual_information();
    Ok(VnStageDesign {
        node_luts: ctx.luts,
        output,
        output_mi,
        degenerate: ctx.degenerate,
    })
}

struct DesignCtx<'a> {
    p_llr: &'a ConditionalPmf,
    p_msg: &'a ConditionalPmf,
    sizes: &'a [usize],
    node_pos: usize,
    luts: Vec<Lut>,
    degenerate: bool,
}

fn design_node(tree: &LutTree, ctx: &mut DesignCtx<'_>) -> Result<ConditionalPmf> {
    match tree {
        LutTree::MsgLeaf => Ok(ctx.p_msg.clone()),
        LutTree::LlrLeaf => Ok(ctx.p_llr.clone()),
        LutTree::Node(children) => {
            let parts: Vec<ConditionalPmf> = children
                .iter()
                .map(|c| design_node(c, ctx))
                .collect::<Result<_>>()?;
            let joint = joint_product(&parts)?;
            let want = ctx.sizes[ctx.node_pos];
            ctx.node_pos += 1;
            let (perm, sorted) = sort_by_llr_symmetric(&joint)?;
            let (sorted_lut, out, _) = optimal_symmetric_quantizer(&sorted, want)?;
            if sorted_lut.is_degenerate() {
                ctx.degenerate = true;
            }
            // compose raw joint index -> sorted position -> cluster
            let n = joint.len();
            let mut inv = vec![0usize; n];
            for (pos, &orig) in perm.iter().enumerate() {
                inv[orig] = pos;
            }
            let map: Vec<u16> = (0..n).map(|a| sorted_lut.map()[inv[a]]).collect();
            let mut lut = Lut::new(n, sorted_lut.output_size(), map)?.with_symmetric_flag(true);
            lut.set_degenerate(sorted_lut.is_degenerate());
            debug_assert!(lut.check_symmetry());
            ctx.luts.push(lut);
            Ok(out)
        }
    }
}

/// Conditionally-iid product of child distributions, first child most
/// significant in the joint index. Symmetric inputs give an exactly
/// symmetric joint (digit-wise mirror equals joint-index mirror).
fn joint_product(parts: &[ConditionalPmf]) -> Result<ConditionalPmf> {
    let mut p0 = vec![1.0f64];
    for part in parts {
        if !part.is_symmetric() {
            return Err(Error::InvalidArgument(
                "joint construction requires symmetric child distributions".into(),
            ));
        }
        let mut next = Vec::with_capacity(p0.len() * part.len());
        for &acc in &p0 {
            for &q in part.p0() {
                next.push(acc * q);
            }
        }
        p0 = next;
    }
    ConditionalPmf::symmetric_from_p0(p0)
}

/// Re-applies an existing stage's tables to evolved distributions (LUT
/// reuse: the maps freeze, the distributions keep evolving).
pub fn apply_vn_stage(
    stage: &StageLuts,
    p_llr: &ConditionalPmf,
    p_msg: &ConditionalPmf,
) -> Result<ConditionalPmf> {
    let mut pos = 0usize;
    apply_node(&stage.tree, &stage.node_luts, &mut pos, p_llr, p_msg)
}

fn apply_node(
    tree: &LutTree,
    luts: &[Lut],
    pos: &mut usize,
    p_llr: &ConditionalPmf,
    p_msg: &ConditionalPmf,
) -> Result<ConditionalPmf> {
    match tree {
        LutTree::MsgLeaf => Ok(p_msg.clone()),
        LutTree::LlrLeaf => Ok(p_llr.clone()),
        LutTree::Node(children) => {
            let parts: Vec<ConditionalPmf> = children
                .iter()
                .map(|c| apply_node(c, luts, pos, p_llr, p_msg))
                .collect::<Result<_>>()?;
            let joint = joint_product(&parts)?;
            let lut = luts.get(*pos).ok_or_else(|| {
                Error::CorruptSpec("fewer tables than internal nodes".into())
            })?;
            *pos += 1;
            apply_lut(&joint, lut)
        }
    }
}

/// Designs the two-output decision stack over a decision tree (`d_v`
/// message leaves plus the LLR). Output label 1 means decided bit 1, so the
/// root's labels are flipped relative to ascending-LLR order.
pub fn design_decision_lut(
    decision_tree: &LutTree,
    p_llr: &ConditionalPmf,
    p_msg: &ConditionalPmf,
    inner_size: usize,
) -> Result<VnStageDesign> {
    let n = decision_tree.internal_count();
    if n == 0 {
        return Err(Error::InvalidArgument("decision tree has no internal node".into()));
    }
    let mut sizes = vec![inner_size; n];
    sizes[n - 1] = 2;
    let mut d = design_vn_stage(decision_tree, p_llr, p_msg, &sizes)?;
    // flip the root so that label 1 = bit 1 (the lower-LLR half)
    let root = d.node_luts.last_mut().unwrap();
    let flipped: Vec<u16> = root.map().iter().map(|&v| 1 - v).collect();
    *root = Lut::new(root.input_size(), 2, flipped)?.with_symmetric_flag(true);
    let p0 = vec![d.output.p0()[1], d.output.p0()[0]];
    d.output = ConditionalPmf::symmetric_from_p0(p0)?;
    Ok(d)
}

/// Everything a density-evolution run produces.
#[derive(Debug, Clone)]
pub struct DeOutcome {
    pub sigma: f64,
    /// I(m; x) after each executed iteration.
    pub mi_trace: Vec<f64>,
    /// I(L; x) of the quantized channel.
    pub llr_mi: f64,
    pub achieved: bool,
    /// First iteration with I(m; x) > 1 - epsilon.
    pub achieved_at: Option<usize>,
    pub quantizer: LlrQuantizer,
    pub init_lut: Lut,
    pub stages: Vec<StageLuts>,
    /// Per executed iteration: index into `stages`.
    pub stage_ref: Vec<usize>,
    pub decision: StageLuts,
    /// Stage output distribution per executed iteration.
    pub pmf_trace: Vec<ConditionalPmf>,
    pub degenerate: bool,
    /// First iteration where CN-output information passed the channel's.
    pub crossover_at: Option<usize>,
}

impl DeOutcome {
    pub fn iterations_run(&self) -> usize {
        self.mi_trace.len()
    }
}

/// Runs discretized density evolution at noise level `sigma`.
///
/// Per iteration: CN distribution update, then either a fresh stage design
/// (iterations in the design set) or re-application of the latest stage's
/// tables. With `stop_early` the loop breaks once I(m; x) > 1 - epsilon;
/// decoder emission uses `stop_early = false` so all stages materialize.
pub fn run_de(sigma: f64, params: &DesignParams, stop_early: bool) -> Result<DeOutcome> {
    params.validate()?;
    let fine = fine_llr_density(sigma, params.fine_grid, params.fine_clip)?;
    let quantizer = design_llr_quantizer(&fine, params.llr_levels)?;
    let p_llr = channel_pmf(&quantizer, sigma)?;
    let llr_mi = p_llr.mutual_information();

    let (init_lut, mut p_msg, _) =
        optimal_symmetric_quantizer(&p_llr, params.alphabet_schedule[0])?;

    let mut stages: Vec<StageLuts> = Vec::new();
    let mut stage_ref = Vec::with_capacity(params.iterations);
    let mut mi_trace = Vec::with_capacity(params.iterations);
    let mut pmf_trace = Vec::with_capacity(params.iterations);
    let mut current_tree = params.tree.clone();
    let mut switched = false;
    let mut crossover_at = None;
    let mut achieved = false;
    let mut achieved_at = None;
    let mut degenerate = false;
    let mut last_cn: Option<ConditionalPmf> = None;

    for i in 1..=params.iterations {
        let p_cn = cn_update_distribution(&p_msg, params.dc)?;
        if crossover_at.is_none() && p_cn.mutual_information() >= llr_mi {
            crossover_at = Some(i);
        }
        let out_size = params.alphabet_schedule[i - 1];
        let mut p_next = if params.design_set.binary_search(&i).is_ok() {
            if params.llr_policy == LlrPolicy::SwitchAtCrossover
                && !switched
                && crossover_at.is_some()
            {
                if let Some(t) = current_tree.push_llr_deeper() {
                    current_tree = t;
                }
                switched = true;
            }
            let sizes = vec![out_size; current_tree.internal_count()];
            let d = design_vn_stage(&current_tree, &p_llr, &p_cn, &sizes)?;
            degenerate |= d.degenerate;
            stages.push(StageLuts {
                designed_at: i,
                tree: current_tree.clone(),
                msg_in: p_cn.len(),
                node_luts: d.node_luts,
                output_reproducers: reproducers_from_pmf(&d.output),
            });
            d.output
        } else {
            let stage = stages.last().expect("design set contains 1");
            if stage.msg_in != p_cn.len() {
                return Err(Error::InvalidArgument(format!(
                    "iteration {i}: reused stage expects {}-ary messages, evolved \
                     distribution has {}",
                    stage.msg_in,
                    p_cn.len()
                )));
            }
            apply_vn_stage(stage, &p_llr, &p_cn)?
        };
        stage_ref.push(stages.len() - 1);
        let drift = p_next.mass_drift();
        if drift > 1e-10 {
            return Err(Error::NumericalDrift {
                iteration: i,
                detail: format!("probability mass drifted by {drift}"),
            });
        }
        p_next.renormalize();
        let mi = p_next.mutual_information();
        mi_trace.push(mi);
        pmf_trace.push(p_next.clone());
        p_msg = p_next;
        last_cn = Some(p_cn);
        if mi > 1.0 - params.epsilon {
            achieved = true;
            if achieved_at.is_none() {
                achieved_at = Some(i);
            }
            if stop_early {
                break;
            }
        }
    }

    let p_cn = last_cn.expect("at least one iteration ran");
    let decision_tree = current_tree.decision_tree();
    let dd = design_decision_lut(&decision_tree, &p_llr, &p_cn, p_cn.len())?;
    let decision = StageLuts {
        designed_at: 0, // not a DE iteration; the decision is designed last
        tree: decision_tree,
        msg_in: p_cn.len(),
        node_luts: dd.node_luts,
        output_reproducers: Vec::new(),
    };

    Ok(DeOutcome {
        sigma,
        mi_trace,
        llr_mi,
        achieved,
        achieved_at,
        quantizer,
        init_lut,
        stages,
        stage_ref,
        decision,
        pmf_trace,
        degenerate,
        crossover_at,
    })
}

/// One bisection probe.
#[derive(Debug, Clone, Copy)]
pub struct ProbeRecord {
    pub sigma: f64,
    pub achieved: bool,
    pub iterations_run: usize,
}

/// Result of the noise-threshold search.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    /// Largest verified achieving noise level.
    pub sigma_star: f64,
    /// The whole interval converged; `sigma_star` is the interval's top.
    pub hit_upper_end: bool,
    pub probes: Vec<ProbeRecord>,
    /// Outcome of the last achieving run (the returned LUT sequence).
    pub best: DeOutcome,
}

/// Bisection for the noise threshold: halve `[sigma_min, sigma_max]` until
/// its width is below `delta_sigma`, probing the midpoint with a full DE
/// run. A degenerate interval (width already below `delta_sigma`) probes
/// the midpoint once and returns it.
pub fn find_threshold(
    params: &DesignParams,
    sigma_min: f64,
    sigma_max: f64,
    delta_sigma: f64,
) -> Result<ThresholdResult> {
    params.validate()?;
    if !(sigma_min > 0.0 && sigma_max > sigma_min && delta_sigma > 0.0) {
        return Err(Error::InvalidArgument(
            "need 0 < sigma_min < sigma_max and delta_sigma > 0".into(),
        ));
    }
    let mut probes = Vec::new();
    let probe = |sigma: f64, probes: &mut Vec<ProbeRecord>| -> Result<DeOutcome> {
        let out = run_de(sigma, params, true)?;
        probes.push(ProbeRecord {
            sigma,
            achieved: out.achieved,
            iterations_run: out.iterations_run(),
        });
        Ok(out)
    };

    if sigma_max - sigma_min <= delta_sigma {
        let mid = 0.5 * (sigma_min + sigma_max);
        let best = probe(mid, &mut probes)?;
        return Ok(ThresholdResult {
            sigma_star: mid,
            hit_upper_end: false,
            probes,
            best,
        });
    }

    let low = probe(sigma_min, &mut probes)?;
    if !low.achieved {
        return Err(Error::IntervalTooHigh { sigma_min });
    }
    let high = probe(sigma_max, &mut probes)?;
    if high.achieved {
        return Ok(ThresholdResult {
            sigma_star: sigma_max,
            hit_upper_end: true,
            probes,
            best: high,
        });
    }

    let mut lo = sigma_min;
    let mut hi = sigma_max;
    let mut best = low;
    while hi - lo > delta_sigma {
        let mid = 0.5 * (lo + hi);
        let out = probe(mid, &mut probes)?;
        if out.achieved {
            lo = mid;
            best = out;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        sigma_star: lo,
        hit_upper_end: false,
        probes,
        best,
    })
}

/// Designs a complete decoder for operation at `gamma_db` (Eb/N0) and code
/// rate `rate`: runs DE at the corresponding noise level for exactly I
/// iterations (no early break) and assembles the emitted spec.
pub fn design_decoder(gamma_db: f64, rate: f64, params: &DesignParams) -> Result<DecoderSpec> {
    let sigma = snr_to_sigma(gamma_db, rate)?;
    let outcome = run_de(sigma, params, false)?;
    let spec = spec_from_outcome(params, outcome, gamma_db, rate);
    spec.validate()?;
    Ok(spec)
}

/// Assembles a decoder spec from a DE outcome (used by the designer and by
/// threshold searches that keep their achieving LUT sequence).
pub fn spec_from_outcome(
    params: &DesignParams,
    outcome: DeOutcome,
    gamma_db: f64,
    rate: f64,
) -> DecoderSpec {
    let emitted = outcome.iterations_run();
    DecoderSpec {
        dv: params.dv,
        dc: params.dc,
        llr_levels: params.llr_levels,
        iterations: emitted,
        design_set: params
            .design_set
            .iter()
            .copied()
            .filter(|&j| j <= emitted)
            .collect(),
        alphabet_schedule: params.alphabet_schedule[..emitted].to_vec(),
        design_sigma: outcome.sigma,
        design_ebn0_db: gamma_db,
        rate,
        quantizer: outcome.quantizer,
        init_lut: outcome.init_lut,
        stages: outcome.stages,
        stage_ref: outcome.stage_ref,
        decision: outcome.decision,
        mi_trace: outcome.mi_trace,
    }
}
