//! The designed decoder artifact: per-iteration LUT stacks plus metadata,
//! with a versioned textual serialization.
//!
//! File layout (all integers decimal, floats in shortest round-trip form):
//!
//! ```text
//! minlut decoder spec v1
//! dv 6
//! dc 32
//! llr_levels 8
//! iterations 8
//! design_iterations 1 5
//! alphabet_schedule 8 8 8 8 8 8 8 8
//! vn_tree ((mu mu) (mu mu) mu L)
//! design_sigma 0.494963...
//! design_ebn0_db 4
//! rate 0.8125
//! llr_boundaries <num_levels-1 floats>
//! llr_reproducers <num_levels floats>
//! mi_trace <one float per emitted iteration>
//! init_lut in=8 out=8
//! <map values, wrapped>
//! stage 1
//! tree ((mu mu) (mu mu) mu L)
//! msg_in 8
//! reproducers <floats>
//! node 0 in=64 out=8
//! <map values in mixed radix over the node's children, first child most
//!  significant, wrapped at 32 per line>
//! ...
//! stage 5
//! ...
//! decision
//! tree ((mu mu) (mu mu) mu mu L)
//! msg_in 8
//! node 0 in=64 out=8
//! ...
//! end
//! ```
//!
//! Node tables appear in bottom-up (postorder) tree order; the decision
//! block comes last, its root table having two outputs (label 1 = bit 1).

use crate::channel::LlrQuantizer;
use crate::error::{Error, Result};
use crate::quant::Lut;
use crate::trees::LutTree;

/// One designed LUT stack: the tables of a tree's internal nodes in
/// postorder, plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StageLuts {
    /// 1-based density-evolution iteration the stack was designed at.
    pub designed_at: usize,
    pub tree: LutTree,
    /// Input message alphabet size of the stage's message leaves.
    pub msg_in: usize,
    /// Tables in postorder; the last one is the root.
    pub node_luts: Vec<Lut>,
    /// Reproducer values of the stage's output alphabet (diagnostics).
    pub output_reproducers: Vec<f64>,
}

impl StageLuts {
    pub fn root(&self) -> &Lut {
        self.node_luts.last().expect("stage has at least the root table")
    }

    pub fn output_size(&self) -> usize {
        self.root().output_size()
    }
}

/// Evaluates a stage's tree bottom-up on concrete labels. Message leaves
/// take `msgs` left to right; node tables are indexed in mixed radix over
/// their children, first child most significant.
pub fn eval_stage(
    stage: &StageLuts,
    llr_levels: usize,
    llr_label: usize,
    msgs: &[usize],
) -> Result<usize> {
    if llr_label >= llr_levels {
        return Err(Error::CorruptSpec(format!(
            "llr label {llr_label} outside alphabet of {llr_levels}"
        )));
    }
    for &m in msgs {
        if m >= stage.msg_in {
            return Err(Error::CorruptSpec(format!(
                "message label {m} outside alphabet of {}",
                stage.msg_in
            )));
        }
    }
    let mut msg_pos = 0usize;
    let mut node_pos = 0usize;
    let (label, _) = eval_node(
        &stage.tree,
        stage,
        llr_levels,
        llr_label,
        msgs,
        &mut msg_pos,
        &mut node_pos,
    )?;
    if msg_pos != msgs.len() {
        return Err(Error::CorruptSpec(format!(
            "stage consumes {msg_pos} messages, {} provided",
            msgs.len()
        )));
    }
    Ok(label)
}

fn eval_node(
    tree: &LutTree,
    stage: &StageLuts,
    llr_levels: usize,
    llr_label: usize,
    msgs: &[usize],
    msg_pos: &mut usize,
    node_pos: &mut usize,
) -> Result<(usize, usize)> {
    match tree {
        LutTree::MsgLeaf => {
            let l = *msgs.get(*msg_pos).ok_or_else(|| {
                Error::CorruptSpec("too few message labels for the tree".into())
            })?;
            *msg_pos += 1;
            Ok((l, stage.msg_in))
        }
        LutTree::LlrLeaf => Ok((llr_label, llr_levels)),
        LutTree::Node(children) => {
            let mut idx = 0usize;
            let mut joint = 1usize;
            for c in children {
                let (l, sz) = eval_node(c, stage, llr_levels, llr_label, msgs, msg_pos, node_pos)?;
                idx = idx * sz + l;
                joint *= sz;
            }
            let lut = stage.node_luts.get(*node_pos).ok_or_else(|| {
                Error::CorruptSpec("fewer node tables than internal tree nodes".into())
            })?;
            *node_pos += 1;
            if lut.input_size() != joint {
                return Err(Error::CorruptSpec(format!(
                    "node table input size {} does not match joint size {joint}",
                    lut.input_size()
                )));
            }
            Ok((lut.map()[idx] as usize, lut.output_size()))
        }
    }
}

/// A complete designed decoder: channel quantizer, initial channel-to-message
/// table, per-iteration VN stages with the reuse pattern, and the decision
/// stack, plus design provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderSpec {
    pub dv: usize,
    pub dc: usize,
    pub llr_levels: usize,
    /// Number of decoder iterations the stacks were emitted for.
    pub iterations: usize,
    /// Iterations with freshly designed tables (sorted, 1-based, contains 1).
    pub design_set: Vec<usize>,
    /// Output alphabet of the stage at each iteration (non-increasing).
    pub alphabet_schedule: Vec<usize>,
    pub design_sigma: f64,
    pub design_ebn0_db: f64,
    pub rate: f64,
    pub quantizer: LlrQuantizer,
    /// Channel label to first-iteration message label.
    pub init_lut: Lut,
    /// Distinct stages in design order.
    pub stages: Vec<StageLuts>,
    /// Per DE iteration (1-based index - 1): index into `stages`.
    pub stage_ref: Vec<usize>,
    /// Decision stack; root has two outputs, label 1 meaning bit 1.
    pub decision: StageLuts,
    /// Mutual information after each emitted iteration.
    pub mi_trace: Vec<f64>,
}

impl DecoderSpec {
    /// Message alphabet on the wire at decoder iteration `i` (1-based).
    pub fn msg_alphabet_at(&self, i: usize) -> usize {
        if i <= 1 {
            self.init_lut.output_size()
        } else {
            self.stages[self.stage_ref[i - 2]].output_size()
        }
    }

    /// Stage evaluated by the VN update of decoder iteration `i >= 2`.
    pub fn vn_stage_at(&self, i: usize) -> Result<&StageLuts> {
        if i < 2 || i > self.iterations {
            return Err(Error::InvalidArgument(format!(
                "VN stages exist for iterations 2..={}, asked for {i}",
                self.iterations
            )));
        }
        Ok(&self.stages[self.stage_ref[i - 2]])
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::CorruptSpec(m));
        if self.iterations == 0 || self.alphabet_schedule.len() != self.iterations {
            return fail("alphabet schedule length must equal iterations".into());
        }
        if self.stage_ref.len() != self.iterations {
            return fail("stage_ref length must equal iterations".into());
        }
        if self.mi_trace.len() != self.iterations {
            return fail("mi trace length must equal iterations".into());
        }
        if self.design_set.first() != Some(&1) {
            return fail("design set must contain iteration 1".into());
        }
        if !self.design_set.windows(2).all(|w| w[0] < w[1])
            || *self.design_set.last().unwrap() > self.iterations
        {
            return fail("design set must be sorted, unique and within 1..=iterations".into());
        }
        if self.design_set.len() != self.stages.len() {
            return fail("one stage per design iteration required".into());
        }
        if !self.alphabet_schedule.windows(2).all(|w| w[1] <= w[0]) {
            return fail("alphabet schedule must be non-increasing".into());
        }
        self.quantizer.validate()?;
        if self.quantizer.num_levels() != self.llr_levels {
            return fail("quantizer level count must equal llr_levels".into());
        }
        if self.init_lut.input_size() != self.llr_levels
            || self.init_lut.output_size() != self.alphabet_schedule[0]
        {
            return fail("init lut must map llr_levels onto the first alphabet".into());
        }
        if !self.init_lut.check_symmetry() {
            return fail("init lut violates label-domain symmetry".into());
        }
        for (k, stage) in self.stages.iter().enumerate() {
            if stage.designed_at != self.design_set[k] {
                return fail(format!("stage {k} designed_at disagrees with the design set"));
            }
            self.check_stage(stage, self.alphabet_schedule[stage.designed_at - 1])?;
            if stage.output_reproducers.len() != stage.output_size() {
                return fail("stage reproducer count must match its output alphabet".into());
            }
        }
        for (i0, &r) in self.stage_ref.iter().enumerate() {
            let i = i0 + 1;
            let expect = self
                .design_set
                .iter()
                .rev()
                .find(|&&j| j <= i)
                .copied()
                .unwrap();
            if self.stages[r].designed_at != expect {
                return fail(format!("iteration {i} must reference the stage of iteration {expect}"));
            }
            // alphabets must type-check where the stage is reused
            let msg_in = self.msg_alphabet_at(i);
            if self.stages[r].msg_in != msg_in {
                return fail(format!(
                    "iteration {i}: stage input alphabet {} vs evolved alphabet {msg_in}",
                    self.stages[r].msg_in
                ));
            }
            if self.stages[r].output_size() != self.alphabet_schedule[i0] {
                return fail(format!(
                    "iteration {i}: stage output {} vs scheduled {}",
                    self.stages[r].output_size(),
                    self.alphabet_schedule[i0]
                ));
            }
        }
        // decision: d_v message leaves over the final wire alphabet, 2 outputs
        self.check_stage(&self.decision, 2)?;
        if self.decision.tree.msg_leaves() != self.dv {
            return fail("decision tree must have d_v message leaves".into());
        }
        if self.decision.msg_in != self.msg_alphabet_at(self.iterations) {
            return fail("decision input alphabet must match the final iteration".into());
        }
        for stage in &self.stages {
            if stage.tree.msg_leaves() != self.dv - 1 || stage.tree.llr_leaves() != 1 {
                return fail("stage tree arity does not match d_v".into());
            }
        }
        Ok(())
    }

    /// Structural check of one stage's tables against its tree.
    fn check_stage(&self, stage: &StageLuts, root_out: usize) -> Result<()> {
        if stage.node_luts.len() != stage.tree.internal_count() {
            return Err(Error::CorruptSpec(
                "node table count must match internal tree nodes".into(),
            ));
        }
        let mut node_pos = 0usize;
        let size = check_node(&stage.tree, stage, self.llr_levels, &mut node_pos)?;
        let _ = size;
        if stage.output_size() != root_out {
            return Err(Error::CorruptSpec(format!(
                "root output {} does not match expected {root_out}",
                stage.output_size()
            )));
        }
        for lut in &stage.node_luts {
            if !lut.check_symmetry() {
                return Err(Error::CorruptSpec(
                    "stored table violates label-domain symmetry".into(),
                ));
            }
        }
        Ok(())
    }

    /// Serializes to the versioned text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("minlut decoder spec v1\n");
        s.push_str(&format!("dv {}\n", self.dv));
        s.push_str(&format!("dc {}\n", self.dc));
        s.push_str(&format!("llr_levels {}\n", self.llr_levels));
        s.push_str(&format!("iterations {}\n", self.iterations));
        s.push_str(&format!("design_iterations {}\n", join_usize(&self.design_set)));
        s.push_str(&format!(
            "alphabet_schedule {}\n",
            join_usize(&self.alphabet_schedule)
        ));
        s.push_str(&format!("vn_tree {}\n", self.stages[0].tree.to_expression()));
        s.push_str(&format!("design_sigma {}\n", self.design_sigma));
        s.push_str(&format!("design_ebn0_db {}\n", self.design_ebn0_db));
        s.push_str(&format!("rate {}\n", self.rate));
        s.push_str(&format!(
            "llr_boundaries {}\n",
            join_f64(self.quantizer.boundaries())
        ));
        s.push_str(&format!(
            "llr_reproducers {}\n",
            join_f64(self.quantizer.reproducers())
        ));
        s.push_str(&format!("mi_trace {}\n", join_f64(&self.mi_trace)));
        s.push_str(&format!(
            "init_lut in={} out={}\n",
            self.init_lut.input_size(),
            self.init_lut.output_size()
        ));
        push_map(&mut s, self.init_lut.map());
        for stage in &self.stages {
            s.push_str(&format!("stage {}\n", stage.designed_at));
            push_stage_body(&mut s, stage, true);
        }
        s.push_str("decision\n");
        push_stage_body(&mut s, &self.decision, false);
        s.push_str("end\n");
        s
    }

    /// Parses the text format; inverse of [`DecoderSpec::to_text`].
    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).parse()
    }
}

fn check_node(
    tree: &LutTree,
    stage: &StageLuts,
    llr_levels: usize,
    node_pos: &mut usize,
) -> Result<usize> {
    match tree {
        LutTree::MsgLeaf => Ok(stage.msg_in),
        LutTree::LlrLeaf => Ok(llr_levels),
        LutTree::Node(children) => {
            let mut joint = 1usize;
            for c in children {
                joint *= check_node(c, stage, llr_levels, node_pos)?;
            }
            let lut = stage
                .node_luts
                .get(*node_pos)
                .ok_or_else(|| Error::CorruptSpec("missing node table".into()))?;
            *node_pos += 1;
            if lut.input_size() != joint {
                return Err(Error::CorruptSpec(format!(
                    "node table input {} does not match joint size {joint}",
                    lut.input_size()
                )));
            }
            Ok(lut.output_size())
        }
    }
}

fn join_usize(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn push_map(s: &mut String, map: &[u16]) {
    for chunk in map.chunks(32) {
        let row: Vec<String> = chunk.iter().map(|x| x.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
}

fn push_stage_body(s: &mut String, stage: &StageLuts, with_reproducers: bool) {
    s.push_str(&format!("tree {}\n", stage.tree.to_expression()));
    s.push_str(&format!("msg_in {}\n", stage.msg_in));
    if with_reproducers {
        s.push_str(&format!(
            "reproducers {}\n",
            join_f64(&stage.output_reproducers)
        ));
    }
    for (i, lut) in stage.node_luts.iter().enumerate() {
        s.push_str(&format!(
            "node {i} in={} out={}\n",
            lut.input_size(),
            lut.output_size()
        ));
        push_map(s, lut.map());
    }
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    at: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Parser { lines, at: 0 }
    }

    fn err<T>(&self, line: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::SpecFormat {
            line,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.at).copied()
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        let r = self.peek();
        self.at += 1;
        r.ok_or(Error::SpecFormat {
            line: 0,
            message: "unexpected end of file".into(),
        })
    }

    fn keyword_line(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (ln, line) = self.next_line()?;
        match line.strip_prefix(key) {
            Some(rest) if rest.is_empty() || rest.starts_with(' ') => Ok((ln, rest.trim())),
            _ => self.err(ln, format!("expected '{key}', found {line:?}")),
        }
    }

    fn parse_usize_list(&self, ln: usize, s: &str) -> Result<Vec<usize>> {
        s.split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::SpecFormat {
                        line: ln,
                        message: format!("expected integer, found {t:?}"),
                    })
            })
            .collect()
    }

    fn parse_f64_list(&self, ln: usize, s: &str) -> Result<Vec<f64>> {
        s.split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::SpecFormat {
                    line: ln,
                    message: format!("expected float, found {t:?}"),
                })
            })
            .collect()
    }

    fn scalar_usize(&mut self, key: &str) -> Result<usize> {
        let (ln, rest) = self.keyword_line(key)?;
        let v = self.parse_usize_list(ln, rest)?;
        if v.len() != 1 {
            return self.err(ln, format!("expected one value for {key}"));
        }
        Ok(v[0])
    }

    fn scalar_f64(&mut self, key: &str) -> Result<f64> {
        let (ln, rest) = self.keyword_line(key)?;
        let v = self.parse_f64_list(ln, rest)?;
        if v.len() != 1 {
            return self.err(ln, format!("expected one value for {key}"));
        }
        Ok(v[0])
    }

    fn read_map(&mut self, input_size: usize, output_size: usize) -> Result<Lut> {
        let mut map: Vec<u16> = Vec::with_capacity(input_size);
        while map.len() < input_size {
            let (ln, line) = self.next_line()?;
            for t in line.split_whitespace() {
                let v: u16 = t.parse().map_err(|_| Error::SpecFormat {
                    line: ln,
                    message: format!("expected table value, found {t:?}"),
                })?;
                map.push(v);
            }
            if map.len() > input_size {
                return self.err(ln, "too many table values");
            }
        }
        Lut::new(input_size, output_size, map).map_err(|e| Error::SpecFormat {
            line: 0,
            message: format!("bad table: {e}"),
        })
    }

    fn read_node_header(&mut self, expect_idx: usize) -> Result<(usize, usize)> {
        let (ln, rest) = self.keyword_line("node")?;
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 3 {
            return self.err(ln, "node header must be 'node <i> in=<n> out=<k>'");
        }
        let idx: usize = parts[0]
            .parse()
            .map_err(|_| Error::SpecFormat {
                line: ln,
                message: "bad node index".into(),
            })?;
        if idx != expect_idx {
            return self.err(ln, format!("expected node {expect_idx}, found {idx}"));
        }
        let get = |p: &str, key: &str| -> Result<usize> {
            p.strip_prefix(key)
                .and_then(|v| v.parse().ok())
                .ok_or(Error::SpecFormat {
                    line: ln,
                    message: format!("expected {key}<n>"),
                })
        };
        Ok((get(parts[1], "in=")?, get(parts[2], "out=")?))
    }

    fn read_stage_body(&mut self, designed_at: usize, with_reproducers: bool) -> Result<StageLuts> {
        let (ln, tree_text) = self.keyword_line("tree")?;
        let tree = LutTree::parse(tree_text).map_err(|e| Error::SpecFormat {
            line: ln,
            message: format!("bad tree: {e}"),
        })?;
        let msg_in = self.scalar_usize("msg_in")?;
        let output_reproducers = if with_reproducers {
            let (ln, rest) = self.keyword_line("reproducers")?;
            self.parse_f64_list(ln, rest)?
        } else {
            Vec::new()
        };
        let n_nodes = tree.internal_count();
        let mut node_luts = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let (inp, out) = self.read_node_header(i)?;
            let lut = self.read_map(inp, out)?;
            // designed tables are symmetric by construction
            let sym = lut.check_symmetry();
            node_luts.push(lut.with_symmetric_flag(sym));
        }
        Ok(StageLuts {
            designed_at,
            tree,
            msg_in,
            node_luts,
            output_reproducers,
        })
    }

    fn parse(mut self) -> Result<DecoderSpec> {
        let (ln, first) = self.next_line()?;
        if first != "minlut decoder spec v1" {
            return self.err(ln, "unsupported format header");
        }
        let dv = self.scalar_usize("dv")?;
        let dc = self.scalar_usize("dc")?;
        let llr_levels = self.scalar_usize("llr_levels")?;
        let iterations = self.scalar_usize("iterations")?;
        let (ln, rest) = self.keyword_line("design_iterations")?;
        let design_set = self.parse_usize_list(ln, rest)?;
        let (ln, rest) = self.keyword_line("alphabet_schedule")?;
        let alphabet_schedule = self.parse_usize_list(ln, rest)?;
        let (_, _vn_tree) = self.keyword_line("vn_tree")?;
        let design_sigma = self.scalar_f64("design_sigma")?;
        let design_ebn0_db = self.scalar_f64("design_ebn0_db")?;
        let rate = self.scalar_f64("rate")?;
        let (ln, rest) = self.keyword_line("llr_boundaries")?;
        let boundaries = self.parse_f64_list(ln, rest)?;
        let (ln, rest) = self.keyword_line("llr_reproducers")?;
        let reproducers = self.parse_f64_list(ln, rest)?;
        let quantizer =
            LlrQuantizer::from_parts(boundaries, reproducers).map_err(|e| Error::SpecFormat {
                line: ln,
                message: format!("bad quantizer: {e}"),
            })?;
        let (ln, rest) = self.keyword_line("mi_trace")?;
        let mi_trace = self.parse_f64_list(ln, rest)?;
        let (ln, rest) = self.keyword_line("init_lut")?;
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 2 {
            return self.err(ln, "init_lut header must be 'init_lut in=<n> out=<k>'");
        }
        let get = |p: &str, key: &str| -> Result<usize> {
            p.strip_prefix(key)
                .and_then(|v| v.parse().ok())
                .ok_or(Error::SpecFormat {
                    line: ln,
                    message: format!("expected {key}<n>"),
                })
        };
        let (inp, out) = (get(parts[0], "in=")?, get(parts[1], "out=")?);
        let init_lut = self.read_map(inp, out)?;
        let sym = init_lut.check_symmetry();
        let init_lut = init_lut.with_symmetric_flag(sym);

        let mut stages = Vec::new();
        loop {
            let (ln, line) = self.next_line()?;
            if line == "decision" {
                let decision = self.read_stage_body(0, false)?;
                let (ln, last) = self.next_line()?;
                if last != "end" {
                    return self.err(ln, "expected 'end'");
                }
                if stages.is_empty() {
                    return self.err(ln, "spec has no stages");
                }
                // reconstruct per-iteration references from the design set
                let mut stage_ref = Vec::with_capacity(iterations);
                for i in 1..=iterations {
                    let k = design_set.iter().rposition(|&j| j <= i).unwrap_or(0);
                    stage_ref.push(k);
                }
                let spec = DecoderSpec {
                    dv,
                    dc,
                    llr_levels,
                    iterations,
                    design_set,
                    alphabet_schedule,
                    design_sigma,
                    design_ebn0_db,
                    rate,
                    quantizer,
                    init_lut,
                    stages,
                    stage_ref,
                    decision,
                    mi_trace,
                };
                spec.validate()?;
                return Ok(spec);
            }
            match line.strip_prefix("stage ") {
                Some(rest) => {
                    let designed_at: usize = rest.trim().parse().map_err(|_| Error::SpecFormat {
                        line: ln,
                        message: "bad stage iteration".into(),
                    })?;
                    let stage = self.read_stage_body(designed_at, true)?;
                    stages.push(stage);
                }
                None => return self.err(ln, format!("expected 'stage <i>' or 'decision', found {line:?}")),
            }
        }
    }
}
