//! Command execution. Every command reads files named in the [`RunConfig`],
//! writes its artifacts plus `config.json` into the output directory and
//! returns a JSON summary.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use linkspectra_core::partition::{partition_bfs, partition_svd, BfsStart, SvdOptions};
use linkspectra_core::spectra::{self, Boundary, Selection};
use linkspectra_core::synth::{self, LemmaConfig};
use linkspectra_core::{
    CirculantOperator, FourierBasis, FrequencyFilter, GraphBasis, GraphSlice, JointFilter, LinkStreamMatrix, PartitionTree,
    RealMatrix, RelationSpace, StreamBases, StructuralResponse,
};
use serde_json::{json, Value};

use crate::config::{BasisSpec, Command, Generator, Keep, RunConfig};
use crate::error::{CliError, Result};
use crate::formats::tables::{self, basis_labels, frequency_labels};
use crate::formats::tree::TreeFile;
use crate::formats::{self, stream_file, Format};
use crate::parallel::{analyze_rows, RayonRunner};

/// Threshold below which a coefficient counts as zero in summaries.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: Value,
    pub warnings: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    warnings: Vec<String>,
    artifacts: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.cfg.out.join(name);
        self.artifacts.push(p.clone());
        p
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let p = self.path(name);
        File::create(&p).map(BufWriter::new).map_err(|e| CliError::io(p, e))
    }

    fn emit_stream(&mut self, stem: &str, s: &LinkStreamMatrix) -> Result<()> {
        let name = format!("{stem}.{}", self.cfg.emit.extension());
        let path = self.cfg.out.join(&name);
        let out = self.create(&name)?;
        let r = match self.cfg.emit {
            Format::Raw => stream_file::write_raw(s, out),
            _ => stream_file::write_csv(s, out),
        };
        r.map_err(|e| CliError::io(path, e))
    }

    fn emit_tree(&mut self, space: &RelationSpace, tree: &PartitionTree) -> Result<()> {
        let path = self.cfg.out.join("tree.json");
        let out = self.create("tree.json")?;
        TreeFile::new(space, tree).write(out).map_err(|e| CliError::io(path, e))
    }

    fn emit_grid(&mut self, name: &str, corner: &str, rows: &[String], cols: &[String], v: &RealMatrix) -> Result<()> {
        let path = self.cfg.out.join(name);
        let out = self.create(name)?;
        tables::write_grid(out, corner, rows, cols, v).map_err(|e| CliError::io(path, e))
    }

    fn emit_json(&mut self, name: &str, v: &Value) -> Result<()> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(v).expect("json value serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    fn load(&mut self) -> Result<LinkStreamMatrix> {
        let input = self.cfg.input.as_deref().expect("validated");
        let (stream, report) = formats::read_stream(input, self.cfg.format, self.cfg.window)?;
        if report.dropped > 0 {
            self.warnings.push(format!("dropped {} records outside the window", report.dropped));
        }
        Ok(stream)
    }
}

/// Map `stream` onto `target` by relation label. Mass on relations missing
/// from `target` is an error.
pub fn project(stream: &LinkStreamMatrix, target: Arc<RelationSpace>) -> Result<LinkStreamMatrix> {
    if **stream.space() == *target {
        return Ok(LinkStreamMatrix::new(stream.t0(), target, stream.values().clone())?);
    }
    let index: HashMap<String, usize> = target.relation_labels().into_iter().enumerate().map(|(i, l)| (l, i)).collect();
    let src = stream.space();
    let mut values = RealMatrix::zeros(stream.len_t(), target.len());
    for k in 0..src.len() {
        let col = stream.values().column(k);
        let label = src.relation_label(k);
        match index.get(&label) {
            Some(&j) => values.set_column(j, &col),
            None if col.iter().all(|&v| v == 0.0) => {}
            None => {
                return Err(CliError::Usage(format!("relation `{label}` carries weight but is not in the basis space")));
            }
        }
    }
    Ok(LinkStreamMatrix::new(stream.t0(), target, values)?)
}

/// Build the graph basis named in the config and bring the stream into its space.
pub fn resolve_basis(stream: LinkStreamMatrix, cfg: &RunConfig) -> Result<(LinkStreamMatrix, GraphBasis)> {
    let (stream, tree) = match &cfg.basis {
        BasisSpec::Svd => {
            if !stream.space().is_full() {
                return Err(CliError::Usage("svd basis needs a full vertex × vertex space; use --basis bfs or a tree file".into()));
            }
            let (_, tree) = partition_svd(&stream.aggregate_graph(), &SvdOptions::seeded(cfg.seed))?;
            (stream, tree)
        }
        BasisSpec::Bfs => {
            let activity: Vec<f64> = (0..stream.len_m())
                .map(|k| (0..stream.len_t()).map(|t| stream.values().get(t, k).abs()).sum())
                .collect();
            let infra = GraphSlice::new(stream.space().clone(), activity)?;
            let active = Arc::new(RelationSpace::active_subset(&infra)?);
            let tree = partition_bfs(&active, BfsStart::Seeded(cfg.seed))?;
            (project(&stream, active)?, tree)
        }
        BasisSpec::File(path) => {
            let file = TreeFile::read(path)?;
            let space = Arc::new(file.space()?);
            (project(&stream, space)?, file.partition()?)
        }
    };
    let tree = Arc::new(tree);
    let basis = match cfg.level {
        Some(j) => GraphBasis::new(tree, j)?,
        None => GraphBasis::coarsest(tree),
    };
    Ok((stream, basis))
}

fn struct_response(choice: &str, basis: &GraphBasis) -> Result<StructuralResponse> {
    match choice {
        "identity" | "allpass" => Ok(StructuralResponse::identity(basis)),
        "coarse" => Ok(StructuralResponse::coarse_pass(basis)),
        "detail" => Ok(StructuralResponse::detail_pass(basis)),
        path => tables::read_structural_response(Path::new(path), basis),
    }
}

fn freq_response(choice: &str, len: usize) -> Result<FrequencyFilter> {
    let path = Path::new(choice);
    if path.is_file() {
        return tables::read_frequency_filter(path, len);
    }
    Ok(FrequencyFilter::preset(choice, len)?)
}

fn selection(keep: Keep) -> Selection {
    match keep {
        Keep::Top(k) => Selection::TopK(k),
        Keep::Box { u0, u1, k0, k1 } => Selection::Box { freq: u0..=u1, basis: k0..=k1 },
    }
}

fn boundary(cfg: &RunConfig) -> Boundary {
    if cfg.linear_boundary {
        Boundary::Linear
    } else {
        Boundary::Circular
    }
}

fn time_labels(s: &LinkStreamMatrix) -> Vec<String> {
    s.times().map(|t| t.to_string()).collect()
}

/// Validate, run and record one command.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let mut ctx = Ctx { cfg, warnings: Vec::new(), artifacts: Vec::new() };
    let result = execute(&mut ctx);
    cfg.write(&cfg.out)?;
    ctx.artifacts.push(cfg.out.join(crate::config::CONFIG_FILE));
    let summary = result?;
    Ok(Outcome { summary, warnings: ctx.warnings, artifacts: ctx.artifacts })
}

fn execute(ctx: &mut Ctx<'_>) -> Result<Value> {
    let cfg = ctx.cfg;
    match &cfg.command {
        Command::Ingest => {
            let s = ctx.load()?;
            ctx.emit_stream("stream", &s)?;
            let nonzero = s.values().as_slice().iter().filter(|&&v| v != 0.0).count();
            Ok(json!({
                "t0": s.t0(), "len": s.len_t(), "relations": s.len_m(),
                "vertices": s.space().num_active_vertices(), "nonzero": nonzero,
            }))
        }
        Command::Basis => {
            let (s, basis) = resolve_basis(ctx.load()?, cfg)?;
            ctx.emit_tree(s.space(), basis.tree())?;
            Ok(json!({ "relations": basis.len(), "depth": basis.tree().depth(), "level": basis.level(), "basis": cfg.basis }))
        }
        Command::Decompose => decompose(ctx),
        Command::Filter { freq, structural } => {
            let (s, basis) = resolve_basis(ctx.load()?, cfg)?;
            let time = FourierBasis::new(s.len_t())?;
            let f = match freq {
                Some(choice) => freq_response(choice, s.len_t())?,
                None => FrequencyFilter::all_pass(s.len_t()),
            };
            let q = match structural {
                Some(choice) => struct_response(choice, &basis)?,
                None => StructuralResponse::identity(&basis),
            };
            let bases = StreamBases::new(basis, time);
            let out = JointFilter::new(f, q).apply(s.values(), &bases)?;
            let filtered = s.with_values(out)?;
            ctx.emit_stream("filtered", &filtered)?;
            Ok(json!({ "input_norm": s.values().frobenius_norm(), "output_norm": filtered.values().frobenius_norm() }))
        }
        Command::Backbone { keep } => {
            let (s, basis) = resolve_basis(ctx.load()?, cfg)?;
            let bases = StreamBases::new(basis, FourierBasis::new(s.len_t())?);
            let c = spectra::decompose(s.values(), &bases)?;
            let bb = spectra::backbone(s.values(), &bases, &selection(*keep))?;
            let labels = basis_labels(&bases.graph);
            let rows: Vec<Vec<String>> = bb
                .selected
                .iter()
                .enumerate()
                .map(|(rank, &(u, k))| {
                    vec![
                        rank.to_string(),
                        u.to_string(),
                        formats::fmt_f64(bases.time.frequency(u)),
                        labels[k].clone(),
                        formats::fmt_f64(c.get(u, k).norm()),
                    ]
                })
                .collect();
            let path = ctx.cfg.out.join("selected.csv");
            let mut w = csv::Writer::from_writer(ctx.create("selected.csv")?);
            let io = |e: csv::Error| CliError::format(&path, e.to_string());
            w.write_record(["rank", "u", "freq", "element", "magnitude"]).map_err(io)?;
            for r in &rows {
                w.write_record(r).map_err(io)?;
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
            let backbone = s.with_values(bb.stream)?;
            ctx.emit_stream("backbone", &backbone)?;
            let kept = bb.kept.iter().filter(|&&k| k).count();
            Ok(json!({ "selected": bb.selected.len(), "kept": kept, "keep": keep }))
        }
        Command::Aggregate { width } => {
            let s = ctx.load()?;
            let op = CirculantOperator::aggregation(s.len_t(), *width)?;
            let agg = s.with_values(op.apply(s.values())?)?;
            ctx.emit_stream("aggregated", &agg)?;
            let response = op.response();
            let nyquist = (s.len_t() % 2 == 0).then(|| response.response()[s.len_t() / 2].norm());
            Ok(json!({ "width": width, "len": s.len_t(), "response_at_half": nyquist }))
        }
        Command::Embed { coarse } => {
            let (s, basis) = resolve_basis(ctx.load()?, cfg)?;
            let x = analyze_rows(s.values(), &basis);
            let mut labels = basis_labels(&basis);
            let x = if *coarse {
                let ns = basis.num_scaling();
                labels.truncate(ns);
                RealMatrix::from_fn(x.rows(), ns, |t, k| x.get(t, k))
            } else {
                x
            };
            ctx.emit_grid("embedding.csv", "t", &time_labels(&s), &labels, &x)?;
            Ok(json!({ "len": s.len_t(), "dimension": labels.len(), "level": basis.level() }))
        }
        Command::Regularity => {
            let (s, basis) = resolve_basis(ctx.load()?, cfg)?;
            let b = boundary(cfg);
            let reg = spectra::regularity(s.values(), &basis, b)?;
            let relaxed = spectra::relaxed_time_regularity(s.values(), &basis, b)?;
            let v = json!({
                "time": reg.time, "edge": reg.edge, "total": reg.total, "relaxed_time": relaxed,
                "level": basis.level(), "boundary": if cfg.linear_boundary { "linear" } else { "circular" },
            });
            ctx.emit_json("regularity.json", &v)?;
            Ok(v)
        }
        Command::Synth { generator } => synthesize(ctx, generator),
        Command::VerifyLemmas { trials, lemmas } => {
            let mut lc = LemmaConfig::new(*trials, cfg.seed);
            if let Some(j) = cfg.level {
                lc.sizes.level = j;
            }
            let runner = RayonRunner::from_env()?;
            let which: Vec<u8> = if lemmas.is_empty() { vec![1, 2, 3, 4] } else { lemmas.clone() };
            let mut checks = Vec::new();
            for &l in &which {
                checks.extend(synth::verify_lemma(l, &lc, &runner)?);
            }
            let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.statistic.clone()).collect();
            let report = json!({
                "trials": trials, "seed": cfg.seed, "lemmas": which,
                "all_pass": failed.is_empty(), "checks": checks,
            });
            ctx.emit_json("report.json", &report)?;
            if !failed.is_empty() {
                return Err(CliError::ChecksFailed(format!("failed checks: {}", failed.join(", "))));
            }
            Ok(json!({ "all_pass": true, "checks": checks.len() }))
        }
    }
}

/// The plot bundle: the stream, `X = L Φᵀ`, `|F| = |Ψ* L|`, `|C|` and the
/// complex coefficients, plus the tree that defines `Φ`.
fn decompose(ctx: &mut Ctx<'_>) -> Result<Value> {
    let (s, basis) = resolve_basis(ctx.load()?, ctx.cfg)?;
    let time = FourierBasis::new(s.len_t())?;
    let x = analyze_rows(s.values(), &basis);
    let f = time.forward(s.values())?;
    let c = time.forward(&x)?;
    let labels = basis_labels(&basis);
    let freqs = frequency_labels(&time);
    let times = time_labels(&s);
    ctx.emit_stream("stream", &s)?;
    ctx.emit_tree(s.space(), basis.tree())?;
    ctx.emit_grid("time_structure.csv", "t", &times, &labels, &x)?;
    ctx.emit_grid("freq_magnitude.csv", "u", &freqs, &s.space().relation_labels(), &f.abs())?;
    ctx.emit_grid("coefficients_magnitude.csv", "u", &freqs, &labels, &c.abs())?;
    let path = ctx.cfg.out.join("coefficients.csv");
    let out = ctx.create("coefficients.csv")?;
    tables::write_coefficients(out, &c, &time, &labels).map_err(|e| CliError::io(path, e))?;
    let support = c.as_slice().iter().filter(|z| z.norm() > SUPPORT_THRESHOLD).count();
    Ok(json!({
        "len": s.len_t(), "relations": s.len_m(), "level": basis.level(),
        "stream_norm": s.values().frobenius_norm(), "coefficient_norm": c.frobenius_norm(), "support": support,
    }))
}

fn synthesize(ctx: &mut Ctx<'_>, generator: &Generator) -> Result<Value> {
    let seed = ctx.cfg.seed;
    match generator {
        Generator::Oscillating { len } => {
            let s = synth::gen_oscillating(*len)?;
            ctx.emit_stream("stream", &s)?;
            ctx.emit_tree(s.space(), &synth::claw_triangle_tree())?;
            Ok(json!({ "len": len, "relations": s.len_m() }))
        }
        Generator::Sbm { blocks, per_block, p_in, p_out } => {
            let pair = synth::gen_sbm_pair(*blocks, *per_block, *p_in, *p_out, seed)?;
            let s = LinkStreamMatrix::from_slices(0, &[pair.first.clone(), pair.second.clone()])?;
            ctx.emit_stream("stream", &s)?;
            ctx.emit_tree(s.space(), &pair.tree)?;
            Ok(json!({ "relations": s.len_m(), "block_level": pair.block_level }))
        }
        Generator::Daynight(params) => {
            let s = params.generate(seed)?;
            ctx.emit_stream("stream", &s)?;
            ctx.emit_stream("template", &params.template()?)?;
            Ok(json!({ "len": s.len_t(), "relations": s.len_m() }))
        }
    }
}
