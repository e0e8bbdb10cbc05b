//! Experiment orchestration behind the `rim` binary: instance construction,
//! the width sweep, the sampler comparison and certificates. Every command
//! writes its CSV/JSON output plus a `metadata.json` describing the run.
//!
//! Output schemas:
//!
//! * `width_sweep.csv`: `width,alpha,alpha_bar,lower_bound,alpha_std_error,seed_set`
//! * `trace_<sampler>.csv`: `iter,avg_samples_per_edge,alpha,alpha_bar,seed_set,wall_seconds`
//! * `summary.csv`: `sampler,stop,iterations,avg_samples_per_edge,alpha,seed_set`

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    gen_random_multigraph, gen_star_forest, gen_two_cluster_er, load_graph, load_parameter_space,
    parse_raw_edges, save_graph, save_parameter_space, star_forest_ground_truth, weighted_cascade_probs,
    DirectedGraph, EdgeListFormat, ParameterSpace, ParameterVector, SeedSet,
};
use crate::maximize::Evaluator;
use crate::robust::{alpha_bar, certify, gap_ratio, lugreedy, RobustCertificate, GREEDY_FACTOR};
use crate::sampling::{
    ics_rim, oes_rim, us_rim_iterative, write_trace_csv, GroundTruthEnv, LoopConfig, ObservationSet,
    SamplerOutcome, StableStop,
};
use crate::spread::DEFAULT_NUM_SIMS;
use crate::stream::derive_seed;

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_KAPPA: f64 = 0.8;
pub const DEFAULT_INITIAL_SAMPLES: u64 = 318;
pub const DEFAULT_WIDTHS: [f64; 5] = [0.0, 0.05, 0.1, 0.2, 0.3];

const TAG_GENERATOR: u64 = 10;
const TAG_TRUTH: u64 = 11;
const TAG_EVALUATOR: u64 = 12;
const TAG_INITIAL: u64 = 13;
const TAG_ENV: u64 = 14;
const TAG_CASCADES: u64 = 15;

/// Where the graph and its ground-truth probabilities come from.
///
/// Text forms: `file:<path>`, `star-forest:<k_pairs>,<t>,<l>,<r>[,<strong>]`,
/// `two-cluster:<half_size>,<p_center>,<eps>`, `wc-random:<n>,<raw_edges>`.
/// Anything without a known prefix is read as a file path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GraphSource {
    File(PathBuf),
    StarForest {
        k_pairs: usize,
        t: usize,
        l: f64,
        r: f64,
        strong: Option<usize>,
    },
    TwoCluster {
        half_size: usize,
        p_center: f64,
        eps: f64,
    },
    WcRandom {
        n: usize,
        raw_edges: usize,
    },
}

fn fields<T: FromStr>(text: &str, body: &str, min: usize, max: usize) -> Result<Vec<T>> {
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    if parts.len() < min || parts.len() > max {
        return Err(Error::InvalidArgument(format!(
            "{text}: expected {min}..={max} comma-separated values, got {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| Error::InvalidArgument(format!("{text}: cannot parse {p:?}")))
        })
        .collect()
}

impl FromStr for GraphSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s.split_once(':').unwrap_or(("file", s));
        match kind {
            "file" => Ok(GraphSource::File(PathBuf::from(body))),
            "star-forest" => {
                let v: Vec<f64> = fields(s, body, 4, 5)?;
                Ok(GraphSource::StarForest {
                    k_pairs: v[0] as usize,
                    t: v[1] as usize,
                    l: v[2],
                    r: v[3],
                    strong: v.get(4).map(|&x| x as usize),
                })
            }
            "two-cluster" => {
                let v: Vec<f64> = fields(s, body, 3, 3)?;
                Ok(GraphSource::TwoCluster {
                    half_size: v[0] as usize,
                    p_center: v[1],
                    eps: v[2],
                })
            }
            "wc-random" => {
                let v: Vec<usize> = fields(s, body, 2, 2)?;
                Ok(GraphSource::WcRandom {
                    n: v[0],
                    raw_edges: v[1],
                })
            }
            _ => Ok(GraphSource::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::File(p) => write!(f, "file:{}", p.display()),
            GraphSource::StarForest {
                k_pairs,
                t,
                l,
                r,
                strong,
            } => {
                write!(f, "star-forest:{k_pairs},{t},{l},{r}")?;
                match strong {
                    Some(s) => write!(f, ",{s}"),
                    None => Ok(()),
                }
            }
            GraphSource::TwoCluster {
                half_size,
                p_center,
                eps,
            } => write!(f, "two-cluster:{half_size},{p_center},{eps}"),
            GraphSource::WcRandom { n, raw_edges } => write!(f, "wc-random:{n},{raw_edges}"),
        }
    }
}

impl From<GraphSource> for String {
    fn from(s: GraphSource) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for GraphSource {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A graph with its hidden probabilities and, for generated fixtures, the
/// parameter space the generator prescribes.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: DirectedGraph,
    pub truth: ParameterVector,
    pub prior: Option<ParameterSpace>,
}

/// Loads an edge list. A probability column is used as is; without one the
/// weighted cascade rule is applied to the raw (possibly repeated) edges.
pub fn load_instance_file(path: &Path) -> Result<Instance> {
    let declared_n = match load_graph(path, EdgeListFormat::Auto) {
        Ok((graph, Some(truth))) => {
            return Ok(Instance {
                graph,
                truth,
                prior: None,
            })
        }
        Ok((graph, None)) => graph.n(),
        // repeated edges are expected in a raw interaction list
        Err(Error::DuplicateEdge { .. }) => 0,
        Err(e) => return Err(e),
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let raw = parse_raw_edges(BufReader::new(file))?;
    let (wc_graph, truth) = weighted_cascade_probs(&raw)?;
    let graph = DirectedGraph::new(declared_n.max(wc_graph.n()), wc_graph.edges().to_vec())?;
    Ok(Instance {
        graph,
        truth,
        prior: None,
    })
}

pub fn build_instance(source: &GraphSource, seed: u64) -> Result<Instance> {
    let gen_seed = derive_seed(seed, TAG_GENERATOR);
    match *source {
        GraphSource::File(ref path) => load_instance_file(path),
        GraphSource::StarForest {
            k_pairs,
            t,
            l,
            r,
            strong,
        } => {
            let (graph, prior) = gen_star_forest(k_pairs, t, l, r)?;
            let truth = star_forest_ground_truth(
                k_pairs,
                t,
                l,
                r,
                strong.unwrap_or(k_pairs),
                derive_seed(seed, TAG_TRUTH),
            )?;
            Ok(Instance {
                graph,
                truth,
                prior: Some(prior),
            })
        }
        GraphSource::TwoCluster {
            half_size,
            p_center,
            eps,
        } => {
            let (graph, prior) = gen_two_cluster_er(half_size, p_center, eps, gen_seed)?;
            Ok(Instance {
                truth: prior.midpoint(),
                graph,
                prior: Some(prior),
            })
        }
        GraphSource::WcRandom { n, raw_edges } => {
            let raw = gen_random_multigraph(n, raw_edges, gen_seed)?;
            let (wc_graph, truth) = weighted_cascade_probs(&raw)?;
            let graph = DirectedGraph::new(n.max(wc_graph.n()), wc_graph.edges().to_vec())?;
            Ok(Instance {
                graph,
                truth,
                prior: None,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Us,
    Ics,
    Oes,
}

impl SamplerKind {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Us => "us",
            SamplerKind::Ics => "ics",
            SamplerKind::Oes => "oes",
        }
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "us" | "us-rim" => Ok(SamplerKind::Us),
            "ics" | "ics-rim" => Ok(SamplerKind::Ics),
            "oes" | "oes-rim" => Ok(SamplerKind::Oes),
            other => Err(Error::InvalidArgument(format!("unknown sampler {other:?}"))),
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything an experiment run needs. Fields a command does not use are
/// still echoed into its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: GraphSource,
    pub k: usize,
    pub seed: u64,
    pub num_sims: usize,
    /// Defaults to `m^-0.5`.
    pub gamma: Option<f64>,
    pub kappa: f64,
    /// Cascades per seed set for `ᾱ`; 0 skips it.
    pub num_cascades: usize,
    pub widths: Vec<f64>,
    pub samplers: Vec<SamplerKind>,
    /// Uniform samples per edge before the first iteration.
    pub initial_samples: u64,
    pub tau1: u64,
    pub tau: usize,
    pub tau_edges: u64,
    pub max_iters: usize,
    pub stable: StableStop,
    pub out_dir: PathBuf,
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(source: GraphSource, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            source,
            k: DEFAULT_K,
            seed: 0,
            num_sims: DEFAULT_NUM_SIMS,
            gamma: None,
            kappa: DEFAULT_KAPPA,
            num_cascades: crate::robust::DEFAULT_NUM_CASCADES,
            widths: DEFAULT_WIDTHS.to_vec(),
            samplers: vec![SamplerKind::Us, SamplerKind::Ics, SamplerKind::Oes],
            initial_samples: DEFAULT_INITIAL_SAMPLES,
            tau1: 250,
            tau: 1000,
            tau_edges: 1000,
            max_iters: 40,
            stable: StableStop::default(),
            out_dir: out_dir.into(),
            timing: false,
        }
    }

    pub fn resolve_gamma(&self, m: usize) -> Result<f64> {
        let gamma = self.gamma.unwrap_or_else(|| 1.0 / (m as f64).sqrt());
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma {gamma} outside (0, 1); set it explicitly for graphs with m <= 1"
            )));
        }
        Ok(gamma)
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator::monte_carlo(self.num_sims, derive_seed(self.seed, TAG_EVALUATOR))
    }

    fn alpha_bar_cascades(&self) -> Option<usize> {
        (self.num_cascades > 0).then_some(self.num_cascades)
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if self.num_sims == 0 {
            return Err(Error::InvalidArgument("num_sims must be at least 1".into()));
        }
        if let Some(w) = self.widths.iter().find(|w| !(**w >= 0.0 && **w <= 1.0)) {
            return Err(Error::InvalidArgument(format!("width {w} outside [0, 1]")));
        }
        Ok(())
    }
}

/// The `metadata.json` record written next to every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub gamma: Option<f64>,
    pub workers: usize,
    pub config: serde_json::Value,
    pub conventions: BTreeMap<String, String>,
}

fn conventions() -> BTreeMap<String, String> {
    [
        ("width_interval", "l = max(p - W/2, 0), r = min(p + W/2, 1)"),
        ("confidence_interval", "Chernoff interval clamped into [0, 1]; unsampled edges get [0, 1]"),
        ("multiplicative_plan", "interval [p/(1+a), p/(1-a)] with a = L/(2n+L), L = ln(1/(1-eps))"),
        ("alpha_bar_theta", "interval midpoint"),
        ("stop_rule", "alpha >= kappa"),
        ("oes_stable", "alpha gain below min_improvement over window iterations"),
        ("rng", "per-simulation counter streams; results independent of worker count"),
        ("lugreedy_ties", "equal lower-corner spreads keep the upper-corner set"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

impl RunMetadata {
    pub fn new(command: &str, seed: u64, graph: &DirectedGraph, gamma: Option<f64>, config: serde_json::Value) -> Self {
        RunMetadata {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            n: graph.n(),
            m: graph.m(),
            gamma,
            workers: rayon::current_num_threads(),
            config,
            conventions: conventions(),
        }
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_metadata(dir: &Path, meta: &RunMetadata) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    write_bytes(&dir.join("metadata.json"), text.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub width: f64,
    pub alpha: f64,
    pub alpha_bar: Option<f64>,
    pub lower_bound: f64,
    pub alpha_std_error: f64,
    pub seed_set: SeedSet,
}

/// `α` and `ᾱ` of LUGreedy on `Θ = [p - W/2, p + W/2]` for each width `W`.
/// All widths share one set of simulation streams.
pub fn width_sweep(instance: &Instance, cfg: &ExperimentConfig) -> Result<Vec<WidthRow>> {
    cfg.validate()?;
    let evaluator = cfg.evaluator();
    let cascade_seed = derive_seed(cfg.seed, TAG_CASCADES);
    cfg.widths
        .iter()
        .map(|&w| {
            let space = ParameterSpace::around(&instance.truth, w)?;
            let lu = lugreedy(&instance.graph, cfg.k, &space, &evaluator)?;
            let gap = gap_ratio(&instance.graph, cfg.k, &space, &lu.seed_set, &lu.upper_greedy, &evaluator)?;
            let bar = match cfg.alpha_bar_cascades() {
                Some(c) => Some(alpha_bar(&instance.graph, cfg.k, &space, &lu.seed_set, c, &evaluator, cascade_seed)?.value),
                None => None,
            };
            Ok(WidthRow {
                width: w,
                alpha: gap.alpha,
                alpha_bar: bar,
                lower_bound: gap.lower_bound(),
                alpha_std_error: gap.std_error,
                seed_set: lu.seed_set,
            })
        })
        .collect()
}

pub fn write_width_csv<W: Write>(rows: &[WidthRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["width", "alpha", "alpha_bar", "lower_bound", "alpha_std_error", "seed_set"])?;
    for r in rows {
        w.write_record([
            r.width.to_string(),
            r.alpha.to_string(),
            r.alpha_bar.map(|x| x.to_string()).unwrap_or_default(),
            r.lower_bound.to_string(),
            r.alpha_std_error.to_string(),
            r.seed_set.joined(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<width sweep>", e))
}

/// Builds the instance, runs the sweep and writes `width_sweep.csv` and
/// `metadata.json` into `cfg.out_dir`.
pub fn cmd_width_sweep(cfg: &ExperimentConfig) -> Result<Vec<WidthRow>> {
    let instance = build_instance(&cfg.source, cfg.seed)?;
    let rows = width_sweep(&instance, cfg)?;
    let mut csv_bytes = Vec::new();
    write_width_csv(&rows, &mut csv_bytes)?;
    prepare_dir(&cfg.out_dir)?;
    write_bytes(&cfg.out_dir.join("width_sweep.csv"), &csv_bytes)?;
    let meta = RunMetadata::new("width-sweep", cfg.seed, &instance.graph, None, serde_json::to_value(cfg)?);
    write_metadata(&cfg.out_dir, &meta)?;
    Ok(rows)
}

/// The uniform warm-up observations shared by every sampler of a run.
pub fn initial_observations(instance: &Instance, per_edge: u64, seed: u64) -> ObservationSet {
    let mut env = GroundTruthEnv::new(instance.truth.clone(), derive_seed(seed, TAG_INITIAL));
    let mut obs = ObservationSet::new(instance.graph.m());
    env.sample_all(&mut obs, per_edge);
    obs
}

/// Runs each sampler of `cfg.samplers` from the same warm-up observations and
/// the same environment seed.
pub fn sampler_compare(instance: &Instance, cfg: &ExperimentConfig) -> Result<Vec<(SamplerKind, SamplerOutcome)>> {
    cfg.validate()?;
    let gamma = cfg.resolve_gamma(instance.graph.m())?;
    let loop_cfg = LoopConfig {
        k: cfg.k,
        kappa: cfg.kappa,
        gamma,
        max_iters: cfg.max_iters,
        evaluator: cfg.evaluator(),
        alpha_bar_cascades: cfg.alpha_bar_cascades(),
        record_timing: cfg.timing,
    };
    let initial = initial_observations(instance, cfg.initial_samples, cfg.seed);
    let env_seed = derive_seed(cfg.seed, TAG_ENV);
    let g = &instance.graph;
    cfg.samplers
        .iter()
        .map(|&kind| {
            let mut env = GroundTruthEnv::new(instance.truth.clone(), env_seed);
            let out = match kind {
                SamplerKind::Us => us_rim_iterative(&mut env, g, &initial, cfg.tau1, &loop_cfg)?,
                SamplerKind::Ics => ics_rim(&mut env, g, &initial, cfg.tau, &loop_cfg)?,
                SamplerKind::Oes => oes_rim(&mut env, g, &initial, cfg.tau_edges, &loop_cfg, cfg.stable)?,
            };
            Ok((kind, out))
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(runs: &[(SamplerKind, SamplerOutcome)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sampler", "stop", "iterations", "avg_samples_per_edge", "alpha", "seed_set"])?;
    for (kind, out) in runs {
        let last = out.final_row();
        let stop = serde_json::to_value(out.stop)?;
        w.write_record([
            kind.name().to_string(),
            stop.as_str().unwrap_or_default().to_string(),
            last.iter.to_string(),
            last.avg_samples_per_edge.to_string(),
            out.alpha.to_string(),
            out.seed_set.joined(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<summary>", e))
}

/// Writes `trace_<sampler>.csv`, `summary.csv` and `metadata.json`.
pub fn cmd_sampler_compare(cfg: &ExperimentConfig) -> Result<Vec<(SamplerKind, SamplerOutcome)>> {
    let instance = build_instance(&cfg.source, cfg.seed)?;
    let runs = sampler_compare(&instance, cfg)?;
    let mut files = Vec::new();
    for (kind, out) in &runs {
        let mut bytes = Vec::new();
        write_trace_csv(&out.trace, &mut bytes)?;
        files.push((format!("trace_{}.csv", kind.name()), bytes));
    }
    let mut summary = Vec::new();
    write_summary_csv(&runs, &mut summary)?;
    files.push(("summary.csv".to_string(), summary));

    prepare_dir(&cfg.out_dir)?;
    for (name, bytes) in &files {
        write_bytes(&cfg.out_dir.join(name), bytes)?;
    }
    let gamma = cfg.resolve_gamma(instance.graph.m())?;
    let meta = RunMetadata::new("sampler-compare", cfg.seed, &instance.graph, Some(gamma), serde_json::to_value(cfg)?);
    write_metadata(&cfg.out_dir, &meta)?;
    Ok(runs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyOutcome {
    pub certificate: RobustCertificate,
    /// `None` when no minimum bound was requested.
    pub meets_min_bound: Option<bool>,
}

/// Loads a graph and a parameter-space file and certifies LUGreedy on it.
/// Both inputs are fully validated before anything is written; the
/// certificate goes to `out` as pretty JSON.
#[allow(clippy::too_many_arguments)]
pub fn cmd_certify(
    graph_path: &Path,
    space_path: &Path,
    k: usize,
    evaluator: &Evaluator,
    num_cascades: usize,
    seed: u64,
    min_bound: Option<f64>,
    out: &Path,
) -> Result<CertifyOutcome> {
    let (graph, _) = load_graph(graph_path, EdgeListFormat::Auto)?;
    let space = load_parameter_space(space_path, graph.m())?;
    let certificate = certify(&graph, k, &space, evaluator, num_cascades, derive_seed(seed, TAG_CASCADES))?;
    let mut text = serde_json::to_string_pretty(&certificate)?;
    text.push('\n');
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        prepare_dir(dir)?;
    }
    write_bytes(out, text.as_bytes())?;
    let meets_min_bound = min_bound.map(|b| certificate.lower_bound >= b);
    Ok(CertifyOutcome {
        certificate,
        meets_min_bound,
    })
}

/// Writes a fixture: `graph.tsv` (edges with ground-truth probabilities) and,
/// when the generator prescribes one, `theta.tsv`.
pub fn cmd_gen(source: &GraphSource, seed: u64, out_dir: &Path) -> Result<Instance> {
    let instance = build_instance(source, seed)?;
    prepare_dir(out_dir)?;
    save_graph(out_dir.join("graph.tsv"), &instance.graph, Some(&instance.truth))?;
    if let Some(prior) = &instance.prior {
        save_parameter_space(out_dir.join("theta.tsv"), prior)?;
    }
    let config = serde_json::json!({ "source": source });
    write_metadata(out_dir, &RunMetadata::new("gen", seed, &instance.graph, None, config))?;
    Ok(instance)
}

/// `α·(1 − 1/e)` for a gap ratio.
pub fn certified_bound(alpha: f64) -> f64 {
    alpha * GREEDY_FACTOR
}
