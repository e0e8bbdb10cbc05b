//! `rim`: robust influence maximization experiments from the command line.
//!
//! Every flag can also be set through an environment variable named
//! `RIM_<FLAG>` (for example `RIM_SEED`, `RIM_NUM_SIMS`).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rim_core::graph::SeedSet;
use rim_core::harness::{
    cmd_certify, cmd_gen, cmd_sampler_compare, cmd_width_sweep, load_instance_file, ExperimentConfig,
    GraphSource, SamplerKind,
};
use rim_core::maximize::{greedy, Evaluator};
use rim_core::sampling::StableStop;

#[derive(Parser)]
#[command(name = "rim", version, about = "Robust influence maximization under the independent cascade model")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed for every random choice of the run.
    #[arg(long, global = true, env = "RIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Seed-set size.
    #[arg(long, global = true, env = "RIM_K", default_value_t = rim_core::harness::DEFAULT_K)]
    k: usize,
    /// Confidence parameter; defaults to m^-0.5.
    #[arg(long, global = true, env = "RIM_GAMMA")]
    gamma: Option<f64>,
    /// Target gap ratio for the samplers.
    #[arg(long, global = true, env = "RIM_KAPPA", default_value_t = rim_core::harness::DEFAULT_KAPPA)]
    kappa: f64,
    /// Monte Carlo simulations per spread estimate.
    #[arg(long, global = true, env = "RIM_NUM_SIMS", default_value_t = rim_core::spread::DEFAULT_NUM_SIMS)]
    num_sims: usize,
    #[arg(long, global = true, env = "RIM_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// `certify` exits with status 2 when alpha*(1-1/e) falls below this.
    #[arg(long, global = true, env = "RIM_MIN_BOUND")]
    min_bound: Option<f64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "RIM_THREADS")]
    threads: Option<usize>,
    /// Cascades per seed set for the alpha-bar heuristics; 0 skips them.
    #[arg(long, global = true, env = "RIM_NUM_CASCADES", default_value_t = rim_core::robust::DEFAULT_NUM_CASCADES)]
    num_cascades: usize,
    /// Use exact enumeration instead of Monte Carlo (small graphs only).
    #[arg(long, global = true, env = "RIM_EXACT")]
    exact: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated fixture (graph.tsv, theta.tsv, metadata.json).
    Gen {
        /// e.g. star-forest:10,20,0.05,0.5 or wc-random:500,3000
        #[arg(long, env = "RIM_SOURCE")]
        source: GraphSource,
    },
    /// Alpha and alpha-bar for a grid of interval widths around the ground truth.
    WidthSweep {
        #[arg(long, env = "RIM_SOURCE")]
        source: GraphSource,
        #[arg(long, env = "RIM_WIDTHS", value_delimiter = ',', default_value = "0,0.05,0.1,0.2,0.3")]
        widths: Vec<f64>,
    },
    /// Run the uniform, cascade and out-edge samplers from shared warm-up samples.
    SamplerCompare {
        #[arg(long, env = "RIM_SOURCE")]
        source: GraphSource,
        #[arg(long, env = "RIM_SAMPLERS", value_delimiter = ',', default_value = "us,ics,oes")]
        samplers: Vec<SamplerKind>,
        /// Uniform warm-up samples per edge.
        #[arg(long, env = "RIM_INITIAL_SAMPLES", default_value_t = rim_core::harness::DEFAULT_INITIAL_SAMPLES)]
        initial_samples: u64,
        /// Uniform sampler: samples per edge per iteration.
        #[arg(long, env = "RIM_TAU1", default_value_t = 250)]
        tau1: u64,
        /// Cascade sampler: cascades per iteration.
        #[arg(long, env = "RIM_TAU", default_value_t = 1000)]
        tau: usize,
        /// Out-edge sampler: samples per out-edge per iteration.
        #[arg(long, env = "RIM_TAU_EDGES", default_value_t = 1000)]
        tau_edges: u64,
        #[arg(long, env = "RIM_MAX_ITERS", default_value_t = 40)]
        max_iters: usize,
        #[arg(long, env = "RIM_STABLE_WINDOW", default_value_t = 3)]
        stable_window: usize,
        #[arg(long, env = "RIM_STABLE_MIN_IMPROVEMENT", default_value_t = 0.005)]
        stable_min_improvement: f64,
        /// Record wall-clock seconds in traces (makes them irreproducible).
        #[arg(long, env = "RIM_TIMING")]
        timing: bool,
    },
    /// Certify LUGreedy on a graph and a parameter-space file.
    Certify {
        #[arg(long, env = "RIM_GRAPH")]
        graph: PathBuf,
        /// Lines of `edge<TAB>lower<TAB>upper`.
        #[arg(long, env = "RIM_THETA")]
        theta: PathBuf,
        /// Defaults to <out-dir>/certificate.json.
        #[arg(long, env = "RIM_OUT")]
        out: Option<PathBuf>,
    },
    /// Estimate the spread of a seed set.
    Spread {
        #[arg(long, env = "RIM_GRAPH")]
        graph: PathBuf,
        #[arg(long, env = "RIM_SEEDS", value_delimiter = ',', required = true)]
        seeds: Vec<usize>,
    },
    /// Greedy seed selection under the graph's probabilities.
    Greedy {
        #[arg(long, env = "RIM_GRAPH")]
        graph: PathBuf,
    },
}

impl Common {
    fn evaluator(&self) -> Evaluator {
        if self.exact {
            Evaluator::Exact
        } else {
            Evaluator::monte_carlo(self.num_sims, self.seed)
        }
    }

    fn config(&self, source: GraphSource) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(source, self.out_dir.clone());
        cfg.k = self.k;
        cfg.seed = self.seed;
        cfg.num_sims = self.num_sims;
        cfg.gamma = self.gamma;
        cfg.kappa = self.kappa;
        cfg.num_cascades = self.num_cascades;
        cfg
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let c = &cli.common;
    if let Some(threads) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Gen { source } => {
            let inst = cmd_gen(&source, c.seed, &c.out_dir)?;
            eprintln!("wrote n={} m={} to {}", inst.graph.n(), inst.graph.m(), c.out_dir.display());
        }
        Command::WidthSweep { source, widths } => {
            let mut cfg = c.config(source);
            cfg.widths = widths;
            let rows = cmd_width_sweep(&cfg)?;
            for r in rows {
                eprintln!("W={} alpha={:.4} alpha_bar={:?}", r.width, r.alpha, r.alpha_bar);
            }
        }
        Command::SamplerCompare {
            source,
            samplers,
            initial_samples,
            tau1,
            tau,
            tau_edges,
            max_iters,
            stable_window,
            stable_min_improvement,
            timing,
        } => {
            let mut cfg = c.config(source);
            cfg.samplers = samplers;
            cfg.initial_samples = initial_samples;
            cfg.tau1 = tau1;
            cfg.tau = tau;
            cfg.tau_edges = tau_edges;
            cfg.max_iters = max_iters;
            cfg.stable = StableStop {
                window: stable_window,
                min_improvement: stable_min_improvement,
            };
            cfg.timing = timing;
            for (kind, out) in cmd_sampler_compare(&cfg)? {
                let last = out.final_row();
                eprintln!(
                    "{kind}: stop={:?} iters={} avg_samples={} alpha={:.4}",
                    out.stop, last.iter, last.avg_samples_per_edge, out.alpha
                );
            }
        }
        Command::Certify { graph, theta, out } => {
            let out = out.unwrap_or_else(|| c.out_dir.join("certificate.json"));
            let res = cmd_certify(&graph, &theta, c.k, &c.evaluator(), c.num_cascades, c.seed, c.min_bound, &out)?;
            eprintln!(
                "alpha={:.6} lower_bound={:.6} seeds={}",
                res.certificate.alpha, res.certificate.lower_bound, res.certificate.seed_set
            );
            if res.meets_min_bound == Some(false) {
                eprintln!("lower bound below --min-bound {}", c.min_bound.unwrap_or_default());
                return Ok(ExitCode::from(2));
            }
        }
        Command::Spread { graph, seeds } => {
            let inst = load_instance_file(&graph)?;
            let seeds = SeedSet::new(seeds, inst.graph.n())?;
            let est = c.evaluator().evaluate(&inst.graph, &inst.truth, &seeds)?;
            let report = serde_json::json!({
                "seed_set": seeds,
                "spread": est.value,
                "std_error": est.std_error,
                "evaluator": c.evaluator(),
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Greedy { graph } => {
            let inst = load_instance_file(&graph)?;
            let ev = c.evaluator();
            let seeds = greedy(&inst.graph, c.k, &inst.truth, &ev)?;
            let est = ev.reseeded(1).evaluate(&inst.graph, &inst.truth, &seeds)?;
            let report = serde_json::json!({
                "seed_set": seeds,
                "spread": est.value,
                "std_error": est.std_error,
                "evaluator": ev,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
