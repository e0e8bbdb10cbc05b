//! Narrowing the parameter space by sampling edges of a hidden ground truth.
//!
//! A [`GroundTruthEnv`] answers Bernoulli draws on single edges and never
//! exposes its probabilities to the samplers. Observations are kept as
//! per-edge `(trials, successes)` tallies and turned into a parameter space by
//! [`confidence_intervals`]. Three samplers share the same iteration shape:
//!
//! * uniform: every edge gets `τ₁` more draws per iteration;
//! * information cascade: `τ` cascades from the current robust seed set, each
//!   activated node sampling all of its out-edges once;
//! * out-edge: only the out-edges of the current seed set, `τ_edges` draws each.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, EdgeId, ParameterSpace, ParameterVector, SeedSet};
use crate::maximize::Evaluator;
use crate::robust::{alpha_bar, gap_ratio, lugreedy};
use crate::stream::{derive_seed, stream_rng};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationSet {
    trials: Vec<u64>,
    successes: Vec<u64>,
}

impl ObservationSet {
    pub fn new(m: usize) -> Self {
        ObservationSet {
            trials: vec![0; m],
            successes: vec![0; m],
        }
    }

    pub fn from_counts(trials: Vec<u64>, successes: Vec<u64>) -> Result<Self> {
        if trials.len() != successes.len() {
            return Err(Error::LengthMismatch {
                expected: trials.len(),
                found: successes.len(),
            });
        }
        if let Some(e) = (0..trials.len()).find(|&e| successes[e] > trials[e]) {
            return Err(Error::InvalidArgument(format!(
                "edge {e}: {} successes exceed {} trials",
                successes[e], trials[e]
            )));
        }
        Ok(ObservationSet { trials, successes })
    }

    pub fn m(&self) -> usize {
        self.trials.len()
    }

    pub fn record(&mut self, e: EdgeId, success: bool) {
        self.trials[e] += 1;
        self.successes[e] += success as u64;
    }

    pub fn trials(&self, e: EdgeId) -> u64 {
        self.trials[e]
    }

    pub fn successes(&self, e: EdgeId) -> u64 {
        self.successes[e]
    }

    pub fn p_hat(&self, e: EdgeId) -> Option<f64> {
        (self.trials[e] > 0).then(|| self.successes[e] as f64 / self.trials[e] as f64)
    }

    pub fn total_trials(&self) -> u64 {
        self.trials.iter().sum()
    }

    pub fn avg_samples_per_edge(&self) -> f64 {
        if self.m() == 0 {
            0.0
        } else {
            self.total_trials() as f64 / self.m() as f64
        }
    }

    /// Componentwise sum of two observation sets on the same edges.
    pub fn merge(&self, other: &ObservationSet) -> Result<ObservationSet> {
        if self.m() != other.m() {
            return Err(Error::LengthMismatch {
                expected: self.m(),
                found: other.m(),
            });
        }
        Ok(ObservationSet {
            trials: self.trials.iter().zip(&other.trials).map(|(a, b)| a + b).collect(),
            successes: self
                .successes
                .iter()
                .zip(&other.successes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// Hidden edge probabilities behind a Bernoulli oracle.
#[derive(Debug, Clone)]
pub struct GroundTruthEnv {
    theta: ParameterVector,
    rng: ChaCha8Rng,
    draws: Vec<u64>,
}

impl GroundTruthEnv {
    pub fn new(theta: ParameterVector, seed: u64) -> Self {
        let m = theta.len();
        GroundTruthEnv {
            theta,
            rng: stream_rng(seed, 0),
            draws: vec![0; m],
        }
    }

    pub fn m(&self) -> usize {
        self.theta.len()
    }

    /// One Bernoulli(`p_e`) draw.
    pub fn draw(&mut self, e: EdgeId) -> bool {
        self.draws[e] += 1;
        self.rng.gen::<f64>() < self.theta.get(e)
    }

    pub fn draws(&self, e: EdgeId) -> u64 {
        self.draws[e]
    }

    pub fn total_draws(&self) -> u64 {
        self.draws.iter().sum()
    }

    /// The hidden probabilities. Only evaluation code should look at these.
    pub fn reveal_truth(&self) -> &ParameterVector {
        &self.theta
    }

    /// `t` draws of every edge, recorded into `obs`.
    pub fn sample_all(&mut self, obs: &mut ObservationSet, t: u64) {
        for e in 0..self.m() {
            for _ in 0..t {
                let x = self.draw(e);
                obs.record(e, x);
            }
        }
    }
}

/// Combined additive/multiplicative Chernoff intervals. With `c_e =
/// sqrt(3 ln(2m/γ) / t_e)` the interval is
/// `p̂ + c²/2 ± c·sqrt(c²/4 + p̂)`, clamped into `[0, 1]`; unsampled edges get
/// `[0, 1]`.
pub fn confidence_intervals(obs: &ObservationSet, gamma: f64) -> Result<ParameterSpace> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} outside (0, 1)")));
    }
    let m = obs.m();
    let log_term = (2.0 * m as f64 / gamma).ln();
    let mut lower = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    for e in 0..m {
        match obs.p_hat(e) {
            None => {
                lower.push(0.0);
                upper.push(1.0);
            }
            Some(p) => {
                let c = (3.0 * log_term / obs.trials(e) as f64).sqrt();
                let center = p + c * c / 2.0;
                let radius = c * (c * c / 4.0 + p).sqrt();
                lower.push((center - radius).clamp(0.0, 1.0));
                upper.push((center + radius).clamp(0.0, 1.0));
            }
        }
    }
    ParameterSpace::new(lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Additive,
    Multiplicative,
}

/// How a uniform sampler turns `p̂_e` into an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum IntervalRule {
    /// `[p̂ − δ, p̂ + δ]` clamped into `[0, 1]`.
    Additive { delta: f64 },
    /// `[p̂ / (1 + a), p̂ / (1 − a)]` clamped into `[0, 1]`.
    Multiplicative { a: f64 },
}

impl IntervalRule {
    pub fn interval(&self, p_hat: f64) -> (f64, f64) {
        match *self {
            IntervalRule::Additive { delta } => ((p_hat - delta).max(0.0), (p_hat + delta).min(1.0)),
            IntervalRule::Multiplicative { a } => (p_hat / (1.0 + a), (p_hat / (1.0 - a)).min(1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub setting: Setting,
    pub epsilon: f64,
    pub gamma: f64,
    pub p_prime: Option<f64>,
    /// Draws per edge.
    pub t: u64,
    pub rule: IntervalRule,
}

/// Per-edge sample count for uniform sampling.
///
/// * additive: `t = 2m²n² ln(2m/γ) / (k²ε²)` with `δ_e = kε/(mn)`;
/// * multiplicative: `t = (3 ln(2m/γ) / p')·(2n / ln(1/(1−ε)) + 1)²`, using
///   the interval `[p̂/(1+a), p̂/(1−a)]` with
///   `a = ln(1/(1−ε)) / (2n + ln(1/(1−ε)))`.
pub fn plan_uniform(
    graph: &DirectedGraph,
    k: usize,
    epsilon: f64,
    gamma: f64,
    setting: Setting,
    p_prime: Option<f64>,
) -> Result<SamplingPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} and gamma {gamma} must lie in (0, 1)"
        )));
    }
    let (n, m) = (graph.n() as f64, graph.m() as f64);
    let log_term = (2.0 * m / gamma).ln();
    let (t, rule, p_prime) = match setting {
        Setting::Additive => {
            if k == 0 {
                return Err(Error::InvalidArgument("additive plan needs k >= 1".into()));
            }
            let k = k as f64;
            let t = 2.0 * m * m * n * n * log_term / (k * k * epsilon * epsilon);
            (t, IntervalRule::Additive { delta: k * epsilon / (m * n) }, None)
        }
        Setting::Multiplicative => {
            let p = p_prime.ok_or_else(|| {
                Error::InvalidArgument("multiplicative plan needs a lower bound p'".into())
            })?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidArgument(format!("p' = {p} outside (0, 1]")));
            }
            let l = (1.0 / (1.0 - epsilon)).ln();
            let t = 3.0 * log_term / p * (2.0 * n / l + 1.0).powi(2);
            (t, IntervalRule::Multiplicative { a: l / (2.0 * n + l) }, Some(p))
        }
    };
    Ok(SamplingPlan {
        setting,
        epsilon,
        gamma,
        p_prime,
        t: t.ceil() as u64,
        rule,
    })
}

#[derive(Debug, Clone)]
pub struct UniformOutcome {
    pub space: ParameterSpace,
    pub seed_set: SeedSet,
    pub observations: ObservationSet,
}

/// One-shot uniform sampling: `plan.t` draws per edge, intervals by the plan's
/// rule, then LUGreedy.
pub fn us_rim_oneshot(
    env: &mut GroundTruthEnv,
    graph: &DirectedGraph,
    k: usize,
    plan: &SamplingPlan,
    evaluator: &Evaluator,
) -> Result<UniformOutcome> {
    check_env(env, graph)?;
    let mut observations = ObservationSet::new(graph.m());
    env.sample_all(&mut observations, plan.t);
    let (lower, upper) = (0..graph.m())
        .map(|e| plan.rule.interval(observations.p_hat(e).unwrap_or(0.0)))
        .unzip();
    let space = ParameterSpace::new(lower, upper)?;
    let seed_set = lugreedy(graph, k, &space, evaluator)?.seed_set;
    Ok(UniformOutcome {
        space,
        seed_set,
        observations,
    })
}

fn check_env(env: &GroundTruthEnv, graph: &DirectedGraph) -> Result<()> {
    if env.m() != graph.m() {
        return Err(Error::LengthMismatch {
            expected: graph.m(),
            found: env.m(),
        });
    }
    Ok(())
}

/// One independent cascade from `seeds` under the hidden probabilities. Every
/// out-edge of every activated node is drawn exactly once and recorded.
pub fn cascade_with_observation(
    env: &mut GroundTruthEnv,
    graph: &DirectedGraph,
    obs: &mut ObservationSet,
    seeds: &SeedSet,
) -> Result<()> {
    check_env(env, graph)?;
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("cascade needs a nonempty seed set".into()));
    }
    let mut active = vec![false; graph.n()];
    let mut stack = Vec::new();
    for &s in seeds.nodes() {
        active[s] = true;
        stack.push(s);
    }
    // FIFO order would match a round-by-round cascade; the recorded tallies
    // are the same either way
    while let Some(u) = stack.pop() {
        for &e in graph.out_edges(u) {
            let hit = env.draw(e);
            obs.record(e, hit);
            let v = graph.target(e);
            if hit && !active[v] {
                active[v] = true;
                stack.push(v);
            }
        }
    }
    Ok(())
}

/// Settings shared by the iterative samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub k: usize,
    pub kappa: f64,
    pub gamma: f64,
    /// Sampling rounds allowed after the initial evaluation.
    pub max_iters: usize,
    pub evaluator: Evaluator,
    /// Cascades per seed set for `ᾱ`; `None` skips it.
    pub alpha_bar_cascades: Option<usize>,
    /// Record wall-clock seconds in the trace. Off keeps traces reproducible.
    pub record_timing: bool,
}

impl LoopConfig {
    fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidArgument(format!("kappa {} outside (0, 1)", self.kappa)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub avg_samples_per_edge: f64,
    pub alpha: f64,
    pub alpha_bar: Option<f64>,
    pub seed_set: SeedSet,
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `α ≥ κ` was reached.
    Threshold,
    /// The out-edge sampler's `α` stopped improving.
    Stable,
    /// The iteration budget ran out.
    Truncated,
}

#[derive(Debug, Clone)]
pub struct SamplerOutcome {
    pub space: ParameterSpace,
    pub seed_set: SeedSet,
    pub alpha: f64,
    pub trace: Vec<TraceRow>,
    pub stop: StopReason,
    pub observations: ObservationSet,
}

impl SamplerOutcome {
    pub fn truncated(&self) -> bool {
        self.stop == StopReason::Truncated
    }

    pub fn final_row(&self) -> &TraceRow {
        self.trace.last().expect("trace has at least the initial row")
    }
}

/// Stability rule for the out-edge sampler: stop once `α` has improved by less
/// than `min_improvement` over the last `window` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableStop {
    pub window: usize,
    pub min_improvement: f64,
}

impl Default for StableStop {
    fn default() -> Self {
        StableStop {
            window: 3,
            min_improvement: 0.005,
        }
    }
}

impl StableStop {
    fn is_stable(&self, trace: &[TraceRow]) -> bool {
        let len = trace.len();
        len > self.window && trace[len - 1].alpha - trace[len - 1 - self.window].alpha < self.min_improvement
    }
}

fn run_loop(
    env: &mut GroundTruthEnv,
    graph: &DirectedGraph,
    initial: &ObservationSet,
    cfg: &LoopConfig,
    stable: Option<StableStop>,
    mut sample: impl FnMut(&mut GroundTruthEnv, &mut ObservationSet, &SeedSet) -> Result<()>,
) -> Result<SamplerOutcome> {
    cfg.validate()?;
    check_env(env, graph)?;
    if initial.m() != graph.m() {
        return Err(Error::LengthMismatch {
            expected: graph.m(),
            found: initial.m(),
        });
    }
    let started = Instant::now();
    let mut obs = initial.clone();
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut best: Option<(f64, ParameterSpace, SeedSet)> = None;

    for iter in 0..=cfg.max_iters {
        let space = confidence_intervals(&obs, cfg.gamma)?;
        let evaluator = cfg.evaluator.reseeded(iter as u64);
        let lu = lugreedy(graph, cfg.k, &space, &evaluator)?;
        let gap = gap_ratio(graph, cfg.k, &space, &lu.seed_set, &lu.upper_greedy, &evaluator)?;
        let bar = match cfg.alpha_bar_cascades {
            Some(c) => Some(
                alpha_bar(
                    graph,
                    cfg.k,
                    &space,
                    &lu.seed_set,
                    c,
                    &evaluator,
                    derive_seed(evaluator.seed().unwrap_or(0), iter as u64),
                )?
                .value,
            ),
            None => None,
        };
        trace.push(TraceRow {
            iter,
            avg_samples_per_edge: obs.avg_samples_per_edge(),
            alpha: gap.alpha,
            alpha_bar: bar,
            seed_set: lu.seed_set.clone(),
            wall_seconds: cfg.record_timing.then(|| started.elapsed().as_secs_f64()),
        });

        let stop = if gap.alpha >= cfg.kappa {
            Some(StopReason::Threshold)
        } else if stable.is_some_and(|s| s.is_stable(&trace)) {
            Some(StopReason::Stable)
        } else if iter == cfg.max_iters {
            Some(StopReason::Truncated)
        } else {
            None
        };
        if best.as_ref().is_none_or(|(a, _, _)| gap.alpha > *a) {
            best = Some((gap.alpha, space.clone(), lu.seed_set.clone()));
        }
        match stop {
            Some(StopReason::Truncated) => {
                let (alpha, space, seed_set) = best.expect("at least one iteration ran");
                return Ok(SamplerOutcome {
                    space,
                    seed_set,
                    alpha,
                    trace,
                    stop: StopReason::Truncated,
                    observations: obs,
                });
            }
            Some(reason) => {
                return Ok(SamplerOutcome {
                    space,
                    seed_set: lu.seed_set,
                    alpha: gap.alpha,
                    trace,
                    stop: reason,
                    observations: obs,
                })
            }
            None => sample(env, &mut obs, &lu.seed_set)?,
        }
    }
    unreachable!("the last iteration always stops")
}

/// Iterative uniform sampling: each round draws every edge `tau1` more times.
pub fn us_rim_iterative(
    env: &mut GroundTruthEnv,
    graph: &DirectedGraph,
    initial: &ObservationSet,
    tau1: u64,
    cfg: &LoopConfig,
) -> Result<SamplerOutcome> {
    if tau1 == 0 {
        return Err(Error::InvalidArgument("tau1 must be at least 1".into()));
    }
    run_loop(env, graph, initial, cfg, None, |env, obs, _| {
        env.sample_all(obs, tau1);
        Ok(())
    })
}

/// Information cascade sampling: each round runs `tau` cascades from the
/// current LUGreedy set.
pub fn ics_rim(
    env: &mut GroundTruthEnv,
    graph: &DirectedGraph,
    initial: &ObservationSet,
    tau: usize,
    cfg: &LoopConfig,
) -> Result<SamplerOutcome> {
    if tau == 0 {
        return Err(Error::InvalidArgument("tau must be at least 1".into()));
    }
    run_loop(env, graph, initial, cfg, None, |env, obs, seeds| {
        for _ in 0..tau {
            cascade_with_observation(env, graph, obs, seeds)?;
        }
        Ok(())
    })
}

/// Out-edge sampling: each round draws every out-edge of the current LUGreedy
/// set `tau_edges` times. Stops on `α ≥ κ`, on stability, or on budget.
pub fn oes_rim(
    env: &mut GroundTruthEnv,
    graph: &DirectedGraph,
    initial: &ObservationSet,
    tau_edges: u64,
    cfg: &LoopConfig,
    stable: StableStop,
) -> Result<SamplerOutcome> {
    if tau_edges == 0 {
        return Err(Error::InvalidArgument("tau_edges must be at least 1".into()));
    }
    run_loop(env, graph, initial, cfg, Some(stable), |env, obs, seeds| {
        for &v in seeds.nodes() {
            for &e in graph.out_edges(v) {
                for _ in 0..tau_edges {
                    let x = env.draw(e);
                    obs.record(e, x);
                }
            }
        }
        Ok(())
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes a trace as CSV with columns
/// `iter,avg_samples_per_edge,alpha,alpha_bar,seed_set,wall_seconds`.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iter",
        "avg_samples_per_edge",
        "alpha",
        "alpha_bar",
        "seed_set",
        "wall_seconds",
    ])?;
    for row in trace {
        w.write_record([
            row.iter.to_string(),
            row.avg_samples_per_edge.to_string(),
            row.alpha.to_string(),
            fmt_opt(row.alpha_bar),
            row.seed_set.joined(),
            fmt_opt(row.wall_seconds),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<trace>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_star_forest;

    fn chain() -> DirectedGraph {
        DirectedGraph::new(3, vec![(0, 1), (1, 2)]).unwrap()
    }

    fn cfg(k: usize) -> LoopConfig {
        LoopConfig {
            k,
            kappa: 0.8,
            gamma: 0.1,
            max_iters: 5,
            evaluator: Evaluator::Exact,
            alpha_bar_cascades: None,
            record_timing: false,
        }
    }

    #[test]
    fn unsampled_edges_get_unit_interval() {
        let space = confidence_intervals(&ObservationSet::new(3), 0.1).unwrap();
        assert!((0..3).all(|e| space.lower(e) == 0.0 && space.upper(e) == 1.0));
        assert!(confidence_intervals(&ObservationSet::new(3), 1.0).is_err());
    }

    #[test]
    fn intervals_from_formula() {
        // c = sqrt(3 ln 10 / 300)
        let obs = ObservationSet::from_counts(vec![300], vec![150]).unwrap();
        let space = confidence_intervals(&obs, 0.2).unwrap();
        assert!((space.lower(0) - 0.403_599).abs() < 1e-5, "{}", space.lower(0));
        assert!((space.upper(0) - 0.619_427).abs() < 1e-5, "{}", space.upper(0));
    }

    #[test]
    fn doubling_trials_narrows_interval() {
        let a = ObservationSet::from_counts(vec![100], vec![30]).unwrap();
        let b = ObservationSet::from_counts(vec![200], vec![60]).unwrap();
        let wa = confidence_intervals(&a, 0.1).unwrap().width(0);
        let wb = confidence_intervals(&b, 0.1).unwrap().width(0);
        assert!(wb < wa);
    }

    #[test]
    fn observation_merge_and_validation() {
        let a = ObservationSet::from_counts(vec![3, 0], vec![1, 0]).unwrap();
        let b = ObservationSet::from_counts(vec![2, 5], vec![2, 4]).unwrap();
        let c = a.merge(&b).unwrap();
        assert_eq!((c.trials(0), c.successes(0), c.trials(1)), (5, 3, 5));
        assert!(ObservationSet::from_counts(vec![1], vec![2]).is_err());
        assert!(a.merge(&ObservationSet::new(3)).is_err());
    }

    #[test]
    fn additive_plan_count() {
        let g = DirectedGraph::new(10, (0..20).map(|i| (i % 10, (i + 1 + i / 10) % 10)).collect()).unwrap();
        assert_eq!(g.m(), 20);
        let plan = plan_uniform(&g, 2, 0.5, 0.1, Setting::Additive, None).unwrap();
        assert_eq!(plan.t, 479_318);
        assert_eq!(plan.rule, IntervalRule::Additive { delta: 2.0 * 0.5 / 200.0 });
    }

    #[test]
    fn multiplicative_plan() {
        let g = chain();
        assert!(plan_uniform(&g, 1, 0.5, 0.1, Setting::Multiplicative, None).is_err());
        let plan = plan_uniform(&g, 1, 0.5, 0.1, Setting::Multiplicative, Some(0.2)).unwrap();
        let l = 2f64.ln();
        let want = 3.0 * 40f64.ln() / 0.2 * (6.0 / l + 1.0).powi(2);
        assert_eq!(plan.t, want.ceil() as u64);
        // near ε = 1 the count approaches 3 ln(2m/γ) / p'
        let plan = plan_uniform(&g, 1, 1.0 - 1e-12, 0.1, Setting::Multiplicative, Some(0.2)).unwrap();
        let limit = 3.0 * 40f64.ln() / 0.2;
        assert!((plan.t as f64 - limit) / limit < 0.5);
        if let IntervalRule::Multiplicative { a } = plan.rule {
            let (lo, hi) = IntervalRule::Multiplicative { a }.interval(0.2);
            assert!(hi / lo <= 1.0 + (1e12f64).ln() / 3.0 + 1e-9);
        }
    }

    #[test]
    fn oneshot_with_certain_edges() {
        let g = chain();
        let mut env = GroundTruthEnv::new(ParameterVector::constant(2, 1.0).unwrap(), 3);
        let plan = SamplingPlan {
            setting: Setting::Additive,
            epsilon: 0.5,
            gamma: 0.1,
            p_prime: None,
            t: 50,
            rule: IntervalRule::Additive { delta: 0.05 },
        };
        let out = us_rim_oneshot(&mut env, &g, 1, &plan, &Evaluator::Exact).unwrap();
        assert!((0..2).all(|e| out.space.upper(e) == 1.0 && out.observations.p_hat(e) == Some(1.0)));
        assert_eq!(out.seed_set.nodes(), &[0]);
        assert_eq!(env.total_draws(), 100);
    }

    #[test]
    fn cascade_observation_cases() {
        let g = chain();
        let s = SeedSet::new(vec![0], 3).unwrap();
        let mut env = GroundTruthEnv::new(ParameterVector::constant(2, 1.0).unwrap(), 1);
        let mut obs = ObservationSet::new(2);
        cascade_with_observation(&mut env, &g, &mut obs, &s).unwrap();
        assert_eq!((obs.trials(0), obs.successes(0), obs.trials(1), obs.successes(1)), (1, 1, 1, 1));

        let mut env = GroundTruthEnv::new(ParameterVector::constant(2, 0.0).unwrap(), 1);
        let mut obs = ObservationSet::new(2);
        cascade_with_observation(&mut env, &g, &mut obs, &s).unwrap();
        assert_eq!((obs.trials(0), obs.successes(0), obs.trials(1)), (1, 0, 0));
        assert!(cascade_with_observation(&mut env, &g, &mut obs, &SeedSet::empty()).is_err());
    }

    #[test]
    fn uniform_trace_steps_by_tau() {
        let g = chain();
        let mut env = GroundTruthEnv::new(ParameterVector::new(vec![0.5, 0.5]).unwrap(), 4);
        let mut c = cfg(1);
        c.kappa = 0.99;
        let out = us_rim_iterative(&mut env, &g, &ObservationSet::new(2), 40, &c).unwrap();
        for (i, row) in out.trace.iter().enumerate() {
            assert_eq!(row.iter, i);
            assert_eq!(row.avg_samples_per_edge, 40.0 * i as f64);
        }
        assert_eq!(out.trace.len(), 6);
        assert!(out.truncated());
    }

    #[test]
    fn point_like_prior_stops_immediately() {
        let g = chain();
        let mut env = GroundTruthEnv::new(ParameterVector::new(vec![0.5, 0.5]).unwrap(), 4);
        let initial = ObservationSet::from_counts(vec![1 << 40; 2], vec![1 << 39; 2]).unwrap();
        let out = ics_rim(&mut env, &g, &initial, 10, &cfg(1)).unwrap();
        assert_eq!(out.stop, StopReason::Threshold);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(env.total_draws(), 0);
    }

    #[test]
    fn uniform_sampling_converges_on_tiny_graph() {
        let g = chain();
        let mut env = GroundTruthEnv::new(ParameterVector::new(vec![0.5, 0.5]).unwrap(), 8);
        let mut c = cfg(1);
        c.max_iters = 50;
        let out = us_rim_iterative(&mut env, &g, &ObservationSet::new(2), 200, &c).unwrap();
        assert_eq!(out.stop, StopReason::Threshold);
        assert!(out.alpha >= 0.8);
    }

    #[test]
    fn out_edge_sampler_leaves_other_star_unsampled() {
        let (g, _) = gen_star_forest(1, 2, 0.3, 0.3).unwrap();
        let truth = ParameterVector::constant(g.m(), 0.3).unwrap();
        let mut env = GroundTruthEnv::new(truth, 2);
        let mut c = cfg(1);
        c.max_iters = 12;
        let out = oes_rim(&mut env, &g, &ObservationSet::new(g.m()), 100, &c, StableStop::default()).unwrap();
        let sampled: Vec<bool> = (0..g.m()).map(|e| out.observations.trials(e) > 0).collect();
        assert_eq!(sampled, vec![true, true, false, false]);
        assert!(out.alpha < 0.8);
        assert_ne!(out.stop, StopReason::Threshold);
    }

    #[test]
    fn stability_rule() {
        let row = |alpha| TraceRow {
            iter: 0,
            avg_samples_per_edge: 0.0,
            alpha,
            alpha_bar: None,
            seed_set: SeedSet::empty(),
            wall_seconds: None,
        };
        let s = StableStop::default();
        assert!(!s.is_stable(&[row(0.1), row(0.2), row(0.3)]));
        assert!(!s.is_stable(&[row(0.1), row(0.2), row(0.3), row(0.4)]));
        assert!(s.is_stable(&[row(0.1), row(0.4), row(0.401), row(0.402), row(0.403)]));
    }

    #[test]
    fn trace_csv_layout() {
        let trace = vec![TraceRow {
            iter: 0,
            avg_samples_per_edge: 318.0,
            alpha: 0.5,
            alpha_bar: None,
            seed_set: SeedSet::new(vec![4, 0], 5).unwrap(),
            wall_seconds: None,
        }];
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "iter,avg_samples_per_edge,alpha,alpha_bar,seed_set,wall_seconds\n0,318,0.5,,0;4,\n"
        );
    }
}
