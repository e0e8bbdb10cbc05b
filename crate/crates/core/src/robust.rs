//! Robust seed selection over an interval parameter space.
//!
//! [`lugreedy`] runs greedy at both corners `θ⁻` and `θ⁺` of the box and keeps
//! whichever set spreads more under `θ⁻`. The gap ratio
//! `α(Θ) = σ_{θ⁻}(S_LU) / σ_{θ⁺}(S_g(θ⁺))` then certifies the robust ratio
//! from below: `g(Θ, S_LU) ≥ α(Θ)·(1 − 1/e)`. [`alpha_bar`] gives a heuristic
//! bound from above, and [`robust_ratio_exact`] computes `g` itself on small
//! instances.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, ParameterSpace, ParameterVector, SeedSet};
use crate::maximize::{greedy, greedy_excluding, Evaluation, Evaluator};
use crate::spread::{cascade_edge_counts, exact_spread};

/// `1 - 1/e`, the greedy approximation factor.
pub const GREEDY_FACTOR: f64 = 1.0 - 1.0 / std::f64::consts::E;

/// Default number of cascades per seed set in the `ᾱ` heuristics.
pub const DEFAULT_NUM_CASCADES: usize = 200;

/// Edge-count limit of [`robust_ratio_exact`].
pub const MAX_ROBUST_EDGES: usize = 12;

/// Subset-count limit of [`robust_ratio_exact`].
pub const MAX_ROBUST_SUBSETS: u128 = 10_000;

/// Share of cascades in which an edge must be sampled to be pushed to its
/// lower end by the second `ᾱ` heuristic.
pub const FREQUENT_EDGE_SHARE: f64 = 0.1;

// stream tags for the independent evaluations inside one certificate
const TAG_COMPARE: u64 = 1;
const TAG_NUMERATOR: u64 = 2;
const TAG_DENOMINATOR: u64 = 3;
const TAG_HEURISTIC: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LuGreedy {
    /// The selected set `S_LU`.
    pub seed_set: SeedSet,
    /// Greedy at `θ⁻`.
    pub lower_greedy: SeedSet,
    /// Greedy at `θ⁺`; the denominator set of `α`.
    pub upper_greedy: SeedSet,
}

/// Greedy at `θ⁻` and at `θ⁺`, keeping the set with the larger spread under
/// `θ⁻`. Ties go to the `θ⁺` set.
pub fn lugreedy(
    graph: &DirectedGraph,
    k: usize,
    space: &ParameterSpace,
    evaluator: &Evaluator,
) -> Result<LuGreedy> {
    space.check_for(graph)?;
    let theta_minus = space.theta_minus();
    let lower_greedy = greedy(graph, k, &theta_minus, evaluator)?;
    let upper_greedy = if space.is_point() {
        lower_greedy.clone()
    } else {
        greedy(graph, k, &space.theta_plus(), evaluator)?
    };
    let seed_set = if lower_greedy == upper_greedy {
        upper_greedy.clone()
    } else {
        // both candidates are scored on the same streams
        let compare = evaluator.reseeded(TAG_COMPARE);
        let lower_value = compare.spread(graph, &theta_minus, &lower_greedy)?;
        let upper_value = compare.spread(graph, &theta_minus, &upper_greedy)?;
        if lower_value > upper_value {
            lower_greedy.clone()
        } else {
            upper_greedy.clone()
        }
    };
    Ok(LuGreedy {
        seed_set,
        lower_greedy,
        upper_greedy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRatio {
    pub alpha: f64,
    /// `σ_{θ⁻}(S_LU)`
    pub numerator: Evaluation,
    /// `σ_{θ⁺}(S_g(θ⁺))`
    pub denominator: Evaluation,
    /// Standard error of `alpha` by first-order propagation (zero when exact).
    pub std_error: f64,
}

impl GapRatio {
    /// `α·(1 − 1/e)`, the certified lower bound on the robust ratio.
    pub fn lower_bound(&self) -> f64 {
        self.alpha * GREEDY_FACTOR
    }

    /// `α − 2·SE`, for use when the estimate should err low.
    pub fn conservative_alpha(&self) -> f64 {
        (self.alpha - 2.0 * self.std_error).max(0.0)
    }
}

/// `α(Θ) = σ_{θ⁻}(S_LU) / σ_{θ⁺}(S_plus)`. Under Monte Carlo the numerator
/// and denominator use independent stream families.
pub fn gap_ratio(
    graph: &DirectedGraph,
    k: usize,
    space: &ParameterSpace,
    s_lu: &SeedSet,
    s_plus_greedy: &SeedSet,
    evaluator: &Evaluator,
) -> Result<GapRatio> {
    space.check_for(graph)?;
    if k == 0 {
        return Err(Error::InvalidArgument("gap ratio needs k >= 1".into()));
    }
    for s in [s_lu, s_plus_greedy] {
        if s.len() != k {
            return Err(Error::InvalidArgument(format!(
                "seed set {s} has size {} but k = {k}",
                s.len()
            )));
        }
    }
    let numerator = evaluator
        .reseeded(TAG_NUMERATOR)
        .evaluate(graph, &space.theta_minus(), s_lu)?;
    let denominator = evaluator
        .reseeded(TAG_DENOMINATOR)
        .evaluate(graph, &space.theta_plus(), s_plus_greedy)?;
    let alpha = numerator.value / denominator.value;
    let rel_num = numerator.std_error / numerator.value;
    let rel_den = denominator.std_error / denominator.value;
    Ok(GapRatio {
        alpha,
        numerator,
        denominator,
        std_error: alpha * (rel_num * rel_num + rel_den * rel_den).sqrt(),
    })
}

fn subset_count(n: usize, k: usize) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i as u128 + 1);
        if acc > MAX_ROBUST_SUBSETS * 1_000 {
            return u128::MAX;
        }
    }
    acc
}

/// Exact robust ratio `g(Θ, S) = min_{θ∈Θ} σ_θ(S) / max_{|T|=k} σ_θ(T)`.
///
/// For a fixed pair `(S, T)` both spreads are multilinear in the edge
/// probabilities, so their ratio is monotone in each coordinate and its minimum
/// over the box sits at a corner. Taking the minimum over corners and over `T`
/// in either order gives `g`.
pub fn robust_ratio_exact(
    graph: &DirectedGraph,
    k: usize,
    space: &ParameterSpace,
    seeds: &SeedSet,
) -> Result<f64> {
    space.check_for(graph)?;
    if graph.m() > MAX_ROBUST_EDGES {
        return Err(Error::ExactEdgeGuard {
            edges: graph.m(),
            limit: MAX_ROBUST_EDGES,
        });
    }
    if seeds.len() != k || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "seed set {seeds} must be nonempty with size k = {k}"
        )));
    }
    let count = subset_count(graph.n(), k);
    if count > MAX_ROBUST_SUBSETS {
        return Err(Error::SubsetGuard {
            count,
            limit: MAX_ROBUST_SUBSETS,
        });
    }
    let subsets: Vec<SeedSet> = (0..graph.n())
        .combinations(k)
        .map(|t| SeedSet::new(t, graph.n()))
        .collect::<Result<_>>()?;
    let free: Vec<usize> = (0..graph.m()).filter(|&e| space.width(e) > 0.0).collect();
    let corners = 1u64 << free.len();

    let ratios: Vec<f64> = (0..corners)
        .into_par_iter()
        .map(|mask| {
            let theta = corner(space, &free, mask);
            let own = exact_spread(graph, &theta, seeds)?;
            let mut best = own;
            for t in &subsets {
                best = best.max(exact_spread(graph, &theta, t)?);
            }
            Ok(own / best)
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(f64::INFINITY, f64::min))
}

/// Corner of `space` with free edge `free[i]` at its lower end iff bit `i` of
/// `mask` is set.
fn corner(space: &ParameterSpace, free: &[usize], mask: u64) -> ParameterVector {
    let mut lower = vec![false; space.m()];
    for (i, &e) in free.iter().enumerate() {
        lower[e] = mask >> i & 1 == 1;
    }
    space.corner(|e| lower[e])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicBound {
    /// `σ_θ(S_LU) / σ_θ(S_g(θ))` at the constructed corner `θ`.
    pub ratio: f64,
    /// Greedy set at the constructed corner.
    pub greedy_set: SeedSet,
    /// Number of edges placed at their lower end.
    pub edges_at_lower: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBar {
    pub value: f64,
    /// Competing-seed-set heuristic.
    pub competitor: HeuristicBound,
    /// Frequently-sampled-edge heuristic.
    pub frequent: HeuristicBound,
    /// The competing seed set found with `S_LU` removed.
    pub competitor_set: SeedSet,
}

/// Heuristic upper bound `ᾱ(Θ) ≥ g(Θ, S_LU)`.
///
/// Any `θ ∈ Θ` gives `σ_θ(S_LU) / σ_θ(S_g(θ)) ≥ g(Θ, S_LU)`. Two adversarial
/// corners are tried and the smaller ratio is returned:
///
/// * competitor: greedy on the graph without `S_LU` yields `S'`; cascades from
///   `S_LU` and from `S'` are run under the interval midpoints, and every edge
///   sampled strictly more often from `S_LU` goes to `l_e`, the rest to `r_e`;
/// * frequent: every edge sampled in at least 10% of the cascades from `S_LU`
///   goes to `l_e`, the rest to `r_e`.
pub fn alpha_bar(
    graph: &DirectedGraph,
    k: usize,
    space: &ParameterSpace,
    s_lu: &SeedSet,
    num_cascades: usize,
    evaluator: &Evaluator,
    seed: u64,
) -> Result<AlphaBar> {
    space.check_for(graph)?;
    if s_lu.len() != k || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "seed set {s_lu} must be nonempty with size k = {k}"
        )));
    }
    if num_cascades == 0 {
        return Err(Error::InvalidArgument("num_cascades must be at least 1".into()));
    }
    let midpoint = space.midpoint();
    let competitor_set = greedy_excluding(graph, k, &midpoint, evaluator, s_lu)?;
    let lu_counts = cascade_edge_counts(graph, &midpoint, s_lu, num_cascades, seed)?;
    let rival_counts = cascade_edge_counts(
        graph,
        &midpoint,
        &competitor_set,
        num_cascades,
        crate::stream::derive_seed(seed, 1),
    )?;

    let competitor_lower: Vec<bool> = lu_counts
        .iter()
        .zip(&rival_counts)
        .map(|(a, b)| a > b)
        .collect();
    let threshold = FREQUENT_EDGE_SHARE * num_cascades as f64;
    let frequent_lower: Vec<bool> = lu_counts.iter().map(|&c| c as f64 >= threshold).collect();

    let heuristic = evaluator.reseeded(TAG_HEURISTIC);
    let competitor = corner_bound(graph, k, space, s_lu, &competitor_lower, &heuristic)?;
    let frequent = corner_bound(graph, k, space, s_lu, &frequent_lower, &heuristic)?;
    Ok(AlphaBar {
        value: competitor.ratio.min(frequent.ratio),
        competitor,
        frequent,
        competitor_set,
    })
}

fn corner_bound(
    graph: &DirectedGraph,
    k: usize,
    space: &ParameterSpace,
    s_lu: &SeedSet,
    at_lower: &[bool],
    evaluator: &Evaluator,
) -> Result<HeuristicBound> {
    let theta = space.corner(|e| at_lower[e]);
    let greedy_set = greedy(graph, k, &theta, evaluator)?;
    let ratio = evaluator.spread(graph, &theta, s_lu)? / evaluator.spread(graph, &theta, &greedy_set)?;
    Ok(HeuristicBound {
        ratio,
        greedy_set,
        edges_at_lower: at_lower.iter().filter(|&&l| l).count(),
    })
}

/// Estimator metadata carried by a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorMeta {
    pub kind: String,
    pub num_sims: Option<usize>,
    pub seed: Option<u64>,
    pub alpha_std_error: f64,
    pub conservative_alpha: f64,
    pub num_cascades: usize,
    pub cascade_theta: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustCertificate {
    pub seed_set: SeedSet,
    pub alpha: f64,
    pub lower_bound: f64,
    pub alpha_bar: f64,
    pub estimator: EstimatorMeta,
}

/// LUGreedy, its gap ratio and `ᾱ` in one record.
pub fn certify(
    graph: &DirectedGraph,
    k: usize,
    space: &ParameterSpace,
    evaluator: &Evaluator,
    num_cascades: usize,
    seed: u64,
) -> Result<RobustCertificate> {
    let lu = lugreedy(graph, k, space, evaluator)?;
    let gap = gap_ratio(graph, k, space, &lu.seed_set, &lu.upper_greedy, evaluator)?;
    let bar = alpha_bar(graph, k, space, &lu.seed_set, num_cascades, evaluator, seed)?;
    Ok(RobustCertificate {
        seed_set: lu.seed_set,
        alpha: gap.alpha,
        lower_bound: gap.lower_bound(),
        alpha_bar: bar.value,
        estimator: EstimatorMeta {
            kind: if evaluator.is_exact() { "exact" } else { "monte_carlo" }.into(),
            num_sims: evaluator.num_sims(),
            seed: evaluator.seed(),
            alpha_std_error: gap.std_error,
            conservative_alpha: gap.conservative_alpha(),
            num_cascades,
            cascade_theta: "midpoint".into(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_star_forest, star_center};

    const EIGHT_SEVENTEENTHS: f64 = 8.0 / 17.0;

    fn two_pair_forest() -> (DirectedGraph, ParameterSpace) {
        gen_star_forest(2, 3, 0.2, 0.8).unwrap()
    }

    #[test]
    fn star_forest_lugreedy_and_alpha() {
        let (g, space) = two_pair_forest();
        let lu = lugreedy(&g, 2, &space, &Evaluator::Exact).unwrap();
        assert_eq!(lu.seed_set.nodes(), &[star_center(0, 3), star_center(1, 3)]);
        let gap = gap_ratio(&g, 2, &space, &lu.seed_set, &lu.upper_greedy, &Evaluator::Exact).unwrap();
        assert!((gap.alpha - EIGHT_SEVENTEENTHS).abs() < 1e-12);
        assert_eq!(gap.std_error, 0.0);
        assert!((gap.lower_bound() - EIGHT_SEVENTEENTHS * GREEDY_FACTOR).abs() < 1e-12);
    }

    #[test]
    fn point_space_alpha_is_one() {
        let (g, _) = two_pair_forest();
        let theta = ParameterVector::constant(g.m(), 0.4).unwrap();
        let space = ParameterSpace::point(&theta);
        let lu = lugreedy(&g, 2, &space, &Evaluator::Exact).unwrap();
        assert_eq!(lu.seed_set, greedy(&g, 2, &theta, &Evaluator::Exact).unwrap());
        let gap = gap_ratio(&g, 2, &space, &lu.seed_set, &lu.upper_greedy, &Evaluator::Exact).unwrap();
        assert_eq!(gap.alpha, 1.0);
    }

    #[test]
    fn zero_lower_corner_ties_to_upper_set() {
        // under θ⁻ ≡ 0 every set spreads exactly k
        let g = DirectedGraph::new(3, vec![(1, 0), (1, 2)]).unwrap();
        let space = ParameterSpace::uniform(2, 0.0, 0.5).unwrap();
        let lu = lugreedy(&g, 1, &space, &Evaluator::Exact).unwrap();
        assert_eq!(lu.lower_greedy.nodes(), &[0]);
        assert_eq!(lu.upper_greedy.nodes(), &[1]);
        assert_eq!(lu.seed_set, lu.upper_greedy);
        let lu = lugreedy(&g, 1, &space, &Evaluator::monte_carlo(500, 3)).unwrap();
        assert_eq!(lu.seed_set, lu.upper_greedy);
    }

    #[test]
    fn single_edge_full_interval() {
        let g = DirectedGraph::new(2, vec![(0, 1)]).unwrap();
        let space = ParameterSpace::uniform(1, 0.0, 1.0).unwrap();
        let lu = lugreedy(&g, 1, &space, &Evaluator::Exact).unwrap();
        assert_eq!(lu.seed_set.nodes(), &[0]);
        let gap = gap_ratio(&g, 1, &space, &lu.seed_set, &lu.upper_greedy, &Evaluator::Exact).unwrap();
        assert!((gap.alpha - 0.5).abs() < 1e-12);
        let sink = SeedSet::new(vec![1], 2).unwrap();
        let g_sink = robust_ratio_exact(&g, 1, &space, &sink).unwrap();
        assert!((g_sink - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gap_ratio_rejects_bad_sizes() {
        let (g, space) = two_pair_forest();
        let s = SeedSet::new(vec![0], g.n()).unwrap();
        assert!(gap_ratio(&g, 0, &space, &s, &s, &Evaluator::Exact).is_err());
        assert!(gap_ratio(&g, 2, &space, &s, &s, &Evaluator::Exact).is_err());
    }

    #[test]
    fn robust_ratio_small_star_forest() {
        let (g, space) = gen_star_forest(1, 2, 0.2, 0.8).unwrap();
        let s = SeedSet::new(vec![0], g.n()).unwrap();
        let r = robust_ratio_exact(&g, 1, &space, &s).unwrap();
        assert!((r - 1.4 / 2.6).abs() < 1e-12, "{r}");
    }

    #[test]
    fn robust_ratio_point_space_matches_optimum() {
        let g = DirectedGraph::new(4, vec![(0, 1), (1, 2), (3, 2), (3, 0)]).unwrap();
        let theta = ParameterVector::new(vec![0.5, 0.4, 0.3, 0.6]).unwrap();
        let space = ParameterSpace::point(&theta);
        let s = SeedSet::new(vec![1], 4).unwrap();
        let (_, opt) = crate::maximize::exact_optimal(&g, 1, &theta).unwrap();
        let want = exact_spread(&g, &theta, &s).unwrap() / opt;
        assert!((robust_ratio_exact(&g, 1, &space, &s).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn robust_ratio_guards() {
        let (g, space) = gen_star_forest(1, 7, 0.2, 0.8).unwrap();
        let s = SeedSet::new(vec![0], g.n()).unwrap();
        assert!(matches!(
            robust_ratio_exact(&g, 1, &space, &s),
            Err(Error::ExactEdgeGuard { edges: 14, .. })
        ));
        let many = DirectedGraph::new(200, vec![(0, 1)]).unwrap();
        let sp = ParameterSpace::uniform(1, 0.1, 0.2).unwrap();
        let s = SeedSet::new(vec![0, 1], 200).unwrap();
        assert!(matches!(
            robust_ratio_exact(&many, 2, &sp, &s),
            Err(Error::SubsetGuard { .. })
        ));
    }

    #[test]
    fn alpha_bar_tight_on_star_forest() {
        let (g, space) = two_pair_forest();
        let lu = lugreedy(&g, 2, &space, &Evaluator::Exact).unwrap();
        let bar = alpha_bar(&g, 2, &space, &lu.seed_set, DEFAULT_NUM_CASCADES, &Evaluator::Exact, 1).unwrap();
        assert_eq!(
            bar.competitor_set.nodes(),
            &[star_center(2, 3), star_center(3, 3)]
        );
        assert!((bar.competitor.ratio - EIGHT_SEVENTEENTHS).abs() < 1e-12);
        assert!((bar.value - EIGHT_SEVENTEENTHS).abs() < 1e-12);
    }

    #[test]
    fn alpha_bar_point_space_is_one() {
        let (g, _) = two_pair_forest();
        let theta = ParameterVector::constant(g.m(), 0.5).unwrap();
        let space = ParameterSpace::point(&theta);
        let lu = lugreedy(&g, 2, &space, &Evaluator::Exact).unwrap();
        let bar = alpha_bar(&g, 2, &space, &lu.seed_set, 50, &Evaluator::Exact, 2).unwrap();
        assert!((bar.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn certificate_serializes_expected_fields() {
        let (g, space) = two_pair_forest();
        let cert = certify(&g, 2, &space, &Evaluator::Exact, 50, 7).unwrap();
        let json: serde_json::Value = serde_json::to_value(&cert).unwrap();
        for field in ["seed_set", "alpha", "lower_bound", "alpha_bar", "estimator"] {
            assert!(json.get(field).is_some(), "missing {field}");
        }
        assert_eq!(json["estimator"]["kind"], "exact");
        assert_eq!(json["seed_set"], serde_json::json!([0, 4]));
    }
}
