//! Directed graphs, per-edge parameter vectors and interval spaces, seed sets,
//! fixture generators, and the tab-separated file formats used by the CLI.
//!
//! Edge ids are dense (`0..m`) and follow file or construction order. They are
//! the only join key between a graph, a [`ParameterVector`], a
//! [`ParameterSpace`] and an observation set.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::stream_rng;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    out_adj: Vec<Vec<EdgeId>>,
}

impl DirectedGraph {
    /// Builds a graph, rejecting self-loops, duplicate edges and endpoints `>= n`.
    pub fn new(n: usize, edges: Vec<(NodeId, NodeId)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            let line = i + 1;
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { line, node: u });
            }
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge {
                    line,
                    source_node: u,
                    target: v,
                });
            }
        }
        let mut out_adj = vec![Vec::new(); n];
        for (e, &(u, _)) in edges.iter().enumerate() {
            out_adj[u].push(e);
        }
        Ok(DirectedGraph { n, edges, out_adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> (NodeId, NodeId) {
        self.edges[e]
    }

    #[inline]
    pub fn target(&self, e: EdgeId) -> NodeId {
        self.edges[e].1
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    #[inline]
    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_adj[v]
    }

    /// Edges whose source is reachable from `seeds` when every edge is live.
    /// These are the only edges that can influence the reachable set of `seeds`.
    pub fn edges_reachable_from(&self, seeds: &[NodeId]) -> Vec<EdgeId> {
        let mut visited = vec![false; self.n];
        let mut stack: Vec<NodeId> = Vec::new();
        for &s in seeds {
            if !visited[s] {
                visited[s] = true;
                stack.push(s);
            }
        }
        let mut out = Vec::new();
        while let Some(u) = stack.pop() {
            for &e in &self.out_adj[u] {
                out.push(e);
                let v = self.edges[e].1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push(v);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// One influence probability per edge, indexed by edge id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        for (edge, &value) in p.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { edge, value });
            }
        }
        Ok(ParameterVector(p))
    }

    pub fn constant(m: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, e: EdgeId) -> f64 {
        self.0[e]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn check_for(&self, graph: &DirectedGraph) -> Result<()> {
        if self.len() != graph.m() {
            return Err(Error::LengthMismatch {
                expected: graph.m(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// A box of per-edge probability intervals `[l_e, r_e]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParameterSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::LengthMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (edge, (&l, &r)) in lower.iter().zip(&upper).enumerate() {
            if !(0.0 <= l && l <= r && r <= 1.0) {
                return Err(Error::InvalidInterval {
                    edge,
                    lower: l,
                    upper: r,
                });
            }
        }
        Ok(ParameterSpace { lower, upper })
    }

    pub fn point(theta: &ParameterVector) -> Self {
        ParameterSpace {
            lower: theta.0.clone(),
            upper: theta.0.clone(),
        }
    }

    pub fn uniform(m: usize, l: f64, r: f64) -> Result<Self> {
        Self::new(vec![l; m], vec![r; m])
    }

    /// `[p_e - width/2, p_e + width/2]` clamped into `[0, 1]`.
    pub fn around(theta: &ParameterVector, width: f64) -> Result<Self> {
        if !(width >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative width {width}")));
        }
        let half = width / 2.0;
        let lower = theta.0.iter().map(|p| (p - half).max(0.0)).collect();
        let upper = theta.0.iter().map(|p| (p + half).min(1.0)).collect();
        Self::new(lower, upper)
    }

    pub fn m(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self, e: EdgeId) -> f64 {
        self.lower[e]
    }

    pub fn upper(&self, e: EdgeId) -> f64 {
        self.upper[e]
    }

    pub fn theta_minus(&self) -> ParameterVector {
        ParameterVector(self.lower.clone())
    }

    pub fn theta_plus(&self) -> ParameterVector {
        ParameterVector(self.upper.clone())
    }

    pub fn midpoint(&self) -> ParameterVector {
        ParameterVector(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(l, r)| 0.5 * (l + r))
                .collect(),
        )
    }

    pub fn contains(&self, theta: &ParameterVector) -> bool {
        theta.len() == self.m()
            && theta
                .0
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(p, (l, r))| l <= p && p <= r)
    }

    pub fn is_subset_of(&self, other: &ParameterSpace) -> bool {
        self.m() == other.m()
            && (0..self.m())
                .all(|e| other.lower[e] <= self.lower[e] && self.upper[e] <= other.upper[e])
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self, e: EdgeId) -> f64 {
        self.upper[e] - self.lower[e]
    }

    pub fn check_for(&self, graph: &DirectedGraph) -> Result<()> {
        if self.m() != graph.m() {
            return Err(Error::LengthMismatch {
                expected: graph.m(),
                found: self.m(),
            });
        }
        Ok(())
    }

    /// The vector taking `l_e` where `at_lower[e]` holds and `r_e` elsewhere.
    pub fn corner(&self, at_lower: impl Fn(EdgeId) -> bool) -> ParameterVector {
        ParameterVector(
            (0..self.m())
                .map(|e| if at_lower(e) { self.lower[e] } else { self.upper[e] })
                .collect(),
        )
    }
}

/// A set of seed nodes kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedSet(Vec<NodeId>);

impl SeedSet {
    pub fn new(mut nodes: Vec<NodeId>, n: usize) -> Result<Self> {
        nodes.sort_unstable();
        for w in nodes.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateSeed(w[0]));
            }
        }
        if let Some(&node) = nodes.last() {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        Ok(SeedSet(nodes))
    }

    pub fn empty() -> Self {
        SeedSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// A copy with `v` added.
    pub fn with(&self, v: NodeId) -> SeedSet {
        let mut nodes = self.0.clone();
        if let Err(pos) = nodes.binary_search(&v) {
            nodes.insert(pos, v);
        }
        SeedSet(nodes)
    }

    /// Semicolon-joined node ids, as used in trace files.
    pub fn joined(&self) -> String {
        self.0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl fmt::Display for SeedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.joined())
    }
}

// ---------------------------------------------------------------------------
// Edge-list files

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// `u<TAB>v`
    EdgeList,
    /// `u<TAB>v<TAB>p`
    EdgeListWithProb,
    /// Decided by the column count of the first data line.
    Auto,
}

const NODES_HEADER: &str = "# nodes";

fn parse_node(field: &str, line: usize) -> Result<NodeId> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid node id {field:?}"),
    })
}

/// Parses an edge list. Lines starting with `#` are comments, except for an
/// optional `# nodes <n>` header that fixes the node count.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    format: EdgeListFormat,
) -> Result<(DirectedGraph, Option<ParameterVector>)> {
    let mut declared_n: Option<usize> = None;
    let mut format = format;
    let mut edges = Vec::new();
    let mut probs = Vec::new();
    let mut seen: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    let mut max_node: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(NODES_HEADER) {
            declared_n = Some(rest.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid node count header {trimmed:?}"),
            })?);
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if format == EdgeListFormat::Auto {
            format = match fields.len() {
                2 => EdgeListFormat::EdgeList,
                3 => EdgeListFormat::EdgeListWithProb,
                c => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected 2 or 3 tab-separated columns, found {c}"),
                    })
                }
            };
        }
        let expected = if format == EdgeListFormat::EdgeList { 2 } else { 3 };
        if fields.len() != expected {
            return Err(Error::Parse {
                line: lineno,
                message: format!(
                    "expected {expected} tab-separated columns, found {}",
                    fields.len()
                ),
            });
        }
        let u = parse_node(fields[0], lineno)?;
        let v = parse_node(fields[1], lineno)?;
        if u == v {
            return Err(Error::SelfLoop {
                line: lineno,
                node: u,
            });
        }
        if seen.insert((u, v), lineno).is_some() {
            return Err(Error::DuplicateEdge {
                line: lineno,
                source_node: u,
                target: v,
            });
        }
        if expected == 3 {
            let p: f64 = fields[2].trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid probability {:?}", fields[2]),
            })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange {
                    line: lineno,
                    value: p,
                });
            }
            probs.push(p);
        }
        max_node = Some(max_node.map_or(u.max(v), |m: usize| m.max(u).max(v)));
        edges.push((u, v));
    }

    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let inferred = max_node.map_or(0, |m| m + 1);
    let n = match declared_n {
        Some(d) if d < inferred => {
            return Err(Error::NodeOutOfRange {
                node: inferred - 1,
                n: d,
            })
        }
        Some(d) => d,
        None => inferred,
    };
    let graph = DirectedGraph::new(n, edges)?;
    let theta = if format == EdgeListFormat::EdgeListWithProb {
        Some(ParameterVector::new(probs)?)
    } else {
        None
    };
    Ok((graph, theta))
}

pub fn load_graph(
    path: impl AsRef<Path>,
    format: EdgeListFormat,
) -> Result<(DirectedGraph, Option<ParameterVector>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), format)
}

pub fn write_edge_list<W: Write>(
    graph: &DirectedGraph,
    theta: Option<&ParameterVector>,
    mut out: W,
) -> Result<()> {
    let io = |e| Error::io("<edge list>", e);
    writeln!(out, "{NODES_HEADER} {}", graph.n()).map_err(io)?;
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        match theta {
            Some(t) => writeln!(out, "{u}\t{v}\t{}", t.get(e)),
            None => writeln!(out, "{u}\t{v}"),
        }
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn save_graph(
    path: impl AsRef<Path>,
    graph: &DirectedGraph,
    theta: Option<&ParameterVector>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_edge_list(graph, theta, BufWriter::new(file))
}

/// Reads `u<TAB>v` pairs (extra columns ignored), keeping duplicates. Input for
/// [`weighted_cascade_probs`].
pub fn parse_raw_edges<R: BufRead>(reader: R) -> Result<Vec<(NodeId, NodeId)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: lineno,
                message: "expected at least 2 tab-separated columns".into(),
            });
        };
        out.push((parse_node(a, lineno)?, parse_node(b, lineno)?));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parameter-space files: `eid<TAB>l<TAB>r`

pub fn parse_parameter_space<R: BufRead>(reader: R, m: usize) -> Result<ParameterSpace> {
    let mut lower = vec![f64::NAN; m];
    let mut upper = vec![f64::NAN; m];
    let mut seen = vec![false; m];
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 3 tab-separated columns, found {}", fields.len()),
            });
        }
        let e: usize = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid edge id {:?}", fields[0]),
        })?;
        if e >= m {
            return Err(Error::Parse {
                line: lineno,
                message: format!("edge id {e} out of range for {m} edges"),
            });
        }
        if std::mem::replace(&mut seen[e], true) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("edge id {e} listed twice"),
            });
        }
        let parse_p = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid probability {s:?}"),
            })
        };
        let (l, r) = (parse_p(fields[1])?, parse_p(fields[2])?);
        if !(0.0 <= l && l <= r && r <= 1.0) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("invalid interval [{l}, {r}]"),
            });
        }
        lower[e] = l;
        upper[e] = r;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Parse {
            line: 0,
            message: format!("no interval for edge {missing}"),
        });
    }
    ParameterSpace::new(lower, upper)
}

pub fn load_parameter_space(path: impl AsRef<Path>, m: usize) -> Result<ParameterSpace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_parameter_space(BufReader::new(file), m)
}

pub fn write_parameter_space<W: Write>(space: &ParameterSpace, mut out: W) -> Result<()> {
    let io = |e| Error::io("<parameter space>", e);
    for e in 0..space.m() {
        writeln!(out, "{e}\t{}\t{}", space.lower(e), space.upper(e)).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn save_parameter_space(path: impl AsRef<Path>, space: &ParameterSpace) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_parameter_space(space, BufWriter::new(file))
}

// ---------------------------------------------------------------------------
// Weighted cascade and generators

/// Deduplicates a raw edge multiset and assigns weighted-cascade probabilities
/// `p_e = 1 - (1 - 1/x_u)^{y_e}` for `e = (v, u)`, where `x_u` is the in-degree
/// of `u` counting duplicates and `y_e` the multiplicity of `e`. Edge ids follow
/// first occurrence.
pub fn weighted_cascade_probs(raw: &[(NodeId, NodeId)]) -> Result<(DirectedGraph, ParameterVector)> {
    if raw.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = raw.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0) + 1;
    let mut in_degree = vec![0u64; n];
    let mut index: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut multiplicity = Vec::new();
    for (i, &(u, v)) in raw.iter().enumerate() {
        if u == v {
            return Err(Error::SelfLoop { line: i + 1, node: u });
        }
        in_degree[v] += 1;
        match index.get(&(u, v)) {
            Some(&e) => multiplicity[e] += 1,
            None => {
                index.insert((u, v), edges.len());
                edges.push((u, v));
                multiplicity.push(1u64);
            }
        }
    }
    let probs = edges
        .iter()
        .zip(&multiplicity)
        .map(|(&(_, v), &y)| 1.0 - (1.0 - 1.0 / in_degree[v] as f64).powi(y as i32))
        .collect();
    Ok((DirectedGraph::new(n, edges)?, ParameterVector::new(probs)?))
}

fn check_interval(l: f64, r: f64) -> Result<()> {
    if !(0.0 <= l && l <= r && r <= 1.0) {
        return Err(Error::InvalidArgument(format!("invalid interval [{l}, {r}]")));
    }
    Ok(())
}

/// Node id of the center of star `i` in a forest with `t` leaves per star.
pub fn star_center(i: usize, t: usize) -> NodeId {
    i * (t + 1)
}

/// `2 * k_pairs` disjoint out-stars with `t` leaves each; every edge gets the
/// interval `[l, r]`. Star `i` has center `i * (t + 1)` followed by its leaves.
pub fn gen_star_forest(
    k_pairs: usize,
    t: usize,
    l: f64,
    r: f64,
) -> Result<(DirectedGraph, ParameterSpace)> {
    if k_pairs == 0 || t == 0 {
        return Err(Error::InvalidArgument(
            "star forest needs k_pairs >= 1 and t >= 1".into(),
        ));
    }
    check_interval(l, r)?;
    let stars = 2 * k_pairs;
    let mut edges = Vec::with_capacity(stars * t);
    for i in 0..stars {
        let c = star_center(i, t);
        edges.extend((1..=t).map(|j| (c, c + j)));
    }
    let graph = DirectedGraph::new(stars * (t + 1), edges)?;
    let space = ParameterSpace::uniform(graph.m(), l, r)?;
    Ok((graph, space))
}

/// Ground truth for a star forest: `strong` stars chosen by `seed` have every
/// edge at `r`, all other stars at `l`.
pub fn star_forest_ground_truth(
    k_pairs: usize,
    t: usize,
    l: f64,
    r: f64,
    strong: usize,
    seed: u64,
) -> Result<ParameterVector> {
    let stars = 2 * k_pairs;
    if strong > stars {
        return Err(Error::InvalidArgument(format!(
            "{strong} strong stars requested but only {stars} exist"
        )));
    }
    let mut order: Vec<usize> = (0..stars).collect();
    order.shuffle(&mut stream_rng(seed, 0));
    let mut is_strong = vec![false; stars];
    for &i in &order[..strong] {
        is_strong[i] = true;
    }
    let p = (0..stars * t)
        .map(|e| if is_strong[e / t] { r } else { l })
        .collect();
    ParameterVector::new(p)
}

/// Two disjoint directed cliques of `half_size` nodes each, every edge with the
/// interval `[p_center - eps, p_center + eps]` clamped to `[0, 1]`. The seed
/// decides which node ids land in which cluster.
pub fn gen_two_cluster_er(
    half_size: usize,
    p_center: f64,
    eps: f64,
    seed: u64,
) -> Result<(DirectedGraph, ParameterSpace)> {
    if half_size < 2 {
        return Err(Error::InvalidArgument("half_size must be at least 2".into()));
    }
    if !(0.0..=1.0).contains(&p_center) || !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "invalid center {p_center} or half-width {eps}"
        )));
    }
    let n = 2 * half_size;
    let mut labels: Vec<NodeId> = (0..n).collect();
    labels.shuffle(&mut stream_rng(seed, 0));
    let mut edges = Vec::with_capacity(2 * half_size * (half_size - 1));
    for cluster in labels.chunks(half_size) {
        for &u in cluster {
            for &v in cluster {
                if u != v {
                    edges.push((u, v));
                }
            }
        }
    }
    let graph = DirectedGraph::new(n, edges)?;
    let space = ParameterSpace::uniform(
        graph.m(),
        (p_center - eps).max(0.0),
        (p_center + eps).min(1.0),
    )?;
    Ok((graph, space))
}

/// Cluster index (0 or 1) of every node of a [`gen_two_cluster_er`] graph,
/// recovered from its edges.
pub fn two_cluster_membership(graph: &DirectedGraph) -> Vec<Option<usize>> {
    let mut label = vec![None; graph.n()];
    let mut next = 0;
    for v in 0..graph.n() {
        if label[v].is_some() {
            continue;
        }
        label[v] = Some(next);
        for &e in graph.out_edges(v) {
            label[graph.target(e)] = Some(next);
        }
        next += 1;
    }
    label
}

/// A random raw edge multiset on `n` nodes with `raw_edges` entries. Sources are
/// drawn from a heavy-tailed distribution so a few nodes are much more
/// influential than the rest; targets are uniform. Duplicates are kept.
pub fn gen_random_multigraph(n: usize, raw_edges: usize, seed: u64) -> Result<Vec<(NodeId, NodeId)>> {
    if n < 2 || raw_edges == 0 {
        return Err(Error::InvalidArgument(
            "random multigraph needs n >= 2 and at least one edge".into(),
        ));
    }
    let mut rng = stream_rng(seed, 0);
    let mut ranks: Vec<NodeId> = (0..n).collect();
    ranks.shuffle(&mut rng);
    let weights: Vec<f64> = (0..n).map(|i| 1.0 / ((i + 1) as f64).powf(0.75)).collect();
    let dist = rand::distributions::WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut out = Vec::with_capacity(raw_edges);
    while out.len() < raw_edges {
        let u = ranks[rng.sample(&dist)];
        let v = rng.gen_range(0..n);
        if u != v {
            out.push((u, v));
        }
    }
    Ok(out)
}
