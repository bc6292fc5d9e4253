//! Undirected simple graphs (optionally with self-loops), the graph families
//! used throughout the crate, the edge-list text format, and the structural
//! queries the couplings rely on.
//!
//! A loop at `v` contributes `v` to its own neighbourhood and adds exactly one
//! to its degree, so the simple random walk on `K_n*` moves to each of the `n`
//! vertices (including staying put) with probability `1/n`.

use std::collections::VecDeque;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

/// Vertex index, 0-based.
pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: endpoint {vertex} out of range for {n} vertices")]
    EndpointOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: loop not allowed (use a `p*` header to enable loops)")]
    LoopNotAllowed { line: usize },
    #[error("header declares {declared} edges but {found} were given")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph is not connected")]
    NotConnected,
    #[error("graph has loops")]
    HasLoops,
}

/// Undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    loops_enabled: bool,
    adj: Vec<Vec<VertexId>>,
    matrix: Vec<bool>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("loops_enabled", &self.loops_enabled)
            .field("edges", &self.edges())
            .finish()
    }
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize, loops_enabled: bool) -> Self {
        Self {
            n,
            loops_enabled,
            adj: vec![Vec::new(); n],
            matrix: vec![false; n * n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge list, rejecting duplicates, out-of-range
    /// endpoints and loops when they are not enabled.
    pub fn from_edges(
        n: usize,
        edges: &[(VertexId, VertexId)],
        loops_enabled: bool,
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(n, loops_enabled);
        for (i, &(u, v)) in edges.iter().enumerate() {
            g.try_add_edge(u, v, i + 1)?;
        }
        Ok(g)
    }

    fn try_add_edge(&mut self, u: VertexId, v: VertexId, line: usize) -> Result<(), GraphError> {
        for w in [u, v] {
            if w >= self.n {
                return Err(GraphError::EndpointOutOfRange { line, vertex: w, n: self.n });
            }
        }
        if u == v && !self.loops_enabled {
            return Err(GraphError::LoopNotAllowed { line });
        }
        if self.matrix[u * self.n + v] {
            return Err(GraphError::DuplicateEdge { line, u, v });
        }
        self.matrix[u * self.n + v] = true;
        self.matrix[v * self.n + u] = true;
        insert_sorted(&mut self.adj[u], v);
        if u != v {
            insert_sorted(&mut self.adj[v], u);
        }
        self.edge_count += 1;
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn loops_enabled(&self) -> bool {
        self.loops_enabled
    }

    pub fn has_loops(&self) -> bool {
        (0..self.n).any(|v| self.matrix[v * self.n + v])
    }

    /// Sorted neighbourhood; contains `v` itself when `v` carries a loop.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.matrix[u * self.n + v]
    }

    /// Edges as `(u, v)` with `u <= v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u <= v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn degree_sum(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// Common degree when every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let first = self.adj.first()?.len();
        self.adj.iter().all(|a| a.len() == first).then_some(first)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    /// `N(x) ∩ N(y)`, sorted.
    pub fn common_neighbors(&self, x: VertexId, y: VertexId) -> Vec<VertexId> {
        self.adj[x].iter().copied().filter(|&w| self.is_adjacent(w, y)).collect()
    }

    /// Simple complement on the same vertex set.
    pub fn complement(&self) -> Result<Graph, GraphError> {
        if self.has_loops() {
            return Err(GraphError::HasLoops);
        }
        let mut edges = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.is_adjacent(u, v) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(self.n, &edges, false)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabeled(&self, perm: &[VertexId]) -> Graph {
        let edges: Vec<_> = self.edges().into_iter().map(|(u, v)| (perm[u], perm[v])).collect();
        Graph::from_edges(self.n, &edges, self.loops_enabled).expect("permutation of a valid graph")
    }

    /// Serializes in the edge-list text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let header = if self.loops_enabled { "p*" } else { "p" };
        let _ = writeln!(s, "{header} {} {}", self.n, self.edge_count);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "e {u} {v}");
        }
        s
    }
}

fn insert_sorted(list: &mut Vec<VertexId>, v: VertexId) {
    if let Err(pos) = list.binary_search(&v) {
        list.insert(pos, v);
    }
}

/// Parses the edge-list format:
///
/// ```text
/// # comment
/// p <n> <m>        (or `p* <n> <m>` to allow loops)
/// e <u> <v>        (exactly m lines)
/// ```
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut graph: Option<Graph> = None;
    let mut declared = 0usize;
    let mut found = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match tokens[0] {
            tag @ ("p" | "p*") => {
                if graph.is_some() {
                    return Err(syntax(line, "duplicate header"));
                }
                if tokens.len() != 3 {
                    return Err(syntax(line, "expected `p <n> <m>`"));
                }
                let n = parse_usize(tokens[1], line)?;
                declared = parse_usize(tokens[2], line)?;
                graph = Some(Graph::empty(n, tag == "p*"));
            }
            "e" => {
                let g = graph.as_mut().ok_or_else(|| syntax(line, "edge before header"))?;
                if tokens.len() != 3 {
                    return Err(syntax(line, "expected `e <u> <v>`"));
                }
                let u = parse_usize(tokens[1], line)?;
                let v = parse_usize(tokens[2], line)?;
                g.try_add_edge(u, v, line)?;
                found += 1;
            }
            other => return Err(syntax(line, &format!("unknown record `{other}`"))),
        }
    }
    let graph = graph.ok_or_else(|| syntax(0, "missing `p` header"))?;
    if found != declared {
        return Err(GraphError::EdgeCountMismatch { declared, found });
    }
    Ok(graph)
}

fn syntax(line: usize, msg: &str) -> GraphError {
    GraphError::Syntax { line, msg: msg.to_string() }
}

fn parse_usize(token: &str, line: usize) -> Result<usize, GraphError> {
    token
        .parse()
        .map_err(|_| syntax(line, &format!("expected a non-negative integer, got `{token}`")))
}

/// Named graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Cycle(usize),
    Path(usize),
    Complete(usize),
    CompleteLoops(usize),
    Hypercube(usize),
    Petersen,
    /// The 4-regular 12-vertex graph that fails the forbidden-state test.
    Fig5,
    Octahedron,
    Paley(usize),
    Star(usize),
    CompleteBipartite(usize, usize),
    /// Two `K_n` cliques `{0..n}` and `{n..2n}` joined by the matching `i ~ n+i`.
    DoubleClique(usize),
    /// Complement of the cycle `C_n`.
    CycleComplement(usize),
    /// Root plus three branches of length three.
    Spider,
}

impl Family {
    /// Parses a builder name and its integer parameters, e.g. `("cycle", [9])`.
    pub fn parse(name: &str, params: &[usize]) -> Result<Family, GraphError> {
        let want = |k: usize| {
            if params.len() == k {
                Ok(())
            } else {
                Err(GraphError::InvalidParameter(format!(
                    "builder `{name}` takes {k} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let fam = match name {
            "cycle" => want(1).map(|_| Family::Cycle(params[0]))?,
            "path" => want(1).map(|_| Family::Path(params[0]))?,
            "complete" => want(1).map(|_| Family::Complete(params[0]))?,
            "complete-loops" => want(1).map(|_| Family::CompleteLoops(params[0]))?,
            "hypercube" => want(1).map(|_| Family::Hypercube(params[0]))?,
            "petersen" => want(0).map(|_| Family::Petersen)?,
            "fig5" => want(0).map(|_| Family::Fig5)?,
            "octahedron" => want(0).map(|_| Family::Octahedron)?,
            "paley" => want(1).map(|_| Family::Paley(params[0]))?,
            "star" => want(1).map(|_| Family::Star(params[0]))?,
            "complete-bipartite" => want(2).map(|_| Family::CompleteBipartite(params[0], params[1]))?,
            "double-clique" => want(1).map(|_| Family::DoubleClique(params[0]))?,
            "cycle-complement" => want(1).map(|_| Family::CycleComplement(params[0]))?,
            "spider" => want(0).map(|_| Family::Spider)?,
            _ => return Err(GraphError::InvalidParameter(format!("unknown builder `{name}`"))),
        };
        Ok(fam)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Cycle(n) => write!(f, "cycle {n}"),
            Family::Path(n) => write!(f, "path {n}"),
            Family::Complete(n) => write!(f, "complete {n}"),
            Family::CompleteLoops(n) => write!(f, "complete-loops {n}"),
            Family::Hypercube(d) => write!(f, "hypercube {d}"),
            Family::Petersen => write!(f, "petersen"),
            Family::Fig5 => write!(f, "fig5"),
            Family::Octahedron => write!(f, "octahedron"),
            Family::Paley(q) => write!(f, "paley {q}"),
            Family::Star(k) => write!(f, "star {k}"),
            Family::CompleteBipartite(a, b) => write!(f, "complete-bipartite {a} {b}"),
            Family::DoubleClique(n) => write!(f, "double-clique {n}"),
            Family::CycleComplement(n) => write!(f, "cycle-complement {n}"),
            Family::Spider => write!(f, "spider"),
        }
    }
}

/// Edge list in 1-based labels; vertex `k` is stored as `k - 1`.
const FIG5_EDGES: [(usize, usize); 24] = [
    (1, 3), (1, 4), (1, 5), (1, 6),
    (2, 7), (2, 8), (2, 9), (2, 10),
    (3, 7), (3, 8), (3, 9),
    (4, 7), (4, 8), (4, 11),
    (5, 7), (5, 8), (5, 12),
    (6, 9), (6, 10), (6, 11),
    (9, 12),
    (10, 11), (10, 12),
    (11, 12),
];

/// Builds the canonical labelled member of a family.
pub fn build(family: Family) -> Result<Graph, GraphError> {
    let invalid = |msg: String| Err(GraphError::InvalidParameter(msg));
    match family {
        Family::Cycle(n) => {
            if n < 3 {
                return invalid(format!("cycle needs n >= 3, got {n}"));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Graph::from_edges(n, &edges, false)
        }
        Family::Path(n) => {
            if n < 1 {
                return invalid("path needs n >= 1".into());
            }
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            Graph::from_edges(n, &edges, false)
        }
        Family::Complete(n) => {
            if n < 1 {
                return invalid("complete graph needs n >= 1".into());
            }
            Graph::from_edges(n, &pairs_below(n), false)
        }
        Family::CompleteLoops(n) => {
            if n < 1 {
                return invalid("complete graph needs n >= 1".into());
            }
            let mut edges: Vec<_> = (0..n).map(|v| (v, v)).collect();
            edges.extend(pairs_below(n));
            Graph::from_edges(n, &edges, true)
        }
        Family::Hypercube(d) => {
            if !(1..=20).contains(&d) {
                return invalid(format!("hypercube dimension must be in 1..=20, got {d}"));
            }
            let n = 1usize << d;
            let mut edges = Vec::new();
            for v in 0..n {
                for bit in 0..d {
                    let w = v ^ (1 << bit);
                    if v < w {
                        edges.push((v, w));
                    }
                }
            }
            Graph::from_edges(n, &edges, false)
        }
        Family::Petersen => {
            let mut edges = Vec::new();
            for i in 0..5 {
                edges.push((i, (i + 1) % 5));
                edges.push((i, i + 5));
                edges.push((i + 5, (i + 2) % 5 + 5));
            }
            Graph::from_edges(10, &edges, false)
        }
        Family::Fig5 => {
            let edges: Vec<_> = FIG5_EDGES.iter().map(|&(u, v)| (u - 1, v - 1)).collect();
            Graph::from_edges(12, &edges, false)
        }
        Family::Octahedron => {
            // K_6 minus the perfect matching {v, v+3}.
            let edges: Vec<_> = pairs_below(6).into_iter().filter(|&(u, v)| v != u + 3).collect();
            Graph::from_edges(6, &edges, false)
        }
        Family::Paley(q) => {
            if !is_prime(q) || q % 4 != 1 {
                return invalid(format!("paley needs a prime q = 1 mod 4, got {q}"));
            }
            let mut residue = vec![false; q];
            for i in 1..q {
                residue[i * i % q] = true;
            }
            let edges: Vec<_> = pairs_below(q).into_iter().filter(|&(u, v)| residue[v - u]).collect();
            Graph::from_edges(q, &edges, false)
        }
        Family::Star(k) => {
            if k < 1 {
                return invalid("star needs at least one leaf".into());
            }
            let edges: Vec<_> = (1..=k).map(|leaf| (0, leaf)).collect();
            Graph::from_edges(k + 1, &edges, false)
        }
        Family::CompleteBipartite(a, b) => {
            if a < 1 || b < 1 {
                return invalid("complete bipartite needs both sides non-empty".into());
            }
            let mut edges = Vec::new();
            for u in 0..a {
                for v in 0..b {
                    edges.push((u, a + v));
                }
            }
            Graph::from_edges(a + b, &edges, false)
        }
        Family::DoubleClique(n) => {
            if n < 2 {
                return invalid("double clique needs n >= 2".into());
            }
            let mut edges = pairs_below(n);
            edges.extend(pairs_below(n).into_iter().map(|(u, v)| (u + n, v + n)));
            edges.extend((0..n).map(|i| (i, i + n)));
            Graph::from_edges(2 * n, &edges, false)
        }
        Family::CycleComplement(n) => build(Family::Cycle(n))?.complement(),
        Family::Spider => Graph::from_edges(10, &spider_edges(), false),
    }
}

/// Vertex index of `(branch, depth)` on the spider; the root `(0,0)` is 0.
pub fn spider_vertex(branch: usize, depth: usize) -> VertexId {
    if depth == 0 {
        0
    } else {
        3 * (branch - 1) + depth
    }
}

fn spider_edges() -> Vec<(VertexId, VertexId)> {
    let mut edges = Vec::new();
    for branch in 1..=3 {
        for depth in 1..=3 {
            edges.push((spider_vertex(branch, depth - 1), spider_vertex(branch, depth)));
        }
    }
    edges
}

fn pairs_below(n: usize) -> Vec<(VertexId, VertexId)> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

fn is_prime(q: usize) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    pub side: Vec<Side>,
}

impl Bipartition {
    pub fn same_side(&self, u: VertexId, v: VertexId) -> bool {
        self.side[u] == self.side[v]
    }
}

/// Breadth-first two-colouring with vertex 0 on the left. `Ok(None)` means the
/// graph has an odd closed walk (loops included).
pub fn bipartition(g: &Graph) -> Result<Option<Bipartition>, GraphError> {
    if !g.is_connected() {
        return Err(GraphError::NotConnected);
    }
    let n = g.vertex_count();
    let mut side: Vec<Option<Side>> = vec![None; n];
    if n == 0 {
        return Ok(Some(Bipartition { side: Vec::new() }));
    }
    side[0] = Some(Side::Left);
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        let su = side[u].expect("queued vertices are coloured");
        let other = if su == Side::Left { Side::Right } else { Side::Left };
        for &w in g.neighbors(u) {
            match side[w] {
                None => {
                    side[w] = Some(other);
                    queue.push_back(w);
                }
                Some(sw) if sw == su => return Ok(None),
                Some(_) => {}
            }
        }
    }
    Ok(Some(Bipartition { side: side.into_iter().map(|s| s.expect("connected")).collect() }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SrgParams {
    pub n: usize,
    pub k: usize,
    pub lambda: usize,
    pub mu: usize,
}

/// Strongly-regular parameters by exhaustive pair scan. Graphs with loops,
/// disconnected or complete graphs are reported as not strongly regular.
pub fn srg_parameters(g: &Graph) -> Option<SrgParams> {
    let n = g.vertex_count();
    if n < 2 || g.has_loops() || !g.is_connected() {
        return None;
    }
    let k = g.regular_degree()?;
    if k == n - 1 {
        return None;
    }
    let mut lambda = None;
    let mut mu = None;
    for x in 0..n {
        for y in x + 1..n {
            let c = g.common_neighbors(x, y).len();
            let slot = if g.is_adjacent(x, y) { &mut lambda } else { &mut mu };
            match *slot {
                None => *slot = Some(c),
                Some(prev) if prev != c => return None,
                Some(_) => {}
            }
        }
    }
    Some(SrgParams { n, k, lambda: lambda.unwrap_or(0), mu: mu? })
}

/// A bijection on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPermutation {
    image: Vec<VertexId>,
}

impl VertexPermutation {
    pub fn new(image: Vec<VertexId>) -> Result<Self, GraphError> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(GraphError::InvalidParameter(format!(
                    "not a permutation of 0..{n}: {image:?}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { image })
    }

    pub fn apply(&self, v: VertexId) -> VertexId {
        self.image[v]
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.image
    }
}

/// True iff `phi` is an automorphism of `g` that moves every vertex to a
/// distinct, non-adjacent vertex.
pub fn validate_free_automorphism(g: &Graph, phi: &VertexPermutation) -> bool {
    let n = g.vertex_count();
    if phi.len() != n {
        return false;
    }
    for v in 0..n {
        let w = phi.apply(v);
        if w == v || g.is_adjacent(v, w) {
            return false;
        }
    }
    (0..n).all(|u| (0..n).all(|v| g.is_adjacent(u, v) == g.is_adjacent(phi.apply(u), phi.apply(v))))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AutomorphismSearch {
    Found(VertexPermutation),
    NoneFound,
    CapExceeded,
}

/// Backtracking search for a free, non-adjacent automorphism. Vertices are
/// mapped in increasing order and candidates tried in increasing order; the
/// search gives up after `node_cap` search-tree nodes.
pub fn find_free_automorphism(g: &Graph, node_cap: usize) -> AutomorphismSearch {
    let n = g.vertex_count();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut nodes = 0usize;
    match extend_map(g, 0, &mut image, &mut used, &mut nodes, node_cap) {
        Some(true) => AutomorphismSearch::Found(VertexPermutation { image }),
        Some(false) => AutomorphismSearch::NoneFound,
        None => AutomorphismSearch::CapExceeded,
    }
}

/// `Some(true)` found, `Some(false)` exhausted, `None` cap hit.
fn extend_map(
    g: &Graph,
    v: VertexId,
    image: &mut [VertexId],
    used: &mut [bool],
    nodes: &mut usize,
    cap: usize,
) -> Option<bool> {
    let n = g.vertex_count();
    if v == n {
        return Some(true);
    }
    for w in 0..n {
        if used[w] || w == v || g.is_adjacent(v, w) || g.degree(w) != g.degree(v) {
            continue;
        }
        if g.is_adjacent(v, v) != g.is_adjacent(w, w) {
            continue;
        }
        if !(0..v).all(|u| g.is_adjacent(u, v) == g.is_adjacent(image[u], w)) {
            continue;
        }
        *nodes += 1;
        if *nodes > cap {
            return None;
        }
        image[v] = w;
        used[w] = true;
        match extend_map(g, v + 1, image, used, nodes, cap) {
            Some(true) => return Some(true),
            None => return None,
            Some(false) => {}
        }
        used[w] = false;
        image[v] = usize::MAX;
    }
    Some(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> Vec<usize> {
        v.to_vec()
    }

    #[test]
    fn parses_triangle() {
        let g = parse_graph("p 3 3\ne 0 1\ne 1 2\ne 0 2\n").unwrap();
        assert_eq!(g, build(Family::Complete(3)).unwrap());
    }

    #[test]
    fn rejects_loop_without_star_header() {
        let err = parse_graph("p 2 1\ne 0 0\n").unwrap_err();
        assert_eq!(err, GraphError::LoopNotAllowed { line: 2 });
        assert!(err.to_string().contains("loop not allowed"));
    }

    #[test]
    fn parses_k3_with_loops() {
        let text = "# K3*\np* 3 6\ne 0 0\ne 1 1\ne 2 2\ne 0 1\ne 1 2\ne 0 2\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g, build(Family::CompleteLoops(3)).unwrap());
        assert!(g.has_loops());
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.neighbors(1), &[0, 1, 2]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(
            parse_graph("p 3 1\ne 0 3\n"),
            Err(GraphError::EndpointOutOfRange { line: 2, vertex: 3, n: 3 })
        ));
        assert!(matches!(
            parse_graph("p 3 2\ne 0 1\n\ne 1 0\n"),
            Err(GraphError::DuplicateEdge { line: 4, .. })
        ));
        assert!(matches!(parse_graph("p 3 2\ne 0 1\n"), Err(GraphError::EdgeCountMismatch { .. })));
        assert!(matches!(parse_graph("p 3 x\n"), Err(GraphError::Syntax { line: 1, .. })));
        assert!(matches!(parse_graph("e 0 1\n"), Err(GraphError::Syntax { line: 1, .. })));
        assert!(matches!(parse_graph("q 1 1\n"), Err(GraphError::Syntax { .. })));
    }

    #[test]
    fn builder_shapes() {
        let c4 = build(Family::Cycle(4)).unwrap();
        assert_eq!(c4.edges(), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);

        let fig5 = build(Family::Fig5).unwrap();
        assert_eq!(fig5.vertex_count(), 12);
        assert_eq!(fig5.edge_count(), 24);
        assert_eq!(fig5.regular_degree(), Some(4));

        let q3 = build(Family::Hypercube(3)).unwrap();
        assert_eq!((q3.vertex_count(), q3.edge_count()), (8, 12));
        assert!(bipartition(&q3).unwrap().is_some());

        let oct = build(Family::Octahedron).unwrap();
        assert_eq!(oct.regular_degree(), Some(4));
        assert_eq!(build(Family::Paley(5)).unwrap(), build(Family::Cycle(5)).unwrap());
        assert_eq!(build(Family::DoubleClique(3)).unwrap().regular_degree(), Some(3));
        assert_eq!(build(Family::Spider).unwrap().edge_count(), 9);

        assert!(build(Family::Cycle(2)).is_err());
        assert!(build(Family::Paley(7)).is_err());
        assert!(build(Family::Paley(9)).is_err());
        assert!(build(Family::Hypercube(0)).is_err());
    }

    #[test]
    fn degrees_and_neighbors() {
        assert_eq!(build(Family::CompleteLoops(3)).unwrap().degree(0), 3);
        assert_eq!(build(Family::Cycle(5)).unwrap().degree(2), 2);
        assert_eq!(build(Family::Path(3)).unwrap().neighbors(1), &[0, 2]);
    }

    #[test]
    fn bipartitions() {
        let c6 = bipartition(&build(Family::Cycle(6)).unwrap()).unwrap().unwrap();
        for v in 0..6 {
            let expect = if v % 2 == 0 { Side::Left } else { Side::Right };
            assert_eq!(c6.side[v], expect);
        }
        assert_eq!(bipartition(&build(Family::Cycle(5)).unwrap()).unwrap(), None);
        let q2 = bipartition(&build(Family::Hypercube(2)).unwrap()).unwrap().unwrap();
        assert!(q2.same_side(0, 3) && q2.same_side(1, 2) && !q2.same_side(0, 1));
        let two_parts = Graph::from_edges(4, &[(0, 1), (2, 3)], false).unwrap();
        assert_eq!(bipartition(&two_parts), Err(GraphError::NotConnected));
        assert_eq!(bipartition(&build(Family::CompleteLoops(2)).unwrap()).unwrap(), None);
    }

    #[test]
    fn common_neighborhoods() {
        assert_eq!(build(Family::Cycle(6)).unwrap().common_neighbors(0, 2), set(&[1]));
        let petersen = build(Family::Petersen).unwrap();
        for (u, v) in petersen.edges() {
            assert!(petersen.common_neighbors(u, v).is_empty());
        }
        assert_eq!(build(Family::Complete(4)).unwrap().common_neighbors(0, 1), set(&[2, 3]));
    }

    #[test]
    fn complements() {
        assert_eq!(build(Family::Complete(4)).unwrap().complement().unwrap().edge_count(), 0);
        let matching = build(Family::Octahedron).unwrap().complement().unwrap();
        assert_eq!(matching.edges(), vec![(0, 3), (1, 4), (2, 5)]);
        assert_eq!(build(Family::CompleteLoops(3)).unwrap().complement(), Err(GraphError::HasLoops));
    }

    #[test]
    fn strongly_regular_scan() {
        let p = srg_parameters(&build(Family::Petersen).unwrap()).unwrap();
        assert_eq!((p.n, p.k, p.lambda, p.mu), (10, 3, 0, 1));
        let c5 = srg_parameters(&build(Family::Paley(5)).unwrap()).unwrap();
        assert_eq!((c5.n, c5.k, c5.lambda, c5.mu), (5, 2, 0, 1));
        let p13 = srg_parameters(&build(Family::Paley(13)).unwrap()).unwrap();
        assert_eq!((p13.n, p13.k, p13.lambda, p13.mu), (13, 6, 2, 3));
        assert_eq!(srg_parameters(&build(Family::Path(4)).unwrap()), None);
        assert_eq!(srg_parameters(&build(Family::Complete(5)).unwrap()), None);
    }

    #[test]
    fn free_automorphisms() {
        let q3 = build(Family::Hypercube(3)).unwrap();
        let flip = VertexPermutation::new((0..8).map(|v| v ^ 7).collect()).unwrap();
        assert!(validate_free_automorphism(&q3, &flip));

        let c6 = build(Family::Cycle(6)).unwrap();
        let rot1 = VertexPermutation::new((0..6).map(|v| (v + 1) % 6).collect()).unwrap();
        let rot2 = VertexPermutation::new((0..6).map(|v| (v + 2) % 6).collect()).unwrap();
        assert!(!validate_free_automorphism(&c6, &rot1));
        assert!(validate_free_automorphism(&c6, &rot2));

        match find_free_automorphism(&build(Family::Hypercube(2)).unwrap(), 10_000) {
            AutomorphismSearch::Found(phi) => {
                assert!(validate_free_automorphism(&build(Family::Hypercube(2)).unwrap(), &phi))
            }
            other => panic!("expected an automorphism, got {other:?}"),
        }
        assert_eq!(find_free_automorphism(&build(Family::Path(4)).unwrap(), 10_000), AutomorphismSearch::NoneFound);
        assert_eq!(find_free_automorphism(&build(Family::Complete(5)).unwrap(), 10_000), AutomorphismSearch::NoneFound);
        assert_eq!(find_free_automorphism(&build(Family::Petersen).unwrap(), 0), AutomorphismSearch::CapExceeded);
        assert!(VertexPermutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn text_round_trip() {
        for fam in [Family::Fig5, Family::CompleteLoops(4), Family::Petersen] {
            let g = build(fam).unwrap();
            assert_eq!(parse_graph(&g.to_text()).unwrap(), g);
        }
    }
}
