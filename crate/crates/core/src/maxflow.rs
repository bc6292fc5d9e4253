//! Integer maximum flow (level-graph augmentation) and maximum bipartite
//! matching. Both are deterministic: arcs and candidates are scanned in
//! insertion order, so identical inputs give identical flows.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: u64,
}

/// Directed network with integer capacities; parallel arcs are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    arcs: Vec<FlowArc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        assert!(source < nodes && sink < nodes, "terminal out of range");
        assert_ne!(source, sink, "source and sink must differ");
        Self { nodes, source, sink, arcs: Vec::new() }
    }

    /// Appends an arc and returns its index.
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: u64) -> usize {
        assert!(from < self.nodes && to < self.nodes, "arc endpoint out of range");
        self.arcs.push(FlowArc { from, to, capacity });
        self.arcs.len() - 1
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub value: u64,
    /// Flow on each arc, indexed like [`FlowNetwork::arcs`].
    pub flow: Vec<u64>,
}

struct Residual {
    to: usize,
    cap: u64,
    rev: usize,
}

/// Maximum flow by shortest augmenting paths on level graphs (Dinic).
pub fn max_flow(net: &FlowNetwork) -> FlowResult {
    let n = net.nodes;
    let mut graph: Vec<Vec<Residual>> = (0..n).map(|_| Vec::new()).collect();
    let mut handles = Vec::with_capacity(net.arcs.len());
    for arc in &net.arcs {
        let fwd = graph[arc.from].len();
        let bwd = graph[arc.to].len() + usize::from(arc.from == arc.to);
        graph[arc.from].push(Residual { to: arc.to, cap: arc.capacity, rev: bwd });
        graph[arc.to].push(Residual { to: arc.from, cap: 0, rev: fwd });
        handles.push((arc.from, fwd));
    }

    let mut value = 0u64;
    let mut level = vec![usize::MAX; n];
    let mut next = vec![0usize; n];
    loop {
        level.iter_mut().for_each(|l| *l = usize::MAX);
        level[net.source] = 0;
        let mut queue = VecDeque::from([net.source]);
        while let Some(u) = queue.pop_front() {
            for e in &graph[u] {
                if e.cap > 0 && level[e.to] == usize::MAX {
                    level[e.to] = level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        if level[net.sink] == usize::MAX {
            break;
        }
        next.iter_mut().for_each(|i| *i = 0);
        loop {
            let pushed = augment(&mut graph, &level, &mut next, net.source, net.sink, u64::MAX);
            if pushed == 0 {
                break;
            }
            value += pushed;
        }
    }

    let flow = net
        .arcs
        .iter()
        .zip(&handles)
        .map(|(arc, &(u, idx))| arc.capacity - graph[u][idx].cap)
        .collect();
    FlowResult { value, flow }
}

fn augment(
    graph: &mut [Vec<Residual>],
    level: &[usize],
    next: &mut [usize],
    u: usize,
    sink: usize,
    limit: u64,
) -> u64 {
    if u == sink {
        return limit;
    }
    while next[u] < graph[u].len() {
        let i = next[u];
        let (to, cap) = (graph[u][i].to, graph[u][i].cap);
        if cap > 0 && level[to] == level[u] + 1 {
            let pushed = augment(graph, level, next, to, sink, limit.min(cap));
            if pushed > 0 {
                graph[u][i].cap -= pushed;
                let rev = graph[u][i].rev;
                graph[to][rev].cap += pushed;
                return pushed;
            }
        }
        next[u] += 1;
    }
    0
}

/// Injective assignment of left vertices to right vertices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// `(left, right)` pairs sorted by left endpoint.
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn partner_of_left(&self, left: usize) -> Option<usize> {
        self.pairs.iter().find(|&&(l, _)| l == left).map(|&(_, r)| r)
    }
}

/// Maximum-cardinality bipartite matching by repeated augmenting-path search
/// (Kuhn). Left vertices are processed in increasing order and each left
/// vertex tries its allowed partners in increasing order.
pub fn max_bipartite_matching(
    left_size: usize,
    right_size: usize,
    allowed: &[(usize, usize)],
) -> Matching {
    let mut adj = vec![Vec::new(); left_size];
    for &(l, r) in allowed {
        assert!(l < left_size && r < right_size, "allowed pair out of range");
        adj[l].push(r);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut owner: Vec<Option<usize>> = vec![None; right_size];
    for l in 0..left_size {
        let mut visited = vec![false; right_size];
        try_kuhn(l, &adj, &mut owner, &mut visited);
    }
    let mut pairs: Vec<_> = owner
        .iter()
        .enumerate()
        .filter_map(|(r, o)| o.map(|l| (l, r)))
        .collect();
    pairs.sort_unstable();
    Matching { pairs }
}

fn try_kuhn(l: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &r in &adj[l] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        if owner[r].is_none_or(|other| try_kuhn(other, adj, owner, visited)) {
            owner[r] = Some(l);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_feasible(net: &FlowNetwork, res: &FlowResult) {
        let mut balance = vec![0i128; net.nodes()];
        for (arc, &f) in net.arcs().iter().zip(&res.flow) {
            assert!(f <= arc.capacity);
            balance[arc.from] -= f as i128;
            balance[arc.to] += f as i128;
        }
        for (v, &b) in balance.iter().enumerate() {
            if v == net.source() {
                assert_eq!(-b, res.value as i128);
            } else if v == net.sink() {
                assert_eq!(b, res.value as i128);
            } else {
                assert_eq!(b, 0, "conservation at {v}");
            }
        }
    }

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2, 0, 1);
        net.add_arc(0, 1, 5);
        let res = max_flow(&net);
        assert_eq!(res.value, 5);
        check_feasible(&net, &res);
    }

    #[test]
    fn two_unit_paths() {
        let mut net = FlowNetwork::new(4, 0, 3);
        net.add_arc(0, 1, 1);
        net.add_arc(0, 2, 1);
        net.add_arc(1, 3, 1);
        net.add_arc(2, 3, 1);
        let res = max_flow(&net);
        assert_eq!(res.value, 2);
        check_feasible(&net, &res);
    }

    #[test]
    fn needs_flow_cancellation() {
        // Greedy s-a-b-t blocks; the optimum reroutes through the reverse arc.
        let mut net = FlowNetwork::new(4, 0, 3);
        net.add_arc(0, 1, 1);
        net.add_arc(1, 2, 1);
        net.add_arc(2, 3, 1);
        net.add_arc(0, 2, 1);
        net.add_arc(1, 3, 1);
        let res = max_flow(&net);
        assert_eq!(res.value, 2);
        check_feasible(&net, &res);
    }

    #[test]
    fn parallel_arcs_and_disconnected_sink() {
        let mut net = FlowNetwork::new(3, 0, 2);
        net.add_arc(0, 1, 2);
        net.add_arc(0, 1, 3);
        let res = max_flow(&net);
        assert_eq!(res.value, 0);
        net.add_arc(1, 2, 4);
        let res = max_flow(&net);
        assert_eq!(res.value, 4);
        check_feasible(&net, &res);
    }

    #[test]
    fn matchings() {
        let full: Vec<_> = (0..3).flat_map(|l| (0..3).map(move |r| (l, r))).collect();
        assert_eq!(max_bipartite_matching(3, 3, &full).size(), 3);
        let m = max_bipartite_matching(2, 1, &[(0, 0), (1, 0)]);
        assert_eq!(m.size(), 1);
        assert_eq!(m.partner_of_left(0), Some(0));
        // Left 0 must give way to left 1.
        let m = max_bipartite_matching(2, 2, &[(0, 0), (0, 1), (1, 0)]);
        assert_eq!(m.pairs, vec![(0, 1), (1, 0)]);
    }
}
