//! Graph enumeration and an exhaustive existence oracle, independent of the
//! flow-based decision procedure.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use uac_core::Graph;

pub fn edge_index_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

fn graph_from_mask(n: usize, pairs: &[(usize, usize)], mask: u64) -> Graph {
    let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
    Graph::from_edges(n, &edges, false).unwrap()
}

fn connected_mask(n: usize, pairs: &[(usize, usize)], mask: u64) -> bool {
    let mut seen = 1u32;
    loop {
        let mut next = seen;
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 && (seen >> u & 1 == 1 || seen >> v & 1 == 1) {
                next |= 1 << u | 1 << v;
            }
        }
        if next == seen {
            return seen.count_ones() as usize == n;
        }
        seen = next;
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// One representative per isomorphism class of connected simple graphs on
/// `n` vertices; the representative's mask is the smallest over relabelings.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    let pairs = edge_index_pairs(n);
    let mut index = vec![vec![0usize; n]; n];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        index[u][v] = i;
        index[v][u] = i;
    }
    let perms = permutations(n);
    let mut classes = BTreeSet::new();
    for mask in 0..1u64 << pairs.len() {
        if !connected_mask(n, &pairs, mask) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold(0u64, |acc, (_, &(u, v))| acc | 1 << index[p[u]][p[v]])
            })
            .min()
            .unwrap();
        classes.insert(canon);
    }
    classes.into_iter().map(|m| graph_from_mask(n, &pairs, m)).collect()
}

/// Rooted canonical string of a tree below `v`.
fn rooted_code(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[v].iter().filter(|&&w| w != parent).map(|&w| rooted_code(adj, w, v)).collect();
    kids.sort();
    format!("({})", kids.concat())
}

fn tree_code(n: usize, edges: &[(usize, usize)]) -> String {
    if n == 1 {
        return "()".into();
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &leaf in &layer {
            degree[leaf] = 0;
            for &w in &adj[leaf] {
                if degree[w] > 0 {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    layer.iter().map(|&c| rooted_code(&adj, c, usize::MAX)).min().unwrap()
}

/// One representative per isomorphism class of trees on `n` vertices,
/// generated from Prüfer sequences.
pub fn trees(n: usize) -> Vec<Graph> {
    if n <= 2 {
        let edges: Vec<_> = if n == 2 { vec![(0, 1)] } else { vec![] };
        return vec![Graph::from_edges(n, &edges, false).unwrap()];
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let total = n.pow(n as u32 - 2);
    for code in 0..total {
        let mut seq = Vec::with_capacity(n - 2);
        let mut c = code;
        for _ in 0..n - 2 {
            seq.push(c % n);
            c /= n;
        }
        let edges = prufer_edges(n, &seq);
        if seen.insert(tree_code(n, &edges)) {
            out.push(Graph::from_edges(n, &edges, false).unwrap());
        }
    }
    out
}

fn prufer_edges(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Whether `(x, y)` can send uniform mass from `N(x)` to uniform mass on
/// `N(y)` using only target pairs in `allowed`: for every `A ⊆ N(x)`,
/// `|A| / d(x) <= |Γ(A)| / d(y)`.
fn hall_feasible(g: &Graph, x: usize, y: usize, allowed: &dyn Fn(usize, usize) -> bool) -> bool {
    let nx = g.neighbors(x);
    let ny = g.neighbors(y);
    let (dx, dy) = (nx.len(), ny.len());
    (1u32..1 << dx).all(|a| {
        let chosen: Vec<usize> = (0..dx).filter(|i| a >> i & 1 == 1).map(|i| nx[i]).collect();
        let reach = ny.iter().filter(|&&yp| chosen.iter().any(|&xp| allowed(xp, yp))).count();
        reach * dx >= chosen.len() * dy
    })
}

/// Exhaustive search for a nonempty set of non-adjacent distinct ordered
/// pairs in which every pair can be uniformly coupled into the set. Only
/// swap-symmetric sets are enumerated; the union of a valid set with its
/// swap is valid.
pub fn admits_by_exhaustion(g: &Graph) -> bool {
    let n = g.vertex_count();
    let candidates: Vec<(usize, usize)> =
        edge_index_pairs(n).into_iter().filter(|&(u, v)| !g.is_adjacent(u, v)).collect();
    let m = candidates.len();
    assert!(m < 24, "too many candidate pairs for exhaustive search");
    for mask in 1u64..1 << m {
        let mut member = vec![false; n * n];
        for (i, &(u, v)) in candidates.iter().enumerate() {
            if mask >> i & 1 == 1 {
                member[u * n + v] = true;
                member[v * n + u] = true;
            }
        }
        let allowed = |a: usize, b: usize| member[a * n + b];
        let sustained = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| member[x * n + y])
            .all(|(x, y)| hall_feasible(g, x, y, &allowed));
        if sustained {
            return true;
        }
    }
    false
}

pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let pairs = edge_index_pairs(n);
    loop {
        let mask = pairs.iter().enumerate().fold(0u64, |acc, (i, _)| if rng.random::<f64>() < p { acc | 1 << i } else { acc });
        if connected_mask(n, &pairs, mask) {
            return graph_from_mask(n, &pairs, mask);
        }
    }
}
