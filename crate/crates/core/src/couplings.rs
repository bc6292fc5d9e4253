//! Explicit coupling kernels for the named constructions: fixed-distance
//! walks on cycles, coordinate flips on hypercubes, automorphism couplings,
//! the bipartite construction, the cluster coupling on `K_ab` (via the
//! half-step composition), the `K₃*` coupling, complement-tracking couplings
//! on near-complete regular graphs, matching couplings on strongly regular
//! graphs, and a tree process that is an avoidance process but not a
//! coupling (kept as a negative control for the verifier).
//!
//! Constructors that need a start state take it as a parameter; `None`
//! selects the lexicographically smallest valid state.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::forbidden::{matching_kernel, ForbiddenError};
use crate::graph::{
    bipartition, build, spider_vertex, srg_parameters, validate_free_automorphism, Family, Graph, GraphError,
    SrgParams, VertexId, VertexPermutation,
};
use crate::kernel::{ratio, JointKernel, KernelError, Rational, StatePair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CouplingError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid start state {state}: {reason}")]
    InvalidStart { state: StatePair, reason: String },
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("vertex {0} has degree below 2")]
    LowDegree(VertexId),
    #[error("permutation is not a free non-adjacent automorphism")]
    NotFreeAutomorphism,
    #[error("graph must be regular of degree n-2 or n-3 (n = {n}, degree {degree:?})")]
    WrongDegree { n: usize, degree: Option<usize> },
    #[error("graph is not strongly regular")]
    NotStronglyRegular,
    #[error("strongly regular parameters {0:?} violate both max(lambda, mu) <= k/2 and lambda < k/2")]
    SrgConditionViolated(SrgParams),
    #[error("malformed half-step: {0}")]
    MalformedHalfStep(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Forbidden(#[from] ForbiddenError),
}

fn invalid_start(state: StatePair, reason: &str) -> CouplingError {
    CouplingError::InvalidStart { state, reason: reason.to_string() }
}

/// Both tokens step clockwise or both anticlockwise on a fair coin, keeping
/// the clockwise offset `d` from X to Y.
pub fn fixed_distance_cycle(n: usize, d: usize) -> Result<JointKernel, CouplingError> {
    if n < 4 {
        return Err(CouplingError::InvalidParameter(format!("cycle length {n} < 4")));
    }
    if d < 2 || d > n - 2 {
        return Err(CouplingError::InvalidParameter(format!(
            "offset {d} leaves the tokens equal or adjacent on C_{n}"
        )));
    }
    let g = build(Family::Cycle(n))?;
    let half = ratio(1, 2);
    let start = StatePair::new(0, d);
    JointKernel::from_reachable(g, start, |s| {
        Ok::<_, CouplingError>(BTreeMap::from([
            (StatePair::new((s.x + 1) % n, (s.y + 1) % n), half.clone()),
            (StatePair::new((s.x + n - 1) % n, (s.y + n - 1) % n), half.clone()),
        ]))
    })
}

/// Tokens at complementary corners of the `dim`-cube flip the same uniformly
/// chosen coordinate.
pub fn hypercube_flip(dim: usize) -> Result<JointKernel, CouplingError> {
    if dim < 2 {
        return Err(CouplingError::InvalidParameter(format!("hypercube dimension {dim} < 2")));
    }
    let g = build(Family::Hypercube(dim))?;
    let p = ratio(1, dim as i64);
    let start = StatePair::new(0, (1 << dim) - 1);
    JointKernel::from_reachable(g, start, |s| {
        Ok::<_, CouplingError>(
            (0..dim).map(|bit| (StatePair::new(s.x ^ (1 << bit), s.y ^ (1 << bit)), p.clone())).collect(),
        )
    })
}

/// X performs a simple random walk and Y sits at `phi(X)`.
pub fn automorphism_coupling(
    g: &Graph,
    phi: &VertexPermutation,
    start_x: VertexId,
) -> Result<JointKernel, CouplingError> {
    if !validate_free_automorphism(g, phi) {
        return Err(CouplingError::NotFreeAutomorphism);
    }
    if start_x >= g.vertex_count() {
        return Err(CouplingError::InvalidParameter(format!("start vertex {start_x} out of range")));
    }
    let start = StatePair::new(start_x, phi.apply(start_x));
    JointKernel::from_reachable(g.clone(), start, |s| {
        let p = ratio(1, g.degree(s.x) as i64);
        Ok::<_, CouplingError>(g.neighbors(s.x).iter().map(|&w| (StatePair::new(w, phi.apply(w)), p.clone())).collect())
    })
}

/// The bipartite construction for graphs with minimum degree 2, started at
/// two distinct vertices on the same side. Transition rates depend on the
/// number `c` of common neighbours of the current pair.
pub fn bipartite_coupling(g: &Graph, start: StatePair) -> Result<JointKernel, CouplingError> {
    let parts = bipartition(g)?.ok_or(CouplingError::NotBipartite)?;
    if let Some(v) = (0..g.vertex_count()).find(|&v| g.degree(v) < 2) {
        return Err(CouplingError::LowDegree(v));
    }
    let n = g.vertex_count();
    if start.x >= n || start.y >= n {
        return Err(invalid_start(start, "vertex out of range"));
    }
    if start.x == start.y || !parts.same_side(start.x, start.y) {
        return Err(invalid_start(start, "tokens must be distinct and on the same side"));
    }
    JointKernel::from_reachable(g.clone(), start, |s| Ok::<_, CouplingError>(bipartite_row(g, s)))
}

fn bipartite_row(g: &Graph, s: StatePair) -> BTreeMap<StatePair, Rational> {
    let (nx, ny) = (g.neighbors(s.x), g.neighbors(s.y));
    let dx = nx.len() as i64;
    let dy = ny.len() as i64;
    let common = g.common_neighbors(s.x, s.y);
    let c = common.len() as i64;
    let mut row = BTreeMap::new();
    match common.as_slice() {
        [] => {
            for &xp in nx {
                for &yp in ny {
                    row.insert(StatePair::new(xp, yp), ratio(1, dx * dy));
                }
            }
        }
        &[z] => {
            let rest = ratio(1, dx * dy) - ratio(1, dx * dy * (dx - 1) * (dy - 1));
            for &yp in ny.iter().filter(|&&v| v != z) {
                row.insert(StatePair::new(z, yp), ratio(1, dx * (dy - 1)));
            }
            for &xp in nx.iter().filter(|&&v| v != z) {
                row.insert(StatePair::new(xp, z), ratio(1, dy * (dx - 1)));
                for &yp in ny.iter().filter(|&&v| v != z) {
                    row.insert(StatePair::new(xp, yp), rest.clone());
                }
            }
        }
        _ => {
            let in_common = |v: VertexId| common.binary_search(&v).is_ok();
            for &xp in nx {
                for &yp in ny.iter().filter(|&&v| v != xp) {
                    let p = if in_common(xp) && in_common(yp) {
                        ratio(c, dx * dy * (c - 1))
                    } else {
                        ratio(1, dx * dy)
                    };
                    row.insert(StatePair::new(xp, yp), p);
                }
            }
        }
    }
    row
}

/// Tabulated half-step rules: `f[(x, y, x')]` moves X, then
/// `g[(x', y, y')]` moves Y. Missing keys are zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HalfStep {
    pub f: BTreeMap<(VertexId, VertexId, VertexId), Rational>,
    pub g: BTreeMap<(VertexId, VertexId, VertexId), Rational>,
}

impl HalfStep {
    /// Every tabulated `(x, y)` block of `f` and `(x', y)` block of `g` sums to 1.
    pub fn validate(&self) -> Result<(), CouplingError> {
        for (name, table) in [("f", &self.f), ("g", &self.g)] {
            let mut sums: BTreeMap<(VertexId, VertexId), Rational> = BTreeMap::new();
            for (&(a, b, _), p) in table {
                if p < &Rational::zero() {
                    return Err(CouplingError::MalformedHalfStep(format!("negative entry in {name}")));
                }
                *sums.entry((a, b)).or_insert_with(Rational::zero) += p;
            }
            if let Some(((a, b), s)) = sums.iter().find(|(_, s)| !s.is_one()) {
                return Err(CouplingError::MalformedHalfStep(format!("{name}({a},{b},·) sums to {s}")));
            }
        }
        Ok(())
    }

    fn f_row(&self, x: VertexId, y: VertexId) -> impl Iterator<Item = (VertexId, &Rational)> {
        self.f.range((x, y, 0)..=(x, y, usize::MAX)).map(|(&(_, _, xp), p)| (xp, p))
    }

    fn g_row(&self, xp: VertexId, y: VertexId) -> impl Iterator<Item = (VertexId, &Rational)> {
        self.g.range((xp, y, 0)..=(xp, y, usize::MAX)).map(|(&(_, _, yp), p)| (yp, p))
    }
}

/// Joint kernel `T[(x,y) -> (x',y')] = f(x,y,x') · g(x',y,y')` on the states
/// reachable from `start`.
pub fn compose_super_markovian(graph: &Graph, h: &HalfStep, start: StatePair) -> Result<JointKernel, CouplingError> {
    h.validate()?;
    JointKernel::from_reachable(graph.clone(), start, |s| {
        let mut row = BTreeMap::new();
        let mut mass = Rational::zero();
        for (xp, pf) in h.f_row(s.x, s.y) {
            if pf.is_zero() {
                continue;
            }
            let mut g_mass = Rational::zero();
            for (yp, pg) in h.g_row(xp, s.y) {
                g_mass += pg;
                *row.entry(StatePair::new(xp, yp)).or_insert_with(Rational::zero) += pf * pg;
            }
            if g_mass.is_zero() {
                return Err(CouplingError::MalformedHalfStep(format!("g undefined at ({xp},{},·)", s.y)));
            }
            mass += pf;
        }
        if mass.is_zero() {
            return Err(CouplingError::MalformedHalfStep(format!("f undefined at ({},{},·)", s.x, s.y)));
        }
        Ok(row)
    })
}

/// Cluster coupling on `K_ab`: cluster `j` is `{j·a, …, j·a + a − 1}`.
/// Returns the tabulated half-steps and their composition started at `(0, a)`.
pub fn cluster_coupling_complete(a: usize, b: usize) -> Result<(HalfStep, JointKernel), CouplingError> {
    if a < 2 || b < 2 {
        return Err(CouplingError::InvalidParameter(format!("cluster sizes need a, b >= 2, got a={a}, b={b}")));
    }
    let n = a * b;
    let g = build(Family::Complete(n))?;
    let cluster = |v: VertexId| v / a;
    let (ai, bi) = (a as i64, b as i64);
    let to_other = ratio(ai * (bi - 1), (ai * bi - 1) * (ai - 1));
    let stay_home = ratio(1, ai * bi - 1);
    let y_leaves = ratio(1, ai * (bi - 1));
    let y_stays = ratio(1, ai - 1);

    let mut h = HalfStep::default();
    for x in 0..n {
        for y in (0..n).filter(|&y| cluster(y) != cluster(x)) {
            for xp in (0..n).filter(|&v| v != x && v != y) {
                if cluster(xp) == cluster(y) {
                    h.f.insert((x, y, xp), to_other.clone());
                } else if cluster(xp) == cluster(x) {
                    h.f.insert((x, y, xp), stay_home.clone());
                }
            }
        }
    }
    for xp in 0..n {
        for y in (0..n).filter(|&y| y != xp) {
            for yp in (0..n).filter(|&v| v != y && v != xp) {
                if cluster(xp) == cluster(y) {
                    if cluster(yp) != cluster(y) {
                        h.g.insert((xp, y, yp), y_leaves.clone());
                    }
                } else if cluster(yp) == cluster(y) {
                    h.g.insert((xp, y, yp), y_stays.clone());
                }
            }
        }
    }
    let kernel = compose_super_markovian(&g, &h, StatePair::new(0, a))?;
    Ok((h, kernel))
}

/// Markovian coupling on `K₃*`: the next pair is uniform among pairs with
/// `x' ≠ y`, `y' ≠ x'` and `(x', y') ≠ (x, y)`.
pub fn k3_loops_coupling() -> Result<JointKernel, CouplingError> {
    let g = build(Family::CompleteLoops(3))?;
    let start = StatePair::new(0, 1);
    JointKernel::from_reachable(g, start, |s| {
        let targets: Vec<_> = (0..3)
            .flat_map(|xp| (0..3).map(move |yp| StatePair::new(xp, yp)))
            .filter(|t| t.x != s.y && t.y != t.x && *t != s)
            .collect();
        let p = ratio(1, targets.len() as i64);
        Ok::<_, CouplingError>(targets.into_iter().map(|t| (t, p.clone())).collect())
    })
}

/// Complement-tracking coupling on a regular graph of degree `n − 2` (Y sits
/// at X's unique non-neighbour) or `n − 3` (Y sits one step clockwise from X
/// on X's cycle in the complement; each complement cycle is oriented from its
/// lowest vertex towards that vertex's lowest complement-neighbour).
pub fn near_complete_regular_coupling(g: &Graph, start: Option<StatePair>) -> Result<JointKernel, CouplingError> {
    let n = g.vertex_count();
    let degree = g.regular_degree();
    if g.has_loops() || !g.is_connected() || n < 3 {
        return Err(CouplingError::WrongDegree { n, degree });
    }
    let complement = g.complement()?;
    let partner: Vec<VertexId> = match degree {
        Some(k) if k + 2 == n => (0..n).map(|v| complement.neighbors(v)[0]).collect(),
        Some(k) if k + 3 == n => orient_cycles(&complement),
        _ => return Err(CouplingError::WrongDegree { n, degree }),
    };
    let start = start.unwrap_or(StatePair::new(0, partner[0]));
    if start.x >= n || start.y != partner[start.x] {
        return Err(invalid_start(start, "Y must sit at X's tracked complement vertex"));
    }
    JointKernel::from_reachable(g.clone(), start, |s| {
        let p = ratio(1, g.degree(s.x) as i64);
        Ok::<_, CouplingError>(g.neighbors(s.x).iter().map(|&w| (StatePair::new(w, partner[w]), p.clone())).collect())
    })
}

/// Successor map of a 2-regular graph whose components are oriented cycles.
fn orient_cycles(c: &Graph) -> Vec<VertexId> {
    let n = c.vertex_count();
    let mut succ = vec![usize::MAX; n];
    for v0 in 0..n {
        if succ[v0] != usize::MAX {
            continue;
        }
        let (mut prev, mut cur) = (v0, c.neighbors(v0)[0]);
        succ[v0] = cur;
        while cur != v0 {
            let next = c.neighbors(cur).iter().copied().find(|&w| w != prev).expect("2-regular");
            succ[cur] = next;
            prev = cur;
            cur = next;
        }
    }
    succ
}

/// Minimum-entropy coupling on a strongly regular graph: for each
/// non-adjacent pair, Y follows a perfect matching between `N(x)` and `N(y)`
/// that only pairs distinct non-adjacent vertices. The kernel is defined on
/// every ordered pair of distinct non-adjacent vertices. Refuses graphs outside
/// `max(λ, μ) ≤ k/2` or `λ < k/2`.
pub fn srg_matching_coupling(g: &Graph, start: Option<StatePair>) -> Result<JointKernel, CouplingError> {
    let params = srg_parameters(g).ok_or(CouplingError::NotStronglyRegular)?;
    let SrgParams { k, lambda, mu, .. } = params;
    if !(2 * lambda.max(mu) <= k || 2 * lambda < k) {
        return Err(CouplingError::SrgConditionViolated(params));
    }
    let n = g.vertex_count();
    let start = match start {
        Some(s) => s,
        None => (1..n).find(|&y| !g.is_adjacent(0, y)).map(|y| StatePair::new(0, y)).expect("non-complete"),
    };
    if start.x >= n || start.y >= n || start.x == start.y || g.is_adjacent(start.x, start.y) {
        return Err(invalid_start(start, "tokens must be distinct and non-adjacent"));
    }
    let valid = |x: VertexId, y: VertexId| x != y && !g.is_adjacent(x, y);
    let all = (0..n).flat_map(|x| (0..n).map(move |y| StatePair::new(x, y))).filter(|s| valid(s.x, s.y));
    Ok(matching_kernel(g, start, all, valid)?)
}

/// The ten-vertex spider process with the 3/4 branch-switch rule; an
/// avoidance process whose tokens are not faithful simple random walks.
pub fn tree_noncoupling_example() -> Result<JointKernel, CouplingError> {
    tree_noncoupling_with_switch(ratio(3, 4))
}

/// Spider process with a configurable probability `p` that tokens at
/// `(i,1)` and `(j,2)`, `i ≠ j`, swap depths rather than moving to the root
/// and a leaf.
pub fn tree_noncoupling_with_switch(p: Rational) -> Result<JointKernel, CouplingError> {
    if p <= Rational::zero() || p >= Rational::one() {
        return Err(CouplingError::InvalidParameter(format!("switch probability {p} not in (0, 1)")));
    }
    let g = build(Family::Spider)?;
    let q = Rational::one() - &p;
    let v = spider_vertex;
    let pos = |u: VertexId| if u == 0 { (0, 0) } else { ((u - 1) / 3 + 1, (u - 1) % 3 + 1) };
    let start = StatePair::new(v(0, 0), v(1, 3));
    JointKernel::from_reachable(g, start, |s| {
        let (a, b) = (pos(s.x), pos(s.y));
        // Rules are stated for (token at `lo`, token at `hi`); `mk` orders the result.
        let mut row = BTreeMap::new();
        let flip = a.1 > b.1;
        let (lo, hi) = if flip { (b, a) } else { (a, b) };
        let mk = |lo_v: VertexId, hi_v: VertexId| if flip { StatePair::new(hi_v, lo_v) } else { StatePair::new(lo_v, hi_v) };
        match (lo.1, hi.1) {
            (0, 3) => {
                for j in 1..=3 {
                    row.insert(mk(v(j, 1), v(hi.0, 2)), ratio(1, 3));
                }
            }
            (1, 2) if lo.0 == hi.0 => {
                row.insert(mk(v(0, 0), v(hi.0, 3)), ratio(1, 1));
            }
            (1, 2) => {
                row.insert(mk(v(lo.0, 2), v(hi.0, 1)), p.clone());
                row.insert(mk(v(0, 0), v(hi.0, 3)), q.clone());
            }
            _ => {
                return Err(CouplingError::InvalidStart {
                    state: s,
                    reason: "depths must sum to 3".into(),
                })
            }
        }
        Ok(row)
    })
}

/// States of `k` as a set, for tests and reports.
pub fn state_set(k: &JointKernel) -> BTreeSet<StatePair> {
    k.states().iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexPermutation;

    fn sp(x: usize, y: usize) -> StatePair {
        StatePair::new(x, y)
    }

    fn row_sums_to_one(k: &JointKernel) {
        for i in 0..k.len() {
            let s: Rational = k.row(i).iter().map(|(_, p)| p.clone()).sum();
            assert!(s.is_one());
        }
    }

    #[test]
    fn fixed_distance_examples() {
        let k = fixed_distance_cycle(9, 3).unwrap();
        assert_eq!(k.successors(sp(0, 3)), vec![(sp(1, 4), ratio(1, 2)), (sp(8, 2), ratio(1, 2))]);
        assert_eq!(k.len(), 9);
        let k4 = fixed_distance_cycle(4, 2).unwrap();
        assert_eq!(k4.len(), 4);
        assert!(k4.states().iter().all(|s| k4.successors(*s).len() == 2));
        assert!(fixed_distance_cycle(9, 1).is_err());
        assert!(fixed_distance_cycle(9, 8).is_err());
        assert!(fixed_distance_cycle(3, 2).is_err());
        for n in 4..10 {
            for d in 2..=n - 2 {
                let k = fixed_distance_cycle(n, d).unwrap();
                row_sums_to_one(&k);
                assert!(k.states().iter().all(|s| (s.y + n - s.x) % n == d));
            }
        }
    }

    #[test]
    fn hypercube_examples() {
        let k = hypercube_flip(3).unwrap();
        // Bit 0 is the leading coordinate in the 000/111 notation.
        assert_eq!(k.prob(sp(0b000, 0b111), sp(0b001, 0b110)), ratio(1, 3));
        assert!(k.states().iter().all(|s| s.x ^ s.y == 7));
        let k2 = hypercube_flip(2).unwrap();
        assert_eq!(k2.len(), 4);
        assert!(hypercube_flip(1).is_err());
    }

    #[test]
    fn automorphism_examples() {
        let oct = build(Family::Octahedron).unwrap();
        let anti = VertexPermutation::new((0..6).map(|v| (v + 3) % 6).collect()).unwrap();
        let k = automorphism_coupling(&oct, &anti, 0).unwrap();
        let row = k.successors(sp(0, 3));
        assert_eq!(row.len(), 4);
        assert!(row.iter().all(|(t, p)| t.y == (t.x + 3) % 6 && *p == ratio(1, 4)));

        let q3 = build(Family::Hypercube(3)).unwrap();
        let flip = VertexPermutation::new((0..8).map(|v| v ^ 7).collect()).unwrap();
        assert_eq!(automorphism_coupling(&q3, &flip, 0).unwrap(), hypercube_flip(3).unwrap());

        let n = 4;
        let dc = build(Family::DoubleClique(n)).unwrap();
        // phi(i) = (i+1)', phi(i') = i+1 with i' stored as n + i.
        let image: Vec<_> = (0..2 * n).map(|v| if v < n { n + (v + 1) % n } else { (v - n + 1) % n }).collect();
        let phi = VertexPermutation::new(image).unwrap();
        row_sums_to_one(&automorphism_coupling(&dc, &phi, 0).unwrap());

        let c6 = build(Family::Cycle(6)).unwrap();
        let rot1 = VertexPermutation::new((0..6).map(|v| (v + 1) % 6).collect()).unwrap();
        assert_eq!(automorphism_coupling(&c6, &rot1, 0), Err(CouplingError::NotFreeAutomorphism));
    }

    #[test]
    fn bipartite_cases() {
        let c6 = build(Family::Cycle(6)).unwrap();
        let k = bipartite_coupling(&c6, sp(0, 2)).unwrap();
        assert_eq!(k.prob(sp(0, 2), sp(1, 3)), ratio(1, 2));
        assert_eq!(k.prob(sp(0, 2), sp(5, 1)), ratio(1, 2));
        assert_eq!(k.prob(sp(0, 2), sp(5, 3)), ratio(0, 1));

        let k33 = build(Family::CompleteBipartite(3, 3)).unwrap();
        let k = bipartite_coupling(&k33, sp(0, 1)).unwrap();
        assert_eq!(k.prob(sp(0, 1), sp(3, 4)), ratio(1, 6));
        assert_eq!(k.prob(sp(0, 1), sp(3, 3)), ratio(0, 1));

        let q3 = build(Family::Hypercube(3)).unwrap();
        let k = bipartite_coupling(&q3, sp(0, 3)).unwrap();
        // N(0) ∩ N(3) = {1, 2}
        assert_eq!(k.prob(sp(0, 3), sp(1, 2)), ratio(2, 9));
        assert_eq!(k.prob(sp(0, 3), sp(4, 7)), ratio(1, 9));
        assert_eq!(k.prob(sp(0, 3), sp(1, 7)), ratio(1, 9));

        assert_eq!(bipartite_coupling(&build(Family::Cycle(5)).unwrap(), sp(0, 2)), Err(CouplingError::NotBipartite));
        assert_eq!(bipartite_coupling(&build(Family::Path(5)).unwrap(), sp(0, 2)), Err(CouplingError::LowDegree(0)));
        assert!(matches!(bipartite_coupling(&c6, sp(0, 1)), Err(CouplingError::InvalidStart { .. })));
        assert!(matches!(bipartite_coupling(&c6, sp(0, 0)), Err(CouplingError::InvalidStart { .. })));
    }

    #[test]
    fn cluster_k4() {
        let (h, k) = cluster_coupling_complete(2, 2).unwrap();
        h.validate().unwrap();
        assert_eq!(k.len(), 8);
        // 1-based clusters {1,4},{2,3} map to clusters {0,1},{2,3} via 1->0, 4->1, 2->2, 3->3.
        let row = k.successors(sp(0, 2));
        assert_eq!(row, vec![(sp(1, 3), ratio(1, 3)), (sp(3, 0), ratio(1, 3)), (sp(3, 1), ratio(1, 3))]);
        assert!(cluster_coupling_complete(1, 3).is_err());
    }

    #[test]
    fn composition_of_deterministic_halves() {
        let g = build(Family::Cycle(4)).unwrap();
        let mut h = HalfStep::default();
        for x in 0..4 {
            let y = (x + 2) % 4;
            h.f.insert((x, y, (x + 1) % 4), ratio(1, 1));
            h.g.insert(((x + 1) % 4, y, (y + 1) % 4), ratio(1, 1));
        }
        let k = compose_super_markovian(&g, &h, sp(0, 2)).unwrap();
        assert_eq!(k.len(), 4);
        assert!(k.states().iter().all(|s| k.successors(*s).len() == 1));

        let mut bad = h.clone();
        bad.f.insert((0, 2, 3), ratio(1, 2));
        assert!(matches!(compose_super_markovian(&g, &bad, sp(0, 2)), Err(CouplingError::MalformedHalfStep(_))));
        let mut missing = h;
        missing.g.clear();
        assert!(matches!(compose_super_markovian(&g, &missing, sp(0, 2)), Err(CouplingError::MalformedHalfStep(_))));
    }

    #[test]
    fn k3_loops() {
        let k = k3_loops_coupling().unwrap();
        assert_eq!(k.len(), 6);
        assert_eq!(
            k.successors(sp(0, 1)),
            vec![(sp(0, 2), ratio(1, 3)), (sp(2, 0), ratio(1, 3)), (sp(2, 1), ratio(1, 3))]
        );
        assert!(k.states().iter().all(|s| k.successors(*s).len() == 3));
    }

    #[test]
    fn near_complete() {
        let oct = build(Family::Octahedron).unwrap();
        let k = near_complete_regular_coupling(&oct, None).unwrap();
        assert_eq!(k.start(), sp(0, 3));
        assert!(k.states().iter().all(|s| s.y == (s.x + 3) % 6));

        let cc6 = build(Family::CycleComplement(6)).unwrap();
        let k = near_complete_regular_coupling(&cc6, None).unwrap();
        // Complement C_6 oriented 0 -> 1 -> 2 -> ... -> 5 -> 0.
        assert!(k.states().iter().all(|s| s.y == (s.x + 1) % 6));
        row_sums_to_one(&k);
        assert!(k.states().iter().all(|s| !cc6.is_adjacent(s.x, s.y) && s.x != s.y));

        assert!(matches!(
            near_complete_regular_coupling(&build(Family::Cycle(8)).unwrap(), None),
            Err(CouplingError::WrongDegree { .. })
        ));
        assert!(matches!(near_complete_regular_coupling(&oct, Some(sp(0, 2))), Err(CouplingError::InvalidStart { .. })));
    }

    #[test]
    fn srg_matchings() {
        let k = srg_matching_coupling(&build(Family::Petersen).unwrap(), None).unwrap();
        assert_eq!(k.len(), 60);
        assert!(srg_matching_coupling(&build(Family::Paley(13)).unwrap(), None).is_ok());
        let c5 = srg_matching_coupling(&build(Family::Cycle(5)).unwrap(), None).unwrap();
        assert_eq!(c5.successors(sp(0, 2)), vec![(sp(1, 3), ratio(1, 2)), (sp(4, 1), ratio(1, 2))]);
        assert_eq!(srg_matching_coupling(&build(Family::Path(4)).unwrap(), None), Err(CouplingError::NotStronglyRegular));
        // K_{3,3} is (6,3,0,3): mu = 3 > 3/2 but lambda = 0 < 3/2, so it is accepted.
        assert!(srg_matching_coupling(&build(Family::CompleteBipartite(3, 3)).unwrap(), None).is_ok());
        // K_{4,4}... complement of 2K_4? Use the 3x3 rook's graph complement: K_{3,3,3} = (9,6,3,6).
        let tri = build(Family::Complete(9)).unwrap();
        let edges: Vec<_> = tri.edges().into_iter().filter(|&(u, v)| u / 3 != v / 3).collect();
        let k333 = Graph::from_edges(9, &edges, false).unwrap();
        assert!(matches!(srg_matching_coupling(&k333, None), Err(CouplingError::SrgConditionViolated(_))));
    }

    #[test]
    fn tree_rules() {
        let k = tree_noncoupling_example().unwrap();
        let v = spider_vertex;
        let root_leaf = k.successors(sp(v(0, 0), v(1, 3)));
        assert_eq!(root_leaf.len(), 3);
        assert!(root_leaf.iter().all(|(t, p)| t.y == v(1, 2) && *p == ratio(1, 3)));
        assert_eq!(k.successors(sp(v(1, 1), v(1, 2))), vec![(sp(v(0, 0), v(1, 3)), ratio(1, 1))]);
        let mut row = k.successors(sp(v(1, 1), v(2, 2)));
        row.sort();
        assert_eq!(row, vec![(sp(v(0, 0), v(2, 3)), ratio(1, 4)), (sp(v(1, 2), v(2, 1)), ratio(3, 4))]);
        assert_eq!(k.len(), 24);
        assert!(tree_noncoupling_with_switch(ratio(1, 1)).is_err());
    }
}
