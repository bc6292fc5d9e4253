//! Forbidden-state analysis.
//!
//! `F₀` holds the diagonal and every adjacent pair. Each generation re-tests
//! every surviving pair `(x, y)` against the previous generation with a flow
//! network between `N(x)` and `N(y)`: each left node must emit `l/d(x)` and
//! each right node absorb `l/d(y)` (with `l = lcm(d(x), d(y))`) using only
//! arcs into pairs outside the current forbidden set. Pairs whose max flow
//! falls short of `l` are added. The graph admits a uniform avoidance
//! coupling iff the fixed point is not all of `V × V`, and the final flows
//! give such a coupling directly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::kernel::{JointKernel, KernelError, Rational, StatePair};
use crate::maxflow::{max_bipartite_matching, max_flow, FlowNetwork, FlowResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForbiddenError {
    #[error("graph is not connected")]
    NotConnected,
    #[error("lcm of degrees {0} and {1} overflows")]
    LcmOverflow(usize, usize),
    #[error("start state {0} is forbidden")]
    StartForbidden(StatePair),
    #[error("graph is not regular")]
    NotRegular,
    #[error("every pair is forbidden")]
    NoSurvivingPair,
    #[error("no perfect matching between the neighbourhoods of {0}")]
    NoPerfectMatching(StatePair),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Set of ordered vertex pairs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PairSet {
    n: usize,
    bits: Vec<bool>,
    len: usize,
}

impl std::fmt::Debug for PairSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PairSet").field("n", &self.n).field("len", &self.len).finish()
    }
}

impl PairSet {
    pub fn empty(n: usize) -> Self {
        Self { n, bits: vec![false; n * n], len: 0 }
    }

    pub fn full(n: usize) -> Self {
        Self { n, bits: vec![true; n * n], len: n * n }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: VertexId, y: VertexId) -> bool {
        self.bits[x * self.n + y]
    }

    /// Returns true if the pair was newly inserted.
    pub fn insert(&mut self, x: VertexId, y: VertexId) -> bool {
        let slot = &mut self.bits[x * self.n + y];
        if *slot {
            return false;
        }
        *slot = true;
        self.len += 1;
        true
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.n * self.n
    }

    pub fn is_subset(&self, other: &PairSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(x, y)| self.contains(y, x))
    }

    /// Members in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let n = self.n;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i / n, i % n))
    }

    /// Non-members in lexicographic order.
    pub fn complement_iter(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let n = self.n;
        self.bits.iter().enumerate().filter(|(_, &b)| !b).map(move |(i, _)| (i / n, i % n))
    }
}

/// Sequence `F₀ ⊆ F₁ ⊆ …` ending with two equal generations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureTrace {
    pub generations: Vec<PairSet>,
    pub rounds: usize,
}

impl ClosureTrace {
    pub fn fixed_point(&self) -> &PairSet {
        self.generations.last().expect("trace has at least one generation")
    }

    /// First generation index containing `(x, y)`.
    pub fn generation_of(&self, x: VertexId, y: VertexId) -> Option<usize> {
        self.generations.iter().position(|f| f.contains(x, y))
    }
}

/// `F₀ = {(x, y) : x = y or x ~ y}`.
pub fn initial_forbidden(g: &Graph) -> PairSet {
    let n = g.vertex_count();
    let mut f = PairSet::empty(n);
    for x in 0..n {
        f.insert(x, x);
        for &y in g.neighbors(x) {
            f.insert(x, y);
        }
    }
    f
}

/// The flow network testing one pair. Node 0 is the source (`x`), node 1 the
/// sink (`y`), then one node per member of `N(x)` and one per member of
/// `N(y)`; a common neighbour gets a copy on each side.
#[derive(Debug, Clone)]
pub struct PairNetwork {
    pub pair: StatePair,
    pub lcm: u64,
    pub left: Vec<VertexId>,
    pub right: Vec<VertexId>,
    pub network: FlowNetwork,
    /// `(arc index, x', y')` for every middle arc.
    pub middle: Vec<(usize, VertexId, VertexId)>,
}

pub fn pair_test_network(g: &Graph, f: &PairSet, x: VertexId, y: VertexId) -> Result<PairNetwork, ForbiddenError> {
    let left = g.neighbors(x).to_vec();
    let right = g.neighbors(y).to_vec();
    let (dx, dy) = (left.len(), right.len());
    let lcm = checked_lcm(dx, dy)?;
    let nodes = 2 + dx + dy;
    let mut network = FlowNetwork::new(nodes, 0, 1);
    let mut middle = Vec::new();
    if dx > 0 && dy > 0 {
        for i in 0..dx {
            network.add_arc(0, 2 + i, lcm / dx as u64);
        }
        for (i, &xp) in left.iter().enumerate() {
            for (j, &yp) in right.iter().enumerate() {
                // The two copies of a common neighbour are never joined;
                // the diagonal is always forbidden.
                if xp != yp && !f.contains(xp, yp) {
                    let arc = network.add_arc(2 + i, 2 + dx + j, dy as u64);
                    middle.push((arc, xp, yp));
                }
            }
        }
        for j in 0..dy {
            network.add_arc(2 + dx + j, 1, lcm / dy as u64);
        }
    }
    Ok(PairNetwork { pair: StatePair::new(x, y), lcm, left, right, network, middle })
}

fn checked_lcm(a: usize, b: usize) -> Result<u64, ForbiddenError> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    let g = a.gcd(&b) as u64;
    ((a as u64) / g).checked_mul(b as u64).ok_or(ForbiddenError::LcmOverflow(a, b))
}

/// Flow that certifies a pair: units of flow (out of `lcm`) per target pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairFlow {
    pub lcm: u64,
    pub transitions: Vec<(StatePair, u64)>,
    pub flow: FlowResult,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairTest {
    Pass(PairFlow),
    Fail { max_flow: u64, required: u64 },
}

impl PairTest {
    pub fn passed(&self) -> bool {
        matches!(self, PairTest::Pass(_))
    }
}

/// Tests `(x, y)` against `f`: passes iff the network carries `lcm` units.
pub fn pair_test(g: &Graph, f: &PairSet, x: VertexId, y: VertexId) -> Result<PairTest, ForbiddenError> {
    let net = pair_test_network(g, f, x, y)?;
    let flow = max_flow(&net.network);
    if net.lcm == 0 || flow.value != net.lcm {
        return Ok(PairTest::Fail { max_flow: flow.value, required: net.lcm });
    }
    let transitions = net
        .middle
        .iter()
        .filter(|(arc, _, _)| flow.flow[*arc] > 0)
        .map(|&(arc, xp, yp)| (StatePair::new(xp, yp), flow.flow[arc]))
        .collect();
    Ok(PairTest::Pass(PairFlow { lcm: net.lcm, transitions, flow }))
}

/// One synchronous generation: every pair outside `f` is tested against `f`.
pub fn refine_once(g: &Graph, f: &PairSet) -> Result<PairSet, ForbiddenError> {
    let candidates: Vec<_> = f.complement_iter().collect();
    let failed: Vec<Result<Option<(VertexId, VertexId)>, ForbiddenError>> = candidates
        .par_iter()
        .map(|&(x, y)| Ok((!pair_test(g, f, x, y)?.passed()).then_some((x, y))))
        .collect();
    let mut next = f.clone();
    for r in failed {
        if let Some((x, y)) = r? {
            next.insert(x, y);
        }
    }
    Ok(next)
}

/// Iterates [`refine_once`] from `F₀` to the fixed point.
pub fn forbidden_closure(g: &Graph) -> Result<ClosureTrace, ForbiddenError> {
    let mut generations = vec![initial_forbidden(g)];
    loop {
        let current = generations.last().expect("non-empty");
        let next = refine_once(g, current)?;
        let stable = next == *current;
        generations.push(next);
        if stable {
            break;
        }
    }
    let rounds = generations.len() - 1;
    Ok(ClosureTrace { generations, rounds })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub admits: bool,
    /// Lexicographically smallest surviving pair.
    pub witness: Option<StatePair>,
    pub trace: ClosureTrace,
}

/// Decides whether a connected graph admits a uniform avoidance coupling.
pub fn admits_uac(g: &Graph) -> Result<Verdict, ForbiddenError> {
    if !g.is_connected() {
        return Err(ForbiddenError::NotConnected);
    }
    let trace = forbidden_closure(g)?;
    let witness = trace.fixed_point().complement_iter().next().map(|(x, y)| StatePair::new(x, y));
    Ok(Verdict { admits: witness.is_some(), witness, trace })
}

/// Builds the coupling defined by the certifying flows of the fixed point,
/// restricted to the states reachable from `start`.
pub fn extract_uac_kernel(g: &Graph, trace: &ClosureTrace, start: StatePair) -> Result<JointKernel, ForbiddenError> {
    let f = trace.fixed_point();
    if f.contains(start.x, start.y) {
        return Err(ForbiddenError::StartForbidden(start));
    }
    JointKernel::from_reachable(g.clone(), start, |s| match pair_test(g, f, s.x, s.y)? {
        PairTest::Pass(pf) => {
            let l = BigInt::from(pf.lcm);
            Ok(pf
                .transitions
                .into_iter()
                .map(|(t, units)| (t, Rational::new(BigInt::from(units), l.clone())))
                .collect())
        }
        // Only reachable through a non-fixed-point trace.
        PairTest::Fail { .. } => Err(ForbiddenError::StartForbidden(s)),
    })
}

/// Minimum-entropy coupling on a regular graph: token X moves uniformly and
/// token Y follows a perfect matching between `N(x)` and `N(y)` that avoids
/// the fixed point. `start` defaults to the smallest surviving pair.
pub fn minimum_entropy_kernel(
    g: &Graph,
    trace: &ClosureTrace,
    start: Option<StatePair>,
) -> Result<JointKernel, ForbiddenError> {
    g.regular_degree().ok_or(ForbiddenError::NotRegular)?;
    let f = trace.fixed_point();
    let start = match start {
        Some(s) => s,
        None => f
            .complement_iter()
            .next()
            .map(|(x, y)| StatePair::new(x, y))
            .ok_or(ForbiddenError::NoSurvivingPair)?,
    };
    if f.contains(start.x, start.y) {
        return Err(ForbiddenError::StartForbidden(start));
    }
    matching_kernel(g, start, [], |xp, yp| xp != yp && !f.contains(xp, yp))
}

/// Kernel in which X moves to each neighbour with probability `1/k` and Y
/// moves to the partner of X's target under a maximum matching of the
/// allowed pairs between `N(x)` and `N(y)`. Covers the states reachable
/// from `start` and from every state in `seeds`.
pub(crate) fn matching_kernel<A, I>(
    g: &Graph,
    start: StatePair,
    seeds: I,
    allowed: A,
) -> Result<JointKernel, ForbiddenError>
where
    A: Fn(VertexId, VertexId) -> bool,
    I: IntoIterator<Item = StatePair>,
{
    let allowed = &allowed;
    JointKernel::from_seeds(g.clone(), start, seeds, |s| {
        let left = g.neighbors(s.x);
        let right = g.neighbors(s.y);
        let pairs: Vec<_> = left
            .iter()
            .enumerate()
            .flat_map(|(i, &xp)| right.iter().enumerate().filter(move |&(_, &yp)| allowed(xp, yp)).map(move |(j, _)| (i, j)))
            .collect();
        let m = max_bipartite_matching(left.len(), right.len(), &pairs);
        if m.size() != left.len() || left.len() != right.len() || left.is_empty() {
            return Err(ForbiddenError::NoPerfectMatching(s));
        }
        let p = Rational::new(BigInt::from(1), BigInt::from(left.len()));
        Ok(m.pairs.iter().map(|&(i, j)| (StatePair::new(left[i], right[j]), p.clone())).collect::<BTreeMap<_, _>>())
    })
}
