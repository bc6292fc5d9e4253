//! Exact and statistical verification of joint kernels: stationary
//! distributions, the avoidance conditions, per-token uniformity, marginal
//! stationarity, a belief-filter faithfulness check, and Monte Carlo tests.

mod filter;
mod stationary;
mod stats;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::graph::VertexId;
use crate::kernel::{ratio, rational_to_f64, JointKernel, Rational, StatePair};

pub use filter::{belief_after_history, filter_faithfulness, BeliefState, Faithfulness};
pub use stationary::{
    class_offsets, class_states, class_stationaries, closed_classes, stationary_distribution, stationary_distribution_with_limit,
    StationaryDist, StationaryMethod, EXACT_STATE_LIMIT,
};
pub use stats::{
    history_frequency_test, monte_carlo, simulate, transition_frequency_test, BucketResult, HistoryTestReport,
    Trajectory, TransitionTestReport, DEFAULT_ALPHA, DEFAULT_MIN_COUNT,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("kernel has {} closed classes reachable from the start; no unique stationary distribution", .0.len())]
    MultipleClosedClasses(Vec<Vec<StatePair>>),
    #[error("trajectory too short: every history bucket has fewer than {min_count} observations")]
    TrajectoryTooShort { min_count: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Which token a check looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    X,
    Y,
}

impl Token {
    pub fn observed(self, s: StatePair) -> VertexId {
        match self {
            Token::X => s.x,
            Token::Y => s.y,
        }
    }

    pub fn hidden(self, s: StatePair) -> VertexId {
        match self {
            Token::X => s.y,
            Token::Y => s.x,
        }
    }

    /// State with the observed token at `observed` and the other at `hidden`.
    pub fn state(self, observed: VertexId, hidden: VertexId) -> StatePair {
        match self {
            Token::X => StatePair::new(observed, hidden),
            Token::Y => StatePair::new(hidden, observed),
        }
    }
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Token::X => "X",
            Token::Y => "Y",
        })
    }
}

/// Distribution of the next position of `token` from state index `i`.
pub fn token_step_marginal(k: &JointKernel, i: usize, token: Token) -> BTreeMap<VertexId, Rational> {
    let mut out = BTreeMap::new();
    for (j, p) in k.row(i) {
        *out.entry(token.observed(k.states()[*j])).or_insert_with(Rational::zero) += p;
    }
    out
}

/// Whether the step marginal of `token` at state index `i` is the simple
/// random walk row of its current vertex.
pub(crate) fn is_srw_row(k: &JointKernel, i: usize, token: Token) -> bool {
    let g = k.graph();
    let v = token.observed(k.states()[i]);
    let marginal = token_step_marginal(k, i, token);
    let p = ratio(1, g.degree(v) as i64);
    marginal.len() == g.degree(v) && g.neighbors(v).iter().all(|w| marginal.get(w) == Some(&p))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AvoidanceViolation {
    /// Positive stationary mass on a diagonal state.
    Collision(StatePair),
    /// A positive transition on the stationary support in which X lands on
    /// Y's current vertex or the tokens end on the same vertex.
    StepOnto { from: StatePair, to: StatePair, probability: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvoidanceReport {
    pub passed: bool,
    pub witness: Option<AvoidanceViolation>,
}

/// Avoidance over the stationary support: no diagonal states, and no
/// transition `(v,w) -> (w,·)`. Y stepping onto X's old vertex is allowed.
pub fn check_avoidance(k: &JointKernel, pi: &StationaryDist) -> AvoidanceReport {
    let mut witness = None;
    for i in pi.support() {
        let s = k.states()[i];
        if s.x == s.y {
            witness = Some(AvoidanceViolation::Collision(s));
            break;
        }
        if let Some((j, p)) = k.row(i).iter().find(|(j, _)| {
            let t = k.states()[*j];
            t.x == s.y || t.x == t.y
        }) {
            witness = Some(AvoidanceViolation::StepOnto { from: s, to: k.states()[*j], probability: p.clone() });
            break;
        }
    }
    AvoidanceReport { passed: witness.is_none(), witness }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformityViolation {
    pub state: StatePair,
    pub token: Token,
    pub target: VertexId,
    pub marginal: Rational,
    pub expected: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformityReport {
    pub passed: bool,
    /// Violations on the stationary support, in state order.
    pub failures: Vec<UniformityViolation>,
    /// Violations at reachable states with zero stationary mass.
    pub warnings: Vec<UniformityViolation>,
}

impl UniformityReport {
    /// First failure that puts too much mass on a target, else the first failure.
    pub fn witness(&self) -> Option<&UniformityViolation> {
        self.failures.iter().find(|v| v.marginal > v.expected).or(self.failures.first())
    }
}

/// Per-token marginals equal `1/d` on each neighbour, exactly, at every
/// stationary-support state. Other states reachable from the start are
/// checked too but only produce warnings.
pub fn check_uniformity(k: &JointKernel, pi: &StationaryDist) -> UniformityReport {
    let g = k.graph();
    let support = pi.support_mask();
    let reachable = reachable_mask(k);
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for i in (0..k.len()).filter(|&i| reachable[i]) {
        let s = k.states()[i];
        for token in [Token::X, Token::Y] {
            let v = token.observed(s);
            let expected = ratio(1, g.degree(v) as i64);
            let marginal = token_step_marginal(k, i, token);
            let mut targets: Vec<VertexId> = g.neighbors(v).to_vec();
            targets.extend(marginal.keys().copied().filter(|w| !g.is_adjacent(v, *w)));
            for target in targets {
                let m = marginal.get(&target).cloned().unwrap_or_else(Rational::zero);
                let want = if g.is_adjacent(v, target) { expected.clone() } else { Rational::zero() };
                if m != want {
                    let violation = UniformityViolation { state: s, token, target, marginal: m, expected: want };
                    if support[i] {
                        failures.push(violation);
                    } else {
                        warnings.push(violation);
                    }
                }
            }
        }
    }
    UniformityReport { passed: failures.is_empty(), failures, warnings }
}

pub(crate) fn reachable_mask(k: &JointKernel) -> Vec<bool> {
    let mut seen = vec![false; k.len()];
    let Some(i0) = k.index_of(k.start()) else { return seen };
    seen[i0] = true;
    let mut stack = vec![i0];
    while let Some(i) = stack.pop() {
        for (j, _) in k.row(i) {
            if !seen[*j] {
                seen[*j] = true;
                stack.push(*j);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalMismatch {
    pub token: Token,
    pub vertex: VertexId,
    pub observed: String,
    pub expected: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalReport {
    pub x_passed: bool,
    pub y_passed: bool,
    /// Every mismatching vertex, X first.
    pub mismatches: Vec<MarginalMismatch>,
    pub exact: bool,
}

impl MarginalReport {
    pub fn passed(&self) -> bool {
        self.x_passed && self.y_passed
    }
}

/// Tolerance for comparing iterative stationary marginals.
const ITERATIVE_TOLERANCE: f64 = 1e-9;

/// Each token's stationary marginal equals `d(v) / Σ d`. Exact when `pi`
/// is exact; otherwise compared within `1e-9`.
pub fn check_marginal_stationary(k: &JointKernel, pi: &StationaryDist) -> MarginalReport {
    let g = k.graph();
    let total = g.degree_sum() as i64;
    let mut mismatches = Vec::new();
    let mut passed = [true, true];
    for (slot, token) in [Token::X, Token::Y].into_iter().enumerate() {
        for v in 0..g.vertex_count() {
            let expected = ratio(g.degree(v) as i64, total);
            let (ok, shown) = match pi.exact_values() {
                Some(values) => {
                    let m: Rational = k
                        .states()
                        .iter()
                        .zip(values)
                        .filter(|(s, _)| token.observed(**s) == v)
                        .map(|(_, p)| p.clone())
                        .sum();
                    (m == expected, m.to_string())
                }
                None => {
                    let m: f64 = k
                        .states()
                        .iter()
                        .zip(pi.approx_values())
                        .filter(|(s, _)| token.observed(**s) == v)
                        .map(|(_, p)| *p)
                        .sum();
                    ((m - rational_to_f64(&expected)).abs() < ITERATIVE_TOLERANCE, format!("{m:.12}"))
                }
            };
            if !ok {
                passed[slot] = false;
                mismatches.push(MarginalMismatch { token, vertex: v, observed: shown, expected });
            }
        }
    }
    MarginalReport { x_passed: passed[0], y_passed: passed[1], mismatches, exact: pi.exact_values().is_some() }
}

/// Largest absolute entry of `πT − π`, exact.
pub fn stationary_residual(k: &JointKernel, values: &[Rational]) -> Rational {
    let mut next = vec![Rational::zero(); k.len()];
    for (i, p) in values.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        for (j, t) in k.row(i) {
            next[*j] += p * t;
        }
    }
    next.iter().zip(values).map(|(a, b)| (a - b).abs()).max().unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::{
        bipartite_coupling, cluster_coupling_complete, fixed_distance_cycle, hypercube_flip, k3_loops_coupling,
    };
    use crate::forbidden::{extract_uac_kernel, forbidden_closure};
    use crate::graph::{build, Family};
    use crate::kernel::TransitionTable;

    fn sp(x: usize, y: usize) -> StatePair {
        StatePair::new(x, y)
    }

    #[test]
    fn avoidance_examples() {
        let k = fixed_distance_cycle(9, 3).unwrap();
        assert!(check_avoidance(&k, &stationary_distribution(&k).unwrap()).passed);
        let (_, c) = cluster_coupling_complete(2, 2).unwrap();
        assert!(check_avoidance(&c, &stationary_distribution(&c).unwrap()).passed);

        let p2 = build(Family::Path(2)).unwrap();
        let table = TransitionTable::from([
            (sp(0, 1), BTreeMap::from([(sp(1, 0), ratio(1, 1))])),
            (sp(1, 0), BTreeMap::from([(sp(0, 1), ratio(1, 1))])),
        ]);
        let swap = JointKernel::new(p2, sp(0, 1), table).unwrap();
        let report = check_avoidance(&swap, &stationary_distribution(&swap).unwrap());
        assert!(!report.passed);
        assert_eq!(
            report.witness,
            Some(AvoidanceViolation::StepOnto { from: sp(0, 1), to: sp(1, 0), probability: ratio(1, 1) })
        );
    }

    #[test]
    fn uniformity_examples() {
        let k33 = build(Family::CompleteBipartite(3, 3)).unwrap();
        let k = bipartite_coupling(&k33, sp(0, 1)).unwrap();
        assert!(check_uniformity(&k, &stationary_distribution(&k).unwrap()).passed);

        let (_, c) = cluster_coupling_complete(2, 2).unwrap();
        let report = check_uniformity(&c, &stationary_distribution(&c).unwrap());
        assert!(!report.passed);
        let w = report.witness().unwrap();
        assert_eq!((w.state.y, w.token, w.target), (2, Token::X, 3));
        assert_eq!((w.marginal.clone(), w.expected.clone()), (ratio(2, 3), ratio(1, 3)));

        let c6 = build(Family::Cycle(6)).unwrap();
        let trace = forbidden_closure(&c6).unwrap();
        let k = extract_uac_kernel(&c6, &trace, sp(0, 2)).unwrap();
        for pi in class_stationaries(&k).unwrap() {
            assert!(check_uniformity(&k, &pi).passed);
        }
    }

    #[test]
    fn marginal_examples() {
        let k = hypercube_flip(3).unwrap();
        let report = check_marginal_stationary(&k, &stationary_distribution(&k).unwrap());
        assert!(report.passed() && report.exact);

        let k = fixed_distance_cycle(5, 2).unwrap();
        let pi = stationary_distribution(&k).unwrap();
        assert!(check_marginal_stationary(&k, &pi).passed());
        assert!(pi.exact_values().unwrap().iter().all(|p| *p == ratio(1, 5)));

        let k = k3_loops_coupling().unwrap();
        assert!(check_marginal_stationary(&k, &stationary_distribution(&k).unwrap()).passed());
    }

    #[test]
    fn uniformity_reports_over_mass_first() {
        let (_, c) = cluster_coupling_complete(2, 2).unwrap();
        let report = check_uniformity(&c, &stationary_distribution(&c).unwrap());
        assert!(report.failures.iter().any(|v| v.marginal.is_zero()));
        assert!(report.warnings.is_empty());
    }
}
