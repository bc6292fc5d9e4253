//! Belief filter for one token: tracks the exact conditional law of the
//! hidden token given the observed token's history, and checks that every
//! reachable belief predicts the simple random walk step.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::Zero;

use super::{class_stationaries, is_srw_row, StationaryDist, Token, VerifyError};
use crate::graph::VertexId;
use crate::kernel::{ratio, JointKernel, Rational};

/// Observed position plus the law of the hidden token's position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BeliefState {
    pub observed: VertexId,
    /// Hidden position to probability; positive entries only.
    pub belief: BTreeMap<VertexId, Rational>,
}

impl BeliefState {
    /// Law of the observed token's next position.
    pub fn predict(&self, k: &JointKernel, token: Token) -> BTreeMap<VertexId, Rational> {
        let mut out = BTreeMap::new();
        for (&h, b) in &self.belief {
            let Some(i) = k.index_of(token.state(self.observed, h)) else { continue };
            for (j, p) in k.row(i) {
                *out.entry(token.observed(k.states()[*j])).or_insert_with(Rational::zero) += b * p;
            }
        }
        out
    }

    /// Bayes update on the observed token moving to `next`; `None` if that
    /// move has probability zero.
    pub fn update(&self, k: &JointKernel, token: Token, next: VertexId) -> Option<BeliefState> {
        let mut out: BTreeMap<VertexId, Rational> = BTreeMap::new();
        for (&h, b) in &self.belief {
            let Some(i) = k.index_of(token.state(self.observed, h)) else { continue };
            for (j, p) in k.row(i) {
                let t = k.states()[*j];
                if token.observed(t) == next {
                    *out.entry(token.hidden(t)).or_insert_with(Rational::zero) += b * p;
                }
            }
        }
        let total: Rational = out.values().cloned().sum();
        if total.is_zero() {
            return None;
        }
        out.values_mut().for_each(|v| *v /= &total);
        Some(BeliefState { observed: next, belief: out })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Faithfulness {
    /// Every reachable belief predicts the simple random walk step.
    Faithful { beliefs: usize },
    /// Shortest observed history (oldest first, ending at the current
    /// position) whose predicted next step differs from the walk.
    Violation { history: Vec<VertexId>, predicted: BTreeMap<VertexId, Rational> },
    Inconclusive { beliefs: usize, reason: String },
}

impl Faithfulness {
    pub fn is_faithful(&self) -> bool {
        matches!(self, Faithfulness::Faithful { .. })
    }
}

/// Initial beliefs: conditional of the hidden token given the observed one
/// under `pi`, one per observed position with positive mass.
fn initial_beliefs(k: &JointKernel, pi: &StationaryDist, token: Token) -> Option<Vec<BeliefState>> {
    let values = pi.exact_values()?;
    let mut by_obs: BTreeMap<VertexId, BTreeMap<VertexId, Rational>> = BTreeMap::new();
    for i in pi.support() {
        let s = k.states()[i];
        by_obs.entry(token.observed(s)).or_default().insert(token.hidden(s), values[i].clone());
    }
    Some(
        by_obs
            .into_iter()
            .map(|(observed, mut belief)| {
                let total: Rational = belief.values().cloned().sum();
                belief.values_mut().for_each(|v| *v /= &total);
                BeliefState { observed, belief }
            })
            .collect(),
    )
}

/// Kernel states from which every reachable state already has the walk's
/// step law for `token`; beliefs supported there cannot produce violations.
fn settled_states(k: &JointKernel, token: Token) -> Vec<bool> {
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); k.len()];
    for i in 0..k.len() {
        for (j, _) in k.row(i) {
            preds[*j].push(i);
        }
    }
    let mut unsettled: Vec<bool> = (0..k.len()).map(|i| !is_srw_row(k, i, token)).collect();
    let mut stack: Vec<usize> = (0..k.len()).filter(|&i| unsettled[i]).collect();
    while let Some(j) = stack.pop() {
        for &i in &preds[j] {
            if !unsettled[i] {
                unsettled[i] = true;
                stack.push(i);
            }
        }
    }
    unsettled.into_iter().map(|u| !u).collect()
}

fn srw_row(k: &JointKernel, v: VertexId) -> BTreeMap<VertexId, Rational> {
    let g = k.graph();
    let p = ratio(1, g.degree(v) as i64);
    g.neighbors(v).iter().map(|&w| (w, p.clone())).collect()
}

/// Breadth-first search over distinct beliefs started from the stationary
/// conditionals of every closed class. Returns the shortest violating
/// history, `Faithful` when the belief set closes, and `Inconclusive` when
/// more than `belief_cap` distinct beliefs are seen or the stationary law is
/// not exact.
pub fn filter_faithfulness(k: &JointKernel, token: Token, belief_cap: usize) -> Result<Faithfulness, VerifyError> {
    let settled = settled_states(k, token);
    let mut seen: BTreeSet<BeliefState> = BTreeSet::new();
    let mut queue: VecDeque<(BeliefState, Vec<VertexId>)> = VecDeque::new();
    for pi in class_stationaries(k)? {
        let Some(beliefs) = initial_beliefs(k, &pi, token) else {
            return Ok(Faithfulness::Inconclusive { beliefs: 0, reason: "stationary law is not exact".into() });
        };
        for b in beliefs {
            if seen.insert(b.clone()) {
                let history = vec![b.observed];
                queue.push_back((b, history));
            }
        }
    }
    while let Some((belief, history)) = queue.pop_front() {
        let predicted = belief.predict(k, token);
        if predicted != srw_row(k, belief.observed) {
            return Ok(Faithfulness::Violation { history, predicted });
        }
        let closed = belief.belief.keys().all(|&h| {
            k.index_of(token.state(belief.observed, h)).is_some_and(|i| settled[i])
        });
        if closed {
            continue;
        }
        for &next in predicted.keys() {
            let Some(b) = belief.update(k, token, next) else { continue };
            if seen.contains(&b) {
                continue;
            }
            if seen.len() >= belief_cap {
                return Ok(Faithfulness::Inconclusive {
                    beliefs: seen.len(),
                    reason: format!("more than {belief_cap} distinct beliefs"),
                });
            }
            seen.insert(b.clone());
            let mut h = history.clone();
            h.push(next);
            queue.push_back((b, h));
        }
    }
    Ok(Faithfulness::Faithful { beliefs: seen.len() })
}

/// Belief after observing `history` (oldest first) from the stationary
/// conditional under `pi`; `None` if the history has probability zero.
pub fn belief_after_history(
    k: &JointKernel,
    pi: &StationaryDist,
    token: Token,
    history: &[VertexId],
) -> Option<BeliefState> {
    let (&first, rest) = history.split_first()?;
    let mut belief = initial_beliefs(k, pi, token)?.into_iter().find(|b| b.observed == first)?;
    for &v in rest {
        belief = belief.update(k, token, v)?;
    }
    Some(belief)
}
