//! Joint transition kernels on ordered vertex pairs with exact rational
//! probabilities, and their line-oriented text form.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::{Graph, VertexId};

pub type Rational = num_rational::BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Positions of token X and token Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StatePair {
    pub x: VertexId,
    pub y: VertexId,
}

impl StatePair {
    pub const fn new(x: VertexId, y: VertexId) -> Self {
        Self { x, y }
    }

    pub fn swapped(self) -> Self {
        Self { x: self.y, y: self.x }
    }
}

impl fmt::Display for StatePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("state {0} has a vertex outside the graph")]
    VertexOutOfRange(StatePair),
    #[error("row of {state} sums to {sum}, not 1")]
    RowSum { state: StatePair, sum: String },
    #[error("negative probability on {from} -> {to}")]
    NegativeProbability { from: StatePair, to: StatePair },
    #[error("transition {from} -> {to} leaves the declared state set")]
    UndeclaredTarget { from: StatePair, to: StatePair },
    #[error("start state {0} is not a declared state")]
    UnknownStart(StatePair),
    #[error("kernel declares no states")]
    Empty,
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// Markov chain on ordered vertex pairs.
///
/// Invariants: every row sums to exactly 1, every listed probability is
/// positive, and every target is a declared state.
#[derive(Clone, PartialEq, Eq)]
pub struct JointKernel {
    graph: Graph,
    states: Vec<StatePair>,
    index: BTreeMap<StatePair, usize>,
    rows: Vec<Vec<(usize, Rational)>>,
    start: StatePair,
}

impl fmt::Debug for JointKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JointKernel")
            .field("states", &self.states.len())
            .field("start", &self.start)
            .finish()
    }
}

/// Row-wise transition table used to assemble kernels.
pub type TransitionTable = BTreeMap<StatePair, BTreeMap<StatePair, Rational>>;

impl JointKernel {
    /// Validates and freezes a transition table. Zero entries are dropped;
    /// the state set is the table's keys.
    pub fn new(graph: Graph, start: StatePair, table: TransitionTable) -> Result<Self, KernelError> {
        if table.is_empty() {
            return Err(KernelError::Empty);
        }
        let n = graph.vertex_count();
        let states: Vec<StatePair> = table.keys().copied().collect();
        let index: BTreeMap<StatePair, usize> =
            states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        if !index.contains_key(&start) {
            return Err(KernelError::UnknownStart(start));
        }
        let mut rows = Vec::with_capacity(states.len());
        for (&from, row) in &table {
            if from.x >= n || from.y >= n {
                return Err(KernelError::VertexOutOfRange(from));
            }
            let mut sum = Rational::zero();
            let mut out = Vec::with_capacity(row.len());
            for (&to, p) in row {
                if p.is_negative() {
                    return Err(KernelError::NegativeProbability { from, to });
                }
                if p.is_zero() {
                    continue;
                }
                let &j = index.get(&to).ok_or(KernelError::UndeclaredTarget { from, to })?;
                sum += p;
                out.push((j, p.clone()));
            }
            if !sum.is_one() {
                return Err(KernelError::RowSum { state: from, sum: sum.to_string() });
            }
            rows.push(out);
        }
        Ok(Self { graph, states, index, rows, start })
    }

    /// Explores `step` from `start` and builds the kernel on the reachable set.
    pub fn from_reachable<E, F>(graph: Graph, start: StatePair, step: F) -> Result<Self, E>
    where
        F: FnMut(StatePair) -> Result<BTreeMap<StatePair, Rational>, E>,
        E: From<KernelError>,
    {
        Self::from_seeds(graph, start, [], step)
    }

    /// Like [`JointKernel::from_reachable`], but also explores from every
    /// state in `seeds`, so the kernel covers everything reachable from any
    /// of them.
    pub fn from_seeds<E, F, I>(graph: Graph, start: StatePair, seeds: I, mut step: F) -> Result<Self, E>
    where
        F: FnMut(StatePair) -> Result<BTreeMap<StatePair, Rational>, E>,
        E: From<KernelError>,
        I: IntoIterator<Item = StatePair>,
    {
        let mut table = TransitionTable::new();
        let mut queue = VecDeque::from([start]);
        let mut seen = BTreeSet::from([start]);
        for s in seeds {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            let mut row = step(s)?;
            row.retain(|_, p| !p.is_zero());
            for &t in row.keys() {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
            table.insert(s, row);
        }
        Ok(Self::new(graph, start, table)?)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn start(&self) -> StatePair {
        self.start
    }

    pub fn states(&self) -> &[StatePair] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: StatePair) -> Option<usize> {
        self.index.get(&s).copied()
    }

    /// Positive transitions out of state `i`, by target index.
    pub fn row(&self, i: usize) -> &[(usize, Rational)] {
        &self.rows[i]
    }

    /// `T[from -> to]`, zero when either state is absent.
    pub fn prob(&self, from: StatePair, to: StatePair) -> Rational {
        let (Some(i), Some(j)) = (self.index_of(from), self.index_of(to)) else {
            return Rational::zero();
        };
        self.rows[i]
            .iter()
            .find(|(t, _)| *t == j)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Positive transitions out of `from` as `(target, probability)`.
    pub fn successors(&self, from: StatePair) -> Vec<(StatePair, Rational)> {
        match self.index_of(from) {
            Some(i) => self.rows[i].iter().map(|(j, p)| (self.states[*j], p.clone())).collect(),
            None => Vec::new(),
        }
    }

    /// Restricts to the states reachable from `start`.
    pub fn restricted_to_reachable(&self, start: StatePair) -> Result<JointKernel, KernelError> {
        let i0 = self.index_of(start).ok_or(KernelError::UnknownStart(start))?;
        let mut seen = vec![false; self.len()];
        seen[i0] = true;
        let mut queue = VecDeque::from([i0]);
        while let Some(i) = queue.pop_front() {
            for (j, _) in &self.rows[i] {
                if !seen[*j] {
                    seen[*j] = true;
                    queue.push_back(*j);
                }
            }
        }
        let table = (0..self.len())
            .filter(|&i| seen[i])
            .map(|i| {
                let row = self.rows[i].iter().map(|(j, p)| (self.states[*j], p.clone())).collect();
                (self.states[i], row)
            })
            .collect();
        JointKernel::new(self.graph.clone(), start, table)
    }

    /// Serializes as `s`/`t` records; the first `s` line is the start state.
    /// `header` lines are emitted as `#` comments.
    pub fn to_text(&self, header: &[String]) -> String {
        let mut out = String::new();
        for line in header {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "s {} {}", self.start.x, self.start.y);
        for s in &self.states {
            if *s != self.start {
                let _ = writeln!(out, "s {} {}", s.x, s.y);
            }
        }
        for (i, from) in self.states.iter().enumerate() {
            for (j, p) in &self.rows[i] {
                let to = self.states[*j];
                let _ = writeln!(out, "t {} {} {} {} {}/{}", from.x, from.y, to.x, to.y, p.numer(), p.denom());
            }
        }
        out
    }

    /// Parses the text form against `graph`.
    pub fn parse_text(text: &str, graph: Graph) -> Result<JointKernel, KernelError> {
        let mut start = None;
        let mut table = TransitionTable::new();
        let mut pending = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = trimmed.split_whitespace().collect();
            let num = |k: usize| -> Result<usize, KernelError> {
                tok.get(k).and_then(|t| t.parse().ok()).ok_or_else(|| KernelError::Syntax {
                    line,
                    msg: format!("expected an integer at field {k}"),
                })
            };
            match tok[0] {
                "s" if tok.len() == 3 => {
                    let s = StatePair::new(num(1)?, num(2)?);
                    if table.insert(s, BTreeMap::new()).is_some() {
                        return Err(KernelError::Syntax { line, msg: format!("state {s} declared twice") });
                    }
                    start.get_or_insert(s);
                }
                "t" if tok.len() == 6 => {
                    let from = StatePair::new(num(1)?, num(2)?);
                    let to = StatePair::new(num(3)?, num(4)?);
                    let p: Rational = tok[5].parse().map_err(|_| KernelError::Syntax {
                        line,
                        msg: format!("bad probability `{}`", tok[5]),
                    })?;
                    pending.push((line, from, to, p));
                }
                _ => {
                    return Err(KernelError::Syntax { line, msg: format!("unrecognised record `{trimmed}`") })
                }
            }
        }
        for (line, from, to, p) in pending {
            let row = table.get_mut(&from).ok_or_else(|| KernelError::Syntax {
                line,
                msg: format!("transition from undeclared state {from}"),
            })?;
            if row.insert(to, p).is_some() {
                return Err(KernelError::Syntax { line, msg: format!("duplicate transition {from} -> {to}") });
            }
        }
        let start = start.ok_or(KernelError::Empty)?;
        JointKernel::new(graph, start, table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build, Family};

    fn swap_kernel() -> JointKernel {
        let g = build(Family::Path(2)).unwrap();
        let a = StatePair::new(0, 1);
        let b = StatePair::new(1, 0);
        let table = TransitionTable::from([
            (a, BTreeMap::from([(b, ratio(1, 1))])),
            (b, BTreeMap::from([(a, ratio(1, 1))])),
        ]);
        JointKernel::new(g, a, table).unwrap()
    }

    #[test]
    fn validates_rows() {
        let g = build(Family::Path(2)).unwrap();
        let a = StatePair::new(0, 1);
        let half = TransitionTable::from([(a, BTreeMap::from([(a, ratio(1, 2))]))]);
        assert!(matches!(JointKernel::new(g.clone(), a, half), Err(KernelError::RowSum { .. })));
        let stray = TransitionTable::from([(a, BTreeMap::from([(StatePair::new(1, 0), ratio(1, 1))]))]);
        assert!(matches!(JointKernel::new(g.clone(), a, stray), Err(KernelError::UndeclaredTarget { .. })));
        let outside = TransitionTable::from([(StatePair::new(0, 5), BTreeMap::new())]);
        assert!(JointKernel::new(g, StatePair::new(0, 5), outside).is_err());
    }

    #[test]
    fn text_round_trip() {
        let k = swap_kernel();
        let text = k.to_text(&["construction: swap".into()]);
        assert!(text.starts_with("# construction: swap\ns 0 1\n"));
        let back = JointKernel::parse_text(&text, k.graph().clone()).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn parse_rejects_malformed() {
        let g = build(Family::Path(2)).unwrap();
        assert!(matches!(
            JointKernel::parse_text("s 0 1\nt 0 1 0 1 1/2\n", g.clone()),
            Err(KernelError::RowSum { .. })
        ));
        assert!(matches!(
            JointKernel::parse_text("s 0 1\nt 1 0 0 1 1/1\n", g.clone()),
            Err(KernelError::Syntax { line: 2, .. })
        ));
        assert!(matches!(JointKernel::parse_text("s 0 1\nx\n", g.clone()), Err(KernelError::Syntax { .. })));
        assert!(matches!(JointKernel::parse_text("", g), Err(KernelError::Empty)));
    }

    #[test]
    fn reachable_restriction() {
        let g = build(Family::Path(3)).unwrap();
        let a = StatePair::new(0, 2);
        let b = StatePair::new(2, 0);
        let table = TransitionTable::from([
            (a, BTreeMap::from([(a, ratio(1, 1))])),
            (b, BTreeMap::from([(a, ratio(1, 1))])),
        ]);
        let k = JointKernel::new(g, b, table).unwrap();
        assert_eq!(k.restricted_to_reachable(a).unwrap().len(), 1);
        assert_eq!(k.prob(b, a), ratio(1, 1));
        assert_eq!(k.prob(a, b), ratio(0, 1));
    }
}
