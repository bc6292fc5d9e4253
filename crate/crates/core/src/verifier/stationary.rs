//! Closed communicating classes and stationary distributions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{reachable_mask, stationary_residual, VerifyError};
use crate::graph::VertexId;
use crate::kernel::{rational_to_f64, JointKernel, Rational, StatePair};

/// Closed classes up to this size are solved exactly; larger ones iteratively.
pub const EXACT_STATE_LIMIT: usize = 3000;

const POWER_TOLERANCE: f64 = 1e-12;
const POWER_MAX_ITERATIONS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum StationaryMethod {
    Exact,
    Iterative { residual: f64, iterations: usize },
}

/// Stationary distribution supported on one closed class, indexed like the
/// kernel's states.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDist {
    class: Vec<usize>,
    exact: Option<Vec<Rational>>,
    approx: Vec<f64>,
    method: StationaryMethod,
}

impl StationaryDist {
    pub fn method(&self) -> &StationaryMethod {
        &self.method
    }

    /// Kernel state indices of the closed class, increasing.
    pub fn class(&self) -> &[usize] {
        &self.class
    }

    /// Indices with positive mass; always the whole class.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.class.iter().copied()
    }

    pub(crate) fn support_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.approx.len()];
        for &i in &self.class {
            mask[i] = true;
        }
        mask
    }

    pub fn exact_values(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn approx_values(&self) -> &[f64] {
        &self.approx
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.approx[i]
    }

    /// Marginal law of one token's position, exact.
    pub fn exact_marginal(&self, k: &JointKernel, token: super::Token) -> Option<Vec<Rational>> {
        let values = self.exact.as_ref()?;
        let mut out = vec![Rational::zero(); k.graph().vertex_count()];
        for (s, p) in k.states().iter().zip(values) {
            out[token.observed(*s)] += p;
        }
        Some(out)
    }
}

/// Closed communicating classes among states reachable from the start,
/// each sorted by state index, ordered by smallest index.
pub fn closed_classes(k: &JointKernel) -> Vec<Vec<usize>> {
    let reachable = reachable_mask(k);
    let comp = strongly_connected(k, &reachable);
    let count = comp.iter().flatten().copied().max().map_or(0, |c| c + 1);
    let mut leaves = vec![false; count];
    for i in (0..k.len()).filter(|&i| reachable[i]) {
        leaves[comp[i].unwrap()] |= k.row(i).iter().any(|(j, _)| comp[*j] != comp[i]);
    }
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (i, c) in comp.iter().enumerate() {
        if let Some(c) = c {
            if !leaves[*c] {
                classes[*c].push(i);
            }
        }
    }
    classes.retain(|c| !c.is_empty());
    classes.sort();
    classes
}

/// Iterative Tarjan over the masked states.
fn strongly_connected(k: &JointKernel, mask: &[bool]) -> Vec<Option<usize>> {
    let n = k.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![None; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut comps = 0;
    for root in (0..n).filter(|&i| mask[i]) {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if let Some((w, _)) = k.row(v).get(*edge) {
                let w = *w;
                *edge += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = Some(comps);
                        if w == v {
                            break;
                        }
                    }
                    comps += 1;
                }
            }
        }
    }
    comp
}

/// The unique stationary distribution of the chain started at the kernel's
/// start state.
pub fn stationary_distribution(k: &JointKernel) -> Result<StationaryDist, VerifyError> {
    stationary_distribution_with_limit(k, EXACT_STATE_LIMIT)
}

/// As [`stationary_distribution`], solving exactly only when the closed
/// class has at most `exact_limit` states.
pub fn stationary_distribution_with_limit(k: &JointKernel, exact_limit: usize) -> Result<StationaryDist, VerifyError> {
    let classes = closed_classes(k);
    if classes.len() != 1 {
        return Err(VerifyError::MultipleClosedClasses(
            classes.iter().map(|c| c.iter().map(|&i| k.states()[i]).collect()).collect(),
        ));
    }
    Ok(solve_class(k, classes.into_iter().next().unwrap(), exact_limit))
}

/// One stationary distribution per closed class reachable from the start.
/// Every stationary distribution of the chain is a mixture of these.
pub fn class_stationaries(k: &JointKernel) -> Result<Vec<StationaryDist>, VerifyError> {
    Ok(closed_classes(k).into_iter().map(|c| solve_class(k, c, EXACT_STATE_LIMIT)).collect())
}

fn solve_class(k: &JointKernel, class: Vec<usize>, exact_limit: usize) -> StationaryDist {
    if class.len() <= exact_limit {
        let values = solve_exact(k, &class);
        debug_assert!(stationary_residual(k, &values).is_zero());
        let approx = values.iter().map(rational_to_f64).collect();
        StationaryDist { class, exact: Some(values), approx, method: StationaryMethod::Exact }
    } else {
        let (approx, residual, iterations) = solve_power(k, &class);
        StationaryDist { class, exact: None, approx, method: StationaryMethod::Iterative { residual, iterations } }
    }
}

/// Fraction-free (Bareiss) elimination on `π(T − I) = 0` restricted to the
/// class, with the last balance equation replaced by `Σπ = 1`. Each equation
/// is scaled to integers first; every intermediate division is exact.
fn solve_exact(k: &JointKernel, class: &[usize]) -> Vec<Rational> {
    let m = class.len();
    let mut local = vec![usize::MAX; k.len()];
    for (a, &i) in class.iter().enumerate() {
        local[i] = a;
    }
    // Row `b` is the balance equation of class state `b`, over unknowns π_a.
    let mut eqs: Vec<Vec<Rational>> = vec![vec![Rational::zero(); m + 1]; m];
    for (a, &i) in class.iter().enumerate() {
        eqs[a][a] -= Rational::one();
        for (j, p) in k.row(i) {
            eqs[local[*j]][a] += p;
        }
    }
    eqs[m - 1] = vec![Rational::one(); m + 1];
    let mut rows: Vec<Vec<BigInt>> = eqs
        .into_iter()
        .map(|row| {
            let scale = row.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
            row.into_iter().map(|r| r.numer() * (&scale / r.denom())).collect()
        })
        .collect();

    let mut prev = BigInt::one();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !rows[r][col].is_zero()).expect("closed class has a unique stationary law");
        rows.swap(col, pivot);
        let (done, rest) = rows.split_at_mut(col + 1);
        let pivot_row = &done[col];
        let p = &pivot_row[col];
        for row in rest.iter_mut() {
            let factor = std::mem::take(&mut row[col]);
            for c in col + 1..=m {
                let v = &row[c] * p - &factor * &pivot_row[c];
                row[c] = v / &prev;
            }
        }
        prev = rows[col][col].clone();
    }
    let mut local_values = vec![Rational::zero(); m];
    for r in (0..m).rev() {
        let mut acc = Rational::from_integer(rows[r][m].clone());
        for c in r + 1..m {
            if !rows[r][c].is_zero() {
                acc -= &local_values[c] * Rational::from_integer(rows[r][c].clone());
            }
        }
        local_values[r] = acc / Rational::from_integer(rows[r][r].clone());
    }
    let mut values = vec![Rational::zero(); k.len()];
    for (a, &i) in class.iter().enumerate() {
        values[i] = std::mem::take(&mut local_values[a]);
    }
    values
}

/// Power iteration on the lazy chain `(I + T)/2`, which has the same
/// stationary law and is aperiodic.
fn solve_power(k: &JointKernel, class: &[usize]) -> (Vec<f64>, f64, usize) {
    let rows: Vec<Vec<(usize, f64)>> =
        (0..k.len()).map(|i| k.row(i).iter().map(|(j, p)| (*j, rational_to_f64(p))).collect()).collect();
    let mut pi = vec![0.0; k.len()];
    for &i in class {
        pi[i] = 1.0 / class.len() as f64;
    }
    let mut next = vec![0.0; k.len()];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < POWER_MAX_ITERATIONS {
        next.iter_mut().for_each(|v| *v = 0.0);
        for &i in class {
            for &(j, p) in &rows[i] {
                next[j] += pi[i] * p;
            }
        }
        residual = class.iter().map(|&i| (next[i] - pi[i]).abs()).sum();
        iterations += 1;
        if residual < POWER_TOLERANCE {
            break;
        }
        for &i in class {
            pi[i] = 0.5 * (pi[i] + next[i]);
        }
    }
    let total: f64 = class.iter().map(|&i| pi[i]).sum();
    class.iter().for_each(|&i| pi[i] /= total);
    (pi, residual, iterations)
}

/// States of each closed class, as pairs.
pub fn class_states(k: &JointKernel, class: &[usize]) -> Vec<StatePair> {
    class.iter().map(|&i| k.states()[i]).collect()
}

/// Clockwise distances `(y − x) mod n` present in a class.
pub fn class_offsets(k: &JointKernel, class: &[usize], n: usize) -> Vec<VertexId> {
    let mut d: Vec<_> = class.iter().map(|&i| (k.states()[i].y + n - k.states()[i].x) % n).collect();
    d.sort_unstable();
    d.dedup();
    d
}
