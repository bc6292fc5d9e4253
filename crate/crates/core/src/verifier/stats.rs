//! Seeded simulation and chi-square frequency tests.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{Token, VerifyError};
use crate::graph::VertexId;
use crate::kernel::{rational_to_f64, JointKernel, StatePair};

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_MIN_COUNT: u64 = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    /// Visited states, starting with the start state; `steps + 1` entries.
    pub states: Vec<StatePair>,
    /// Sampled transitions in which X landed on Y's vertex or the tokens met.
    pub collisions: u64,
}

struct Sampler {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Sampler {
    fn new(k: &JointKernel) -> Self {
        let rows = (0..k.len())
            .map(|i| {
                let mut acc = 0.0;
                k.row(i)
                    .iter()
                    .map(|(j, p)| {
                        acc += rational_to_f64(p);
                        (*j, acc)
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn step(&self, i: usize, rng: &mut ChaCha8Rng) -> usize {
        let row = &self.rows[i];
        let u: f64 = rng.random::<f64>() * row.last().map_or(1.0, |r| r.1);
        row.iter().find(|&&(_, c)| u < c).unwrap_or(row.last().expect("rows are non-empty")).0
    }
}

fn run(k: &JointKernel, sampler: &Sampler, steps: usize, mut rng: ChaCha8Rng) -> Trajectory {
    let mut i = k.index_of(k.start()).expect("start is a kernel state");
    let mut states = Vec::with_capacity(steps + 1);
    states.push(k.start());
    let mut collisions = 0;
    for _ in 0..steps {
        let from = k.states()[i];
        i = sampler.step(i, &mut rng);
        let to = k.states()[i];
        if to.x == from.y || to.x == to.y {
            collisions += 1;
        }
        states.push(to);
    }
    Trajectory { states, collisions }
}

/// `steps` transitions from the start state, driven by ChaCha8 seeded with
/// `seed`.
pub fn simulate(k: &JointKernel, steps: usize, seed: u64) -> Trajectory {
    run(k, &Sampler::new(k), steps, ChaCha8Rng::seed_from_u64(seed))
}

/// Independent runs of `steps` transitions each; worker `w` uses stream `w`
/// of the generator seeded with `seed`. Output order is by worker.
pub fn monte_carlo(k: &JointKernel, steps: usize, workers: usize, seed: u64) -> Vec<Trajectory> {
    let sampler = Sampler::new(k);
    (0..workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            run(k, &sampler, steps, rng)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketResult {
    /// Observed positions, oldest first; the last is the current vertex.
    pub history: Vec<VertexId>,
    pub observations: u64,
    pub statistic: f64,
    pub p_value: f64,
    /// Next-step frequencies, by vertex.
    pub counts: BTreeMap<VertexId, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryTestReport {
    pub token: Token,
    pub window: usize,
    pub alpha: f64,
    pub tested: Vec<BucketResult>,
    pub skipped: Vec<(Vec<VertexId>, u64)>,
    pub rejected: bool,
    /// Bucket with the smallest p-value.
    pub worst: Option<usize>,
}

/// Pearson statistic and p-value of `counts` against uniform over
/// `support`. Mass outside the support gives p = 0.
fn chi_square_uniform(counts: &BTreeMap<VertexId, u64>, support: &[VertexId]) -> (f64, f64) {
    let n: u64 = counts.values().sum();
    if counts.keys().any(|v| support.binary_search(v).is_err()) {
        return (f64::INFINITY, 0.0);
    }
    let expected = n as f64 / support.len() as f64;
    let stat = support
        .iter()
        .map(|v| {
            let o = *counts.get(v).unwrap_or(&0) as f64;
            (o - expected).powi(2) / expected
        })
        .sum();
    (stat, p_value(stat, support.len() - 1))
}

fn p_value(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).map(|d| d.sf(stat)).unwrap_or(0.0)
}

/// For each length-`window` history of the observed token, tests the next
/// step against uniform over the current vertex's neighbours. Buckets with
/// fewer than `min_count` observations are skipped. Rejects when any bucket
/// has p below `alpha / tested buckets`.
pub fn history_frequency_test(
    segments: &[&[StatePair]],
    k: &JointKernel,
    token: Token,
    window: usize,
    alpha: f64,
    min_count: u64,
) -> Result<HistoryTestReport, VerifyError> {
    if window == 0 {
        return Err(VerifyError::InvalidArgument("window must be at least 1".into()));
    }
    let g = k.graph();
    let mut buckets: BTreeMap<Vec<VertexId>, BTreeMap<VertexId, u64>> = BTreeMap::new();
    for seg in segments {
        let obs: Vec<VertexId> = seg.iter().map(|s| token.observed(*s)).collect();
        for w in obs.windows(window + 1) {
            *buckets.entry(w[..window].to_vec()).or_default().entry(w[window]).or_insert(0) += 1;
        }
    }
    let mut tested = Vec::new();
    let mut skipped = Vec::new();
    for (history, counts) in buckets {
        let n: u64 = counts.values().sum();
        if n < min_count {
            skipped.push((history, n));
            continue;
        }
        let current = *history.last().unwrap();
        let (statistic, p_value) = chi_square_uniform(&counts, g.neighbors(current));
        tested.push(BucketResult { history, observations: n, statistic, p_value, counts });
    }
    if tested.is_empty() {
        return Err(VerifyError::TrajectoryTooShort { min_count });
    }
    let threshold = alpha / tested.len() as f64;
    let worst = (0..tested.len()).min_by(|&a, &b| tested[a].p_value.total_cmp(&tested[b].p_value));
    let rejected = tested.iter().any(|b| b.p_value < threshold);
    Ok(HistoryTestReport { token, window, alpha, tested, skipped, rejected, worst })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTestReport {
    pub alpha: f64,
    /// `(state, observations, p-value)` for each tested state.
    pub tested: Vec<(StatePair, u64, f64)>,
    pub skipped: usize,
    pub rejected: bool,
}

/// Per-state chi-square of empirical transitions against the kernel row,
/// Bonferroni-corrected.
pub fn transition_frequency_test(
    segments: &[&[StatePair]],
    k: &JointKernel,
    alpha: f64,
    min_count: u64,
) -> Result<TransitionTestReport, VerifyError> {
    let mut counts: BTreeMap<usize, BTreeMap<usize, u64>> = BTreeMap::new();
    for seg in segments {
        for w in seg.windows(2) {
            let (Some(i), Some(j)) = (k.index_of(w[0]), k.index_of(w[1])) else {
                return Err(VerifyError::InvalidArgument(format!("trajectory leaves the kernel at {}", w[1])));
            };
            *counts.entry(i).or_default().entry(j).or_insert(0) += 1;
        }
    }
    let mut tested = Vec::new();
    let mut skipped = 0;
    for (i, row_counts) in counts {
        let n: u64 = row_counts.values().sum();
        if n < min_count {
            skipped += 1;
            continue;
        }
        let row = k.row(i);
        if row_counts.keys().any(|j| !row.iter().any(|(t, _)| t == j)) {
            tested.push((k.states()[i], n, 0.0));
            continue;
        }
        let stat: f64 = row
            .iter()
            .map(|(j, p)| {
                let e = n as f64 * rational_to_f64(p);
                let o = *row_counts.get(j).unwrap_or(&0) as f64;
                (o - e).powi(2) / e
            })
            .sum();
        tested.push((k.states()[i], n, p_value(stat, row.len() - 1)));
    }
    if tested.is_empty() {
        return Err(VerifyError::TrajectoryTooShort { min_count });
    }
    let threshold = alpha / tested.len() as f64;
    let rejected = tested.iter().any(|t| t.2 < threshold);
    Ok(TransitionTestReport { alpha, tested, skipped, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::{fixed_distance_cycle, k3_loops_coupling, tree_noncoupling_example};
    use crate::graph::spider_vertex;

    #[test]
    fn seeded_runs_are_reproducible() {
        let k = k3_loops_coupling().unwrap();
        assert_eq!(simulate(&k, 1000, 7), simulate(&k, 1000, 7));
        assert_ne!(simulate(&k, 1000, 7).states, simulate(&k, 1000, 8).states);
        assert_eq!(monte_carlo(&k, 500, 4, 3), monte_carlo(&k, 500, 4, 3));
        let runs = monte_carlo(&k, 500, 2, 3);
        assert_ne!(runs[0].states, runs[1].states);
    }

    #[test]
    fn one_step_follows_start_row() {
        let k = fixed_distance_cycle(9, 3).unwrap();
        let t = simulate(&k, 1, 1);
        assert_eq!(t.states.len(), 2);
        assert!(k.prob(t.states[0], t.states[1]) > num_traits::Zero::zero());
    }

    #[test]
    fn no_collisions() {
        let k = fixed_distance_cycle(9, 3).unwrap();
        assert_eq!(simulate(&k, 100_000, 5).collisions, 0);
        let k = tree_noncoupling_example().unwrap();
        assert_eq!(simulate(&k, 100_000, 5).collisions, 0);
    }

    #[test]
    fn tree_history_rejected() {
        let k = tree_noncoupling_example().unwrap();
        let t = simulate(&k, 200_000, 11);
        let report = history_frequency_test(&[&t.states], &k, Token::X, 3, DEFAULT_ALPHA, DEFAULT_MIN_COUNT).unwrap();
        assert!(report.rejected);
        let v = spider_vertex;
        let bucket = report.tested.iter().find(|b| b.history == vec![v(1, 3), v(1, 2), v(1, 1)]).unwrap();
        let share = bucket.counts[&v(1, 2)] as f64 / bucket.observations as f64;
        assert!((share - 0.75).abs() < 0.05, "share {share}");
    }

    #[test]
    fn fixed_distance_not_rejected() {
        let k = fixed_distance_cycle(9, 3).unwrap();
        let t = simulate(&k, 200_000, 2);
        let report = history_frequency_test(&[&t.states], &k, Token::X, 3, DEFAULT_ALPHA, DEFAULT_MIN_COUNT).unwrap();
        assert!(!report.rejected);
        let rows = transition_frequency_test(&[&t.states], &k, DEFAULT_ALPHA, DEFAULT_MIN_COUNT).unwrap();
        assert!(!rows.rejected);
    }

    #[test]
    fn too_short() {
        let k = fixed_distance_cycle(9, 3).unwrap();
        let t = simulate(&k, 10, 2);
        assert!(matches!(
            history_frequency_test(&[&t.states], &k, Token::X, 3, DEFAULT_ALPHA, DEFAULT_MIN_COUNT),
            Err(VerifyError::TrajectoryTooShort { .. })
        ));
    }
}
