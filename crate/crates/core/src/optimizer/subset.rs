//! Subset simulation over independent Bernoulli bits.
//!
//! The target event `F = {g(x) <= 0}` is reached through nested events
//! `F_j = {g(x) <= t_j}` whose thresholds are empirical quantiles of the
//! current population. Each level is repopulated by Markov chains that keep
//! the product-Bernoulli law conditioned on `F_j` invariant: every bit is
//! redrawn from its own marginal and the change is kept only if the chain
//! stays inside `F_j`.

use rand::Rng;

use super::Event;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetConfig {
    /// Target conditional probability of each intermediate level.
    pub level_fraction: f64,
    pub max_levels: usize,
    /// Population used internally at every level when the caller asks for
    /// fewer samples.
    pub min_population: usize,
}

impl Default for SubsetConfig {
    fn default() -> Self {
        SubsetConfig {
            level_fraction: 0.1,
            max_levels: 50,
            min_population: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetOutcome {
    /// Samples distributed on the target event.
    pub samples: Vec<Vec<bool>>,
    /// Estimate of the probability of the target event.
    pub prob_estimate: f64,
    /// Number of levels used, including the unconditional one.
    pub levels: usize,
}

fn draw<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> Vec<bool> {
    p.iter().map(|&pi| rng.random::<f64>() < pi).collect()
}

/// One sweep of component-wise conditional resampling inside `{g <= threshold}`.
fn sweep<E: Event + ?Sized, R: Rng + ?Sized>(
    x: &mut [bool],
    score: &mut f64,
    p: &[f64],
    event: &E,
    threshold: f64,
    rng: &mut R,
) {
    for i in 0..x.len() {
        let proposal = rng.random::<f64>() < p[i];
        if proposal == x[i] {
            continue;
        }
        x[i] = proposal;
        let g = event.violation(x);
        if g <= threshold {
            *score = g;
        } else {
            x[i] = !proposal;
        }
    }
}

/// A population member: state, score, and whether its chain belongs to the
/// half that picks thresholds (the other half estimates level probabilities).
type Member = (Vec<bool>, f64, bool);

/// Grows `n` conditional samples from the given seeds. Each seed starts two
/// chains, one per half; every emitted state is at least one sweep away from
/// its seed and chain lengths differ by at most one.
fn regenerate<E: Event + ?Sized, R: Rng + ?Sized>(
    seeds: Vec<(Vec<bool>, f64)>,
    n: usize,
    p: &[f64],
    event: &E,
    threshold: f64,
    rng: &mut R,
) -> Vec<Member> {
    let chains = 2 * seeds.len();
    let per_chain = n / chains;
    let extra = n % chains;
    let mut out = Vec::with_capacity(n);
    for (j, seed) in seeds.iter().enumerate() {
        for picks in [true, false] {
            let c = 2 * j + usize::from(!picks);
            let len = per_chain + usize::from(c < extra);
            let (mut x, mut g) = seed.clone();
            for _ in 0..len {
                sweep(&mut x, &mut g, p, event, threshold, rng);
                out.push((x.clone(), g, picks));
            }
        }
    }
    out
}

/// Fraction of the estimating half at or below `threshold`.
fn level_fraction(population: &[Member], threshold: f64) -> f64 {
    let (hits, total) = population
        .iter()
        .filter(|m| !m.2)
        .fold((0usize, 0usize), |(h, t), m| {
            (h + usize::from(m.1 <= threshold), t + 1)
        });
    hits as f64 / total as f64
}

fn seeds_below(population: Vec<Member>, threshold: f64) -> Vec<(Vec<bool>, f64)> {
    population
        .into_iter()
        .filter(|m| m.1 <= threshold)
        .map(|(x, g, _)| (x, g))
        .collect()
}

/// Draws `n` samples from the product-Bernoulli law `p` conditioned on
/// `event`, and estimates the probability of the event.
pub fn subset_sim_sample<E: Event + ?Sized, R: Rng + ?Sized>(
    p: &[f64],
    event: &E,
    n: usize,
    config: &SubsetConfig,
    rng: &mut R,
) -> Result<SubsetOutcome> {
    if n == 0 {
        return Err(Error::Usage(
            "subset simulation needs at least one sample".into(),
        ));
    }
    if !(config.level_fraction > 0.0 && config.level_fraction < 1.0) {
        return Err(Error::Usage(format!(
            "level fraction must lie in (0, 1), got {}",
            config.level_fraction
        )));
    }
    if let Some(pi) = p.iter().find(|pi| !(0.0..=1.0).contains(*pi)) {
        return Err(Error::Usage(format!("bit probability {pi} outside [0, 1]")));
    }
    let n_out = n;
    let n = n.max(config.min_population).max(2);
    let mut population: Vec<Member> = (0..n)
        .map(|i| {
            let x = draw(p, rng);
            let g = event.violation(&x);
            (x, g, i % 2 == 0)
        })
        .collect();
    let mut prob = 1.0;
    let mut level = 1;
    let mut previous = f64::INFINITY;
    loop {
        let threshold = next_threshold(&population, config.level_fraction, previous);
        if threshold <= 0.0 {
            prob *= level_fraction(&population, 0.0);
            let seeds = seeds_below(population, 0.0);
            let samples = regenerate(seeds, n_out, p, event, 0.0, rng)
                .into_iter()
                .map(|(x, _, _)| x)
                .collect();
            return Ok(SubsetOutcome {
                samples,
                prob_estimate: prob,
                levels: level,
            });
        }
        if level >= config.max_levels {
            return Err(Error::SamplingFailure {
                levels: level,
                last_threshold: threshold,
                in_target: population.iter().filter(|m| m.1 <= 0.0).count(),
                population: n,
            });
        }
        // Every sample below the threshold is a valid draw from the next
        // conditional level, so all of them seed the chains. The level
        // probability comes from the half that did not pick the threshold,
        // which keeps the choice from biasing the estimate.
        prob *= level_fraction(&population, threshold);
        let seeds = seeds_below(population, threshold);
        population = regenerate(seeds, n, p, event, threshold, rng);
        previous = threshold;
        level += 1;
    }
}

/// Threshold of the next level: the empirical `level_fraction` quantile of
/// the threshold-picking half. When the quantile cannot go below the current
/// level, the next lower score present in that half is used instead, and
/// when none lies below the current level it is kept for another round of
/// chain moves.
fn next_threshold(population: &[Member], level_fraction: f64, previous: f64) -> f64 {
    let mut scores: Vec<f64> = population.iter().filter(|m| m.2).map(|m| m.1).collect();
    scores.sort_by(f64::total_cmp);
    let rank = ((level_fraction * scores.len() as f64).ceil() as usize).clamp(1, scores.len());
    let quantile = scores[rank - 1];
    if quantile < previous {
        return quantile.max(0.0);
    }
    scores
        .iter()
        .rev()
        .find(|&&g| g < previous)
        .map_or(previous, |&g| g.max(0.0))
}
