use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::power::{EvalResult, Problem};

/// Random-selection statistics for one `(K1, M1)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountCell {
    pub k1: usize,
    pub m1: usize,
    pub mean_ee: f64,
    pub best_ee: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub best: EvalResult,
    pub selection: Vec<bool>,
    /// One cell per feasible count pair, ordered by `(M1, K1)`.
    pub surface: Vec<CountCell>,
    pub phi_evals: u64,
}

/// Count search with random identities: for every feasible number of
/// antennas and users, draw `trials_per_count` uniformly random user and
/// antenna subsets of those sizes and keep the best objective seen.
pub fn random_selection_baseline<R: Rng + ?Sized>(
    problem: &Problem,
    trials_per_count: usize,
    rng: &mut R,
) -> Result<BaselineResult> {
    if trials_per_count == 0 {
        return Err(Error::Usage(
            "baseline needs at least one trial per count".into(),
        ));
    }
    let cfg = problem.config();
    let (k, m) = (cfg.k, cfg.m);
    let mut best: Option<(EvalResult, Vec<bool>)> = None;
    let mut surface = Vec::new();
    let mut phi_evals = 0;
    let mut x = vec![false; k + m];
    for m1 in 1..=cfg.n_rf.min(m) {
        for k1 in 0..=(m1 - 1).min(k) {
            let mut sum = 0.0;
            let mut cell_best = f64::NEG_INFINITY;
            for _ in 0..trials_per_count {
                x.fill(false);
                for u in sample(rng, k, k1) {
                    x[u] = true;
                }
                for a in sample(rng, m, m1) {
                    x[k + a] = true;
                }
                let r = problem.phi(&x)?;
                phi_evals += 1;
                sum += r.score();
                cell_best = cell_best.max(r.score());
                if r.feasible && best.as_ref().is_none_or(|(b, _)| r.ee > b.ee) {
                    best = Some((r, x.clone()));
                }
            }
            surface.push(CountCell {
                k1,
                m1,
                mean_ee: sum / trials_per_count as f64,
                best_ee: cell_best,
            });
        }
    }
    let (best, selection) = best.ok_or(Error::NoSolution { iterations: 0 })?;
    Ok(BaselineResult {
        best,
        selection,
        surface,
        phi_evals,
    })
}
