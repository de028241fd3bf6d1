//! Fixtures shared by the benchmarks.

use mimo_ee::harness::scenario_rng;
use mimo_ee::{Geometry, Problem, Scenario, SystemConfig};

/// A seeded annulus cell with `m` antennas, `k` users and budget `n_rf`,
/// equal powers at the default SNR.
pub fn fixture(m: usize, k: usize, n_rf: usize, seed: u64) -> Problem {
    let cfg = SystemConfig {
        m,
        k,
        n_rf,
        ..SystemConfig::default()
    };
    let scenario = Scenario::generate(k, &Geometry::default(), None, &mut scenario_rng(seed, 0))
        .expect("valid fixture");
    Problem::equal_power(&cfg, &scenario).expect("valid fixture")
}

/// A feasible selection: the first `k1` users and `m1` antennas.
pub fn prefix_selection(problem: &Problem, k1: usize, m1: usize) -> Vec<bool> {
    let cfg = problem.config();
    let mut x = vec![false; cfg.n_bits()];
    x[..k1].fill(true);
    x[cfg.k..cfg.k + m1].fill(true);
    x
}
