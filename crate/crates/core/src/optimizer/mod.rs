//! Joint antenna selection and user scheduling.
//!
//! The main solver learns a product-of-Bernoulli distribution over selection
//! vectors by stochastic gradient steps on sampled objective values, using a
//! population per iteration and subset simulation whenever direct sampling
//! cannot hit the feasible set. An exhaustive oracle and a random-selection
//! baseline are provided for comparison.

mod baseline;
mod exhaustive;
mod learner;
mod sampling;
mod subset;

pub use baseline::{random_selection_baseline, BaselineResult, CountCell};
pub use exhaustive::{exhaustive_search, ExhaustiveResult, EXHAUSTIVE_MAX_BITS};
pub use learner::{
    grad_log_density, log_density, probs, run_algorithm2, update_theta, IterationRecord,
    LearnerConfig, LearnerState, ObjectiveScale,
};
pub use sampling::{sample_population, Population};
pub use subset::{subset_sim_sample, SubsetConfig, SubsetOutcome};

use crate::config::SystemConfig;
use crate::power::selection_counts;

/// RF-chain budget and one spare antenna per scheduled user:
/// `M1 <= N_RF` and `K1 <= M1 - 1`.
pub fn check_constraints(x: &[bool], config: &SystemConfig) -> bool {
    let (k1, m1) = selection_counts(x, config.k);
    m1 <= config.n_rf && k1 < m1
}

/// A target event described by a nonnegative violation score that is zero
/// exactly on the event.
pub trait Event {
    fn violation(&self, x: &[bool]) -> f64;

    fn contains(&self, x: &[bool]) -> bool {
        self.violation(x) <= 0.0
    }
}

impl<F: Fn(&[bool]) -> f64> Event for F {
    fn violation(&self, x: &[bool]) -> f64 {
        self(x)
    }
}

/// The feasible set of the selection problem as an [`Event`]:
/// `g(x) = max(0, M1 - N_RF) + max(0, K1 - M1 + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RfConstraint {
    pub k: usize,
    pub n_rf: usize,
}

impl RfConstraint {
    pub fn from_config(config: &SystemConfig) -> Self {
        RfConstraint {
            k: config.k,
            n_rf: config.n_rf,
        }
    }
}

impl Event for RfConstraint {
    fn violation(&self, x: &[bool]) -> f64 {
        let (k1, m1) = selection_counts(x, self.k);
        let (k1, m1, n_rf) = (k1 as f64, m1 as f64, self.n_rf as f64);
        (m1 - n_rf).max(0.0) + (k1 - m1 + 1.0).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, m: usize, n_rf: usize) -> SystemConfig {
        SystemConfig {
            k,
            m,
            n_rf,
            ..SystemConfig::default()
        }
    }

    fn bits(mask: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| mask >> i & 1 == 1).collect()
    }

    #[test]
    fn single_antenna_without_users_is_feasible() {
        let c = cfg(2, 3, 3);
        assert!(check_constraints(&[false, false, true, false, false], &c));
        assert!(!check_constraints(&[false; 5], &c));
    }

    #[test]
    fn rf_budget_violation() {
        let c = cfg(2, 4, 2);
        assert!(!check_constraints(
            &[true, false, true, true, true, false],
            &c
        ));
        assert!(
            RfConstraint::from_config(&c).violation(&[true, false, true, true, true, false]) > 0.0
        );
    }

    #[test]
    fn feasible_count_matches_binomial_enumeration() {
        // independent count: sum over M1 <= N_RF of C(M, M1) * sum_{K1 <= M1-1} C(K, K1)
        fn choose(n: u64, r: u64) -> u64 {
            (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        for n_rf in [8, 4, 1] {
            let c = cfg(6, 8, n_rf);
            let g = RfConstraint::from_config(&c);
            let mut brute = 0;
            for mask in 0..(1u64 << 14) {
                let x = bits(mask, 14);
                let ok = check_constraints(&x, &c);
                assert_eq!(ok, g.contains(&x));
                brute += ok as u64;
            }
            let formula: u64 = (1..=n_rf as u64)
                .map(|m1| choose(8, m1) * (0..m1.min(7)).map(|k1| choose(6, k1)).sum::<u64>())
                .sum();
            assert_eq!(brute, formula, "N_RF = {n_rf}");
        }
        assert_eq!(
            (0..(1u64 << 14))
                .filter(|&m| check_constraints(&bits(m, 14), &cfg(6, 8, 8)))
                .count(),
            9908
        );
    }
}
