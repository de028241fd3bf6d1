use rand::Rng;

use super::subset::{subset_sim_sample, SubsetConfig};
use super::{check_constraints, RfConstraint};
use crate::config::SystemConfig;
use crate::error::Result;

/// One iteration's population of selection vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// Direct draws (possibly including infeasible vectors), or conditional
    /// draws that are all feasible when the rare-event path was taken.
    pub samples: Vec<Vec<bool>>,
    /// Feasible-set probability estimate when subset simulation was used.
    pub rare_event: Option<f64>,
}

impl Population {
    pub fn feasible<'a>(
        &'a self,
        config: &'a SystemConfig,
    ) -> impl Iterator<Item = (usize, &'a [bool])> + 'a {
        self.samples
            .iter()
            .enumerate()
            .filter(move |(_, x)| check_constraints(x, config))
            .map(|(i, x)| (i, x.as_slice()))
    }
}

/// Draws `n1` independent vectors from `p`. Only when none of them is
/// feasible are they replaced by `n1` subset-simulation samples conditioned
/// on the feasible set.
pub fn sample_population<R: Rng + ?Sized>(
    p: &[f64],
    n1: usize,
    config: &SystemConfig,
    subset: &SubsetConfig,
    rng: &mut R,
) -> Result<Population> {
    let samples: Vec<Vec<bool>> = (0..n1)
        .map(|_| p.iter().map(|&pi| rng.random::<f64>() < pi).collect())
        .collect();
    if samples.iter().any(|x| check_constraints(x, config)) {
        return Ok(Population {
            samples,
            rare_event: None,
        });
    }
    let out = subset_sim_sample(p, &RfConstraint::from_config(config), n1, subset, rng)?;
    Ok(Population {
        samples: out.samples,
        rare_event: Some(out.prob_estimate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(k: usize, m: usize, n_rf: usize) -> SystemConfig {
        SystemConfig {
            k,
            m,
            n_rf,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn loose_budget_takes_the_direct_path() {
        // Feasible mass under p = 0.5 by enumeration; the direct path fails
        // only if all 20 draws miss it.
        let c = cfg(3, 5, 5);
        let feasible_mass = (0..256u32)
            .filter(|m| {
                let x: Vec<bool> = (0..8).map(|i| m >> i & 1 == 1).collect();
                check_constraints(&x, &c)
            })
            .count() as f64
            / 256.0;
        assert!(1.0 - (1.0 - feasible_mass).powi(20) > 0.999_99);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let pop =
                sample_population(&[0.5; 8], 20, &c, &SubsetConfig::default(), &mut rng).unwrap();
            assert!(pop.rare_event.is_none());
            assert_eq!(pop.samples.len(), 20);
        }
    }

    #[test]
    fn saturated_probabilities_force_the_rare_event_path() {
        let c = cfg(4, 8, 3);
        let exact: f64 = (0..4096u32)
            .filter(|m| {
                let x: Vec<bool> = (0..12).map(|i| m >> i & 1 == 1).collect();
                check_constraints(&x, &c)
            })
            .map(|m| 0.9f64.powi(m.count_ones() as i32) * 0.1f64.powi(12 - m.count_ones() as i32))
            .sum();
        assert!(exact < 1e-4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pop =
            sample_population(&[0.9; 12], 20, &c, &SubsetConfig::default(), &mut rng).unwrap();
        let prob = pop.rare_event.expect("rare-event path");
        assert!(
            prob > exact / 100.0 && prob < exact * 100.0,
            "{prob} vs {exact}"
        );
        assert_eq!(pop.samples.len(), 20);
        assert!(pop.samples.iter().all(|x| check_constraints(x, &c)));
    }

    #[test]
    fn single_sample_population() {
        let c = cfg(2, 4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pop = sample_population(&[0.5; 6], 1, &c, &SubsetConfig::default(), &mut rng).unwrap();
        assert_eq!(pop.samples.len(), 1);
        assert_eq!(pop.feasible(&c).count(), 1);
    }
}
