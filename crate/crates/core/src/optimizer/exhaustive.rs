use super::check_constraints;
use crate::error::{Error, Result};
use crate::power::{EvalResult, Problem};

/// Largest selection vector the oracle will enumerate.
pub const EXHAUSTIVE_MAX_BITS: usize = 26;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub best: EvalResult,
    pub selection: Vec<bool>,
    /// Objective evaluations (feasible vectors only).
    pub phi_evals: u64,
}

/// Enumerates every selection vector and returns the feasible maximizer of
/// the objective. Ties keep the first vector in enumeration order.
pub fn exhaustive_search(problem: &Problem) -> Result<ExhaustiveResult> {
    let config = problem.config();
    let n = problem.n_bits();
    if n > EXHAUSTIVE_MAX_BITS {
        return Err(Error::Usage(format!(
            "exhaustive search is limited to K + M <= {EXHAUSTIVE_MAX_BITS}, got {n}"
        )));
    }
    let mut x = vec![false; n];
    let mut best: Option<(EvalResult, Vec<bool>)> = None;
    let mut phi_evals = 0;
    for mask in 0u64..(1u64 << n) {
        for (i, bit) in x.iter_mut().enumerate() {
            *bit = mask >> i & 1 == 1;
        }
        if !check_constraints(&x, config) {
            continue;
        }
        let r = problem.phi(&x)?;
        phi_evals += 1;
        if r.feasible && best.as_ref().is_none_or(|(b, _)| r.ee > b.ee) {
            best = Some((r, x.clone()));
        }
    }
    let (best, selection) = best.ok_or(Error::NoSolution { iterations: 0 })?;
    Ok(ExhaustiveResult {
        best,
        selection,
        phi_evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use crate::scenario::Scenario;

    fn problem(k: usize, m: usize, n_rf: usize, beta: Vec<f64>) -> Problem {
        let cfg = SystemConfig {
            k,
            m,
            n_rf,
            ..SystemConfig::default()
        };
        Problem::equal_power(&cfg, &Scenario::from_beta(beta)).unwrap()
    }

    #[test]
    fn tiny_instance_schedules_the_only_user() {
        let p = problem(1, 2, 2, vec![1e-2]);
        let r = exhaustive_search(&p).unwrap();
        assert_eq!(r.selection, vec![true, true, true]);
        assert_eq!(r.best, p.phi(&[true, true, true]).unwrap());
        // feasible: {a1}, {a2}, {a1,a2}, {u,a1,a2}
        assert_eq!(r.phi_evals, 4);
    }

    #[test]
    fn size_guard() {
        let p = problem(10, 17, 17, vec![1e-3; 10]);
        assert!(matches!(exhaustive_search(&p), Err(Error::Usage(_))));
    }

    #[test]
    fn equal_users_are_interchangeable() {
        let p = problem(4, 6, 6, vec![1e-2; 4]);
        let r = exhaustive_search(&p).unwrap();
        let k1 = r.best.k1;
        assert!(k1 >= 1);
        // any other user subset of the same size reaches the same value
        let mut x = r.selection.clone();
        for (i, b) in x[..4].iter_mut().enumerate() {
            *b = i >= 4 - k1;
        }
        assert!((p.phi(&x).unwrap().ee - r.best.ee).abs() <= 1e-9 * r.best.ee);
    }
}
