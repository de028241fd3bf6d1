use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::params::{snr_to_powers, ExperimentKind, ExperimentSpec, PowerScheme};
use super::powers::rho_to_powers;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::optimizer::{
    exhaustive_search, random_selection_baseline, run_algorithm2, LearnerConfig,
};
use crate::power::{Problem, UserPowers};
use crate::scenario::Scenario;

/// Stream reserved for scenario draws. Solver streams are
/// `grid_index << 32 | realization` and never set the top bit.
const SCENARIO_STREAM: u64 = 1 << 63;

/// Generator for the scenario of realization `r`. It does not depend on the
/// grid point, so every point of a sweep sees the same cells.
pub fn scenario_rng(master: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(SCENARIO_STREAM | r as u64);
    rng
}

/// Generator for the solvers at grid point `grid_index`, realization `r`.
pub fn solver_rng(master: u64, grid_index: usize, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((grid_index as u64) << 32) | r as u64);
    rng
}

/// Outcome of one solver run on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub ee: f64,
    pub rate: f64,
    pub power: f64,
    pub k1: usize,
    pub m1: usize,
    pub iters: usize,
    pub phi_evals: u64,
    /// Exhaustive optimum, for convergence checks.
    pub reference_ee: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRow {
    pub grid_key: String,
    pub grid_index: usize,
    pub grid_value: f64,
    pub realization: usize,
    /// The solution, or a short status code naming the failure.
    pub outcome: std::result::Result<Solved, &'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub grid_key: String,
    pub grid_value: f64,
    /// Successful realizations entering the averages.
    pub realizations: usize,
    pub failures: usize,
    pub mean_ee: f64,
    pub stderr_ee: f64,
    pub mean_iters: f64,
    pub mean_phi_evals: f64,
}

/// Per-realization results ordered by grid point, series, realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub kind: ExperimentKind,
    pub rows: Vec<RealizationRow>,
}

impl ResultTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// One summary per (series, grid point), in row order.
    pub fn summary(&self) -> Vec<CellSummary> {
        let mut out: Vec<CellSummary> = Vec::new();
        let mut start = 0;
        while start < self.rows.len() {
            let head = &self.rows[start];
            let end = start
                + self.rows[start..]
                    .iter()
                    .take_while(|r| r.grid_index == head.grid_index && r.grid_key == head.grid_key)
                    .count();
            out.push(summarize(&self.rows[start..end]));
            start = end;
        }
        out
    }
}

fn summarize(rows: &[RealizationRow]) -> CellSummary {
    let ok: Vec<&Solved> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let n = ok.len() as f64;
    let mean = |f: &dyn Fn(&Solved) -> f64| ok.iter().map(|s| f(s)).sum::<f64>() / n;
    let mean_ee = mean(&|s| s.ee);
    let stderr_ee = if ok.len() > 1 {
        let var = ok.iter().map(|s| (s.ee - mean_ee).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    CellSummary {
        grid_key: rows[0].grid_key.clone(),
        grid_value: rows[0].grid_value,
        realizations: ok.len(),
        failures: rows.len() - ok.len(),
        mean_ee,
        stderr_ee,
        mean_iters: mean(&|s| s.iters as f64),
        mean_phi_evals: mean(&|s| s.phi_evals as f64),
    }
}

pub fn status_code(e: &Error) -> &'static str {
    match e {
        Error::Config { .. } => "config_error",
        Error::Infeasible(_) => "infeasible",
        Error::Usage(_) => "usage_error",
        Error::SamplingFailure { .. } => "sampling_failure",
        Error::NoSolution { .. } => "no_solution",
        Error::Io(_) => "io_error",
    }
}

/// The system configuration of one grid point.
pub fn cell_config(sys: &SystemConfig, kind: ExperimentKind, value: f64) -> SystemConfig {
    let mut cfg = sys.clone();
    match kind {
        ExperimentKind::Solve | ExperimentKind::SweepRf => cfg.n_rf = value as usize,
        ExperimentKind::SweepSnr | ExperimentKind::ConvergenceCheck => {
            (cfg.p_ul, cfg.p_dl, cfg.p_pilot) = snr_to_powers(value, cfg.sigma2);
        }
        ExperimentKind::SweepRho | ExperimentKind::CompareBaselines => {}
    }
    cfg
}

/// Builds the problem of realization `r` at one grid point.
pub fn cell_problem(
    sys: &SystemConfig,
    spec: &ExperimentSpec,
    value: f64,
    r: usize,
) -> Result<Problem> {
    let cfg = cell_config(sys, spec.kind, value);
    let norms =
        (spec.kind.uses_rho() && spec.power_scheme == PowerScheme::InvNorm).then_some(cfg.m);
    let scenario = Scenario::generate(
        cfg.k,
        &spec.geometry,
        norms,
        &mut scenario_rng(spec.seed, r),
    )?;
    let powers = if spec.kind.uses_rho() {
        rho_to_powers(value, &scenario, spec.power_scheme, &cfg)?
    } else {
        UserPowers::equal(&cfg, cfg.k)
    };
    Problem::new(&cfg, &scenario, powers)
}

fn run_cell(
    sys: &SystemConfig,
    spec: &ExperimentSpec,
    learner: &LearnerConfig,
    grid_index: usize,
    value: f64,
    r: usize,
) -> Vec<RealizationRow> {
    let key = spec.kind.grid_key();
    let row = |grid_key: String, outcome: Result<Solved>| RealizationRow {
        grid_key,
        grid_index,
        grid_value: value,
        realization: r,
        outcome: outcome.map_err(|e| status_code(&e)),
    };
    let problem = match cell_problem(sys, spec, value, r) {
        Ok(p) => p,
        Err(e) => {
            let code = status_code(&e);
            let mut rows = vec![row(key.to_string(), Err(e))];
            if spec.kind == ExperimentKind::CompareBaselines {
                rows[0].grid_key = format!("{key}:algorithm2");
                rows.push(RealizationRow {
                    grid_key: format!("{key}:baseline"),
                    outcome: Err(code),
                    ..rows[0].clone()
                });
            }
            return rows;
        }
    };
    let mut rng = solver_rng(spec.seed, grid_index, r);
    let learned = run_algorithm2(&problem, learner, &mut rng).and_then(|(best, state)| {
        let reference_ee = if spec.kind == ExperimentKind::ConvergenceCheck {
            Some(exhaustive_search(&problem)?.best.ee)
        } else {
            None
        };
        Ok(Solved {
            ee: best.ee,
            rate: best.rate,
            power: best.power,
            k1: best.k1,
            m1: best.m1,
            iters: state.iters,
            phi_evals: state.phi_evals,
            reference_ee,
        })
    });
    if spec.kind != ExperimentKind::CompareBaselines {
        return vec![row(key.to_string(), learned)];
    }
    let baseline =
        random_selection_baseline(&problem, spec.baseline_trials, &mut rng).map(|b| Solved {
            ee: b.best.ee,
            rate: b.best.rate,
            power: b.best.power,
            k1: b.best.k1,
            m1: b.best.m1,
            iters: 0,
            phi_evals: b.phi_evals,
            reference_ee: None,
        });
    vec![
        row(format!("{key}:algorithm2"), learned),
        row(format!("{key}:baseline"), baseline),
    ]
}

/// Runs every (grid point, realization) cell. Failed cells are recorded in
/// the table rather than aborting the run. Results do not depend on the
/// number of worker threads.
pub fn run_experiment(
    sys: &SystemConfig,
    spec: &ExperimentSpec,
    learner: &LearnerConfig,
) -> Result<ResultTable> {
    sys.validate()?;
    spec.validate(sys)?;
    learner.validate()?;
    let grid = spec.grid_points(sys);
    let tasks: Vec<(usize, f64, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(gi, &v)| (0..spec.realizations).map(move |r| (gi, v, r)))
        .collect();
    let run = |&(gi, v, r): &(usize, f64, usize)| run_cell(sys, spec, learner, gi, v, r);
    let cells: Vec<Vec<RealizationRow>> = if spec.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.parallel)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(run).collect())
    } else {
        tasks.iter().map(run).collect()
    };

    // Cells come back ordered by (grid point, realization); regroup so each
    // series of a grid point is contiguous.
    let mut rows = Vec::with_capacity(cells.len());
    for gi in 0..grid.len() {
        let block = &cells[gi * spec.realizations..(gi + 1) * spec.realizations];
        let series = block[0].len();
        for s in 0..series {
            rows.extend(block.iter().map(|c| c[s].clone()));
        }
    }
    Ok(ResultTable {
        kind: spec.kind,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_config;

    fn small(kind: &str, extra: &str) -> (SystemConfig, ExperimentSpec, LearnerConfig) {
        parse_config(&format!(
            "M=6\nK=4\nexperiment={kind}\nrealizations=3\nseed=7\npatience=30\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn rows_are_grouped_by_grid_point() {
        let (sys, spec, l) = small("sweep-rf", "grid=2,6");
        let t = run_experiment(&sys, &spec, &l).unwrap();
        assert_eq!(t.rows.len(), 6);
        let s = t.summary();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].grid_value, 2.0);
        assert_eq!(s[1].realizations, 3);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let (sys, mut spec, l) = small("compare-baselines", "grid=1,10\npower_scheme=inv-norm");
        let serial = run_experiment(&sys, &spec, &l).unwrap();
        spec.parallel = 3;
        let parallel = run_experiment(&sys, &spec, &l).unwrap();
        assert_eq!(serial, parallel);
        let keys: Vec<_> = serial
            .summary()
            .iter()
            .map(|c| c.grid_key.clone())
            .collect();
        assert_eq!(
            keys,
            [
                "rho:algorithm2",
                "rho:baseline",
                "rho:algorithm2",
                "rho:baseline"
            ]
        );
    }

    #[test]
    fn scenarios_are_shared_across_grid_points() {
        let (sys, spec, _) = small("sweep-rf", "grid=2,6");
        let a = cell_problem(&sys, &spec, 2.0, 1).unwrap();
        let b = cell_problem(&sys, &spec, 6.0, 1).unwrap();
        let c = cell_problem(&sys, &spec, 6.0, 2).unwrap();
        assert_eq!(a.beta(), b.beta());
        assert_ne!(b.beta(), c.beta());
        assert_eq!(a.config().n_rf, 2);
    }

    #[test]
    fn convergence_check_records_the_oracle() {
        let (sys, spec, l) = small("convergence-check", "grid=10");
        let t = run_experiment(&sys, &spec, &l).unwrap();
        for row in &t.rows {
            let s = row.outcome.as_ref().unwrap();
            let oracle = s.reference_ee.unwrap();
            assert!(s.ee <= oracle * (1.0 + 1e-12));
        }
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        // 34 bits exceeds the exhaustive size guard.
        let (sys, spec, l) = parse_config(
            "M=30\nK=4\nexperiment=convergence-check\nrealizations=2\ngrid=10\nmax_iters=5",
        )
        .unwrap();
        let t = run_experiment(&sys, &spec, &l).unwrap();
        assert_eq!(t.failures(), 2);
        assert_eq!(t.rows[0].outcome, Err("usage_error"));
        let s = t.summary();
        assert_eq!((s[0].realizations, s[0].failures), (0, 2));
        assert!(s[0].mean_ee.is_nan());
    }

    #[test]
    fn rf_sweep_is_nondecreasing_within_one_standard_error() {
        let (sys, spec, l) =
            parse_config("M=20\nK=12\nexperiment=sweep-rf\ngrid=5,10,15,20\nrealizations=30\nseed=3").unwrap();
        let s = run_experiment(&sys, &spec, &l).unwrap().summary();
        for w in s.windows(2) {
            assert!(w[1].mean_ee >= w[0].mean_ee - w[0].stderr_ee, "{w:?}");
        }
    }

    #[test]
    fn imperfect_csi_never_beats_perfect_csi() {
        let run = |csi: &str| {
            let (sys, spec, l) = parse_config(&format!(
                "M=8\nK=6\ncsi={csi}\nexperiment=sweep-snr\ngrid=0,10,20,30\nrealizations=20\nseed=5"
            ))
            .unwrap();
            run_experiment(&sys, &spec, &l).unwrap().summary()
        };
        for (p, q) in run("perfect").iter().zip(run("imperfect")) {
            assert!(q.mean_ee <= p.mean_ee, "{} dB: {} > {}", p.grid_value, q.mean_ee, p.mean_ee);
        }
    }

    #[test]
    fn rows_depend_only_on_their_realization() {
        let (sys, mut spec, l) = small("sweep-snr", "grid=0,20");
        let three = run_experiment(&sys, &spec, &l).unwrap();
        spec.realizations = 5;
        let five = run_experiment(&sys, &spec, &l).unwrap();
        let kept: Vec<_> = five.rows.iter().filter(|r| r.realization < 3).cloned().collect();
        assert_eq!(three.rows, kept);
    }

    #[test]
    fn streams_are_distinct() {
        use rand::Rng;
        let a: u64 = solver_rng(1, 0, 1).random();
        let b: u64 = solver_rng(1, 1, 0).random();
        let c: u64 = scenario_rng(1, 0).random();
        let d: u64 = solver_rng(1, 0, 0).random();
        assert!(a != b && b != c && c != d && a != d);
    }
}
