use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{CellSummary, ResultTable};
use super::params::{render_config, ExperimentSpec};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::optimizer::LearnerConfig;

pub const CSV_HEADER: &str =
    "grid_key,grid_value,realizations,mean_ee_bit_per_joule,stderr_ee,mean_iters,mean_phi_evals";

pub const PLOTDATA_HEADER: &str =
    "grid_key,grid_value,realization,status,ee_bit_per_joule,rate_bit_per_s,power_w,k1,m1,iters,phi_evals,reference_ee";

/// Aggregate rows, one per grid point and series.
pub fn render_csv(summary: &[CellSummary]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.grid_key,
            c.grid_value,
            c.realizations,
            c.mean_ee,
            c.stderr_ee,
            c.mean_iters,
            c.mean_phi_evals
        );
    }
    out
}

/// One row per realization; fields of failed realizations are left empty.
pub fn render_plotdata(table: &ResultTable) -> String {
    let mut out = String::from(PLOTDATA_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = write!(out, "{},{},{},", r.grid_key, r.grid_value, r.realization);
        match &r.outcome {
            Ok(s) => {
                let reference = s.reference_ee.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "ok,{},{},{},{},{},{},{},{}",
                    s.ee, s.rate, s.power, s.k1, s.m1, s.iters, s.phi_evals, reference
                );
            }
            Err(code) => {
                let _ = writeln!(out, "{code},,,,,,,,");
            }
        }
    }
    out
}

/// Run record written next to the CSV: version, seed and the full
/// effective configuration.
pub fn render_manifest(
    sys: &SystemConfig,
    spec: &ExperimentSpec,
    learner: &LearnerConfig,
) -> String {
    let mut out = format!("# mimo-ee {}\n", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# seed {}", spec.seed);
    out.push_str(&render_config(sys, spec, learner));
    out
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    fs::write(path, render_csv(&table.summary()))?;
    Ok(())
}

pub fn emit_plotdata(table: &ResultTable, path: &Path) -> Result<()> {
    fs::write(path, render_plotdata(table))?;
    Ok(())
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub plotdata: PathBuf,
    pub manifest: PathBuf,
}

/// Writes `<kind>.csv`, `<kind>.plotdata.csv` and `<kind>.manifest.txt`
/// into `dir`, creating it if needed.
pub fn write_outputs(
    table: &ResultTable,
    sys: &SystemConfig,
    spec: &ExperimentSpec,
    learner: &LearnerConfig,
    dir: &Path,
) -> Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let kind = spec.kind.name();
    let files = OutputFiles {
        csv: dir.join(format!("{kind}.csv")),
        plotdata: dir.join(format!("{kind}.plotdata.csv")),
        manifest: dir.join(format!("{kind}.manifest.txt")),
    };
    emit_csv(table, &files.csv)?;
    emit_plotdata(table, &files.plotdata)?;
    fs::write(&files.manifest, render_manifest(sys, spec, learner))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiment::{RealizationRow, Solved};
    use crate::harness::params::ExperimentKind;
    use crate::harness::{parse_config, run_experiment};

    fn solved(ee: f64) -> Solved {
        Solved {
            ee,
            rate: 1e8,
            power: 40.0,
            k1: 3,
            m1: 5,
            iters: 210,
            phi_evals: 90,
            reference_ee: None,
        }
    }

    fn table(values: &[(usize, f64)]) -> ResultTable {
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, &(gi, ee))| RealizationRow {
                grid_key: "n_rf".into(),
                grid_index: gi,
                grid_value: 5.0 * (gi + 1) as f64,
                realization: i % 3,
                outcome: Ok(solved(ee)),
            })
            .collect();
        ResultTable {
            kind: ExperimentKind::SweepRf,
            rows,
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = table(&[]);
        assert_eq!(render_csv(&t.summary()), format!("{CSV_HEADER}\n"));
        assert_eq!(render_plotdata(&t), format!("{PLOTDATA_HEADER}\n"));
    }

    #[test]
    fn row_counts() {
        let t = table(&[(0, 1.0), (0, 2.0), (0, 3.0), (1, 4.0), (1, 5.0), (1, 6.0)]);
        let csv = render_csv(&t.summary());
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(render_plotdata(&t).lines().count(), 7);
        assert!(!csv.contains('\r'));
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "n_rf,5,3,2,0.5773502691896257,210,90"
        );
    }

    #[test]
    fn shortest_round_trip_numbers() {
        let t = table(&[(0, 0.1)]);
        let csv = render_csv(&t.summary());
        assert_eq!(csv.lines().nth(1).unwrap(), "n_rf,5,1,0.1,0,210,90");
    }

    #[test]
    fn failed_rows_keep_their_place() {
        let mut t = table(&[(0, 1.0), (0, 2.0)]);
        t.rows[1].outcome = Err("sampling_failure");
        let plot = render_plotdata(&t);
        assert_eq!(
            plot.lines().nth(2).unwrap(),
            "n_rf,5,1,sampling_failure,,,,,,,,"
        );
        let csv = render_csv(&t.summary());
        assert_eq!(csv.lines().nth(1).unwrap(), "n_rf,5,1,1,0,210,90");
    }

    #[test]
    fn aggregates_match_plotdata() {
        let (sys, spec, l) =
            parse_config("M=6\nK=4\nexperiment=sweep-snr\ngrid=0,20\nrealizations=4\npatience=20")
                .unwrap();
        let t = run_experiment(&sys, &spec, &l).unwrap();
        let plot = render_plotdata(&t);
        let csv = render_csv(&t.summary());
        for (i, line) in csv.lines().skip(1).enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            let ee: Vec<f64> = plot
                .lines()
                .skip(1)
                .filter(|l| l.split(',').nth(1) == Some(fields[1]))
                .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
                .collect();
            assert_eq!(ee.len(), 4, "grid point {i}");
            let mean = ee.iter().sum::<f64>() / 4.0;
            let sd = (ee.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
            let csv_mean: f64 = fields[3].parse().unwrap();
            let csv_se: f64 = fields[4].parse().unwrap();
            assert!((csv_mean - mean).abs() <= 1e-12 * mean);
            assert!((csv_se - sd / 2.0).abs() <= 1e-9 * csv_se.max(1.0));
        }
    }

    #[test]
    fn files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let (sys, spec, l) = parse_config("M=5\nK=3\nrealizations=2\npatience=10").unwrap();
        let t = run_experiment(&sys, &spec, &l).unwrap();
        let files = write_outputs(&t, &sys, &spec, &l, dir.path()).unwrap();
        let manifest = std::fs::read_to_string(&files.manifest).unwrap();
        assert!(manifest.contains("seed=1\n") && manifest.contains("M=5\n"));
        assert!(std::fs::read_to_string(&files.csv)
            .unwrap()
            .starts_with(CSV_HEADER));
        assert!(files.plotdata.exists());
    }
}
