//! Configuration files, seeded Monte Carlo experiments and result files.
//!
//! A run is described by a flat `key=value` document. Every realization of
//! every grid point gets its own generator stream derived from the master
//! seed, so results are identical regardless of scheduling.

mod experiment;
mod output;
mod params;
mod powers;

pub use experiment::{
    cell_config, cell_problem, run_experiment, scenario_rng, solver_rng, status_code, CellSummary,
    RealizationRow, ResultTable, Solved,
};
pub use output::{
    emit_csv, emit_plotdata, render_csv, render_manifest, render_plotdata, write_outputs,
    OutputFiles, CSV_HEADER, PLOTDATA_HEADER,
};
pub use params::{
    parse_config, parse_config_as, render_config, snr_to_powers, ExperimentKind, ExperimentSpec,
    PowerScheme,
};
pub use powers::rho_to_powers;
