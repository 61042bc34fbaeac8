//! Experiment driver: baselines, training and evaluation runs, sweeps,
//! CSV output and plots.

mod baselines;
pub mod io;
pub mod oracle;
pub mod plots;
mod runs;
pub mod sweep;

pub use baselines::{fixed_step, run_fixed_baseline, run_random_baseline, FIXED_DELTA};
pub use oracle::{run_oracles, OracleCheck};
pub use plots::{emit_plots, PlotContents};
pub use runs::{
    aoi_summary, energy_summary, evaluate_checkpoint, run_baselines, train_and_evaluate, write_baseline_outputs,
    write_eval_outputs, write_train_outputs, BaselineReport, Summary, TrainReport, EVAL_EPISODES,
    SELECT_EPISODES,
};
pub use sweep::{run_sweep, trend, SweepParam, SweepResult, SweepSpec, TrendCheck};
