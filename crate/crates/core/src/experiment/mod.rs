//! Experiment drivers: config files, checkpoints, metric logs, and the
//! train / eval / sweep / data commands behind the `mcsnn` binary.

mod checkpoint;
mod commands;
mod config;
mod eval;
mod records;
mod sweep;
mod train;

pub use checkpoint::Checkpoint;
pub use commands::{run_eval, run_preprocess, run_sweep_k, run_synth_data, run_train};
pub use config::{
    load_dataset, DataSource, ExperimentConfig, InferenceSpec, SelectionMetric, TrainingSpec,
};
pub use eval::{evaluate, EvalReport, EvalSummary, ExampleRecord};
pub use records::{read_metrics_log, MetricRecord, MetricsWriter, StepRecord, TrainSummary};
pub use sweep::{sweep_k, write_sweep_csv, SweepRow};
pub use train::{train, TrainOutcome};
