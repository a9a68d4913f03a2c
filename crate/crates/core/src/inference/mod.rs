//! Multi-compartment inference and evaluation metrics.

mod calibration;
mod decode;
mod likelihood;

pub use calibration::{expected_calibration_error, CalibrationBin, CalibrationReport};
pub use decode::{free_run, inference_streams, majority_decode, VoteRecord};
pub use likelihood::{estimate_log_likelihood, likelihood_streams, log_sum_exp};
