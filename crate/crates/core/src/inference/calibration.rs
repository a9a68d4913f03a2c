use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    /// Bin covers `(lower, upper]`.
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Fraction of correct decisions; 0 for an empty bin.
    pub accuracy: f64,
    /// Mean confidence; 0 for an empty bin.
    pub mean_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub bins: Vec<CalibrationBin>,
    pub num_examples: usize,
    pub ece: f64,
}

/// Binned expected calibration error over `num_bins` equal-width bins
/// `((m−1)/M, m/M]`: `Σ_m (n_m/n)·|acc_m − conf_m|`.
pub fn expected_calibration_error(
    examples: &[(f64, bool)],
    num_bins: usize,
) -> Result<CalibrationReport> {
    if num_bins == 0 {
        return Err(Error::config("ECE needs at least one bin"));
    }
    let mut counts = vec![0usize; num_bins];
    let mut correct = vec![0usize; num_bins];
    let mut conf_sum = vec![0.0f64; num_bins];
    for &(p, ok) in examples {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::contract(format!("confidence {p} outside (0, 1]")));
        }
        let m = ((p * num_bins as f64).ceil() as usize).clamp(1, num_bins) - 1;
        counts[m] += 1;
        correct[m] += ok as usize;
        conf_sum[m] += p;
    }
    let n = examples.len();
    let mut ece = 0.0;
    let bins = (0..num_bins)
        .map(|m| {
            let (accuracy, mean_confidence) = if counts[m] > 0 {
                let c = counts[m] as f64;
                (correct[m] as f64 / c, conf_sum[m] / c)
            } else {
                (0.0, 0.0)
            };
            if counts[m] > 0 {
                ece += counts[m] as f64 / n as f64 * (accuracy - mean_confidence).abs();
            }
            CalibrationBin {
                lower: m as f64 / num_bins as f64,
                upper: (m + 1) as f64 / num_bins as f64,
                count: counts[m],
                accuracy,
                mean_confidence,
            }
        })
        .collect();
    Ok(CalibrationReport {
        bins,
        num_examples: n,
        ece,
    })
}
