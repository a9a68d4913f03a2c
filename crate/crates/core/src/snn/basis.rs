use std::f64::consts::PI;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest supported filter window, in time steps. Spike windows are kept as
/// one `u64` bit history per channel.
pub const MAX_DURATION: usize = 64;

/// Raised-cosine bump `½(1 + cos(π(t − center)/half_width))` on
/// `|t − center| ≤ half_width`, zero elsewhere.
pub fn raised_cosine(t: f64, center: f64, half_width: f64) -> f64 {
    let d = (t - center) / half_width;
    if d.abs() <= 1.0 {
        0.5 * (1.0 + (PI * d).cos())
    } else {
        0.0
    }
}

/// Synaptic and somatic filter kernels, indexed by lag `δ = 0..duration`.
///
/// Lag 0 weights the most recent spike. Kernels are fixed once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBasis {
    synaptic: Vec<Vec<f64>>,
    somatic: Vec<f64>,
}

impl FilterBasis {
    /// `num_basis` raised cosines with centers evenly spaced over
    /// `[0, duration − 1]`, each max-normalized on the integer lag grid.
    /// The somatic kernel is a copy of the first synaptic kernel.
    pub fn raised_cosine(num_basis: usize, duration: usize) -> Result<Self> {
        if num_basis == 0 {
            return Err(Error::config("num_basis must be at least 1"));
        }
        if !(2..=MAX_DURATION).contains(&duration) {
            return Err(Error::config(format!(
                "filter duration must be in 2..={MAX_DURATION}, got {duration}"
            )));
        }
        let span = (duration - 1) as f64;
        let (spacing, half_width) = if num_basis > 1 {
            let w = span / (num_basis - 1) as f64;
            (w, w)
        } else {
            (0.0, duration as f64 / 2.0)
        };
        let synaptic: Vec<Vec<f64>> = (0..num_basis)
            .map(|b| {
                let center = b as f64 * spacing;
                let raw: Vec<f64> = (0..duration)
                    .map(|t| raised_cosine(t as f64, center, half_width))
                    .collect();
                let peak = raw.iter().cloned().fold(0.0, f64::max);
                raw.into_iter().map(|v| v / peak).collect()
            })
            .collect();
        let somatic = synaptic[0].clone();
        Ok(Self { synaptic, somatic })
    }

    /// Injects arbitrary kernels. All must share one length in
    /// `2..=MAX_DURATION` and be finite.
    pub fn from_kernels(synaptic: Vec<Vec<f64>>, somatic: Vec<f64>) -> Result<Self> {
        if synaptic.is_empty() {
            return Err(Error::config("at least one synaptic kernel is required"));
        }
        let duration = somatic.len();
        if !(2..=MAX_DURATION).contains(&duration) {
            return Err(Error::config(format!(
                "kernel length must be in 2..={MAX_DURATION}, got {duration}"
            )));
        }
        for (b, k) in synaptic.iter().enumerate() {
            if k.len() != duration {
                return Err(Error::config(format!(
                    "synaptic kernel {b} has length {}, expected {duration}",
                    k.len()
                )));
            }
        }
        if synaptic
            .iter()
            .flatten()
            .chain(&somatic)
            .any(|v| !v.is_finite())
        {
            return Err(Error::config("kernels must be finite"));
        }
        Ok(Self { synaptic, somatic })
    }

    pub fn num_basis(&self) -> usize {
        self.synaptic.len()
    }

    pub fn duration(&self) -> usize {
        self.somatic.len()
    }

    pub fn synaptic(&self, b: usize) -> &[f64] {
        &self.synaptic[b]
    }

    pub fn synaptic_kernels(&self) -> &[Vec<f64>] {
        &self.synaptic
    }

    pub fn somatic(&self) -> &[f64] {
        &self.somatic
    }

    /// Plain-text matrix: one row per kernel (synaptic rows first, then the
    /// somatic row), one column per lag.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# rows: synaptic 0..{} then somatic; columns: lag 0..{}",
            self.num_basis(),
            self.duration()
        );
        for row in self.synaptic.iter().chain(std::iter::once(&self.somatic)) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// Declarative basis description as stored in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisSpec {
    RaisedCosine {
        num_basis: usize,
        duration: usize,
    },
    Explicit {
        synaptic: Vec<Vec<f64>>,
        somatic: Vec<f64>,
    },
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec::RaisedCosine {
            num_basis: 3,
            duration: 10,
        }
    }
}

impl BasisSpec {
    pub fn build(&self) -> Result<FilterBasis> {
        match self {
            BasisSpec::RaisedCosine {
                num_basis,
                duration,
            } => FilterBasis::raised_cosine(*num_basis, *duration),
            BasisSpec::Explicit { synaptic, somatic } => {
                FilterBasis::from_kernels(synaptic.clone(), somatic.clone())
            }
        }
    }
}
