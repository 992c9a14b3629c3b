//! Examination functions: how much attention a rank position receives.

use crate::error::{Error, Result};

/// A rule assigning an attention weight to each rank position (1-based).
///
/// All variants give rank 1 a weight of exactly 1 and are non-increasing in
/// rank, so weighted exposures are comparable across variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExaminationFunction {
    /// Every rank counts fully: a plain appearance count.
    Uniform,
    /// Logarithmic discount, 1/log2(rank + 1).
    Dcg,
    /// Geometric persistence discount, gamma^(rank - 1).
    Rbp { gamma: f64 },
}

impl ExaminationFunction {
    /// Builds the geometric-discount variant, checking that the persistence
    /// parameter lies strictly inside (0, 1).
    pub fn rbp(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid(format!(
                "persistence parameter must lie in (0, 1), got {gamma}"
            )));
        }
        Ok(ExaminationFunction::Rbp { gamma })
    }

    /// Weight of the given 1-based rank.
    ///
    /// Panics if `rank` is zero; ranks are 1-based throughout the crate.
    pub fn weight(&self, rank: usize) -> f64 {
        assert!(rank >= 1, "ranks are 1-based; got rank 0");
        match *self {
            ExaminationFunction::Uniform => 1.0,
            ExaminationFunction::Dcg => 1.0 / ((rank + 1) as f64).log2(),
            ExaminationFunction::Rbp { gamma } => gamma.powi(rank as i32 - 1),
        }
    }
}
