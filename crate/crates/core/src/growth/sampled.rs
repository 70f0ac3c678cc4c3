use super::LogGrowth;
use crate::group::GrowthCounts;

/// A growth sequence known only on `0..=radius`, such as `σ_G` or `β_G`.
/// Zero entries are stored as `-inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledGrowth {
    label: String,
    ln: Vec<f64>,
}

impl SampledGrowth {
    pub fn from_counts(label: impl Into<String>, counts: &[u128]) -> Self {
        SampledGrowth {
            label: label.into(),
            ln: counts.iter().map(|&c| if c == 0 { f64::NEG_INFINITY } else { (c as f64).ln() }).collect(),
        }
    }

    pub fn surface(counts: &GrowthCounts) -> Self {
        Self::from_counts(format!("sigma_{}", counts.label()), counts.sigma())
    }

    pub fn volume(counts: &GrowthCounts) -> Self {
        Self::from_counts(format!("beta_{}", counts.label()), counts.beta())
    }

    /// Largest `n` with a sample.
    pub fn radius(&self) -> u64 {
        self.ln.len().saturating_sub(1) as u64
    }

    pub fn ln_values(&self) -> &[f64] {
        &self.ln
    }
}

impl LogGrowth for SampledGrowth {
    fn ln_at(&self, n: u64) -> Option<f64> {
        usize::try_from(n).ok().and_then(|i| self.ln.get(i).copied())
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}
