use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Multiple-comparison adjustment applied to a vector of tail probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FdrMethod {
    /// Benjamini-Hochberg step-up.
    #[default]
    Bh,
    /// Benjamini-Yekutieli, BH scaled by the harmonic number of `m`.
    By,
    Bonferroni,
}

impl fmt::Display for FdrMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FdrMethod::Bh => "bh",
            FdrMethod::By => "by",
            FdrMethod::Bonferroni => "bonferroni",
        })
    }
}

impl FromStr for FdrMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bh" => Ok(FdrMethod::Bh),
            "by" => Ok(FdrMethod::By),
            "bonferroni" => Ok(FdrMethod::Bonferroni),
            other => Err(Error::InvalidArgument(format!("unknown adjustment {other:?}"))),
        }
    }
}

fn harmonic(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum()
}

impl FdrMethod {
    /// Unclamped adjusted value of the `rank`-th smallest of `m` p-values,
    /// before the step-up minimum.
    #[inline]
    pub(crate) fn scaled(self, p: f64, rank: usize, m: usize, harmonic_m: f64) -> f64 {
        // the max keeps `adjusted >= raw` exact when m / rank rounds to one
        let scaled = match self {
            FdrMethod::Bh => p * m as f64 / rank as f64,
            FdrMethod::By => p * m as f64 / rank as f64 * harmonic_m,
            FdrMethod::Bonferroni => p * m as f64,
        };
        scaled.max(p)
    }

    pub(crate) fn harmonic_for(self, m: usize) -> f64 {
        match self {
            FdrMethod::By => harmonic(m),
            _ => 1.0,
        }
    }

    /// Adjusted p-values in the original order.
    pub fn adjust(self, p: &[f64]) -> Result<Vec<f64>> {
        if let Some(&bad) = p.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::InvalidPValue(bad));
        }
        let m = p.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
        let h = self.harmonic_for(m);
        let mut out = vec![0.0; m];
        match self {
            FdrMethod::Bonferroni => {
                for (i, &x) in p.iter().enumerate() {
                    out[i] = self.scaled(x, 0, m, h).min(1.0);
                }
            }
            FdrMethod::Bh | FdrMethod::By => {
                let mut running = 1.0f64;
                for (pos, &i) in order.iter().enumerate().rev() {
                    running = running.min(self.scaled(p[i], pos + 1, m, h));
                    out[i] = running;
                }
            }
        }
        Ok(out)
    }
}

/// Benjamini-Hochberg step-up adjustment.
pub fn bh_adjust(p: &[f64]) -> Result<Vec<f64>> {
    FdrMethod::Bh.adjust(p)
}
