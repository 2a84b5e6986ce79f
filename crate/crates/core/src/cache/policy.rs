//! Replacement scoring for a capacity-bounded cache.
//!
//! Entries are scored by normalized volume (bigger intervals answer more
//! future queries) and normalized coverage size (smaller coverages save
//! more reads). The lowest score is evicted.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvictionPolicy {
    Unlimited,
    CoverageOptimized,
    VolumeOptimized,
    Combined { w1: f64, w2: f64 },
}

impl EvictionPolicy {
    pub fn combined(w1: f64, w2: f64) -> Result<Self> {
        if !(w1 >= 0.0 && w2 >= 0.0 && ((w1 + w2) - 1.0).abs() < 1e-9) {
            return Err(Error::Config(format!("policy weights {w1}, {w2} must be non-negative and sum to 1")));
        }
        Ok(EvictionPolicy::Combined { w1, w2 })
    }

    /// `(w1, w2)`, or `None` for an unbounded cache.
    pub fn weights(self) -> Option<(f64, f64)> {
        match self {
            EvictionPolicy::Unlimited => None,
            EvictionPolicy::CoverageOptimized => Some((0.0, 1.0)),
            EvictionPolicy::VolumeOptimized => Some((1.0, 0.0)),
            EvictionPolicy::Combined { w1, w2 } => Some((w1, w2)),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "unlimited" => Ok(EvictionPolicy::Unlimited),
            "coverage" => Ok(EvictionPolicy::CoverageOptimized),
            "volume" => Ok(EvictionPolicy::VolumeOptimized),
            other => {
                let weights = other
                    .strip_prefix("combined:")
                    .and_then(|w| w.split_once(','))
                    .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
                match weights {
                    Some((w1, w2)) => Self::combined(w1, w2),
                    None => Err(Error::Config(format!(
                        "unknown policy `{other}` (unlimited, coverage, volume, combined:W1,W2)"
                    ))),
                }
            }
        }
    }
}

/// Extremes over the live entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyStats {
    pub v_min: f64,
    pub v_max: f64,
    pub cov_min: f64,
    pub cov_max: f64,
}

impl PolicyStats {
    pub fn from_entries(items: impl IntoIterator<Item = (f64, usize)>) -> Option<Self> {
        let mut it = items.into_iter();
        let (v, c) = it.next()?;
        let mut s = PolicyStats {
            v_min: v,
            v_max: v,
            cov_min: c as f64,
            cov_max: c as f64,
        };
        for (v, c) in it {
            let c = c as f64;
            s.v_min = s.v_min.min(v);
            s.v_max = s.v_max.max(v);
            s.cov_min = s.cov_min.min(c);
            s.cov_max = s.cov_max.max(c);
        }
        Some(s)
    }
}

/// `w1·(V−Vmin)/(Vmax−Vmin) + w2·(Covmax−|X|)/(Covmax−Covmin)`.
///
/// With `literal` the coverage term is `(|X|−Covmin)/(Covmax−Covmin)`
/// instead, which keeps large coverages. A term whose denominator is zero
/// contributes 0.
pub fn policy_score(volume: f64, coverage: usize, stats: &PolicyStats, w1: f64, w2: f64, literal: bool) -> f64 {
    let cov = coverage as f64;
    let v_term = if stats.v_max > stats.v_min {
        (volume - stats.v_min) / (stats.v_max - stats.v_min)
    } else {
        0.0
    };
    let c_term = if stats.cov_max > stats.cov_min {
        if literal {
            (cov - stats.cov_min) / (stats.cov_max - stats.cov_min)
        } else {
            (stats.cov_max - cov) / (stats.cov_max - stats.cov_min)
        }
    } else {
        0.0
    };
    w1 * v_term + w2 * c_term
}

#[cfg(test)]
mod tests {
    use super::*;

    const STATS: PolicyStats = PolicyStats {
        v_min: 1.0,
        v_max: 9.0,
        cov_min: 2.0,
        cov_max: 10.0,
    };

    #[test]
    fn boundary_scores() {
        assert_eq!(policy_score(9.0, 5, &STATS, 1.0, 0.0, false), 1.0);
        assert_eq!(policy_score(1.0, 5, &STATS, 1.0, 0.0, false), 0.0);
        assert_eq!(policy_score(5.0, 10, &STATS, 0.0, 1.0, false), 0.0);
        assert_eq!(policy_score(9.0, 2, &STATS, 0.5, 0.5, false), 1.0);
        assert_eq!(policy_score(5.0, 10, &STATS, 0.0, 1.0, true), 1.0);
    }

    #[test]
    fn degenerate_stats_score_zero() {
        let s = PolicyStats {
            v_min: 3.0,
            v_max: 3.0,
            cov_min: 4.0,
            cov_max: 4.0,
        };
        assert_eq!(policy_score(3.0, 4, &s, 0.5, 0.5, false), 0.0);
    }

    #[test]
    fn parses_policies() {
        assert_eq!(EvictionPolicy::parse("volume").unwrap(), EvictionPolicy::VolumeOptimized);
        assert_eq!(
            EvictionPolicy::parse("combined:0.25,0.75").unwrap(),
            EvictionPolicy::Combined { w1: 0.25, w2: 0.75 }
        );
        assert!(EvictionPolicy::parse("combined:0.5,0.6").is_err());
        assert!(EvictionPolicy::parse("lru").is_err());
    }
}
