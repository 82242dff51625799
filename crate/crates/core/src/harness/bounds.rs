//! Closed-form guarantees, tabulated per parameter combination.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::algorithms::{beta, geometric_layout};

/// `beta(0, alpha)`, or `None` when `alpha < 0` (the bound says nothing).
fn beta0(alpha: f64) -> Option<f64> {
    beta(0.0, alpha).ok()
}

/// Two-copy guarantee: `beta(0, (k - 5) / (k - 1))`.
pub fn two_copy_bound(k: usize) -> Option<f64> {
    if k < 2 {
        return None;
    }
    beta0((k as f64 - 5.0) / (k as f64 - 1.0))
}

/// Copies-block guarantee: `beta(0, (k - 2 tau^2 - 3 tau) / (k - tau))`.
pub fn copies_block_bound(k: usize, tau: usize) -> Option<f64> {
    if k <= tau {
        return None;
    }
    let (k, t) = (k as f64, tau as f64);
    beta0((k - 2.0 * t * t - 3.0 * t) / (k - t))
}

/// Geometric-copies guarantee:
/// `beta(0, (k - 2 tau (log2(2 tau) + 3/2)) / (k - tau))`.
pub fn copies_geometric_bound(k: usize, tau: usize) -> Option<f64> {
    if k <= tau || tau == 0 {
        return None;
    }
    let (k, t) = (k as f64, tau as f64);
    beta0((k - 2.0 * t * ((2.0 * t).log2() + 1.5)) / (k - t))
}

/// Three-phase guarantee:
/// `0.5 - 3 / (2 e^{(k-4)/(k-1)}) + e^{-(k-4) / (2(k-1))}`.
pub fn three_phase_bound(k: usize) -> Option<f64> {
    if k < 8 {
        return None;
    }
    let r = (k as f64 - 4.0) / (k as f64 - 1.0);
    Some(0.5 - 1.5 * (-r).exp() + (-r / 2.0).exp())
}

/// Limit of [`three_phase_bound`]: `0.5 - 3 / (2e) + e^{-1/2}`.
pub fn three_phase_limit() -> f64 {
    0.5 - 1.5 / E + (-0.5f64).exp()
}

/// Tuple-algorithm guarantee without its unpinned `Omega(1/m)` term:
/// `beta(0, (k - 2m - 2) / k)`.
pub fn biobjective_bound(k: usize, m: usize) -> Option<f64> {
    if k == 0 || m < 2 {
        return None;
    }
    beta0((k as f64 - 2.0 * m as f64 - 2.0) / k as f64)
}

/// Final-size bound of the tuple greedy: `1 - (1 - (m-1)/(m k))^l`.
pub fn generalized_greedy_bound(k: usize, l: usize, m: usize) -> f64 {
    1.0 - (1.0 - (m as f64 - 1.0) / (m as f64 * k as f64)).powi(l as i32)
}

/// Limit of the blocks algorithm: `(e - 1) / (2e - 1)`.
pub fn blocks_limit() -> f64 {
    (E - 1.0) / (2.0 * E - 1.0)
}

/// Guarantee of the enumerative algorithm built on an `alpha`-approximate
/// base: `alpha / (tau + 1)`.
pub fn general_bound(alpha: f64, tau: usize) -> f64 {
    alpha / (tau as f64 + 1.0)
}

/// `1 - (1 - 1/k)^k`, the exact finite-k greedy factor.
pub fn greedy_factor(k: usize) -> f64 {
    1.0 - (1.0 - 1.0 / k as f64).powi(k as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub algorithm: String,
    pub k: usize,
    pub tau: usize,
    pub m: Option<usize>,
    /// `None` when the parameters fall outside the bound's range.
    pub value: Option<f64>,
    pub note: String,
}

/// Every applicable guarantee for each `(k, tau, m)` combination.
pub fn bound_table(ks: &[usize], taus: &[usize], ms: &[usize]) -> Vec<BoundRow> {
    let mut rows = Vec::new();
    let mut push = |algorithm: &str, k, tau, m, value, note: &str| {
        rows.push(BoundRow {
            algorithm: algorithm.into(),
            k,
            tau,
            m,
            value,
            note: note.into(),
        })
    };
    for &k in ks {
        for &tau in taus {
            if tau == 1 {
                push("two-copy", k, tau, None, two_copy_bound(k), "");
                push("three-phase", k, tau, None, three_phase_bound(k), "requires k >= 8");
                for &m in ms {
                    push(
                        "biobjective",
                        k,
                        tau,
                        Some(m),
                        biobjective_bound(k, m),
                        "Omega(1/m) term omitted",
                    );
                }
            }
            if tau >= 1 {
                push("copies-block", k, tau, None, copies_block_bound(k, tau), "");
                let layout = geometric_layout(tau);
                let note = format!("requires k >= {}", layout.size);
                push("copies-geometric", k, tau, None, copies_geometric_bound(k, tau), &note);
                push("blocks", k, tau, None, Some(blocks_limit()), "limit as k grows");
            }
            push(
                "general",
                k,
                tau,
                None,
                Some(general_bound(greedy_factor(k.max(1)), tau)),
                "greedy base on a cardinality constraint",
            );
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert!((beta(0.0, 1.0).unwrap() - 0.632121).abs() < 1e-6);
        assert!((three_phase_limit() - 0.5547).abs() < 1e-4);
        assert!(two_copy_bound(55).unwrap() >= 0.6);
        assert!((blocks_limit() - 0.387_300_163).abs() < 1e-8);
        assert!(three_phase_bound(7).is_none());
        assert!(two_copy_bound(4).is_none());
    }

    #[test]
    fn three_phase_approaches_limit() {
        let far = three_phase_bound(1_000_000).unwrap();
        assert!((far - three_phase_limit()).abs() < 1e-5);
        assert!(three_phase_bound(50).unwrap() > 0.5);
    }

    #[test]
    fn table_covers_combinations() {
        let rows = bound_table(&[10, 20], &[1, 2], &[2]);
        assert!(rows.iter().any(|r| r.algorithm == "biobjective" && r.k == 20));
        assert!(rows.iter().all(|r| r.value.is_none_or(|v| v <= 1.0)));
        assert!(rows.iter().any(|r| r.algorithm == "copies-block" && r.tau == 2));
    }
}
