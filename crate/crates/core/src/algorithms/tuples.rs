use serde::{Deserialize, Serialize};

use crate::bruteforce::first_meeting;
use crate::error::{precondition, Error, Result};
use crate::oracle::{Oracle, EPS};
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub added: Subset,
    /// `f_i(A)` before the round.
    pub before: Vec<f64>,
    /// `f_i(A)` after the round.
    pub after: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedGreedyOutcome {
    pub set: Subset,
    pub rounds: Vec<RoundRecord>,
    pub queries: u64,
}

impl GeneralizedGreedyOutcome {
    pub fn values(&self) -> Vec<f64> {
        self.rounds.last().map(|r| r.after.clone()).unwrap_or_default()
    }
}

/// Builds a set of size `l` in rounds. Each round takes the first
/// (lexicographic) tuple `X` of size `min(m, l - |A|)` outside `A` with
/// `f_i(X | A) >= (|X| - 1) / k * (targets[i] - f_i(A))` for every `i`.
///
/// When some set of size `k` reaches every target, a qualifying tuple is
/// known to exist for two functions; a round without one
/// fails with [`Error::Infeasible`].
pub fn generalized_greedy(
    fs: &[Oracle],
    targets: &[f64],
    k: usize,
    l: usize,
    m: usize,
) -> Result<GeneralizedGreedyOutcome> {
    let first = fs.first().ok_or(Error::EmptyFamily)?;
    let n = first.n();
    if let Some(bad) = fs.iter().find(|f| f.n() != n) {
        return Err(Error::GroundMismatch {
            expected: n,
            found: bad.n(),
        });
    }
    if targets.len() != fs.len() {
        return Err(precondition("one target per function is required"));
    }
    if m < 2 || m > k {
        return Err(precondition(format!("need 2 <= m <= k = {k}, got m = {m}")));
    }
    if l > k || k > n {
        return Err(precondition(format!("need l <= k <= n, got l = {l}, k = {k}, n = {n}")));
    }
    let before_total: u64 = fs.iter().map(Oracle::query_count).sum();
    let ground = first.ground();
    let mut a = Subset::empty();
    let mut current = vec![0.0; fs.len()];
    let mut rounds = Vec::new();
    while a.len() < l {
        let size = m.min(l - a.len());
        let factor = (size as f64 - 1.0) / k as f64;
        let restricted: Vec<Oracle> = if a.is_empty() {
            fs.to_vec()
        } else {
            fs.iter().map(|f| f.restrict(&a)).collect::<Result<_>>()?
        };
        let required: Vec<f64> = targets
            .iter()
            .zip(&current)
            .map(|(v, c)| (factor * (v - c)).max(0.0))
            .collect();
        let pool = ground.difference(&a).to_vec();
        let cert = first_meeting(&restricted, &pool, size, &required)?.ok_or(Error::Infeasible {
            round: rounds.len(),
            size,
        })?;
        let after: Vec<f64> = current.iter().zip(&cert.values).map(|(c, gain)| c + gain).collect();
        a = a.union(&cert.x);
        rounds.push(RoundRecord {
            added: cert.x,
            before: std::mem::replace(&mut current, after.clone()),
            after,
        });
    }
    // marginal values are within rounding of the direct evaluation
    debug_assert!(fs
        .iter()
        .zip(&current)
        .all(|(f, c)| (f.function().value(&a) - c).abs() <= 1e3 * EPS));
    let after_total: u64 = fs.iter().map(Oracle::query_count).sum();
    Ok(GeneralizedGreedyOutcome {
        set: a,
        rounds,
        queries: after_total - before_total,
    })
}
