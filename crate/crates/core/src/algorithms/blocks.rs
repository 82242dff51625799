use serde::{Deserialize, Serialize};

use super::{check_k, finalize, greedy_until, Chooser, MultiObjectiveSolver, RobustResult, TraceStep};
use crate::error::{precondition, Error, Result};
use crate::oracle::Oracle;
use crate::subset::{combinations, Subset};

/// Builds `tau` blocks greedily, each from scratch on the elements no block
/// has taken yet, then fills up to `k` with greedy on `f(. | A_1)` over the
/// remaining elements, ignoring the blocks.
///
/// Blocks have `ceil(tau * ln k)` elements, or `ceil(tau_prime / tau)`
/// when `tau_prime` is given. Without an override, `tau` must satisfy
/// `tau <= sqrt(k / ln k)`.
pub fn blocks_greedy(
    f: &Oracle,
    ground: &Subset,
    k: usize,
    tau: usize,
    tau_prime: Option<usize>,
) -> Result<RobustResult> {
    check_k(k, ground)?;
    if tau == 0 {
        return Err(precondition("blocks algorithm needs tau >= 1"));
    }
    if k < 2 {
        return Err(Error::KTooSmall { k, required: 2 });
    }
    let ln_k = (k as f64).ln();
    let block = match tau_prime {
        Some(tp) => tp.div_ceil(tau),
        None => {
            if tau as f64 > (k as f64 / ln_k).sqrt() {
                return Err(precondition(format!(
                    "tau = {tau} exceeds sqrt(k / ln k) = {:.3}",
                    (k as f64 / ln_k).sqrt()
                )));
            }
            (tau as f64 * ln_k).ceil() as usize
        }
    };
    if tau * block >= k {
        return Err(precondition(format!(
            "blocks take {} elements, which leaves nothing below k = {k}",
            tau * block
        )));
    }
    let before = f.query_count();
    let mut chooser = Chooser::new(f);
    let mut trace = Vec::new();
    let mut a0 = Subset::empty();
    for i in 0..tau {
        let mut x = Subset::empty();
        let pool = ground.difference(&a0);
        greedy_until(
            &mut chooser,
            &mut x,
            &pool,
            block,
            Subset::clone,
            &format!("block {}", i + 1),
            &mut trace,
        )?;
        a0 = a0.union(&x);
    }
    let mut a1 = Subset::empty();
    let pool = ground.difference(&a0);
    greedy_until(
        &mut chooser,
        &mut a1,
        &pool,
        k - a0.len(),
        Subset::clone,
        "fill",
        &mut trace,
    )?;
    finalize(f, a0.union(&a1), tau, f.query_count() - before, trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRound {
    pub target: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantTauOutcome {
    pub result: RobustResult,
    /// The blocks of size `3 tau^2`.
    pub a0: Subset,
    /// Number of functions `f(. | Y)`.
    pub family_size: usize,
    pub lb: f64,
    pub ub: f64,
    /// Last target the solver met.
    pub target: f64,
    pub rounds: Vec<SearchRound>,
}

/// Lower-bound estimate of the blocks algorithm divided into its upper
/// bound.
pub const BLOCKS_RATIO: f64 = 0.387;

/// Blocks of total size `3 tau^2`, then a solver call that completes them
/// against every restriction `f(. | Y)` with `Y ⊆ A_0`,
/// `|Y| >= 3 tau^2 - tau`.
///
/// The target value is bisected between `lb`, the robust value of the
/// blocks algorithm, and `lb / 0.387` until the bracket is within
/// `delta * lb`; each probe asks the solver for `f(X | Y) >= t - f(Y)`.
pub fn constant_tau_scheme(
    f: &Oracle,
    ground: &Subset,
    k: usize,
    tau: usize,
    solver: &dyn MultiObjectiveSolver,
    delta: f64,
) -> Result<ConstantTauOutcome> {
    check_k(k, ground)?;
    if tau == 0 {
        return Err(precondition("constant-tau scheme needs tau >= 1"));
    }
    let core = 3 * tau * tau;
    if k <= core + tau {
        return Err(Error::KTooSmall {
            k,
            required: core + tau + 1,
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(precondition(format!("delta must lie in (0, 1), got {delta}")));
    }
    let before = f.query_count();
    let blocks = blocks_greedy(f, ground, k, tau, Some(core))?;
    let a0: Subset = blocks
        .trace
        .iter()
        .filter(|s| s.rule.starts_with("block"))
        .flat_map(|s| s.added.iter().copied())
        .collect();
    let lb = blocks
        .g_value
        .ok_or_else(|| Error::Internal("blocks output too large to evaluate".into()))?;
    let ub = lb / BLOCKS_RATIO;

    let a0_elems = a0.to_vec();
    let mut family = Vec::new();
    let mut base_values = Vec::new();
    for size in core - tau..=core {
        for y in combinations(&a0_elems, size) {
            base_values.push(f.eval(&y)?);
            family.push(f.restrict(&y)?);
        }
    }
    let pool = ground.difference(&a0);
    let size = k - core;
    let rho = solver.guarantee();
    let mut rounds = Vec::new();
    let probe = |t: f64, rounds: &mut Vec<SearchRound>| -> Result<Option<Subset>> {
        let targets: Vec<f64> = base_values.iter().map(|b| (t - b).max(0.0)).collect();
        let found = solver.solve(&family, &pool, &targets, size)?;
        if let Some(x) = &found {
            for (h, target) in family.iter().zip(&targets) {
                if h.function().value(x) < rho * target - crate::oracle::EPS {
                    return Err(Error::Internal("solver broke its guarantee".into()));
                }
            }
        }
        rounds.push(SearchRound {
            target: t,
            feasible: found.is_some(),
        });
        Ok(found)
    };

    let (target, chosen) = match probe(ub, &mut rounds)? {
        Some(x) => (ub, x),
        None => {
            let mut best = probe(lb, &mut rounds)?
                .ok_or_else(|| Error::Internal(format!("solver found no set at the lower bound {lb}")))?;
            let (mut lo, mut hi) = (lb, ub);
            while hi - lo > delta * lo {
                let mid = 0.5 * (lo + hi);
                match probe(mid, &mut rounds)? {
                    Some(x) => {
                        lo = mid;
                        best = x;
                    }
                    None => hi = mid,
                }
            }
            (lo, best)
        }
    };

    let mut trace = blocks
        .trace
        .into_iter()
        .filter(|s| s.rule.starts_with("block"))
        .collect::<Vec<_>>();
    trace.push(TraceStep {
        iteration: trace.len(),
        added: chosen.to_vec(),
        rule: format!("solver target {target:.6}"),
    });
    let result = finalize(f, a0.union(&chosen), tau, f.query_count() - before, trace)?;
    Ok(ConstantTauOutcome {
        result,
        a0,
        family_size: family.len(),
        lb,
        ub,
        target,
        rounds,
    })
}

/// `ceil(1 / ln(1 + delta))`: the bisection round allowance.
pub fn search_round_cap(delta: f64) -> usize {
    (1.0 / (1.0 + delta).ln()).ceil() as usize
}
