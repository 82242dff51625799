//! Maximization algorithms.
//!
//! Every algorithm returns a [`RobustResult`]: the chosen set, its exact
//! robust value (when the minimizer enumeration fits the budget), the number
//! of oracle queries the algorithm itself made, and a trace of its choices.
//! Ties in every argmax go to the smallest element id, or to the
//! lexicographically smallest tuple.

mod blocks;
mod copies;
mod general;
mod greedy;
mod phases;
mod solver;
mod tuples;

pub use blocks::{blocks_greedy, constant_tau_scheme, search_round_cap, ConstantTauOutcome, SearchRound, BLOCKS_RATIO};
pub use copies::{copies_block, copies_geometric, geometric_layout, two_copy, GeometricLayout};
pub use general::{general_robust, BaseAlgorithm, DichotomyRecord, GeneralOutcome, GreedyBase};
pub use greedy::{greedy, greedy_threshold, naive_topk};
pub use phases::{biobjective_regime, biobjective_robust, ignore_first, three_phase};
pub use solver::{brute_multiobjective_solver, BruteForceSolver, MultiObjectiveSolver};
pub use tuples::{generalized_greedy, GeneralizedGreedyOutcome, RoundRecord};

use serde::{Deserialize, Serialize};

use crate::bruteforce::{minimizer, Budget};
use crate::error::{precondition, Error, Result};
use crate::oracle::{Oracle, EPS};
use crate::subset::{Element, Subset};

/// One decision of an algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub added: Vec<Element>,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustResult {
    pub set: Subset,
    /// Lexicographically smallest minimizer, or `None` when enumerating the
    /// removals of `set` would exceed the minimizer budget.
    pub minimizer: Option<Subset>,
    /// `g_tau(set)`, present exactly when `minimizer` is.
    pub g_value: Option<f64>,
    pub f_value: f64,
    pub tau: usize,
    /// Queries made while selecting `set`; the final evaluation is excluded.
    pub queries: u64,
    pub trace: Vec<TraceStep>,
}

impl RobustResult {
    /// Elements in the order they were added.
    pub fn order(&self) -> Vec<Element> {
        self.trace.iter().flat_map(|s| s.added.iter().copied()).collect()
    }

    /// Trace steps whose rule equals `rule`.
    pub fn steps_with_rule<'a>(&'a self, rule: &'a str) -> impl Iterator<Item = &'a TraceStep> + 'a {
        self.trace.iter().filter(move |s| s.rule == rule)
    }
}

/// `beta(eta, alpha) = (e^alpha - 1) / (e^alpha - eta)`.
pub fn beta(eta: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) || !(alpha.is_finite() && alpha >= 0.0) {
        return Err(precondition(format!(
            "beta needs eta in [0, 1] and alpha >= 0, got eta = {eta}, alpha = {alpha}"
        )));
    }
    let ea = alpha.exp();
    if ea - eta == 0.0 {
        // eta = 1 and alpha = 0: the limit along alpha > 0 is 1
        return Ok(1.0);
    }
    Ok((ea - 1.0) / (ea - eta))
}

/// Records the final set and evaluates it on a fresh counter.
pub(crate) fn finalize(
    f: &Oracle,
    set: Subset,
    tau: usize,
    queries: u64,
    trace: Vec<TraceStep>,
) -> Result<RobustResult> {
    let budget = Budget::from_env()?;
    let probe = f.with_fresh_counter();
    let f_value = probe.eval(&set)?;
    let (minimizer, g_value) = match minimizer(&probe, &set, tau, &budget) {
        // `+ 0.0` turns a negative zero into zero
        Ok(m) => (Some(m.z), Some(m.value + 0.0)),
        Err(Error::BudgetExceeded { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(RobustResult {
        set,
        minimizer,
        g_value,
        f_value,
        tau,
        queries,
        trace,
    })
}

/// Incremental argmax search with a one-entry value cache.
///
/// `f(∅) = 0` is never queried, and the value of the winning candidate is
/// reused when the next reference set equals it.
pub(crate) struct Chooser<'a> {
    f: &'a Oracle,
    cache: Option<(Subset, f64)>,
}

impl<'a> Chooser<'a> {
    pub(crate) fn new(f: &'a Oracle) -> Self {
        Self { f, cache: None }
    }

    pub(crate) fn value(&mut self, s: &Subset) -> Result<f64> {
        if s.is_empty() {
            return Ok(0.0);
        }
        if let Some((c, v)) = &self.cache {
            if c == s {
                return Ok(*v);
            }
        }
        let v = self.f.eval(s)?;
        self.cache = Some((s.clone(), v));
        Ok(v)
    }

    /// `argmax_{x in pool} f(x | reference)` with its marginal.
    pub(crate) fn best(&mut self, pool: &Subset, reference: &Subset) -> Result<Option<(Element, f64)>> {
        let base = self.value(reference)?;
        let mut best: Option<(Element, f64, f64)> = None;
        for x in pool.iter() {
            let v = self.f.eval(&reference.with(x))?;
            if best.is_none_or(|(_, bv, _)| v > bv + EPS) {
                best = Some((x, v, v - base));
            }
        }
        Ok(best.map(|(x, v, gain)| {
            self.cache = Some((reference.with(x), v));
            (x, gain)
        }))
    }
}

/// Appends argmax steps to `a` until it has `target` elements or `pool - a`
/// runs out. `reference` maps the current set to the set marginals are
/// taken against.
pub(crate) fn greedy_until(
    chooser: &mut Chooser<'_>,
    a: &mut Subset,
    pool: &Subset,
    target: usize,
    reference: impl Fn(&Subset) -> Subset,
    rule: &str,
    trace: &mut Vec<TraceStep>,
) -> Result<()> {
    while a.len() < target {
        let candidates = pool.difference(a);
        match chooser.best(&candidates, &reference(a))? {
            Some((x, _)) => {
                a.insert(x);
                trace.push(TraceStep {
                    iteration: trace.len(),
                    added: vec![x],
                    rule: rule.to_string(),
                });
            }
            None => break,
        }
    }
    Ok(())
}

pub(crate) fn check_k(k: usize, ground: &Subset) -> Result<()> {
    if k > ground.len() {
        return Err(precondition(format!(
            "k = {k} exceeds the ground set size {}",
            ground.len()
        )));
    }
    Ok(())
}
