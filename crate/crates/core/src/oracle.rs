//! Set functions in the value-oracle model.
//!
//! A [`SetFunction`] is a pure map from subsets to non-negative reals. An
//! [`Oracle`] wraps one behind a shared query counter: every call to
//! [`Oracle::eval`] costs exactly one query. Derived oracles built with
//! [`Oracle::restrict`] forward to the base function and share its counter.
//!
//! [`MinOfFamily`] is deliberately a separate type. A pointwise minimum of
//! submodular functions is in general not submodular, so nothing that expects
//! an [`Oracle`] accepts one.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::format::FunctionSpec;
use crate::subset::{Element, Subset};

/// Absolute tolerance for every value comparison.
pub const EPS: f64 = 1e-9;

/// Largest ground set an explicit value table may describe.
pub const EXPLICIT_MAX_N: usize = 16;

pub trait SetFunction: Send + Sync + fmt::Debug {
    fn ground_size(&self) -> usize;

    /// Unchecked, uncounted evaluation. Callers go through [`Oracle::eval`].
    fn value(&self, a: &Subset) -> f64;

    fn descriptor(&self) -> String;

    /// Serializable form, when the function has a compact one.
    fn to_spec(&self) -> Option<FunctionSpec> {
        None
    }
}

/// A counted handle on a monotone submodular set function.
#[derive(Clone)]
pub struct Oracle {
    func: Arc<dyn SetFunction>,
    counter: Arc<AtomicU64>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("func", &self.func.descriptor())
            .field("queries", &self.query_count())
            .finish()
    }
}

impl Oracle {
    pub fn new(func: impl SetFunction + 'static) -> Self {
        Self::from_arc(Arc::new(func))
    }

    pub fn from_arc(func: Arc<dyn SetFunction>) -> Self {
        Self {
            func,
            counter: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn n(&self) -> usize {
        self.func.ground_size()
    }

    pub fn ground(&self) -> Subset {
        Subset::full(self.n())
    }

    pub fn function(&self) -> &Arc<dyn SetFunction> {
        &self.func
    }

    pub fn descriptor(&self) -> String {
        self.func.descriptor()
    }

    fn check_domain(&self, a: &Subset) -> Result<()> {
        let n = self.n();
        if a.span() > n {
            let element = a.iter().find(|&x| x >= n).unwrap_or(n);
            return Err(Error::OutOfDomain { element, n });
        }
        Ok(())
    }

    /// `f(A)`; one query.
    pub fn eval(&self, a: &Subset) -> Result<f64> {
        self.check_domain(a)?;
        self.counter.fetch_add(1, Ordering::Relaxed);
        Ok(self.func.value(a))
    }

    /// `f(X | A) = f(A ∪ X) - f(A)`. Always two queries, even when `X ⊆ A`.
    pub fn marginal(&self, x: &Subset, a: &Subset) -> Result<f64> {
        let with = self.eval(&a.union(x))?;
        let base = self.eval(a)?;
        Ok(with - base)
    }

    /// `h(A) = f(A ∪ S) - f(S)`. Costs one query now for `f(S)` and one base
    /// query per evaluation of `h`, all on this oracle's counter.
    pub fn restrict(&self, s: &Subset) -> Result<Oracle> {
        let base_value = self.eval(s)?;
        let func = Restricted {
            base: Arc::clone(&self.func),
            pinned: s.clone(),
            base_value,
        };
        Ok(Oracle {
            func: Arc::new(func),
            counter: Arc::clone(&self.counter),
        })
    }

    pub fn query_count(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    /// Same function, independent counter starting at zero.
    pub fn with_fresh_counter(&self) -> Oracle {
        Oracle::from_arc(Arc::clone(&self.func))
    }

    pub(crate) fn shares_counter(&self, other: &Oracle) -> bool {
        Arc::ptr_eq(&self.counter, &other.counter)
    }
}

/// `f(A ∪ S) - f(S)` for a fixed `S`.
#[derive(Debug)]
pub struct Restricted {
    base: Arc<dyn SetFunction>,
    pinned: Subset,
    base_value: f64,
}

impl SetFunction for Restricted {
    fn ground_size(&self) -> usize {
        self.base.ground_size()
    }

    fn value(&self, a: &Subset) -> f64 {
        if self.pinned.is_empty() {
            return self.base.value(a) - self.base_value;
        }
        self.base.value(&a.union(&self.pinned)) - self.base_value
    }

    fn descriptor(&self) -> String {
        format!("{} | {}", self.base.descriptor(), self.pinned)
    }
}

/// Pointwise minimum of a family of oracles over one ground set.
#[derive(Debug, Clone)]
pub struct MinOfFamily {
    members: Vec<Oracle>,
}

impl MinOfFamily {
    pub fn new(members: Vec<Oracle>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyFamily)?;
        let n = first.n();
        if let Some(bad) = members.iter().find(|o| o.n() != n) {
            return Err(Error::GroundMismatch {
                expected: n,
                found: bad.n(),
            });
        }
        Ok(Self { members })
    }

    pub fn n(&self) -> usize {
        self.members[0].n()
    }

    pub fn members(&self) -> &[Oracle] {
        &self.members
    }

    /// `min_i f_i(A)`; one query on every member.
    pub fn eval(&self, a: &Subset) -> Result<f64> {
        let mut best = f64::INFINITY;
        for m in &self.members {
            best = best.min(m.eval(a)?);
        }
        Ok(best)
    }

    /// Sum over the distinct counters of the members.
    pub fn query_count(&self) -> u64 {
        let mut seen: Vec<&Oracle> = Vec::new();
        let mut total = 0;
        for m in &self.members {
            if !seen.iter().any(|s| s.shares_counter(m)) {
                total += m.query_count();
                seen.push(m);
            }
        }
        total
    }
}

#[derive(Debug, Clone)]
pub struct ModularFunction {
    weights: Vec<f64>,
}

impl ModularFunction {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(precondition("modular function needs at least one element"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(precondition("modular weights must be finite and non-negative"));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetFunction for ModularFunction {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, a: &Subset) -> f64 {
        a.iter().map(|x| self.weights[x]).sum()
    }

    fn descriptor(&self) -> String {
        format!("modular(n={})", self.weights.len())
    }

    fn to_spec(&self) -> Option<FunctionSpec> {
        Some(FunctionSpec::Modular {
            weights: self.weights.clone(),
        })
    }
}

/// Weighted coverage: each element covers a subset of a finite universe and
/// `f(A)` is the total weight of the covered points.
#[derive(Debug, Clone)]
pub struct CoverageFunction {
    sets: Vec<Vec<usize>>,
    masks: Vec<Subset>,
    universe: usize,
    weights: Option<Vec<f64>>,
}

impl CoverageFunction {
    /// `sets[i]` lists the universe points covered by element `i`. Without
    /// weights every point counts 1.
    pub fn new(sets: Vec<Vec<usize>>, weights: Option<Vec<f64>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(precondition("coverage function needs at least one element"));
        }
        let max_point = sets.iter().flatten().map(|&p| p + 1).max().unwrap_or(0);
        let universe = match &weights {
            Some(w) => {
                if w.len() < max_point {
                    return Err(precondition(format!(
                        "coverage sets reference point {} but only {} weights given",
                        max_point - 1,
                        w.len()
                    )));
                }
                if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(precondition("universe weights must be finite and non-negative"));
                }
                w.len()
            }
            None => max_point,
        };
        let masks = sets.iter().map(|s| s.iter().copied().collect()).collect();
        Ok(Self {
            sets,
            masks,
            universe,
            weights,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn universe_weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn covered(&self, a: &Subset) -> Subset {
        a.iter().fold(Subset::empty(), |acc, x| acc.union(&self.masks[x]))
    }
}

impl SetFunction for CoverageFunction {
    fn ground_size(&self) -> usize {
        self.sets.len()
    }

    fn value(&self, a: &Subset) -> f64 {
        let covered = self.covered(a);
        match &self.weights {
            None => covered.len() as f64,
            Some(w) => covered.iter().map(|p| w[p]).sum(),
        }
    }

    fn descriptor(&self) -> String {
        format!("coverage(n={}, universe={})", self.sets.len(), self.universe)
    }

    fn to_spec(&self) -> Option<FunctionSpec> {
        Some(FunctionSpec::Coverage {
            sets: self.sets.clone(),
            universe_weights: self.weights.clone(),
        })
    }
}

/// A function given by its full value table, indexed by subset bit mask.
#[derive(Debug, Clone)]
pub struct ExplicitFunction {
    n: usize,
    table: Vec<f64>,
}

impl ExplicitFunction {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        if n == 0 || n > EXPLICIT_MAX_N {
            return Err(precondition(format!(
                "explicit tables need 1 <= n <= {EXPLICIT_MAX_N}, got {n}"
            )));
        }
        if table.len() != 1 << n {
            return Err(precondition(format!(
                "explicit table for n = {n} needs {} entries, got {}",
                1usize << n,
                table.len()
            )));
        }
        if table[0].abs() > EPS {
            return Err(precondition("explicit table must have f(empty) = 0"));
        }
        if table.iter().any(|v| !v.is_finite() || *v < -EPS) {
            return Err(precondition("explicit table values must be finite and non-negative"));
        }
        Ok(Self { n, table })
    }

    /// Tabulates any function on at most [`EXPLICIT_MAX_N`] elements.
    pub fn tabulate(f: &dyn SetFunction) -> Result<Self> {
        let n = f.ground_size();
        if n > EXPLICIT_MAX_N {
            return Err(precondition(format!(
                "cannot tabulate a function on {n} > {EXPLICIT_MAX_N} elements"
            )));
        }
        let table = (0..1u64 << n).map(|mask| f.value(&Subset::from_mask(mask))).collect();
        Self::new(n, table)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

impl SetFunction for ExplicitFunction {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, a: &Subset) -> f64 {
        self.table[a.to_mask() as usize]
    }

    fn descriptor(&self) -> String {
        format!("explicit(n={})", self.n)
    }

    fn to_spec(&self) -> Option<FunctionSpec> {
        Some(FunctionSpec::Explicit {
            table: self.table.clone(),
        })
    }
}

/// Outcome of a sampled or exhaustive property check.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub samples: usize,
    pub empty_value: f64,
    pub monotonicity_violations: usize,
    pub submodularity_violations: usize,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.empty_value.abs() <= EPS && self.monotonicity_violations == 0 && self.submodularity_violations == 0
    }
}

/// Samples `samples` triples `(B ⊆ A, a ∉ A)` and checks
/// `f(B) <= f(A)` and `f(A + a) - f(A) <= f(B + a) - f(B)`.
///
/// Runs on a private counter; the caller's query count is unaffected.
pub fn sample_properties(f: &Oracle, samples: usize, seed: u64) -> Result<PropertyReport> {
    let f = f.with_fresh_counter();
    let n = f.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropertyReport {
        samples,
        empty_value: f.eval(&Subset::empty())?,
        ..Default::default()
    };
    let mut order: Vec<Element> = (0..n).collect();
    for _ in 0..samples {
        order.shuffle(&mut rng);
        // a chain B ⊆ A drawn from a random prefix; `a` comes after A
        let a_len = rng.gen_range(0..n);
        let b_len = rng.gen_range(0..=a_len);
        let b: Subset = order[..b_len].iter().copied().collect();
        let a: Subset = order[..a_len].iter().copied().collect();
        let x = order[a_len];
        let fb = f.eval(&b)?;
        let fa = f.eval(&a)?;
        if fb > fa + EPS {
            report.monotonicity_violations += 1;
        }
        let gain_a = f.eval(&a.with(x))? - fa;
        let gain_b = f.eval(&b.with(x))? - fb;
        if gain_a > gain_b + EPS {
            report.submodularity_violations += 1;
        }
        if gain_a < -EPS {
            report.monotonicity_violations += 1;
        }
    }
    Ok(report)
}

/// Exhaustive local check over every `S` and `a, b ∉ S`:
/// `f(S + a) >= f(S)` and `f(S + a) + f(S + b) >= f(S + a + b) + f(S)`.
/// Local diminishing returns is equivalent to submodularity.
pub fn exhaustive_properties(f: &Oracle) -> Result<PropertyReport> {
    let n = f.n();
    if n > EXPLICIT_MAX_N {
        return Err(precondition(format!(
            "exhaustive check limited to n <= {EXPLICIT_MAX_N}"
        )));
    }
    let func = f.function();
    let table: Vec<f64> = (0..1u64 << n).map(|m| func.value(&Subset::from_mask(m))).collect();
    let mut report = PropertyReport {
        empty_value: table[0],
        ..Default::default()
    };
    for s in 0..1usize << n {
        for a in 0..n {
            if s & (1 << a) != 0 {
                continue;
            }
            let sa = s | (1 << a);
            report.samples += 1;
            if table[sa] < table[s] - EPS {
                report.monotonicity_violations += 1;
            }
            for b in a + 1..n {
                if s & (1 << b) != 0 {
                    continue;
                }
                let sb = s | (1 << b);
                if table[sa] + table[sb] < table[sa | sb] + table[s] - EPS {
                    report.submodularity_violations += 1;
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> Subset {
        xs.iter().copied().collect()
    }

    fn modular(w: &[f64]) -> Oracle {
        Oracle::new(ModularFunction::new(w.to_vec()).unwrap())
    }

    fn coverage(sets: &[&[usize]]) -> Oracle {
        Oracle::new(CoverageFunction::new(sets.iter().map(|s| s.to_vec()).collect(), None).unwrap())
    }

    #[test]
    fn eval_examples() {
        let f = modular(&[3.0, 1.0, 2.0]);
        assert_eq!(f.eval(&set(&[0, 2])).unwrap(), 5.0);
        assert_eq!(f.eval(&Subset::empty()).unwrap(), 0.0);
        let c = coverage(&[&[1, 2], &[2]]);
        assert_eq!(c.eval(&set(&[0, 1])).unwrap(), 2.0);
        assert_eq!(c.eval(&Subset::empty()).unwrap(), 0.0);
    }

    #[test]
    fn eval_out_of_domain() {
        let f = modular(&[3.0, 1.0, 2.0]);
        let err = f.eval(&set(&[0, 3])).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { element: 3, n: 3 }));
        assert_eq!(f.query_count(), 0);
        assert!(f.marginal(&set(&[7]), &Subset::empty()).is_err());
    }

    #[test]
    fn marginal_examples() {
        let f = modular(&[3.0, 1.0, 2.0]);
        assert_eq!(f.marginal(&set(&[1]), &set(&[0])).unwrap(), 1.0);
        assert_eq!(f.marginal(&set(&[0]), &set(&[0, 2])).unwrap(), 0.0);
        let c = coverage(&[&[1], &[1]]);
        assert_eq!(c.marginal(&set(&[1]), &set(&[0])).unwrap(), 0.0);
    }

    #[test]
    fn restrict_examples() {
        let f = modular(&[3.0, 1.0, 2.0]);
        let h = f.restrict(&set(&[0])).unwrap();
        assert_eq!(h.eval(&set(&[1, 2])).unwrap(), 3.0);
        let id = f.restrict(&Subset::empty()).unwrap();
        for mask in 0..8u64 {
            let a = Subset::from_mask(mask);
            assert_eq!(id.eval(&a).unwrap(), f.eval(&a).unwrap());
        }
        let c = coverage(&[&[1, 2], &[2]]);
        let hc = c.restrict(&set(&[0])).unwrap();
        assert_eq!(hc.eval(&set(&[1])).unwrap(), 0.0);
    }

    #[test]
    fn restrict_forwards_queries() {
        let f = modular(&[3.0, 1.0, 2.0]);
        let h = f.restrict(&set(&[0])).unwrap();
        assert_eq!(f.query_count(), 1);
        h.eval(&set(&[1])).unwrap();
        h.eval(&set(&[2])).unwrap();
        assert_eq!(f.query_count(), 3);
        assert_eq!(h.query_count(), 3);
    }

    #[test]
    fn query_accounting() {
        let f = modular(&[1.0, 2.0]);
        assert_eq!(f.query_count(), 0);
        for _ in 0..3 {
            f.eval(&set(&[0])).unwrap();
        }
        assert_eq!(f.query_count(), 3);
        f.marginal(&set(&[1]), &set(&[1])).unwrap();
        assert_eq!(f.query_count(), 5);
        let g = f.with_fresh_counter();
        assert_eq!(g.query_count(), 0);
        g.eval(&set(&[0])).unwrap();
        assert_eq!(f.query_count(), 5);
    }

    #[test]
    fn min_of_family_examples() {
        let f1 = modular(&[1.0, 0.0]);
        let f2 = modular(&[0.0, 1.0]);
        let single = MinOfFamily::new(vec![f1.clone()]).unwrap();
        assert_eq!(single.eval(&set(&[0])).unwrap(), 1.0);
        let fam = MinOfFamily::new(vec![f1, f2]).unwrap();
        assert_eq!(fam.eval(&set(&[0])).unwrap(), 0.0);
        assert_eq!(fam.eval(&set(&[0, 1])).unwrap(), 1.0);
        // the clone inside `single` shares f1's counter
        assert_eq!(fam.query_count(), 5);
    }

    #[test]
    fn min_of_family_errors() {
        assert!(matches!(MinOfFamily::new(vec![]), Err(Error::EmptyFamily)));
        let err = MinOfFamily::new(vec![modular(&[1.0]), modular(&[1.0, 2.0])]).unwrap_err();
        assert!(matches!(err, Error::GroundMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn min_of_family_counts_shared_counter_once() {
        let f = modular(&[1.0, 2.0, 3.0]);
        let h0 = f.restrict(&set(&[0])).unwrap();
        let h1 = f.restrict(&set(&[1])).unwrap();
        let fam = MinOfFamily::new(vec![h0, h1]).unwrap();
        fam.eval(&set(&[2])).unwrap();
        assert_eq!(fam.query_count(), 4);
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(ModularFunction::new(vec![1.0, -1.0]).is_err());
        assert!(ModularFunction::new(vec![]).is_err());
        assert!(CoverageFunction::new(vec![vec![3]], Some(vec![1.0])).is_err());
        assert!(ExplicitFunction::new(2, vec![0.0, 1.0, 1.0]).is_err());
        assert!(ExplicitFunction::new(1, vec![1.0, 1.0]).is_err());
        assert!(ExplicitFunction::new(17, vec![]).is_err());
    }

    #[test]
    fn checkers_flag_violations() {
        // f = 1 on {0,1} only: supermodular
        let bad = Oracle::new(ExplicitFunction::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap());
        let r = exhaustive_properties(&bad).unwrap();
        assert_eq!(r.submodularity_violations, 1);
        assert!(!r.passed());
        // decreasing: not monotone
        let dec = Oracle::new(ExplicitFunction::new(1, vec![0.0, 0.0]).unwrap());
        assert!(exhaustive_properties(&dec).unwrap().passed());
        let c = coverage(&[&[0, 1], &[1, 2], &[3], &[0, 3]]);
        let s = sample_properties(&c, 1000, 3).unwrap();
        assert!(s.passed());
        assert_eq!(c.query_count(), 0);
    }
}
