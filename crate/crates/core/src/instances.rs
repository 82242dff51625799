//! Problem instances and generators.
//!
//! The pathological instances are realized as weighted coverage functions so
//! they are monotone submodular by construction; each generator then checks
//! the values its construction is supposed to exhibit and refuses to return an
//! instance that does not match.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSpec;
use crate::error::{precondition, Error, Result};
use crate::format::FunctionSpec;
use crate::oracle::{CoverageFunction, ExplicitFunction, ModularFunction, Oracle, SetFunction, EPS, EXPLICIT_MAX_N};
use crate::subset::{Element, Subset};

/// One robust maximization problem: maximize `g_tau(A)` over `|A| <= k`
/// (or over a constraint's independent sets when one is attached).
#[derive(Debug, Clone)]
pub struct Instance {
    pub oracle: Oracle,
    pub k: usize,
    pub tau: usize,
    pub label: String,
    pub copies: Option<CopyMap>,
    pub constraint: Option<ConstraintSpec>,
}

impl Instance {
    /// Requires `tau < k <= n`, or `tau = 0 <= k <= n`.
    pub fn new(oracle: Oracle, k: usize, tau: usize, label: impl Into<String>) -> Result<Self> {
        let n = oracle.n();
        if k > n {
            return Err(precondition(format!("k = {k} exceeds n = {n}")));
        }
        if tau > 0 && tau >= k {
            return Err(precondition(format!("tau = {tau} must be below k = {k}")));
        }
        Ok(Self {
            oracle,
            k,
            tau,
            label: label.into(),
            copies: None,
            constraint: None,
        })
    }

    pub fn n(&self) -> usize {
        self.oracle.n()
    }

    pub fn with_tau(&self, tau: usize) -> Result<Self> {
        let mut out = Instance::new(self.oracle.clone(), self.k, tau, self.label.clone())?;
        out.copies = self.copies.clone();
        out.constraint = self.constraint.clone();
        Ok(out)
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        let mut out = Instance::new(self.oracle.clone(), k, self.tau, self.label.clone())?;
        out.copies = self.copies.clone();
        out.constraint = self.constraint.clone();
        Ok(out)
    }

    /// Same instance on a fresh query counter.
    pub fn fresh(&self) -> Self {
        let mut out = self.clone();
        out.oracle = self.oracle.with_fresh_counter();
        out
    }
}

/// Maps each original element to the ids of its copies.
///
/// Copy `j` (1-based) of original `x` has id `x + j * originals`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyMap {
    pub originals: usize,
    pub copies: Vec<Vec<Element>>,
}

impl CopyMap {
    pub fn uniform(originals: usize, per_element: usize) -> Self {
        let copies = (0..originals)
            .map(|x| (1..=per_element).map(|j| x + j * originals).collect())
            .collect();
        Self { originals, copies }
    }

    /// Smallest number of copies any original has.
    pub fn copies_per_element(&self) -> usize {
        self.copies.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn copies_of(&self, x: Element) -> &[Element] {
        &self.copies[x]
    }

    pub fn originals_set(&self) -> Subset {
        Subset::full(self.originals)
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        if self.copies.len() != self.originals || self.originals > n {
            return Err(Error::Config("copy map does not match the ground set".into()));
        }
        let mut seen = Subset::full(self.originals);
        for ids in &self.copies {
            for &c in ids {
                if c >= n || !seen.insert(c) {
                    return Err(Error::Config(format!("copy id {c} is invalid or repeated")));
                }
            }
        }
        Ok(())
    }
}

/// `h(A) = f(project(A))` where every copy projects onto its original.
#[derive(Debug)]
struct CopyAugmented {
    base: Arc<dyn SetFunction>,
    originals: usize,
    per_element: usize,
}

impl CopyAugmented {
    fn project(&self, a: &Subset) -> Subset {
        a.iter().map(|x| x % self.originals).collect()
    }
}

impl SetFunction for CopyAugmented {
    fn ground_size(&self) -> usize {
        self.originals * (self.per_element + 1)
    }

    fn value(&self, a: &Subset) -> f64 {
        self.base.value(&self.project(a))
    }

    fn descriptor(&self) -> String {
        format!("{} + {} copies", self.base.descriptor(), self.per_element)
    }

    fn to_spec(&self) -> Option<FunctionSpec> {
        let reps = self.per_element + 1;
        match self.base.to_spec()? {
            FunctionSpec::Coverage { sets, universe_weights } => Some(FunctionSpec::Coverage {
                sets: sets.iter().cycle().take(sets.len() * reps).cloned().collect(),
                universe_weights,
            }),
            FunctionSpec::Modular { weights } => Some(FunctionSpec::Modular {
                weights: weights.iter().cycle().take(weights.len() * reps).copied().collect(),
            }),
            FunctionSpec::Explicit { .. } => ExplicitFunction::tabulate(self).ok()?.to_spec(),
        }
    }
}

/// Adds `c` copies of every element. `k` and `tau` carry over.
pub fn augment_with_copies(inst: &Instance, c: usize) -> Result<(Instance, CopyMap)> {
    if c == 0 {
        return Err(precondition("at least one copy per element is required"));
    }
    let originals = inst.n();
    originals
        .checked_mul(c + 1)
        .ok_or_else(|| precondition("copy-augmented ground set overflows"))?;
    let func = CopyAugmented {
        base: Arc::clone(inst.oracle.function()),
        originals,
        per_element: c,
    };
    let map = CopyMap::uniform(originals, c);
    let mut out = Instance::new(
        Oracle::new(func),
        inst.k,
        inst.tau,
        format!("{}+copies{}", inst.label, c),
    )?;
    out.copies = Some(map.clone());
    Ok((out, map))
}

/// `h(A) = f(A ∩ N) + weight * |A ∩ X|` with `X` the appended elements.
#[derive(Debug)]
struct AdditiveExtension {
    base: Arc<dyn SetFunction>,
    originals: usize,
    extra: usize,
    weight: f64,
}

impl SetFunction for AdditiveExtension {
    fn ground_size(&self) -> usize {
        self.originals + self.extra
    }

    fn value(&self, a: &Subset) -> f64 {
        let base_part: Subset = a.iter().filter(|&x| x < self.originals).collect();
        let extra = a.len() - base_part.len();
        self.base.value(&base_part) + self.weight * extra as f64
    }

    fn descriptor(&self) -> String {
        format!(
            "{} + {} additive(w={})",
            self.base.descriptor(),
            self.extra,
            self.weight
        )
    }

    fn to_spec(&self) -> Option<FunctionSpec> {
        match self.base.to_spec()? {
            FunctionSpec::Coverage {
                mut sets,
                universe_weights,
            } => {
                let universe = sets.iter().flatten().map(|&p| p + 1).max().unwrap_or(0);
                let mut weights = universe_weights.unwrap_or_else(|| vec![1.0; universe]);
                for _ in 0..self.extra {
                    sets.push(vec![weights.len()]);
                    weights.push(self.weight);
                }
                Some(FunctionSpec::Coverage {
                    sets,
                    universe_weights: Some(weights),
                })
            }
            FunctionSpec::Modular { mut weights } => {
                weights.extend(std::iter::repeat_n(self.weight, self.extra));
                Some(FunctionSpec::Modular { weights })
            }
            FunctionSpec::Explicit { .. } => ExplicitFunction::tabulate(self).ok()?.to_spec(),
        }
    }
}

/// Embeds a `tau = 0` instance `(k, N, 0)` into `(k + tau, N ∪ X, tau)`.
///
/// The `tau` new elements are fully additive, each worth `(k + 1)` times the
/// best singleton, so an adversary always removes them first and the robust
/// optimum of the new instance equals the plain optimum of the old one.
pub fn gen_hardness_augment(inst: &Instance, tau_new: usize) -> Result<Instance> {
    if inst.tau != 0 {
        return Err(precondition("hardness augmentation needs a tau = 0 instance"));
    }
    if tau_new == 0 {
        return Err(precondition("tau_new must be at least 1"));
    }
    let best_single = (0..inst.n())
        .map(|x| inst.oracle.eval(&Subset::singleton(x)))
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))?;
    let func = AdditiveExtension {
        base: Arc::clone(inst.oracle.function()),
        originals: inst.n(),
        extra: tau_new,
        weight: (inst.k as f64 + 1.0) * best_single,
    };
    Instance::new(
        Oracle::new(func),
        inst.k + tau_new,
        tau_new,
        format!("{}+hardness{}", inst.label, tau_new),
    )
}

/// Element roles in [`gen_greedy_failure`]: `a_i` has id `i - 1`.
#[derive(Debug, Clone, Copy)]
pub struct GreedyFailureLayout {
    pub k: usize,
}

impl GreedyFailureLayout {
    /// `a_i`, 1-based as in the construction.
    pub fn a(&self, i: usize) -> Element {
        assert!((1..=2 * self.k).contains(&i));
        i - 1
    }

    /// `{a_1, .., a_k}`: what plain greedy picks.
    pub fn greedy_set(&self) -> Subset {
        (0..self.k).collect()
    }

    /// `{a_{k+1}, .., a_{2k}}`: the robust optimum.
    pub fn robust_set(&self) -> Subset {
        (self.k..2 * self.k).collect()
    }
}

/// Ground set of `2k` elements where greedy's choice collapses when `a_1`
/// is removed.
///
/// `f(a_1) = 1`, `a_2 .. a_k` are worthless, and each `a_j` with `j > k`
/// adds `1/k` unless `a_1` or `a_j` is already present. Realized as a
/// coverage function: `a_1` covers all `k` points of weight `1/k`, `a_j`
/// covers point `j - k - 1`.
pub fn gen_greedy_failure(k: usize) -> Result<Instance> {
    if k < 2 {
        return Err(precondition("greedy-failure instance needs k >= 2"));
    }
    let layout = GreedyFailureLayout { k };
    let mut sets = vec![Vec::new(); 2 * k];
    sets[layout.a(1)] = (0..k).collect();
    for j in k + 1..=2 * k {
        sets[layout.a(j)] = vec![j - k - 1];
    }
    let weights = vec![1.0 / k as f64; k];
    let oracle = Oracle::new(CoverageFunction::new(sets, Some(weights))?);
    let inst = Instance::new(oracle, k, 1, format!("greedy-failure(k={k})"))?;
    validate_greedy_failure(&inst, layout)?;
    Ok(inst)
}

fn validate_greedy_failure(inst: &Instance, layout: GreedyFailureLayout) -> Result<()> {
    let f = inst.oracle.with_fresh_counter();
    let k = layout.k;
    let inv_k = 1.0 / k as f64;
    let check = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Internal(format!("greedy-failure construction: {what}")))
        }
    };
    check(
        (f.eval(&Subset::singleton(layout.a(1)))? - 1.0).abs() <= EPS,
        "f(a_1) != 1",
    )?;
    for i in 2..=k {
        check(f.eval(&Subset::singleton(layout.a(i)))?.abs() <= EPS, "f(a_i) != 0")?;
    }
    // marginals of the a_j, exhaustively over X when the table is small
    let n = inst.n();
    let masks: Box<dyn Iterator<Item = Subset>> = if n <= EXPLICIT_MAX_N {
        Box::new((0..1u64 << n).map(Subset::from_mask))
    } else {
        Box::new([Subset::empty(), layout.greedy_set(), layout.robust_set()].into_iter())
    };
    for x in masks {
        for j in k + 1..=2 * k {
            let aj = layout.a(j);
            let expected = if x.contains(layout.a(1)) || x.contains(aj) {
                0.0
            } else {
                inv_k
            };
            let got = f.marginal(&Subset::singleton(aj), &x)?;
            check((got - expected).abs() <= EPS, "f(a_j | X) mismatch")?;
        }
    }
    Ok(())
}

/// Element roles in [`gen_partial_copies`].
///
/// Ids: `a_1 = 0`, `a_2 = 1`, garbage `2 .. k`, partial copies of `a_1` next,
/// then partial copies of `a_2`, and the full copy `a'_1` last. Garbage and
/// partial copies of `a_1` sit at low ids so that smallest-id tie-breaking
/// plays the adversary.
#[derive(Debug, Clone, Copy)]
pub struct PartialCopiesLayout {
    pub k: usize,
}

impl PartialCopiesLayout {
    pub fn n(&self) -> usize {
        3 * self.k + 1
    }

    /// `a_i` for `i` in 1..=2.
    pub fn a(&self, i: usize) -> Element {
        assert!(i == 1 || i == 2);
        i - 1
    }

    /// `a'_1`.
    pub fn a1_copy(&self) -> Element {
        3 * self.k
    }

    /// `a^j_i` for `i` in 1..=2 and `j` in 1..=k.
    pub fn partial(&self, i: usize, j: usize) -> Element {
        assert!((i == 1 || i == 2) && (1..=self.k).contains(&j));
        self.k + (i - 1) * self.k + (j - 1)
    }

    pub fn garbage(&self) -> Subset {
        (2..self.k).collect()
    }
}

/// Instance where `a_1` has a full copy and both `a_1`, `a_2` have `k`
/// partial copies worth `1/k` each, plus `k - 2` worthless elements.
pub fn gen_partial_copies(k: usize) -> Result<Instance> {
    if k < 4 {
        return Err(precondition("partial-copies instance needs k >= 4"));
    }
    let layout = PartialCopiesLayout { k };
    // points 0..k belong to a_1, k..2k to a_2
    let mut sets = vec![Vec::new(); layout.n()];
    sets[layout.a(1)] = (0..k).collect();
    sets[layout.a(2)] = (k..2 * k).collect();
    sets[layout.a1_copy()] = (0..k).collect();
    for j in 1..=k {
        sets[layout.partial(1, j)] = vec![j - 1];
        sets[layout.partial(2, j)] = vec![k + j - 1];
    }
    let weights = vec![1.0 / k as f64; 2 * k];
    let oracle = Oracle::new(CoverageFunction::new(sets, Some(weights))?);
    let inst = Instance::new(oracle, k, 1, format!("partial-copies(k={k})"))?;
    validate_partial_copies(&inst, layout)?;
    Ok(inst)
}

fn validate_partial_copies(inst: &Instance, layout: PartialCopiesLayout) -> Result<()> {
    let f = inst.oracle.with_fresh_counter();
    let k = layout.k;
    let inv_k = 1.0 / k as f64;
    let close = |a: f64, b: f64| (a - b).abs() <= EPS;
    let (a1, a2, a1c) = (layout.a(1), layout.a(2), layout.a1_copy());
    let mut ok = close(f.eval(&Subset::singleton(a1))?, 1.0)
        && close(f.eval(&Subset::singleton(a2))?, 1.0)
        && close(f.eval(&[a1, a2].into_iter().collect())?, 2.0)
        && close(f.eval(&layout.garbage())?, 0.0)
        && close(f.eval(&Subset::singleton(a1c))?, 1.0)
        && close(f.marginal(&Subset::singleton(a1c), &Subset::singleton(a1))?, 0.0);
    for i in 1..=2 {
        let owner = layout.a(i);
        for j in 1..=k {
            let p = Subset::singleton(layout.partial(i, j));
            ok &= close(f.eval(&p)?, inv_k);
            ok &= close(f.marginal(&p, &Subset::singleton(owner))?, 0.0);
            ok &= close(f.marginal(&p, &layout.garbage())?, inv_k);
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Error::Internal("partial-copies construction mismatch".into()))
    }
}

/// Each element covers each of `universe` points independently with
/// probability `density`. Deterministic in `seed`.
pub fn gen_random_coverage(
    n: usize,
    universe: usize,
    density: f64,
    seed: u64,
    k: usize,
    tau: usize,
) -> Result<Instance> {
    if n == 0 || universe == 0 {
        return Err(precondition("n and universe must be positive"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(precondition("density must lie in (0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets = (0..n)
        .map(|_| (0..universe).filter(|_| rng.gen_bool(density)).collect())
        .collect();
    let oracle = Oracle::new(CoverageFunction::new(sets, Some(vec![1.0; universe]))?);
    Instance::new(
        oracle,
        k,
        tau,
        format!("coverage(n={n},u={universe},d={density},seed={seed})"),
    )
}

/// Integer weights drawn uniformly from `0..=max_weight`.
pub fn gen_random_modular(n: usize, max_weight: u32, seed: u64, k: usize, tau: usize) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..n).map(|_| rng.gen_range(0..=max_weight) as f64).collect();
    let oracle = Oracle::new(ModularFunction::new(weights)?);
    Instance::new(oracle, k, tau, format!("modular(n={n},seed={seed})"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exhaustive_properties, sample_properties};

    fn set(xs: &[usize]) -> Subset {
        xs.iter().copied().collect()
    }

    #[test]
    fn greedy_failure_values() {
        let inst = gen_greedy_failure(4).unwrap();
        let l = GreedyFailureLayout { k: 4 };
        let f = &inst.oracle;
        let a = l.greedy_set();
        assert_eq!(f.eval(&a).unwrap(), 1.0);
        assert_eq!(f.eval(&a.without(l.a(1))).unwrap(), 0.0);
        let s = l.robust_set();
        for x in s.iter() {
            assert!((f.eval(&s.without(x)).unwrap() - 0.75).abs() <= EPS);
        }
        assert_eq!(f.eval(&Subset::singleton(l.a(1))).unwrap(), 1.0);
        assert_eq!((inst.n(), inst.k, inst.tau), (8, 4, 1));
    }

    #[test]
    fn greedy_failure_is_submodular() {
        for k in [2, 4, 6, 8] {
            let inst = gen_greedy_failure(k).unwrap();
            assert!(exhaustive_properties(&inst.oracle).unwrap().passed(), "k={k}");
        }
        assert!(gen_greedy_failure(1).is_err());
    }

    #[test]
    fn partial_copies_values() {
        let k = 6;
        let inst = gen_partial_copies(k).unwrap();
        let l = PartialCopiesLayout { k };
        let f = &inst.oracle;
        assert!((f.eval(&set(&[l.a(1), l.a(2)])).unwrap() - 2.0).abs() <= EPS);
        let m = f
            .marginal(&Subset::singleton(l.partial(1, 3)), &Subset::singleton(l.a(1)))
            .unwrap();
        assert_eq!(m, 0.0);
        assert_eq!(f.eval(&l.garbage()).unwrap(), 0.0);
        assert_eq!(inst.n(), 19);
        assert!(sample_properties(f, 1000, 1).unwrap().passed());
        assert!(gen_partial_copies(3).is_err());
    }

    #[test]
    fn copies_projection() {
        let base = Instance::new(
            Oracle::new(ModularFunction::new(vec![3.0, 1.0, 2.0]).unwrap()),
            2,
            1,
            "m",
        )
        .unwrap();
        let (inst, map) = augment_with_copies(&base, 1).unwrap();
        assert_eq!(inst.n(), 6);
        assert_eq!(map.copies_of(0), &[3]);
        let f = &inst.oracle;
        assert_eq!(f.eval(&set(&[0, 3])).unwrap(), 3.0);
        assert_eq!(f.eval(&set(&[0, 1, 2])).unwrap(), 6.0);

        let (inst2, map2) = augment_with_copies(&base, 2).unwrap();
        assert_eq!(map2.copies_of(1), &[4, 7]);
        assert_eq!(inst2.oracle.eval(&set(&[1, 4, 7])).unwrap(), 1.0);
        assert!(augment_with_copies(&base, 0).is_err());
    }

    #[test]
    fn copies_are_copies_exhaustively() {
        let base = gen_random_coverage(5, 8, 0.4, 11, 3, 1).unwrap();
        let (inst, map) = augment_with_copies(&base, 1).unwrap();
        let f = &inst.oracle;
        for x in 0..5 {
            for &c in map.copies_of(x) {
                let fx = f.eval(&Subset::singleton(x)).unwrap();
                assert_eq!(f.eval(&Subset::singleton(c)).unwrap(), fx);
                assert_eq!(f.marginal(&Subset::singleton(c), &Subset::singleton(x)).unwrap(), 0.0);
                for mask in 0..1u64 << 10 {
                    let a = Subset::from_mask(mask);
                    let mx = f.marginal(&Subset::singleton(x), &a).unwrap();
                    let mc = f.marginal(&Subset::singleton(c), &a).unwrap();
                    assert_eq!(mx, mc);
                }
            }
        }
        assert!(exhaustive_properties(f).unwrap().passed());
    }

    #[test]
    fn hardness_weight() {
        let base = Instance::new(
            Oracle::new(ModularFunction::new(vec![3.0, 1.0, 2.0]).unwrap()),
            2,
            0,
            "m",
        )
        .unwrap();
        let aug = gen_hardness_augment(&base, 1).unwrap();
        assert_eq!(aug.oracle.eval(&Subset::singleton(3)).unwrap(), 9.0);
        assert_eq!((aug.n(), aug.k, aug.tau), (4, 3, 1));
        assert!(gen_hardness_augment(&base, 0).is_err());
        let with_tau = base.with_tau(1).unwrap();
        assert!(gen_hardness_augment(&with_tau, 1).is_err());
    }

    #[test]
    fn random_coverage_determinism_and_density() {
        let a = gen_random_coverage(8, 12, 0.3, 7, 4, 1).unwrap();
        let b = gen_random_coverage(8, 12, 0.3, 7, 4, 1).unwrap();
        for mask in 0..256u64 {
            let s = Subset::from_mask(mask);
            assert_eq!(a.oracle.eval(&s).unwrap(), b.oracle.eval(&s).unwrap());
        }
        assert!(sample_properties(&a.oracle, 1000, 5).unwrap().passed());
        let full = gen_random_coverage(5, 9, 1.0, 3, 2, 1).unwrap();
        for mask in 1..32u64 {
            assert_eq!(full.oracle.eval(&Subset::from_mask(mask)).unwrap(), 9.0);
        }
        assert!(gen_random_coverage(5, 9, 0.0, 3, 2, 1).is_err());
    }

    #[test]
    fn instance_invariants() {
        let f = Oracle::new(ModularFunction::new(vec![1.0; 4]).unwrap());
        assert!(Instance::new(f.clone(), 5, 0, "").is_err());
        assert!(Instance::new(f.clone(), 2, 2, "").is_err());
        assert!(Instance::new(f, 4, 0, "").is_ok());
    }
}
