//! Exhaustive reference computations.
//!
//! Everything here is exact: when an enumeration would exceed its budget the
//! call fails with [`Error::BudgetExceeded`] instead of sampling. Subsets are
//! visited in lexicographic order and ties go to the lexicographically
//! smallest candidate.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::IndependenceSystem;
use crate::error::{precondition, Error, Result};
use crate::instances::Instance;
use crate::oracle::{CoverageFunction, ModularFunction, Oracle, EPS};
use crate::subset::{binomial, for_each_combination, Element, Subset};

/// Environment variable that overrides every enumeration cap.
pub const BUDGET_ENV: &str = "RSMAX_BUDGET";

/// Enumeration caps, counted in candidate sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub minimizer: u64,
    pub opt: u64,
    pub solver: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            minimizer: 10_000_000,
            opt: 100_000_000,
            solver: 10_000_000,
        }
    }
}

impl Budget {
    pub fn uniform(cap: u64) -> Self {
        Self {
            minimizer: cap,
            opt: cap,
            solver: cap,
        }
    }

    /// Defaults, or a uniform cap from `RSMAX_BUDGET` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Err(_) => Ok(Self::default()),
            Ok(v) => v
                .trim()
                .parse::<u64>()
                .ok()
                .filter(|&c| c > 0)
                .map(Self::uniform)
                .ok_or_else(|| Error::Config(format!("{BUDGET_ENV}={v} is not a positive integer"))),
        }
    }
}

pub(crate) fn ensure_budget(needed: u128, cap: u64) -> Result<()> {
    if needed > cap as u128 {
        Err(Error::BudgetExceeded { needed, cap })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerResult {
    /// Lexicographically smallest `Z` with `|Z| <= tau` attaining the minimum.
    pub z: Subset,
    /// `g_tau(A) = f(A - Z)`.
    pub value: f64,
    /// Every minimizer of size exactly `min(tau, |A|)`.
    pub all_minimizers: Vec<Subset>,
}

/// Exact `g_tau(A) = min { f(A - Z) : Z ⊆ A, |Z| <= tau }`, which is 0 when
/// `|A| <= tau`. Queries are charged to `f`.
pub fn minimizer(f: &Oracle, a: &Subset, tau: usize, budget: &Budget) -> Result<MinimizerResult> {
    let elems = a.to_vec();
    let top = tau.min(elems.len());
    let needed: u128 = (0..=top).map(|j| binomial(elems.len(), j)).sum();
    ensure_budget(needed, budget.minimizer)?;

    let mut best_z = Subset::empty();
    let mut best = f64::INFINITY;
    let mut all = Vec::new();
    let mut all_value = f64::INFINITY;
    for size in 0..=top {
        let mut err = None;
        for_each_combination::<()>(&elems, size, |z| {
            let v = match f.eval(&a.difference(z)) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return ControlFlow::Break(());
                }
            };
            if v < best - EPS || (v <= best + EPS && *z < best_z) {
                best = best.min(v);
                best_z = z.clone();
            }
            if size == top {
                if v < all_value - EPS {
                    all_value = v;
                    all.clear();
                }
                if v <= all_value + EPS {
                    all.push(z.clone());
                }
            }
            ControlFlow::Continue(())
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(MinimizerResult {
        z: best_z,
        value: best,
        all_minimizers: all,
    })
}

/// `g_tau(A)` only, enumerating removals of size exactly `min(tau, |A|)`;
/// by monotonicity these attain the minimum.
pub fn robust_value(f: &Oracle, a: &Subset, tau: usize, budget: &Budget) -> Result<f64> {
    if tau == 0 {
        return f.eval(a);
    }
    let elems = a.to_vec();
    let top = tau.min(elems.len());
    ensure_budget(binomial(elems.len(), top), budget.minimizer)?;
    let mut best = f64::INFINITY;
    let mut err = None;
    for_each_combination::<()>(&elems, top, |z| match f.eval(&a.difference(z)) {
        Ok(v) => {
            best = best.min(v);
            ControlFlow::Continue(())
        }
        Err(e) => {
            err = Some(e);
            ControlFlow::Break(())
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// Exact `max { g_tau(A) : A ⊆ ground, |A| <= k }`.
///
/// `g_tau` is monotone, so only sets of size `min(k, |ground|)` are visited.
pub fn opt_robust_over(f: &Oracle, ground: &Subset, k: usize, tau: usize, budget: &Budget) -> Result<(Subset, f64)> {
    let pool = ground.to_vec();
    let size = k.min(pool.len());
    let per_set = binomial(size, tau.min(size));
    ensure_budget(binomial(pool.len(), size).saturating_mul(per_set), budget.opt)?;
    let inner = Budget {
        minimizer: u64::MAX,
        ..*budget
    };
    let mut best_set = Subset::empty();
    let mut best = f64::NEG_INFINITY;
    let mut err = None;
    for_each_combination::<()>(&pool, size, |a| match robust_value(f, a, tau, &inner) {
        Ok(v) => {
            if v > best + EPS {
                best = v;
                best_set = a.clone();
            }
            ControlFlow::Continue(())
        }
        Err(e) => {
            err = Some(e);
            ControlFlow::Break(())
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok((best_set, best.max(0.0))),
    }
}

/// `OPT(k, N, tau)` and its value.
pub fn opt_robust(inst: &Instance, budget: &Budget) -> Result<(Subset, f64)> {
    opt_robust_over(&inst.oracle, &inst.oracle.ground(), inst.k, inst.tau, budget)
}

/// Exact robust optimum over the independent sets of `sys`.
pub fn opt_robust_system(
    f: &Oracle,
    sys: &dyn IndependenceSystem,
    tau: usize,
    budget: &Budget,
) -> Result<(Subset, f64)> {
    let n = f.n();
    if n > 24 {
        return Err(precondition("independence-system optimum limited to n <= 24"));
    }
    ensure_budget((1u128 << n).saturating_mul(binomial(n, tau)), budget.opt)?;
    let inner = Budget {
        minimizer: u64::MAX,
        ..*budget
    };
    let mut best_set = Subset::empty();
    let mut best = f64::NEG_INFINITY;
    for mask in 0..1u64 << n {
        let a = Subset::from_mask(mask);
        if !sys.is_independent(&a) {
            continue;
        }
        let v = robust_value(f, &a, tau, &inner)?;
        if v > best + EPS || (v >= best - EPS && a < best_set) {
            best = best.max(v);
            best_set = a;
        }
    }
    Ok((best_set, best))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    /// `g_tau(OPT(k, N, tau))`
    pub robust_opt: f64,
    /// `f(OPT(k - tau, N - X, 0))`
    pub restricted_opt: f64,
    /// `f(OPT(k - tau, N, 0))`
    pub plain_opt: f64,
    pub holds: bool,
}

/// Evaluates the chain
/// `g_tau(OPT(k, N, tau)) <= f(OPT(k - tau, N - X, 0)) <= f(OPT(k - tau, N, 0))`.
pub fn lemma2_check(inst: &Instance, x: &Subset, budget: &Budget) -> Result<Lemma2Report> {
    if x.len() > inst.tau {
        return Err(precondition(format!("|X| = {} exceeds tau = {}", x.len(), inst.tau)));
    }
    let ground = inst.oracle.ground();
    if !x.is_subset(&ground) {
        return Err(Error::OutOfDomain {
            element: x.span() - 1,
            n: inst.n(),
        });
    }
    let (_, robust_opt) = opt_robust(inst, budget)?;
    let reduced = inst.k - inst.tau;
    let (_, restricted_opt) = opt_robust_over(&inst.oracle, &ground.difference(x), reduced, 0, budget)?;
    let (_, plain_opt) = opt_robust_over(&inst.oracle, &ground, reduced, 0, budget)?;
    let holds = robust_opt <= restricted_opt + EPS && restricted_opt <= plain_opt + EPS;
    Ok(Lemma2Report {
        robust_opt,
        restricted_opt,
        plain_opt,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleCertificate {
    pub x: Subset,
    /// `f_i(X)` per function.
    pub values: Vec<f64>,
    /// The lower bound each value had to meet.
    pub required: Vec<f64>,
}

fn check_family(fs: &[Oracle]) -> Result<usize> {
    let n = fs.first().ok_or(Error::EmptyFamily)?.n();
    if let Some(bad) = fs.iter().find(|f| f.n() != n) {
        return Err(Error::GroundMismatch {
            expected: n,
            found: bad.n(),
        });
    }
    Ok(n)
}

/// First `X ⊆ S` with `|X| = m` and `f_i(X) >= (m - 1) / |S| * targets[i]`
/// for every `i`, or `None`. For two functions with `f_i(S) >= targets[i]`
/// such an `X` always exists.
pub fn pareto_subset(
    fs: &[Oracle],
    s: &Subset,
    m: usize,
    targets: &[f64],
    budget: &Budget,
) -> Result<Option<TupleCertificate>> {
    check_family(fs)?;
    if targets.len() != fs.len() {
        return Err(precondition("one target per function is required"));
    }
    let k = s.len();
    if m < 2 || m > k {
        return Err(precondition(format!("need 2 <= m <= |S| = {k}, got m = {m}")));
    }
    ensure_budget(binomial(k, m), budget.solver)?;
    let factor = (m as f64 - 1.0) / k as f64;
    let required: Vec<f64> = targets.iter().map(|v| factor * v).collect();
    first_meeting(fs, &s.to_vec(), m, &required)
}

/// First `m`-subset of `pool` (lexicographic) meeting every lower bound.
pub(crate) fn first_meeting(
    fs: &[Oracle],
    pool: &[Element],
    m: usize,
    required: &[f64],
) -> Result<Option<TupleCertificate>> {
    let mut err = None;
    let found = for_each_combination(pool, m, |x| {
        let mut values = Vec::with_capacity(fs.len());
        for (f, &need) in fs.iter().zip(required) {
            match f.eval(x) {
                Ok(v) if v >= need - EPS => values.push(v),
                Ok(_) => return ControlFlow::Continue(()),
                Err(e) => {
                    err = Some(e);
                    return ControlFlow::Break(None);
                }
            }
        }
        ControlFlow::Break(Some(TupleCertificate {
            x: x.clone(),
            values,
            required: required.to_vec(),
        }))
    });
    match err {
        Some(e) => Err(e),
        None => Ok(found.flatten()),
    }
}

/// `prod_{j < p} (k - j - 2l) / (k - j - l)`: the fraction of every value
/// that survives [`prune_set`].
pub fn prune_bound(k: usize, l: usize, p: usize) -> f64 {
    (0..p)
        .map(|j| (k as f64 - j as f64 - 2.0 * l as f64) / (k as f64 - j as f64 - l as f64))
        .product()
}

/// Removes `p` elements from `S` one at a time while keeping every
/// `f_i` within [`prune_bound`] of its value on `S`.
///
/// Each step orders the current set by ascending id, forms the modular
/// surrogates `h_i(s_j) = f_i(s_j | {s_1..s_{j-1}})`, and removes the
/// smallest-id element outside every function's top `ceil(k/l) - 1`
/// surrogate values. Those top sets cover fewer than `k` elements, so such
/// an element exists, and it carries at most `l/k` of each `h_i`.
pub fn prune_set(fs: &[Oracle], s: &Subset, p: usize) -> Result<Subset> {
    check_family(fs)?;
    let l = fs.len();
    let k = s.len();
    if k <= p + 2 * l {
        return Err(precondition(format!(
            "pruning needs k > p + 2l, got k = {k}, p = {p}, l = {l}"
        )));
    }
    let mut current = s.clone();
    for _ in 0..p {
        let elems = current.to_vec();
        let size = elems.len();
        let top = size.div_ceil(l) - 1;
        let mut excluded = Subset::empty();
        for f in fs {
            let mut prefix = Subset::empty();
            let mut prev = f.eval(&prefix)?;
            let mut surrogate = Vec::with_capacity(size);
            for &x in &elems {
                prefix.insert(x);
                let v = f.eval(&prefix)?;
                surrogate.push((v - prev, x));
                prev = v;
            }
            // ascending by value then id; the last `top` are this function's top set
            surrogate.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            excluded.extend(surrogate[size - top..].iter().map(|&(_, x)| x));
        }
        let victim = elems
            .iter()
            .copied()
            .find(|&x| !excluded.contains(x))
            .ok_or_else(|| Error::Internal("no element outside every top set".into()))?;
        current.remove(victim);
    }
    Ok(current)
}

/// Which random functions a scan draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Modular,
    Coverage,
}

/// Random family of `l` functions on `k` elements.
pub fn random_family(kind: FamilyKind, l: usize, k: usize, rng: &mut impl Rng) -> Result<Vec<Oracle>> {
    (0..l)
        .map(|_| {
            Ok(match kind {
                FamilyKind::Modular => Oracle::new(ModularFunction::new(
                    (0..k).map(|_| rng.gen_range(0..=10) as f64).collect(),
                )?),
                FamilyKind::Coverage => {
                    let universe = 2 * k;
                    let sets = (0..k)
                        .map(|_| (0..universe).filter(|_| rng.gen_bool(0.3)).collect())
                        .collect();
                    Oracle::new(CoverageFunction::new(sets, Some(vec![1.0; universe]))?)
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureRow {
    pub k: usize,
    pub m: usize,
    pub trials: usize,
    pub worst_c: f64,
    pub mean_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub l: usize,
    pub trials: usize,
    pub k_max: usize,
    pub seed: u64,
    /// Largest constant needed over every trial and every `m`.
    pub worst_c: f64,
    pub rows: Vec<ConjectureRow>,
}

/// For random families of `l` functions on a ground set `S` of size `k`,
/// records per `m` the smallest `c` such that some `|X| = m` has
/// `f_i(X) >= (m - c) / k * f_i(S)` for every `i`.
///
/// Purely empirical. `k` is drawn per trial from `max(l, 2)..=k_max` and the
/// family alternates between modular and coverage functions.
pub fn conjecture_scan(l: usize, trials: usize, k_max: usize, seed: u64) -> Result<ConjectureReport> {
    if l == 0 {
        return Err(precondition("l must be at least 1"));
    }
    if k_max > 12 || k_max < l.max(2) {
        return Err(precondition(format!(
            "k_max must lie in {}..=12, got {k_max}",
            l.max(2)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (k, m) -> (count, worst, sum)
    let mut acc = std::collections::BTreeMap::<(usize, usize), (usize, f64, f64)>::new();
    for t in 0..trials {
        let k = rng.gen_range(l.max(2)..=k_max);
        let kind = if t % 2 == 0 {
            FamilyKind::Modular
        } else {
            FamilyKind::Coverage
        };
        let fs = random_family(kind, l, k, &mut rng)?;
        let s = Subset::full(k);
        let totals: Vec<f64> = fs.iter().map(|f| f.eval(&s)).collect::<Result<_>>()?;
        let pool = s.to_vec();
        for m in l.max(1)..=k {
            let mut best_ratio = f64::NEG_INFINITY;
            for_each_combination::<()>(&pool, m, |x| {
                let ratio = fs
                    .iter()
                    .zip(&totals)
                    .filter(|(_, &v)| v > EPS)
                    .map(|(f, &v)| f.function().value(x) / v)
                    .fold(f64::INFINITY, f64::min);
                best_ratio = best_ratio.max(ratio.min(1.0));
                ControlFlow::Continue(())
            });
            let c = m as f64 - k as f64 * best_ratio;
            let entry = acc.entry((k, m)).or_insert((0, f64::NEG_INFINITY, 0.0));
            entry.0 += 1;
            entry.1 = entry.1.max(c);
            entry.2 += c;
        }
    }
    let rows: Vec<ConjectureRow> = acc
        .into_iter()
        .map(|((k, m), (count, worst, sum))| ConjectureRow {
            k,
            m,
            trials: count,
            worst_c: worst,
            mean_c: sum / count as f64,
        })
        .collect();
    let worst_c = rows.iter().map(|r| r.worst_c).fold(f64::NEG_INFINITY, f64::max);
    Ok(ConjectureReport {
        l,
        trials,
        k_max,
        seed,
        worst_c,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_greedy_failure;

    fn set(xs: &[usize]) -> Subset {
        xs.iter().copied().collect()
    }

    fn modular(w: &[f64]) -> Oracle {
        Oracle::new(ModularFunction::new(w.to_vec()).unwrap())
    }

    #[test]
    fn minimizer_examples() {
        let f = modular(&[3.0, 1.0, 2.0]);
        let b = Budget::default();
        let r0 = minimizer(&f, &set(&[0, 1, 2]), 0, &b).unwrap();
        assert_eq!((r0.z.clone(), r0.value), (Subset::empty(), 6.0));
        let r1 = minimizer(&f, &set(&[0, 1, 2]), 1, &b).unwrap();
        assert_eq!(r1.z, set(&[0]));
        assert_eq!(r1.value, 3.0);
        assert_eq!(r1.all_minimizers, vec![set(&[0])]);

        let inst = gen_greedy_failure(4).unwrap();
        let r = minimizer(&inst.oracle, &set(&[0, 1, 2, 3]), 1, &b).unwrap();
        assert_eq!(r.z, set(&[0]));
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn minimizer_small_sets_and_budget() {
        let f = modular(&[3.0, 1.0, 2.0]);
        let b = Budget::default();
        let r = minimizer(&f, &set(&[1]), 2, &b).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.z, set(&[1]));
        let tight = Budget::uniform(3);
        assert!(matches!(
            minimizer(&f, &set(&[0, 1, 2]), 1, &tight),
            Err(Error::BudgetExceeded { needed: 4, cap: 3 })
        ));
    }

    #[test]
    fn minimizer_ties_prefer_smallest() {
        // all removals cost nothing: Z = ∅ wins the tie
        let f = modular(&[0.0, 0.0, 5.0]);
        let r = minimizer(&f, &set(&[0, 1, 2]), 1, &Budget::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.z, set(&[2]));
        let g = modular(&[0.0, 0.0]);
        let r = minimizer(&g, &set(&[0, 1]), 1, &Budget::default()).unwrap();
        assert_eq!(r.z, Subset::empty());
        assert_eq!(r.all_minimizers, vec![set(&[0]), set(&[1])]);
    }

    #[test]
    fn opt_examples() {
        let b = Budget::default();
        let inst = Instance::new(modular(&[5.0, 4.0, 1.0, 1.0]), 2, 1, "m").unwrap();
        let (a, v) = opt_robust(&inst, &b).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(a, set(&[0, 1]));

        let full = Instance::new(modular(&[5.0, 4.0, 1.0, 1.0]), 4, 0, "m").unwrap();
        assert_eq!(opt_robust(&full, &b).unwrap().1, 11.0);

        let gf = gen_greedy_failure(4).unwrap();
        let (s, v) = opt_robust(&gf, &b).unwrap();
        assert!((v - 0.75).abs() <= EPS);
        assert_eq!(s, set(&[0, 4, 5, 6]));
        assert!(opt_robust(&gf, &Budget::uniform(10)).is_err());
    }

    #[test]
    fn lemma2_examples() {
        let b = Budget::default();
        let inst = Instance::new(modular(&[5.0, 4.0, 1.0, 1.0]), 3, 1, "m").unwrap();
        assert!(lemma2_check(&inst, &Subset::empty(), &b).unwrap().holds);
        let gf = gen_greedy_failure(4).unwrap();
        let r = lemma2_check(&gf, &set(&[0]), &b).unwrap();
        assert!(r.holds);
        assert!((r.robust_opt - 0.75).abs() <= EPS);
        assert!((r.restricted_opt - 0.75).abs() <= EPS);
        assert_eq!(r.plain_opt, 1.0);
        assert!(lemma2_check(&gf, &set(&[0, 1]), &b).is_err());
    }

    #[test]
    fn pareto_examples() {
        let b = Budget::default();
        let h1 = modular(&[1.0, 0.0, 0.0, 0.0]);
        let h2 = modular(&[0.0, 1.0, 0.0, 0.0]);
        let cert = pareto_subset(&[h1.clone(), h2], &Subset::full(4), 2, &[1.0, 1.0], &b)
            .unwrap()
            .unwrap();
        assert_eq!(cert.x, set(&[0, 1]));
        assert_eq!(cert.values, vec![1.0, 1.0]);
        // one function: the two best elements clear 1/k
        let single = pareto_subset(std::slice::from_ref(&h1), &Subset::full(4), 2, &[1.0], &b).unwrap();
        assert!(single.is_some());
        assert!(pareto_subset(std::slice::from_ref(&h1), &Subset::full(4), 1, &[1.0], &b).is_err());
        assert!(pareto_subset(&[h1], &Subset::full(4), 5, &[1.0], &b).is_err());
    }

    #[test]
    fn prune_examples() {
        let f = modular(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        let out = prune_set(std::slice::from_ref(&f), &Subset::full(5), 1).unwrap();
        assert_eq!(out, set(&[0, 2, 3, 4]));
        assert_eq!(
            prune_set(std::slice::from_ref(&f), &Subset::full(5), 0).unwrap(),
            Subset::full(5)
        );
        assert!(prune_set(&[f.clone(), f], &Subset::full(5), 1).is_err());
        assert_eq!(prune_bound(8, 2, 0), 1.0);
        assert!((prune_bound(8, 2, 1) - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn prune_pair_meets_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let fs = random_family(FamilyKind::Modular, 2, 8, &mut rng).unwrap();
            let s = Subset::full(8);
            let out = prune_set(&fs, &s, 1).unwrap();
            assert_eq!(out.len(), 7);
            for f in &fs {
                let bound = prune_bound(8, 2, 1) * f.eval(&s).unwrap();
                assert!(f.eval(&out).unwrap() >= bound - EPS);
            }
        }
    }

    #[test]
    fn conjecture_scan_small() {
        let one = conjecture_scan(1, 20, 6, 1).unwrap();
        assert!(one.worst_c <= 1.0 + EPS);
        let two = conjecture_scan(2, 20, 6, 1).unwrap();
        assert!(two.worst_c <= 1.0 + EPS);
        assert!(conjecture_scan(3, 1, 13, 1).is_err());
        assert!(conjecture_scan(0, 1, 5, 1).is_err());
    }
}
