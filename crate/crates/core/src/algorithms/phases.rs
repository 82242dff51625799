//! Single-removal algorithms built around the two leading greedy elements.

use std::ops::ControlFlow;

use super::{check_k, finalize, greedy_until, Chooser, RobustResult, TraceStep};
use crate::bruteforce::{minimizer, Budget};
use crate::error::{precondition, Error, Result};
use crate::oracle::{Oracle, EPS};
use crate::subset::{for_each_combination, Element, Subset};

/// Picks the best singleton `a_1`, then adds `argmax f(x | A - a_1)`.
pub fn ignore_first(f: &Oracle, ground: &Subset, k: usize) -> Result<RobustResult> {
    check_k(k, ground)?;
    if k < 2 {
        return Err(Error::KTooSmall { k, required: 2 });
    }
    let before = f.query_count();
    let mut chooser = Chooser::new(f);
    let mut trace = Vec::new();
    let mut a = Subset::empty();
    greedy_until(&mut chooser, &mut a, ground, 1, Subset::clone, "seed", &mut trace)?;
    let a1 = trace[0].added[0];
    greedy_until(
        &mut chooser,
        &mut a,
        ground,
        k,
        |s| s.without(a1),
        "ignore a1",
        &mut trace,
    )?;
    finalize(f, a, 1, f.query_count() - before, trace)
}

/// `f(x | A - x) > f(A) / 3`.
fn still_heavy(f: &Oracle, a: &Subset, x: Element) -> Result<bool> {
    let whole = f.eval(a)?;
    let rest = f.eval(&a.without(x))?;
    Ok(whole - rest > whole / 3.0 + EPS)
}

/// Seeds `{a_1, a_2}` greedily, then ignores `a_1` while its marginal
/// exceeds a third of the set's value (phase 1), does the same for `a_2`
/// (phase 2), and finishes with plain greedy (phase 3).
///
/// Requires `k >= 8`; callers wanting smaller `k` should use
/// [`ignore_first`].
pub fn three_phase(f: &Oracle, ground: &Subset, k: usize) -> Result<RobustResult> {
    check_k(k, ground)?;
    if k < 8 {
        return Err(Error::KTooSmall { k, required: 8 });
    }
    let before = f.query_count();
    let mut chooser = Chooser::new(f);
    let mut trace = Vec::new();
    let mut a = Subset::empty();
    greedy_until(&mut chooser, &mut a, ground, 2, Subset::clone, "seed", &mut trace)?;
    let (a1, a2) = (trace[0].added[0], trace[1].added[0]);
    for (phase, ignored) in [("phase 1", a1), ("phase 2", a2)] {
        while a.len() < k && still_heavy(f, &a, ignored)? {
            let len = a.len();
            greedy_until(
                &mut chooser,
                &mut a,
                ground,
                len + 1,
                |s| s.without(ignored),
                phase,
                &mut trace,
            )?;
            if a.len() == len {
                break;
            }
        }
    }
    greedy_until(&mut chooser, &mut a, ground, k, Subset::clone, "phase 3", &mut trace)?;
    finalize(f, a, 1, f.query_count() - before, trace)
}

/// Whether `(k, m)` lies in the range where the tuple algorithm's
/// guarantee applies: `m >= 2` and `k >= 2m + 3`.
pub fn biobjective_regime(k: usize, m: usize) -> bool {
    m >= 2 && k >= 2 * m + 3
}

/// Seeds `{a_1, a_2}` greedily. While every single-element minimizer of `A`
/// lies in `{a_1, a_2}`, adds the `min(m, k - |A|)`-tuple `S` maximizing
/// `min { f(S + A - a_1), f(S + A - a_2) }`; afterwards plain greedy.
///
/// Any `m >= 1` and `3 <= k` run; the approximation guarantee needs
/// [`biobjective_regime`].
pub fn biobjective_robust(f: &Oracle, ground: &Subset, k: usize, m: usize) -> Result<RobustResult> {
    check_k(k, ground)?;
    if k < 3 {
        return Err(Error::KTooSmall { k, required: 3 });
    }
    if m == 0 {
        return Err(precondition("tuple size m must be at least 1"));
    }
    let before = f.query_count();
    let mut chooser = Chooser::new(f);
    let mut trace = Vec::new();
    let mut a = Subset::empty();
    greedy_until(&mut chooser, &mut a, ground, 2, Subset::clone, "seed", &mut trace)?;
    let (a1, a2) = (trace[0].added[0], trace[1].added[0]);
    let seeds: Subset = [a1, a2].into_iter().collect();
    let budget = Budget::from_env()?;

    while a.len() < k {
        let z = minimizer(f, &a, 1, &budget)?;
        if !z.all_minimizers.iter().all(|s| s.is_subset(&seeds)) {
            break;
        }
        let l = m.min(k - a.len());
        let pool = ground.difference(&a).to_vec();
        let (without1, without2) = (a.without(a1), a.without(a2));
        let mut best: Option<(Subset, f64)> = None;
        let mut err = None;
        for_each_combination::<()>(&pool, l, |s| {
            let score = f
                .eval(&without1.union(s))
                .and_then(|v1| f.eval(&without2.union(s)).map(|v2| v1.min(v2)));
            match score {
                Ok(v) => {
                    if best.as_ref().is_none_or(|(_, b)| v > b + EPS) {
                        best = Some((s.clone(), v));
                    }
                    ControlFlow::Continue(())
                }
                Err(e) => {
                    err = Some(e);
                    ControlFlow::Break(())
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let Some((s, _)) = best else { break };
        a = a.union(&s);
        trace.push(TraceStep {
            iteration: trace.len(),
            added: s.to_vec(),
            rule: "tuple".into(),
        });
    }
    greedy_until(&mut chooser, &mut a, ground, k, Subset::clone, "greedy", &mut trace)?;
    finalize(f, a, 1, f.query_count() - before, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::greedy;
    use crate::instances::{gen_greedy_failure, gen_partial_copies, PartialCopiesLayout};
    use crate::oracle::ModularFunction;

    fn modular(w: &[f64]) -> Oracle {
        Oracle::new(ModularFunction::new(w.to_vec()).unwrap())
    }

    #[test]
    fn ignore_first_examples() {
        let f = modular(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        let r = ignore_first(&f, &f.ground(), 3).unwrap();
        let g = greedy(&f, &f.ground(), 3, &Subset::empty(), 1).unwrap();
        assert_eq!(r.set, g.set);

        let inst = gen_greedy_failure(4).unwrap();
        let r = ignore_first(&inst.oracle, &inst.oracle.ground(), 4).unwrap();
        assert_eq!(r.order(), vec![0, 4, 5, 6]);
        assert!((r.g_value.unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn three_phase_examples() {
        let f = modular(&[1.0; 10]);
        let r = three_phase(&f, &f.ground(), 8).unwrap();
        let p1: Vec<_> = r.steps_with_rule("phase 1").collect();
        assert_eq!(p1.len(), 1);
        assert_eq!(r.steps_with_rule("phase 2").count(), 0);

        let inst = gen_greedy_failure(8).unwrap();
        let r = three_phase(&inst.oracle, &inst.oracle.ground(), 8).unwrap();
        assert_eq!(r.order(), vec![0, 1, 8, 9, 10, 11, 12, 13]);
        assert!((r.g_value.unwrap() - 0.75).abs() < 1e-12);
        assert!(matches!(
            three_phase(&f, &f.ground(), 7),
            Err(Error::KTooSmall { required: 8, .. })
        ));
    }

    #[test]
    fn biobjective_partial_copies() {
        for k in [6, 8] {
            let inst = gen_partial_copies(k).unwrap();
            let layout = PartialCopiesLayout { k };
            let f = &inst.oracle;
            let one = biobjective_robust(f, &f.ground(), k, 1).unwrap();
            let mut want = layout.garbage();
            want.insert(0);
            want.insert(1);
            assert_eq!(one.set, want);

            let two = biobjective_robust(f, &f.ground(), k, 2).unwrap();
            for (j, step) in two.steps_with_rule("tuple").enumerate() {
                assert_eq!(step.added, vec![layout.partial(1, j + 1), layout.partial(2, j + 1)]);
            }

            let three = biobjective_robust(f, &f.ground(), k, 3).unwrap();
            let mut added: Vec<_> = three.order()[2..].to_vec();
            added.sort();
            let mut expected: Vec<_> = (1..=k - 3).map(|j| layout.partial(2, j)).collect();
            expected.push(layout.a1_copy());
            assert_eq!(added, expected);
        }
    }

    #[test]
    fn regime() {
        assert!(biobjective_regime(7, 2));
        assert!(!biobjective_regime(6, 2));
        assert!(!biobjective_regime(20, 1));
    }
}
