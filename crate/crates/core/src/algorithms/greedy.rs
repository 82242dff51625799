use super::{check_k, finalize, greedy_until, Chooser, RobustResult, TraceStep};
use crate::error::{precondition, Result};
use crate::oracle::{Oracle, EPS};
use crate::subset::Subset;

/// Standard greedy from `start` until the set has `k` elements.
///
/// Makes at most `|ground| * k` queries, plus one for `f(start)` when
/// `start` is non-empty.
pub fn greedy(f: &Oracle, ground: &Subset, k: usize, start: &Subset, tau: usize) -> Result<RobustResult> {
    check_k(k, ground)?;
    if start.len() > k {
        return Err(precondition("start set is larger than k"));
    }
    let before = f.query_count();
    let mut chooser = Chooser::new(f);
    let mut a = start.clone();
    let mut trace = Vec::new();
    greedy_until(&mut chooser, &mut a, ground, k, Subset::clone, "greedy", &mut trace)?;
    finalize(f, a, tau, f.query_count() - before, trace)
}

/// Descending-threshold greedy: the threshold starts at the best singleton
/// value and shrinks by `1 - eps` per pass; any element whose marginal
/// meets it is added. Stops at `k` elements or once the threshold falls
/// below `eps / n` of its start.
pub fn greedy_threshold(f: &Oracle, ground: &Subset, k: usize, eps: f64, tau: usize) -> Result<RobustResult> {
    check_k(k, ground)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(precondition(format!("eps must lie in (0, 1), got {eps}")));
    }
    let before = f.query_count();
    let mut trace = Vec::new();
    let mut a = Subset::empty();
    let mut top = 0.0f64;
    for x in ground.iter() {
        top = top.max(f.eval(&Subset::singleton(x))?);
    }
    let floor = eps / ground.len().max(1) as f64 * top;
    let mut w = top;
    let mut current = 0.0;
    while a.len() < k && w >= floor && w > 0.0 {
        for x in ground.difference(&a).iter() {
            if a.len() == k {
                break;
            }
            let v = f.eval(&a.with(x))?;
            if v - current >= w - EPS {
                a.insert(x);
                current = v;
                trace.push(TraceStep {
                    iteration: trace.len(),
                    added: vec![x],
                    rule: format!("threshold {w:.6}"),
                });
            }
        }
        w *= 1.0 - eps;
    }
    finalize(f, a, tau, f.query_count() - before, trace)
}

/// The `k` elements with the largest singleton values.
pub fn naive_topk(f: &Oracle, ground: &Subset, k: usize, tau: usize) -> Result<RobustResult> {
    check_k(k, ground)?;
    let before = f.query_count();
    let mut scored = Vec::with_capacity(ground.len());
    for x in ground.iter() {
        scored.push((f.eval(&Subset::singleton(x))?, x));
    }
    // stable sort keeps ascending ids among equal values
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let trace: Vec<TraceStep> = scored
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &(_, x))| TraceStep {
            iteration: i,
            added: vec![x],
            rule: "top-singleton".into(),
        })
        .collect();
    let set = scored.iter().take(k).map(|&(_, x)| x).collect();
    finalize(f, set, tau, f.query_count() - before, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_greedy_failure;
    use crate::oracle::ModularFunction;

    fn modular(w: &[f64]) -> Oracle {
        Oracle::new(ModularFunction::new(w.to_vec()).unwrap())
    }

    fn set(xs: &[usize]) -> Subset {
        xs.iter().copied().collect()
    }

    #[test]
    fn greedy_modular() {
        let f = modular(&[3.0, 1.0, 2.0]);
        let r = greedy(&f, &f.ground(), 2, &Subset::empty(), 0).unwrap();
        assert_eq!(r.set, set(&[0, 2]));
        assert_eq!(r.f_value, 5.0);
        assert_eq!(r.order(), vec![0, 2]);
        assert!(r.queries <= 6);
        assert!(greedy(&f, &f.ground(), 4, &Subset::empty(), 0).is_err());
    }

    #[test]
    fn greedy_fails_robustly() {
        let inst = gen_greedy_failure(4).unwrap();
        let r = greedy(&inst.oracle, &inst.oracle.ground(), 4, &Subset::empty(), 1).unwrap();
        assert_eq!(r.set, set(&[0, 1, 2, 3]));
        assert_eq!(r.g_value, Some(0.0));
        assert_eq!(r.minimizer, Some(set(&[0])));
    }

    #[test]
    fn greedy_from_start() {
        let f = modular(&[3.0, 1.0, 2.0, 5.0]);
        let r = greedy(&f, &f.ground(), 3, &set(&[1]), 0).unwrap();
        assert_eq!(r.set, set(&[1, 3, 0]));
        assert_eq!(r.order(), vec![3, 0]);
    }

    #[test]
    fn greedy_ties_go_to_smallest_id() {
        let f = modular(&[1.0, 2.0, 2.0, 2.0]);
        let r = greedy(&f, &f.ground(), 2, &Subset::empty(), 0).unwrap();
        assert_eq!(r.order(), vec![1, 2]);
    }

    #[test]
    fn threshold_matches_greedy_on_modular() {
        let f = modular(&[5.0, 1.0, 3.0, 8.0, 2.0]);
        let t = greedy_threshold(&f, &f.ground(), 3, 0.01, 0).unwrap();
        let g = greedy(&f, &f.ground(), 3, &Subset::empty(), 0).unwrap();
        assert_eq!(t.set, g.set);
        let one = greedy_threshold(&f, &f.ground(), 1, 0.2, 0).unwrap();
        assert_eq!(one.set, set(&[3]));
        assert!(greedy_threshold(&f, &f.ground(), 1, 1.0, 0).is_err());
    }

    #[test]
    fn topk() {
        let f = modular(&[3.0, 1.0, 2.0, 3.0]);
        let r = naive_topk(&f, &f.ground(), 2, 1).unwrap();
        assert_eq!(r.set, set(&[0, 3]));
        assert_eq!(r.g_value, Some(3.0));
        let inst = gen_greedy_failure(4).unwrap();
        let r = naive_topk(&inst.oracle, &inst.oracle.ground(), 4, 1).unwrap();
        assert!(r.set.contains(0));
        assert!((r.g_value.unwrap() - 0.75).abs() < 1e-12);
    }
}
