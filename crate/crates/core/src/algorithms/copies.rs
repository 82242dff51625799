//! Algorithms that assume every element has interchangeable copies.
//!
//! Each of them first indexes the originals `a_1, a_2, ..` in greedy order
//! and then adds copies of a prefix of that order.

use super::{finalize, greedy_until, Chooser, RobustResult, TraceStep};
use crate::error::{precondition, Error, Result};
use crate::instances::{CopyMap, Instance};
use crate::subset::{Element, Subset};

fn copy_map(inst: &Instance, needed: usize) -> Result<&CopyMap> {
    let map = inst.copies.as_ref().ok_or(Error::MissingCopies { needed })?;
    if map.copies_per_element() < needed {
        return Err(Error::MissingCopies { needed });
    }
    Ok(map)
}

/// Greedy over the originals; returns the order of selection.
fn greedy_originals(
    chooser: &mut Chooser<'_>,
    map: &CopyMap,
    count: usize,
    trace: &mut Vec<TraceStep>,
) -> Result<Vec<Element>> {
    if count > map.originals {
        return Err(precondition(format!(
            "{count} greedy originals requested but only {} exist",
            map.originals
        )));
    }
    let mut a = Subset::empty();
    let start = trace.len();
    greedy_until(
        chooser,
        &mut a,
        &map.originals_set(),
        count,
        Subset::clone,
        "greedy",
        trace,
    )?;
    Ok(trace[start..].iter().map(|s| s.added[0]).collect())
}

fn add_copies(a: &mut Subset, map: &CopyMap, of: &[Element], per_element: usize, trace: &mut Vec<TraceStep>) {
    for &x in of {
        let copies = &map.copies_of(x)[..per_element];
        a.extend(copies.iter().copied());
        trace.push(TraceStep {
            iteration: trace.len(),
            added: copies.to_vec(),
            rule: "copy".into(),
        });
    }
}

/// `{a_1, a'_1, a_2, a'_2, a_3, .., a_{k-2}}` for `tau = 1`.
pub fn two_copy(inst: &Instance) -> Result<RobustResult> {
    if inst.tau != 1 {
        return Err(precondition("two-copy is defined for tau = 1"));
    }
    if inst.k < 4 {
        return Err(Error::KTooSmall { k: inst.k, required: 4 });
    }
    let map = copy_map(inst, 1)?;
    let f = &inst.oracle;
    let before = f.query_count();
    let mut chooser = Chooser::new(f);
    let mut trace = Vec::new();
    let order = greedy_originals(&mut chooser, map, inst.k - 2, &mut trace)?;
    let mut a: Subset = order.iter().copied().collect();
    add_copies(&mut a, map, &order[..2], 1, &mut trace);
    finalize(f, a, 1, f.query_count() - before, trace)
}

/// Greedy originals `a_1 .. a_{k - 2 tau^2}` plus `tau` copies of each of
/// `a_1 .. a_{2 tau}`.
pub fn copies_block(inst: &Instance) -> Result<RobustResult> {
    let (k, tau) = (inst.k, inst.tau);
    if tau == 0 {
        return Err(precondition("copies-block needs tau >= 1"));
    }
    let required = 2 * tau * tau + 2 * tau + 1;
    if k < required {
        return Err(Error::KTooSmall { k, required });
    }
    let map = copy_map(inst, tau)?;
    let f = &inst.oracle;
    let before = f.query_count();
    let mut chooser = Chooser::new(f);
    let mut trace = Vec::new();
    let order = greedy_originals(&mut chooser, map, k - 2 * tau * tau, &mut trace)?;
    let mut a: Subset = order.iter().copied().collect();
    add_copies(&mut a, map, &order[..2 * tau], tau, &mut trace);
    finalize(f, a, tau, f.query_count() - before, trace)
}

/// Block structure of [`copies_geometric`] for a given `tau`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometricLayout {
    /// `(first index, last index, copies per element)` per block, with
    /// 1-based greedy indices: block `i` is `a_{2^i - 1} .. a_{2^{i+1} - 2}`
    /// and receives `ceil(tau / 2^{i-1})` copies of each element.
    pub blocks: Vec<(usize, usize, usize)>,
    /// Number of greedy originals that must precede the copies.
    pub prefix: usize,
    /// Prefix plus all copies: the smallest feasible `k`.
    pub size: usize,
}

pub fn geometric_layout(tau: usize) -> GeometricLayout {
    let levels = (2.0 * tau as f64).log2().ceil() as u32;
    let blocks: Vec<(usize, usize, usize)> = (1..=levels.max(1))
        .map(|i| {
            let first = (1usize << i) - 1;
            let last = (1usize << (i + 1)) - 2;
            (first, last, tau.div_ceil(1 << (i - 1)))
        })
        .collect();
    let prefix = blocks.last().map_or(0, |b| b.1).max(2 * tau);
    let size = prefix + blocks.iter().map(|&(a, b, c)| (b - a + 1) * c).sum::<usize>();
    GeometricLayout { blocks, prefix, size }
}

/// Greedy originals, geometrically decaying copy counts on the leading
/// blocks, then greedy fill over everything not yet chosen.
pub fn copies_geometric(inst: &Instance) -> Result<RobustResult> {
    let (k, tau) = (inst.k, inst.tau);
    if tau == 0 {
        return Err(precondition("copies-geometric needs tau >= 1"));
    }
    let layout = geometric_layout(tau);
    let levels = layout.blocks.len();
    let required = layout.size.max(2 * tau * (levels + 1) + 1);
    if k < required {
        return Err(Error::KTooSmall { k, required });
    }
    let map = copy_map(inst, tau)?;
    let f = &inst.oracle;
    let before = f.query_count();
    let mut chooser = Chooser::new(f);
    let mut trace = Vec::new();
    let order = greedy_originals(&mut chooser, map, layout.prefix, &mut trace)?;
    let mut a: Subset = order.iter().copied().collect();
    for &(first, last, c) in &layout.blocks {
        add_copies(&mut a, map, &order[first - 1..last], c, &mut trace);
    }
    greedy_until(&mut chooser, &mut a, &f.ground(), k, Subset::clone, "fill", &mut trace)?;
    finalize(f, a, tau, f.query_count() - before, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{augment_with_copies, gen_random_coverage};

    fn copies_instance(k: usize, tau: usize, c: usize, seed: u64) -> Instance {
        let base = gen_random_coverage(8, 12, 0.3, seed, 4, 0).unwrap();
        let (aug, _) = augment_with_copies(&base, c).unwrap();
        aug.with_k(k).unwrap().with_tau(tau).unwrap()
    }

    #[test]
    fn two_copy_shape() {
        let inst = copies_instance(6, 1, 1, 3);
        let r = two_copy(&inst).unwrap();
        assert_eq!(r.set.len(), 6);
        let originals: Vec<_> = r.steps_with_rule("greedy").map(|s| s.added[0]).collect();
        let a: Subset = originals.iter().copied().collect();
        let f = inst.oracle.with_fresh_counter();
        assert!((f.eval(&a).unwrap() - r.f_value).abs() < 1e-12);
        let copies = inst.copies.as_ref().unwrap();
        for &x in &originals[..2] {
            assert!(r.set.contains(copies.copies_of(x)[0]));
        }
    }

    #[test]
    fn block_equals_two_copy_for_tau_one() {
        for seed in 0..5 {
            let inst = copies_instance(6, 1, 1, seed);
            assert_eq!(copies_block(&inst).unwrap().set, two_copy(&inst).unwrap().set);
            assert_eq!(copies_geometric(&inst).unwrap().set, two_copy(&inst).unwrap().set);
        }
    }

    #[test]
    fn geometric_layout_counts() {
        let one = geometric_layout(1);
        assert_eq!(one.blocks, vec![(1, 2, 1)]);
        assert_eq!((one.prefix, one.size), (2, 4));
        let two = geometric_layout(2);
        assert_eq!(two.blocks, vec![(1, 2, 2), (3, 6, 1)]);
        assert_eq!((two.prefix, two.size), (6, 14));
    }

    #[test]
    fn geometric_tau_two() {
        let base = gen_random_coverage(10, 20, 0.25, 5, 4, 0).unwrap();
        let (aug, map) = augment_with_copies(&base, 2).unwrap();
        let inst = aug.with_k(20).unwrap().with_tau(2).unwrap();
        let r = copies_geometric(&inst).unwrap();
        assert_eq!(r.set.len(), 20);
        let order: Vec<_> = r.steps_with_rule("greedy").map(|s| s.added[0]).collect();
        let copy_steps: Vec<_> = r.steps_with_rule("copy").collect();
        assert_eq!(copy_steps.len(), 6);
        for (i, s) in copy_steps.iter().enumerate() {
            let want = if i < 2 { 2 } else { 1 };
            assert_eq!(s.added, map.copies_of(order[i])[..want].to_vec());
        }
        let small = inst.with_k(13).unwrap();
        assert!(matches!(
            copies_geometric(&small),
            Err(Error::KTooSmall { required: 14, .. })
        ));
    }

    #[test]
    fn missing_copies() {
        let base = gen_random_coverage(8, 12, 0.3, 1, 6, 1).unwrap();
        assert!(matches!(two_copy(&base), Err(Error::MissingCopies { .. })));
        let inst = copies_instance(13, 2, 1, 1);
        assert!(matches!(copies_block(&inst), Err(Error::MissingCopies { needed: 2 })));
    }
}
