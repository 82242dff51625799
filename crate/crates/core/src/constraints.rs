//! Independence systems given as membership oracles.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::subset::Subset;

pub trait IndependenceSystem: Send + Sync + fmt::Debug {
    fn ground_size(&self) -> usize;
    fn is_independent(&self, a: &Subset) -> bool;
    fn descriptor(&self) -> String;
}

#[derive(Debug, Clone)]
pub struct Cardinality {
    n: usize,
    k: usize,
}

pub fn cardinality_system(n: usize, k: usize) -> Result<Cardinality> {
    if k > n {
        return Err(precondition(format!("cardinality bound {k} exceeds n = {n}")));
    }
    Ok(Cardinality { n, k })
}

impl IndependenceSystem for Cardinality {
    fn ground_size(&self) -> usize {
        self.n
    }
    fn is_independent(&self, a: &Subset) -> bool {
        a.len() <= self.k
    }
    fn descriptor(&self) -> String {
        format!("cardinality(k={})", self.k)
    }
}

#[derive(Debug, Clone)]
pub struct PartitionMatroid {
    n: usize,
    parts: Vec<Subset>,
    caps: Vec<usize>,
}

/// `A` is independent iff `|A ∩ parts[i]| <= caps[i]` for every part.
/// The parts must partition `0..n` where `n` is the number of elements
/// they cover.
pub fn partition_matroid(parts: &[Vec<usize>], caps: &[usize]) -> Result<PartitionMatroid> {
    if parts.len() != caps.len() {
        return Err(precondition("one cap per part is required"));
    }
    let n = parts.iter().map(Vec::len).sum();
    let mut seen = Subset::empty();
    let mut subsets = Vec::with_capacity(parts.len());
    for part in parts {
        let s: Subset = part.iter().copied().collect();
        if s.len() != part.len() || !s.is_disjoint(&seen) {
            return Err(precondition("parts must be disjoint"));
        }
        seen = seen.union(&s);
        subsets.push(s);
    }
    if seen != Subset::full(n) {
        return Err(precondition("parts must cover 0..n exactly"));
    }
    Ok(PartitionMatroid {
        n,
        parts: subsets,
        caps: caps.to_vec(),
    })
}

impl IndependenceSystem for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.n
    }
    fn is_independent(&self, a: &Subset) -> bool {
        a.span() <= self.n
            && self
                .parts
                .iter()
                .zip(&self.caps)
                .all(|(p, &cap)| a.intersection(p).len() <= cap)
    }
    fn descriptor(&self) -> String {
        format!("partition(parts={}, caps={:?})", self.parts.len(), self.caps)
    }
}

#[derive(Debug, Clone)]
pub struct Knapsack {
    costs: Vec<f64>,
    budget: f64,
}

pub fn knapsack_system(costs: &[f64], budget: f64) -> Result<Knapsack> {
    if budget.is_nan() || budget < 0.0 {
        return Err(precondition("knapsack budget must be non-negative"));
    }
    if costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(precondition("knapsack costs must be finite and non-negative"));
    }
    Ok(Knapsack {
        costs: costs.to_vec(),
        budget,
    })
}

impl IndependenceSystem for Knapsack {
    fn ground_size(&self) -> usize {
        self.costs.len()
    }
    fn is_independent(&self, a: &Subset) -> bool {
        a.span() <= self.costs.len() && a.iter().map(|x| self.costs[x]).sum::<f64>() <= self.budget
    }
    fn descriptor(&self) -> String {
        format!("knapsack(budget={})", self.budget)
    }
}

/// The sets of a base system that contain a pinned set `Z`.
#[derive(Debug, Clone)]
pub struct RestrictedSystem {
    base: Arc<dyn IndependenceSystem>,
    pinned: Subset,
}

pub fn restrict_system(sys: Arc<dyn IndependenceSystem>, z: &Subset) -> Result<RestrictedSystem> {
    if !sys.is_independent(z) {
        return Err(precondition(format!("pinned set {z} is not independent")));
    }
    Ok(RestrictedSystem {
        base: sys,
        pinned: z.clone(),
    })
}

impl RestrictedSystem {
    pub fn pinned(&self) -> &Subset {
        &self.pinned
    }

    pub fn base(&self) -> &Arc<dyn IndependenceSystem> {
        &self.base
    }

    /// Whether `S ∪ Z` is independent in the base system, i.e. whether `S`
    /// can be completed to a member of the restriction.
    pub fn admits(&self, s: &Subset) -> bool {
        self.base.is_independent(&s.union(&self.pinned))
    }

    /// Pins additional elements.
    pub fn pin(&self, extra: &Subset) -> Result<RestrictedSystem> {
        restrict_system(Arc::clone(&self.base), &self.pinned.union(extra))
    }
}

impl IndependenceSystem for RestrictedSystem {
    fn ground_size(&self) -> usize {
        self.base.ground_size()
    }
    fn is_independent(&self, a: &Subset) -> bool {
        self.pinned.is_subset(a) && self.base.is_independent(a)
    }
    fn descriptor(&self) -> String {
        format!("{} pinned {}", self.base.descriptor(), self.pinned)
    }
}

/// Serializable description used under an instance's `constraint` key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConstraintSpec {
    Cardinality { k: usize },
    Partition { parts: Vec<Vec<usize>>, caps: Vec<usize> },
    Knapsack { costs: Vec<f64>, budget: f64 },
}

impl ConstraintSpec {
    pub fn build(&self, n: usize) -> Result<Arc<dyn IndependenceSystem>> {
        let sys: Arc<dyn IndependenceSystem> = match self {
            ConstraintSpec::Cardinality { k } => Arc::new(cardinality_system(n, *k)?),
            ConstraintSpec::Partition { parts, caps } => Arc::new(partition_matroid(parts, caps)?),
            ConstraintSpec::Knapsack { costs, budget } => Arc::new(knapsack_system(costs, *budget)?),
        };
        if sys.ground_size() != n {
            return Err(Error::GroundMismatch {
                expected: n,
                found: sys.ground_size(),
            });
        }
        Ok(sys)
    }
}

/// Exhaustive downward-closure check for small ground sets: every
/// independent set minus any one element is independent, and `∅` is.
pub fn is_downward_closed(sys: &dyn IndependenceSystem) -> bool {
    let n = sys.ground_size();
    assert!(n <= 20, "exhaustive closure check limited to n <= 20");
    if !sys.is_independent(&Subset::empty()) {
        return false;
    }
    (0..1u64 << n).all(|mask| {
        let a = Subset::from_mask(mask);
        !sys.is_independent(&a) || a.iter().all(|x| sys.is_independent(&a.without(x)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> Subset {
        xs.iter().copied().collect()
    }

    #[test]
    fn cardinality_examples() {
        let none = cardinality_system(4, 0).unwrap();
        assert!(none.is_independent(&Subset::empty()));
        assert!(!none.is_independent(&set(&[0])));
        let all = cardinality_system(4, 4).unwrap();
        assert!(all.is_independent(&Subset::full(4)));
        let two = cardinality_system(4, 2).unwrap();
        assert!(!two.is_independent(&set(&[0, 1, 2])));
        assert!(cardinality_system(2, 3).is_err());
    }

    #[test]
    fn partition_examples() {
        let single = partition_matroid(&[vec![0, 1, 2, 3]], &[2]).unwrap();
        let card = cardinality_system(4, 2).unwrap();
        for mask in 0..16u64 {
            let a = Subset::from_mask(mask);
            assert_eq!(single.is_independent(&a), card.is_independent(&a));
        }
        let two = partition_matroid(&[vec![0, 1], vec![2, 3]], &[1, 1]).unwrap();
        assert!(two.is_independent(&set(&[0, 3])));
        assert!(!two.is_independent(&set(&[0, 1])));
        assert!(partition_matroid(&[vec![0, 1], vec![1, 2]], &[1, 1]).is_err());
        assert!(partition_matroid(&[vec![0, 2]], &[1]).is_err());
        assert!(partition_matroid(&[vec![0, 1]], &[1, 1]).is_err());
    }

    #[test]
    fn knapsack_examples() {
        let unit = knapsack_system(&[1.0; 5], 2.0).unwrap();
        let card = cardinality_system(5, 2).unwrap();
        for mask in 0..32u64 {
            let a = Subset::from_mask(mask);
            assert_eq!(unit.is_independent(&a), card.is_independent(&a));
        }
        let zero = knapsack_system(&[1.0, 2.0], 0.0).unwrap();
        assert!(zero.is_independent(&Subset::empty()));
        assert!(!zero.is_independent(&set(&[0])));
        let ks = knapsack_system(&[2.0, 3.0], 4.0).unwrap();
        assert!(!ks.is_independent(&set(&[0, 1])));
        assert!(knapsack_system(&[1.0], -1.0).is_err());
    }

    #[test]
    fn restriction_examples() {
        let base: Arc<dyn IndependenceSystem> = Arc::new(cardinality_system(4, 2).unwrap());
        let same = restrict_system(Arc::clone(&base), &Subset::empty()).unwrap();
        for mask in 0..16u64 {
            let a = Subset::from_mask(mask);
            assert_eq!(same.is_independent(&a), base.is_independent(&a));
        }
        let r = restrict_system(Arc::clone(&base), &set(&[0])).unwrap();
        assert!(r.is_independent(&set(&[0, 1])));
        assert!(!r.is_independent(&set(&[1, 2])));
        assert!(r.admits(&set(&[3])));
        assert!(!r.admits(&set(&[2, 3])));
        assert!(restrict_system(base, &set(&[0, 1, 2])).is_err());
    }

    #[test]
    fn shipped_systems_are_downward_closed() {
        let systems: Vec<Box<dyn IndependenceSystem>> = vec![
            Box::new(cardinality_system(12, 5).unwrap()),
            Box::new(partition_matroid(&[vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![8, 9, 10, 11]], &[2, 1, 3]).unwrap()),
            Box::new(knapsack_system(&[1.0, 2.5, 0.5, 3.0, 1.5, 2.0, 0.0, 1.0, 4.0, 2.0, 1.0, 0.5], 6.0).unwrap()),
        ];
        for s in &systems {
            assert!(is_downward_closed(s.as_ref()), "{}", s.descriptor());
        }
    }

    #[test]
    fn spec_builds() {
        let spec = ConstraintSpec::Partition {
            parts: vec![vec![0, 1], vec![2]],
            caps: vec![1, 1],
        };
        let sys = spec.build(3).unwrap();
        assert!(sys.is_independent(&set(&[0, 2])));
        assert!(spec.build(4).is_err());
        let json = serde_json::to_string(&ConstraintSpec::Cardinality { k: 2 }).unwrap();
        assert_eq!(json, r#"{"type":"cardinality","k":2}"#);
    }
}
