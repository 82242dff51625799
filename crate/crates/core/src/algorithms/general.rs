//! Robust maximization over an independence system by enumerating which
//! high-value element to protect.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{finalize, RobustResult, TraceStep};
use crate::bruteforce::{minimizer, Budget};
use crate::constraints::{restrict_system, IndependenceSystem, RestrictedSystem};
use crate::error::Result;
use crate::oracle::{Oracle, EPS};
use crate::subset::{Element, Subset};

/// A non-robust maximizer: returns `S ⊆ ground` with `sys.admits(S)`.
pub trait BaseAlgorithm: Send + Sync + fmt::Debug {
    fn solve(&self, f: &Oracle, ground: &Subset, sys: &RestrictedSystem) -> Result<Subset>;
}

/// Greedy for independence systems: repeatedly adds the admissible element
/// with the largest marginal until none remains.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyBase;

impl BaseAlgorithm for GreedyBase {
    fn solve(&self, f: &Oracle, ground: &Subset, sys: &RestrictedSystem) -> Result<Subset> {
        let mut s = Subset::empty();
        loop {
            let mut best: Option<(Element, f64)> = None;
            for x in ground.difference(&s).iter() {
                let t = s.with(x);
                if !sys.admits(&t) {
                    continue;
                }
                let v = f.eval(&t)?;
                if best.is_none_or(|(_, b)| v > b + EPS) {
                    best = Some((x, v));
                }
            }
            match best {
                Some((x, _)) => {
                    s.insert(x);
                }
                None => break,
            }
        }
        Ok(s)
    }
}

/// One loop iteration at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRecord {
    pub z: Element,
    pub f_z: f64,
    pub g_set: Subset,
    pub f_g: f64,
    pub g_g: f64,
    /// Some minimizer of `G` of full size contains `z`.
    pub z_in_minimizer_g: bool,
    pub m_set: Subset,
    pub f_m: f64,
    pub g_m: f64,
    /// Some minimizer of `M` of full size contains `z`.
    pub z_in_minimizer_m: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralOutcome {
    pub result: RobustResult,
    pub iterations: Vec<DichotomyRecord>,
}

struct Scored {
    set: Subset,
    g: f64,
    f: f64,
    z_in_min: Option<bool>,
}

struct Recursion<'a> {
    f: &'a Oracle,
    base: &'a dyn BaseAlgorithm,
    budget: Budget,
}

impl Recursion<'_> {
    fn score(&self, set: Subset, tau: usize, z: Option<Element>) -> Result<Scored> {
        let m = minimizer(self.f, &set, tau, &self.budget)?;
        let f = self.f.eval(&set)?;
        let z_in_min = z.map(|z| m.all_minimizers.iter().any(|b| b.contains(z)));
        Ok(Scored {
            set,
            g: m.value,
            f,
            z_in_min,
        })
    }

    /// Output of the level-`tau` procedure on `ground` under `sys`, plus the
    /// per-iteration records when `log` is set.
    fn run(
        &self,
        tau: usize,
        ground: &Subset,
        sys: &RestrictedSystem,
        mut log: Option<&mut Vec<DichotomyRecord>>,
    ) -> Result<Subset> {
        if tau == 0 {
            return self.base.solve(self.f, ground, sys);
        }
        let mut removed = Subset::empty();
        let mut best: Option<(Subset, f64)> = None;
        let mut consider = |s: &Scored| {
            if best.as_ref().is_none_or(|(_, g)| s.g > g + EPS) {
                best = Some((s.set.clone(), s.g));
            }
        };
        while !ground.difference(&removed).is_empty() {
            let g_set = self.base.solve(self.f, &ground.difference(&removed), sys)?;
            let mut z: Option<(Element, f64)> = None;
            for x in g_set.iter() {
                let v = self.f.eval(&Subset::singleton(x))?;
                if z.is_none_or(|(_, b)| v > b + EPS) {
                    z = Some((x, v));
                }
            }
            let Some((z, f_z)) = z else { break };
            removed.insert(z);
            let inner = sys.pin(&Subset::singleton(z))?;
            let rest = self.run(tau - 1, &ground.difference(&removed), &inner, None)?;
            let g_scored = self.score(g_set, tau, Some(z))?;
            let m_scored = self.score(rest.with(z), tau, Some(z))?;
            consider(&g_scored);
            consider(&m_scored);
            if let Some(records) = log.as_deref_mut() {
                records.push(DichotomyRecord {
                    z,
                    f_z,
                    g_set: g_scored.set,
                    f_g: g_scored.f,
                    g_g: g_scored.g,
                    z_in_minimizer_g: g_scored.z_in_min.unwrap_or(false),
                    m_set: m_scored.set,
                    f_m: m_scored.f,
                    g_m: m_scored.g,
                    z_in_minimizer_m: m_scored.z_in_min.unwrap_or(false),
                });
            }
        }
        Ok(best.map(|(s, _)| s).unwrap_or_default())
    }
}

/// Enumerative robust algorithm for independence systems.
///
/// For `tau = 0` this is `base` on the whole ground set. Otherwise, while
/// elements remain: `G = base(N - Z)`, `z` = the best singleton of `G`,
/// `Z = Z + z`, and `M = z + (level tau-1 on N - Z with z pinned)`. The
/// output is the candidate `G` or `M` with the largest `g_tau`.
pub fn general_robust(
    f: &Oracle,
    sys: Arc<dyn IndependenceSystem>,
    tau: usize,
    base: &dyn BaseAlgorithm,
) -> Result<GeneralOutcome> {
    let before = f.query_count();
    let rec = Recursion {
        f,
        base,
        budget: Budget::from_env()?,
    };
    let root = restrict_system(sys, &Subset::empty())?;
    let mut iterations = Vec::new();
    let set = rec.run(tau, &f.ground(), &root, Some(&mut iterations))?;
    let trace = if tau == 0 {
        vec![TraceStep {
            iteration: 0,
            added: set.to_vec(),
            rule: "base".into(),
        }]
    } else {
        iterations
            .iter()
            .enumerate()
            .map(|(i, r)| TraceStep {
                iteration: i,
                added: vec![r.z],
                rule: "protect".into(),
            })
            .collect()
    };
    let result = finalize(f, set, tau, f.query_count() - before, trace)?;
    Ok(GeneralOutcome { result, iterations })
}
