use std::fmt;

use crate::bruteforce::{ensure_budget, first_meeting, Budget};
use crate::error::{precondition, Error, Result};
use crate::oracle::Oracle;
use crate::subset::{binomial, Subset};

/// Finds one set meeting several lower bounds at once.
///
/// Given targets `V_i` such that some `X ⊆ ground` with `|X| = size` has
/// `f_i(X) >= V_i` for every `i`, an implementation returns a set of that
/// size with `f_i(X) >= rho * V_i`, where `rho` is [`guarantee`]. `None`
/// certifies that no set reaches the full targets.
///
/// [`guarantee`]: MultiObjectiveSolver::guarantee
pub trait MultiObjectiveSolver: Send + Sync + fmt::Debug {
    fn guarantee(&self) -> f64;
    fn solve(&self, fs: &[Oracle], ground: &Subset, targets: &[f64], size: usize) -> Result<Option<Subset>>;
}

/// Exhaustive search with `rho = 1`.
#[derive(Debug, Clone, Default)]
pub struct BruteForceSolver {
    pub budget: Budget,
}

impl MultiObjectiveSolver for BruteForceSolver {
    fn guarantee(&self) -> f64 {
        1.0
    }

    fn solve(&self, fs: &[Oracle], ground: &Subset, targets: &[f64], size: usize) -> Result<Option<Subset>> {
        brute_multiobjective_solver(fs, ground, targets, size, &self.budget)
    }
}

/// Lexicographically first `X ⊆ ground` with `|X| = size` and
/// `f_i(X) >= targets[i]` for every `i`, or `None` when there is none.
pub fn brute_multiobjective_solver(
    fs: &[Oracle],
    ground: &Subset,
    targets: &[f64],
    size: usize,
    budget: &Budget,
) -> Result<Option<Subset>> {
    if fs.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if targets.len() != fs.len() {
        return Err(precondition("one target per function is required"));
    }
    if size > ground.len() {
        return Err(precondition(format!(
            "size {size} exceeds the ground set size {}",
            ground.len()
        )));
    }
    ensure_budget(binomial(ground.len(), size), budget.solver)?;
    Ok(first_meeting(fs, &ground.to_vec(), size, targets)?.map(|c| c.x))
}
