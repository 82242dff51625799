//! Instance JSON format.
//!
//! ```json
//! { "kind": "coverage", "n": 3, "sets": [[0, 1], [1], [2]], "k": 2, "tau": 1 }
//! { "kind": "modular", "n": 3, "weights": [3, 1, 2], "k": 2, "tau": 1 }
//! { "kind": "explicit", "n": 2, "table": [0, 1, 1, 1.5], "k": 1, "tau": 0 }
//! ```
//!
//! Optional keys: `universe_weights` (coverage), `label`, `constraint` (see
//! [`ConstraintSpec`]) and `copies` (a [`CopyMap`]). Explicit tables list
//! `f(A)` for every bit mask `A` and are limited to `n <= 16`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSpec;
use crate::error::{Error, Result};
use crate::instances::{CopyMap, Instance};
use crate::oracle::{CoverageFunction, ExplicitFunction, ModularFunction, Oracle, SetFunction, EXPLICIT_MAX_N};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FunctionSpec {
    Coverage {
        sets: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        universe_weights: Option<Vec<f64>>,
    },
    Modular {
        weights: Vec<f64>,
    },
    Explicit {
        table: Vec<f64>,
    },
}

impl FunctionSpec {
    pub fn build(&self, n: usize) -> Result<Arc<dyn SetFunction>> {
        let func: Arc<dyn SetFunction> = match self {
            FunctionSpec::Coverage { sets, universe_weights } => {
                Arc::new(CoverageFunction::new(sets.clone(), universe_weights.clone())?)
            }
            FunctionSpec::Modular { weights } => Arc::new(ModularFunction::new(weights.clone())?),
            FunctionSpec::Explicit { table } => Arc::new(ExplicitFunction::new(n, table.clone())?),
        };
        if func.ground_size() != n {
            return Err(Error::GroundMismatch {
                expected: n,
                found: func.ground_size(),
            });
        }
        Ok(func)
    }

    /// Compact form of `f`, falling back to a value table for small ground sets.
    pub fn of(f: &dyn SetFunction) -> Result<Self> {
        if let Some(spec) = f.to_spec() {
            return Ok(spec);
        }
        if f.ground_size() <= EXPLICIT_MAX_N {
            return Ok(ExplicitFunction::tabulate(f)?
                .to_spec()
                .expect("explicit functions always serialize"));
        }
        Err(Error::Config(format!(
            "{} has no compact form and is too large to tabulate",
            f.descriptor()
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub function: FunctionSpec,
    pub n: usize,
    pub k: usize,
    pub tau: usize,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copies: Option<CopyMap>,
}

impl InstanceSpec {
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        Ok(Self {
            function: FunctionSpec::of(inst.oracle.function().as_ref())?,
            n: inst.n(),
            k: inst.k,
            tau: inst.tau,
            label: inst.label.clone(),
            constraint: inst.constraint.clone(),
            copies: inst.copies.clone(),
        })
    }

    pub fn into_instance(self) -> Result<Instance> {
        let oracle = Oracle::from_arc(self.function.build(self.n)?);
        let mut inst = Instance::new(oracle, self.k, self.tau, self.label)?;
        if let Some(c) = self.constraint {
            c.build(inst.n())?;
            inst.constraint = Some(c);
        }
        if let Some(map) = self.copies {
            map.validate(inst.n())?;
            inst.copies = Some(map);
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    InstanceSpec::from_json(&text)?.into_instance()
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<()> {
    let json = InstanceSpec::from_instance(inst)?.to_json()?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}
