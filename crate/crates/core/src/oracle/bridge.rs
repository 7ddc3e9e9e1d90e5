//! Conversions between reference values and engine values.

use super::reference::{Ports, RefContract, RefDist, RefProbContract, RunSet, Runs};
use crate::contracts::Contract;
use crate::error::Result;
use crate::probabilistic::{Distribution, ProbContract};
use crate::traces::{Assertion, Horizon, Signature};

pub fn signature(ports: &Ports) -> Result<Signature> {
    Signature::new(ports.values().cloned())
}

pub fn assertion(set: &RunSet) -> Result<Assertion> {
    Assertion::from_runs(signature(&set.ports)?, Horizon::new(set.horizon)?, &set.runs)
}

pub fn contract(c: &RefContract) -> Result<Contract> {
    Contract::new(signature(&c.ports)?, &assertion(&c.assume)?, &assertion(&c.guarantee)?)
}

pub fn distribution(d: &RefDist, horizon: usize) -> Result<Distribution> {
    Distribution::new(d.ports.iter().cloned(), Horizon::new(horizon)?, d.weights.iter().cloned())
}

pub fn prob_contract(pc: &RefProbContract) -> Result<ProbContract> {
    ProbContract::new(contract(&pc.contract)?, distribution(&pc.dist, pc.contract.assume.horizon)?)
}

/// The members of an engine assertion, for set comparisons.
pub fn runs_of(a: &Assertion) -> Runs {
    a.runs().collect()
}
