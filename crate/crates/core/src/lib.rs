pub mod contracts;
pub mod error;
pub mod example;
#[cfg(feature = "fault-injection")]
pub mod fault;
pub mod oracle;
pub mod probabilistic;
pub mod rational;
pub mod speclang;
pub mod traces;

pub use contracts::{compose, compose_implementations, refines, satisfies, Contract, Implementation};
pub use error::{Error, Result};
pub use probabilistic::{
    compose_prob, refine_level, sat_level, wrap, Distribution, ProbContract, RefineReport, SatReport, WrapperPorts,
};
pub use rational::Rational;
pub use traces::{included_in, Assertion, Horizon, Port, Role, Run, Signature, Space, Value};
