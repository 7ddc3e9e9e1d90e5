//! The two-supplier safety example shipped in `assets/example.pct`.

use std::fmt;

use serde::Serialize;

use crate::contracts::{compose_implementations, refines};
use crate::probabilistic::{compose_prob, refine_level, sat_level, RefineReport};
use crate::rational::{self, Rational};
use crate::speclang::{self, System};

pub const EXAMPLE_SOURCE: &str = include_str!("../assets/example.pct");

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExampleReport {
    #[serde(serialize_with = "ser")]
    pub alpha: Rational,
    #[serde(serialize_with = "ser")]
    pub beta: Rational,
    #[serde(serialize_with = "ser")]
    pub alpha_beta: Rational,
    /// Level of `M1 × M2` against `P1 ∥ P2`.
    #[serde(serialize_with = "ser")]
    pub composed_level: Rational,
    /// Whether the computed composition refines the contract as stated in
    /// the document (`Cstated`).
    pub matches_stated: bool,
    pub gamma: RefineReport,
    #[serde(serialize_with = "ser_opt")]
    pub alpha_beta_gamma: Option<Rational>,
    /// Level of `M1 × M2` against `Pprime`.
    #[serde(serialize_with = "ser")]
    pub prime_level: Rational,
    /// The same pipeline with the second component reading its own copy
    /// `x2` of `x`, so that the two signatures share no port.
    #[serde(serialize_with = "ser")]
    pub disjoint_level: Rational,
    #[serde(serialize_with = "ser")]
    pub disjoint_product: Rational,
}

fn ser<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational::exact(r))
}

fn ser_opt<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&rational::exact(r)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExampleError {
    #[error(transparent)]
    Parse(#[from] speclang::Diagnostic),
    #[error(transparent)]
    Engine(#[from] crate::Error),
    #[error("`{0}` is missing from the example document")]
    Missing(&'static str),
}

pub fn load_example() -> Result<System, speclang::Diagnostic> {
    speclang::load(EXAMPLE_SOURCE)
}

/// Computes every level of the example from the bundled document.
pub fn run_example() -> Result<ExampleReport, ExampleError> {
    run_on(&load_example()?)
}

pub fn run_on(sys: &System) -> Result<ExampleReport, ExampleError> {
    let pc = |n: &'static str| sys.prob_contract(n).ok_or(ExampleError::Missing(n));
    let imp = |n: &'static str| sys.implementation(n).ok_or(ExampleError::Missing(n));
    let (p1, p2, pprime) = (pc("P1")?, pc("P2")?, pc("Pprime")?);
    let (m1, m2) = (imp("M1")?, imp("M2")?);
    let stated = sys.contract("Cstated").ok_or(ExampleError::Missing("Cstated"))?;

    let alpha = sat_level(m1, p1)?.level;
    let beta = sat_level(m2, p2)?.level;
    let alpha_beta = &alpha * &beta;
    let composed = compose_prob(p1, p2)?;
    let m12 = compose_implementations(m1, m2)?;
    let composed_level = sat_level(&m12, &composed)?.level;
    let matches_stated = refines(composed.base(), stated)?;
    let gamma = refine_level(&composed, pprime)?;
    let alpha_beta_gamma = gamma.level.as_ref().map(|g| &alpha_beta * g);
    let prime_level = sat_level(&m12, pprime)?.level;

    let p2d = p2.rename("x", "x2")?;
    let m2d = m2.rename("x", "x2")?;
    let disjoint_product = &alpha * &sat_level(&m2d, &p2d)?.level;
    let disjoint_level = sat_level(&compose_implementations(m1, &m2d)?, &compose_prob(p1, &p2d)?)?.level;

    Ok(ExampleReport {
        alpha,
        beta,
        alpha_beta,
        composed_level,
        matches_stated,
        gamma,
        alpha_beta_gamma,
        prime_level,
        disjoint_level,
        disjoint_product,
    })
}

impl fmt::Display for ExampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = rational::display;
        writeln!(f, "alpha = P(never(f1))          {}", d(&self.alpha))?;
        writeln!(f, "beta  = P(never(f2))          {}", d(&self.beta))?;
        writeln!(f, "alpha*beta                    {}", d(&self.alpha_beta))?;
        writeln!(f, "M1 x M2 against P1 || P2      {}", d(&self.composed_level))?;
        writeln!(f, "  bound holds                 {}", self.composed_level >= self.alpha_beta)?;
        writeln!(f, "  refines the stated contract {}", self.matches_stated)?;
        match &self.gamma.level {
            Some(g) => writeln!(f, "gamma                         {}", d(g))?,
            None => writeln!(f, "gamma                         degenerate")?,
        }
        writeln!(f, "  conditioning                {}", d(&self.gamma.conditioning))?;
        writeln!(f, "  inclusion measure           {}", d(&self.gamma.inclusion))?;
        match &self.alpha_beta_gamma {
            Some(abg) => writeln!(f, "alpha*beta*gamma              {}", d(abg))?,
            None => writeln!(f, "alpha*beta*gamma              undefined")?,
        }
        writeln!(f, "M1 x M2 against Pprime        {}", d(&self.prime_level))?;
        if let Some(abg) = &self.alpha_beta_gamma {
            writeln!(f, "  bound holds                 {}", &self.prime_level >= abg)?;
        }
        writeln!(f, "disjoint variant level        {}", d(&self.disjoint_level))?;
        write!(f, "  equals the product          {}", self.disjoint_level == self.disjoint_product)
    }
}
