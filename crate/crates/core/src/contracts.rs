//! Non-probabilistic assume/guarantee contracts: canonical form,
//! satisfaction, parallel composition and refinement.

use crate::error::{Error, Result};
use crate::traces::{included_in, Assertion, Horizon, Signature};

/// An implementation is an assertion playing the role of a component's
/// behavior.
pub type Implementation = Assertion;

/// A pair `(A, G)` over one signature.
///
/// Both assertions are lifted to the contract signature on construction.
/// [`Contract::canonicalize`] replaces `G` with `G ∪ ¬A` and keeps the
/// guarantee as written in [`Contract::stated_guarantee`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contract {
    signature: Signature,
    assumption: Assertion,
    guarantee: Assertion,
    stated: Option<Assertion>,
    canonical: bool,
}

impl Contract {
    pub fn new(signature: Signature, assumption: &Assertion, guarantee: &Assertion) -> Result<Self> {
        if assumption.horizon() != guarantee.horizon() {
            return Err(Error::HorizonMismatch {
                left: assumption.horizon().steps(),
                right: guarantee.horizon().steps(),
            });
        }
        Ok(Contract {
            assumption: assumption.lift_ports(&signature)?,
            guarantee: guarantee.lift_ports(&signature)?,
            signature,
            stated: None,
            canonical: false,
        })
    }

    /// `(⊤, G)` over `G`'s own signature.
    pub fn guarantee_only(guarantee: &Assertion) -> Result<Self> {
        let top = Assertion::universe(guarantee.signature().clone(), guarantee.horizon())?;
        Contract::new(guarantee.signature().clone(), &top, guarantee)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn horizon(&self) -> Horizon {
        self.assumption.horizon()
    }

    pub fn assumption(&self) -> &Assertion {
        &self.assumption
    }

    pub fn guarantee(&self) -> &Assertion {
        &self.guarantee
    }

    /// The guarantee before canonicalization.
    pub fn stated_guarantee(&self) -> &Assertion {
        self.stated.as_ref().unwrap_or(&self.guarantee)
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// `¬A ⊆ G`, checked on the run sets regardless of the flag.
    pub fn has_canonical_form(&self) -> bool {
        self.assumption.complement().is_subset(&self.guarantee).unwrap_or(false)
    }

    /// `(A, G ∪ ¬A)`. Idempotent.
    pub fn canonicalize(&self) -> Contract {
        if self.canonical {
            return self.clone();
        }
        let guarantee = self
            .guarantee
            .union(&self.assumption.complement())
            .expect("contract assertions share the contract signature");
        Contract {
            signature: self.signature.clone(),
            assumption: self.assumption.clone(),
            guarantee,
            stated: Some(self.stated_guarantee().clone()),
            canonical: true,
        }
    }

    /// The unique maximal implementation `M_C = G ∪ ¬A`.
    pub fn maximal_implementation(&self) -> Implementation {
        self.canonicalize().guarantee
    }

    /// The same contract over a larger signature.
    pub fn lift(&self, signature: &Signature) -> Result<Contract> {
        signature.check_covers(&self.signature, false)?;
        Ok(Contract {
            signature: signature.clone(),
            assumption: self.assumption.lift_ports(signature)?,
            guarantee: self.guarantee.lift_ports(signature)?,
            stated: self.stated.as_ref().map(|s| s.lift_ports(signature)).transpose()?,
            canonical: self.canonical,
        })
    }

    pub fn rename(&self, from: &str, to: &str) -> Result<Contract> {
        Ok(Contract {
            signature: self.signature.renamed(from, to)?,
            assumption: self.assumption.rename(from, to)?,
            guarantee: self.guarantee.rename(from, to)?,
            stated: self.stated.as_ref().map(|s| s.rename(from, to)).transpose()?,
            canonical: self.canonical,
        })
    }
}

fn satisfaction_signature(m: &Implementation, c: &Contract) -> Result<Signature> {
    if m.horizon() != c.horizon() {
        return Err(Error::HorizonMismatch { left: m.horizon().steps(), right: c.horizon().steps() });
    }
    c.signature.overlay(m.signature())
}

/// The three equivalent satisfaction checks, evaluated at `σ_C ∪ σ_M`:
/// `M ∩ A ⊆ G`, `M ⊆ G ∪ ¬A` and `M ∩ (A ∩ ¬G) = ∅`.
pub fn satisfaction_formulas(m: &Implementation, c: &Contract) -> Result<[bool; 3]> {
    let sig = satisfaction_signature(m, c)?;
    let m = m.lift_ports(&sig)?;
    let a = c.assumption.lift_ports(&sig)?;
    let g = c.guarantee.lift_ports(&sig)?;

    let restricted = m.intersect(&a)?.is_subset(&g)?;
    let maximal = g.union(&a.complement())?;
    let below_maximal = m.is_subset(&maximal)?;
    let violations = a.intersect(&g.complement())?;
    let disjoint = m.intersect(&violations)?.is_empty();
    Ok([restricted, below_maximal, disjoint])
}

/// `M ⊨ C`.
pub fn satisfies(m: &Implementation, c: &Contract) -> Result<bool> {
    let sig = satisfaction_signature(m, c)?;
    let held = m.lift_ports(&sig)?.intersect(&c.assumption.lift_ports(&sig)?)?.is_subset(&c.guarantee.lift_ports(&sig)?)?;
    if cfg!(debug_assertions) {
        let all = satisfaction_formulas(m, c)?;
        debug_assert!(all.iter().all(|&b| b == held), "satisfaction formulas disagree: {all:?}");
    }
    Ok(held)
}

/// `C₁ ∥ C₂` on the canonical forms of both operands. The controlled port
/// sets must be disjoint; the result is canonical.
pub fn compose(c1: &Contract, c2: &Contract) -> Result<Contract> {
    if c1.horizon() != c2.horizon() {
        return Err(Error::HorizonMismatch { left: c1.horizon().steps(), right: c2.horizon().steps() });
    }
    let (c1, c2) = (c1.canonicalize(), c2.canonicalize());
    let signature = c1.signature.compose(&c2.signature)?;
    let a1 = c1.assumption.lift_ports(&signature)?;
    let a2 = c2.assumption.lift_ports(&signature)?;
    let g1 = c1.guarantee.lift_ports(&signature)?;
    let g2 = c2.guarantee.lift_ports(&signature)?;

    let guarantee = g1.intersect(&g2)?;
    let assumption = a1.intersect(&a2)?.union(&guarantee.complement())?;
    let composed = Contract { signature, assumption, guarantee, stated: None, canonical: true };
    debug_assert!(composed.has_canonical_form());
    Ok(composed)
}

/// `C₁ ⪯ C₂`: `σ₁ ⊆ σ₂`, `A₁ ⊇ A₂` and `G₁ ⊆ G₂`, inclusions taken at `σ₂`
/// between canonical forms. Ports shared by both signatures must agree on
/// domain; a port missing from `σ₂` or with a different role means the
/// signature condition fails.
pub fn refines(c1: &Contract, c2: &Contract) -> Result<bool> {
    if c1.horizon() != c2.horizon() {
        return Err(Error::HorizonMismatch { left: c1.horizon().steps(), right: c2.horizon().steps() });
    }
    match c2.signature.check_covers(&c1.signature, true) {
        Ok(()) => {}
        Err(Error::DomainConflict(p)) => return Err(Error::DomainConflict(p)),
        Err(_) => return Ok(false),
    }
    let (c1, c2) = (c1.canonicalize(), c2.canonicalize());
    let sig = &c2.signature;
    Ok(included_in(&c2.assumption, &c1.assumption, sig)? && included_in(&c1.guarantee, &c2.guarantee, sig)?)
}

/// `M₁ × M₂` for implementations of composable components: a port
/// controlled by either side is controlled in the product.
pub fn compose_implementations(m1: &Implementation, m2: &Implementation) -> Result<Implementation> {
    if m1.horizon() != m2.horizon() {
        return Err(Error::HorizonMismatch { left: m1.horizon().steps(), right: m2.horizon().steps() });
    }
    let sig = m1.signature().compose(m2.signature())?;
    m1.lift_ports(&sig)?.intersect(&m2.lift_ports(&sig)?)
}
