//! Probabilistic contracts: distributions over the histories of
//! probabilistic ports, satisfaction levels, composition, refinement levels
//! and the wrapper construction.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::contracts::{compose, Contract, Implementation};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::traces::{Assertion, History, Horizon, Port, Role, Run, Signature, Space};

/// Exact probability table over the joint histories `Ω` of a port set.
///
/// Joint histories are indexed like runs over the port set (see
/// [`crate::traces`]); only entries with positive weight are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    space: Space,
    weights: BTreeMap<u64, Rational>,
}

impl Distribution {
    /// Builds a distribution from `(joint history, weight)` pairs. Weights
    /// must be nonnegative, histories distinct, and the total exactly one.
    pub fn new(ports: impl IntoIterator<Item = Port>, horizon: Horizon, entries: impl IntoIterator<Item = (Run, Rational)>) -> Result<Self> {
        let space = Space::new(Signature::uniform(ports, Role::Uncontrolled)?, horizon)?;
        let mut indexed = Vec::new();
        for (run, w) in entries {
            indexed.push((space.encode(&run)?, w));
        }
        Distribution::from_indexed(space, indexed)
    }

    fn from_indexed(space: Space, entries: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        let mut weights = BTreeMap::new();
        let mut total = Rational::zero();
        for (index, w) in entries {
            if w.is_negative() {
                return Err(Error::InvalidDistribution(format!("negative weight {w}")));
            }
            if index >= space.size() {
                return Err(Error::InvalidDistribution(format!("history index {index} is outside Ω")));
            }
            total += &w;
            if weights.contains_key(&index) {
                return Err(Error::InvalidDistribution(format!("history {index} listed twice")));
            }
            if !w.is_zero() {
                weights.insert(index, w);
            }
        }
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, not 1")));
        }
        Ok(Distribution { space, weights })
    }

    /// The distribution over no ports: all mass on the empty history.
    pub fn trivial(horizon: Horizon) -> Self {
        let space = Space::new(Signature::empty(), horizon).expect("empty signature has one run");
        Distribution { space, weights: BTreeMap::from([(0, Rational::one())]) }
    }

    /// Step-independent failures of one boolean port, each step true with
    /// probability `p_true`.
    pub fn bernoulli_iid(port: &Port, p_true: &Rational, horizon: Horizon) -> Result<Self> {
        if !port.is_boolean() {
            return Err(Error::InvalidDistribution(format!("bernoulli needs a boolean port, `{}` is not", port.name())));
        }
        if !rational::in_unit_interval(p_true) {
            return Err(Error::ProbabilityRange(p_true.to_string()));
        }
        let space = Space::new(Signature::uniform([port.clone()], Role::Uncontrolled)?, horizon)?;
        let p_false = Rational::one() - p_true;
        let entries = (0..space.size()).map(|i| {
            let trues = i.count_ones() as usize;
            let w = num_traits::pow(p_true.clone(), trues) * num_traits::pow(p_false.clone(), horizon.steps() - trues);
            (i, w)
        });
        Distribution::from_indexed(space, entries.collect::<Vec<_>>())
    }

    /// Explicit table over the histories of a single port.
    pub fn table(port: &Port, horizon: Horizon, entries: impl IntoIterator<Item = (History, Rational)>) -> Result<Self> {
        let rows = entries.into_iter().map(|(h, w)| (Run::new().with(port.name(), h), w)).collect::<Vec<_>>();
        Distribution::new([port.clone()], horizon, rows)
    }

    pub fn ports(&self) -> &Signature {
        self.space.signature()
    }

    pub fn horizon(&self) -> Horizon {
        self.space.horizon()
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn weight(&self, index: u64) -> Rational {
        self.weights.get(&index).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn weight_of(&self, history: &Run) -> Rational {
        self.space.encode(history).map(|i| self.weight(i)).unwrap_or_else(|_| Rational::zero())
    }

    /// `(index, weight)` for every history with positive weight.
    pub fn support(&self) -> impl Iterator<Item = (u64, &Rational)> + '_ {
        self.weights.iter().map(|(i, w)| (*i, w))
    }

    pub fn probability(&self, mut event: impl FnMut(u64) -> bool) -> Rational {
        self.weights.iter().filter(|(i, _)| event(**i)).map(|(_, w)| w).sum()
    }

    /// `ℙ₁ × ℙ₂` over disjoint port sets.
    pub fn product(&self, other: &Distribution) -> Result<Self> {
        if self.horizon() != other.horizon() {
            return Err(Error::HorizonMismatch { left: self.horizon().steps(), right: other.horizon().steps() });
        }
        if let Some(p) = self.ports().names().find(|n| other.ports().contains(n)) {
            return Err(Error::ProbabilisticOverlap(p.to_string()));
        }
        let space = Space::new(self.ports().union(other.ports())?, self.horizon())?;
        let mut entries = Vec::with_capacity(self.weights.len() * other.weights.len());
        for (i, wi) in &self.weights {
            let ri = self.space.decode(*i);
            for (j, wj) in &other.weights {
                let mut run = ri.clone();
                for (p, h) in other.space.decode(*j).histories() {
                    run.insert(p.clone(), h.clone());
                }
                entries.push((space.encode(&run)?, wi * wj));
            }
        }
        Distribution::from_indexed(space, entries)
    }

    /// Sums out every port not in `keep`.
    pub fn marginal<'a>(&self, keep: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let sub = self.ports().restrict(keep)?;
        let space = Space::new(sub, self.horizon())?;
        let names: Vec<&str> = space.signature().names().collect();
        let mut acc: BTreeMap<u64, Rational> = BTreeMap::new();
        for (i, w) in &self.weights {
            let j = space.encode(&self.space.decode(*i).restrict(names.iter().copied()))?;
            *acc.entry(j).or_insert_with(Rational::zero) += w;
        }
        Ok(Distribution { space, weights: acc })
    }

    pub fn rename(&self, from: &str, to: &str) -> Result<Self> {
        let space = Space::new(self.ports().renamed(from, to)?, self.horizon())?;
        let mut weights = BTreeMap::new();
        for (i, w) in &self.weights {
            let run = self.space.decode(*i);
            let renamed = run.histories().iter().fold(Run::new(), |r, (p, h)| {
                r.with(if p == from { to } else { p.as_str() }, h.clone())
            });
            weights.insert(space.encode(&renamed)?, w.clone());
        }
        Ok(Distribution { space, weights })
    }
}

/// `𝒞 = (C, 𝐩, ℙ)`: a canonical contract, probabilistic uncontrolled ports
/// `𝐩` and a distribution over their joint histories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbContract {
    base: Contract,
    dist: Distribution,
}

impl ProbContract {
    pub fn new(base: Contract, dist: Distribution) -> Result<Self> {
        if base.horizon() != dist.horizon() {
            return Err(Error::HorizonMismatch { left: base.horizon().steps(), right: dist.horizon().steps() });
        }
        for port in dist.ports().ports() {
            match base.signature().get(port.name()) {
                Some((p, Role::Uncontrolled)) if p == port => {}
                Some((p, Role::Uncontrolled)) if p != port => return Err(Error::DomainConflict(port.name().to_string())),
                Some(_) => return Err(Error::ProbabilisticControlledByPeer(port.name().to_string())),
                None => {
                    return Err(Error::SignatureMismatch(format!(
                        "probabilistic port `{}` is not in the contract signature",
                        port.name()
                    )))
                }
            }
        }
        Ok(ProbContract { base: base.canonicalize(), dist })
    }

    /// A contract without probabilistic ports.
    pub fn deterministic(base: Contract) -> Self {
        let dist = Distribution::trivial(base.horizon());
        ProbContract { base: base.canonicalize(), dist }
    }

    pub fn base(&self) -> &Contract {
        &self.base
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn signature(&self) -> &Signature {
        self.base.signature()
    }

    pub fn horizon(&self) -> Horizon {
        self.base.horizon()
    }

    pub fn prob_ports(&self) -> impl Iterator<Item = &str> + '_ {
        self.dist.ports().names()
    }

    pub fn rename(&self, from: &str, to: &str) -> Result<Self> {
        let dist = if self.dist.ports().contains(from) { self.dist.rename(from, to)? } else { self.dist.clone() };
        ProbContract::new(self.base.rename(from, to)?, dist)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SatReport {
    /// `ℳ(M ⊆ G)`: the measure of histories `ω` for which every run of `M`
    /// consistent with `ω` lies in the guarantee.
    #[serde(serialize_with = "ser_rational")]
    pub level: Rational,
    /// A violating history of maximal weight, if any has positive weight.
    #[serde(skip)]
    pub witness_bad: Option<Run>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefineReport {
    /// `γ*`, or `None` when the conditioning event is null.
    #[serde(serialize_with = "ser_opt_rational")]
    pub level: Option<Rational>,
    /// Probability of the conditioning event `run ∈ G₁` under the
    /// minimizing resolution of the non-deterministic ports.
    #[serde(serialize_with = "ser_rational")]
    pub conditioning: Rational,
    /// Probability of `run ∈ G₁ ∩ G₂` under the same resolution.
    #[serde(serialize_with = "ser_rational")]
    pub joint: Rational,
    /// Probability of the histories `ω` on which `G₁ ⊆ G₂` holds for all
    /// non-deterministic choices. Informational; not a sound level.
    #[serde(serialize_with = "ser_rational")]
    pub inclusion: Rational,
    pub degenerate: bool,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::exact(r))
}

fn ser_opt_rational<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&rational::exact(r)),
        None => s.serialize_none(),
    }
}

/// Checks `𝐮_M ⊆ 𝐮_C` and `𝐜_M = 𝐜_C`.
fn check_roles(m: &Implementation, pc: &ProbContract) -> Result<()> {
    let sig = pc.signature();
    for (port, role) in m.signature().entries() {
        match sig.get(port.name()) {
            None => {
                return Err(Error::PortRoles(format!("implementation port `{}` is not in the contract", port.name())))
            }
            Some((p, _)) if p != port => return Err(Error::DomainConflict(port.name().to_string())),
            Some((_, r)) if r != *role => {
                return Err(Error::PortRoles(format!("port `{}` has role {role:?} in the implementation and {r:?} in the contract", port.name())))
            }
            _ => {}
        }
    }
    if let Some(p) = sig.controlled().find(|p| !m.signature().contains(p.name())) {
        return Err(Error::PortRoles(format!("contract output `{}` is not controlled by the implementation", p.name())));
    }
    Ok(())
}

/// `ℳ(M ⊆ G_𝒞) = ℙ({ω ∈ Ω | {ω} ∩ M ⊆^σ G_𝒞})`.
pub fn sat_level(m: &Implementation, pc: &ProbContract) -> Result<SatReport> {
    if m.horizon() != pc.horizon() {
        return Err(Error::HorizonMismatch { left: m.horizon().steps(), right: pc.horizon().steps() });
    }
    check_roles(m, pc)?;
    let sig = pc.signature();
    let m = m.lift(sig)?;
    let g = pc.base.guarantee();
    let omega = pc.dist.space();

    let mut bad = vec![false; omega.size() as usize];
    let mut rescued = vec![false; omega.size() as usize];
    for (run, w) in m.space().restriction(omega, str::to_string).enumerate() {
        if m.bits()[run] {
            if g.bits()[run] {
                rescued[w as usize] = true;
            } else {
                bad[w as usize] = true;
            }
        }
    }
    if fault_active() {
        for (b, r) in bad.iter_mut().zip(&rescued) {
            *b &= !r;
        }
    }

    let level = pc.dist.probability(|w| !bad[w as usize]);
    let witness_bad = pc
        .dist
        .support()
        .filter(|(w, _)| bad[*w as usize])
        .fold(None::<(u64, &Rational)>, |best, (i, w)| match best {
            Some((_, bw)) if bw >= w => best,
            _ => Some((i, w)),
        })
        .map(|(i, _)| omega.decode(i));
    Ok(SatReport { level, witness_bad })
}

#[cfg(feature = "fault-injection")]
fn fault_active() -> bool {
    crate::fault::active()
}

#[cfg(not(feature = "fault-injection"))]
fn fault_active() -> bool {
    false
}

/// `𝒞₁ ∥ 𝒞₂ = (C₁ ∥ C₂, 𝐩₁ ⊎ 𝐩₂, ℙ₁ × ℙ₂)`.
pub fn compose_prob(pc1: &ProbContract, pc2: &ProbContract) -> Result<ProbContract> {
    let base = compose(&pc1.base, &pc2.base)?;
    for p in pc1.prob_ports().chain(pc2.prob_ports()) {
        if base.signature().role(p) == Some(Role::Controlled) {
            return Err(Error::ProbabilisticControlledByPeer(p.to_string()));
        }
    }
    if let Some(p) = pc1.prob_ports().find(|p| pc2.dist.ports().contains(p)) {
        return Err(Error::ProbabilisticOverlap(p.to_string()));
    }
    let dist = pc1.dist.product(&pc2.dist)?;
    Ok(ProbContract { base, dist })
}

/// Port names introduced by [`wrap`] for a probabilistic port `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrapperPorts {
    pub output: String,
    pub probabilistic: String,
    pub controlled: String,
    pub selector: String,
}

impl WrapperPorts {
    pub fn for_port(x: &str) -> Self {
        WrapperPorts {
            output: x.to_string(),
            probabilistic: format!("{x}_p"),
            controlled: format!("{x}_c"),
            selector: format!("{x}_s"),
        }
    }
}

/// Splits the probabilistic port `x` off `pc`.
///
/// Returns `𝒞′`, in which `x` is an ordinary uncontrolled port and the
/// probabilistic source moves to `x_p` (carrying the marginal of `x`), and
/// the wrapper contract `C_x` that controls `x` and, at every step, copies
/// `x_p` when the selector `x_s` is `p` and `x_c` when it is `c`. A peer that
/// used to drive `x` is renamed to drive `x_c` instead.
pub fn wrap(x: &str, pc: &ProbContract) -> Result<(ProbContract, Contract)> {
    if !pc.dist.ports().contains(x) {
        return Err(Error::NotProbabilistic(x.to_string()));
    }
    let names = WrapperPorts::for_port(x);
    let sig = pc.signature();
    for n in [&names.probabilistic, &names.controlled, &names.selector] {
        if sig.contains(n) {
            return Err(Error::NameClash(n.clone()));
        }
    }
    let port = sig.port(x).expect("probabilistic ports belong to the signature").clone();
    let horizon = pc.horizon();

    let rest: Vec<&str> = pc.dist.ports().names().filter(|n| *n != x).collect();
    let dist = pc.dist.marginal(rest)?.product(&pc.dist.marginal([x])?.rename(x, &names.probabilistic)?)?;
    let sig_p = sig.overlay(&Signature::new([(port.renamed(&names.probabilistic), Role::Uncontrolled)])?)?;
    let split = ProbContract::new(pc.base.lift(&sig_p)?, dist)?;

    let selector = Port::new(names.selector.clone(), vec!["p".into(), "c".into()])?;
    let wsig = Signature::new([
        (port.clone(), Role::Controlled),
        (port.renamed(&names.probabilistic), Role::Uncontrolled),
        (port.renamed(&names.controlled), Role::Uncontrolled),
        (selector, Role::Uncontrolled),
    ])?;
    let steps = horizon.steps();
    let at = |name: &str| wsig.position(name).expect("wrapper port") * steps;
    let (out, xp, xc, s) = (at(x), at(&names.probabilistic), at(&names.controlled), at(&names.selector));
    let guarantee = Assertion::from_digits(wsig.clone(), horizon, |d| {
        (0..steps).all(|t| {
            let source = if d[s + t] == 0 { xp } else { xc };
            d[out + t] == d[source + t]
        })
    })?;
    let wrapper = Contract::guarantee_only(&guarantee)?;
    Ok((split, wrapper))
}

/// Refinement level `γ*` of `𝒞₁ ⪯_γ 𝒞₂`.
///
/// For a history `ω ∈ Ω₂` write `G_i(ω)` for the runs of `G_i↑σ₂` that
/// extend `ω`. The level is the worst case, over all resolutions of the
/// non-deterministic ports, of `ℙ₂(run ∈ G₂ | run ∈ G₁)`. A minimizing
/// resolution leaves `G₁` whenever it can and otherwise lands in `G₁ \ G₂`
/// when possible, so with `F = {ω | G₁(ω) and G₂(ω) are everything}` and
/// `X = {ω | G₁(ω) ⊄ G₂(ω)}` the level is `ℙ₂(F) / ℙ₂(F ∪ X)`, and `1` when
/// `ℙ₂(X) = 0`. It is degenerate when `G₁(ω)` is empty almost surely.
/// When `σ₂` has only probabilistic ports this is `ℙ₂(G₂ | G₁)`.
pub fn refine_level(pc1: &ProbContract, pc2: &ProbContract) -> Result<RefineReport> {
    if pc1.horizon() != pc2.horizon() {
        return Err(Error::HorizonMismatch { left: pc1.horizon().steps(), right: pc2.horizon().steps() });
    }
    let sig = pc2.signature();
    sig.check_covers(pc1.signature(), true)?;
    if let Some(p) = pc1.prob_ports().find(|p| !pc2.dist.ports().contains(p)) {
        return Err(Error::SignatureMismatch(format!("probabilistic port `{p}` of the refining contract is not probabilistic in the refined one")));
    }
    let names: Vec<&str> = pc1.prob_ports().collect();
    if pc2.dist.marginal(names.iter().copied())? != pc1.dist {
        return Err(Error::MarginalMismatch(format!("{{{}}}", names.join(", "))));
    }

    let g1 = pc1.base.guarantee().lift(sig)?;
    let g2 = pc2.base.guarantee();
    let omega = pc2.dist.space();
    let n = omega.size() as usize;
    let (mut g1_all, mut g2_all) = (vec![true; n], vec![true; n]);
    let (mut g1_any, mut escapes) = (vec![false; n], vec![false; n]);
    for (run, w) in g1.space().restriction(omega, str::to_string).enumerate() {
        let w = w as usize;
        let (in1, in2) = (g1.bits()[run], g2.bits()[run]);
        g1_all[w] &= in1;
        g2_all[w] &= in2;
        g1_any[w] |= in1;
        escapes[w] |= in1 && !in2;
    }

    let dist = &pc2.dist;
    let forced = dist.probability(|w| g1_all[w as usize] && g2_all[w as usize]);
    let bad = dist.probability(|w| escapes[w as usize]);
    let reachable = dist.probability(|w| g1_any[w as usize]);
    let inclusion = Rational::one() - &bad;

    let report = if reachable.is_zero() {
        RefineReport { level: None, conditioning: Rational::zero(), joint: Rational::zero(), inclusion, degenerate: true }
    } else if bad.is_zero() {
        RefineReport { level: Some(Rational::one()), conditioning: reachable.clone(), joint: reachable, inclusion, degenerate: false }
    } else {
        let conditioning = &forced + &bad;
        RefineReport { level: Some(&forced / &conditioning), conditioning, joint: forced, inclusion, degenerate: false }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn h(n: usize) -> Horizon {
        Horizon::new(n).unwrap()
    }

    #[test]
    fn bernoulli_examples() {
        let f = Port::boolean("f");
        let d = Distribution::bernoulli_iid(&f, &ratio(0, 1), h(2)).unwrap();
        assert_eq!(d.support().collect::<Vec<_>>(), vec![(0, &ratio(1, 1))]);

        let d = Distribution::bernoulli_iid(&f, &ratio(1, 10), h(2)).unwrap();
        assert_eq!(d.weight_of(&Run::new().with("f", vec![0, 0])), ratio(81, 100));
        assert_eq!(d.weight_of(&Run::new().with("f", vec![1, 0])), ratio(9, 100));
        assert_eq!(d.weight_of(&Run::new().with("f", vec![1, 1])), ratio(1, 100));

        let d = Distribution::bernoulli_iid(&f, &ratio(1, 2), h(1)).unwrap();
        assert_eq!(d.weight(0), ratio(1, 2));
        assert_eq!(d.weight(1), ratio(1, 2));

        assert!(matches!(Distribution::bernoulli_iid(&f, &ratio(3, 2), h(1)), Err(Error::ProbabilityRange(_))));
        let e = Port::new("e", vec!["a".into(), "b".into()]).unwrap();
        assert!(Distribution::bernoulli_iid(&e, &ratio(1, 2), h(1)).is_err());
    }

    #[test]
    fn distribution_validation() {
        let f = Port::boolean("f");
        assert!(Distribution::table(&f, h(1), [(vec![0], ratio(1, 2))]).is_err());
        assert!(Distribution::table(&f, h(1), [(vec![0], ratio(3, 2)), (vec![1], ratio(-1, 2))]).is_err());
        assert!(Distribution::table(&f, h(1), [(vec![0], ratio(1, 2)), (vec![0], ratio(1, 2))]).is_err());
        assert!(Distribution::table(&f, h(1), [(vec![0], ratio(1, 1)), (vec![1], ratio(0, 1))]).is_ok());
    }

    #[test]
    fn product_and_marginal() {
        let f1 = Distribution::bernoulli_iid(&Port::boolean("f1"), &ratio(1, 10), h(2)).unwrap();
        let f2 = Distribution::bernoulli_iid(&Port::boolean("f2"), &ratio(1, 5), h(2)).unwrap();
        let p = f1.product(&f2).unwrap();
        let both_quiet = Run::new().with("f1", vec![0, 0]).with("f2", vec![0, 0]);
        assert_eq!(p.weight_of(&both_quiet), ratio(81, 100) * ratio(16, 25));
        assert_eq!(p.support().map(|(_, w)| w.clone()).sum::<Rational>(), ratio(1, 1));
        assert_eq!(p.marginal(["f1"]).unwrap(), f1);
        assert_eq!(p.marginal(["f1", "f2"]).unwrap(), p);
        assert!(matches!(f1.product(&f1), Err(Error::ProbabilisticOverlap(_))));
        assert!(p.marginal(["zz"]).is_err());

        let u1 = Distribution::bernoulli_iid(&Port::boolean("a"), &ratio(1, 2), h(1)).unwrap();
        let u2 = Distribution::bernoulli_iid(&Port::boolean("b"), &ratio(1, 2), h(1)).unwrap();
        let u = u1.product(&u2).unwrap();
        assert!(u.support().all(|(_, w)| *w == ratio(1, 4)) && u.support().count() == 4);

        let t = Distribution::trivial(h(2));
        assert_eq!(t.product(&f1).unwrap(), f1);
    }

    fn sig(entries: &[(&str, Role)]) -> Signature {
        Signature::new(entries.iter().map(|(n, r)| (Port::boolean(*n), *r))).unwrap()
    }

    #[test]
    fn sat_level_trivial_cases() {
        let s = sig(&[("f", Role::Uncontrolled), ("x", Role::Controlled)]);
        let u = Assertion::universe(s.clone(), h(1)).unwrap();
        let d = Distribution::bernoulli_iid(&Port::boolean("f"), &ratio(1, 3), h(1)).unwrap();
        let pc = ProbContract::new(Contract::guarantee_only(&u).unwrap(), d.clone()).unwrap();
        assert_eq!(sat_level(&u, &pc).unwrap().level, ratio(1, 1));

        let g = Assertion::from_digits(s.clone(), h(1), |d| d[0] == d[1]).unwrap();
        let pc = ProbContract::new(Contract::guarantee_only(&g).unwrap(), d).unwrap();
        let empty = Assertion::empty(s.clone(), h(1)).unwrap();
        assert_eq!(sat_level(&empty, &pc).unwrap().level, ratio(1, 1));

        // x stuck at false: violates exactly when f fires.
        let m = Assertion::from_digits(s, h(1), |d| d[1] == 0).unwrap();
        let r = sat_level(&m, &pc).unwrap();
        assert_eq!(r.level, ratio(2, 3));
        assert_eq!(r.witness_bad, Some(Run::new().with("f", vec![1])));
    }

    #[test]
    fn sat_level_role_preconditions() {
        let s = sig(&[("f", Role::Uncontrolled), ("x", Role::Controlled)]);
        let u = Assertion::universe(s.clone(), h(1)).unwrap();
        let pc = ProbContract::deterministic(Contract::guarantee_only(&u).unwrap());
        let missing_output = Assertion::universe(sig(&[("f", Role::Uncontrolled)]), h(1)).unwrap();
        assert!(matches!(sat_level(&missing_output, &pc), Err(Error::PortRoles(_))));
        let flipped = Assertion::universe(sig(&[("f", Role::Controlled), ("x", Role::Controlled)]), h(1)).unwrap();
        assert!(matches!(sat_level(&flipped, &pc), Err(Error::PortRoles(_))));
        let foreign = Assertion::universe(sig(&[("q", Role::Uncontrolled), ("x", Role::Controlled)]), h(1)).unwrap();
        assert!(matches!(sat_level(&foreign, &pc), Err(Error::PortRoles(_))));
    }

    #[test]
    fn prob_ports_must_be_uncontrolled() {
        let s = sig(&[("x", Role::Controlled)]);
        let u = Assertion::universe(s, h(1)).unwrap();
        let d = Distribution::bernoulli_iid(&Port::boolean("x"), &ratio(1, 2), h(1)).unwrap();
        assert!(ProbContract::new(Contract::guarantee_only(&u).unwrap(), d).is_err());
    }

    #[test]
    fn compose_prob_rejects_peer_controlled_probabilistic_port() {
        let d = Distribution::bernoulli_iid(&Port::boolean("z"), &ratio(1, 2), h(1)).unwrap();
        let s1 = sig(&[("z", Role::Uncontrolled)]);
        let pc1 = ProbContract::new(Contract::guarantee_only(&Assertion::universe(s1, h(1)).unwrap()).unwrap(), d.clone()).unwrap();
        let s2 = sig(&[("z", Role::Controlled)]);
        let pc2 = ProbContract::deterministic(Contract::guarantee_only(&Assertion::universe(s2, h(1)).unwrap()).unwrap());
        assert_eq!(compose_prob(&pc1, &pc2), Err(Error::ProbabilisticControlledByPeer("z".into())));
        assert_eq!(compose_prob(&pc1, &pc1), Err(Error::ProbabilisticOverlap("z".into())));

        // Composing with a probability-free contract keeps the distribution.
        let s3 = sig(&[("y", Role::Controlled)]);
        let pc3 = ProbContract::deterministic(Contract::guarantee_only(&Assertion::universe(s3, h(1)).unwrap()).unwrap());
        assert_eq!(compose_prob(&pc1, &pc3).unwrap().distribution(), &d);
    }

    #[test]
    fn wrapper_guarantee_shape() {
        let s = sig(&[("x", Role::Uncontrolled)]);
        let d = Distribution::bernoulli_iid(&Port::boolean("x"), &ratio(1, 4), h(1)).unwrap();
        let pc = ProbContract::new(Contract::guarantee_only(&Assertion::universe(s, h(1)).unwrap()).unwrap(), d).unwrap();
        let (split, wrapper) = wrap("x", &pc).unwrap();
        assert_eq!(wrapper.guarantee().len(), 8);
        assert_eq!(wrapper.guarantee().space().size(), 16);
        assert_eq!(wrapper.signature().controlled().map(Port::name).collect::<Vec<_>>(), vec!["x"]);
        assert_eq!(split.prob_ports().collect::<Vec<_>>(), vec!["x_p"]);
        assert_eq!(split.distribution().weight_of(&Run::new().with("x_p", vec![1])), ratio(1, 4));
        assert_eq!(split.signature().role("x"), Some(Role::Uncontrolled));
        assert!(matches!(wrap("y", &pc), Err(Error::NotProbabilistic(_))));
    }

    #[test]
    fn wrapper_selector_identity() {
        // With the selector pinned to `p`, x follows x_p at every step.
        let s = sig(&[("x", Role::Uncontrolled)]);
        let d = Distribution::bernoulli_iid(&Port::boolean("x"), &ratio(1, 4), h(2)).unwrap();
        let pc = ProbContract::new(Contract::guarantee_only(&Assertion::universe(s, h(2)).unwrap()).unwrap(), d).unwrap();
        let (_, wrapper) = wrap("x", &pc).unwrap();
        let g = wrapper.guarantee();
        let sel = g.signature().port("x_s").unwrap().clone();
        let pinned = Assertion::from_runs(
            Signature::new([(sel, Role::Uncontrolled)]).unwrap(),
            h(2),
            &[Run::new().with("x_s", vec![0, 0])],
        )
        .unwrap();
        let behavior = g.intersect(&pinned.lift_ports(g.signature()).unwrap()).unwrap();
        for run in behavior.runs() {
            assert_eq!(run.history("x"), run.history("x_p"));
        }
        assert_eq!(behavior.len(), 16);
    }

    #[test]
    fn refine_level_basic_cases() {
        let s = sig(&[("f", Role::Uncontrolled), ("x", Role::Controlled)]);
        let d = Distribution::bernoulli_iid(&Port::boolean("f"), &ratio(1, 3), h(1)).unwrap();
        let g = Assertion::from_digits(s.clone(), h(1), |d| d[0] == 0 || d[1] == 1).unwrap();
        let pc = ProbContract::new(Contract::guarantee_only(&g).unwrap(), d.clone()).unwrap();
        let r = refine_level(&pc, &pc).unwrap();
        assert_eq!(r.level, Some(ratio(1, 1)));
        assert!(!r.degenerate);

        let top = ProbContract::new(Contract::guarantee_only(&Assertion::universe(s.clone(), h(1)).unwrap()).unwrap(), d.clone()).unwrap();
        assert_eq!(refine_level(&pc, &top).unwrap().level, Some(ratio(1, 1)));

        let never = ProbContract::new(Contract::guarantee_only(&Assertion::empty(s.clone(), h(1)).unwrap()).unwrap(), d.clone()).unwrap();
        let r = refine_level(&never, &pc).unwrap();
        assert!(r.degenerate && r.level.is_none());

        // G₂ ⊊ G₁ where the resolution can escape: f = 1 forces x = 1.
        let g2 = Assertion::from_digits(s.clone(), h(1), |d| d[1] == 1).unwrap();
        let pc2 = ProbContract::new(Contract::guarantee_only(&g2).unwrap(), d.clone()).unwrap();
        let r = refine_level(&pc, &pc2).unwrap();
        // F = ∅ (G₂ never holds for every x), X = {f = 0}.
        assert_eq!(r.level, Some(ratio(0, 1)));
        assert_eq!(r.conditioning, ratio(2, 3));
        assert_eq!(r.inclusion, ratio(1, 3));
    }

    #[test]
    fn refine_level_only_probabilistic_ports_is_conditional() {
        let s = sig(&[("a", Role::Uncontrolled), ("b", Role::Uncontrolled)]);
        let d = Distribution::bernoulli_iid(&Port::boolean("a"), &ratio(1, 4), h(1))
            .unwrap()
            .product(&Distribution::bernoulli_iid(&Port::boolean("b"), &ratio(1, 2), h(1)).unwrap())
            .unwrap();
        let g1 = Assertion::from_digits(s.clone(), h(1), |d| d[0] == 0).unwrap();
        let g2 = Assertion::from_digits(s.clone(), h(1), |d| d[1] == 0).unwrap();
        let pc1 = ProbContract::new(Contract::guarantee_only(&g1).unwrap(), d.clone()).unwrap();
        let pc2 = ProbContract::new(Contract::guarantee_only(&g2).unwrap(), d).unwrap();
        let r = refine_level(&pc1, &pc2).unwrap();
        // ℙ(b = 0 | a = 0) = 1/2 under independence.
        assert_eq!(r.level, Some(ratio(1, 2)));
        assert_eq!(r.conditioning, ratio(3, 4));
        assert_eq!(r.joint, ratio(3, 8));
    }

    #[test]
    fn refine_level_rejects_non_marginals() {
        let s = sig(&[("f", Role::Uncontrolled)]);
        let u = Contract::guarantee_only(&Assertion::universe(s, h(1)).unwrap()).unwrap();
        let d1 = Distribution::bernoulli_iid(&Port::boolean("f"), &ratio(1, 3), h(1)).unwrap();
        let d2 = Distribution::bernoulli_iid(&Port::boolean("f"), &ratio(1, 2), h(1)).unwrap();
        let pc1 = ProbContract::new(u.clone(), d1).unwrap();
        let pc2 = ProbContract::new(u, d2).unwrap();
        assert!(matches!(refine_level(&pc1, &pc2), Err(Error::MarginalMismatch(_))));
    }
}
