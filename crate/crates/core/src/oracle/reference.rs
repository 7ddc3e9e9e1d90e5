//! Brute-force reference semantics over explicit sets of [`Run`]s.
//!
//! Nothing here touches the bitmap engine: lifts are built by enumerating
//! every extension of every run, and measures by walking each history of
//! the distribution. Conversions into engine values live in
//! [`super::bridge`].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rustc_hash::FxHashSet;

use crate::rational::Rational;
use crate::traces::{History, Port, Role, Run, Value};

/// A set of runs, hashed deterministically so iteration order is stable.
pub type Runs = FxHashSet<Run>;

/// Ports of a set or contract, keyed by name.
pub type Ports = BTreeMap<String, (Port, Role)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSet {
    pub ports: Ports,
    pub horizon: usize,
    pub runs: Runs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefContract {
    pub ports: Ports,
    pub assume: RunSet,
    pub guarantee: RunSet,
}

/// Weights of the joint histories of `ports`; unlisted histories weigh 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefDist {
    pub ports: Vec<Port>,
    pub weights: Vec<(Run, Rational)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefProbContract {
    pub contract: RefContract,
    pub dist: RefDist,
}

/// Every history of one port.
pub fn histories(port: &Port, horizon: usize) -> Vec<History> {
    let mut out = vec![Vec::new()];
    for _ in 0..horizon {
        out = out
            .into_iter()
            .flat_map(|h| {
                (0..port.arity()).map(move |v| {
                    let mut h = h.clone();
                    h.push(v as Value);
                    h
                })
            })
            .collect();
    }
    out
}

/// Every extension of `base` by one history of each port in `extra`.
pub fn extensions<'a>(base: &Run, extra: impl IntoIterator<Item = &'a Port>, horizon: usize) -> Vec<Run> {
    let mut out = vec![base.clone()];
    for port in extra {
        let hs = histories(port, horizon);
        out = out
            .into_iter()
            .flat_map(|r| hs.iter().map(move |h| r.clone().with(port.name(), h.clone())))
            .collect();
    }
    out
}

pub fn all_runs(ports: &Ports, horizon: usize) -> Vec<Run> {
    extensions(&Run::new(), ports.values().map(|(p, _)| p), horizon)
}

impl RunSet {
    pub fn new(ports: Ports, horizon: usize, runs: impl IntoIterator<Item = Run>) -> Self {
        RunSet { ports, horizon, runs: runs.into_iter().collect() }
    }

    pub fn universe(ports: &Ports, horizon: usize) -> Self {
        RunSet::new(ports.clone(), horizon, all_runs(ports, horizon))
    }

    /// The runs over `target` whose restriction lies in this set, built by
    /// extending each member with every history of the new ports.
    pub fn lift(&self, target: &Ports) -> RunSet {
        let extra: Vec<&Port> = target.iter().filter(|(n, _)| !self.ports.contains_key(*n)).map(|(_, (p, _))| p).collect();
        let runs = self.runs.iter().flat_map(|r| extensions(r, extra.iter().copied(), self.horizon));
        RunSet::new(target.clone(), self.horizon, runs)
    }

    pub fn complement(&self) -> RunSet {
        let runs = all_runs(&self.ports, self.horizon).into_iter().filter(|r| !self.runs.contains(r));
        RunSet::new(self.ports.clone(), self.horizon, runs)
    }

    pub fn contains(&self, run: &Run) -> bool {
        self.runs.contains(run)
    }

    /// Membership in the lift of this set, for a run over more ports:
    /// the run belongs exactly when its restriction does.
    pub fn holds(&self, run: &Run) -> bool {
        if run.histories().len() == self.ports.len() {
            return self.runs.contains(run);
        }
        self.runs.contains(&run.restrict(self.ports.keys().map(String::as_str)))
    }
}

/// Roles of the composite: controlled on either side wins. `None` when
/// both sides control a port.
pub fn compose_ports(p1: &Ports, p2: &Ports) -> Option<Ports> {
    let mut out = p1.clone();
    for (name, (port, role)) in p2 {
        match out.get_mut(name) {
            Some((_, r)) => {
                if *r == Role::Controlled && *role == Role::Controlled {
                    return None;
                }
                if *role == Role::Controlled {
                    *r = Role::Controlled;
                }
            }
            None => {
                out.insert(name.clone(), (port.clone(), *role));
            }
        }
    }
    Some(out)
}

/// Ports of `base` plus those of `extra` it lacks, keeping `base`'s roles.
pub fn overlay(base: &Ports, extra: &Ports) -> Ports {
    let mut out = base.clone();
    for (n, e) in extra {
        out.entry(n.clone()).or_insert_with(|| e.clone());
    }
    out
}

impl RefContract {
    /// `G ∪ ¬A`.
    pub fn canonical_guarantee(&self) -> RunSet {
        let all = all_runs(&self.ports, self.assume.horizon);
        let runs = all.into_iter().filter(|r| self.guarantee.holds(r) || !self.assume.holds(r));
        RunSet::new(self.ports.clone(), self.assume.horizon, runs)
    }
}

/// `M ∩ A ⊆ G` at `σ_C ∪ σ_M`.
pub fn satisfies(m: &RunSet, c: &RefContract) -> bool {
    let ports = overlay(&c.ports, &m.ports);
    let m = m.lift(&ports);
    m.runs.iter().all(|r| !c.assume.holds(r) || c.guarantee.holds(r))
}

pub fn compose(c1: &RefContract, c2: &RefContract) -> Option<RefContract> {
    let ports = compose_ports(&c1.ports, &c2.ports)?;
    let h = c1.assume.horizon;
    let (a1, a2, g1, g2) = (&c1.assume, &c2.assume, &c1.guarantee, &c2.guarantee);
    let mut guarantee = Runs::default();
    let mut assume = Runs::default();
    for r in all_runs(&ports, h) {
        let (in_a1, in_a2) = (a1.holds(&r), a2.holds(&r));
        let g = (!in_a1 || g1.holds(&r)) && (!in_a2 || g2.holds(&r));
        if (in_a1 && in_a2) || !g {
            assume.insert(r.clone());
        }
        if g {
            guarantee.insert(r);
        }
    }
    Some(RefContract {
        assume: RunSet { ports: ports.clone(), horizon: h, runs: assume },
        guarantee: RunSet { ports: ports.clone(), horizon: h, runs: guarantee },
        ports,
    })
}

/// `C₁ ⪯ C₂`, with `false` when `σ₁ ⊄ σ₂` or roles differ.
pub fn refines(c1: &RefContract, c2: &RefContract) -> bool {
    if c1.ports.iter().any(|(n, e)| c2.ports.get(n) != Some(e)) {
        return false;
    }
    let h = c2.assume.horizon;
    let (a1, g1) = (&c1.assume, c1.canonical_guarantee());
    let (a2, g2) = (&c2.assume, c2.canonical_guarantee());
    all_runs(&c2.ports, h).iter().all(|r| (!a2.contains(r) || a1.holds(r)) && (!g1.holds(r) || g2.contains(r)))
}

pub fn compose_implementations(m1: &RunSet, m2: &RunSet) -> Option<RunSet> {
    let ports = compose_ports(&m1.ports, &m2.ports)?;
    let l1 = m1.lift(&ports);
    let runs = l1.runs.into_iter().filter(|r| m2.holds(r)).collect::<Vec<_>>();
    Some(RunSet::new(ports, m1.horizon, runs))
}

pub fn product(d1: &RefDist, d2: &RefDist) -> RefDist {
    let mut weights = Vec::new();
    for (r1, w1) in &d1.weights {
        for (r2, w2) in &d2.weights {
            let mut r = r1.clone();
            for (p, h) in r2.histories() {
                r.insert(p.clone(), h.clone());
            }
            weights.push((r, w1 * w2));
        }
    }
    let mut ports = d1.ports.clone();
    ports.extend(d2.ports.iter().cloned());
    ports.sort_by(|a, b| a.name().cmp(b.name()));
    RefDist { ports, weights }
}

pub fn marginal(d: &RefDist, keep: &[&str]) -> RefDist {
    let mut acc: BTreeMap<Run, Rational> = BTreeMap::new();
    for (r, w) in &d.weights {
        *acc.entry(r.restrict(keep.iter().copied())).or_insert_with(Rational::zero) += w;
    }
    RefDist {
        ports: d.ports.iter().filter(|p| keep.contains(&p.name())).cloned().collect(),
        weights: acc.into_iter().filter(|(_, w)| !w.is_zero()).collect(),
    }
}

pub fn compose_prob(pc1: &RefProbContract, pc2: &RefProbContract) -> Option<RefProbContract> {
    Some(RefProbContract { contract: compose(&pc1.contract, &pc2.contract)?, dist: product(&pc1.dist, &pc2.dist) })
}

/// Non-probabilistic ports of `pc`.
fn free_ports(pc: &RefProbContract) -> Vec<&Port> {
    pc.contract
        .ports
        .values()
        .map(|(p, _)| p)
        .filter(|p| !pc.dist.ports.iter().any(|q| q.name() == p.name()))
        .collect()
}

/// The measure of histories `ω` such that every run of `M` extending `ω`
/// lies in `G ∪ ¬A`.
pub fn sat_level(m: &RunSet, pc: &RefProbContract) -> Rational {
    let c = &pc.contract;
    let g = c.canonical_guarantee();
    let free = free_ports(pc);
    let mut level = Rational::zero();
    for (omega, w) in &pc.dist.weights {
        let good = extensions(omega, free.iter().copied(), g.horizon)
            .iter()
            .all(|r| !m.holds(r) || g.contains(r));
        if good {
            level += w;
        }
    }
    level
}

/// What a resolution of the free ports can make of one history.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Outside,
    Both,
    OnlyFirst,
}

/// The smallest `ℙ₂(run ∈ G₂ | run ∈ G₁)` over every way of resolving the
/// non-probabilistic ports of `σ₂`, each history taken on its own.
/// `None` when no resolution lands in `G₁` with positive probability.
pub fn refine_level(pc1: &RefProbContract, pc2: &RefProbContract) -> Option<Rational> {
    const MAX_ASSIGNMENTS: u64 = 1 << 16;
    let g1 = pc1.contract.canonical_guarantee();
    let g2 = pc2.contract.canonical_guarantee();
    let free = free_ports(pc2);

    let mut options: Vec<(Vec<Outcome>, &Rational)> = Vec::new();
    for (omega, w) in &pc2.dist.weights {
        let mut seen = Vec::new();
        for r in extensions(omega, free.iter().copied(), g2.horizon) {
            let o = match (g1.holds(&r), g2.contains(&r)) {
                (false, _) => Outcome::Outside,
                (true, true) => Outcome::Both,
                (true, false) => Outcome::OnlyFirst,
            };
            if !seen.contains(&o) {
                seen.push(o);
            }
        }
        options.push((seen, w));
    }

    // Histories with a single outcome contribute the same to every
    // resolution; the rest are enumerated with an odometer.
    let (mut fixed_joint, mut fixed_cond) = (Rational::zero(), Rational::zero());
    let mut varying: Vec<(&[Outcome], &Rational)> = Vec::new();
    for (opts, w) in &options {
        match opts.as_slice() {
            [Outcome::Outside] => {}
            [Outcome::Both] => {
                fixed_joint += *w;
                fixed_cond += *w;
            }
            [Outcome::OnlyFirst] => fixed_cond += *w,
            _ => varying.push((opts, w)),
        }
    }
    let total = varying.iter().try_fold(1u64, |acc, (o, _)| acc.checked_mul(o.len() as u64)).unwrap_or(u64::MAX);
    let ratio = |choice: &dyn Fn(usize, &[Outcome]) -> Outcome| {
        let (mut joint, mut cond) = (fixed_joint.clone(), fixed_cond.clone());
        for (i, (opts, w)) in varying.iter().enumerate() {
            match choice(i, opts) {
                Outcome::Outside => {}
                Outcome::Both => {
                    joint += *w;
                    cond += *w;
                }
                Outcome::OnlyFirst => cond += *w,
            }
        }
        (!cond.is_zero()).then(|| joint / cond)
    };

    if total <= MAX_ASSIGNMENTS {
        return enumerate_resolutions(&fixed_joint, &fixed_cond, &varying);
    }

    // Too many resolutions to list: take the escape into G₁ \ G₂ wherever it
    // exists; otherwise leave G₁ if possible.
    let escape = |_: usize, opts: &[Outcome]| {
        if opts.contains(&Outcome::OnlyFirst) {
            Outcome::OnlyFirst
        } else if opts.contains(&Outcome::Outside) {
            Outcome::Outside
        } else {
            Outcome::Both
        }
    };
    match ratio(&escape) {
        Some(r) => Some(r),
        // No escape anywhere: any resolution reaching G₁ scores 1.
        None => options.iter().any(|(o, _)| o.contains(&Outcome::Both)).then(Rational::one),
    }
}

/// Smallest `joint / cond` over every choice of one outcome per varying
/// history. Weights are scaled to integers over a common denominator and the
/// sums are updated as the odometer turns.
fn enumerate_resolutions(fixed_joint: &Rational, fixed_cond: &Rational, varying: &[(&[Outcome], &Rational)]) -> Option<Rational> {
    let denom = varying
        .iter()
        .map(|(_, w)| w.denom().clone())
        .chain([fixed_joint.denom().clone(), fixed_cond.denom().clone()])
        .fold(BigInt::one(), |acc, d| acc.lcm(&d));
    let scale = |r: &Rational| r.numer() * (&denom / r.denom());
    let weights: Vec<BigInt> = varying.iter().map(|(_, w)| scale(w)).collect();
    let contribution = |o: Outcome| match o {
        Outcome::Outside => (false, false),
        Outcome::Both => (true, true),
        Outcome::OnlyFirst => (false, true),
    };
    let (mut joint, mut cond) = (scale(fixed_joint), scale(fixed_cond));
    let mut digits = vec![0usize; varying.len()];
    let apply = |joint: &mut BigInt, cond: &mut BigInt, i: usize, o: Outcome, sign: bool| {
        let (j, c) = contribution(o);
        for (on, acc) in [(j, &mut *joint), (c, &mut *cond)] {
            if on {
                if sign {
                    *acc += &weights[i];
                } else {
                    *acc -= &weights[i];
                }
            }
        }
    };
    for (i, (opts, _)) in varying.iter().enumerate() {
        apply(&mut joint, &mut cond, i, opts[0], true);
    }
    let mut best: Option<(BigInt, BigInt)> = None;
    loop {
        if !cond.is_zero() && best.as_ref().is_none_or(|(bj, bc)| &joint * bc < bj * &cond) {
            best = Some((joint.clone(), cond.clone()));
        }
        let mut k = 0;
        while k < digits.len() {
            let opts = varying[k].0;
            apply(&mut joint, &mut cond, k, opts[digits[k]], false);
            digits[k] = (digits[k] + 1) % opts.len();
            apply(&mut joint, &mut cond, k, opts[digits[k]], true);
            if digits[k] != 0 {
                break;
            }
            k += 1;
        }
        if k == digits.len() {
            return best.map(|(j, c)| Rational::new(j, c));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn bools(entries: &[(&str, Role)]) -> Ports {
        entries.iter().map(|(n, r)| (n.to_string(), (Port::boolean(*n), *r))).collect()
    }

    #[test]
    fn histories_and_extensions() {
        assert_eq!(histories(&Port::boolean("f"), 2).len(), 4);
        let p = bools(&[("a", Role::Uncontrolled), ("b", Role::Controlled)]);
        assert_eq!(all_runs(&p, 2).len(), 16);
        let single = RunSet::new(bools(&[("a", Role::Uncontrolled)]), 1, [Run::new().with("a", vec![1])]);
        assert_eq!(single.lift(&bools(&[("a", Role::Uncontrolled), ("b", Role::Uncontrolled)])).runs.len(), 2);
    }

    #[test]
    fn universe_satisfies_and_measures_one() {
        let p = bools(&[("f", Role::Uncontrolled)]);
        let u = RunSet::universe(&p, 1);
        let c = RefContract { ports: p.clone(), assume: u.clone(), guarantee: u.clone() };
        assert!(satisfies(&u, &c));
        let dist = RefDist {
            ports: vec![Port::boolean("f")],
            weights: vec![(Run::new().with("f", vec![0]), ratio(1, 3)), (Run::new().with("f", vec![1]), ratio(2, 3))],
        };
        assert_eq!(sat_level(&u, &RefProbContract { contract: c, dist }), ratio(1, 1));
    }
}
