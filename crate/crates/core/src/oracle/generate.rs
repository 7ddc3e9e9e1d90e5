//! Seeded random instances for the theorem suites.
//!
//! Every generator is a pure function of its seed and budget. Instances
//! meet the preconditions of the operations they feed by construction; the
//! budget is met by shrinking the horizon and then domains, never by
//! rejecting a draw.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::reference::{all_runs, marginal, Ports, RefContract, RefDist, RefProbContract, RunSet};
use crate::rational::Rational;
use crate::traces::{Port, Role, Run};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Ports per side beyond the one output every side controls.
    pub extra_ports: usize,
    pub max_horizon: usize,
    pub max_domain: usize,
    /// Upper bound on the runs over all ports of an instance.
    pub max_runs: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { extra_ports: 2, max_horizon: 3, max_domain: 3, max_runs: 4096 }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ports={},h={},domain={},runs={}", self.extra_ports, self.max_horizon, self.max_domain, self.max_runs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid budget `{0}`: expected comma-separated ports=N, h=N, domain=N, runs=N")]
pub struct BudgetError(String);

impl FromStr for Budget {
    type Err = BudgetError;

    /// `ports=2,h=3,domain=3,runs=4096`; omitted keys keep their defaults.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || BudgetError(s.to_string());
        let mut b = Budget::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(err)?;
            let v: u64 = v.trim().parse().map_err(|_| err())?;
            match k.trim() {
                "ports" if v <= 4 => b.extra_ports = v as usize,
                "h" if (1..=8).contains(&v) => b.max_horizon = v as usize,
                "domain" if (2..=8).contains(&v) => b.max_domain = v as usize,
                "runs" if v >= 2 => b.max_runs = v,
                _ => return Err(err()),
            }
        }
        Ok(b)
    }
}

/// Two components for a composition query.
#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub m1: RunSet,
    pub pc1: RefProbContract,
    pub m2: RunSet,
    pub pc2: RefProbContract,
}

/// One implementation and two contracts meeting the refinement-level
/// preconditions, with non-degenerate conditioning.
#[derive(Clone, Debug)]
pub struct RefinementInstance {
    pub seed: u64,
    pub m: RunSet,
    pub pc1: RefProbContract,
    pub pc2: RefProbContract,
    /// Draws needed to reach a non-degenerate instance.
    pub attempts: usize,
}

/// Refinement pairs on two composable sides, and an implementation of the
/// first side's refining contract.
#[derive(Clone, Debug)]
pub struct Lemma2Instance {
    pub seed: u64,
    pub fine1: RefContract,
    pub coarse1: RefContract,
    pub fine2: RefContract,
    pub coarse2: RefContract,
    pub m: RunSet,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct PortPlan {
    arity: BTreeMap<String, usize>,
    horizon: usize,
}

impl PortPlan {
    fn new(rng: &mut ChaCha8Rng, budget: &Budget) -> Self {
        PortPlan { arity: BTreeMap::new(), horizon: rng.random_range(1..=budget.max_horizon.max(1)) }
    }

    fn add(&mut self, rng: &mut ChaCha8Rng, budget: &Budget, name: &str) {
        let max = budget.max_domain.max(2);
        let arity = if max > 2 && rng.random_bool(0.3) { rng.random_range(3..=max) } else { 2 };
        self.arity.entry(name.to_string()).or_insert(arity);
    }

    fn runs(&self) -> u128 {
        self.arity.values().fold(1u128, |acc, a| acc.saturating_mul((*a as u128).saturating_pow(self.horizon as u32)))
    }

    fn shrink(&mut self, budget: &Budget) {
        while self.runs() > budget.max_runs as u128 {
            if self.horizon > 1 {
                self.horizon -= 1;
            } else if let Some(a) = self.arity.values_mut().find(|a| **a > 2) {
                *a -= 1;
            } else {
                break;
            }
        }
    }

    fn port(&self, name: &str) -> Port {
        match self.arity[name] {
            2 => Port::boolean(name),
            n => Port::new(name, (0..n).map(|v| format!("v{v}")).collect()).expect("distinct labels"),
        }
    }

    fn ports(&self, entries: &[(String, Role)]) -> Ports {
        entries.iter().map(|(n, r)| (n.clone(), (self.port(n), *r))).collect()
    }
}

fn random_set(rng: &mut ChaCha8Rng, ports: &Ports, horizon: usize, density: f64) -> RunSet {
    let runs: Vec<Run> = all_runs(ports, horizon).into_iter().filter(|_| rng.random_bool(density)).collect();
    RunSet::new(ports.clone(), horizon, runs)
}

fn random_contract(rng: &mut ChaCha8Rng, ports: &Ports, horizon: usize) -> RefContract {
    let assume = if rng.random_bool(0.4) {
        RunSet::universe(ports, horizon)
    } else {
        let d = rng.random_range(0.6..1.0);
        random_set(rng, ports, horizon, d)
    };
    let d = rng.random_range(0.5..1.0);
    let guarantee = random_set(rng, ports, horizon, d);
    RefContract { ports: ports.clone(), assume, guarantee }
}

fn random_dist(rng: &mut ChaCha8Rng, ports: Vec<Port>, horizon: usize) -> RefDist {
    let keyed: Ports = ports.iter().map(|p| (p.name().to_string(), (p.clone(), Role::Uncontrolled))).collect();
    let omegas = all_runs(&keyed, horizon);
    let mut raw: Vec<u32> = omegas.iter().map(|_| rng.random_range(0..=4)).collect();
    if raw.iter().all(|w| *w == 0) {
        let i = rng.random_range(0..raw.len());
        raw[i] = 1;
    }
    let total: u32 = raw.iter().sum();
    let weights = omegas
        .into_iter()
        .zip(raw)
        .filter(|(_, w)| *w > 0)
        .map(|(r, w)| (r, Rational::new((w as i64).into(), (total as i64).into())))
        .collect();
    RefDist { ports, weights }
}

/// An input-receptive implementation of `c` over all controlled ports and
/// some of the uncontrolled ones: every input history has at least one
/// run. Each input misbehaves with probability `noise`. With `noise = 0`
/// and every port kept it satisfies `c` whenever every input admits a good
/// run.
fn random_impl(rng: &mut ChaCha8Rng, c: &RefContract, noise: f64, keep_port: f64) -> RunSet {
    let good = c.canonical_guarantee();
    let ports: Ports = c
        .ports
        .iter()
        .filter(|(_, (_, role))| *role == Role::Controlled || rng.random_bool(keep_port))
        .map(|(n, e)| (n.clone(), e.clone()))
        .collect();
    let names: Vec<&str> = ports.keys().map(String::as_str).collect();
    let inputs: Vec<&str> = ports.iter().filter(|(_, (_, r))| *r == Role::Uncontrolled).map(|(n, _)| n.as_str()).collect();

    let mut by_input: BTreeMap<Run, (Vec<Run>, Vec<Run>)> = BTreeMap::new();
    for r in all_runs(&c.ports, good.horizon) {
        let entry = by_input.entry(r.restrict(inputs.iter().copied())).or_default();
        if good.contains(&r) {
            entry.0.push(r);
        } else {
            entry.1.push(r);
        }
    }
    let mut runs = Vec::new();
    for (good_runs, bad_runs) in by_input.values() {
        let before = runs.len();
        runs.extend(good_runs.iter().filter(|_| rng.random_bool(0.9)).cloned());
        if !bad_runs.is_empty() && rng.random_bool(noise) {
            runs.push(bad_runs[rng.random_range(0..bad_runs.len())].clone());
        }
        if runs.len() == before {
            let pool = if good_runs.is_empty() { bad_runs } else { good_runs };
            runs.push(pool[rng.random_range(0..pool.len())].clone());
        }
    }
    let projected: Vec<Run> = runs.iter().map(|r| r.restrict(names.iter().copied())).collect();
    RunSet::new(ports.clone(), good.horizon, projected)
}

fn random_noise(rng: &mut ChaCha8Rng) -> f64 {
    [0.0, 0.05, 0.15, 0.3][rng.random_range(0..4)]
}

struct Sides {
    plan: PortPlan,
    side: [Vec<(String, Role)>; 2],
    prob: [Vec<String>; 2],
}

fn gen_sides(rng: &mut ChaCha8Rng, budget: &Budget, shared: bool) -> Sides {
    let mut plan = PortPlan::new(rng, budget);
    let mut width = || if rng.random_bool(0.6) { budget.extra_ports } else { rng.random_range(0..=budget.extra_ports) };
    let n = [1 + width(), 1 + width()];
    let mut side: [Vec<(String, Role)>; 2] = [vec![("x1".into(), Role::Controlled)], vec![("x2".into(), Role::Controlled)]];
    let mut prob: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    let mut reads_peer = [false, false];
    let mut free2 = n[1] - 1;
    for i in 0..n[0] - 1 {
        match rng.random_range(0..4) {
            0 if shared && !reads_peer[0] => {
                reads_peer[0] = true;
                side[0].push(("x2".into(), Role::Uncontrolled));
            }
            1 if shared && free2 > 0 => {
                free2 -= 1;
                let name = format!("s{i}");
                side[0].push((name.clone(), Role::Uncontrolled));
                side[1].push((name.clone(), Role::Uncontrolled));
                match rng.random_range(0..4) {
                    0 => prob[0].push(name),
                    1 => prob[1].push(name),
                    _ => {}
                }
            }
            2 => side[0].push((format!("c1_{i}"), Role::Controlled)),
            _ => {
                let name = format!("u1_{i}");
                if rng.random_bool(0.7) {
                    prob[0].push(name.clone());
                }
                side[0].push((name, Role::Uncontrolled));
            }
        }
    }
    for j in 0..free2 {
        match rng.random_range(0..4) {
            0 if shared && !reads_peer[1] => {
                reads_peer[1] = true;
                side[1].push(("x1".into(), Role::Uncontrolled));
            }
            2 => side[1].push((format!("c2_{j}"), Role::Controlled)),
            _ => {
                let name = format!("u2_{j}");
                if rng.random_bool(0.7) {
                    prob[1].push(name.clone());
                }
                side[1].push((name, Role::Uncontrolled));
            }
        }
    }
    for (name, _) in side.iter().flatten() {
        plan.add(rng, budget, name);
    }
    plan.shrink(budget);
    Sides { plan, side, prob }
}

fn build_instance(seed: u64, budget: &Budget, shared: bool, satisfying: bool) -> Instance {
    let mut rng = rng_for(seed, if shared { 1 } else { 2 } + if satisfying { 10 } else { 0 });
    let sides = gen_sides(&mut rng, budget, shared);
    let h = sides.plan.horizon;
    let mut parts = Vec::new();
    for i in 0..2 {
        let ports = sides.plan.ports(&sides.side[i]);
        let contract = random_contract(&mut rng, &ports, h);
        let dist = random_dist(&mut rng, sides.prob[i].iter().map(|n| sides.plan.port(n)).collect(), h);
        let m = if satisfying {
            random_impl(&mut rng, &contract, 0.0, 1.0)
        } else {
            let noise = random_noise(&mut rng);
            random_impl(&mut rng, &contract, noise, 0.75)
        };
        parts.push((m, RefProbContract { contract, dist }));
    }
    let (m2, pc2) = parts.pop().unwrap();
    let (m1, pc1) = parts.pop().unwrap();
    Instance { seed, m1, pc1, m2, pc2 }
}

/// Two composable components that may share ports.
pub fn gen_instance(seed: u64, budget: &Budget) -> Instance {
    build_instance(seed, budget, true, false)
}

/// Two components over disjoint signatures.
pub fn gen_disjoint_instance(seed: u64, budget: &Budget) -> Instance {
    build_instance(seed, budget, false, false)
}

/// Like [`gen_instance`], with each implementation satisfying its contract.
pub fn gen_satisfying_instance(seed: u64, budget: &Budget) -> Instance {
    build_instance(seed, budget, true, true)
}

/// An instance for the refinement level. With `tight`, the coarse
/// guarantee is included in the fine one.
pub fn gen_refinement(seed: u64, budget: &Budget, tight: bool) -> RefinementInstance {
    let mut rng = rng_for(seed, if tight { 4 } else { 3 });
    for attempt in 1.. {
        let inst = draw_refinement(&mut rng, budget, tight, seed, attempt);
        if super::reference::refine_level(&inst.pc1, &inst.pc2).is_some() {
            return inst;
        }
    }
    unreachable!()
}

fn draw_refinement(rng: &mut ChaCha8Rng, budget: &Budget, tight: bool, seed: u64, attempts: usize) -> RefinementInstance {
    let mut plan = PortPlan::new(rng, budget);
    let k = rng.random_range(0..=budget.extra_ports);
    let mut outer = vec![("o".to_string(), Role::Controlled)];
    outer.extend((0..k).map(|i| (format!("u{i}"), Role::Uncontrolled)));
    for (n, _) in &outer {
        plan.add(rng, budget, n);
    }
    plan.shrink(budget);
    let h = plan.horizon;
    let inner: Vec<(String, Role)> =
        outer.iter().filter(|(_, r)| *r == Role::Controlled || rng.random_bool(0.6)).cloned().collect();
    let p2: Vec<String> = outer.iter().filter(|(_, r)| *r == Role::Uncontrolled && rng.random_bool(0.6)).map(|(n, _)| n.clone()).collect();
    let p1: Vec<String> =
        p2.iter().filter(|n| inner.iter().any(|(m, _)| m == *n) && rng.random_bool(0.7)).cloned().collect();

    let (ports2, ports1) = (plan.ports(&outer), plan.ports(&inner));
    let dist2 = random_dist(rng, p2.iter().map(|n| plan.port(n)).collect(), h);
    let keep: Vec<&str> = p1.iter().map(String::as_str).collect();
    let dist1 = marginal(&dist2, &keep);

    let c1 = random_contract(rng, &ports1, h);
    let g1 = c1.canonical_guarantee();
    let guarantee2: Vec<Run> = all_runs(&ports2, h)
        .into_iter()
        .filter(|r| if g1.holds(r) { rng.random_bool(0.85) } else { !tight && rng.random_bool(0.25) })
        .collect();
    let assume2 = if tight || rng.random_bool(0.5) {
        RunSet::universe(&ports2, h)
    } else {
        let d = rng.random_range(0.7..1.0);
        random_set(rng, &ports2, h, d)
    };
    let c2 = RefContract { ports: ports2.clone(), assume: assume2, guarantee: RunSet::new(ports2, h, guarantee2) };
    let noise = random_noise(rng);
    let m = random_impl(rng, &c1, noise, 0.75);
    RefinementInstance {
        seed,
        m,
        pc1: RefProbContract { contract: c1, dist: dist1 },
        pc2: RefProbContract { contract: c2, dist: dist2 },
        attempts,
    }
}

/// A contract refining `coarse` most of the time: a larger assumption and
/// a guarantee inside the coarse one.
fn refining(rng: &mut ChaCha8Rng, coarse: &RefContract) -> RefContract {
    if rng.random_bool(0.2) {
        return random_contract(rng, &coarse.ports, coarse.assume.horizon);
    }
    let h = coarse.assume.horizon;
    let g = coarse.canonical_guarantee();
    let assume: Vec<Run> =
        all_runs(&coarse.ports, h).into_iter().filter(|r| coarse.assume.contains(r) || rng.random_bool(0.3)).collect();
    let guarantee: Vec<Run> = g.runs.iter().filter(|_| rng.random_bool(0.8)).cloned().collect();
    RefContract {
        ports: coarse.ports.clone(),
        assume: RunSet::new(coarse.ports.clone(), h, assume),
        guarantee: RunSet::new(coarse.ports.clone(), h, guarantee),
    }
}

pub fn gen_lemma2(seed: u64, budget: &Budget) -> Lemma2Instance {
    let mut rng = rng_for(seed, 5);
    let sides = gen_sides(&mut rng, budget, true);
    let h = sides.plan.horizon;
    let p1 = sides.plan.ports(&sides.side[0]);
    let p2 = sides.plan.ports(&sides.side[1]);
    let coarse1 = random_contract(&mut rng, &p1, h);
    let fine1 = refining(&mut rng, &coarse1);
    let coarse2 = random_contract(&mut rng, &p2, h);
    let fine2 = refining(&mut rng, &coarse2);
    let noise = if rng.random_bool(0.7) { 0.0 } else { random_noise(&mut rng) };
    let m = random_impl(&mut rng, &fine1, noise, 1.0);
    Lemma2Instance { seed, fine1, coarse1, fine2, coarse2, m }
}

/// Total weight of a reference distribution.
pub fn total_weight(d: &RefDist) -> Rational {
    d.weights.iter().fold(Rational::zero(), |acc, (_, w)| acc + w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn deterministic_per_seed() {
        let b = Budget::default();
        let (i, j) = (gen_instance(7, &b), gen_instance(7, &b));
        assert_eq!(i.m1, j.m1);
        assert_eq!(i.pc2, j.pc2);
        assert_ne!(gen_instance(8, &b).pc1, i.pc1);
    }

    #[test]
    fn instances_respect_budget_and_preconditions() {
        let b = Budget::default();
        for seed in 0..200 {
            let i = gen_instance(seed, &b);
            let all = super::super::reference::compose_ports(&i.pc1.contract.ports, &i.pc2.contract.ports)
                .expect("controlled sets are disjoint");
            assert!(all.len() <= 6);
            let runs: u128 = all.values().map(|(p, _)| (p.arity() as u128).pow(i.m1.horizon as u32)).product();
            assert!(runs <= b.max_runs as u128);
            assert_eq!(total_weight(&i.pc1.dist), Rational::one());
            for p in i.pc1.dist.ports.iter().chain(&i.pc2.dist.ports) {
                assert_eq!(all[p.name()].1, Role::Uncontrolled);
            }
            assert!(i.pc1.dist.ports.iter().all(|p| !i.pc2.dist.ports.contains(p)));
        }
    }

    #[test]
    fn degenerate_budget_still_yields_instances() {
        let b = Budget { extra_ports: 0, max_horizon: 1, max_domain: 2, max_runs: 4 };
        let i = gen_instance(3, &b);
        assert_eq!(i.pc1.contract.ports.len(), 1);
        assert_eq!(i.pc2.contract.ports.len(), 1);
        let r = gen_refinement(3, &b, false);
        assert_eq!(r.pc2.contract.ports.len(), 1);
    }

    #[test]
    fn budget_parsing() {
        assert_eq!("".parse::<Budget>().unwrap(), Budget::default());
        let b: Budget = "ports=1, h=2".parse().unwrap();
        assert_eq!((b.extra_ports, b.max_horizon, b.max_domain), (1, 2, 3));
        assert!("h=0".parse::<Budget>().is_err());
        assert!("size=3".parse::<Budget>().is_err());
        assert_eq!(Budget::default().to_string().parse::<Budget>().unwrap(), Budget::default());
    }
}
