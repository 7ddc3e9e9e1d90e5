//! Finite-trace universe: ports, signatures, histories, runs and the
//! assertion algebra.
//!
//! A run over a signature at horizon `T` assigns one length-`T` history to
//! every port. Runs are identified with their canonical index: a
//! little-endian mixed-radix number whose digits are the `(port, step)`
//! values, ports in lexicographic name order, steps ascending within a port.
//! Digit `k = port_position * T + step` has radix `|domain(port)|`, so the
//! first step of the first port is the least significant digit. Assertions
//! store their run sets as exact bitmaps over that index space.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use bitvec::prelude::*;

use crate::error::{Error, Result};

/// Default upper bound on the number of runs any single space may hold.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

static ENUMERATION_CAP: AtomicU64 = AtomicU64::new(DEFAULT_ENUMERATION_CAP);

/// Current enumeration cap, shared by every space constructed afterwards.
pub fn enumeration_cap() -> u64 {
    ENUMERATION_CAP.load(Ordering::Relaxed)
}

pub fn set_enumeration_cap(cap: u64) {
    ENUMERATION_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// Index of a value inside its port's domain.
pub type Value = u16;

/// One port's values over the horizon.
pub type History = Vec<Value>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Port {
    name: String,
    domain: Vec<String>,
}

impl Port {
    pub fn new(name: impl Into<String>, domain: Vec<String>) -> Result<Self> {
        let name = name.into();
        let mut seen = domain.clone();
        seen.sort();
        seen.dedup();
        if domain.is_empty() || seen.len() != domain.len() || domain.len() > Value::MAX as usize {
            return Err(Error::InvalidDomain(name));
        }
        Ok(Port { name, domain })
    }

    /// A port over `{false, true}`, in that order.
    pub fn boolean(name: impl Into<String>) -> Self {
        Port { name: name.into(), domain: vec!["false".into(), "true".into()] }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn arity(&self) -> usize {
        self.domain.len()
    }

    pub fn is_boolean(&self) -> bool {
        self.domain.len() == 2 && self.domain[0] == "false" && self.domain[1] == "true"
    }

    pub fn value_of(&self, label: &str) -> Option<Value> {
        self.domain.iter().position(|v| v == label).map(|i| i as Value)
    }

    pub fn label(&self, value: Value) -> &str {
        &self.domain[value as usize]
    }

    pub fn renamed(&self, name: impl Into<String>) -> Port {
        Port { name: name.into(), domain: self.domain.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Controlled,
    Uncontrolled,
}

/// A set of ports partitioned into controlled and uncontrolled ones, kept in
/// lexicographic name order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    entries: Vec<(Port, Role)>,
}

impl Signature {
    pub fn new(entries: impl IntoIterator<Item = (Port, Role)>) -> Result<Self> {
        let mut entries: Vec<(Port, Role)> = entries.into_iter().collect();
        entries.sort_by(|a, b| a.0.name.cmp(&b.0.name));
        if let Some(w) = entries.windows(2).find(|w| w[0].0.name == w[1].0.name) {
            return Err(Error::DuplicatePort(w[0].0.name.clone()));
        }
        Ok(Signature { entries })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn uniform(ports: impl IntoIterator<Item = Port>, role: Role) -> Result<Self> {
        Signature::new(ports.into_iter().map(|p| (p, role)))
    }

    pub fn entries(&self) -> &[(Port, Role)] {
        &self.entries
    }

    pub fn ports(&self) -> impl Iterator<Item = &Port> + '_ {
        self.entries.iter().map(|(p, _)| p)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|(p, _)| p.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.binary_search_by(|(p, _)| p.name.as_str().cmp(name)).ok()
    }

    pub fn get(&self, name: &str) -> Option<(&Port, Role)> {
        self.position(name).map(|i| (&self.entries[i].0, self.entries[i].1))
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.get(name).map(|(p, _)| p)
    }

    pub fn role(&self, name: &str) -> Option<Role> {
        self.get(name).map(|(_, r)| r)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn controlled(&self) -> impl Iterator<Item = &Port> + '_ {
        self.entries.iter().filter(|(_, r)| *r == Role::Controlled).map(|(p, _)| p)
    }

    pub fn uncontrolled(&self) -> impl Iterator<Item = &Port> + '_ {
        self.entries.iter().filter(|(_, r)| *r == Role::Uncontrolled).map(|(p, _)| p)
    }

    /// Checks that every port of `sub` is present here with the same domain,
    /// and with the same role when `check_roles` is set.
    pub fn check_covers(&self, sub: &Signature, check_roles: bool) -> Result<()> {
        for (port, role) in &sub.entries {
            match self.get(&port.name) {
                None => {
                    return Err(Error::SignatureMismatch(format!(
                        "port `{}` is missing from the target signature",
                        port.name
                    )))
                }
                Some((p, _)) if p.domain != port.domain => {
                    return Err(Error::DomainConflict(port.name.clone()))
                }
                Some((_, r)) if check_roles && r != *role => {
                    return Err(Error::RoleConflict(port.name.clone()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn covers(&self, sub: &Signature) -> bool {
        self.check_covers(sub, true).is_ok()
    }

    fn merge(&self, other: &Signature, mut pick: impl FnMut(&Port, Role, Role) -> Result<Role>) -> Result<Self> {
        let mut map: BTreeMap<&str, (Port, Role)> =
            self.entries.iter().map(|(p, r)| (p.name.as_str(), (p.clone(), *r))).collect();
        for (port, role) in &other.entries {
            match map.get_mut(port.name.as_str()) {
                None => {
                    map.insert(port.name.as_str(), (port.clone(), *role));
                }
                Some((p, r)) => {
                    if p.domain != port.domain {
                        return Err(Error::DomainConflict(port.name.clone()));
                    }
                    *r = pick(port, *r, *role)?;
                }
            }
        }
        Ok(Signature { entries: map.into_values().collect() })
    }

    /// Union of two signatures whose shared ports agree on domain and role.
    pub fn union(&self, other: &Signature) -> Result<Self> {
        self.merge(other, |p, a, b| if a == b { Ok(a) } else { Err(Error::RoleConflict(p.name.clone())) })
    }

    /// Union used by parallel composition: a port controlled on either side
    /// is controlled in the result; no port may be controlled on both sides.
    pub fn compose(&self, other: &Signature) -> Result<Self> {
        self.merge(other, |p, a, b| match (a, b) {
            (Role::Controlled, Role::Controlled) => Err(Error::ControlledOverlap(p.name.clone())),
            (Role::Uncontrolled, Role::Uncontrolled) => Ok(Role::Uncontrolled),
            _ => Ok(Role::Controlled),
        })
    }

    /// Union where shared ports keep the role they have in `self`.
    pub fn overlay(&self, other: &Signature) -> Result<Self> {
        self.merge(other, |_, a, _| Ok(a))
    }

    pub fn restrict<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut entries = Vec::new();
        for name in names {
            let (p, r) = self.get(name).ok_or_else(|| {
                Error::SignatureMismatch(format!("port `{name}` is not in the signature"))
            })?;
            entries.push((p.clone(), r));
        }
        Signature::new(entries)
    }

    pub fn with_role(&self, name: &str, role: Role) -> Self {
        let mut sig = self.clone();
        if let Some(i) = sig.position(name) {
            sig.entries[i].1 = role;
        }
        sig
    }

    pub fn renamed(&self, from: &str, to: &str) -> Result<Self> {
        if from == to {
            return Ok(self.clone());
        }
        if self.contains(to) {
            return Err(Error::NameClash(to.to_string()));
        }
        Signature::new(self.entries.iter().map(|(p, r)| {
            if p.name == from { (p.renamed(to), *r) } else { (p.clone(), *r) }
        }))
    }

    /// Same port names and domains, roles ignored.
    pub fn same_ports(&self, other: &Signature) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|((a, _), (b, _))| a == b)
    }

    pub fn universe_size(&self, horizon: Horizon) -> u128 {
        self.entries
            .iter()
            .try_fold(1u128, |acc, (p, _)| {
                (0..horizon.steps()).try_fold(acc, |acc, _| acc.checked_mul(p.arity() as u128))
            })
            .unwrap_or(u128::MAX)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |role: Role| {
            self.entries.iter().filter(|(_, r)| *r == role).map(|(p, _)| p.name.as_str()).collect::<Vec<_>>().join(", ")
        };
        write!(f, "(controlled {}; uncontrolled {})", list(Role::Controlled), list(Role::Uncontrolled))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Horizon(usize);

impl Horizon {
    pub fn new(steps: usize) -> Result<Self> {
        if steps == 0 {
            Err(Error::ZeroHorizon)
        } else {
            Ok(Horizon(steps))
        }
    }

    pub fn steps(self) -> usize {
        self.0
    }
}

/// One history per port of some signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Run {
    histories: BTreeMap<String, History>,
}

impl Run {
    pub fn new() -> Self {
        Run::default()
    }

    pub fn with(mut self, port: impl Into<String>, history: History) -> Self {
        self.histories.insert(port.into(), history);
        self
    }

    pub fn insert(&mut self, port: impl Into<String>, history: History) {
        self.histories.insert(port.into(), history);
    }

    pub fn history(&self, port: &str) -> Option<&History> {
        self.histories.get(port)
    }

    pub fn histories(&self) -> &BTreeMap<String, History> {
        &self.histories
    }

    pub fn restrict<'a>(&self, ports: impl IntoIterator<Item = &'a str>) -> Run {
        let histories = ports
            .into_iter()
            .filter_map(|p| self.histories.get(p).map(|h| (p.to_string(), h.clone())))
            .collect();
        Run { histories }
    }
}

/// The index space of all runs over a signature at a horizon.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    signature: Signature,
    horizon: Horizon,
    size: u64,
}

impl Space {
    pub fn new(signature: Signature, horizon: Horizon) -> Result<Self> {
        let cap = enumeration_cap();
        let runs = signature.universe_size(horizon);
        if runs > cap as u128 {
            return Err(Error::Capacity { runs, cap });
        }
        Ok(Space { signature, horizon, size: runs as u64 })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    fn digit_count(&self) -> usize {
        self.signature.len() * self.horizon.0
    }

    fn radix(&self, digit: usize) -> u64 {
        self.signature.entries[digit / self.horizon.0].0.arity() as u64
    }

    fn weights(&self) -> Vec<u64> {
        let mut acc = 1u64;
        (0..self.digit_count())
            .map(|k| {
                let w = acc;
                acc *= self.radix(k);
                w
            })
            .collect()
    }

    /// Digits of a run index, in `(port, step)` order.
    pub fn digits(&self, mut index: u64) -> Vec<Value> {
        (0..self.digit_count())
            .map(|k| {
                let r = self.radix(k);
                let d = index % r;
                index /= r;
                d as Value
            })
            .collect()
    }

    pub fn encode(&self, run: &Run) -> Result<u64> {
        if run.histories.len() != self.signature.len() {
            return Err(Error::SignatureMismatch("run does not assign exactly the signature's ports".into()));
        }
        let mut index = 0u64;
        let mut weight = 1u64;
        for (port, _) in &self.signature.entries {
            let history = run.history(&port.name).ok_or_else(|| {
                Error::SignatureMismatch(format!("run has no history for `{}`", port.name))
            })?;
            if history.len() != self.horizon.0 {
                return Err(Error::HorizonMismatch { left: history.len(), right: self.horizon.0 });
            }
            for &v in history {
                if v as usize >= port.arity() {
                    return Err(Error::UnknownValue { port: port.name.clone(), value: v.to_string() });
                }
                index += v as u64 * weight;
                weight *= port.arity() as u64;
            }
        }
        Ok(index)
    }

    pub fn decode(&self, index: u64) -> Run {
        let digits = self.digits(index);
        let steps = self.horizon.0;
        let histories = self
            .signature
            .entries
            .iter()
            .enumerate()
            .map(|(i, (p, _))| (p.name.clone(), digits[i * steps..(i + 1) * steps].to_vec()))
            .collect();
        Run { histories }
    }

    /// Iterates every index of `self` in order, yielding the index of its
    /// restriction to `target`. `rename` maps port names of `self` to port
    /// names of `target`; ports absent from `target` are dropped.
    pub(crate) fn restriction(&self, target: &Space, rename: impl Fn(&str) -> String) -> Restriction {
        let steps = self.horizon.0;
        let target_weights = target.weights();
        let mut radix = Vec::with_capacity(self.digit_count());
        let mut weight = Vec::with_capacity(self.digit_count());
        for (port, _) in &self.signature.entries {
            let mapped = target.signature.position(&rename(&port.name));
            for t in 0..steps {
                radix.push(port.arity() as u64);
                weight.push(mapped.map_or(0, |j| target_weights[j * steps + t]));
            }
        }
        Restriction { digits: vec![0; radix.len()], radix, weight, current: 0, remaining: self.size }
    }
}

/// Odometer over a space's indices that tracks the restricted index.
pub(crate) struct Restriction {
    radix: Vec<u64>,
    weight: Vec<u64>,
    digits: Vec<u64>,
    current: u64,
    remaining: u64,
}

impl Iterator for Restriction {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.current;
        for k in 0..self.radix.len() {
            self.digits[k] += 1;
            self.current += self.weight[k];
            if self.digits[k] < self.radix[k] {
                break;
            }
            self.current -= self.weight[k] * self.radix[k];
            self.digits[k] = 0;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}

/// A set of runs over a signature: `S::σ`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assertion {
    space: Space,
    bits: BitVec<u64, Lsb0>,
}

impl fmt::Debug for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Assertion({} runs of {} over {})", self.len(), self.space.size, self.space.signature)
    }
}

impl Assertion {
    pub fn empty(signature: Signature, horizon: Horizon) -> Result<Self> {
        let space = Space::new(signature, horizon)?;
        let bits = bitvec![u64, Lsb0; 0; space.size as usize];
        Ok(Assertion { space, bits })
    }

    /// Every well-formed run over the signature.
    pub fn universe(signature: Signature, horizon: Horizon) -> Result<Self> {
        let mut a = Assertion::empty(signature, horizon)?;
        a.bits.fill(true);
        Ok(a)
    }

    pub fn from_indices(signature: Signature, horizon: Horizon, indices: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut a = Assertion::empty(signature, horizon)?;
        for i in indices {
            if i >= a.space.size {
                return Err(Error::SignatureMismatch(format!("run index {i} is outside the universe")));
            }
            a.bits.set(i as usize, true);
        }
        Ok(a)
    }

    pub fn from_runs<'r>(signature: Signature, horizon: Horizon, runs: impl IntoIterator<Item = &'r Run>) -> Result<Self> {
        let mut a = Assertion::empty(signature, horizon)?;
        for run in runs {
            let i = a.space.encode(run)?;
            a.bits.set(i as usize, true);
        }
        Ok(a)
    }

    /// Runs whose digit vector (see [`Space::digits`]) satisfies `keep`.
    pub fn from_digits(signature: Signature, horizon: Horizon, mut keep: impl FnMut(&[Value]) -> bool) -> Result<Self> {
        let mut a = Assertion::empty(signature, horizon)?;
        let n = a.space.digit_count();
        let radix: Vec<u64> = (0..n).map(|k| a.space.radix(k)).collect();
        let mut digits = vec![0 as Value; n];
        for i in 0..a.space.size as usize {
            if keep(&digits) {
                a.bits.set(i, true);
            }
            for k in 0..n {
                digits[k] += 1;
                if (digits[k] as u64) < radix[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(a)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn signature(&self) -> &Signature {
        &self.space.signature
    }

    pub fn horizon(&self) -> Horizon {
        self.space.horizon
    }

    pub(crate) fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    /// Number of runs.
    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn is_universe(&self) -> bool {
        self.bits.all()
    }

    pub fn contains_index(&self, index: u64) -> bool {
        index < self.space.size && self.bits[index as usize]
    }

    pub fn contains(&self, run: &Run) -> bool {
        self.space.encode(run).map(|i| self.bits[i as usize]).unwrap_or(false)
    }

    /// Canonical indices of the member runs, ascending.
    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter_ones().map(|i| i as u64)
    }

    pub fn runs(&self) -> impl Iterator<Item = Run> + '_ {
        self.indices().map(|i| self.space.decode(i))
    }

    /// Membership bitmap, little-endian bit order, `ceil(|universe| / 8)` bytes.
    pub fn to_bitmap(&self) -> Vec<u8> {
        let mut out = vec![0u8; (self.space.size as usize).div_ceil(8)];
        for i in self.bits.iter_ones() {
            out[i / 8] |= 1 << (i % 8);
        }
        out
    }

    pub fn from_bitmap(signature: Signature, horizon: Horizon, bytes: &[u8]) -> Result<Self> {
        let mut a = Assertion::empty(signature, horizon)?;
        let n = a.space.size as usize;
        if bytes.len() != n.div_ceil(8) {
            return Err(Error::SignatureMismatch(format!("bitmap has {} bytes, expected {}", bytes.len(), n.div_ceil(8))));
        }
        for i in 0..n {
            if bytes[i / 8] >> (i % 8) & 1 == 1 {
                a.bits.set(i, true);
            }
        }
        if !n.is_multiple_of(8) && bytes[n / 8] >> (n % 8) != 0 {
            return Err(Error::SignatureMismatch("bitmap has bits set beyond the universe".into()));
        }
        Ok(a)
    }

    fn check_same_space(&self, other: &Assertion) -> Result<()> {
        if self.space.horizon != other.space.horizon {
            return Err(Error::HorizonMismatch { left: self.space.horizon.0, right: other.space.horizon.0 });
        }
        if !self.space.signature.same_ports(&other.space.signature) {
            return Err(Error::SignatureMismatch(format!(
                "{} and {} differ",
                self.space.signature, other.space.signature
            )));
        }
        Ok(())
    }

    /// Set intersection of two assertions over the same ports.
    pub fn intersect(&self, other: &Assertion) -> Result<Self> {
        self.check_same_space(other)?;
        let mut bits = self.bits.clone();
        bits &= &other.bits;
        Ok(Assertion { space: self.space.clone(), bits })
    }

    pub fn union(&self, other: &Assertion) -> Result<Self> {
        self.check_same_space(other)?;
        let mut bits = self.bits.clone();
        bits |= &other.bits;
        Ok(Assertion { space: self.space.clone(), bits })
    }

    pub fn difference(&self, other: &Assertion) -> Result<Self> {
        self.check_same_space(other)?;
        let mut bits = other.bits.clone();
        bits = !bits;
        bits &= &self.bits;
        Ok(Assertion { space: self.space.clone(), bits })
    }

    pub fn is_subset(&self, other: &Assertion) -> Result<bool> {
        self.check_same_space(other)?;
        Ok(self.bits.iter_ones().all(|i| other.bits[i]))
    }

    /// `¬E`, relative to the assertion's own signature.
    pub fn complement(&self) -> Self {
        Assertion { space: self.space.clone(), bits: !self.bits.clone() }
    }

    /// Inverse projection `E↑σ'`: every run over `target` whose restriction
    /// to this assertion's ports is a member.
    pub fn lift(&self, target: &Signature) -> Result<Self> {
        target.check_covers(self.signature(), true)?;
        self.lift_ports(target)
    }

    /// Like [`Assertion::lift`], but shared ports may change role. Contract
    /// composition relies on this when one side's input becomes the other
    /// side's output.
    pub fn lift_ports(&self, target: &Signature) -> Result<Self> {
        target.check_covers(self.signature(), false)?;
        let space = Space::new(target.clone(), self.space.horizon)?;
        let bits = space.restriction(&self.space, str::to_string).map(|j| self.bits[j as usize]).collect();
        Ok(Assertion { space, bits })
    }

    /// Image of the run set under restriction to `target`'s ports.
    pub fn project(&self, target: &Signature) -> Result<Self> {
        self.signature().check_covers(target, false)?;
        let mut out = Assertion::empty(target.clone(), self.space.horizon)?;
        for (i, j) in self.space.restriction(&out.space, str::to_string).enumerate() {
            if self.bits[i] {
                out.bits.set(j as usize, true);
            }
        }
        Ok(out)
    }

    /// `E₁ × E₂`: intersection after lifting both to the union signature.
    /// Shared ports must agree on domain and role.
    pub fn product(&self, other: &Assertion) -> Result<Self> {
        if self.horizon() != other.horizon() {
            return Err(Error::HorizonMismatch { left: self.horizon().0, right: other.horizon().0 });
        }
        let sig = self.signature().union(other.signature())?;
        self.lift(&sig)?.intersect(&other.lift(&sig)?)
    }

    /// Same run set under a signature with the same ports but other roles.
    pub fn relabel(&self, signature: &Signature) -> Result<Self> {
        if !self.signature().same_ports(signature) {
            return Err(Error::SignatureMismatch(format!("cannot relabel {} as {}", self.signature(), signature)));
        }
        let space = Space { signature: signature.clone(), ..self.space.clone() };
        Ok(Assertion { space, bits: self.bits.clone() })
    }

    pub fn rename(&self, from: &str, to: &str) -> Result<Self> {
        let signature = self.signature().renamed(from, to)?;
        let space = Space::new(signature, self.space.horizon)?;
        let bits = space
            .restriction(&self.space, |n| if n == to { from.to_string() } else { n.to_string() })
            .map(|j| self.bits[j as usize])
            .collect();
        Ok(Assertion { space, bits })
    }
}

/// `e1 ⊆^σ e2`: inclusion after lifting both sides to `sig`.
pub fn included_in(e1: &Assertion, e2: &Assertion, sig: &Signature) -> Result<bool> {
    e1.lift_ports(sig)?.is_subset(&e2.lift_ports(sig)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bools(names: &[&str]) -> Signature {
        Signature::uniform(names.iter().map(|n| Port::boolean(*n)), Role::Uncontrolled).unwrap()
    }

    fn h(n: usize) -> Horizon {
        Horizon::new(n).unwrap()
    }

    fn run(pairs: &[(&str, &[Value])]) -> Run {
        pairs.iter().fold(Run::new(), |r, (p, v)| r.with(*p, v.to_vec()))
    }

    #[test]
    fn universe_sizes() {
        assert_eq!(Assertion::universe(bools(&["a"]), h(2)).unwrap().len(), 4);
        assert_eq!(Assertion::universe(bools(&["a", "b"]), h(1)).unwrap().len(), 4);
        let x = Port::new("x", vec!["0".into(), "1".into(), "2".into()]).unwrap();
        let sig = Signature::uniform([x], Role::Uncontrolled).unwrap();
        assert_eq!(Assertion::universe(sig, h(3)).unwrap().len(), 27);
    }

    #[test]
    fn universe_histories_in_canonical_order() {
        let u = Assertion::universe(bools(&["a"]), h(2)).unwrap();
        let hs: Vec<History> = u.runs().map(|r| r.history("a").unwrap().clone()).collect();
        assert_eq!(hs, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn capacity_is_enforced_before_allocating() {
        let names: Vec<String> = (0..30).map(|i| format!("p{i:02}")).collect();
        let sig = Signature::uniform(names.iter().map(Port::boolean), Role::Uncontrolled).unwrap();
        assert!(matches!(Assertion::universe(sig, h(1)), Err(Error::Capacity { .. })));
    }

    #[test]
    fn invalid_ports_and_signatures() {
        assert!(Port::new("p", vec![]).is_err());
        assert!(Port::new("p", vec!["a".into(), "a".into()]).is_err());
        assert!(matches!(
            Signature::uniform([Port::boolean("a"), Port::boolean("a")], Role::Controlled),
            Err(Error::DuplicatePort(_))
        ));
        assert!(Horizon::new(0).is_err());
    }

    #[test]
    fn lift_is_free_extension() {
        let e = Assertion::from_runs(bools(&["a"]), h(1), &[run(&[("a", &[1])])]).unwrap();
        let lifted = e.lift(&bools(&["a", "b"])).unwrap();
        let runs: Vec<Run> = lifted.runs().collect();
        assert_eq!(runs, vec![run(&[("a", &[1]), ("b", &[0])]), run(&[("a", &[1]), ("b", &[1])])]);
        assert_eq!(e.lift(e.signature()).unwrap(), e);
        let empty = Assertion::empty(bools(&["a"]), h(2)).unwrap();
        assert!(empty.lift(&bools(&["a", "b", "c"])).unwrap().is_empty());
    }

    #[test]
    fn lift_rejects_bad_targets() {
        let e = Assertion::universe(bools(&["a", "b"]), h(1)).unwrap();
        assert!(matches!(e.lift(&bools(&["a"])), Err(Error::SignatureMismatch(_))));
        let other = Signature::uniform([Port::new("a", vec!["x".into()]).unwrap(), Port::boolean("b")], Role::Uncontrolled).unwrap();
        assert!(matches!(e.lift(&other), Err(Error::DomainConflict(_))));
        let relabeled = bools(&["a", "b"]).with_role("a", Role::Controlled);
        assert!(matches!(e.lift(&relabeled), Err(Error::RoleConflict(_))));
        assert!(e.lift_ports(&relabeled).is_ok());
    }

    #[test]
    fn projection_is_image() {
        let e = Assertion::from_runs(
            bools(&["a", "b"]),
            h(1),
            &[run(&[("a", &[1]), ("b", &[0])]), run(&[("a", &[1]), ("b", &[1])])],
        )
        .unwrap();
        let p = e.project(&bools(&["a"])).unwrap();
        assert_eq!(p.runs().collect::<Vec<_>>(), vec![run(&[("a", &[1])])]);
        let u = Assertion::universe(bools(&["a", "b", "c"]), h(2)).unwrap();
        assert_eq!(u.project(&bools(&["b"])).unwrap(), Assertion::universe(bools(&["b"]), h(2)).unwrap());
    }

    #[test]
    fn complement_cases() {
        let u = Assertion::universe(bools(&["a"]), h(1)).unwrap();
        assert!(u.complement().is_empty());
        let e = Assertion::from_runs(bools(&["a"]), h(1), &[run(&[("a", &[1])])]).unwrap();
        assert_eq!(e.complement().runs().collect::<Vec<_>>(), vec![run(&[("a", &[0])])]);
        assert_eq!(e.complement().complement(), e);
        // Bits past the universe never leak into set operations.
        let x = Port::new("x", vec!["0".into(), "1".into(), "2".into()]).unwrap();
        let sig = Signature::uniform([x], Role::Uncontrolled).unwrap();
        assert_eq!(Assertion::empty(sig, h(1)).unwrap().complement().len(), 3);
    }

    #[test]
    fn product_cases() {
        let e1 = Assertion::from_runs(bools(&["a"]), h(1), &[run(&[("a", &[1])])]).unwrap();
        let e2 = Assertion::from_runs(bools(&["b"]), h(1), &[run(&[("b", &[0])])]).unwrap();
        let p = e1.product(&e2).unwrap();
        assert_eq!(p.runs().collect::<Vec<_>>(), vec![run(&[("a", &[1]), ("b", &[0])])]);
        let u = Assertion::universe(bools(&["a"]), h(1)).unwrap();
        assert_eq!(e1.product(&u).unwrap(), e1);
        assert!(e1.product(&e1.complement()).unwrap().is_empty());
        let controlled = e2.relabel(&bools(&["b"]).with_role("b", Role::Controlled)).unwrap();
        let e3 = Assertion::universe(bools(&["b"]), h(1)).unwrap();
        assert!(matches!(controlled.product(&e3), Err(Error::RoleConflict(_))));
    }

    #[test]
    fn inclusion_cases() {
        let sig = bools(&["a", "b"]);
        let e1 = Assertion::from_runs(bools(&["a"]), h(1), &[run(&[("a", &[1])])]).unwrap();
        let e2 = Assertion::from_runs(sig.clone(), h(1), &[run(&[("a", &[1]), ("b", &[0])])]).unwrap();
        let empty = Assertion::empty(bools(&["a"]), h(1)).unwrap();
        let u = Assertion::universe(sig.clone(), h(1)).unwrap();
        assert!(included_in(&empty, &e2, &sig).unwrap());
        assert!(included_in(&e1, &u, &sig).unwrap());
        assert!(!included_in(&e1, &e2, &sig).unwrap());
        assert!(included_in(&e2, &e1, &sig).unwrap());
        assert!(included_in(&e1, &e2, &bools(&["a"])).is_err());
    }

    #[test]
    fn rename_moves_histories() {
        let e = Assertion::from_runs(bools(&["a", "b"]), h(2), &[run(&[("a", &[1, 0]), ("b", &[0, 1])])]).unwrap();
        let r = e.rename("a", "z").unwrap();
        assert_eq!(r.runs().collect::<Vec<_>>(), vec![run(&[("b", &[0, 1]), ("z", &[1, 0])])]);
        assert!(matches!(e.rename("a", "b"), Err(Error::NameClash(_))));
    }

    #[test]
    fn bitmap_round_trip() {
        let x = Port::new("x", vec!["i".into(), "r".into(), "f".into()]).unwrap();
        let sig = Signature::new([(x, Role::Controlled), (Port::boolean("a"), Role::Uncontrolled)]).unwrap();
        let e = Assertion::from_indices(sig.clone(), h(2), [0, 5, 17, 35]).unwrap();
        let bytes = e.to_bitmap();
        assert_eq!(bytes.len(), 5);
        assert_eq!(Assertion::from_bitmap(sig, h(2), &bytes).unwrap(), e);
    }
}
