//! Resolution and denotation: turns a [`Document`] into engine values.
//!
//! A formula is read at a step `t`; the top level is step 0. `always`,
//! `never` and `eventually` range over `t..h`, `at(k, φ)` jumps to step
//! `k`, and `prev(x init v)` is `v` at step 0 and `x` one step earlier
//! otherwise.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::{Diagnostic, DiagnosticKind};
use crate::contracts::{Contract, Implementation};
use crate::probabilistic::{Distribution, ProbContract};
use crate::traces::{Assertion, History, Horizon, Port, Role, Run, Signature, Value};

type LResult<T> = Result<T, Diagnostic>;

fn semantic(span: Span, msg: impl ToString) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::Semantic, span, msg.to_string())
}

fn resolution(span: Span, msg: impl ToString) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::Resolution, span, msg.to_string())
}

/// A lowered formula over the digit layout of one signature.
#[derive(Debug)]
enum Formula {
    Const(bool),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
    At(usize, Box<Formula>),
    Cmp(bool, Operand, Operand),
}

#[derive(Debug)]
enum Operand {
    /// First digit of the port's history, and the `init` value for `prev`.
    Port { base: usize, prev: Option<Value> },
    Value(Value),
    Formula(Box<Formula>),
}

fn eval(f: &Formula, d: &[Value], t: usize, h: usize) -> bool {
    match f {
        Formula::Const(b) => *b,
        Formula::Not(a) => !eval(a, d, t, h),
        Formula::And(a, b) => eval(a, d, t, h) && eval(b, d, t, h),
        Formula::Or(a, b) => eval(a, d, t, h) || eval(b, d, t, h),
        Formula::Implies(a, b) => !eval(a, d, t, h) || eval(b, d, t, h),
        Formula::Always(a) => (t..h).all(|s| eval(a, d, s, h)),
        Formula::Eventually(a) => (t..h).any(|s| eval(a, d, s, h)),
        Formula::At(k, a) => eval(a, d, *k, h),
        Formula::Cmp(eq, l, r) => (value(l, d, t, h) == value(r, d, t, h)) == *eq,
    }
}

fn value(o: &Operand, d: &[Value], t: usize, h: usize) -> Value {
    match o {
        Operand::Port { base, prev: None } => d[base + t],
        Operand::Port { base, prev: Some(init) } => {
            if t == 0 {
                *init
            } else {
                d[base + t - 1]
            }
        }
        Operand::Value(v) => *v,
        Operand::Formula(f) => eval(f, d, t, h) as Value,
    }
}

struct Scope<'a> {
    sig: &'a Signature,
    horizon: Horizon,
    /// Every declared port; names outside `sig` are reported as such.
    declared: &'a BTreeMap<String, Port>,
    predicates: &'a HashMap<String, &'a Expr>,
}

/// What a comparison side turned out to be.
enum Typed {
    Known(Operand, Vec<String>),
    Label(Ident, bool),
}

impl Scope<'_> {
    fn port(&self, id: &Ident) -> LResult<(usize, &Port)> {
        match self.sig.position(&id.name) {
            Some(pos) => Ok((pos * self.horizon.steps(), self.sig.port(&id.name).unwrap())),
            None if self.declared.contains_key(&id.name) => {
                Err(resolution(id.span, format!("port `{}` is not in the signature {}", id.name, self.sig)))
            }
            None => Err(resolution(id.span, format!("undefined port `{}`", id.name))),
        }
    }

    fn is_port(&self, name: &str) -> bool {
        self.sig.contains(name) || self.declared.contains_key(name)
    }

    fn lower(&self, e: &Expr, stack: &mut Vec<String>) -> LResult<Formula> {
        let b = |f: Formula| Box::new(f);
        Ok(match e {
            Expr::Const(v) => Formula::Const(*v),
            Expr::Not(a) => Formula::Not(b(self.lower(a, stack)?)),
            Expr::And(x, y) => Formula::And(b(self.lower(x, stack)?), b(self.lower(y, stack)?)),
            Expr::Or(x, y) => Formula::Or(b(self.lower(x, stack)?), b(self.lower(y, stack)?)),
            Expr::Implies(x, y) => Formula::Implies(b(self.lower(x, stack)?), b(self.lower(y, stack)?)),
            Expr::Temporal(Temporal::Always, a) => Formula::Always(b(self.lower(a, stack)?)),
            Expr::Temporal(Temporal::Never, a) => Formula::Always(b(Formula::Not(b(self.lower(a, stack)?)))),
            Expr::Temporal(Temporal::Eventually, a) => Formula::Eventually(b(self.lower(a, stack)?)),
            Expr::At(k, span, a) => {
                if *k >= self.horizon.steps() {
                    return Err(semantic(*span, format!("step {k} is outside the horizon of {} steps", self.horizon.steps())));
                }
                Formula::At(*k, b(self.lower(a, stack)?))
            }
            Expr::Atom(t) => match self.typed(t, stack)? {
                Typed::Known(op, domain) => {
                    if !is_bool(&domain) {
                        return Err(semantic(term_span(t), format!("`{}` is not boolean", term_name(t))));
                    }
                    Formula::Cmp(true, op, Operand::Value(1))
                }
                Typed::Label(id, _) => return Err(resolution(id.span, format!("undefined name `{}`", id.name))),
            },
            Expr::Cmp(op, l, r) => {
                let eq = *op == CmpOp::Eq;
                match (self.typed(l, stack)?, self.typed(r, stack)?) {
                    (Typed::Known(a, da), Typed::Known(b, db)) => {
                        if da != db {
                            return Err(semantic(
                                term_span(l),
                                format!("cannot compare `{}` with `{}`: their domains differ", term_name(l), term_name(r)),
                            ));
                        }
                        Formula::Cmp(eq, a, b)
                    }
                    (Typed::Known(a, d), Typed::Label(id, lit)) | (Typed::Label(id, lit), Typed::Known(a, d)) => {
                        Formula::Cmp(eq, a, Operand::Value(label_value(&d, &id, lit)?))
                    }
                    (Typed::Label(id, false), _) | (_, Typed::Label(id, false)) => {
                        return Err(resolution(id.span, format!("undefined name `{}`", id.name)))
                    }
                    (Typed::Label(id, true), _) => {
                        return Err(semantic(id.span, "a comparison needs at least one port or formula"))
                    }
                }
            }
        })
    }

    fn typed(&self, t: &Term, stack: &mut Vec<String>) -> LResult<Typed> {
        Ok(match t {
            Term::Name(id) if self.is_port(&id.name) => {
                let (base, port) = self.port(id)?;
                Typed::Known(Operand::Port { base, prev: None }, port.domain().to_vec())
            }
            Term::Name(id) => match self.predicates.get(&id.name) {
                Some(body) => {
                    if stack.contains(&id.name) {
                        return Err(semantic(id.span, format!("predicate `{}` refers to itself", id.name)));
                    }
                    stack.push(id.name.clone());
                    let f = self.lower(body, stack)?;
                    stack.pop();
                    Typed::Known(Operand::Formula(Box::new(f)), bool_domain())
                }
                None => Typed::Label(id.clone(), false),
            },
            Term::Literal(id) => Typed::Label(id.clone(), true),
            Term::Prev { port, init } => {
                let (base, p) = self.port(port)?;
                let init = label_value(p.domain(), init, true)?;
                Typed::Known(Operand::Port { base, prev: Some(init) }, p.domain().to_vec())
            }
            Term::Formula(e) => Typed::Known(Operand::Formula(Box::new(self.lower(e, stack)?)), bool_domain()),
        })
    }

    fn denote(&self, e: &Expr) -> LResult<Assertion> {
        let f = self.lower(e, &mut Vec::new())?;
        let h = self.horizon.steps();
        Assertion::from_digits(self.sig.clone(), self.horizon, |d| eval(&f, d, 0, h))
            .map_err(|err| semantic(Span::default(), err))
    }
}

fn bool_domain() -> Vec<String> {
    vec!["false".into(), "true".into()]
}

fn is_bool(domain: &[String]) -> bool {
    domain == bool_domain().as_slice()
}

fn label_value(domain: &[String], id: &Ident, literal: bool) -> LResult<Value> {
    match domain.iter().position(|l| *l == id.name) {
        Some(v) => Ok(v as Value),
        None if literal => Err(semantic(id.span, format!("value `{}` is not in the domain {{{}}}", id.name, domain.join(", ")))),
        None => Err(resolution(id.span, format!("undefined name `{}`", id.name))),
    }
}

fn term_span(t: &Term) -> Span {
    match t {
        Term::Name(i) | Term::Literal(i) => i.span,
        Term::Prev { port, .. } => port.span,
        Term::Formula(_) => Span::default(),
    }
}

fn term_name(t: &Term) -> String {
    match t {
        Term::Name(i) | Term::Literal(i) => i.name.clone(),
        Term::Prev { port, .. } => format!("prev({})", port.name),
        Term::Formula(e) => format!("({})", super::printer::expr(e)),
    }
}

/// The run set of `e` over `sig`. Names that are not ports of `sig` must be
/// value labels of the port they are compared with.
pub fn denote(e: &Expr, sig: &Signature, horizon: Horizon) -> Result<Assertion, Diagnostic> {
    let declared = BTreeMap::new();
    let predicates = HashMap::new();
    Scope { sig, horizon, declared: &declared, predicates: &predicates }.denote(e)
}

/// A loaded document: every declaration resolved and denoted.
#[derive(Clone, Debug)]
pub struct System {
    document: Document,
    horizon: Option<Horizon>,
    ports: BTreeMap<String, Port>,
    contracts: BTreeMap<String, Contract>,
    implementations: BTreeMap<String, Implementation>,
    prob_contracts: BTreeMap<String, ProbContract>,
}

impl System {
    pub fn document(&self) -> &Document {
        &self.document
    }

    pub fn horizon(&self) -> Option<Horizon> {
        self.horizon
    }

    pub fn ports(&self) -> &BTreeMap<String, Port> {
        &self.ports
    }

    pub fn contract(&self, name: &str) -> Option<&Contract> {
        self.contracts.get(name)
    }

    pub fn implementation(&self, name: &str) -> Option<&Implementation> {
        self.implementations.get(name)
    }

    pub fn prob_contract(&self, name: &str) -> Option<&ProbContract> {
        self.prob_contracts.get(name)
    }

    pub fn contracts(&self) -> &BTreeMap<String, Contract> {
        &self.contracts
    }

    pub fn implementations(&self) -> &BTreeMap<String, Implementation> {
        &self.implementations
    }

    pub fn prob_contracts(&self) -> &BTreeMap<String, ProbContract> {
        &self.prob_contracts
    }

    /// A probabilistic contract by name, or a plain contract viewed as one
    /// without probabilistic ports.
    pub fn any_prob_contract(&self, name: &str) -> Option<ProbContract> {
        self.prob_contracts
            .get(name)
            .cloned()
            .or_else(|| self.contracts.get(name).map(|c| ProbContract::deterministic(c.clone())))
    }

    pub fn from_document(document: Document) -> Result<Self, Diagnostic> {
        let doc = &document;
        let needs_horizon = !(doc.contracts.is_empty()
            && doc.impls.is_empty()
            && doc.dists.is_empty()
            && doc.ports.iter().all(|p| p.prob.is_none()));
        let horizon = match &doc.horizon {
            Some(h) => Some(Horizon::new(h.steps).map_err(|e| semantic(h.span, e))?),
            None if needs_horizon => return Err(semantic(Span::new(1, 1), "missing `horizon` declaration")),
            None => None,
        };

        let mut ports = BTreeMap::new();
        let mut default_roles = BTreeMap::new();
        for p in &doc.ports {
            let port = match &p.domain {
                Domain::Bool => Port::boolean(&p.name.name),
                Domain::Enum(labels) => Port::new(&p.name.name, labels.iter().map(|l| l.name.clone()).collect())
                    .map_err(|e| semantic(p.name.span, e))?,
            };
            ports.insert(p.name.name.clone(), port);
            let role = match p.role {
                Some(RoleDecl::Controlled) => Role::Controlled,
                _ => Role::Uncontrolled,
            };
            default_roles.insert(p.name.name.clone(), role);
        }
        let predicates: HashMap<String, &Expr> =
            doc.predicates.iter().map(|p| (p.name.name.clone(), &p.body)).collect();

        let mut sys = System {
            document: document.clone(),
            horizon,
            ports,
            contracts: BTreeMap::new(),
            implementations: BTreeMap::new(),
            prob_contracts: BTreeMap::new(),
        };
        let Some(horizon) = horizon else { return Ok(sys) };

        let env = Env { ports: &sys.ports, default_roles: &default_roles, predicates: &predicates, horizon };
        for p in &doc.predicates {
            // Check predicates even when unused, over the ports they mention.
            let sig = env.signature(&None, [&p.body])?;
            env.scope(&sig).denote(&p.body)?;
        }
        for c in &doc.contracts {
            let top = Expr::Const(true);
            let assume = c.assume.as_ref().unwrap_or(&top);
            let sig = env.signature(&c.header, [assume, &c.guarantee])?;
            let scope = env.scope(&sig);
            let contract = Contract::new(sig.clone(), &scope.denote(assume)?, &scope.denote(&c.guarantee)?)
                .map_err(|e| semantic(c.name.span, e))?;
            sys.contracts.insert(c.name.name.clone(), contract);
        }
        for i in &doc.impls {
            let sig = env.signature(&i.header, [&i.body])?;
            sys.implementations.insert(i.name.name.clone(), env.scope(&sig).denote(&i.body)?);
        }

        let mut port_dists = BTreeMap::new();
        for p in &doc.ports {
            if let Some(d) = &p.prob {
                port_dists.insert(p.name.name.clone(), env.port_dist(&sys.ports[&p.name.name], p, d)?);
            }
        }
        let mut dists = BTreeMap::new();
        for d in &doc.dists {
            dists.insert(d.name.name.clone(), env.joint_dist(d)?);
        }
        for pc in &doc.prob_contracts {
            let base = sys
                .contracts
                .get(&pc.contract.name)
                .ok_or_else(|| resolution(pc.contract.span, format!("undefined contract `{}`", pc.contract.name)))?;
            let dist = prob_dist(pc, &sys.ports, &port_dists, &dists, &doc.dists, horizon)?;
            let pcontract = ProbContract::new(base.clone(), dist).map_err(|e| semantic(pc.name.span, e))?;
            sys.prob_contracts.insert(pc.name.name.clone(), pcontract);
        }
        Ok(sys)
    }
}

struct Env<'a> {
    ports: &'a BTreeMap<String, Port>,
    default_roles: &'a BTreeMap<String, Role>,
    predicates: &'a HashMap<String, &'a Expr>,
    horizon: Horizon,
}

impl<'a> Env<'a> {
    fn scope<'s>(&'s self, sig: &'s Signature) -> Scope<'s> {
        Scope { sig, horizon: self.horizon, declared: self.ports, predicates: self.predicates }
    }

    /// Header ports with their listed roles plus every port the expressions
    /// mention, with its declared default role.
    fn signature<'e>(&self, header: &Option<Header>, exprs: impl IntoIterator<Item = &'e Expr>) -> LResult<Signature> {
        let mut roles: BTreeMap<String, Role> = BTreeMap::new();
        if let Some(h) = header {
            for (ids, role) in [(&h.controlled, Role::Controlled), (&h.uncontrolled, Role::Uncontrolled)] {
                for id in ids {
                    if !self.ports.contains_key(&id.name) {
                        return Err(resolution(id.span, format!("undefined port `{}`", id.name)));
                    }
                    if roles.insert(id.name.clone(), role).is_some() {
                        return Err(semantic(id.span, format!("port `{}` is listed twice", id.name)));
                    }
                }
            }
        }
        let mut mentioned = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for e in exprs {
            self.mentions(e, &mut mentioned, &mut seen);
        }
        for name in mentioned {
            roles.entry(name.clone()).or_insert(self.default_roles[&name]);
        }
        Signature::new(roles.into_iter().map(|(n, r)| (self.ports[&n].clone(), r)))
            .map_err(|e| semantic(Span::default(), e))
    }

    fn mentions(&self, e: &Expr, out: &mut BTreeSet<String>, seen: &mut BTreeSet<String>) {
        let term = |t: &Term, out: &mut BTreeSet<String>, seen: &mut BTreeSet<String>| match t {
            Term::Name(id) | Term::Prev { port: id, .. } => {
                if self.ports.contains_key(&id.name) {
                    out.insert(id.name.clone());
                } else if let Some(body) = self.predicates.get(&id.name) {
                    if seen.insert(id.name.clone()) {
                        self.mentions(body, out, seen);
                    }
                }
            }
            Term::Formula(e) => self.mentions(e, out, seen),
            Term::Literal(_) => {}
        };
        match e {
            Expr::Const(_) => {}
            Expr::Atom(t) => term(t, out, seen),
            Expr::Cmp(_, l, r) => {
                term(l, out, seen);
                term(r, out, seen);
            }
            Expr::Not(a) | Expr::Temporal(_, a) | Expr::At(_, _, a) => self.mentions(a, out, seen),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
                self.mentions(a, out, seen);
                self.mentions(b, out, seen);
            }
        }
    }

    fn history(&self, port: &Port, labels: &[Ident], span: Span) -> LResult<History> {
        if labels.len() != self.horizon.steps() {
            return Err(semantic(
                span,
                format!("history for `{}` has {} steps, the horizon is {}", port.name(), labels.len(), self.horizon.steps()),
            ));
        }
        labels.iter().map(|l| label_value(port.domain(), l, true)).collect()
    }

    fn port_dist(&self, port: &Port, decl: &PortDecl, d: &PortDist) -> LResult<Distribution> {
        match d {
            PortDist::Bernoulli(p) => {
                Distribution::bernoulli_iid(port, &p.value, self.horizon).map_err(|e| semantic(p.span, e))
            }
            PortDist::Table(rows) => {
                let mut entries = Vec::new();
                for (h, w) in rows {
                    entries.push((self.history(port, h, w.span)?, w.value.clone()));
                }
                Distribution::table(port, self.horizon, entries).map_err(|e| semantic(decl.name.span, e))
            }
        }
    }

    fn joint_dist(&self, d: &DistDecl) -> LResult<Distribution> {
        let mut over = Vec::new();
        for id in &d.over {
            let port = self.ports.get(&id.name).ok_or_else(|| resolution(id.span, format!("undefined port `{}`", id.name)))?;
            over.push(port.clone());
        }
        let mut entries = Vec::new();
        for (hs, w) in &d.rows {
            if hs.len() != over.len() {
                return Err(semantic(w.span, format!("row gives {} histories for {} ports", hs.len(), over.len())));
            }
            let mut run = Run::new();
            for (port, h) in over.iter().zip(hs) {
                run.insert(port.name(), self.history(port, h, w.span)?);
            }
            entries.push((run, w.value.clone()));
        }
        Distribution::new(over, self.horizon, entries).map_err(|e| semantic(d.name.span, e))
    }
}

fn prob_dist(
    pc: &ProbContractDecl,
    ports: &BTreeMap<String, Port>,
    port_dists: &BTreeMap<String, Distribution>,
    dists: &BTreeMap<String, Distribution>,
    decls: &[DistDecl],
    horizon: Horizon,
) -> LResult<Distribution> {
    let mut covered: BTreeMap<&str, Span> = BTreeMap::new();
    let mut result = Distribution::trivial(horizon);
    for id in &pc.prob {
        if !ports.contains_key(&id.name) {
            return Err(resolution(id.span, format!("undefined port `{}`", id.name)));
        }
    }
    for id in &pc.dists {
        let d = dists.get(&id.name).ok_or_else(|| resolution(id.span, format!("undefined distribution `{}`", id.name)))?;
        let decl = decls.iter().find(|d| d.name.name == id.name).unwrap();
        for p in &decl.over {
            if !pc.prob.iter().any(|q| q.name == p.name) {
                return Err(semantic(id.span, format!("distribution `{}` covers `{}`, which is not listed under `prob`", id.name, p.name)));
            }
            if covered.insert(&p.name, id.span).is_some() {
                return Err(semantic(id.span, format!("port `{}` has two distributions", p.name)));
            }
        }
        result = result.product(d).map_err(|e| semantic(id.span, e))?;
    }
    for id in &pc.prob {
        if covered.contains_key(id.name.as_str()) {
            continue;
        }
        let d = port_dists
            .get(&id.name)
            .ok_or_else(|| semantic(id.span, format!("port `{}` has no distribution", id.name)))?;
        covered.insert(&id.name, id.span);
        result = result.product(d).map_err(|e| semantic(id.span, e))?;
    }
    Ok(result)
}
