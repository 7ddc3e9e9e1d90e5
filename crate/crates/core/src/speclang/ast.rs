//! Syntax tree of `.pct` documents.
//!
//! Spans never take part in equality, so two trees compare equal when they
//! have the same structure regardless of where they were parsed from.

use std::fmt;

use crate::rational::Rational;

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A name or value label with its position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident { name: name.into(), span: Span::default() }
    }

    pub fn at(name: impl Into<String>, span: Span) -> Self {
        Ident { name: name.into(), span }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prob {
    pub value: Rational,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub horizon: Option<HorizonDecl>,
    pub ports: Vec<PortDecl>,
    pub dists: Vec<DistDecl>,
    pub predicates: Vec<PredicateDecl>,
    pub contracts: Vec<ContractDecl>,
    pub impls: Vec<ImplDecl>,
    pub prob_contracts: Vec<ProbContractDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HorizonDecl {
    pub steps: usize,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Bool,
    Enum(Vec<Ident>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoleDecl {
    Controlled,
    Uncontrolled,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortDecl {
    pub name: Ident,
    pub domain: Domain,
    /// Role used by components that mention the port without listing it.
    pub role: Option<RoleDecl>,
    pub prob: Option<PortDist>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PortDist {
    Bernoulli(Prob),
    Table(Vec<(Vec<Ident>, Prob)>),
}

/// Joint table over several ports: each row gives one history per port.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistDecl {
    pub name: Ident,
    pub over: Vec<Ident>,
    pub rows: Vec<(Vec<Vec<Ident>>, Prob)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: Ident,
    pub body: Expr,
}

/// Explicit roles of a component. Ports mentioned in its expressions but
/// not listed take the default role of their declaration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Header {
    pub controlled: Vec<Ident>,
    pub uncontrolled: Vec<Ident>,
}

impl Header {
    pub fn is_empty(&self) -> bool {
        self.controlled.is_empty() && self.uncontrolled.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractDecl {
    pub name: Ident,
    pub header: Option<Header>,
    pub assume: Option<Expr>,
    pub guarantee: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplDecl {
    pub name: Ident,
    pub header: Option<Header>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbContractDecl {
    pub name: Ident,
    pub contract: Ident,
    pub prob: Vec<Ident>,
    pub dists: Vec<Ident>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Temporal {
    Always,
    Never,
    Eventually,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    /// A bare boolean port, `prev` term or predicate name.
    Atom(Term),
    Cmp(CmpOp, Term, Term),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Temporal(Temporal, Box<Expr>),
    At(usize, Span, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    /// A port, predicate or value label; resolved during lowering.
    Name(Ident),
    /// Integer, `true` or `false`, kept as written.
    Literal(Ident),
    Prev { port: Ident, init: Ident },
    /// A parenthesized formula compared as a boolean.
    Formula(Box<Expr>),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::Implies(Box::new(a), Box::new(b))
    }
}

impl Document {
    /// Sorts every declaration list and header by name, the order in which
    /// documents are printed and parsed back.
    pub fn normalize(&mut self) {
        fn by_name<T>(v: &mut [T], key: impl Fn(&T) -> &str) {
            v.sort_by(|a, b| key(a).cmp(key(b)));
        }
        fn header(h: &mut Option<Header>) {
            if let Some(h) = h {
                h.controlled.sort_by(|a, b| a.name.cmp(&b.name));
                h.uncontrolled.sort_by(|a, b| a.name.cmp(&b.name));
            }
        }
        by_name(&mut self.ports, |d| &d.name.name);
        by_name(&mut self.dists, |d| &d.name.name);
        by_name(&mut self.predicates, |d| &d.name.name);
        by_name(&mut self.contracts, |d| &d.name.name);
        by_name(&mut self.impls, |d| &d.name.name);
        by_name(&mut self.prob_contracts, |d| &d.name.name);
        self.contracts.iter_mut().for_each(|c| header(&mut c.header));
        self.impls.iter_mut().for_each(|c| header(&mut c.header));
        for p in &mut self.prob_contracts {
            p.prob.sort_by(|a, b| a.name.cmp(&b.name));
            p.dists.sort_by(|a, b| a.name.cmp(&b.name));
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn contract(&self, name: &str) -> Option<&ContractDecl> {
        self.contracts.iter().find(|c| c.name.name == name)
    }

    pub fn prob_contract(&self, name: &str) -> Option<&ProbContractDecl> {
        self.prob_contracts.iter().find(|c| c.name.name == name)
    }
}
