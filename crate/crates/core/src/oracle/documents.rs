//! Random syntactically valid documents, for round-trip and fuzz checks.
//!
//! Documents are well formed but not necessarily meaningful: names may be
//! undefined and domains may not match. Declaration names are unique, so
//! every document parses.

use num_bigint::BigInt;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::Rational;
use crate::speclang::ast::*;
use crate::speclang::KEYWORDS;

const MAX_EXPR_DEPTH: u32 = 5;

struct Gen {
    rng: ChaCha8Rng,
    next_id: usize,
}

impl Gen {
    fn word(&mut self) -> String {
        const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
        const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";
        loop {
            let len = self.rng.random_range(1..6);
            let mut s = String::new();
            s.push(*FIRST.choose(&mut self.rng).unwrap() as char);
            for _ in 1..len {
                s.push(*REST.choose(&mut self.rng).unwrap() as char);
            }
            if !KEYWORDS.contains(&s.as_str()) {
                return s;
            }
        }
    }

    /// A declaration name, unique within the document.
    fn fresh(&mut self) -> Ident {
        self.next_id += 1;
        let w = self.word();
        Ident::new(format!("{w}_{}", self.next_id))
    }

    fn name(&mut self) -> Ident {
        Ident::new(self.word())
    }

    fn names(&mut self, max: usize) -> Vec<Ident> {
        let n = self.rng.random_range(1..=max);
        (0..n).map(|_| self.name()).collect()
    }

    fn label(&mut self) -> Ident {
        match self.rng.random_range(0..4) {
            0 => Ident::new(self.rng.random_range(0..20u32).to_string()),
            1 => Ident::new(if self.rng.random_bool(0.5) { "true" } else { "false" }),
            _ => self.name(),
        }
    }

    fn prob(&mut self) -> Prob {
        let d: i64 = self.rng.random_range(1..1000);
        let n: i64 = self.rng.random_range(0..=d);
        Prob { value: Rational::new(BigInt::from(n), BigInt::from(d)), span: Span::default() }
    }

    fn history(&mut self) -> Vec<Ident> {
        let n = self.rng.random_range(0..4);
        (0..n).map(|_| self.label()).collect()
    }

    fn header(&mut self) -> Option<Header> {
        if self.rng.random_bool(0.3) {
            return None;
        }
        let mut h = Header::default();
        if self.rng.random_bool(0.7) {
            h.controlled = self.names(3);
        }
        if self.rng.random_bool(0.7) {
            h.uncontrolled = self.names(3);
        }
        Some(h)
    }

    fn term(&mut self, depth: u32) -> Term {
        match self.rng.random_range(0..10) {
            0..=4 => Term::Name(self.name()),
            5 | 6 => {
                let l = if self.rng.random_bool(0.5) {
                    self.rng.random_range(0..20u32).to_string()
                } else if self.rng.random_bool(0.5) {
                    "true".into()
                } else {
                    "false".into()
                };
                Term::Literal(Ident::new(l))
            }
            7 | 8 => Term::Prev { port: self.name(), init: self.label() },
            _ => Term::Formula(Box::new(self.expr(depth + 1))),
        }
    }

    fn expr(&mut self, depth: u32) -> Expr {
        let leaf = depth >= MAX_EXPR_DEPTH || self.rng.random_bool(0.3);
        let choice = if leaf { self.rng.random_range(0..3) } else { self.rng.random_range(0..9) };
        let sub = |g: &mut Gen| Box::new(g.expr(depth + 1));
        match choice {
            0 => Expr::Const(self.rng.random_bool(0.5)),
            1 => {
                let t = if self.rng.random_bool(0.7) {
                    Term::Name(self.name())
                } else {
                    Term::Prev { port: self.name(), init: self.label() }
                };
                Expr::Atom(t)
            }
            2 => {
                let op = if self.rng.random_bool(0.5) { CmpOp::Eq } else { CmpOp::Ne };
                let d = if leaf { MAX_EXPR_DEPTH } else { depth };
                let lhs = self.term(d);
                let rhs = self.term(d);
                Expr::Cmp(op, lhs, rhs)
            }
            3 => Expr::Not(sub(self)),
            4 => Expr::And(sub(self), sub(self)),
            5 => Expr::Or(sub(self), sub(self)),
            6 => Expr::Implies(sub(self), sub(self)),
            7 => {
                let op = *[Temporal::Always, Temporal::Never, Temporal::Eventually].choose(&mut self.rng).unwrap();
                Expr::Temporal(op, sub(self))
            }
            _ => Expr::At(self.rng.random_range(0..5), Span::default(), sub(self)),
        }
    }

    fn port(&mut self) -> PortDecl {
        let domain = if self.rng.random_bool(0.5) {
            Domain::Bool
        } else {
            let n = self.rng.random_range(1..5);
            Domain::Enum((0..n).map(|_| self.label()).collect())
        };
        let role = *[None, Some(RoleDecl::Controlled), Some(RoleDecl::Uncontrolled)].choose(&mut self.rng).unwrap();
        let prob = match self.rng.random_range(0..4) {
            0 => Some(PortDist::Bernoulli(self.prob())),
            1 => {
                let n = self.rng.random_range(0..4);
                Some(PortDist::Table((0..n).map(|_| (self.history(), self.prob())).collect()))
            }
            _ => None,
        };
        PortDecl { name: self.fresh(), domain, role, prob }
    }

    fn dist(&mut self) -> DistDecl {
        let over = self.names(3);
        let n = self.rng.random_range(0..4);
        let rows = (0..n)
            .map(|_| {
                let k = self.rng.random_range(1..=3);
                ((0..k).map(|_| self.history()).collect(), self.prob())
            })
            .collect();
        DistDecl { name: self.fresh(), over, rows }
    }

    fn document(&mut self) -> Document {
        let mut doc = Document::default();
        if self.rng.random_bool(0.8) {
            doc.horizon = Some(HorizonDecl { steps: self.rng.random_range(1..5), span: Span::default() });
        }
        for _ in 0..self.rng.random_range(0..6) {
            let p = self.port();
            doc.ports.push(p);
        }
        for _ in 0..self.rng.random_range(0..3) {
            let d = self.dist();
            doc.dists.push(d);
        }
        for _ in 0..self.rng.random_range(0..3) {
            let (name, body) = (self.fresh(), self.expr(0));
            doc.predicates.push(PredicateDecl { name, body });
        }
        for _ in 0..self.rng.random_range(0..4) {
            let name = self.fresh();
            let header = self.header();
            let assume = self.rng.random_bool(0.6).then(|| self.expr(0));
            let guarantee = self.expr(0);
            doc.contracts.push(ContractDecl { name, header, assume, guarantee });
        }
        for _ in 0..self.rng.random_range(0..3) {
            let (name, header, body) = (self.fresh(), self.header(), self.expr(0));
            doc.impls.push(ImplDecl { name, header, body });
        }
        for _ in 0..self.rng.random_range(0..3) {
            let name = self.fresh();
            let contract = self.name();
            let prob = if self.rng.random_bool(0.6) { self.names(3) } else { Vec::new() };
            let dists = if self.rng.random_bool(0.4) { self.names(2) } else { Vec::new() };
            doc.prob_contracts.push(ProbContractDecl { name, contract, prob, dists });
        }
        doc.normalized()
    }
}

/// A random document, deterministic per seed and already normalized.
pub fn gen_document(seed: u64) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(7);
    Gen { rng, next_id: 0 }.document()
}
