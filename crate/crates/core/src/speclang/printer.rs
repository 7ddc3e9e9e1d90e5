use std::fmt::Write;

use super::ast::*;
use crate::rational;

/// Prints a document in normal form: declarations grouped by kind and
/// sorted by name, one per line, with minimal parentheses.
pub fn print(doc: &Document) -> String {
    let doc = doc.clone().normalized();
    let mut out = String::new();
    let section = |out: &mut String, lines: Vec<String>| {
        if lines.is_empty() {
            return;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
    };
    if let Some(h) = &doc.horizon {
        section(&mut out, vec![format!("horizon {};", h.steps)]);
    }
    section(&mut out, doc.ports.iter().map(port).collect());
    section(&mut out, doc.dists.iter().map(dist).collect());
    section(
        &mut out,
        doc.predicates.iter().map(|p| format!("predicate {} : {};", p.name.name, expr(&p.body))).collect(),
    );
    section(&mut out, doc.contracts.iter().map(contract).collect());
    section(
        &mut out,
        doc.impls
            .iter()
            .map(|i| format!("impl {}{} {{ {}; }}", i.name.name, header(&i.header), expr(&i.body)))
            .collect(),
    );
    section(&mut out, doc.prob_contracts.iter().map(prob_contract).collect());
    out
}

fn names(v: &[Ident]) -> String {
    v.iter().map(|i| i.name.as_str()).collect::<Vec<_>>().join(", ")
}

fn history(h: &[Ident]) -> String {
    format!("[{}]", names(h))
}

fn prob(p: &Prob) -> String {
    rational::exact(&p.value)
}

fn port(p: &PortDecl) -> String {
    let mut s = format!("port {} : ", p.name.name);
    match &p.domain {
        Domain::Bool => s.push_str("bool"),
        Domain::Enum(labels) => write!(s, "{{{}}}", names(labels)).unwrap(),
    }
    match p.role {
        Some(RoleDecl::Controlled) => s.push_str(" controlled"),
        Some(RoleDecl::Uncontrolled) => s.push_str(" uncontrolled"),
        None => {}
    }
    match &p.prob {
        Some(PortDist::Bernoulli(r)) => write!(s, " prob bernoulli({})", prob(r)).unwrap(),
        Some(PortDist::Table(rows)) => {
            s.push_str(" prob table {");
            for (h, w) in rows {
                write!(s, " {} : {};", history(h), prob(w)).unwrap();
            }
            s.push_str(" }");
        }
        None => {}
    }
    s.push(';');
    s
}

fn dist(d: &DistDecl) -> String {
    let mut s = format!("dist {} over ({}) {{", d.name.name, names(&d.over));
    for (hs, w) in &d.rows {
        let hs: Vec<String> = hs.iter().map(|h| history(h)).collect();
        write!(s, " ({}) : {};", hs.join(", "), prob(w)).unwrap();
    }
    s.push_str(" }");
    s
}

fn header(h: &Option<Header>) -> String {
    let Some(h) = h else { return String::new() };
    let mut parts = Vec::new();
    if !h.controlled.is_empty() {
        parts.push(format!("controlled {}", names(&h.controlled)));
    }
    if !h.uncontrolled.is_empty() {
        parts.push(format!("uncontrolled {}", names(&h.uncontrolled)));
    }
    format!(" ({})", parts.join("; "))
}

fn contract(c: &ContractDecl) -> String {
    let mut s = format!("contract {}{} {{ ", c.name.name, header(&c.header));
    if let Some(a) = &c.assume {
        write!(s, "assume {}; ", expr(a)).unwrap();
    }
    write!(s, "guarantee {}; }}", expr(&c.guarantee)).unwrap();
    s
}

fn prob_contract(p: &ProbContractDecl) -> String {
    let mut s = format!("probcontract {} {{ contract {};", p.name.name, p.contract.name);
    if !p.prob.is_empty() {
        write!(s, " prob {};", names(&p.prob)).unwrap();
    }
    if !p.dists.is_empty() {
        write!(s, " dist {};", names(&p.dists)).unwrap();
    }
    s.push_str(" }");
    s
}

// Binding strength, loosest first.
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Implies(..) => IMPLIES,
        Expr::Or(..) => OR,
        Expr::And(..) => AND,
        _ => UNARY,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    if level(e) < min {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Const(b) => b.to_string(),
        Expr::Atom(t) => term(t),
        Expr::Cmp(op, l, r) => {
            let op = match op {
                CmpOp::Eq => "==",
                CmpOp::Ne => "!=",
            };
            format!("{} {op} {}", term(l), term(r))
        }
        Expr::Not(a) => format!("not {}", wrap(a, UNARY)),
        // `and`/`or` associate to the left, `implies` to the right.
        Expr::And(a, b) => format!("{} and {}", wrap(a, AND), wrap(b, AND + 1)),
        Expr::Or(a, b) => format!("{} or {}", wrap(a, OR), wrap(b, OR + 1)),
        Expr::Implies(a, b) => format!("{} implies {}", wrap(a, IMPLIES + 1), wrap(b, IMPLIES)),
        Expr::Temporal(op, a) => {
            let op = match op {
                Temporal::Always => "always",
                Temporal::Never => "never",
                Temporal::Eventually => "eventually",
            };
            format!("{op}({})", expr(a))
        }
        Expr::At(k, _, a) => format!("at({k}, {})", expr(a)),
    }
}

fn term(t: &Term) -> String {
    match t {
        Term::Name(i) | Term::Literal(i) => i.name.clone(),
        Term::Prev { port, init } => format!("prev({} init {})", port.name, init.name),
        Term::Formula(e) => format!("({})", expr(e)),
    }
}
