use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::{Diagnostic, DiagnosticKind};
use crate::rational;

/// Reserved words, which cannot name declarations, ports or labels.
pub const KEYWORDS: &[&str] = &[
    "horizon", "port", "bool", "controlled", "uncontrolled", "prob", "bernoulli", "table", "dist", "over",
    "predicate", "contract", "impl", "probcontract", "assume", "guarantee", "true", "false", "not", "and", "or",
    "implies", "always", "never", "eventually", "at", "prev", "init",
];

const MAX_DEPTH: usize = 200;

type PResult<T> = Result<T, Diagnostic>;

/// Parses a document. Declarations come back sorted by name.
pub fn parse(text: &str) -> PResult<Document> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let doc = p.document()?;
    check_names(&doc)?;
    Ok(doc.normalized())
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::new(
            DiagnosticKind::Syntax,
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(&tok.describe())
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let (_, span) = self.next();
                Ok(Ident::at(s, span))
            }
            _ => self.error("a name"),
        }
    }

    fn idents(&mut self) -> PResult<Vec<Ident>> {
        let mut v = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            v.push(self.ident()?);
        }
        Ok(v)
    }

    fn integer(&mut self) -> PResult<(usize, Span)> {
        match self.peek().clone() {
            Tok::Int(s) => match s.parse() {
                Ok(n) => Ok((n, self.next().1)),
                Err(_) => Err(Diagnostic::new(DiagnosticKind::Syntax, self.span(), format!("integer `{s}` is too large"))),
            },
            _ => self.error("an integer"),
        }
    }

    /// A value label: a name, an integer, `true` or `false`.
    fn label(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Int(s) => Ok(Ident::at(s, self.next().1)),
            Tok::Ident(s) if s == "true" || s == "false" => Ok(Ident::at(s, self.next().1)),
            Tok::Ident(_) => self.ident(),
            _ => self.error("a value"),
        }
    }

    fn history(&mut self) -> PResult<Vec<Ident>> {
        self.expect(Tok::LBracket)?;
        let mut v = Vec::new();
        if !self.eat(&Tok::RBracket) {
            v.push(self.label()?);
            while self.eat(&Tok::Comma) {
                v.push(self.label()?);
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(v)
    }

    fn rational(&mut self) -> PResult<Prob> {
        let span = self.span();
        let text = match self.next().0 {
            Tok::Decimal(s) => s,
            Tok::Int(n) => {
                if self.eat(&Tok::Slash) {
                    match self.peek().clone() {
                        Tok::Int(d) => {
                            self.next();
                            format!("{n}/{d}")
                        }
                        _ => return self.error("a denominator"),
                    }
                } else {
                    n
                }
            }
            other => {
                return Err(Diagnostic::new(
                    DiagnosticKind::Syntax,
                    span,
                    format!("expected a probability, found {}", other.describe()),
                ))
            }
        };
        match rational::parse(&text) {
            Some(value) => Ok(Prob { value, span }),
            None => Err(Diagnostic::new(DiagnosticKind::Syntax, span, format!("invalid number `{text}`"))),
        }
    }

    fn document(&mut self) -> PResult<Document> {
        let mut doc = Document::default();
        loop {
            let span = self.span();
            let Tok::Ident(kw) = self.peek().clone() else {
                if self.peek() == &Tok::Eof {
                    return Ok(doc);
                }
                return self.error("a declaration");
            };
            self.next();
            match kw.as_str() {
                "horizon" => {
                    let (steps, _) = self.integer()?;
                    self.expect(Tok::Semi)?;
                    if doc.horizon.is_some() {
                        return Err(Diagnostic::new(DiagnosticKind::Semantic, span, "horizon declared twice"));
                    }
                    doc.horizon = Some(HorizonDecl { steps, span });
                }
                "port" => doc.ports.push(self.port()?),
                "dist" => doc.dists.push(self.dist()?),
                "predicate" => {
                    let name = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let body = self.expr()?;
                    self.expect(Tok::Semi)?;
                    doc.predicates.push(PredicateDecl { name, body });
                }
                "contract" => {
                    let name = self.ident()?;
                    let header = self.header()?;
                    self.expect(Tok::LBrace)?;
                    let assume = if self.eat_kw("assume") {
                        let e = self.expr()?;
                        self.expect(Tok::Semi)?;
                        Some(e)
                    } else {
                        None
                    };
                    self.expect_kw("guarantee")?;
                    let guarantee = self.expr()?;
                    self.expect(Tok::Semi)?;
                    self.expect(Tok::RBrace)?;
                    doc.contracts.push(ContractDecl { name, header, assume, guarantee });
                }
                "impl" => {
                    let name = self.ident()?;
                    let header = self.header()?;
                    self.expect(Tok::LBrace)?;
                    let body = self.expr()?;
                    self.expect(Tok::Semi)?;
                    self.expect(Tok::RBrace)?;
                    doc.impls.push(ImplDecl { name, header, body });
                }
                "probcontract" => {
                    let name = self.ident()?;
                    self.expect(Tok::LBrace)?;
                    self.expect_kw("contract")?;
                    let contract = self.ident()?;
                    self.expect(Tok::Semi)?;
                    let mut prob = Vec::new();
                    if self.eat_kw("prob") {
                        prob = self.idents()?;
                        self.expect(Tok::Semi)?;
                    }
                    let mut dists = Vec::new();
                    if self.eat_kw("dist") {
                        dists = self.idents()?;
                        self.expect(Tok::Semi)?;
                    }
                    self.expect(Tok::RBrace)?;
                    doc.prob_contracts.push(ProbContractDecl { name, contract, prob, dists });
                }
                _ => {
                    self.pos -= 1;
                    return self.error("a declaration");
                }
            }
        }
    }

    fn port(&mut self) -> PResult<PortDecl> {
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let domain = if self.eat_kw("bool") {
            Domain::Bool
        } else if self.eat(&Tok::LBrace) {
            let mut labels = vec![self.label()?];
            while self.eat(&Tok::Comma) {
                labels.push(self.label()?);
            }
            self.expect(Tok::RBrace)?;
            Domain::Enum(labels)
        } else {
            return self.error("`bool` or `{`");
        };
        let role = if self.eat_kw("controlled") {
            Some(RoleDecl::Controlled)
        } else if self.eat_kw("uncontrolled") {
            Some(RoleDecl::Uncontrolled)
        } else {
            None
        };
        let prob = if self.eat_kw("prob") {
            if self.eat_kw("bernoulli") {
                self.expect(Tok::LParen)?;
                let p = self.rational()?;
                self.expect(Tok::RParen)?;
                Some(PortDist::Bernoulli(p))
            } else if self.eat_kw("table") {
                self.expect(Tok::LBrace)?;
                let mut rows = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    let h = self.history()?;
                    self.expect(Tok::Colon)?;
                    let w = self.rational()?;
                    self.expect(Tok::Semi)?;
                    rows.push((h, w));
                }
                Some(PortDist::Table(rows))
            } else {
                return self.error("`bernoulli` or `table`");
            }
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(PortDecl { name, domain, role, prob })
    }

    fn dist(&mut self) -> PResult<DistDecl> {
        let name = self.ident()?;
        self.expect_kw("over")?;
        self.expect(Tok::LParen)?;
        let over = self.idents()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let mut rows = Vec::new();
        while !self.eat(&Tok::RBrace) {
            self.expect(Tok::LParen)?;
            let mut hs = vec![self.history()?];
            while self.eat(&Tok::Comma) {
                hs.push(self.history()?);
            }
            self.expect(Tok::RParen)?;
            self.expect(Tok::Colon)?;
            let w = self.rational()?;
            self.expect(Tok::Semi)?;
            rows.push((hs, w));
        }
        Ok(DistDecl { name, over, rows })
    }

    fn header(&mut self) -> PResult<Option<Header>> {
        if !self.eat(&Tok::LParen) {
            return Ok(None);
        }
        let mut h = Header::default();
        if self.eat_kw("controlled") {
            h.controlled = self.idents()?;
            if !self.eat(&Tok::Semi) {
                self.expect(Tok::RParen)?;
                return Ok(Some(h));
            }
        }
        if self.eat_kw("uncontrolled") {
            h.uncontrolled = self.idents()?;
        }
        self.expect(Tok::RParen)?;
        Ok(Some(h))
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Diagnostic::new(DiagnosticKind::Syntax, self.span(), "expression nested too deeply"));
        }
        let e = self.implies();
        self.depth -= 1;
        e
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if self.eat_kw("implies") {
            let rhs = self.expr()?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut e = self.and()?;
        while self.eat_kw("or") {
            e = Expr::or(e, self.and()?);
        }
        Ok(e)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        while self.eat_kw("and") {
            e = Expr::and(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_kw("not") {
            self.next();
            self.depth += 1;
            if self.depth > MAX_DEPTH {
                return Err(Diagnostic::new(DiagnosticKind::Syntax, self.span(), "expression nested too deeply"));
            }
            let e = self.unary();
            self.depth -= 1;
            return Ok(Expr::not(e?));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let temporal = match self.peek() {
            Tok::Ident(s) if s == "always" => Some(Temporal::Always),
            Tok::Ident(s) if s == "never" => Some(Temporal::Never),
            Tok::Ident(s) if s == "eventually" => Some(Temporal::Eventually),
            _ => None,
        };
        if let Some(op) = temporal {
            self.next();
            self.expect(Tok::LParen)?;
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(Expr::Temporal(op, Box::new(e)));
        }
        if self.is_kw("at") {
            self.next();
            self.expect(Tok::LParen)?;
            let (k, span) = self.integer()?;
            self.expect(Tok::Comma)?;
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(Expr::At(k, span, Box::new(e)));
        }
        if (self.is_kw("true") || self.is_kw("false")) && !matches!(self.peek2(), Tok::EqEq | Tok::NotEq) {
            let (t, _) = self.next();
            return Ok(Expr::Const(t == Tok::Ident("true".into())));
        }
        let span = self.span();
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            _ => {
                return match lhs {
                    Term::Formula(e) => Ok(*e),
                    Term::Name(_) | Term::Prev { .. } => Ok(Expr::Atom(lhs)),
                    Term::Literal(l) => Err(Diagnostic::new(
                        DiagnosticKind::Syntax,
                        span,
                        format!("a value `{}` is not a formula", l.name),
                    )),
                }
            }
        };
        self.next();
        let rhs = self.term()?;
        Ok(Expr::Cmp(op, lhs, rhs))
    }

    fn term(&mut self) -> PResult<Term> {
        if self.eat(&Tok::LParen) {
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(Term::Formula(Box::new(e)));
        }
        if self.is_kw("prev") {
            self.next();
            self.expect(Tok::LParen)?;
            let port = self.ident()?;
            self.expect_kw("init")?;
            let init = self.label()?;
            self.expect(Tok::RParen)?;
            return Ok(Term::Prev { port, init });
        }
        match self.peek().clone() {
            Tok::Int(s) => Ok(Term::Literal(Ident::at(s, self.next().1))),
            Tok::Ident(s) if s == "true" || s == "false" => Ok(Term::Literal(Ident::at(s, self.next().1))),
            Tok::Ident(_) => Ok(Term::Name(self.ident()?)),
            _ => self.error("a formula"),
        }
    }
}

pub(crate) fn check_names(doc: &Document) -> PResult<()> {
    let mut seen: HashMap<&str, Span> = HashMap::new();
    let names = doc
        .ports
        .iter()
        .map(|d| &d.name)
        .chain(doc.dists.iter().map(|d| &d.name))
        .chain(doc.predicates.iter().map(|d| &d.name))
        .chain(doc.contracts.iter().map(|d| &d.name))
        .chain(doc.impls.iter().map(|d| &d.name))
        .chain(doc.prob_contracts.iter().map(|d| &d.name));
    for name in names {
        if let Some(first) = seen.insert(&name.name, name.span) {
            return Err(Diagnostic::new(
                DiagnosticKind::Resolution,
                name.span,
                format!("`{}` is already declared at {first}", name.name),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document() {
        assert_eq!(parse("").unwrap(), Document::default());
        assert_eq!(parse("  // only a comment\n").unwrap(), Document::default());
    }

    #[test]
    fn contract_without_header() {
        let doc = parse("contract C2 { assume true; guarantee always(y == x); }").unwrap();
        let c = &doc.contracts[0];
        assert_eq!(c.name.name, "C2");
        assert_eq!(c.assume, Some(Expr::Const(true)));
        let cmp = Expr::Cmp(CmpOp::Eq, Term::Name(Ident::new("y")), Term::Name(Ident::new("x")));
        assert_eq!(c.guarantee, Expr::Temporal(Temporal::Always, Box::new(cmp)));
    }

    #[test]
    fn precedence() {
        let doc = parse("predicate p : not a and b or c implies d implies e;").unwrap();
        let v = |n: &str| Expr::Atom(Term::Name(Ident::new(n)));
        let expected = Expr::implies(
            Expr::or(Expr::and(Expr::not(v("a")), v("b")), v("c")),
            Expr::implies(v("d"), v("e")),
        );
        assert_eq!(doc.predicates[0].body, expected);
    }

    #[test]
    fn terms() {
        let doc = parse("predicate p : (a or b) == prev(x init false) and m != 2 and true == c;").unwrap();
        assert!(matches!(doc.predicates[0].body, Expr::And(..)));
        assert!(parse("predicate p : 3;").is_err());
    }

    #[test]
    fn syntax_errors_carry_locations() {
        let e = parse("horizon 2;\ncontract C { guarantee always(x == ); }").unwrap_err();
        assert_eq!(e.kind, DiagnosticKind::Syntax);
        assert_eq!((e.span.line, e.span.col), (2, 36));
        let e = parse("horizon 2; horizon 3;").unwrap_err();
        assert_eq!(e.kind, DiagnosticKind::Semantic);
        let e = parse("port a : bool; port a : bool;").unwrap_err();
        assert_eq!(e.kind, DiagnosticKind::Resolution);
        assert!(parse("port and : bool;").is_err());
    }

    #[test]
    fn deep_nesting_is_a_diagnostic() {
        let text = format!("predicate p : {}a{};", "(".repeat(5000), ")".repeat(5000));
        assert_eq!(parse(&text).unwrap_err().kind, DiagnosticKind::Syntax);
        let text = format!("predicate p : {}a;", "not ".repeat(5000));
        assert_eq!(parse(&text).unwrap_err().kind, DiagnosticKind::Syntax);
    }

    #[test]
    fn declarations() {
        let doc = parse(
            "horizon 2;
             port m : {idle, run, 3} controlled;
             port f : bool prob table { [false, true] : 1/2; [true, true] : 0.5; };
             port g : bool prob bernoulli(1/10);
             dist j over (f, g) { ([false, false], [true, true]) : 1; }
             impl M (controlled m) { always(m == idle); }
             probcontract P { contract C; prob f, g; dist j; }
             contract C () { guarantee true; }",
        )
        .unwrap();
        assert_eq!(doc.horizon.as_ref().unwrap().steps, 2);
        assert_eq!(doc.ports.iter().map(|p| p.name.name.as_str()).collect::<Vec<_>>(), ["f", "g", "m"]);
        assert_eq!(doc.contracts[0].header, Some(Header::default()));
        assert_eq!(doc.prob_contracts[0].dists, vec![Ident::new("j")]);
    }
}
