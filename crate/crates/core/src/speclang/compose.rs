use super::ast::*;
use super::lower::System;
use super::{Diagnostic, DiagnosticKind};
use crate::probabilistic::compose_prob;
use crate::traces::Role;

/// Adds the composition of the (probabilistic) contracts `a` and `b` to the
/// document under `name`.
///
/// The composed contract is written out as formulas over the originals:
/// with `Gᵢ' = Gᵢ or not Aᵢ`, the guarantee is `G₁' and G₂'` and the
/// assumption is `(A₁ and A₂) or not (G₁' and G₂')`. When either side is
/// probabilistic the base contract is named `{name}_base` and `name` is a
/// probabilistic contract over the union of the probabilistic ports.
pub fn compose_decls(system: &System, a: &str, b: &str, name: &str) -> Result<Document, Diagnostic> {
    let doc = system.document();
    let at = Span::new(1, 1);
    let err = |kind, msg: String| Diagnostic::new(kind, at, msg);
    let lookup = |n: &str| {
        system
            .any_prob_contract(n)
            .ok_or_else(|| err(DiagnosticKind::Resolution, format!("undefined contract `{n}`")))
    };
    let composed = compose_prob(&lookup(a)?, &lookup(b)?).map_err(|e| err(DiagnosticKind::Semantic, e.to_string()))?;

    let base_of = |n: &str| -> &ContractDecl {
        let base = doc.prob_contract(n).map(|p| p.contract.name.as_str()).unwrap_or(n);
        doc.contract(base).expect("resolved above")
    };
    let (c1, c2) = (base_of(a), base_of(b));
    let parts = |c: &ContractDecl| {
        let assume = c.assume.clone().unwrap_or(Expr::Const(true));
        let g = Expr::or(c.guarantee.clone(), Expr::not(assume.clone()));
        (assume, g)
    };
    let ((a1, g1), (a2, g2)) = (parts(c1), parts(c2));
    let guarantee = Expr::and(g1, g2);
    let assume = Expr::or(Expr::and(a1, a2), Expr::not(guarantee.clone()));

    let sig = composed.signature();
    let ids = |role| sig.entries().iter().filter(|(_, r)| *r == role).map(|(p, _)| Ident::new(p.name())).collect();
    let header = Header { controlled: ids(Role::Controlled), uncontrolled: ids(Role::Uncontrolled) };

    let probabilistic = doc.prob_contract(a).is_some() || doc.prob_contract(b).is_some();
    let base_name = if probabilistic { format!("{name}_base") } else { name.to_string() };
    let mut out = doc.clone();
    out.contracts.push(ContractDecl { name: Ident::new(&base_name), header: Some(header), assume: Some(assume), guarantee });
    if probabilistic {
        let mut prob = Vec::new();
        let mut dists = Vec::new();
        for pc in [a, b].iter().filter_map(|n| doc.prob_contract(n)) {
            prob.extend(pc.prob.iter().cloned());
            dists.extend(pc.dists.iter().cloned());
        }
        out.prob_contracts.push(ProbContractDecl { name: Ident::new(name), contract: Ident::new(base_name), prob, dists });
    }
    super::parser::check_names(&out)?;
    Ok(out.normalized())
}
