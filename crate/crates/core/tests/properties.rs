//! Property tests over small enumerable spaces.

use num_bigint::BigInt;
use pcontracts::contracts::satisfaction_formulas;
use pcontracts::oracle::{bridge, gen_document, gen_instance, reference, Budget};
use pcontracts::speclang::ast::{CmpOp, Expr, Ident, Span, Temporal, Term};
use pcontracts::speclang::{self, denote};
use pcontracts::{
    compose, included_in, refine_level, refines, sat_level, satisfies, Assertion, Contract, Distribution, Horizon, Port,
    ProbContract, Rational, Role, Run, Signature,
};
use proptest::prelude::*;

fn horizon(h: usize) -> Horizon {
    Horizon::new(h).unwrap()
}

fn bools(names: &[&str], role: Role) -> Signature {
    Signature::uniform(names.iter().map(|n| Port::boolean(*n)), role).unwrap()
}

fn assertion(sig: &Signature, h: usize, bits: &[bool]) -> Assertion {
    let idx = bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i as u64);
    Assertion::from_indices(sig.clone(), horizon(h), idx).unwrap()
}

/// Port names `p0..` and a horizon with at most 2^9 runs.
fn small_space() -> impl Strategy<Value = (Vec<String>, usize)> {
    (1usize..=3, 1usize..=3).prop_map(|(n, h)| ((0..n).map(|i| format!("p{i}")).collect(), h))
}

fn sig_of(names: &[String]) -> Signature {
    Signature::uniform(names.iter().map(Port::boolean), Role::Uncontrolled).unwrap()
}

/// A signature with one, two or three ports, a horizon, and `k` random
/// assertions over it.
fn assertions(k: usize) -> impl Strategy<Value = (Signature, usize, Vec<Assertion>)> {
    small_space().prop_flat_map(move |(names, h)| {
        let sig = sig_of(&names);
        let size = 1usize << (names.len() * h);
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), size), k).prop_map(move |sets| {
            let list = sets.iter().map(|b| assertion(&sig, h, b)).collect();
            (sig.clone(), h, list)
        })
    })
}

/// An assertion over a prefix of the ports, and the full signature.
fn lifting() -> impl Strategy<Value = (Signature, Vec<Assertion>)> {
    (1usize..=2, 1usize..=3).prop_flat_map(|(n, h)| {
        let small = sig_of(&(0..n).map(|i| format!("p{i}")).collect::<Vec<_>>());
        let big = sig_of(&(0..=n).map(|i| format!("p{i}")).collect::<Vec<_>>());
        let size = 1usize << (n * h);
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), size), 2)
            .prop_map(move |sets| (big.clone(), sets.iter().map(|b| assertion(&small, h, b)).collect()))
    })
}

proptest! {
    #[test]
    fn lift_is_monotone((big, es) in lifting()) {
        let (e, e2) = (&es[0], es[0].union(&es[1]).unwrap());
        prop_assert!(e.lift(&big).unwrap().is_subset(&e2.lift(&big).unwrap()).unwrap());
    }

    #[test]
    fn lift_commutes_with_set_operations((big, es) in lifting()) {
        let (a, b) = (&es[0], &es[1]);
        let l = |e: &Assertion| e.lift(&big).unwrap();
        prop_assert_eq!(l(&a.intersect(b).unwrap()), l(a).intersect(&l(b)).unwrap());
        prop_assert_eq!(l(&a.union(b).unwrap()), l(a).union(&l(b)).unwrap());
        prop_assert_eq!(l(&a.complement()), l(a).complement());
    }

    #[test]
    fn project_after_lift_is_identity((big, es) in lifting()) {
        let e = &es[0];
        prop_assert_eq!(&e.lift(&big).unwrap().project(e.signature()).unwrap(), e);
    }

    #[test]
    fn lift_after_project_contains((sig, h, es) in assertions(1)) {
        let e = &es[0];
        let names: Vec<&str> = sig.names().take(sig.len().saturating_sub(1).max(1)).collect();
        let sub = sig.restrict(names).unwrap();
        let back = e.project(&sub).unwrap().lift(&sig).unwrap();
        prop_assert!(e.is_subset(&back).unwrap());
        prop_assert_eq!(back.horizon(), horizon(h));
    }

    #[test]
    fn reference_lift_matches_engine((big, es) in lifting()) {
        let e = &es[0];
        let ports = |s: &Signature| s.entries().iter().map(|(p, r)| (p.name().to_string(), (p.clone(), *r))).collect();
        let set = reference::RunSet::new(ports(e.signature()), e.horizon().steps(), e.runs());
        let lifted = set.lift(&ports(&big));
        let engine = e.lift(&big).unwrap();
        prop_assert_eq!(&bridge::runs_of(&engine), &lifted.runs);
        for run in engine.complement().runs() {
            prop_assert!(!set.holds(&run));
        }
        for run in engine.runs() {
            prop_assert!(set.holds(&run));
        }
    }

    #[test]
    fn product_is_commutative_and_associative(
        bits in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 4), 3),
    ) {
        let sets: Vec<Assertion> = ["a", "b", "c"]
            .iter()
            .zip(&bits)
            .map(|(n, b)| assertion(&bools(&[n], Role::Uncontrolled), 2, b))
            .collect();
        let (a, b, c) = (&sets[0], &sets[1], &sets[2]);
        prop_assert_eq!(a.product(b).unwrap(), b.product(a).unwrap());
        prop_assert_eq!(a.product(b).unwrap().product(c).unwrap(), a.product(&b.product(c).unwrap()).unwrap());
        let unit = Assertion::universe(Signature::empty(), horizon(2)).unwrap();
        prop_assert_eq!(&a.product(&unit).unwrap(), a);
    }

    #[test]
    fn run_indexing_is_a_bijection((sig, h, es) in assertions(1)) {
        let space = es[0].space().clone();
        prop_assert_eq!(space.size() as u128, sig.universe_size(horizon(h)));
        for i in 0..space.size() {
            prop_assert_eq!(space.encode(&space.decode(i)).unwrap(), i);
        }
        let bytes = es[0].to_bitmap();
        prop_assert_eq!(&Assertion::from_bitmap(sig, horizon(h), &bytes).unwrap(), &es[0]);
    }
}

/// A contract over `x` (controlled) and `u` (uncontrolled), horizon 1.
fn contracts(k: usize) -> impl Strategy<Value = Vec<Contract>> {
    proptest::collection::vec((proptest::collection::vec(any::<bool>(), 4), proptest::collection::vec(any::<bool>(), 4)), k)
        .prop_map(|pairs| {
            let sig = Signature::new([(Port::boolean("u"), Role::Uncontrolled), (Port::boolean("x"), Role::Controlled)]).unwrap();
            pairs
                .iter()
                .map(|(a, g)| Contract::new(sig.clone(), &assertion(&sig, 1, a), &assertion(&sig, 1, g)).unwrap())
                .collect()
        })
}

fn implementation(bits: &[bool]) -> Assertion {
    let sig = Signature::new([(Port::boolean("u"), Role::Uncontrolled), (Port::boolean("x"), Role::Controlled)]).unwrap();
    assertion(&sig, 1, bits)
}

proptest! {
    #[test]
    fn canonical_form(cs in contracts(1), m in proptest::collection::vec(any::<bool>(), 4)) {
        let c = &cs[0];
        let canon = c.canonicalize();
        prop_assert_eq!(canon.canonicalize(), canon.clone());
        prop_assert!(canon.has_canonical_form());
        prop_assert_eq!(canon.guarantee(), &canon.guarantee().union(&canon.assumption().complement()).unwrap());

        let m = implementation(&m);
        let sat = satisfies(&m, c).unwrap();
        prop_assert_eq!(sat, satisfies(&m, &canon).unwrap());
        prop_assert_eq!(sat, included_in(&m, &c.maximal_implementation(), c.signature()).unwrap());
        prop_assert_eq!(satisfaction_formulas(&m, c).unwrap(), [sat; 3]);
    }

    #[test]
    fn refinement_preserves_satisfaction(cs in contracts(2), m in proptest::collection::vec(any::<bool>(), 4)) {
        let m = implementation(&m);
        if satisfies(&m, &cs[0]).unwrap() && refines(&cs[0], &cs[1]).unwrap() {
            prop_assert!(satisfies(&m, &cs[1]).unwrap());
        }
    }

    #[test]
    fn composition_is_canonical(
        cs in contracts(1),
        a in proptest::collection::vec(any::<bool>(), 4),
        g in proptest::collection::vec(any::<bool>(), 4),
    ) {
        // The peer reads x and controls y.
        let sig = Signature::new([(Port::boolean("x"), Role::Uncontrolled), (Port::boolean("y"), Role::Controlled)]).unwrap();
        let peer = Contract::new(sig.clone(), &assertion(&sig, 1, &a), &assertion(&sig, 1, &g)).unwrap();
        let composed = compose(&cs[0], &peer).unwrap();
        prop_assert!(composed.is_canonical());
        prop_assert!(composed.has_canonical_form());
    }
}

/// Ports `f` (probabilistic), `u` (uncontrolled) and `x` (controlled) at
/// horizon 1; `P(f) = k/10`.
fn prob_sig() -> Signature {
    Signature::new([
        (Port::boolean("f"), Role::Uncontrolled),
        (Port::boolean("u"), Role::Uncontrolled),
        (Port::boolean("x"), Role::Controlled),
    ])
    .unwrap()
}

fn prob_contract(k: i64, a: &[bool], g: &[bool]) -> ProbContract {
    let sig = prob_sig();
    let base = Contract::new(sig.clone(), &assertion(&sig, 1, a), &assertion(&sig, 1, g)).unwrap();
    let p = Rational::new(BigInt::from(k), BigInt::from(10));
    let dist = Distribution::bernoulli_iid(&Port::boolean("f"), &p, horizon(1)).unwrap();
    ProbContract::new(base, dist).unwrap()
}

fn bits8() -> impl Strategy<Value = Vec<bool>> {
    proptest::collection::vec(any::<bool>(), 8)
}

proptest! {
    #[test]
    fn sat_level_is_antitone_in_the_implementation(k in 0i64..=10, a in bits8(), g in bits8(), m in bits8(), extra in bits8()) {
        let pc = prob_contract(k, &a, &g);
        let sig = prob_sig();
        let small = assertion(&sig, 1, &m);
        let large = small.union(&assertion(&sig, 1, &extra)).unwrap();
        prop_assert!(sat_level(&small, &pc).unwrap().level >= sat_level(&large, &pc).unwrap().level);
    }

    #[test]
    fn sat_level_is_monotone_in_the_guarantee(k in 0i64..=10, a in bits8(), g in bits8(), extra in bits8(), m in bits8()) {
        let wider: Vec<bool> = g.iter().zip(&extra).map(|(x, y)| *x || *y).collect();
        let m = assertion(&prob_sig(), 1, &m);
        let narrow = sat_level(&m, &prob_contract(k, &a, &g)).unwrap().level;
        let wide = sat_level(&m, &prob_contract(k, &a, &wider)).unwrap().level;
        prop_assert!(wide >= narrow);
    }

    /// Level one exactly when the part of M over the support of the
    /// distribution satisfies the base contract.
    #[test]
    fn full_level_is_boolean_satisfaction(k in 0i64..=10, a in bits8(), g in bits8(), m in bits8()) {
        let pc = prob_contract(k, &a, &g);
        let sig = prob_sig();
        let m = assertion(&sig, 1, &m);
        let support = Assertion::from_indices(
            pc.distribution().ports().clone(),
            horizon(1),
            pc.distribution().support().map(|(i, _)| i),
        )
        .unwrap();
        let on_support = m.intersect(&support.lift_ports(&sig).unwrap()).unwrap();
        let level = sat_level(&m, &pc).unwrap().level;
        prop_assert_eq!(level == Rational::from_integer(1.into()), satisfies(&on_support, pc.base()).unwrap());
    }

    /// With a shared signature and distribution, the refinement level is the
    /// worst conditional `P(good₁ ∩ good₂) / P(good₁)` over every
    /// implementation, and bounds the level against the second contract.
    #[test]
    fn refinement_level_is_the_worst_conditional(k in 1i64..=9, a1 in bits8(), g1 in bits8(), a2 in bits8(), g2 in bits8()) {
        let (pc1, pc2) = (prob_contract(k, &a1, &g1), prob_contract(k, &a2, &g2));
        let report = refine_level(&pc1, &pc2).unwrap();
        let sig = prob_sig();
        // Good for both exactly when good for the intersection of the
        // canonical guarantees.
        let both = {
            let g = pc1.base().guarantee().intersect(pc2.base().guarantee()).unwrap();
            let base = Contract::new(sig.clone(), &Assertion::universe(sig.clone(), horizon(1)).unwrap(), &g).unwrap();
            ProbContract::new(base, pc1.distribution().clone()).unwrap()
        };
        let zero = Rational::from_integer(0.into());
        let mut worst: Option<Rational> = None;
        for mask in 0u32..256 {
            let m = Assertion::from_indices(sig.clone(), horizon(1), (0..8).filter(|i| mask >> i & 1 == 1)).unwrap();
            let s1 = sat_level(&m, &pc1).unwrap().level;
            let s2 = sat_level(&m, &pc2).unwrap().level;
            if let Some(g) = &report.level {
                prop_assert!(s2 >= &s1 * g);
            }
            if s1 == zero {
                continue;
            }
            let ratio = sat_level(&m, &both).unwrap().level / s1;
            if worst.as_ref().is_none_or(|w| ratio < *w) {
                worst = Some(ratio);
            }
        }
        match report.level {
            Some(g) => prop_assert_eq!(Some(g), worst),
            None => prop_assert!(report.degenerate),
        }
    }

    #[test]
    fn engine_and_reference_agree_on_generated_instances(seed in any::<u64>()) {
        let inst = gen_instance(seed, &Budget::default());
        for (m, pc) in [(&inst.m1, &inst.pc1), (&inst.m2, &inst.pc2)] {
            let engine = sat_level(&bridge::assertion(m).unwrap(), &bridge::prob_contract(pc).unwrap()).unwrap().level;
            prop_assert_eq!(engine, reference::sat_level(m, pc));
        }
    }
}

// Formulas over `a`, `b` (bool) and `m` (idle, run, fail).

fn name(n: &str) -> Term {
    Term::Name(Ident::new(n))
}

fn formula() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Expr::Const),
        prop_oneof![Just("a"), Just("b")].prop_map(|n| Expr::Atom(name(n))),
        (prop_oneof![Just("idle"), Just("run"), Just("fail")], any::<bool>())
            .prop_map(|(l, eq)| Expr::Cmp(if eq { CmpOp::Eq } else { CmpOp::Ne }, name("m"), name(l))),
        any::<bool>().prop_map(|init| Expr::Atom(Term::Prev {
            port: Ident::new("a"),
            init: Ident::new(if init { "true" } else { "false" })
        })),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::and(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::or(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::implies(x, y)),
            (prop_oneof![Just(Temporal::Always), Just(Temporal::Never), Just(Temporal::Eventually)], inner.clone())
                .prop_map(|(t, e)| Expr::Temporal(t, Box::new(e))),
            (0usize..2, inner.clone()).prop_map(|(k, e)| Expr::At(k, Span::default(), Box::new(e))),
            (inner.clone(), inner).prop_map(|(x, y)| Expr::Cmp(CmpOp::Eq, Term::Formula(Box::new(x)), Term::Formula(Box::new(y)))),
        ]
    })
}

fn formula_sig() -> Signature {
    let m = Port::new("m", vec!["idle".into(), "run".into(), "fail".into()]).unwrap();
    Signature::uniform([Port::boolean("a"), Port::boolean("b"), m], Role::Uncontrolled).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn denote_is_compositional(x in formula(), y in formula(), h in 2usize..=3) {
        let (sig, h) = (formula_sig(), horizon(h));
        let d = |e: &Expr| denote(e, &sig, h).unwrap();
        let (dx, dy) = (d(&x), d(&y));
        prop_assert_eq!(d(&Expr::and(x.clone(), y.clone())), dx.intersect(&dy).unwrap());
        prop_assert_eq!(d(&Expr::or(x.clone(), y.clone())), dx.union(&dy).unwrap());
        prop_assert_eq!(d(&Expr::not(x.clone())), dx.complement());
        prop_assert_eq!(d(&Expr::implies(x.clone(), y.clone())), dx.complement().union(&dy).unwrap());
        let iff = Expr::Cmp(CmpOp::Eq, Term::Formula(Box::new(x.clone())), Term::Formula(Box::new(y.clone())));
        let both = dx.intersect(&dy).unwrap().union(&dx.complement().intersect(&dy.complement()).unwrap()).unwrap();
        prop_assert_eq!(d(&iff), both);

        // Temporal operators unfold into `at` over every step.
        let at = |k: usize, e: &Expr| d(&Expr::At(k, Span::default(), Box::new(e.clone())));
        let steps = 0..h.steps();
        let always = steps.clone().map(|k| at(k, &x)).reduce(|p, q| p.intersect(&q).unwrap()).unwrap();
        let eventually = steps.map(|k| at(k, &x)).reduce(|p, q| p.union(&q).unwrap()).unwrap();
        prop_assert_eq!(d(&Expr::Temporal(Temporal::Always, Box::new(x.clone()))), always);
        prop_assert_eq!(d(&Expr::Temporal(Temporal::Eventually, Box::new(x.clone()))), eventually.clone());
        prop_assert_eq!(d(&Expr::Temporal(Temporal::Never, Box::new(x.clone()))), eventually.complement());
        // The top level is evaluated at step 0.
        prop_assert_eq!(dx, at(0, &x));
    }

    #[test]
    fn printed_formulas_denote_the_same_set(x in formula()) {
        let text = format!(
            "horizon 2; port a : bool; port b : bool; port m : {{idle, run, fail}};\nimpl I (uncontrolled a, b, m) {{ {}; }}\n",
            speclang::print_expr(&x)
        );
        let sys = speclang::load(&text).unwrap();
        let (sig, h) = (formula_sig(), horizon(2));
        let direct = denote(&x, &sig, h).unwrap();
        prop_assert_eq!(sys.implementation("I").unwrap(), &direct);
    }
}

proptest! {
    #[test]
    fn generated_documents_round_trip(seed in any::<u64>()) {
        let doc = gen_document(seed);
        let text = speclang::print(&doc);
        let back = speclang::parse(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(speclang::print(&back), text);
    }

    #[test]
    fn arbitrary_text_yields_documents_or_located_diagnostics(text in "\\PC{0,200}") {
        if let Err(d) = speclang::parse(&text) {
            prop_assert!(d.span.line >= 1 && d.span.col >= 1);
        }
    }
}

#[test]
fn prev_reads_the_previous_step() {
    let (sig, h) = (formula_sig(), horizon(3));
    let prev = |init: &str| Expr::Atom(Term::Prev { port: Ident::new("a"), init: Ident::new(init) });
    let at = |k, e: Expr| denote(&Expr::At(k, Span::default(), Box::new(e)), &sig, h).unwrap();
    assert!(at(0, prev("true")).is_universe());
    assert!(at(0, prev("false")).is_empty());
    for k in 1..3 {
        assert_eq!(at(k, prev("false")), at(k - 1, Expr::Atom(name("a"))));
    }
    let run = Run::new().with("a", vec![1, 0, 1]).with("b", vec![0, 0, 0]).with("m", vec![0, 1, 2]);
    assert!(at(1, prev("false")).contains(&run));
}
