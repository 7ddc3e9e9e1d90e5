//! Theorem and lemma suites, each run against both the engine and the
//! reference implementation.

use std::fmt;

use serde::Serialize;

use super::bridge;
use super::generate::{gen_disjoint_instance, gen_instance, gen_lemma2, gen_refinement, gen_satisfying_instance, Budget, Instance};
use super::reference as oracle;
use crate::contracts::{compose, compose_implementations, refines, satisfies};
use crate::error::Result;
use crate::probabilistic::{compose_prob, refine_level, sat_level};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: u64,
    pub total: u64,
    /// Seed of the first failing instance.
    pub first_failure: Option<u64>,
}

impl Tally {
    fn record(&mut self, seed: u64, ok: bool) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.first_failure.is_none() {
            self.first_failure = Some(seed);
        }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

impl fmt::Display for Tally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.passed, self.total)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    /// The composition bound together with exact equality on the disjoint
    /// variant of the same seed.
    pub theorem1: Tally,
    pub theorem1_bound: Tally,
    pub theorem1_tightness: Tally,
    pub theorem2: Tally,
    /// Instances with the coarse guarantee inside the fine one on which the
    /// refinement bound is met with equality.
    pub theorem2_equalities: u64,
    pub lemma1: Tally,
    /// Instances where both components satisfied their contracts.
    pub lemma1_premises: u64,
    pub lemma2: Tally,
    /// One entry per engine value compared with the reference.
    pub agreement: Tally,
    /// Instances on which all three satisfaction formulas agreed.
    pub formulas: Tally,
}

impl Summary {
    pub fn ok(&self) -> bool {
        self.theorem1.ok() && self.theorem2.ok() && self.lemma1.ok() && self.lemma2.ok() && self.agreement.ok() && self.formulas.ok()
    }

    /// Share of agreeing comparisons, rounded down so that anything short
    /// of full agreement never reads as 100%.
    pub fn agreement_percent(&self) -> String {
        let a = &self.agreement;
        if a.ok() {
            return "100%".into();
        }
        let basis = a.passed as u128 * 10_000 / a.total as u128;
        format!("{}.{:02}%", basis / 100, basis % 100)
    }

    pub fn failures(&self) -> Vec<(&'static str, u64)> {
        [
            ("theorem1", &self.theorem1),
            ("theorem2", &self.theorem2),
            ("lemma1", &self.lemma1),
            ("lemma2", &self.lemma2),
            ("oracle-agreement", &self.agreement),
            ("satisfaction-formulas", &self.formulas),
        ]
        .into_iter()
        .filter_map(|(n, t)| t.first_failure.map(|s| (n, s)))
        .collect()
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "theorem1: {}, theorem2: {}, lemma1: {}, lemma2: {}, oracle-agreement: {}",
            self.theorem1,
            self.theorem2,
            self.lemma1,
            self.lemma2,
            self.agreement_percent()
        )
    }
}

/// One line of the machine-readable report.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Record {
    pub suite: &'static str,
    pub seed: u64,
    pub ok: bool,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composed: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Collects engine/reference comparisons for one instance.
struct Checks<'a> {
    seed: u64,
    tally: &'a mut Tally,
    all: bool,
}

impl Checks<'_> {
    fn eq<T: PartialEq>(&mut self, engine: &T, reference: &T) -> bool {
        let same = engine == reference;
        self.tally.record(self.seed, same);
        self.all &= same;
        same
    }
}

fn r(x: &Rational) -> String {
    rational::exact(x)
}

struct Composed {
    beta1: Rational,
    beta2: Rational,
    level: Rational,
}

/// Runs the composition pipeline on both sides and compares every value.
fn composition(inst: &Instance, checks: &mut Checks<'_>) -> Result<(Composed, Composed)> {
    let (pc1, pc2) = (bridge::prob_contract(&inst.pc1)?, bridge::prob_contract(&inst.pc2)?);
    let (m1, m2) = (bridge::assertion(&inst.m1)?, bridge::assertion(&inst.m2)?);
    let composed = compose_prob(&pc1, &pc2)?;
    let m12 = compose_implementations(&m1, &m2)?;
    let engine = Composed {
        beta1: sat_level(&m1, &pc1)?.level,
        beta2: sat_level(&m2, &pc2)?.level,
        level: sat_level(&m12, &composed)?.level,
    };

    let ocomposed = oracle::compose_prob(&inst.pc1, &inst.pc2).expect("generated instances compose");
    let om12 = oracle::compose_implementations(&inst.m1, &inst.m2).expect("generated implementations compose");
    let reference = Composed {
        beta1: oracle::sat_level(&inst.m1, &inst.pc1),
        beta2: oracle::sat_level(&inst.m2, &inst.pc2),
        level: oracle::sat_level(&om12, &ocomposed),
    };

    checks.eq(&engine.beta1, &reference.beta1);
    checks.eq(&engine.beta2, &reference.beta2);
    checks.eq(&engine.level, &reference.level);
    checks.eq(&bridge::runs_of(composed.base().guarantee()), &ocomposed.contract.guarantee.runs);
    checks.eq(&bridge::runs_of(composed.base().assumption()), &ocomposed.contract.assume.runs);
    checks.eq(composed.signature(), &bridge::signature(&ocomposed.contract.ports)?);
    checks.eq(&bridge::runs_of(&m12), &om12.runs);
    checks.eq(composed.distribution(), &bridge::distribution(&ocomposed.dist, inst.m1.horizon)?);
    Ok((engine, reference))
}

fn error_record(suite: &'static str, seed: u64, e: impl ToString) -> Record {
    Record { suite, seed, error: Some(e.to_string()), ..Record::default() }
}

fn theorem1(seed: u64, budget: &Budget, summary: &mut Summary) -> Vec<Record> {
    let mut out = Vec::new();
    let mut checks = Checks { seed, tally: &mut summary.agreement, all: true };
    let bound = composition(&gen_instance(seed, budget), &mut checks).map(|(e, o)| {
        let ok = e.level >= &e.beta1 * &e.beta2 && o.level >= &o.beta1 * &o.beta2;
        (ok, e)
    });
    let agree = checks.all;
    let mut checks = Checks { seed, tally: &mut summary.agreement, all: true };
    let tight = composition(&gen_disjoint_instance(seed, budget), &mut checks).map(|(e, o)| {
        let ok = e.level == &e.beta1 * &e.beta2 && o.level == &o.beta1 * &o.beta2;
        (ok, e)
    });
    let tight_agree = checks.all;

    let mut verdict = |suite, res: Result<(bool, Composed)>, agree: bool, tally: &mut Tally| -> bool {
        match res {
            Ok((ok, e)) => {
                tally.record(seed, ok);
                out.push(Record {
                    suite,
                    seed,
                    ok,
                    agree,
                    bound: Some(r(&(&e.beta1 * &e.beta2))),
                    beta1: Some(r(&e.beta1)),
                    beta2: Some(r(&e.beta2)),
                    composed: Some(r(&e.level)),
                    ..Record::default()
                });
                ok
            }
            Err(err) => {
                tally.record(seed, false);
                out.push(error_record(suite, seed, err));
                false
            }
        }
    };
    let b = verdict("theorem1", bound, agree, &mut summary.theorem1_bound);
    let t = verdict("theorem1-tightness", tight, tight_agree, &mut summary.theorem1_tightness);
    summary.theorem1.record(seed, b && t);
    out
}

fn theorem2(seed: u64, budget: &Budget, summary: &mut Summary) -> Vec<Record> {
    let mut out = Vec::new();
    for tight in [false, true] {
        let inst = gen_refinement(seed, budget, tight);
        let mut checks = Checks { seed, tally: &mut summary.agreement, all: true };
        let run = || -> Result<_> {
            let (pc1, pc2) = (bridge::prob_contract(&inst.pc1)?, bridge::prob_contract(&inst.pc2)?);
            let m = bridge::assertion(&inst.m)?;
            Ok((sat_level(&m, &pc1)?.level, sat_level(&m, &pc2)?.level, refine_level(&pc1, &pc2)?.level))
        };
        let (s1, s2, gamma) = match run() {
            Ok(v) => v,
            Err(e) => {
                if !tight {
                    summary.theorem2.record(seed, false);
                }
                out.push(error_record("theorem2", seed, e));
                continue;
            }
        };
        let o1 = oracle::sat_level(&inst.m, &inst.pc1);
        let o2 = oracle::sat_level(&inst.m, &inst.pc2);
        let og = oracle::refine_level(&inst.pc1, &inst.pc2);
        checks.eq(&s1, &o1);
        checks.eq(&s2, &o2);
        checks.eq(&gamma, &og);
        let agree = checks.all;
        let (Some(g), Some(og)) = (gamma, og) else {
            // The generator guarantees non-degenerate conditioning.
            summary.theorem2.record(seed, false);
            out.push(error_record("theorem2", seed, "degenerate conditioning"));
            continue;
        };
        let bound = &s1 * &g;
        let ok = s2 >= bound && o2 >= &o1 * &og;
        if tight {
            if s2 == bound {
                summary.theorem2_equalities += 1;
            }
        } else {
            summary.theorem2.record(seed, ok);
        }
        out.push(Record {
            suite: if tight { "theorem2-probe" } else { "theorem2" },
            seed,
            ok,
            agree,
            beta1: Some(r(&s1)),
            beta2: Some(r(&s2)),
            gamma: Some(r(&g)),
            bound: Some(r(&bound)),
            ..Record::default()
        });
    }
    out
}

fn lemma1(seed: u64, budget: &Budget, summary: &mut Summary) -> Record {
    let inst = gen_satisfying_instance(seed, budget);
    let mut checks = Checks { seed, tally: &mut summary.agreement, all: true };
    let run = |checks: &mut Checks<'_>| -> Result<(bool, bool)> {
        let (c1, c2) = (bridge::contract(&inst.pc1.contract)?, bridge::contract(&inst.pc2.contract)?);
        let (m1, m2) = (bridge::assertion(&inst.m1)?, bridge::assertion(&inst.m2)?);
        let c = compose(&c1, &c2)?;
        let m = compose_implementations(&m1, &m2)?;
        let (s1, s2, s) = (satisfies(&m1, &c1)?, satisfies(&m2, &c2)?, satisfies(&m, &c)?);
        let oc = oracle::compose(&inst.pc1.contract, &inst.pc2.contract).expect("composable");
        let om = oracle::compose_implementations(&inst.m1, &inst.m2).expect("composable");
        let (o1, o2, o) = (
            oracle::satisfies(&inst.m1, &inst.pc1.contract),
            oracle::satisfies(&inst.m2, &inst.pc2.contract),
            oracle::satisfies(&om, &oc),
        );
        checks.eq(&s1, &o1);
        checks.eq(&s2, &o2);
        checks.eq(&s, &o);
        checks.eq(&bridge::runs_of(c.guarantee()), &oc.guarantee.runs);
        Ok((s1 && s2, (!(s1 && s2) || s) && (!(o1 && o2) || o)))
    };
    match run(&mut checks) {
        Ok((premise, ok)) => {
            let agree = checks.all;
            summary.lemma1_premises += premise as u64;
            summary.lemma1.record(seed, ok);
            Record { suite: "lemma1", seed, ok, agree, ..Record::default() }
        }
        Err(e) => {
            summary.lemma1.record(seed, false);
            error_record("lemma1", seed, e)
        }
    }
}

fn lemma2(seed: u64, budget: &Budget, summary: &mut Summary) -> Record {
    let inst = gen_lemma2(seed, budget);
    let mut checks = Checks { seed, tally: &mut summary.agreement, all: true };
    let run = |checks: &mut Checks<'_>| -> Result<bool> {
        let [f1, c1, f2, c2] = [&inst.fine1, &inst.coarse1, &inst.fine2, &inst.coarse2].map(bridge::contract);
        let (f1, c1, f2, c2) = (f1?, c1?, f2?, c2?);
        let m = bridge::assertion(&inst.m)?;

        // Refinement carries satisfaction over.
        let (r1, sf, sc) = (refines(&f1, &c1)?, satisfies(&m, &f1)?, satisfies(&m, &c1)?);
        let or1 = oracle::refines(&inst.fine1, &inst.coarse1);
        let (osf, osc) = (oracle::satisfies(&inst.m, &inst.fine1), oracle::satisfies(&inst.m, &inst.coarse1));
        checks.eq(&r1, &or1);
        checks.eq(&sf, &osf);
        checks.eq(&sc, &osc);
        let item1 = (!(r1 && sf) || sc) && (!(or1 && osf) || osc);

        // Refinement is compatible with composition.
        let r2 = refines(&f2, &c2)?;
        let rc = refines(&compose(&f1, &f2)?, &compose(&c1, &c2)?)?;
        let or2 = oracle::refines(&inst.fine2, &inst.coarse2);
        let orc = oracle::refines(
            &oracle::compose(&inst.fine1, &inst.fine2).expect("composable"),
            &oracle::compose(&inst.coarse1, &inst.coarse2).expect("composable"),
        );
        checks.eq(&r2, &or2);
        checks.eq(&rc, &orc);
        let item2 = (!(r1 && r2) || rc) && (!(or1 && or2) || orc);
        Ok(item1 && item2)
    };
    match run(&mut checks) {
        Ok(ok) => {
            let agree = checks.all;
            summary.lemma2.record(seed, ok);
            Record { suite: "lemma2", seed, ok, agree, ..Record::default() }
        }
        Err(e) => {
            summary.lemma2.record(seed, false);
            error_record("lemma2", seed, e)
        }
    }
}

/// The three satisfaction formulas agree with each other and with the
/// reference on both sides of a generated instance.
fn formulas(seed: u64, budget: &Budget, summary: &mut Summary) -> Record {
    let inst = gen_instance(seed, budget);
    let run = || -> Result<bool> {
        let mut ok = true;
        for (m, c) in [(&inst.m1, &inst.pc1.contract), (&inst.m2, &inst.pc2.contract)] {
            let f = crate::contracts::satisfaction_formulas(&bridge::assertion(m)?, &bridge::contract(c)?)?;
            let expected = oracle::satisfies(m, c);
            ok &= f.iter().all(|&b| b == expected);
        }
        Ok(ok)
    };
    match run() {
        Ok(ok) => {
            summary.formulas.record(seed, ok);
            Record { suite: "satisfaction-formulas", seed, ok, agree: ok, ..Record::default() }
        }
        Err(e) => {
            summary.formulas.record(seed, false);
            error_record("satisfaction-formulas", seed, e)
        }
    }
}

/// Runs every suite on seeds `first..first + count`, passing each record to
/// `sink` as it is produced.
pub fn run_suites(first: u64, count: u64, budget: &Budget, mut sink: impl FnMut(&Record)) -> Summary {
    let mut summary = Summary::default();
    for seed in first..first + count {
        for rec in theorem1(seed, budget, &mut summary) {
            sink(&rec);
        }
        for rec in theorem2(seed, budget, &mut summary) {
            sink(&rec);
        }
        sink(&lemma1(seed, budget, &mut summary));
        sink(&lemma2(seed, budget, &mut summary));
        sink(&formulas(seed, budget, &mut summary));
    }
    summary
}
