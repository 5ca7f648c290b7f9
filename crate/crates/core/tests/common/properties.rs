//! Property checkers over one framework. Each returns `Err(description)` on the
//! first violation.

use std::collections::BTreeMap;

use rand::Rng;

use gradarg_core::dynamics::{
    apply_edit, check_addition_discrimination, check_basescore_discrimination, Edit, GapReport,
};
use gradarg_core::semantics::{Aggregate, EvalConfig};
use gradarg_core::{evaluate, Argument, ArgumentId, Framework, Polarity, Relation, SemanticsKind, StrengthMap};

use super::{id, random_dag, random_polarity};

pub type Check = Result<(), String>;

pub const TOL: f64 = 1e-12;

fn eval(fw: &Framework, kind: SemanticsKind) -> StrengthMap {
    evaluate(fw, kind, &EvalConfig::default()).unwrap()
}

fn non_options(fw: &Framework) -> Vec<ArgumentId> {
    fw.arguments()
        .filter(|a| !a.is_option())
        .map(|a| a.id.clone())
        .collect()
}

fn all_ids(fw: &Framework) -> Vec<ArgumentId> {
    fw.arguments().map(|a| a.id.clone()).collect()
}

fn pick<R: Rng, T: Clone>(rng: &mut R, xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        None
    } else {
        Some(xs[rng.gen_range(0..xs.len())].clone())
    }
}

/// The same framework with one extra relation between existing arguments.
pub fn with_relation(fw: &Framework, rel: Relation) -> Framework {
    let mut b = Framework::builder();
    for u in fw.users() {
        b = b.user(u.as_str());
    }
    for a in fw.arguments() {
        b = b.argument(a.clone());
    }
    for r in fw.relations().chain(std::iter::once(rel)) {
        b = b.relation(r.source.as_str(), r.target.as_str(), r.polarity);
    }
    b.build().unwrap()
}

fn tau(fw: &Framework, a: &ArgumentId) -> f64 {
    fw.argument(a).unwrap().base_score
}

fn aggregate_of(fw: &Framework, s: &StrengthMap, a: &ArgumentId, mirror: bool) -> Aggregate {
    let mut agg = Aggregate::default();
    for (src, pol) in fw.incoming(a) {
        let pol = if mirror { pol.flipped() } else { pol };
        agg.push(s.get(src).unwrap(), pol);
    }
    agg
}

pub fn stability(fw: &Framework, kind: SemanticsKind) -> Check {
    let s = eval(fw, kind);
    for a in fw.arguments() {
        if fw.incoming(&a.id).next().is_none() && (s.get(&a.id).unwrap() - a.base_score).abs() > TOL {
            return Err(format!("{}: σ={} τ={}", a.id, s.get(&a.id).unwrap(), a.base_score));
        }
    }
    Ok(())
}

pub fn neutrality<R: Rng>(rng: &mut R, fw: &Framework, kind: SemanticsKind) -> Check {
    let target = pick(rng, &all_ids(fw)).unwrap();
    let zero = Argument::task(id("ZERO")).with_base(0.0).with_active(true);
    let after = apply_edit(
        fw,
        &Edit::AddArgument {
            argument: zero,
            relations: vec![Relation::new(id("ZERO"), target.clone(), random_polarity(rng))],
        },
    )
    .unwrap();
    let (s0, s1) = (eval(fw, kind), eval(&after, kind));
    for a in all_ids(fw) {
        if (s0.get(&a).unwrap() - s1.get(&a).unwrap()).abs() > TOL {
            return Err(format!("zero-strength parent of {target} moved {a}"));
        }
    }
    Ok(())
}

/// Adds a twin of an existing argument (same base score and parents, hence the
/// same strength) and a fresh argument attacked by one twin and supported by the other.
pub fn franklin<R: Rng>(rng: &mut R, fw: &Framework, kind: SemanticsKind) -> Check {
    let Some(p) = pick(rng, &non_options(fw)) else {
        return Ok(());
    };
    let twin = id("TWIN");
    let parents: Vec<Relation> = fw
        .incoming(&p)
        .map(|(src, pol)| Relation::new(src.clone(), twin.clone(), pol))
        .collect();
    let fw1 = apply_edit(
        fw,
        &Edit::AddArgument {
            argument: Argument::task(twin.clone()).with_base(tau(fw, &p)).with_active(true),
            relations: parents,
        },
    )
    .unwrap();
    let base = rng.gen_range(0.01..0.99);
    let x = id("X");
    let fw2 = apply_edit(
        &fw1,
        &Edit::AddArgument {
            argument: Argument::task(x.clone()).with_base(base).with_active(true),
            relations: vec![
                Relation::new(p.clone(), x.clone(), Polarity::Attack),
                Relation::new(twin, x.clone(), Polarity::Support),
            ],
        },
    )
    .unwrap();
    let s = eval(&fw2, kind);
    if (s.get(&x).unwrap() - base).abs() > TOL {
        return Err(format!("σ(X)={} τ(X)={base}", s.get(&x).unwrap()));
    }
    Ok(())
}

pub fn monotony<R: Rng>(rng: &mut R, fw: &Framework, kind: SemanticsKind) -> Check {
    let targets = all_ids(fw);
    let sources = non_options(fw);
    for _ in 0..20 {
        let (Some(t), Some(src)) = (pick(rng, &targets), pick(rng, &sources)) else {
            return Ok(());
        };
        if t == src || fw.polarity(&src, &t).is_some() || fw.has_path(&t, &src) {
            continue;
        }
        let before = eval(fw, kind).get(&t).unwrap();
        for pol in [Polarity::Attack, Polarity::Support] {
            let after = eval(&with_relation(fw, Relation::new(src.clone(), t.clone(), pol)), kind)
                .get(&t)
                .unwrap();
            let bad = match pol {
                Polarity::Attack => after > before + TOL,
                Polarity::Support => after < before - TOL,
            };
            if bad {
                return Err(format!("{pol:?} {src}->{t}: {before} -> {after}"));
            }
        }
        return Ok(());
    }
    Ok(())
}

pub fn directionality<R: Rng>(rng: &mut R, fw: &Framework, kind: SemanticsKind) -> Check {
    let b = pick(rng, &all_ids(fw)).unwrap();
    let after = apply_edit(
        fw,
        &Edit::SetBaseScore {
            id: b.clone(),
            base_score: rng.gen_range(0.0..=1.0),
        },
    )
    .unwrap();
    let (s0, s1) = (eval(fw, kind), eval(&after, kind));
    for a in all_ids(fw) {
        if a != b && !fw.has_path(&b, &a) && s0.get(&a).unwrap().to_bits() != s1.get(&a).unwrap().to_bits() {
            return Err(format!("editing {b} changed unreachable {a}"));
        }
    }
    Ok(())
}

pub fn resilience(fw: &Framework, kind: SemanticsKind) -> Check {
    let s = eval(fw, kind);
    for (a, v) in &s.values {
        let t = tau(fw, a);
        if t > 0.0 && t < 1.0 && !(*v > 0.0 && *v < 1.0) {
            return Err(format!("{a}: τ={t} σ={v}"));
        }
    }
    Ok(())
}

/// Local duality: with the parents' strengths fixed, mirroring the polarity of
/// every incoming edge and replacing τ by 1 − τ maps σ to 1 − σ.
pub fn duality(fw: &Framework, kind: SemanticsKind) -> Check {
    let s = eval(fw, kind);
    for a in fw.arguments() {
        let agg = aggregate_of(fw, &s, &a.id, false);
        let mirrored = aggregate_of(fw, &s, &a.id, true);
        let sigma = kind.influence(a.base_score, &agg);
        let dual = kind.influence(1.0 - a.base_score, &mirrored);
        if (dual - (1.0 - sigma)).abs() > 1e-9 {
            return Err(format!("{}: σ={sigma} dual={dual}", a.id));
        }
    }
    Ok(())
}

/// Negative dominance lowers σ below τ and positive dominance raises it above.
/// Dominances within 1e-6 of zero are skipped as numerically undecidable.
pub fn weakening_strengthening(fw: &Framework, kind: SemanticsKind) -> Check {
    let s = eval(fw, kind);
    for a in fw.arguments() {
        let d = kind.dominance(&aggregate_of(fw, &s, &a.id, false));
        let (v, t) = (s.get(&a.id).unwrap(), a.base_score);
        if (d < -1e-6 && v >= t) || (d > 1e-6 && v <= t) {
            return Err(format!("{}: dominance {d} σ={v} τ={t}", a.id));
        }
    }
    Ok(())
}

pub fn iterative_agrees(fw: &Framework, kind: SemanticsKind) -> Check {
    let exact = eval(fw, kind);
    let iter = evaluate(fw, kind, &EvalConfig::iterative()).unwrap();
    if !iter.converged {
        return Err("iteration did not converge".into());
    }
    for (a, v) in &exact.values {
        if (iter.get(a).unwrap() - v).abs() > 1e-6 {
            return Err(format!("{a}: topological {v} iterative {}", iter.get(a).unwrap()));
        }
    }
    Ok(())
}

pub fn determinism(fw: &Framework, kind: SemanticsKind) -> Check {
    let (a, b) = (eval(fw, kind), eval(fw, kind));
    let bits = |m: &StrengthMap| m.values.values().map(|v| v.to_bits()).collect::<Vec<_>>();
    if bits(&a) != bits(&b) {
        return Err("two evaluations differ".into());
    }
    Ok(())
}

pub const PROPERTY_NAMES: [&str; 10] = [
    "stability",
    "neutrality",
    "franklin",
    "monotony",
    "directionality",
    "resilience",
    "duality",
    "weakening_strengthening",
    "iterative_agrees",
    "determinism",
];

/// Runs every property on `count` random acyclic frameworks of at most 15
/// arguments; returns the first failure per property name.
pub fn property_suite(seed: u64, count: usize, kind: SemanticsKind) -> BTreeMap<&'static str, Option<String>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out: BTreeMap<&'static str, Option<String>> = PROPERTY_NAMES.iter().map(|n| (*n, None)).collect();
    for case in 0..count {
        let n = rng.gen_range(1..=13);
        let density = rng.gen_range(0.1..0.6);
        let fw = random_dag(&mut rng, n, 2, density);
        let results: [Check; 10] = [
            stability(&fw, kind),
            neutrality(&mut rng, &fw, kind),
            franklin(&mut rng, &fw, kind),
            monotony(&mut rng, &fw, kind),
            directionality(&mut rng, &fw, kind),
            resilience(&fw, kind),
            duality(&fw, kind),
            weakening_strengthening(&fw, kind),
            iterative_agrees(&fw, kind),
            determinism(&fw, kind),
        ];
        for (name, r) in PROPERTY_NAMES.iter().zip(results) {
            if let Err(msg) = r {
                out.get_mut(name).unwrap().get_or_insert(format!("case {case}: {msg}"));
            }
        }
    }
    out
}

#[derive(Debug, Default, Clone, Copy)]
pub struct DiscriminationTally {
    pub checked: usize,
    pub counterexamples: usize,
    /// Edits whose gap change vanished in f64 but is positive in exact arithmetic.
    pub settled_exactly: usize,
    pub attempts: usize,
}

/// An applicable edit with the frameworks on either side of it.
pub struct Trial {
    pub report: GapReport,
    pub before: Framework,
    pub after: Framework,
}

fn options_pair<R: Rng>(rng: &mut R) -> (ArgumentId, ArgumentId) {
    if rng.gen_bool(0.5) {
        (id("O0"), id("O1"))
    } else {
        (id("O1"), id("O0"))
    }
}

/// One random argument-addition trial; `None` when the edit falls outside the
/// preconditions.
pub fn addition_trial<R: Rng>(rng: &mut R, kind: SemanticsKind) -> Option<Trial> {
    let n = rng.gen_range(1..=12);
    let density = rng.gen_range(0.1..0.5);
    let fw = random_dag(rng, n, 2, density);
    let (o1, o2) = options_pair(rng);
    let alpha = id("ALPHA");
    let ids = all_ids(&fw);
    let mut relations: Vec<Relation> = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let t = pick(rng, &ids).unwrap();
        if relations.iter().all(|r| r.target != t) {
            relations.push(Relation::new(alpha.clone(), t, random_polarity(rng)));
        }
    }
    let after = apply_edit(
        &fw,
        &Edit::AddArgument {
            argument: Argument::task(alpha)
                .with_base(rng.gen_range(0.01..=0.99))
                .with_active(true),
            relations,
        },
    )
    .ok()?;
    let report = check_addition_discrimination(&fw, &after, &o1, &o2, kind).unwrap();
    report.applicable.then_some(Trial {
        report,
        before: fw,
        after,
    })
}

pub fn basescore_trial<R: Rng>(rng: &mut R, kind: SemanticsKind) -> Option<Trial> {
    let n = rng.gen_range(1..=12);
    let density = rng.gen_range(0.1..0.5);
    let fw = random_dag(rng, n, 2, density);
    let (o1, o2) = options_pair(rng);
    let b = pick(rng, &non_options(&fw))?;
    let new = rng.gen_range(0.01..=0.99);
    if new == tau(&fw, &b) {
        return None;
    }
    let after = apply_edit(&fw, &Edit::SetBaseScore { id: b, base_score: new }).unwrap();
    let report = check_basescore_discrimination(&fw, &after, &o1, &o2, kind).unwrap();
    report.applicable.then_some(Trial {
        report,
        before: fw,
        after,
    })
}

/// Draws trials until `target` applicable edits were checked (or the attempt
/// budget runs out). A gap that failed to widen in f64 is re-checked exactly
/// where the semantics allows it; only a confirmed failure counts.
pub fn discrimination_run(
    seed: u64,
    target: usize,
    kind: SemanticsKind,
    trial: fn(&mut rand_chacha::ChaCha8Rng, SemanticsKind) -> Option<Trial>,
) -> (DiscriminationTally, Option<GapReport>) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut tally = DiscriminationTally::default();
    let mut first = None;
    while tally.checked < target && tally.attempts < target * 50 {
        tally.attempts += 1;
        if let Some(t) = trial(&mut rng, kind) {
            tally.checked += 1;
            if !t.report.is_counterexample() {
                continue;
            }
            let r = &t.report;
            let exact = super::exact::gap_change(&t.before, &t.after, &r.o1, &r.o2, kind);
            if exact.as_ref().is_some_and(super::exact::is_positive) {
                tally.settled_exactly += 1;
            } else {
                tally.counterexamples += 1;
                first.get_or_insert(t.report);
            }
        }
    }
    (tally, first)
}
