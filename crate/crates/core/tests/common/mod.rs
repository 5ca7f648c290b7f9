#![allow(dead_code)]

pub mod classifier;
pub mod exact;
pub mod properties;
pub mod reference_attribution;
pub mod script;

use std::collections::BTreeSet;

use rand::Rng;

use gradarg_core::{Argument, ArgumentId, Framework, Polarity, PreferenceSign, UserId};

pub fn id(s: &str) -> ArgumentId {
    ArgumentId::new(s).unwrap()
}

/// Relations of a bundled corpus as `att A B` / `sup A B` lines.
pub fn corpus_relation_lines(name: &str) -> BTreeSet<String> {
    let fw = gradarg_core::corpus::load_bundled(name).unwrap().framework;
    fw.relations()
        .map(|r| format!("{} {} {}", r.polarity.short(), r.source, r.target))
        .collect()
}

pub fn golden_relations(file: &str) -> BTreeSet<String> {
    let path = format!("{}/tests/golden/{file}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect()
}

/// Random acyclic framework: active task arguments `A0..A{n-1}` in topological
/// order, followed by `options` sink options `O0..`. Every base score lies in
/// [0.01, 0.99].
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, options: usize, density: f64) -> Framework {
    let mut b = Framework::builder();
    let names: Vec<String> = (0..n).map(|i| format!("A{i}")).collect();
    let opts: Vec<String> = (0..options).map(|i| format!("O{i}")).collect();
    for name in &names {
        b = b.task(name, rng.gen_range(0.01..0.99));
    }
    for o in &opts {
        b = b.argument(Argument::option(id(o)).with_base(rng.gen_range(0.01..0.99)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                b = b.relation(&names[i], &names[j], random_polarity(rng));
            }
        }
        for o in &opts {
            if rng.gen_bool(density) {
                b = b.relation(&names[i], o, random_polarity(rng));
            }
        }
    }
    b.build().unwrap()
}

pub fn random_polarity<R: Rng>(rng: &mut R) -> Polarity {
    if rng.gen_bool(0.5) {
        Polarity::Attack
    } else {
        Polarity::Support
    }
}

fn random_label<R: Rng>(rng: &mut R) -> Option<String> {
    const PIECES: &[&str] = &[
        "risk",
        " of ",
        "falling",
        "\"quoted\"",
        "back\\slash",
        "line\nbreak",
        "σ",
        "¬r",
        "#hash",
        "=",
    ];
    if rng.gen_bool(0.3) {
        return None;
    }
    let k = rng.gen_range(1..5);
    Some((0..k).map(|_| PIECES[rng.gen_range(0..PIECES.len())]).collect())
}

/// Random framework exercising every construct of the text format: users,
/// owners, labels with escapes, derived activation, inactive arguments,
/// arbitrary base scores and preferences.
pub fn random_document_framework<R: Rng>(rng: &mut R) -> Framework {
    let users: Vec<String> = (0..rng.gen_range(0..4)).map(|i| format!("u{i}")).collect();
    let n_opts = rng.gen_range(1..4);
    let n = rng.gen_range(0..12);
    let mut args: Vec<Argument> = Vec::new();
    for i in 0..n_opts {
        let mut a = Argument::option(id(&format!("O{i}")));
        if rng.gen_bool(0.3) {
            a = a.with_base(rng.gen::<f64>());
        }
        if let Some(l) = random_label(rng) {
            a = a.with_label(l);
        }
        args.push(a);
    }
    let mut names = Vec::new();
    for i in 0..n {
        let name = format!("X{i}");
        let mut a = if !users.is_empty() && rng.gen_bool(0.5) {
            let owner = &users[rng.gen_range(0..users.len())];
            Argument::user(id(&name), UserId::new(owner).unwrap())
        } else {
            Argument::task(id(&name))
        };
        a = a.with_base(rng.gen::<f64>()).with_active(rng.gen_bool(0.5));
        if let Some(l) = random_label(rng) {
            a = a.with_label(l);
        }
        if i > 0 && rng.gen_bool(0.2) {
            let k = rng.gen_range(1..=i.min(3));
            let mut from: Vec<ArgumentId> = (0..k).map(|_| id(&format!("X{}", rng.gen_range(0..i)))).collect();
            from.sort();
            from.dedup();
            a = a.derived_from(from);
        }
        args.push(a);
        names.push(name);
    }
    let mut b = Framework::builder();
    for u in &users {
        b = b.user(u);
    }
    for a in args {
        b = b.argument(a);
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.25) {
                b = b.relation(&names[i], &names[j], random_polarity(rng));
            }
        }
        for o in 0..n_opts {
            if rng.gen_bool(0.3) {
                b = b.relation(&names[i], &format!("O{o}"), random_polarity(rng));
            }
        }
    }
    for u in &users {
        for o in 0..n_opts {
            let sign = match rng.gen_range(0..4) {
                0 => continue,
                1 => PreferenceSign::Positive,
                2 => PreferenceSign::Negative,
                _ => PreferenceSign::Indifferent,
            };
            b = b.preference(u, &format!("O{o}"), sign);
        }
    }
    b.build().unwrap()
}
