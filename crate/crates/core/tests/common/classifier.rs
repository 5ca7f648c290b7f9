//! Exhaustive census of small preference profiles.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gradarg_core::preferences::{all_profiles, Overall, TotalProfile};
use gradarg_core::resolver::{select, Branch, Resolution, TieBreakStrategy};
use gradarg_core::semantics::StrengthMap;
use gradarg_core::{classify, ArgumentId, ConflictLabel, PreferenceSign, UserId};

#[derive(Debug, Default)]
pub struct Census {
    pub profiles: usize,
    pub unlabeled: usize,
    pub first_unlabeled: Option<String>,
    /// Branch/selection disagreements with the reference rule.
    pub mismatches: Vec<String>,
}

fn describe(p: &TotalProfile) -> String {
    p.users()
        .map(|u| {
            let row: String = p
                .options()
                .iter()
                .map(|o| p.sign(u, o).symbol())
                .collect::<Vec<_>>()
                .join("");
            format!("{u}:{row}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Options the reference rule allows for a no-conflict profile, read off the
/// raw sign table.
fn reference_pool(p: &TotalProfile, branch: Branch) -> Vec<ArgumentId> {
    let users: Vec<&UserId> = p.users().collect();
    let marked = |o: &ArgumentId, s: PreferenceSign| users.iter().any(|u| p.sign(u, o) == s);
    let opts = p.options();
    match branch {
        Branch::C => opts.to_vec(),
        Branch::NC1 => [
            PreferenceSign::Positive,
            PreferenceSign::Indifferent,
            PreferenceSign::Negative,
        ]
        .into_iter()
        .map(|s| {
            opts.iter()
                .filter(|o| p.sign(users[0], o) == s)
                .cloned()
                .collect::<Vec<_>>()
        })
        .find(|v| !v.is_empty())
        .unwrap_or_default(),
        Branch::NC2 => opts
            .iter()
            .filter(|o| marked(o, PreferenceSign::Positive))
            .cloned()
            .collect(),
        Branch::NC3 => opts
            .iter()
            .filter(|o| marked(o, PreferenceSign::Indifferent) && !marked(o, PreferenceSign::Negative))
            .cloned()
            .collect(),
    }
}

fn expected_branch(p: &TotalProfile) -> Branch {
    let c = classify(p);
    if c.overall == Overall::Conflict {
        Branch::C
    } else if c.has(ConflictLabel::NC1) {
        Branch::NC1
    } else if c.has(ConflictLabel::NC2) {
        Branch::NC2
    } else {
        Branch::NC3
    }
}

/// Classifies every profile with 1..=`max_users` users and 1..=`max_options`
/// options, and checks the resolver against the reference pools on random
/// strengths (a third of the draws contain exact ties).
pub fn census(max_users: usize, max_options: usize, seed: u64) -> Census {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Census::default();
    for nu in 1..=max_users {
        for no in 1..=max_options {
            let users: Vec<UserId> = (0..nu).map(|i| UserId::new(&format!("u{i}")).unwrap()).collect();
            let options: Vec<ArgumentId> = (0..no).map(|i| ArgumentId::new(&format!("o{i}")).unwrap()).collect();
            for p in all_profiles(&users, &options) {
                out.profiles += 1;
                let class = classify(&p);
                if class.is_unlabeled() {
                    out.unlabeled += 1;
                    out.first_unlabeled.get_or_insert_with(|| describe(&p));
                }
                let values: BTreeMap<ArgumentId, f64> = options
                    .iter()
                    .map(|o| {
                        let v = if rng.gen_bool(1.0 / 3.0) { 0.5 } else { rng.gen::<f64>() };
                        (o.clone(), v)
                    })
                    .collect();
                let strengths = StrengthMap {
                    values: values.clone(),
                    iterations: 0,
                    converged: true,
                };
                let branch = expected_branch(&p);
                let pool = reference_pool(&p, branch);
                match select(&options, &p, strengths, &TieBreakStrategy::Lexicographic, 1e-9, 0) {
                    Ok(Resolution::Decided(d)) => {
                        let best = pool.iter().map(|o| values[o]).fold(f64::NEG_INFINITY, f64::max);
                        let ok = d.branch == branch
                            && d.eligible == pool
                            && pool.contains(&d.selected)
                            && values[&d.selected] >= best - 1e-9;
                        if !ok {
                            out.mismatches
                                .push(format!("{}: {:?} selected {}", describe(&p), d.branch, d.selected));
                        }
                    }
                    Ok(other) => out.mismatches.push(format!("{}: unexpected {other:?}", describe(&p))),
                    Err(e) => out.mismatches.push(format!("{}: {e}", describe(&p))),
                }
            }
        }
    }
    out
}
