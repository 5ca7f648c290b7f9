//! Scenario 2 attribution reference values.

use gradarg_core::analysis::AttributionTable;
use gradarg_core::corpus::load_bundled;
use gradarg_core::dynamics::{apply_edit, Edit};
use gradarg_core::{Framework, Polarity};

use super::id;

/// Scenario 2 with every argument switched on.
pub fn full_scenario2() -> Framework {
    let fw = load_bundled("frailty_scenario2").unwrap().framework;
    let ids: Vec<_> = fw
        .arguments()
        .filter(|a| !a.is_option())
        .map(|a| a.id.clone())
        .collect();
    ids.into_iter().fold(fw, |fw, id| {
        apply_edit(&fw, &Edit::SetActive { id, active: true }).unwrap()
    })
}

// (polarity, source, target, contribution to R, contribution to not_R)
pub const DIRECT: &[(Polarity, &str, &str, f64, f64)] = &[
    (Polarity::Attack, "T1", "R", -0.15, 0.0),
    (Polarity::Attack, "CR3", "R", -0.14, 0.0),
    (Polarity::Attack, "CR6", "R", -0.12, 0.0),
    (Polarity::Attack, "CG3", "not_R", 0.0, -0.12),
    (Polarity::Attack, "CR7", "R", -0.11, 0.0),
    (Polarity::Attack, "CG4", "not_R", 0.0, -0.11),
    (Polarity::Attack, "CG5", "not_R", 0.0, -0.11),
    (Polarity::Support, "T1", "not_R", 0.0, 0.15),
    (Polarity::Support, "CR3", "not_R", 0.0, 0.14),
    (Polarity::Support, "CR6", "not_R", 0.0, 0.12),
    (Polarity::Support, "CG3", "R", 0.12, 0.0),
    (Polarity::Support, "CR7", "not_R", 0.0, 0.11),
    (Polarity::Support, "CG4", "R", 0.11, 0.0),
    (Polarity::Support, "CG5", "R", 0.11, 0.0),
];

pub const TOLERANCE: f64 = 0.03;

/// Every deviation of a sampled table from the reference: direct edges off by
/// more than the tolerance, non-zero cross-option entries, and efficiency
/// gaps beyond two standard errors.
pub fn problems(t: &AttributionTable) -> Vec<String> {
    let mut out = Vec::new();
    let (r, nr) = (id("R"), id("not_R"));
    for &(pol, s, tgt, cr, cnr) in DIRECT {
        let Some(e) = t.entry(pol, s, tgt) else {
            out.push(format!("missing {} {s} {tgt}", pol.short()));
            continue;
        };
        for (o, want) in [(&r, cr), (&nr, cnr)] {
            let got = e.contributions[o];
            let other_option = tgt != o.as_str();
            if other_option && got != 0.0 {
                out.push(format!("{} {s} {tgt} -> {o}: {got} should be exactly 0", pol.short()));
            } else if (got - want).abs() > TOLERANCE {
                out.push(format!("{} {s} {tgt} -> {o}: {got:.4} vs {want}", pol.short()));
            }
        }
    }
    for o in [&r, &nr] {
        let total = t.total(o);
        let expected = t.final_strengths[o] - t.base_scores[o];
        let se = t.entries.iter().map(|e| e.stderr[o].powi(2)).sum::<f64>().sqrt();
        if (total - expected).abs() > (2.0 * se).max(1e-9) {
            out.push(format!("efficiency {o}: {total} vs {expected} (se {se})"));
        }
    }
    out
}
