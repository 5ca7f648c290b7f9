//! A scripted 20-event session on scenario 2 with decisions in between.

use std::collections::BTreeMap;

use gradarg_core::dynamics::Edit;
use gradarg_core::resolver::{ResolveConfig, TieBreakStrategy};
use gradarg_core::session::{DecisionRequest, Role, Session, SessionSource};
use gradarg_core::{Argument, Polarity, PreferenceSign, Relation, SemanticsKind, UserId};

use super::id;

pub fn participants() -> BTreeMap<String, Role> {
    BTreeMap::from([
        ("alice".to_string(), Role::User(UserId::new("cg").unwrap())),
        ("bob".to_string(), Role::User(UserId::new("cr").unwrap())),
        ("pepper".to_string(), Role::Robot),
    ])
}

pub enum Step {
    Event(&'static str, Edit),
    Decide(DecisionRequest),
}

fn on(s: &str) -> Edit {
    Edit::SetActive {
        id: id(s),
        active: true,
    }
}

fn off(s: &str) -> Edit {
    Edit::SetActive {
        id: id(s),
        active: false,
    }
}

fn decide(semantics: SemanticsKind, strategy: TieBreakStrategy) -> Step {
    Step::Decide(DecisionRequest { semantics, strategy })
}

pub fn steps() -> Vec<Step> {
    use Step::Event;
    let cg = UserId::new("cg").unwrap();
    vec![
        Event("alice", on("CG4")),
        Event("alice", on("CG5")),
        Event("bob", on("CR3")),
        decide(SemanticsKind::QuadraticEnergy, TieBreakStrategy::Lexicographic),
        Event("pepper", on("T3")),
        Event("bob", on("CR4")),
        decide(SemanticsKind::DfQuad, TieBreakStrategy::Lexicographic),
        Event(
            "pepper",
            Edit::SetBaseScore {
                id: id("T3"),
                base_score: 0.8,
            },
        ),
        Event("alice", on("CG2")),
        Event(
            "alice",
            Edit::SetPreference {
                user: cg.clone(),
                option: id("not_R"),
                sign: PreferenceSign::Indifferent,
            },
        ),
        decide(SemanticsKind::EulerBased, TieBreakStrategy::Interactive),
        Event(
            "alice",
            Edit::AddArgument {
                argument: Argument::user(id("CG9"), cg.clone())
                    .with_active(true)
                    .with_label("extra caregiver argument"),
                relations: vec![Relation::new(id("CG9"), id("R"), Polarity::Support)],
            },
        ),
        Event("bob", on("CR6")),
        Event("pepper", on("T6")),
        Event("bob", on("CR7")),
        decide(
            SemanticsKind::QuadraticEnergy,
            TieBreakStrategy::ExternalRank {
                order: vec![id("not_R"), id("R")],
            },
        ),
        Event("pepper", on("T8")),
        Event(
            "alice",
            Edit::SetBaseScore {
                id: id("CG9"),
                base_score: 0.9,
            },
        ),
        Event("pepper", off("T3")),
        Event("alice", on("CG3")),
        Event("pepper", on("T7")),
        decide(SemanticsKind::QuadraticEnergy, TieBreakStrategy::Interactive),
        Event("alice", Edit::RemoveArgument { id: id("CG2") }),
        Event(
            "bob",
            Edit::SetBaseScore {
                id: id("CR3"),
                base_score: 0.3,
            },
        ),
        Event(
            "alice",
            Edit::SetPreference {
                user: cg,
                option: id("not_R"),
                sign: PreferenceSign::Negative,
            },
        ),
        decide(SemanticsKind::QuadraticEnergy, TieBreakStrategy::Lexicographic),
        decide(SemanticsKind::DfQuad, TieBreakStrategy::Lexicographic),
    ]
}

/// Runs the script on a fresh session.
pub fn run(config: &ResolveConfig) -> Session {
    let mut s = Session::create(
        "scripted".into(),
        SessionSource::Corpus {
            name: "frailty_scenario2".into(),
        },
        participants(),
    )
    .unwrap();
    for step in steps() {
        match step {
            Step::Event(actor, edit) => {
                s.post_event(actor, edit, config).unwrap();
            }
            Step::Decide(req) => {
                s.request_decision(Some("pepper"), req, config).unwrap();
            }
        }
    }
    s
}
