//! Framework edits, event logs, and the option-discrimination checks.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    active_subframework, pro_con, validate_structure, Argument, ArgumentId, Framework, IssueCode, Relation, UserId,
};
use crate::preferences::PreferenceSign;
use crate::semantics::{evaluate, EvalConfig, SemanticsKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Edit {
    /// Adds a non-option argument with relations incident to it.
    AddArgument {
        argument: Argument,
        #[serde(default)]
        relations: Vec<Relation>,
    },
    RemoveArgument {
        id: ArgumentId,
    },
    SetBaseScore {
        id: ArgumentId,
        base_score: f64,
    },
    SetActive {
        id: ArgumentId,
        active: bool,
    },
    SetPreference {
        user: UserId,
        option: ArgumentId,
        sign: PreferenceSign,
    },
}

impl Edit {
    /// The argument this edit touches, if any.
    pub fn argument_id(&self) -> Option<&ArgumentId> {
        match self {
            Edit::AddArgument { argument, .. } => Some(&argument.id),
            Edit::RemoveArgument { id } | Edit::SetBaseScore { id, .. } | Edit::SetActive { id, .. } => Some(id),
            Edit::SetPreference { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditEvent {
    pub seq: u64,
    #[serde(flatten)]
    pub edit: Edit,
}

fn forbid_option(framework: &Framework, id: &ArgumentId) -> Result<()> {
    if framework.is_option(id) {
        return Err(Error::OptionEditForbidden(id.to_string()));
    }
    Ok(())
}

fn require(framework: &Framework, id: &ArgumentId) -> Result<()> {
    if framework.contains(id) {
        Ok(())
    } else {
        Err(Error::UnknownArgument(id.to_string()))
    }
}

/// Applies `edit` to a copy of `framework`. The result is structurally valid or
/// the edit is rejected.
pub fn apply_edit(framework: &Framework, edit: &Edit) -> Result<Framework> {
    let mut next = framework.clone();
    match edit {
        Edit::AddArgument { argument, relations } => {
            if argument.is_option() {
                return Err(Error::OptionEditForbidden(argument.id.to_string()));
            }
            for d in &argument.derived_active_from {
                require(framework, d)?;
            }
            next.insert_argument(argument.clone())?;
            for rel in relations {
                if rel.source != argument.id && rel.target != argument.id {
                    return Err(Error::BadRequest(format!(
                        "relation {rel} is not incident to new argument {}",
                        argument.id
                    )));
                }
                next.insert_relation(rel.clone())?;
            }
            let report = validate_structure(&next);
            if report.error_codes().contains(&IssueCode::Cycle) {
                return Err(Error::WouldCreateCycle(argument.id.to_string()));
            }
            if !report.is_valid() {
                return Err(Error::InvalidStructure(report));
            }
        }
        Edit::RemoveArgument { id } => {
            require(framework, id)?;
            forbid_option(framework, id)?;
            next.remove_argument(id);
        }
        Edit::SetBaseScore { id, base_score } => {
            crate::model::validate_score(*base_score)?;
            next.argument_mut(id)?.base_score = *base_score;
        }
        Edit::SetActive { id, active } => {
            require(framework, id)?;
            forbid_option(framework, id)?;
            next.argument_mut(id)?.active = *active;
        }
        Edit::SetPreference { user, option, sign } => {
            next.set_preference(user, option, *sign)?;
        }
    }
    Ok(next)
}

/// Folds `events` over `initial`. Sequence numbers must strictly increase.
pub fn replay(initial: &Framework, events: &[EditEvent]) -> Result<Framework> {
    let mut fw = initial.clone();
    let mut last: Option<u64> = None;
    for ev in events {
        if last.is_some_and(|l| ev.seq <= l) {
            return Err(Error::BadRequest(format!(
                "event sequence {} is not increasing",
                ev.seq
            )));
        }
        last = Some(ev.seq);
        fw = apply_edit(&fw, &ev.edit)?;
    }
    Ok(fw)
}

pub fn write_event_log<W: Write>(mut out: W, events: &[EditEvent]) -> Result<()> {
    for ev in events {
        let line = serde_json::to_string(ev).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_event_log<R: BufRead>(input: R) -> Result<Vec<EditEvent>> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev =
            serde_json::from_str(&line).map_err(|e| Error::BadRequest(format!("event log line {}: {e}", i + 1)))?;
        events.push(ev);
    }
    Ok(events)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub o1: ArgumentId,
    pub o2: ArgumentId,
    pub argument: ArgumentId,
    /// σ(o1) − σ(o2) before the edit.
    pub gap_before: f64,
    pub gap_after: f64,
    pub widened: bool,
    /// False when the preconditions of the discrimination property are not met;
    /// `reason` then says which one failed.
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl GapReport {
    /// True when the report is applicable and the gap did not widen.
    pub fn is_counterexample(&self) -> bool {
        self.applicable && !self.widened
    }
}

fn interior(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

fn check_options(fw: &Framework, o1: &ArgumentId, o2: &ArgumentId) -> Result<()> {
    for o in [o1, o2] {
        if !fw.is_option(o) {
            return Err(Error::NotAnOption(o.to_string()));
        }
    }
    if o1 == o2 {
        return Err(Error::BadRequest("o1 and o2 must differ".into()));
    }
    Ok(())
}

struct Gaps {
    before: f64,
    after: f64,
    before_o: (f64, f64),
    strengths_before: crate::semantics::StrengthMap,
    active_after: bool,
}

fn gaps(
    before: &Framework,
    after: &Framework,
    o1: &ArgumentId,
    o2: &ArgumentId,
    alpha: &ArgumentId,
    kind: SemanticsKind,
) -> Result<Gaps> {
    let cfg = EvalConfig::default();
    let sb = evaluate(before, kind, &cfg)?;
    let sa = evaluate(after, kind, &cfg)?;
    let (b1, b2) = (sb.of(o1.as_str()), sb.of(o2.as_str()));
    Ok(Gaps {
        before: b1 - b2,
        after: sa.of(o1.as_str()) - sa.of(o2.as_str()),
        before_o: (b1, b2),
        active_after: sa.get(alpha).is_some(),
        strengths_before: sb,
    })
}

/// `alpha` must be pro o1 or con o2, and neither con o1 nor pro o2. Paths are
/// taken over the effectively active part of `fw`.
fn position_ok(fw: &Framework, alpha: &ArgumentId, o1: &ArgumentId, o2: &ArgumentId) -> Result<Option<String>> {
    let fw = &active_subframework(fw, &BTreeMap::new())?;
    let p1 = pro_con(fw, o1)?;
    let p2 = pro_con(fw, o2)?;
    if !(p1.pro.contains(alpha) || p2.con.contains(alpha)) {
        return Ok(Some(format!("{alpha} is neither pro {o1} nor con {o2}")));
    }
    if p1.con.contains(alpha) || p2.pro.contains(alpha) {
        return Ok(Some(format!("{alpha} has mixed paths to {o1} or {o2}")));
    }
    Ok(None)
}

fn report(o1: &ArgumentId, o2: &ArgumentId, alpha: &ArgumentId, g: &Gaps, reason: Option<String>) -> GapReport {
    GapReport {
        o1: o1.clone(),
        o2: o2.clone(),
        argument: alpha.clone(),
        gap_before: g.before,
        gap_after: g.after,
        widened: g.after > g.before,
        applicable: reason.is_none(),
        reason,
    }
}

/// Checks the gap σ(o1) − σ(o2) across the addition of a single argument.
pub fn check_addition_discrimination(
    before: &Framework,
    after: &Framework,
    o1: &ArgumentId,
    o2: &ArgumentId,
    kind: SemanticsKind,
) -> Result<GapReport> {
    check_options(before, o1, o2)?;
    let before_ids: BTreeSet<ArgumentId> = before.arguments().map(|a| a.id.clone()).collect();
    let added: Vec<&Argument> = after.arguments().filter(|a| !before_ids.contains(&a.id)).collect();
    if added.len() != 1 || after.len() != before.len() + 1 || after.restricted_to(&before_ids) != *before {
        return Err(Error::ShapeMismatch(
            "after must equal before plus exactly one argument and its relations".into(),
        ));
    }
    let alpha = added[0];
    if alpha.is_option() {
        return Err(Error::ShapeMismatch("the added argument is an option".into()));
    }
    let g = gaps(before, after, o1, o2, &alpha.id, kind)?;
    let reason = if alpha.base_score <= 0.0 {
        Some(format!("base score of {} is 0", alpha.id))
    } else if !g.active_after {
        Some(format!("{} is inactive", alpha.id))
    } else if !interior(g.before_o.0) || !interior(g.before_o.1) {
        Some("option strengths not in (0, 1)".into())
    } else if !after
        .outgoing(&alpha.id)
        .any(|(t, _)| g.strengths_before.get(t).is_some_and(interior))
    {
        Some(format!("no direct target of {} has strength in (0, 1)", alpha.id))
    } else {
        position_ok(after, &alpha.id, o1, o2)?
    };
    Ok(report(o1, o2, &alpha.id, &g, reason))
}

/// Checks the gap σ(o1) − σ(o2) across a change of one base score. Raising
/// the score of a pro-o1 / con-o2 argument widens the gap; so does lowering the
/// score of a con-o1 / pro-o2 argument.
pub fn check_basescore_discrimination(
    before: &Framework,
    after: &Framework,
    o1: &ArgumentId,
    o2: &ArgumentId,
    kind: SemanticsKind,
) -> Result<GapReport> {
    check_options(before, o1, o2)?;
    let changed: Vec<(&Argument, &Argument)> = before
        .arguments()
        .filter_map(|a| after.argument(&a.id).map(|b| (a, b)))
        .filter(|(a, b)| a.base_score != b.base_score)
        .collect();
    let mismatch = || Error::ShapeMismatch("after must differ from before in at most one base score".into());
    if before.len() != after.len() || changed.len() > 1 {
        return Err(mismatch());
    }
    let mut restored = after.clone();
    if let Some((a, _)) = changed.first() {
        restored.argument_mut(&a.id)?.base_score = a.base_score;
    }
    if restored != *before {
        return Err(mismatch());
    }
    let Some((old, new)) = changed.first().copied() else {
        let s = evaluate(before, kind, &EvalConfig::default())?;
        let gap = s.of(o1.as_str()) - s.of(o2.as_str());
        return Ok(GapReport {
            o1: o1.clone(),
            o2: o2.clone(),
            argument: o1.clone(),
            gap_before: gap,
            gap_after: gap,
            widened: false,
            applicable: false,
            reason: Some("no base score changed".into()),
        });
    };
    let g = gaps(before, after, o1, o2, &old.id, kind)?;
    let reason = if !g.active_after || g.strengths_before.get(&old.id).is_none() {
        Some(format!("{} is inactive", old.id))
    } else if !interior(g.before_o.0) || !interior(g.before_o.1) {
        Some("option strengths not in (0, 1)".into())
    } else if new.base_score > old.base_score {
        position_ok(after, &old.id, o1, o2)?
    } else {
        position_ok(after, &old.id, o2, o1)?
    };
    Ok(report(o1, o2, &old.id, &g, reason))
}
