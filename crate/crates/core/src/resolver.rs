//! Option selection from strengths and preferences, with pluggable tie-breaking.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{apply_edit, Edit};
use crate::error::{Error, Result};
use crate::model::{ArgumentId, Framework};
use crate::preferences::{classify, preference_sets, ConflictClass, ConflictLabel, Overall, TotalProfile};
use crate::semantics::{evaluate, EvalConfig, SemanticsKind, StrengthMap};

pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;

/// Interactive tie-breaking gives up after this many rounds of new arguments.
pub const MAX_INTERACTIVE_ROUNDS: u32 = 5;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TieBreakStrategy {
    /// Smallest option id.
    #[default]
    Lexicographic,
    /// Ask the users for more arguments and re-run.
    Interactive,
    /// First candidate in a caller-supplied order; unranked candidates come
    /// after ranked ones, in id order.
    ExternalRank { order: Vec<ArgumentId> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    C,
    NC1,
    NC2,
    NC3,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::C => "C",
            Branch::NC1 => "NC1",
            Branch::NC2 => "NC2",
            Branch::NC3 => "NC3",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolveConfig {
    pub eval: EvalConfig,
    pub tie_epsilon: f64,
}

impl Default for ResolveConfig {
    fn default() -> Self {
        ResolveConfig {
            eval: EvalConfig::default(),
            tie_epsilon: DEFAULT_TIE_EPSILON,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub selected: ArgumentId,
    pub branch: Branch,
    pub classification: ConflictClass,
    /// Options within the branch's eligible set.
    pub eligible: Vec<ArgumentId>,
    /// Options handed to the tie-break strategy (the strongest eligible ones).
    pub candidate_set: Vec<ArgumentId>,
    pub strengths: StrengthMap,
    pub tie: bool,
    pub rounds: u32,
    /// A unique strongest eligible option existed.
    pub resolved: bool,
    /// Interactive tie-breaking ran out of rounds and fell back to lexicographic order.
    #[serde(default)]
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiePrompt {
    pub candidates: Vec<ArgumentId>,
    /// The round the answer to this prompt will start (1-based).
    pub round: u32,
    pub branch: Branch,
    pub strengths: StrengthMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Resolution {
    Decided(Decision),
    AwaitingArguments(TiePrompt),
}

impl Resolution {
    pub fn decision(self) -> Option<Decision> {
        match self {
            Resolution::Decided(d) => Some(d),
            Resolution::AwaitingArguments(_) => None,
        }
    }
}

/// Options whose strength is within `tie_epsilon` of the strongest one, in id order.
pub fn max_strength_set(options: &[ArgumentId], strengths: &StrengthMap, tie_epsilon: f64) -> Result<Vec<ArgumentId>> {
    if options.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let values = options
        .iter()
        .map(|o| strengths.get(o).ok_or_else(|| Error::UnknownArgument(o.to_string())))
        .collect::<Result<Vec<f64>>>()?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let set: BTreeSet<ArgumentId> = options
        .iter()
        .zip(&values)
        .filter(|(_, v)| max - **v <= tie_epsilon)
        .map(|(o, _)| o.clone())
        .collect();
    Ok(set.into_iter().collect())
}

/// True when one option is strictly stronger than every other (beyond the
/// default tie tolerance). Vacuously true for a single option.
pub fn conflict_resolved(strengths: &StrengthMap, options: &[ArgumentId]) -> bool {
    max_strength_set(options, strengths, DEFAULT_TIE_EPSILON).is_ok_and(|s| s.len() == 1)
}

/// The branch taken for `class` and the options eligible under it.
pub fn branch_and_pool(
    options: &[ArgumentId],
    profile: &TotalProfile,
    class: &ConflictClass,
) -> (Branch, Vec<ArgumentId>) {
    if class.overall == Overall::Conflict {
        return (Branch::C, options.to_vec());
    }
    let sets = preference_sets(profile);
    if class.has(ConflictLabel::NC1) {
        let pool = [&sets.positive, &sets.indifferent, &sets.negative]
            .into_iter()
            .find(|s| !s.is_empty())
            .cloned()
            .unwrap_or_default();
        (Branch::NC1, pool.into_iter().collect())
    } else if class.has(ConflictLabel::NC2) {
        (Branch::NC2, sets.positive.into_iter().collect())
    } else {
        let pool = sets.indifferent.difference(&sets.negative).cloned().collect();
        (Branch::NC3, pool)
    }
}

fn break_tie(strategy: &TieBreakStrategy, candidates: &[ArgumentId]) -> ArgumentId {
    match strategy {
        TieBreakStrategy::ExternalRank { order } => order
            .iter()
            .find(|o| candidates.contains(o))
            .unwrap_or(&candidates[0])
            .clone(),
        _ => candidates[0].clone(),
    }
}

/// Selection given precomputed strengths. `rounds` is the number of
/// interactive rounds already spent.
pub fn select(
    options: &[ArgumentId],
    profile: &TotalProfile,
    strengths: StrengthMap,
    strategy: &TieBreakStrategy,
    tie_epsilon: f64,
    rounds: u32,
) -> Result<Resolution> {
    let class = classify(profile);
    let (branch, eligible) = branch_and_pool(options, profile, &class);
    if eligible.is_empty() {
        return Err(Error::NoEligibleOption(branch.to_string()));
    }
    let candidates = max_strength_set(&eligible, &strengths, tie_epsilon)?;
    let tie = candidates.len() > 1;
    let mut fallback = false;
    if tie && *strategy == TieBreakStrategy::Interactive {
        if rounds < MAX_INTERACTIVE_ROUNDS {
            return Ok(Resolution::AwaitingArguments(TiePrompt {
                candidates,
                round: rounds + 1,
                branch,
                strengths,
            }));
        }
        fallback = true;
    }
    let selected = if tie {
        break_tie(strategy, &candidates)
    } else {
        candidates[0].clone()
    };
    Ok(Resolution::Decided(Decision {
        selected,
        branch,
        classification: class,
        eligible,
        candidate_set: candidates,
        strengths,
        tie,
        rounds,
        resolved: !tie,
        fallback,
    }))
}

/// Runs the resolver on `framework`: evaluate, classify the extended
/// preference profile, restrict to the branch's options, take the strongest,
/// and break ties with `strategy`.
pub fn mupcr(
    framework: &Framework,
    kind: SemanticsKind,
    strategy: &TieBreakStrategy,
    config: &ResolveConfig,
) -> Result<Resolution> {
    mupcr_at_round(framework, kind, strategy, config, 0)
}

pub fn mupcr_at_round(
    framework: &Framework,
    kind: SemanticsKind,
    strategy: &TieBreakStrategy,
    config: &ResolveConfig,
    rounds: u32,
) -> Result<Resolution> {
    let strengths = evaluate(framework, kind, &config.eval)?;
    let options = framework.options();
    select(
        &options,
        &framework.total_preferences(),
        strengths,
        strategy,
        config.tie_epsilon,
        rounds,
    )
}

/// Applies the arguments supplied in answer to `prompt`. The caller re-runs
/// [`mupcr_at_round`] with `prompt.round` rounds spent.
pub fn interactive_round(framework: &Framework, prompt: &TiePrompt, new_arguments: &[Edit]) -> Result<Framework> {
    if prompt.round > MAX_INTERACTIVE_ROUNDS {
        return Err(Error::MaxRoundsExceeded(MAX_INTERACTIVE_ROUNDS));
    }
    if prompt.candidates.len() < 2 {
        return Err(Error::NoTie);
    }
    let mut fw = framework.clone();
    for edit in new_arguments {
        if !matches!(edit, Edit::AddArgument { .. }) {
            return Err(Error::BadRequest("tie answers may only add arguments".into()));
        }
        fw = apply_edit(&fw, edit)?;
    }
    Ok(fw)
}

/// Drives the interactive loop to completion, asking `answer` for new
/// arguments on every tie. Falls back to lexicographic order after
/// [`MAX_INTERACTIVE_ROUNDS`] rounds.
pub fn resolve_interactively<F>(
    framework: &Framework,
    kind: SemanticsKind,
    config: &ResolveConfig,
    mut answer: F,
) -> Result<(Decision, Framework)>
where
    F: FnMut(&TiePrompt, &Framework) -> Vec<Edit>,
{
    let mut fw = framework.clone();
    let mut rounds = 0;
    loop {
        match mupcr_at_round(&fw, kind, &TieBreakStrategy::Interactive, config, rounds)? {
            Resolution::Decided(d) => return Ok((d, fw)),
            Resolution::AwaitingArguments(prompt) => {
                let edits = answer(&prompt, &fw);
                fw = interactive_round(&fw, &prompt, &edits)?;
                rounds = prompt.round;
            }
        }
    }
}
