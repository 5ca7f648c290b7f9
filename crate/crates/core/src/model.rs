//! The multi-user framework data model: arguments, polarized relations, options,
//! users and their preferences, plus the structural checks and graph queries that
//! everything else builds on.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preferences::{PreferenceProfile, PreferenceSign, TotalProfile};

fn normalize_token(raw: &str) -> String {
    raw.replace('¬', "not_")
}

fn is_valid_token(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Identifier of an argument. `¬` is accepted on input and stored as `not_`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArgumentId(String);

impl ArgumentId {
    pub fn new(raw: &str) -> Result<Self> {
        let s = normalize_token(raw);
        if is_valid_token(&s) {
            Ok(ArgumentId(s))
        } else {
            Err(Error::InvalidId(raw.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for ArgumentId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        ArgumentId::new(&s)
    }
}

impl From<ArgumentId> for String {
    fn from(id: ArgumentId) -> String {
        id.0
    }
}

impl std::str::FromStr for ArgumentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ArgumentId::new(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct UserId(String);

impl UserId {
    pub fn new(raw: &str) -> Result<Self> {
        if is_valid_token(raw) {
            Ok(UserId(raw.to_string()))
        } else {
            Err(Error::InvalidId(raw.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for UserId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        UserId::new(&s)
    }
}

impl From<UserId> for String {
    fn from(id: UserId) -> String {
        id.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgumentKind {
    Option,
    User,
    Task,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Argument {
    pub id: ArgumentId,
    #[serde(default)]
    pub label: String,
    pub kind: ArgumentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<UserId>,
    pub base_score: f64,
    pub active: bool,
    /// When non-empty the argument is active iff at least one listed argument is.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derived_active_from: Vec<ArgumentId>,
}

impl Argument {
    pub const DEFAULT_BASE_SCORE: f64 = 0.5;

    fn new(id: ArgumentId, kind: ArgumentKind, owner: Option<UserId>) -> Self {
        Argument {
            id,
            label: String::new(),
            kind,
            owner,
            base_score: Self::DEFAULT_BASE_SCORE,
            active: kind == ArgumentKind::Option,
            derived_active_from: Vec::new(),
        }
    }

    pub fn option(id: ArgumentId) -> Self {
        Self::new(id, ArgumentKind::Option, None)
    }

    pub fn task(id: ArgumentId) -> Self {
        Self::new(id, ArgumentKind::Task, None)
    }

    pub fn user(id: ArgumentId, owner: UserId) -> Self {
        Self::new(id, ArgumentKind::User, Some(owner))
    }

    pub fn with_base(mut self, base_score: f64) -> Self {
        self.base_score = base_score;
        self
    }

    pub fn with_active(mut self, active: bool) -> Self {
        self.active = active;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn derived_from(mut self, supporters: Vec<ArgumentId>) -> Self {
        self.derived_active_from = supporters;
        self
    }

    pub fn is_option(&self) -> bool {
        self.kind == ArgumentKind::Option
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Attack,
    Support,
}

impl Polarity {
    pub fn flipped(self) -> Self {
        match self {
            Polarity::Attack => Polarity::Support,
            Polarity::Support => Polarity::Attack,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Polarity::Attack => "att",
            Polarity::Support => "sup",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub source: ArgumentId,
    pub target: ArgumentId,
    pub polarity: Polarity,
}

impl Relation {
    pub fn new(source: ArgumentId, target: ArgumentId, polarity: Polarity) -> Self {
        Relation {
            source,
            target,
            polarity,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.polarity.short(), self.source, self.target)
    }
}

/// A multi-user quantitative bipolar argumentation framework.
///
/// Referential integrity (relation endpoints, owners, preference keys, score
/// ranges) is enforced on construction. Structural well-formedness (acyclicity,
/// options as sinks) is checked separately by [`validate_structure`], so that
/// malformed graphs can still be represented and reported on.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "FrameworkRepr", try_from = "FrameworkRepr")]
pub struct Framework {
    arguments: BTreeMap<ArgumentId, Argument>,
    relations: BTreeMap<(ArgumentId, ArgumentId), Polarity>,
    users: BTreeSet<UserId>,
    preferences: PreferenceProfile,
}

impl Framework {
    pub fn builder() -> FrameworkBuilder {
        FrameworkBuilder::default()
    }

    pub fn arguments(&self) -> impl Iterator<Item = &Argument> {
        self.arguments.values()
    }

    pub fn argument(&self, id: &ArgumentId) -> Option<&Argument> {
        self.arguments.get(id)
    }

    pub fn contains(&self, id: &ArgumentId) -> bool {
        self.arguments.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.arguments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arguments.is_empty()
    }

    /// Relations ordered by `(source, target)`.
    pub fn relations(&self) -> impl Iterator<Item = Relation> + '_ {
        self.relations
            .iter()
            .map(|((s, t), p)| Relation::new(s.clone(), t.clone(), *p))
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn polarity(&self, source: &ArgumentId, target: &ArgumentId) -> Option<Polarity> {
        self.relations.get(&(source.clone(), target.clone())).copied()
    }

    /// Direct attackers and supporters of `target`.
    pub fn incoming<'a>(&'a self, target: &'a ArgumentId) -> impl Iterator<Item = (&'a ArgumentId, Polarity)> + 'a {
        self.relations
            .iter()
            .filter(move |((_, t), _)| t == target)
            .map(|((s, _), p)| (s, *p))
    }

    pub fn outgoing<'a>(&'a self, source: &'a ArgumentId) -> impl Iterator<Item = (&'a ArgumentId, Polarity)> + 'a {
        self.relations
            .range((source.clone(), ArgumentId(String::new()))..)
            .take_while(move |((s, _), _)| s == source)
            .map(|((_, t), p)| (t, *p))
    }

    /// Option arguments in id order.
    pub fn options(&self) -> Vec<ArgumentId> {
        self.arguments
            .values()
            .filter(|a| a.is_option())
            .map(|a| a.id.clone())
            .collect()
    }

    pub fn is_option(&self, id: &ArgumentId) -> bool {
        self.arguments.get(id).is_some_and(Argument::is_option)
    }

    pub fn users(&self) -> &BTreeSet<UserId> {
        &self.users
    }

    /// The partial preference map as declared.
    pub fn preferences(&self) -> &PreferenceProfile {
        &self.preferences
    }

    /// Preferences extended to every (user, option) pair.
    pub fn total_preferences(&self) -> TotalProfile {
        self.preferences.extend(&self.options(), &self.users)
    }

    pub fn owned_by<'a>(&'a self, user: &'a UserId) -> impl Iterator<Item = &'a Argument> + 'a {
        self.arguments.values().filter(move |a| a.owner.as_ref() == Some(user))
    }

    pub(crate) fn insert_argument(&mut self, argument: Argument) -> Result<()> {
        if self.arguments.contains_key(&argument.id) {
            return Err(Error::DuplicateId(argument.id.to_string()));
        }
        check_score(argument.base_score)?;
        match (argument.kind, &argument.owner) {
            (ArgumentKind::User, Some(owner)) => {
                if !self.users.contains(owner) {
                    return Err(Error::UnknownUser(owner.to_string()));
                }
            }
            (ArgumentKind::User, None) | (_, Some(_)) => return Err(Error::BadOwner(argument.id.to_string())),
            _ => {}
        }
        let mut argument = argument;
        if argument.is_option() {
            argument.active = true;
            argument.derived_active_from.clear();
        }
        self.arguments.insert(argument.id.clone(), argument);
        Ok(())
    }

    pub(crate) fn insert_relation(&mut self, relation: Relation) -> Result<()> {
        for end in [&relation.source, &relation.target] {
            if !self.arguments.contains_key(end) {
                return Err(Error::UnknownArgument(end.to_string()));
            }
        }
        if relation.source == relation.target {
            return Err(Error::SelfLoop(relation.source.to_string()));
        }
        let key = (relation.source, relation.target);
        if self.relations.contains_key(&key) {
            return Err(Error::DuplicateRelation(key.0.to_string(), key.1.to_string()));
        }
        self.relations.insert(key, relation.polarity);
        Ok(())
    }

    pub(crate) fn insert_user(&mut self, user: UserId) -> Result<()> {
        if !self.users.insert(user.clone()) {
            return Err(Error::DuplicateId(user.to_string()));
        }
        Ok(())
    }

    pub(crate) fn set_preference(&mut self, user: &UserId, option: &ArgumentId, sign: PreferenceSign) -> Result<()> {
        if !self.users.contains(user) {
            return Err(Error::UnknownUser(user.to_string()));
        }
        if !self.is_option(option) {
            return Err(Error::NotAnOption(option.to_string()));
        }
        self.preferences.set(user.clone(), option.clone(), sign);
        Ok(())
    }

    /// Removes an argument together with its incident relations and any
    /// derived-activation references to it.
    pub(crate) fn remove_argument(&mut self, id: &ArgumentId) -> Option<Argument> {
        let removed = self.arguments.remove(id)?;
        self.relations.retain(|(s, t), _| s != id && t != id);
        for arg in self.arguments.values_mut() {
            arg.derived_active_from.retain(|d| d != id);
        }
        Some(removed)
    }

    pub(crate) fn argument_mut(&mut self, id: &ArgumentId) -> Result<&mut Argument> {
        self.arguments
            .get_mut(id)
            .ok_or_else(|| Error::UnknownArgument(id.to_string()))
    }

    fn check_references(&self) -> Result<()> {
        for arg in self.arguments.values() {
            for d in &arg.derived_active_from {
                if !self.arguments.contains_key(d) {
                    return Err(Error::UnknownArgument(d.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Arguments from which some option is reachable.
    pub fn reaching_options(&self) -> BTreeSet<ArgumentId> {
        let mut seen: BTreeSet<ArgumentId> = self.options().into_iter().collect();
        let mut queue: VecDeque<ArgumentId> = seen.iter().cloned().collect();
        while let Some(node) = queue.pop_front() {
            for (src, _) in self.incoming(&node) {
                if seen.insert(src.clone()) {
                    queue.push_back(src.clone());
                }
            }
        }
        seen
    }

    /// Whether a path `from ->* to` exists (of length ≥ 1).
    pub fn has_path(&self, from: &ArgumentId, to: &ArgumentId) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from.clone()];
        while let Some(node) = stack.pop() {
            for (next, _) in self.outgoing(&node) {
                if next == to {
                    return true;
                }
                if seen.insert(next.clone()) {
                    stack.push(next.clone());
                }
            }
        }
        false
    }

    /// Arguments whose strength can be influenced by `target`'s ancestors, i.e.
    /// `target` and every argument with a path into it.
    pub fn ancestors(&self, target: &ArgumentId) -> BTreeSet<ArgumentId> {
        let mut seen = BTreeSet::new();
        seen.insert(target.clone());
        let mut queue = VecDeque::from([target.clone()]);
        while let Some(node) = queue.pop_front() {
            for (src, _) in self.incoming(&node) {
                if seen.insert(src.clone()) {
                    queue.push_back(src.clone());
                }
            }
        }
        seen
    }

    /// Strongly connected components with more than one member, or none when
    /// the relation graph is acyclic (self-loops cannot be constructed).
    pub fn cycles(&self) -> Vec<Vec<ArgumentId>> {
        tarjan(self).into_iter().filter(|c| c.len() > 1).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.cycles().is_empty()
    }

    /// Effective activity after applying `overrides` and derived-activation rules.
    /// Options are always active.
    pub fn effective_activity(&self, overrides: &BTreeMap<ArgumentId, bool>) -> Result<BTreeSet<ArgumentId>> {
        for id in overrides.keys() {
            if !self.arguments.contains_key(id) {
                return Err(Error::UnknownArgument(id.to_string()));
            }
        }
        let mut active: BTreeSet<ArgumentId> = self
            .arguments
            .values()
            .filter(|a| {
                a.is_option() || (a.derived_active_from.is_empty() && overrides.get(&a.id).copied().unwrap_or(a.active))
            })
            .map(|a| a.id.clone())
            .collect();
        // least fixpoint over derived rules
        loop {
            let mut changed = false;
            for arg in self.arguments.values() {
                if arg.is_option() || arg.derived_active_from.is_empty() || active.contains(&arg.id) {
                    continue;
                }
                if arg.derived_active_from.iter().any(|d| active.contains(d)) {
                    active.insert(arg.id.clone());
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(active)
    }

    /// The framework restricted to `keep`; relations with a dropped endpoint and
    /// dangling derived-activation references are removed.
    pub fn restricted_to(&self, keep: &BTreeSet<ArgumentId>) -> Framework {
        let mut out = self.clone();
        out.arguments.retain(|id, _| keep.contains(id));
        out.relations.retain(|(s, t), _| keep.contains(s) && keep.contains(t));
        for arg in out.arguments.values_mut() {
            arg.derived_active_from.retain(|d| keep.contains(d));
        }
        out
    }
}

fn check_score(score: f64) -> Result<()> {
    if score.is_finite() && (0.0..=1.0).contains(&score) {
        Ok(())
    } else {
        Err(Error::BadScore(score))
    }
}

pub(crate) fn validate_score(score: f64) -> Result<()> {
    check_score(score)
}

fn tarjan(framework: &Framework) -> Vec<Vec<ArgumentId>> {
    struct State<'a> {
        fw: &'a Framework,
        index: BTreeMap<&'a ArgumentId, usize>,
        low: BTreeMap<&'a ArgumentId, usize>,
        on_stack: BTreeSet<&'a ArgumentId>,
        stack: Vec<&'a ArgumentId>,
        next: usize,
        out: Vec<Vec<ArgumentId>>,
    }

    fn visit<'a>(st: &mut State<'a>, v: &'a ArgumentId) {
        st.index.insert(v, st.next);
        st.low.insert(v, st.next);
        st.next += 1;
        st.stack.push(v);
        st.on_stack.insert(v);
        let fw = st.fw;
        for (w, _) in fw.outgoing(v) {
            if !st.index.contains_key(w) {
                visit(st, w);
                let lw = st.low[w];
                let lv = st.low.get_mut(v).unwrap();
                *lv = (*lv).min(lw);
            } else if st.on_stack.contains(w) {
                let iw = st.index[w];
                let lv = st.low.get_mut(v).unwrap();
                *lv = (*lv).min(iw);
            }
        }
        if st.low[v] == st.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = st.stack.pop() {
                st.on_stack.remove(w);
                comp.push(w.clone());
                if w == v {
                    break;
                }
            }
            comp.sort();
            st.out.push(comp);
        }
    }

    let mut st = State {
        fw: framework,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        on_stack: BTreeSet::new(),
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for id in framework.arguments.keys() {
        if !st.index.contains_key(id) {
            visit(&mut st, id);
        }
    }
    st.out.sort();
    st.out
}

/// Accumulates arguments, relations, users and preferences; forward references
/// are resolved in [`FrameworkBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct FrameworkBuilder {
    arguments: Vec<Argument>,
    relations: Vec<Relation>,
    users: Vec<UserId>,
    preferences: Vec<(UserId, ArgumentId, PreferenceSign)>,
    errors: Vec<Error>,
}

impl FrameworkBuilder {
    pub fn user(mut self, id: &str) -> Self {
        match UserId::new(id) {
            Ok(u) => self.users.push(u),
            Err(e) => self.errors.push(e),
        }
        self
    }

    pub fn argument(mut self, argument: Argument) -> Self {
        self.arguments.push(argument);
        self
    }

    pub fn option(self, id: &str) -> Self {
        self.with_id(id, |id, b| b.argument(Argument::option(id)))
    }

    /// Adds an active task argument with the given base score.
    pub fn task(self, id: &str, base: f64) -> Self {
        self.with_id(id, |id, b| {
            b.argument(Argument::task(id).with_base(base).with_active(true))
        })
    }

    /// Adds an active user argument owned by `owner`.
    pub fn owned(self, id: &str, owner: &str, base: f64) -> Self {
        match UserId::new(owner) {
            Ok(owner) => self.with_id(id, |id, b| {
                b.argument(Argument::user(id, owner).with_base(base).with_active(true))
            }),
            Err(e) => {
                let mut b = self;
                b.errors.push(e);
                b
            }
        }
    }

    pub fn attack(self, source: &str, target: &str) -> Self {
        self.relation(source, target, Polarity::Attack)
    }

    pub fn support(self, source: &str, target: &str) -> Self {
        self.relation(source, target, Polarity::Support)
    }

    pub fn relation(mut self, source: &str, target: &str, polarity: Polarity) -> Self {
        match (ArgumentId::new(source), ArgumentId::new(target)) {
            (Ok(s), Ok(t)) => self.relations.push(Relation::new(s, t, polarity)),
            (Err(e), _) | (_, Err(e)) => self.errors.push(e),
        }
        self
    }

    pub fn preference(mut self, user: &str, option: &str, sign: PreferenceSign) -> Self {
        match (UserId::new(user), ArgumentId::new(option)) {
            (Ok(u), Ok(o)) => self.preferences.push((u, o, sign)),
            (Err(e), _) | (_, Err(e)) => self.errors.push(e),
        }
        self
    }

    fn with_id(mut self, id: &str, f: impl FnOnce(ArgumentId, Self) -> Self) -> Self {
        match ArgumentId::new(id) {
            Ok(id) => f(id, self),
            Err(e) => {
                self.errors.push(e);
                self
            }
        }
    }

    pub fn build(self) -> Result<Framework> {
        if let Some(e) = self.errors.into_iter().next() {
            return Err(e);
        }
        let mut fw = Framework::default();
        for u in self.users {
            fw.insert_user(u)?;
        }
        for a in self.arguments {
            fw.insert_argument(a)?;
        }
        fw.check_references()?;
        for r in self.relations {
            fw.insert_relation(r)?;
        }
        let mut seen = BTreeMap::new();
        for (u, o, s) in self.preferences {
            if let Some(prev) = seen.insert((u.clone(), o.clone()), s) {
                if prev != s {
                    return Err(Error::ConflictingSign {
                        user: u.to_string(),
                        option: o.to_string(),
                    });
                }
            }
            fw.set_preference(&u, &o, s)?;
        }
        Ok(fw)
    }
}

#[derive(Serialize, Deserialize)]
struct FrameworkRepr {
    arguments: Vec<Argument>,
    relations: Vec<Relation>,
    #[serde(default)]
    options: Vec<ArgumentId>,
    users: Vec<UserId>,
    #[serde(default)]
    preferences: PreferenceProfile,
}

impl From<Framework> for FrameworkRepr {
    fn from(fw: Framework) -> Self {
        FrameworkRepr {
            options: fw.options(),
            relations: fw.relations().collect(),
            arguments: fw.arguments.into_values().collect(),
            users: fw.users.into_iter().collect(),
            preferences: fw.preferences,
        }
    }
}

impl TryFrom<FrameworkRepr> for Framework {
    type Error = Error;
    fn try_from(r: FrameworkRepr) -> Result<Self> {
        let mut b = Framework::builder();
        b.users = r.users;
        b.arguments = r.arguments;
        b.relations = r.relations;
        b.preferences = r.preferences.entries().collect();
        let fw = b.build()?;
        if !r.options.is_empty() && r.options != fw.options() {
            return Err(Error::BadRequest("options do not match option arguments".into()));
        }
        Ok(fw)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    OptionHasOutgoing,
    Cycle,
    NoPathToOption,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::OptionHasOutgoing => "OPTION_HAS_OUTGOING",
            IssueCode::Cycle => "CYCLE",
            IssueCode::NoPathToOption => "NO_PATH_TO_OPTION",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subject {
    Argument { id: ArgumentId },
    Relation { source: ArgumentId, target: ArgumentId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    pub subject: Subject,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error_codes(&self) -> Vec<IssueCode> {
        self.errors.iter().map(|i| i.code).collect()
    }

    pub fn warning_codes(&self) -> Vec<IssueCode> {
        self.warnings.iter().map(|i| i.code).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<_> = self
            .errors
            .iter()
            .map(|i| format!("{}: {}", i.code.as_str(), i.message))
            .collect();
        f.write_str(&msgs.join("; "))
    }
}

/// Checks that options are sinks, the graph is acyclic, and (as a warning) that
/// every non-option argument reaches some option.
pub fn validate_structure(framework: &Framework) -> ValidationReport {
    let mut report = ValidationReport::default();
    for rel in framework.relations() {
        if framework.is_option(&rel.source) {
            report.errors.push(Issue {
                code: IssueCode::OptionHasOutgoing,
                message: format!("option {} has outgoing relation {}", rel.source, rel),
                subject: Subject::Relation {
                    source: rel.source,
                    target: rel.target,
                },
            });
        }
    }
    for cycle in framework.cycles() {
        let names: Vec<_> = cycle.iter().map(ArgumentId::as_str).collect();
        report.errors.push(Issue {
            code: IssueCode::Cycle,
            subject: Subject::Argument { id: cycle[0].clone() },
            message: format!("cycle through {}", names.join(", ")),
        });
    }
    let reaching = framework.reaching_options();
    for arg in framework.arguments() {
        if !arg.is_option() && !reaching.contains(&arg.id) {
            report.warnings.push(Issue {
                code: IssueCode::NoPathToOption,
                subject: Subject::Argument { id: arg.id.clone() },
                message: format!("{} has no path to any option", arg.id),
            });
        }
    }
    report
}

/// The framework induced by effectively active arguments (overrides first, then
/// derived-activation rules).
pub fn active_subframework(framework: &Framework, overrides: &BTreeMap<ArgumentId, bool>) -> Result<Framework> {
    let active = framework.effective_activity(overrides)?;
    let mut sub = framework.restricted_to(&active);
    for arg in sub.arguments.values_mut() {
        arg.active = true;
    }
    Ok(sub)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProCon {
    pub pro: BTreeSet<ArgumentId>,
    pub con: BTreeSet<ArgumentId>,
}

/// Arguments with an even-attack path (pro) and with an odd-attack path (con)
/// into `option`.
pub fn pro_con(framework: &Framework, option: &ArgumentId) -> Result<ProCon> {
    if !framework.is_option(option) {
        return Err(Error::NotAnOption(option.to_string()));
    }
    // search backwards over (argument, parity-so-far) states
    let mut seen: BTreeSet<(ArgumentId, bool)> = BTreeSet::new();
    let mut queue = VecDeque::from([(option.clone(), false)]);
    let mut out = ProCon::default();
    while let Some((node, odd)) = queue.pop_front() {
        for (src, pol) in framework.incoming(&node) {
            let parity = odd ^ (pol == Polarity::Attack);
            if seen.insert((src.clone(), parity)) {
                if parity {
                    out.con.insert(src.clone());
                } else {
                    out.pro.insert(src.clone());
                }
                queue.push_back((src.clone(), parity));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionConsistency {
    pub option: ArgumentId,
    pub sign: PreferenceSign,
    pub owns_pro: bool,
    pub owns_con: bool,
    pub consistent: bool,
}

/// Checks, per option, that the user's owned arguments agree with their stated sign.
pub fn check_user_consistency(framework: &Framework, user: &UserId) -> Result<Vec<OptionConsistency>> {
    if !framework.users().contains(user) {
        return Err(Error::UnknownUser(user.to_string()));
    }
    let total = framework.total_preferences();
    let owned: BTreeSet<&ArgumentId> = framework.owned_by(user).map(|a| &a.id).collect();
    let mut out = Vec::new();
    for option in framework.options() {
        let pc = pro_con(framework, &option)?;
        let owns_pro = pc.pro.iter().any(|a| owned.contains(a));
        let owns_con = pc.con.iter().any(|a| owned.contains(a));
        let sign = total.sign(user, &option);
        let consistent = match sign {
            PreferenceSign::Positive => owns_pro,
            PreferenceSign::Negative => owns_con,
            PreferenceSign::Indifferent => owns_pro == owns_con,
        };
        out.push(OptionConsistency {
            option,
            sign,
            owns_pro,
            owns_con,
            consistent,
        });
    }
    Ok(out)
}
