//! Event-sourced multi-user sessions: edits, decisions and explanations.
//!
//! Each session persists as a JSON-lines log; replaying the log reproduces the
//! framework and the decision history.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::analysis::{relation_attribution, AttributionMethod, AttributionTable, MAX_EXACT_RELATIONS};
use crate::corpus::load_corpus;
use crate::dynamics::{apply_edit, Edit, EditEvent};
use crate::error::{Error, Result};
use crate::format::{parse_framework, SourceDocument};
use crate::model::{validate_structure, ArgumentId, ArgumentKind, Framework, UserId};
use crate::resolver::{mupcr_at_round, Branch, Decision, Resolution, ResolveConfig, TieBreakStrategy, TiePrompt};
use crate::semantics::{evaluate, SemanticsKind, StrengthMap};

/// Permutations drawn for explanations of frameworks too large for exact attribution.
pub const EXPLANATION_SAMPLES: usize = 20_000;
pub const EXPLANATION_SEED: u64 = 0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionSource {
    Corpus { name: String },
    Upload { text: String },
}

/// A participant acts either as one framework user or as the robot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    User(UserId),
    Robot,
}

impl Serialize for Role {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Role::Robot => s.serialize_str("robot"),
            Role::User(u) => s.serialize_str(u.as_str()),
        }
    }
}

impl<'de> Deserialize<'de> for Role {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        if raw == "robot" {
            Ok(Role::Robot)
        } else {
            UserId::new(&raw).map(Role::User).map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionRequest {
    #[serde(default)]
    pub semantics: SemanticsKind,
    #[serde(default)]
    pub strategy: TieBreakStrategy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub index: usize,
    /// Number of events applied when the decision was taken.
    pub after_events: usize,
    pub semantics: SemanticsKind,
    pub strategy: TieBreakStrategy,
    pub decision: Decision,
    #[serde(skip)]
    framework: Option<Framework>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry", rename_all = "snake_case")]
enum LogEntry {
    Created {
        id: String,
        source: SessionSource,
        participants: BTreeMap<String, Role>,
    },
    Event {
        actor: String,
        #[serde(flatten)]
        event: EditEvent,
    },
    Decision {
        actor: Option<String>,
        #[serde(flatten)]
        request: DecisionRequest,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Session {
    pub id: String,
    pub source: SessionSource,
    pub participants: BTreeMap<String, Role>,
    initial: Framework,
    pub framework: Framework,
    pub event_log: Vec<EditEvent>,
    pub decision_history: Vec<DecisionRecord>,
    pub pending_tie: Option<TiePrompt>,
    log: Vec<LogEntry>,
}

/// Serializable view of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub source: SessionSource,
    pub participants: BTreeMap<String, Role>,
    pub framework: Framework,
    pub event_log: Vec<EditEvent>,
    pub decision_history: Vec<DecisionRecord>,
    pub pending_tie: Option<TiePrompt>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub seq: u64,
    pub active: Vec<ArgumentId>,
    pub strengths: StrengthMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub index: usize,
    pub selected: ArgumentId,
    pub branch: Branch,
    pub eligible: Vec<ArgumentId>,
    pub candidate_set: Vec<ArgumentId>,
    pub tie: bool,
    pub rounds: u32,
    pub fallback: bool,
    pub attribution: AttributionTable,
}

fn source_framework(source: &SessionSource) -> Result<Framework> {
    match source {
        SessionSource::Corpus { name } => Ok(load_corpus(name)?.framework),
        SessionSource::Upload { text } => {
            let fw = parse_framework(&SourceDocument::inline(text.clone())).map_err(Error::InvalidAf)?;
            let report = validate_structure(&fw);
            if !report.is_valid() {
                return Err(Error::InvalidStructure(report));
            }
            Ok(fw)
        }
    }
}

fn check_participants(fw: &Framework, participants: &BTreeMap<String, Role>) -> Result<()> {
    let mut bound = BTreeMap::new();
    for (who, role) in participants {
        if who.trim().is_empty() {
            return Err(Error::BadRequest("empty participant name".into()));
        }
        if let Role::User(u) = role {
            if !fw.users().contains(u) {
                return Err(Error::UnknownUser(u.to_string()));
            }
            if let Some(other) = bound.insert(u.clone(), who) {
                return Err(Error::DuplicateId(format!("user {u} bound to both {other} and {who}")));
            }
        }
    }
    Ok(())
}

impl Session {
    pub fn create(id: String, source: SessionSource, participants: BTreeMap<String, Role>) -> Result<Self> {
        let initial = source_framework(&source)?;
        check_participants(&initial, &participants)?;
        Ok(Session {
            log: vec![LogEntry::Created {
                id: id.clone(),
                source: source.clone(),
                participants: participants.clone(),
            }],
            id,
            source,
            participants,
            framework: initial.clone(),
            initial,
            event_log: Vec::new(),
            decision_history: Vec::new(),
            pending_tie: None,
        })
    }

    pub fn initial_framework(&self) -> &Framework {
        &self.initial
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            source: self.source.clone(),
            participants: self.participants.clone(),
            framework: self.framework.clone(),
            event_log: self.event_log.clone(),
            decision_history: self.decision_history.clone(),
            pending_tie: self.pending_tie.clone(),
        }
    }

    fn role(&self, actor: &str) -> Result<&Role> {
        self.participants
            .get(actor)
            .ok_or_else(|| Error::Forbidden(format!("{actor} is not a participant")))
    }

    /// Owner-only for user arguments and preferences; robot-only for task
    /// arguments and option base scores.
    fn authorize(&self, actor: &str, edit: &Edit) -> Result<()> {
        let role = self.role(actor)?;
        let deny = || Err(Error::Forbidden(format!("{actor} may not apply {edit:?}")));
        let (kind, owner) = match edit {
            Edit::SetPreference { user, .. } => {
                return match role {
                    Role::User(u) if u == user => Ok(()),
                    _ => deny(),
                }
            }
            Edit::AddArgument { argument, .. } => (argument.kind, argument.owner.clone()),
            other => {
                let id = other.argument_id().expect("argument edit");
                let arg = self
                    .framework
                    .argument(id)
                    .ok_or_else(|| Error::UnknownArgument(id.to_string()))?;
                (arg.kind, arg.owner.clone())
            }
        };
        match (kind, role) {
            (ArgumentKind::User, Role::User(u)) if owner.as_ref() == Some(u) => Ok(()),
            (ArgumentKind::Task | ArgumentKind::Option, Role::Robot) => Ok(()),
            _ => deny(),
        }
    }

    pub fn post_event(&mut self, actor: &str, edit: Edit, config: &ResolveConfig) -> Result<EventOutcome> {
        self.authorize(actor, &edit)?;
        let next = apply_edit(&self.framework, &edit)?;
        let seq = self.event_log.last().map_or(1, |e| e.seq + 1);
        let event = EditEvent { seq, edit };
        self.framework = next;
        self.event_log.push(event.clone());
        self.log.push(LogEntry::Event {
            actor: actor.to_string(),
            event,
        });
        Ok(EventOutcome {
            seq,
            active: self
                .framework
                .effective_activity(&BTreeMap::new())?
                .into_iter()
                .collect(),
            strengths: self.strengths(SemanticsKind::default(), config)?,
        })
    }

    pub fn strengths(&self, kind: SemanticsKind, config: &ResolveConfig) -> Result<StrengthMap> {
        evaluate(&self.framework, kind, &config.eval)
    }

    /// Runs the resolver. With the interactive strategy an unresolved tie
    /// returns a prompt and leaves it pending; the next request continues from
    /// that round.
    pub fn request_decision(
        &mut self,
        actor: Option<&str>,
        request: DecisionRequest,
        config: &ResolveConfig,
    ) -> Result<Resolution> {
        if let Some(a) = actor {
            self.role(a)?;
        }
        let rounds = match (&self.pending_tie, &request.strategy) {
            (Some(p), TieBreakStrategy::Interactive) => p.round,
            _ => 0,
        };
        let resolution = mupcr_at_round(&self.framework, request.semantics, &request.strategy, config, rounds)?;
        match &resolution {
            Resolution::AwaitingArguments(prompt) => self.pending_tie = Some(prompt.clone()),
            Resolution::Decided(decision) => {
                self.pending_tie = None;
                self.decision_history.push(DecisionRecord {
                    index: self.decision_history.len(),
                    after_events: self.event_log.len(),
                    semantics: request.semantics,
                    strategy: request.strategy.clone(),
                    decision: decision.clone(),
                    framework: Some(self.framework.clone()),
                });
            }
        }
        self.log.push(LogEntry::Decision {
            actor: actor.map(str::to_string),
            request,
        });
        Ok(resolution)
    }

    fn framework_at(&self, record: &DecisionRecord) -> Result<Framework> {
        if let Some(fw) = &record.framework {
            return Ok(fw.clone());
        }
        crate::dynamics::replay(&self.initial, &self.event_log[..record.after_events])
    }

    /// Relation attribution for the framework as it stood at decision `index`,
    /// with the resolver trace.
    pub fn get_explanation(&self, index: i64, config: &ResolveConfig) -> Result<Explanation> {
        let record = usize::try_from(index)
            .ok()
            .and_then(|i| self.decision_history.get(i))
            .ok_or(Error::OutOfRange(index))?;
        let fw = self.framework_at(record)?;
        let active = fw.effective_activity(&BTreeMap::new())?;
        let players = fw
            .relations()
            .filter(|r| active.contains(&r.source) && active.contains(&r.target))
            .count();
        let method = if players <= MAX_EXACT_RELATIONS {
            AttributionMethod::ExactShapley
        } else {
            AttributionMethod::PermutationSampling {
                samples: EXPLANATION_SAMPLES,
                seed: EXPLANATION_SEED,
            }
        };
        let attribution = relation_attribution(&fw, method, record.semantics, &config.eval)?;
        let d = &record.decision;
        Ok(Explanation {
            index: record.index,
            selected: d.selected.clone(),
            branch: d.branch,
            eligible: d.eligible.clone(),
            candidate_set: d.candidate_set.clone(),
            tie: d.tie,
            rounds: d.rounds,
            fallback: d.fallback,
            attribution,
        })
    }

    /// Writes the session log as JSON lines.
    pub fn write_log<W: Write>(&self, mut out: W) -> Result<()> {
        for entry in &self.log {
            writeln!(
                out,
                "{}",
                serde_json::to_string(entry).map_err(|e| Error::Io(e.to_string()))?
            )?;
        }
        Ok(())
    }

    /// Rebuilds a session from its JSON-lines log.
    pub fn replay_log<R: BufRead>(input: R, config: &ResolveConfig) -> Result<Session> {
        let mut session: Option<Session> = None;
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: LogEntry =
                serde_json::from_str(&line).map_err(|e| Error::BadRequest(format!("log line {}: {e}", n + 1)))?;
            match (entry, session.as_mut()) {
                (
                    LogEntry::Created {
                        id,
                        source,
                        participants,
                    },
                    None,
                ) => {
                    session = Some(Session::create(id, source, participants)?);
                }
                (LogEntry::Event { actor, event }, Some(s)) => {
                    let expected = s.event_log.last().map_or(1, |e| e.seq + 1);
                    if event.seq != expected {
                        return Err(Error::BadRequest(format!(
                            "log line {}: out-of-order seq {}",
                            n + 1,
                            event.seq
                        )));
                    }
                    s.post_event(&actor, event.edit, config)?;
                }
                (LogEntry::Decision { actor, request }, Some(s)) => {
                    s.request_decision(actor.as_deref(), request, config)?;
                }
                _ => return Err(Error::BadRequest(format!("log line {}: unexpected entry", n + 1))),
            }
        }
        session.ok_or_else(|| Error::BadRequest("empty session log".into()))
    }
}

/// Concurrent session registry with optional on-disk persistence.
#[derive(Debug)]
pub struct SessionStore {
    dir: Option<PathBuf>,
    config: ResolveConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    pub fn in_memory(config: ResolveConfig) -> Self {
        SessionStore {
            dir: None,
            config,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    /// Opens `dir`, replaying every `*.jsonl` log found there.
    pub fn open(dir: impl AsRef<Path>, config: ResolveConfig) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let session = Session::replay_log(BufReader::new(File::open(&path)?), &config)?;
            sessions.insert(session.id.clone(), Arc::new(Mutex::new(session)));
        }
        Ok(SessionStore {
            dir: Some(dir),
            config,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn config(&self) -> &ResolveConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn path(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}.jsonl")))
    }

    fn append(&self, session: &Session, from: usize) -> Result<()> {
        let Some(path) = self.path(&session.id) else {
            return Ok(());
        };
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        for entry in &session.log[from..] {
            writeln!(
                file,
                "{}",
                serde_json::to_string(entry).map_err(|e| Error::Io(e.to_string()))?
            )?;
        }
        file.flush()?;
        Ok(())
    }

    pub fn create(&self, source: SessionSource, participants: BTreeMap<String, Role>) -> Result<SessionView> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::create(id.clone(), source, participants)?;
        self.append(&session, 0)?;
        let view = session.view();
        self.sessions
            .write()
            .expect("lock")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSession(id.to_string()))
    }

    /// Runs `f` on a consistent snapshot of the session.
    pub fn read<T>(&self, id: &str, f: impl FnOnce(&Session) -> Result<T>) -> Result<T> {
        let s = self.get(id)?;
        let guard = s.lock().expect("lock");
        f(&guard)
    }

    /// Runs `f` with exclusive access and persists any log entries it added.
    fn write<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T>) -> Result<T> {
        let s = self.get(id)?;
        let mut guard = s.lock().expect("lock");
        let before = guard.log.len();
        let out = f(&mut guard)?;
        self.append(&guard, before)?;
        Ok(out)
    }

    pub fn view(&self, id: &str) -> Result<SessionView> {
        self.read(id, |s| Ok(s.view()))
    }

    pub fn post_event(&self, id: &str, actor: &str, edit: Edit) -> Result<EventOutcome> {
        let config = self.config;
        self.write(id, |s| s.post_event(actor, edit, &config))
    }

    pub fn request_decision(&self, id: &str, actor: Option<&str>, request: DecisionRequest) -> Result<Resolution> {
        let config = self.config;
        self.write(id, |s| s.request_decision(actor, request, &config))
    }

    pub fn explanation(&self, id: &str, index: i64) -> Result<Explanation> {
        // clone out so a slow attribution does not block the session
        let (session, config) = (self.read(id, |s| Ok(s.clone()))?, self.config);
        session.get_explanation(index, &config)
    }

    pub fn strengths(&self, id: &str, kind: SemanticsKind) -> Result<StrengthMap> {
        self.read(id, |s| s.strengths(kind, &self.config))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Argument;

    fn participants() -> BTreeMap<String, Role> {
        BTreeMap::from([
            ("alice".to_string(), Role::User(UserId::new("cg").unwrap())),
            ("bob".to_string(), Role::User(UserId::new("cr").unwrap())),
            ("pepper".to_string(), Role::Robot),
        ])
    }

    fn id(s: &str) -> ArgumentId {
        ArgumentId::new(s).unwrap()
    }

    fn s2() -> Session {
        Session::create(
            "s".into(),
            SessionSource::Corpus {
                name: "frailty_scenario2".into(),
            },
            participants(),
        )
        .unwrap()
    }

    #[test]
    fn authorization_policy() {
        let cfg = ResolveConfig::default();
        let mut s = s2();
        let e = s
            .post_event(
                "alice",
                Edit::SetActive {
                    id: id("CR3"),
                    active: true,
                },
                &cfg,
            )
            .unwrap_err();
        assert_eq!(e.code(), "FORBIDDEN");
        assert_eq!(
            s.post_event(
                "pepper",
                Edit::SetActive {
                    id: id("CR3"),
                    active: true
                },
                &cfg
            )
            .unwrap_err()
            .code(),
            "FORBIDDEN"
        );
        assert_eq!(
            s.post_event(
                "mallory",
                Edit::SetActive {
                    id: id("T3"),
                    active: true
                },
                &cfg
            )
            .unwrap_err()
            .code(),
            "FORBIDDEN"
        );
        s.post_event(
            "bob",
            Edit::SetActive {
                id: id("CR3"),
                active: true,
            },
            &cfg,
        )
        .unwrap();
        let out = s
            .post_event(
                "pepper",
                Edit::SetActive {
                    id: id("T3"),
                    active: true,
                },
                &cfg,
            )
            .unwrap();
        assert!(out.active.contains(&id("T1")));
        assert_eq!(out.seq, 2);
        assert!(s.event_log.len() == 2);
    }

    #[test]
    fn added_user_argument_needs_matching_owner() {
        let cfg = ResolveConfig::default();
        let mut s = s2();
        let arg = Argument::user(id("CG9"), UserId::new("cg").unwrap()).with_active(true);
        let edit = Edit::AddArgument {
            argument: arg,
            relations: vec![crate::model::Relation::new(
                id("CG9"),
                id("R"),
                crate::model::Polarity::Support,
            )],
        };
        assert_eq!(s.post_event("bob", edit.clone(), &cfg).unwrap_err().code(), "FORBIDDEN");
        s.post_event("alice", edit, &cfg).unwrap();
    }

    #[test]
    fn duplicate_user_binding_rejected() {
        let mut p = participants();
        p.insert("carol".into(), Role::User(UserId::new("cg").unwrap()));
        let e = Session::create(
            "s".into(),
            SessionSource::Corpus {
                name: "frailty_scenario2".into(),
            },
            p,
        )
        .unwrap_err();
        assert_eq!(e.code(), "DUPLICATE_ID");
        let e = Session::create(
            "s".into(),
            SessionSource::Corpus { name: "nope".into() },
            participants(),
        )
        .unwrap_err();
        assert_eq!(e.code(), "UNKNOWN_CORPUS");
    }

    #[test]
    fn upload_errors_carry_lines() {
        let e = Session::create(
            "s".into(),
            SessionSource::Upload {
                text: "option R\natt X R\n".into(),
            },
            BTreeMap::new(),
        )
        .unwrap_err();
        match e {
            Error::InvalidAf(errs) => assert_eq!(errs[0].line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explanation_index_bounds() {
        let cfg = ResolveConfig::default();
        let s = s2();
        assert_eq!(s.get_explanation(-1, &cfg).unwrap_err().code(), "OUT_OF_RANGE");
        assert_eq!(s.get_explanation(0, &cfg).unwrap_err().code(), "OUT_OF_RANGE");
    }

    #[test]
    fn role_serializes_as_string() {
        assert_eq!(serde_json::to_string(&Role::Robot).unwrap(), "\"robot\"");
        let r: Role = serde_json::from_str("\"cg\"").unwrap();
        assert_eq!(r, Role::User(UserId::new("cg").unwrap()));
    }
}
