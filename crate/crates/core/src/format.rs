//! The `.af` text format.
//!
//! One directive per line, `#` starts a comment:
//!
//! ```text
//! user cg
//! option R label="repeat the test"
//! option not_R
//! arg CG1 kind=user owner=cg base=0.5 active=false label="packed schedule"
//! arg T1 kind=task derived_active_from=T2,T3
//! att CG1 R
//! sup CG1 not_R
//! pref cg R -
//! ```
//!
//! References may point forward; everything is resolved after the whole
//! document has been read, and all independent errors are reported together.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    validate_structure, Argument, ArgumentId, ArgumentKind, Framework, IssueCode, Polarity, Relation, Subject, UserId,
};
use crate::preferences::PreferenceSign;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDocument {
    pub text: String,
    pub origin: String,
}

impl SourceDocument {
    pub fn inline(text: impl Into<String>) -> Self {
        SourceDocument {
            text: text.into(),
            origin: "<inline>".to_string(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(SourceDocument {
            text,
            origin: path.display().to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParseErrorCode {
    DuplicateId,
    UnknownReference,
    BadScore,
    DuplicateRelation,
    Syntax,
    ConflictingSign,
    OptionHasOutgoing,
    Cycle,
}

impl ParseErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorCode::DuplicateId => "DUPLICATE_ID",
            ParseErrorCode::UnknownReference => "UNKNOWN_REFERENCE",
            ParseErrorCode::BadScore => "BAD_SCORE",
            ParseErrorCode::DuplicateRelation => "DUPLICATE_RELATION",
            ParseErrorCode::Syntax => "SYNTAX",
            ParseErrorCode::ConflictingSign => "CONFLICTING_SIGN",
            ParseErrorCode::OptionHasOutgoing => "OPTION_HAS_OUTGOING",
            ParseErrorCode::Cycle => "CYCLE",
        }
    }
}

impl fmt::Display for ParseErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub code: ParseErrorCode,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {} {}", self.line, self.column, self.code, self.message)
    }
}

#[derive(Clone, Debug)]
struct Token {
    text: String,
    col: usize,
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

struct Collector {
    errors: Vec<ParseError>,
}

impl Collector {
    fn push(&mut self, pos: Pos, code: ParseErrorCode, message: impl Into<String>) {
        self.errors.push(ParseError {
            line: pos.line,
            column: pos.col,
            code,
            message: message.into(),
        });
    }
}

fn tokenize(line: &str, lineno: usize, out: &mut Collector) -> Option<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().enumerate().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            break;
        }
        let col = i + 1;
        let mut text = String::new();
        while let Some(&(_, c)) = chars.peek() {
            if c.is_whitespace() {
                break;
            }
            chars.next();
            if c == '"' {
                let mut closed = false;
                while let Some((_, q)) = chars.next() {
                    match q {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match chars.next() {
                            Some((_, 'n')) => text.push('\n'),
                            Some((_, e)) => text.push(e),
                            None => break,
                        },
                        q => text.push(q),
                    }
                }
                if !closed {
                    out.push(Pos { line: lineno, col }, ParseErrorCode::Syntax, "unterminated string");
                    return None;
                }
            } else {
                text.push(c);
            }
        }
        tokens.push(Token { text, col });
    }
    Some(tokens)
}

struct OptionDecl {
    arg: Argument,
    pos: Pos,
}

struct RelationDecl {
    source: (String, Pos),
    target: (String, Pos),
    polarity: Polarity,
    pos: Pos,
}

struct PrefDecl {
    user: (String, Pos),
    option: (String, Pos),
    sign: PreferenceSign,
    pos: Pos,
}

struct ArgDecl {
    arg: Argument,
    owner: Option<(String, Pos)>,
    derived: Vec<(String, Pos)>,
    pos: Pos,
}

fn parse_id(tok: &Token, line: usize, out: &mut Collector) -> Option<ArgumentId> {
    match ArgumentId::new(&tok.text) {
        Ok(id) => Some(id),
        Err(_) => {
            out.push(
                Pos { line, col: tok.col },
                ParseErrorCode::Syntax,
                format!("invalid identifier `{}`", tok.text),
            );
            None
        }
    }
}

fn parse_score(text: &str, pos: Pos, out: &mut Collector) -> Option<f64> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() && (0.0..=1.0).contains(&v) => Some(v),
        Ok(v) => {
            out.push(pos, ParseErrorCode::BadScore, format!("base score {v} outside [0, 1]"));
            None
        }
        Err(_) => {
            out.push(pos, ParseErrorCode::Syntax, format!("`{text}` is not a number"));
            None
        }
    }
}

/// Splits `key=value` attributes, reporting malformed or repeated keys.
fn attributes<'t>(
    tokens: &'t [Token],
    line: usize,
    allowed: &[&str],
    out: &mut Collector,
) -> BTreeMap<&'t str, (&'t str, Pos)> {
    let mut attrs = BTreeMap::new();
    for tok in tokens {
        let pos = Pos { line, col: tok.col };
        let Some((key, value)) = tok.text.split_once('=') else {
            out.push(
                pos,
                ParseErrorCode::Syntax,
                format!("expected key=value, found `{}`", tok.text),
            );
            continue;
        };
        if !allowed.contains(&key) {
            out.push(pos, ParseErrorCode::Syntax, format!("unknown attribute `{key}`"));
        } else if attrs.insert(key, (value, pos)).is_some() {
            out.push(pos, ParseErrorCode::Syntax, format!("attribute `{key}` given twice"));
        }
    }
    attrs
}

fn expect_arity(tokens: &[Token], n: usize, pos: Pos, out: &mut Collector) -> bool {
    if tokens.len() != n {
        out.push(
            pos,
            ParseErrorCode::Syntax,
            format!(
                "`{}` takes {} operand(s), found {}",
                tokens[0].text,
                n - 1,
                tokens.len() - 1
            ),
        );
        return false;
    }
    true
}

#[derive(Default)]
struct Declarations {
    options: Vec<OptionDecl>,
    args: Vec<ArgDecl>,
    users: Vec<(UserId, Pos)>,
    relations: Vec<RelationDecl>,
    prefs: Vec<PrefDecl>,
}

fn read_line(tokens: &[Token], line: usize, decls: &mut Declarations, out: &mut Collector) {
    let head = &tokens[0];
    let pos = Pos { line, col: head.col };
    match head.text.as_str() {
        "option" => {
            if tokens.len() < 2 {
                out.push(pos, ParseErrorCode::Syntax, "`option` needs an identifier");
                return;
            }
            let id = parse_id(&tokens[1], line, out);
            let attrs = attributes(&tokens[2..], line, &["label", "base"], out);
            let Some(id) = id else { return };
            let mut arg = Argument::option(id);
            if let Some((label, _)) = attrs.get("label") {
                arg.label = label.to_string();
            }
            if let Some((base, p)) = attrs.get("base") {
                match parse_score(base, *p, out) {
                    Some(b) => arg.base_score = b,
                    None => return,
                }
            }
            decls.options.push(OptionDecl { arg, pos });
        }
        "arg" => {
            if tokens.len() < 2 {
                out.push(pos, ParseErrorCode::Syntax, "`arg` needs an identifier");
                return;
            }
            let id = parse_id(&tokens[1], line, out);
            let attrs = attributes(
                &tokens[2..],
                line,
                &["kind", "owner", "base", "active", "label", "derived_active_from"],
                out,
            );
            let mut ok = id.is_some();
            let kind = match attrs.get("kind") {
                Some(("user", _)) => Some(ArgumentKind::User),
                Some(("task", _)) => Some(ArgumentKind::Task),
                Some((other, p)) => {
                    out.push(
                        *p,
                        ParseErrorCode::Syntax,
                        format!("kind must be user or task, found `{other}`"),
                    );
                    None
                }
                None => {
                    out.push(pos, ParseErrorCode::Syntax, "`arg` requires kind=<user|task>");
                    None
                }
            };
            ok &= kind.is_some();
            let owner = attrs.get("owner").map(|(o, p)| (o.to_string(), *p));
            match (kind, &owner) {
                (Some(ArgumentKind::User), None) => {
                    out.push(pos, ParseErrorCode::Syntax, "user arguments require owner=<user>");
                    ok = false;
                }
                (Some(ArgumentKind::Task), Some((_, p))) => {
                    out.push(*p, ParseErrorCode::Syntax, "task arguments cannot have an owner");
                    ok = false;
                }
                _ => {}
            }
            let base = match attrs.get("base") {
                Some((b, p)) => parse_score(b, *p, out),
                None => Some(Argument::DEFAULT_BASE_SCORE),
            };
            ok &= base.is_some();
            let active = match attrs.get("active") {
                Some(("true", _)) => Some(true),
                Some(("false", _)) | None => Some(false),
                Some((other, p)) => {
                    out.push(
                        *p,
                        ParseErrorCode::Syntax,
                        format!("active must be true or false, found `{other}`"),
                    );
                    None
                }
            };
            ok &= active.is_some();
            let derived: Vec<(String, Pos)> = attrs
                .get("derived_active_from")
                .map(|(list, p)| {
                    list.split(',')
                        .filter(|s| !s.is_empty())
                        .map(|s| (s.to_string(), *p))
                        .collect()
                })
                .unwrap_or_default();
            if !ok {
                return;
            }
            let id = id.expect("checked");
            let mut arg = match kind.expect("checked") {
                ArgumentKind::User => {
                    // placeholder owner, replaced during resolution
                    Argument::user(id, UserId::new("pending").expect("valid"))
                }
                _ => Argument::task(id),
            };
            arg.base_score = base.expect("checked");
            arg.active = active.expect("checked");
            if let Some((label, _)) = attrs.get("label") {
                arg.label = label.to_string();
            }
            decls.args.push(ArgDecl {
                arg,
                owner,
                derived,
                pos,
            });
        }
        "att" | "sup" => {
            if !expect_arity(tokens, 3, pos, out) {
                return;
            }
            decls.relations.push(RelationDecl {
                source: (
                    tokens[1].text.clone(),
                    Pos {
                        line,
                        col: tokens[1].col,
                    },
                ),
                target: (
                    tokens[2].text.clone(),
                    Pos {
                        line,
                        col: tokens[2].col,
                    },
                ),
                polarity: if head.text == "att" {
                    Polarity::Attack
                } else {
                    Polarity::Support
                },
                pos,
            });
        }
        "user" => {
            if !expect_arity(tokens, 2, pos, out) {
                return;
            }
            match UserId::new(&tokens[1].text) {
                Ok(u) => decls.users.push((u, pos)),
                Err(_) => out.push(
                    Pos {
                        line,
                        col: tokens[1].col,
                    },
                    ParseErrorCode::Syntax,
                    format!("invalid user identifier `{}`", tokens[1].text),
                ),
            }
        }
        "pref" => {
            if !expect_arity(tokens, 4, pos, out) {
                return;
            }
            let sign_tok = &tokens[3];
            match sign_tok.text.parse::<PreferenceSign>() {
                Ok(sign) => decls.prefs.push(PrefDecl {
                    user: (
                        tokens[1].text.clone(),
                        Pos {
                            line,
                            col: tokens[1].col,
                        },
                    ),
                    option: (
                        tokens[2].text.clone(),
                        Pos {
                            line,
                            col: tokens[2].col,
                        },
                    ),
                    sign,
                    pos,
                }),
                Err(_) => out.push(
                    Pos {
                        line,
                        col: sign_tok.col,
                    },
                    ParseErrorCode::Syntax,
                    format!("preference sign must be +, - or 0, found `{}`", sign_tok.text),
                ),
            }
        }
        other => out.push(pos, ParseErrorCode::Syntax, format!("unknown directive `{other}`")),
    }
}

/// Parses a framework, returning every error found in the document.
pub fn parse_framework(doc: &SourceDocument) -> std::result::Result<Framework, Vec<ParseError>> {
    let mut out = Collector { errors: Vec::new() };
    let mut decls = Declarations::default();
    for (idx, raw) in doc.text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let Some(tokens) = tokenize(line, idx + 1, &mut out) else {
            continue;
        };
        if !tokens.is_empty() {
            read_line(&tokens, idx + 1, &mut decls, &mut out);
        }
    }
    let framework = resolve(decls, &mut out);
    let mut errors = out.errors;
    if errors.is_empty() {
        Ok(framework)
    } else {
        errors.sort_by_key(|e| (e.line, e.column, e.code));
        Err(errors)
    }
}

fn resolve(decls: Declarations, out: &mut Collector) -> Framework {
    let mut fw = Framework::default();

    for (user, pos) in &decls.users {
        if fw.insert_user(user.clone()).is_err() {
            out.push(
                *pos,
                ParseErrorCode::DuplicateId,
                format!("user `{user}` declared twice"),
            );
        }
    }

    let mut seen: BTreeSet<ArgumentId> = BTreeSet::new();
    let mut owners_ok = Vec::new();
    for decl in &decls.options {
        if !seen.insert(decl.arg.id.clone()) {
            out.push(
                decl.pos,
                ParseErrorCode::DuplicateId,
                format!("`{}` declared twice", decl.arg.id),
            );
        } else {
            fw.insert_argument(decl.arg.clone()).expect("option insertion");
        }
    }
    for decl in &decls.args {
        if !seen.insert(decl.arg.id.clone()) {
            out.push(
                decl.pos,
                ParseErrorCode::DuplicateId,
                format!("`{}` declared twice", decl.arg.id),
            );
            continue;
        }
        let mut arg = decl.arg.clone();
        if let Some((owner, pos)) = &decl.owner {
            match UserId::new(owner) {
                Ok(u) if fw.users().contains(&u) => arg.owner = Some(u),
                _ => {
                    out.push(
                        *pos,
                        ParseErrorCode::UnknownReference,
                        format!("unknown user `{owner}`"),
                    );
                    continue;
                }
            }
        }
        fw.insert_argument(arg).expect("argument insertion");
        owners_ok.push(decl);
    }

    let lookup = |name: &str| ArgumentId::new(name).ok().filter(|id| seen.contains(id));

    for decl in owners_ok {
        let mut derived = Vec::new();
        for (name, pos) in &decl.derived {
            match lookup(name) {
                Some(id) => derived.push(id),
                None => out.push(
                    *pos,
                    ParseErrorCode::UnknownReference,
                    format!("unknown argument `{name}`"),
                ),
            }
        }
        fw.argument_mut(&decl.arg.id).expect("inserted").derived_active_from = derived;
    }

    let mut relation_lines: BTreeMap<(ArgumentId, ArgumentId), Pos> = BTreeMap::new();
    for decl in &decls.relations {
        let source = lookup(&decl.source.0);
        let target = lookup(&decl.target.0);
        for (name, pos, found) in [
            (&decl.source.0, decl.source.1, &source),
            (&decl.target.0, decl.target.1, &target),
        ] {
            if found.is_none() {
                out.push(
                    pos,
                    ParseErrorCode::UnknownReference,
                    format!("unknown argument `{name}`"),
                );
            }
        }
        let (Some(source), Some(target)) = (source, target) else {
            continue;
        };
        if source == target {
            out.push(decl.pos, ParseErrorCode::Cycle, format!("`{source}` relates to itself"));
            continue;
        }
        let key = (source.clone(), target.clone());
        if relation_lines.contains_key(&key) {
            out.push(
                decl.pos,
                ParseErrorCode::DuplicateRelation,
                format!("relation {source} -> {target} declared twice"),
            );
            continue;
        }
        relation_lines.insert(key, decl.pos);
        fw.insert_relation(Relation::new(source, target, decl.polarity))
            .expect("relation insertion");
    }

    let mut signs: BTreeMap<(UserId, ArgumentId), PreferenceSign> = BTreeMap::new();
    for decl in &decls.prefs {
        let user = UserId::new(&decl.user.0).ok().filter(|u| fw.users().contains(u));
        if user.is_none() {
            out.push(
                decl.user.1,
                ParseErrorCode::UnknownReference,
                format!("unknown user `{}`", decl.user.0),
            );
        }
        let option = lookup(&decl.option.0).filter(|id| fw.is_option(id));
        if option.is_none() {
            out.push(
                decl.option.1,
                ParseErrorCode::UnknownReference,
                format!("unknown option `{}`", decl.option.0),
            );
        }
        let (Some(user), Some(option)) = (user, option) else {
            continue;
        };
        match signs.get(&(user.clone(), option.clone())) {
            Some(prev) if *prev != decl.sign => out.push(
                decl.pos,
                ParseErrorCode::ConflictingSign,
                format!("user `{user}` already has sign {prev} for `{option}`"),
            ),
            Some(_) => {}
            None => {
                signs.insert((user.clone(), option.clone()), decl.sign);
                fw.set_preference(&user, &option, decl.sign)
                    .expect("checked references");
            }
        }
    }

    let report = validate_structure(&fw);
    for issue in &report.errors {
        let code = match issue.code {
            IssueCode::OptionHasOutgoing => ParseErrorCode::OptionHasOutgoing,
            IssueCode::Cycle => ParseErrorCode::Cycle,
            IssueCode::NoPathToOption => continue,
        };
        let pos = match &issue.subject {
            Subject::Relation { source, target } => relation_lines.get(&(source.clone(), target.clone())).copied(),
            Subject::Argument { id } => relation_lines
                .iter()
                .filter(|((s, t), _)| s == id || t == id)
                .map(|(_, p)| *p)
                .min_by_key(|p| p.line),
        };
        out.push(pos.unwrap_or(Pos { line: 1, col: 1 }), code, issue.message.clone());
    }
    fw
}

/// Parses text into a framework, wrapping errors as [`Error::InvalidAf`].
pub fn parse_str(text: &str) -> Result<Framework> {
    parse_framework(&SourceDocument::inline(text)).map_err(Error::InvalidAf)
}

/// Writes `x` with 17 significant digits, trimming trailing zeros.
pub fn format_score(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut s = if exp >= 0 {
        let split = (exp as usize + 1).min(digits.len());
        let mut int = digits[..split].to_string();
        while int.len() < exp as usize + 1 {
            int.push('0');
        }
        format!("{int}.{}", &digits[split..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

fn quote(label: &str) -> String {
    let mut s = String::with_capacity(label.len() + 2);
    s.push('"');
    for c in label.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            c => s.push(c),
        }
    }
    s.push('"');
    s
}

/// Deterministic `.af` rendering. Parsing the output yields an equal framework.
pub fn serialize_framework(framework: &Framework) -> String {
    let mut out = String::new();
    for user in framework.users() {
        out.push_str(&format!("user {user}\n"));
    }
    for arg in framework.arguments() {
        if arg.is_option() {
            out.push_str(&format!("option {}", arg.id));
            if arg.base_score != Argument::DEFAULT_BASE_SCORE {
                out.push_str(&format!(" base={}", format_score(arg.base_score)));
            }
        } else {
            let kind = match arg.kind {
                ArgumentKind::User => "user",
                _ => "task",
            };
            out.push_str(&format!("arg {} kind={kind}", arg.id));
            if let Some(owner) = &arg.owner {
                out.push_str(&format!(" owner={owner}"));
            }
            out.push_str(&format!(" base={} active={}", format_score(arg.base_score), arg.active));
            if !arg.derived_active_from.is_empty() {
                let list: Vec<&str> = arg.derived_active_from.iter().map(|d| d.as_str()).collect();
                out.push_str(&format!(" derived_active_from={}", list.join(",")));
            }
        }
        if !arg.label.is_empty() {
            out.push_str(&format!(" label={}", quote(&arg.label)));
        }
        out.push('\n');
    }
    for rel in framework.relations() {
        out.push_str(&format!("{} {} {}\n", rel.polarity.short(), rel.source, rel.target));
    }
    for (user, option, sign) in framework.preferences().entries() {
        out.push_str(&format!("pref {user} {option} {sign}\n"));
    }
    out
}
