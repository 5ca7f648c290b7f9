//! Bundled frailty-assessment frameworks and their scenario descriptors.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{RemovalFilter, Scenario};
use crate::error::{Error, Result};
use crate::format::{parse_framework, SourceDocument};
use crate::model::{validate_structure, ArgumentId, Framework, UserId};
use crate::preferences::PreferenceSign;

/// Environment variable naming a directory that overrides the bundled files.
pub const CORPUS_DIR_ENV: &str = "GRADARG_CORPUS_DIR";

const BUNDLED: &[(&str, &str, &str)] = &[
    (
        "frailty_scenario1",
        include_str!("../corpus/frailty_scenario1.toml"),
        include_str!("../corpus/frailty_scenario1.af"),
    ),
    (
        "frailty_scenario2",
        include_str!("../corpus/frailty_scenario2.toml"),
        include_str!("../corpus/frailty_scenario2.af"),
    ),
];

const ALIASES: &[(&str, &str)] = &[("frailty_s1", "frailty_scenario1"), ("frailty_s2", "frailty_scenario2")];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelNotes {
    #[serde(default)]
    pub placeholder: Vec<String>,
}

/// Contents of a `<name>.toml` descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    pub name: String,
    pub framework: String,
    #[serde(default)]
    pub description: String,
    pub pair: [String; 2],
    #[serde(default)]
    pub risk: Option<String>,
    pub toggles: Vec<String>,
    #[serde(default)]
    pub derived: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub preferences: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    pub without_risk: Option<RemovalFilter>,
    #[serde(default)]
    pub labels: LabelNotes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Prose,
    Placeholder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub document: SourceDocument,
    pub descriptor: Descriptor,
    pub framework: Framework,
    pub scenario: Scenario,
    pub label_sources: BTreeMap<ArgumentId, LabelSource>,
}

impl CorpusEntry {
    /// The scenario's risk argument, or BAD_REQUEST when it declares none.
    pub fn risk(&self) -> Result<ArgumentId> {
        self.scenario
            .risk
            .clone()
            .ok_or_else(|| Error::BadRequest(format!("{} declares no risk argument", self.name)))
    }

    /// Removal of the risk argument and its derivation sources, keeping every
    /// other argument as a toggle even if it no longer reaches an option.
    pub fn literal_without_risk(&self) -> Result<RemovalFilter> {
        let risk = self.risk()?;
        let mut remove = vec![risk.clone()];
        if let Some(arg) = self.framework.argument(&risk) {
            remove.extend(arg.derived_active_from.iter().cloned());
        }
        Ok(RemovalFilter {
            remove,
            prune_unreachable: false,
        })
    }
}

/// Names of the bundled corpora.
pub fn list_corpora() -> Vec<&'static str> {
    BUNDLED.iter().map(|(name, _, _)| *name).collect()
}

fn canonical(name: &str) -> Option<&'static str> {
    let name = ALIASES
        .iter()
        .find(|(a, _)| *a == name)
        .map(|(_, n)| *n)
        .unwrap_or(name);
    BUNDLED.iter().find(|(n, _, _)| *n == name).map(|(n, _, _)| *n)
}

/// Loads a corpus by name, preferring files under `$GRADARG_CORPUS_DIR` when
/// that variable is set and the descriptor exists there.
pub fn load_corpus(name: &str) -> Result<CorpusEntry> {
    match std::env::var_os(CORPUS_DIR_ENV) {
        Some(dir) => load_corpus_from(Path::new(&dir), name),
        None => load_bundled(name),
    }
}

pub fn load_bundled(name: &str) -> Result<CorpusEntry> {
    let canon = canonical(name).ok_or_else(|| Error::UnknownCorpus(name.to_string()))?;
    let (_, toml_text, af_text) = BUNDLED.iter().find(|(n, _, _)| *n == canon).expect("bundled");
    let descriptor = parse_descriptor(toml_text)?;
    let document = SourceDocument {
        text: af_text.to_string(),
        origin: format!("bundled:{}", descriptor.framework),
    };
    build_entry(canon, document, descriptor)
}

/// Loads `<dir>/<name>.toml` and the framework file it names; falls back to the
/// bundled copy when the descriptor is absent from `dir`.
pub fn load_corpus_from(dir: &Path, name: &str) -> Result<CorpusEntry> {
    let canon = canonical(name).unwrap_or(name);
    let path = dir.join(format!("{canon}.toml"));
    if !path.is_file() {
        return load_bundled(name);
    }
    let descriptor = parse_descriptor(&std::fs::read_to_string(&path)?)?;
    let af_path: PathBuf = dir.join(&descriptor.framework);
    let document = SourceDocument::from_path(&af_path)?;
    build_entry(canon, document, descriptor)
}

fn parse_descriptor(text: &str) -> Result<Descriptor> {
    toml::from_str(text).map_err(|e| Error::InvalidCorpus(e.to_string()))
}

fn ids(raw: &[String]) -> Result<Vec<ArgumentId>> {
    raw.iter().map(|s| ArgumentId::new(s)).collect()
}

fn build_entry(name: &str, document: SourceDocument, descriptor: Descriptor) -> Result<CorpusEntry> {
    let framework = parse_framework(&document).map_err(Error::InvalidAf)?;
    let report = validate_structure(&framework);
    if !report.is_valid() {
        return Err(Error::InvalidStructure(report));
    }
    let bad = |msg: String| Error::InvalidCorpus(format!("{name}: {msg}"));

    // derived rules must agree with the framework file in both directions
    let mut declared = BTreeMap::new();
    for (target, from) in &descriptor.derived {
        let mut from = ids(from)?;
        from.sort();
        declared.insert(ArgumentId::new(target)?, from);
    }
    let mut actual = BTreeMap::new();
    for arg in framework.arguments().filter(|a| !a.derived_active_from.is_empty()) {
        let mut from = arg.derived_active_from.clone();
        from.sort();
        actual.insert(arg.id.clone(), from);
    }
    if declared != actual {
        return Err(bad(format!(
            "derived rules {declared:?} disagree with framework {actual:?}"
        )));
    }

    let mut declared_prefs = BTreeSet::new();
    for (user, signs) in &descriptor.preferences {
        for (option, sign) in signs {
            let sign: PreferenceSign = sign.parse()?;
            declared_prefs.insert((UserId::new(user)?, ArgumentId::new(option)?, sign));
        }
    }
    let actual_prefs: BTreeSet<_> = framework.preferences().entries().collect();
    if declared_prefs != actual_prefs {
        return Err(bad("preferences disagree with framework".into()));
    }

    let placeholder: BTreeSet<ArgumentId> = ids(&descriptor.labels.placeholder)?.into_iter().collect();
    for id in &placeholder {
        if !framework.contains(id) {
            return Err(bad(format!("placeholder label for unknown argument {id}")));
        }
    }
    let label_sources = framework
        .arguments()
        .filter(|a| !a.is_option())
        .map(|a| {
            let src = if placeholder.contains(&a.id) {
                LabelSource::Placeholder
            } else {
                LabelSource::Prose
            };
            (a.id.clone(), src)
        })
        .collect();

    let pair = (
        ArgumentId::new(&descriptor.pair[0])?,
        ArgumentId::new(&descriptor.pair[1])?,
    );
    let scenario = Scenario {
        name: name.to_string(),
        framework: framework.clone(),
        toggles: ids(&descriptor.toggles)?,
        pair,
        risk: descriptor.risk.as_deref().map(ArgumentId::new).transpose()?,
        without_risk: descriptor.without_risk.clone().unwrap_or_default(),
    };
    scenario.check().map_err(|e| bad(e.to_string()))?;
    if let Some(r) = &scenario.risk {
        if !framework.contains(r) {
            return Err(bad(format!("risk argument {r} missing")));
        }
    }
    Ok(CorpusEntry {
        name: name.to_string(),
        document,
        descriptor,
        framework,
        scenario,
        label_sources,
    })
}
