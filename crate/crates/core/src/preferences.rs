//! Categorical user preferences over options, their totalization, and the
//! conflict / no-conflict taxonomy that drives the resolver's branching.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ArgumentId, UserId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PreferenceSign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Indifferent,
}

impl PreferenceSign {
    pub const ALL: [PreferenceSign; 3] = [
        PreferenceSign::Positive,
        PreferenceSign::Negative,
        PreferenceSign::Indifferent,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            PreferenceSign::Positive => "+",
            PreferenceSign::Negative => "-",
            PreferenceSign::Indifferent => "0",
        }
    }
}

impl std::str::FromStr for PreferenceSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" => Ok(PreferenceSign::Positive),
            "-" | "−" => Ok(PreferenceSign::Negative),
            "0" => Ok(PreferenceSign::Indifferent),
            other => Err(Error::BadRequest(format!("unknown preference sign `{other}`"))),
        }
    }
}

impl fmt::Display for PreferenceSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceEntry {
    pub user: UserId,
    pub option: ArgumentId,
    pub sign: PreferenceSign,
}

/// Partial preference map: at most one sign per (user, option).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<PreferenceEntry>", into = "Vec<PreferenceEntry>")]
pub struct PreferenceProfile {
    signs: BTreeMap<UserId, BTreeMap<ArgumentId, PreferenceSign>>,
}

impl PreferenceProfile {
    /// Builds a profile, rejecting any pair mapped to two different signs.
    pub fn from_entries(entries: impl IntoIterator<Item = (UserId, ArgumentId, PreferenceSign)>) -> Result<Self> {
        let mut out = PreferenceProfile::default();
        for (user, option, sign) in entries {
            match out.get(&user, &option) {
                Some(prev) if prev != sign => {
                    return Err(Error::ConflictingSign {
                        user: user.to_string(),
                        option: option.to_string(),
                    })
                }
                _ => out.set(user, option, sign),
            }
        }
        Ok(out)
    }

    pub fn get(&self, user: &UserId, option: &ArgumentId) -> Option<PreferenceSign> {
        self.signs.get(user).and_then(|m| m.get(option)).copied()
    }

    pub(crate) fn set(&mut self, user: UserId, option: ArgumentId, sign: PreferenceSign) {
        self.signs.entry(user).or_default().insert(option, sign);
    }

    pub fn entries(&self) -> impl Iterator<Item = (UserId, ArgumentId, PreferenceSign)> + '_ {
        self.signs
            .iter()
            .flat_map(|(u, m)| m.iter().map(move |(o, s)| (u.clone(), o.clone(), *s)))
    }

    pub fn len(&self) -> usize {
        self.signs.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Totalizes the profile: declared pairs are kept, every other
    /// (user, option) pair becomes indifferent.
    pub fn extend(&self, options: &[ArgumentId], users: &BTreeSet<UserId>) -> TotalProfile {
        let signs = users
            .iter()
            .map(|u| {
                let row = options
                    .iter()
                    .map(|o| {
                        let s = self.get(u, o).unwrap_or(PreferenceSign::Indifferent);
                        (o.clone(), s)
                    })
                    .collect();
                (u.clone(), row)
            })
            .collect();
        TotalProfile {
            options: options.to_vec(),
            signs,
        }
    }
}

impl From<Vec<PreferenceEntry>> for PreferenceProfile {
    fn from(v: Vec<PreferenceEntry>) -> Self {
        let mut out = PreferenceProfile::default();
        for e in v {
            out.set(e.user, e.option, e.sign);
        }
        out
    }
}

impl From<PreferenceProfile> for Vec<PreferenceEntry> {
    fn from(p: PreferenceProfile) -> Self {
        p.entries()
            .map(|(user, option, sign)| PreferenceEntry { user, option, sign })
            .collect()
    }
}

/// A preference profile defined on every (user, option) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalProfile {
    options: Vec<ArgumentId>,
    signs: BTreeMap<UserId, BTreeMap<ArgumentId, PreferenceSign>>,
}

impl TotalProfile {
    /// Builds a total profile from rows; every row must cover exactly `options`.
    pub fn from_rows(
        options: Vec<ArgumentId>,
        rows: impl IntoIterator<Item = (UserId, Vec<PreferenceSign>)>,
    ) -> Result<Self> {
        let mut signs = BTreeMap::new();
        for (user, row) in rows {
            if row.len() != options.len() {
                return Err(Error::BadRequest(format!(
                    "row for {user} has {} signs, expected {}",
                    row.len(),
                    options.len()
                )));
            }
            let row = options.iter().cloned().zip(row).collect();
            if signs.insert(user.clone(), row).is_some() {
                return Err(Error::DuplicateId(user.to_string()));
            }
        }
        Ok(TotalProfile { options, signs })
    }

    pub fn options(&self) -> &[ArgumentId] {
        &self.options
    }

    pub fn users(&self) -> impl Iterator<Item = &UserId> {
        self.signs.keys()
    }

    pub fn sign(&self, user: &UserId, option: &ArgumentId) -> PreferenceSign {
        self.signs
            .get(user)
            .and_then(|m| m.get(option))
            .copied()
            .unwrap_or(PreferenceSign::Indifferent)
    }

    fn has(&self, user: &UserId, option: &ArgumentId, sign: PreferenceSign) -> bool {
        self.sign(user, option) == sign
    }

    fn rows(&self) -> impl Iterator<Item = &BTreeMap<ArgumentId, PreferenceSign>> {
        self.signs.values()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConflictLabel {
    NC1,
    NC2,
    NC3,
    C1,
    C2,
    C3,
}

impl ConflictLabel {
    pub fn is_conflict(self) -> bool {
        matches!(self, ConflictLabel::C1 | ConflictLabel::C2 | ConflictLabel::C3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    NoConflict,
    Conflict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictClass {
    pub labels: BTreeSet<ConflictLabel>,
    pub overall: Overall,
}

impl ConflictClass {
    pub fn has(&self, label: ConflictLabel) -> bool {
        self.labels.contains(&label)
    }

    /// True when the profile satisfies none of the six conditions. Such
    /// profiles are treated as conflicts by [`classify`].
    pub fn is_unlabeled(&self) -> bool {
        self.labels.is_empty()
    }
}

/// All users hold identical extended preferences.
pub fn nc1(p: &TotalProfile) -> bool {
    let mut rows = p.rows();
    match rows.next() {
        None => true,
        Some(first) => rows.all(|r| r == first),
    }
}

/// Some option `o` is preferred by a non-empty group of users `U'` who prefer
/// nothing else, while everyone outside `U'` is indifferent to `o` and prefers
/// nothing. Searches all groups explicitly.
pub fn nc2_by_subsets(p: &TotalProfile) -> bool {
    use PreferenceSign::*;
    let users: Vec<&UserId> = p.users().collect();
    assert!(users.len() < 24, "subset search is exponential in the user count");
    for o in p.options() {
        for mask in 1u32..(1u32 << users.len()) {
            let members = |k: usize| mask & (1 << k) != 0;
            let inside_ok = users.iter().enumerate().filter(|(k, _)| members(*k)).all(|(_, i)| {
                p.has(i, o, Positive) && p.options().iter().filter(|x| *x != o).all(|x| !p.has(i, x, Positive))
            });
            let outside_ok = users.iter().enumerate().filter(|(k, _)| !members(*k)).all(|(_, j)| {
                p.has(j, o, Indifferent) && p.options().iter().filter(|x| *x != o).all(|x| !p.has(j, x, Positive))
            });
            if inside_ok && outside_ok {
                return true;
            }
        }
    }
    false
}

/// Closed form of [`nc2_by_subsets`]: one option is positively preferred by at
/// least one user, nobody positively prefers any other option, and every user
/// not preferring it is indifferent to it.
pub fn nc2_closed_form(p: &TotalProfile) -> bool {
    use PreferenceSign::*;
    p.options().iter().any(|o| {
        p.users().any(|i| p.has(i, o, Positive))
            && p.users().all(|i| {
                p.options().iter().filter(|x| *x != o).all(|x| !p.has(i, x, Positive))
                    && (p.has(i, o, Positive) || p.has(i, o, Indifferent))
            })
    })
}

/// No user prefers any option and each user is indifferent to at least one.
pub fn nc3(p: &TotalProfile) -> bool {
    use PreferenceSign::*;
    p.users().all(|i| {
        p.options().iter().all(|o| !p.has(i, o, Positive)) && p.options().iter().any(|o| p.has(i, o, Indifferent))
    })
}

/// An option preferred by one user and rejected by another.
pub fn c1(p: &TotalProfile) -> bool {
    use PreferenceSign::*;
    p.options().iter().any(|o| {
        p.users()
            .any(|i| p.has(i, o, Positive) && p.users().any(|j| j != i && p.has(j, o, Negative)))
    })
}

fn crossed(p: &TotalProfile, sign: PreferenceSign) -> bool {
    let users: Vec<&UserId> = p.users().collect();
    for i in &users {
        for j in &users {
            if i == j {
                continue;
            }
            for o in p.options() {
                for o2 in p.options() {
                    if o == o2 {
                        continue;
                    }
                    if p.has(i, o, sign) && p.has(j, o2, sign) && !p.has(j, o, sign) && !p.has(i, o2, sign) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Two users each prefer an option the other does not.
pub fn c2(p: &TotalProfile) -> bool {
    crossed(p, PreferenceSign::Positive)
}

/// Two users each reject an option the other does not.
pub fn c3(p: &TotalProfile) -> bool {
    crossed(p, PreferenceSign::Negative)
}

/// Returns every satisfied label. `overall` is `Conflict` when any C label
/// holds, and also when no label holds at all (a profile outside every
/// no-conflict condition is treated as conflicting).
pub fn classify(profile: &TotalProfile) -> ConflictClass {
    let small = profile.users().count() <= 16;
    let checks: [(ConflictLabel, bool); 6] = [
        (ConflictLabel::NC1, nc1(profile)),
        (
            ConflictLabel::NC2,
            if small {
                nc2_by_subsets(profile)
            } else {
                nc2_closed_form(profile)
            },
        ),
        (ConflictLabel::NC3, nc3(profile)),
        (ConflictLabel::C1, c1(profile)),
        (ConflictLabel::C2, c2(profile)),
        (ConflictLabel::C3, c3(profile)),
    ];
    let labels: BTreeSet<ConflictLabel> = checks.into_iter().filter(|(_, holds)| *holds).map(|(l, _)| l).collect();
    let overall = if labels.is_empty() || labels.iter().any(|l| l.is_conflict()) {
        Overall::Conflict
    } else {
        Overall::NoConflict
    };
    ConflictClass { labels, overall }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceSets {
    pub positive: BTreeSet<ArgumentId>,
    pub indifferent: BTreeSet<ArgumentId>,
    pub negative: BTreeSet<ArgumentId>,
}

/// Options marked `+`, `0` and `-` by at least one user (sets may overlap).
pub fn preference_sets(profile: &TotalProfile) -> PreferenceSets {
    let mut out = PreferenceSets::default();
    for row in profile.rows() {
        for (o, s) in row {
            let set = match s {
                PreferenceSign::Positive => &mut out.positive,
                PreferenceSign::Indifferent => &mut out.indifferent,
                PreferenceSign::Negative => &mut out.negative,
            };
            set.insert(o.clone());
        }
    }
    out
}

/// Enumerates every total profile over `users` × `options` (3^(|U|·|O|) of them).
pub fn all_profiles(users: &[UserId], options: &[ArgumentId]) -> impl Iterator<Item = TotalProfile> {
    let cells = users.len() * options.len();
    let total = 3usize.pow(cells as u32);
    let users = users.to_vec();
    let options = options.to_vec();
    (0..total).map(move |mut code| {
        let rows = users.iter().map(|u| {
            let row = (0..options.len())
                .map(|_| {
                    let s = PreferenceSign::ALL[code % 3];
                    code /= 3;
                    s
                })
                .collect();
            (u.clone(), row)
        });
        TotalProfile::from_rows(options.clone(), rows.collect::<Vec<_>>()).expect("well-formed rows")
    })
}
