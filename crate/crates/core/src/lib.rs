//! Multi-user gradual argumentation.
//!
//! Frameworks hold arguments with base scores, attack/support relations,
//! options and per-user preferences. Strengths come from a gradual semantics,
//! and the resolver picks an option from the strengths and the preference
//! profile.

pub mod analysis;
pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod model;
pub mod preferences;
pub mod resolver;
pub mod semantics;
pub mod session;

pub use error::{Error, Result};
pub use model::{
    active_subframework, check_user_consistency, pro_con, validate_structure, Argument, ArgumentId, ArgumentKind,
    Framework, FrameworkBuilder, Polarity, Relation, UserId, ValidationReport,
};
pub use preferences::{classify, preference_sets, ConflictClass, ConflictLabel, PreferenceProfile, PreferenceSign};
pub use semantics::{evaluate, EvalConfig, SemanticsKind, StrengthMap};
