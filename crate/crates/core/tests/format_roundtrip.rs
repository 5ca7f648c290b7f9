mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gradarg_core::corpus::load_bundled;
use gradarg_core::format::{parse_framework, parse_str, serialize_framework, SourceDocument};
use gradarg_core::validate_structure;

#[test]
fn thousand_random_frameworks_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let fw = common::random_document_framework(&mut rng);
        let text = serialize_framework(&fw);
        let back = parse_str(&text).unwrap_or_else(|e| panic!("{e:?}\n{text}"));
        assert_eq!(back, fw, "{text}");
        assert_eq!(serialize_framework(&back), text);
    }
}

#[test]
fn corpus_relations_match_golden_lists() {
    assert_eq!(
        common::corpus_relation_lines("frailty_scenario2"),
        common::golden_relations("frailty_scenario2.relations")
    );
    assert_eq!(
        common::corpus_relation_lines("frailty_scenario1"),
        common::golden_relations("frailty_scenario1.relations")
    );
}

#[test]
fn corpus_shapes() {
    let s2 = load_bundled("frailty_scenario2").unwrap();
    assert_eq!(s2.framework.relation_count(), 26);
    assert_eq!(s2.framework.arguments().filter(|a| !a.is_option()).count(), 18);
    assert_eq!(s2.framework.len(), 20);
    assert!(s2.framework.arguments().all(|a| a.base_score == 0.5));
    let s1 = load_bundled("frailty_scenario1").unwrap();
    let ids: BTreeSet<&str> = s1
        .framework
        .arguments()
        .filter(|a| !a.is_option())
        .map(|a| a.id.as_str())
        .collect();
    assert_eq!(ids, BTreeSet::from(["CG1", "CR1", "CR2", "T1", "T2", "T3", "T4", "T5"]));
    for c in [&s1, &s2] {
        assert!(validate_structure(&c.framework).is_valid());
        let back = parse_str(&serialize_framework(&c.framework)).unwrap();
        assert_eq!(back, c.framework);
    }
}

#[test]
fn scenario1_without_risk_chain_flags_inert_argument() {
    let s1 = load_bundled("frailty_scenario1").unwrap();
    let keep: BTreeSet<_> = s1
        .framework
        .arguments()
        .map(|a| a.id.clone())
        .filter(|id| !["T1", "T2", "T3", "T4", "T5"].contains(&id.as_str()))
        .collect();
    let report = validate_structure(&s1.framework.restricted_to(&keep));
    assert!(report.errors.is_empty());
    assert_eq!(report.warnings.len(), 1);
    assert_eq!(report.warnings[0].code.as_str(), "NO_PATH_TO_OPTION");
}

#[test]
fn errors_are_collected_with_positions() {
    let text = "option R\narg A kind=task\narg A kind=task\natt B R\narg C kind=task base=2\nbogus\n";
    let errs = parse_framework(&SourceDocument::inline(text)).unwrap_err();
    let lines: Vec<usize> = errs.iter().map(|e| e.line).collect();
    assert_eq!(lines, vec![3, 4, 5, 6]);
    let codes: Vec<&str> = errs.iter().map(|e| e.code.as_str()).collect();
    assert_eq!(codes, ["DUPLICATE_ID", "UNKNOWN_REFERENCE", "BAD_SCORE", "SYNTAX"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn round_trip_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fw = common::random_document_framework(&mut rng);
        let back = parse_str(&serialize_framework(&fw)).unwrap();
        prop_assert_eq!(back, fw);
    }

    #[test]
    fn crlf_and_comments_do_not_matter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fw = common::random_document_framework(&mut rng);
        let text = serialize_framework(&fw);
        let noisy: String = text.lines().map(|l| format!("{l}   # trailing comment\r\n")).collect();
        prop_assert_eq!(parse_str(&noisy).unwrap(), fw);
    }
}
