mod common;

use std::collections::BTreeSet;

use common::{brute_force, shortest_prefix_hits, TrialGen};
use crs_trie::{
    compile, match_all, match_at, CompileConfig, CrsTrie, Error, MatchRecord, PatternSet,
    ScanConfig, Verifier,
};
use proptest::prelude::*;

fn scan(
    crs: &CrsTrie,
    text: &[u8],
    p: usize,
    chunk: usize,
    v: Option<&Verifier>,
) -> Vec<MatchRecord> {
    match_all(
        crs,
        text,
        &ScanConfig::new(p, chunk, v.is_some()).unwrap(),
        v,
    )
    .unwrap()
}

#[test]
fn random_trials_match_brute_force() {
    let mut gen = TrialGen::new(7);
    for i in 0..200 {
        let alphabet = if i % 2 == 0 { 4 } else { 256 };
        let t = gen.trial(alphabet, 4096);
        let set = PatternSet::with_alphabet(t.patterns.clone(), alphabet).unwrap();
        let cfg = CompileConfig::new(t.depth, t.merge_levels).unwrap();
        let crs = CrsTrie::from_trie(&compile(&set, &cfg).unwrap());
        let verifier = Verifier::new(&crs, &set).unwrap();

        let raw = scan(&crs, &t.text, 3, 97, None);
        let stops: Vec<(usize, usize)> = raw.iter().map(|r| (r.position, r.depth)).collect();
        let expected: Vec<(usize, usize)> = shortest_prefix_hits(&t.patterns, &t.text, t.depth)
            .into_iter()
            .collect();
        assert_eq!(stops, expected, "trial {i}");

        let verified = scan(&crs, &t.text, 3, 97, Some(&verifier));
        let found: BTreeSet<(usize, u32)> = verified
            .iter()
            .flat_map(|r| r.pattern_ids.iter().map(move |&id| (r.position, id)))
            .collect();
        assert_eq!(found, brute_force(&t.patterns, &t.text), "trial {i}");
        for r in &verified {
            assert_eq!(r.prefix_only, r.pattern_ids.is_empty());
        }
    }
}

#[test]
fn verify_requires_a_verifier() {
    let set = PatternSet::new(["ab"]).unwrap();
    let crs = CrsTrie::from_trie(&compile(&set, &CompileConfig::default()).unwrap());
    let cfg = ScanConfig::new(1, 16, true).unwrap();
    assert!(matches!(
        match_all(&crs, b"ab", &cfg, None),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        ScanConfig::new(0, 16, false),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        ScanConfig::new(1, 0, false),
        Err(Error::Config(_))
    ));
}

#[test]
fn verifier_rejects_a_shorter_pattern_set() {
    let set = PatternSet::new(["ab", "cd", "ef"]).unwrap();
    let crs = CrsTrie::from_trie(&compile(&set, &CompileConfig::default()).unwrap());
    let fewer = PatternSet::new(["ab"]).unwrap();
    assert!(matches!(
        Verifier::new(&crs, &fewer),
        Err(Error::Invariant(_))
    ));
}

#[test]
fn truncated_matches_are_flagged_prefix_only() {
    let set = PatternSet::new(["abcdef"]).unwrap();
    let crs = CrsTrie::from_trie(&compile(&set, &CompileConfig::new(3, 1).unwrap()).unwrap());
    let verifier = Verifier::new(&crs, &set).unwrap();
    let hits = scan(&crs, b"abcxx abcdef", 1, 4, Some(&verifier));
    let summary: Vec<_> = hits
        .iter()
        .map(|r| (r.position, r.depth, r.prefix_only))
        .collect();
    assert_eq!(summary, vec![(0, 3, true), (6, 3, false)]);
    assert_eq!(hits[1].pattern_ids, vec![0]);
}

#[test]
fn empty_text_has_no_matches() {
    let set = PatternSet::new(["a"]).unwrap();
    let crs = CrsTrie::from_trie(&compile(&set, &CompileConfig::default()).unwrap());
    assert!(scan(&crs, b"", 4, 8, None).is_empty());
}

proptest! {
    #[test]
    fn output_ignores_parallelism_and_chunking(
        raw in prop::collection::vec(prop::collection::vec(0u8..3, 1..6), 1..12),
        text in prop::collection::vec(0u8..3, 0..2000),
        p in 1usize..9,
        chunk in 1usize..300,
        depth in 1usize..6,
    ) {
        let set = PatternSet::with_alphabet(raw, 3).unwrap();
        let cfg = CompileConfig::new(depth, depth.min(3)).unwrap();
        let crs = CrsTrie::from_trie(&compile(&set, &cfg).unwrap());
        let verifier = Verifier::new(&crs, &set).unwrap();
        let base = scan(&crs, &text, 1, text.len().max(1), Some(&verifier));
        prop_assert_eq!(&scan(&crs, &text, p, chunk, Some(&verifier)), &base);
        prop_assert_eq!(
            scan(&crs, &text, p, chunk, None).len(),
            base.len()
        );
    }

    #[test]
    fn walk_never_reads_past_the_cut(
        raw in prop::collection::vec(prop::collection::vec(0u8..3, 1..9), 1..12),
        text in prop::collection::vec(0u8..3, 1..200),
        depth in 1usize..6,
    ) {
        let set = PatternSet::with_alphabet(raw, 3).unwrap();
        let cfg = CompileConfig::new(depth, depth.min(3)).unwrap();
        let crs = CrsTrie::from_trie(&compile(&set, &cfg).unwrap());
        for start in 0..text.len() {
            let full = match_at(&crs, &text, start);
            let end = (start + depth).min(text.len());
            prop_assert_eq!(&match_at(&crs, &text[..end], start), &full);
            if let Some(r) = full {
                prop_assert!(r.depth <= depth);
            }
        }
    }
}
