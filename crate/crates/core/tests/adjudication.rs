mod common;

use alias_core::adjudication::{
    adjudicate, edit_distance, local_adjudicate, normalize, MatchConfig, OutcomeKind, Tier,
};
use alias_core::llm::{OfflineAdapter, StubAdapter};
use alias_core::morphology::packs::pack;
use alias_core::{Language, WordItem};
use common::{all_strings, oracle};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_oracle_exhaustively_up_to_six_over_abc() {
    let strings = all_strings(&['a', 'b', 'c'], 6);
    assert_eq!(strings.len(), 1093);
    let as_str: Vec<String> = strings.iter().map(|s| s.iter().collect()).collect();
    for (x, xs) in strings.iter().zip(&as_str) {
        for (y, ys) in strings.iter().zip(&as_str) {
            assert_eq!(edit_distance(xs, ys), oracle(x, y), "{xs:?} vs {ys:?}");
        }
    }
}

#[test]
fn matches_oracle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_250_101);
    let alphabet: Vec<char> = "abcdefgäö".chars().collect();
    let gen = |rng: &mut ChaCha8Rng| -> Vec<char> {
        let len = rng.random_range(0..=12);
        (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
    };
    for _ in 0..10_000 {
        let a = gen(&mut rng);
        let b = gen(&mut rng);
        let (sa, sb): (String, String) = (a.iter().collect(), b.iter().collect());
        assert_eq!(edit_distance(&sa, &sb), oracle(&a, &b), "{sa:?} vs {sb:?}");
    }
}

#[test]
fn spec_distances() {
    assert_eq!(edit_distance("", "abc"), 3);
    assert_eq!(edit_distance("tiger", "tiger"), 0);
    assert_eq!(edit_distance("dig", "tiger"), oracle(&['d', 'i', 'g'], &"tiger".chars().collect::<Vec<_>>()));
    assert_eq!(edit_distance("dig", "tiger"), 3);
}

fn tiger() -> WordItem {
    WordItem::new("tiger", "animals", &pack(Language::English).lexicon)
}

#[test]
fn local_tiers() {
    let cfg = MatchConfig::default();
    let w = tiger();
    assert_eq!(local_adjudicate("tiger", &w, &cfg).kind, OutcomeKind::Exact);
    assert_eq!(local_adjudicate("Is it a TIGER?", &w, &cfg).kind, OutcomeKind::Exact);
    assert_eq!(local_adjudicate("tigers", &w, &cfg).kind, OutcomeKind::Exact);
    let near = local_adjudicate("tigel", &w, &cfg);
    assert_eq!(near.kind, OutcomeKind::Near("tiger".into()));
    assert_eq!(near.tier, Tier::Local);
    assert_eq!(local_adjudicate("a tigel", &w, &cfg).kind, OutcomeKind::Near("tiger".into()));
    assert_eq!(local_adjudicate("dig", &w, &cfg).kind, OutcomeKind::Miss);
    assert_eq!(local_adjudicate("", &w, &cfg).kind, OutcomeKind::Miss);
}

#[test]
fn arbitration_paths() {
    let cfg = MatchConfig::default();
    let w = tiger();
    let mut stub = StubAdapter::verdicts(["near", "miss", "off_topic", "maybe?"]);
    let r = adjudicate("dig", &w, Some("It has stripes."), &[], &cfg, &mut stub);
    assert_eq!(r.outcome.kind, OutcomeKind::Near("tiger".into()));
    assert_eq!(r.outcome.tier, Tier::Arbitrated);
    assert_eq!(adjudicate("banana", &w, None, &[], &cfg, &mut stub).outcome.kind, OutcomeKind::Miss);
    let off = adjudicate("my dog ran away yesterday", &w, None, &[], &cfg, &mut stub);
    assert_eq!(off.outcome.kind, OutcomeKind::OffTopic);
    let garbled = adjudicate("banana", &w, None, &[], &cfg, &mut stub);
    assert_eq!(garbled.outcome.kind, OutcomeKind::Miss);
    assert_eq!(garbled.outcome.tier, Tier::Local);
    assert!(garbled.arbiter_error.is_some());
    // local hits never reach the arbiter
    adjudicate("tigel", &w, None, &[], &cfg, &mut stub);
    assert_eq!(stub.total_calls(), 4);
}

#[test]
fn arbiter_down_keeps_local_miss() {
    let mut offline = OfflineAdapter::default();
    let r = adjudicate("dig", &tiger(), None, &[], &MatchConfig::default(), &mut offline);
    assert_eq!(r.outcome.kind, OutcomeKind::Miss);
    assert!(r.arbiter_error.is_some());
    let disabled = MatchConfig::new(0.34, false).unwrap();
    adjudicate("dig", &tiger(), None, &[], &disabled, &mut offline);
    assert_eq!(offline.calls, 1);
}

#[test]
fn arbiter_prompt_carries_no_pseudonyms() {
    let mut stub = StubAdapter::verdicts(["miss"]);
    let ctx = vec!["It has stripes.".to_string()];
    adjudicate("dig", &tiger(), Some("It has stripes."), &ctx, &MatchConfig::default(), &mut stub);
    let req = &stub.requests()[0];
    assert!(req.user.contains("dig") && req.user.contains("tiger"));
}

proptest! {
    #[test]
    fn metric_properties(a in "[abcé]{0,8}", b in "[abcé]{0,8}", c in "[abcé]{0,8}") {
        let ab = edit_distance(&a, &b);
        prop_assert_eq!(ab, edit_distance(&b, &a));
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(edit_distance(&a, &c) <= ab + edit_distance(&b, &c));
    }

    #[test]
    fn acceptance_is_monotone_in_threshold(t in "[a-z ]{0,12}", lo in 0.01f64..0.98, bump in 0.0f64..0.5) {
        let w = tiger();
        let hi = (lo + bump).min(0.99);
        let at_lo = local_adjudicate(&t, &w, &MatchConfig::new(lo, false).unwrap());
        let at_hi = local_adjudicate(&t, &w, &MatchConfig::new(hi, false).unwrap());
        if at_lo.is_correct() {
            prop_assert!(at_hi.is_correct());
        }
    }

    #[test]
    fn exact_lemma_dominates(prefix in "[a-z ]{0,10}", suffix in "[a-z ]{0,10}") {
        let t = format!("{prefix} tiger {suffix}");
        prop_assert_eq!(local_adjudicate(&t, &tiger(), &MatchConfig::default()).kind, OutcomeKind::Exact);
    }

    #[test]
    fn normalize_is_idempotent(s in "\\PC{0,20}") {
        let once = normalize(&s);
        prop_assert_eq!(normalize(&once), once.clone());
    }
}
