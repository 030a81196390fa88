//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Runtime bounds are for the debug profile.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use alias_core::adjudication::{adjudicate, edit_distance, local_adjudicate, MatchConfig, OutcomeKind, Tier};
use alias_core::clue::{generate_clue, ClueError, ClueRequest, ClueRules, ClueSettings, ClueSource, ViolationKind};
use alias_core::compare::compare_dose;
use alias_core::events::EventPayload;
use alias_core::game::{EndReason, Phase, SessionConfig};
use alias_core::llm::{Purpose, StubAdapter, StubScript};
use alias_core::morphology::corpus::evaluate;
use alias_core::morphology::packs::{gold_corpus, pack};
use alias_core::orchestrator::{Orchestrator, Resources, VirtualClock};
use alias_core::protocol::{contains_token, parse_annotated, serialize, CommandKind, ControlToken, TokenRegistry};
use alias_core::replay::{parse_log, replay, write_log};
use alias_core::sim::{run_simulation, SimConfig, SimOutcome};
use alias_core::transcript::parse_transcript;
use alias_core::{Language, WordItem};
use common::{all_strings, noisy_string, oracle, valid_construction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIM: &str = include_str!("fixtures/sim_en.toml");
const STUB: &str = include_str!("fixtures/stub_dose3.toml");
const ROBOT_LOG: &str = include_str!("fixtures/robot_8min.jsonl");
const EDUCATOR: &str = include_str!("fixtures/educator_8min.txt");

const FIG1: &str = "[excited] Almost correct! I think you mean \"tiger\". Good try! Tigers are big cats with stripes. Next player, your turn [next_turn]";

const RATE_TOLERANCE: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn simulate(cfg: &SimConfig) -> SimOutcome {
    let res = Arc::new(Resources::bundled(cfg.session.language, &cfg.session.target).unwrap());
    run_simulation(cfg, res, StubAdapter::new(StubScript::from_toml_str(STUB).unwrap())).unwrap()
}

fn tiger() -> WordItem {
    WordItem::new("tiger", "animals", &pack(Language::English).lexicon)
}

fn protocol_fixture() -> Outcome {
    let start = Instant::now();
    let reg = TokenRegistry::default();
    let u = parse_annotated(FIG1, &reg);
    let end = u.clean_len();
    let expected = vec![ControlToken::emotion("excited", 0), ControlToken::command(CommandKind::NextTurn, "next_turn", end)];
    ensure(u.tokens == expected, format!("tokens {:?}", u.tokens))?;
    ensure(!u.clean_text.contains('[') && !u.clean_text.contains(']'), "brackets left in clean text")?;
    ensure(serialize(&u.clean_text, &u.tokens).unwrap() == FIG1, "serialize(parse(x)) != x")?;
    let took = within(start, Duration::from_secs(1))?;
    Ok(format!("2 tokens, round trip exact, {took:?}"))
}

fn protocol_fuzz() -> Outcome {
    let start = Instant::now();
    let reg = TokenRegistry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut round_trips = 0;
    for i in 0..1000 {
        if i % 2 == 0 {
            let (clean, tokens) = valid_construction(&mut rng, &reg);
            let raw = serialize(&clean, &tokens).map_err(|e| e.to_string())?;
            let u = parse_annotated(&raw, &reg);
            ensure(u.clean_text == clean && u.tokens == tokens, format!("round trip failed for {raw:?}"))?;
            round_trips += 1;
        } else {
            let raw = noisy_string(&mut rng);
            let u = parse_annotated(&raw, &reg);
            ensure(!contains_token(&u.clean_text), format!("token left in clean text of {raw:?}"))?;
            ensure(u.tokens.iter().all(|t| t.position <= u.clean_len()), format!("position out of range in {raw:?}"))?;
        }
    }
    let took = within(start, Duration::from_secs(10))?;
    Ok(format!("1000 strings, {round_trips} valid constructions round-tripped, {took:?}"))
}

fn first_guessers(words: usize) -> Result<Vec<usize>, String> {
    let mut cfg = SimConfig::from_toml_str(SIM).unwrap();
    cfg.words = words;
    cfg.session.session_duration_ms = 24 * 3_600_000;
    let out = simulate(&cfg);
    ensure(
        matches!(out.events.last().unwrap().payload, EventPayload::SessionEnded { reason: EndReason::WordsExhausted, .. }),
        "session did not run out of words",
    )?;
    ensure(out.events.iter().all(|e| e.kind() != "intervention"), "a word was skipped")?;
    let mut counts = vec![0; out.session.players.len()];
    for e in &out.events {
        if let EventPayload::WordPresented { guesser_index, .. } = e.payload {
            counts[guesser_index] += 1;
        }
    }
    Ok(counts)
}

fn turn_fairness() -> Outcome {
    let thirty = first_guessers(30)?;
    ensure(thirty == [10, 10, 10], format!("30 words: {thirty:?}"))?;
    let mut one_more = first_guessers(31)?;
    one_more.sort_unstable();
    ensure(one_more == [10, 10, 11], format!("31 words: {one_more:?}"))?;
    Ok("30 words -> [10, 10, 10], 31 words -> {11, 10, 10}".into())
}

fn gold_corpus_agreement() -> Outcome {
    // Counts fixed by hand before tagging.
    let pinned = [
        ("This big red vehicle drives", 3),
        ("Daddy Pig wears these to work. Peppa", 4),
        ("Daddy wears these when he drives", 2),
        ("This is a pet with soft fur", 1),
    ];
    let corpus = gold_corpus();
    for (prefix, count) in pinned {
        let g = corpus.iter().find(|g| g.text.starts_with(prefix)).ok_or(format!("missing fixture {prefix:?}"))?;
        ensure(g.expected.len() == count, format!("{prefix:?} annotated {} not {count}", g.expected.len()))?;
    }
    let en = corpus.iter().filter(|g| g.language == Language::English).count();
    let sv = corpus.iter().filter(|g| g.language == Language::Swedish).count();
    ensure(en >= 50 && sv >= 20, format!("corpus too small: en {en}, sv {sv}"))?;
    let agreement = evaluate(corpus, |lang, id| {
        let p = pack(lang);
        p.target(id).ok().map(|t| (t, &p.lexicon))
    })
    .map_err(|e| e.to_string())?;
    ensure(agreement.is_perfect(), format!("{} of {} sentences agree", agreement.agreeing, agreement.sentences))?;
    Ok(format!("{}/{} sentences ({en} en, {sv} sv), fixtures 3/4/2/1", agreement.agreeing, agreement.sentences))
}

fn matcher_oracle() -> Outcome {
    let start = Instant::now();
    let strings = all_strings(&['a', 'b', 'c'], 6);
    let text: Vec<String> = strings.iter().map(|s| s.iter().collect()).collect();
    for (x, xs) in strings.iter().zip(&text) {
        for (y, ys) in strings.iter().zip(&text) {
            let d = edit_distance(xs, ys);
            ensure(d == oracle(x, y), format!("{xs:?} vs {ys:?}"))?;
            ensure(d == edit_distance(ys, xs), format!("asymmetric on {xs:?}, {ys:?}"))?;
            ensure((d == 0) == (xs == ys), format!("identity fails on {xs:?}, {ys:?}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let alphabet: Vec<char> = "abcdefgäö".chars().collect();
    let mut gen = || -> Vec<char> { (0..rng.random_range(0..=12)).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect() };
    for _ in 0..10_000 {
        let (a, b, c) = (gen(), gen(), gen());
        let (sa, sb, sc): (String, String, String) = (a.iter().collect(), b.iter().collect(), c.iter().collect());
        let ab = edit_distance(&sa, &sb);
        ensure(ab == oracle(&a, &b), format!("{sa:?} vs {sb:?}"))?;
        ensure(edit_distance(&sa, &sc) <= ab + edit_distance(&sb, &sc), "triangle inequality")?;
    }
    let cfg = MatchConfig::default();
    let w = tiger();
    ensure(local_adjudicate("tiger", &w, &cfg).kind == OutcomeKind::Exact, "tiger is not Exact")?;
    ensure(local_adjudicate("tigel", &w, &cfg).kind == OutcomeKind::Near("tiger".into()), "tigel is not Near")?;
    ensure(local_adjudicate("dig", &w, &cfg).kind == OutcomeKind::Miss, "dig is not a local Miss")?;
    let mut arbiter = StubAdapter::verdicts(["near"]);
    let judged = adjudicate("dig", &w, None, &[], &cfg, &mut arbiter).outcome;
    ensure(judged.kind == OutcomeKind::Near("tiger".into()) && judged.tier == Tier::Arbitrated, "arbiter did not rule dig Near")?;
    let took = within(start, Duration::from_secs(30))?;
    Ok(format!("{} exhaustive pairs, 10000 random triples, fixtures ok, {took:?}", strings.len() * strings.len()))
}

fn dose_end_to_end() -> Outcome {
    let cfg = SimConfig::from_toml_str(SIM).unwrap();
    let out = simulate(&cfg);
    let last = out.events.last().unwrap();
    ensure(
        matches!(last.payload, EventPayload::SessionEnded { reason: EndReason::TimeUp, .. }),
        "session did not run the full 15 minutes",
    )?;
    let mut clues = 0;
    for e in &out.events {
        if let EventPayload::ClueSpoken { dose, .. } = e.payload {
            ensure(dose >= 3, format!("clue at seq {} has dose {dose}", e.seq))?;
            clues += 1;
        }
    }
    let replayed = replay(&out.events).map_err(|e| e.to_string())?;
    ensure(replayed.report == out.report, "replayed report differs from live report")?;
    let again = simulate(&cfg);
    ensure(write_log(&again.events) == write_log(&out.events), "rerun log differs")?;
    Ok(format!("{clues} clues all dose >= 3, {} occurrences, replay equal, rerun byte-identical", out.report.total))
}

fn pipeline_rejection() -> Outcome {
    let p = pack(Language::English);
    let reg = TokenRegistry::default();
    let w = tiger();
    let settings = ClueSettings { max_retries: 3, ..ClueSettings::default() };
    let req = ClueRequest {
        word: &w,
        target: p.target("third_person_s").unwrap(),
        lexicon: &p.lexicon,
        registry: &reg,
        rules: ClueRules::new(3, &settings),
        explicit: false,
        context: &[],
    };
    let mut stub = StubAdapter::clues([
        "[happy] The tiger runs, it hides and it sleeps.",
        "[happy] It runs fast.",
        "[happy] It runs, it hides and it sleeps. What is it?",
    ]);
    let clue = generate_clue(&mut stub, &req).map_err(|e| e.to_string())?;
    ensure(stub.calls(Purpose::Clue) == 3, format!("{} adapter calls", stub.calls(Purpose::Clue)))?;
    ensure(clue.attempt == 3, format!("attempt {}", clue.attempt))?;

    let all_bad = || StubScript { cycle: true, clue: vec!["[happy] The tiger runs.".into()], ..Default::default() };
    match generate_clue(&mut StubAdapter::new(all_bad()), &req) {
        Err(ClueError::GenerationExhausted { last_violations, .. })
            if last_violations.iter().any(|v| matches!(v.kind, ViolationKind::ForbiddenForm { .. })) => {}
        other => return Err(format!("expected GenerationExhausted, got {other:?}")),
    }

    let res = Arc::new(Resources::bundled(Language::English, "third_person_s").unwrap());
    let words = ["tiger", "lion"].map(|l| WordItem::new(l, "animals", &res.lexicon)).to_vec();
    let cfg = SessionConfig::new(Language::English, "third_person_s");
    let mut o = Orchestrator::new("acc", cfg, words, res, StubAdapter::new(all_bad()), VirtualClock::default())
        .map_err(|e| e.to_string())?;
    o.add_player("A").and_then(|_| o.add_player("B")).and_then(|_| o.start()).map_err(|e| e.to_string())?;
    let served = o.present_clue().map_err(|e| e.to_string())?;
    ensure(served.iter().any(|e| e.kind() == "generation_fallback"), "no generation_fallback event")?;
    let bank = served.iter().any(|e| matches!(&e.payload, EventPayload::ClueSpoken { source: ClueSource::Bank, dose, .. } if *dose >= 3));
    ensure(bank, "fallback clue not served")?;
    o.submit("p1", "tiger").map_err(|e| e.to_string())?;
    ensure(o.session().phase == Phase::AwaitingClue, "session did not continue")?;
    o.present_clue().map_err(|e| e.to_string())?;
    ensure(o.session().phase == Phase::AwaitingGuess, "second word not clued")?;
    Ok("3 calls, attempt 3; exhausted script falls back to the bank and play continues".into())
}

fn comparison_fixture() -> Outcome {
    let log = parse_log(ROBOT_LOG).map_err(|e| e.to_string())?;
    replay(&log).map_err(|e| e.to_string())?;
    let edu = parse_transcript(EDUCATOR).map_err(|e| e.to_string())?;
    let p = pack(Language::English);
    let r = compare_dose(&log, &edu, "EDU", p.target("third_person_s").unwrap(), &p.lexicon).map_err(|e| e.to_string())?;
    ensure(r.robot.total == 24 && r.robot.duration_ms == 480_000, format!("robot {} in {} ms", r.robot.total, r.robot.duration_ms))?;
    ensure(r.educator.total == 10 && r.educator.duration_ms == 480_000, format!("educator {} in {} ms", r.educator.total, r.educator.duration_ms))?;
    let close = |x: Option<f64>, want: f64| x.is_some_and(|v| (v - want).abs() <= RATE_TOLERANCE);
    ensure(close(r.robot.rate_per_min, 3.0), format!("robot rate {:?}", r.robot.rate_per_min))?;
    ensure(close(r.educator.rate_per_min, 1.25), format!("educator rate {:?}", r.educator.rate_per_min))?;
    ensure(close(r.rate_ratio, 2.4), format!("ratio {:?}", r.rate_ratio))?;
    Ok("3.0 vs 1.25 per minute, ratio 2.4".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("annotated reply fixture parses and round-trips", protocol_fixture),
        ("protocol fuzz", protocol_fuzz),
        ("turn fairness", turn_fairness),
        ("morphology gold corpus", gold_corpus_agreement),
        ("matcher oracle and adjudication fixtures", matcher_oracle),
        ("dose guarantee end to end", dose_end_to_end),
        ("pipeline rejection and fallback", pipeline_rejection),
        ("comparison fixture", comparison_fixture),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
