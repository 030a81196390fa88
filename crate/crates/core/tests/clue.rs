use alias_core::clue::feedback::FeedbackRequest;
use alias_core::clue::{
    bank_clue, build_prompt, generate_clue, generate_feedback, validate_clue, ClueError, ClueRequest, ClueRules,
    ClueSettings, ClueSource, FeedbackSituation, FeedbackSource, ViolationKind, WordBank,
};
use alias_core::llm::{OfflineAdapter, Purpose, StubAdapter, StubScript};
use alias_core::morphology::packs::pack;
use alias_core::morphology::{dose_count, tokenize};
use alias_core::protocol::{CommandKind, TokenRegistry};
use alias_core::{Language, WordItem};

const PEPPA: &str = "Daddy Pig wears these to work. Peppa sees that George likes shorts, but Daddy Pig always \
chooses these. They cover both legs and keep him warm. What are they?";

fn word(lemma: &str) -> WordItem {
    WordItem::new(lemma, "clothes", &pack(Language::English).lexicon)
}

fn rules(dose_k: usize) -> ClueRules {
    ClueRules::new(dose_k, &ClueSettings::default())
}

fn kinds(text: &str, lemma: &str, dose_k: usize) -> Vec<ViolationKind> {
    let p = pack(Language::English);
    let w = word(lemma);
    match validate_clue(text, &w, p.target("third_person_s").unwrap(), &rules(dose_k), &p.lexicon).unwrap() {
        Ok(_) => vec![],
        Err(v) => v.into_iter().map(|v| v.kind).collect(),
    }
}

#[test]
fn peppa_clue_is_valid_for_trousers() {
    let p = pack(Language::English);
    let v = validate_clue(PEPPA, &word("trousers"), p.target("third_person_s").unwrap(), &rules(3), &p.lexicon)
        .unwrap()
        .unwrap();
    assert_eq!(v.dose, 4);
    let lemmas: Vec<_> = v.target_lemmas_used.iter().map(String::as_str).collect();
    assert_eq!(lemmas, ["choose", "like", "see", "wear"]);
}

#[test]
fn forbidden_form_is_rejected() {
    let k = kinds("These are trousers for Daddy Pig", "trousers", 3);
    assert!(k.contains(&ViolationKind::ForbiddenForm { form: "trousers".into() }));
    let k = kinds("The tiger's tail swings. It runs and it jumps.", "tiger", 3);
    assert!(k.contains(&ViolationKind::ForbiddenForm { form: "tiger".into() }));
    assert!(kinds("It runs, it hides and it TIGERS.", "tiger", 3).iter().any(|k| matches!(k, ViolationKind::ForbiddenForm { .. })));
}

#[test]
fn repetition_is_rejected() {
    let k = kinds("He runs. He runs fast. He runs a lot.", "tiger", 3);
    assert_eq!(k, vec![ViolationKind::LemmaRepetition { distinct: 1, required: 3 }]);
}

#[test]
fn low_dose_and_length() {
    let k = kinds("It runs fast.", "tiger", 3);
    assert_eq!(k, vec![ViolationKind::DoseTooLow { found: 1, required: 3 }]);
    let long = format!("It runs, it jumps and it swims. {}", "Very ".repeat(60));
    assert!(kinds(&long, "tiger", 3).iter().any(|k| matches!(k, ViolationKind::TooLong { .. })));
}

#[test]
fn prompt_contents() {
    let p = pack(Language::English);
    let t = p.target("third_person_s").unwrap();
    let reg = TokenRegistry::default();
    let prompt = build_prompt(&word("trousers"), t, &rules(3), false, &[], &reg).unwrap();
    assert!(prompt.task.contains("use at least 3 different verbs in third person singular") ||
        prompt.task.contains("Use at least 3 different verbs in third person singular"));
    let mentions = tokenize(&prompt.task).iter().filter(|t| t.lower == "trousers").count();
    assert_eq!(mentions, 1);
    assert!(!prompt.task.contains(&t.explicit_rule));
    for e in reg.emotions() {
        assert!(prompt.system_rules.contains(&format!("[{e}]")));
    }
    let explicit = build_prompt(&word("trousers"), t, &rules(3), true, &[], &reg).unwrap();
    assert!(explicit.task.contains("we add -s at the end of the word"));

    let tiger = WordItem::new("tiger", "animals", &p.lexicon);
    let prompt = build_prompt(&tiger, t, &rules(3), false, &[], &reg).unwrap();
    assert_eq!(tokenize(&prompt.task).iter().filter(|t| t.lower == "tiger").count(), 1);
    assert!(prompt.task.contains("\"tigers\""));

    let sv = WordItem::new("katt", "djur", &pack(Language::Swedish).lexicon);
    assert!(matches!(build_prompt(&sv, t, &rules(3), false, &[], &reg), Err(ClueError::LanguageMismatch { .. })));
}

#[test]
fn prompt_omits_unregistered_tokens() {
    let reg = TokenRegistry::from_toml_str("emotions = [\"calm\"]\n[commands]\nnext_turn = \"next_turn\"\n").unwrap();
    let p = pack(Language::English);
    let prompt = build_prompt(&word("hat"), p.target("third_person_s").unwrap(), &rules(3), false, &[], &reg).unwrap();
    assert!(prompt.system_rules.contains("[calm]"));
    assert!(!prompt.system_rules.contains("[excited]"));
    assert!(!prompt.system_rules.contains("[hint]"));
}

fn request<'a>(w: &'a WordItem, reg: &'a TokenRegistry, max_retries: u32) -> ClueRequest<'a> {
    let p = pack(Language::English);
    let settings = ClueSettings { max_retries, ..ClueSettings::default() };
    ClueRequest {
        word: w,
        target: p.target("third_person_s").unwrap(),
        lexicon: &p.lexicon,
        registry: reg,
        rules: ClueRules::new(3, &settings),
        explicit: false,
        context: &[],
    }
}

#[test]
fn retries_until_valid() {
    let w = word("tiger");
    let reg = TokenRegistry::default();
    let mut stub = StubAdapter::clues([
        "[happy] It runs fast.",
        "[happy] It runs, it hides and it sleeps. What is it?",
    ]);
    let clue = generate_clue(&mut stub, &request(&w, &reg, 3)).unwrap();
    assert_eq!(clue.attempt, 2);
    assert_eq!(clue.dose, 3);
    assert_eq!(stub.calls(Purpose::Clue), 2);
    assert!(stub.requests()[1].user.contains("rejected"));
    let p = pack(Language::English);
    assert_eq!(dose_count(&clue.utterance.clean_text, p.target("third_person_s").unwrap(), &p.lexicon).unwrap(), clue.dose);
}

#[test]
fn exhausts_after_bounded_attempts() {
    let w = word("tiger");
    let reg = TokenRegistry::default();
    let mut stub = StubAdapter::new(StubScript { cycle: true, clue: vec!["[happy] A tiger runs.".into()], ..Default::default() });
    let err = generate_clue(&mut stub, &request(&w, &reg, 2)).unwrap_err();
    assert!(matches!(err, ClueError::GenerationExhausted { attempts: 3, .. }));
    assert_eq!(stub.calls(Purpose::Clue), 3);

    let mut first = StubAdapter::clues(["[happy] It runs, it hides and it sleeps."]);
    assert_eq!(generate_clue(&mut first, &request(&w, &reg, 3)).unwrap().attempt, 1);

    let mut offline = OfflineAdapter::default();
    assert!(matches!(generate_clue(&mut offline, &request(&w, &reg, 3)), Err(ClueError::AdapterUnavailable(_))));
    assert_eq!(offline.calls, 1);
}

#[test]
fn every_bank_clue_is_valid() {
    let reg = TokenRegistry::default();
    for language in [Language::English, Language::Swedish] {
        let p = pack(language);
        let bank = WordBank::bundled(language);
        assert!(bank.words.len() >= if language == Language::English { 31 } else { 12 });
        for bw in &bank.words {
            assert!(!bw.clues.is_empty(), "{} has no clue", bw.lemma);
            let w = WordItem::new(&bw.lemma, &bw.category, &p.lexicon);
            for (target_id, clues) in &bw.clues {
                let target = p.target(target_id).unwrap();
                for text in clues {
                    let req = ClueRequest {
                        word: &w,
                        target,
                        lexicon: &p.lexicon,
                        registry: &reg,
                        rules: ClueRules::new(3, &ClueSettings::default()),
                        explicit: false,
                        context: &[],
                    };
                    let clue = bank_clue(text, &req).unwrap_or_else(|e| panic!("{} / {target_id}: {e}", bw.lemma));
                    assert_eq!(clue.source, ClueSource::Bank);
                    assert!(clue.utterance.has_emotion());
                }
            }
        }
    }
}

fn feedback(
    adapter: &mut dyn alias_core::llm::LlmAdapter,
    situation: FeedbackSituation,
    explicit_line: Option<&str>,
) -> alias_core::clue::Feedback {
    let p = pack(Language::English);
    let w = WordItem::new("tiger", "animals", &p.lexicon);
    let reg = TokenRegistry::default();
    let req = FeedbackRequest {
        situation,
        word: &w,
        target: p.target("third_person_s").unwrap(),
        registry: &reg,
        context: &[],
        explicit_line,
    };
    generate_feedback(adapter, &req)
}

#[test]
fn near_feedback_names_word_and_ends_turn() {
    let reply = "[excited] Almost correct! I think you mean \"tiger\". Good try! Tigers are big cats with stripes. Next player, your turn [next_turn]";
    let mut stub = StubAdapter::new(StubScript { feedback: vec![reply.into()], ..Default::default() });
    let f = feedback(&mut stub, FeedbackSituation::Correction, None);
    assert_eq!(f.source, FeedbackSource::Generated);
    assert_eq!(f.utterance.raw, reply);
    assert!(f.utterance.has_emotion());
    let last = f.utterance.tokens.last().unwrap();
    assert_eq!(last.position, f.utterance.clean_len());
    assert!(f.utterance.has_command(CommandKind::NextTurn));
}

#[test]
fn feedback_repairs_and_rejections() {
    // missing emotion and turn command are added
    let mut stub = StubAdapter::new(StubScript { feedback: vec!["Yes, a tiger!".into()], ..Default::default() });
    let f = feedback(&mut stub, FeedbackSituation::Praise, None);
    assert!(f.utterance.has_emotion() && f.utterance.has_command(CommandKind::NextTurn));

    // correction without the word falls back to the template
    let mut stub = StubAdapter::new(StubScript { feedback: vec!["[happy] Close! [next_turn]".into()], ..Default::default() });
    let f = feedback(&mut stub, FeedbackSituation::Correction, None);
    assert_eq!(f.source, FeedbackSource::Template);
    assert!(f.utterance.clean_text.contains("tiger"));

    // a hint that gives the answer away is rejected, and hints keep the turn
    let mut stub = StubAdapter::new(StubScript { feedback: vec!["[happy] It is a tiger! [next_turn]".into()], ..Default::default() });
    let f = feedback(&mut stub, FeedbackSituation::Hint { level: 1 }, None);
    assert_eq!(f.source, FeedbackSource::Template);
    assert!(!f.utterance.has_command(CommandKind::NextTurn));

    // bracketed asides are never spoken
    let mut stub = StubAdapter::new(StubScript { feedback: vec!["[happy] Good! [Laughs] [next_turn]".into()], ..Default::default() });
    assert_eq!(feedback(&mut stub, FeedbackSituation::Praise, None).source, FeedbackSource::Template);
}

#[test]
fn redirect_and_fallback_templates() {
    let mut stub = StubAdapter::new(StubScript { feedback: vec!["[happy] Oh, I hope your dog comes home soon.".into()], ..Default::default() });
    let f = feedback(&mut stub, FeedbackSituation::Redirect, None);
    assert_eq!(f.source, FeedbackSource::Generated);
    assert!(f.utterance.clean_text.ends_with("Let's get back to our game!"));
    assert!(!f.utterance.has_command(CommandKind::NextTurn));

    let mut offline = OfflineAdapter::default();
    let f = feedback(&mut offline, FeedbackSituation::Reveal, None);
    assert_eq!(f.source, FeedbackSource::Template);
    assert!(f.utterance.clean_text.starts_with("Good try! The word was \"tiger\"."));
    assert!(f.problem.is_some());

    let rule = "When we talk about something or someone doing an action we add -s at the end of the word.";
    let f = feedback(&mut offline, FeedbackSituation::Correction, Some(rule));
    assert!(f.utterance.clean_text.ends_with(rule));
    assert_eq!(f.utterance.tokens.last().unwrap().position, f.utterance.clean_len());
}
