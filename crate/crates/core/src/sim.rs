//! Child-persona simulation: scripted children play a whole session against
//! the orchestrator on a virtual clock.
//!
//! Config file (TOML):
//!
//! ```toml
//! words = 30
//! ms_per_word = 400
//! think_ms = [1500, 4000]
//!
//! [session]
//! language = "english"
//! target = "third_person_s"
//! seed = 7
//!
//! [[persona]]
//! name = "Child-A"
//! knowledge_prob = 0.8
//! mispronounce_prob = 0.3
//! off_topic_prob = 0.05
//! severity = 1
//! ```

use std::path::Path;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::SessionEvent;
use crate::game::{Phase, Session, SessionConfig};
use crate::language::Language;
use crate::llm::LlmAdapter;
use crate::morphology::DoseReport;
use crate::orchestrator::{Clock, Orchestrator, OrchestratorError, Resources, VirtualClock, DEFAULT_MS_PER_WORD};
use crate::word::WordItem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChildPersona {
    pub name: String,
    #[serde(default)]
    pub mispronounce_prob: f64,
    #[serde(default)]
    pub off_topic_prob: f64,
    #[serde(default = "one")]
    pub knowledge_prob: f64,
    #[serde(default = "one_u32")]
    pub severity: u32,
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

impl ChildPersona {
    pub fn new(name: &str) -> Self {
        Self { name: name.to_string(), mispronounce_prob: 0.0, off_topic_prob: 0.0, knowledge_prob: 1.0, severity: 1 }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(format!("persona '{}': {m}", self.name)));
        if self.name.trim().is_empty() {
            return Err(SimError::Config("persona name must not be empty".into()));
        }
        for (field, p) in [
            ("mispronounce_prob", self.mispronounce_prob),
            ("off_topic_prob", self.off_topic_prob),
            ("knowledge_prob", self.knowledge_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{field} must lie in [0, 1], got {p}"));
            }
        }
        if self.severity == 0 {
            return bad("severity must be at least 1".into());
        }
        Ok(())
    }
}

const OFF_TOPIC_EN: &[&str] = &[
    "my dog ran away yesterday",
    "I have a new bike",
    "can we play outside now",
    "my sister is five",
    "I like pizza",
];
const OFF_TOPIC_SV: &[&str] = &[
    "min hund sprang bort igår",
    "jag har en ny cykel",
    "får vi gå ut nu",
    "min syster är fem",
    "jag gillar pizza",
];
const DISTRACTORS_EN: &[&str] = &["banana", "car", "shoe", "apple", "ball", "house", "chair", "tree", "spoon"];
const DISTRACTORS_SV: &[&str] = &["banan", "bil", "sko", "äpple", "boll", "hus", "stol", "träd", "sked"];

pub fn off_topic_lines(language: Language) -> &'static [&'static str] {
    match language {
        Language::English => OFF_TOPIC_EN,
        Language::Swedish => OFF_TOPIC_SV,
    }
}

fn alphabet(language: Language) -> Vec<char> {
    let mut letters: Vec<char> = ('a'..='z').collect();
    if language == Language::Swedish {
        letters.extend(['å', 'ä', 'ö']);
    }
    letters
}

/// Apply `n` random single-character edits. The result is never empty and
/// every substitution changes the character.
pub fn corrupt<R: Rng + ?Sized>(word: &str, n: u32, language: Language, rng: &mut R) -> String {
    let letters = alphabet(language);
    let mut chars: Vec<char> = word.chars().collect();
    for _ in 0..n {
        let op = rng.random_range(0..3);
        if op == 0 {
            let at = rng.random_range(0..=chars.len());
            chars.insert(at, *letters.choose(rng).expect("alphabet is non-empty"));
        } else if op == 1 && chars.len() > 1 {
            let at = rng.random_range(0..chars.len());
            chars.remove(at);
        } else if chars.is_empty() {
            chars.push(*letters.choose(rng).expect("alphabet is non-empty"));
        } else {
            let at = rng.random_range(0..chars.len());
            let old = chars[at];
            let others: Vec<char> = letters.iter().copied().filter(|c| *c != old).collect();
            chars[at] = *others.choose(rng).expect("alphabet has more than one letter");
        }
    }
    chars.into_iter().collect()
}

/// What a simulated child says after hearing a clue. Off-topic is rolled
/// first, then knowledge; a child who does not know the word names a
/// wrong object.
pub fn simulate_child<R: Rng + ?Sized>(persona: &ChildPersona, word: &WordItem, rng: &mut R) -> String {
    if rng.random_bool(persona.off_topic_prob) {
        return off_topic_lines(word.language).choose(rng).expect("non-empty").to_string();
    }
    if rng.random_bool(persona.knowledge_prob) {
        if rng.random_bool(persona.mispronounce_prob) {
            return corrupt(&word.lemma, persona.severity, word.language, rng);
        }
        return word.lemma.clone();
    }
    let pool = match word.language {
        Language::English => DISTRACTORS_EN,
        Language::Swedish => DISTRACTORS_SV,
    };
    let choices: Vec<&str> = pool.iter().copied().filter(|d| !word.forbidden_forms.contains(*d)).collect();
    choices.choose(rng).expect("distractor pool exceeds one word's forms").to_string()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("sim config: {0}")]
    Config(String),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
    #[error("session did not end within {0} steps")]
    Runaway(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub session: SessionConfig,
    /// Number of words queued; the bank is cycled if it has fewer.
    #[serde(default = "default_words")]
    pub words: usize,
    #[serde(default = "default_ms_per_word")]
    pub ms_per_word: u64,
    /// Child thinking time before a guess, inclusive range.
    #[serde(default = "default_think")]
    pub think_ms: [u64; 2],
    #[serde(rename = "persona")]
    pub personas: Vec<ChildPersona>,
}

fn default_words() -> usize {
    30
}

fn default_ms_per_word() -> u64 {
    DEFAULT_MS_PER_WORD
}

fn default_think() -> [u64; 2] {
    [1_500, 4_000]
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.session.validate().map_err(|e| SimError::Config(e.to_string()))?;
        if self.personas.is_empty() {
            return Err(SimError::Config("at least one persona is required".into()));
        }
        for p in &self.personas {
            p.validate()?;
        }
        if self.words == 0 {
            return Err(SimError::Config("words must be at least 1".into()));
        }
        if self.think_ms[0] > self.think_ms[1] {
            return Err(SimError::Config("think_ms must be [min, max]".into()));
        }
        Ok(())
    }
}

/// `n` words drawn from `pool` in seeded shuffled order, reshuffling each
/// time the pool runs out.
pub fn pick_words<R: Rng + ?Sized>(pool: &[WordItem], n: usize, rng: &mut R) -> Vec<WordItem> {
    let mut out = Vec::with_capacity(n);
    if pool.is_empty() {
        return out;
    }
    while out.len() < n {
        let mut round = pool.to_vec();
        round.shuffle(rng);
        out.extend(round.into_iter().take(n - out.len()));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub session: Session,
    pub events: Vec<SessionEvent>,
    pub report: DoseReport,
}

/// Run a whole session. The seed, config, personas and adapter script fully
/// determine the log.
pub fn run_simulation<A: LlmAdapter>(config: &SimConfig, resources: Arc<Resources>, adapter: A) -> Result<SimOutcome, SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.session.seed);
    let pool = resources.words(Some(&config.session.category));
    if pool.is_empty() {
        return Err(SimError::Config(format!(
            "no bank words for target '{}' in category '{}'",
            config.session.target, config.session.category
        )));
    }
    let words = pick_words(&pool, config.words, &mut rng);
    let id = format!("sim-{}", config.session.seed);
    let clock = VirtualClock::new(config.ms_per_word);
    let mut orch = Orchestrator::new(&id, config.session.clone(), words, resources, adapter, clock)?;
    for p in &config.personas {
        orch.add_player(&p.name)?;
    }
    orch.start()?;

    let limit = 20 * (config.words + 1) * (config.session.max_hints as usize + 2) + 1_000;
    let mut steps = 0;
    loop {
        orch.check_time()?;
        if orch.session().is_ended() {
            break;
        }
        steps += 1;
        if steps > limit {
            return Err(SimError::Runaway(limit));
        }
        match orch.session().phase {
            Phase::AwaitingClue => {
                orch.present_clue()?;
            }
            Phase::AwaitingGuess => {
                let think = rng.random_range(config.think_ms[0]..=config.think_ms[1]);
                orch.clock_mut().wait(think);
                orch.check_time()?;
                if orch.session().is_ended() {
                    break;
                }
                let s = orch.session();
                let persona = &config.personas[s.guesser_index];
                let player_id = s.players[s.guesser_index].id.clone();
                let word = s.current_word.clone().expect("word in play while awaiting a guess");
                let transcript = simulate_child(persona, &word, &mut rng);
                orch.submit(&player_id, &transcript)?;
            }
            phase => unreachable!("simulation never pauses, found {phase:?}"),
        }
    }
    let report = orch.dose_report().map_err(OrchestratorError::from)?;
    Ok(SimOutcome { session: orch.session().clone(), events: orch.events().to_vec(), report })
}
