//! Bundled language packs: lexicon plus target definitions per language.

use std::sync::LazyLock;

use super::corpus::{parse_corpus, GoldSentence};
use super::lexicon::Lexicon;
use super::target::{parse_targets, MorphTarget};
use super::MorphError;
use crate::language::Language;

pub const LEXICON_EN: &str = include_str!("../../data/lexicon_en.txt");
pub const LEXICON_SV: &str = include_str!("../../data/lexicon_sv.txt");
pub const TARGETS: &str = include_str!("../../data/targets.toml");
pub const GOLD_CORPUS: &str = include_str!("../../data/gold_corpus.tsv");

#[derive(Debug)]
pub struct LanguagePack {
    pub language: Language,
    pub lexicon: Lexicon,
    pub targets: Vec<MorphTarget>,
}

impl LanguagePack {
    /// Build a pack from lexicon text and a target file; targets for other
    /// languages are ignored.
    pub fn from_sources(lexicon: &str, targets: &str) -> Result<Self, MorphError> {
        let lexicon = Lexicon::parse(lexicon)?;
        let language = lexicon.language();
        let targets = parse_targets(targets)?.into_iter().filter(|t| t.language == language).collect();
        Ok(Self { language, lexicon, targets })
    }

    pub fn target(&self, id: &str) -> Result<&MorphTarget, MorphError> {
        self.targets
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| MorphError::UnknownTarget { id: id.to_string(), language: self.language })
    }
}

static ENGLISH: LazyLock<LanguagePack> =
    LazyLock::new(|| LanguagePack::from_sources(LEXICON_EN, TARGETS).expect("bundled English pack is valid"));
static SWEDISH: LazyLock<LanguagePack> =
    LazyLock::new(|| LanguagePack::from_sources(LEXICON_SV, TARGETS).expect("bundled Swedish pack is valid"));
static GOLD: LazyLock<Vec<GoldSentence>> =
    LazyLock::new(|| parse_corpus(GOLD_CORPUS).expect("bundled gold corpus is valid"));

/// The bundled pack for `language`.
pub fn pack(language: Language) -> &'static LanguagePack {
    match language {
        Language::English => &ENGLISH,
        Language::Swedish => &SWEDISH,
    }
}

pub fn gold_corpus() -> &'static [GoldSentence] {
    &GOLD
}
