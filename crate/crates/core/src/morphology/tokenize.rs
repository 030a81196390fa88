/// A word token. Apostrophes are kept inside words (`there's`), hyphens and
/// other punctuation split. Lookup happens on `lower`; diacritics are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub index: usize,
    pub text: &'a str,
    pub lower: String,
    pub sentence: usize,
    pub sentence_start: bool,
}

impl Token<'_> {
    pub fn capitalized(&self) -> bool {
        self.text.chars().next().is_some_and(char::is_uppercase)
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '’'
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut sentence = 0usize;
    let mut at_sentence_start = true;
    let mut start: Option<usize> = None;
    let chars: Vec<(usize, char)> = text.char_indices().collect();

    fn finish<'a>(tokens: &mut Vec<Token<'a>>, word: &'a str, sentence: usize, at_start: &mut bool) {
        tokens.push(Token {
            index: tokens.len(),
            text: word,
            lower: word.to_lowercase(),
            sentence,
            sentence_start: *at_start,
        });
        *at_start = false;
    }

    for (i, &(byte, c)) in chars.iter().enumerate() {
        let inner_apostrophe = is_apostrophe(c)
            && start.is_some()
            && chars.get(i + 1).is_some_and(|(_, n)| n.is_alphanumeric());
        if c.is_alphanumeric() || inner_apostrophe {
            if start.is_none() {
                start = Some(byte);
            }
            continue;
        }
        if let Some(from) = start.take() {
            finish(&mut tokens, &text[from..byte], sentence, &mut at_sentence_start);
        }
        if is_terminator(c) && !tokens.is_empty() && !at_sentence_start {
            sentence += 1;
            at_sentence_start = true;
        }
    }
    if let Some(from) = start {
        finish(&mut tokens, &text[from..], sentence, &mut at_sentence_start);
    }
    tokens
}

/// Number of word tokens in `text`.
pub fn word_count(text: &str) -> usize {
    tokenize(text).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_keeps_clitics() {
        let toks = tokenize("When there's an emergency, it sprays!");
        let words: Vec<_> = toks.iter().map(|t| t.text).collect();
        assert_eq!(words, ["When", "there's", "an", "emergency", "it", "sprays"]);
    }

    #[test]
    fn tracks_sentence_starts() {
        let toks = tokenize("He runs. She jumps! ok");
        let starts: Vec<_> = toks.iter().map(|t| t.sentence_start).collect();
        assert_eq!(starts, [true, false, true, false, true]);
        assert_eq!(toks[4].sentence, 2);
    }

    #[test]
    fn lowercases_with_diacritics() {
        let toks = tokenize("Älgen äter.");
        assert_eq!(toks[0].lower, "älgen");
        assert!(toks[0].capitalized());
    }

    #[test]
    fn trailing_apostrophe_is_not_part_of_word() {
        let toks = tokenize("the cats' toys");
        let words: Vec<_> = toks.iter().map(|t| t.text).collect();
        assert_eq!(words, ["the", "cats", "toys"]);
    }
}
