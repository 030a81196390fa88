//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use alias_core::protocol::{ControlToken, TokenRegistry};
use rand::seq::IndexedRandom;
use rand::Rng;

/// The recursive definition of edit distance, memoized on (i, j).
pub fn oracle(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if let Some(v) = memo[i][j] {
            return v;
        }
        let v = if i == 0 {
            j
        } else if j == 0 {
            i
        } else {
            let sub = go(a, b, i - 1, j - 1, memo) + usize::from(a[i - 1] != b[j - 1]);
            let del = go(a, b, i - 1, j, memo) + 1;
            let ins = go(a, b, i, j - 1, memo) + 1;
            sub.min(del).min(ins)
        };
        memo[i][j] = Some(v);
        v
    }
    let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
    go(a, b, a.len(), b.len(), &mut memo)
}

/// Every string over `alphabet` of length at most `max_len`.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s: &Vec<char>| {
                alphabet.iter().map(move |c| {
                    let mut n = s.clone();
                    n.push(*c);
                    n
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

const WORD_CHARS: &[char] = &['a', 'e', 't', 'Z', 'å', '!', '?', ',', '.', '"', '\'', '-', ')', '_', '7'];
const NAMES: &[&str] = &["excited", "happy", "sad", "next_turn", "hint", "end_session", "new_word", "wave", "x", "a1_b"];

/// Clean text plus tokens in position order, built so that serializing and
/// parsing must give them back. Positions never point at a space.
pub fn valid_construction(rng: &mut impl Rng, registry: &TokenRegistry) -> (String, Vec<ControlToken>) {
    let words: Vec<String> = (0..rng.random_range(0..8))
        .map(|_| (0..rng.random_range(1..7)).map(|_| *WORD_CHARS.choose(rng).unwrap()).collect())
        .collect();
    let clean = words.join(" ");
    let chars: Vec<char> = clean.chars().collect();
    let slots: Vec<usize> = (0..=chars.len()).filter(|&i| i == chars.len() || chars[i] != ' ').collect();
    let mut tokens: Vec<ControlToken> = (0..rng.random_range(0..5))
        .map(|_| {
            let name = *NAMES.choose(rng).unwrap();
            ControlToken { name: name.to_string(), kind: registry.classify(name), position: *slots.choose(rng).unwrap() }
        })
        .collect();
    tokens.sort_by_key(|t| t.position);
    (clean, tokens)
}

const NOISE: &[char] = &['[', '[', ']', ']', 'a', 'b', 'X', '_', '1', ' ', ' ', '!', 'å', '\t'];

/// Arbitrary bracket soup with some well-formed tokens spliced in.
pub fn noisy_string(rng: &mut impl Rng) -> String {
    let mut s = String::new();
    for _ in 0..rng.random_range(0..40) {
        if rng.random_bool(0.15) {
            s.push_str(&format!("[{}]", NAMES.choose(rng).unwrap()));
        } else {
            s.push(*NOISE.choose(rng).unwrap());
        }
    }
    s
}
