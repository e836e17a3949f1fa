//! Phrase matching for keyword-intent determiners.
//!
//! A phrase is a sequence of words. Plain words match case-insensitively.
//! `$var` captures one or more words (up to the next plain word, or to the
//! end of the utterance when last); `$var=a|b|c` captures exactly one word
//! from the listed alternatives. A phrase may match anywhere in the utterance.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Free(String),
    OneOf(String, Vec<String>),
}

fn normalize(w: &str) -> String {
    w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

fn words(text: &str) -> Vec<(String, String)> {
    text.split_whitespace()
        .map(|w| (normalize(w), w.trim_matches(|c: char| !c.is_alphanumeric()).to_string()))
        .filter(|(n, _)| !n.is_empty())
        .collect()
}

fn tokens(phrase: &str) -> Vec<Token> {
    phrase
        .split_whitespace()
        .filter_map(|w| match w.strip_prefix('$') {
            Some(cap) => {
                let cap = cap.trim_end_matches(['.', ',', '?', '!']);
                Some(match cap.split_once('=') {
                    Some((var, alts)) => Token::OneOf(
                        var.to_string(),
                        alts.split('|').map(normalize).filter(|a| !a.is_empty()).collect(),
                    ),
                    None => Token::Free(cap.to_string()),
                })
            }
            None => {
                let n = normalize(w);
                (!n.is_empty()).then_some(Token::Word(n))
            }
        })
        .collect()
}

type Captures = BTreeMap<String, String>;

fn match_at(toks: &[Token], ws: &[(String, String)], caps: &mut Captures) -> bool {
    let Some((first, rest)) = toks.split_first() else {
        return true;
    };
    match first {
        Token::Word(w) => ws.first().is_some_and(|x| &x.0 == w) && match_at(rest, &ws[1..], caps),
        Token::OneOf(var, alts) => {
            let Some(x) = ws.first() else { return false };
            if !alts.contains(&x.0) {
                return false;
            }
            caps.insert(var.clone(), x.1.clone());
            if match_at(rest, &ws[1..], caps) {
                return true;
            }
            caps.remove(var);
            false
        }
        Token::Free(var) => {
            let max = if rest.is_empty() { ws.len() } else { ws.len().saturating_sub(1) };
            let lens: Vec<usize> = if rest.is_empty() { vec![ws.len()] } else { (1..=max).collect() };
            for len in lens {
                if len == 0 {
                    continue;
                }
                let text = ws[..len].iter().map(|x| x.1.as_str()).collect::<Vec<_>>().join(" ");
                caps.insert(var.clone(), text);
                if match_at(rest, &ws[len..], caps) {
                    return true;
                }
            }
            caps.remove(var);
            false
        }
    }
}

/// A successful phrase match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseMatch {
    /// Number of fixed (non-free) tokens matched; higher is more specific.
    pub score: usize,
    pub captures: Captures,
}

/// Tries `phrase` at every start position of `utterance`; the leftmost match wins.
pub fn match_phrase(phrase: &str, utterance: &str) -> Option<PhraseMatch> {
    let toks = tokens(phrase);
    if toks.is_empty() {
        return None;
    }
    let ws = words(utterance);
    let score = toks.iter().filter(|t| !matches!(t, Token::Free(_))).count();
    for start in 0..ws.len() {
        let mut caps = Captures::new();
        if match_at(&toks, &ws[start..], &mut caps) {
            return Some(PhraseMatch { score, captures: caps });
        }
    }
    None
}
