//! Punctuated transcripts, as produced by a speech-to-text model trained with
//! punctuation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trailing_punct: Option<char>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub tokens: Vec<Token>,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Splits on whitespace and moves trailing punctuation into
/// [`Token::trailing_punct`]. When several punctuation characters trail a
/// word only the last is kept. A token made entirely of punctuation (a
/// free-standing dash, say) hands its last character to the preceding word;
/// with no preceding word it is dropped.
pub fn parse_transcript(text: &str, punct: &BTreeSet<char>) -> Transcript {
    let mut tokens: Vec<Token> = Vec::new();
    for raw in text.split_whitespace() {
        let stripped = raw.trim_end_matches(|c| punct.contains(&c));
        let last_punct = raw[stripped.len()..].chars().last();
        if stripped.is_empty() {
            if let (Some(prev), Some(p)) = (tokens.last_mut(), last_punct) {
                prev.trailing_punct = Some(p);
            }
            continue;
        }
        tokens.push(Token {
            text: stripped.to_string(),
            trailing_punct: last_punct,
        });
    }
    Transcript { tokens }
}
