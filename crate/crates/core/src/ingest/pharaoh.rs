//! Pharaoh-format word alignments: whitespace-separated `i-j` pairs, 0-based,
//! one utterance per line.

use thiserror::Error;

use crate::model::WordAlignmentSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PharaohError {
    #[error("malformed alignment pair '{0}'")]
    MalformedPair(String),
    #[error("{side} index {index} out of range (size {size})")]
    IndexOutOfRange {
        side: &'static str,
        index: usize,
        size: usize,
    },
}

pub fn parse_pharaoh(text: &str, n_src: usize, n_tgt: usize) -> Result<WordAlignmentSet, PharaohError> {
    let mut pairs = Vec::new();
    for token in text.split_whitespace() {
        let (i, j) = token
            .split_once('-')
            .ok_or_else(|| PharaohError::MalformedPair(token.to_string()))?;
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| PharaohError::MalformedPair(token.to_string()))
        };
        let (i, j) = (parse(i)?, parse(j)?);
        if i >= n_src {
            return Err(PharaohError::IndexOutOfRange {
                side: "source",
                index: i,
                size: n_src,
            });
        }
        if j >= n_tgt {
            return Err(PharaohError::IndexOutOfRange {
                side: "target",
                index: j,
                size: n_tgt,
            });
        }
        pairs.push((i, j));
    }
    // Bounds are already checked, so construction cannot fail.
    Ok(WordAlignmentSet {
        pairs: pairs.into_iter().collect(),
        n_src,
        n_tgt,
    })
}

/// Sorted `i-j` pairs separated by single spaces, no trailing newline.
pub fn write_pharaoh(set: &WordAlignmentSet) -> String {
    set.pairs
        .iter()
        .map(|(i, j)| format!("{i}-{j}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_pairs() {
        let a = parse_pharaoh("0-0 1-2", 2, 3).unwrap();
        assert_eq!(a.pairs.into_iter().collect::<Vec<_>>(), vec![(0, 0), (1, 2)]);
    }

    #[test]
    fn empty_line_is_empty_set() {
        let a = parse_pharaoh("", 0, 0).unwrap();
        assert!(a.pairs.is_empty());
        assert!(parse_pharaoh("  \t ", 3, 3).unwrap().pairs.is_empty());
    }

    #[test]
    fn out_of_range_target() {
        assert_eq!(
            parse_pharaoh("0-5", 1, 3),
            Err(PharaohError::IndexOutOfRange {
                side: "target",
                index: 5,
                size: 3
            })
        );
        assert!(matches!(
            parse_pharaoh("4-0", 1, 3),
            Err(PharaohError::IndexOutOfRange { side: "source", .. })
        ));
    }

    #[test]
    fn malformed_tokens() {
        for bad in ["0_1", "a-1", "1-", "-1", "0-1-2", "1-2:0.9"] {
            assert_eq!(
                parse_pharaoh(bad, 5, 5),
                Err(PharaohError::MalformedPair(bad.to_string())),
                "{bad}"
            );
        }
    }

    #[test]
    fn duplicates_collapse() {
        let a = parse_pharaoh("1-1 0-0 1-1", 2, 2).unwrap();
        assert_eq!(a.pairs.len(), 2);
        assert_eq!(write_pharaoh(&a), "0-0 1-1");
    }
}
