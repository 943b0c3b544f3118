//! Praat TextGrid (long text format) reading and writing.
//!
//! Only `IntervalTier`s are turned into alignments; `TextTier`s are parsed so
//! that files containing them still load, but they can't be selected as the
//! word or phone tier.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{AlignedUtterance, PhoneInterval, VowelSet, WordSpan};

pub const DEFAULT_WORD_TIER: &str = "words";
pub const DEFAULT_PHONE_TIER: &str = "phones";

/// Language tag given to utterances read from a TextGrid, which carries none.
pub const UNDETERMINED_LANGUAGE: &str = "und";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TextGridError {
    #[error("tier '{0}' not found")]
    MissingTier(String),
    #[error("malformed TextGrid at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("overlapping intervals in tier '{tier}' at line {line}")]
    OverlappingIntervals { tier: String, line: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub xmin: f64,
    pub xmax: f64,
    pub text: String,
    /// Line of the interval header, for diagnostics.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TierKind {
    Interval(Vec<Interval>),
    /// Point tiers are kept as (time, mark) pairs.
    Point(Vec<(f64, String)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tier {
    pub name: String,
    pub xmin: f64,
    pub xmax: f64,
    pub kind: TierKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextGrid {
    pub xmin: f64,
    pub xmax: f64,
    pub tiers: Vec<Tier>,
}

impl TextGrid {
    pub fn interval_tier(&self, name: &str) -> Result<&[Interval], TextGridError> {
        self.tiers
            .iter()
            .find_map(|t| match (&t.kind, t.name == name) {
                (TierKind::Interval(iv), true) => Some(iv.as_slice()),
                _ => None,
            })
            .ok_or_else(|| TextGridError::MissingTier(name.to_string()))
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> TextGridError {
    TextGridError::Malformed {
        line,
        reason: reason.into(),
    }
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let lines: Vec<_> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let last_line = text.lines().count().max(1);
        Self {
            lines,
            pos: 0,
            last_line,
        }
    }

    fn next(&mut self) -> Result<(usize, &'a str), TextGridError> {
        let item = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| malformed(self.last_line, "unexpected end of file"))?;
        self.pos += 1;
        Ok(item)
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    /// Reads a `key = value` line and returns the raw value.
    fn value(&mut self, key: &str) -> Result<(usize, &'a str), TextGridError> {
        let (no, line) = self.next()?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| malformed(no, format!("expected '{key} = ...'")))?;
        if k.trim() != key {
            return Err(malformed(
                no,
                format!("expected key '{key}', found '{}'", k.trim()),
            ));
        }
        Ok((no, v.trim()))
    }

    fn number(&mut self, key: &str) -> Result<(usize, f64), TextGridError> {
        let (no, v) = self.value(key)?;
        Ok((no, parse_number(no, v)?))
    }

    fn count(&mut self, key: &str) -> Result<(usize, usize), TextGridError> {
        let (no, v) = self.value(key)?;
        let n = v
            .parse::<usize>()
            .map_err(|_| malformed(no, format!("invalid count '{v}'")))?;
        Ok((no, n))
    }

    fn string(&mut self, key: &str) -> Result<(usize, String), TextGridError> {
        let (no, v) = self.value(key)?;
        Ok((no, parse_string(no, v)?))
    }

    /// Consumes a header line such as `item [3]:`.
    fn header(&mut self, prefix: &str) -> Result<usize, TextGridError> {
        let (no, line) = self.next()?;
        if line.starts_with(prefix) && line.ends_with(':') {
            Ok(no)
        } else {
            Err(malformed(no, format!("expected '{prefix} [..]:'")))
        }
    }
}

fn parse_number(line: usize, v: &str) -> Result<f64, TextGridError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(malformed(line, format!("invalid number '{v}'"))),
    }
}

fn parse_string(line: usize, v: &str) -> Result<String, TextGridError> {
    if v.len() < 2 || !v.starts_with('"') || !v.ends_with('"') {
        return Err(malformed(line, format!("expected quoted string, found '{v}'")));
    }
    let inner = &v[1..v.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '"' {
            if chars.peek() == Some(&'"') {
                chars.next();
                out.push('"');
            } else {
                return Err(malformed(line, "unescaped quote inside string"));
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Parses a long-format TextGrid into its tiers.
pub fn parse_textgrid_tiers(text: &str) -> Result<TextGrid, TextGridError> {
    let mut lines = Lines::new(text);

    let (no, file_type) = lines.string("File type")?;
    if file_type != "ooTextFile" {
        return Err(malformed(no, format!("unsupported file type '{file_type}'")));
    }
    let (no, class) = lines.string("Object class")?;
    if class != "TextGrid" {
        return Err(malformed(no, format!("unsupported object class '{class}'")));
    }

    if let Some((no, line)) = lines.peek() {
        if !line.contains('=') && line.parse::<f64>().is_ok() {
            return Err(malformed(
                no,
                "short text format is not supported; save as long text format",
            ));
        }
    }

    let (_, xmin) = lines.number("xmin")?;
    let (_, xmax) = lines.number("xmax")?;
    let (no, exists) = lines.next()?;
    if exists.split_whitespace().collect::<Vec<_>>() != ["tiers?", "<exists>"] {
        return Err(malformed(no, "expected 'tiers? <exists>'"));
    }
    let (_, n_tiers) = lines.count("size")?;
    let (no, items) = lines.next()?;
    if items.replace(' ', "") != "item[]:" {
        return Err(malformed(no, "expected 'item []:'"));
    }

    let mut tiers = Vec::with_capacity(n_tiers);
    for _ in 0..n_tiers {
        lines.header("item [")?;
        let (no, class) = lines.string("class")?;
        let (_, name) = lines.string("name")?;
        let (_, t_xmin) = lines.number("xmin")?;
        let (_, t_xmax) = lines.number("xmax")?;
        let kind = match class.as_str() {
            "IntervalTier" => TierKind::Interval(parse_intervals(&mut lines, &name)?),
            "TextTier" => {
                let (_, n) = lines.count("points: size")?;
                let mut points = Vec::with_capacity(n);
                for _ in 0..n {
                    lines.header("points [")?;
                    let (_, t) = lines.number("number")?;
                    let (_, mark) = lines.string("mark")?;
                    points.push((t, mark));
                }
                TierKind::Point(points)
            }
            other => return Err(malformed(no, format!("unknown tier class '{other}'"))),
        };
        tiers.push(Tier {
            name,
            xmin: t_xmin,
            xmax: t_xmax,
            kind,
        });
    }

    if let Some((no, _)) = lines.peek() {
        return Err(malformed(no, "trailing content after the last tier"));
    }

    Ok(TextGrid { xmin, xmax, tiers })
}

fn parse_intervals(lines: &mut Lines<'_>, tier: &str) -> Result<Vec<Interval>, TextGridError> {
    let (_, n) = lines.count("intervals: size")?;
    let mut out: Vec<Interval> = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.header("intervals [")?;
        let (no, xmin) = lines.number("xmin")?;
        let (_, xmax) = lines.number("xmax")?;
        let (_, text) = lines.string("text")?;
        if !(xmin < xmax) {
            return Err(malformed(no, format!("interval [{xmin}, {xmax}] is empty")));
        }
        if let Some(prev) = out.last() {
            if xmin < prev.xmax {
                return Err(TextGridError::OverlappingIntervals {
                    tier: tier.to_string(),
                    line,
                });
            }
        }
        out.push(Interval {
            xmin,
            xmax,
            text,
            line,
        });
    }
    Ok(out)
}

/// Reads a forced-alignment TextGrid into an [`AlignedUtterance`].
///
/// Empty-label intervals are silence and are dropped from both tiers. Each
/// phone is attached to the first word whose closed span contains the phone's
/// midpoint, so a midpoint sitting exactly on a shared boundary goes to the
/// earlier word. Phones outside every word are discarded.
pub fn parse_textgrid(
    text: &str,
    word_tier: &str,
    phone_tier: &str,
    vowels: &VowelSet,
) -> Result<AlignedUtterance, TextGridError> {
    let grid = parse_textgrid_tiers(text)?;
    let word_iv = grid.interval_tier(word_tier)?;
    let phone_iv = grid.interval_tier(phone_tier)?;

    let mut words: Vec<WordSpan> = word_iv
        .iter()
        .filter(|iv| !iv.text.trim().is_empty())
        .map(|iv| WordSpan {
            token: iv.text.trim().to_string(),
            start_s: iv.xmin,
            end_s: iv.xmax,
            phones: Vec::new(),
        })
        .collect();

    for iv in phone_iv.iter().filter(|iv| !iv.text.trim().is_empty()) {
        let phone = PhoneInterval::new(iv.text.trim(), iv.xmin, iv.xmax, vowels)
            .map_err(|e| malformed(iv.line, e.to_string()))?;
        let mid = phone.midpoint_s();
        if let Some(w) = words
            .iter_mut()
            .find(|w| w.start_s <= mid && mid <= w.end_s)
        {
            w.phones.push(phone);
        }
    }

    Ok(AlignedUtterance {
        words,
        language: UNDETERMINED_LANGUAGE.to_string(),
        speaker_id: String::new(),
    })
}

fn push_tier(out: &mut String, index: usize, name: &str, xmax: f64, spans: &[(f64, f64, &str)]) {
    let mut filled: Vec<(f64, f64, &str)> = Vec::with_capacity(spans.len() * 2 + 1);
    let mut cursor = 0.0;
    for &(s, e, label) in spans {
        if s > cursor {
            filled.push((cursor, s, ""));
        }
        filled.push((s, e, label));
        cursor = e;
    }
    if xmax > cursor {
        filled.push((cursor, xmax, ""));
    }

    let _ = writeln!(out, "    item [{index}]:");
    let _ = writeln!(out, "        class = \"IntervalTier\"");
    let _ = writeln!(out, "        name = {}", quote(name));
    let _ = writeln!(out, "        xmin = 0");
    let _ = writeln!(out, "        xmax = {xmax}");
    let _ = writeln!(out, "        intervals: size = {}", filled.len());
    for (i, (s, e, label)) in filled.iter().enumerate() {
        let _ = writeln!(out, "        intervals [{}]:", i + 1);
        let _ = writeln!(out, "            xmin = {s}");
        let _ = writeln!(out, "            xmax = {e}");
        let _ = writeln!(out, "            text = {}", quote(label));
    }
}

/// Writes a two-tier long-format TextGrid. Gaps between words (and phones)
/// become empty intervals; times are written in shortest round-trip form.
pub fn write_textgrid(utt: &AlignedUtterance, word_tier: &str, phone_tier: &str) -> String {
    let word_spans: Vec<_> = utt
        .words
        .iter()
        .map(|w| (w.start_s, w.end_s, w.token.as_str()))
        .collect();
    let phone_spans: Vec<_> = utt
        .words
        .iter()
        .flat_map(|w| w.phones.iter())
        .map(|p| (p.start_s, p.end_s, p.label.as_str()))
        .collect();
    let xmax = word_spans
        .iter()
        .chain(phone_spans.iter())
        .map(|s| s.1)
        .fold(0.0_f64, f64::max);

    let mut out = String::new();
    out.push_str("File type = \"ooTextFile\"\n");
    out.push_str("Object class = \"TextGrid\"\n\n");
    let _ = writeln!(out, "xmin = 0");
    let _ = writeln!(out, "xmax = {xmax}");
    out.push_str("tiers? <exists>\n");
    out.push_str("size = 2\n");
    out.push_str("item []:\n");
    push_tier(&mut out, 1, word_tier, xmax, &word_spans);
    push_tier(&mut out, 2, phone_tier, xmax, &phone_spans);
    out
}
