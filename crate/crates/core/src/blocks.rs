//! The `KEY: VALUE` block grammar shared by every file format.
//!
//! Blocks are separated by blank lines. Log files put one or more pairs on
//! each line; scenario, interface and state-chart files start each block
//! with a bare kind word and carry exactly one pair per line.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("text {text:?} does not belong to any KEY")]
    StrayText { line: usize, text: String },
    #[error("expected `KEY: VALUE`, found {text:?}")]
    NotAPair { line: usize, text: String },
    #[error("block kind missing")]
    MissingKind { line: usize },
}

impl BlockError {
    pub fn line(&self) -> usize {
        match self {
            BlockError::StrayText { line, .. } | BlockError::NotAPair { line, .. } | BlockError::MissingKind { line } => {
                *line
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub key: String,
    pub value: String,
    /// 1-based line number where the key appears.
    pub line: usize,
}

/// Groups non-blank lines into blocks, keeping 1-based line numbers.
pub fn split_blocks(text: &str) -> Vec<Vec<(usize, &str)>> {
    let mut blocks = Vec::new();
    let mut current: Vec<(usize, &str)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push((i + 1, line));
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
}

fn is_key_name(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_uppercase())
        && bytes.all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || b == b'_')
}

/// True for a whitespace-delimited token of the form `KEY:`.
pub fn is_key_token(token: &str) -> bool {
    token.strip_suffix(':').is_some_and(is_key_name)
}

/// Splits lines into pairs wherever a `KEY:` token occurs, so several
/// pairs may share a line. Value tokens are re-joined with single spaces;
/// a line without a leading key continues the previous value.
pub fn tokenize_pairs(lines: &[(usize, &str)]) -> Result<Vec<Pair>, BlockError> {
    let mut pairs: Vec<Pair> = Vec::new();
    for &(line, text) in lines {
        for token in text.split_whitespace() {
            if is_key_token(token) {
                pairs.push(Pair {
                    key: token[..token.len() - 1].to_string(),
                    value: String::new(),
                    line,
                });
            } else if let Some(pair) = pairs.last_mut() {
                if !pair.value.is_empty() {
                    pair.value.push(' ');
                }
                pair.value.push_str(token);
            } else {
                return Err(BlockError::StrayText {
                    line,
                    text: token.to_string(),
                });
            }
        }
    }
    Ok(pairs)
}

/// A block that begins with a kind line such as `INJECT`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KindBlock {
    /// 0-based position of the block in the file.
    pub index: usize,
    pub kind: String,
    pub line: usize,
    pub pairs: Vec<Pair>,
}

impl KindBlock {
    pub fn get(&self, key: &str) -> Option<&Pair> {
        self.pairs.iter().find(|p| p.key == key)
    }

    pub fn count(&self, key: &str) -> usize {
        self.pairs.iter().filter(|p| p.key == key).count()
    }
}

pub fn parse_kind_blocks(text: &str) -> Result<Vec<KindBlock>, BlockError> {
    split_blocks(text)
        .into_iter()
        .enumerate()
        .map(|(index, lines)| {
            let (line, first) = lines[0];
            let kind = first.trim();
            if !is_key_name(kind) {
                return Err(BlockError::MissingKind { line });
            }
            let pairs = lines[1..]
                .iter()
                .map(|&(line, text)| split_line_pair(line, text))
                .collect::<Result<_, _>>()?;
            Ok(KindBlock {
                index,
                kind: kind.to_string(),
                line,
                pairs,
            })
        })
        .collect()
}

fn split_line_pair(line: usize, text: &str) -> Result<Pair, BlockError> {
    let not_a_pair = || BlockError::NotAPair {
        line,
        text: text.to_string(),
    };
    let (key, value) = text.split_once(':').ok_or_else(not_a_pair)?;
    let key = key.trim();
    if !is_key_name(key) {
        return Err(not_a_pair());
    }
    Ok(Pair {
        key: key.to_string(),
        value: value.trim().to_string(),
        line,
    })
}

/// Accumulates canonical block text.
#[derive(Debug, Default)]
pub struct BlockWriter {
    out: String,
    in_block: bool,
}

impl BlockWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a new block, optionally with a kind line.
    pub fn begin(&mut self, kind: Option<&str>) -> &mut Self {
        if self.in_block {
            self.out.push('\n');
        }
        self.in_block = true;
        if let Some(kind) = kind {
            self.out.push_str(kind);
            self.out.push('\n');
        }
        self
    }

    pub fn pair(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let start = self.out.len();
        let _ = write!(self.out, "{key}: {value}");
        // an empty value is written as a bare `KEY:`
        if self.out.len() == start + key.len() + 2 {
            self.out.pop();
        }
        self.out.push('\n');
        self
    }

    pub fn finish(self) -> String {
        self.out
    }
}
