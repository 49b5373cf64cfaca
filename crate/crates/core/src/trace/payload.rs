use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PayloadError {
    #[error("non-hex character {found:?} at position {position}")]
    NonHexCharacter { position: usize, found: char },
    #[error("odd number of hex digits ({digits}); every byte needs two")]
    OddDigitCount { digits: usize },
}

/// Raw message content. Text form is uppercase hex in 4-byte groups.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Payload(Vec<u8>);

impl Payload {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Self(bytes.into())
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn encode(&self) -> String {
        encode_payload(self)
    }
}

impl From<Vec<u8>> for Payload {
    fn from(v: Vec<u8>) -> Self {
        Self(v)
    }
}

impl From<&[u8]> for Payload {
    fn from(v: &[u8]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&encode_payload(self))
    }
}

impl fmt::Debug for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Payload[{}]", encode_payload(self))
    }
}

impl FromStr for Payload {
    type Err = PayloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        decode_payload(s)
    }
}

const HEX: &[u8; 16] = b"0123456789ABCDEF";

/// `[02 00 00 00 AA]` becomes `"02000000 AA"`.
pub fn encode_payload(p: &Payload) -> String {
    let mut out = String::with_capacity(p.len() * 2 + p.len() / 4);
    for (i, chunk) in p.0.chunks(4).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        for b in chunk {
            out.push(HEX[(b >> 4) as usize] as char);
            out.push(HEX[(b & 0x0F) as usize] as char);
        }
    }
    out
}

/// Accepts any whitespace grouping and either hex case.
pub fn decode_payload(text: &str) -> Result<Payload, PayloadError> {
    let mut bytes = Vec::with_capacity(text.len() / 2);
    let mut high: Option<u8> = None;
    let mut digits = 0;
    for (position, c) in text.chars().enumerate() {
        if c.is_whitespace() {
            continue;
        }
        let nibble = c
            .to_digit(16)
            .ok_or(PayloadError::NonHexCharacter { position, found: c })? as u8;
        digits += 1;
        match high.take() {
            None => high = Some(nibble),
            Some(h) => bytes.push(h << 4 | nibble),
        }
    }
    if high.is_some() {
        return Err(PayloadError::OddDigitCount { digits });
    }
    Ok(Payload(bytes))
}
