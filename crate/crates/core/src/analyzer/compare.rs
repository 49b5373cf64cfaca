use std::fmt;

use crate::trace::Payload;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mismatch {
    /// Payload lengths differ; `byte` is the first index where they diverge.
    Length {
        byte: usize,
        expected: usize,
        actual: usize,
    },
    /// Bytes differ where they are compared exactly.
    Byte { byte: usize, expected: u8, actual: u8 },
    /// A 4-byte little-endian field deviates by more than the tolerance.
    Field {
        field: usize,
        byte: usize,
        delta: u64,
        tolerance: u64,
    },
}

impl Mismatch {
    /// Index of the first byte involved in the violation.
    pub fn byte(&self) -> usize {
        match *self {
            Mismatch::Length { byte, .. } | Mismatch::Byte { byte, .. } | Mismatch::Field { byte, .. } => byte,
        }
    }
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Mismatch::Length {
                byte,
                expected,
                actual,
            } => write!(f, "mismatch at byte {byte}: length {actual} instead of {expected}"),
            Mismatch::Byte {
                byte,
                expected,
                actual,
            } => write!(f, "mismatch at byte {byte}: {actual:02X} instead of {expected:02X}"),
            Mismatch::Field {
                field,
                byte,
                delta,
                tolerance,
            } => write!(
                f,
                "mismatch at byte {byte}: field {field} off by {delta}, tolerance {tolerance}"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Match,
    Mismatch(Mismatch),
}

impl Comparison {
    pub fn is_match(&self) -> bool {
        matches!(self, Comparison::Match)
    }
}

/// Tolerance-aware payload check.
///
/// With tolerance 0 the payloads must be byte-identical. Otherwise lengths
/// must agree, each complete 4-byte group is read as a little-endian `u32`
/// and may deviate by at most `tolerance`, and a trailing group shorter
/// than four bytes must match exactly.
pub fn compare_payloads(expected: &Payload, actual: &Payload, tolerance: u64) -> Comparison {
    let (e, a) = (expected.bytes(), actual.bytes());
    if e.len() != a.len() {
        let byte = e.iter().zip(a).position(|(x, y)| x != y).unwrap_or(e.len().min(a.len()));
        return Comparison::Mismatch(Mismatch::Length {
            byte,
            expected: e.len(),
            actual: a.len(),
        });
    }
    let exact_from = if tolerance == 0 { 0 } else { e.len() / 4 * 4 };
    for (field, (ge, ga)) in e[..exact_from].chunks_exact(4).zip(a.chunks_exact(4)).enumerate() {
        let ve = u32::from_le_bytes(ge.try_into().expect("4-byte chunk"));
        let va = u32::from_le_bytes(ga.try_into().expect("4-byte chunk"));
        let delta = u64::from(ve.abs_diff(va));
        if delta > tolerance {
            return Comparison::Mismatch(Mismatch::Field {
                field,
                byte: field * 4,
                delta,
                tolerance,
            });
        }
    }
    for i in exact_from..e.len() {
        if e[i] != a[i] {
            return Comparison::Mismatch(Mismatch::Byte {
                byte: i,
                expected: e[i],
                actual: a[i],
            });
        }
    }
    Comparison::Match
}
