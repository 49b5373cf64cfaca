use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentError {
    #[error("identifier is empty")]
    Empty,
    #[error("identifier {0:?} may only contain A-Z, 0-9 and '_'")]
    InvalidChar(String),
}

/// Message names, type tags, slot and endpoint names: `[A-Z0-9_]+`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(String);

impl Ident {
    pub fn new(s: impl Into<String>) -> Result<Self, IdentError> {
        let s = s.into();
        if s.is_empty() {
            return Err(IdentError::Empty);
        }
        if !s
            .bytes()
            .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || b == b'_')
        {
            return Err(IdentError::InvalidChar(s));
        }
        Ok(Self(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Ident {
    type Err = IdentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl AsRef<str> for Ident {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl PartialEq<str> for Ident {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for Ident {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// Name of the Common Memory pseudo-endpoint.
pub const COMMON_MEMORY: &str = "CM";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndpointKind {
    Task,
    CommonMemory,
    EnvironmentStub,
}

/// A communication partner of the TUT as it appears in a record's SOURCE.
///
/// The kind is not written to logs; it is derived from the name, so `CM`
/// is always Common Memory and every other name is a stub.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Endpoint {
    name: Ident,
    kind: EndpointKind,
}

impl Endpoint {
    pub fn new(name: Ident) -> Self {
        let kind = if name == COMMON_MEMORY {
            EndpointKind::CommonMemory
        } else {
            EndpointKind::EnvironmentStub
        };
        Self { name, kind }
    }

    pub fn task(name: Ident) -> Self {
        Self {
            name,
            kind: EndpointKind::Task,
        }
    }

    pub fn common_memory() -> Self {
        Self::new(Ident(COMMON_MEMORY.to_string()))
    }

    pub fn name(&self) -> &Ident {
        &self.name
    }

    pub fn kind(&self) -> EndpointKind {
        self.kind
    }

    pub fn is_common_memory(&self) -> bool {
        self.kind == EndpointKind::CommonMemory
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.name.fmt(f)
    }
}

impl FromStr for Endpoint {
    type Err = IdentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ident::new(s).map(Self::new)
    }
}

/// Shorthand for tests and built-in fixtures; panics on invalid input.
pub fn ident(s: &str) -> Ident {
    Ident::new(s).unwrap_or_else(|e| panic!("{e}"))
}

/// Shorthand for tests and built-in fixtures; panics on invalid input.
pub fn endpoint(s: &str) -> Endpoint {
    Endpoint::new(ident(s))
}
