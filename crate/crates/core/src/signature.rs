//! Circuit signatures and the composition checks that enforce dependencies.
//!
//! A [`Signature`] is the ordered list of input [`Port`]s and output ports of
//! a circuit. Sequencing two circuits requires the upstream outputs to match
//! the downstream inputs exactly, slot by slot; placing circuits side by side
//! concatenates both lists and never fails.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::datastore;
use crate::value::ValueType;

/// Name of a store kind, e.g. `Var` or `FileStore`. Kinds compare nominally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StoreKind(Arc<str>);

impl StoreKind {
    pub const VAR: &'static str = "Var";
    pub const FILE_STORE: &'static str = "FileStore";
    pub const CSV_STORE: &'static str = "CSVStore";
    pub const COMMA_SEP_FILE: &'static str = "CommaSepFile";

    pub fn new(name: impl AsRef<str>) -> Self {
        StoreKind(Arc::from(name.as_ref()))
    }

    pub fn var() -> Self {
        Self::new(Self::VAR)
    }

    pub fn file_store() -> Self {
        Self::new(Self::FILE_STORE)
    }

    pub fn csv_store() -> Self {
        Self::new(Self::CSV_STORE)
    }

    pub fn comma_sep_file() -> Self {
        Self::new(Self::COMMA_SEP_FILE)
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One input or output slot: where a value lives and what it is.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Port {
    store: StoreKind,
    value: ValueType,
}

impl Port {
    /// Builds a port, rejecting pairings a built-in store cannot carry.
    /// User-registered kinds are checked when a network is started.
    pub fn new(store: StoreKind, value: ValueType) -> Result<Self, CompositionError> {
        if datastore::builtin_supports(&store, &value) == Some(false) {
            return Err(CompositionError::InvalidPort { store, value });
        }
        Ok(Port { store, value })
    }

    pub fn var(value: ValueType) -> Self {
        Port {
            store: StoreKind::var(),
            value,
        }
    }

    pub fn store(&self) -> &StoreKind {
        &self.store
    }

    pub fn value(&self) -> &ValueType {
        &self.value
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}<{}>", self.store, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error(
        "arity mismatch: upstream produces {left_outs} value(s) but downstream expects {right_ins}"
    )]
    ArityMismatch { left_outs: usize, right_ins: usize },
    #[error("couldn't match port {position}: upstream produces `{expected}` but downstream expects `{found}`")]
    PortMismatch {
        position: usize,
        expected: Port,
        found: Port,
    },
    #[error("store kind `{store}` cannot carry values of type `{value}`")]
    InvalidPort { store: StoreKind, value: ValueType },
    #[error("a circuit needs at least one input and one output")]
    EmptySignature,
    #[error("mapped circuit has the wrong shape: {0}")]
    InnerShape(String),
}

/// The typed contract of a circuit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    ins: Vec<Port>,
    outs: Vec<Port>,
}

impl Signature {
    pub fn new(ins: Vec<Port>, outs: Vec<Port>) -> Result<Self, CompositionError> {
        if ins.is_empty() || outs.is_empty() {
            return Err(CompositionError::EmptySignature);
        }
        Ok(Signature { ins, outs })
    }

    /// `ports -> ports`.
    pub fn identity(ports: Vec<Port>) -> Result<Self, CompositionError> {
        Self::new(ports.clone(), ports)
    }

    pub fn ins(&self) -> &[Port] {
        &self.ins
    }

    pub fn outs(&self) -> &[Port] {
        &self.outs
    }

    /// Number of inputs.
    pub fn n_ins(&self) -> usize {
        self.ins.len()
    }

    pub fn n_outs(&self) -> usize {
        self.outs.len()
    }
}

fn write_ports(f: &mut fmt::Formatter<'_>, ports: &[Port]) -> fmt::Result {
    f.write_str("[")?;
    for (i, p) in ports.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{p}")?;
    }
    f.write_str("]")
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ports(f, &self.ins)?;
        f.write_str(" -> ")?;
        write_ports(f, &self.outs)
    }
}

/// Sequential composition: `first`'s outputs feed `second`'s inputs.
pub fn compose_then(first: &Signature, second: &Signature) -> Result<Signature, CompositionError> {
    if first.outs.len() != second.ins.len() {
        return Err(CompositionError::ArityMismatch {
            left_outs: first.outs.len(),
            right_ins: second.ins.len(),
        });
    }
    if let Some((position, (expected, found))) = first
        .outs
        .iter()
        .zip(&second.ins)
        .enumerate()
        .find(|(_, (a, b))| a != b)
    {
        return Err(CompositionError::PortMismatch {
            position,
            expected: expected.clone(),
            found: found.clone(),
        });
    }
    Ok(Signature {
        ins: first.ins.clone(),
        outs: second.outs.clone(),
    })
}

/// Parallel composition: both port lists are concatenated.
pub fn compose_beside(left: &Signature, right: &Signature) -> Signature {
    let mut ins = left.ins.clone();
    ins.extend(right.ins.iter().cloned());
    let mut outs = left.outs.clone();
    outs.extend(right.outs.iter().cloned());
    Signature { ins, outs }
}
