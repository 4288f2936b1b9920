//! Stores that carry values between tasks.
//!
//! A [`DataStoreRef`] names where one value lives. The [`StoreRegistry`]
//! dispatches `fetch`/`save`/`empty` to the backend registered for the ref's
//! kind. The four built-in kinds are always present: `Var` (an in-memory
//! write-once cell), `FileStore`, `CSVStore` and `CommaSepFile`.

mod codec;
mod var;

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::ids::{JobId, TaskId};
use crate::signature::{Port, StoreKind};
use crate::value::{Value, ValueType};

pub use codec::Layout;
pub use var::{discard_cells, live_cell_count, release_cells_owned_by};

/// Default location for files created by `empty`.
pub const DEFAULT_WORKDIR: &str = "./flowkit-out";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("nothing stored at {0}")]
    NotFound(String),
    #[error("decode error at line {line}: {message}")]
    Decode { line: usize, message: String },
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: String, found: String },
    #[error("{0} was already saved")]
    AlreadySaved(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("store kind `{kind}` does not support `{value}`")]
    UnsupportedValueType { kind: StoreKind, value: ValueType },
    #[error("store kind `{0}` is not registered")]
    UnknownKind(StoreKind),
    #[error("cannot encode value: {0}")]
    Encode(String),
    #[error("combined fetch needs at least one store")]
    EmptyCombined,
    #[error("input {index}: {source}")]
    Combined {
        index: usize,
        #[source]
        source: Box<StoreError>,
    },
}

impl StoreError {
    fn io(path: &Path, err: io::Error) -> Self {
        if err.kind() == io::ErrorKind::NotFound {
            StoreError::NotFound(path.display().to_string())
        } else {
            StoreError::Io {
                path: path.display().to_string(),
                message: err.to_string(),
            }
        }
    }
}

/// Kind-specific location of a stored value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Locator {
    Cell(u64),
    Path(PathBuf),
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locator::Cell(id) => write!(f, "cell#{id}"),
            Locator::Path(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Handle naming where a value lives and what type it has.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DataStoreRef {
    pub kind: StoreKind,
    pub value_type: ValueType,
    pub locator: Locator,
}

impl DataStoreRef {
    /// Refers to an existing file, e.g. an external input.
    pub fn file(kind: StoreKind, value_type: ValueType, path: impl Into<PathBuf>) -> Self {
        DataStoreRef {
            kind,
            value_type,
            locator: Locator::Path(path.into()),
        }
    }

    pub fn port(&self) -> Port {
        // Refs are only built for supported pairings, so this cannot fail
        // for built-in kinds.
        Port::new(self.kind.clone(), self.value_type.clone())
            .expect("store ref with an invalid port")
    }

    pub fn path(&self) -> Option<&Path> {
        match &self.locator {
            Locator::Path(p) => Some(p),
            Locator::Cell(_) => None,
        }
    }
}

/// Implementation of one store kind.
pub trait StoreBackend: Send + Sync {
    fn supports(&self, value_type: &ValueType) -> bool;

    fn fetch(&self, r: &DataStoreRef) -> Result<Value, StoreError>;

    fn save(&self, r: &DataStoreRef, value: &Value) -> Result<(), StoreError>;

    /// A fresh, unsaved location for the output of `task` on `job`.
    fn empty(&self, value_type: &ValueType, task: TaskId, job: JobId, workdir: &Path) -> Locator;

    /// Frees storage created by the given tasks. Called when a network stops.
    fn release(&self, _tasks: &[TaskId]) {}

    /// Frees one location, e.g. an input written by a client.
    fn discard(&self, _r: &DataStoreRef) {}
}

/// Which value types a built-in kind can carry; `None` for other kinds.
pub fn builtin_supports(kind: &StoreKind, value_type: &ValueType) -> Option<bool> {
    match kind.name() {
        StoreKind::VAR => Some(true),
        StoreKind::FILE_STORE => Some(Layout::Lines.supports(value_type)),
        StoreKind::CSV_STORE => Some(Layout::Csv.supports(value_type)),
        StoreKind::COMMA_SEP_FILE => Some(Layout::CommaSeparated.supports(value_type)),
        _ => None,
    }
}

/// A file-backed kind using one of the built-in layouts.
#[derive(Debug, Clone, Copy)]
pub struct FileBackend {
    layout: Layout,
}

impl FileBackend {
    pub fn new(layout: Layout) -> Self {
        FileBackend { layout }
    }
}

impl StoreBackend for FileBackend {
    fn supports(&self, value_type: &ValueType) -> bool {
        self.layout.supports(value_type)
    }

    fn fetch(&self, r: &DataStoreRef) -> Result<Value, StoreError> {
        let path = r.path().ok_or_else(|| StoreError::TypeMismatch {
            expected: "file path".into(),
            found: r.locator.to_string(),
        })?;
        let text = std::fs::read_to_string(path).map_err(|e| StoreError::io(path, e))?;
        self.layout.decode(&text, &r.value_type)
    }

    fn save(&self, r: &DataStoreRef, value: &Value) -> Result<(), StoreError> {
        let path = r.path().ok_or_else(|| StoreError::TypeMismatch {
            expected: "file path".into(),
            found: r.locator.to_string(),
        })?;
        let text = self.layout.encode(value, &r.value_type)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
        }
        std::fs::write(path, text).map_err(|e| StoreError::io(path, e))
    }

    fn empty(&self, _value_type: &ValueType, task: TaskId, job: JobId, workdir: &Path) -> Locator {
        Locator::Path(workdir.join(format!("{task}_{job}.{}", self.layout.extension())))
    }
}

/// Maps kind names to backends; owns the work directory for file outputs.
#[derive(Clone)]
pub struct StoreRegistry {
    workdir: PathBuf,
    backends: BTreeMap<StoreKind, Arc<dyn StoreBackend>>,
}

impl fmt::Debug for StoreRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StoreRegistry")
            .field("workdir", &self.workdir)
            .field("kinds", &self.backends.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Default for StoreRegistry {
    fn default() -> Self {
        Self::new(DEFAULT_WORKDIR)
    }
}

impl StoreRegistry {
    pub fn new(workdir: impl Into<PathBuf>) -> Self {
        let mut backends: BTreeMap<StoreKind, Arc<dyn StoreBackend>> = BTreeMap::new();
        backends.insert(StoreKind::var(), Arc::new(var::VarBackend));
        backends.insert(
            StoreKind::file_store(),
            Arc::new(FileBackend::new(Layout::Lines)),
        );
        backends.insert(
            StoreKind::csv_store(),
            Arc::new(FileBackend::new(Layout::Csv)),
        );
        backends.insert(
            StoreKind::comma_sep_file(),
            Arc::new(FileBackend::new(Layout::CommaSeparated)),
        );
        StoreRegistry {
            workdir: workdir.into(),
            backends,
        }
    }

    pub fn workdir(&self) -> &Path {
        &self.workdir
    }

    /// Registers (or replaces) a user-defined kind. Built-in kinds cannot be
    /// replaced.
    pub fn register(&mut self, kind: StoreKind, backend: Arc<dyn StoreBackend>) -> bool {
        if builtin_supports(&kind, &ValueType::Unit).is_some() {
            return false;
        }
        self.backends.insert(kind, backend);
        true
    }

    pub fn backend(&self, kind: &StoreKind) -> Result<&Arc<dyn StoreBackend>, StoreError> {
        self.backends
            .get(kind)
            .ok_or_else(|| StoreError::UnknownKind(kind.clone()))
    }

    /// Checks that `port` names a registered kind that can carry its type.
    pub fn check_port(&self, port: &Port) -> Result<(), StoreError> {
        if self.backend(port.store())?.supports(port.value()) {
            Ok(())
        } else {
            Err(StoreError::UnsupportedValueType {
                kind: port.store().clone(),
                value: port.value().clone(),
            })
        }
    }

    pub fn fetch(&self, r: &DataStoreRef) -> Result<Value, StoreError> {
        let value = self.backend(&r.kind)?.fetch(r)?;
        if !value.conforms_to(&r.value_type) {
            return Err(StoreError::TypeMismatch {
                expected: r.value_type.to_string(),
                found: value.to_string(),
            });
        }
        Ok(value)
    }

    pub fn save(&self, r: &DataStoreRef, value: &Value) -> Result<(), StoreError> {
        if !value.conforms_to(&r.value_type) {
            return Err(StoreError::TypeMismatch {
                expected: r.value_type.to_string(),
                found: value.to_string(),
            });
        }
        self.backend(&r.kind)?.save(r, value)
    }

    pub fn empty(
        &self,
        kind: &StoreKind,
        value_type: &ValueType,
        task: TaskId,
        job: JobId,
    ) -> Result<DataStoreRef, StoreError> {
        let backend = self.backend(kind)?;
        if !backend.supports(value_type) {
            return Err(StoreError::UnsupportedValueType {
                kind: kind.clone(),
                value: value_type.clone(),
            });
        }
        Ok(DataStoreRef {
            kind: kind.clone(),
            value_type: value_type.clone(),
            locator: backend.empty(value_type, task, job, &self.workdir),
        })
    }

    /// `empty` followed by `save`.
    pub fn store(
        &self,
        port: &Port,
        value: &Value,
        task: TaskId,
        job: JobId,
    ) -> Result<DataStoreRef, StoreError> {
        let r = self.empty(port.store(), port.value(), task, job)?;
        self.save(&r, value)?;
        Ok(r)
    }

    /// Fetches several stores at once, in order.
    pub fn fetch_combined(&self, refs: &[DataStoreRef]) -> Result<Vec<Value>, StoreError> {
        if refs.is_empty() {
            return Err(StoreError::EmptyCombined);
        }
        refs.iter()
            .enumerate()
            .map(|(index, r)| {
                self.fetch(r).map_err(|e| StoreError::Combined {
                    index,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    pub fn release(&self, tasks: &[TaskId]) {
        for backend in self.backends.values() {
            backend.release(tasks);
        }
    }

    pub fn discard(&self, r: &DataStoreRef) {
        if let Ok(backend) = self.backend(&r.kind) {
            backend.discard(r);
        }
    }
}
