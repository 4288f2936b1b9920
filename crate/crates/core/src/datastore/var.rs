//! Process-wide table of in-memory write-once cells.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{LazyLock, Mutex, MutexGuard};

use crate::ids::{JobId, TaskId};
use crate::value::{Value, ValueType};

use super::{DataStoreRef, Locator, StoreBackend, StoreError};

struct Cell {
    owner: TaskId,
    value: Option<Value>,
}

static CELLS: LazyLock<Mutex<HashMap<u64, Cell>>> = LazyLock::new(Default::default);
static NEXT_CELL: AtomicU64 = AtomicU64::new(1);

fn cells() -> MutexGuard<'static, HashMap<u64, Cell>> {
    // A panic while holding the lock cannot leave a cell half-written.
    CELLS.lock().unwrap_or_else(|e| e.into_inner())
}

fn cell_id(r: &DataStoreRef) -> Result<u64, StoreError> {
    match r.locator {
        Locator::Cell(id) => Ok(id),
        Locator::Path(_) => Err(StoreError::TypeMismatch {
            expected: "memory cell".into(),
            found: r.locator.to_string(),
        }),
    }
}

pub(super) struct VarBackend;

impl StoreBackend for VarBackend {
    fn supports(&self, _value_type: &ValueType) -> bool {
        true
    }

    fn fetch(&self, r: &DataStoreRef) -> Result<Value, StoreError> {
        let id = cell_id(r)?;
        cells()
            .get(&id)
            .and_then(|c| c.value.clone())
            .ok_or_else(|| StoreError::NotFound(r.locator.to_string()))
    }

    fn save(&self, r: &DataStoreRef, value: &Value) -> Result<(), StoreError> {
        let id = cell_id(r)?;
        let mut table = cells();
        let cell = table
            .get_mut(&id)
            .ok_or_else(|| StoreError::NotFound(r.locator.to_string()))?;
        if cell.value.is_some() {
            return Err(StoreError::AlreadySaved(r.locator.to_string()));
        }
        cell.value = Some(value.clone());
        Ok(())
    }

    fn empty(
        &self,
        _value_type: &ValueType,
        task: TaskId,
        _job: JobId,
        _workdir: &Path,
    ) -> Locator {
        let id = NEXT_CELL.fetch_add(1, Ordering::Relaxed);
        cells().insert(
            id,
            Cell {
                owner: task,
                value: None,
            },
        );
        Locator::Cell(id)
    }

    fn release(&self, tasks: &[TaskId]) {
        release_cells_owned_by(tasks);
    }

    fn discard(&self, r: &DataStoreRef) {
        if let Locator::Cell(id) = r.locator {
            cells().remove(&id);
        }
    }
}

/// Drops every cell created on behalf of one of `tasks`.
pub fn release_cells_owned_by(tasks: &[TaskId]) {
    if tasks.is_empty() {
        return;
    }
    cells().retain(|_, c| !tasks.contains(&c.owner));
}

/// Drops the given cells.
pub fn discard_cells(ids: impl IntoIterator<Item = u64>) {
    let mut table = cells();
    for id in ids {
        table.remove(&id);
    }
}

/// Number of cells currently allocated, across all networks.
pub fn live_cell_count() -> usize {
    cells().len()
}
