use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use crossbeam_channel::{Receiver, Sender};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::datastore::{DataStoreRef, Locator, StoreError, StoreRegistry};
use crate::ids::{JobId, TaskId};
use crate::signature::Port;
use crate::translator;

use super::pipe::{JobError, Message, PipeList};
use super::worker::{merge, Worker, WorkerInfo};
use super::Topology;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("store registry: {0}")]
    StoreRegistry(#[from] StoreError),
    #[error("job {0} was already written")]
    DuplicateJob(JobId),
    #[error("network takes {expected} input(s), got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("input {position}: network expects `{expected}`, got `{found}`")]
    PortMismatch {
        position: usize,
        expected: Port,
        found: Port,
    },
    #[error("network has been stopped")]
    Stopped,
    #[error("expected job {expected} but read {found}")]
    Misaligned { expected: JobId, found: JobId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobStatus {
    Pending,
    Done,
    Failed,
}

/// What `read` yields for one job: its output refs or the first failure.
pub type JobResult = Result<Vec<DataStoreRef>, JobError>;

/// Runtime knobs.
#[derive(Debug, Clone, Copy, Default)]
pub struct NetworkOptions {
    /// Bound every pipe to this many messages. Debug aid for surfacing
    /// backpressure assumptions; pipes are unbounded by default.
    pub max_queue: Option<usize>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// A running Kahn process network.
///
/// `write` and `read` may each be called from one client context at a time;
/// several concurrent writers must serialise externally.
pub struct NetworkHandle {
    registry: Arc<StoreRegistry>,
    ins: PipeList,
    outs: PipeList,
    worker_ids: Vec<TaskId>,
    workers: Mutex<Vec<Worker>>,
    topology: Topology,
    jobs: Mutex<BTreeMap<JobId, JobStatus>>,
    inputs: Mutex<Vec<DataStoreRef>>,
    stop_tx: Mutex<Option<Sender<()>>>,
    stop_rx: Receiver<()>,
    stopped: AtomicBool,
}

impl std::fmt::Debug for NetworkHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NetworkHandle")
            .field("ins", &self.ins)
            .field("outs", &self.outs)
            .field("workers", &self.worker_ids.len())
            .finish_non_exhaustive()
    }
}

/// Translates `circuit` and starts one worker per task, map and fan-out/drain
/// node.
pub fn start_network(
    circuit: &Circuit,
    registry: Arc<StoreRegistry>,
) -> Result<NetworkHandle, NetworkError> {
    translator::build_basic_network(circuit, registry, NetworkOptions::default())
}

impl NetworkHandle {
    pub(crate) fn assemble(
        registry: Arc<StoreRegistry>,
        ins: PipeList,
        outs: PipeList,
        worker_ids: Vec<TaskId>,
        workers: Vec<Worker>,
        stop_tx: Option<Sender<()>>,
        stop_rx: Receiver<()>,
    ) -> Self {
        let infos: Vec<WorkerInfo> = workers.iter().map(|w| w.info.clone()).collect();
        debug_assert!(
            infos.iter().all(|w| worker_ids.contains(&w.id)),
            "spawned worker missing from the joined network"
        );
        let topology = Topology {
            ins: ins
                .pipes()
                .iter()
                .map(|p| (p.id(), p.port().clone()))
                .collect(),
            workers: infos,
            outs: outs
                .pipes()
                .iter()
                .map(|p| (p.id(), p.port().clone()))
                .collect(),
        };
        NetworkHandle {
            registry,
            ins,
            outs,
            worker_ids,
            workers: Mutex::new(workers),
            topology,
            jobs: Mutex::new(BTreeMap::new()),
            inputs: Mutex::new(Vec::new()),
            stop_tx: Mutex::new(stop_tx),
            stop_rx,
            stopped: AtomicBool::new(false),
        }
    }

    pub fn registry(&self) -> &Arc<StoreRegistry> {
        &self.registry
    }

    pub fn ins(&self) -> &PipeList {
        &self.ins
    }

    pub fn outs(&self) -> &PipeList {
        &self.outs
    }

    /// Ids of every worker started for this network (map inner networks
    /// excluded).
    pub fn worker_ids(&self) -> &[TaskId] {
        &self.worker_ids
    }

    pub fn worker_count(&self) -> usize {
        self.worker_ids.len()
    }

    /// Workers whose threads are still running.
    pub fn live_worker_count(&self) -> usize {
        lock(&self.workers)
            .iter()
            .filter(|w| !w.handle.is_finished())
            .count()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn job_status(&self, job: JobId) -> Option<JobStatus> {
        lock(&self.jobs).get(&job).copied()
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped.load(Ordering::SeqCst)
    }

    /// Feeds one job into the network: one message per input pipe.
    pub fn write(&self, job: JobId, inputs: &[DataStoreRef]) -> Result<(), NetworkError> {
        if self.is_stopped() {
            return Err(NetworkError::Stopped);
        }
        if inputs.len() != self.ins.len() {
            return Err(NetworkError::ArityMismatch {
                expected: self.ins.len(),
                found: inputs.len(),
            });
        }
        for (position, (r, pipe)) in inputs.iter().zip(self.ins.pipes()).enumerate() {
            let expected = pipe.port();
            if &r.kind != expected.store() || &r.value_type != expected.value() {
                return Err(NetworkError::PortMismatch {
                    position,
                    expected: expected.clone(),
                    found: r.port(),
                });
            }
        }
        {
            let mut jobs = lock(&self.jobs);
            if jobs.contains_key(&job) {
                return Err(NetworkError::DuplicateJob(job));
            }
            jobs.insert(job, JobStatus::Pending);
        }
        lock(&self.inputs).extend(
            inputs
                .iter()
                .filter(|r| matches!(r.locator, Locator::Cell(_)))
                .cloned(),
        );
        for (r, pipe) in inputs.iter().zip(self.ins.pipes()) {
            let msg = Message {
                job,
                payload: Ok(r.clone()),
            };
            if !pipe.send(msg, &self.stop_rx) {
                return Err(NetworkError::Stopped);
            }
        }
        Ok(())
    }

    /// Blocks until every output pipe has a message and returns the oldest
    /// unread job. Jobs come back in write order.
    pub fn read(&self) -> Result<(JobId, JobResult), NetworkError> {
        if self.is_stopped() {
            return Err(NetworkError::Stopped);
        }
        let msgs = self
            .outs
            .pipes()
            .iter()
            .map(|p| p.recv(&self.stop_rx))
            .collect::<Option<Vec<_>>>()
            .ok_or(NetworkError::Stopped)?;
        let (job, result) = merge(msgs);
        let status = if result.is_ok() {
            JobStatus::Done
        } else {
            JobStatus::Failed
        };
        lock(&self.jobs).insert(job, status);
        Ok((job, result))
    }

    /// Terminates every worker and frees the memory cells this network
    /// created. Safe to call more than once.
    pub fn stop(&self) {
        if self.stopped.swap(true, Ordering::SeqCst) {
            return;
        }
        drop(lock(&self.stop_tx).take());
        let workers = std::mem::take(&mut *lock(&self.workers));
        for w in workers {
            let _ = w.handle.join();
        }
        self.registry.release(&self.worker_ids);
        for r in std::mem::take(&mut *lock(&self.inputs)) {
            self.registry.discard(&r);
        }
    }
}

impl Drop for NetworkHandle {
    fn drop(&mut self) {
        self.stop();
    }
}
