//! Worker loops. Each loop runs on its own thread until the network's stop
//! signal fires, and turns every failure into a [`JobError`] message for the
//! job at hand.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::thread::JoinHandle;

use crossbeam_channel::Receiver;

use crate::circuit::TaskSpec;
use crate::datastore::{DataStoreRef, StoreRegistry};
use crate::ids::{JobId, TaskId};
use crate::signature::Port;
use crate::value::Value;

use super::network::{NetworkError, NetworkHandle};
use super::pipe::{JobError, Message, Payload, Pipe, PipeList};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkerKind {
    Task,
    Map,
    Replicate,
    Drop,
}

impl WorkerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkerKind::Task => "task",
            WorkerKind::Map => "map",
            WorkerKind::Replicate => "replicate",
            WorkerKind::Drop => "drop",
        }
    }
}

/// Static description of a spawned worker.
#[derive(Debug, Clone)]
pub struct WorkerInfo {
    pub id: TaskId,
    pub ordinal: usize,
    pub kind: WorkerKind,
    pub label: String,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub inner: Option<Box<super::Topology>>,
}

pub(crate) struct Worker {
    pub info: WorkerInfo,
    pub handle: JoinHandle<()>,
}

/// Which input a drop worker forwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Runs a task body, converting panics and ill-typed results into a
/// [`JobError`] naming the task.
pub fn invoke_task(spec: &TaskSpec, inputs: &[Value]) -> Result<Value, JobError> {
    let result = catch_unwind(AssertUnwindSafe(|| spec.run(inputs)))
        .map_err(|panic| JobError::new(spec.name(), format!("panicked: {}", panic_text(&panic))))?
        .map_err(|e| JobError::new(spec.name(), e))?;
    if !result.conforms_to(spec.out().value()) {
        return Err(JobError::new(
            spec.name(),
            format!("returned {result}, expected {}", spec.out().value()),
        ));
    }
    Ok(result)
}

fn panic_text(panic: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = panic.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = panic.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

/// Receives one message from every pipe, in slot order.
fn recv_all(ins: &PipeList, stop: &Receiver<()>) -> Option<Vec<Message>> {
    ins.pipes().iter().map(|p| p.recv(stop)).collect()
}

/// Collapses job-aligned messages: the first error in slot order wins.
pub(crate) fn merge(msgs: Vec<Message>) -> (JobId, Result<Vec<DataStoreRef>, JobError>) {
    let job = msgs[0].job;
    if let Some(other) = msgs.iter().find(|m| m.job != job) {
        return (
            job,
            Err(JobError::new(
                "<runtime>",
                format!("misaligned jobs {job} and {} on one step", other.job),
            )),
        );
    }
    let refs = msgs.into_iter().map(|m| m.payload).collect();
    (job, refs)
}

pub(crate) fn run_task(
    spec: Arc<TaskSpec>,
    task: TaskId,
    ins: PipeList,
    out: Pipe,
    registry: Arc<StoreRegistry>,
    stop: Receiver<()>,
) {
    while let Some(msgs) = recv_all(&ins, &stop) {
        let (job, refs) = merge(msgs);
        let payload = refs.and_then(|refs| execute(&spec, task, job, &refs, &registry));
        if !out.send(Message { job, payload }, &stop) {
            return;
        }
    }
}

fn execute(
    spec: &TaskSpec,
    task: TaskId,
    job: JobId,
    refs: &[DataStoreRef],
    registry: &StoreRegistry,
) -> Payload {
    let values = registry
        .fetch_combined(refs)
        .map_err(|e| JobError::new(spec.name(), e))?;
    let result = invoke_task(spec, &values)?;
    registry
        .store(spec.out(), &result, task, job)
        .map_err(|e| JobError::new(spec.name(), e))
}

pub(crate) fn run_replicate(input: Pipe, left: Pipe, right: Pipe, stop: Receiver<()>) {
    while let Some(msg) = input.recv(&stop) {
        if !left.send(msg.clone(), &stop) || !right.send(msg, &stop) {
            return;
        }
    }
}

pub(crate) fn run_drop(side: Side, left: Pipe, right: Pipe, out: Pipe, stop: Receiver<()>) {
    loop {
        let Some(l) = left.recv(&stop) else { return };
        let Some(r) = right.recv(&stop) else { return };
        let (job, merged) = merge(vec![l, r]);
        let payload = merged.map(|mut refs| match side {
            Side::Left => refs.remove(1),
            Side::Right => refs.remove(0),
        });
        if !out.send(Message { job, payload }, &stop) {
            return;
        }
    }
}

pub(crate) struct MapWorker {
    pub task: TaskId,
    pub input: Pipe,
    pub out: Pipe,
    pub output: Port,
    pub inner: NetworkHandle,
    pub registry: Arc<StoreRegistry>,
    pub stop: Receiver<()>,
}

pub(crate) const MAP_LABEL: &str = "mapC";

impl MapWorker {
    pub fn run(self) {
        while let Some(msg) = self.input.recv(&self.stop) {
            let payload = match msg.payload {
                Err(e) => Err(e),
                Ok(r) => match self.map_job(msg.job, &r) {
                    Ok(p) => p,
                    Err(NetworkError::Stopped) => break,
                    Err(e) => Err(JobError::new(MAP_LABEL, e)),
                },
            };
            if !self.out.send(
                Message {
                    job: msg.job,
                    payload,
                },
                &self.stop,
            ) {
                break;
            }
        }
        self.inner.stop();
    }

    fn map_job(&self, job: JobId, input: &DataStoreRef) -> Result<Payload, NetworkError> {
        let fail = |e: &dyn std::fmt::Display| JobError::new(MAP_LABEL, e);
        let items = match self.registry.fetch(input) {
            Ok(Value::List(items)) => items,
            Ok(other) => return Ok(Err(fail(&format!("expected a list, got {other}")))),
            Err(e) => return Ok(Err(fail(&e))),
        };
        let item_port = self.inner.ins().pipes()[0].port().clone();
        let mut written = Vec::with_capacity(items.len());
        for item in &items {
            let sub = JobId::random();
            let cell = match self.registry.store(&item_port, item, self.task, sub) {
                Ok(cell) => cell,
                Err(e) => {
                    // Drain what was already submitted to keep the inner
                    // network aligned.
                    let _ = self.collect(&written)?;
                    return Ok(Err(fail(&e)));
                }
            };
            self.inner.write(sub, std::slice::from_ref(&cell))?;
            written.push((sub, cell));
        }
        let results = self.collect(&written)?;
        let out = results.and_then(|values| {
            self.registry
                .store(&self.output, &Value::List(values), self.task, job)
                .map_err(|e| fail(&e))
        });
        Ok(out)
    }

    /// Reads one result per submitted sub-job, in submission order.
    fn collect(
        &self,
        written: &[(JobId, DataStoreRef)],
    ) -> Result<Result<Vec<Value>, JobError>, NetworkError> {
        let mut values = Ok(Vec::with_capacity(written.len()));
        for (sub, cell) in written {
            let (got, result) = self.inner.read()?;
            if got != *sub {
                return Err(NetworkError::Misaligned {
                    expected: *sub,
                    found: got,
                });
            }
            match (result, &mut values) {
                (Ok(refs), Ok(acc)) => {
                    match self.registry.fetch(&refs[0]) {
                        Ok(v) => acc.push(v),
                        Err(e) => values = Err(JobError::new(MAP_LABEL, e)),
                    }
                    self.registry.discard(&refs[0]);
                }
                (Err(e), Ok(_)) => values = Err(e),
                (Ok(refs), Err(_)) => self.registry.discard(&refs[0]),
                (Err(_), Err(_)) => {}
            }
            // The inner circuit may pass the item cell straight through, so
            // it is only freed after the result has been fetched.
            self.registry.discard(cell);
        }
        Ok(values)
    }
}
