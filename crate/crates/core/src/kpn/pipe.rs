use std::fmt;
use std::sync::Arc;

use crossbeam_channel::{select, Receiver, Sender};
use thiserror::Error;

use crate::datastore::DataStoreRef;
use crate::ids::JobId;
use crate::signature::Port;

/// A job's failure, carried along the pipes in place of a store ref.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("task `{task}` failed: {cause}")]
pub struct JobError {
    pub task: String,
    pub cause: String,
}

impl JobError {
    pub fn new(task: impl Into<String>, cause: impl fmt::Display) -> Self {
        JobError {
            task: task.into(),
            cause: cause.to_string(),
        }
    }
}

pub type Payload = Result<DataStoreRef, JobError>;

/// One unit flowing on a pipe.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub job: JobId,
    pub payload: Payload,
}

struct PipeInner {
    id: usize,
    port: Port,
    tx: Sender<Message>,
    rx: Receiver<Message>,
}

/// A FIFO channel between exactly one producer and one consumer.
#[derive(Clone)]
pub struct Pipe(Arc<PipeInner>);

impl Pipe {
    pub(crate) fn new(id: usize, port: Port, capacity: Option<usize>) -> Self {
        let (tx, rx) = match capacity {
            Some(n) => crossbeam_channel::bounded(n),
            None => crossbeam_channel::unbounded(),
        };
        Pipe(Arc::new(PipeInner { id, port, tx, rx }))
    }

    /// Sequence number within the owning network.
    pub fn id(&self) -> usize {
        self.0.id
    }

    pub fn port(&self) -> &Port {
        &self.0.port
    }

    pub fn same_pipe(&self, other: &Pipe) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Number of queued messages.
    pub fn len(&self) -> usize {
        self.0.rx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.rx.is_empty()
    }

    /// Blocks for the next message; `None` once `stop` fires.
    pub(crate) fn recv(&self, stop: &Receiver<()>) -> Option<Message> {
        select! {
            recv(self.0.rx) -> msg => msg.ok(),
            recv(stop) -> _ => None,
        }
    }

    /// Sends a message; `false` if `stop` fired first (bounded pipes only
    /// ever block).
    pub(crate) fn send(&self, msg: Message, stop: &Receiver<()>) -> bool {
        select! {
            send(self.0.tx, msg) -> res => res.is_ok(),
            recv(stop) -> _ => false,
        }
    }
}

impl fmt::Debug for Pipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}:{}", self.0.id, self.0.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot split {len} pipes at {n}")]
pub struct OutOfRange {
    pub n: usize,
    pub len: usize,
}

/// An ordered list of pipes, one per signature slot.
#[derive(Debug, Clone, Default)]
pub struct PipeList(Vec<Pipe>);

impl PipeList {
    pub fn new(pipes: Vec<Pipe>) -> Self {
        PipeList(pipes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pipes(&self) -> &[Pipe] {
        &self.0
    }

    pub fn ports(&self) -> Vec<Port> {
        self.0.iter().map(|p| p.port().clone()).collect()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.0.iter().map(Pipe::id).collect()
    }

    /// Same pipe objects in the same order.
    pub fn same_pipes(&self, other: &PipeList) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.same_pipe(b))
    }
}

/// The first `n` pipes.
pub fn take_pipes(n: usize, pl: &PipeList) -> Result<PipeList, OutOfRange> {
    if n > pl.len() {
        return Err(OutOfRange { n, len: pl.len() });
    }
    Ok(PipeList(pl.0[..n].to_vec()))
}

/// Everything after the first `n` pipes.
pub fn drop_pipes(n: usize, pl: &PipeList) -> Result<PipeList, OutOfRange> {
    if n > pl.len() {
        return Err(OutOfRange { n, len: pl.len() });
    }
    Ok(PipeList(pl.0[n..].to_vec()))
}

pub fn append_pipes(left: &PipeList, right: &PipeList) -> PipeList {
    let mut pipes = left.0.clone();
    pipes.extend(right.0.iter().cloned());
    PipeList(pipes)
}
