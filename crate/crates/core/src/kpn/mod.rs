//! Kahn-process-network runtime.
//!
//! Every task, map and auxiliary fan-out/drain node runs on its own thread.
//! Threads communicate only through [`Pipe`]s: FIFO queues with exactly one
//! producer and one consumer. Each message carries the job id it belongs to,
//! and every producer writes jobs in the order it received them, so the k-th
//! message on any pipe belongs to the k-th job written. A failed job travels
//! as a [`JobError`] payload; it never stops a worker.

mod network;
mod pipe;
mod worker;

use std::fmt::Write as _;

use crate::signature::Port;

pub use network::{
    start_network, JobResult, JobStatus, NetworkError, NetworkHandle, NetworkOptions,
};
pub use pipe::{
    append_pipes, drop_pipes, take_pipes, JobError, Message, OutOfRange, Payload, Pipe, PipeList,
};
pub use worker::{invoke_task, Side, WorkerInfo, WorkerKind};

pub(crate) use worker::{run_drop, run_replicate, run_task, MapWorker, Worker, MAP_LABEL};

/// Static wiring of a network: which worker reads and writes which pipe.
#[derive(Debug, Clone)]
pub struct Topology {
    pub ins: Vec<(usize, Port)>,
    pub workers: Vec<WorkerInfo>,
    pub outs: Vec<(usize, Port)>,
}

impl Topology {
    /// Deterministic adjacency-list rendering. Pipes are numbered in creation
    /// order, workers in spawn order; map workers list their private inner
    /// network indented below them.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        let slots = |ps: &[(usize, Port)]| {
            ps.iter()
                .map(|(id, port)| format!("p{id}:{port}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let pipes = |ids: &[usize]| {
            ids.iter()
                .map(|id| format!("p{id}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "{pad}ins: {}", slots(&self.ins));
        for w in &self.workers {
            let _ = writeln!(
                out,
                "{pad}w{} {} {}: {} -> {}",
                w.ordinal,
                w.kind.as_str(),
                w.label,
                pipes(&w.inputs),
                pipes(&w.outputs)
            );
            if let Some(inner) = &w.inner {
                inner.render_into(out, depth + 1);
            }
        }
        let _ = writeln!(out, "{pad}outs: {}", slots(&self.outs));
    }
}
