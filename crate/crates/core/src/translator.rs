//! Translation of a circuit into a running network.
//!
//! The circuit is folded into a [`NetworkBuilder`]: a deferred step that,
//! given the network accumulated so far, extends it with one more layer and
//! returns the new network. Nothing is spawned during the fold itself; the
//! nested builders run when the root builder is applied to the initial
//! network, whose frontier is its own input pipes.
//!
//! The frontier of a [`PartialNetwork`] always carries the output ports of
//! the circuit prefix folded so far (checked in debug builds after every
//! step).

use std::collections::HashSet;
use std::sync::Arc;

use crossbeam_channel::Receiver;

use crate::circuit::{fold, Algebra, Circuit, NodeKind, TaskSpec};
use crate::datastore::StoreRegistry;
use crate::ids::TaskId;
use crate::kpn::{
    append_pipes, drop_pipes, run_drop, run_replicate, run_task, take_pipes, MapWorker,
    NetworkError, NetworkHandle, NetworkOptions, Pipe, PipeList, Side, Topology, Worker,
    WorkerInfo, WorkerKind,
};
use crate::signature::{Port, Signature};

/// A network under construction.
#[derive(Debug, Clone)]
pub struct PartialNetwork {
    /// Workers spawned so far, without duplicates.
    pub workers: Vec<TaskId>,
    pub ins: PipeList,
    pub frontier: PipeList,
}

/// Shared state for one translation: the registry, pipe numbering and the
/// handles of every spawned worker.
pub struct BuildContext {
    registry: Arc<StoreRegistry>,
    options: NetworkOptions,
    stop: Receiver<()>,
    next_pipe: usize,
    spawned: Vec<Worker>,
    used_ids: HashSet<TaskId>,
}

pub type NetworkBuilder =
    Box<dyn FnOnce(&mut BuildContext, PartialNetwork) -> Result<PartialNetwork, NetworkError>>;

impl BuildContext {
    fn new(registry: Arc<StoreRegistry>, options: NetworkOptions, stop: Receiver<()>) -> Self {
        BuildContext {
            registry,
            options,
            stop,
            next_pipe: 0,
            spawned: Vec::new(),
            used_ids: HashSet::new(),
        }
    }

    fn new_pipe(&mut self, port: Port) -> Pipe {
        let id = self.next_pipe;
        self.next_pipe += 1;
        Pipe::new(id, port, self.options.max_queue)
    }

    /// A task id not used by any worker of this network.
    fn unused_task_id(&mut self) -> TaskId {
        loop {
            let id = TaskId::random();
            if self.used_ids.insert(id) {
                return id;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn spawn(
        &mut self,
        id: TaskId,
        kind: WorkerKind,
        label: &str,
        inputs: &PipeList,
        outputs: &[&Pipe],
        inner: Option<Topology>,
        body: impl FnOnce() + Send + 'static,
    ) {
        let info = WorkerInfo {
            id,
            ordinal: self.spawned.len(),
            kind,
            label: label.to_string(),
            inputs: inputs.ids(),
            outputs: outputs.iter().map(|p| p.id()).collect(),
            inner: inner.map(Box::new),
        };
        let handle = std::thread::Builder::new()
            .name(format!("{}:{label}", kind.as_str()))
            .spawn(body)
            .expect("failed to spawn worker thread");
        self.spawned.push(Worker { info, handle });
    }
}

fn with_worker(mut net: PartialNetwork, id: TaskId, frontier: PipeList) -> PartialNetwork {
    net.workers.push(id);
    net.frontier = frontier;
    net
}

fn expect_width(net: &PartialNetwork, n: usize, what: &str) {
    assert_eq!(
        net.frontier.len(),
        n,
        "{what} applied to a frontier of width {}",
        net.frontier.len()
    );
}

/// `[c1, c2]` becomes `[c2, c1]`; no workers are added.
pub fn alg_swap(net: PartialNetwork) -> PartialNetwork {
    expect_width(&net, 2, "swap");
    let pipes = net.frontier.pipes();
    let frontier = PipeList::new(vec![pipes[1].clone(), pipes[0].clone()]);
    PartialNetwork { frontier, ..net }
}

/// Spawns a fan-out worker copying every message onto two fresh pipes.
pub fn alg_replicate(ctx: &mut BuildContext, net: PartialNetwork) -> PartialNetwork {
    expect_width(&net, 1, "replicate");
    let input = net.frontier.pipes()[0].clone();
    let left = ctx.new_pipe(input.port().clone());
    let right = ctx.new_pipe(input.port().clone());
    let id = ctx.unused_task_id();
    let (l, r, stop) = (left.clone(), right.clone(), ctx.stop.clone());
    ctx.spawn(
        id,
        WorkerKind::Replicate,
        "replicate",
        &net.frontier,
        &[&left, &right],
        None,
        move || run_replicate(input, l, r, stop),
    );
    with_worker(net, id, PipeList::new(vec![left, right]))
}

/// Spawns a drain worker that consumes both pipes and forwards only the kept
/// side. A failure on the dropped side still fails the job.
pub fn alg_drop(ctx: &mut BuildContext, side: Side, net: PartialNetwork) -> PartialNetwork {
    expect_width(&net, 2, "drop");
    let left = net.frontier.pipes()[0].clone();
    let right = net.frontier.pipes()[1].clone();
    let kept = match side {
        Side::Left => right.port().clone(),
        Side::Right => left.port().clone(),
    };
    let out = ctx.new_pipe(kept);
    let id = ctx.unused_task_id();
    let (o, stop) = (out.clone(), ctx.stop.clone());
    let label = match side {
        Side::Left => "dropL",
        Side::Right => "dropR",
    };
    ctx.spawn(
        id,
        WorkerKind::Drop,
        label,
        &net.frontier,
        &[&out],
        None,
        move || run_drop(side, left, right, o, stop),
    );
    with_worker(net, id, PipeList::new(vec![out]))
}

/// Spawns the task's executor, consuming the whole frontier.
pub fn alg_task(
    ctx: &mut BuildContext,
    spec: Arc<TaskSpec>,
    net: PartialNetwork,
) -> PartialNetwork {
    expect_width(&net, spec.ins().len(), "task");
    let out = ctx.new_pipe(spec.out().clone());
    let id = ctx.unused_task_id();
    let (ins, o, registry, stop) = (
        net.frontier.clone(),
        out.clone(),
        ctx.registry.clone(),
        ctx.stop.clone(),
    );
    let label = spec.name().to_string();
    ctx.spawn(
        id,
        WorkerKind::Task,
        &label,
        &net.frontier,
        &[&out],
        None,
        move || run_task(spec, id, ins, o, registry, stop),
    );
    with_worker(net, id, PipeList::new(vec![out]))
}

/// Spawns a map worker owning a private network built from `inner`.
pub fn alg_map(
    ctx: &mut BuildContext,
    inner: NetworkBuilder,
    inner_sig: &Signature,
    output: Port,
    net: PartialNetwork,
) -> Result<PartialNetwork, NetworkError> {
    expect_width(&net, 1, "map");
    let inner_net = finish(
        BuildContext::new(ctx.registry.clone(), ctx.options, ctx.stop.clone()),
        inner_sig,
        inner,
        None,
    )?;
    let out = ctx.new_pipe(output.clone());
    let id = ctx.unused_task_id();
    let topology = inner_net.topology().clone();
    let worker = MapWorker {
        task: id,
        input: net.frontier.pipes()[0].clone(),
        out: out.clone(),
        output,
        inner: inner_net,
        registry: ctx.registry.clone(),
        stop: ctx.stop.clone(),
    };
    ctx.spawn(
        id,
        WorkerKind::Map,
        crate::kpn::MAP_LABEL,
        &net.frontier,
        &[&out],
        Some(topology),
        move || worker.run(),
    );
    Ok(with_worker(net, id, PipeList::new(vec![out])))
}

/// Sequential composition of builders: apply `first`, then `second` to its
/// result.
pub fn alg_then(first: NetworkBuilder, second: NetworkBuilder) -> NetworkBuilder {
    Box::new(move |ctx, net| {
        let net = first(ctx, net)?;
        second(ctx, net)
    })
}

/// Splits the frontier after `n_left` pipes. Both halves share the original
/// inputs and worker list.
pub fn split_network(
    n_left: usize,
    net: &PartialNetwork,
) -> Result<(PartialNetwork, PartialNetwork), crate::kpn::OutOfRange> {
    let left = PartialNetwork {
        workers: net.workers.clone(),
        ins: net.ins.clone(),
        frontier: take_pipes(n_left, &net.frontier)?,
    };
    let right = PartialNetwork {
        workers: net.workers.clone(),
        ins: net.ins.clone(),
        frontier: drop_pipes(n_left, &net.frontier)?,
    };
    Ok((left, right))
}

/// Joins two halves produced by [`split_network`]: frontiers are appended and
/// the worker lists merged with duplicates removed.
pub fn join_network(left: PartialNetwork, right: PartialNetwork) -> PartialNetwork {
    assert!(
        left.ins.same_pipes(&right.ins),
        "joined networks must share their inputs"
    );
    let mut workers = left.workers;
    for id in right.workers {
        if !workers.contains(&id) {
            workers.push(id);
        }
    }
    PartialNetwork {
        workers,
        ins: left.ins,
        frontier: append_pipes(&left.frontier, &right.frontier),
    }
}

/// Side-by-side composition of builders; `n_left` is the number of inputs of
/// the left circuit.
pub fn alg_beside(left: NetworkBuilder, right: NetworkBuilder, n_left: usize) -> NetworkBuilder {
    Box::new(move |ctx, net| {
        let (l, r) = split_network(n_left, &net).expect("beside split within frontier");
        let l = left(ctx, l)?;
        let r = right(ctx, r)?;
        Ok(join_network(l, r))
    })
}

fn checked(sig: &Signature, builder: NetworkBuilder) -> NetworkBuilder {
    if cfg!(debug_assertions) {
        let outs = sig.outs().to_vec();
        Box::new(move |ctx, net| {
            let net = builder(ctx, net)?;
            assert_eq!(
                net.frontier.ports(),
                outs,
                "frontier drifted from signature"
            );
            Ok(net)
        })
    } else {
        builder
    }
}

/// Folds circuits into builders.
struct BuildAlgebra;

impl Algebra for BuildAlgebra {
    type Carrier = NetworkBuilder;
    type Error = NetworkError;

    fn id(&mut self, node: &Circuit, _: &Port) -> Result<NetworkBuilder, NetworkError> {
        Ok(checked(node.signature(), Box::new(|_, net| Ok(net))))
    }

    fn replicate(&mut self, node: &Circuit, _: &Port) -> Result<NetworkBuilder, NetworkError> {
        Ok(checked(
            node.signature(),
            Box::new(|ctx, net| Ok(alg_replicate(ctx, net))),
        ))
    }

    fn swap(&mut self, node: &Circuit, _: &Port, _: &Port) -> Result<NetworkBuilder, NetworkError> {
        Ok(checked(
            node.signature(),
            Box::new(|_, net| Ok(alg_swap(net))),
        ))
    }

    fn drop_l(
        &mut self,
        node: &Circuit,
        _: &Port,
        _: &Port,
    ) -> Result<NetworkBuilder, NetworkError> {
        Ok(checked(
            node.signature(),
            Box::new(|ctx, net| Ok(alg_drop(ctx, Side::Left, net))),
        ))
    }

    fn drop_r(
        &mut self,
        node: &Circuit,
        _: &Port,
        _: &Port,
    ) -> Result<NetworkBuilder, NetworkError> {
        Ok(checked(
            node.signature(),
            Box::new(|ctx, net| Ok(alg_drop(ctx, Side::Right, net))),
        ))
    }

    fn task(
        &mut self,
        node: &Circuit,
        spec: &Arc<TaskSpec>,
    ) -> Result<NetworkBuilder, NetworkError> {
        let spec = spec.clone();
        Ok(checked(
            node.signature(),
            Box::new(move |ctx, net| Ok(alg_task(ctx, spec, net))),
        ))
    }

    fn map(
        &mut self,
        node: &Circuit,
        inner: NetworkBuilder,
    ) -> Result<NetworkBuilder, NetworkError> {
        let NodeKind::Map {
            inner: inner_circuit,
            output,
            ..
        } = node.kind()
        else {
            unreachable!("map handler called on another node kind")
        };
        let inner_sig = inner_circuit.signature().clone();
        let output = output.clone();
        Ok(checked(
            node.signature(),
            Box::new(move |ctx, net| alg_map(ctx, inner, &inner_sig, output, net)),
        ))
    }

    fn then(
        &mut self,
        node: &Circuit,
        first: NetworkBuilder,
        second: NetworkBuilder,
    ) -> Result<NetworkBuilder, NetworkError> {
        Ok(checked(node.signature(), alg_then(first, second)))
    }

    fn beside(
        &mut self,
        node: &Circuit,
        left: NetworkBuilder,
        right: NetworkBuilder,
    ) -> Result<NetworkBuilder, NetworkError> {
        let NodeKind::Beside(l, _) = node.kind() else {
            unreachable!("beside handler called on another node kind")
        };
        let n_left = l.signature().n_ins();
        Ok(checked(node.signature(), alg_beside(left, right, n_left)))
    }
}

/// Every port in the circuit must name a registered kind that supports its
/// value type.
fn check_ports(c: &Circuit, registry: &StoreRegistry) -> Result<(), NetworkError> {
    let sig = c.signature();
    for p in sig.ins().iter().chain(sig.outs()) {
        registry.check_port(p)?;
    }
    match c.kind() {
        NodeKind::Then(a, b) | NodeKind::Beside(a, b) => {
            check_ports(a, registry)?;
            check_ports(b, registry)
        }
        NodeKind::Map { inner, .. } => check_ports(inner, registry),
        _ => Ok(()),
    }
}

/// The network every translation starts from: one fresh pipe per input slot,
/// serving as both inputs and frontier.
pub fn initial_network(ctx: &mut BuildContext, ports: &[Port]) -> PartialNetwork {
    let ins = PipeList::new(ports.iter().map(|p| ctx.new_pipe(p.clone())).collect());
    PartialNetwork {
        workers: Vec::new(),
        frontier: ins.clone(),
        ins,
    }
}

fn finish(
    mut ctx: BuildContext,
    sig: &Signature,
    builder: NetworkBuilder,
    stop_tx: Option<crossbeam_channel::Sender<()>>,
) -> Result<NetworkHandle, NetworkError> {
    let initial = initial_network(&mut ctx, sig.ins());
    let net = builder(&mut ctx, initial)?;
    debug_assert_eq!(net.workers.len(), ctx.spawned.len());
    Ok(NetworkHandle::assemble(
        ctx.registry,
        net.ins,
        net.frontier,
        net.workers,
        ctx.spawned,
        stop_tx,
        ctx.stop,
    ))
}

/// Translates `circuit` into a running network.
pub fn build_basic_network(
    circuit: &Circuit,
    registry: Arc<StoreRegistry>,
    options: NetworkOptions,
) -> Result<NetworkHandle, NetworkError> {
    check_ports(circuit, &registry)?;
    let builder = fold(circuit, &mut BuildAlgebra)?;
    let (stop_tx, stop_rx) = crossbeam_channel::bounded(0);
    let ctx = BuildContext::new(registry, options, stop_rx);
    finish(ctx, circuit.signature(), builder, Some(stop_tx))
}
