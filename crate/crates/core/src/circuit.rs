//! The circuit AST.
//!
//! Circuits are built only through the smart constructors in this module,
//! each of which validates the composition and caches the resulting
//! [`Signature`]. A circuit is immutable and cheap to clone.
//!
//! Interpretations are written as an [`Algebra`] and run with [`fold`], which
//! visits the tree bottom-up, leftmost child first, calling exactly one
//! handler per node. Handlers may fail; the first failure aborts the fold.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::signature::{
    compose_beside, compose_then, CompositionError, Port, Signature, StoreKind,
};
use crate::value::{Value, ValueType};

/// Failure raised by a task body.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct TaskError(pub String);

impl TaskError {
    pub fn new(msg: impl Into<String>) -> Self {
        TaskError(msg.into())
    }
}

/// Task body: receives the fetched input values in port order.
pub type TaskBody = Arc<dyn Fn(&[Value]) -> Result<Value, TaskError> + Send + Sync>;

/// A named unit of work with typed inputs and one typed output.
pub struct TaskSpec {
    name: String,
    ins: Vec<Port>,
    out: Port,
    body: TaskBody,
}

impl TaskSpec {
    pub fn new<F>(name: impl Into<String>, ins: Vec<Port>, out: Port, body: F) -> Self
    where
        F: Fn(&[Value]) -> Result<Value, TaskError> + Send + Sync + 'static,
    {
        TaskSpec {
            name: name.into(),
            ins,
            out,
            body: Arc::new(body),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ins(&self) -> &[Port] {
        &self.ins
    }

    pub fn out(&self) -> &Port {
        &self.out
    }

    pub fn run(&self, inputs: &[Value]) -> Result<Value, TaskError> {
        (self.body)(inputs)
    }
}

impl fmt::Debug for TaskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaskSpec")
            .field("name", &self.name)
            .field("ins", &self.ins)
            .field("out", &self.out)
            .finish_non_exhaustive()
    }
}

#[derive(Debug)]
pub enum NodeKind {
    Id(Port),
    Replicate(Port),
    Swap(Port, Port),
    DropL(Port, Port),
    DropR(Port, Port),
    Then(Circuit, Circuit),
    Beside(Circuit, Circuit),
    Task(Arc<TaskSpec>),
    Map {
        inner: Circuit,
        input: Port,
        output: Port,
    },
}

#[derive(Debug)]
struct Node {
    kind: NodeKind,
    signature: Signature,
}

/// A validated circuit.
#[derive(Clone)]
pub struct Circuit(Arc<Node>);

impl Circuit {
    fn from_parts(kind: NodeKind, signature: Signature) -> Self {
        let c = Circuit(Arc::new(Node { kind, signature }));
        debug_assert_eq!(
            signature_of(&c).as_ref(),
            Ok(c.signature()),
            "cached signature drifted"
        );
        c
    }

    pub fn kind(&self) -> &NodeKind {
        &self.0.kind
    }

    pub fn signature(&self) -> &Signature {
        &self.0.signature
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Circuit) -> Result<Circuit, CompositionError> {
        then_(self, next)
    }

    /// `self` placed beside `other`.
    pub fn beside(&self, other: &Circuit) -> Circuit {
        beside(self, other)
    }

    /// Pointer identity of the underlying node.
    pub fn same_node(&self, other: &Circuit) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        match self.kind() {
            NodeKind::Then(a, b) | NodeKind::Beside(a, b) => 1 + a.node_count() + b.node_count(),
            NodeKind::Map { inner, .. } => 1 + inner.node_count(),
            _ => 1,
        }
    }

    /// Text rendering of the wiring tree, one node per line.
    pub fn render_tree(&self) -> String {
        let mut out = String::new();
        render(self, 0, &mut out);
        out
    }
}

fn render(c: &Circuit, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let label = match c.kind() {
        NodeKind::Id(_) => "id".to_string(),
        NodeKind::Replicate(_) => "replicate".to_string(),
        NodeKind::Swap(..) => "swap".to_string(),
        NodeKind::DropL(..) => "dropL".to_string(),
        NodeKind::DropR(..) => "dropR".to_string(),
        NodeKind::Then(..) => "then".to_string(),
        NodeKind::Beside(..) => "beside".to_string(),
        NodeKind::Task(t) => format!("task {}", t.name()),
        NodeKind::Map { .. } => "mapC".to_string(),
    };
    out.push_str(&format!("{pad}{label} :: {}\n", c.signature()));
    match c.kind() {
        NodeKind::Then(a, b) | NodeKind::Beside(a, b) => {
            render(a, depth + 1, out);
            render(b, depth + 1, out);
        }
        NodeKind::Map { inner, .. } => render(inner, depth + 1, out),
        _ => {}
    }
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Circuit({})", self.signature())
    }
}

impl PartialEq for Circuit {
    /// Structural equality; tasks compare by identity.
    fn eq(&self, other: &Self) -> bool {
        use NodeKind::*;
        if self.same_node(other) {
            return true;
        }
        match (self.kind(), other.kind()) {
            (Id(a), Id(b)) | (Replicate(a), Replicate(b)) => a == b,
            (Swap(a, b), Swap(c, d)) | (DropL(a, b), DropL(c, d)) | (DropR(a, b), DropR(c, d)) => {
                a == c && b == d
            }
            (Then(a, b), Then(c, d)) | (Beside(a, b), Beside(c, d)) => a == c && b == d,
            (Task(a), Task(b)) => Arc::ptr_eq(a, b),
            (
                Map {
                    inner: a,
                    input: i1,
                    output: o1,
                },
                Map {
                    inner: b,
                    input: i2,
                    output: o2,
                },
            ) => a == b && i1 == i2 && o1 == o2,
            _ => false,
        }
    }
}

fn sig(ins: Vec<Port>, outs: Vec<Port>) -> Signature {
    Signature::new(ins, outs).expect("constructor signatures are never empty")
}

/// Passes one value through unchanged.
pub fn id_(port: Port) -> Circuit {
    Circuit::from_parts(
        NodeKind::Id(port.clone()),
        sig(vec![port.clone()], vec![port]),
    )
}

/// Duplicates one value onto two outputs.
pub fn replicate(port: Port) -> Circuit {
    let s = sig(vec![port.clone()], vec![port.clone(), port.clone()]);
    Circuit::from_parts(NodeKind::Replicate(port), s)
}

/// Exchanges two values.
pub fn swap(left: Port, right: Port) -> Circuit {
    let s = sig(
        vec![left.clone(), right.clone()],
        vec![right.clone(), left.clone()],
    );
    Circuit::from_parts(NodeKind::Swap(left, right), s)
}

/// Discards the left value, keeping the right.
pub fn drop_l(left: Port, right: Port) -> Circuit {
    let s = sig(vec![left.clone(), right.clone()], vec![right.clone()]);
    Circuit::from_parts(NodeKind::DropL(left, right), s)
}

/// Discards the right value, keeping the left.
pub fn drop_r(left: Port, right: Port) -> Circuit {
    let s = sig(vec![left.clone(), right.clone()], vec![left.clone()]);
    Circuit::from_parts(NodeKind::DropR(left, right), s)
}

pub fn then_(first: &Circuit, second: &Circuit) -> Result<Circuit, CompositionError> {
    let s = compose_then(first.signature(), second.signature())?;
    Ok(Circuit::from_parts(
        NodeKind::Then(first.clone(), second.clone()),
        s,
    ))
}

pub fn beside(left: &Circuit, right: &Circuit) -> Circuit {
    let s = compose_beside(left.signature(), right.signature());
    Circuit::from_parts(NodeKind::Beside(left.clone(), right.clone()), s)
}

/// Chains circuits left to right.
pub fn then_all<'a>(
    circuits: impl IntoIterator<Item = &'a Circuit>,
) -> Result<Circuit, CompositionError> {
    let mut it = circuits.into_iter();
    let first = it.next().ok_or(CompositionError::EmptySignature)?.clone();
    it.try_fold(first, |acc, c| then_(&acc, c))
}

/// Places circuits side by side, left to right.
pub fn beside_all<'a>(
    circuits: impl IntoIterator<Item = &'a Circuit>,
) -> Result<Circuit, CompositionError> {
    let mut it = circuits.into_iter();
    let first = it.next().ok_or(CompositionError::EmptySignature)?.clone();
    Ok(it.fold(first, |acc, c| beside(&acc, c)))
}

pub fn task(spec: TaskSpec) -> Result<Circuit, CompositionError> {
    let s = Signature::new(spec.ins.clone(), vec![spec.out.clone()])?;
    Ok(Circuit::from_parts(NodeKind::Task(Arc::new(spec)), s))
}

/// Promotes a one-argument function to a task.
pub fn function_task<F>(name: impl Into<String>, input: Port, output: Port, f: F) -> Circuit
where
    F: Fn(&Value) -> Result<Value, TaskError> + Send + Sync + 'static,
{
    let spec = TaskSpec::new(name, vec![input], output, move |vs: &[Value]| f(&vs[0]));
    task(spec).expect("single-port task has a valid signature")
}

/// Maps `inner` over every element of a list, preserving order.
///
/// `inner` must take one `Var` input of type `a` and produce one `Var` output
/// of type `b`; `input` must carry `List<a>` and `output` `List<b>`.
pub fn map_c(inner: &Circuit, input: Port, output: Port) -> Result<Circuit, CompositionError> {
    let s = inner.signature();
    let (a, b) = match (s.ins(), s.outs()) {
        ([i], [o]) if i.store().name() == StoreKind::VAR && o.store().name() == StoreKind::VAR => {
            (i.value().clone(), o.value().clone())
        }
        _ => {
            return Err(CompositionError::InnerShape(format!(
                "expected [Var<a>] -> [Var<b>], got {s}"
            )))
        }
    };
    let want_in = Port::new(input.store().clone(), ValueType::list(a))?;
    if want_in != input {
        return Err(CompositionError::PortMismatch {
            position: 0,
            expected: want_in,
            found: input,
        });
    }
    let want_out = Port::new(output.store().clone(), ValueType::list(b))?;
    if want_out != output {
        return Err(CompositionError::PortMismatch {
            position: 0,
            expected: want_out,
            found: output,
        });
    }
    let s = sig(vec![input.clone()], vec![output.clone()]);
    Ok(Circuit::from_parts(
        NodeKind::Map {
            inner: inner.clone(),
            input,
            output,
        },
        s,
    ))
}

/// Recomputes a circuit's signature from its structure, ignoring the cache
/// on every node.
pub fn signature_of(c: &Circuit) -> Result<Signature, CompositionError> {
    match c.kind() {
        NodeKind::Id(p) => Signature::new(vec![p.clone()], vec![p.clone()]),
        NodeKind::Replicate(p) => Signature::new(vec![p.clone()], vec![p.clone(), p.clone()]),
        NodeKind::Swap(p, q) => {
            Signature::new(vec![p.clone(), q.clone()], vec![q.clone(), p.clone()])
        }
        NodeKind::DropL(p, q) => Signature::new(vec![p.clone(), q.clone()], vec![q.clone()]),
        NodeKind::DropR(p, q) => Signature::new(vec![p.clone(), q.clone()], vec![p.clone()]),
        NodeKind::Then(a, b) => compose_then(&signature_of(a)?, &signature_of(b)?),
        NodeKind::Beside(a, b) => Ok(compose_beside(&signature_of(a)?, &signature_of(b)?)),
        NodeKind::Task(t) => Signature::new(t.ins.clone(), vec![t.out.clone()]),
        NodeKind::Map {
            inner,
            input,
            output,
        } => {
            signature_of(inner)?;
            Signature::new(vec![input.clone()], vec![output.clone()])
        }
    }
}

/// One handler per node kind. Every handler receives the node being folded;
/// composite handlers also receive the carriers of their children.
pub trait Algebra {
    type Carrier;
    type Error;

    fn id(&mut self, node: &Circuit, port: &Port) -> Result<Self::Carrier, Self::Error>;
    fn replicate(&mut self, node: &Circuit, port: &Port) -> Result<Self::Carrier, Self::Error>;
    fn swap(
        &mut self,
        node: &Circuit,
        left: &Port,
        right: &Port,
    ) -> Result<Self::Carrier, Self::Error>;
    fn drop_l(
        &mut self,
        node: &Circuit,
        left: &Port,
        right: &Port,
    ) -> Result<Self::Carrier, Self::Error>;
    fn drop_r(
        &mut self,
        node: &Circuit,
        left: &Port,
        right: &Port,
    ) -> Result<Self::Carrier, Self::Error>;
    fn task(&mut self, node: &Circuit, spec: &Arc<TaskSpec>) -> Result<Self::Carrier, Self::Error>;
    fn map(&mut self, node: &Circuit, inner: Self::Carrier) -> Result<Self::Carrier, Self::Error>;
    fn then(
        &mut self,
        node: &Circuit,
        first: Self::Carrier,
        second: Self::Carrier,
    ) -> Result<Self::Carrier, Self::Error>;
    fn beside(
        &mut self,
        node: &Circuit,
        left: Self::Carrier,
        right: Self::Carrier,
    ) -> Result<Self::Carrier, Self::Error>;
}

/// Bottom-up fold of `c` with `alg`.
pub fn fold<A: Algebra + ?Sized>(c: &Circuit, alg: &mut A) -> Result<A::Carrier, A::Error> {
    match c.kind() {
        NodeKind::Id(p) => alg.id(c, p),
        NodeKind::Replicate(p) => alg.replicate(c, p),
        NodeKind::Swap(p, q) => alg.swap(c, p, q),
        NodeKind::DropL(p, q) => alg.drop_l(c, p, q),
        NodeKind::DropR(p, q) => alg.drop_r(c, p, q),
        NodeKind::Task(t) => alg.task(c, t),
        NodeKind::Map { inner, .. } => {
            let inner = fold(inner, alg)?;
            alg.map(c, inner)
        }
        NodeKind::Then(a, b) => {
            let a = fold(a, alg)?;
            let b = fold(b, alg)?;
            alg.then(c, a, b)
        }
        NodeKind::Beside(a, b) => {
            let a = fold(a, alg)?;
            let b = fold(b, alg)?;
            alg.beside(c, a, b)
        }
    }
}
