//! Typed dataflow circuits and their execution as Kahn process networks.
//!
//! A [`Circuit`] is built from a handful of structural combinators (identity,
//! replicate, swap, drops), user tasks and a list mapping construct, composed
//! sequentially with [`then_`] and side by side with [`beside`]. Every
//! composition is checked against the ports of the pieces being joined.
//! A finished circuit can be started as a network of threads with
//! [`start_network`], or evaluated in a single thread with
//! [`serial::run_serial`] for reference.

pub mod circuit;
pub mod datastore;
pub mod ids;
pub mod kpn;
pub mod serial;
pub mod signature;
pub mod translator;
pub mod typed;
pub mod value;

pub use circuit::{
    beside, beside_all, drop_l, drop_r, fold, function_task, id_, map_c, replicate, swap, task,
    then_, then_all, Algebra, Circuit, NodeKind, TaskBody, TaskError, TaskSpec,
};
pub use datastore::{DataStoreRef, Locator, StoreBackend, StoreError, StoreRegistry};
pub use ids::{JobId, TaskId};
pub use kpn::{
    start_network, JobError, JobResult, JobStatus, NetworkError, NetworkHandle, NetworkOptions,
};
pub use signature::{CompositionError, Port, Signature, StoreKind};
pub use translator::build_basic_network;
pub use value::{Value, ValueKind, ValueType};
