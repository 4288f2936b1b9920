//! Statically typed wrapper over [`Circuit`].
//!
//! Ports become Rust types: `P<FileStore, Vec<String>>` is a `FileStore`
//! holding a list of strings, and tuples of ports (up to eight) describe
//! multi-port signatures. Sequential composition only type-checks when the
//! output ports of the first circuit are exactly the input ports of the
//! second, so mismatches are reported by the compiler:
//!
//! ```compile_fail
//! use flowkit::typed::{function_task, CommaSepFile, FileStore, Var, P};
//!
//! let generate = function_task::<Var, (), FileStore, Vec<String>, _>("generateWords", |_| {
//!     Ok(vec!["apple".to_string()])
//! })
//! .unwrap();
//! let count = function_task::<CommaSepFile, Vec<String>, FileStore, Vec<String>, _>(
//!     "countLetters",
//!     |words| Ok(words),
//! )
//! .unwrap();
//! let _ = generate.then(&count);
//! ```
//!
//! The well-typed version compiles and yields the expected signature:
//!
//! ```
//! use flowkit::typed::{function_task, FileStore, Var};
//!
//! let generate = function_task::<Var, (), FileStore, Vec<String>, _>("generateWords", |_| {
//!     Ok(vec!["apple".to_string()])
//! })
//! .unwrap();
//! let count = function_task::<FileStore, Vec<String>, FileStore, Vec<String>, _>(
//!     "countLetters",
//!     |words| Ok(words.into_iter().map(|w| format!("{w}:{}", w.len())).collect()),
//! )
//! .unwrap();
//! let c = generate.then(&count);
//! assert_eq!(
//!     c.circuit().signature().to_string(),
//!     "[Var<Unit>] -> [FileStore<List<Str>>]"
//! );
//! ```
//!
//! Side-by-side composition nests port lists as pairs, so `(a <> b) <> c` and
//! `a <> (b <> c)` have different (but equivalent) types.

#![allow(clippy::type_complexity)]

use std::marker::PhantomData;

use crate::circuit::{self, Circuit, TaskError};
use crate::signature::{CompositionError, Port, StoreKind};
use crate::value::{Value, ValueKind};

/// A store kind known at compile time.
pub trait Store: 'static {
    fn kind() -> StoreKind;
}

macro_rules! stores {
    ($($name:ident => $ctor:ident),* $(,)?) => {$(
        #[derive(Debug, Clone, Copy)]
        pub struct $name;

        impl Store for $name {
            fn kind() -> StoreKind {
                StoreKind::$ctor()
            }
        }
    )*};
}

stores! {
    Var => var,
    FileStore => file_store,
    CsvStore => csv_store,
    CommaSepFile => comma_sep_file,
}

/// One port: a value of type `T` held in store `S`.
pub struct P<S, T>(PhantomData<fn() -> (S, T)>);

/// An ordered list of ports.
pub trait PortList: 'static {
    fn ports() -> Result<Vec<Port>, CompositionError>;
}

impl<S: Store, T: ValueKind> PortList for P<S, T> {
    fn ports() -> Result<Vec<Port>, CompositionError> {
        Ok(vec![Port::new(S::kind(), T::value_type())?])
    }
}

macro_rules! tuple_lists {
    ($($t:ident),+) => {
        impl<$($t: PortList),+> PortList for ($($t,)+) {
            fn ports() -> Result<Vec<Port>, CompositionError> {
                let mut out = Vec::new();
                $(out.extend($t::ports()?);)+
                Ok(out)
            }
        }
    };
}

tuple_lists!(A);
tuple_lists!(A, B);
tuple_lists!(A, B, C);
tuple_lists!(A, B, C, D);
tuple_lists!(A, B, C, D, E);
tuple_lists!(A, B, C, D, E, F);
tuple_lists!(A, B, C, D, E, F, G);
tuple_lists!(A, B, C, D, E, F, G, H);

/// A circuit whose signature is `I -> O`.
pub struct Typed<I, O> {
    circuit: Circuit,
    _sig: PhantomData<fn(I) -> O>,
}

impl<I, O> Clone for Typed<I, O> {
    fn clone(&self) -> Self {
        Typed::wrap(self.circuit.clone())
    }
}

impl<I, O> std::fmt::Debug for Typed<I, O> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Typed({})", self.circuit.signature())
    }
}

impl<I, O> Typed<I, O> {
    fn wrap(circuit: Circuit) -> Self {
        Typed {
            circuit,
            _sig: PhantomData,
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn into_circuit(self) -> Circuit {
        self.circuit
    }
}

impl<I: PortList, O: PortList> Typed<I, O> {
    /// Checks an untyped circuit against the signature `I -> O`.
    pub fn from_circuit(circuit: Circuit) -> Result<Self, CompositionError> {
        let (ins, outs) = (I::ports()?, O::ports()?);
        let sig = circuit.signature();
        for (found, expected) in [(sig.ins(), &ins), (sig.outs(), &outs)] {
            if found.len() != expected.len() {
                return Err(CompositionError::ArityMismatch {
                    left_outs: expected.len(),
                    right_ins: found.len(),
                });
            }
            if let Some(position) = found.iter().zip(expected).position(|(f, e)| f != e) {
                return Err(CompositionError::PortMismatch {
                    position,
                    expected: expected[position].clone(),
                    found: found[position].clone(),
                });
            }
        }
        Ok(Typed::wrap(circuit))
    }

    /// Sequential composition; only compiles when the ports line up.
    pub fn then<O2: PortList>(&self, next: &Typed<O, O2>) -> Typed<I, O2> {
        Typed::wrap(
            circuit::then_(&self.circuit, &next.circuit)
                .expect("statically matched ports always compose"),
        )
    }

    pub fn beside<I2: PortList, O2: PortList>(
        &self,
        other: &Typed<I2, O2>,
    ) -> Typed<(I, I2), (O, O2)> {
        Typed::wrap(circuit::beside(&self.circuit, &other.circuit))
    }
}

fn port<S: Store, T: ValueKind>() -> Result<Port, CompositionError> {
    Port::new(S::kind(), T::value_type())
}

pub fn id<S: Store, T: ValueKind>() -> Result<Typed<P<S, T>, P<S, T>>, CompositionError> {
    Ok(Typed::wrap(circuit::id_(port::<S, T>()?)))
}

pub fn replicate<S: Store, T: ValueKind>(
) -> Result<Typed<P<S, T>, (P<S, T>, P<S, T>)>, CompositionError> {
    Ok(Typed::wrap(circuit::replicate(port::<S, T>()?)))
}

pub fn swap<L: PortList, R: PortList>() -> Result<Typed<(L, R), (R, L)>, CompositionError> {
    let (l, r) = (single::<L>()?, single::<R>()?);
    Ok(Typed::wrap(circuit::swap(l, r)))
}

pub fn drop_l<L: PortList, R: PortList>() -> Result<Typed<(L, R), R>, CompositionError> {
    let (l, r) = (single::<L>()?, single::<R>()?);
    Ok(Typed::wrap(circuit::drop_l(l, r)))
}

pub fn drop_r<L: PortList, R: PortList>() -> Result<Typed<(L, R), L>, CompositionError> {
    let (l, r) = (single::<L>()?, single::<R>()?);
    Ok(Typed::wrap(circuit::drop_r(l, r)))
}

fn single<L: PortList>() -> Result<Port, CompositionError> {
    let mut ports = L::ports()?;
    if ports.len() != 1 {
        return Err(CompositionError::ArityMismatch {
            left_outs: 1,
            right_ins: ports.len(),
        });
    }
    Ok(ports.remove(0))
}

/// Promotes a plain function to a one-input task.
pub fn function_task<S1, A, S2, B, F>(
    name: impl Into<String>,
    f: F,
) -> Result<Typed<P<S1, A>, P<S2, B>>, CompositionError>
where
    S1: Store,
    S2: Store,
    A: ValueKind,
    B: ValueKind,
    F: Fn(A) -> Result<B, TaskError> + Send + Sync + 'static,
{
    let c = circuit::function_task(
        name,
        port::<S1, A>()?,
        port::<S2, B>()?,
        move |v: &Value| {
            let a = A::from_value(v.clone())
                .ok_or_else(|| TaskError::new(format!("unexpected input {v}")))?;
            f(a).map(ValueKind::into_value)
        },
    );
    Ok(Typed::wrap(c))
}

/// Typed `map_c`: lifts an element circuit over lists.
pub fn map<S1, S2, A, B>(
    inner: &Typed<P<Var, A>, P<Var, B>>,
) -> Result<Typed<P<S1, Vec<A>>, P<S2, Vec<B>>>, CompositionError>
where
    S1: Store,
    S2: Store,
    A: ValueKind,
    B: ValueKind,
{
    let c = circuit::map_c(&inner.circuit, port::<S1, Vec<A>>()?, port::<S2, Vec<B>>()?)?;
    Ok(Typed::wrap(c))
}
