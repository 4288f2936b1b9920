//! Sequential reference interpreter.
//!
//! Values are fed through the circuit by structural recursion on a single
//! thread. Failures are tracked per slot exactly as the network carries them
//! per pipe, so both paths agree on values and on error verdicts.

pub mod gen;
pub mod laws;

use std::sync::Arc;

use crate::circuit::{Circuit, NodeKind};
use crate::datastore::StoreRegistry;
use crate::ids::{JobId, TaskId};
use crate::kpn::{invoke_task, start_network, JobError};
use crate::signature::Port;
use crate::value::Value;

/// Values paired with the ports they travel on.
pub type ValueVector = Vec<(Port, Value)>;

/// One slot's content: a value, or the failure that replaced it.
pub type Slot = Result<Value, JobError>;

/// Runs `c` on one job's inputs. The first failing slot of the outputs, in
/// slot order, becomes the job's error.
///
/// # Panics
///
/// If `inputs` does not match the circuit's input ports.
pub fn run_serial(c: &Circuit, inputs: ValueVector) -> Result<ValueVector, JobError> {
    let sig = c.signature();
    let ports: Vec<&Port> = inputs.iter().map(|(p, _)| p).collect();
    assert!(
        ports.len() == sig.n_ins() && ports.iter().zip(sig.ins()).all(|(a, b)| *a == b),
        "inputs do not match {sig}"
    );
    let slots = eval_slots(c, inputs.into_iter().map(|(_, v)| Ok(v)).collect());
    let values = slots.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(sig.outs().iter().cloned().zip(values).collect())
}

/// Convenience form of [`run_serial`] over bare values.
pub fn run_serial_values(c: &Circuit, inputs: Vec<Value>) -> Result<Vec<Value>, JobError> {
    let vv = c.signature().ins().iter().cloned().zip(inputs).collect();
    run_serial(c, vv).map(|out| out.into_iter().map(|(_, v)| v).collect())
}

/// First failure in slot order, else every value.
fn merge(slots: Vec<Slot>) -> Result<Vec<Value>, JobError> {
    slots.into_iter().collect()
}

/// Evaluates `c` slot by slot without collapsing failures.
pub fn eval_slots(c: &Circuit, mut ins: Vec<Slot>) -> Vec<Slot> {
    match c.kind() {
        NodeKind::Id(_) => ins,
        NodeKind::Replicate(_) => {
            let x = ins.pop().expect("replicate takes one slot");
            vec![x.clone(), x]
        }
        NodeKind::Swap(..) => {
            ins.swap(0, 1);
            ins
        }
        NodeKind::DropL(..) => vec![merge(ins).map(|mut v| v.remove(1))],
        NodeKind::DropR(..) => vec![merge(ins).map(|mut v| v.remove(0))],
        NodeKind::Task(spec) => vec![merge(ins).and_then(|vs| invoke_task(spec, &vs))],
        NodeKind::Map { inner, .. } => {
            let x = ins.pop().expect("map takes one slot");
            vec![x.and_then(|list| map_list(inner, list))]
        }
        NodeKind::Then(a, b) => eval_slots(b, eval_slots(a, ins)),
        NodeKind::Beside(a, b) => {
            let right = ins.split_off(a.signature().n_ins());
            let mut out = eval_slots(a, ins);
            out.extend(eval_slots(b, right));
            out
        }
    }
}

fn map_list(inner: &Circuit, list: Value) -> Result<Value, JobError> {
    let items = list.into_list().expect("map input conforms to a list type");
    items
        .into_iter()
        .map(|item| {
            let mut out = eval_slots(inner, vec![Ok(item)]);
            out.pop().expect("map inner has one output")
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Value::List)
}

/// Streams every input vector through a network built from `c` and checks
/// each job's result against [`run_serial_values`]: same values on success,
/// same failing task and cause on error. Returns a description of the first
/// disagreement.
pub fn compare_with_network(
    c: &Circuit,
    jobs: &[Vec<Value>],
    registry: Arc<StoreRegistry>,
) -> Result<(), String> {
    let net = start_network(c, registry.clone()).map_err(|e| e.to_string())?;
    let owner = TaskId::random();
    let mut written = Vec::with_capacity(jobs.len());
    for xs in jobs {
        let job = JobId::random();
        let refs = c
            .signature()
            .ins()
            .iter()
            .zip(xs)
            .map(|(p, v)| registry.store(p, v, owner, job))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        net.write(job, &refs).map_err(|e| e.to_string())?;
        written.push(job);
    }
    for (job, xs) in written.into_iter().zip(jobs) {
        let (got, result) = net.read().map_err(|e| e.to_string())?;
        if got != job {
            return Err(format!("read job {got}, expected {job}"));
        }
        let kpn = result.map(|refs| {
            refs.iter()
                .map(|r| registry.fetch(r).expect("output store is readable"))
                .collect::<Vec<_>>()
        });
        let serial = run_serial_values(c, xs.clone());
        if kpn != serial {
            return Err(format!(
                "inputs {xs:?}: network gave {kpn:?}, serial gave {serial:?}\n{}",
                c.render_tree()
            ));
        }
    }
    net.stop();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{drop_l, function_task, map_c, replicate, swap, then_, TaskError};
    use crate::value::ValueType;

    fn int() -> Port {
        Port::var(ValueType::Int)
    }

    #[test]
    fn swap_reorders_a_pair() {
        let s = Port::var(ValueType::Str);
        let c = swap(int(), s.clone());
        let out = run_serial(
            &c,
            vec![(int(), Value::Int(1)), (s.clone(), Value::str("a"))],
        )
        .unwrap();
        assert_eq!(out, vec![(s, Value::str("a")), (int(), Value::Int(1))]);
    }

    #[test]
    fn count_letters_body() {
        let words = Port::var(ValueType::list(ValueType::Str));
        let count = function_task(
            "countLetters",
            Port::var(ValueType::Str),
            Port::var(ValueType::Str),
            |w| {
                let w = w.as_str().unwrap();
                Ok(Value::str(format!("{w}:{}", w.chars().count())))
            },
        );
        let c = map_c(&count, words.clone(), words).unwrap();
        let out = run_serial_values(&c, vec![Value::List(vec![Value::str("apple")])]).unwrap();
        assert_eq!(out, vec![Value::List(vec![Value::str("apple:5")])]);
    }

    #[test]
    fn dropped_failures_dominate() {
        let bad = function_task("bad", int(), int(), |_| Err(TaskError::new("no")));
        let c = then_(
            &replicate(int()),
            &crate::circuit::beside(&bad, &crate::circuit::id_(int())),
        )
        .unwrap();
        let c = then_(&c, &drop_l(int(), int())).unwrap();
        let err = run_serial_values(&c, vec![Value::Int(1)]).unwrap_err();
        assert_eq!(err.task, "bad");
    }

    #[test]
    fn first_failing_slot_wins() {
        let a = function_task("a", int(), int(), |_| Err(TaskError::new("a")));
        let b = function_task("b", int(), int(), |_| Err(TaskError::new("b")));
        let c = crate::circuit::beside(&b, &a);
        let err = run_serial_values(&c, vec![Value::Int(1), Value::Int(2)]).unwrap_err();
        assert_eq!(err.task, "b");
    }
}
