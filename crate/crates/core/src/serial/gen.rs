//! Random well-typed circuits and inputs.
//!
//! Circuits are grown top-down from a required input signature, so every
//! composition is valid by construction. Ports are `Var` only and carry one
//! of `Int`, `Str` or `List<Int>`. Task bodies come from a fixed pool of pure
//! functions, some of which fail on particular inputs (division by zero, the
//! head of an empty string, the maximum of an empty list) so that error
//! verdicts are exercised too.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{
    beside, drop_l, drop_r, function_task, id_, map_c, replicate, swap, task, then_, Circuit,
    TaskError, TaskSpec,
};
use crate::signature::Port;
use crate::value::{Value, ValueType};

pub const MAX_DEPTH: usize = 4;
pub const MAX_ARITY: usize = 3;

pub fn int() -> ValueType {
    ValueType::Int
}

pub fn ints() -> ValueType {
    ValueType::list(ValueType::Int)
}

/// The value types generated circuits carry.
pub fn types() -> [ValueType; 3] {
    [ValueType::Int, ValueType::Str, ints()]
}

fn as_int(v: &Value) -> i64 {
    v.as_int().expect("generated body received a non-Int")
}

fn as_str(v: &Value) -> &str {
    v.as_str().expect("generated body received a non-Str")
}

fn as_ints(v: &Value) -> Vec<i64> {
    v.as_list()
        .expect("generated body received a non-list")
        .iter()
        .map(as_int)
        .collect()
}

fn list(xs: impl IntoIterator<Item = i64>) -> Value {
    Value::List(xs.into_iter().map(Value::Int).collect())
}

/// A scalar summary of any generated value, used by n-ary bodies.
fn weight(v: &Value) -> i64 {
    match v {
        Value::Int(x) => *x,
        Value::Str(s) => s.chars().count() as i64,
        Value::List(xs) => xs.iter().map(weight).fold(0, i64::wrapping_add),
        _ => 0,
    }
}

type Body = fn(&Value) -> Result<Value, TaskError>;

/// Unary bodies for each (input, output) type pair; entries are
/// `(name, input, output, body)`.
fn unary_pool() -> Vec<(&'static str, ValueType, ValueType, Body)> {
    vec![
        ("inc", int(), int(), |v| {
            Ok(Value::Int(as_int(v).wrapping_add(1)))
        }),
        ("double", int(), int(), |v| {
            Ok(Value::Int(as_int(v).wrapping_mul(2)))
        }),
        ("neg", int(), int(), |v| {
            Ok(Value::Int(as_int(v).wrapping_neg()))
        }),
        ("hundred_over", int(), int(), |v| match as_int(v) {
            0 => Err(TaskError::new("division by zero")),
            x => Ok(Value::Int(100 / x)),
        }),
        ("halve", int(), int(), |v| match as_int(v) {
            x if x % 2 == 0 => Ok(Value::Int(x / 2)),
            x => Err(TaskError::new(format!("{x} is odd"))),
        }),
        ("square_mod", int(), int(), |v| {
            Ok(Value::Int(as_int(v).wrapping_mul(as_int(v)).rem_euclid(97)))
        }),
        ("show", int(), ValueType::Str, |v| {
            Ok(Value::str(as_int(v).to_string()))
        }),
        ("upper", ValueType::Str, ValueType::Str, |v| {
            Ok(Value::str(as_str(v).to_uppercase()))
        }),
        ("reverse", ValueType::Str, ValueType::Str, |v| {
            Ok(Value::str(as_str(v).chars().rev().collect::<String>()))
        }),
        ("exclaim", ValueType::Str, ValueType::Str, |v| {
            Ok(Value::str(format!("{}!", as_str(v))))
        }),
        ("head", ValueType::Str, ValueType::Str, |v| {
            match as_str(v).chars().next() {
                Some(c) => Ok(Value::str(c.to_string())),
                None => Err(TaskError::new("head of empty string")),
            }
        }),
        ("length", ValueType::Str, int(), |v| {
            Ok(Value::Int(as_str(v).chars().count() as i64))
        }),
        ("codes", ValueType::Str, ints(), |v| {
            Ok(list(as_str(v).chars().take(4).map(|c| c as i64 % 10)))
        }),
        ("sum", ints(), int(), |v| {
            Ok(Value::Int(
                as_ints(v).into_iter().fold(0, i64::wrapping_add),
            ))
        }),
        ("maximum", ints(), int(), |v| {
            match as_ints(v).into_iter().max() {
                Some(m) => Ok(Value::Int(m)),
                None => Err(TaskError::new("maximum of empty list")),
            }
        }),
        ("join", ints(), ValueType::Str, |v| {
            let parts: Vec<String> = as_ints(v).iter().map(i64::to_string).collect();
            Ok(Value::str(parts.join("-")))
        }),
        ("sort", ints(), ints(), |v| {
            let mut xs = as_ints(v);
            xs.sort_unstable();
            Ok(list(xs))
        }),
        ("rev_list", ints(), ints(), |v| {
            Ok(list(as_ints(v).into_iter().rev()))
        }),
        ("tail", ints(), ints(), |v| match as_ints(v).split_first() {
            Some((_, rest)) => Ok(list(rest.to_vec())),
            None => Err(TaskError::new("tail of empty list")),
        }),
        ("range", int(), ints(), |v| {
            Ok(list(0..as_int(v).rem_euclid(5)))
        }),
    ]
}

/// A pooled unary task from `input`, optionally fixed to produce `output`.
fn unary_task(rng: &mut ChaCha8Rng, input: &ValueType, output: Option<&ValueType>) -> Circuit {
    let pool = unary_pool();
    let fitting: Vec<_> = pool
        .iter()
        .filter(|(_, i, o, _)| i == input && output.is_none_or(|want| want == o))
        .collect();
    let (name, i, o, body) = fitting
        .choose(rng)
        .copied()
        .unwrap_or_else(|| panic!("no pooled body from {input}"));
    let body = *body;
    function_task(*name, Port::var(i.clone()), Port::var(o.clone()), body)
}

/// An n-ary task reducing its inputs to one value.
fn combine_task(rng: &mut ChaCha8Rng, ins: &[Port]) -> Circuit {
    let ins = ins.to_vec();
    let spec = if rng.gen_bool(0.3) {
        TaskSpec::new("ratio", ins, Port::var(int()), |vs: &[Value]| {
            let den = vs[1..].iter().map(weight).fold(0, i64::wrapping_add);
            if den == 0 {
                Err(TaskError::new("zero denominator"))
            } else {
                Ok(Value::Int(weight(&vs[0]).wrapping_div(den)))
            }
        })
    } else {
        TaskSpec::new("combine", ins, Port::var(int()), |vs: &[Value]| {
            Ok(Value::Int(
                vs.iter()
                    .enumerate()
                    .map(|(i, v)| weight(v).wrapping_mul(i as i64 + 1))
                    .fold(0, i64::wrapping_add),
            ))
        })
    };
    task(spec).expect("generated ports are valid")
}

/// Grows random circuits with a prescribed input signature.
pub struct CircuitGen<'a> {
    rng: &'a mut ChaCha8Rng,
}

impl<'a> CircuitGen<'a> {
    pub fn new(rng: &'a mut ChaCha8Rng) -> Self {
        CircuitGen { rng }
    }

    pub fn port(&mut self) -> Port {
        Port::var(types().choose(self.rng).cloned().expect("non-empty"))
    }

    /// A depth for a sub-circuit, below the overall bound.
    pub fn depth(&mut self) -> usize {
        self.rng.gen_range(0..MAX_DEPTH)
    }

    pub fn ports(&mut self, n: usize) -> Vec<Port> {
        (0..n).map(|_| self.port()).collect()
    }

    /// A random circuit over 1..=3 random input ports.
    pub fn circuit(&mut self) -> Circuit {
        let n = self.rng.gen_range(1..=MAX_ARITY);
        let ins = self.ports(n);
        let depth = self.rng.gen_range(1..=MAX_DEPTH);
        self.from_ins(&ins, depth, MAX_ARITY)
    }

    /// A random circuit with exactly one output.
    pub fn unary(&mut self, ins: &[Port], depth: usize) -> Circuit {
        self.from_ins(ins, depth, 1)
    }

    /// A random circuit taking `ins` and producing between 1 and `max_outs`
    /// outputs, at most `depth` combinator levels deep.
    pub fn from_ins(&mut self, ins: &[Port], depth: usize, max_outs: usize) -> Circuit {
        debug_assert!(!ins.is_empty() && max_outs >= 1);
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.leaf(ins, max_outs);
        }
        let can_split = ins.len() >= 2 && max_outs >= 2;
        let choice = self.rng.gen_range(0..if can_split { 3 } else { 2 });
        match choice {
            0 => {
                let first = self.from_ins(ins, depth - 1, MAX_ARITY);
                let outs = first.signature().outs().to_vec();
                let second = self.from_ins(&outs, depth - 1, max_outs);
                then_(&first, &second).expect("generated halves agree")
            }
            1 => self.map_or_leaf(ins, depth, max_outs),
            _ => {
                let k = self.rng.gen_range(1..ins.len());
                let left = self.from_ins(&ins[..k], depth - 1, max_outs - 1);
                let budget = max_outs - left.signature().n_outs();
                let right = self.from_ins(&ins[k..], depth - 1, budget);
                beside(&left, &right)
            }
        }
    }

    fn map_or_leaf(&mut self, ins: &[Port], depth: usize, max_outs: usize) -> Circuit {
        if ins.len() == 1 && ins[0].value() == &ints() {
            // The conversion appended by `coerce` costs one level.
            let inner = if depth >= 2 {
                let body = self.unary(&[Port::var(int())], depth - 2);
                self.coerce(body, &int())
            } else {
                unary_task(self.rng, &int(), Some(&int()))
            };
            let p = Port::var(ints());
            return map_c(&inner, p.clone(), p).expect("inner is Int -> Int");
        }
        self.leaf(ins, max_outs)
    }

    /// Appends a conversion so that the single output carries `target`.
    fn coerce(&mut self, c: Circuit, target: &ValueType) -> Circuit {
        let out = c.signature().outs()[0].value().clone();
        if &out == target {
            return c;
        }
        let conv = unary_task(self.rng, &out, Some(target));
        then_(&c, &conv).expect("conversion input matches")
    }

    fn leaf(&mut self, ins: &[Port], max_outs: usize) -> Circuit {
        match ins {
            [p] => {
                let choice = self.rng.gen_range(0..if max_outs >= 2 { 4 } else { 3 });
                match choice {
                    0 => id_(p.clone()),
                    3 => replicate(p.clone()),
                    _ => unary_task(self.rng, p.value(), None),
                }
            }
            [p, q] => {
                let choice = self.rng.gen_range(0..if max_outs >= 2 { 4 } else { 3 });
                match choice {
                    0 => drop_l(p.clone(), q.clone()),
                    1 => drop_r(p.clone(), q.clone()),
                    3 => swap(p.clone(), q.clone()),
                    _ => combine_task(self.rng, ins),
                }
            }
            _ => combine_task(self.rng, ins),
        }
    }
}

/// A random value of a generated type. Small ranges make the failing bodies
/// fire regularly.
pub fn value(rng: &mut ChaCha8Rng, ty: &ValueType) -> Value {
    const WORDS: [&str; 6] = ["", "a", "apple", "Kahn", "x y", "zz"];
    match ty {
        ValueType::Int => Value::Int(rng.gen_range(-2..=9)),
        ValueType::Str => Value::str(*WORDS.choose(rng).expect("non-empty")),
        ValueType::List(inner) => {
            let n = rng.gen_range(0..=4);
            Value::List((0..n).map(|_| value(rng, inner)).collect())
        }
        other => panic!("generator does not produce {other}"),
    }
}

/// One random value per port.
pub fn inputs(rng: &mut ChaCha8Rng, ports: &[Port]) -> Vec<Value> {
    ports.iter().map(|p| value(rng, p.value())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn depth(c: &Circuit) -> usize {
        use crate::circuit::NodeKind;
        match c.kind() {
            NodeKind::Then(a, b) | NodeKind::Beside(a, b) => 1 + depth(a).max(depth(b)),
            NodeKind::Map { inner, .. } => 1 + depth(inner),
            _ => 0,
        }
    }

    #[test]
    fn generated_circuits_respect_the_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let c = CircuitGen::new(&mut rng).circuit();
            let s = c.signature();
            assert!((1..=MAX_ARITY).contains(&s.n_ins()), "{s}");
            assert!((1..=MAX_ARITY).contains(&s.n_outs()), "{s}");
            assert!(depth(&c) <= MAX_DEPTH, "{}", c.render_tree());
            assert_eq!(crate::circuit::signature_of(&c).as_ref(), Ok(s));
        }
    }

    #[test]
    fn every_type_pair_has_a_conversion() {
        for from in types() {
            for to in types() {
                if from != to {
                    assert!(
                        unary_pool()
                            .iter()
                            .any(|(_, i, o, _)| *i == from && *o == to),
                        "{from} -> {to}"
                    );
                }
            }
        }
    }
}
