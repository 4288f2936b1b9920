//! Property checks for the symmetric monoidal preorder axioms.
//!
//! Each suite draws random well-typed circuits and inputs, builds both sides
//! of an axiom and compares them. Behavioural comparisons run both sides on
//! the serial interpreter and compare every output slot, failures included.
//! Unitality is checked on signatures only, because an empty circuit cannot
//! be built.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{beside, beside_all, drop_l, drop_r, id_, replicate, swap, then_, Circuit};
use crate::signature::{compose_beside, compose_then, Port, Signature};
use crate::value::Value;

use super::eval_slots;
use super::gen::{inputs, CircuitGen};

/// Input vectors tried per behavioural case.
const PROBES: usize = 3;

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct LawSuite {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl LawSuite {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LawReport {
    pub seed: u64,
    pub suites: Vec<LawSuite>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(LawSuite::passed)
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            let verdict = if s.passed() { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "{verdict} {:<14} {} cases, {} failures",
                s.name,
                s.cases,
                s.failures.len()
            )?;
            for msg in s.failures.iter().take(3) {
                writeln!(f, "    {msg}")?;
            }
        }
        Ok(())
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<(), String>;

/// The suites, in report order.
pub const LAWS: [(&str, Check); 9] = [
    ("reflexivity", reflexivity),
    ("transitivity", transitivity),
    ("monotonicity", monotonicity),
    ("unitality", unitality),
    ("assoc-then", assoc_then),
    ("assoc-beside", assoc_beside),
    ("symmetry", symmetry),
    ("copy", copy),
    ("delete", delete),
];

/// Runs every suite for `n_cases` random instances. Each suite gets its own
/// stream derived from `seed`, so adding cases to one never perturbs another.
pub fn check_laws(seed: u64, n_cases: usize) -> LawReport {
    let suites = LAWS
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let failures = (0..n_cases)
                .filter_map(|case| check(&mut rng).err().map(|e| format!("case {case}: {e}")))
                .collect();
            LawSuite {
                name,
                cases: n_cases,
                failures,
            }
        })
        .collect();
    LawReport { seed, suites }
}

fn identity(ports: &[Port]) -> Circuit {
    let ids: Vec<Circuit> = ports.iter().cloned().map(id_).collect();
    beside_all(&ids).expect("at least one port")
}

/// Runs both circuits on the same random inputs and compares every slot.
fn same_behaviour(rng: &mut ChaCha8Rng, lhs: &Circuit, rhs: &Circuit) -> Result<(), String> {
    if lhs.signature() != rhs.signature() {
        return Err(format!(
            "signatures differ: {} vs {}",
            lhs.signature(),
            rhs.signature()
        ));
    }
    for _ in 0..PROBES {
        let xs: Vec<Value> = inputs(rng, lhs.signature().ins());
        let slots = || xs.iter().cloned().map(Ok).collect::<Vec<_>>();
        let (l, r) = (eval_slots(lhs, slots()), eval_slots(rhs, slots()));
        if l != r {
            return Err(format!("on {xs:?}: {l:?} vs {r:?}"));
        }
    }
    Ok(())
}

fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    CircuitGen::new(rng).circuit()
}

/// `id ; f == f == f ; id`.
fn reflexivity(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f = random_circuit(rng);
    let sig = f.signature();
    let pre = then_(&identity(sig.ins()), &f).map_err(|e| e.to_string())?;
    let post = then_(&f, &identity(sig.outs())).map_err(|e| e.to_string())?;
    same_behaviour(rng, &pre, &f)?;
    same_behaviour(rng, &f, &post)
}

/// `f : a -> b` and `g : b -> c` compose to `a -> c`, and running the
/// composite equals running `g` on the outputs of `f`.
fn transitivity(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f = random_circuit(rng);
    let mut gen = CircuitGen::new(rng);
    let d = gen.depth();
    let g = gen.from_ins(f.signature().outs(), d, 3);
    let fg = then_(&f, &g).map_err(|e| e.to_string())?;
    let expected = Signature::new(f.signature().ins().to_vec(), g.signature().outs().to_vec())
        .map_err(|e| e.to_string())?;
    if fg.signature() != &expected {
        return Err(format!(
            "composite is {}, expected {expected}",
            fg.signature()
        ));
    }
    for _ in 0..PROBES {
        let xs = inputs(rng, f.signature().ins());
        let slots: Vec<_> = xs.iter().cloned().map(Ok).collect();
        let staged = eval_slots(&g, eval_slots(&f, slots.clone()));
        let direct = eval_slots(&fg, slots);
        if staged != direct {
            return Err(format!("on {xs:?}: {staged:?} vs {direct:?}"));
        }
    }
    Ok(())
}

/// `(f <> g) ; (h <> k) == (f ; h) <> (g ; k)`.
fn monotonicity(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut gen = CircuitGen::new(rng);
    let (f, g) = (gen.circuit(), gen.circuit());
    let d = gen.depth();
    let h = gen.from_ins(f.signature().outs(), d, 3);
    let k = gen.from_ins(g.signature().outs(), d, 3);
    let lhs = then_(&beside(&f, &g), &beside(&h, &k)).map_err(|e| e.to_string())?;
    let rhs = beside(
        &then_(&f, &h).map_err(|e| e.to_string())?,
        &then_(&g, &k).map_err(|e| e.to_string())?,
    );
    same_behaviour(rng, &lhs, &rhs)
}

/// Identity signatures are units for sequential composition.
fn unitality(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f = random_circuit(rng);
    let s = f.signature();
    let left = Signature::identity(s.ins().to_vec()).map_err(|e| e.to_string())?;
    let right = Signature::identity(s.outs().to_vec()).map_err(|e| e.to_string())?;
    let pre = compose_then(&left, s).map_err(|e| e.to_string())?;
    let post = compose_then(s, &right).map_err(|e| e.to_string())?;
    if &pre != s || &post != s {
        return Err(format!("{s} changed to {pre} / {post}"));
    }
    Ok(())
}

/// `(f ; g) ; h == f ; (g ; h)`.
fn assoc_then(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f = random_circuit(rng);
    let mut gen = CircuitGen::new(rng);
    let (d1, d2) = (gen.depth(), gen.depth());
    let g = gen.from_ins(f.signature().outs(), d1, 3);
    let h = gen.from_ins(g.signature().outs(), d2, 3);
    let err = |e: crate::signature::CompositionError| e.to_string();
    let lhs = then_(&then_(&f, &g).map_err(err)?, &h).map_err(err)?;
    let rhs = then_(&f, &then_(&g, &h).map_err(err)?).map_err(err)?;
    same_behaviour(rng, &lhs, &rhs)
}

/// `(f <> g) <> h == f <> (g <> h)`, on signatures and behaviour.
fn assoc_beside(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut gen = CircuitGen::new(rng);
    let (f, g, h) = (gen.circuit(), gen.circuit(), gen.circuit());
    let (sf, sg, sh) = (f.signature(), g.signature(), h.signature());
    if compose_beside(&compose_beside(sf, sg), sh) != compose_beside(sf, &compose_beside(sg, sh)) {
        return Err("beside signatures are not associative".into());
    }
    let lhs = beside(&beside(&f, &g), &h);
    let rhs = beside(&f, &beside(&g, &h));
    same_behaviour(rng, &lhs, &rhs)
}

/// `swap ; swap == id`, and swap is natural:
/// `(f <> g) ; swap == swap ; (g <> f)` for single-output `f` and `g`.
fn symmetry(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut gen = CircuitGen::new(rng);
    let (p, q) = (gen.port(), gen.port());
    let twice = then_(&swap(p.clone(), q.clone()), &swap(q.clone(), p.clone()))
        .map_err(|e| e.to_string())?;
    let d = gen.depth();
    let f = gen.unary(std::slice::from_ref(&p), d);
    let g = gen.unary(std::slice::from_ref(&q), d);
    let (fo, go) = (
        f.signature().outs()[0].clone(),
        g.signature().outs()[0].clone(),
    );
    let lhs = then_(&beside(&f, &g), &swap(fo, go)).map_err(|e| e.to_string())?;
    let rhs = then_(&swap(p.clone(), q.clone()), &beside(&g, &f)).map_err(|e| e.to_string())?;
    same_behaviour(rng, &twice, &identity(&[p, q]))?;
    same_behaviour(rng, &lhs, &rhs)
}

/// `replicate ; drop_l == id == replicate ; drop_r`, and copying commutes
/// with a circuit: `f ; replicate == replicate ; (f <> f)`.
fn copy(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut gen = CircuitGen::new(rng);
    let p = gen.port();
    let d = gen.depth();
    let f = gen.unary(std::slice::from_ref(&p), d);
    let out = f.signature().outs()[0].clone();
    let err = |e: crate::signature::CompositionError| e.to_string();
    let keep_right = then_(&replicate(p.clone()), &drop_l(p.clone(), p.clone())).map_err(err)?;
    let keep_left = then_(&replicate(p.clone()), &drop_r(p.clone(), p.clone())).map_err(err)?;
    let lhs = then_(&f, &replicate(out)).map_err(err)?;
    let rhs = then_(&replicate(p.clone()), &beside(&f, &f)).map_err(err)?;
    same_behaviour(rng, &keep_right, &id_(p.clone()))?;
    same_behaviour(rng, &keep_left, &id_(p))?;
    same_behaviour(rng, &lhs, &rhs)
}

/// `drop_l` keeps the right value and `drop_r` the left one; discarding the
/// output of a successful circuit leaves the other side unchanged. A failure
/// on the discarded side still fails the job, so the comparison only covers
/// inputs on which the discarded circuit succeeds.
fn delete(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut gen = CircuitGen::new(rng);
    let (p, q) = (gen.port(), gen.port());
    let d = gen.depth();
    let f = gen.unary(std::slice::from_ref(&p), d);
    let g = gen.unary(std::slice::from_ref(&q), d);
    let (fo, go) = (
        f.signature().outs()[0].clone(),
        g.signature().outs()[0].clone(),
    );
    let err = |e: crate::signature::CompositionError| e.to_string();
    let only_f = then_(&beside(&f, &g), &drop_r(fo.clone(), go.clone())).map_err(err)?;
    let only_g = then_(&beside(&f, &g), &drop_l(fo, go)).map_err(err)?;
    for _ in 0..PROBES {
        let x = inputs(rng, &[p.clone(), q.clone()]);
        let (xp, xq) = (Ok(x[0].clone()), Ok(x[1].clone()));
        let dl = eval_slots(&drop_l(p.clone(), q.clone()), vec![xp.clone(), xq.clone()]);
        let dr = eval_slots(&drop_r(p.clone(), q.clone()), vec![xp.clone(), xq.clone()]);
        if dl != vec![xq.clone()] || dr != vec![xp.clone()] {
            return Err(format!("drops on {x:?} gave {dl:?} / {dr:?}"));
        }
        let fx = eval_slots(&f, vec![xp.clone()]);
        let gx = eval_slots(&g, vec![xq.clone()]);
        let both = vec![xp, xq];
        if gx[0].is_ok() && eval_slots(&only_f, both.clone()) != fx {
            return Err(format!("discarding g changed f on {x:?}"));
        }
        if fx[0].is_ok() && eval_slots(&only_g, both) != gx {
            return Err(format!("discarding f changed g on {x:?}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_a_small_run() {
        let report = check_laws(3, 40);
        assert_eq!(report.suites.len(), 9);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn swap_law_on_a_fixed_pair() {
        let (p, q) = (
            Port::var(crate::value::ValueType::Int),
            Port::var(crate::value::ValueType::Str),
        );
        let c = then_(&swap(p.clone(), q.clone()), &swap(q, p)).unwrap();
        let out = eval_slots(&c, vec![Ok(Value::Int(1)), Ok(Value::str("a"))]);
        assert_eq!(out, vec![Ok(Value::Int(1)), Ok(Value::str("a"))]);
    }

    #[test]
    fn report_is_reproducible() {
        let a = check_laws(11, 5).to_string();
        let b = check_laws(11, 5).to_string();
        assert_eq!(a, b);
    }
}
