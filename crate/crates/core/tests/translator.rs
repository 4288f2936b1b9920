use std::collections::HashSet;
use std::sync::Arc;

use flowkit::kpn::WorkerKind;
use flowkit::*;

fn int() -> Port {
    Port::var(ValueType::Int)
}

fn named(name: &str) -> Circuit {
    function_task(name, int(), int(), |v| Ok(v.clone()))
}

fn start(c: &Circuit) -> NetworkHandle {
    start_network(c, Arc::new(StoreRegistry::default())).unwrap()
}

#[test]
fn then_wires_the_second_task_to_the_first_output() {
    let net = start(&then_(&named("a"), &named("b")).unwrap());
    let w = &net.topology().workers;
    assert_eq!(w.len(), 2);
    assert_eq!(w[1].inputs, w[0].outputs);
    assert_eq!(net.outs().ids(), w[1].outputs);
}

#[test]
fn chains_spawn_left_to_right_under_either_bracketing() {
    let (a, b, c) = (named("a"), named("b"), named("c"));
    let left = then_(&then_(&a, &b).unwrap(), &c).unwrap();
    let right = then_(&a, &then_(&b, &c).unwrap()).unwrap();
    for circuit in [left, right] {
        let net = start(&circuit);
        let labels: Vec<&str> = net
            .topology()
            .workers
            .iter()
            .map(|w| w.label.as_str())
            .collect();
        assert_eq!(labels, ["a", "b", "c"]);
    }
}

#[test]
fn beside_bracketing_yields_the_same_topology() {
    let (a, b, c) = (named("a"), named("b"), named("c"));
    let left = start(&beside(&beside(&a, &b), &c));
    let right = start(&beside(&a, &beside(&b, &c)));
    assert_eq!(left.topology().render(), right.topology().render());
}

#[test]
fn beside_keeps_outputs_in_order() {
    let net = start(&beside(&named("a"), &named("b")));
    let w = &net.topology().workers;
    assert_eq!(w.len(), 2);
    assert_eq!(net.ins().ids(), [w[0].inputs[0], w[1].inputs[0]]);
    assert_eq!(net.outs().ids(), [w[0].outputs[0], w[1].outputs[0]]);
}

#[test]
fn joined_networks_list_each_worker_once() {
    let shared = then_(&replicate(int()), &beside(&named("l"), &named("r"))).unwrap();
    let sinks = beside_all(&[named("w"), named("x"), named("y"), named("z")]).unwrap();
    let c = then_(&beside(&shared, &replicate(int())), &sinks).unwrap();
    let net = start(&c);
    let ids: HashSet<_> = net.worker_ids().iter().collect();
    assert_eq!(ids.len(), net.worker_count());
    assert_eq!(net.worker_count(), net.topology().workers.len());
}

#[test]
fn double_swap_restores_the_input_pipes() {
    let c = then_(&swap(int(), int()), &swap(int(), int())).unwrap();
    let net = start(&c);
    assert_eq!(net.worker_count(), 0);
    assert!(net.outs().same_pipes(net.ins()));
    let once = start(&swap(int(), int()));
    assert_eq!(once.outs().ids(), [1, 0]);
}

#[test]
fn tasks_consume_the_whole_frontier() {
    let spec = TaskSpec::new("sum3", vec![int(); 3], int(), |vs: &[Value]| {
        Ok(Value::Int(vs.iter().filter_map(Value::as_int).sum()))
    });
    let net = start(&task(spec).unwrap());
    let w = &net.topology().workers;
    assert_eq!(w[0].inputs, [0, 1, 2]);
    assert_eq!(net.outs().ports(), vec![int()]);
}

#[test]
fn auxiliary_workers_are_counted() {
    let c = then_(&replicate(int()), &drop_l(int(), int())).unwrap();
    let net = start(&c);
    let kinds: Vec<WorkerKind> = net.topology().workers.iter().map(|w| w.kind).collect();
    assert_eq!(kinds, [WorkerKind::Replicate, WorkerKind::Drop]);
}

#[test]
fn topology_renders_deterministically() {
    let list = Port::var(ValueType::list(ValueType::Int));
    let m = map_c(&named("inc"), list.clone(), list.clone()).unwrap();
    let c = then_(&replicate(list.clone()), &beside(&m, &id_(list))).unwrap();
    let text = start(&c).topology().render();
    let expected = "\
ins: p0:Var<List<Int>>
w0 replicate replicate: p0 -> p1 p2
w1 map mapC: p1 -> p3
  ins: p0:Var<Int>
  w0 task inc: p0 -> p1
  outs: p1:Var<Int>
outs: p3:Var<List<Int>> p2:Var<List<Int>>
";
    assert_eq!(text, expected);
    assert_eq!(start(&c).topology().render(), expected);
}

#[test]
fn bounded_pipes_still_deliver_every_job() {
    let reg = Arc::new(StoreRegistry::default());
    let c = then_(&replicate(int()), &beside(&named("l"), &named("r"))).unwrap();
    let net = build_basic_network(&c, reg.clone(), NetworkOptions { max_queue: Some(1) }).unwrap();
    let writer: Vec<_> = (0..50)
        .map(|i| {
            reg.store(&int(), &Value::Int(i), TaskId::random(), JobId::random())
                .unwrap()
        })
        .collect();
    std::thread::scope(|s| {
        s.spawn(|| {
            for r in &writer {
                net.write(JobId::random(), std::slice::from_ref(r)).unwrap();
            }
        });
        for i in 0..50 {
            let refs = net.read().unwrap().1.unwrap();
            let vals: Vec<Value> = refs.iter().map(|r| reg.fetch(r).unwrap()).collect();
            assert_eq!(vals, vec![Value::Int(i), Value::Int(i)]);
        }
    });
}
