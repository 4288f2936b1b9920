use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use flowkit::*;

fn int() -> Port {
    Port::var(ValueType::Int)
}

fn registry() -> Arc<StoreRegistry> {
    Arc::new(StoreRegistry::default())
}

fn var(reg: &StoreRegistry, v: Value, port: &Port) -> DataStoreRef {
    reg.store(port, &v, TaskId::random(), JobId::random())
        .unwrap()
}

fn values(reg: &StoreRegistry, refs: &[DataStoreRef]) -> Vec<Value> {
    refs.iter().map(|r| reg.fetch(r).unwrap()).collect()
}

fn double() -> Circuit {
    function_task("double", int(), int(), |v| {
        Ok(Value::Int(v.as_int().unwrap() * 2))
    })
}

fn fragile() -> Circuit {
    function_task("fragile", int(), int(), |v| {
        let x = v.as_int().unwrap();
        if x < 0 {
            Err(TaskError::new("negative input"))
        } else {
            Ok(Value::Int(x + 1))
        }
    })
}

#[test]
fn doubling_task_round_trip() {
    let reg = registry();
    let net = start_network(&double(), reg.clone()).unwrap();
    assert_eq!(net.worker_count(), 1);
    let job = JobId::random();
    net.write(job, &[var(&reg, Value::Int(21), &int())])
        .unwrap();
    let (got, result) = net.read().unwrap();
    assert_eq!(got, job);
    assert_eq!(values(&reg, &result.unwrap()), vec![Value::Int(42)]);
    assert_eq!(net.job_status(job), Some(JobStatus::Done));
}

#[test]
fn identity_network_passes_the_input_pipe_through() {
    let reg = registry();
    let net = start_network(&id_(int()), reg.clone()).unwrap();
    assert_eq!(net.worker_count(), 0);
    assert!(net.ins().same_pipes(net.outs()));
    let input = var(&reg, Value::Int(7), &int());
    net.write(JobId::random(), std::slice::from_ref(&input))
        .unwrap();
    let (_, result) = net.read().unwrap();
    assert_eq!(result.unwrap(), vec![input]);
}

#[test]
fn failing_job_does_not_affect_later_jobs() {
    let reg = registry();
    let net = start_network(&fragile(), reg.clone()).unwrap();
    let before = net.live_worker_count();
    let (a, b) = (JobId::random(), JobId::random());
    net.write(a, &[var(&reg, Value::Int(-1), &int())]).unwrap();
    net.write(b, &[var(&reg, Value::Int(4), &int())]).unwrap();
    let (ja, ra) = net.read().unwrap();
    assert_eq!(ja, a);
    let err = ra.unwrap_err();
    assert_eq!(err.task, "fragile");
    assert!(err.to_string().contains("negative input"));
    let (jb, rb) = net.read().unwrap();
    assert_eq!(jb, b);
    assert_eq!(values(&reg, &rb.unwrap()), vec![Value::Int(5)]);
    assert_eq!(net.live_worker_count(), before);
    assert_eq!(net.job_status(a), Some(JobStatus::Failed));
}

#[test]
fn panicking_body_is_contained() {
    let reg = registry();
    let boom = function_task("boom", int(), int(), |v| {
        if v.as_int() == Some(0) {
            panic!("zero");
        }
        Ok(v.clone())
    });
    let net = start_network(&boom, reg.clone()).unwrap();
    net.write(JobId::random(), &[var(&reg, Value::Int(0), &int())])
        .unwrap();
    net.write(JobId::random(), &[var(&reg, Value::Int(3), &int())])
        .unwrap();
    let err = net.read().unwrap().1.unwrap_err();
    assert!(err.cause.contains("panicked: zero"), "{err}");
    assert_eq!(
        values(&reg, &net.read().unwrap().1.unwrap()),
        vec![Value::Int(3)]
    );
}

#[test]
fn downstream_body_is_skipped_for_failed_jobs() {
    let reg = registry();
    let calls = Arc::new(AtomicUsize::new(0));
    let counter = calls.clone();
    let count = function_task("count", int(), int(), move |v| {
        counter.fetch_add(1, Ordering::SeqCst);
        Ok(v.clone())
    });
    let c = then_(&fragile(), &count).unwrap();
    let net = start_network(&c, reg.clone()).unwrap();
    for x in [-1, 2, -3, 4] {
        net.write(JobId::random(), &[var(&reg, Value::Int(x), &int())])
            .unwrap();
    }
    let verdicts: Vec<bool> = (0..4).map(|_| net.read().unwrap().1.is_ok()).collect();
    assert_eq!(verdicts, vec![false, true, false, true]);
    assert_eq!(calls.load(Ordering::SeqCst), 2);
}

#[test]
fn jobs_come_back_in_write_order() {
    let reg = registry();
    // Early jobs are slower, so completion order would differ from write order.
    let slow = function_task("slow", int(), int(), |v| {
        let x = v.as_int().unwrap();
        std::thread::sleep(Duration::from_millis((10 - x) as u64));
        Ok(v.clone())
    });
    let c = beside(&slow, &double());
    let net = start_network(&c, reg.clone()).unwrap();
    let jobs: Vec<JobId> = (0..10).map(|_| JobId::random()).collect();
    for (i, job) in jobs.iter().enumerate() {
        let v = var(&reg, Value::Int(i as i64), &int());
        let w = var(&reg, Value::Int(i as i64), &int());
        net.write(*job, &[v, w]).unwrap();
    }
    for (i, job) in jobs.iter().enumerate() {
        let (got, result) = net.read().unwrap();
        assert_eq!(got, *job);
        let i = i as i64;
        assert_eq!(
            values(&reg, &result.unwrap()),
            vec![Value::Int(i), Value::Int(2 * i)]
        );
    }
}

#[test]
fn two_thousand_sequential_writes_are_all_readable() {
    let reg = registry();
    let net = start_network(&then_(&double(), &double()).unwrap(), reg.clone()).unwrap();
    for i in 0..2000 {
        net.write(JobId::random(), &[var(&reg, Value::Int(i), &int())])
            .unwrap();
    }
    for i in 0..2000 {
        let refs = net.read().unwrap().1.unwrap();
        assert_eq!(values(&reg, &refs), vec![Value::Int(4 * i)]);
    }
}

#[test]
fn write_rejects_duplicates_arity_and_ports() {
    let reg = registry();
    let net = start_network(&double(), reg.clone()).unwrap();
    let job = JobId::random();
    net.write(job, &[var(&reg, Value::Int(1), &int())]).unwrap();
    assert_eq!(
        net.write(job, &[var(&reg, Value::Int(1), &int())]),
        Err(NetworkError::DuplicateJob(job))
    );
    assert!(matches!(
        net.write(JobId::random(), &[]),
        Err(NetworkError::ArityMismatch {
            expected: 1,
            found: 0
        })
    ));
    let s = Port::var(ValueType::Str);
    assert!(matches!(
        net.write(JobId::random(), &[var(&reg, Value::str("x"), &s)]),
        Err(NetworkError::PortMismatch { position: 0, .. })
    ));
}

#[test]
fn stop_is_idempotent_and_ends_reads() {
    let reg = registry();
    let net = start_network(&then_(&double(), &fragile()).unwrap(), reg.clone()).unwrap();
    net.write(JobId::random(), &[var(&reg, Value::Int(1), &int())])
        .unwrap();
    net.stop();
    net.stop();
    assert_eq!(net.live_worker_count(), 0);
    assert_eq!(net.read(), Err(NetworkError::Stopped));
    assert_eq!(
        net.write(JobId::random(), &[var(&reg, Value::Int(1), &int())]),
        Err(NetworkError::Stopped)
    );
}

#[test]
fn stop_with_a_job_in_flight_abandons_it() {
    let reg = registry();
    let sleepy = function_task("sleepy", int(), int(), |v| {
        std::thread::sleep(Duration::from_millis(50));
        Ok(v.clone())
    });
    let net = start_network(&sleepy, reg.clone()).unwrap();
    net.write(JobId::random(), &[var(&reg, Value::Int(1), &int())])
        .unwrap();
    net.stop();
    assert_eq!(net.live_worker_count(), 0);
}

#[test]
fn stop_frees_the_cells_of_its_workers_and_inputs() {
    let reg = registry();
    let net = start_network(&then_(&double(), &double()).unwrap(), reg.clone()).unwrap();
    let input = reg
        .store(&int(), &Value::Int(1), TaskId::random(), JobId::random())
        .unwrap();
    net.write(JobId::random(), std::slice::from_ref(&input))
        .unwrap();
    let out = net.read().unwrap().1.unwrap();
    net.stop();
    assert!(matches!(reg.fetch(&input), Err(StoreError::NotFound(_))));
    assert!(matches!(reg.fetch(&out[0]), Err(StoreError::NotFound(_))));
}

#[test]
fn unregistered_kinds_fail_at_start() {
    let reg = registry();
    let odd = Port::new(StoreKind::new("Remote"), ValueType::Int).unwrap();
    let c = id_(odd);
    assert!(matches!(
        start_network(&c, reg),
        Err(NetworkError::StoreRegistry(StoreError::UnknownKind(_)))
    ));
}

#[test]
fn replicate_copies_values_and_errors_to_both_branches() {
    let reg = registry();
    let c = then_(&fragile(), &replicate(int())).unwrap();
    let net = start_network(&c, reg.clone()).unwrap();
    assert_eq!(net.outs().len(), 2);
    net.write(JobId::random(), &[var(&reg, Value::Int(6), &int())])
        .unwrap();
    net.write(JobId::random(), &[var(&reg, Value::Int(-6), &int())])
        .unwrap();
    assert_eq!(
        values(&reg, &net.read().unwrap().1.unwrap()),
        vec![Value::Int(7), Value::Int(7)]
    );
    assert_eq!(net.read().unwrap().1.unwrap_err().task, "fragile");
}

#[test]
fn dropped_side_errors_still_fail_the_job() {
    let reg = registry();
    let c = then_(&beside(&fragile(), &id_(int())), &drop_l(int(), int())).unwrap();
    let net = start_network(&c, reg.clone()).unwrap();
    let job = |l: i64, r: i64| {
        [
            var(&reg, Value::Int(l), &int()),
            var(&reg, Value::Int(r), &int()),
        ]
    };
    net.write(JobId::random(), &job(1, 10)).unwrap();
    net.write(JobId::random(), &job(-1, 20)).unwrap();
    assert_eq!(
        values(&reg, &net.read().unwrap().1.unwrap()),
        vec![Value::Int(10)]
    );
    assert_eq!(net.read().unwrap().1.unwrap_err().task, "fragile");
}

#[test]
fn drop_worker_stays_bounded_over_many_jobs() {
    let reg = registry();
    let c = then_(&replicate(int()), &drop_r(int(), int())).unwrap();
    let net = build_basic_network(&c, reg.clone(), NetworkOptions { max_queue: Some(4) }).unwrap();
    for i in 0..10_000 {
        let input = var(&reg, Value::Int(i), &int());
        net.write(JobId::random(), std::slice::from_ref(&input))
            .unwrap();
        let refs = net.read().unwrap().1.unwrap();
        assert_eq!(refs, vec![input.clone()]);
        reg.discard(&input);
    }
}

#[test]
fn map_doubles_every_element_in_order() {
    let reg = registry();
    let list = Port::var(ValueType::list(ValueType::Int));
    let c = map_c(&double(), list.clone(), list.clone()).unwrap();
    let net = start_network(&c, reg.clone()).unwrap();
    for k in [0i64, 1, 3, 100] {
        let items: Vec<Value> = (1..=k).map(Value::Int).collect();
        net.write(JobId::random(), &[var(&reg, Value::List(items), &list)])
            .unwrap();
        let out = values(&reg, &net.read().unwrap().1.unwrap());
        let expected: Vec<Value> = (1..=k).map(|x| Value::Int(2 * x)).collect();
        assert_eq!(out, vec![Value::List(expected)]);
    }
}

#[test]
fn map_fails_the_whole_job_when_one_element_fails() {
    let reg = registry();
    let list = Port::var(ValueType::list(ValueType::Int));
    let c = map_c(&fragile(), list.clone(), list.clone()).unwrap();
    let net = start_network(&c, reg.clone()).unwrap();
    let input = |xs: &[i64]| {
        [var(
            &reg,
            Value::List(xs.iter().copied().map(Value::Int).collect()),
            &list,
        )]
    };
    net.write(JobId::random(), &input(&[1, -2, 3])).unwrap();
    net.write(JobId::random(), &input(&[4, 5])).unwrap();
    assert_eq!(net.read().unwrap().1.unwrap_err().task, "fragile");
    let out = values(&reg, &net.read().unwrap().1.unwrap());
    assert_eq!(out, vec![Value::List(vec![Value::Int(5), Value::Int(6)])]);
}

#[test]
fn map_over_a_pass_through_circuit() {
    let reg = registry();
    let list = Port::var(ValueType::list(ValueType::Int));
    let c = map_c(&id_(int()), list.clone(), list.clone()).unwrap();
    let net = start_network(&c, reg.clone()).unwrap();
    let xs = Value::List(vec![Value::Int(3), Value::Int(1)]);
    net.write(JobId::random(), &[var(&reg, xs.clone(), &list)])
        .unwrap();
    assert_eq!(values(&reg, &net.read().unwrap().1.unwrap()), vec![xs]);
}

#[test]
fn nested_maps_run_and_stop_cleanly() {
    let reg = registry();
    let ints = Port::var(ValueType::list(ValueType::Int));
    let nested = Port::var(ValueType::list(ValueType::list(ValueType::Int)));
    let inner = map_c(&double(), ints.clone(), ints.clone()).unwrap();
    let c = map_c(&inner, nested.clone(), nested.clone()).unwrap();
    let net = start_network(&c, reg.clone()).unwrap();
    let v = Value::List(vec![
        Value::List(vec![Value::Int(1)]),
        Value::List(vec![]),
        Value::List(vec![Value::Int(2), Value::Int(3)]),
    ]);
    net.write(JobId::random(), &[var(&reg, v, &nested)])
        .unwrap();
    let expected = Value::List(vec![
        Value::List(vec![Value::Int(2)]),
        Value::List(vec![]),
        Value::List(vec![Value::Int(4), Value::Int(6)]),
    ]);
    assert_eq!(
        values(&reg, &net.read().unwrap().1.unwrap()),
        vec![expected]
    );
    net.stop();
    assert_eq!(net.live_worker_count(), 0);
}
