//! End-to-end acceptance checks, one per criterion, run in order.
//!
//! Run with `cargo test -p flowkit-cli --test acceptance -- --nocapture` to
//! see the PASS/FAIL lines.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use flowkit::serial::compare_with_network;
use flowkit::serial::gen::{inputs, CircuitGen};
use flowkit::serial::laws::check_laws;
use flowkit::*;
use flowkit_cli::bench;
use flowkit_cli::songflow::{run_songflow, SongflowConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn type_mismatch() -> Outcome {
    let words = ValueType::list(ValueType::Str);
    let file = Port::new(StoreKind::file_store(), words.clone()).map_err(|e| e.to_string())?;
    let csl = Port::new(StoreKind::comma_sep_file(), words).map_err(|e| e.to_string())?;
    let generate = function_task(
        "generateWords",
        Port::var(ValueType::Unit),
        file.clone(),
        |_| Ok(Value::List(vec![Value::str("apple")])),
    );
    let count = function_task("countLetters", csl, file, |v| Ok(v.clone()));
    match then_(&generate, &count) {
        Err(e @ CompositionError::PortMismatch { .. }) => {
            let msg = e.to_string();
            ensure(
                msg.contains("FileStore") && msg.contains("CommaSepFile"),
                msg,
            )
        }
        other => Err(format!("expected PortMismatch, got {other:?}")),
    }
}

fn speedup() -> Outcome {
    let samples = bench::speedup(5, NetworkOptions::default()).map_err(|e| e.to_string())?;
    let ratio = bench::speedup_ratio(&samples);
    ensure(
        ratio <= 0.77,
        format!("parallel/serial = {ratio:.3} (limit 0.77)"),
    )
}

fn scaling() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let samples = bench::scaling(
        &bench::SCALING_SIZES,
        3,
        bench::SCALING_ROW_COST,
        dir.path(),
        NetworkOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let (fit, ratio) = bench::scaling_summary(&samples);
    ensure(
        fit.r2 >= 0.98 && (6.4..=9.6).contains(&ratio),
        format!("r2 = {:.4}, wall(800)/wall(100) = {ratio:.2}", fit.r2),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |i: usize| -> Result<(Vec<u8>, Vec<u8>), String> {
        let cfg = SongflowConfig::new(dir.path().join(format!("run{i}")), 200, 42);
        let out = run_songflow(&cfg).map_err(|e| e.to_string())?;
        let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
        Ok((read(&out.top_songs)?, read(&out.top_artists)?))
    };
    let first = run(0)?;
    let differing = (1..50)
        .map(run)
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|r| *r != first)
        .count();
    ensure(
        differing == 0,
        format!("50 runs, {differing} differ from the first"),
    )
}

fn oracle() -> Outcome {
    let registry = Arc::new(StoreRegistry::default());
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for i in 0..500 {
        let c = CircuitGen::new(&mut rng).circuit();
        let jobs: Vec<_> = (0..5)
            .map(|_| inputs(&mut rng, c.signature().ins()))
            .collect();
        compare_with_network(&c, &jobs, registry.clone())
            .map_err(|e| format!("circuit {i}: {e}"))?;
    }
    Ok("500 circuits x 5 inputs agree".into())
}

fn laws() -> Outcome {
    let report = check_laws(2024, 500);
    let summary = format!("{} suites, 500 cases each", report.suites.len());
    if report.passed() && report.suites.len() == 9 {
        Ok(summary)
    } else {
        Err(format!("{summary}\n{report}"))
    }
}

fn int() -> Port {
    Port::var(ValueType::Int)
}

fn containment() -> Outcome {
    let reg = Arc::new(StoreRegistry::default());
    let reciprocal = function_task("reciprocal", int(), int(), |v| match v.as_int() {
        Some(0) => Err(TaskError::new("division by zero")),
        Some(x) => Ok(Value::Int(100 / x)),
        None => Err(TaskError::new("not an int")),
    });
    let net = start_network(&reciprocal, reg.clone()).map_err(|e| e.to_string())?;
    let before = net.live_worker_count();
    let store = |x| reg.store(&int(), &Value::Int(x), TaskId::random(), JobId::random());
    let (a, b) = (JobId::random(), JobId::random());
    net.write(a, &[store(0).map_err(|e| e.to_string())?])
        .map_err(|e| e.to_string())?;
    net.write(b, &[store(4).map_err(|e| e.to_string())?])
        .map_err(|e| e.to_string())?;
    let (ja, ra) = net.read().map_err(|e| e.to_string())?;
    let (jb, rb) = net.read().map_err(|e| e.to_string())?;
    let a_failed = ja == a && matches!(&ra, Err(e) if e.task == "reciprocal");
    let b_value = rb.ok().and_then(|refs| reg.fetch(&refs[0]).ok());
    let after = net.live_worker_count();
    net.stop();
    ensure(
        a_failed && jb == b && b_value == Some(Value::Int(25)) && after == before,
        format!("job A failed: {a_failed}, job B = {b_value:?}, workers {before} -> {after}"),
    )
}

fn map_semantics() -> Outcome {
    let list = Port::var(ValueType::list(ValueType::Int));
    let double = function_task("double", int(), int(), |v| {
        Ok(Value::Int(v.as_int().unwrap_or_default() * 2))
    });
    let m = map_c(&double, list.clone(), list.clone()).map_err(|e| e.to_string())?;
    let reg = Arc::new(StoreRegistry::default());
    let net = start_network(&m, reg.clone()).map_err(|e| e.to_string())?;
    for k in [0i64, 1, 100] {
        let xs = Value::List((1..=k).map(Value::Int).collect());
        let want = Value::List((1..=k).map(|x| Value::Int(2 * x)).collect());
        let input = reg
            .store(&list, &xs, TaskId::random(), JobId::random())
            .map_err(|e| e.to_string())?;
        net.write(JobId::random(), &[input])
            .map_err(|e| e.to_string())?;
        let refs = net
            .read()
            .map_err(|e| e.to_string())?
            .1
            .map_err(|e| e.to_string())?;
        let got = reg.fetch(&refs[0]).map_err(|e| e.to_string())?;
        if got != want {
            net.stop();
            return Err(format!("k = {k}: got {got}"));
        }
    }
    net.stop();
    Ok("k in {0, 1, 100} match the element-wise map".into())
}

fn buildflow_golden() -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/build");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for f in ["intro.txt", "method.txt", "results.txt", "build.yaml"] {
        std::fs::copy(fixtures.join(f), dir.path().join(f)).map_err(|e| e.to_string())?;
    }
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_flowkit"))
            .arg("buildflow")
            .arg("--config")
            .arg(dir.path().join("build.yaml"))
            .arg("--workdir")
            .arg(dir.path().join("work"))
            .output()
            .map_err(|e| e.to_string())
    };
    let ok = run()?;
    let expected = std::fs::read(fixtures.join("expected.txt")).map_err(|e| e.to_string())?;
    let produced = std::fs::read(dir.path().join("thesis.txt")).unwrap_or_default();
    std::fs::remove_file(dir.path().join("method.txt")).map_err(|e| e.to_string())?;
    let missing = run()?;
    let stderr = String::from_utf8_lossy(&missing.stderr);
    ensure(
        ok.status.code() == Some(0)
            && produced == expected
            && missing.status.code() == Some(3)
            && stderr.contains("step-1"),
        format!(
            "exit {:?}, golden match {}, missing input exit {:?}",
            ok.status.code(),
            produced == expected,
            missing.status.code()
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, Check); 9] = [
        ("type-mismatch rejection", type_mismatch),
        ("parallel speedup", speedup),
        ("linear scaling", scaling),
        ("determinism", determinism),
        ("oracle equivalence", oracle),
        ("circuit laws", laws),
        ("error containment", containment),
        ("map semantics", map_semantics),
        ("buildflow golden", buildflow_golden),
    ];
    let mut failed = Vec::new();
    println!();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                println!("FAIL {} {name}: {detail} ({secs:.1}s)", i + 1);
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
