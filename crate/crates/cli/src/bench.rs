//! Benchmark harness: parallel speedup and scaling with input size.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use flowkit::serial::run_serial_values;
use flowkit::{
    beside, build_basic_network, function_task, Circuit, JobId, NetworkOptions, Port,
    StoreRegistry, TaskId, Value, ValueType,
};

use crate::error::CliError;
use crate::songflow::{run_songflow, SongflowConfig};

pub const SPEEDUP_JOBS: usize = 20;
pub const SPEEDUP_SLEEP: Duration = Duration::from_millis(50);
pub const SCALING_SIZES: [usize; 4] = [100, 200, 400, 800];
pub const SCALING_ROW_COST: Duration = Duration::from_micros(100);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Parallel,
    Serial,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Parallel => "parallel",
            Mode::Serial => "serial",
        }
    }
}

/// One timed run.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub suite: &'static str,
    pub mode: Mode,
    pub n: usize,
    pub run: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    LinearFit {
        slope,
        intercept,
        r2,
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Two independent branches, each a task that sleeps for `cost`.
pub fn two_branch_circuit(cost: Duration) -> Circuit {
    let int = Port::var(ValueType::Int);
    let branch = |name: &str| {
        function_task(name, int.clone(), int.clone(), move |v| {
            std::thread::sleep(cost);
            Ok(v.clone())
        })
    };
    beside(&branch("left"), &branch("right"))
}

/// Wall time of pushing `jobs` jobs through `c` as a network.
pub fn time_parallel(
    c: &Circuit,
    jobs: usize,
    options: NetworkOptions,
) -> Result<Duration, CliError> {
    let registry = Arc::new(StoreRegistry::default());
    let net = build_basic_network(c, registry.clone(), options)?;
    let inputs: Vec<_> = (0..jobs as i64)
        .map(|i| {
            c.signature()
                .ins()
                .iter()
                .map(|p| registry.store(p, &Value::Int(i), TaskId::random(), JobId::random()))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let start = Instant::now();
    for refs in &inputs {
        net.write(JobId::random(), refs)?;
    }
    for _ in 0..jobs {
        net.read()?.1?;
    }
    let elapsed = start.elapsed();
    net.stop();
    Ok(elapsed)
}

/// Wall time of evaluating the same jobs one after another.
pub fn time_serial(c: &Circuit, jobs: usize) -> Result<Duration, CliError> {
    let arity = c.signature().n_ins();
    let start = Instant::now();
    for i in 0..jobs as i64 {
        run_serial_values(c, vec![Value::Int(i); arity])?;
    }
    Ok(start.elapsed())
}

pub fn speedup(repeats: usize, options: NetworkOptions) -> Result<Vec<Sample>, CliError> {
    let c = two_branch_circuit(SPEEDUP_SLEEP);
    let mut out = Vec::new();
    for run in 0..repeats {
        let par = time_parallel(&c, SPEEDUP_JOBS, options)?;
        let ser = time_serial(&c, SPEEDUP_JOBS)?;
        for (mode, d) in [(Mode::Parallel, par), (Mode::Serial, ser)] {
            out.push(Sample {
                suite: "speedup",
                mode,
                n: SPEEDUP_JOBS,
                run,
                wall_ms: ms(d),
            });
        }
    }
    Ok(out)
}

pub fn scaling(
    sizes: &[usize],
    repeats: usize,
    row_cost: Duration,
    workdir: &Path,
    options: NetworkOptions,
) -> Result<Vec<Sample>, CliError> {
    let mut out = Vec::new();
    for &n in sizes {
        for run in 0..repeats {
            let dir: PathBuf = workdir.join(format!("scaling-{n}-{run}"));
            let mut cfg = SongflowConfig::new(&dir, n, 7);
            cfg.row_cost = row_cost;
            cfg.options = options;
            let result = run_songflow(&cfg)?;
            out.push(Sample {
                suite: "scaling",
                mode: Mode::Parallel,
                n,
                run,
                wall_ms: ms(result.elapsed),
            });
            std::fs::remove_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        }
    }
    Ok(out)
}

/// Median wall time per `(mode, n)`, in first-seen order.
pub fn medians(samples: &[Sample]) -> Vec<(Mode, usize, f64)> {
    let mut keys: Vec<(Mode, usize)> = Vec::new();
    for s in samples {
        if !keys.contains(&(s.mode, s.n)) {
            keys.push((s.mode, s.n));
        }
    }
    keys.into_iter()
        .map(|(mode, n)| {
            let xs: Vec<f64> = samples
                .iter()
                .filter(|s| s.mode == mode && s.n == n)
                .map(|s| s.wall_ms)
                .collect();
            (mode, n, median(&xs))
        })
        .collect()
}

/// Parallel over serial median wall time.
pub fn speedup_ratio(samples: &[Sample]) -> f64 {
    let m = medians(samples);
    let get = |mode| {
        m.iter()
            .find(|e| e.0 == mode)
            .map(|e| e.2)
            .unwrap_or(f64::NAN)
    };
    get(Mode::Parallel) / get(Mode::Serial)
}

/// Fit over per-size medians plus the ratio of the largest to the smallest.
pub fn scaling_summary(samples: &[Sample]) -> (LinearFit, f64) {
    let points: Vec<(f64, f64)> = medians(samples)
        .into_iter()
        .map(|(_, n, wall)| (n as f64, wall))
        .collect();
    let fit = linear_fit(&points);
    let min = points.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
    let max = points.iter().max_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
    (fit, max.1 / min.1)
}

pub fn to_csv(samples: &[Sample]) -> String {
    let mut s = String::from("suite,mode,n,run,wall_ms\n");
    for x in samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.3}",
            x.suite,
            x.mode.as_str(),
            x.n,
            x.run,
            x.wall_ms
        );
    }
    s
}

pub fn to_table(samples: &[Sample]) -> String {
    let mut s = format!(
        "{:<8} {:<9} {:>6} {:>12}\n",
        "suite", "mode", "n", "median_ms"
    );
    let suite = samples.first().map_or("", |x| x.suite);
    for (mode, n, wall) in medians(samples) {
        let _ = writeln!(
            s,
            "{:<8} {:<9} {:>6} {:>12.1}",
            suite,
            mode.as_str(),
            n,
            wall
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_an_exact_line() {
        let pts: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0]
            .iter()
            .map(|&x| (x, 3.0 * x + 12.0))
            .collect();
        let fit = linear_fit(&pts);
        assert!((fit.slope - 3.0).abs() < 1e-9);
        assert!((fit.intercept - 12.0).abs() < 1e-9);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_matches_hand_computed_values() {
        // x = 1..4, y = 2, 3, 5, 4: slope 0.8, intercept 1.5, r2 0.64.
        let fit = linear_fit(&[(1.0, 2.0), (2.0, 3.0), (3.0, 5.0), (4.0, 4.0)]);
        assert!((fit.slope - 0.8).abs() < 1e-12);
        assert!((fit.intercept - 1.5).abs() < 1e-12);
        assert!((fit.r2 - 0.64).abs() < 1e-12);
    }

    #[test]
    fn medians_of_odd_and_even_counts() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn csv_has_the_documented_columns() {
        let samples = vec![Sample {
            suite: "speedup",
            mode: Mode::Serial,
            n: 20,
            run: 0,
            wall_ms: 12.5,
        }];
        assert_eq!(
            to_csv(&samples),
            "suite,mode,n,run,wall_ms\nspeedup,serial,20,0,12.500\n"
        );
    }

    #[test]
    fn serial_and_parallel_agree_on_the_two_branch_circuit() {
        let c = two_branch_circuit(Duration::ZERO);
        let out = run_serial_values(&c, vec![Value::Int(1), Value::Int(2)]).unwrap();
        assert_eq!(out, vec![Value::Int(1), Value::Int(2)]);
        assert!(time_parallel(&c, 3, NetworkOptions::default()).is_ok());
    }
}
