//! The listening-history workload.
//!
//! Three monthly play logs (`song,artist` rows) are each copied twice, the
//! copies are regrouped so that one branch sees every month, and the two
//! branches count plays per song and per artist before keeping the ten most
//! played entries of each.
//!
//! Play logs are synthetic: songs are drawn from a fixed catalogue with
//! weights proportional to `1 / rank`, from a seeded generator, so a given
//! seed and size always produce the same files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use flowkit::datastore::Layout;
use flowkit::serial::run_serial_values;
use flowkit::{
    beside_all, function_task, id_, replicate, start_network, swap, task, then_all, Circuit,
    CompositionError, DataStoreRef, JobId, NetworkOptions, Port, StoreKind, StoreRegistry,
    TaskError, TaskSpec, Value, ValueType,
};
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

pub const MONTHS: usize = 3;
pub const TOP: usize = 10;
pub const TOP_SONGS_FILE: &str = "t10s.csv";
pub const TOP_ARTISTS_FILE: &str = "t10a.csv";

const ARTISTS: [&str; 12] = [
    "Aurora Vale",
    "Brass Tacks",
    "Cinder Lane",
    "Delta Hum",
    "Echo Park Choir",
    "Fable Street",
    "Glass Harbor",
    "Hollow Pines",
    "Iris Static",
    "Juniper Road",
    "Kestrel",
    "Lumen Drift",
];

const SONGS_PER_ARTIST: usize = 5;

/// `(song, artist)` pairs in popularity order.
fn catalogue() -> Vec<(String, String)> {
    (0..ARTISTS.len() * SONGS_PER_ARTIST)
        .map(|i| {
            // Interleave artists so that popularity is spread across them.
            let artist = ARTISTS[(i * 7) % ARTISTS.len()];
            (format!("Track {:02}", i + 1), artist.to_string())
        })
        .collect()
}

/// `rows` plays for each month.
pub fn synthetic_months(seed: u64, rows: usize) -> Vec<Vec<(String, String)>> {
    let songs = catalogue();
    let weights = WeightedIndex::new((0..songs.len()).map(|i| 1.0 / (i as f64 + 1.0)))
        .expect("weights are positive");
    (0..MONTHS)
        .map(|month| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(month as u64);
            (0..rows)
                .map(|_| songs[weights.sample(&mut rng)].clone())
                .collect()
        })
        .collect()
}

pub fn month_type() -> ValueType {
    ValueType::list(ValueType::tuple([ValueType::Str, ValueType::Str]))
}

pub fn counts_type() -> ValueType {
    ValueType::list(ValueType::tuple([ValueType::Str, ValueType::Int]))
}

pub fn month_port() -> Port {
    Port::new(StoreKind::csv_store(), month_type()).expect("CSV carries string pairs")
}

pub fn top_port() -> Port {
    Port::new(StoreKind::csv_store(), counts_type()).expect("CSV carries counts")
}

fn rows_value(rows: &[(String, String)]) -> Value {
    Value::List(
        rows.iter()
            .map(|(s, a)| Value::Tuple(vec![Value::str(s.as_str()), Value::str(a.as_str())]))
            .collect(),
    )
}

/// Writes the month files into `dir` and returns refs to them.
pub fn write_months(dir: &Path, seed: u64, rows: usize) -> Result<Vec<DataStoreRef>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    synthetic_months(seed, rows)
        .iter()
        .enumerate()
        .map(|(i, month)| {
            let path = dir.join(format!("month{}.csv", i + 1));
            let text = Layout::Csv.encode(&rows_value(month), &month_type())?;
            std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            Ok(DataStoreRef::file(
                StoreKind::csv_store(),
                month_type(),
                path,
            ))
        })
        .collect()
}

/// Spins for `cost`, standing in for real per-row processing.
fn busy(cost: Duration) {
    if cost.is_zero() {
        return;
    }
    let end = Instant::now() + cost;
    while Instant::now() < end {
        std::hint::spin_loop();
    }
}

/// Counts plays per key over all months, most played first, ties by key.
fn count_plays(months: &[Value], field: usize, row_cost: Duration) -> Result<Value, TaskError> {
    let mut counts: BTreeMap<String, i64> = BTreeMap::new();
    for month in months {
        let rows = month
            .as_list()
            .ok_or_else(|| TaskError::new("month is not a list"))?;
        for row in rows {
            busy(row_cost);
            let Value::Tuple(fields) = row else {
                return Err(TaskError::new(format!("bad row {row}")));
            };
            let key = fields[field]
                .as_str()
                .ok_or_else(|| TaskError::new(format!("bad row {row}")))?;
            *counts.entry(key.to_string()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, i64)> = counts.into_iter().collect();
    ranked.sort_by(|(ka, ca), (kb, cb)| cb.cmp(ca).then_with(|| ka.cmp(kb)));
    Ok(Value::List(
        ranked
            .into_iter()
            .map(|(k, c)| Value::Tuple(vec![Value::Str(k), Value::Int(c)]))
            .collect(),
    ))
}

fn aggregate(name: &str, field: usize, row_cost: Duration) -> Result<Circuit, CompositionError> {
    let spec = TaskSpec::new(
        name,
        vec![month_port(); MONTHS],
        Port::var(counts_type()),
        move |months: &[Value]| count_plays(months, field, row_cost),
    );
    task(spec)
}

fn top10() -> Circuit {
    function_task("top10", Port::var(counts_type()), top_port(), |v| {
        let items = v
            .as_list()
            .ok_or_else(|| TaskError::new("expected a list"))?;
        Ok(Value::List(items.iter().take(TOP).cloned().collect()))
    })
}

/// A layer of identities with one swap at `at`.
fn swap_at(at: usize, width: usize) -> Circuit {
    let p = month_port();
    let mut parts: Vec<Circuit> = (0..at).map(|_| id_(p.clone())).collect();
    parts.push(swap(p.clone(), p.clone()));
    parts.extend((at + 2..width).map(|_| id_(p.clone())));
    beside_all(&parts).expect("layer is non-empty")
}

/// `[m1, m2, m3] -> [m1, m2, m3, m1, m2, m3]`.
pub fn organise_ins() -> Result<Circuit, CompositionError> {
    let copies = beside_all(&vec![replicate(month_port()); MONTHS])?;
    // [a, a, b, b, c, c] -> [a, b, a, b, c, c] -> [a, b, a, c, b, c] -> [a, b, c, a, b, c]
    then_all(&[copies, swap_at(1, 6), swap_at(3, 6), swap_at(2, 6)])
}

/// The whole workload: three months in, top songs and top artists out.
pub fn song_circuit(row_cost: Duration) -> Result<Circuit, CompositionError> {
    let songs = then_all(&[aggregate("aggSongs", 0, row_cost)?, top10()])?;
    let artists = then_all(&[aggregate("aggArtists", 1, row_cost)?, top10()])?;
    then_all(&[organise_ins()?, beside_all(&[songs, artists])?])
}

#[derive(Debug, Clone)]
pub struct SongflowConfig {
    /// Rows per month file.
    pub rows: usize,
    pub seed: u64,
    pub workdir: PathBuf,
    pub row_cost: Duration,
    pub serial: bool,
    pub options: NetworkOptions,
}

impl SongflowConfig {
    pub fn new(workdir: impl Into<PathBuf>, rows: usize, seed: u64) -> Self {
        SongflowConfig {
            rows,
            seed,
            workdir: workdir.into(),
            row_cost: Duration::ZERO,
            serial: false,
            options: NetworkOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SongflowOutput {
    pub top_songs: PathBuf,
    pub top_artists: PathBuf,
    /// Time spent running the circuit, excluding data generation.
    pub elapsed: Duration,
}

/// Generates the month files, runs the circuit once and writes the two
/// top-ten lists to `t10s.csv` and `t10a.csv` in the work directory.
pub fn run_songflow(cfg: &SongflowConfig) -> Result<SongflowOutput, CliError> {
    let circuit = song_circuit(cfg.row_cost)?;
    let inputs = write_months(&cfg.workdir.join("months"), cfg.seed, cfg.rows)?;
    let registry = Arc::new(StoreRegistry::new(&cfg.workdir));
    let top_songs = cfg.workdir.join(TOP_SONGS_FILE);
    let top_artists = cfg.workdir.join(TOP_ARTISTS_FILE);
    let targets = [&top_songs, &top_artists];

    let started = Instant::now();
    if cfg.serial {
        let values = inputs
            .iter()
            .map(|r| registry.fetch(r))
            .collect::<Result<Vec<_>, _>>()?;
        let outputs = run_serial_values(&circuit, values)?;
        for (value, path) in outputs.iter().zip(targets) {
            let target = DataStoreRef::file(StoreKind::csv_store(), counts_type(), path);
            registry.save(&target, value)?;
        }
    } else {
        let net = flowkit::build_basic_network(&circuit, registry.clone(), cfg.options)?;
        net.write(JobId::random(), &inputs)?;
        let (_, result) = net.read()?;
        let refs = result?;
        for (r, path) in refs.iter().zip(targets) {
            let src = r.path().expect("top lists are file stores");
            std::fs::copy(src, path).map_err(|e| CliError::io(src, e))?;
            std::fs::remove_file(src).map_err(|e| CliError::io(src, e))?;
        }
        net.stop();
    }
    Ok(SongflowOutput {
        top_songs,
        top_artists,
        elapsed: started.elapsed(),
    })
}

/// Starts (without running) the song network; used for topology dumps.
pub fn song_topology(row_cost: Duration, workdir: &Path) -> Result<String, CliError> {
    let circuit = song_circuit(row_cost)?;
    let net = start_network(&circuit, Arc::new(StoreRegistry::new(workdir)))?;
    Ok(net.topology().render())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn organise_ins_regroups_the_copies() {
        let c = organise_ins().unwrap();
        let tagged: Vec<Value> = (1..=3)
            .map(|i| rows_value(&[(format!("s{i}"), "a".into())]))
            .collect();
        let out = run_serial_values(&c, tagged.clone()).unwrap();
        let expected: Vec<Value> = tagged.iter().chain(&tagged).cloned().collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn circuit_signature() {
        let c = song_circuit(Duration::ZERO).unwrap();
        assert_eq!(
            c.signature().to_string(),
            "[CSVStore<List<Tuple<Str, Str>>>, CSVStore<List<Tuple<Str, Str>>>, CSVStore<List<Tuple<Str, Str>>>] \
             -> [CSVStore<List<Tuple<Str, Int>>>, CSVStore<List<Tuple<Str, Int>>>]"
        );
        let branches = c.kind();
        let flowkit::NodeKind::Then(_, right) = branches else {
            panic!()
        };
        assert_eq!(right.signature().n_ins(), 6);
        assert_eq!(right.signature().n_outs(), 2);
    }

    #[test]
    fn node_count_follows_the_wiring() {
        // organise: 3 replicates under 2 besides (5), three swap layers of
        // 5 leaves under 4 besides (27), chained by 3 thens. Each branch is
        // task ; top10 (3), joined by a beside, and one then on top.
        let c = song_circuit(Duration::ZERO).unwrap();
        assert_eq!(c.node_count(), (5 + 27 + 3) + (3 + 3 + 1) + 1);
    }

    #[test]
    fn counting_sorts_by_count_then_key() {
        let month = rows_value(&[
            ("b".into(), "x".into()),
            ("a".into(), "y".into()),
            ("b".into(), "y".into()),
            ("c".into(), "x".into()),
        ]);
        let songs = count_plays(std::slice::from_ref(&month), 0, Duration::ZERO).unwrap();
        let artists = count_plays(&[month], 1, Duration::ZERO).unwrap();
        let pairs = |v: Value| -> Vec<(String, i64)> {
            v.into_list()
                .unwrap()
                .into_iter()
                .map(|t| match t {
                    Value::Tuple(f) => (f[0].as_str().unwrap().to_string(), f[1].as_int().unwrap()),
                    _ => unreachable!(),
                })
                .collect()
        };
        assert_eq!(
            pairs(songs),
            [("b".into(), 2), ("a".into(), 1), ("c".into(), 1)]
        );
        assert_eq!(pairs(artists), [("x".into(), 2), ("y".into(), 2)]);
    }

    #[test]
    fn synthetic_data_is_seeded() {
        assert_eq!(synthetic_months(1, 50), synthetic_months(1, 50));
        assert_ne!(synthetic_months(1, 50), synthetic_months(2, 50));
        let months = synthetic_months(1, 50);
        assert_ne!(months[0], months[1]);
        assert!(months.iter().all(|m| m.len() == 50));
    }

    #[test]
    fn catalogue_has_no_separators() {
        for (s, a) in catalogue() {
            assert!(!s.contains(',') && !a.contains(','));
        }
    }
}
