//! Command pipelines over a list of files.
//!
//! A config names the input files, a final output and a list of shell
//! command templates. Every step but the last runs once per input file,
//! inside a `map_c`, and the last step assembles the per-file results:
//!
//! ```yaml
//! steps:
//!   - "tr a-z A-Z < {input} > {output}"
//!   - "cat {inputs} > {output}"
//! inputs: [intro.txt, body.txt, outro.txt]
//! output: book.txt
//! ```
//!
//! Per-file steps see `{input}` and `{output}`; the assembly step sees
//! `{inputs}` (all per-file results, space separated) and `{output}`.
//! Substituted paths are shell-quoted. Relative paths are resolved against
//! the config file's directory, which is also the working directory of
//! every command.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Arc;

use flowkit::{
    function_task, map_c, then_all, Circuit, CompositionError, JobId, NetworkOptions, Port,
    StoreRegistry, TaskError, TaskId, Value, ValueType,
};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub steps: Vec<String>,
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
}

impl BuildConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: BuildConfig =
            serde_yaml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.steps.is_empty() {
            return Err(CliError::Config("at least one step is required".into()));
        }
        let mut names: Vec<_> = cfg.inputs.iter().map(|p| p.file_name()).collect();
        names.sort();
        if names.iter().any(Option::is_none) {
            return Err(CliError::Config("every input must name a file".into()));
        }
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("input file names must be distinct".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn quote(path: &str) -> Result<String, TaskError> {
    shlex::try_quote(path)
        .map(|q| q.into_owned())
        .map_err(|e| TaskError::new(format!("cannot quote {path:?}: {e}")))
}

/// Runs `command` through `sh -c` in `dir`; a nonzero exit is an error
/// carrying the exit code and the command's stderr.
pub fn run_command(command: &str, dir: &Path) -> Result<(), TaskError> {
    let out = Command::new("sh")
        .arg("-c")
        .arg(command)
        .current_dir(dir)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .output()
        .map_err(|e| TaskError::new(format!("cannot run `{command}`: {e}")))?;
    if out.status.success() {
        return Ok(());
    }
    let code = out
        .status
        .code()
        .map_or_else(|| "a signal".to_string(), |c| format!("code {c}"));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let stderr = stderr.trim();
    let mut msg = format!("`{command}` exited with {code}");
    if !stderr.is_empty() {
        msg.push_str(": ");
        msg.push_str(stderr);
    }
    Err(TaskError::new(msg))
}

fn path_port() -> Port {
    Port::var(ValueType::Str)
}

fn paths_port() -> Port {
    Port::var(ValueType::list(ValueType::Str))
}

/// Per-file step `index` (zero-based): `{input}` to `<workdir>/<name>.step<n>`.
fn file_step(index: usize, template: String, workdir: PathBuf, dir: PathBuf) -> Circuit {
    let name = format!("step-{}", index + 1);
    function_task(name, path_port(), path_port(), move |v| {
        let input = PathBuf::from(
            v.as_str()
                .ok_or_else(|| TaskError::new("expected a path"))?,
        );
        let file = input
            .file_name()
            .ok_or_else(|| TaskError::new(format!("{} names no file", input.display())))?;
        let output = workdir.join(format!("{}.step{}", file.to_string_lossy(), index + 1));
        let output = output.to_string_lossy().into_owned();
        let command = template
            .replace("{input}", &quote(&input.to_string_lossy())?)
            .replace("{output}", &quote(&output)?);
        run_command(&command, &dir)?;
        Ok(Value::Str(output))
    })
}

fn assemble_step(template: String, output: PathBuf, dir: PathBuf) -> Circuit {
    function_task("assemble", paths_port(), path_port(), move |v| {
        let parts = v
            .as_list()
            .ok_or_else(|| TaskError::new("expected a list of paths"))?
            .iter()
            .map(|p| quote(p.as_str().unwrap_or_default()))
            .collect::<Result<Vec<_>, _>>()?;
        let output = output.to_string_lossy().into_owned();
        let command = template
            .replace("{inputs}", &parts.join(" "))
            .replace("{output}", &quote(&output)?);
        run_command(&command, &dir)?;
        Ok(Value::Str(output))
    })
}

/// A resolved build: absolute paths and the circuit to run.
pub struct Build {
    pub inputs: Vec<String>,
    pub output: PathBuf,
    pub circuit: Circuit,
}

fn absolute(dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

/// `map_c(step-1 ; ... ; step-k) ; assemble`, or just `assemble` when there
/// is a single step.
pub fn build_circuit(
    cfg: &BuildConfig,
    config_dir: &Path,
    workdir: &Path,
) -> Result<Build, CompositionError> {
    let (assemble, per_file) = cfg.steps.split_last().expect("config has a step");
    let output = absolute(config_dir, &cfg.output);
    let assemble = assemble_step(assemble.clone(), output.clone(), config_dir.to_path_buf());
    let circuit = if per_file.is_empty() {
        assemble
    } else {
        let steps: Vec<Circuit> = per_file
            .iter()
            .enumerate()
            .map(|(i, t)| {
                file_step(
                    i,
                    t.clone(),
                    workdir.to_path_buf(),
                    config_dir.to_path_buf(),
                )
            })
            .collect();
        let inner = then_all(&steps)?;
        let each = map_c(&inner, paths_port(), paths_port())?;
        then_all(&[each, assemble])?
    };
    let inputs = cfg
        .inputs
        .iter()
        .map(|p| absolute(config_dir, p).to_string_lossy().into_owned())
        .collect();
    Ok(Build {
        inputs,
        output,
        circuit,
    })
}

/// Runs the pipeline described by the config at `config_path` and returns
/// the output path.
pub fn run_buildflow(
    config_path: &Path,
    workdir: &Path,
    options: NetworkOptions,
) -> Result<PathBuf, CliError> {
    let cfg = BuildConfig::load(config_path)?;
    let config_dir = config_path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let config_dir = std::fs::canonicalize(config_dir).map_err(|e| CliError::io(config_dir, e))?;
    std::fs::create_dir_all(workdir).map_err(|e| CliError::io(workdir, e))?;
    let workdir = std::fs::canonicalize(workdir).map_err(|e| CliError::io(workdir, e))?;
    let build = build_circuit(&cfg, &config_dir, &workdir)?;

    let registry = Arc::new(StoreRegistry::new(&workdir));
    let net = flowkit::build_basic_network(&build.circuit, registry.clone(), options)?;
    let input = Value::List(
        build
            .inputs
            .iter()
            .map(|p| Value::str(p.as_str()))
            .collect(),
    );
    let input = registry.store(&paths_port(), &input, TaskId::random(), JobId::random())?;
    net.write(JobId::random(), &[input])?;
    // Blocks until the whole pipeline has finished.
    let (_, result) = net.read()?;
    let refs = result?;
    let out = registry.fetch(&refs[0])?;
    net.stop();
    Ok(PathBuf::from(
        out.as_str().expect("assemble returns a path"),
    ))
}

/// The circuit tree for `--explain`.
pub fn explain(config_path: &Path, workdir: &Path) -> Result<String, CliError> {
    let cfg = BuildConfig::load(config_path)?;
    let dir = config_path.parent().unwrap_or(Path::new("."));
    let build = build_circuit(&cfg, dir, workdir)?;
    Ok(build.circuit.render_tree())
}
