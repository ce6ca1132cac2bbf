//! Experiment runner behind the `carnot` binary.

pub mod args;
mod experiments;

use std::fs;
use std::path::Path;

use carnot_core::{Error, Result, VERSION};
use clap::Args;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use args::{Command, Run};

/// Output document of one run: the resolved configuration and the result.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub version: String,
    pub config: Value,
    pub result: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn execute(command: &Command) -> Result<Report> {
    let name = command.name();
    match command {
        Command::GroupSelftest(r) => go(r, name, experiments::group_selftest),
        Command::HaarTest(r) => go(r, name, experiments::haar_test),
        Command::AhlforsCheck(r) => go(r, name, experiments::ahlfors_check),
        Command::ModulusSolve(r) => go(r, name, experiments::modulus_solve),
        Command::ExceptionalWitness(r) => go(r, name, experiments::exceptional_witness),
        Command::CroftonVerify(r) => go(r, name, experiments::crofton_verify),
        Command::CorollaryTrend(r) => go(r, name, experiments::corollary_trend),
    }
}

/// 3 for numerical failures, 2 for everything the user can fix.
pub fn exit_code(err: &Error) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

pub fn error_payload(experiment: Option<&str>, kind: &str, message: &str, code: u8) -> Value {
    json!({
        "experiment": experiment,
        "version": VERSION,
        "error": { "kind": kind, "message": message },
        "exit_code": code,
    })
}

pub fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Numerical(_) => "numerical",
        Error::Io(_) => "io",
        Error::Unsupported(_) => "unsupported",
        Error::DimensionMismatch { .. } | Error::Invalid(_) => "validation",
    }
}

fn go<T>(run: &Run<T>, name: &str, body: impl FnOnce(&mut T) -> Result<Value> + Send) -> Result<Report>
where
    T: Args + Serialize + DeserializeOwned + Send,
{
    if run.threads == 0 {
        return Err(Error::invalid("--threads must be at least 1"));
    }
    let mut cfg: T = merge(&run.params, run.config.as_deref(), name)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let result = pool.install(|| body(&mut cfg))?;
    let mut config = serde_json::to_value(&cfg).map_err(|e| Error::invalid(e.to_string()))?;
    if let Value::Object(m) = &mut config {
        m.retain(|_, v| !v.is_null());
    }
    let report = Report { experiment: name.into(), version: VERSION.into(), config, result };
    if let Some(out) = &run.out {
        fs::write(out, report.to_json())?;
    }
    Ok(report)
}

/// Entries of the config file overlaid with the non-null flags. The file may
/// also be a previous report, whose `config` section is then used.
fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>, experiment: &str) -> Result<T> {
    let mut base = Map::new();
    if let Some(path) = config {
        let text = fs::read_to_string(path)?;
        let bad = |e: serde_json::Error| Error::invalid(format!("config {}: {e}", path.display()));
        let mut value: Value = serde_json::from_str(&text).map_err(bad)?;
        if let Some(doc) = value.as_object_mut().filter(|m| m.contains_key("config")) {
            if let Some(e) = doc.get("experiment").filter(|e| e.as_str() != Some(experiment)) {
                return Err(Error::invalid(format!("config is for experiment {e}, not {experiment}")));
            }
            value = doc.remove("config").unwrap_or(Value::Null);
        }
        match value {
            Value::Object(m) => base = m,
            _ => return Err(Error::invalid(format!("config {} must hold a JSON object", path.display()))),
        }
    }
    if let Value::Object(f) = serde_json::to_value(flags).map_err(|e| Error::invalid(e.to_string()))? {
        base.extend(f.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| Error::invalid(format!("configuration: {e}")))
}
