//! Run configuration: defaults, then an optional JSON file, then flags given
//! on the command line. The merged object is deserialized strictly, so an
//! unknown or mistyped key fails with its name in the message.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crlab::basis::BasisFamily;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration: exit status 3.
    Config(String),
    /// Anything that went wrong while running: exit status 1.
    Runtime(String),
}

impl From<crlab::Error> for CliError {
    fn from(e: crlab::Error) -> Self {
        match e {
            crlab::Error::Config(_) | crlab::Error::InvalidIndex { .. } | crlab::Error::QuadratureParams(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Basis family as spelled on the command line. An eigenspace takes its
/// level from the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Hol,
    Rad,
    Eig,
}

impl FamilyArg {
    pub fn family(self, n: usize) -> BasisFamily {
        match self {
            FamilyArg::Hol => BasisFamily::Holomorphic,
            FamilyArg::Rad => BasisFamily::Radial,
            FamilyArg::Eig => BasisFamily::Eigenspace { level: n },
        }
    }
}

/// Merge defaults, the config file and explicit flags into `C`.
pub fn resolve<C, A>(subcommand: &str, file: Option<&Path>, flags: &A) -> CliResult<C>
where
    C: Default + Serialize + DeserializeOwned,
    A: Serialize,
{
    let mut merged = as_object(serde_json::to_value(C::default())?)?;
    if let Some(path) = file {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        let Value::Object(obj) = value else {
            return Err(CliError::Config(format!("config {} must be a JSON object", path.display())));
        };
        for (k, v) in obj {
            if k == "subcommand" {
                if v.as_str() != Some(subcommand) {
                    return Err(CliError::Config(format!("subcommand: config is for {v}, not \"{subcommand}\"")));
                }
                continue;
            }
            merged.insert(k, v);
        }
    }
    for (k, v) in as_object(serde_json::to_value(flags)?)? {
        merged.insert(k, v);
    }
    serde_path_to_error::deserialize(Value::Object(merged)).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("{path}: {inner}"))
        }
    })
}

fn as_object(v: Value) -> CliResult<Map<String, Value>> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Runtime("configuration did not serialize to an object".into())),
    }
}

/// `dir/name.csv` → `dir/name.csv.<suffix>`
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Resolved<'a, C> {
    subcommand: &'a str,
    #[serde(flatten)]
    config: &'a C,
}

#[derive(Serialize)]
struct Meta {
    crate_version: &'static str,
    tensor_cache_format: u32,
    started_unix: f64,
    elapsed_seconds: f64,
    threads: usize,
}

/// Resolved config and run metadata written next to a primary output. The
/// config alone determines the output bytes; wall-clock data goes to the
/// metadata file.
pub struct Provenance {
    started: SystemTime,
    clock: Instant,
}

impl Provenance {
    pub fn start() -> Self {
        Self { started: SystemTime::now(), clock: Instant::now() }
    }

    pub fn write<C: Serialize>(&self, output: &Path, subcommand: &str, config: &C) -> CliResult<()> {
        write_json(&sidecar(output, "config.json"), &Resolved { subcommand, config })?;
        let meta = Meta {
            crate_version: env!("CARGO_PKG_VERSION"),
            tensor_cache_format: crlab::coupling::CACHE_FORMAT_VERSION,
            started_unix: self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            elapsed_seconds: self.clock.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
        };
        write_json(&sidecar(output, "meta.json"), &meta)
    }
}

/// Accepts a number or one of "inf", "infinity" (JSON has no infinity).
pub mod exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            if v.is_infinite() {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(v)?;
            }
        }
        seq.end()
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Raw>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Raw::Num(v) => Ok(v),
                Raw::Text(t) => t.parse::<f64>().map_err(|_| serde::de::Error::custom(format!("not an exponent: {t}"))),
            })
            .collect()
    }
}
