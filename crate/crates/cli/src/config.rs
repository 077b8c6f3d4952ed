//! Experiment configuration: strict TOML with explicit versions and
//! seeds. Unknown keys are errors, and every error message names the
//! offending field.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use perclab_core::cayley::GroupSpec;

/// Raised for malformed configs; mapped to exit code 2.
#[derive(Debug)]
pub struct Validation(pub String);

impl std::fmt::Display for Validation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}
impl std::error::Error for Validation {}

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub version: u32,
    /// Optional; when present it must match the subcommand.
    pub kind: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub graph: Option<GraphConfig>,
    pub graph2: Option<GraphConfig>,
    #[serde(default)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub family: String,
    pub rank: Option<u32>,
    pub modulus: Option<u64>,
    pub generators: Option<Vec<Vec<i64>>>,
    pub factors: Option<Vec<GraphConfig>>,
    pub label: Option<String>,
}

impl GraphConfig {
    pub fn to_spec(&self) -> Result<GroupSpec> {
        let spec = match self.family.as_str() {
            "free-abelian" => {
                let rank = self
                    .rank
                    .ok_or_else(|| Validation("graph.rank is required for free-abelian".into()))?;
                match &self.generators {
                    Some(gens) => GroupSpec::new(
                        perclab_core::cayley::Family::FreeAbelian(rank),
                        gens.clone(),
                        self.label.clone().unwrap_or_else(|| format!("Z^{rank}")),
                    )?,
                    None => GroupSpec::free_abelian_std(rank),
                }
            }
            "heisenberg" => match &self.generators {
                Some(gens) => GroupSpec::new(
                    perclab_core::cayley::Family::Heisenberg,
                    gens.clone(),
                    self.label.clone().unwrap_or_else(|| "heisenberg".into()),
                )?,
                None => GroupSpec::heisenberg_std(),
            },
            "cyclic" => {
                let k = self
                    .modulus
                    .ok_or_else(|| Validation("graph.modulus is required for cyclic".into()))?;
                GroupSpec::cyclic_std(k)
            }
            "product" => {
                let factors = self
                    .factors
                    .as_ref()
                    .ok_or_else(|| Validation("graph.factors is required for product".into()))?;
                let specs: Result<Vec<GroupSpec>> =
                    factors.iter().map(|f| f.to_spec()).collect();
                GroupSpec::product(
                    specs?,
                    self.label.clone().unwrap_or_else(|| "product".into()),
                )
            }
            other => bail!(Validation(format!("unknown graph.family \"{other}\""))),
        };
        Ok(spec)
    }
}

/// Loads and validates the raw config file.
pub fn load(path: &std::path::Path) -> Result<(RawConfig, String)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| Validation(e.to_string()))?;
    if raw.version != CONFIG_VERSION {
        bail!(Validation(format!(
            "config version {} unsupported (expected {CONFIG_VERSION})",
            raw.version
        )));
    }
    Ok((raw, text))
}

/// Deserializes the per-kind params table strictly.
pub fn params<T: for<'de> Deserialize<'de>>(raw: &RawConfig) -> Result<T> {
    let value = toml::Value::Table(raw.params.clone());
    T::deserialize(value).map_err(|e| Validation(format!("params: {e}")).into())
}

pub fn require_graph(raw: &RawConfig) -> Result<GroupSpec> {
    raw.graph
        .as_ref()
        .ok_or_else(|| Validation("missing [graph] section".into()))?
        .to_spec()
}

pub fn require_graph2(raw: &RawConfig) -> Result<GroupSpec> {
    raw.graph2
        .as_ref()
        .ok_or_else(|| Validation("missing [graph2] section".into()))?
        .to_spec()
}

pub fn require_seed(raw: &RawConfig, flag: Option<u64>) -> Result<u64> {
    flag.or(raw.seed)
        .ok_or_else(|| Validation("missing field `seed` (config or --seed)".into()).into())
}
