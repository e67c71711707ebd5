//! Run configuration: flags, then environment, then a `key = value` file, then defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use heckelab::geometry::FundamentalDomainMesh;
use heckelab::precision::{DEFAULT_PRECISION, MIN_PRECISION};
use heckelab::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Pretty,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true).map_err(|_| Error::InvalidInput(format!("unknown format {s:?}")))
    }
}

/// Options shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct GlobalOpts {
    /// Working precision in bits (at least 128).
    #[arg(long, global = true, env = "HECKELAB_PRECISION_BITS")]
    pub precision_bits: Option<u32>,
    /// q-expansion truncation override.
    #[arg(long, global = true)]
    pub truncation: Option<usize>,
    /// Height cutoff Y of the fundamental-domain mesh.
    #[arg(long, global = true)]
    pub mesh_y: Option<f64>,
    /// Cells per direction of the mesh.
    #[arg(long, global = true)]
    pub mesh_cells: Option<usize>,
    /// Gauss–Legendre order per cell.
    #[arg(long, global = true)]
    pub quad_order: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "HECKELAB_THREADS")]
    pub threads: Option<usize>,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub precision_bits: u32,
    pub truncation: Option<usize>,
    pub mesh: FundamentalDomainMesh,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

const KEYS: [&str; 8] = ["precision_bits", "truncation", "mesh_y", "mesh_cells", "quad_order", "format", "out", "threads"];

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::InvalidInput(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn value<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    file.get(key)
        .map(|v| v.parse().map_err(|_| Error::InvalidInput(format!("config key {key}: cannot parse {v:?}"))))
        .transpose()
}

impl RunConfig {
    /// Flags and environment arrive merged in `opts`; the file fills what is left.
    pub fn resolve(opts: &GlobalOpts) -> Result<Self> {
        let file = match &opts.config {
            Some(p) => read_config(p)?,
            None => BTreeMap::new(),
        };
        let precision_bits = opts.precision_bits.or(value(&file, "precision_bits")?).unwrap_or(DEFAULT_PRECISION);
        let default = FundamentalDomainMesh::default();
        let y = opts.mesh_y.or(value(&file, "mesh_y")?).unwrap_or(default.y_max);
        let cells = opts.mesh_cells.or(value(&file, "mesh_cells")?).unwrap_or(default.x_cells);
        let order = opts.quad_order.or(value(&file, "quad_order")?).unwrap_or(default.order);
        let config = Self {
            precision_bits,
            truncation: opts.truncation.or(value(&file, "truncation")?),
            mesh: FundamentalDomainMesh::new(y, cells, cells, order)?,
            format: opts.format.or(value(&file, "format")?).unwrap_or_default(),
            out: opts.out.clone().or(value(&file, "out")?),
            threads: opts.threads.or(value(&file, "threads")?),
        };
        if config.precision_bits < MIN_PRECISION {
            return Err(Error::InsufficientPrecision(format!(
                "{} bits is below the minimum of {MIN_PRECISION}",
                config.precision_bits
            )));
        }
        if config.threads == Some(0) {
            return Err(Error::InvalidInput("threads must be positive".into()));
        }
        Ok(config)
    }
}
