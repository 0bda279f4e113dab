//! `.zckpt` parameter checkpoints.
//!
//! Layout: one line of compact JSON (the [`CheckpointHeader`]) terminated by `\n`,
//! followed by every network's parameters as little-endian `f64`, networks in header
//! order, each laid out as in [`Mlp::params_flat`].

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Mlp, OutputActivation};
use crate::{Error, Result};

pub const CHECKPOINT_EXTENSION: &str = "zckpt";
const FORMAT_TAG: &str = "zckpt";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkHeader {
    pub name: String,
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub output_activation: OutputActivation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    #[serde(default)]
    pub config_hash: Option<String>,
    /// Free-form metadata, e.g. the update mode that produced the networks.
    #[serde(default)]
    pub meta: serde_json::Map<String, serde_json::Value>,
    pub networks: Vec<NetworkHeader>,
}

/// A set of named networks plus metadata.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub networks: Vec<Mlp>,
}

impl Checkpoint {
    pub fn new(seed: u64, named: Vec<(String, Mlp)>) -> Self {
        let (names, networks): (Vec<_>, Vec<_>) = named.into_iter().unzip();
        let headers = names
            .into_iter()
            .zip(&networks)
            .map(|(name, m): (String, &Mlp)| NetworkHeader {
                name,
                layer_sizes: m.layer_sizes(),
                activation: m.activation(),
                output_activation: m.output_activation().clone(),
            })
            .collect();
        Self {
            header: CheckpointHeader {
                format: FORMAT_TAG.into(),
                version: FORMAT_VERSION,
                seed,
                config_hash: None,
                meta: Default::default(),
                networks: headers,
            },
            networks,
        }
    }

    pub fn network(&self, name: &str) -> Option<&Mlp> {
        self.header
            .networks
            .iter()
            .position(|h| h.name == name)
            .map(|i| &self.networks[i])
    }

    /// Networks whose name starts with `prefix`, in stored order.
    pub fn networks_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Mlp> + 'a {
        self.header
            .networks
            .iter()
            .zip(&self.networks)
            .filter(move |(h, _)| h.name.starts_with(prefix))
            .map(|(_, m)| m)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_string(&self.header)
            .map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
        w.write_all(header.as_bytes())?;
        w.write_all(b"\n")?;
        for net in &self.networks {
            for v in net.params_flat() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut line = Vec::new();
        reader.read_until(b'\n', &mut line)?;
        if line.last() != Some(&b'\n') {
            return Err(Error::Format("checkpoint header is not newline-terminated".into()));
        }
        let header: CheckpointHeader = serde_json::from_slice(&line[..line.len() - 1])
            .map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
        if header.format != FORMAT_TAG || header.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint format {} v{}",
                header.format, header.version
            )));
        }
        let mut networks = Vec::with_capacity(header.networks.len());
        let mut buf = [0u8; 8];
        for nh in &header.networks {
            let mut net = Mlp::new(&nh.layer_sizes, nh.activation, nh.output_activation.clone(), 0)?;
            let mut values = Vec::with_capacity(net.param_count());
            for _ in 0..net.param_count() {
                reader.read_exact(&mut buf).map_err(|_| {
                    Error::Format(format!("checkpoint truncated inside network `{}`", nh.name))
                })?;
                values.push(f64::from_le_bytes(buf));
            }
            net.set_params_flat(&values)?;
            networks.push(net);
        }
        let mut rest = Vec::new();
        reader.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Format(format!(
                "{} trailing bytes after checkpoint payload",
                rest.len()
            )));
        }
        Ok(Self { header, networks })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::new();
        self.write_to(&mut bytes)?;
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(fs::File::open(path)?)
    }
}
