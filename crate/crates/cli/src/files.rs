//! On-disk schemas and loaders. Every loader records the SHA-256 of the bytes
//! it read so reports can name their exact inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use symred::expr::{Bindings, Expr};
use symred::reduction::SeparableAnsatz;
use symred::symmetry::{Domain, Generator, PdeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Inputs read so far, in read order.
#[derive(Debug, Default)]
pub struct Inputs(pub Vec<InputDigest>);

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.0.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }

    pub fn json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
    }
}

/// `pde.json`: coefficients, domain, and numeric parameters substituted at load time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeFile {
    #[serde(rename = "A")]
    pub a: Expr,
    #[serde(rename = "B")]
    pub b: Expr,
    #[serde(rename = "C")]
    pub c: Expr,
    #[serde(default = "Domain::unit")]
    pub domain: Domain,
    #[serde(default)]
    pub params: BTreeMap<String, Expr>,
}

impl PdeFile {
    pub fn from_spec(p: &PdeSpec) -> Self {
        Self {
            a: p.a.clone(),
            b: p.b.clone(),
            c: p.c.clone(),
            domain: p.domain,
            params: BTreeMap::new(),
        }
    }

    pub fn into_spec(self) -> Result<PdeSpec> {
        let domain = Domain::new(self.domain.x, self.domain.t)?;
        let params: Bindings = self.params;
        Ok(PdeSpec::with_params(&self.a, &self.b, &self.c, &params, domain)?)
    }
}

pub fn load_pde(inputs: &mut Inputs, path: &Path) -> Result<PdeSpec> {
    let f: PdeFile = inputs.json(path)?;
    f.into_spec().with_context(|| format!("in {}", path.display()))
}

pub fn load_generator(inputs: &mut Inputs, path: &Path) -> Result<Generator> {
    let g: Generator = inputs.json(path)?;
    Generator::new(g.phi, g.xi, g.m).with_context(|| format!("in {}", path.display()))
}

pub fn load_ansatz(inputs: &mut Inputs, path: &Path) -> Result<SeparableAnsatz> {
    let a: SeparableAnsatz = inputs.json(path)?;
    SeparableAnsatz::new(a.phi, a.p, a.r, a.q, a.v).with_context(|| format!("in {}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}
