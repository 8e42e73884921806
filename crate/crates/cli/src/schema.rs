//! On-disk record formats. Every file is JSON Lines: one object per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use deutsch_noise::deutsch::OracleKind;
use deutsch_noise::numkit::{ComplexMatrix, C64};
use deutsch_noise::qstate::DensityMatrix;
use deutsch_noise::tomography::PauliExpectations;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cplx {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<Cplx> for C64 {
    fn from(z: Cplx) -> Self {
        C64::new(z.re, z.im)
    }
}

/// A reconstructed or supplied single-qubit density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRecord {
    pub oracle: OracleKind,
    pub dim: usize,
    pub entries: Vec<Vec<Cplx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projected: Option<bool>,
}

impl MatrixRecord {
    pub fn from_state(oracle: OracleKind, rho: &DensityMatrix) -> Self {
        let entries = rho
            .matrix()
            .to_rows()
            .into_iter()
            .map(|row| row.into_iter().map(Cplx::from).collect())
            .collect();
        Self {
            oracle,
            dim: rho.dim(),
            entries,
            shots: None,
            seed: None,
            projected: None,
        }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        if self.dim != 2 {
            bail!(
                "oracle {}: only dim 2 matrices are supported, got {}",
                self.oracle,
                self.dim
            );
        }
        if self.entries.len() != self.dim || self.entries.iter().any(|r| r.len() != self.dim) {
            bail!(
                "oracle {}: entries do not form a {}x{} matrix",
                self.oracle,
                self.dim,
                self.dim
            );
        }
        let rows: Vec<Vec<C64>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|&z| z.into()).collect())
            .collect();
        let m = ComplexMatrix::from_rows(&rows)?;
        DensityMatrix::new(m)
            .with_context(|| format!("oracle {}: not a density matrix", self.oracle))
    }
}

/// Exact Pauli expectations, used in place of counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectationRecord {
    pub oracle: OracleKind,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ExpectationRecord {
    pub fn expectations(&self) -> Result<PauliExpectations> {
        Ok(PauliExpectations::new(self.x, self.y, self.z)?)
    }
}

pub fn parse_jsonl<T: DeserializeOwned>(text: &str, origin: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{origin}:{}", i + 1)))
        .collect()
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_jsonl(&text, &path.display().to_string())
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes to `path`, or stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Rejects repeated oracles; returns states in file order.
pub fn states_from_records(records: &[MatrixRecord]) -> Result<Vec<(OracleKind, DensityMatrix)>> {
    let mut out: Vec<(OracleKind, DensityMatrix)> = Vec::new();
    for r in records {
        if out.iter().any(|(k, _)| *k == r.oracle) {
            bail!("oracle {} appears more than once", r.oracle);
        }
        out.push((r.oracle, r.to_state()?));
    }
    if out.is_empty() {
        bail!("no matrix records");
    }
    Ok(out)
}
