//! Published hardware results bundled with the crate (`data/published.toml`).

use std::sync::OnceLock;

use serde::Deserialize;

use crate::channels::{GadParams, MaGates};
use crate::deutsch::OracleKind;
use crate::error::{Error, Result};
use crate::numkit::{c, ComplexMatrix, C64};
use crate::qstate::{DensityMatrix, PureState};

const PUBLISHED_TOML: &str = include_str!("../data/published.toml");

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct Cplx {
    re: f64,
    im: f64,
}

impl From<Cplx> for C64 {
    fn from(z: Cplx) -> C64 {
        c(z.re, z.im)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRow {
    oracle: OracleKind,
    ideal_bit: u8,
    rho00: f64,
    rho11: f64,
    rho01: Cplx,
    success_probability: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateRows {
    g0: [[Cplx; 2]; 2],
    g1: [[Cplx; 2]; 2],
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexRow {
    pub oracle: OracleKind,
    pub weight: f64,
    pub alignment: f64,
    pub fidelity: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    state: Vec<StateRow>,
    gad: GadParams,
    gates: GateRows,
    index: Vec<IndexRow>,
}

#[derive(Debug, Clone)]
pub struct PublishedState {
    pub oracle: OracleKind,
    pub ideal_bit: u8,
    pub state: DensityMatrix,
    pub success_probability: f64,
}

impl PublishedState {
    pub fn reference(&self) -> PureState {
        PureState::basis(1, self.ideal_bit as usize).expect("bit is 0 or 1")
    }
}

/// Everything the bundled file provides, already validated.
#[derive(Debug, Clone)]
pub struct Published {
    pub states: Vec<PublishedState>,
    pub gad: GadParams,
    /// Gates exactly as printed (not unitary).
    pub printed_g0: ComplexMatrix,
    pub printed_g1: ComplexMatrix,
    pub index: Vec<IndexRow>,
}

impl Published {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: Raw = toml::from_str(text).map_err(|e| Error::Reference(e.to_string()))?;
        let states = raw
            .state
            .into_iter()
            .map(|row| {
                let off: C64 = row.rho01.into();
                let m = ComplexMatrix::from_rows(&[
                    vec![c(row.rho00, 0.0), off],
                    vec![off.conj(), c(row.rho11, 0.0)],
                ])?;
                if row.ideal_bit != row.oracle.ideal_bit() {
                    return Err(Error::Reference(format!(
                        "ideal bit mismatch for {}",
                        row.oracle
                    )));
                }
                Ok(PublishedState {
                    oracle: row.oracle,
                    ideal_bit: row.ideal_bit,
                    state: DensityMatrix::new(m)?,
                    success_probability: row.success_probability,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let gad = GadParams::new(raw.gad.gamma, raw.gad.p)?;
        let to_matrix = |rows: [[Cplx; 2]; 2]| {
            ComplexMatrix::from_rows(&rows.map(|r| r.map(C64::from).to_vec()))
        };
        Ok(Self {
            states,
            gad,
            printed_g0: to_matrix(raw.gates.g0)?,
            printed_g1: to_matrix(raw.gates.g1)?,
            index: raw.index,
        })
    }

    /// Re-unitarized correction gates.
    pub fn gates(&self) -> MaGates {
        MaGates::new(&self.printed_g0, &self.printed_g1)
            .expect("printed gates are well conditioned")
    }

    pub fn state(&self, oracle: OracleKind) -> Option<&PublishedState> {
        self.states.iter().find(|s| s.oracle == oracle)
    }

    pub fn index_row(&self, oracle: OracleKind) -> Option<&IndexRow> {
        self.index.iter().find(|r| r.oracle == oracle)
    }
}

pub fn published() -> &'static Published {
    static CELL: OnceLock<Published> = OnceLock::new();
    CELL.get_or_init(|| Published::parse(PUBLISHED_TOML).expect("bundled reference data is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_parses() {
        let p = published();
        assert_eq!(p.states.len(), 4);
        assert_eq!(p.index.len(), 4);
        let order: Vec<_> = p.states.iter().map(|s| s.oracle).collect();
        assert_eq!(order, OracleKind::ALL.to_vec());
        assert_eq!(
            p.gad,
            GadParams {
                gamma: 0.1947,
                p: 0.7761
            }
        );
        assert!(p.printed_g0.unitarity_error() > 1e-4);
        assert!(p.gates().gate(0).unwrap().unitarity_error() < 1e-10);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = PUBLISHED_TOML.replace("[gad]", "[gad]\nextra = 1");
        assert!(matches!(Published::parse(&bad), Err(Error::Reference(_))));
    }
}
