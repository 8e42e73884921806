//! One-bit Deutsch algorithm with its four oracles.
//!
//! Register layout: qubit 0 is the input (measured) qubit, qubit 1 the ancilla.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::qstate::{partial_trace, run_circuit, Circuit, DensityMatrix, Gate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OracleKind {
    #[serde(rename = "f0")]
    F0,
    #[serde(rename = "fId")]
    FId,
    #[serde(rename = "fNot")]
    FNot,
    #[serde(rename = "f1")]
    F1,
}

impl OracleKind {
    /// Enumeration order used for every report and output file.
    pub const ALL: [OracleKind; 4] = [
        OracleKind::F0,
        OracleKind::FId,
        OracleKind::FNot,
        OracleKind::F1,
    ];

    pub fn eval(self, x: u8) -> u8 {
        match self {
            OracleKind::F0 => 0,
            OracleKind::F1 => 1,
            OracleKind::FId => x & 1,
            OracleKind::FNot => (x & 1) ^ 1,
        }
    }

    pub fn is_constant(self) -> bool {
        matches!(self, OracleKind::F0 | OracleKind::F1)
    }

    /// 0 for constant functions, 1 for balanced ones.
    pub fn ideal_bit(self) -> u8 {
        u8::from(!self.is_constant())
    }

    pub fn name(self) -> &'static str {
        match self {
            OracleKind::F0 => "f0",
            OracleKind::FId => "fId",
            OracleKind::FNot => "fNot",
            OracleKind::F1 => "f1",
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OracleKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown oracle `{s}`")))
    }
}

/// `U_f |x>|y> = |x>|y xor f(x)>` on (input, ancilla).
pub fn oracle_circuit(kind: OracleKind) -> Circuit {
    let c = Circuit::new(2).expect("two qubits");
    let built = match kind {
        OracleKind::F0 => Ok(c),
        OracleKind::FId => c.gate(Gate::Cnot, &[0, 1]),
        OracleKind::FNot => c
            .gate(Gate::X, &[0])
            .and_then(|c| c.gate(Gate::Cnot, &[0, 1]))
            .and_then(|c| c.gate(Gate::X, &[0])),
        OracleKind::F1 => c.gate(Gate::X, &[1]),
    };
    built.expect("oracle gates are valid")
}

/// Full two-qubit algorithm: prepare |0>|1>, Hadamards, oracle, final H on the input.
pub fn deutsch_circuit(kind: OracleKind) -> Circuit {
    let mut circuit = Circuit::new(2)
        .and_then(|c| c.gate(Gate::X, &[1]))
        .and_then(|c| c.gate(Gate::H, &[0]))
        .and_then(|c| c.gate(Gate::H, &[1]))
        .expect("preparation gates are valid");
    for step in oracle_circuit(kind).steps() {
        circuit
            .push(&step.label, step.matrix.clone(), &step.targets)
            .expect("oracle step is valid");
    }
    circuit
        .gate(Gate::H, &[0])
        .expect("final Hadamard is valid")
}

#[derive(Debug, Clone)]
pub struct DeutschOutcome {
    pub oracle: OracleKind,
    pub output_state: DensityMatrix,
    /// Most likely measured bit.
    pub predicted_bit: u8,
    /// Population of the ideal bit in `output_state`.
    pub success_prob: f64,
}

impl DeutschOutcome {
    fn from_state(oracle: OracleKind, output_state: DensityMatrix) -> Self {
        let ideal = oracle.ideal_bit() as usize;
        let success_prob = output_state.population(ideal).clamp(0.0, 1.0);
        let predicted_bit = u8::from(output_state.population(1) > output_state.population(0));
        Self {
            oracle,
            output_state,
            predicted_bit,
            success_prob,
        }
    }
}

/// Noiseless single-qubit output state of the input register.
pub fn ideal_output_state(kind: OracleKind) -> DensityMatrix {
    let joint = run_circuit(&deutsch_circuit(kind), DensityMatrix::basis(2, 0).unwrap())
        .expect("two-qubit circuit on two-qubit state");
    partial_trace(&joint, &[0]).expect("qubit 0 exists")
}

pub fn run_ideal(kind: OracleKind) -> DeutschOutcome {
    DeutschOutcome::from_state(kind, ideal_output_state(kind))
}

/// Applies a single-qubit error model to the ideal output state.
pub fn run_noisy(kind: OracleKind, model: &KrausChannel) -> Result<DeutschOutcome> {
    let out = model.apply(&ideal_output_state(kind))?;
    Ok(DeutschOutcome::from_state(kind, out))
}
