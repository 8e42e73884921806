//! Kraus-sum quantum operations and the two single-qubit error models:
//! generalized amplitude damping and outcome-conditional misalignment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{c, pauli, polar_unitary, ComplexMatrix};
use crate::qstate::DensityMatrix;

pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Unitarity tolerance for re-unitarized correction gates.
pub const GATE_TOL: f64 = 1e-8;

/// Ordered Kraus operators with `sum_k E_k^dagger E_k = I`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    pub fn new(label: impl Into<String>, ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidParams("channel needs at least one operator".into()))?;
        let dim = first.rows();
        for op in &ops {
            if !op.is_square() || op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.rows(),
                });
            }
        }
        let ch = Self {
            ops,
            label: label.into(),
        };
        let err = ch.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving(err));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ops: vec![ComplexMatrix::identity(dim)],
            label: "identity".into(),
        }
    }

    pub fn unitary(label: impl Into<String>, u: ComplexMatrix) -> Result<Self> {
        let err = u.unitarity_error();
        if err > COMPLETENESS_TOL {
            return Err(Error::NotUnitary(err));
        }
        Self::new(label, vec![u])
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    /// Max entry deviation of `sum_k E_k^dagger E_k` from the identity.
    pub fn completeness_error(&self) -> f64 {
        let dim = self.dim();
        let sum = self.ops.iter().fold(ComplexMatrix::zeros(dim), |acc, e| {
            &acc + &e.adjoint().matmul(e)
        });
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }

    /// `sum_k E_k X E_k^dagger` on an arbitrary matrix (not necessarily a state).
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.ops
            .iter()
            .fold(ComplexMatrix::zeros(x.dim()), |acc, e| {
                &acc + &e.conjugate_by(x)
            })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply_channel(self, rho)
    }
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if ch.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: rho.dim(),
        });
    }
    let err = ch.completeness_error();
    if err > COMPLETENESS_TOL {
        return Err(Error::NotTracePreserving(err));
    }
    Ok(DensityMatrix::from_trusted(ch.apply_matrix(rho.matrix())))
}

/// Channel acting as `second(first(rho))`; Kraus operators are all products `F_j E_i`.
pub fn compose(first: &KrausChannel, second: &KrausChannel) -> Result<KrausChannel> {
    if first.dim() != second.dim() {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            found: second.dim(),
        });
    }
    let ops = second
        .ops
        .iter()
        .flat_map(|f| first.ops.iter().map(move |e| f.matmul(e)))
        .collect();
    KrausChannel::new(format!("{} -> {}", first.label, second.label), ops)
}

/// Damping probability `gamma` in [0, 1] and bath population `p` in (1/2, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GadParams {
    pub gamma: f64,
    pub p: f64,
}

impl GadParams {
    pub fn new(gamma: f64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParams(format!(
                "gamma = {gamma} outside [0, 1]"
            )));
        }
        if !(p > 0.5 && p <= 1.0) {
            return Err(Error::InvalidParams(format!("p = {p} outside (0.5, 1]")));
        }
        Ok(Self { gamma, p })
    }

    pub fn noiseless() -> Self {
        Self { gamma: 0.0, p: 1.0 }
    }
}

/// Which form of the second damping operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GadForm {
    /// `E1 = sqrt(p) [[0, sqrt(gamma)], [0, 0]]`: decay |1> -> |0>.
    #[default]
    Standard,
    /// `E1 = sqrt(p) diag(0, sqrt(gamma))`. Trace preserving, but leaves
    /// |1><1| untouched; kept only for comparison.
    PrintedDiagonal,
}

pub fn gad_channel(params: GadParams) -> KrausChannel {
    gad_channel_with(params, GadForm::Standard)
}

pub fn gad_channel_with(params: GadParams, form: GadForm) -> KrausChannel {
    let GadParams { gamma, p } = params;
    let sp = p.sqrt();
    let sq = (1.0 - p).sqrt();
    let sg = gamma.sqrt();
    let sd = (1.0 - gamma).sqrt();
    let m = |a: f64, b: f64, cc: f64, d: f64| {
        ComplexMatrix::new(2, 2, vec![c(a, 0.), c(b, 0.), c(cc, 0.), c(d, 0.)]).unwrap()
    };
    let e1 = match form {
        GadForm::Standard => m(0., sp * sg, 0., 0.),
        GadForm::PrintedDiagonal => m(0., 0., 0., sp * sg),
    };
    let ops = vec![
        m(sp, 0., 0., sp * sd),
        e1,
        m(sq * sd, 0., 0., sq),
        m(0., 0., sq * sg, 0.),
    ];
    let label = match form {
        GadForm::Standard => format!("GAD(gamma={gamma}, p={p})"),
        GadForm::PrintedDiagonal => format!("GAD-printed(gamma={gamma}, p={p})"),
    };
    KrausChannel::new(label, ops).expect("GAD operators are complete for valid parameters")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `exp(i eps sigma) = cos(eps) I + i sin(eps) sigma`.
pub fn rotation_error(axis: Axis, epsilon: f64) -> ComplexMatrix {
    let sigma = match axis {
        Axis::X => pauli::x(),
        Axis::Y => pauli::y(),
        Axis::Z => pauli::z(),
    };
    let (s, cs) = epsilon.sin_cos();
    &ComplexMatrix::identity(2).scale_re(cs) + &sigma.scale(c(0.0, s))
}

/// How a printed correction gate is turned into the error it models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpretation {
    AsPrinted,
    Adjoint,
    Transpose,
    Conjugate,
}

impl Interpretation {
    pub const ALL: [Interpretation; 4] = [
        Interpretation::AsPrinted,
        Interpretation::Adjoint,
        Interpretation::Transpose,
        Interpretation::Conjugate,
    ];

    pub fn apply(self, g: &ComplexMatrix) -> ComplexMatrix {
        match self {
            Interpretation::AsPrinted => g.clone(),
            Interpretation::Adjoint => g.adjoint(),
            Interpretation::Transpose => g.transpose(),
            Interpretation::Conjugate => g.conj(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Interpretation::AsPrinted => "as-printed",
            Interpretation::Adjoint => "adjoint",
            Interpretation::Transpose => "transpose",
            Interpretation::Conjugate => "conjugate",
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Interpretation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Interpretation::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown interpretation `{s}`")))
    }
}

/// Correction gates selected by the ideal output bit.
#[derive(Debug, Clone)]
pub struct MaGates {
    g0: ComplexMatrix,
    g1: ComplexMatrix,
}

impl MaGates {
    /// Re-unitarizes both gates through their polar factor.
    pub fn new(g0: &ComplexMatrix, g1: &ComplexMatrix) -> Result<Self> {
        let mut gates = [g0, g1].into_iter().map(|g| {
            if g.rows() != 2 || g.cols() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: g.rows(),
                });
            }
            let u = polar_unitary(g)?;
            let err = u.unitarity_error();
            if err > GATE_TOL {
                return Err(Error::NotUnitary(err));
            }
            Ok(u)
        });
        let g0 = gates.next().unwrap()?;
        let g1 = gates.next().unwrap()?;
        Ok(Self { g0, g1 })
    }

    pub fn identity() -> Self {
        Self {
            g0: ComplexMatrix::identity(2),
            g1: ComplexMatrix::identity(2),
        }
    }

    pub fn gate(&self, bit: u8) -> Result<&ComplexMatrix> {
        match bit {
            0 => Ok(&self.g0),
            1 => Ok(&self.g1),
            b => Err(Error::InvalidParams(format!(
                "ideal bit must be 0 or 1, got {b}"
            ))),
        }
    }

    /// Unitary error applied when the ideal outcome is `bit`.
    pub fn error_unitary(&self, interpretation: Interpretation, bit: u8) -> Result<ComplexMatrix> {
        Ok(interpretation.apply(self.gate(bit)?))
    }

    pub fn channel(&self, interpretation: Interpretation, bit: u8) -> Result<KrausChannel> {
        KrausChannel::unitary(
            format!("MA[{interpretation}, bit {bit}]"),
            self.error_unitary(interpretation, bit)?,
        )
    }
}

pub fn ma_apply(
    gates: &MaGates,
    interpretation: Interpretation,
    ideal_bit: u8,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    gates.channel(interpretation, ideal_bit)?.apply(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelOrder {
    #[default]
    MaThenGad,
    GadThenMa,
}

impl ModelOrder {
    pub fn name(self) -> &'static str {
        match self {
            ModelOrder::MaThenGad => "ma-then-gad",
            ModelOrder::GadThenMa => "gad-then-ma",
        }
    }
}

impl FromStr for ModelOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ma-then-gad" => Ok(ModelOrder::MaThenGad),
            "gad-then-ma" => Ok(ModelOrder::GadThenMa),
            other => Err(Error::InvalidParams(format!("unknown order `{other}`"))),
        }
    }
}

/// Single-qubit error model combining a misalignment unitary with GAD.
pub fn error_model(
    gad: GadParams,
    misalignment: &ComplexMatrix,
    order: ModelOrder,
) -> Result<KrausChannel> {
    let ma = KrausChannel::unitary("MA", misalignment.clone())?;
    let damping = gad_channel(gad);
    match order {
        ModelOrder::MaThenGad => compose(&ma, &damping),
        ModelOrder::GadThenMa => compose(&damping, &ma),
    }
}
