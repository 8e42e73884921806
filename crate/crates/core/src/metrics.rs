//! Fidelity and the isotropic (weight, alignment) index.
//!
//! A state is split as `rho = w I / 2^n + (1 - w) rho_hat`, where `w` is the
//! weight of the information-free component and `rho_hat` has a zero
//! eigenvalue. The alignment compares `rho_hat` with a pure reference and with
//! the maximally mixed state orthogonal to it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{herm_eig, mat_sqrt_psd, ComplexMatrix};
use crate::qstate::{DensityMatrix, PureState};

/// Weights above `1 - DEGENERATE_TOL` count as maximally mixed.
pub const DEGENERATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityConvention {
    /// `Tr sqrt(sqrt(rho) sigma sqrt(rho))`.
    #[default]
    Root,
    /// The square of the above.
    Squared,
}

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, in [0, 1].
///
/// Qubit states use the closed form; larger states go through
/// [`fidelity_via_sqrt`].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    if rho.dim() == 2 {
        Ok(fidelity_qubit(rho.matrix(), sigma.matrix()))
    } else {
        fidelity_via_sqrt(rho, sigma)
    }
}

/// General route through two matrix square roots.
pub fn fidelity_via_sqrt(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let root = mat_sqrt_psd(rho.matrix())?;
    let inner = root.matmul(sigma.matrix()).matmul(&root).hermitian_part();
    let eig = herm_eig(&inner)?;
    let f: f64 = eig.values.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `F^2 = Tr(rho sigma) + 2 sqrt(det rho det sigma)` for 2x2 states.
pub fn fidelity_qubit(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let overlap = rho.matmul(sigma).trace().re;
    let det = |m: &ComplexMatrix| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
    let f2 = overlap + 2.0 * (det(rho) * det(sigma)).sqrt();
    f2.max(0.0).sqrt().clamp(0.0, 1.0)
}

pub fn fidelity_with(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    convention: FidelityConvention,
) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok(match convention {
        FidelityConvention::Root => f,
        FidelityConvention::Squared => f * f,
    })
}

/// Half the trace norm of `rho - sigma`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let diff = (rho.matrix() - sigma.matrix()).hermitian_part();
    let eig = herm_eig(&diff)?;
    Ok(0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>())
}

#[derive(Debug, Clone)]
pub struct IsotropicDecomposition {
    pub weight: f64,
    /// Non-isotropic part; `I / 2^n` by convention when the input is maximally mixed.
    pub rho_hat: DensityMatrix,
    pub degenerate: bool,
}

pub fn isotropic_decompose(rho: &DensityMatrix) -> Result<IsotropicDecomposition> {
    let d = rho.dim() as f64;
    let lambda_min = herm_eig(rho.matrix())?.values[0].max(0.0);
    let weight = (d * lambda_min).clamp(0.0, 1.0);
    if weight > 1.0 - DEGENERATE_TOL {
        return Ok(IsotropicDecomposition {
            weight: 1.0,
            rho_hat: DensityMatrix::maximally_mixed(rho.n_qubits())?,
            degenerate: true,
        });
    }
    let shifted = rho.matrix() - &ComplexMatrix::identity(rho.dim()).scale_re(lambda_min);
    let rho_hat = DensityMatrix::from_trusted(shifted.scale_re(1.0 / (1.0 - weight)));
    Ok(IsotropicDecomposition {
        weight,
        rho_hat,
        degenerate: false,
    })
}

/// `(I - |phi><phi|) / (2^n - 1)`.
pub fn orthogonal_isotropic(reference: &PureState) -> DensityMatrix {
    let d = reference.dim();
    let m = (&ComplexMatrix::identity(d) - &reference.projector()).scale_re(1.0 / (d as f64 - 1.0));
    DensityMatrix::from_trusted(m)
}

pub fn alignment(rho: &DensityMatrix, reference: &PureState) -> Result<f64> {
    alignment_with(rho, reference, FidelityConvention::Root)
}

pub fn alignment_with(
    rho: &DensityMatrix,
    reference: &PureState,
    convention: FidelityConvention,
) -> Result<f64> {
    if rho.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: reference.dim(),
        });
    }
    let dec = isotropic_decompose(rho)?;
    if dec.degenerate {
        return Ok(0.0);
    }
    let aligned = fidelity_with(&dec.rho_hat, &reference.to_density(), convention)?;
    let opposed = fidelity_with(&dec.rho_hat, &orthogonal_isotropic(reference), convention)?;
    Ok((aligned - opposed).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotropicIndex {
    pub weight: f64,
    pub alignment: f64,
}

pub fn isotropic_index(rho: &DensityMatrix, reference: &PureState) -> Result<IsotropicIndex> {
    Ok(IsotropicIndex {
        weight: isotropic_decompose(rho)?.weight,
        alignment: alignment(rho, reference)?,
    })
}
