//! States, gates, circuits and projective measurement.
//!
//! Qubit ordering: qubit 0 is the leftmost Kronecker factor, i.e. the most
//! significant bit of a basis index.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numkit::{c, herm_eig, kron, pauli, ComplexMatrix, C64};

pub const STATE_TOL: f64 = 1e-10;
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Largest probability deficit that clipping is allowed to hide.
pub const CLIP_RENORM_TOL: f64 = 1e-9;
pub const MAX_QUBITS: usize = 3;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    match dim {
        2 => Ok(1),
        4 => Ok(2),
        8 => Ok(3),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Normalised state vector on 1 to 3 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|index>` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS || index >= 1 << n_qubits {
            return Err(Error::InvalidQubits(format!(
                "basis state {index} on {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![C64::default(); 1 << n_qubits];
        amplitudes[index] = c(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes).expect("valid dimension")
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            inner: self.projector().hermitian_part(),
        }
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let a = ComplexMatrix::column(&self.amplitudes)?;
        let b = ComplexMatrix::column(&other.amplitudes)?;
        Ok(PureState {
            amplitudes: kron(&a, &b)?.as_slice().to_vec(),
        })
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    inner: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(inner: ComplexMatrix) -> Result<Self> {
        if !inner.is_square() {
            return Err(Error::NotSquare {
                rows: inner.rows(),
                cols: inner.cols(),
            });
        }
        qubits_for_dim(inner.dim())?;
        let herm = inner.hermiticity_error();
        if herm > STATE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = inner.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let inner = inner.hermitian_part();
        let low = herm_eig(&inner)?.values[0];
        if low < -STATE_TOL {
            return Err(Error::NotPsd(low));
        }
        Ok(Self { inner })
    }

    /// Wraps a matrix produced by a trace- and positivity-preserving map.
    pub(crate) fn from_trusted(inner: ComplexMatrix) -> Self {
        debug_assert!(inner.is_hermitian(1e-8));
        Self {
            inner: inner.hermitian_part(),
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidQubits(format!("{n_qubits} qubits")));
        }
        let d = 1 << n_qubits;
        Ok(Self {
            inner: ComplexMatrix::identity(d).scale_re(1.0 / d as f64),
        })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        Ok(PureState::basis(n_qubits, index)?.to_density())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    /// `<i| rho |i>`.
    pub fn population(&self, i: usize) -> f64 {
        self.inner[(i, i)].re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self::from_trusted(kron(&self.inner, &other.inner)?))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.inner.max_abs_diff(&other.inner)
    }
}

impl From<PureState> for DensityMatrix {
    fn from(psi: PureState) -> Self {
        psi.to_density()
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        psi.to_density()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    SDagger,
    Cnot,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::Cnot => 2,
            _ => 1,
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Gate::H => ComplexMatrix::from_real_rows(&[vec![s, s], vec![s, -s]]).unwrap(),
            Gate::X => pauli::x(),
            Gate::Y => pauli::y(),
            Gate::Z => pauli::z(),
            Gate::SDagger => {
                ComplexMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., -1.)]).unwrap()
            }
            Gate::Cnot => ComplexMatrix::from_real_rows(&[
                vec![1., 0., 0., 0.],
                vec![0., 1., 0., 0.],
                vec![0., 0., 0., 1.],
                vec![0., 0., 1., 0.],
            ])
            .unwrap(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::SDagger => "S_dagger",
            Gate::Cnot => "Cnot",
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(Gate::H),
            "X" => Ok(Gate::X),
            "Y" => Ok(Gate::Y),
            "Z" => Ok(Gate::Z),
            "S_dagger" | "Sdg" => Ok(Gate::SDagger),
            "Cnot" | "CNOT" | "CX" => Ok(Gate::Cnot),
            other => Err(Error::UnknownGate(other.to_string())),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

pub fn standard_gate(name: &str) -> Result<ComplexMatrix> {
    Ok(name.parse::<Gate>()?.matrix())
}

/// `U rho U^dagger`.
pub fn apply_unitary(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if u.rows() != rho.dim() || u.cols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: u.rows(),
        });
    }
    let err = u.unitarity_error();
    if err > STATE_TOL {
        return Err(Error::NotUnitary(err));
    }
    Ok(DensityMatrix::from_trusted(u.conjugate_by(rho.matrix())))
}

#[derive(Debug, Clone)]
pub struct Step {
    pub label: String,
    pub matrix: ComplexMatrix,
    pub targets: Vec<usize>,
}

/// Ordered list of gates on a fixed register of 1 to 3 qubits.
#[derive(Debug, Clone)]
pub struct Circuit {
    n_qubits: usize,
    steps: Vec<Step>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidQubits(format!("{n_qubits} qubits")));
        }
        Ok(Self {
            n_qubits,
            steps: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn gate(mut self, gate: Gate, targets: &[usize]) -> Result<Self> {
        self.push(gate.name(), gate.matrix(), targets)?;
        Ok(self)
    }

    pub fn custom(mut self, label: &str, matrix: ComplexMatrix, targets: &[usize]) -> Result<Self> {
        self.push(label, matrix, targets)?;
        Ok(self)
    }

    pub fn push(&mut self, label: &str, matrix: ComplexMatrix, targets: &[usize]) -> Result<()> {
        if targets.is_empty() || targets.iter().any(|&t| t >= self.n_qubits) {
            return Err(Error::InvalidQubits(format!(
                "targets {targets:?} on a {}-qubit register",
                self.n_qubits
            )));
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::InvalidQubits(format!("repeated target {t}")));
            }
        }
        if matrix.dim() != 1 << targets.len() || !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: 1 << targets.len(),
                found: matrix.rows(),
            });
        }
        let err = matrix.unitarity_error();
        if err > STATE_TOL {
            return Err(Error::NotUnitary(err));
        }
        self.steps.push(Step {
            label: label.to_string(),
            matrix,
            targets: targets.to_vec(),
        });
        Ok(())
    }

    /// Full-register unitary of the whole circuit.
    pub fn unitary(&self) -> ComplexMatrix {
        let dim = 1 << self.n_qubits;
        self.steps
            .iter()
            .fold(ComplexMatrix::identity(dim), |acc, step| {
                embed(&step.matrix, &step.targets, self.n_qubits).matmul(&acc)
            })
    }
}

/// Lifts an operator on `targets` to the whole register, identity elsewhere.
/// `targets[0]` is the most significant qubit of the operator's own index.
pub fn embed(op: &ComplexMatrix, targets: &[usize], n_qubits: usize) -> ComplexMatrix {
    let dim = 1 << n_qubits;
    let k = targets.len();
    let bit = |index: usize, q: usize| (index >> (n_qubits - 1 - q)) & 1;
    let sub_index = |index: usize| {
        targets
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | bit(index, q))
    };
    let rest_mask: usize = (0..n_qubits)
        .filter(|q| !targets.contains(q))
        .map(|q| 1 << (n_qubits - 1 - q))
        .sum();
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            if i & rest_mask == j & rest_mask {
                out[(i, j)] = op[(sub_index(i), sub_index(j))];
            }
        }
    }
    debug_assert_eq!(op.dim(), 1 << k);
    out
}

pub fn run_circuit(circuit: &Circuit, input: impl Into<DensityMatrix>) -> Result<DensityMatrix> {
    let mut rho: DensityMatrix = input.into();
    if rho.dim() != 1 << circuit.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << circuit.n_qubits,
            found: rho.dim(),
        });
    }
    for step in &circuit.steps {
        let u = embed(&step.matrix, &step.targets, circuit.n_qubits);
        rho = DensityMatrix::from_trusted(u.conjugate_by(rho.matrix()));
    }
    Ok(rho)
}

/// Reduced state on the qubits in `keep`, returned in ascending qubit order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep.is_empty() || keep.iter().any(|&q| q >= n) {
        return Err(Error::InvalidQubits(format!(
            "keep set {keep:?} on a {n}-qubit state"
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::InvalidQubits(format!("repeated index in {keep:?}")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let compose = |kept_bits: usize, traced_bits: usize| {
        let mut index = 0;
        for (pos, &q) in kept.iter().enumerate() {
            let b = (kept_bits >> (kept.len() - 1 - pos)) & 1;
            index |= b << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            let b = (traced_bits >> (traced.len() - 1 - pos)) & 1;
            index |= b << (n - 1 - q);
        }
        index
    };
    let dk = 1 << kept.len();
    let dt = 1 << traced.len();
    let mut out = ComplexMatrix::zeros(dk);
    for i in 0..dk {
        for j in 0..dk {
            out[(i, j)] = (0..dt).map(|t| rho.get(compose(i, t), compose(j, t))).sum();
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// `{|0><0|, |1><1|}` on one qubit.
pub fn z_projectors() -> Vec<ComplexMatrix> {
    vec![
        ComplexMatrix::diag(&[1.0, 0.0]).unwrap(),
        ComplexMatrix::diag(&[0.0, 1.0]).unwrap(),
    ]
}

/// Computational basis projectors on `n_qubits` qubits.
pub fn computational_projectors(n_qubits: usize) -> Vec<ComplexMatrix> {
    let d = 1 << n_qubits;
    (0..d)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(d);
            m[(k, k)] = c(1.0, 0.0);
            m
        })
        .collect()
}

fn check_projectors(dim: usize, projectors: &[ComplexMatrix]) -> Result<()> {
    if projectors.is_empty() {
        return Err(Error::InvalidProjectors("empty set".into()));
    }
    let mut sum = ComplexMatrix::zeros(dim);
    for (k, p) in projectors.iter().enumerate() {
        if !p.is_square() || p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.rows(),
            });
        }
        if !p.is_hermitian(PROJECTOR_TOL) {
            return Err(Error::InvalidProjectors(format!(
                "projector {k} is not Hermitian"
            )));
        }
        if p.matmul(p).max_abs_diff(p) > PROJECTOR_TOL {
            return Err(Error::InvalidProjectors(format!(
                "projector {k} is not idempotent"
            )));
        }
        sum = &sum + p;
    }
    let gap = sum.max_abs_diff(&ComplexMatrix::identity(dim));
    if gap > PROJECTOR_TOL {
        return Err(Error::InvalidProjectors(format!(
            "projectors do not sum to the identity (deviation {gap:.3e})"
        )));
    }
    Ok(())
}

/// Outcome probabilities `Tr(P_i rho)`.
pub fn measure_probs(rho: &DensityMatrix, projectors: &[ComplexMatrix]) -> Result<Vec<f64>> {
    check_projectors(rho.dim(), projectors)?;
    let raw: Vec<f64> = projectors
        .iter()
        .map(|p| p.matmul(rho.matrix()).trace().re)
        .collect();
    let deficit: f64 = raw.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    if deficit > CLIP_RENORM_TOL {
        return Err(Error::InvalidState(format!(
            "negative outcome probability (deficit {deficit:.3e})"
        )));
    }
    let clipped: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    Ok(clipped.into_iter().map(|x| x / total).collect())
}

/// Non-selective post-measurement state `sum_i P_i rho P_i`.
pub fn post_measure_state(
    rho: &DensityMatrix,
    projectors: &[ComplexMatrix],
) -> Result<DensityMatrix> {
    check_projectors(rho.dim(), projectors)?;
    let mut out = ComplexMatrix::zeros(rho.dim());
    for p in projectors {
        out = &out + &p.conjugate_by(rho.matrix());
    }
    Ok(DensityMatrix::from_trusted(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measured_f0() -> DensityMatrix {
        DensityMatrix::new(
            ComplexMatrix::from_rows(&[
                vec![c(0.9491, 0.0), c(0.0462, -0.0664)],
                vec![c(0.0462, 0.0664), c(0.0509, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    fn plus() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(vec![c(s, 0.), c(s, 0.)]).unwrap()
    }

    #[test]
    fn gate_table() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = standard_gate("H").unwrap();
        assert_eq!(h.as_slice(), &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
        let cnot = standard_gate("Cnot").unwrap();
        assert_eq!(cnot[(2, 3)], c(1., 0.));
        assert_eq!(cnot[(3, 2)], c(1., 0.));
        assert_eq!(cnot[(2, 2)], c(0., 0.));
        let sdg = standard_gate("S_dagger").unwrap();
        assert!(sdg.matmul(&sdg).max_abs_diff(&pauli::z()) < 1e-12);
        assert!(matches!(standard_gate("T"), Err(Error::UnknownGate(_))));
    }

    #[test]
    fn cnot_entangles() {
        let input = plus().tensor(&PureState::basis(1, 0).unwrap()).unwrap();
        let out = apply_unitary(&input.to_density(), &Gate::Cnot.matrix()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]).unwrap();
        assert!(out.max_abs_diff(&bell.to_density()) < 1e-12);
        let reduced = partial_trace(&out, &[0]).unwrap();
        assert!(reduced.max_abs_diff(&DensityMatrix::maximally_mixed(1).unwrap()) < 1e-12);
    }

    #[test]
    fn unitary_examples() {
        let one = DensityMatrix::basis(1, 1).unwrap();
        let out = apply_unitary(&one, &pauli::z()).unwrap();
        assert!(out.max_abs_diff(&one) < 1e-15);
        let zero = DensityMatrix::basis(1, 0).unwrap();
        let out = apply_unitary(&zero, &Gate::H.matrix()).unwrap();
        assert!(
            out.matrix().max_abs_diff(
                &ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()
            ) < 1e-15
        );
        let bad = ComplexMatrix::identity(2).scale_re(1.1);
        assert!(matches!(
            apply_unitary(&zero, &bad),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn circuit_ordering_convention() {
        let empty = Circuit::new(2).unwrap();
        let rho = DensityMatrix::basis(2, 0).unwrap();
        assert_eq!(run_circuit(&empty, rho.clone()).unwrap(), rho);

        let c1 = Circuit::new(2).unwrap().gate(Gate::X, &[1]).unwrap();
        let out = run_circuit(&c1, rho).unwrap();
        assert!(out.max_abs_diff(&DensityMatrix::basis(2, 0b01).unwrap()) < 1e-15);
    }

    #[test]
    fn embedded_cnot_with_reversed_roles() {
        // Control on qubit 1, target qubit 0: |01> -> |11>.
        let circ = Circuit::new(2).unwrap().gate(Gate::Cnot, &[1, 0]).unwrap();
        let out = run_circuit(&circ, DensityMatrix::basis(2, 0b01).unwrap()).unwrap();
        assert!(out.max_abs_diff(&DensityMatrix::basis(2, 0b11).unwrap()) < 1e-15);
    }

    #[test]
    fn constant_zero_circuit_without_measurement() {
        // H (x) (H X), then the identity oracle, then H on the input qubit.
        let circ = Circuit::new(2)
            .unwrap()
            .gate(Gate::X, &[1])
            .unwrap()
            .gate(Gate::H, &[0])
            .unwrap()
            .gate(Gate::H, &[1])
            .unwrap()
            .gate(Gate::H, &[0])
            .unwrap();
        let out = run_circuit(&circ, DensityMatrix::basis(2, 0).unwrap()).unwrap();
        let q0 = partial_trace(&out, &[0]).unwrap();
        assert!(q0.max_abs_diff(&DensityMatrix::basis(1, 0).unwrap()) < 1e-12);
        // Product state: recomposing the marginals gives back the joint state.
        let q1 = partial_trace(&out, &[1]).unwrap();
        assert!(q0.tensor(&q1).unwrap().max_abs_diff(&out) < 1e-12);
    }

    #[test]
    fn circuit_validation() {
        let c2 = Circuit::new(2).unwrap();
        assert!(c2.clone().gate(Gate::X, &[2]).is_err());
        assert!(c2.clone().gate(Gate::Cnot, &[0, 0]).is_err());
        assert!(c2.clone().gate(Gate::Cnot, &[0]).is_err());
        assert!(run_circuit(&c2, DensityMatrix::basis(1, 0).unwrap()).is_err());
        assert!(Circuit::new(4).is_err());
    }

    #[test]
    fn partial_trace_keep_all_and_errors() {
        let rho = plus()
            .tensor(&PureState::basis(1, 1).unwrap())
            .unwrap()
            .to_density();
        assert!(partial_trace(&rho, &[0, 1]).unwrap().max_abs_diff(&rho) < 1e-15);
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[2]).is_err());
        assert!(partial_trace(&rho, &[0, 0]).is_err());
    }

    #[test]
    fn measurement_examples() {
        let p = measure_probs(&plus().to_density(), &z_projectors()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = measure_probs(&measured_f0(), &z_projectors()).unwrap();
        assert!((p[0] - 0.9491).abs() < 1e-12 && (p[1] - 0.0509).abs() < 1e-12);
        let p = measure_probs(&DensityMatrix::basis(1, 0).unwrap(), &z_projectors()).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
        let incomplete = vec![z_projectors()[0].clone()];
        assert!(matches!(
            measure_probs(&measured_f0(), &incomplete),
            Err(Error::InvalidProjectors(_))
        ));
    }

    #[test]
    fn post_measurement_examples() {
        let diag = DensityMatrix::new(ComplexMatrix::diag(&[0.3, 0.7]).unwrap()).unwrap();
        assert!(
            post_measure_state(&diag, &z_projectors())
                .unwrap()
                .max_abs_diff(&diag)
                < 1e-15
        );
        let out = post_measure_state(&plus().to_density(), &z_projectors()).unwrap();
        assert!(out.max_abs_diff(&DensityMatrix::maximally_mixed(1).unwrap()) < 1e-15);
        let out = post_measure_state(&measured_f0(), &z_projectors()).unwrap();
        let expected = DensityMatrix::new(ComplexMatrix::diag(&[0.9491, 0.0509]).unwrap()).unwrap();
        assert!(out.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[0.6, 0.6]).unwrap()).is_err());
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::diag(&[1.1, -0.1]).unwrap()),
            Err(Error::NotPsd(_))
        ));
        assert!(PureState::new(vec![c(1., 0.), c(1., 0.)]).is_err());
    }
}
