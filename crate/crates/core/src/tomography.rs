//! Single-qubit state tomography from X, Y and Z measurement counts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::deutsch::OracleKind;
use crate::error::{Error, Result};
use crate::numkit::{c, herm_eig, pauli, ComplexMatrix};
use crate::qstate::{measure_probs, z_projectors, DensityMatrix, Gate};

pub const DEFAULT_SHOTS: u64 = 8192;
/// Identifies the sampler so that counts can be regenerated bit for bit.
pub const RNG_ALGORITHM: &str = "chacha8:seed_from_u64:bernoulli";
pub const PROJECTION_TRACE_TOL: f64 = 1e-8;
pub const MAX_CLIP_DEFICIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn pauli(self) -> ComplexMatrix {
        match self {
            Basis::X => pauli::x(),
            Basis::Y => pauli::y(),
            Basis::Z => pauli::z(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Basis::X),
            "Y" | "y" => Ok(Basis::Y),
            "Z" | "z" => Ok(Basis::Z),
            other => Err(Error::InvalidParams(format!("unknown basis `{other}`"))),
        }
    }
}

/// Unitary applied before a computational-basis measurement so that the
/// outcome statistics are those of the named Pauli observable.
pub fn basis_rotation(basis: Basis) -> ComplexMatrix {
    match basis {
        Basis::Z => ComplexMatrix::identity(2),
        Basis::X => Gate::H.matrix(),
        Basis::Y => Gate::H.matrix().matmul(&Gate::SDagger.matrix()),
    }
}

/// Outcome probabilities `(P(0), P(1))` in the given basis.
pub fn basis_probs(rho: &DensityMatrix, basis: Basis) -> Result<[f64; 2]> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let rotated = DensityMatrix::from_trusted(basis_rotation(basis).conjugate_by(rho.matrix()));
    let p = measure_probs(&rotated, &z_projectors())?;
    Ok([p[0], p[1]])
}

/// Tallies for one (oracle, basis) measurement setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CountsWire", into = "CountsWire")]
pub struct CountsRecord {
    pub oracle: OracleKind,
    pub basis: Basis,
    pub shots: u64,
    pub n0: u64,
    pub n1: u64,
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub device: Option<String>,
}

impl CountsRecord {
    pub fn new(oracle: OracleKind, basis: Basis, n0: u64, n1: u64) -> Result<Self> {
        let rec = Self {
            oracle,
            basis,
            shots: n0 + n1,
            n0,
            n1,
            seed: None,
            rng: None,
            device: None,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidRecord("shots must be positive".into()));
        }
        if self.n0 + self.n1 != self.shots {
            return Err(Error::InvalidRecord(format!(
                "counts {} + {} do not add up to {} shots",
                self.n0, self.n1, self.shots
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsWire {
    oracle: OracleKind,
    basis: Basis,
    shots: u64,
    counts: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    device: Option<String>,
}

impl TryFrom<CountsWire> for CountsRecord {
    type Error = Error;

    fn try_from(w: CountsWire) -> Result<Self> {
        if let Some(key) = w.counts.keys().find(|k| *k != "0" && *k != "1") {
            return Err(Error::InvalidRecord(format!(
                "unexpected outcome label `{key}`"
            )));
        }
        let rec = CountsRecord {
            oracle: w.oracle,
            basis: w.basis,
            shots: w.shots,
            n0: w.counts.get("0").copied().unwrap_or(0),
            n1: w.counts.get("1").copied().unwrap_or(0),
            seed: w.seed,
            rng: w.rng,
            device: w.device,
        };
        rec.validate()?;
        Ok(rec)
    }
}

impl From<CountsRecord> for CountsWire {
    fn from(r: CountsRecord) -> Self {
        CountsWire {
            oracle: r.oracle,
            basis: r.basis,
            shots: r.shots,
            counts: BTreeMap::from([("0".to_string(), r.n0), ("1".to_string(), r.n1)]),
            seed: r.seed,
            rng: r.rng,
            device: r.device,
        }
    }
}

/// Draws `shots` independent outcomes after rotating into `basis`.
pub fn sample_counts(
    oracle: OracleKind,
    rho: &DensityMatrix,
    basis: Basis,
    shots: u64,
    seed: u64,
) -> Result<CountsRecord> {
    if shots == 0 {
        return Err(Error::InvalidParams("shots must be positive".into()));
    }
    let [p0, _] = basis_probs(rho, basis)?;
    let coin = Bernoulli::new(p0.clamp(0.0, 1.0))
        .map_err(|e| Error::InvalidParams(format!("outcome probability: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n0 = (0..shots).filter(|_| coin.sample(&mut rng)).count() as u64;
    Ok(CountsRecord {
        oracle,
        basis,
        shots,
        n0,
        n1: shots - n0,
        seed: Some(seed),
        rng: Some(RNG_ALGORITHM.to_string()),
        device: None,
    })
}

/// `P(0) - P(1)` estimated as `(n0 - n1) / shots`.
pub fn expectation_from_counts(c: &CountsRecord) -> f64 {
    (c.n0 as f64 - c.n1 as f64) / c.shots as f64
}

/// `(Tr(rho X), Tr(rho Y), Tr(rho Z))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliExpectations {
    pub ex: f64,
    pub ey: f64,
    pub ez: f64,
}

impl PauliExpectations {
    pub fn new(ex: f64, ey: f64, ez: f64) -> Result<Self> {
        for (name, v) in [("ex", ex), ("ey", ey), ("ez", ez)] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!(
                    "{name} = {v} outside [-1, 1]"
                )));
            }
        }
        Ok(Self { ex, ey, ez })
    }

    pub fn of_state(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: rho.dim(),
            });
        }
        let e = |b: Basis| b.pauli().matmul(rho.matrix()).trace().re.clamp(-1.0, 1.0);
        Ok(Self {
            ex: e(Basis::X),
            ey: e(Basis::Y),
            ez: e(Basis::Z),
        })
    }

    /// Estimates from one record per basis.
    pub fn from_counts(records: &[&CountsRecord]) -> Result<Self> {
        let find = |b: Basis| {
            records
                .iter()
                .find(|r| r.basis == b)
                .map(|r| expectation_from_counts(r))
                .ok_or_else(|| Error::InvalidDataset(format!("basis {b} absent")))
        };
        Self::new(find(Basis::X)?, find(Basis::Y)?, find(Basis::Z)?)
    }

    pub fn bloch_length(&self) -> f64 {
        (self.ex * self.ex + self.ey * self.ey + self.ez * self.ez).sqrt()
    }
}

/// Linear inversion `(I + ex X + ey Y + ez Z) / 2`; not necessarily PSD.
pub fn reconstruct(e: &PauliExpectations) -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        2,
        vec![
            c(0.5 * (1.0 + e.ez), 0.0),
            c(0.5 * e.ex, -0.5 * e.ey),
            c(0.5 * e.ex, 0.5 * e.ey),
            c(0.5 * (1.0 - e.ez), 0.0),
        ],
    )
    .expect("2x2")
}

/// Clips negative eigenvalues and renormalises. Returns the state and whether
/// clipping changed anything.
pub fn project_to_density(raw: &ComplexMatrix) -> Result<(DensityMatrix, bool)> {
    let tr = raw.trace();
    if (tr.re - 1.0).abs() > PROJECTION_TRACE_TOL || tr.im.abs() > PROJECTION_TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let eig = herm_eig(raw)?;
    let deficit: f64 = eig.values.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    if deficit > MAX_CLIP_DEFICIT {
        return Err(Error::NotPsd(-deficit));
    }
    if deficit == 0.0 {
        return Ok((DensityMatrix::from_trusted(raw.clone()), false));
    }
    let kept: f64 = eig.values.iter().map(|&x| x.max(0.0)).sum();
    let m = eig.reconstruct_with(|x| x.max(0.0) / kept);
    Ok((DensityMatrix::from_trusted(m), true))
}

/// Result of reconstructing one oracle's output state.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub oracle: OracleKind,
    pub expectations: PauliExpectations,
    pub state: DensityMatrix,
    pub projected: bool,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

/// Groups counts per oracle and reconstructs each. Every oracle present must
/// have all three bases.
pub fn reconstruct_all(records: &[CountsRecord]) -> Result<Vec<Reconstruction>> {
    let mut out = Vec::new();
    for oracle in OracleKind::ALL {
        let mine: Vec<&CountsRecord> = records.iter().filter(|r| r.oracle == oracle).collect();
        if mine.is_empty() {
            continue;
        }
        for b in Basis::ALL {
            let n = mine.iter().filter(|r| r.basis == b).count();
            if n == 0 {
                return Err(Error::InvalidDataset(format!(
                    "basis {b} absent for oracle {oracle}"
                )));
            }
            if n > 1 {
                return Err(Error::InvalidDataset(format!(
                    "basis {b} given {n} times for oracle {oracle}"
                )));
            }
        }
        let expectations = PauliExpectations::from_counts(&mine)?;
        let (state, projected) = project_to_density(&reconstruct(&expectations))?;
        let shots = mine.iter().map(|r| r.shots).min();
        let seed = mine
            .iter()
            .find(|r| r.basis == Basis::X)
            .and_then(|r| r.seed);
        out.push(Reconstruction {
            oracle,
            expectations,
            state,
            projected,
            shots,
            seed,
        });
    }
    if out.is_empty() {
        return Err(Error::InvalidDataset("no counts records".into()));
    }
    Ok(out)
}

/// Simulates X, Y and Z counts for one state; seeds are `seed`, `seed + 1`, `seed + 2`.
pub fn sample_all_bases(
    oracle: OracleKind,
    rho: &DensityMatrix,
    shots: u64,
    seed: u64,
) -> Result<Vec<CountsRecord>> {
    Basis::ALL
        .iter()
        .enumerate()
        .map(|(i, &b)| sample_counts(oracle, rho, b, shots, seed.wrapping_add(i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::PureState;

    fn measured_f0() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![c(0.9491, 0.0), c(0.0462, -0.0664)],
            vec![c(0.0462, 0.0664), c(0.0509, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(basis_rotation(Basis::Z), ComplexMatrix::identity(2));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(vec![c(s, 0.), c(s, 0.)])
            .unwrap()
            .to_density();
        assert!((basis_probs(&plus, Basis::X).unwrap()[0] - 1.0).abs() < 1e-15);
        let plus_y = PureState::new(vec![c(s, 0.), c(0., s)])
            .unwrap()
            .to_density();
        assert!((basis_probs(&plus_y, Basis::Y).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_examples() {
        let zero = DensityMatrix::basis(1, 0).unwrap();
        for seed in [0, 1, 99] {
            let r = sample_counts(OracleKind::F0, &zero, Basis::Z, 1000, seed).unwrap();
            assert_eq!((r.n0, r.n1), (1000, 0));
        }
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        let a = sample_counts(OracleKind::F0, &mixed, Basis::Z, 8192, 7).unwrap();
        let b = sample_counts(OracleKind::F0, &mixed, Basis::Z, 8192, 7).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            sample_counts(OracleKind::F0, &mixed, Basis::Z, 0, 7),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn expectation_examples() {
        let all0 = CountsRecord::new(OracleKind::F0, Basis::Z, 10, 0).unwrap();
        assert_eq!(expectation_from_counts(&all0), 1.0);
        let even = CountsRecord::new(OracleKind::F0, Basis::Z, 5, 5).unwrap();
        assert_eq!(expectation_from_counts(&even), 0.0);
        let published = CountsRecord::new(OracleKind::F0, Basis::Z, 7775, 417).unwrap();
        assert!((expectation_from_counts(&published) - 0.8982).abs() < 5e-5);
    }

    #[test]
    fn reconstruct_examples() {
        let e = PauliExpectations::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(reconstruct(&e), ComplexMatrix::diag(&[1.0, 0.0]).unwrap());
        let e = PauliExpectations::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(reconstruct(&e), ComplexMatrix::diag(&[0.5, 0.5]).unwrap());
        let e = PauliExpectations::new(0.0924, 0.1328, 0.8982).unwrap();
        assert!(reconstruct(&e).max_abs_diff(&measured_f0()) < 1e-4);
        assert!(PauliExpectations::new(1.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn projection_examples() {
        let (rho, projected) = project_to_density(&measured_f0()).unwrap();
        assert!(!projected);
        assert!(rho.matrix().max_abs_diff(&measured_f0()) < 1e-12);

        let (rho, projected) =
            project_to_density(&ComplexMatrix::diag(&[1.1, -0.1]).unwrap()).unwrap();
        assert!(projected);
        assert!(
            rho.matrix()
                .max_abs_diff(&ComplexMatrix::diag(&[1.0, 0.0]).unwrap())
                < 1e-12
        );

        // Bloch vector of length 1.02 along (1, 2, 2)/3.
        let long = PauliExpectations {
            ex: 1.02 / 3.0,
            ey: 2.04 / 3.0,
            ez: 2.04 / 3.0,
        };
        let (rho, _) = project_to_density(&reconstruct(&long)).unwrap();
        let back = PauliExpectations::of_state(&rho).unwrap();
        assert!((back.bloch_length() - 1.0).abs() < 1e-12);
        assert!((back.ex - 1.0 / 3.0).abs() < 1e-12);
        assert!((back.ey - 2.0 / 3.0).abs() < 1e-12);

        assert!(project_to_density(&ComplexMatrix::diag(&[0.6, 0.6]).unwrap()).is_err());
        assert!(project_to_density(&ComplexMatrix::diag(&[1.8, -0.8]).unwrap()).is_err());
    }

    #[test]
    fn missing_basis_is_named() {
        let recs = vec![
            CountsRecord::new(OracleKind::F0, Basis::X, 4, 4).unwrap(),
            CountsRecord::new(OracleKind::F0, Basis::Z, 8, 0).unwrap(),
        ];
        let err = reconstruct_all(&recs).unwrap_err();
        assert_eq!(
            err.to_string(),
            "invalid dataset: basis Y absent for oracle f0"
        );
    }

    #[test]
    fn record_validation() {
        let mut r = CountsRecord::new(OracleKind::F1, Basis::Y, 3, 4).unwrap();
        assert_eq!(r.shots, 7);
        r.n1 = 5;
        assert!(r.validate().is_err());
        assert!(CountsRecord::new(OracleKind::F1, Basis::Y, 0, 0).is_err());
    }
}
