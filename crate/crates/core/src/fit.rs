//! Fitting the damping and misalignment models to reconstructed states.
//!
//! Objectives are evaluated on a closed-form qubit path (plain 2x2 arrays);
//! reports rebuild the final model through the Kraus channels so the two
//! routes check each other.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{error_model, GadParams, Interpretation, MaGates, ModelOrder};
use crate::deutsch::OracleKind;
use crate::error::{Error, Result};
use crate::metrics::fidelity;
use crate::numkit::{c, ComplexMatrix, C64};
use crate::qstate::DensityMatrix;
use crate::reference::Published;

pub type Bounds = (f64, f64);

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Stop once every vertex is within this distance (max-norm) of the best one.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Per-coordinate size of the starting simplex; empty selects a default.
    pub initial_step: Vec<f64>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iters: 10_000,
            initial_step: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iters: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Nelder-Mead downhill simplex. Trial points are clamped into `bounds`.
pub fn simplex_minimize<F>(
    objective: F,
    x0: &[f64],
    bounds: Option<&[Bounds]>,
    opts: &SimplexOptions,
) -> Result<SimplexResult>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidParams("empty starting point".into()));
    }
    if let Some(b) = bounds {
        if b.len() != n
            || b.iter()
                .any(|(lo, hi)| lo.partial_cmp(hi).is_none_or(|o| o.is_gt()))
        {
            return Err(Error::InvalidParams("inconsistent bounds".into()));
        }
    }
    let clamp = |x: &mut Vec<f64>| {
        if let Some(b) = bounds {
            for (xi, (lo, hi)) in x.iter_mut().zip(b) {
                *xi = xi.clamp(*lo, *hi);
            }
        }
    };
    let eval = |x: &[f64]| {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut start = x0.to_vec();
    clamp(&mut start);
    let f_start = objective(&start);
    if !f_start.is_finite() {
        return Err(Error::NonFiniteObjective);
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.clone(), f_start)];
    for i in 0..n {
        let step = match opts.initial_step.get(i) {
            Some(&s) => s,
            None => match bounds {
                Some(b) if (b[i].1 - b[i].0).is_finite() && b[i].1 > b[i].0 => {
                    0.05 * (b[i].1 - b[i].0)
                }
                _ if start[i] != 0.0 => 0.05 * start[i].abs(),
                _ => 0.00025,
            },
        };
        let mut v = start.clone();
        v[i] += step;
        if let Some(b) = bounds {
            if v[i] > b[i].1 {
                v[i] = start[i] - step;
            }
        }
        clamp(&mut v);
        let fv = eval(&v);
        simplex.push((v, fv));
    }

    let mut iters = 0;
    let mut converged = false;
    while iters < opts.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < opts.tolerance {
            converged = true;
            break;
        }
        iters += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (ci, vi) in centroid.iter_mut().zip(v) {
                *ci += vi / n as f64;
            }
        }
        let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect();
            clamp(&mut p);
            p
        };
        let (worst, f_worst) = simplex[n].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;

        let reflected = along(&centroid, &worst, -REFLECT);
        let f_reflected = eval(&reflected);
        if f_reflected < f_best {
            let expanded = along(&centroid, &reflected, EXPAND);
            let f_expanded = eval(&expanded);
            simplex[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < f_second {
            simplex[n] = (reflected, f_reflected);
            continue;
        }
        let (contracted, bound) = if f_reflected < f_worst {
            (along(&centroid, &reflected, CONTRACT), f_reflected)
        } else {
            (along(&centroid, &worst, CONTRACT), f_worst)
        };
        let f_contracted = eval(&contracted);
        if f_contracted < bound {
            simplex[n] = (contracted, f_contracted);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v = along(&anchor, &vertex.0, SHRINK);
            let fv = eval(&v);
            *vertex = (v, fv);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    Ok(SimplexResult {
        x,
        f,
        iters,
        converged,
    })
}

/// Re-runs the simplex from its own optimum until it stops improving; a fresh
/// simplex recovers dimensions lost to collapse against a bound.
fn minimize_restarting<F>(
    objective: F,
    x0: &[f64],
    bounds: &[Bounds],
    opts: &SimplexOptions,
    restarts: usize,
) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let mut best = simplex_minimize(&objective, x0, Some(bounds), opts)
        .expect("objective finite at clamped start");
    for _ in 0..restarts {
        let next = simplex_minimize(&objective, &best.x, Some(bounds), opts)
            .expect("objective finite at previous optimum");
        let improved = next.f < best.f - 1e-15;
        if next.f <= best.f {
            best = SimplexResult {
                iters: best.iters + next.iters,
                ..next
            };
        }
        if !improved {
            break;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// Maximise the summed fidelity between model and observed states.
    #[default]
    FidelitySum,
    /// Minimise the summed squared Frobenius distance.
    Frobenius,
}

impl ObjectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::FidelitySum => "fidelity-sum",
            ObjectiveKind::Frobenius => "frobenius",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fidelity" | "fidelity-sum" => Ok(ObjectiveKind::FidelitySum),
            "frobenius" => Ok(ObjectiveKind::Frobenius),
            other => Err(Error::InvalidParams(format!("unknown objective `{other}`"))),
        }
    }
}

/// `U(theta, phi, lam)` without global phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitaryParams {
    pub theta: f64,
    pub phi: f64,
    pub lam: f64,
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let w = x - two_pi * ((x + PI) / two_pi).floor();
    if w >= PI {
        w - two_pi
    } else {
        w
    }
}

impl UnitaryParams {
    pub const IDENTITY: UnitaryParams = UnitaryParams {
        theta: 0.0,
        phi: 0.0,
        lam: 0.0,
    };

    /// Canonical form: theta in [0, pi], phi and lam in [-pi, pi).
    pub fn new(theta: f64, phi: f64, lam: f64) -> Self {
        // U(theta + 2 pi) = -U(theta) and U(-theta, phi, lam) = U(theta, phi + pi, lam + pi).
        let mut theta = wrap_angle(theta);
        let (mut phi, mut lam) = (phi, lam);
        if theta < 0.0 {
            theta = -theta;
            phi += PI;
            lam += PI;
        }
        Self {
            theta,
            phi: wrap_angle(phi),
            lam: wrap_angle(lam),
        }
    }

    fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2])
    }

    fn columns(&self) -> [[C64; 2]; 2] {
        let (s, cs) = (0.5 * self.theta).sin_cos();
        let e_phi = C64::from_polar(1.0, self.phi);
        let e_lam = C64::from_polar(1.0, self.lam);
        [[c(cs, 0.0), e_phi * s], [-e_lam * s, e_phi * e_lam * cs]]
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let [c0, c1] = self.columns();
        ComplexMatrix::new(2, 2, vec![c0[0], c1[0], c0[1], c1[1]]).expect("2x2")
    }

    /// `U |bit>`.
    pub fn action_on(&self, bit: u8) -> [C64; 2] {
        self.columns()[bit as usize & 1]
    }
}

/// Largest component difference between two kets after aligning global phase.
pub fn ket_deviation_up_to_phase(a: [C64; 2], b: [C64; 2]) -> f64 {
    let overlap = a[0].conj() * b[0] + a[1].conj() * b[1];
    let phase = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        c(1.0, 0.0)
    };
    (0..2)
        .map(|i| (a[i] * phase - b[i]).norm())
        .fold(0.0, f64::max)
}

type Qubit = [[C64; 2]; 2];

fn to_qubit(rho: &DensityMatrix) -> Qubit {
    [
        [rho.get(0, 0), rho.get(0, 1)],
        [rho.get(1, 0), rho.get(1, 1)],
    ]
}

fn outer(v: &[C64; 2]) -> Qubit {
    [
        [v[0] * v[0].conj(), v[0] * v[1].conj()],
        [v[1] * v[0].conj(), v[1] * v[1].conj()],
    ]
}

fn gad_qubit(rho: &Qubit, g: f64, p: f64) -> Qubit {
    let (r00, r11) = (rho[0][0].re, rho[1][1].re);
    let n00 = (p + (1.0 - p) * (1.0 - g)) * r00 + p * g * r11;
    let n11 = (1.0 - p) * g * r00 + (p * (1.0 - g) + (1.0 - p)) * r11;
    let k = (1.0 - g).sqrt();
    [[c(n00, 0.0), rho[0][1] * k], [rho[1][0] * k, c(n11, 0.0)]]
}

fn model_qubit(g: f64, p: f64, u: Option<&UnitaryParams>, bit: u8, order: ModelOrder) -> Qubit {
    let u = u.copied().unwrap_or(UnitaryParams::IDENTITY);
    match order {
        ModelOrder::MaThenGad => gad_qubit(&outer(&u.action_on(bit)), g, p),
        ModelOrder::GadThenMa => {
            let mut basis = [[C64::default(); 2]; 2];
            basis[bit as usize][bit as usize] = c(1.0, 0.0);
            let damped = gad_qubit(&basis, g, p);
            let [c0, c1] = u.columns();
            let (a0, a1) = (damped[0][0].re, damped[1][1].re);
            let (o0, o1) = (outer(&c0), outer(&c1));
            let mut out = [[C64::default(); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = o0[i][j] * a0 + o1[i][j] * a1;
                }
            }
            out
        }
    }
}

fn fidelity_q(a: &Qubit, b: &Qubit) -> f64 {
    let mut overlap = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            overlap += (a[i][j] * b[j][i]).re;
        }
    }
    let det = |m: &Qubit| (m[0][0] * m[1][1] - m[0][1] * m[1][0]).re.max(0.0);
    let f2 = overlap + 2.0 * (det(a) * det(b)).sqrt();
    f2.max(0.0).sqrt().min(1.0)
}

fn frobenius_sq(a: &Qubit, b: &Qubit) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (a[i][j] - b[i][j]).norm_sqr();
        }
    }
    s
}

/// Quantity minimised by the optimiser for one (model, observed) pair.
fn loss_term(kind: ObjectiveKind, model: &Qubit, observed: &Qubit) -> f64 {
    match kind {
        ObjectiveKind::FidelitySum => -fidelity_q(model, observed),
        ObjectiveKind::Frobenius => frobenius_sq(model, observed),
    }
}

/// Objective as reported: summed fidelity, or summed squared distance.
fn reported_objective(kind: ObjectiveKind, loss: f64) -> f64 {
    match kind {
        ObjectiveKind::FidelitySum => -loss,
        ObjectiveKind::Frobenius => loss,
    }
}

#[derive(Debug, Clone)]
pub struct FitEntry {
    pub oracle: OracleKind,
    pub ideal_bit: u8,
    pub observed: DensityMatrix,
}

/// One to four observed single-qubit states, one per oracle.
#[derive(Debug, Clone)]
pub struct FitDataset {
    entries: Vec<FitEntry>,
}

impl FitDataset {
    pub fn new(entries: Vec<FitEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDataset("dataset is empty".into()));
        }
        if entries.len() > 4 {
            return Err(Error::InvalidDataset(format!(
                "{} entries (at most 4)",
                entries.len()
            )));
        }
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|o| o.oracle == e.oracle) {
                return Err(Error::InvalidDataset(format!(
                    "oracle {} repeated",
                    e.oracle
                )));
            }
            if e.ideal_bit > 1 {
                return Err(Error::InvalidDataset(format!(
                    "ideal bit {} for {}",
                    e.ideal_bit, e.oracle
                )));
            }
            if e.observed.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: e.observed.dim(),
                });
            }
        }
        Ok(Self { entries })
    }

    /// Entries whose ideal bit is the oracle's own.
    pub fn from_states(
        states: impl IntoIterator<Item = (OracleKind, DensityMatrix)>,
    ) -> Result<Self> {
        Self::new(
            states
                .into_iter()
                .map(|(oracle, observed)| FitEntry {
                    oracle,
                    ideal_bit: oracle.ideal_bit(),
                    observed,
                })
                .collect(),
        )
    }

    pub fn published(reference: &Published) -> Self {
        Self::from_states(reference.states.iter().map(|s| (s.oracle, s.state.clone())))
            .expect("published dataset is valid")
    }

    pub fn entries(&self) -> &[FitEntry] {
        &self.entries
    }

    fn has_all_oracles(&self) -> Result<()> {
        for kind in OracleKind::ALL {
            if !self.entries.iter().any(|e| e.oracle == kind) {
                return Err(Error::InvalidDataset(format!("oracle {kind} missing")));
            }
        }
        Ok(())
    }

    fn prepared(&self) -> Vec<(u8, Qubit)> {
        self.entries
            .iter()
            .map(|e| (e.ideal_bit, to_qubit(&e.observed)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    GadOnly,
    Staged,
    Joint,
}

/// Misalignment unitaries indexed by ideal bit. A bit with no data stays `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedGates {
    pub bit0: Option<UnitaryParams>,
    pub bit1: Option<UnitaryParams>,
}

impl FittedGates {
    pub fn get(&self, bit: u8) -> Option<&UnitaryParams> {
        match bit {
            0 => self.bit0.as_ref(),
            _ => self.bit1.as_ref(),
        }
    }

    pub fn to_ma_gates(&self) -> MaGates {
        let m = |u: Option<UnitaryParams>| u.unwrap_or(UnitaryParams::IDENTITY).matrix();
        MaGates::new(&m(self.bit0), &m(self.bit1)).expect("parameterised gates are unitary")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleFidelity {
    pub oracle: OracleKind,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: FitMethod,
    pub objective_kind: ObjectiveKind,
    pub order: ModelOrder,
    pub gad: GadParams,
    pub gates: Option<FittedGates>,
    pub objective_value: f64,
    pub per_oracle_fidelity: Vec<OracleFidelity>,
    /// False when the objective does not depend on `p` (e.g. `gamma = 0`).
    pub p_identifiable: bool,
}

impl FitResult {
    pub fn mean_fidelity(&self) -> f64 {
        let n = self.per_oracle_fidelity.len() as f64;
        self.per_oracle_fidelity
            .iter()
            .map(|o| o.fidelity)
            .sum::<f64>()
            / n
    }

    pub fn fidelity_of(&self, oracle: OracleKind) -> Option<f64> {
        self.per_oracle_fidelity
            .iter()
            .find(|o| o.oracle == oracle)
            .map(|o| o.fidelity)
    }

    /// Model output for `bit`, built through the Kraus channels.
    pub fn model_state(&self, bit: u8) -> Result<DensityMatrix> {
        let u = self.gates.as_ref().and_then(|g| g.get(bit).copied());
        model_state(self.gad, u.as_ref(), bit, self.order)
    }
}

/// Ideal basis state `|bit>` pushed through the misalignment unitary and GAD.
pub fn model_state(
    gad: GadParams,
    gate: Option<&UnitaryParams>,
    bit: u8,
    order: ModelOrder,
) -> Result<DensityMatrix> {
    let u = gate.copied().unwrap_or(UnitaryParams::IDENTITY).matrix();
    error_model(gad, &u, order)?.apply(&DensityMatrix::basis(1, bit as usize)?)
}

fn per_oracle(
    data: &FitDataset,
    gad: GadParams,
    gates: Option<&FittedGates>,
    order: ModelOrder,
) -> Result<Vec<OracleFidelity>> {
    data.entries
        .iter()
        .map(|e| {
            let u = gates.and_then(|g| g.get(e.ideal_bit).copied());
            let model = model_state(gad, u.as_ref(), e.ideal_bit, order)?;
            Ok(OracleFidelity {
                oracle: e.oracle,
                fidelity: fidelity(&model, &e.observed)?,
            })
        })
        .collect()
}

const P_LOW: f64 = 0.5 + 1e-9;
const GAD_BOUNDS: [Bounds; 2] = [(0.0, 1.0), (P_LOW, 1.0)];
const GRID: usize = 50;
const P_FLAT_TOL: f64 = 1e-6;

fn gad_loss(prepared: &[(u8, Qubit)], kind: ObjectiveKind, g: f64, p: f64) -> f64 {
    prepared
        .iter()
        .map(|(bit, obs)| {
            loss_term(
                kind,
                &model_qubit(g, p, None, *bit, ModelOrder::MaThenGad),
                obs,
            )
        })
        .sum()
}

/// Fits `(gamma, p)` with no misalignment: 50x50 grid, then simplex refinement.
pub fn fit_gad(data: &FitDataset, kind: ObjectiveKind) -> Result<FitResult> {
    let prepared = data.prepared();
    let loss = |x: &[f64]| gad_loss(&prepared, kind, x[0], x[1]);

    let mut seed = (vec![0.0, 1.0], f64::INFINITY);
    for i in 0..GRID {
        let g = i as f64 / (GRID - 1) as f64;
        for j in 0..GRID {
            let p = 0.5 + 0.5 * (j + 1) as f64 / GRID as f64;
            let v = loss(&[g, p]);
            if v < seed.1 {
                seed = (vec![g, p], v);
            }
        }
    }
    let opts = SimplexOptions {
        tolerance: 1e-11,
        max_iters: 5_000,
        initial_step: vec![0.01, 0.01],
    };
    let refined = minimize_restarting(loss, &seed.0, &GAD_BOUNDS, &opts, 3);
    let (x, f) = if refined.f <= seed.1 {
        (refined.x, refined.f)
    } else {
        seed
    };
    let gad = GadParams::new(x[0], x[1].max(P_LOW))?;
    let spread = (loss(&[gad.gamma, P_LOW]) - loss(&[gad.gamma, 1.0])).abs();
    Ok(FitResult {
        method: FitMethod::GadOnly,
        objective_kind: kind,
        order: ModelOrder::MaThenGad,
        gad,
        gates: None,
        objective_value: reported_objective(kind, f),
        per_oracle_fidelity: per_oracle(data, gad, None, ModelOrder::MaThenGad)?,
        p_identifiable: spread >= P_FLAT_TOL,
    })
}

// Negative theta is allowed so the simplex never sticks at the theta = 0 edge.
const ANGLE_BOUNDS: [Bounds; 3] = [(-PI, PI), (-2.0 * PI, 2.0 * PI), (-2.0 * PI, 2.0 * PI)];

fn unitary_loss(
    observed: &[Qubit],
    bit: u8,
    gad: GadParams,
    kind: ObjectiveKind,
    order: ModelOrder,
    u: &UnitaryParams,
) -> f64 {
    let model = model_qubit(gad.gamma, gad.p, Some(u), bit, order);
    observed.iter().map(|o| loss_term(kind, &model, o)).sum()
}

/// Single gate shared by all `observed` states with the same ideal bit.
pub fn fit_shared_unitary(
    observed: &[&DensityMatrix],
    bit: u8,
    gad: GadParams,
    kind: ObjectiveKind,
    order: ModelOrder,
) -> Result<(UnitaryParams, f64)> {
    if bit > 1 {
        return Err(Error::InvalidParams(format!(
            "ideal bit must be 0 or 1, got {bit}"
        )));
    }
    if observed.iter().any(|o| o.dim() != 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: 4,
        });
    }
    let obs: Vec<Qubit> = observed.iter().map(|o| to_qubit(o)).collect();
    let loss = |x: &[f64]| unitary_loss(&obs, bit, gad, kind, order, &UnitaryParams::from_slice(x));

    let mut seed = (vec![0.0, 0.0, 0.0], loss(&[0.0, 0.0, 0.0]));
    for i in 0..=12 {
        for j in 0..12 {
            let x = [i as f64 * PI / 12.0, -PI + j as f64 * PI / 6.0, 0.0];
            let v = loss(&x);
            if v < seed.1 {
                seed = (x.to_vec(), v);
            }
        }
    }
    let opts = SimplexOptions {
        tolerance: 1e-11,
        max_iters: 8_000,
        initial_step: vec![0.1, 0.2, 0.2],
    };
    let refined = minimize_restarting(loss, &seed.0, &ANGLE_BOUNDS, &opts, 3);
    let (x, f) = if refined.f <= seed.1 {
        (refined.x, refined.f)
    } else {
        seed
    };
    Ok((UnitaryParams::from_slice(&x), reported_objective(kind, f)))
}

/// Best misalignment unitary for one observed state under fixed damping,
/// with the resulting fidelity.
pub fn fit_unitary(
    observed: &DensityMatrix,
    ideal_bit: u8,
    gad: GadParams,
) -> Result<(UnitaryParams, f64)> {
    fit_shared_unitary(
        &[observed],
        ideal_bit,
        gad,
        ObjectiveKind::FidelitySum,
        ModelOrder::MaThenGad,
    )
}

fn gates_for(
    data: &FitDataset,
    gad: GadParams,
    kind: ObjectiveKind,
    order: ModelOrder,
) -> Result<FittedGates> {
    let fit_bit = |bit: u8| -> Result<Option<UnitaryParams>> {
        let obs: Vec<&DensityMatrix> = data
            .entries
            .iter()
            .filter(|e| e.ideal_bit == bit)
            .map(|e| &e.observed)
            .collect();
        if obs.is_empty() {
            return Ok(None);
        }
        Ok(Some(fit_shared_unitary(&obs, bit, gad, kind, order)?.0))
    };
    Ok(FittedGates {
        bit0: fit_bit(0)?,
        bit1: fit_bit(1)?,
    })
}

fn total_loss(
    prepared: &[(u8, Qubit)],
    kind: ObjectiveKind,
    order: ModelOrder,
    gad: GadParams,
    gates: &FittedGates,
) -> f64 {
    prepared
        .iter()
        .map(|(bit, obs)| {
            let model = model_qubit(gad.gamma, gad.p, gates.get(*bit), *bit, order);
            loss_term(kind, &model, obs)
        })
        .sum()
}

/// GAD first, then one misalignment gate per ideal bit under that damping.
pub fn fit_staged(data: &FitDataset, kind: ObjectiveKind, order: ModelOrder) -> Result<FitResult> {
    let gad_fit = fit_gad(data, kind)?;
    let gates = gates_for(data, gad_fit.gad, kind, order)?;
    let loss = total_loss(&data.prepared(), kind, order, gad_fit.gad, &gates);
    Ok(FitResult {
        method: FitMethod::Staged,
        objective_kind: kind,
        order,
        gad: gad_fit.gad,
        gates: Some(gates),
        objective_value: reported_objective(kind, loss),
        per_oracle_fidelity: per_oracle(data, gad_fit.gad, Some(&gates), order)?,
        p_identifiable: gad_fit.p_identifiable,
    })
}

/// Deterministic lattice of joint starting points (16 of them).
fn joint_lattice() -> Vec<[f64; 8]> {
    (0..16)
        .map(|k| {
            let pick = |bit: usize, a: f64, b: f64| if k >> bit & 1 == 0 { a } else { b };
            let phi = -PI + ((k * 5) % 8) as f64 * PI / 4.0;
            [
                pick(0, 0.1, 0.35),
                pick(1, 0.65, 0.9),
                pick(2, 0.25, 1.5),
                phi,
                0.0,
                pick(3, 0.25, 1.5),
                -phi,
                0.0,
            ]
        })
        .collect()
}

const JOINT_BOUNDS: [Bounds; 8] = [
    (0.0, 1.0),
    (P_LOW, 1.0),
    (-PI, PI),
    (-2.0 * PI, 2.0 * PI),
    (-2.0 * PI, 2.0 * PI),
    (-PI, PI),
    (-2.0 * PI, 2.0 * PI),
    (-2.0 * PI, 2.0 * PI),
];

fn unpack(x: &[f64]) -> (f64, f64, UnitaryParams, UnitaryParams) {
    (
        x[0],
        x[1],
        UnitaryParams::from_slice(&x[2..5]),
        UnitaryParams::from_slice(&x[5..8]),
    )
}

pub fn fit_joint(data: &FitDataset) -> Result<FitResult> {
    fit_joint_with(data, ObjectiveKind::FidelitySum, ModelOrder::MaThenGad)
}

/// All eight parameters at once, multi-start simplex. The staged solution is
/// always one of the starts, so the result is never worse than it.
pub fn fit_joint_with(
    data: &FitDataset,
    kind: ObjectiveKind,
    order: ModelOrder,
) -> Result<FitResult> {
    data.has_all_oracles()?;
    let staged = fit_staged(data, kind, order)?;
    let prepared = data.prepared();
    let loss = |x: &[f64]| {
        let (g, p, u0, u1) = unpack(x);
        prepared
            .iter()
            .map(|(bit, obs)| {
                let u = if *bit == 0 { &u0 } else { &u1 };
                loss_term(kind, &model_qubit(g, p, Some(u), *bit, order), obs)
            })
            .sum::<f64>()
    };

    let staged_gates = staged.gates.expect("staged fit has gates");
    let sg0 = staged_gates.bit0.unwrap_or(UnitaryParams::IDENTITY);
    let sg1 = staged_gates.bit1.unwrap_or(UnitaryParams::IDENTITY);
    let mut starts = vec![[
        staged.gad.gamma,
        staged.gad.p,
        sg0.theta,
        sg0.phi,
        sg0.lam,
        sg1.theta,
        sg1.phi,
        sg1.lam,
    ]];
    starts.extend(joint_lattice());

    let opts = SimplexOptions {
        tolerance: 1e-10,
        max_iters: 20_000,
        initial_step: vec![0.05, 0.05, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3],
    };
    let results: Vec<(usize, SimplexResult)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| (i, minimize_restarting(loss, x0, &JOINT_BOUNDS, &opts, 4)))
        .collect();
    let (_, best) = results
        .into_iter()
        .min_by(|a, b| a.1.f.total_cmp(&b.1.f).then(a.0.cmp(&b.0)))
        .expect("at least one start");

    let (g, p, u0, u1) = unpack(&best.x);
    let gad = GadParams::new(g, p.max(P_LOW))?;
    let gates = FittedGates {
        bit0: Some(u0),
        bit1: Some(u1),
    };
    let spread = {
        let mut lo = best.x.clone();
        let mut hi = best.x.clone();
        lo[1] = P_LOW;
        hi[1] = 1.0;
        (loss(&lo) - loss(&hi)).abs()
    };
    Ok(FitResult {
        method: FitMethod::Joint,
        objective_kind: kind,
        order,
        gad,
        gates: Some(gates),
        objective_value: reported_objective(kind, best.f),
        per_oracle_fidelity: per_oracle(data, gad, Some(&gates), order)?,
        p_identifiable: spread >= P_FLAT_TOL,
    })
}

/// Fidelity of each printed-gate interpretation against one observed state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpretationRow {
    pub oracle: OracleKind,
    pub ideal_bit: u8,
    pub fidelities: Vec<(Interpretation, f64)>,
    pub best: Interpretation,
    pub best_fidelity: f64,
}

/// Evaluates every interpretation of the given correction gates through the
/// Kraus-channel route and keeps the best one per oracle.
pub fn compare_interpretations(
    data: &FitDataset,
    gad: GadParams,
    gates: &MaGates,
    order: ModelOrder,
) -> Result<Vec<InterpretationRow>> {
    data.entries
        .iter()
        .map(|e| {
            let input = DensityMatrix::basis(1, e.ideal_bit as usize)?;
            let fidelities = Interpretation::ALL
                .iter()
                .map(|&interp| {
                    let u = gates.error_unitary(interp, e.ideal_bit)?;
                    let model = error_model(gad, &u, order)?.apply(&input)?;
                    Ok((interp, fidelity(&model, &e.observed)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let (best, best_fidelity) = fidelities.iter().copied().fold(
                (Interpretation::AsPrinted, f64::NEG_INFINITY),
                |acc, (i, f)| {
                    if f > acc.1 {
                        (i, f)
                    } else {
                        acc
                    }
                },
            );
            Ok(InterpretationRow {
                oracle: e.oracle,
                ideal_bit: e.ideal_bit,
                fidelities,
                best,
                best_fidelity,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::gad_channel;
    use crate::reference::published;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn simplex_convex_1d() {
        let r = simplex_minimize(
            |x| (x[0] - 2.0).powi(2),
            &[0.0],
            None,
            &SimplexOptions::default(),
        )
        .unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-6);
        assert!(r.converged);
    }

    #[test]
    fn simplex_rosenbrock() {
        let opts = SimplexOptions {
            tolerance: 1e-10,
            max_iters: 20_000,
            initial_step: vec![0.1, 0.1],
        };
        let r = simplex_minimize(rosenbrock, &[-1.0, 1.0], None, &opts).unwrap();
        assert!(
            (r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn simplex_clamps_to_corner() {
        let b = [(0.0, 1.0), (0.5, 1.0)];
        let r = simplex_minimize(
            |x| (x[0] - 2.0).powi(2) + x[1].powi(2),
            &[0.3, 0.8],
            Some(&b),
            &SimplexOptions::default(),
        )
        .unwrap();
        assert!(
            (r.x[0] - 1.0).abs() < 1e-9 && (r.x[1] - 0.5).abs() < 1e-9,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn simplex_rejects_non_finite_start() {
        let r = simplex_minimize(|_| f64::NAN, &[0.0], None, &SimplexOptions::default());
        assert_eq!(r, Err(Error::NonFiniteObjective));
        let bad = [(1.0, 0.0)];
        assert!(
            simplex_minimize(|x| x[0], &[0.0], Some(&bad), &SimplexOptions::default()).is_err()
        );
    }

    #[test]
    fn canonical_angles() {
        let u = UnitaryParams::new(-0.4, 0.3, 3.5);
        assert!(u.theta >= 0.0 && u.theta <= PI);
        assert!((-PI..PI).contains(&u.phi) && (-PI..PI).contains(&u.lam));
        let raw = UnitaryParams {
            theta: -0.4,
            phi: 0.3,
            lam: 3.5,
        };
        assert!(u.matrix().max_abs_diff(&raw.matrix()) < 1e-12);
        let wrapped = UnitaryParams::new(0.4 + 2.0 * PI, 0.0, 0.0);
        // Differs by a global phase of -1 only.
        assert!(
            ket_deviation_up_to_phase(
                wrapped.action_on(0),
                UnitaryParams::new(0.4, 0.0, 0.0).action_on(0)
            ) < 1e-12
        );
        assert!(u.matrix().unitarity_error() < 1e-12);
    }

    #[test]
    fn qubit_path_matches_channel_path() {
        let gad = GadParams::new(0.23, 0.81).unwrap();
        let u = UnitaryParams::new(0.7, -1.1, 0.4);
        for order in [ModelOrder::MaThenGad, ModelOrder::GadThenMa] {
            for bit in [0, 1] {
                let fast = model_qubit(gad.gamma, gad.p, Some(&u), bit, order);
                let slow = model_state(gad, Some(&u), bit, order).unwrap();
                for (i, row) in fast.iter().enumerate() {
                    for (j, z) in row.iter().enumerate() {
                        assert!((z - slow.get(i, j)).norm() < 1e-14);
                    }
                }
            }
        }
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        let out = gad_channel(gad).apply(&rho).unwrap();
        let fast = gad_qubit(&to_qubit(&rho), gad.gamma, gad.p);
        assert!((fast[0][0] - out.get(0, 0)).norm() < 1e-14);
    }

    fn synthetic(gad: GadParams) -> FitDataset {
        FitDataset::from_states(OracleKind::ALL.iter().map(|&k| {
            (
                k,
                model_state(gad, None, k.ideal_bit(), ModelOrder::MaThenGad).unwrap(),
            )
        }))
        .unwrap()
    }

    #[test]
    fn gad_round_trip_on_synthetic_states() {
        let truth = GadParams::new(0.1947, 0.7761).unwrap();
        for kind in [ObjectiveKind::FidelitySum, ObjectiveKind::Frobenius] {
            let fit = fit_gad(&synthetic(truth), kind).unwrap();
            assert!(
                (fit.gad.gamma - truth.gamma).abs() < 1e-3,
                "{kind}: {:?}",
                fit.gad
            );
            assert!((fit.gad.p - truth.p).abs() < 1e-3, "{kind}: {:?}", fit.gad);
            assert!(fit.p_identifiable);
        }
    }

    #[test]
    fn gamma_zero_flags_p() {
        let fit = fit_gad(
            &synthetic(GadParams::new(0.0, 0.9).unwrap()),
            ObjectiveKind::FidelitySum,
        )
        .unwrap();
        assert!(fit.gad.gamma < 1e-3);
        assert!(!fit.p_identifiable);
    }

    #[test]
    fn unitary_fit_without_misalignment() {
        let gad = GadParams::new(0.1947, 0.7761).unwrap();
        for bit in [0, 1] {
            let observed = model_state(gad, None, bit, ModelOrder::MaThenGad).unwrap();
            let (u, f) = fit_unitary(&observed, bit, gad).unwrap();
            assert!(u.theta < 1e-4, "{u:?}");
            assert!((f - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unitary_fit_beats_identity_on_published_states() {
        let p = published();
        for s in &p.states {
            let (_, f) = fit_unitary(&s.state, s.ideal_bit, p.gad).unwrap();
            let plain = model_state(p.gad, None, s.ideal_bit, ModelOrder::MaThenGad).unwrap();
            assert!(f >= fidelity(&plain, &s.state).unwrap() - 1e-12);
        }
    }

    #[test]
    fn dataset_validation() {
        assert!(FitDataset::new(vec![]).is_err());
        let rho = DensityMatrix::basis(1, 0).unwrap();
        let dup = vec![(OracleKind::F0, rho.clone()), (OracleKind::F0, rho.clone())];
        assert!(FitDataset::from_states(dup).is_err());
        let partial = FitDataset::from_states(vec![(OracleKind::F0, rho)]).unwrap();
        assert!(matches!(fit_joint(&partial), Err(Error::InvalidDataset(_))));
    }

    #[test]
    fn joint_fit_is_deterministic_and_dominates_staged() {
        let data = FitDataset::published(published());
        let a = fit_joint(&data).unwrap();
        let b = fit_joint(&data).unwrap();
        assert_eq!(a, b);
        let staged = fit_staged(&data, ObjectiveKind::FidelitySum, ModelOrder::MaThenGad).unwrap();
        assert!(a.objective_value >= staged.objective_value - 1e-9);
        assert!(a.mean_fidelity() >= 0.997);
    }
}
