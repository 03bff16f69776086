//! Reduced logical tomography: the five settings needed by the fidelity
//! formula, post-selection onto the dual-rail subspace, and readout-error
//! mitigation.
//!
//! On each mode's qubit pair the logical operators are realized as
//! `Z_L = (Z⊗I - I⊗Z)/2`, `X_L = σx⊗σx` and `Y_L = σy⊗σx`. Logical X and Y
//! are read off as the product of the two ±1 outcomes of the pair. In a Z
//! setting an unphysical pair outcome (`00` or `11`) decodes to 0, so
//! without post-selection it contributes nothing to the trace.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::boson::{decode_mode, subspace_indices};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::simulator::{run_noisy, CountsHistogram, NoiseModel};

pub const N_QUBITS: usize = 4;
const DIM: usize = 1 << N_QUBITS;
/// Below this |det| a 2×2 confusion block is treated as singular.
const SINGULAR: f64 = 1e-12;
const PGD_MAX_ITERS: usize = 20_000;
const PGD_TOL: f64 = 1e-15;

/// Measurement basis of one physical qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    /// Gates rotating this basis onto Z before measurement.
    pub fn suffix(self, q: usize) -> Vec<Gate> {
        match self {
            Basis::Z => vec![],
            Basis::X => vec![Gate::H(q)],
            Basis::Y => vec![Gate::Sdg(q), Gate::H(q)],
        }
    }
}

/// Logical observable pair, matter first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SettingLabel {
    ZZ,
    XY,
    YX,
    IZ,
    ZI,
}

impl SettingLabel {
    pub const ALL: [SettingLabel; 5] = [
        SettingLabel::ZZ,
        SettingLabel::XY,
        SettingLabel::YX,
        SettingLabel::IZ,
        SettingLabel::ZI,
    ];

    pub fn is_z(self) -> bool {
        matches!(self, SettingLabel::ZZ | SettingLabel::IZ | SettingLabel::ZI)
    }
}

impl fmt::Display for SettingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub label: SettingLabel,
    /// Basis per physical qubit 0..3.
    pub bases: [Basis; N_QUBITS],
}

impl MeasurementSetting {
    pub fn new(label: SettingLabel) -> Self {
        use Basis::*;
        let bases = match label {
            SettingLabel::ZZ | SettingLabel::IZ | SettingLabel::ZI => [Z, Z, Z, Z],
            SettingLabel::XY => [X, X, Y, X],
            SettingLabel::YX => [Y, X, X, X],
        };
        MeasurementSetting { label, bases }
    }

    pub fn all() -> [MeasurementSetting; 5] {
        SettingLabel::ALL.map(MeasurementSetting::new)
    }

    pub fn post_rotations(&self) -> Vec<Gate> {
        self.bases
            .iter()
            .enumerate()
            .flat_map(|(q, b)| b.suffix(q))
            .collect()
    }

    /// Logical eigenvalue of this setting's observable for one 4-bit outcome.
    pub fn eigenvalue(&self, outcome: usize) -> f64 {
        let bit = |q: usize| outcome >> (N_QUBITS - 1 - q) & 1 == 1;
        let sign = |q: usize| if bit(q) { -1.0 } else { 1.0 };
        let z_mode = |m: usize| match decode_mode(bit(2 * m), bit(2 * m + 1)) {
            Some(0) => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        };
        match self.label {
            SettingLabel::ZZ => z_mode(0) * z_mode(1),
            SettingLabel::IZ => z_mode(1),
            SettingLabel::ZI => z_mode(0),
            SettingLabel::XY | SettingLabel::YX => (0..N_QUBITS).map(sign).product(),
        }
    }
}

/// One measured circuit per setting, in the order ZZ, XY, YX, IZ, ZI.
pub fn measurement_circuits(base: &Circuit) -> Result<Vec<(MeasurementSetting, Circuit)>> {
    if base.has_measurements() {
        return Err(Error::contract("base circuit is already measured"));
    }
    if base.n_qubits() != N_QUBITS {
        return Err(Error::arg(format!("expected {N_QUBITS} qubits, got {}", base.n_qubits())));
    }
    MeasurementSetting::all()
        .into_iter()
        .map(|s| {
            let mut c = base.clone();
            let start = c.len();
            for g in s.post_rotations() {
                c.push(g)?;
            }
            if c.len() > start {
                c.label_segment(&format!("basis_{}", s.label), start..c.len())?;
            }
            c.measure_all()?;
            Ok((s, c))
        })
        .collect()
}

fn in_subspace(index: usize) -> bool {
    subspace_indices().contains(&index)
}

/// Keeps physical-subspace outcomes in Z settings; a no-op otherwise.
pub fn postselect(h: &CountsHistogram, setting: &MeasurementSetting) -> Result<(CountsHistogram, f64)> {
    if h.is_empty() {
        return Err(Error::DegenerateInput("empty histogram".into()));
    }
    if h.n_bits() != N_QUBITS {
        return Err(Error::arg("post-selection needs 4-bit outcomes"));
    }
    if !setting.label.is_z() {
        return Ok((h.clone(), 1.0));
    }
    let kept = h.filter(in_subspace);
    let fraction = kept.shots() as f64 / h.shots() as f64;
    Ok((kept, fraction))
}

/// Distribution analogue of [`postselect`]: restricts and renormalizes.
pub fn postselect_distribution(p: &[f64], setting: &MeasurementSetting) -> Result<(Vec<f64>, f64)> {
    if p.len() != DIM {
        return Err(Error::arg("post-selection needs a 16-entry distribution"));
    }
    if !setting.label.is_z() {
        return Ok((p.to_vec(), 1.0));
    }
    let kept: f64 = subspace_indices().iter().map(|&i| p[i]).sum();
    if kept <= 0.0 {
        return Err(Error::DegenerateInput("no probability left in the physical subspace".into()));
    }
    let out = (0..DIM)
        .map(|i| if in_subspace(i) { p[i] / kept } else { 0.0 })
        .collect();
    Ok((out, kept))
}

/// Readout confusion `M[measured][prepared]`, column-stochastic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConfusionMatrix {
    /// One 2×2 block per classical bit, combined as a tensor product.
    PerQubit(Vec<[[f64; 2]; 2]>),
    Full(DMatrix<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfusionKind {
    #[default]
    Full,
    PerQubit,
}

impl ConfusionMatrix {
    pub fn identity(n_bits: usize) -> Self {
        ConfusionMatrix::PerQubit(vec![[[1.0, 0.0], [0.0, 1.0]]; n_bits])
    }

    /// Symmetric flips with rate `lambdas[b]` on classical bit `b`.
    pub fn symmetric(lambdas: &[f64]) -> Self {
        ConfusionMatrix::PerQubit(lambdas.iter().map(|&l| [[1.0 - l, l], [l, 1.0 - l]]).collect())
    }

    pub fn n_bits(&self) -> usize {
        match self {
            ConfusionMatrix::PerQubit(b) => b.len(),
            ConfusionMatrix::Full(m) => m.nrows().trailing_zeros() as usize,
        }
    }

    pub fn to_full(&self) -> DMatrix<f64> {
        match self {
            ConfusionMatrix::Full(m) => m.clone(),
            ConfusionMatrix::PerQubit(blocks) => {
                let n = blocks.len();
                DMatrix::from_fn(1 << n, 1 << n, |r, c| {
                    blocks.iter().enumerate().fold(1.0, |acc, (b, m)| {
                        let shift = n - 1 - b;
                        acc * m[r >> shift & 1][c >> shift & 1]
                    })
                })
            }
        }
    }

    pub fn is_column_stochastic(&self, tol: f64) -> bool {
        let m = self.to_full();
        m.column_iter()
            .all(|col| col.iter().all(|&x| x >= -tol) && (col.sum() - 1.0).abs() <= tol)
    }

    /// `M · p`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (self.to_full() * DVector::from_column_slice(p)).as_slice().to_vec()
    }

    fn inverse(&self) -> Result<DMatrix<f64>> {
        match self {
            ConfusionMatrix::PerQubit(blocks) => {
                let inv: Vec<[[f64; 2]; 2]> = blocks
                    .iter()
                    .map(|m| {
                        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                        if det.abs() < SINGULAR {
                            return Err(Error::Numeric("singular confusion block".into()));
                        }
                        Ok([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
                    })
                    .collect::<Result<_>>()?;
                Ok(ConfusionMatrix::PerQubit(inv).to_full())
            }
            ConfusionMatrix::Full(m) => {
                let lu = m.clone().lu();
                if lu.determinant().abs() < SINGULAR {
                    return Err(Error::Numeric("singular confusion matrix".into()));
                }
                lu.try_inverse()
                    .ok_or_else(|| Error::Numeric("singular confusion matrix".into()))
            }
        }
    }
}

/// Exact confusion for symmetric readout flips on the given physical qubits.
pub fn analytic_confusion(nm: &NoiseModel, measured_qubits: &[usize]) -> ConfusionMatrix {
    let lambdas: Vec<f64> = measured_qubits.iter().map(|&q| nm.lambda(q)).collect();
    ConfusionMatrix::symmetric(&lambdas)
}

/// Empirical calibration: prepares every basis state of the measured qubits
/// with X gates, measures `shots` times each and tabulates the outcomes.
/// Classical bit `b` reads physical qubit `measured_qubits[b]`.
pub fn calibrate_confusion(
    nm: &NoiseModel,
    measured_qubits: &[usize],
    shots: u64,
    kind: ConfusionKind,
) -> Result<ConfusionMatrix> {
    if shots == 0 {
        return Err(Error::arg("calibration needs at least one shot"));
    }
    let m = measured_qubits.len();
    if m == 0 || m > 8 {
        return Err(Error::arg("calibrate between 1 and 8 qubits"));
    }
    let n_qubits = measured_qubits.iter().max().unwrap() + 1;
    let dim = 1 << m;
    let mut full = DMatrix::<f64>::zeros(dim, dim);
    for prepared in 0..dim {
        let mut c = Circuit::new(n_qubits)?;
        for (b, &q) in measured_qubits.iter().enumerate() {
            if prepared >> (m - 1 - b) & 1 == 1 {
                c.push(Gate::X(q))?;
            }
        }
        for (b, &q) in measured_qubits.iter().enumerate() {
            c.push(Gate::measure(q, b))?;
        }
        let seed = crate::simulator::derive_seed(nm.seed, prepared as u64);
        let h = run_noisy(&c, &nm.with_seed(seed), shots)?;
        for (measured, f) in h.frequencies().into_iter().enumerate() {
            full[(measured, prepared)] = f;
        }
    }
    Ok(match kind {
        ConfusionKind::Full => ConfusionMatrix::Full(full),
        ConfusionKind::PerQubit => ConfusionMatrix::PerQubit(marginal_blocks(&full, m)),
    })
}

/// Per-bit 2×2 blocks averaged over all preparations of the other bits.
fn marginal_blocks(full: &DMatrix<f64>, m: usize) -> Vec<[[f64; 2]; 2]> {
    let dim = 1 << m;
    (0..m)
        .map(|b| {
            let shift = m - 1 - b;
            let mut block = [[0.0; 2]; 2];
            for prepared in 0..dim {
                for measured in 0..dim {
                    block[measured >> shift & 1][prepared >> shift & 1] += full[(measured, prepared)];
                }
            }
            let per_column = (dim / 2) as f64;
            block.map(|row| row.map(|x| x / per_column))
        })
        .collect()
}

/// Mitigated distribution from a measured histogram.
pub fn mitigate(h: &CountsHistogram, cm: &ConfusionMatrix) -> Result<Vec<f64>> {
    if h.is_empty() {
        return Err(Error::DegenerateInput("empty histogram".into()));
    }
    mitigate_distribution(&h.frequencies(), cm)
}

/// Solves `M p = q` for a probability vector `p`.
///
/// The plain inverse is returned when it is already a distribution (up to
/// 1e-12 negatives, which are zeroed). Otherwise the result is the least
/// squares solution restricted to the probability simplex, found by
/// accelerated projected gradient.
pub fn mitigate_distribution(measured: &[f64], cm: &ConfusionMatrix) -> Result<Vec<f64>> {
    let dim = 1 << cm.n_bits();
    if measured.len() != dim {
        return Err(Error::arg(format!("distribution has {} entries, confusion matrix {dim}", measured.len())));
    }
    let total: f64 = measured.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput("distribution has no mass".into()));
    }
    let q = DVector::from_iterator(dim, measured.iter().map(|x| x / total));
    let inv = cm.inverse()?;
    let direct = &inv * &q;
    if direct.iter().all(|&x| x >= -1e-12) {
        let clipped: Vec<f64> = direct.iter().map(|&x| x.max(0.0)).collect();
        let s: f64 = clipped.iter().sum();
        return Ok(clipped.into_iter().map(|x| x / s).collect());
    }
    let m = cm.to_full();
    Ok(simplex_least_squares(&m, &q, project_simplex(direct.as_slice())))
}

/// Euclidean projection onto `{p ≥ 0, Σp = 1}`.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cumsum += x;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn simplex_least_squares(m: &DMatrix<f64>, q: &DVector<f64>, start: Vec<f64>) -> Vec<f64> {
    let mtm = m.transpose() * m;
    let mtq = m.transpose() * q;
    // Lipschitz constant of the gradient: the largest eigenvalue of MᵀM.
    let lipschitz = mtm.clone().symmetric_eigenvalues().max().max(f64::MIN_POSITIVE);
    let step = 1.0 / lipschitz;
    let mut x = DVector::from_vec(start);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..PGD_MAX_ITERS {
        let grad = &mtm * &y - &mtq;
        let next = DVector::from_vec(project_simplex((&y - grad * step).as_slice()));
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = &next + (&next - &x) * ((t - 1.0) / t_next);
        let moved = (&next - &x).amax();
        x = next;
        t = t_next;
        if moved < PGD_TOL {
            break;
        }
    }
    x.as_slice().to_vec()
}

/// The five logical traces, also used for their uncertainties and the
/// per-setting retained fractions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Traces {
    pub zz: f64,
    pub xy: f64,
    pub yx: f64,
    pub iz: f64,
    pub zi: f64,
}

impl Traces {
    pub fn get(&self, label: SettingLabel) -> f64 {
        match label {
            SettingLabel::ZZ => self.zz,
            SettingLabel::XY => self.xy,
            SettingLabel::YX => self.yx,
            SettingLabel::IZ => self.iz,
            SettingLabel::ZI => self.zi,
        }
    }

    pub fn set(&mut self, label: SettingLabel, v: f64) {
        match label {
            SettingLabel::ZZ => self.zz = v,
            SettingLabel::XY => self.xy = v,
            SettingLabel::YX => self.yx = v,
            SettingLabel::IZ => self.iz = v,
            SettingLabel::ZI => self.zi = v,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Traces {
        Traces {
            zz: f(self.zz),
            xy: f(self.xy),
            yx: f(self.yx),
            iz: f(self.iz),
            zi: f(self.zi),
        }
    }
}

/// Expectation of `setting`'s logical observable under distribution `p`.
pub fn expectation(p: &[f64], setting: &MeasurementSetting) -> f64 {
    p.iter().enumerate().map(|(i, &pi)| pi * setting.eigenvalue(i)).sum()
}

/// Traces from one distribution per setting. Values are clamped to [-1, 1];
/// on simplex-valued inputs the clamp never binds.
pub fn estimate_traces(dists: &[(MeasurementSetting, Vec<f64>)]) -> Result<Traces> {
    let mut t = Traces::default();
    for label in SettingLabel::ALL {
        let (s, p) = dists
            .iter()
            .find(|(s, _)| s.label == label)
            .ok_or_else(|| Error::contract(format!("missing setting {label}")))?;
        if p.len() != DIM {
            return Err(Error::arg(format!("setting {label}: expected 16 probabilities")));
        }
        t.set(label, expectation(p, s).clamp(-1.0, 1.0));
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub traces: Traces,
    /// Readout-driven uncertainty `nλ(1 + tr)` per trace.
    pub uncertainties: Traces,
    /// Mass kept by post-selection per setting (1 where it does not apply).
    pub retained_fraction: Traces,
    pub shots: u64,
    pub lambda: f64,
    pub mitigated: bool,
    pub postselected: bool,
    pub settings: Vec<MeasurementSetting>,
}

impl TomographyResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Options for [`reconstruct`].
#[derive(Debug, Clone, Default)]
pub struct Reconstruction<'a> {
    pub confusion: Option<&'a ConfusionMatrix>,
    pub postselect: bool,
    /// Mean readout flip rate used for the uncertainty rule.
    pub lambda: f64,
    /// Number of measured qubits in that rule.
    pub n_measured: usize,
    pub shots: u64,
}

/// Raw distributions to traces: mitigate (if a confusion matrix is given),
/// then post-select Z settings, then estimate.
pub fn reconstruct(raw: &[(MeasurementSetting, Vec<f64>)], opts: &Reconstruction<'_>) -> Result<TomographyResult> {
    let mut processed = Vec::with_capacity(raw.len());
    let mut retained = Traces::default();
    for (s, p) in raw {
        let p = match opts.confusion {
            Some(cm) => mitigate_distribution(p, cm)?,
            None => p.clone(),
        };
        let (p, kept) = if opts.postselect {
            postselect_distribution(&p, s)?
        } else {
            (p, 1.0)
        };
        retained.set(s.label, kept);
        processed.push((*s, p));
    }
    let traces = estimate_traces(&processed)?;
    let n = opts.n_measured as f64;
    Ok(TomographyResult {
        traces,
        uncertainties: traces.map(|tr| n * opts.lambda * (1.0 + tr)),
        retained_fraction: retained,
        shots: opts.shots,
        lambda: opts.lambda,
        mitigated: opts.confusion.is_some(),
        postselected: opts.postselect,
        settings: raw.iter().map(|(s, _)| *s).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{self, CMatrix, ONE, ZERO};
    use crate::digitizer::build_evolution_circuit;
    use crate::pauli::PauliString;
    use crate::simulator::{exact_distribution, run_ideal};
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// Restriction of a 2-qubit operator to the pair states `|01⟩, |10⟩`.
    fn restrict_pair(op: &CMatrix) -> [[Complex64; 2]; 2] {
        let idx = [0b01, 0b10];
        let mut r = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                r[a][b] = op[(idx[a], idx[b])];
            }
        }
        r
    }

    #[test]
    fn pair_operators_act_as_logical_paulis() {
        let i = dense::I;
        let x_l = restrict_pair(&"XX".parse::<PauliString>().unwrap().to_matrix().unwrap());
        let y_l = restrict_pair(&"YX".parse::<PauliString>().unwrap().to_matrix().unwrap());
        assert_eq!(x_l, [[ZERO, ONE], [ONE, ZERO]]);
        assert_eq!(y_l, [[ZERO, -i], [i, ZERO]]);
        // Both map the pair subspace into itself.
        for op in ["XX", "YX"] {
            let m = op.parse::<PauliString>().unwrap().to_matrix().unwrap();
            for col in [0b01, 0b10] {
                assert_eq!(m[(0b00, col)], ZERO);
                assert_eq!(m[(0b11, col)], ZERO);
            }
        }
    }

    #[test]
    fn setting_rotations() {
        let s = MeasurementSetting::new(SettingLabel::XY);
        assert_eq!(s.post_rotations(), vec![Gate::H(0), Gate::H(1), Gate::Sdg(2), Gate::H(2), Gate::H(3)]);
        let s = MeasurementSetting::new(SettingLabel::YX);
        assert_eq!(s.post_rotations(), vec![Gate::Sdg(0), Gate::H(0), Gate::H(1), Gate::H(2), Gate::H(3)]);
        assert!(MeasurementSetting::new(SettingLabel::ZZ).post_rotations().is_empty());

        let base = build_evolution_circuit(0.1, true).unwrap();
        let circuits = measurement_circuits(&base).unwrap();
        assert_eq!(circuits.len(), 5);
        for (s, c) in &circuits {
            assert_eq!(c.measurements().len(), 4);
            assert_eq!(c.len(), base.len() + s.post_rotations().len() + 4);
        }
        let mut measured = base.clone();
        measured.measure_all().unwrap();
        assert!(matches!(measurement_circuits(&measured), Err(Error::Contract(_))));
    }

    /// Rotated-basis expectations equal dense logical-operator expectations.
    #[test]
    fn decoded_observables_match_dense_operators() {
        for eps in [0.0, 0.05, 0.3, 0.7] {
            let base = build_evolution_circuit(eps, true).unwrap();
            let psi = run_ideal(&base).unwrap();
            let v = nalgebra::DVector::from_vec(psi.amplitudes().to_vec());
            let strings = [
                (SettingLabel::XY, "XXYX"),
                (SettingLabel::YX, "YXXX"),
            ];
            for (label, p) in strings {
                let m = p.parse::<PauliString>().unwrap().to_matrix().unwrap();
                let want = (v.adjoint() * &m * &v)[(0, 0)].re;
                let mut c = base.clone();
                for g in MeasurementSetting::new(label).post_rotations() {
                    c.push(g).unwrap();
                }
                c.measure_all().unwrap();
                let dist = exact_distribution(&c, &NoiseModel::none(0)).unwrap();
                let got = expectation(&dist, &MeasurementSetting::new(label));
                assert!((got - want).abs() < 1e-9, "{label} at {eps}: {got} vs {want}");
            }
            // Z_L ⊗ Z_L on the subspace is (Z0 - Z1)(Z2 - Z3)/4.
            let z = |s: &str| {
                let m = s.parse::<PauliString>().unwrap().to_matrix().unwrap();
                (v.adjoint() * &m * &v)[(0, 0)].re
            };
            let want_zz = (z("ZIZI") - z("ZIIZ") - z("IZZI") + z("IZIZ")) / 4.0;
            let mut c = base.clone();
            c.measure_all().unwrap();
            let dist = exact_distribution(&c, &NoiseModel::none(0)).unwrap();
            let got = expectation(&dist, &MeasurementSetting::new(SettingLabel::ZZ));
            assert!((got - want_zz).abs() < 1e-9);
        }
    }

    #[test]
    fn postselection_examples() {
        let h = CountsHistogram::from_pairs(4, [("0101", 900), ("0110", 50), ("1010", 40), ("1111", 10)]).unwrap();
        let zz = MeasurementSetting::new(SettingLabel::ZZ);
        let (kept, f) = postselect(&h, &zz).unwrap();
        assert_eq!(kept.shots(), 990);
        assert!((f - 0.99).abs() < 1e-15);

        let xy = MeasurementSetting::new(SettingLabel::XY);
        let (same, f) = postselect(&h, &xy).unwrap();
        assert_eq!(same, h);
        assert_eq!(f, 1.0);

        let ideal = CountsHistogram::from_pairs(4, [("0101", 10)]).unwrap();
        assert_eq!(postselect(&ideal, &zz).unwrap().1, 1.0);

        let empty = CountsHistogram::from_dense(4, &[0; 16]).unwrap();
        assert!(matches!(postselect(&empty, &zz), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn confusion_examples() {
        let cm = analytic_confusion(&NoiseModel::readout_only(0.02, 0), &[0, 1, 2, 3]);
        match &cm {
            ConfusionMatrix::PerQubit(b) => assert!(b.iter().all(|m| *m == [[0.98, 0.02], [0.02, 0.98]])),
            _ => unreachable!(),
        }
        assert!(cm.is_column_stochastic(1e-12));

        let ideal = calibrate_confusion(&NoiseModel::none(1), &[0, 1, 2, 3], 100, ConfusionKind::Full).unwrap();
        assert_eq!(ideal.to_full(), DMatrix::identity(16, 16));
        assert!(matches!(
            calibrate_confusion(&NoiseModel::none(1), &[0, 1], 0, ConfusionKind::Full),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn empirical_confusion_is_within_binomial_bounds() {
        let shots = 100_000u64;
        let nm = NoiseModel::readout_only(0.02, 7);
        let emp = calibrate_confusion(&nm, &[0, 1, 2, 3], shots, ConfusionKind::Full).unwrap().to_full();
        let exact = analytic_confusion(&nm, &[0, 1, 2, 3]).to_full();
        for (e, a) in emp.iter().zip(exact.iter()) {
            let sigma = (a * (1.0 - a) / shots as f64).sqrt();
            assert!((e - a).abs() <= 4.0 * sigma + 1e-12, "{e} vs {a}");
        }
        let per = calibrate_confusion(&nm, &[0, 1, 2, 3], shots, ConfusionKind::PerQubit).unwrap();
        assert!(per.is_column_stochastic(1e-12));
        if let ConfusionMatrix::PerQubit(blocks) = per {
            for b in blocks {
                assert!((b[1][0] - 0.02).abs() < 4.0 * (0.02 * 0.98 / (8.0 * shots as f64)).sqrt());
            }
        }
    }

    #[test]
    fn single_qubit_inverse_is_exact() {
        let lambda = 0.02;
        let cm = ConfusionMatrix::symmetric(&[lambda]);
        for a in [0.0, 0.3, 0.5, 0.9, 1.0] {
            let measured = [0.96 * a + 0.02, 0.96 * (1.0 - a) + 0.02];
            let p = mitigate_distribution(&measured, &cm).unwrap();
            assert!((p[0] - a).abs() < 1e-9 && (p[1] - (1.0 - a)).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_mitigation_normalizes() {
        let h = CountsHistogram::from_pairs(2, [("00", 3), ("11", 1)]).unwrap();
        let p = mitigate(&h, &ConfusionMatrix::identity(2)).unwrap();
        assert_eq!(p, vec![0.75, 0.0, 0.0, 0.25]);
    }

    #[test]
    fn singular_confusion_is_rejected() {
        let cm = ConfusionMatrix::symmetric(&[0.5]);
        assert!(matches!(mitigate_distribution(&[0.5, 0.5], &cm), Err(Error::Numeric(_))));
        let full = ConfusionMatrix::Full(DMatrix::from_element(2, 2, 0.5));
        assert!(matches!(mitigate_distribution(&[0.5, 0.5], &full), Err(Error::Numeric(_))));
    }

    #[test]
    fn out_of_simplex_inputs_use_constrained_solve() {
        // Measured mass below the noise floor on `1` makes the plain inverse negative.
        let cm = ConfusionMatrix::symmetric(&[0.1]);
        let p = mitigate_distribution(&[1.0, 0.0], &cm).unwrap();
        assert!(p.iter().all(|&x| x >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mitigation_recovers_noisy_samples() {
        let mut c = build_evolution_circuit(0.4, true).unwrap();
        c.push(Gate::H(0)).unwrap();
        c.measure_all().unwrap();
        let truth = exact_distribution(&c, &NoiseModel::none(0)).unwrap();
        let nm = NoiseModel::readout_only(0.02, 3);
        let h = run_noisy(&c, &nm, 1_000_000).unwrap();
        let p = mitigate(&h, &analytic_confusion(&nm, &[0, 1, 2, 3])).unwrap();
        let l1: f64 = p.iter().zip(&truth).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 <= 0.01, "L1 = {l1}");
    }

    #[test]
    fn traces_of_product_and_evolved_states() {
        for (eps, want) in [(0.0, [1.0, 0.0, 0.0, 1.0, 1.0]), (0.1, [1.0, 0.2f64.sin(), 0.2f64.sin(), 0.2f64.cos(), 0.2f64.cos()])] {
            let base = build_evolution_circuit(eps, true).unwrap();
            let raw: Vec<_> = measurement_circuits(&base)
                .unwrap()
                .into_iter()
                .map(|(s, c)| (s, exact_distribution(&c, &NoiseModel::none(0)).unwrap()))
                .collect();
            let t = estimate_traces(&raw).unwrap();
            let got = [t.zz, t.xy, t.yx, t.iz, t.zi];
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-10, "{got:?}");
            }
            assert!(matches!(estimate_traces(&raw[..4]), Err(Error::Contract(_))));
        }
    }

    #[test]
    fn noiseless_sampled_traces_are_close() {
        let eps = 0.1;
        let base = build_evolution_circuit(eps, true).unwrap();
        let raw: Vec<_> = measurement_circuits(&base)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(k, (s, c))| (s, run_noisy(&c, &NoiseModel::none(k as u64), 1_000_000).unwrap().frequencies()))
            .collect();
        let opts = Reconstruction { postselect: true, n_measured: 4, shots: 1_000_000, ..Default::default() };
        let r = reconstruct(&raw, &opts).unwrap();
        let want = [1.0, (2.0 * eps).sin(), (2.0 * eps).sin(), (2.0 * eps).cos(), (2.0 * eps).cos()];
        let got = [r.traces.zz, r.traces.xy, r.traces.yx, r.traces.iz, r.traces.zi];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 0.005, "{got:?}");
        }
        assert_eq!(r.retained_fraction.zz, 1.0);
        assert_eq!(r.uncertainties.zz, 0.0);
    }

    proptest! {
        #[test]
        fn postselection_shrinks_and_is_idempotent(counts in proptest::collection::vec(0u64..50, 16)) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let h = CountsHistogram::from_dense(4, &counts).unwrap();
            for s in MeasurementSetting::all() {
                let (once, _) = postselect(&h, &s).unwrap();
                prop_assert!(once.shots() <= h.shots());
                for (k, &v) in once.counts() {
                    prop_assert!(v <= h.get(k));
                }
                if !once.is_empty() {
                    let (twice, f) = postselect(&once, &s).unwrap();
                    prop_assert_eq!(&twice, &once);
                    prop_assert_eq!(f, 1.0);
                }
            }
        }

        #[test]
        fn simplex_projection_lands_on_simplex(v in proptest::collection::vec(-2.0f64..2.0, 1..20)) {
            let p = project_simplex(&v);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn mitigation_output_is_a_distribution(
            q in proptest::collection::vec(0.0f64..1.0, 16),
            lambda in 0.0f64..0.3,
        ) {
            prop_assume!(q.iter().sum::<f64>() > 1e-6);
            let p = mitigate_distribution(&q, &ConfusionMatrix::symmetric(&[lambda; 4])).unwrap();
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
