//! Dense state-vector execution with depolarizing trajectories and readout
//! bit flips.
//!
//! Randomness is drawn from ChaCha8 streams keyed by `(seed, chunk index)`;
//! shots are processed in fixed-size chunks, so results depend only on the
//! seed and never on the number of worker threads.

mod histogram;
mod noise;

pub use histogram::CountsHistogram;
pub use noise::NoiseModel;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::dense::{self, ONE, ZERO};
use crate::error::{Error, Result};

const CHUNK_SHOTS: u64 = 4096;
const NORM_TOLERANCE: f64 = 1e-9;

/// SplitMix64 mix of a base seed and a stream tag.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Amplitudes of an `n`-qubit register, qubit 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        dense::check_dense_capacity(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n || amps.is_empty() {
            return Err(Error::arg("amplitude count must be a power of two"));
        }
        dense::check_dense_capacity(n)?;
        Ok(StateVector { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &str) -> Complex64 {
        dense::bits_to_index(bits).map_or(ZERO, |i| self.amps[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    fn apply_2x2(&mut self, q: usize, m: &[[Complex64; 2]; 2]) {
        let bit = self.mask(q);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    /// Applies one unitary gate in place. Measurements are rejected.
    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        for q in g.qubits() {
            if q >= self.n_qubits {
                return Err(Error::arg(format!("gate on qubit {q} of a {}-qubit state", self.n_qubits)));
            }
        }
        match *g {
            Gate::CX { control, target } => self.apply_cx(control, target),
            Gate::Measure { .. } => return Err(Error::contract("measurement in a unitary run")),
            _ => {
                let m = g.matrix_2x2().expect("single-qubit gate");
                self.apply_2x2(g.single_qubit().expect("single-qubit gate"), &m);
            }
        }
        Ok(())
    }

    /// Pauli `p ∈ {1: X, 2: Y, 3: Z}` on qubit `q`.
    fn apply_pauli(&mut self, q: usize, p: u8) {
        let bit = self.mask(q);
        let i = dense::I;
        for idx in 0..self.amps.len() {
            match p {
                1 if idx & bit == 0 => self.amps.swap(idx, idx | bit),
                2 if idx & bit == 0 => {
                    let (a0, a1) = (self.amps[idx], self.amps[idx | bit]);
                    self.amps[idx] = -i * a1;
                    self.amps[idx | bit] = i * a0;
                }
                3 if idx & bit != 0 => self.amps[idx] = -self.amps[idx],
                _ => {}
            }
        }
    }
}

/// `U_c |0...0⟩` by in-place gate application.
pub fn run_ideal(c: &Circuit) -> Result<StateVector> {
    if c.gates().iter().any(Gate::is_measure) {
        return Err(Error::contract("run_ideal requires a circuit without measurements"));
    }
    let mut psi = StateVector::zero(c.n_qubits())?;
    for g in c.gates() {
        psi.apply(g)?;
    }
    Ok(psi)
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], rng: &mut impl Rng) -> usize {
    let total = *cdf.last().expect("non-empty distribution");
    let u = rng.random::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Parallel chunked shot loop; `shot` maps one RNG draw sequence to an outcome index.
fn shoot<F>(shots: u64, seed: u64, n_outcomes: usize, shot: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng) -> usize + Sync,
{
    let n_chunks = shots.div_ceil(CHUNK_SHOTS);
    (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk);
            let here = CHUNK_SHOTS.min(shots - chunk * CHUNK_SHOTS);
            let mut counts = vec![0u64; n_outcomes];
            for _ in 0..here {
                counts[shot(&mut rng)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; n_outcomes],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// I.i.d. computational-basis samples from the Born distribution of `state`.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<CountsHistogram> {
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::contract(format!("state norm² is {norm}, expected 1")));
    }
    let cdf = cumulative(&state.probabilities());
    let counts = shoot(shots, seed, cdf.len(), |rng| draw(&cdf, rng));
    CountsHistogram::from_dense(state.n_qubits(), &counts)
}

/// Measured `(qubit, cbit)` pairs, validated so that cbits are exactly `0..m`.
fn measurement_map(c: &Circuit) -> Result<Vec<(usize, usize)>> {
    let meas = c.measurements();
    if meas.is_empty() {
        return Err(Error::contract("circuit has no measurements to report"));
    }
    let mut cbits: Vec<usize> = meas.iter().map(|&(_, b)| b).collect();
    cbits.sort_unstable();
    if cbits.iter().enumerate().any(|(i, &b)| i != b) {
        return Err(Error::contract("classical bits must be written exactly once, 0..m"));
    }
    Ok(meas)
}

/// Extracts measured bits (cbit 0 most significant) from a basis index.
fn project(index: usize, n_qubits: usize, meas: &[(usize, usize)]) -> usize {
    let m = meas.len();
    meas.iter().fold(0, |acc, &(q, b)| {
        if index >> (n_qubits - 1 - q) & 1 == 1 {
            acc | 1 << (m - 1 - b)
        } else {
            acc
        }
    })
}

fn flip_readout(outcome: usize, meas: &[(usize, usize)], nm: &NoiseModel, rng: &mut impl Rng) -> usize {
    let m = meas.len();
    meas.iter().fold(outcome, |acc, &(q, b)| {
        let l = nm.lambda(q);
        if l > 0.0 && rng.random::<f64>() < l {
            acc ^ 1 << (m - 1 - b)
        } else {
            acc
        }
    })
}

/// Monte-Carlo execution of a measured circuit under `nm`.
///
/// Each shot draws gate errors first; shots without any error sample the
/// precomputed ideal distribution, the rest replay the circuit with the
/// drawn Paulis inserted.
pub fn run_noisy(c: &Circuit, nm: &NoiseModel, shots: u64) -> Result<CountsHistogram> {
    nm.validate()?;
    let meas = measurement_map(c)?;
    let body = c.without_measurements();
    let ideal = run_ideal(&body)?;
    let ideal_cdf = cumulative(&ideal.probabilities());
    let n = c.n_qubits();
    let gates = body.gates();
    let error_rate: Vec<f64> = gates
        .iter()
        .map(|g| if g.is_cx() { nm.cx_depol } else { nm.sq_depol })
        .collect();
    let noisy_gates = nm.has_gate_noise();

    let counts = shoot(shots, nm.seed, 1 << meas.len(), |rng| {
        let mut faults: Vec<(usize, u8)> = Vec::new();
        if noisy_gates {
            for (k, &p) in error_rate.iter().enumerate() {
                if p > 0.0 && rng.random::<f64>() < p {
                    // Uniform over the 3 (one qubit) or 15 (two qubits) non-identity Paulis.
                    let arity = if gates[k].is_cx() { 2 } else { 1 };
                    let code = rng.random_range(1..(1u8 << (2 * arity)));
                    faults.push((k, code));
                }
            }
        }
        let index = if faults.is_empty() {
            draw(&ideal_cdf, rng)
        } else {
            let mut psi = StateVector::zero(n).expect("capacity checked");
            let mut next = faults.iter().peekable();
            for (k, g) in gates.iter().enumerate() {
                psi.apply(g).expect("validated circuit");
                while let Some(&&(fk, code)) = next.peek() {
                    if fk != k {
                        break;
                    }
                    let qubits = g.qubits();
                    for (slot, &q) in qubits.iter().enumerate() {
                        let p = code >> (2 * (qubits.len() - 1 - slot)) & 0b11;
                        if p != 0 {
                            psi.apply_pauli(q, p);
                        }
                    }
                    next.next();
                }
            }
            draw(&cumulative(&psi.probabilities()), rng)
        };
        let outcome = project(index, n, &meas);
        flip_readout(outcome, &meas, nm, rng)
    });
    CountsHistogram::from_dense(meas.len(), &counts)
}

/// Exact distribution of the measured bits under readout noise only, the
/// infinite-shot limit of [`run_noisy`] when gate noise is off.
pub fn exact_distribution(c: &Circuit, nm: &NoiseModel) -> Result<Vec<f64>> {
    nm.validate()?;
    if nm.has_gate_noise() {
        return Err(Error::contract("exact distributions do not model gate noise"));
    }
    let meas = measurement_map(c)?;
    let psi = run_ideal(&c.without_measurements())?;
    let m = meas.len();
    let mut dist = vec![0.0; 1 << m];
    for (idx, p) in psi.probabilities().into_iter().enumerate() {
        dist[project(idx, c.n_qubits(), &meas)] += p;
    }
    for &(q, b) in &meas {
        let l = nm.lambda(q);
        if l == 0.0 {
            continue;
        }
        let bit = 1 << (m - 1 - b);
        for i in 0..dist.len() {
            if i & bit == 0 {
                let (p0, p1) = (dist[i], dist[i | bit]);
                dist[i] = (1.0 - l) * p0 + l * p1;
                dist[i | bit] = l * p0 + (1.0 - l) * p1;
            }
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::tests::random_gate;
    use crate::digitizer::build_evolution_circuit;
    use proptest::prelude::*;

    fn prep_measured() -> Circuit {
        let mut c = Circuit::from_gates(4, [Gate::X(1), Gate::X(3)]).unwrap();
        c.measure_all().unwrap();
        c
    }

    #[test]
    fn ideal_runs() {
        let psi = run_ideal(&Circuit::from_gates(4, [Gate::X(1), Gate::X(3)]).unwrap()).unwrap();
        assert_eq!(psi.amplitude("0101"), ONE);
        let empty = run_ideal(&Circuit::new(4).unwrap()).unwrap();
        assert_eq!(empty.amplitude("0000"), ONE);

        let psi = run_ideal(&build_evolution_circuit(0.1, true).unwrap()).unwrap();
        // Global phase is fixed by the synthesized gates; compare up to it.
        let a = psi.amplitude("0101");
        let phase = a / a.norm();
        let b = psi.amplitude("1010") / phase;
        assert!(((a / phase).re - 0.1f64.cos()).abs() < 1e-10);
        assert!((b - Complex64::new(0.0, 0.1f64.sin())).norm() < 1e-10);
    }

    #[test]
    fn run_ideal_contract() {
        assert!(matches!(run_ideal(&prep_measured()), Err(Error::Contract(_))));
        assert!(matches!(StateVector::zero(13), Err(Error::Capacity(_))));
    }

    #[test]
    fn noiseless_shots_land_on_prep_state() {
        let h = run_noisy(&prep_measured(), &NoiseModel::none(3), 1000).unwrap();
        assert_eq!(h.get("0101"), 1000);
        assert_eq!(h.counts().len(), 1);
    }

    #[test]
    fn readout_flips_follow_binomial() {
        let lambda = 0.02;
        let shots = 200_000;
        let h = run_noisy(&prep_measured(), &NoiseModel::readout_only(lambda, 11), shots).unwrap();
        let p = (1.0f64 - lambda).powi(4);
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        let f = h.get("0101") as f64 / shots as f64;
        assert!((f - p).abs() <= 3.0 * sigma, "{f} vs {p}");
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let mut c = build_evolution_circuit(0.3, true).unwrap();
        c.measure_all().unwrap();
        let nm = NoiseModel::belem_like(99);
        let a = run_noisy(&c, &nm, 20_000).unwrap();
        let b = run_noisy(&c, &nm, 20_000).unwrap();
        assert_eq!(a, b);
        let other = run_noisy(&c, &nm.with_seed(100), 20_000).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut c = build_evolution_circuit(0.3, true).unwrap();
        c.measure_all().unwrap();
        let nm = NoiseModel::belem_like(5);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_noisy(&c, &nm, 30_000).unwrap());
        let b = four.install(|| run_noisy(&c, &nm, 30_000).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn missing_measurements_rejected() {
        let c = Circuit::from_gates(2, [Gate::X(0)]).unwrap();
        assert!(matches!(run_noisy(&c, &NoiseModel::none(0), 10), Err(Error::Contract(_))));
    }

    #[test]
    fn sample_examples() {
        let basis = run_ideal(&Circuit::from_gates(2, [Gate::X(0)]).unwrap()).unwrap();
        let h = sample(&basis, 500, 1).unwrap();
        assert_eq!(h.counts().len(), 1);
        assert_eq!(h.get("10"), 500);

        let uniform = run_ideal(&Circuit::from_gates(2, [Gate::H(0), Gate::H(1)]).unwrap()).unwrap();
        let h = sample(&uniform, 1_000_000, 2).unwrap();
        for bits in ["00", "01", "10", "11"] {
            let f = h.get(bits) as f64 / 1e6;
            assert!((f - 0.25).abs() <= 0.002, "{bits}: {f}");
        }

        let psi = run_ideal(&build_evolution_circuit(0.1, true).unwrap()).unwrap();
        let h = sample(&psi, 1_000_000, 3).unwrap();
        let p = 0.1f64.sin().powi(2);
        let sigma = (p * (1.0 - p) / 1e6).sqrt();
        assert!((h.get("1010") as f64 / 1e6 - p).abs() <= 4.0 * sigma);

        let bad = StateVector::from_amplitudes(vec![ONE, ONE]).unwrap();
        assert!(matches!(sample(&bad, 10, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn noiseless_sampling_passes_chi_square() {
        let mut c = Circuit::from_gates(3, [Gate::H(0), Gate::Rx(1, 1.1), Gate::cx(0, 2), Gate::Rz(2, 0.4), Gate::H(2)]).unwrap();
        let probs = run_ideal(&c).unwrap().probabilities();
        c.measure_all().unwrap();
        let shots = 1_000_000u64;
        let h = run_noisy(&c, &NoiseModel::none(21), shots).unwrap();
        let mut chi2 = 0.0;
        let mut dof = 0;
        for (obs, p) in h.to_dense().into_iter().zip(probs) {
            let expected = p * shots as f64;
            if expected > 5.0 {
                chi2 += (obs as f64 - expected).powi(2) / expected;
                dof += 1;
            }
        }
        // 99.9% quantile of chi-square with 7 degrees of freedom is 24.32.
        assert!(dof <= 8);
        assert!(chi2 < 24.32, "chi2 = {chi2}");
    }

    #[test]
    fn exact_distribution_applies_readout() {
        let d = exact_distribution(&prep_measured(), &NoiseModel::readout_only(0.02, 0)).unwrap();
        assert!((d[0b0101] - 0.98f64.powi(4)).abs() < 1e-15);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(exact_distribution(&prep_measured(), &NoiseModel::belem_like(0)).is_err());
    }

    #[test]
    fn pauli_kernel_matches_gates() {
        let base = run_ideal(&Circuit::from_gates(2, [Gate::H(0), Gate::Rx(1, 0.7)]).unwrap()).unwrap();
        for (code, gate_mat) in [(1u8, "X"), (2, "Y"), (3, "Z")] {
            let mut a = base.clone();
            a.apply_pauli(1, code);
            let p = format!("I{gate_mat}").parse::<crate::pauli::PauliString>().unwrap();
            let v = nalgebra::DVector::from_vec(base.amplitudes().to_vec());
            let want = p.to_matrix().unwrap() * v;
            for (x, y) in a.amplitudes().iter().zip(want.iter()) {
                assert!((x - y).norm() < 1e-15);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn kernels_agree_with_dense_evaluator(
            (n, gates) in (1usize..=6).prop_flat_map(|n| (Just(n), proptest::collection::vec(random_gate(n.max(2)), 0..30)))
        ) {
            let gates: Vec<Gate> = gates.into_iter().filter(|g| g.qubits().iter().all(|&q| q < n)).collect();
            let c = Circuit::from_gates(n, gates).unwrap();
            let psi = run_ideal(&c).unwrap();
            prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
            let u = c.unitary().unwrap();
            for (i, a) in psi.amplitudes().iter().enumerate() {
                prop_assert!((a - u[(i, 0)]).norm() <= 1e-11);
            }
        }
    }
}
