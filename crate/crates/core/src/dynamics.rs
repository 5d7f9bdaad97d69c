//! Qubit plus modes in the one-excitation sector, under the rotating-wave
//! approximation. Results from this module are RWA results: counter-rotating
//! terms are absent by construction, which is not accurate deep in the
//! ultrastrong regime.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::max_asymmetry;
use crate::modes::CouplingSpectrum;

pub type C64 = Complex<f64>;

/// Normalization tolerance accepted on input states.
pub const NORM_TOL: f64 = 1e-6;

/// c₀|1;0⟩ + Σ c_n|0;n⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    pub c0: C64,
    pub c: Vec<C64>,
}

impl SingleExcitationState {
    pub fn new(c0: C64, c: Vec<C64>) -> Result<Self> {
        let s = SingleExcitationState { c0, c };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Qubit excited, all modes in vacuum.
    pub fn excited(n_modes: usize) -> Self {
        SingleExcitationState {
            c0: C64::new(1.0, 0.0),
            c: vec![C64::new(0.0, 0.0); n_modes],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.c.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    pub fn qubit_population(&self) -> f64 {
        self.c0.norm_sqr()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.c.iter().map(|a| a.norm_sqr()).collect()
    }

    fn to_vector(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.c.len() + 1);
        v[0] = self.c0;
        for (i, a) in self.c.iter().enumerate() {
            v[i + 1] = *a;
        }
        v
    }

    fn from_vector(v: &DVector<C64>) -> Self {
        SingleExcitationState {
            c0: v[0],
            c: v.iter().skip(1).copied().collect(),
        }
    }

    /// ⟨ψ|H|ψ⟩ for a real symmetric one-excitation Hamiltonian.
    pub fn energy(&self, h: &DMatrix<f64>) -> Result<f64> {
        let v = self.to_vector();
        if h.shape() != (v.len(), v.len()) {
            return Err(Error::DimensionMismatch(format!(
                "hamiltonian {:?} for state of length {}",
                h.shape(),
                v.len()
            )));
        }
        let hc = h.map(|x| C64::new(x, 0.0));
        Ok((v.adjoint() * hc * &v)[(0, 0)].re)
    }
}

/// Arrowhead matrix with diagonal (Δ₀, ω_1 … ω_N) and first row/column g_n.
pub fn build_rwa_hamiltonian(couplings: &CouplingSpectrum, delta0: f64) -> Result<DMatrix<f64>> {
    let n = couplings.frequencies.len();
    if couplings.couplings.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} couplings for {} modes",
            couplings.couplings.len(),
            n
        )));
    }
    if n == 0 {
        return Err(Error::EmptyModes);
    }
    let mut h = DMatrix::zeros(n + 1, n + 1);
    h[(0, 0)] = delta0;
    for (i, (&w, &g)) in couplings
        .frequencies
        .iter()
        .zip(&couplings.couplings)
        .enumerate()
    {
        h[(i + 1, i + 1)] = w;
        h[(0, i + 1)] = g;
        h[(i + 1, 0)] = g;
    }
    Ok(h)
}

/// exp(−iHt) through one eigendecomposition of H.
#[derive(Debug, Clone)]
pub struct Propagator {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl Propagator {
    pub fn new(h: &DMatrix<f64>) -> Result<Self> {
        if h.nrows() != h.ncols() || h.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{:?} is not square",
                h.shape()
            )));
        }
        let asym = max_asymmetry(h);
        if asym > 1e-12 * h.amax() {
            return Err(Error::NotSymmetric(asym));
        }
        let eig = SymmetricEigen::new(h.clone());
        Ok(Propagator {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn apply(&self, psi: &SingleExcitationState, t: f64) -> Result<SingleExcitationState> {
        if psi.n_modes() + 1 != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state with {} modes for propagator of dimension {}",
                psi.n_modes(),
                self.dim()
            )));
        }
        if t == 0.0 {
            return Ok(psi.clone());
        }
        let v = self.vectors.map(|x| C64::new(x, 0.0));
        let mut a = v.transpose() * psi.to_vector();
        for (k, lam) in self.values.iter().enumerate() {
            a[k] *= C64::from_polar(1.0, -lam * t);
        }
        Ok(SingleExcitationState::from_vector(&(v * a)))
    }
}

/// States at each of `times` (seconds), starting from `psi0` at t = 0.
pub fn evolve(
    h: &DMatrix<f64>,
    psi0: &SingleExcitationState,
    times: &[f64],
) -> Result<Vec<SingleExcitationState>> {
    let norm = psi0.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let prop = Propagator::new(h)?;
    times.iter().map(|&t| prop.apply(psi0, t)).collect()
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Entropy of the qubit against all modes.
pub fn entropy_qubit(psi: &SingleExcitationState) -> f64 {
    binary_entropy(psi.qubit_population())
}

/// Entropy of the modes left over after tracing out the qubit and mode `n`.
pub fn entropy_minus_mode(psi: &SingleExcitationState, n: usize) -> Result<f64> {
    let cn = psi.c.get(n).ok_or(Error::IndexOutOfRange {
        index: n,
        len: psi.c.len(),
    })?;
    Ok(binary_entropy(psi.qubit_population() + cn.norm_sqr()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    /// Evolution time as passed to the scan.
    pub time: f64,
    pub e_qubit: f64,
    pub e_per_mode: Vec<f64>,
    /// |c_n|² at that time.
    pub populations: Vec<f64>,
}

impl EntropyReport {
    /// E_q > 0 and E_n ≥ E_q for every mode with population above
    /// `min_population`.
    pub fn witness_holds(&self, min_population: f64) -> bool {
        self.e_qubit > 0.0
            && self
                .e_per_mode
                .iter()
                .zip(&self.populations)
                .all(|(e, p)| *p <= min_population || *e >= self.e_qubit)
    }
}

fn report(psi: &SingleExcitationState, time: f64) -> EntropyReport {
    let p0 = psi.qubit_population();
    let populations = psi.populations();
    EntropyReport {
        time,
        e_qubit: binary_entropy(p0),
        e_per_mode: populations.iter().map(|p| binary_entropy(p0 + p)).collect(),
        populations,
    }
}

/// Evolves |1;0⟩ under `h` for time `t` (seconds) and reports the entropies.
pub fn entropy_scan(h: &DMatrix<f64>, t: f64) -> Result<EntropyReport> {
    let prop = Propagator::new(h)?;
    entropy_scan_with(&prop, t)
}

pub fn entropy_scan_with(prop: &Propagator, t: f64) -> Result<EntropyReport> {
    let psi = prop.apply(&SingleExcitationState::excited(prop.dim() - 1), t)?;
    Ok(report(&psi, t))
}

/// Von Neumann entropy (nats) of the subsystems in `keep` by explicit
/// partial trace of the full qubit ⊗ modes state, each mode truncated to 0/1
/// photons. Subsystem 0 is the qubit, subsystem k is mode k. Cost grows as
/// 4^(N+1); meant as a cross-check for small N.
pub fn reduced_entropy(psi: &SingleExcitationState, keep: &[usize]) -> Result<f64> {
    let n_sub = psi.n_modes() + 1;
    if n_sub > 16 {
        return Err(Error::domain(format!(
            "{} subsystems is too many for a dense partial trace",
            n_sub
        )));
    }
    if let Some(&s) = keep.iter().find(|&&s| s >= n_sub) {
        return Err(Error::IndexOutOfRange {
            index: s,
            len: n_sub,
        });
    }
    let dim = 1usize << n_sub;
    let mut full = vec![C64::new(0.0, 0.0); dim];
    full[1] = psi.c0;
    for (k, a) in psi.c.iter().enumerate() {
        full[1 << (k + 1)] = *a;
    }
    let env: Vec<usize> = (0..n_sub).filter(|s| !keep.contains(s)).collect();
    let split = |idx: usize| {
        let mut kept = 0;
        for (b, &s) in keep.iter().enumerate() {
            kept |= ((idx >> s) & 1) << b;
        }
        let mut rest = 0;
        for (b, &s) in env.iter().enumerate() {
            rest |= ((idx >> s) & 1) << b;
        }
        (kept, rest)
    };
    let dk = 1usize << keep.len();
    let mut rho = DMatrix::<C64>::zeros(dk, dk);
    for i in 0..dim {
        for j in 0..dim {
            let (ki, ei) = split(i);
            let (kj, ej) = split(j);
            if ei == ej {
                rho[(ki, kj)] += full[i] * full[j].conj();
            }
        }
    }
    // restrict to the support: a zero diagonal entry of a PSD matrix
    // means a zero row, and it only contributes zero eigenvalues
    let support: Vec<usize> = (0..dk).filter(|&i| rho[(i, i)].re > 0.0).collect();
    let ds = support.len();
    // real embedding [[A, −B], [B, A]] carries each eigenvalue twice
    let mut real = DMatrix::<f64>::zeros(2 * ds, 2 * ds);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            let z = rho[(i, j)];
            real[(a, b)] = z.re;
            real[(a + ds, b + ds)] = z.re;
            real[(a, b + ds)] = -z.im;
            real[(a + ds, b)] = z.im;
        }
    }
    let eig = SymmetricEigen::new(real);
    Ok(0.5
        * eig
            .eigenvalues
            .iter()
            .filter(|&&l| l > 1e-300)
            .map(|&l| -l * l.ln())
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn spectrum(freqs: &[f64], gs: &[f64]) -> CouplingSpectrum {
        CouplingSpectrum {
            couplings: gs.to_vec(),
            relative_profile: gs.to_vec(),
            frequencies: freqs.to_vec(),
        }
    }

    #[test]
    fn jaynes_cummings_block() {
        let h = build_rwa_hamiltonian(&spectrum(&[5.0], &[0.3]), 5.0).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[5.0, 0.3, 0.3, 5.0]));
    }

    #[test]
    fn arrowhead_shape() {
        let h = build_rwa_hamiltonian(&spectrum(&[1.0, 2.0, 3.0], &[0.1, 0.2, 0.3]), 1.5).unwrap();
        for i in 1..4 {
            for j in 1..4 {
                if i != j {
                    assert_eq!(h[(i, j)], 0.0);
                }
            }
            assert!(h[(0, i)] != 0.0 && h[(0, i)] == h[(i, 0)]);
        }
        let free = build_rwa_hamiltonian(&spectrum(&[1.0, 2.0], &[0.0, 0.0]), 1.5).unwrap();
        assert_eq!(
            free,
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.5, 1.0, 2.0]))
        );
    }

    #[test]
    fn hamiltonian_errors() {
        assert!(matches!(
            build_rwa_hamiltonian(&spectrum(&[], &[]), 1.0),
            Err(Error::EmptyModes)
        ));
        assert!(matches!(
            build_rwa_hamiltonian(&spectrum(&[1.0], &[0.1, 0.2]), 1.0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rabi_oscillation() {
        let (w, g) = (
            2.0 * std::f64::consts::PI * 4.2e9,
            2.0 * std::f64::consts::PI * 1e8,
        );
        let h = build_rwa_hamiltonian(&spectrum(&[w], &[g]), w).unwrap();
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1 / g).collect();
        let states = evolve(&h, &SingleExcitationState::excited(1), &times).unwrap();
        for (t, s) in times.iter().zip(&states) {
            // remove the common phase e^{−iωt}
            let c0 = s.c0 * C64::from_polar(1.0, w * t);
            assert!((c0.re - (g * t).cos()).abs() < 1e-6, "t = {t}");
            assert!(c0.im.abs() < 1e-6);
        }
    }

    #[test]
    fn zero_time_is_exact() {
        let h = build_rwa_hamiltonian(&spectrum(&[1.0, 2.0], &[0.3, 0.1]), 1.5).unwrap();
        let psi = SingleExcitationState::new(
            C64::new(0.6, 0.0),
            vec![C64::new(0.0, 0.8), C64::new(0.0, 0.0)],
        )
        .unwrap();
        let out = evolve(&h, &psi, &[0.0]).unwrap();
        assert_eq!(out[0], psi);
    }

    #[test]
    fn decoupled_qubit_stays_put() {
        let h = build_rwa_hamiltonian(&spectrum(&[1.0, 2.0], &[0.0, 0.0]), 1.5).unwrap();
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.37).collect();
        for s in evolve(&h, &SingleExcitationState::excited(2), &times).unwrap() {
            assert!((s.c0.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn input_validation() {
        let h = build_rwa_hamiltonian(&spectrum(&[1.0], &[0.1]), 1.0).unwrap();
        let bad = SingleExcitationState {
            c0: C64::new(0.5, 0.0),
            c: vec![C64::new(0.5, 0.0)],
        };
        assert!(matches!(
            evolve(&h, &bad, &[1.0]),
            Err(Error::NotNormalized(_))
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.1, 1.0]);
        assert!(matches!(
            evolve(&asym, &SingleExcitationState::excited(1), &[1.0]),
            Err(Error::NotSymmetric(_))
        ));
        assert!(SingleExcitationState::new(C64::new(1.0, 0.0), vec![C64::new(0.1, 0.0)]).is_err());
    }

    #[test]
    fn entropy_examples() {
        let s = SingleExcitationState::excited(3);
        assert_eq!(entropy_qubit(&s), 0.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let half = SingleExcitationState::new(
            C64::new(r, 0.0),
            vec![C64::new(r, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        assert!((entropy_qubit(&half) - LN_2).abs() < 1e-15);
        assert!((entropy_minus_mode(&half, 1).unwrap() - LN_2).abs() < 1e-15);
        assert!(entropy_minus_mode(&half, 0).unwrap().abs() < 1e-15);
        assert!(matches!(
            entropy_minus_mode(&half, 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));

        let on_mode = SingleExcitationState::new(
            C64::new(0.0, 0.0),
            vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
        )
        .unwrap();
        assert_eq!(entropy_minus_mode(&on_mode, 1).unwrap(), 0.0);

        let n = 7;
        let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        let spread = SingleExcitationState::new(C64::new(0.0, 0.0), vec![a; n]).unwrap();
        let want = binary_entropy(1.0 / n as f64);
        assert_eq!(entropy_qubit(&spread), 0.0);
        for k in 0..n {
            let e = entropy_minus_mode(&spread, k).unwrap();
            assert!((e - want).abs() < 1e-14 && e > 0.0);
        }
    }

    #[test]
    fn scan_at_zero_and_single_mode() {
        let h = build_rwa_hamiltonian(&spectrum(&[1.0, 1.1], &[0.1, 0.05]), 1.05).unwrap();
        let r = entropy_scan(&h, 0.0).unwrap();
        assert_eq!(r.e_qubit, 0.0);
        assert!(r.e_per_mode.iter().all(|&e| e == 0.0));

        let h1 = build_rwa_hamiltonian(&spectrum(&[1.0], &[0.1]), 1.0).unwrap();
        let r1 = entropy_scan(&h1, 3.3).unwrap();
        assert!(r1.e_per_mode[0].abs() < 1e-12);
        assert!(r1.e_qubit > 0.0);
    }

    fn random_state(rng: &mut impl rand::Rng, n: usize) -> SingleExcitationState {
        let mut c0 = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut c: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = (c0.norm_sqr() + c.iter().map(|a| a.norm_sqr()).sum::<f64>()).sqrt();
        c0 /= norm;
        c.iter_mut().for_each(|a| *a /= norm);
        SingleExcitationState::new(c0, c).unwrap()
    }

    #[test]
    fn closed_forms_match_partial_trace() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100 {
            let n = 1 + trial % 8;
            let psi = random_state(&mut rng, n);
            let eq = reduced_entropy(&psi, &[0]).unwrap();
            let all_modes: Vec<usize> = (1..=n).collect();
            assert!((entropy_qubit(&psi) - eq).abs() < 1e-9);
            assert!(
                (entropy_qubit(&psi) - reduced_entropy(&psi, &all_modes).unwrap()).abs() < 1e-9
            );
            for m in 0..n {
                let rest: Vec<usize> = (1..=n).filter(|&s| s != m + 1).collect();
                let oracle = if rest.is_empty() {
                    0.0
                } else {
                    reduced_entropy(&psi, &rest).unwrap()
                };
                let e = entropy_minus_mode(&psi, m).unwrap();
                assert!(
                    (e - oracle).abs() < 1e-9,
                    "trial {trial} mode {m}: {e} vs {oracle}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn conservation_and_reversal(
            freqs in prop::collection::vec(0.5f64..2.0, 1..6),
            gscale in 0.0f64..0.3,
            delta0 in 0.5f64..2.0,
            t in 0.0f64..50.0,
        ) {
            let gs: Vec<f64> = freqs.iter().enumerate().map(|(i, _)| gscale / (1.0 + i as f64)).collect();
            let h = build_rwa_hamiltonian(&spectrum(&freqs, &gs), delta0).unwrap();
            let prop = Propagator::new(&h).unwrap();
            let psi0 = SingleExcitationState::excited(freqs.len());
            let e0 = psi0.energy(&h).unwrap();
            let psi = prop.apply(&psi0, t).unwrap();
            prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-9);
            prop_assert!((psi.energy(&h).unwrap() - e0).abs() <= 1e-8 * e0.abs());
            let back = prop.apply(&psi, -t).unwrap();
            prop_assert!((back.c0 - psi0.c0).norm() < 1e-8);
            for a in &back.c {
                prop_assert!(a.norm() < 1e-8);
            }
            let r = entropy_scan_with(&prop, t).unwrap();
            prop_assert!(r.e_qubit >= 0.0 && r.e_qubit <= LN_2 + 1e-15);
            prop_assert!(r.e_per_mode.iter().all(|&e| e >= 0.0));
        }
    }
}
