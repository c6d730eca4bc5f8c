//! CHSH, steering and uncertainty evaluators.
//!
//! The CHSH norm has two routes. The dense route materializes
//! `A₁⊗B₁ + A₁⊗B₂ + A₂⊗B₁ − A₂⊗B₂` and is limited to small local
//! dimension. The commutator route uses `B² = 4·I − [A₁,A₂]⊗[B₁,B₂]`: with
//! `σ = spec(i[A₁,A₂])` and `τ = spec(i[B₁,B₂])` the squared norm is
//! `max_{i,j} (4 + σ_i τ_j)`, which only needs two N-dimensional eigensolves.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::matkit::{
    commutator, dagger, hermitian_eigenvalues, kron_with_cap, mat_mul, normalized_trace,
    spectral_norm, ComplexMatrix, C64,
};
use crate::observables::{
    complex_chsh_observables, omega, pauli_chsh_settings, random_observable, truncated_free_pair,
    Observable, ObservableFamily, RngStream,
};

/// Largest operator dimension (`dim²`) the dense CHSH route will build.
pub const DENSE_CHSH_CAP: usize = 4096;
/// Largest local dimension for the commutator route.
pub const COMMUTATOR_CAP: usize = 2048;
/// Largest family size for the exhaustive sign search.
pub const MAX_STEERING_FAMILY: usize = 20;
/// `2√2`.
pub const TSIRELSON: f64 = 2.0 * SQRT_2;

const C_I: C64 = C64::new(0.0, 1.0);

/// The four local observables of a CHSH experiment.
#[derive(Clone, Debug)]
pub struct ChshSettings {
    pub a1: Observable,
    pub a2: Observable,
    pub b1: Observable,
    pub b2: Observable,
}

impl ChshSettings {
    pub fn new(a1: Observable, a2: Observable, b1: Observable, b2: Observable) -> Result<Self> {
        let d = a1.dim();
        for o in [&a2, &b1, &b2] {
            if o.dim() != d {
                return Err(Error::DimensionMismatch {
                    op: "ChshSettings::new",
                    left: (d, d),
                    right: (o.dim(), o.dim()),
                });
            }
        }
        Ok(Self { a1, a2, b1, b2 })
    }

    pub fn pauli() -> Self {
        let [a1, a2, b1, b2] = pauli_chsh_settings();
        Self { a1, a2, b1, b2 }
    }

    /// Both parties measure the same pair.
    pub fn symmetric(a1: Observable, a2: Observable) -> Result<Self> {
        Self::new(a1.clone(), a2.clone(), a1, a2)
    }

    pub fn truncated(n: usize) -> Result<Self> {
        let (a1, a2) = truncated_free_pair(n)?;
        Self::symmetric(a1, a2)
    }

    /// Four independent random observables drawn in order from `rng`.
    pub fn random(dim: usize, rng: &mut RngStream) -> Result<Self> {
        let a1 = random_observable(dim, rng)?;
        let a2 = random_observable(dim, rng)?;
        let b1 = random_observable(dim, rng)?;
        let b2 = random_observable(dim, rng)?;
        Self::new(a1, a2, b1, b2)
    }

    pub fn dim(&self) -> usize {
        self.a1.dim()
    }
}

/// `A₁⊗B₁ + A₁⊗B₂ + A₂⊗B₁ − A₂⊗B₂`.
pub fn chsh_operator(s: &ChshSettings) -> Result<ComplexMatrix> {
    let d = s.dim();
    let k = |a: &Observable, b: &Observable| kron_with_cap(a.matrix(), b.matrix(), DENSE_CHSH_CAP);
    let cap_err = |_| Error::SizeCap {
        op: "chsh_operator (use chsh_norm_via_commutators)",
        rows: d * d,
        cols: d * d,
        cap: DENSE_CHSH_CAP,
    };
    let t11 = k(&s.a1, &s.b1).map_err(cap_err)?;
    let t12 = k(&s.a1, &s.b2)?;
    let t21 = k(&s.a2, &s.b1)?;
    let t22 = k(&s.a2, &s.b2)?;
    t11.add(&t12)?.add(&t21)?.sub(&t22)
}

/// Dense-route norm: spectral norm of the materialized operator.
pub fn chsh_norm_dense(s: &ChshSettings) -> Result<f64> {
    spectral_norm(&chsh_operator(s)?)
}

/// `‖B² − (4·I − [A₁,A₂]⊗[B₁,B₂])‖_max`.
pub fn chsh_square_identity_gap(s: &ChshSettings) -> Result<f64> {
    let b = chsh_operator(s)?;
    let b_sq = mat_mul(&b, &b)?;
    let ca = commutator(s.a1.matrix(), s.a2.matrix())?;
    let cb = commutator(s.b1.matrix(), s.b2.matrix())?;
    let rhs = ComplexMatrix::identity(b.rows())?
        .scale(C64::new(4.0, 0.0))
        .sub(&kron_with_cap(&ca, &cb, DENSE_CHSH_CAP)?)?;
    b_sq.max_abs_diff(&rhs)
}

/// Real spectra of `i[A₁,A₂]` and `i[B₁,B₂]`, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorSpectra {
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
}

impl CommutatorSpectra {
    /// `max_{i,j} (4 + σ_i τ_j)`; a bilinear maximum, attained at the extremes.
    pub fn squared_norm(&self) -> f64 {
        let (smin, smax) = (self.sigma[0], self.sigma[self.sigma.len() - 1]);
        let (tmin, tmax) = (self.tau[0], self.tau[self.tau.len() - 1]);
        4.0 + [smin * tmin, smin * tmax, smax * tmin, smax * tmax]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

const COMMUTATOR_SPECTRUM_SLACK: f64 = 1e-9;

fn i_commutator_spectrum(a: &Observable, b: &Observable) -> Result<Vec<f64>> {
    let h = commutator(a.matrix(), b.matrix())?.scale(C_I);
    let values = hermitian_eigenvalues(&h)?.values;
    if let Some(&v) = values
        .iter()
        .find(|v| v.abs() > 2.0 + COMMUTATOR_SPECTRUM_SLACK)
    {
        return Err(Error::InvalidArgument(format!(
            "commutator eigenvalue {v} outside [-2, 2]; inputs are not unitary"
        )));
    }
    Ok(values)
}

pub fn commutator_spectra(s: &ChshSettings) -> Result<CommutatorSpectra> {
    if s.dim() > COMMUTATOR_CAP {
        return Err(Error::ArgumentCap {
            what: "commutator-route dimension",
            value: s.dim(),
            cap: COMMUTATOR_CAP,
        });
    }
    Ok(CommutatorSpectra {
        sigma: i_commutator_spectrum(&s.a1, &s.a2)?,
        tau: i_commutator_spectrum(&s.b1, &s.b2)?,
    })
}

/// CHSH norm from the two commutator spectra.
pub fn chsh_norm_via_commutators(s: &ChshSettings) -> Result<f64> {
    Ok(commutator_spectra(s)?.squared_norm().sqrt())
}

/// Closed-form CHSH norm of the truncated free pair on `n = 2l + 1` sites:
/// `sqrt(4 + 4·max_j sin²(2πj/n))`.
pub fn truncated_chsh_norm(n: usize) -> Result<f64> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::NotOddDimension(n));
    }
    let max_sin_sq = (0..n)
        .map(|j| (2.0 * PI * j as f64 / n as f64).sin().powi(2))
        .fold(0.0, f64::max);
    Ok((4.0 + 4.0 * max_sin_sq).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteeringResult {
    pub n: usize,
    /// `C_n = sup_α ‖Σ α_i A_i‖`.
    pub bound_value: f64,
    pub maximizing_signs: Vec<i8>,
    /// `2√n`.
    pub reference_2sqrt_n: f64,
}

fn signed_sum(members: &[Observable], signs: &[i8]) -> Result<ComplexMatrix> {
    let d = members[0].dim();
    let mut sum = ComplexMatrix::zeros(d, d)?;
    for (m, &s) in members.iter().zip(signs) {
        sum = sum.add(&m.matrix().scale(C64::new(s as f64, 0.0)))?;
    }
    Ok(sum)
}

/// Local-hidden-state bound of the linear steering functional, by exhaustive
/// search over sign vectors with the first sign fixed to `+1`.
pub fn steering_lhs_bound(fam: &ObservableFamily) -> Result<SteeringResult> {
    let n = fam.len();
    if n > MAX_STEERING_FAMILY {
        return Err(Error::ArgumentCap {
            what: "steering family size",
            value: n,
            cap: MAX_STEERING_FAMILY,
        });
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_signs = Vec::new();
    for mask in 0u32..(1u32 << (n - 1)) {
        let signs: Vec<i8> = (0..n)
            .map(|i| {
                if i > 0 && mask >> (i - 1) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        let value = hermitian_eigenvalues(&signed_sum(fam.members(), &signs)?)?.abs_max();
        if value > best {
            best = value;
            best_signs = signs;
        }
    }
    Ok(SteeringResult {
        n,
        bound_value: best,
        maximizing_signs: best_signs,
        reference_2sqrt_n: 2.0 * (n as f64).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyReport {
    pub n: usize,
    pub norm_of_sum: f64,
    /// `1/2 + ‖Σ A_i‖/(2n)`; equal for the all-zero and all-one outcome strings.
    pub xi: f64,
    /// `1/2 + 1/√n`.
    pub bound_half_plus_inv_sqrt_n: f64,
}

pub fn fine_grained_uncertainty(fam: &ObservableFamily) -> Result<UncertaintyReport> {
    let n = fam.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty observable family".into()));
    }
    let signs = vec![1i8; n];
    let norm = hermitian_eigenvalues(&signed_sum(fam.members(), &signs)?)?.abs_max();
    Ok(UncertaintyReport {
        n,
        norm_of_sum: norm,
        xi: 0.5 + norm / (2.0 * n as f64),
        bound_half_plus_inv_sqrt_n: 0.5 + 1.0 / (n as f64).sqrt(),
    })
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "state vector must have unit norm, got squared norm {norm_sq}"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, m: &ComplexMatrix) -> Result<C64> {
        if m.shape() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch {
                op: "StateVector::expectation",
                left: m.shape(),
                right: (self.dim(), 1),
            });
        }
        let mv = m.mul_vec(&self.amplitudes);
        Ok(self
            .amplitudes
            .iter()
            .zip(&mv)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Equal-weight superposition over the ball of radius `l` in `Z/2 * Z/2`,
/// with phase `phase(i)` on the word at logical index `i ∈ [−l, l]`.
pub fn folner_state(n: usize, phase: impl Fn(i64) -> f64) -> Result<StateVector> {
    if n.is_multiple_of(2) {
        return Err(Error::NotOddDimension(n));
    }
    let l = (n / 2) as i64;
    let amp = 1.0 / (n as f64).sqrt();
    StateVector::new((-l..=l).map(|i| C64::from_polar(amp, phase(i))).collect())
}

/// Phase `+π/2` on words starting with `g₁` (`i ≥ 1`), `−π/2` on words
/// starting with `g₂` (`i ≤ −1`), `0` on the identity.
pub fn folner_phase(i: i64) -> f64 {
    match i.signum() {
        1 => FRAC_PI_2,
        -1 => -FRAC_PI_2,
        _ => 0.0,
    }
}

fn truncated_sum_expectation(n: usize, phase: impl Fn(i64) -> f64) -> Result<f64> {
    let (a1, a2) = truncated_free_pair(n)?;
    let sum = a1.matrix().add(a2.matrix())?;
    Ok(folner_state(n, phase)?.expectation(&sum)?.re)
}

/// `⟨ψ|(A₁ + A₂)|ψ⟩` for the uniform Følner state on the truncated pair.
pub fn folner_uniform_expectation(n: usize) -> Result<f64> {
    truncated_sum_expectation(n, |_| 0.0)
}

/// `⟨φ̃|(A₁ + A₂)|φ̃⟩` for the phased Følner state on the truncated pair.
///
/// On `n = 2l + 1` sites this equals `−2 + 8/n`: each of the two
/// observables contributes `l − 1` swapped pairs with opposite phases (value
/// `−2/n` each), one pair touching the identity (value `0`) and one fixed
/// point (value `+1/n`).
pub fn folner_phased_expectation(n: usize) -> Result<f64> {
    truncated_sum_expectation(n, folner_phase)
}

/// `A₁⊗A₁ + A₁⊗A₂ + A₂⊗A₁ + ω·A₂⊗A₂` built from the fixed 3×3 pair.
pub fn complex_chsh_operator() -> ComplexMatrix {
    let (a1, a2) = complex_chsh_observables();
    let k = |a: &ComplexMatrix, b: &ComplexMatrix| kron_with_cap(a, b, 9).expect("9x9");
    k(&a1, &a1)
        .add(&k(&a1, &a2))
        .and_then(|m| m.add(&k(&a2, &a1)))
        .and_then(|m| m.add(&k(&a2, &a2).scale(omega())))
        .expect("equal shapes")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexChshReport {
    pub norm: f64,
    /// `2√3`.
    pub upper_bound: f64,
    /// `|norm − 2√3|`.
    pub discrepancy: f64,
    /// Set when the discrepancy exceeds `1e-6`.
    pub flagged: bool,
    /// `‖𝓑𝓑† − (3·I⊗I + (I − ωA)⊗(I − ωA))‖_max` with `A = A₁A₂† + ωA₂A₁†`.
    pub factorization_gap: f64,
    /// Multiplicative orders of the two 3×3 unitaries (0 if above 12).
    pub orders: (usize, usize),
}

fn matrix_order(m: &ComplexMatrix) -> usize {
    let id = ComplexMatrix::identity(m.rows()).expect("square");
    let mut p = m.clone();
    for k in 1..=12 {
        if p.max_abs_diff(&id).expect("same shape") <= 1e-12 {
            return k;
        }
        p = mat_mul(&p, m).expect("square");
    }
    0
}

pub fn complex_chsh_norm() -> Result<ComplexChshReport> {
    let (a1, a2) = complex_chsh_observables();
    let w = omega();
    let b = complex_chsh_operator();
    let norm = spectral_norm(&b)?;

    let a = mat_mul(&a1, &dagger(&a2))?.add(&mat_mul(&a2, &dagger(&a1))?.scale(w))?;
    let id3 = ComplexMatrix::identity(3)?;
    let factor = id3.sub(&a.scale(w))?;
    let rhs = ComplexMatrix::identity(9)?
        .scale(C64::new(3.0, 0.0))
        .add(&kron_with_cap(&factor, &factor, 9)?)?;
    let gap = mat_mul(&b, &dagger(&b))?.max_abs_diff(&rhs)?;

    let upper_bound = 2.0 * 3f64.sqrt();
    let discrepancy = (norm - upper_bound).abs();
    Ok(ComplexChshReport {
        norm,
        upper_bound,
        discrepancy,
        flagged: discrepancy > 1e-6,
        factorization_gap: gap,
        orders: (matrix_order(&a1), matrix_order(&a2)),
    })
}

/// Classical value: the maximum of `|α₁β₁ + α₁β₂ + α₂β₁ + ω·α₂β₂|` over all
/// 81 deterministic assignments with values in `{1, ω, ω²}`.
///
/// Returns the value and a maximizing assignment as exponents of `ω`
/// in the order `(α₁, α₂, β₁, β₂)`.
pub fn complex_chsh_classical_value() -> (f64, [u8; 4]) {
    let w = omega();
    let root = |e: u8| w.powu(e as u32);
    let mut best = (f64::NEG_INFINITY, [0u8; 4]);
    for code in 0u8..81 {
        let e = [code % 3, code / 3 % 3, code / 9 % 3, code / 27];
        let (x1, x2, y1, y2) = (root(e[0]), root(e[1]), root(e[2]), root(e[3]));
        let v = (x1 * y1 + x1 * y2 + x2 * y1 + w * x2 * y2).norm();
        if v > best.0 + 1e-15 {
            best = (v, e);
        }
    }
    best
}

/// One trial of the asymptotic-freeness test: `|tr_N(A_{i(1)} ⋯ A_{i(k)})|`
/// for fresh random observables drawn from stream `(master_seed, trial)`.
pub fn freeness_trial(n_dim: usize, word: &[usize], master_seed: u64, trial: u64) -> Result<f64> {
    validate_alternating(word)?;
    let count = word.iter().copied().max().unwrap_or(0);
    let mut rng = RngStream::new(master_seed, trial);
    let observables = (0..count)
        .map(|_| random_observable(n_dim, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut product = observables[word[0] - 1].matrix().clone();
    for &i in &word[1..] {
        product = mat_mul(&product, observables[i - 1].matrix())?;
    }
    Ok(normalized_trace(&product)?.norm())
}

fn validate_alternating(word: &[usize]) -> Result<()> {
    if word.is_empty() {
        return Err(Error::InvalidArgument(
            "freeness word must be nonempty".into(),
        ));
    }
    if word.contains(&0) {
        return Err(Error::IndexOutOfRange {
            index: 0,
            max: word.iter().copied().max().unwrap_or(0),
        });
    }
    if word.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NotAlternating(word.to_vec()));
    }
    Ok(())
}

/// Per-trial values of [`freeness_trial`] for trials `0..trials`.
pub fn freeness_mc_test(
    n_dim: usize,
    word: &[usize],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    validate_alternating(word)?;
    (0..trials as u64)
        .map(|t| freeness_trial(n_dim, word, master_seed, t))
        .collect()
}
