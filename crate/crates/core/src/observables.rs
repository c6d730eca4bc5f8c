//! Dichotomic observables and the families built from them.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matkit::{dagger, kron, mat_mul, pauli, ComplexMatrix, C64};

/// Hermiticity tolerance for [`Observable`].
pub const OBSERVABLE_HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on `‖A² − I‖_max` for [`Observable`].
pub const OBSERVABLE_INVOLUTION_TOL: f64 = 1e-9;
/// Largest family size accepted by [`anticommuting_family`].
pub const MAX_ANTICOMMUTING: usize = 20;

/// A seeded random stream keyed by `(master_seed, stream_index)`.
///
/// Backed by ChaCha8 with the stream index selecting an independent keystream,
/// so distinct indices never overlap and the same key always replays the same
/// draws.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Two independent standard normals by Box–Muller.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        // 1 − U lies in (0, 1], keeping the logarithm finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Standard complex Gaussian, `E|z|² = 1`.
    pub fn complex_gaussian(&mut self) -> C64 {
        let (x, y) = self.normal_pair();
        C64::new(x * FRAC_1_SQRT_2, y * FRAC_1_SQRT_2)
    }

    /// Mixes a master seed with a list of coordinates (splitmix64 finalizer).
    ///
    /// Used to give every `(dimension, trial)` pair its own replayable seed.
    pub fn derive_seed(master_seed: u64, coords: &[u64]) -> u64 {
        let mut h = master_seed;
        for &c in coords {
            h = splitmix(h ^ splitmix(c.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        h
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A self-adjoint unitary (outcomes ±1).
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    /// Validates `A = A†` and `A² = I` within the observable tolerances.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermitian_defect().ok_or(Error::NotSquare {
            op: "Observable::new",
            rows: matrix.rows(),
            cols: matrix.cols(),
        })?;
        if defect > OBSERVABLE_HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                asymmetry: defect,
                tolerance: OBSERVABLE_HERMITIAN_TOL,
            });
        }
        let sq = mat_mul(&matrix, &matrix)?;
        let deviation = sq.max_abs_diff(&ComplexMatrix::identity(matrix.rows())?)?;
        if deviation > OBSERVABLE_INVOLUTION_TOL {
            return Err(Error::NotInvolution { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyLabel {
    Random,
    TruncatedFree,
    Pauli,
    Anticommuting,
    ComplexChsh,
}

impl FamilyLabel {
    pub const ALL: [FamilyLabel; 5] = [
        FamilyLabel::Random,
        FamilyLabel::TruncatedFree,
        FamilyLabel::Pauli,
        FamilyLabel::Anticommuting,
        FamilyLabel::ComplexChsh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyLabel::Random => "random",
            FamilyLabel::TruncatedFree => "truncated-free",
            FamilyLabel::Pauli => "pauli",
            FamilyLabel::Anticommuting => "anticommuting",
            FamilyLabel::ComplexChsh => "complex-chsh",
        }
    }
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown observable family '{s}'")))
    }
}

/// A nonempty list of observables sharing one dimension.
#[derive(Clone, Debug)]
pub struct ObservableFamily {
    label: FamilyLabel,
    members: Vec<Observable>,
}

impl ObservableFamily {
    pub fn new(label: FamilyLabel, members: Vec<Observable>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("observable family must be nonempty".into()))?;
        let dim = first.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                op: "ObservableFamily::new",
                left: (dim, dim),
                right: (bad.dim(), bad.dim()),
            });
        }
        Ok(Self { label, members })
    }

    pub fn label(&self) -> FamilyLabel {
        self.label
    }

    pub fn members(&self) -> &[Observable] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }
}

/// `diag(+1, …, +1, −1, …, −1)` with equal halves.
pub fn balanced_sign_diagonal(n: usize) -> Result<ComplexMatrix> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let diag: Vec<C64> = (0..n)
        .map(|i| C64::new(if i < n / 2 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if n == 0 || n > crate::matkit::MAX_DIM {
        return Err(Error::SizeCap {
            op: "haar_unitary",
            rows: n,
            cols: n,
            cap: crate::matkit::MAX_DIM,
        });
    }
    let entries: Vec<C64> = (0..n * n).map(|_| rng.complex_gaussian()).collect();
    let ginibre = DMatrix::from_row_slice(n, n, &entries);
    let qr = ginibre.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        let phase = if norm > 0.0 {
            rjj / norm
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(&q)
}

/// `U D U†` for a fresh Haar unitary `U` and the balanced sign diagonal `D`.
pub fn random_observable(n: usize, rng: &mut RngStream) -> Result<Observable> {
    // validate parity before consuming randomness
    balanced_sign_diagonal(n)?;
    let u = haar_unitary(n, rng)?;
    let mut ud = u.clone();
    for r in 0..n {
        for c in n / 2..n {
            ud.set(r, c, -ud.get(r, c));
        }
    }
    let a = mat_mul(&ud, &dagger(&u))?;
    let sym = a.add(&dagger(&a))?.scale(C64::new(0.5, 0.0));
    Observable::new(sym)
}

/// `count` independent random observables drawn in sequence from one stream.
pub fn random_family(dim: usize, count: usize, rng: &mut RngStream) -> Result<ObservableFamily> {
    let members = (0..count)
        .map(|_| random_observable(dim, rng))
        .collect::<Result<Vec<_>>>()?;
    ObservableFamily::new(FamilyLabel::Random, members)
}

/// The two truncated free observables on `n = 2l + 1` basis vectors.
///
/// Logical index `i ∈ [−l, l]` lives at array position `i + l`. The first
/// observable swaps `|i⟩ ↔ |1−i⟩` and fixes `|−l⟩`; the second swaps
/// `|i⟩ ↔ |−1−i⟩` and fixes `|l⟩`.
pub fn truncated_free_pair(n: usize) -> Result<(Observable, Observable)> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::NotOddDimension(n));
    }
    let l = (n / 2) as i64;
    let pos = |i: i64| (i + l) as usize;
    let permutation = |target: &dyn Fn(i64) -> i64| -> Result<ComplexMatrix> {
        let mut m = ComplexMatrix::zeros(n, n)?;
        for i in -l..=l {
            let j = target(i);
            m.set(pos(j), pos(i), C64::new(1.0, 0.0));
        }
        Ok(m)
    };
    let a1 = permutation(&|i| if i == -l { i } else { 1 - i })?;
    let a2 = permutation(&|i| if i == l { i } else { -1 - i })?;
    Ok((Observable::new(a1)?, Observable::new(a2)?))
}

pub fn truncated_free_family(n: usize) -> Result<ObservableFamily> {
    let (a1, a2) = truncated_free_pair(n)?;
    ObservableFamily::new(FamilyLabel::TruncatedFree, vec![a1, a2])
}

/// `(σx, σz, (σx+σz)/√2, (σx−σz)/√2)`.
pub fn pauli_chsh_settings() -> [Observable; 4] {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let x = pauli::x();
    let z = pauli::z();
    let b1 = x.add(&z).expect("2x2").scale(s);
    let b2 = x.sub(&z).expect("2x2").scale(s);
    [x, z, b1, b2].map(|m| Observable::new(m).expect("Pauli settings are dichotomic"))
}

/// `n` pairwise anticommuting observables as Jordan–Wigner strings on
/// `⌈n/2⌉` qubits: `Z⊗…⊗Z⊗X⊗I⊗…` and `Z⊗…⊗Z⊗Y⊗I⊗…`.
pub fn anticommuting_family(n: usize) -> Result<ObservableFamily> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "anticommuting family needs at least one member".into(),
        ));
    }
    if n > MAX_ANTICOMMUTING {
        return Err(Error::ArgumentCap {
            what: "anticommuting family size",
            value: n,
            cap: MAX_ANTICOMMUTING,
        });
    }
    let qubits = n.div_ceil(2);
    let id = ComplexMatrix::identity(2)?;
    let mut members = Vec::with_capacity(n);
    for idx in 0..n {
        let site = idx / 2;
        let center = if idx % 2 == 0 { pauli::x() } else { pauli::y() };
        let mut m = ComplexMatrix::identity(1)?;
        for q in 0..qubits {
            let factor = match q.cmp(&site) {
                std::cmp::Ordering::Less => pauli::z(),
                std::cmp::Ordering::Equal => center.clone(),
                std::cmp::Ordering::Greater => id.clone(),
            };
            m = kron(&m, &factor)?;
        }
        members.push(Observable::new(m)?);
    }
    ObservableFamily::new(FamilyLabel::Anticommuting, members)
}

/// `ω = e^{2πi/3}`.
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// The two fixed 3×3 unitaries of the complex CHSH example, entries taken
/// verbatim from the published construction.
///
/// These are three-outcome observables and are deliberately not wrapped in
/// [`Observable`]. The second matrix squares to `diag(−1, 1, −1)`, so it has
/// order four rather than three.
pub fn complex_chsh_observables() -> (ComplexMatrix, ComplexMatrix) {
    let w = omega();
    let w2 = w * w;
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let a1 = ComplexMatrix::from_row_major(3, 3, vec![o, o, one, w2, o, o, o, w, o]).expect("3x3");
    let a2 = ComplexMatrix::from_row_major(3, 3, vec![o, o, -w, o, one, o, w2, o, o]).expect("3x3");
    (a1, a2)
}
