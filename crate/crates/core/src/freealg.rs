//! The group algebra of `G = Z/2 * … * Z/2` (n copies) with its trace state.
//!
//! Every group element has a unique reduced word `g_{i1} g_{i2} … g_{im}` with
//! no two adjacent letters equal, since each generator squares to the
//! identity. Algebra elements are finitely supported maps from reduced words
//! to coefficients, and the trace state `φ` reads off the coefficient of the
//! empty word.
//!
//! Coefficients are generic: integer-valued computations run over `BigInt`
//! and stay exact, general ones use `Complex64`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matkit::C64;

/// Default cap on the number of terms in a symbolic expansion.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;
/// Largest power accepted by [`chsh_free_moment_exact`].
pub const MAX_CHSH_FREE_POWER: usize = 64;

/// A reduced word over generators `1..=n`; the empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord(Vec<u16>);

impl ReducedWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn generator(i: usize) -> Self {
        Self(vec![i as u16])
    }

    /// Reduces an arbitrary letter string.
    pub fn reduce(letters: &[usize]) -> Self {
        let mut out: Vec<u16> = Vec::with_capacity(letters.len());
        for &l in letters {
            let l = l as u16;
            if out.last() == Some(&l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    pub fn letters(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    /// Group inverse: generators are involutions, so this is reversal.
    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for l in &self.0 {
            write!(f, "g{l}")?;
        }
        Ok(())
    }
}

/// Product of reduced words: concatenate and cancel at the junction.
pub fn word_mul(a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
    let mut out = a.0.clone();
    let mut rest = b.0.as_slice();
    while let (Some(&last), Some(&first)) = (out.last(), rest.first()) {
        if last != first {
            break;
        }
        out.pop();
        rest = &rest[1..];
    }
    out.extend_from_slice(rest);
    ReducedWord(out)
}

/// Coefficient ring for [`AlgebraElement`].
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn conj(&self) -> Self;
}

impl Coefficient for C64 {
    fn conj(&self) -> Self {
        C64::conj(self)
    }
}

impl Coefficient for BigInt {
    fn conj(&self) -> Self {
        self.clone()
    }
}

impl Coefficient for i64 {
    fn conj(&self) -> Self {
        *self
    }
}

/// A finitely supported element `Σ_g α_g λ(g)` of the group algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement<C = C64> {
    n_generators: usize,
    terms: BTreeMap<ReducedWord, C>,
}

impl<C: Coefficient> AlgebraElement<C> {
    pub fn zero(n_generators: usize) -> Self {
        Self {
            n_generators,
            terms: BTreeMap::new(),
        }
    }

    /// The unit `λ(e)`.
    pub fn unit(n_generators: usize) -> Self {
        Self::basis(n_generators, ReducedWord::identity(), C::one()).expect("identity is valid")
    }

    /// `coeff · λ(word)`.
    pub fn basis(n_generators: usize, word: ReducedWord, coeff: C) -> Result<Self> {
        Self::from_terms(n_generators, [(word, coeff)])
    }

    /// `λ(g_i)`.
    pub fn generator(n_generators: usize, i: usize) -> Result<Self> {
        Self::basis(n_generators, ReducedWord::generator(i), C::one())
    }

    /// Collects like terms and drops zero coefficients.
    pub fn from_terms(
        n_generators: usize,
        terms: impl IntoIterator<Item = (ReducedWord, C)>,
    ) -> Result<Self> {
        let mut out = Self::zero(n_generators);
        for (word, coeff) in terms {
            if !word.is_reduced() {
                return Err(Error::InvalidArgument(format!(
                    "word {word} is not reduced"
                )));
            }
            if let Some(&bad) = word
                .letters()
                .iter()
                .find(|&&l| l == 0 || l as usize > n_generators)
            {
                return Err(Error::IndexOutOfRange {
                    index: bad as usize,
                    max: n_generators,
                });
            }
            out.accumulate(word, coeff);
        }
        Ok(out)
    }

    fn accumulate(&mut self, word: ReducedWord, coeff: C) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(word) {
            Entry::Vacant(v) => {
                if !coeff.is_zero() {
                    v.insert(coeff);
                }
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn n_generators(&self) -> usize {
        self.n_generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ReducedWord, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, word: &ReducedWord) -> C {
        self.terms.get(word).cloned().unwrap_or_else(C::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_same(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.n_generators != other.n_generators {
            return Err(Error::DimensionMismatch {
                op,
                left: (self.n_generators, 0),
                right: (other.n_generators, 0),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other, "algebra add")?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.accumulate(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-C::one()))
    }

    pub fn scale(&self, factor: C) -> Self {
        let mut out = Self::zero(self.n_generators);
        for (w, c) in &self.terms {
            out.accumulate(w.clone(), c.clone() * factor.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        algebra_mul_capped(self, other, DEFAULT_TERM_CAP)
    }

    pub fn adjoint(&self) -> Self {
        algebra_adjoint(self)
    }

    pub fn phi(&self) -> C {
        phi(self)
    }
}

/// Bilinear extension of [`word_mul`].
pub fn algebra_mul<C: Coefficient>(
    x: &AlgebraElement<C>,
    y: &AlgebraElement<C>,
) -> Result<AlgebraElement<C>> {
    algebra_mul_capped(x, y, DEFAULT_TERM_CAP)
}

pub fn algebra_mul_capped<C: Coefficient>(
    x: &AlgebraElement<C>,
    y: &AlgebraElement<C>,
    cap: usize,
) -> Result<AlgebraElement<C>> {
    x.check_same(y, "algebra_mul")?;
    let mut out = AlgebraElement::zero(x.n_generators);
    for (wx, cx) in &x.terms {
        for (wy, cy) in &y.terms {
            out.accumulate(word_mul(wx, wy), cx.clone() * cy.clone());
            if out.terms.len() > cap {
                return Err(Error::TermCap { cap });
            }
        }
    }
    Ok(out)
}

/// `x*`: conjugate coefficients and invert words.
pub fn algebra_adjoint<C: Coefficient>(x: &AlgebraElement<C>) -> AlgebraElement<C> {
    AlgebraElement {
        n_generators: x.n_generators,
        terms: x
            .terms
            .iter()
            .map(|(w, c)| (w.inverse(), c.conj()))
            .collect(),
    }
}

/// The trace state: coefficient of the identity.
pub fn phi<C: Coefficient>(x: &AlgebraElement<C>) -> C {
    x.coefficient(&ReducedWord::identity())
}

/// Checks the freeness condition on a product of generators.
///
/// Returns true iff the index sequence is nonempty, alternating, and `φ` of the
/// corresponding generator product vanishes. For generators the last part is
/// automatic: an alternating word is already reduced and nonempty.
pub fn freeness_check(n_generators: usize, indices: &[usize]) -> Result<bool> {
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n_generators) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            max: n_generators,
        });
    }
    let alternating = !indices.is_empty() && indices.windows(2).all(|w| w[0] != w[1]);
    let mut product = AlgebraElement::<BigInt>::unit(n_generators);
    for &i in indices {
        product = product.mul(&AlgebraElement::generator(n_generators, i)?)?;
    }
    Ok(alternating && phi(&product).is_zero())
}

/// `counts[k]` = number of length-`2k` generator strings reducing to `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkCountTable {
    pub n: usize,
    pub counts: Vec<BigUint>,
}

/// Walk counts for `k = 0..=k_max`.
///
/// Dynamic programming over the distance from the identity: from a nonempty
/// reduced word exactly one letter shortens it and `n − 1` lengthen it; from
/// the identity all `n` letters lengthen it.
pub fn walk_counts(n: usize, k_max: usize) -> WalkCountTable {
    let steps = 2 * k_max;
    let mut dist = vec![BigUint::zero(); steps + 2];
    dist[0] = BigUint::one();
    let mut counts = vec![BigUint::one()];
    let up_from_identity = BigUint::from(n);
    let up = BigUint::from(n.saturating_sub(1));
    for t in 1..=steps {
        // after t steps the distance is at most t, and only distances that can
        // still return by step `steps` matter
        let reach = t.min(steps - t);
        let mut next = vec![BigUint::zero(); steps + 2];
        for (d, slot) in next.iter_mut().enumerate().take(reach + 1) {
            let mut v = dist[d + 1].clone();
            if d == 1 {
                v += &dist[0] * &up_from_identity;
            } else if d > 1 {
                v += &dist[d - 1] * &up;
            }
            *slot = v;
        }
        dist = next;
        if t % 2 == 0 {
            counts.push(dist[0].clone());
        }
    }
    WalkCountTable { n, counts }
}

/// `φ((λ(g_1) + … + λ(g_n))^{2k})`, exactly.
pub fn free_sum_moment(n: usize, k: usize) -> BigUint {
    walk_counts(n, k)
        .counts
        .pop()
        .expect("table has k_max + 1 entries")
}

/// `φ((x* x)^k)` by exact symbolic multiplication.
pub fn free_element_moment<C: Coefficient>(x: &AlgebraElement<C>, k: usize) -> Result<C> {
    free_element_moment_capped(x, k, DEFAULT_TERM_CAP)
}

pub fn free_element_moment_capped<C: Coefficient>(
    x: &AlgebraElement<C>,
    k: usize,
    cap: usize,
) -> Result<C> {
    if k == 0 {
        return Ok(C::one());
    }
    let gram = algebra_mul_capped(&algebra_adjoint(x), x, cap)?;
    let mut acc = gram.clone();
    for _ in 1..k {
        acc = algebra_mul_capped(&acc, &gram, cap)?;
    }
    Ok(phi(&acc))
}

/// Finitely supported element of the algebraic tensor product of two copies
/// of the group algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorElement<C = C64> {
    n_generators: (usize, usize),
    terms: BTreeMap<(ReducedWord, ReducedWord), C>,
}

impl<C: Coefficient> TensorElement<C> {
    /// `x ⊗ y`.
    pub fn tensor(x: &AlgebraElement<C>, y: &AlgebraElement<C>) -> Self {
        let mut out = Self {
            n_generators: (x.n_generators, y.n_generators),
            terms: BTreeMap::new(),
        };
        for (wx, cx) in &x.terms {
            for (wy, cy) in &y.terms {
                out.accumulate((wx.clone(), wy.clone()), cx.clone() * cy.clone());
            }
        }
        out
    }

    fn accumulate(&mut self, key: (ReducedWord, ReducedWord), coeff: C) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                if !coeff.is_zero() {
                    v.insert(coeff);
                }
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_generators != other.n_generators {
            return Err(Error::DimensionMismatch {
                op: "tensor add",
                left: self.n_generators,
                right: other.n_generators,
            });
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.accumulate(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, factor: C) -> Self {
        let mut out = Self {
            n_generators: self.n_generators,
            terms: BTreeMap::new(),
        };
        for (k, c) in &self.terms {
            out.accumulate(k.clone(), c.clone() * factor.clone());
        }
        out
    }

    /// `(x ⊗ y)(x' ⊗ y') = xx' ⊗ yy'`, extended bilinearly.
    pub fn mul_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        if self.n_generators != other.n_generators {
            return Err(Error::DimensionMismatch {
                op: "tensor mul",
                left: self.n_generators,
                right: other.n_generators,
            });
        }
        let mut out = Self {
            n_generators: self.n_generators,
            terms: BTreeMap::new(),
        };
        for ((l1, r1), c1) in &self.terms {
            for ((l2, r2), c2) in &other.terms {
                out.accumulate(
                    (word_mul(l1, l2), word_mul(r1, r2)),
                    c1.clone() * c2.clone(),
                );
                if out.terms.len() > cap {
                    return Err(Error::TermCap { cap });
                }
            }
        }
        Ok(out)
    }

    /// `φ⊗φ`, defined by `φ⊗φ(x ⊗ y) = φ(x)·φ(y)`.
    pub fn phi_tensor(&self) -> C {
        self.terms
            .get(&(ReducedWord::identity(), ReducedWord::identity()))
            .cloned()
            .unwrap_or_else(C::zero)
    }
}

/// `φ⊗φ((4·1 − A⊗B)^k)` with `A = [a₁, a₂]`, `B = [b₁, b₂]` free symmetries.
///
/// This is the limiting normalized trace of the k-th power of the squared
/// CHSH operator, computed by expanding the tensor power symbolically.
pub fn chsh_free_moment_exact(k: usize) -> Result<BigInt> {
    chsh_free_moment_exact_capped(k, DEFAULT_TERM_CAP)
}

pub fn chsh_free_moment_exact_capped(k: usize, cap: usize) -> Result<BigInt> {
    if k > MAX_CHSH_FREE_POWER {
        return Err(Error::ArgumentCap {
            what: "chsh_free_moment_exact power",
            value: k,
            cap: MAX_CHSH_FREE_POWER,
        });
    }
    let g1 = AlgebraElement::<BigInt>::generator(2, 1)?;
    let g2 = AlgebraElement::<BigInt>::generator(2, 2)?;
    let comm = g1.mul(&g2)?.sub(&g2.mul(&g1)?)?;
    let unit = AlgebraElement::<BigInt>::unit(2);
    let four = TensorElement::tensor(&unit, &unit).scale(BigInt::from(4));
    let step = four.add(&TensorElement::tensor(&comm, &comm).scale(BigInt::from(-1)))?;
    let mut acc = TensorElement::tensor(&unit, &unit);
    for _ in 0..k {
        acc = acc.mul_capped(&step, cap)?;
    }
    Ok(acc.phi_tensor())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(letters: &[usize]) -> ReducedWord {
        ReducedWord::reduce(letters)
    }

    fn brute_walk_count(n: usize, len: usize) -> u64 {
        let total = (n as u64).pow(len as u32);
        let mut count = 0;
        let mut letters = vec![0usize; len];
        for mut code in 0..total {
            for slot in letters.iter_mut() {
                *slot = (code % n as u64) as usize + 1;
                code /= n as u64;
            }
            if ReducedWord::reduce(&letters).is_identity() {
                count += 1;
            }
        }
        count
    }

    fn binom(n: u64, k: u64) -> BigUint {
        (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn word_products() {
        assert!(word_mul(&w(&[1]), &w(&[1])).is_identity());
        assert!(word_mul(&w(&[1, 2]), &w(&[2, 1])).is_identity());
        assert_eq!(word_mul(&w(&[1, 2]), &w(&[1])), w(&[1, 2, 1]));
        assert_eq!(word_mul(&w(&[1, 2, 3]), &w(&[3, 2, 4])), w(&[1, 4]));
        assert_eq!(w(&[1, 2, 1]).to_string(), "g1g2g1");
        assert_eq!(ReducedWord::identity().to_string(), "e");
    }

    #[test]
    fn algebra_products() {
        let one = AlgebraElement::<BigInt>::unit(2);
        let g1 = AlgebraElement::<BigInt>::generator(2, 1).unwrap();
        let g2 = AlgebraElement::<BigInt>::generator(2, 2).unwrap();
        let x = g1.add(&g2).unwrap();
        assert_eq!(x.mul(&one).unwrap(), x);
        assert_eq!(g1.mul(&g1).unwrap(), one);

        let sq = x.mul(&x).unwrap();
        let expected = AlgebraElement::from_terms(
            2,
            [
                (ReducedWord::identity(), BigInt::from(2)),
                (w(&[1, 2]), BigInt::one()),
                (w(&[2, 1]), BigInt::one()),
            ],
        )
        .unwrap();
        assert_eq!(sq, expected);
        assert_eq!(phi(&sq), BigInt::from(2));
        assert_eq!(phi(&g1), BigInt::zero());
        assert_eq!(phi(&one), BigInt::one());
    }

    #[test]
    fn adjoint_cases() {
        let g1 = AlgebraElement::<C64>::generator(2, 1).unwrap();
        assert_eq!(g1.adjoint(), g1);
        let ie =
            AlgebraElement::<C64>::basis(2, ReducedWord::identity(), C64::new(0.0, 1.0)).unwrap();
        let minus_ie =
            AlgebraElement::<C64>::basis(2, ReducedWord::identity(), C64::new(0.0, -1.0)).unwrap();
        assert_eq!(ie.adjoint(), minus_ie);
        let g12 = AlgebraElement::<C64>::basis(2, w(&[1, 2]), C64::one()).unwrap();
        let g21 = AlgebraElement::<C64>::basis(2, w(&[2, 1]), C64::one()).unwrap();
        assert_eq!(g12.adjoint(), g21);
    }

    #[test]
    fn element_validation() {
        assert!(matches!(
            AlgebraElement::<i64>::generator(2, 3),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        ));
        let unreduced = ReducedWord(vec![1, 1]);
        assert!(AlgebraElement::<i64>::from_terms(2, [(unreduced, 1)]).is_err());
        let a = AlgebraElement::<i64>::unit(2);
        let b = AlgebraElement::<i64>::unit(3);
        assert!(algebra_mul(&a, &b).is_err());
        // cancelling coefficients leave no stored zero
        let g1 = AlgebraElement::<i64>::generator(2, 1).unwrap();
        assert!(g1.sub(&g1).unwrap().is_zero());
    }

    #[test]
    fn freeness_cases() {
        assert!(freeness_check(2, &[1, 2, 1, 2]).unwrap());
        assert!(!freeness_check(2, &[1, 1]).unwrap());
        assert!(freeness_check(3, &[1, 2, 3, 1]).unwrap());
        assert!(!freeness_check(2, &[]).unwrap());
        assert!(matches!(
            freeness_check(2, &[1, 3]),
            Err(Error::IndexOutOfRange { .. })
        ));
        // the non-alternating product (1,1) has φ = 1
        let g1 = AlgebraElement::<BigInt>::generator(2, 1).unwrap();
        assert_eq!(phi(&g1.mul(&g1).unwrap()), BigInt::one());
    }

    #[test]
    fn free_sum_moment_cases() {
        assert_eq!(free_sum_moment(2, 2), BigUint::from(6u32));
        assert_eq!(free_sum_moment(2, 3), BigUint::from(20u32));
        for n in 1..5 {
            assert_eq!(free_sum_moment(n, 0), BigUint::one());
        }
        for k in 0..10 {
            assert_eq!(free_sum_moment(1, k), BigUint::one());
        }
    }

    #[test]
    fn walk_counts_match_brute_force() {
        for n in 1..=3 {
            let table = walk_counts(n, 6);
            assert_eq!(table.counts.len(), 7);
            for k in 0..=6 {
                assert_eq!(
                    table.counts[k],
                    BigUint::from(brute_walk_count(n, 2 * k)),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn walk_counts_two_generators_are_central_binomials() {
        let table = walk_counts(2, 20);
        for k in 0..=20 {
            assert_eq!(table.counts[k], binom(2 * k as u64, k as u64));
        }
        let t5 = walk_counts(5, 12);
        assert!(t5.counts.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn element_moments() {
        let g1 = AlgebraElement::<BigInt>::generator(2, 1).unwrap();
        let g2 = AlgebraElement::<BigInt>::generator(2, 2).unwrap();
        for k in 0..6 {
            assert_eq!(free_element_moment(&g1, k).unwrap(), BigInt::one());
        }
        let comm = g1.mul(&g2).unwrap().sub(&g2.mul(&g1).unwrap()).unwrap();
        assert_eq!(phi(&comm.mul(&comm).unwrap()), BigInt::from(-2));
        // x* = −x, so φ(x*x) = −φ(x²) = 2
        assert_eq!(free_element_moment(&comm, 1).unwrap(), BigInt::from(2));
        let sum = g1.add(&g2).unwrap();
        assert_eq!(free_element_moment(&sum, 2).unwrap(), BigInt::from(6));
    }

    #[test]
    fn element_moment_cap() {
        let gens: Vec<_> = (1..=4)
            .map(|i| AlgebraElement::<i64>::generator(4, i).unwrap())
            .collect();
        let x = gens
            .iter()
            .skip(1)
            .fold(gens[0].clone(), |acc, g| acc.add(g).unwrap());
        match free_element_moment_capped(&x, 4, 50) {
            Err(Error::TermCap { cap: 50 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn chsh_free_moments() {
        assert_eq!(chsh_free_moment_exact(0).unwrap(), BigInt::one());
        assert_eq!(chsh_free_moment_exact(1).unwrap(), BigInt::from(4));
        assert_eq!(chsh_free_moment_exact(2).unwrap(), BigInt::from(20));
        // by hand: 64 + 3·4·4 = 112
        assert_eq!(chsh_free_moment_exact(3).unwrap(), BigInt::from(112));
        assert!(matches!(
            chsh_free_moment_exact(65),
            Err(Error::ArgumentCap { .. })
        ));
        assert!(matches!(
            chsh_free_moment_exact_capped(6, 10),
            Err(Error::TermCap { .. })
        ));
    }

    fn arb_word(n: usize, max_len: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec(1..=n, 0..=max_len).prop_map(|v| ReducedWord::reduce(&v))
    }

    fn arb_element(n: usize) -> impl Strategy<Value = AlgebraElement<C64>> {
        prop::collection::vec((arb_word(n, 4), -1.0f64..1.0, -1.0f64..1.0), 1..=6).prop_map(
            move |terms| {
                AlgebraElement::from_terms(
                    n,
                    terms.into_iter().map(|(w, re, im)| (w, C64::new(re, im))),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn word_mul_is_associative(
            (a, b, c) in (2usize..=4).prop_flat_map(|n| (arb_word(n, 12), arb_word(n, 12), arb_word(n, 12)))
        ) {
            let left = word_mul(&word_mul(&a, &b), &c);
            let right = word_mul(&a, &word_mul(&b, &c));
            prop_assert!(left.is_reduced());
            prop_assert_eq!(left, right);
        }

        #[test]
        fn reduction_is_idempotent(word in arb_word(3, 16)) {
            let again = ReducedWord::reduce(&word.letters().iter().map(|&l| l as usize).collect::<Vec<_>>());
            prop_assert_eq!(again, word);
        }

        #[test]
        fn phi_is_positive(x in (1usize..=3).prop_flat_map(arb_element)) {
            let v = phi(&algebra_mul(&x.adjoint(), &x).unwrap());
            prop_assert!(v.re >= -1e-12);
            prop_assert!(v.im.abs() <= 1e-12);
        }

        #[test]
        fn alternating_products_are_centered(indices in prop::collection::vec(1usize..=4, 1..10)) {
            let alternating = indices.windows(2).all(|w| w[0] != w[1]);
            prop_assert_eq!(freeness_check(4, &indices).unwrap(), alternating);
        }
    }
}
