//! Exact moment sequences and their root limits.
//!
//! Everything here is integer arithmetic on `BigUint` until [`root_limit`],
//! which is the only place a float appears.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::freealg::walk_counts;

/// Largest `k` accepted by the moments experiment for `(Q_{2k})^{1/2k}` rows.
pub const CHSH_ROOT_CAP: usize = 256;
/// Largest `k` for the walk-count recursion.
pub const WALK_CAP: usize = 1024;

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // exact at every step: acc = C(n, i) before the update
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn catalan(k: u64) -> BigUint {
    binomial(2 * k, k) / (k + 1)
}

/// `Q_k = Σ_{j even} C(k,j) 4^{k−j} C(j,j/2)²`.
pub fn chsh_q(k: u64) -> BigUint {
    let four = BigUint::from(4u32);
    (0..=k)
        .step_by(2)
        .map(|j| {
            let c = binomial(j, j / 2);
            binomial(k, j) * four.pow((k - j) as u32) * &c * &c
        })
        .sum()
}

/// `Σ_{j even} C(k,j) 2^{k−j} C(j,j/2)`, the `2k`-th moment of a sum of two
/// free symmetries.
pub fn sum_moment_n2(k: u64) -> BigUint {
    let two = BigUint::from(2u32);
    (0..=k)
        .step_by(2)
        .map(|j| binomial(k, j) * two.pow((k - j) as u32) * binomial(j, j / 2))
        .sum()
}

/// Inner sum of the complex CHSH moment: `Σ_{l even} C(j,l) C(l,l/2)`.
fn complex_inner(j: u64) -> BigUint {
    (0..=j)
        .step_by(2)
        .map(|l| binomial(j, l) * binomial(l, l / 2))
        .sum()
}

/// `Σ_j C(k,j) 3^{k−j} (Σ_{l even} C(j,l) C(l,l/2))²`.
pub fn complex_chsh_q(k: u64) -> BigUint {
    let three = BigUint::from(3u32);
    (0..=k)
        .map(|j| {
            let inner = complex_inner(j);
            binomial(k, j) * three.pow((k - j) as u32) * &inner * &inner
        })
        .sum()
}

/// A labelled sequence of exact non-negative integers indexed from 0.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    pub label: String,
    pub values: Vec<BigUint>,
}

impl MomentSequence {
    pub fn new(label: impl Into<String>, values: Vec<BigUint>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }

    /// `Q_0..=Q_len−1`.
    pub fn chsh(len: usize) -> Self {
        Self::new("chsh_q", (0..len as u64).map(chsh_q).collect())
    }

    pub fn complex_chsh(len: usize) -> Self {
        Self::new(
            "complex_chsh_q",
            (0..len as u64).map(complex_chsh_q).collect(),
        )
    }

    /// Raw moments `φ(S^m)` for `m = 0..=2·k_max`, `S` the sum of `n` free
    /// symmetries; odd moments vanish.
    pub fn walk(n: usize, k_max: usize) -> Result<Self> {
        if k_max > WALK_CAP {
            return Err(Error::ArgumentCap {
                what: "walk moment k",
                value: k_max,
                cap: WALK_CAP,
            });
        }
        let table = walk_counts(n, k_max);
        let mut values = Vec::with_capacity(2 * k_max + 1);
        for (k, c) in table.counts.into_iter().enumerate() {
            values.push(c);
            if k < k_max {
                values.push(BigUint::zero());
            }
        }
        Ok(Self::new(format!("walk_n{n}"), values))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV with columns `k,value,root`; `root` is `(values[2k])^{1/2k}` where
    /// that index exists and empty otherwise.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,value,root\n");
        for (k, v) in self.values.iter().enumerate() {
            let root = if k >= 1 && 2 * k < self.values.len() {
                format!("{}", root_limit(self, k).expect("index checked"))
            } else {
                String::new()
            };
            writeln!(out, "{k},{v},{root}").expect("writing to a String");
        }
        out
    }
}

/// Natural logarithm of a positive big integer, accurate to double precision.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit head");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `(values[2k])^{1/2k}`, the finite-k lower estimate of the limiting root.
pub fn root_limit(seq: &MomentSequence, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("root_limit needs k >= 1".into()));
    }
    let v = seq.values.get(2 * k).ok_or(Error::IndexOutOfRange {
        index: 2 * k,
        max: seq.values.len().saturating_sub(1),
    })?;
    if v.is_zero() {
        return Ok(0.0);
    }
    Ok((big_ln(v) / (2 * k) as f64).exp())
}

/// True iff `φ((Σ A_i)^{2k}) ≤ C_k · n^k` for every `k ≤ k_max`.
pub fn catalan_bound_check(n: usize, k_max: usize) -> bool {
    let table = walk_counts(n, k_max);
    let nn = BigUint::from(n);
    table
        .counts
        .iter()
        .enumerate()
        .all(|(k, count)| *count <= catalan(k as u64) * nn.pow(k as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::free_sum_moment;
    use proptest::prelude::*;

    fn pascal_row(n: usize) -> Vec<BigUint> {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one(); row.len() + 1];
            for i in 1..row.len() {
                next[i] = &row[i - 1] + &row[i];
            }
            row = next;
        }
        row
    }

    /// Catalan numbers from `C_{k+1} = Σ C_i C_{k−i}`.
    fn catalan_recurrence(k_max: usize) -> Vec<BigUint> {
        let mut c = vec![BigUint::one()];
        for k in 0..k_max {
            let next = (0..=k).map(|i| &c[i] * &c[k - i]).sum();
            c.push(next);
        }
        c
    }

    /// Counts non-crossing perfect matchings of 2k points by recursion on the
    /// partner of the first point.
    fn noncrossing_pairings(points: usize) -> u64 {
        if points == 0 {
            return 1;
        }
        (1..points)
            .step_by(2)
            .map(|partner| {
                noncrossing_pairings(partner - 1) * noncrossing_pairings(points - partner - 1)
            })
            .sum()
    }

    #[test]
    fn binomial_cases() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(52, 5), BigUint::from(2_598_960u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        let row = pascal_row(90);
        for (k, v) in row.iter().enumerate() {
            assert_eq!(&binomial(90, k as u64), v);
        }
    }

    #[test]
    fn catalan_cases() {
        assert_eq!(catalan(0), BigUint::one());
        assert_eq!(catalan(3), BigUint::from(noncrossing_pairings(6)));
        assert_eq!(catalan(3), BigUint::from(5u32));
        assert_eq!(catalan(10), BigUint::from(16796u32));
        let rec = catalan_recurrence(40);
        for (k, v) in rec.iter().enumerate() {
            assert_eq!(&catalan(k as u64), v);
        }
    }

    #[test]
    fn chsh_q_values() {
        assert_eq!(chsh_q(0), BigUint::one());
        assert_eq!(chsh_q(1), BigUint::from(4u32));
        assert_eq!(chsh_q(2), BigUint::from(20u32));
        let eight = BigUint::from(8u32);
        for k in 0..=64u64 {
            assert!(chsh_q(k) <= eight.pow(k as u32));
        }
    }

    #[test]
    fn chsh_q_matches_symbolic_expansion() {
        for k in 0..=8 {
            let symbolic = crate::freealg::chsh_free_moment_exact(k).unwrap();
            assert_eq!(symbolic.to_biguint().unwrap(), chsh_q(k as u64), "k={k}");
        }
    }

    #[test]
    fn sum_moment_two_generators() {
        assert_eq!(sum_moment_n2(1), BigUint::from(2u32));
        assert_eq!(sum_moment_n2(2), BigUint::from(6u32));
        for k in 0..=20u64 {
            let v = sum_moment_n2(k);
            assert_eq!(v, binomial(2 * k, k));
            assert_eq!(v, free_sum_moment(2, k as usize));
        }
    }

    #[test]
    fn complex_q_values() {
        assert_eq!(complex_chsh_q(0), BigUint::one());
        assert_eq!(complex_chsh_q(1), BigUint::from(4u32));
        // j=0: 9, j=1: 2·3·1, j=2: (1 + 2)² = 9
        assert_eq!(complex_chsh_q(2), BigUint::from(24u32));
        let twelve = BigUint::from(12u32);
        for k in 0..=64u64 {
            assert!(complex_chsh_q(k) <= twelve.pow(k as u32));
        }
    }

    #[test]
    fn root_limit_cases() {
        let ones = MomentSequence::new("ones", vec![BigUint::one(); 9]);
        assert_eq!(root_limit(&ones, 4).unwrap(), 1.0);
        let q = MomentSequence::chsh(257);
        let r4 = root_limit(&q, 4).unwrap();
        let exact = (chsh_q(8).to_f64().unwrap()).powf(1.0 / 8.0);
        assert!((r4 - exact).abs() <= 1e-13 * exact);
        assert!(r4 > 4.0 && r4 < 8.0);
        let r128 = root_limit(&q, 128).unwrap();
        assert!((7.5..=8.0).contains(&r128), "{r128}");
        for k in 1..=128 {
            assert!(root_limit(&q, k).unwrap() <= 8.0);
        }
        assert!(matches!(
            root_limit(&q, 129),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(root_limit(&q, 0).is_err());
    }

    #[test]
    fn big_ln_precision() {
        let x = BigUint::from(10u32).pow(300);
        let expected = 300.0 * std::f64::consts::LN_10;
        assert!((big_ln(&x) - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn walk_roots_bracket_the_norm() {
        for n in 1..=6usize {
            let seq = MomentSequence::walk(n, 200).unwrap();
            let ceiling = 2.0 * (n as f64).sqrt();
            for k in (1..=200).step_by(7) {
                assert!(root_limit(&seq, k).unwrap() <= ceiling + 1e-12);
            }
        }
        for n in [2usize, 3] {
            let seq = MomentSequence::walk(n, 200).unwrap();
            let r = root_limit(&seq, 200).unwrap();
            assert!(r >= 2.0 * ((n - 1) as f64).sqrt() - 0.1, "n={n}: {r}");
        }
        assert!(MomentSequence::walk(2, WALK_CAP + 1).is_err());
    }

    #[test]
    fn catalan_bound_cases() {
        assert!(catalan_bound_check(2, 20));
        assert!(catalan_bound_check(5, 15));
        assert!(catalan_bound_check(1, 10));
    }

    #[test]
    fn csv_export() {
        let csv = MomentSequence::chsh(5).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,value,root");
        assert_eq!(lines[1], "0,1,");
        assert!(lines[2].starts_with("1,4,"));
        assert!(lines[3].starts_with("2,20,"));
        assert_eq!(lines[4], "3,112,");
        let root: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
        assert!((root - 20f64.sqrt()).abs() <= 1e-12);
    }

    proptest! {
        #[test]
        fn binomial_symmetry_and_pascal(n in 1u64..200, k in 0u64..200) {
            prop_assert_eq!(binomial(n, k), binomial(n, n.saturating_sub(k)) * u32::from(k <= n));
            prop_assert_eq!(binomial(n, k), binomial(n - 1, k) + if k == 0 { BigUint::zero() } else { binomial(n - 1, k - 1) });
        }
    }
}
