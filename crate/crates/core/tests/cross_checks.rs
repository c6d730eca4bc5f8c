use std::f64::consts::SQRT_2;

use freebell::bell::{
    chsh_norm_dense, chsh_norm_via_commutators, chsh_square_identity_gap, truncated_chsh_norm,
    ChshSettings,
};
use freebell::freealg::{chsh_free_moment_exact, free_sum_moment};
use freebell::matkit::{commutator, mat_mul, normalized_trace};
use freebell::moments::{chsh_q, sum_moment_n2, MomentSequence};
use freebell::observables::random_observable;
use freebell::{ComplexMatrix, RngStream, C64};
use num_bigint::BigInt;

const TSIRELSON: f64 = 2.0 * SQRT_2;

/// `X ↦ 4X − Ca·X·Cbᵀ` on row-major `n×n` blocks, i.e. `B²` applied to a
/// vectorized state without forming the `n²×n²` operator.
fn apply_chsh_square(ca: &[C64], cb: &[C64], n: usize, x: &[C64]) -> Vec<C64> {
    let mut ax = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let a = ca[i * n + k];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                ax[i * n + j] += a * x[k * n + j];
            }
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            // (AX·Bᵀ)_{ij} = Σ_k (AX)_{ik} B_{jk}
            let mut s = C64::new(0.0, 0.0);
            for k in 0..n {
                s += ax[i * n + k] * cb[j * n + k];
            }
            out[i * n + j] = 4.0 * x[i * n + j] - s;
        }
    }
    out
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    dot(a, a).re.sqrt()
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
fn tridiagonal_max_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let bound = alpha
        .iter()
        .enumerate()
        .map(|(i, a)| {
            a.abs()
                + beta.get(i).map_or(0.0, |b| b.abs())
                + if i > 0 { beta[i - 1].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max);
    // number of eigenvalues strictly below x
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..alpha.len() {
            let b2 = if i > 0 {
                beta[i - 1] * beta[i - 1]
            } else {
                0.0
            };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) < alpha.len() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lanczos with full reorthogonalization on the implicit `B²`.
fn matrix_free_chsh_norm(s: &ChshSettings) -> f64 {
    let n = s.dim();
    let ca = commutator(s.a1.matrix(), s.a2.matrix()).unwrap();
    let cb = commutator(s.b1.matrix(), s.b2.matrix()).unwrap();
    let mut rng = RngStream::new(0xC0FFEE, 0);
    let mut v: Vec<C64> = (0..n * n).map(|_| rng.complex_gaussian()).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);

    let mut basis: Vec<Vec<C64>> = vec![v];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut last = f64::NAN;
    for step in 0..400 {
        let mut w = apply_chsh_square(ca.as_slice(), cb.as_slice(), n, &basis[step]);
        alpha.push(dot(&basis[step], &w).re);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let top = tridiagonal_max_eigenvalue(&alpha, &beta);
        if step > 10 && (top - last).abs() <= 1e-14 * top {
            return top.sqrt();
        }
        last = top;
        let b = norm(&w);
        if b <= 1e-12 {
            return top.sqrt();
        }
        beta.push(b);
        w.iter_mut().for_each(|z| *z /= b);
        basis.push(w);
    }
    panic!("Lanczos did not settle, last estimate {last}");
}

#[test]
fn commutator_route_matches_matrix_free_oracle_at_128() {
    let mut rng = RngStream::new(42, 128);
    let s = ChshSettings::random(128, &mut rng).unwrap();
    let value = chsh_norm_via_commutators(&s).unwrap();
    let oracle = matrix_free_chsh_norm(&s);
    assert!(value > 2.0 && value <= TSIRELSON + 1e-8, "{value}");
    assert!((value - oracle).abs() <= 1e-6, "{value} vs {oracle}");
}

#[test]
fn matrix_free_oracle_matches_dense_route_on_small_dims() {
    let mut rng = RngStream::new(8, 0);
    for dim in [2, 4, 6] {
        let s = ChshSettings::random(dim, &mut rng).unwrap();
        let dense = chsh_norm_dense(&s).unwrap();
        assert!((matrix_free_chsh_norm(&s) - dense).abs() <= 1e-8);
    }
}

#[test]
fn routes_agree_and_respect_tsirelson() {
    let mut rng = RngStream::new(2024, 0);
    for dim in [2, 4, 6, 8] {
        for _ in 0..4 {
            let s = ChshSettings::random(dim, &mut rng).unwrap();
            let dense = chsh_norm_dense(&s).unwrap();
            let comm = chsh_norm_via_commutators(&s).unwrap();
            assert!((dense - comm).abs() <= 1e-8);
            assert!(dense <= TSIRELSON + 1e-8);
            assert!(chsh_square_identity_gap(&s).unwrap() <= 1e-9);
        }
    }
}

#[test]
fn truncated_closed_form_matches_eigensolve() {
    for n in [7, 21, 51, 101] {
        let s = ChshSettings::truncated(n).unwrap();
        let eig = chsh_norm_via_commutators(&s).unwrap();
        assert!(
            (eig - truncated_chsh_norm(n).unwrap()).abs() <= 1e-9,
            "n={n}"
        );
    }
}

#[test]
fn exact_moments_agree_across_modules() {
    for k in 0..=8u64 {
        assert_eq!(
            chsh_free_moment_exact(k as usize).unwrap(),
            BigInt::from(chsh_q(k))
        );
    }
    for k in 0..=20 {
        assert_eq!(sum_moment_n2(k as u64), free_sum_moment(2, k));
    }
    let walk = MomentSequence::walk(3, 40).unwrap();
    for k in 0..=20 {
        assert_eq!(walk.values[2 * k], free_sum_moment(3, k));
    }
}

/// Mixed moments of two independent random observables approach the free
/// values: φ(a₁a₂) = 0, φ(a₁a₂a₁a₂) = 0, and tr(A₁A₁) = 1 exactly.
#[test]
fn random_pair_mixed_moments() {
    let mut rng = RngStream::new(77, 0);
    let a1 = random_observable(200, &mut rng).unwrap();
    let a2 = random_observable(200, &mut rng).unwrap();
    let p = mat_mul(a1.matrix(), a2.matrix()).unwrap();
    let pp = mat_mul(&p, &p).unwrap();
    let sq = mat_mul(a1.matrix(), a1.matrix()).unwrap();
    assert!(normalized_trace(&p).unwrap().norm() < 0.1);
    assert!(normalized_trace(&pp).unwrap().norm() < 0.1);
    assert!((normalized_trace(&sq).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-10);
    let id = ComplexMatrix::identity(200).unwrap();
    assert!(sq.max_abs_diff(&id).unwrap() < 1e-9);
}
