//! Elementary symmetric functions of principal curvatures and the Gårding
//! cones `Γ_k`.

use crate::{Error, Result};

/// Binomial coefficient `C(n, k)` as a float; exact for the small `n` used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All of `σ_0, …, σ_k` via the incremental product recurrence
/// `σ_j ← σ_j + λ·σ_{j−1}`.
pub fn sigma_all(lambda: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (m, &l) in lambda.iter().enumerate() {
        for j in (1..=k.min(m + 1)).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e
}

/// `σ_k(λ)`; `σ_0 = 1` and `σ_k = 0` for `k > n`.
pub fn sigma(lambda: &[f64], k: usize) -> f64 {
    sigma_all(lambda, k)[k]
}

/// `∂σ_k/∂λ_i = σ_{k−1}(λ | i)`, the lower-degree function with entry `i` removed.
pub fn sigma_partial(lambda: &[f64], k: usize) -> Vec<f64> {
    if k == 0 {
        return vec![0.0; lambda.len()];
    }
    let mut rest = Vec::with_capacity(lambda.len().saturating_sub(1));
    (0..lambda.len())
        .map(|i| {
            rest.clear();
            rest.extend(
                lambda
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != i)
                    .map(|(_, &l)| l),
            );
            sigma(&rest, k - 1)
        })
        .collect()
}

/// `min_{1≤j≤k} σ_j(λ)`: positive iff `λ ∈ Γ_k`.
pub fn cone_slack(lambda: &[f64], k: usize) -> f64 {
    sigma_all(lambda, k)[1..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Membership in the open cone `Γ_k`, tested as `σ_j(λ) > 0` for `j = 1..k`.
pub fn in_gamma_cone(lambda: &[f64], k: usize) -> bool {
    in_gamma_cone_with_margin(lambda, k, 0.0)
}

pub fn in_gamma_cone_with_margin(lambda: &[f64], k: usize, margin: f64) -> bool {
    cone_slack(lambda, k) > margin
}

/// `(σ₂(λ)/C(n,2))^{1/2}`, defined on `Γ₂`.
pub fn normalized_f(lambda: &[f64]) -> Result<f64> {
    normalized_sigma(lambda, 2)
}

/// `(σ_k(λ)/C(n,k))^{1/k}`.
pub fn normalized_sigma(lambda: &[f64], k: usize) -> Result<f64> {
    let s = sigma(lambda, k);
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "normalized operator needs sigma_{k} > 0 (got {s:e})"
        )));
    }
    Ok((s / binomial(lambda.len(), k)).powf(1.0 / k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Subset enumeration, the definition of `σ_k`.
    fn brute_sigma(lambda: &[f64], k: usize) -> f64 {
        let n = lambda.len();
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| {
                (0..n)
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| lambda[i])
                    .product::<f64>()
            })
            .sum()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&[1.0, 1.0, 1.0], 2), 3.0);
        assert_eq!(brute_sigma(&[2.0, 3.0, 4.0], 2), 26.0);
        assert_eq!(sigma(&[2.0, 3.0, 4.0], 2), 26.0);
        assert_eq!(sigma(&[1.0, 2.0, 3.0], 3), 6.0);
        assert_eq!(sigma(&[1.0, 2.0], 3), 0.0);
        assert_eq!(sigma(&[], 0), 1.0);
    }

    #[test]
    fn partial_examples() {
        assert_eq!(sigma_partial(&[2.0, 3.0, 4.0], 2), vec![7.0, 6.0, 5.0]);
        assert_eq!(sigma_partial(&[1.0, 1.0, 1.0], 2), vec![2.0, 2.0, 2.0]);
        assert_eq!(sigma_partial(&[5.0], 1), vec![1.0]);
    }

    #[test]
    fn cone_examples() {
        for k in 1..=3 {
            assert!(in_gamma_cone(&[1.0, 1.0, 1.0], k));
        }
        // σ₂ = 1 − 0.5 − 0.5 = 0 sits on the boundary.
        assert_eq!(brute_sigma(&[1.0, 1.0, -0.5], 2), 0.0);
        assert!(!in_gamma_cone(&[1.0, 1.0, -0.5], 2));
        assert!(!in_gamma_cone(&[3.0, -1.0], 2));
        assert!(in_gamma_cone(&[3.0, -1.0], 1));
        assert!(!in_gamma_cone_with_margin(&[1.0, 1.0], 2, 1.0));
    }

    #[test]
    fn normalized_examples() {
        assert_eq!(normalized_f(&[1.0, 1.0]).unwrap(), 1.0);
        assert_relative_eq!(normalized_f(&[1.0, 1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            normalized_f(&[2.0, 3.0, 4.0]).unwrap(),
            (26.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!((26.0f64 / 3.0).sqrt(), 2.9439203, epsilon = 1e-7);
        assert!(normalized_f(&[3.0, -1.0]).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(2, 2), 1.0);
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(8, 4), 70.0);
        assert_eq!(binomial(2, 3), 0.0);
    }

    fn lambda_strategy() -> impl Strategy<Value = (Vec<f64>, usize)> {
        (1usize..=8)
            .prop_flat_map(|n| (prop::collection::vec(-3.0f64..3.0, n), 1..=n))
    }

    fn cone_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..3.0, n)
            .prop_filter("inside Γ₂", |l| in_gamma_cone(l, 2))
    }

    proptest! {
        #[test]
        fn recurrence_matches_enumeration((l, k) in lambda_strategy()) {
            let a = sigma(&l, k);
            let b = brute_sigma(&l, k);
            let scale = brute_sigma(&l.iter().map(|x| x.abs()).collect::<Vec<_>>(), k).max(1e-300);
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }

        #[test]
        fn partials_by_finite_differences((l, k) in lambda_strategy()) {
            let d = sigma_partial(&l, k);
            for i in 0..l.len() {
                let h = 1e-6;
                let mut p = l.clone();
                let mut m = l.clone();
                p[i] += h;
                m[i] -= h;
                let fd = (sigma(&p, k) - sigma(&m, k)) / (2.0 * h);
                prop_assert!((fd - d[i]).abs() <= 1e-6 * d[i].abs().max(1.0));
            }
        }

        #[test]
        fn cone_nesting((l, k) in lambda_strategy()) {
            if in_gamma_cone(&l, k) {
                for j in 1..k {
                    prop_assert!(in_gamma_cone(&l, j));
                }
            }
        }

        #[test]
        fn normalized_sigma_two_is_concave(n in 2usize..=4, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || loop {
                let l: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..3.0)).collect();
                if in_gamma_cone(&l, 2) { break l; }
            };
            let (a, b) = (draw(), draw());
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let lhs = normalized_f(&mid).unwrap();
            let rhs = 0.5 * (normalized_f(&a).unwrap() + normalized_f(&b).unwrap());
            prop_assert!(lhs >= rhs - 1e-12);
        }

        #[test]
        fn cone_points_have_positive_trace(l in cone_point(3)) {
            prop_assert!(l.iter().sum::<f64>() > 0.0);
        }
    }
}
