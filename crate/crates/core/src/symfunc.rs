//! Elementary symmetric functions of symmetric matrices, the Newton tensor,
//! and the positivity-cone test.
//!
//! sigma_k is computed from characteristic-polynomial coefficients via the
//! Faddeev-LeVerrier recursion rather than an eigendecomposition: the
//! recursion is an exact polynomial identity in the matrix entries, free of
//! eigenvalue-ordering noise, and yields the Newton tensors along the way.

use nalgebra::DMatrix;

/// All elementary symmetric functions sigma_0..sigma_n of the eigenvalues of
/// a (symmetric) matrix.
pub fn sigma_all(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    // Faddeev-LeVerrier: M_0 = I, N_j = A M_{j-1}, c_j = -tr(N_j)/j,
    // M_j = N_j + c_j I; char poly coefficients c_j = (-1)^j sigma_j.
    let mut sig = Vec::with_capacity(n + 1);
    sig.push(1.0);
    let mut m = DMatrix::<f64>::identity(n, n);
    for j in 1..=n {
        let nj = a * &m;
        let c = -nj.trace() / j as f64;
        sig.push(if j % 2 == 0 { c } else { -c });
        m = nj + DMatrix::<f64>::identity(n, n) * c;
    }
    sig
}

pub fn sigma_k(a: &DMatrix<f64>, k: usize) -> f64 {
    debug_assert!(k <= a.nrows());
    sigma_all(a)[k]
}

/// Newton tensor T_{k-1}(A) = sum_{j=0}^{k-1} (-1)^j sigma_{k-1-j}(A) A^j,
/// the derivative of sigma_k: d/ds sigma_k(A + sB)|_0 = tr(T_{k-1} B).
pub fn newton_tensor(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = a.nrows();
    assert!(k >= 1 && k <= n);
    let sig = sigma_all(a);
    let mut out = DMatrix::<f64>::zeros(n, n);
    let mut power = DMatrix::<f64>::identity(n, n);
    for j in 0..k {
        let c = if j % 2 == 0 { sig[k - 1 - j] } else { -sig[k - 1 - j] };
        out += &power * c;
        if j + 1 < k {
            power = &power * a;
        }
    }
    out
}

/// Directional derivative of sigma_k at A in direction B, via the Newton
/// tensor.
pub fn sigma_k_directional(a: &DMatrix<f64>, b: &DMatrix<f64>, k: usize) -> f64 {
    (newton_tensor(a, k) * b).trace()
}

/// Gamma_k^+ cone test: sigma_1..sigma_k all strictly positive (margin
/// 1e-12; the cone is open and its boundary is numerically reachable).
pub fn gamma_k_plus(a: &DMatrix<f64>, k: usize) -> bool {
    gamma_k_margin(a, k) > 1e-12
}

/// Smallest of sigma_1..sigma_k; positive inside the cone.
pub fn gamma_k_margin(a: &DMatrix<f64>, k: usize) -> f64 {
    let sig = sigma_all(a);
    sig[1..=k.min(a.nrows())].iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> f64 {
        let mut v = 1.0;
        for i in 0..k {
            v = v * (n - i) as f64 / (i + 1) as f64;
        }
        v
    }

    #[test]
    fn identity_matrix_gives_binomials() {
        for n in 2..=5 {
            let a = DMatrix::<f64>::identity(n, n);
            let sig = sigma_all(&a);
            for k in 0..=n {
                assert!((sig[k] - binom(n, k)).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn sigma_matches_eigenvalue_expansion() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, -1.0, 0.5, 0.0, 0.5, 3.0]);
        let eig = a.clone().symmetric_eigenvalues();
        let (l1, l2, l3) = (eig[0], eig[1], eig[2]);
        let sig = sigma_all(&a);
        assert!((sig[1] - (l1 + l2 + l3)).abs() < 1e-10);
        assert!((sig[2] - (l1 * l2 + l1 * l3 + l2 * l3)).abs() < 1e-10);
        assert!((sig[3] - l1 * l2 * l3).abs() < 1e-10);
    }

    #[test]
    fn newton_tensor_is_the_gradient() {
        // finite-difference oracle for the directional derivative
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let n = 4;
            let mut a = DMatrix::<f64>::zeros(n, n);
            let mut b = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    a[(i, j)] = x;
                    a[(j, i)] = x;
                    let y: f64 = rng.gen_range(-1.0..1.0);
                    b[(i, j)] = y;
                    b[(j, i)] = y;
                }
            }
            for k in 1..=n {
                let h = 1e-6;
                let fd = (sigma_k(&(a.clone() + b.clone() * h), k)
                    - sigma_k(&(a.clone() - b.clone() * h), k))
                    / (2.0 * h);
                let exact = sigma_k_directional(&a, &b, k);
                assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "k={k}");
            }
        }
    }

    #[test]
    fn newton_tensor_first_entries_are_minor_sums() {
        // T_11 = sigma_{k-1} of the matrix with row/column 1 removed
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.3, -0.2, 0.1, 0.3, 2.0, 0.4, 0.0, -0.2, 0.4, -1.0, 0.6, 0.1, 0.0, 0.6,
                0.5,
            ],
        );
        for k in 1..=4usize {
            let t = newton_tensor(&a, k);
            let bar = a.clone().remove_row(0).remove_column(0);
            assert!((t[(0, 0)] - sigma_k(&bar, k - 1)).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn cone_test_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        for k in 1..=3 {
            assert!(gamma_k_plus(&id, k));
        }
        let mut d = DMatrix::<f64>::identity(3, 3);
        d[(0, 0)] = -1.0;
        // sigma_1 = 1 > 0 but sigma_2 = -1 < 0
        assert!(gamma_k_plus(&d, 1));
        assert!(!gamma_k_plus(&d, 2));
    }
}
