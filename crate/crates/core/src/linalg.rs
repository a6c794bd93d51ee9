//! Small dense complex matrices stored row-major in flat slices.
//!
//! Every field in the crate is a lattice of n×n blocks with n rarely above
//! eight, so the hot kernels (products, adjoints) are written out by hand.
//! Decompositions go through nalgebra.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn eye(n: usize) -> Vec<C64> {
    let mut m = vec![ZERO; n * n];
    for i in 0..n {
        m[i * n + i] = ONE;
    }
    m
}

/// out = a·b
pub fn matmul_into(out: &mut [C64], a: &[C64], b: &[C64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = s;
        }
    }
}

/// out += s·a·b
pub fn matmul_acc(out: &mut [C64], a: &[C64], b: &[C64], n: usize, s: C64) {
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k] * s;
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
}

pub fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    matmul_into(&mut out, a, b, n);
    out
}

pub fn matmul3(a: &[C64], b: &[C64], c: &[C64], n: usize) -> Vec<C64> {
    matmul(&matmul(a, b, n), c, n)
}

pub fn adjoint(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

pub fn trace(a: &[C64], n: usize) -> C64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

/// Tr(a·b) without forming the product.
pub fn trace_prod(a: &[C64], b: &[C64], n: usize) -> C64 {
    let mut s = ZERO;
    for i in 0..n {
        for k in 0..n {
            s += a[i * n + k] * b[k * n + i];
        }
    }
    s
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

fn to_na(a: &[C64], n: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(n, n, a)
}

fn from_na(m: &DMatrix<C64>) -> Vec<C64> {
    let n = m.nrows();
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m[(i, j)];
        }
    }
    out
}

/// Largest singular value.
pub fn opnorm(a: &[C64], n: usize) -> f64 {
    match n {
        1 => a[0].norm(),
        2 => {
            let f2: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            let det = (a[0] * a[3] - a[1] * a[2]).norm_sqr();
            let disc = (f2 * f2 - 4.0 * det).max(0.0).sqrt();
            ((f2 + disc) / 2.0).sqrt()
        }
        _ => {
            if a.iter().all(|x| *x == ZERO) {
                return 0.0;
            }
            to_na(a, n).singular_values().max()
        }
    }
}

pub fn norm1(a: &[C64], n: usize) -> f64 {
    (0..n).map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascending; the
/// eigenvectors are the columns of the returned row-major matrix.
pub fn hermitian_eig(a: &[C64], n: usize) -> (Vec<f64>, Vec<C64>) {
    let herm = to_na(a, n);
    let herm = (&herm + herm.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = vec![ZERO; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vecs[row * n + col] = eig.eigenvectors[(row, src)];
        }
    }
    (vals, vecs)
}

/// Unitary factor of the polar decomposition a = U·|a|.
pub fn polar_unitary(a: &[C64], n: usize) -> Vec<C64> {
    let svd = to_na(a, n).svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    from_na(&(u * vt))
}

pub fn singular_values(a: &[C64], n: usize) -> Vec<f64> {
    to_na(a, n).singular_values().iter().copied().collect()
}

pub fn det(a: &[C64], n: usize) -> C64 {
    to_na(a, n).determinant()
}

pub fn inverse(a: &[C64], n: usize) -> Option<Vec<C64>> {
    to_na(a, n).try_inverse().map(|m| from_na(&m))
}

/// Solves a·x = b for a square right-hand side.
pub fn solve(a: &[C64], b: &[C64], n: usize) -> Option<Vec<C64>> {
    to_na(a, n).lu().solve(&to_na(b, n)).map(|m| from_na(&m))
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant.
pub fn expm(a: &[C64], n: usize) -> Vec<C64> {
    let nrm = norm1(a, n);
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = scale(a, C64::new(0.5f64.powi(s), 0.0));
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let id = eye(n);
    let a2 = matmul(&a, &a, n);
    let a4 = matmul(&a2, &a2, n);
    let a6 = matmul(&a4, &a2, n);
    let lin = |c6: usize, c4: usize, c2: usize, c0: Option<usize>| {
        let mut m = vec![ZERO; n * n];
        for i in 0..n * n {
            m[i] = b(c6) * a6[i] + b(c4) * a4[i] + b(c2) * a2[i];
            if let Some(k) = c0 {
                m[i] += b(k) * id[i];
            }
        }
        m
    };
    let inner_u = lin(13, 11, 9, None);
    let mut u = matmul(&a6, &inner_u, n);
    let low_u = lin(7, 5, 3, Some(1));
    for i in 0..n * n {
        u[i] += low_u[i];
    }
    let u = matmul(&a, &u, n);
    let inner_v = lin(12, 10, 8, None);
    let mut v = matmul(&a6, &inner_v, n);
    let low_v = lin(6, 4, 2, Some(0));
    for i in 0..n * n {
        v[i] += low_v[i];
    }
    let num = add(&v, &u);
    let den = sub(&v, &u);
    let mut r = solve(&den, &num, n).expect("Pade denominator is well conditioned after scaling");
    for _ in 0..s {
        r = matmul(&r, &r, n);
    }
    r
}

/// exp(i·θ·h) for Hermitian h through its eigen-decomposition.
pub fn expm_i_hermitian(h: &[C64], theta: f64, n: usize) -> Vec<C64> {
    let (vals, vecs) = hermitian_eig(h, n);
    let mut out = vec![ZERO; n * n];
    for (k, lam) in vals.iter().enumerate() {
        let ph = C64::from_polar(1.0, theta * lam);
        for i in 0..n {
            let vik = vecs[i * n + k] * ph;
            for j in 0..n {
                out[i * n + j] += vik * vecs[j * n + k].conj();
            }
        }
    }
    out
}

/// ‖a*a − I‖ in the operator norm.
pub fn unitarity_residual(a: &[C64], n: usize) -> f64 {
    let g = matmul(&adjoint(a, n), a, n);
    opnorm(&sub(&g, &eye(n)), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rand_mat(seed: u64, n: usize) -> Vec<C64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n * n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn herm(seed: u64, n: usize) -> Vec<C64> {
        let a = rand_mat(seed, n);
        scale(&add(&a, &adjoint(&a, n)), C64::new(0.5, 0.0))
    }

    #[test]
    fn expm_of_diagonal() {
        let mut a = vec![ZERO; 4];
        a[0] = C64::new(1.0, 2.0);
        a[3] = C64::new(-3.0, 0.5);
        let e = expm(&a, 2);
        assert!((e[0] - a[0].exp()).norm() < 1e-13);
        assert!((e[3] - a[3].exp()).norm() < 1e-13);
        assert!(e[1].norm() < 1e-15 && e[2].norm() < 1e-15);
    }

    #[test]
    fn expm_nilpotent_is_finite_series() {
        // exp of a strictly upper triangular matrix is I + N + N²/2.
        let mut a = vec![ZERO; 9];
        a[1] = C64::new(2.0, 0.0);
        a[2] = C64::new(0.0, 1.0);
        a[5] = C64::new(-1.0, 0.0);
        let n2 = matmul(&a, &a, 3);
        let expect: Vec<C64> = (0..9).map(|i| eye(3)[i] + a[i] + n2[i] * 0.5).collect();
        let e = expm(&a, 3);
        assert!(max_abs(&sub(&e, &expect)) < 1e-13);
    }

    #[test]
    fn pade_matches_eigen_route_on_hermitian() {
        for seed in 0..20 {
            let n = 1 + (seed as usize % 5);
            let h = herm(seed, n);
            let theta = 2.0 * std::f64::consts::PI * (0.3 + seed as f64);
            let via_pade = expm(&scale(&h, C64::new(0.0, theta)), n);
            let via_eig = expm_i_hermitian(&h, theta, n);
            assert!(max_abs(&sub(&via_pade, &via_eig)) < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn polar_factor_is_unitary() {
        let a = rand_mat(7, 4);
        let u = polar_unitary(&a, 4);
        assert!(unitarity_residual(&u, 4) < 1e-13);
    }

    proptest! {
        #[test]
        fn exp_of_sum_of_commuting(seed in 0u64..1000, s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let h = herm(seed, 3);
            let a = expm_i_hermitian(&h, s, 3);
            let b = expm_i_hermitian(&h, t, 3);
            let ab = expm_i_hermitian(&h, s + t, 3);
            prop_assert!(max_abs(&sub(&matmul(&a, &b, 3), &ab)) < 1e-12);
        }

        #[test]
        fn trace_prod_is_cyclic(seed in 0u64..1000) {
            let a = rand_mat(seed, 3);
            let b = rand_mat(seed + 5000, 3);
            prop_assert!((trace_prod(&a, &b, 3) - trace_prod(&b, &a, 3)).norm() < 1e-13);
            prop_assert!((trace_prod(&a, &b, 3) - trace(&matmul(&a, &b, 3), 3)).norm() < 1e-13);
        }
    }
}
