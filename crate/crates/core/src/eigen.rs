//! Eigendecomposition-based DFrFT.
//!
//! Eigenvectors come from the tridiagonal matrix that commutes with the DFT
//! (`S[n][n] = 2 cos(2 pi n / N) - 4`, unit off-diagonals with wrap-around).
//! The even and odd subspaces are diagonalised separately; within each one
//! eigenvectors are ranked by descending eigenvalue, which is the
//! Hermite-Gaussian order. Even vectors take orders 0, 2, 4, ... and odd
//! vectors 1, 3, 5, ..., so for even `N` the order `N - 1` is skipped and
//! `N` appears instead.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::frft::C64;

/// Real orthonormal eigenbasis of the DFT with Hermite orders attached.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    /// Column `c` is the eigenvector with order `orders[c]`.
    vectors: DMatrix<f64>,
    orders: Vec<usize>,
}

impl HermiteBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "eigen DFrFT needs N >= 2");
        let s = commuting_matrix(n);
        let half = (n - 1) / 2;
        let n_even = n / 2 + 1;
        let n_odd = n - n_even;
        let r = std::f64::consts::FRAC_1_SQRT_2;

        let mut even = DMatrix::<f64>::zeros(n, n_even);
        even[(0, 0)] = 1.0;
        for j in 1..=half {
            even[(j, j)] = r;
            even[(n - j, j)] = r;
        }
        if n.is_multiple_of(2) {
            even[(n / 2, n_even - 1)] = 1.0;
        }
        let mut odd = DMatrix::<f64>::zeros(n, n_odd);
        for j in 1..=half {
            odd[(j, j - 1)] = r;
            odd[(n - j, j - 1)] = -r;
        }

        let mut vectors = DMatrix::<f64>::zeros(n, n);
        let mut orders = Vec::with_capacity(n);
        let mut col = 0;
        for (basis, first_order) in [(&even, 0usize), (&odd, 1usize)] {
            if basis.ncols() == 0 {
                continue;
            }
            let reduced = basis.transpose() * &s * basis;
            let eig = SymmetricEigen::new(reduced);
            let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            for (rank, &i) in idx.iter().enumerate() {
                let mut v = basis * eig.eigenvectors.column(i);
                // first non-negligible component positive
                if let Some(lead) = v.iter().copied().find(|x| x.abs() > 1e-12) {
                    if lead < 0.0 {
                        v.neg_mut();
                    }
                }
                vectors.set_column(col, &v);
                orders.push(first_order + 2 * rank);
                col += 1;
            }
        }
        Self { vectors, orders }
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// `F_alpha = V diag(exp(-j k alpha)) V^T`.
    pub fn matrix(&self, alpha: f64) -> DMatrix<C64> {
        let n = self.len();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for (c, &k) in self.orders.iter().enumerate() {
            let w = C64::from_polar(1.0, -(k as f64) * alpha);
            let v = self.vectors.column(c);
            for col in 0..n {
                let wv = w * v[col];
                for row in 0..n {
                    out[(row, col)] += wv * v[row];
                }
            }
        }
        out
    }

    /// Coefficients of `s` in the eigenbasis, `V^T s`.
    pub fn project(&self, s: &[C64]) -> Vec<C64> {
        assert_eq!(s.len(), self.len());
        (0..self.len())
            .map(|c| {
                self.vectors
                    .column(c)
                    .iter()
                    .zip(s)
                    .map(|(&v, &x)| x * v)
                    .sum()
            })
            .collect()
    }

    /// Applies `F_alpha` to a vector already projected with [`Self::project`].
    pub fn apply_projected(&self, coeffs: &[C64], alpha: f64, out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (c, &k) in self.orders.iter().enumerate() {
            let w = coeffs[c] * C64::from_polar(1.0, -(k as f64) * alpha);
            for (o, &v) in out.iter_mut().zip(self.vectors.column(c).iter()) {
                *o += w * v;
            }
        }
    }

    pub fn apply(&self, s: &[C64], alpha: f64) -> Vec<C64> {
        let coeffs = self.project(s);
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        self.apply_projected(&coeffs, alpha, &mut out);
        out
    }
}

fn commuting_matrix(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = 2.0 * (2.0 * PI * i as f64 / n as f64).cos() - 4.0;
        s[(i, (i + 1) % n)] += 1.0;
        s[((i + 1) % n, i)] += 1.0;
    }
    s
}

/// Unitary `N x N` eigendecomposition DFrFT matrix of angle `alpha`.
pub fn eigen_dfrft_matrix(n: usize, alpha: f64) -> DMatrix<C64> {
    HermiteBasis::new(n).matrix(alpha)
}
