//! Dense linear-algebra oracles used to check the fast samplers and solvers.

use nalgebra::DMatrix;

use crate::field::lattice::NORMALIZATION;

fn grid_laplacian(n: usize, dirichlet: bool) -> DMatrix<f64> {
    let nn = n * n;
    let mut l = DMatrix::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            let a = i * n + j;
            let interior = i > 0 && j > 0 && i + 1 < n && j + 1 < n;
            if dirichlet && !interior {
                l[(a, a)] = 1.0;
                continue;
            }
            let nbrs = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
            for (p, q) in nbrs {
                if p >= n || q >= n {
                    continue;
                }
                let b = p * n + q;
                l[(a, a)] += 1.0;
                let bi = p > 0 && q > 0 && p + 1 < n && q + 1 < n;
                if !dirichlet || bi {
                    l[(a, b)] -= 1.0;
                }
            }
        }
    }
    l
}

/// 2π L^{-1} for the zero-boundary n×n grid, as an n²×n² matrix over all
/// sites (rows and columns of boundary sites are zero).
pub fn dirichlet_green_dense(n: usize) -> DMatrix<f64> {
    let l = grid_laplacian(n, true);
    let mut g = l.try_inverse().expect("Dirichlet Laplacian is invertible") * NORMALIZATION;
    for i in 0..n {
        for j in 0..n {
            if i == 0 || j == 0 || i + 1 == n || j + 1 == n {
                let a = i * n + j;
                g.row_mut(a).fill(0.0);
                g.column_mut(a).fill(0.0);
            }
        }
    }
    g
}

/// 2π L^+ for the Neumann Laplacian of the n×n grid graph (covariance of the
/// mean-zero free field).
pub fn neumann_green_dense(n: usize) -> DMatrix<f64> {
    let nn = n * n;
    let l = grid_laplacian(n, false);
    let j = DMatrix::from_element(nn, nn, 1.0 / nn as f64);
    let inv = (l + &j).try_inverse().expect("regularized Laplacian is invertible");
    (inv - j) * NORMALIZATION
}

/// Solves the dense system A x = b.
pub fn dense_solve(a: DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    a.lu().solve(&rhs).map(|x| x.iter().copied().collect())
}
