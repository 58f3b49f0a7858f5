//! Fourth-order central finite differences on a uniform line grid, with
//! values outside the grid taken as zero (Dirichlet truncation).

use crate::numerics::eigen::SquareMatrix;

const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

fn apply(stencil: &[f64; 5], scale: f64, u: &[f64]) -> Vec<f64> {
    let n = u.len() as i64;
    (0..n)
        .map(|j| {
            let mut s = 0.0;
            for (o, c) in stencil.iter().enumerate() {
                let idx = j + o as i64 - 2;
                if (0..n).contains(&idx) {
                    s += c * u[idx as usize];
                }
            }
            s * scale
        })
        .collect()
}

pub fn first_derivative(u: &[f64], h: f64) -> Vec<f64> {
    apply(&D1, 1.0 / (12.0 * h), u)
}

pub fn second_derivative(u: &[f64], h: f64) -> Vec<f64> {
    apply(&D2, 1.0 / (12.0 * h * h), u)
}

fn banded(stencil: &[f64; 5], scale: f64, n: usize) -> SquareMatrix {
    SquareMatrix::from_fn(n, |i, j| {
        let o = j as i64 - i as i64 + 2;
        if (0..5).contains(&o) {
            stencil[o as usize] * scale
        } else {
            0.0
        }
    })
}

/// Second-derivative matrix acting on `n` consecutive unknowns.
pub fn second_derivative_matrix(n: usize, h: f64) -> SquareMatrix {
    banded(&D2, 1.0 / (12.0 * h * h), n)
}

/// First-derivative matrix (antisymmetric) acting on `n` consecutive unknowns.
pub fn first_derivative_matrix(n: usize, h: f64) -> SquareMatrix {
    banded(&D1, 1.0 / (12.0 * h), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let l = 12.0;
            let h = 2.0 * l / (n - 1) as f64;
            let x: Vec<f64> = (0..n).map(|j| -l + j as f64 * h).collect();
            let u: Vec<f64> = x.iter().map(|x| (-x * x).exp()).collect();
            let d2 = second_derivative(&u, h);
            x.iter()
                .zip(&d2)
                .map(|(x, d)| (d - (4.0 * x * x - 2.0) * (-x * x).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(201) / err(401);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn matrices_are_consistent_with_apply() {
        let h = 0.3;
        let u: Vec<f64> = (0..20).map(|j| (j as f64 * 0.7).sin()).collect();
        let a = second_derivative_matrix(20, h).matvec(&u);
        let b = second_derivative(&u, h);
        let c = first_derivative_matrix(20, h).matvec(&u);
        let d = first_derivative(&u, h);
        for j in 0..20 {
            assert!((a[j] - b[j]).abs() < 1e-12);
            assert!((c[j] - d[j]).abs() < 1e-12);
        }
        let m = second_derivative_matrix(20, h);
        assert_eq!(m.asymmetry(), 0.0);
    }
}
