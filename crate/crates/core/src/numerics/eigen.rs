//! Dense real symmetric eigensolver: Householder tridiagonalization followed
//! by the implicit-shift QL iteration.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative asymmetry accepted (and then symmetrized away) by the solver.
pub const SYMMETRY_TOL: f64 = 1e-10;

const MAX_QL_SWEEPS: usize = 60;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Builds a matrix from rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::Dimension { expected: n, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.n;
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `‖M − Mᵀ‖_∞`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| (self[(i, j)] - self[(j, i)]).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn add_rank_one(&mut self, scale: f64, u: &[f64], v: &[f64]) {
        for i in 0..self.n {
            let s = scale * u[i];
            for (m, vj) in self.row_mut(i).iter_mut().zip(v) {
                *m += s * vj;
            }
        }
    }

    /// `Qᵀ M Q` for a matrix `Q` given by its columns.
    pub fn congruence(&self, columns: &[Vec<f64>]) -> SquareMatrix {
        let k = columns.len();
        let mq: Vec<Vec<f64>> = columns.iter().map(|c| self.matvec(c)).collect();
        SquareMatrix::from_fn(k, |i, j| dot(&columns[i], &mq[j]))
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition with ascending eigenvalues; row `i` of `vectors` is the
/// unit eigenvector belonging to `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: SquareMatrix,
}

impl SymmetricEigen {
    pub fn vector(&self, i: usize) -> &[f64] {
        self.vectors.row(i)
    }
}

/// Full eigen-decomposition of a symmetric matrix.
pub fn symmetric_eigen(m: &SquareMatrix) -> Result<SymmetricEigen> {
    let (values, vectors) = solve(m, true)?;
    Ok(SymmetricEigen { values, vectors: vectors.expect("requested") })
}

/// Eigenvalues only (ascending); skips the O(n³) eigenvector accumulation.
pub fn symmetric_eigenvalues(m: &SquareMatrix) -> Result<Vec<f64>> {
    Ok(solve(m, false)?.0)
}

fn solve(m: &SquareMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<SquareMatrix>)> {
    let n = m.n();
    let scale = m.norm_inf();
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!(
            "matrix is not symmetric: ‖M − Mᵀ‖ = {asym:e}, ‖M‖ = {scale:e}"
        )));
    }
    if n == 0 {
        return Ok((vec![], want_vectors.then(|| SquareMatrix::zeros(0))));
    }
    let mut a = m.clone();
    a.symmetrize();
    let tri = tridiagonalize(&mut a);
    let mut d = tri.diag;
    let mut e = tri.off;
    e.push(0.0);
    let mut z = want_vectors.then(|| SquareMatrix::identity(n));
    implicit_ql(&mut d, &mut e, z.as_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = z.map(|z| {
        let mut out = SquareMatrix::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            let row = out.row_mut(dst);
            row.copy_from_slice(z.row(src));
            apply_reflectors(&tri.reflectors, row);
        }
        out
    });
    Ok((values, vectors))
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// `(k, beta, v)`: `H_k = I − beta v vᵀ` acting on indices `k+1..n`.
    reflectors: Vec<(usize, f64, Vec<f64>)>,
}

/// Householder reduction working on the lower triangle of `a`.
fn tridiagonalize(a: &mut SquareMatrix) -> Tridiagonal {
    let n = a.n();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        diag[k] = a[(k, k)];
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let sigma = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if sigma == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let alpha = if v[0] > 0.0 { -sigma } else { sigma };
        off[k] = alpha;
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        let beta = 2.0 / vtv;

        // p = beta * S v, S the trailing block stored in the lower triangle
        let m = n - k - 1;
        let p = &mut p[..m];
        p.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..m {
            let row = &a.row(k + 1 + i)[k + 1..k + 2 + i];
            let (strict, diag_entry) = row.split_at(i);
            let vi = v[i];
            p[i] += dot(strict, &v[..i]) + diag_entry[0] * vi;
            for (pj, sij) in p[..i].iter_mut().zip(strict) {
                *pj += sij * vi;
            }
        }
        p.iter_mut().for_each(|x| *x *= beta);
        let kk = 0.5 * beta * dot(&v, p);
        for (pi, vi) in p.iter_mut().zip(&v) {
            *pi -= kk * vi;
        }
        // S ← S − v wᵀ − w vᵀ (lower triangle only)
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a.row_mut(k + 1 + i)[k + 1..k + 2 + i];
            for ((s, vj), wj) in row.iter_mut().zip(&v[..=i]).zip(&p[..=i]) {
                *s -= vi * wj + wi * vj;
            }
        }
        reflectors.push((k, beta, v));
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2, n - 2)];
        off[n - 2] = a[(n - 1, n - 2)];
    }
    diag[n - 1] = a[(n - 1, n - 1)];
    Tridiagonal { diag, off, reflectors }
}

fn apply_reflectors(reflectors: &[(usize, f64, Vec<f64>)], x: &mut [f64]) {
    for (k, beta, v) in reflectors.iter().rev() {
        let tail = &mut x[k + 1..];
        let s = beta * dot(v, tail);
        for (t, vi) in tail.iter_mut().zip(v) {
            *t -= s * vi;
        }
    }
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
/// `e[i]` couples `d[i]` and `d[i+1]`; `e[n-1]` must be zero. Rotations are
/// applied to the rows of `z` when given.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut SquareMatrix>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::Numerical("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    rotate_rows(z, i, s, c);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn rotate_rows(z: &mut SquareMatrix, i: usize, s: f64, c: f64) {
    let n = z.n();
    let (head, tail) = z.data.split_at_mut((i + 1) * n);
    let ri = &mut head[i * n..];
    let rj = &mut tail[..n];
    for (a, b) in ri.iter_mut().zip(rj.iter_mut()) {
        let f = *b;
        *b = s * *a + c * f;
        *a = c * *a - s * f;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
