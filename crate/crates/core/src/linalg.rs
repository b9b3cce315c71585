//! Small dense and banded linear algebra: symmetric tridiagonal spectra,
//! banded LU, a cyclic Jacobi eigensolver and shift-invert subspace iteration.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::num::{self, abs, sqrt};
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| num::dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `max |a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max(abs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        num::max_abs(&self.data)
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        num::dot(x, &self.matvec(x))
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<DenseLu> {
        if self.rows != self.cols {
            return Err(Error::InvalidArgument("LU needs a square matrix"));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| abs(a[(i, k)]).total_cmp(&abs(a[(j, k)])))
                .unwrap_or(k);
            if a[(p, k)] == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
                perm.swap(p, k);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        a.data[i * n + j] -= f * a.data[k * n + j];
                    }
                }
            }
        }
        Ok(DenseLu { lu: a, perm })
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations;
    /// eigenvalues ascending, eigenvectors as the matching columns.
    pub fn symmetric_eigen(&self) -> (Vec<f64>, DenseMatrix) {
        let n = self.rows;
        let mut a = self.clone();
        let mut v = DenseMatrix::identity(n);
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in 0..i {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            if sqrt(off) <= 1e-17 * scale * n as f64 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if abs(apq) <= 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (abs(theta) + sqrt(theta * theta + 1.0));
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let vectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
        (values, vectors)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = (0..i).map(|j| row[j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = (i + 1..n).map(|j| row[j] * x[j]).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    /// `off[i]` couples rows `i` and `i + 1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "tridiagonal shape");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Adds `d_i` to the diagonal.
    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (a, b) in self.diag.iter_mut().zip(d) {
            *a += b;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for i in 0..n - 1 {
            m[(i, i + 1)] = self.off[i];
            m[(i + 1, i)] = self.off[i];
        }
        m
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += abs(self.off[i - 1]);
            }
            if i + 1 < n {
                r += abs(self.off[i]);
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.dim() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            d = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (abs(self.diag[i]) + abs(x) + f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::TooManyEigenpairs { k: k + 1, dim: self.dim() });
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (abs(lo) + abs(hi)) + f64::MIN_POSITIVE;
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Lowest eigenvalue with a unit eigenvector whose components sum to a
    /// non-negative number.
    pub fn lowest_eigenpair(&self) -> Result<(f64, Vec<f64>)> {
        let lambda = self.eigenvalue(0)?;
        let n = self.dim();
        let (lo, hi) = self.gershgorin();
        let scale = abs(lo).max(abs(hi)).max(1.0);
        let mut shift = lambda;
        let lu = loop {
            let mut shifted = self.clone();
            for d in shifted.diag.iter_mut() {
                *d -= shift;
            }
            match BandLu::from_tridiagonal(&shifted) {
                Ok(lu) => break lu,
                Err(_) => shift -= 4.0 * f64::EPSILON * scale,
            }
        };
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.25 * num::sin(0.7 * i as f64 + 0.3))
            .collect();
        for _ in 0..4 {
            x = lu.solve(&x);
            let nrm = num::norm2(&x);
            if !(nrm.is_finite() && nrm > 0.0) {
                return Err(Error::Singular);
            }
            for v in x.iter_mut() {
                *v /= nrm;
            }
        }
        if x.iter().sum::<f64>() < 0.0 {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
        Ok((lambda, x))
    }
}

/// LU factorization with partial pivoting of a banded matrix with `kl`
/// sub- and `ku` super-diagonals. Row `i` stores columns
/// `i - kl ..= i + ku + kl` (the extra `kl` hold pivoting fill-in).
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` at `(i, j)`; `j` must lie within the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl || j >= self.n {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let j0 = i.saturating_sub(self.kl);
                let j1 = (i + self.ku).min(self.n - 1);
                (j0..=j1).map(|j| self.data[self.slot(i, j)] * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = abs(self.data[self.slot(k, k)]);
            for i in k + 1..=last {
                let v = abs(self.data[self.slot(i, k)]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular);
            }
            piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            for i in k + 1..=last {
                let s = self.slot(i, k);
                let f = self.data[s] / pivot;
                self.data[s] = f;
                if f != 0.0 {
                    for j in k + 1..=jmax {
                        let src = self.data[self.slot(k, j)];
                        let dst = self.slot(i, j);
                        self.data[dst] -= f * src;
                    }
                }
            }
        }
        Ok(BandLu { a: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    a: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn from_tridiagonal(t: &SymTridiagonal) -> Result<Self> {
        let n = t.dim();
        let mut m = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            m.add(i, i, t.diag[i]);
        }
        for i in 0..n - 1 {
            m.add(i, i + 1, t.off[i]);
            m.add(i + 1, i, t.off[i]);
        }
        m.factor()
    }

    pub fn dim(&self) -> usize {
        self.a.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.a;
        let n = a.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(p, k);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + a.kl).min(n - 1) {
                    x[i] -= a.data[a.slot(i, k)] * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let jmax = (i + a.kl + a.ku).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=jmax {
                s -= a.data[a.slot(i, j)] * x[j];
            }
            x[i] = s / a.data[a.slot(i, i)];
        }
        x
    }
}

/// Solver for `(A - s I) x = b` at a fixed shift `s`.
pub trait ShiftedSolve {
    fn solve(&self, b: &[f64]) -> Vec<f64>;
}

impl ShiftedSolve for DenseLu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        DenseLu::solve(self, b)
    }
}

impl ShiftedSolve for BandLu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        BandLu::solve(self, b)
    }
}

/// A real symmetric operator with a cheap product and a shifted solver.
pub trait SymOperator {
    type Factor: ShiftedSolve;

    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64]) -> Vec<f64>;

    /// Interval containing the spectrum (Gershgorin or better).
    fn spectral_bounds(&self) -> (f64, f64);

    fn factor_shifted(&self, shift: f64) -> Result<Self::Factor>;
}

impl SymOperator for DenseMatrix {
    type Factor = DenseLu;

    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.rows {
            let r: f64 = (0..self.cols)
                .filter(|&j| j != i)
                .map(|j| abs(self[(i, j)]))
                .sum();
            lo = lo.min(self[(i, i)] - r);
            hi = hi.max(self[(i, i)] + r);
        }
        (lo, hi)
    }

    fn factor_shifted(&self, shift: f64) -> Result<DenseLu> {
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] -= shift;
        }
        m.lu()
    }
}

impl SymOperator for SymTridiagonal {
    type Factor = BandLu;

    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        self.gershgorin()
    }

    fn factor_shifted(&self, shift: f64) -> Result<BandLu> {
        let mut t = self.clone();
        for d in t.diag.iter_mut() {
            *d -= shift;
        }
        BandLu::from_tridiagonal(&t)
    }
}

/// Lowest eigenpairs of a symmetric operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Unit vectors (Euclidean norm).
    pub vectors: Vec<Vec<f64>>,
    /// `||A v - lambda v||` per pair.
    pub residuals: Vec<f64>,
    /// Scale used for relative residuals: `max(|lo|, |hi|)` of the bounds.
    pub norm_bound: f64,
}

/// Convergence control for [`lowest_eigenpairs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Target residual relative to the operator norm bound.
    pub target: f64,
    /// Accepted residual if the target is not reached.
    pub accept: f64,
    pub max_iter: usize,
    /// Extra subspace vectors beyond the requested count.
    pub guard: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            target: 1e-13,
            accept: 1e-9,
            max_iter: 400,
            guard: 6,
        }
    }
}

fn orthonormalize(vs: &mut [Vec<f64>]) -> Result<()> {
    for i in 0..vs.len() {
        for _pass in 0..2 {
            for j in 0..i {
                let (head, tail) = vs.split_at_mut(i);
                let c = num::dot(&head[j], &tail[0]);
                for (t, h) in tail[0].iter_mut().zip(&head[j]) {
                    *t -= c * h;
                }
            }
        }
        let nrm = num::norm2(&vs[i]);
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::Singular);
        }
        for v in vs[i].iter_mut() {
            *v /= nrm;
        }
    }
    Ok(())
}

/// Deterministic start vectors: low sine modes plus small pseudo-random noise.
fn start_vectors(n: usize, p: usize) -> Vec<Vec<f64>> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..p)
        .map(|k| {
            (0..n)
                .map(|i| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    let noise = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                    let x = (i as f64 + 0.5) / n as f64;
                    num::sin((k + 1) as f64 * num::PI * x) + 0.1 * noise
                })
                .collect()
        })
        .collect()
}

/// `k` lowest eigenpairs by block shift-invert iteration with Rayleigh–Ritz,
/// shifted below the spectral lower bound so the shifted operator is definite.
pub fn lowest_eigenpairs<A: SymOperator>(
    op: &A,
    k: usize,
    opts: EigenOptions,
) -> Result<Eigenpairs> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::TooManyEigenpairs { k, dim: n });
    }
    let (lo, hi) = op.spectral_bounds();
    let norm_bound = abs(lo).max(abs(hi)).max(f64::MIN_POSITIVE);
    if n <= 64 {
        // small problems: direct dense solve
        let dense = DenseMatrix::from_fn(n, n, |i, j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            op.apply(&e)[i]
        });
        let (values, vecs) = dense.symmetric_eigen();
        let vectors: Vec<Vec<f64>> = (0..k).map(|j| vecs.column(j)).collect();
        let residuals = residuals_of(op, &values[..k], &vectors);
        return Ok(Eigenpairs {
            values: values[..k].to_vec(),
            vectors,
            residuals,
            norm_bound,
        });
    }
    let shift = lo - 1.0 - 1e-3 * abs(lo);
    let factor = op.factor_shifted(shift)?;
    let p = (k + opts.guard).min(n);
    let mut vs = start_vectors(n, p);
    orthonormalize(&mut vs)?;
    let mut best: Option<Eigenpairs> = None;
    for _iter in 0..opts.max_iter {
        let mut ws: Vec<Vec<f64>> = vs.iter().map(|v| factor.solve(v)).collect();
        orthonormalize(&mut ws)?;
        let aws: Vec<Vec<f64>> = ws.iter().map(|w| op.apply(w)).collect();
        let h = DenseMatrix::from_fn(p, p, |i, j| {
            0.5 * (num::dot(&ws[i], &aws[j]) + num::dot(&ws[j], &aws[i]))
        });
        let (theta, y) = h.symmetric_eigen();
        let mut new_vs = vec![vec![0.0; n]; p];
        let mut new_avs = vec![vec![0.0; n]; p];
        for j in 0..p {
            for m in 0..p {
                let c = y[(m, j)];
                for i in 0..n {
                    new_vs[j][i] += c * ws[m][i];
                    new_avs[j][i] += c * aws[m][i];
                }
            }
        }
        let residuals: Vec<f64> = (0..k)
            .map(|j| {
                let r: Vec<f64> = new_avs[j]
                    .iter()
                    .zip(&new_vs[j])
                    .map(|(a, v)| a - theta[j] * v)
                    .collect();
                num::norm2(&r)
            })
            .collect();
        let worst = residuals.iter().fold(0.0f64, |m, &r| m.max(r));
        let candidate = Eigenpairs {
            values: theta[..k].to_vec(),
            vectors: new_vs[..k].to_vec(),
            residuals,
            norm_bound,
        };
        let improved = match &best {
            None => true,
            Some(b) => worst < b.residuals.iter().fold(0.0f64, |m, &r| m.max(r)),
        };
        if improved {
            best = Some(candidate.clone());
        }
        vs = new_vs;
        if worst <= opts.target * norm_bound {
            return Ok(candidate);
        }
    }
    let best = best.ok_or(Error::EigenNotConverged { residual: f64::INFINITY })?;
    let worst = best.residuals.iter().fold(0.0f64, |m, &r| m.max(r));
    if worst <= opts.accept * norm_bound {
        Ok(best)
    } else {
        Err(Error::EigenNotConverged {
            residual: worst / norm_bound,
        })
    }
}

fn residuals_of<A: SymOperator>(op: &A, values: &[f64], vectors: &[Vec<f64>]) -> Vec<f64> {
    values
        .iter()
        .zip(vectors)
        .map(|(&l, v)| {
            let av = op.apply(v);
            let r: Vec<f64> = av.iter().zip(v).map(|(a, x)| a - l * x).collect();
            num::norm2(&r)
        })
        .collect()
}
