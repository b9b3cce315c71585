//! Second variation of the energy at `phi_R`, sector by sector in angular
//! momentum.
//!
//! With `e = e_phi` and `V = V_phi` of the minimizer,
//!
//! * `L_-^(l) = -d^2/dr^2 + l(l+1)/r^2 - e - 2V`,
//! * `L+~^(l) = L_-^(l) - 4 X_1^(l)`,
//! * `L_+^(l) = L_-^(l) - 4 X_1^(l) + 4 X_2^(l)`,
//!
//! where, in `sigma = r f` and with `c_l = 4 pi / (2l + 1)`,
//! `X_1^(l)` has kernel `c_l sigma_R(r) sigma_R(s) min^l / max^(l+1)` and
//! `X_2^(l)` has the rank-one kernel `c_l sigma_R(r) sigma_R(s) (r s)^l / R^(2l+1)`.
//!
//! The kernels are never stored densely. `min^l / max^(l+1)` is semiseparable,
//! so products cost `O(N)` through two scaled recurrences, and a shifted solve
//! becomes a banded system in the interleaved unknowns `(x_i, P_i, Q_i)` of
//! those recurrences, with the rank-one image term handled by Sherman–Morrison.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{
    boundary_slope, dirichlet_sigma_derivative, laplacian_sector, Boundary, RadialFunction,
    RadialGrid, SectorLaplacian,
};
use crate::linalg::{
    lowest_eigenpairs, BandLu, BandMatrix, DenseMatrix, EigenOptions, Eigenpairs, ShiftedSolve,
    SymOperator,
};
use crate::num::{self, abs, powi, sqrt, FOUR_PI};
use crate::solver::PekarSolution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Lminus,
    Lplus,
    LplusTilde,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Lminus => "Lminus",
            OperatorKind::Lplus => "Lplus",
            OperatorKind::LplusTilde => "LplusTilde",
        }
    }
}

/// `y += alpha * d o K_l (d o x) + beta * q (q . x)` with
/// `K_l(r, s) = min^l / max^(l+1)`.
#[derive(Debug, Clone, PartialEq)]
struct Nonlocal {
    l: u32,
    alpha: f64,
    beta: f64,
    d: Vec<f64>,
    q: Vec<f64>,
    /// `(r_{i-1}/r_i)^(l+1)`, index 0 unused.
    rho: Vec<f64>,
    /// `(r_i/r_{i+1})^l`, last index unused.
    tau: Vec<f64>,
    inv_r: Vec<f64>,
}

impl Nonlocal {
    fn new(grid: &RadialGrid, l: u32, alpha: f64, beta: f64, d: Vec<f64>) -> Self {
        let r = grid.nodes();
        let n = r.len();
        let radius = grid.radius();
        let q = d
            .iter()
            .zip(r)
            .map(|(di, ri)| di * powi(ri / radius, l) / sqrt(radius))
            .collect();
        let mut rho = vec![0.0; n];
        let mut tau = vec![0.0; n];
        for i in 1..n {
            rho[i] = powi(r[i - 1] / r[i], l + 1);
        }
        for i in 0..n - 1 {
            tau[i] = powi(r[i] / r[i + 1], l);
        }
        Self {
            l,
            alpha,
            beta,
            d,
            q,
            rho,
            tau,
            inv_r: r.iter().map(|x| 1.0 / x).collect(),
        }
    }

    /// `K_l y` in `O(N)`.
    fn kernel_apply(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        let mut out = vec![0.0; n];
        let mut p = 0.0;
        for i in 0..n {
            p = self.rho[i] * p + y[i] * self.inv_r[i];
            out[i] = p;
        }
        let mut q = 0.0;
        for i in (0..n.saturating_sub(1)).rev() {
            q = self.tau[i] * (q + y[i + 1] * self.inv_r[i + 1]);
            out[i] += q;
        }
        out
    }

    fn add_to(&self, x: &[f64], out: &mut [f64]) {
        if self.alpha != 0.0 {
            let y: Vec<f64> = self.d.iter().zip(x).map(|(a, b)| a * b).collect();
            let k = self.kernel_apply(&y);
            for i in 0..out.len() {
                out[i] += self.alpha * self.d[i] * k[i];
            }
        }
        if self.beta != 0.0 {
            let c = self.beta * num::dot(&self.q, x);
            for (o, qi) in out.iter_mut().zip(&self.q) {
                *o += c * qi;
            }
        }
    }

    /// `sum_j |entry_ij|`, an upper bound for each row.
    fn abs_row_sums(&self) -> Vec<f64> {
        let k = self.kernel_apply(&self.d.iter().map(|x| abs(*x)).collect::<Vec<_>>());
        let qs: f64 = self.q.iter().map(|x| abs(*x)).sum();
        (0..self.d.len())
            .map(|i| abs(self.alpha) * abs(self.d[i]) * k[i] + abs(self.beta) * abs(self.q[i]) * qs)
            .collect()
    }

    fn entry(&self, grid: &RadialGrid, i: usize, j: usize) -> f64 {
        let r = grid.nodes();
        let (lo, hi) = if r[i] < r[j] { (r[i], r[j]) } else { (r[j], r[i]) };
        let k = powi(lo / hi, self.l) / hi;
        self.alpha * self.d[i] * self.d[j] * k + self.beta * self.q[i] * self.q[j]
    }
}

/// One angular-momentum sector of `L_-`, `L_+` or `L+~`, acting on `sigma` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorOperator {
    l: u32,
    kind: OperatorKind,
    boundary: Boundary,
    grid: Arc<RadialGrid>,
    laplacian: SectorLaplacian,
    /// `-e - 2 V_i`.
    potential: Vec<f64>,
    nonlocal: Option<Nonlocal>,
    sigma_r: Vec<f64>,
}

/// Assembles a sector operator linearizing `sol`; rejects solutions whose
/// Euler–Lagrange residual exceeds `tol_el`.
pub fn assemble_sector(
    sol: &PekarSolution,
    l: u32,
    kind: OperatorKind,
    boundary: Boundary,
    tol_el: f64,
) -> Result<SectorOperator> {
    let residual = crate::solver::el_residual(sol);
    if !(residual <= tol_el) {
        return Err(Error::Unconverged {
            residual,
            tol: tol_el,
        });
    }
    Ok(build_sector(sol, l, kind, boundary))
}

pub(crate) fn build_sector(sol: &PekarSolution, l: u32, kind: OperatorKind, boundary: Boundary) -> SectorOperator {
    let grid = sol.grid().clone();
    let v = sol.potential();
    let e = sol.energy.e_phi;
    let potential = v.values().iter().map(|vi| -e - 2.0 * vi).collect();
    let sigma_r = sol.sigma();
    let c = FOUR_PI / (2 * l + 1) as f64 * grid.step();
    let nonlocal = match kind {
        OperatorKind::Lminus => None,
        OperatorKind::LplusTilde => Some(Nonlocal::new(&grid, l, -4.0 * c, 0.0, sigma_r.clone())),
        OperatorKind::Lplus => Some(Nonlocal::new(&grid, l, -4.0 * c, 4.0 * c, sigma_r.clone())),
    };
    SectorOperator {
        l,
        kind,
        boundary,
        laplacian: laplacian_sector(&grid, l, boundary),
        grid,
        potential,
        nonlocal,
        sigma_r,
    }
}

impl SectorOperator {
    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.potential.len()
    }

    /// `y = A sigma`.
    pub fn apply(&self, sigma: &[f64]) -> Vec<f64> {
        let mut y = self.laplacian.apply(sigma);
        for i in 0..y.len() {
            y[i] += self.potential[i] * sigma[i];
        }
        if let Some(nl) = &self.nonlocal {
            nl.add_to(sigma, &mut y);
        }
        y
    }

    /// Only the local part `-d^2/dr^2 + l(l+1)/r^2` applied to `sigma`.
    pub fn apply_laplacian(&self, sigma: &[f64]) -> Vec<f64> {
        self.laplacian.apply(sigma)
    }

    /// Entry `(i, j)` of the nonlocal part `-4 X_1 (+ 4 X_2)`; zero for `L_-`.
    pub fn nonlocal_entry(&self, i: usize, j: usize) -> f64 {
        self.nonlocal
            .as_ref()
            .map_or(0.0, |nl| nl.entry(&self.grid, i, j))
    }

    /// Entry `(i, j)` of `X^(l) = X_1^(l) - X_2^(l)` in `sigma` coordinates.
    pub fn x_kernel_entry(&self, i: usize, j: usize) -> f64 {
        let r = self.grid.nodes();
        let radius = self.grid.radius();
        let c = FOUR_PI / (2 * self.l + 1) as f64 * self.grid.step();
        let (lo, hi) = if r[i] < r[j] { (r[i], r[j]) } else { (r[j], r[i]) };
        let k1 = powi(lo / hi, self.l) / hi;
        let k2 = powi(r[i] / radius, self.l) * powi(r[j] / radius, self.l) / radius;
        c * self.sigma_r[i] * self.sigma_r[j] * (k1 - k2)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = self.laplacian.to_dense();
        for i in 0..self.dim() {
            m[(i, i)] += self.potential[i];
        }
        if self.nonlocal.is_some() {
            for i in 0..self.dim() {
                for j in 0..self.dim() {
                    m[(i, j)] += self.nonlocal_entry(i, j);
                }
            }
        }
        m
    }

    /// `<sigma | A sigma>` in the three-dimensional normalization `4 pi h`.
    pub fn quadratic_form(&self, sigma: &[f64]) -> f64 {
        FOUR_PI * self.grid.step() * num::dot(sigma, &self.apply(sigma))
    }

    fn factor(&self, shift: f64) -> Result<SectorFactor> {
        if self.boundary != Boundary::Dirichlet {
            return Err(Error::NeedsDirichlet);
        }
        let n = self.dim();
        let t = self.laplacian.tridiagonal();
        let (diag, off) = (t.diag(), t.off());
        let Some(nl) = &self.nonlocal else {
            let mut band = BandMatrix::zeros(n, 1, 1);
            for i in 0..n {
                band.add(i, i, diag[i] + self.potential[i] - shift);
                if i + 1 < n {
                    band.add(i, i + 1, off[i]);
                    band.add(i + 1, i, off[i]);
                }
            }
            return Ok(SectorFactor {
                n,
                lu: band.factor()?,
                augmented: false,
                image: None,
            });
        };
        let mut band = BandMatrix::zeros(3 * n, 3, 3);
        for i in 0..n {
            let (x, p, q) = (3 * i, 3 * i + 1, 3 * i + 2);
            band.add(x, x, diag[i] + self.potential[i] - shift);
            if i > 0 {
                band.add(x, x - 3, off[i - 1]);
            }
            if i + 1 < n {
                band.add(x, x + 3, off[i]);
            }
            band.add(x, p, nl.alpha * nl.d[i]);
            band.add(x, q, nl.alpha * nl.d[i]);
            // P_i - rho_i P_{i-1} - d_i x_i / r_i = 0
            band.add(p, p, 1.0);
            if i > 0 {
                band.add(p, p - 3, -nl.rho[i]);
            }
            band.add(p, x, -nl.d[i] * nl.inv_r[i]);
            // Q_i - tau_i Q_{i+1} - tau_i d_{i+1} x_{i+1} / r_{i+1} = 0
            band.add(q, q, 1.0);
            if i + 1 < n {
                band.add(q, q + 3, -nl.tau[i]);
                band.add(q, x + 3, -nl.tau[i] * nl.d[i + 1] * nl.inv_r[i + 1]);
            }
        }
        let lu = band.factor()?;
        let mut factor = SectorFactor {
            n,
            lu,
            augmented: true,
            image: None,
        };
        if nl.beta != 0.0 {
            let z = factor.solve_base(&nl.q);
            let denom = 1.0 + nl.beta * num::dot(&nl.q, &z);
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::Singular);
            }
            factor.image = Some((nl.q.clone(), z, nl.beta / denom));
        }
        Ok(factor)
    }
}

/// Factorization of a sector operator minus a shift.
#[derive(Debug, Clone)]
pub struct SectorFactor {
    n: usize,
    lu: BandLu,
    augmented: bool,
    /// `(q, (A0 - s)^{-1} q, beta / (1 + beta q.z))` for Sherman–Morrison.
    image: Option<(Vec<f64>, Vec<f64>, f64)>,
}

impl SectorFactor {
    fn solve_base(&self, b: &[f64]) -> Vec<f64> {
        if !self.augmented {
            return self.lu.solve(b);
        }
        let mut rhs = vec![0.0; 3 * self.n];
        for i in 0..self.n {
            rhs[3 * i] = b[i];
        }
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[3 * i]).collect()
    }
}

impl ShiftedSolve for SectorFactor {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = self.solve_base(b);
        if let Some((q, z, c)) = &self.image {
            let k = c * num::dot(q, &y);
            for (yi, zi) in y.iter_mut().zip(z) {
                *yi -= k * zi;
            }
        }
        y
    }
}

impl SymOperator for SectorOperator {
    type Factor = SectorFactor;

    fn dim(&self) -> usize {
        self.potential.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        SectorOperator::apply(self, x)
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        let t = self.laplacian.tridiagonal();
        let n = self.dim();
        let extra = self
            .nonlocal
            .as_ref()
            .map(|nl| nl.abs_row_sums())
            .unwrap_or_else(|| vec![0.0; n]);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = extra[i];
            if i > 0 {
                r += abs(t.off()[i - 1]);
            }
            if i + 1 < n {
                r += abs(t.off()[i]);
            }
            let d = t.diag()[i] + self.potential[i];
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    fn factor_shifted(&self, shift: f64) -> Result<SectorFactor> {
        self.factor(shift)
    }
}

/// `Q A Q` with `Q = 1 - |u><u|`, `u` the normalized `sigma_R`.
#[derive(Debug, Clone)]
pub struct ProjectedOperator {
    inner: SectorOperator,
    u: Vec<f64>,
}

impl ProjectedOperator {
    pub fn new(op: SectorOperator) -> Self {
        let nrm = num::norm2(&op.sigma_r);
        let u = op.sigma_r.iter().map(|x| x / nrm).collect();
        Self { inner: op, u }
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let c = num::dot(&self.u, x);
        x.iter().zip(&self.u).map(|(a, b)| a - c * b).collect()
    }

    /// Unit vector spanning the kernel of `Q`.
    pub fn zero_mode(&self) -> &[f64] {
        &self.u
    }
}

pub struct ProjectedFactor {
    base: SectorFactor,
    u: Vec<f64>,
    /// `(A - s)^{-1} u`.
    y2: Vec<f64>,
    u_y2: f64,
    shift: f64,
}

impl ShiftedSolve for ProjectedFactor {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        // on span{u}: -s x = b; on its complement: bordered solve
        let bu = num::dot(&self.u, b);
        let perp: Vec<f64> = b.iter().zip(&self.u).map(|(x, u)| x - bu * u).collect();
        let y1 = self.base.solve(&perp);
        let mu = -num::dot(&self.u, &y1) / self.u_y2;
        y1.iter()
            .zip(&self.y2)
            .zip(&self.u)
            .map(|((a, c), u)| a + mu * c - bu / self.shift * u)
            .collect()
    }
}

impl SymOperator for ProjectedOperator {
    type Factor = ProjectedFactor;

    fn dim(&self) -> usize {
        self.u.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.project(&self.inner.apply(&self.project(x)))
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.spectral_bounds();
        (lo.min(0.0), hi.max(0.0))
    }

    fn factor_shifted(&self, shift: f64) -> Result<ProjectedFactor> {
        let base = self.inner.factor(shift)?;
        let y2 = base.solve(&self.u);
        let u_y2 = num::dot(&self.u, &y2);
        if u_y2 == 0.0 || shift == 0.0 {
            return Err(Error::Singular);
        }
        Ok(ProjectedFactor {
            base,
            u: self.u.clone(),
            y2,
            u_y2,
            shift,
        })
    }
}

/// Splits `L_+ f = Lscript_+ f - sigma(f) phi_R` for a radial `f`, returning
/// `(Lscript_+ f, sigma(f))` with
/// `Lscript_+ f = L_- f + 4 phi_R int_{B_r} (1/|y| - 1/r) phi_R f dy` and
/// `sigma(f) = 4 int_{B_R} (1/|y| - 1/R) phi_R f dy`.
pub fn decompose_radial_lplus(
    sol: &PekarSolution,
    f: &RadialFunction,
    boundary: Boundary,
) -> Result<(RadialFunction, f64)> {
    crate::grid::check_same(&sol.phi, f)?;
    let grid = sol.grid().clone();
    let h = grid.step();
    let r = grid.nodes();
    let lminus = build_sector(sol, 0, OperatorKind::Lminus, boundary);
    let sf = f.sigma();
    let sr = sol.sigma();
    let mut out = lminus.apply(&sf);
    // 4 pi h sum_{j < i} sigma_R,j sigma_f,j (1/r_j - 1/r_i), accumulated as a - b / r_i
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..out.len() {
        let inner = FOUR_PI * h * (a - b / r[i]);
        out[i] += 4.0 * sr[i] * inner;
        let prod = sr[i] * sf[i];
        a += prod / r[i];
        b += prod;
    }
    let radius = grid.radius();
    let sigma_f = 4.0
        * FOUR_PI
        * h
        * sr.iter()
            .zip(&sf)
            .zip(r)
            .map(|((x, y), ri)| x * y * (1.0 / ri - 1.0 / radius))
            .sum::<f64>();
    Ok((RadialFunction::from_sigma(grid, &out)?, sigma_f))
}

/// Schur-test bound on `||X^(l)||`: the kernel is non-negative, so the
/// largest row sum bounds the operator norm.
pub fn x_norm_bound(sol: &PekarSolution, l: u32) -> f64 {
    let grid = sol.grid();
    let c = FOUR_PI / (2 * l + 1) as f64 * grid.step();
    let nl = Nonlocal::new(grid, l, c, -c, sol.sigma());
    let mut rows = vec![0.0; grid.len()];
    nl.add_to(&vec![1.0; grid.len()], &mut rows);
    rows.iter().fold(0.0f64, |m, x| m.max(*x))
}

/// Summary of one sector's lowest eigenpairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSpectrum {
    pub l: u32,
    pub kind: OperatorKind,
    pub eigenvalues: Vec<f64>,
    /// Ground eigenvector (Euclidean unit norm in `sigma`), sign fixed so its
    /// sum is non-negative.
    pub ground: Vec<f64>,
    /// `lambda_1 - lambda_0`.
    pub gap: f64,
    /// Largest residual relative to the operator norm bound.
    pub relative_residual: f64,
}

impl SectorSpectrum {
    pub fn bottom(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// True when no ground-state component has the wrong sign beyond
    /// `tol * max |v|`.
    pub fn ground_is_sign_definite(&self, tol: f64) -> bool {
        let m = num::max_abs(&self.ground);
        self.ground.iter().all(|&x| x >= -tol * m)
    }
}

fn summarize(l: u32, kind: OperatorKind, mut eig: Eigenpairs) -> SectorSpectrum {
    let mut ground = core::mem::take(&mut eig.vectors[0]);
    if ground.iter().sum::<f64>() < 0.0 {
        for x in ground.iter_mut() {
            *x = -*x;
        }
    }
    let gap = if eig.values.len() > 1 {
        eig.values[1] - eig.values[0]
    } else {
        f64::NAN
    };
    let worst = eig.residuals.iter().fold(0.0f64, |m, &r| m.max(r));
    SectorSpectrum {
        l,
        kind,
        gap,
        relative_residual: worst / eig.norm_bound,
        eigenvalues: eig.values,
        ground,
    }
}

/// `k` lowest eigenpairs of a Dirichlet sector operator.
pub fn sector_spectrum(op: &SectorOperator, k: usize) -> Result<SectorSpectrum> {
    if op.boundary != Boundary::Dirichlet {
        return Err(Error::NeedsDirichlet);
    }
    let eig = lowest_eigenpairs(op, k, EigenOptions::default())?;
    Ok(summarize(op.l, op.kind, eig))
}

/// Spectrum of `Q L_+^(0) Q` on the Dirichlet grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSpectrum {
    pub eigenvalues: Vec<f64>,
    /// `|<v_0 | phi_R>|` for the normalized lowest eigenvector.
    pub zero_mode_overlap: f64,
    /// First eigenvalue above the zero mode.
    pub first_positive: f64,
    pub relative_residual: f64,
}

pub fn projected_spectrum(sol: &PekarSolution, k: usize, tol_el: f64) -> Result<ProjectedSpectrum> {
    let op = assemble_sector(sol, 0, OperatorKind::Lplus, Boundary::Dirichlet, tol_el)?;
    let proj = ProjectedOperator::new(op);
    let eig = lowest_eigenpairs(&proj, k.max(2), EigenOptions::default())?;
    let overlap = abs(num::dot(&eig.vectors[0], proj.zero_mode()));
    let worst = eig.residuals.iter().fold(0.0f64, |m, &r| m.max(r));
    Ok(ProjectedSpectrum {
        first_positive: eig.values[1],
        zero_mode_overlap: overlap.min(1.0),
        relative_residual: worst / eig.norm_bound,
        eigenvalues: eig.values,
    })
}

/// `sigma` samples of `phi_R'` (i.e. `r phi_R' = sigma_R' - sigma_R / r`).
pub fn sigma_of_derivative(sol: &PekarSolution) -> Vec<f64> {
    let grid = sol.grid();
    let s = sol.sigma();
    let ds = dirichlet_sigma_derivative(grid, &s);
    s.iter()
        .zip(&ds)
        .zip(grid.nodes())
        .map(|((si, di), r)| di - si / r)
        .collect()
}

/// `sigma` samples of the dilation generator `2 phi_R + r phi_R'`
/// (i.e. `sigma_R + r sigma_R'`).
pub fn sigma_of_dilation(sol: &PekarSolution) -> Vec<f64> {
    let grid = sol.grid();
    let s = sol.sigma();
    let ds = dirichlet_sigma_derivative(grid, &s);
    s.iter()
        .zip(&ds)
        .zip(grid.nodes())
        .map(|((si, di), r)| si + r * di)
        .collect()
}

fn interior_len(grid: &RadialGrid) -> usize {
    // nodes with r <= R - 5h
    let n = grid.len();
    n.saturating_sub(5)
}

/// `||L+~^(1) phi_R'|| / ||(-d^2/dr^2 + 2/r^2) phi_R'||` on `r <= R - 5h`,
/// with the extended (boundary-free) operator.
pub fn derivative_kernel_residual(sol: &PekarSolution) -> f64 {
    let op = build_sector(sol, 1, OperatorKind::LplusTilde, Boundary::Extended);
    let f = sigma_of_derivative(sol);
    let y = op.apply(&f);
    let lap = op.apply_laplacian(&f);
    let m = interior_len(sol.grid());
    num::norm2(&y[..m]) / num::norm2(&lap[..m])
}

/// Applies the extended `L_+^(0)` to `2 phi_R + r phi_R'` and returns
/// `(off, total)`: the norm of the part orthogonal to `phi_R` and the norm
/// of the whole image, both on `r <= R - 5h`.
pub fn dilation_parallel_residual(sol: &PekarSolution) -> (f64, f64) {
    let op = build_sector(sol, 0, OperatorKind::Lplus, Boundary::Extended);
    let psi = sigma_of_dilation(sol);
    let y = op.apply(&psi);
    let m = interior_len(sol.grid());
    let s = sol.sigma();
    let c = num::dot(&y[..m], &s[..m]) / num::dot(&s[..m], &s[..m]);
    let off: Vec<f64> = y[..m].iter().zip(&s[..m]).map(|(a, b)| a - c * b).collect();
    (num::norm2(&off), num::norm2(&y[..m]))
}

/// Lowest eigenvalue of the Dirichlet `L+~^(1)` computed two ways: by the
/// eigensolver and by the boundary formula
/// `e1 = -phi'(R) phi_R'(R) R^2 / <phi | phi_R'>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCheck {
    pub e1_spectral: f64,
    pub e1_boundary: f64,
    /// `R phi'(R)` of the ground state.
    pub ground_slope: f64,
    /// `R phi_R'(R)`.
    pub solution_slope: f64,
    /// `int phi phi_R' r^2 dr`.
    pub overlap: f64,
}

pub fn boundary_eigenvalue_check(sol: &PekarSolution, tol_el: f64) -> Result<BoundaryCheck> {
    let op = assemble_sector(sol, 1, OperatorKind::LplusTilde, Boundary::Dirichlet, tol_el)?;
    let spec = sector_spectrum(&op, 2)?;
    let grid = sol.grid();
    let g = &spec.ground;
    let f = sigma_of_derivative(sol);
    let overlap = grid.step() * num::dot(g, &f);
    if abs(overlap) < 1e-8 * num::norm2(g) * num::norm2(&f) * grid.step() {
        return Err(Error::DegenerateOverlap(overlap));
    }
    let ground_slope = boundary_slope(grid, g);
    let solution_slope = boundary_slope(grid, &sol.sigma());
    Ok(BoundaryCheck {
        e1_spectral: spec.bottom(),
        e1_boundary: -ground_slope * solution_slope / overlap,
        ground_slope,
        solution_slope,
        overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_minimizer, Method, SolverOptions};

    fn solution(radius: f64, n: usize) -> PekarSolution {
        let g = RadialGrid::new(radius, n).unwrap();
        solve_minimizer(&g, Method::Scf, &SolverOptions::default()).unwrap()
    }

    #[test]
    fn structured_apply_matches_dense() {
        let sol = solution(1.5, 80);
        for l in [0, 1, 3] {
            for kind in [OperatorKind::Lminus, OperatorKind::Lplus, OperatorKind::LplusTilde] {
                for bc in [Boundary::Dirichlet, Boundary::Extended] {
                    let op = build_sector(&sol, l, kind, bc);
                    let x: Vec<f64> = (0..80).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.1).collect();
                    let a = op.apply(&x);
                    let b = op.to_dense().matvec(&x);
                    for (p, q) in a.iter().zip(&b) {
                        assert!((p - q).abs() < 1e-9 * (1.0 + q.abs()), "{l} {kind:?} {bc:?}");
                    }
                    if bc == Boundary::Dirichlet {
                        assert!(op.to_dense().max_asymmetry() <= 1e-12 * op.to_dense().max_abs());
                    }
                }
            }
        }
    }

    #[test]
    fn shifted_solve_inverts_the_operator() {
        let sol = solution(2.0, 200);
        for kind in [OperatorKind::Lminus, OperatorKind::Lplus, OperatorKind::LplusTilde] {
            let op = build_sector(&sol, 2, kind, Boundary::Dirichlet);
            let f = op.factor(-3.0).unwrap();
            let b: Vec<f64> = (0..200).map(|i| (i as f64 * 0.05).cos()).collect();
            let x = f.solve(&b);
            let back: Vec<f64> = op.apply(&x).iter().zip(&x).map(|(a, xi)| a + 3.0 * xi).collect();
            for (p, q) in back.iter().zip(&b) {
                assert!((p - q).abs() < 1e-8, "{kind:?}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn eigensolver_matches_dense_jacobi() {
        let sol = solution(1.0, 120);
        for (l, kind) in [(0, OperatorKind::Lminus), (0, OperatorKind::Lplus), (1, OperatorKind::LplusTilde), (2, OperatorKind::Lplus)] {
            let op = build_sector(&sol, l, kind, Boundary::Dirichlet);
            let spec = sector_spectrum(&op, 3).unwrap();
            let (dense, _) = op.to_dense().symmetric_eigen();
            for k in 0..3 {
                assert!((spec.eigenvalues[k] - dense[k]).abs() < 1e-8 * (1.0 + dense[k].abs()), "{l} {kind:?} {k}");
            }
        }
    }

    #[test]
    fn lminus_annihilates_the_minimizer() {
        let sol = solution(1.0, 400);
        let op = build_sector(&sol, 0, OperatorKind::Lminus, Boundary::Dirichlet);
        let s = sol.sigma();
        let r = op.apply(&s);
        assert!(num::norm2(&r) / num::norm2(&s) <= 10.0 * sol.el_residual.max(1e-12) * sol.energy.nu_phi);
        let spec = sector_spectrum(&op, 2).unwrap();
        assert!(spec.bottom().abs() < 1e-5);
        assert!(spec.gap > 0.0);
    }

    #[test]
    fn x_kernel_is_positive_for_higher_sectors() {
        let sol = solution(1.0, 60);
        for l in 1..4 {
            let op = build_sector(&sol, l, OperatorKind::Lplus, Boundary::Dirichlet);
            for i in 0..60 {
                for j in 0..60 {
                    assert!(op.x_kernel_entry(i, j) > 0.0);
                }
            }
        }
    }

    #[test]
    fn decomposition_reconstructs_lplus() {
        let sol = solution(1.0, 300);
        let g = sol.grid().clone();
        let f = RadialFunction::from_fn(g.clone(), |r| (3.0 * r).sin() + 0.2 * r * r).unwrap();
        let (ls, sig) = decompose_radial_lplus(&sol, &f, Boundary::Dirichlet).unwrap();
        let op = build_sector(&sol, 0, OperatorKind::Lplus, Boundary::Dirichlet);
        let direct = op.apply(&f.sigma());
        let recon: Vec<f64> = ls.sigma().iter().zip(sol.sigma()).map(|(a, b)| a - sig * b).collect();
        let scale = num::max_abs(&direct);
        for (p, q) in direct.iter().zip(&recon) {
            assert!((p - q).abs() <= 1e-10 * scale);
        }
        let (_, sig_phi) = decompose_radial_lplus(&sol, &sol.phi, Boundary::Dirichlet).unwrap();
        let i = sol.energy.i_phi;
        assert!((sig_phi - 4.0 * (i - 1.0)).abs() < 1e-10);
        let zero = RadialFunction::zeros(g);
        let (lz, sz) = decompose_radial_lplus(&sol, &zero, Boundary::Dirichlet).unwrap();
        assert!(lz.values().iter().all(|&x| x == 0.0) && sz == 0.0);
    }

    #[test]
    fn projector_is_idempotent() {
        let sol = solution(1.0, 100);
        let op = build_sector(&sol, 0, OperatorKind::Lplus, Boundary::Dirichlet);
        let p = ProjectedOperator::new(op);
        let x: Vec<f64> = (0..100).map(|i| (i as f64).sqrt()).collect();
        let once = p.project(&x);
        let twice = p.project(&once);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-12 * num::max_abs(&x));
        }
    }

    #[test]
    fn extended_identities_hold_in_the_interior() {
        let sol = solution(1.0, 1000);
        assert!(derivative_kernel_residual(&sol) < 1e-5);
        let (off, total) = dilation_parallel_residual(&sol);
        assert!(off < 1e-5 * total);
    }

    #[test]
    fn boundary_formula_matches_eigensolve() {
        let sol = solution(1.0, 1000);
        let c = boundary_eigenvalue_check(&sol, 1e-6).unwrap();
        assert!(c.e1_spectral > 0.0);
        assert!((c.e1_boundary - c.e1_spectral).abs() < 1e-4 * c.e1_spectral);
        assert!(c.overlap < 0.0 && c.solution_slope < 0.0);
    }

    #[test]
    fn unconverged_solutions_are_rejected() {
        let mut sol = solution(1.0, 200);
        let s: Vec<f64> = sol.sigma().iter().enumerate().map(|(i, x)| x * (1.0 + 0.01 * (i % 3) as f64)).collect();
        sol.phi = RadialFunction::from_sigma(sol.grid().clone(), &s).unwrap();
        let r = assemble_sector(&sol, 0, OperatorKind::Lminus, Boundary::Dirichlet, 1e-6);
        assert!(matches!(r, Err(Error::Unconverged { .. })));
    }

    #[test]
    fn extended_operators_have_no_spectrum() {
        let sol = solution(1.0, 100);
        let op = build_sector(&sol, 1, OperatorKind::Lplus, Boundary::Extended);
        assert_eq!(sector_spectrum(&op, 1), Err(Error::NeedsDirichlet));
    }
}
