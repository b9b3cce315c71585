//! Cell-centered radial grids, quadrature and the radial Laplacian sectors.
//!
//! A grid of radius `R` with `N` cells has nodes at the cell centers
//! `r_i = (i + 1/2) h`, `h = R / N`. Functions are stored as samples `f(r_i)`;
//! most operators work on `sigma = r f`, in which the radial measure `r^2 dr`
//! becomes `dr` and every quadrature weight equals `h`. The boundary values
//! `sigma(0) = 0` and (for Dirichlet functions) `sigma(R) = 0` sit half a cell
//! outside the first and last node and enter through ghost values.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::linalg::{DenseMatrix, SymTridiagonal};
use crate::num::{self, FOUR_PI};
use crate::{Error, Result};

/// Smallest admissible cell count.
pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    radius: f64,
    cells: usize,
    step: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Uniform cell-centered grid on `[0, radius]` with `cells` nodes.
    pub fn new(radius: f64, cells: usize) -> Result<Arc<Self>> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid("radius must be positive and finite"));
        }
        if cells < MIN_CELLS {
            return Err(Error::InvalidGrid("at least 16 cells are required"));
        }
        let step = radius / cells as f64;
        let nodes: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * step).collect();
        let weights = nodes.iter().map(|r| step * r * r).collect();
        Ok(Arc::new(Self {
            radius,
            cells,
            step,
            nodes,
            weights,
        }))
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Midpoint weights for `int_0^R f(r) r^2 dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `int_0^R f r^2 dr` for node samples `f`.
    pub fn integrate_r2(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// `int_0^R g dr` for node samples `g`.
    pub fn integrate_dr(&self, g: &[f64]) -> f64 {
        self.step * g.iter().sum::<f64>()
    }

    /// Same radius and cell count.
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.cells == other.cells && self.radius == other.radius
    }

    /// Index of the last node with `r_i <= r`, if any.
    pub fn last_node_below(&self, r: f64) -> Option<usize> {
        if r < self.nodes[0] {
            return None;
        }
        let k = num::floor((r / self.step) - 0.5) as usize;
        Some(k.min(self.cells - 1))
    }
}

/// Real radial profile sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = alloc::vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    /// Builds `f = sigma / r` from samples of `sigma = r f`.
    pub fn from_sigma(grid: Arc<RadialGrid>, sigma: &[f64]) -> Result<Self> {
        if sigma.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let values = sigma.iter().zip(grid.nodes()).map(|(s, r)| s / r).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Samples of `sigma = r f`.
    pub fn sigma(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(self.grid.nodes())
            .map(|(v, r)| v * r)
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &RadialFunction) -> Result<Self> {
        check_same(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
        })
    }

    /// `||f||_2` with the three-dimensional volume measure.
    pub fn norm(&self) -> f64 {
        num::sqrt(inner_unchecked(self, self))
    }

    /// `||f||_p^p` with the three-dimensional volume measure.
    pub fn norm_pow(&self, p: u32) -> f64 {
        FOUR_PI
            * self
                .values
                .iter()
                .zip(self.grid.weights())
                .map(|(v, w)| w * num::powi(num::abs(*v), p))
                .sum::<f64>()
    }

    /// Scales to unit `L^2` norm; a zero function is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.scaled(1.0 / n)
        } else {
            self.clone()
        }
    }
}

/// Complex radial profile, kept as real and imaginary parts on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexRadial {
    pub re: RadialFunction,
    pub im: RadialFunction,
}

impl ComplexRadial {
    pub fn new(re: RadialFunction, im: RadialFunction) -> Result<Self> {
        check_same(&re, &im)?;
        Ok(Self { re, im })
    }

    pub fn real(re: RadialFunction) -> Self {
        let im = RadialFunction::zeros(re.grid().clone());
        Self { re, im }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.re.grid()
    }

    /// Multiplies by `e^{i theta}`.
    pub fn rotated(&self, theta: f64) -> Self {
        let (c, s) = (num::cos(theta), num::sin(theta));
        let re = self
            .re
            .values()
            .iter()
            .zip(self.im.values())
            .map(|(a, b)| c * a - s * b)
            .collect();
        let im = self
            .re
            .values()
            .iter()
            .zip(self.im.values())
            .map(|(a, b)| s * a + c * b)
            .collect();
        Self {
            re: RadialFunction {
                grid: self.grid().clone(),
                values: re,
            },
            im: RadialFunction {
                grid: self.grid().clone(),
                values: im,
            },
        }
    }

    pub fn norm(&self) -> f64 {
        num::sqrt(inner_unchecked(&self.re, &self.re) + inner_unchecked(&self.im, &self.im))
    }

    /// `|psi|^2` at the nodes.
    pub fn density(&self) -> Vec<f64> {
        self.re
            .values()
            .iter()
            .zip(self.im.values())
            .map(|(a, b)| a * a + b * b)
            .collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            re: self.re.scaled(c),
            im: self.im.scaled(c),
        }
    }
}

pub(crate) fn check_same(f: &RadialFunction, g: &RadialFunction) -> Result<()> {
    if Arc::ptr_eq(&f.grid, &g.grid) || f.grid.same_as(&g.grid) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn inner_unchecked(f: &RadialFunction, g: &RadialFunction) -> f64 {
    FOUR_PI
        * f.values
            .iter()
            .zip(&g.values)
            .zip(f.grid.weights())
            .map(|((a, b), w)| a * b * w)
            .sum::<f64>()
}

/// `<f|g> = 4 pi int_0^R f g r^2 dr`, the `L^2(B_R)` pairing of radial functions.
pub fn inner(f: &RadialFunction, g: &RadialFunction) -> Result<f64> {
    check_same(f, g)?;
    Ok(inner_unchecked(f, g))
}

/// Treatment of the outer boundary `r = R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// `sigma(R) = 0` through an antisymmetric ghost value.
    Dirichlet,
    /// No boundary condition: the ghost value is extrapolated with a cubic,
    /// which turns the last row into a one-sided second difference.
    Extended,
}

/// `-d^2/dr^2 + l(l+1)/r^2` acting on `sigma = r f` in angular momentum sector `l`.
///
/// The ghost value below the origin carries the parity `(-1)^{l+1}` of
/// `sigma ~ r^{l+1}`, so the first row is exact on the leading behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorLaplacian {
    l: u32,
    boundary: Boundary,
    step: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Discrete radial Laplacian of sector `l` with the given boundary treatment.
pub fn laplacian_sector(grid: &RadialGrid, l: u32, boundary: Boundary) -> SectorLaplacian {
    let n = grid.len();
    let h2 = grid.step() * grid.step();
    let centrifugal = (l * (l + 1)) as f64;
    let mut diag: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|r| 2.0 / h2 + centrifugal / (r * r))
        .collect();
    // sigma(-r) = (-1)^{l+1} sigma(r)
    let parity = if l.is_multiple_of(2) { -1.0 } else { 1.0 };
    diag[0] -= parity / h2;
    if boundary == Boundary::Dirichlet {
        diag[n - 1] += 1.0 / h2;
    }
    let off = alloc::vec![-1.0 / h2; n - 1];
    SectorLaplacian {
        l,
        boundary,
        step: grid.step(),
        diag,
        off,
    }
}

impl SectorLaplacian {
    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Symmetric tridiagonal part; for `Extended` the one-sided corrections
    /// in the last row are not included.
    pub fn tridiagonal(&self) -> SymTridiagonal {
        SymTridiagonal::new(self.diag.clone(), self.off.clone())
    }

    /// `y = A sigma`.
    pub fn apply(&self, sigma: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = self.tridiagonal().matvec(sigma);
        if self.boundary == Boundary::Extended && n >= 4 {
            let h2 = self.step * self.step;
            let ghost = 4.0 * sigma[n - 1] - 6.0 * sigma[n - 2] + 4.0 * sigma[n - 3] - sigma[n - 4];
            y[n - 1] -= ghost / h2;
        }
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = self.tridiagonal().to_dense();
        if self.boundary == Boundary::Extended && n >= 4 {
            let h2 = self.step * self.step;
            let row = n - 1;
            m[(row, n - 1)] -= 4.0 / h2;
            m[(row, n - 2)] += 6.0 / h2;
            m[(row, n - 3)] -= 4.0 / h2;
            m[(row, n - 4)] += 1.0 / h2;
        }
        m
    }
}

/// Fourth-order central derivative of `sigma` at the nodes, using odd ghost
/// values of a Dirichlet `l = 0` profile at both ends (exact at the origin,
/// where `sigma` is odd; `O(h^4)` ghosts at `R`, where `sigma'' = 0`).
pub(crate) fn dirichlet_sigma_derivative(grid: &RadialGrid, sigma: &[f64]) -> Vec<f64> {
    let n = sigma.len() as isize;
    let h = grid.step();
    let at = |k: isize| -> f64 {
        if k < 0 {
            -sigma[(-k - 1) as usize]
        } else if k >= n {
            -sigma[(2 * n - 1 - k) as usize]
        } else {
            sigma[k as usize]
        }
    };
    (0..n)
        .map(|i| (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h))
        .collect()
}

/// `sigma'(R)` of a Dirichlet profile, central in the ghost cell around `R`.
pub(crate) fn boundary_slope(grid: &RadialGrid, sigma: &[f64]) -> f64 {
    -2.0 * sigma[sigma.len() - 1] / grid.step()
}
