//! The Pekar energy `E_R = T_R - W_R` and the fields derived from it.
//!
//! Nonlocal terms never touch a two-dimensional kernel: for radial densities
//! Newton's theorem reduces the Dirichlet Green kernel of the ball to
//! `1/max(r, s) - 1/R`, and every integral becomes a prefix sum.
//!
//! On the cell-centered grid this reduction is exact at the discrete level:
//! [`green_apply`] is the inverse of the Dirichlet `l = 0` sector Laplacian
//! (times `4 pi`), so the discrete energy is itself a variational problem whose
//! Euler–Lagrange equation is the discrete radial equation used by the solver.

use alloc::vec::Vec;

use crate::grid::{laplacian_sector, Boundary, ComplexRadial, RadialFunction};
use crate::num::{self, FOUR_PI};
use crate::RadialGrid;

/// Which interaction kernel the energy uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `4 pi (-Delta_{B_R})^{-1}`, the screened kernel of the ball.
    BallGreen,
    /// The unscreened Newton kernel `1/|x - y|` restricted to the ball.
    FullSpaceKernel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub t: f64,
    pub w: f64,
    /// `t - w`.
    pub e: f64,
    /// `t - 2 w`.
    pub e_phi: f64,
    /// `e_phi + 2 i_phi - 2/R` for the ball kernel, `e_phi + 2 i_phi` for the
    /// full-space kernel.
    pub nu_phi: f64,
    /// `int |phi|^2 / |x| dx`.
    pub i_phi: f64,
    pub variant: Variant,
}

impl EnergyBreakdown {
    fn assemble(t: f64, w_ball: f64, mass: f64, i_phi: f64, radius: f64, variant: Variant) -> Self {
        let w = match variant {
            Variant::BallGreen => w_ball,
            Variant::FullSpaceKernel => w_ball + mass * mass / radius,
        };
        let e_phi = t - 2.0 * w;
        let nu_phi = match variant {
            Variant::BallGreen => e_phi + 2.0 * i_phi - 2.0 / radius,
            Variant::FullSpaceKernel => e_phi + 2.0 * i_phi,
        };
        Self {
            t,
            w,
            e: t - w,
            e_phi,
            nu_phi,
            i_phi,
            variant,
        }
    }
}

/// `v = 4 pi (-Delta_{B_R})^{-1} rho` for a radial density:
/// `v(r) = (1/r) int_0^r 4 pi s^2 rho + int_r^R 4 pi s rho - (1/R) int_0^R 4 pi s^2 rho`.
pub fn green_apply(rho: &RadialFunction) -> RadialFunction {
    let v = green_values(rho.grid(), rho.values());
    RadialFunction::new(rho.grid().clone(), v).expect("finite density gives finite potential")
}

pub(crate) fn green_values(grid: &RadialGrid, rho: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let h = grid.step();
    let r = grid.nodes();
    let c = FOUR_PI * h;
    let total: f64 = (0..n).map(|j| rho[j] * r[j] * r[j]).sum();
    let mut out = alloc::vec![0.0; n];
    // outer shells: sum_{j > i} rho_j r_j
    let mut outer = 0.0;
    for i in (0..n).rev() {
        out[i] = outer;
        outer += rho[i] * r[i];
    }
    let mut enclosed = 0.0;
    for i in 0..n {
        enclosed += rho[i] * r[i] * r[i];
        out[i] = c * (enclosed / r[i] + out[i] - total / grid.radius());
    }
    out
}

/// `V_phi = green_apply(|phi|^2)`.
pub fn potential(phi: &RadialFunction) -> RadialFunction {
    green_apply(&phi.map(|v| v * v))
}

/// `U_phi(r) = int_0^r 4 pi s^2 (1/s - 1/r) |phi(s)|^2 ds` at the nodes.
pub fn u_of(phi: &RadialFunction) -> RadialFunction {
    let grid = phi.grid();
    let h = grid.step();
    let r = grid.nodes();
    let mut a = 0.0; // sum sigma^2 / r
    let mut b = 0.0; // sum sigma^2
    let values = phi
        .values()
        .iter()
        .zip(r)
        .map(|(&p, &ri)| {
            let u = FOUR_PI * h * (a - b / ri);
            let s2 = p * p * ri * ri;
            a += s2 / ri;
            b += s2;
            u
        })
        .collect();
    RadialFunction::new(grid.clone(), values).expect("finite profile gives finite U")
}

/// `U_phi` at an arbitrary radius, summing the cells whose centers lie below `r`.
pub fn u_of_at(phi: &RadialFunction, r: f64) -> f64 {
    let grid = phi.grid();
    let h = grid.step();
    let mut acc = 0.0;
    for (&p, &s) in phi.values().iter().zip(grid.nodes()) {
        if s >= r {
            break;
        }
        acc += p * p * s * s * (1.0 / s - 1.0 / r);
    }
    FOUR_PI * h * acc
}

/// `I(phi) = int |phi|^2 / |x| dx`.
pub fn coulomb_moment(phi: &RadialFunction) -> f64 {
    density_moment(phi.grid(), &phi.map(|v| v * v).into_values())
}

fn density_moment(grid: &RadialGrid, rho: &[f64]) -> f64 {
    FOUR_PI
        * rho
            .iter()
            .zip(grid.weights())
            .zip(grid.nodes())
            .map(|((p, w), r)| p * w / r)
            .sum::<f64>()
}

/// `T_R(phi) = int |grad phi|^2 dx` for a Dirichlet profile, as
/// `4 pi h sigma^T L_0 sigma` with the `l = 0` sector Laplacian.
pub fn kinetic(phi: &RadialFunction) -> f64 {
    let grid = phi.grid();
    let sigma = phi.sigma();
    let lap = laplacian_sector(grid, 0, Boundary::Dirichlet);
    FOUR_PI * grid.step() * num::dot(&sigma, &lap.apply(&sigma))
}

/// `W_R` of a density, `<rho | green_apply(rho)>`.
fn interaction_of_density(grid: &RadialGrid, rho: &[f64]) -> f64 {
    let v = green_values(grid, rho);
    FOUR_PI
        * rho
            .iter()
            .zip(&v)
            .zip(grid.weights())
            .map(|((p, q), w)| p * q * w)
            .sum::<f64>()
}

/// `W_R(phi)` with the ball kernel.
pub fn interaction(phi: &RadialFunction) -> f64 {
    interaction_of_density(phi.grid(), &phi.map(|v| v * v).into_values())
}

/// Energy of a real radial profile; no normalization is assumed.
pub fn energy(phi: &RadialFunction, variant: Variant) -> EnergyBreakdown {
    let grid = phi.grid();
    let rho: Vec<f64> = phi.values().iter().map(|v| v * v).collect();
    EnergyBreakdown::assemble(
        kinetic(phi),
        interaction_of_density(grid, &rho),
        grid.integrate_r2(&rho) * FOUR_PI,
        density_moment(grid, &rho),
        grid.radius(),
        variant,
    )
}

/// Energy of a complex radial profile; depends on the phase only through `|psi|`
/// in the interaction, so a global phase leaves every field unchanged.
pub fn energy_complex(psi: &ComplexRadial, variant: Variant) -> EnergyBreakdown {
    let grid = psi.grid();
    let rho = psi.density();
    EnergyBreakdown::assemble(
        kinetic(&psi.re) + kinetic(&psi.im),
        interaction_of_density(grid, &rho),
        grid.integrate_r2(&rho) * FOUR_PI,
        density_moment(grid, &rho),
        grid.radius(),
        variant,
    )
}

/// Unscreened Newton interaction `int int rho(x) rho(y) / |x - y|` of a radial
/// density, summed pair by pair over shells (`O(N^2)`, independent of the
/// prefix sums in [`green_apply`]).
pub fn newton_interaction_direct(psi: &RadialFunction) -> f64 {
    let grid = psi.grid();
    let r = grid.nodes();
    let w = grid.weights();
    let q: Vec<f64> = psi
        .values()
        .iter()
        .zip(w)
        .map(|(v, wi)| FOUR_PI * wi * v * v)
        .collect();
    let n = q.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.5 * q[i] / r[i];
        for j in 0..i {
            row += q[j] / r[i];
        }
        acc += 2.0 * q[i] * row;
    }
    acc
}
