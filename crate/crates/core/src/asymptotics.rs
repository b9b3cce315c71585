//! Large-radius behaviour: sweeps of the minimizer over `R`, extrapolation of
//! the limiting energy, cutoff trial states and the Newton shift between the
//! ball and full-space interactions.

use alloc::vec::Vec;

use crate::functional::{energy, interaction, newton_interaction_direct, EnergyBreakdown, Variant};
use crate::grid::{RadialFunction, RadialGrid};
use crate::num::{abs, exp, ln, sqrt};
use crate::solver::{solve_minimizer, Method, PekarSolution, SolverOptions};
use crate::{Error, Result};

/// Default nodes per unit length in a sweep.
pub const DEFAULT_DENSITY: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub radius: f64,
    pub e_r: f64,
    pub e_tilde: f64,
    pub phi0: f64,
    pub nu: f64,
    pub e_phi: f64,
    pub dphi_at_r: f64,
}

impl SweepRow {
    pub fn of(sol: &PekarSolution) -> Self {
        Self {
            radius: sol.radius(),
            e_r: sol.energy.e,
            e_tilde: sol.energy_tilde(),
            phi0: sol.phi.values()[0],
            nu: sol.energy.nu_phi,
            e_phi: sol.energy.e_phi,
            dphi_at_r: sol.dphi_at_r,
        }
    }
}

/// Cells for `radius` at `density` nodes per unit length.
pub fn cells_for(radius: f64, density: f64) -> usize {
    let n = radius * density;
    if n.is_finite() && n >= 0.0 {
        (n + 0.5) as usize
    } else {
        0
    }
}

/// Solves one row of a sweep.
pub fn solve_row(radius: f64, density: f64, method: Method, opts: &SolverOptions) -> Result<(SweepRow, PekarSolution)> {
    let grid = RadialGrid::new(radius, cells_for(radius, density))?;
    let sol = solve_minimizer(&grid, method, opts)?;
    Ok((SweepRow::of(&sol), sol))
}

/// Rows for an increasing list of radii; a failed row does not stop the sweep.
pub fn sweep(radii: &[f64], density: f64, method: Method, opts: &SolverOptions) -> Result<Vec<Result<SweepRow>>> {
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("radii must be strictly increasing"));
    }
    Ok(radii
        .iter()
        .map(|&r| solve_row(r, density, method, opts).map(|(row, _)| row))
        .collect())
}

/// Checks over a completed sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepChecks {
    pub e_decreasing: bool,
    pub e_tilde_decreasing: bool,
    /// `max |E_R - E~_R - 1/R|`.
    pub shift_identity: f64,
}

pub fn check_sweep(rows: &[SweepRow]) -> SweepChecks {
    SweepChecks {
        e_decreasing: rows.windows(2).all(|w| w[1].e_r < w[0].e_r),
        e_tilde_decreasing: rows.windows(2).all(|w| w[1].e_tilde < w[0].e_tilde),
        shift_identity: rows
            .iter()
            .map(|r| abs(r.e_r - r.e_tilde - 1.0 / r.radius))
            .fold(0.0, f64::max),
    }
}

/// Limit estimate from the model `E~_R = E_inf + c exp(-beta R)`, fitted in
/// log space: `ln(E~_R - E_inf) = ln c - beta R`. Relative residuals keep the
/// pre-asymptotic small-radius rows from dominating the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub e_inf: f64,
    /// Log-space RMS residual scaled by the tail `E~ - E_inf` at the largest
    /// radius (zero for an exactly determined fit).
    pub error_bar: f64,
    pub amplitude: f64,
    pub beta: f64,
}

/// Linear least squares of `z = a - beta R` ; returns `(a, beta, ssr)`.
fn log_tail_fit(r: &[f64], z: &[f64]) -> (f64, f64, f64) {
    let n = r.len() as f64;
    let mr = r.iter().sum::<f64>() / n;
    let mz = z.iter().sum::<f64>() / n;
    let srr: f64 = r.iter().map(|x| (x - mr) * (x - mr)).sum();
    let srz: f64 = r.iter().zip(z).map(|(x, y)| (x - mr) * (y - mz)).sum();
    let slope = srz / srr;
    let a = mz - slope * mr;
    let ssr = r.iter().zip(z).map(|(x, y)| (y - a - slope * x) * (y - a - slope * x)).sum();
    (a, -slope, ssr)
}

pub fn extrapolate_einf(rows: &[SweepRow]) -> Result<Extrapolation> {
    if rows.len() < 3 {
        return Err(Error::TooFewRows {
            needed: 3,
            got: rows.len(),
        });
    }
    if rows
        .windows(2)
        .any(|w| !(w[0].radius < w[1].radius) || w[1].e_tilde > w[0].e_tilde)
    {
        return Err(Error::NonMonotoneRows);
    }
    let r: Vec<f64> = rows.iter().map(|x| x.radius).collect();
    let y: Vec<f64> = rows.iter().map(|x| x.e_tilde).collect();
    let floor = y[y.len() - 1];
    let range = y[0] - floor;
    if range == 0.0 {
        return Ok(Extrapolation {
            e_inf: floor,
            error_bar: 0.0,
            amplitude: 0.0,
            beta: 0.0,
        });
    }
    // E_inf = floor - exp(d); scan d, then golden-section refinement
    let cost = |d: f64| {
        let e_inf = floor - exp(d);
        let z: Vec<f64> = y.iter().map(|v| ln(v - e_inf)).collect();
        // scale-free (1 - R^2): the raw residual vanishes as E_inf -> -inf
        let mz = z.iter().sum::<f64>() / z.len() as f64;
        let var: f64 = z.iter().map(|v| (v - mz) * (v - mz)).sum();
        log_tail_fit(&r, &z).2 / var
    };
    let (lo, hi) = (ln(range) - 40.0, ln(range) + 3.0);
    let steps = 2000;
    let mut best = lo;
    let mut best_cost = f64::INFINITY;
    for k in 0..=steps {
        let t = lo + (hi - lo) * k as f64 / steps as f64;
        let c = cost(t);
        if c < best_cost {
            best_cost = c;
            best = t;
        }
    }
    let d = (hi - lo) / steps as f64;
    let (mut a, mut b) = ((best - d).max(lo), (best + d).min(hi));
    let g = (sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..100 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
    }
    let dstar = (a + b) / 2.0;
    let e_inf = floor - exp(dstar);
    let z: Vec<f64> = y.iter().map(|v| ln(v - e_inf)).collect();
    let (ln_c, beta, ssr) = log_tail_fit(&r, &z);
    let dof = rows.len() - 3;
    let error_bar = if dof == 0 {
        0.0
    } else {
        sqrt(ssr / dof as f64) * (floor - e_inf)
    };
    Ok(Extrapolation {
        e_inf,
        error_bar,
        amplitude: exp(ln_c),
        beta,
    })
}

/// `eta_R`: 1 on `B_{R/2}`, linear down to 0 at `R`.
pub fn cutoff(radius: f64, r: f64) -> f64 {
    if r <= radius / 2.0 {
        1.0
    } else if r >= radius {
        0.0
    } else {
        2.0 * (1.0 - r / radius)
    }
}

/// `eta_R Psi` on `B_R`, with `Psi` the large-ball minimizer linearly
/// interpolated (in `sigma`) onto a grid of the same step.
pub fn cutoff_state(sol_big: &PekarSolution, radius: f64) -> Result<RadialFunction> {
    let big = sol_big.grid();
    if !(radius > 0.0 && radius <= big.radius()) {
        return Err(Error::InvalidArgument("cutoff radius must lie in (0, R_big]"));
    }
    let cells = ((radius / big.step()) + 0.5) as usize;
    let grid = RadialGrid::new(radius, cells)?;
    let s = sol_big.sigma();
    let h = big.step();
    let sigma_at = |r: f64| {
        let x = r / h - 0.5;
        if x <= 0.0 {
            return s[0] * r / big.nodes()[0];
        }
        let i = x as usize;
        if i + 1 >= s.len() {
            return s[s.len() - 1];
        }
        let t = x - i as f64;
        s[i] * (1.0 - t) + s[i + 1] * t
    };
    RadialFunction::from_fn(grid, |r| sigma_at(r) / r * cutoff(radius, r))
}

/// Raw energy of `eta_R Psi` on `B_R` (no renormalization).
pub fn cutoff_energy(sol_big: &PekarSolution, radius: f64) -> Result<EnergyBreakdown> {
    Ok(energy(&cutoff_state(sol_big, radius)?, Variant::BallGreen))
}

/// `|W_R(psi) - W(psi) + ||psi||^4 / R|` for `psi` vanishing at every node
/// beyond `support`; the full-space `W` is the direct pair sum.
pub fn newton_shift_check(psi: &RadialFunction, support: f64) -> Result<f64> {
    let grid = psi.grid();
    if !(support > 0.0 && support <= grid.radius()) {
        return Err(Error::SupportViolation);
    }
    if grid
        .nodes()
        .iter()
        .zip(psi.values())
        .any(|(r, v)| *r > support && *v != 0.0)
    {
        return Err(Error::SupportViolation);
    }
    let m = psi.norm_pow(2);
    Ok(abs(interaction(psi) - newton_interaction_direct(psi) + m * m / grid.radius()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(radius: f64, e_tilde: f64) -> SweepRow {
        SweepRow {
            radius,
            e_r: e_tilde + 1.0 / radius,
            e_tilde,
            phi0: 0.0,
            nu: 0.0,
            e_phi: 0.0,
            dphi_at_r: 0.0,
        }
    }

    #[test]
    fn exact_model_is_recovered() {
        let rows: Vec<SweepRow> = [2.0, 4.0, 8.0, 12.0, 16.0]
            .iter()
            .map(|&r| row(r, -0.1 + 0.3 * exp(-0.7 * r)))
            .collect();
        let x = extrapolate_einf(&rows).unwrap();
        assert!((x.e_inf + 0.1).abs() < 1e-9, "{x:?}");
        assert!((x.beta - 0.7).abs() < 1e-5);
        assert!(x.error_bar < 1e-9);
    }

    #[test]
    fn degenerate_and_short_inputs() {
        let rows = [row(1.0, -0.5), row(2.0, -0.5), row(3.0, -0.5)];
        let x = extrapolate_einf(&rows).unwrap();
        assert_eq!(x.e_inf, -0.5);
        assert_eq!(x.error_bar, 0.0);
        assert_eq!(extrapolate_einf(&rows[..2]), Err(Error::TooFewRows { needed: 3, got: 2 }));
        let bad = [row(1.0, -0.5), row(2.0, -0.4), row(3.0, -0.6)];
        assert_eq!(extrapolate_einf(&bad), Err(Error::NonMonotoneRows));
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(4.0, 1.0), 1.0);
        assert_eq!(cutoff(4.0, 3.0), 0.5);
        assert_eq!(cutoff(4.0, 4.0), 0.0);
    }

    #[test]
    fn newton_shift_on_a_bump() {
        let g = RadialGrid::new(1.0, 800).unwrap();
        let bump = RadialFunction::from_fn(g.clone(), |r| if r < 0.5 { (1.0 - 4.0 * r * r).powi(2) } else { 0.0 })
            .unwrap()
            .normalized();
        assert!(newton_shift_check(&bump, 0.5).unwrap() < 1e-8);
        let doubled = bump.scaled(2.0);
        let shift = newton_interaction_direct(&doubled) - interaction(&doubled);
        assert!((shift - 16.0).abs() < 1e-9);
        assert_eq!(newton_shift_check(&bump, 0.25), Err(Error::SupportViolation));
    }
}
