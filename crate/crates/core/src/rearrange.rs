//! Symmetric decreasing rearrangement of radial samples and numerical checks
//! of the inequalities it satisfies (Talenti, Hardy–Littlewood, Riesz-type
//! monotonicity of the interaction, Pólya–Szegő).
//!
//! A grid function is read as a step function that is constant on each cell,
//! with the cell carrying the quadrature mass `4 pi h r_i^2`. Sorting the
//! cells by value and laying them out from the origin in that volume
//! coordinate gives the rearrangement exactly; sampling it back onto the grid
//! takes cell averages, which is the identity on already decreasing input.

use alloc::vec;
use alloc::vec::Vec;

use crate::functional::{green_apply, interaction, kinetic};
use crate::grid::{RadialFunction, RadialGrid};
use crate::num::{abs, powi, PI};

/// Outcome of one inequality check; `max_violation` is the most positive
/// value of the quantity that the inequality says is `<= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RearrangementReport {
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl RearrangementReport {
    pub fn new(max_violation: f64, tolerance: f64) -> Self {
        Self {
            max_violation,
            tolerance,
            pass: max_violation <= tolerance,
        }
    }
}

/// Decreasing step function in the volume coordinate: `levels[k]` on an
/// interval of measure `masses[k]`, laid out from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    levels: Vec<f64>,
    masses: Vec<f64>,
}

fn cell_masses(grid: &RadialGrid) -> Vec<f64> {
    grid.weights().iter().map(|w| 4.0 * PI * w).collect()
}

impl Distribution {
    /// Sorted `|f|` with the masses of the cells the values came from.
    pub fn of(f: &RadialFunction) -> Self {
        let masses = cell_masses(f.grid());
        let mut idx: Vec<usize> = (0..masses.len()).collect();
        // stable, so equal values keep their radial order
        idx.sort_by(|&a, &b| abs(f.values()[b]).total_cmp(&abs(f.values()[a])));
        Self {
            levels: idx.iter().map(|&i| abs(f.values()[i])).collect(),
            masses: idx.iter().map(|&i| masses[i]).collect(),
        }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `int |f|^p` of the step function; equal to the same sum over the
    /// original cells up to summation order.
    pub fn integral_pow(&self, p: u32) -> f64 {
        self.levels.iter().zip(&self.masses).map(|(v, m)| m * powi(*v, p)).sum()
    }

    /// Measure of `{ value > t }`.
    pub fn measure_above(&self, t: f64) -> f64 {
        self.levels
            .iter()
            .zip(&self.masses)
            .take_while(|(v, _)| **v > t)
            .map(|(_, m)| m)
            .sum()
    }

    /// Cell averages of the step function on the grid's cells.
    pub fn to_grid(&self, grid: &RadialGrid) -> Vec<f64> {
        let cells = cell_masses(grid);
        let mut out = vec![0.0; cells.len()];
        let (mut k, mut used) = (0usize, 0.0f64);
        for (i, &cell) in cells.iter().enumerate() {
            let mut left = cell;
            let mut acc = 0.0;
            let mut first = None;
            let mut last = 0.0;
            let mut parts = 0;
            while left > 0.0 && k < self.levels.len() {
                let avail = self.masses[k] - used;
                let take = avail.min(left);
                acc += take * self.levels[k];
                first.get_or_insert(self.levels[k]);
                last = self.levels[k];
                parts += 1;
                left -= take;
                used += take;
                // tolerate rounding in the running totals
                if self.masses[k] - used <= 1e-14 * self.masses[k] {
                    k += 1;
                    used = 0.0;
                }
                if left <= 1e-14 * cell {
                    break;
                }
            }
            // clamping to the contributing levels keeps rounding from
            // breaking monotonicity between neighbouring cells
            out[i] = match (parts, first) {
                (1, Some(v)) => v,
                (_, Some(hi)) => (acc / cell).clamp(last, hi),
                _ => 0.0,
            };
        }
        out
    }
}

/// `f*`: the radially non-increasing function equimeasurable with `|f|`.
pub fn symm_decr_rearrange(f: &RadialFunction) -> RadialFunction {
    let grid = f.grid().clone();
    let values = Distribution::of(f).to_grid(&grid);
    RadialFunction::new(grid, values).expect("rearranged samples are finite")
}

/// `int f g` over the ball for two decreasing step functions given as
/// distributions; exact merge of the breakpoints.
fn integral_of_product(a: &Distribution, b: &Distribution) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut ua, mut ub) = (0.0, 0.0);
    let mut total = 0.0;
    while i < a.levels.len() && j < b.levels.len() {
        let ra = a.masses[i] - ua;
        let rb = b.masses[j] - ub;
        let take = ra.min(rb);
        total += take * a.levels[i] * b.levels[j];
        ua += take;
        ub += take;
        if ra <= rb {
            i += 1;
            ua = 0.0;
        }
        if rb <= ra {
            j += 1;
            ub = 0.0;
        }
    }
    total
}

/// `u = (-Delta)^{-1} f` with Dirichlet data on the ball.
fn poisson(f: &RadialFunction) -> RadialFunction {
    green_apply(f).scaled(1.0 / (4.0 * PI))
}

/// `(u*, v)` with `-Delta u = |f|`, `-Delta v = f*`.
pub fn talenti_profiles(f: &RadialFunction) -> (RadialFunction, RadialFunction) {
    let fa = f.map(abs);
    let u = poisson(&fa);
    let v = poisson(&symm_decr_rearrange(&fa));
    (symm_decr_rearrange(&u), v)
}

/// `u* <= v` pointwise; tolerance is ten times the `h^2` truncation scale
/// `h^2 sup f*`.
pub fn talenti_check(f: &RadialFunction) -> RearrangementReport {
    let (us, v) = talenti_profiles(f);
    let worst = us
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let h = f.grid().step();
    let sup = f.values().iter().fold(0.0f64, |m, x| m.max(abs(*x)));
    RearrangementReport::new(worst, 10.0 * h * h * sup)
}

/// Interaction monotonicity `W(|psi|) <= W(psi*)` and the Hardy–Littlewood
/// step `int |psi|^2 u <= int (|psi|^2)* u*` with `u` the potential of `|psi|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub interaction: RearrangementReport,
    pub hardy_littlewood: RearrangementReport,
    /// `W(psi*) - W(|psi|)`.
    pub w_deficit: f64,
    /// `int (|psi|^2)* u* - int |psi|^2 u`.
    pub hl_deficit: f64,
}

pub const MONOTONICITY_TOL: f64 = 1e-8;

pub fn interaction_monotonicity_check(psi: &RadialFunction) -> MonotonicityReport {
    let a = psi.map(abs);
    let star = symm_decr_rearrange(&a);
    let w_deficit = interaction(&star) - interaction(&a);
    let rho = a.map(|x| x * x);
    let u = green_apply(&rho);
    let direct: f64 = cell_masses(psi.grid())
        .iter()
        .zip(rho.values().iter().zip(u.values()))
        .map(|(m, (f, g))| m * f * g)
        .sum();
    let hl_deficit = integral_of_product(&Distribution::of(&rho), &Distribution::of(&u)) - direct;
    MonotonicityReport {
        interaction: RearrangementReport::new(-w_deficit, MONOTONICITY_TOL),
        hardy_littlewood: RearrangementReport::new(-hl_deficit, MONOTONICITY_TOL),
        w_deficit,
        hl_deficit,
    }
}

/// Three-point running average, keeping the end values' neighbours
/// one-sided.
pub fn smooth3(f: &RadialFunction) -> RadialFunction {
    let v = f.values();
    let n = v.len();
    let out = (0..n)
        .map(|i| {
            let a = if i == 0 { v[0] } else { v[i - 1] };
            let b = if i + 1 == n { 0.0 } else { v[i + 1] };
            (a + v[i] + b) / 3.0
        })
        .collect();
    RadialFunction::new(f.grid().clone(), out).expect("averages of finite samples")
}

/// `T(psi*) <= T(|psi|)` on the 3-point smoothed input, tolerance `10 h^2 T(|psi|)`.
pub fn kinetic_monotonicity_check(psi: &RadialFunction) -> RearrangementReport {
    let a = smooth3(psi).map(abs);
    let star = symm_decr_rearrange(&a);
    let ta = kinetic(&a);
    let h = psi.grid().step();
    RearrangementReport::new(kinetic(&star) - ta, 10.0 * h * h * ta)
}
