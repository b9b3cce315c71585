//! The Hessian quadratic form at `phi_R`, the second-order expansion of the
//! energy, and sampled versus theoretical coercivity constants.
//!
//! Distances are `min_theta ||grad(e^{i theta} phi_R - phi)||^2`; the
//! minimizing phase is `arg <grad phi_R | grad phi>`.

use alloc::vec;
use alloc::vec::Vec;

use crate::functional::{energy_complex, kinetic, Variant};
use crate::grid::{check_same, Boundary, ComplexRadial, RadialFunction};
use crate::hessian::{
    assemble_sector, build_sector, projected_spectrum, sector_spectrum, x_norm_bound, OperatorKind,
    SectorOperator,
};
use crate::num::{self, abs, atan2, cos, ln, powi, sin, FOUR_PI, PI};
use crate::rng::{random_profile, SampleRng};
use crate::solver::PekarSolution;
use crate::{Error, Result};

/// Distances below this are treated as the orbit itself (ratio excluded).
pub const MIN_DISTANCE: f64 = 1e-6;

/// `H_R(delta) = <Im delta | L_- Im delta> + <Q Re delta | L_+ Q Re delta>`
/// for a radial perturbation.
pub fn hessian_form(sol: &PekarSolution, delta: &ComplexRadial) -> Result<f64> {
    let forms = RadialForms::new(sol)?;
    forms.eval(delta)
}

/// Assembled `l = 0` operators, reused across many evaluations.
struct RadialForms<'a> {
    sol: &'a PekarSolution,
    lminus: SectorOperator,
    lplus: SectorOperator,
    unit: Vec<f64>,
}

impl<'a> RadialForms<'a> {
    fn new(sol: &'a PekarSolution) -> Result<Self> {
        let s = sol.sigma();
        let nrm = num::norm2(&s);
        Ok(Self {
            sol,
            lminus: build_sector(sol, 0, OperatorKind::Lminus, Boundary::Dirichlet),
            lplus: build_sector(sol, 0, OperatorKind::Lplus, Boundary::Dirichlet),
            unit: s.iter().map(|x| x / nrm).collect(),
        })
    }

    fn eval(&self, delta: &ComplexRadial) -> Result<f64> {
        check_same(&self.sol.phi, &delta.re)?;
        let im = delta.im.sigma();
        let mut re = delta.re.sigma();
        let c = num::dot(&self.unit, &re);
        for (x, u) in re.iter_mut().zip(&self.unit) {
            *x -= c * u;
        }
        Ok(self.lminus.quadratic_form(&im) + self.lplus.quadratic_form(&re))
    }
}

fn normalize_complex(psi: &ComplexRadial) -> ComplexRadial {
    let n = psi.norm();
    psi.scaled(1.0 / n)
}

fn combine(a: &ComplexRadial, b: &ComplexRadial, eps: f64) -> Result<ComplexRadial> {
    ComplexRadial::new(a.re.axpy(eps, &b.re)?, a.im.axpy(eps, &b.im)?)
}

/// `g(eps) = E((phi_R + eps delta) / ||.||) - E_R - eps^2 H(delta)`.
pub fn expansion_remainders(sol: &PekarSolution, delta: &ComplexRadial, eps: &[f64]) -> Result<Vec<f64>> {
    let h = hessian_form(sol, delta)?;
    let base = ComplexRadial::real(sol.phi.clone());
    let e0 = energy_complex(&base, Variant::BallGreen).e;
    eps.iter()
        .map(|&t| {
            let psi = normalize_complex(&combine(&base, delta, t)?);
            Ok(energy_complex(&psi, Variant::BallGreen).e - e0 - t * t * h)
        })
        .collect()
}

/// Least-squares slope of `log |g|` against `log eps`.
pub fn expansion_order_check(sol: &PekarSolution, delta: &ComplexRadial, eps: &[f64]) -> Result<f64> {
    if eps.len() < 2 || eps.iter().any(|&t| !(1e-4..=1e-1).contains(&t)) {
        return Err(Error::InvalidArgument("eps values must lie in [1e-4, 1e-1]"));
    }
    let g = expansion_remainders(sol, delta, eps)?;
    let floor = 64.0 * f64::EPSILON * abs(sol.energy.e).max(1.0);
    if g.iter().any(|x| abs(*x) <= floor) {
        return Err(Error::MachinePrecisionFloor);
    }
    let xs: Vec<f64> = eps.iter().map(|t| ln(*t)).collect();
    let ys: Vec<f64> = g.iter().map(|x| ln(abs(*x))).collect();
    Ok(fit_slope(&xs, &ys))
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `n` values log-spaced over `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (ln(lo), ln(hi));
    (0..n)
        .map(|k| {
            let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
            let x = num::exp(a + t * (b - a));
            x.clamp(lo, hi)
        })
        .collect()
}

/// `min_theta ||grad(e^{i theta} phi_R - phi)||^2` and the minimizing phase.
pub fn orbit_distance(sol: &PekarSolution, phi: &ComplexRadial) -> Result<(f64, f64)> {
    check_same(&sol.phi, &phi.re)?;
    let grid = sol.grid();
    let lap = crate::grid::laplacian_sector(grid, 0, Boundary::Dirichlet);
    let gs = lap.apply(&sol.sigma());
    let w = FOUR_PI * grid.step();
    let b_re = w * num::dot(&gs, &phi.re.sigma());
    let b_im = w * num::dot(&gs, &phi.im.sigma());
    let theta = atan2(b_im, b_re);
    let d = ComplexRadial::new(
        sol.phi.scaled(cos(theta)).axpy(-1.0, &phi.re)?,
        sol.phi.scaled(sin(theta)).axpy(-1.0, &phi.im)?,
    )?;
    Ok((kinetic(&d.re) + kinetic(&d.im), theta))
}

/// `||grad(phi_R - phi')||^2` for the representative `phi'` rotated so that
/// `<phi' | phi_R>` is real and non-negative.
pub fn aligned_distance(sol: &PekarSolution, phi: &ComplexRadial) -> Result<f64> {
    let a = crate::grid::inner(&sol.phi, &phi.re)?;
    let b = crate::grid::inner(&sol.phi, &phi.im)?;
    let aligned = phi.rotated(-atan2(b, a));
    let d = ComplexRadial::new(sol.phi.axpy(-1.0, &aligned.re)?, aligned.im.scaled(-1.0))?;
    Ok(kinetic(&d.re) + kinetic(&d.im))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleKind {
    /// Radial, real perturbation at `H^1` distance about `1e-3`.
    NearReal,
    NearComplex,
    /// Angular mode `l >= 1`, evaluated through the sector quadratic form.
    NearAngular(u32),
    /// Radial, far from the orbit (distance of order one).
    FarReal,
    FarComplex,
}

impl SampleKind {
    pub fn name(self) -> &'static str {
        match self {
            SampleKind::NearReal => "near_real",
            SampleKind::NearComplex => "near_complex",
            SampleKind::NearAngular(_) => "near_angular",
            SampleKind::FarReal => "far_real",
            SampleKind::FarComplex => "far_complex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub index: u64,
    pub kind: SampleKind,
    /// `E_R(phi) - E_R`.
    pub gap: f64,
    /// Squared orbit distance.
    pub dist2: f64,
    /// `gap / dist2`, absent when the distance is below [`MIN_DISTANCE`].
    pub ratio: Option<f64>,
}

/// `E_R(phi) - E_R` and the orbit distance of a normalized radial sample.
pub fn evaluate_sample(sol: &PekarSolution, phi: &ComplexRadial) -> Result<(f64, f64)> {
    let e0 = energy_complex(&ComplexRadial::real(sol.phi.clone()), Variant::BallGreen).e;
    let gap = energy_complex(phi, Variant::BallGreen).e - e0;
    let (dist2, _) = orbit_distance(sol, phi)?;
    Ok((gap, dist2))
}

/// Spectral ingredients of the theoretical constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants {
    /// Gap of `L_-` on `ran Q`: min of the second `l = 0` eigenvalue and the
    /// `l >= 1` bottoms.
    pub kappa_minus: f64,
    /// Min of the first positive eigenvalue of `Q L_+^(0) Q` and the `l >= 1`
    /// bottoms of `L_+`.
    pub kappa_plus: f64,
    pub kappa: f64,
    /// `|e| + 2 max V + 4 max_l ||X^(l)||`.
    pub c_bound: f64,
}

pub fn spectral_constants(sol: &PekarSolution, l_max: u32, tol_el: f64) -> Result<SpectralConstants> {
    let lm0 = sector_spectrum(&assemble_sector(sol, 0, OperatorKind::Lminus, Boundary::Dirichlet, tol_el)?, 2)?;
    let mut kappa_minus = lm0.eigenvalues[1];
    let mut kappa_plus = projected_spectrum(sol, 2, tol_el)?.first_positive;
    let mut x_bound = x_norm_bound(sol, 0);
    for l in 1..=l_max {
        let m = sector_spectrum(&assemble_sector(sol, l, OperatorKind::Lminus, Boundary::Dirichlet, tol_el)?, 1)?;
        let p = sector_spectrum(&assemble_sector(sol, l, OperatorKind::Lplus, Boundary::Dirichlet, tol_el)?, 1)?;
        kappa_minus = kappa_minus.min(m.bottom());
        kappa_plus = kappa_plus.min(p.bottom());
        x_bound = x_bound.max(x_norm_bound(sol, l));
    }
    let v = sol.potential();
    let vmax = v.values().iter().fold(0.0f64, |m, x| m.max(*x));
    Ok(SpectralConstants {
        kappa_minus,
        kappa_plus,
        kappa: kappa_minus.min(kappa_plus),
        c_bound: abs(sol.energy.e_phi) + 2.0 * vmax + 4.0 * x_bound,
    })
}

/// `kappa / (2 + kappa + 2C)`; zero for non-positive `kappa`.
pub fn theoretical_k(kappa: f64, c_bound: f64) -> f64 {
    if kappa <= 0.0 {
        return 0.0;
    }
    kappa / (2.0 + kappa + 2.0 * c_bound)
}

pub fn theoretical_k_of(sol: &PekarSolution, l_max: u32, tol_el: f64) -> Result<f64> {
    let c = spectral_constants(sol, l_max, tol_el)?;
    Ok(theoretical_k(c.kappa, c.c_bound))
}

/// Per-sample evaluation state; samples are independent given `(seed, index)`.
pub struct CoercivitySampler<'a> {
    sol: &'a PekarSolution,
    e0: f64,
    /// `(L_-^(l), L_+^(l))` for `l = 1..=l_max`.
    sectors: Vec<(SectorOperator, SectorOperator)>,
    laplacians: Vec<crate::grid::SectorLaplacian>,
}

impl<'a> CoercivitySampler<'a> {
    pub fn new(sol: &'a PekarSolution, l_max: u32, tol_el: f64) -> Result<Self> {
        let mut sectors = Vec::new();
        let mut laplacians = Vec::new();
        for l in 1..=l_max {
            sectors.push((
                assemble_sector(sol, l, OperatorKind::Lminus, Boundary::Dirichlet, tol_el)?,
                assemble_sector(sol, l, OperatorKind::Lplus, Boundary::Dirichlet, tol_el)?,
            ));
            laplacians.push(crate::grid::laplacian_sector(sol.grid(), l, Boundary::Dirichlet));
        }
        Ok(Self {
            sol,
            e0: energy_complex(&ComplexRadial::real(sol.phi.clone()), Variant::BallGreen).e,
            sectors,
            laplacians,
        })
    }

    fn random_complex(&self, rng: &mut SampleRng, complex: bool) -> Result<ComplexRadial> {
        let g = self.sol.grid();
        let re = random_profile(g, rng, true)?;
        let im = if complex {
            random_profile(g, rng, true)?
        } else {
            RadialFunction::zeros(g.clone())
        };
        ComplexRadial::new(re, im)
    }

    /// Sample `index` of the stream `seed`; even indices are near-field.
    pub fn sample(&self, seed: u64, index: u64) -> Result<Sample> {
        let mut rng = SampleRng::stream(seed, index);
        let near = index.is_multiple_of(2);
        let choices = if near { 2 + usize::from(!self.sectors.is_empty()) } else { 2 };
        let kind = match (near, rng.below(choices)) {
            (true, 0) => SampleKind::NearReal,
            (true, 1) => SampleKind::NearComplex,
            (true, _) => SampleKind::NearAngular(1 + rng.below(self.sectors.len()) as u32),
            (false, 0) => SampleKind::FarReal,
            (false, _) => SampleKind::FarComplex,
        };
        let target = num::exp(ln(10.0) * rng.range(-3.5, -2.5));
        let (gap, dist2) = match kind {
            SampleKind::NearAngular(l) => self.angular(l, target, &mut rng)?,
            _ => {
                let complex = matches!(kind, SampleKind::NearComplex | SampleKind::FarComplex);
                let zeta = self.random_complex(&mut rng, complex)?;
                let base = ComplexRadial::real(self.sol.phi.clone());
                let mixed = if near {
                    let scale = num::sqrt(kinetic(&zeta.re) + kinetic(&zeta.im));
                    combine(&base, &zeta, target / scale)?
                } else {
                    let t = rng.range(0.2, 1.0);
                    combine(&base.scaled(1.0 - t), &zeta, t)?
                };
                let phi = normalize_complex(&mixed).rotated(rng.range(0.0, 2.0 * PI));
                let gap = energy_complex(&phi, Variant::BallGreen).e - self.e0;
                (gap, orbit_distance(self.sol, &phi)?.0)
            }
        };
        let ratio = (dist2 > MIN_DISTANCE * MIN_DISTANCE).then(|| gap / dist2);
        if let Some(r) = ratio {
            if r < 0.0 {
                return Err(Error::NegativeGap {
                    gap,
                    distance: num::sqrt(dist2),
                });
            }
        }
        Ok(Sample {
            index,
            kind,
            gap,
            dist2,
            ratio,
        })
    }

    /// Second-order gap of `phi_R + eps g(r) Y_lm`, with `g` complex.
    fn angular(&self, l: u32, target: f64, rng: &mut SampleRng) -> Result<(f64, f64)> {
        let grid = self.sol.grid();
        let radius = grid.radius();
        let zeta = self.random_complex(rng, true)?;
        // sector-compatible behaviour r^(l+1) of sigma at the origin
        let shape = |f: &RadialFunction| f.sigma().iter().zip(grid.nodes()).map(|(s, r)| s * powi(r / radius, l)).collect::<Vec<f64>>();
        let (re, im) = (shape(&zeta.re), shape(&zeta.im));
        let (lminus, lplus) = &self.sectors[(l - 1) as usize];
        let lap = &self.laplacians[(l - 1) as usize];
        let w = FOUR_PI * grid.step();
        let grad2 = w * (num::dot(&re, &lap.apply(&re)) + num::dot(&im, &lap.apply(&im)));
        let q = lplus.quadratic_form(&re) + lminus.quadratic_form(&im);
        let eps2 = target * target / grad2;
        Ok((eps2 * q, eps2 * grad2))
    }
}

/// Result of a coercivity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityReport {
    pub constants: SpectralConstants,
    /// Interpolation weight, equal to the theoretical constant.
    pub alpha: f64,
    pub k_theory: f64,
    pub samples: Vec<Sample>,
    /// Minimum ratio over samples with a ratio.
    pub k_sampled: f64,
    /// Sample attaining `k_sampled`.
    pub worst: Option<Sample>,
}

impl CoercivityReport {
    pub fn from_samples(constants: SpectralConstants, samples: Vec<Sample>) -> Self {
        let k_theory = theoretical_k(constants.kappa, constants.c_bound);
        let worst = samples
            .iter()
            .filter(|s| s.ratio.is_some())
            .min_by(|a, b| a.ratio.unwrap().total_cmp(&b.ratio.unwrap()))
            .copied();
        Self {
            constants,
            alpha: k_theory,
            k_theory,
            k_sampled: worst.and_then(|s| s.ratio).unwrap_or(f64::NAN),
            worst,
            samples,
        }
    }

    /// `kappa > 0`, `K_sampled > 0` and every ratio non-negative.
    pub fn pass(&self) -> bool {
        self.constants.kappa > 0.0
            && self.k_sampled > 0.0
            && self.samples.iter().all(|s| s.ratio.is_none_or(|r| r >= 0.0))
    }
}

/// Sequential sweep over `n_samples` samples of stream `seed`.
pub fn sample_coercivity(
    sol: &PekarSolution,
    n_samples: usize,
    seed: u64,
    l_max: u32,
    tol_el: f64,
) -> Result<CoercivityReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample"));
    }
    let constants = spectral_constants(sol, l_max, tol_el)?;
    let sampler = CoercivitySampler::new(sol, l_max, tol_el)?;
    let mut samples = vec![];
    for i in 0..n_samples as u64 {
        samples.push(sampler.sample(seed, i)?);
    }
    Ok(CoercivityReport::from_samples(constants, samples))
}
