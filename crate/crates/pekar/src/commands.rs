//! The five subcommands. Each returns an [`Outcome`]; writing it out is the
//! caller's job.

use std::path::Path;

use pekar_core::asymptotics::{
    check_sweep, extrapolate_einf, newton_shift_check, solve_row, SweepRow,
};
use pekar_core::coercivity::{spectral_constants, CoercivityReport, CoercivitySampler, Sample};
use pekar_core::hessian::{
    assemble_sector, boundary_eigenvalue_check, decompose_radial_lplus, derivative_kernel_residual,
    dilation_parallel_residual, projected_spectrum, sector_spectrum, OperatorKind, SectorSpectrum,
};
use pekar_core::rearrange::{
    interaction_monotonicity_check, kinetic_monotonicity_check, talenti_check, Distribution,
    MONOTONICITY_TOL,
};
use pekar_core::rng::{random_profile, SampleRng};
use pekar_core::solver::{solve_minimizer, PekarSolution, SolverOptions};
use pekar_core::{Boundary, Error, RadialFunction, RadialGrid};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{MethodArg, RunConfig};
use crate::error::{error_code, CliError};
use crate::report::{fmt, Check, Outcome, Table};

pub const COERCIVITY_SAMPLES: usize = 10_000;
pub const REARRANGE_SAMPLES: usize = 1_000;
/// Newton-shift checks per rearrangement run.
pub const NEWTON_SAMPLES: u64 = 100;

const EIGENPAIRS: usize = 3;
const SIGN_TOL: f64 = 1e-8;

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol_el: cfg.tol_el,
        ..SolverOptions::default()
    }
}

/// Reads a `solve` report back into a solution, re-checking convergence.
pub fn load_solution(path: &Path, tol_el: f64) -> Result<PekarSolution, CliError> {
    let bad = |m: String| CliError::compute("invalid_solution", m);
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let radius = v["R"].as_f64().ok_or_else(|| bad("missing R".into()))?;
    let cells = v["N"].as_u64().ok_or_else(|| bad("missing N".into()))? as usize;
    let method = match v["method"].as_str() {
        Some("scf") => MethodArg::Scf,
        _ => MethodArg::Shooting,
    };
    let pairs = v["profile"].as_array().ok_or_else(|| bad("missing profile".into()))?;
    let grid = RadialGrid::new(radius, cells).map_err(|e| bad(e.to_string()))?;
    if pairs.len() != cells {
        return Err(bad(format!("profile has {} points, N = {cells}", pairs.len())));
    }
    let mut phi = Vec::with_capacity(cells);
    for (p, r) in pairs.iter().zip(grid.nodes()) {
        let (rr, f) = match p.as_array().map(|a| (a.first().and_then(Value::as_f64), a.get(1).and_then(Value::as_f64))) {
            Some((Some(rr), Some(f))) => (rr, f),
            _ => return Err(bad("profile entries must be [r, phi]".into())),
        };
        if (rr - r).abs() > 1e-12 * radius {
            return Err(bad(format!("profile node {rr} does not match grid node {r}")));
        }
        phi.push(f);
    }
    let phi = RadialFunction::new(grid, phi).map_err(|e| bad(e.to_string()))?;
    PekarSolution::from_profile(phi, method.method(), tol_el).map_err(|e| match e {
        Error::Unconverged { .. } => CliError::compute("unconverged_input", e.to_string()),
        e => e.into(),
    })
}

/// The `--solution` file if given, otherwise a fresh solve.
pub fn obtain_solution(cfg: &RunConfig) -> Result<PekarSolution, CliError> {
    match &cfg.solution {
        Some(p) => load_solution(p, cfg.tol_el),
        None => {
            let grid = RadialGrid::new(cfg.radius, cfg.grid)?;
            Ok(solve_minimizer(&grid, cfg.method.method(), &solver_options(cfg))?)
        }
    }
}

fn source(cfg: &RunConfig) -> &'static str {
    if cfg.solution.is_some() {
        "file"
    } else {
        "inline"
    }
}

pub fn solution_summary(sol: &PekarSolution) -> Value {
    let e = &sol.energy;
    json!({
        "R": sol.radius(),
        "N": sol.grid().len(),
        "method": match sol.method { pekar_core::solver::Method::Scf => "scf", _ => "shooting" },
        "E_R": e.e,
        "E_tilde": sol.energy_tilde(),
        "T": e.t,
        "W": e.w,
        "e_phi": e.e_phi,
        "nu_phi": e.nu_phi,
        "I_phi": e.i_phi,
        "el_residual": sol.el_residual,
        "dphi_at_R": sol.dphi_at_r,
    })
}

/// Positivity, monotonicity, normalization, residual and sign checks on a minimizer.
pub fn minimizer_checks(sol: &PekarSolution, tol_el: f64) -> Vec<Check> {
    let v = sol.phi.values();
    let norm_dev = (sol.phi.norm_pow(2).sqrt() - 1.0).abs();
    vec![
        Check::new("minimizer_positive", v.iter().all(|&x| x > 0.0)),
        Check::new("minimizer_non_increasing", v.windows(2).all(|w| w[1] <= w[0])),
        Check::bounded("normalized", norm_dev, 1e-8),
        Check::bounded("euler_lagrange_residual", sol.el_residual, tol_el),
        Check::new("multiplier_positive", sol.energy.nu_phi > 0.0).with_value(sol.energy.nu_phi),
        Check::new("boundary_slope_negative", sol.dphi_at_r < 0.0).with_value(sol.dphi_at_r),
    ]
}

pub fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = RadialGrid::new(cfg.radius, cfg.grid)?;
    let sol = solve_minimizer(&grid, cfg.method.method(), &solver_options(cfg))?;
    let mut body = solution_summary(&sol);
    let profile: Vec<[f64; 2]> = grid.nodes().iter().zip(sol.phi.values()).map(|(r, p)| [*r, *p]).collect();
    body["profile"] = json!(profile);
    Ok(Outcome::new("solve", cfg, body, minimizer_checks(&sol, cfg.tol_el)))
}

fn variants(l: u32) -> &'static [OperatorKind] {
    if l == 0 {
        &[OperatorKind::Lminus, OperatorKind::Lplus]
    } else {
        &[OperatorKind::Lminus, OperatorKind::Lplus, OperatorKind::LplusTilde]
    }
}

fn spectrum_json(s: &SectorSpectrum) -> Value {
    json!({
        "l": s.l,
        "variant": s.kind.name(),
        "eigenvalues": s.eigenvalues,
        "gap": s.gap,
        "relative_residual": s.relative_residual,
        "ground_sign_definite": s.ground_is_sign_definite(SIGN_TOL),
    })
}

/// Tolerance for identities that hold only up to the grid's truncation error.
pub const EXTENDED_TOL: f64 = 1e-4;
pub const DECOMPOSITION_TOL: f64 = 1e-8;
pub const BOUNDARY_FORMULA_TOL: f64 = 1e-3;

/// Relative sup-norm mismatch between `L_+ f` and its split form, for `f`
/// drawn from the seeded stream.
pub fn decomposition_mismatch(sol: &PekarSolution, seed: u64) -> Result<f64, CliError> {
    let f = random_profile(sol.grid(), &mut SampleRng::stream(seed, 0), true)?;
    let (ls, sig) = decompose_radial_lplus(sol, &f, Boundary::Dirichlet)?;
    let op = assemble_sector(sol, 0, OperatorKind::Lplus, Boundary::Dirichlet, f64::INFINITY)?;
    let direct = op.apply(&f.sigma());
    let recon: Vec<f64> = ls.sigma().iter().zip(sol.sigma()).map(|(a, b)| a - sig * b).collect();
    let scale = direct.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(direct.iter().zip(&recon).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale)
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sol = obtain_solution(cfg)?;
    let tol = cfg.tol_el;
    let jobs: Vec<(u32, OperatorKind)> =
        (0..=cfg.l_max).flat_map(|l| variants(l).iter().map(move |k| (l, *k))).collect();
    let spectra = jobs
        .par_iter()
        .map(|&(l, kind)| sector_spectrum(&assemble_sector(&sol, l, kind, Boundary::Dirichlet, tol)?, EIGENPAIRS))
        .collect::<Result<Vec<_>, Error>>()?;
    let find = |l: u32, kind: OperatorKind| spectra.iter().find(|s| s.l == l && s.kind == kind);

    let proj = projected_spectrum(&sol, EIGENPAIRS, tol)?;
    let bc = boundary_eigenvalue_check(&sol, tol)?;
    let deriv = derivative_kernel_residual(&sol);
    let (off, total) = dilation_parallel_residual(&sol);
    let decomp = decomposition_mismatch(&sol, cfg.seed)?;

    let lminus0 = find(0, OperatorKind::Lminus).expect("l = 0 is always present");
    let tilde: Vec<f64> = (1..=cfg.l_max).filter_map(|l| find(l, OperatorKind::LplusTilde)).map(|s| s.bottom()).collect();
    let plus_above = (1..=cfg.l_max).all(|l| {
        match (find(l, OperatorKind::Lplus), find(l, OperatorKind::LplusTilde)) {
            (Some(p), Some(t)) => p.bottom() > t.bottom(),
            _ => false,
        }
    });
    let phi_unit: Vec<f64> = {
        let s = sol.sigma();
        let n = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        s.iter().map(|x| x / n).collect()
    };
    let lminus_overlap = lminus0.ground.iter().zip(&phi_unit).map(|(a, b)| a * b).sum::<f64>().abs();
    let e1_rel = ((bc.e1_boundary - bc.e1_spectral) / bc.e1_spectral).abs();

    let checks = vec![
        Check::bounded("lminus_kernel_eigenvalue", lminus0.bottom().abs(), 1e-5),
        Check::bounded("lminus_kernel_is_minimizer", 1.0 - lminus_overlap, 1e-6),
        Check::new("lminus_gap_positive", lminus0.eigenvalues[1] > 0.0).with_value(lminus0.eigenvalues[1]),
        Check::bounded("projected_zero_mode_is_minimizer", 1.0 - proj.zero_mode_overlap, 1e-6),
        Check::new("projected_second_eigenvalue_positive", proj.first_positive > 0.0).with_value(proj.first_positive),
        Check::bounded("dilation_image_parallel", off / total, EXTENDED_TOL),
        Check::bounded("lplus_decomposition", decomp, DECOMPOSITION_TOL),
        Check::new(
            "angular_bottoms_increasing",
            tilde.windows(2).all(|w| w[1] > w[0]) && tilde.iter().all(|&b| b > 0.0),
        ),
        Check::new("angular_lplus_above_tilde", plus_above),
        Check::bounded("derivative_in_kernel", deriv, EXTENDED_TOL),
        Check::bounded("boundary_formula", e1_rel, BOUNDARY_FORMULA_TOL),
        Check::new(
            "angular_ground_states_sign_definite",
            spectra.iter().filter(|s| s.l >= 1).all(|s| s.ground_is_sign_definite(SIGN_TOL)),
        ),
    ];

    let mut body = json!({
        "solution": solution_summary(&sol),
        "solution_source": source(cfg),
        "sectors": spectra.iter().map(spectrum_json).collect::<Vec<_>>(),
        "projected_lplus": {
            "eigenvalues": proj.eigenvalues,
            "zero_mode_overlap": proj.zero_mode_overlap,
            "first_positive": proj.first_positive,
            "relative_residual": proj.relative_residual,
        },
        "boundary_formula": {
            "e1_spectral": bc.e1_spectral,
            "e1_boundary": bc.e1_boundary,
            "relative_error": e1_rel,
            "ground_slope": bc.ground_slope,
            "solution_slope": bc.solution_slope,
            "overlap": bc.overlap,
        },
        "extended": {
            "derivative_residual": deriv,
            "dilation_off_parallel": off,
            "dilation_total": total,
        },
        "decomposition_mismatch": decomp,
    });
    body["lminus_overlap"] = json!(lminus_overlap);

    let mut table = Table::new(&["l", "variant", "lambda0", "lambda1"]);
    for s in &spectra {
        table.push(vec![
            s.l.to_string(),
            s.kind.name().to_string(),
            fmt(s.eigenvalues[0]),
            s.eigenvalues.get(1).map_or(String::new(), |x| fmt(*x)),
        ]);
    }
    Ok(Outcome::new("spectrum", cfg, body, checks).with_table(table))
}

fn sample_json(s: &Sample) -> Value {
    json!([s.index, s.kind.name(), s.gap, s.dist2, s.ratio])
}

/// Two significant digits, for the headline constant.
pub fn two_digits(x: f64) -> String {
    format!("{x:.1e}")
}

pub fn coercivity(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sol = obtain_solution(cfg)?;
    let n = cfg.samples_or(COERCIVITY_SAMPLES) as u64;
    let constants = spectral_constants(&sol, cfg.l_max, cfg.tol_el)?;
    let sampler = CoercivitySampler::new(&sol, cfg.l_max, cfg.tol_el)?;
    let results: Vec<Result<Sample, Error>> = (0..n).into_par_iter().map(|i| sampler.sample(cfg.seed, i)).collect();

    let mut samples = Vec::with_capacity(n as usize);
    let mut negative = vec![];
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => samples.push(s),
            Err(Error::NegativeGap { gap, distance }) => negative.push(json!({"index": i, "gap": gap, "distance": distance})),
            Err(e) => return Err(e.into()),
        }
    }
    let rep = CoercivityReport::from_samples(constants, samples);
    let c = &rep.constants;
    let checks = vec![
        Check::new("spectral_gap_positive", c.kappa > 0.0).with_value(c.kappa),
        Check::new("no_negative_gaps", negative.is_empty()).with_value(negative.len() as f64),
        Check::new("sampled_constant_positive", rep.pass()).with_value(rep.k_sampled),
    ];
    let body = json!({
        "solution": solution_summary(&sol),
        "solution_source": source(cfg),
        "kappa_minus": c.kappa_minus,
        "kappa_plus": c.kappa_plus,
        "kappa": c.kappa,
        "C": c.c_bound,
        "alpha": rep.alpha,
        "K_theory": rep.k_theory,
        "K_sampled": rep.k_sampled,
        "K_sampled_2sig": two_digits(rep.k_sampled),
        "worst": rep.worst.as_ref().map(sample_json),
        "negative_gaps": negative,
        "sample_fields": ["index", "kind", "gap", "dist2", "ratio"],
        "samples": rep.samples.iter().map(sample_json).collect::<Vec<_>>(),
    });
    let mut table = Table::new(&["index", "kind", "gap", "dist2", "ratio"]);
    for s in &rep.samples {
        table.push(vec![
            s.index.to_string(),
            s.kind.name().to_string(),
            fmt(s.gap),
            fmt(s.dist2),
            s.ratio.map_or(String::new(), fmt),
        ]);
    }
    Ok(Outcome::new("coercivity", cfg, body, checks).with_table(table))
}

pub const SWEEP_HEADER: [&str; 8] = ["R", "E_R", "E_tilde_R", "phi0", "nu", "e_phi", "dphi_at_R", "status"];

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut radii = cfg.radii.clone();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let opts = solver_options(cfg);
    let method = cfg.method.method();
    let results: Vec<Result<SweepRow, Error>> = radii
        .par_iter()
        .map(|&r| solve_row(r, cfg.density, method, &opts).map(|(row, _)| row))
        .collect();

    let mut table = Table::new(&SWEEP_HEADER);
    let mut rows = vec![];
    let mut json_rows = vec![];
    for (r, res) in radii.iter().zip(&results) {
        match res {
            Ok(row) => {
                table.push(vec![
                    fmt(row.radius),
                    fmt(row.e_r),
                    fmt(row.e_tilde),
                    fmt(row.phi0),
                    fmt(row.nu),
                    fmt(row.e_phi),
                    fmt(row.dphi_at_r),
                    "ok".into(),
                ]);
                json_rows.push(json!({
                    "R": row.radius, "E_R": row.e_r, "E_tilde_R": row.e_tilde, "phi0": row.phi0,
                    "nu": row.nu, "e_phi": row.e_phi, "dphi_at_R": row.dphi_at_r, "status": "ok",
                }));
                rows.push(*row);
            }
            Err(e) => {
                let mut line = vec![fmt(*r)];
                line.extend(std::iter::repeat_n(String::new(), 6));
                line.push(error_code(e).into());
                table.push(line);
                json_rows.push(json!({"R": r, "status": error_code(e), "message": e.to_string()}));
            }
        }
    }
    if rows.is_empty() {
        return Err(results.into_iter().find_map(Result::err).expect("no rows means some failed").into());
    }

    let sc = check_sweep(&rows);
    let all = extrapolate_einf(&rows).ok();
    let dropped = if rows.len() > 3 { extrapolate_einf(&rows[1..]).ok() } else { None };
    let mut checks = vec![
        Check::new("all_rows_solved", rows.len() == radii.len()),
        Check::new("energy_decreasing", sc.e_decreasing),
        Check::new("energy_tilde_decreasing", sc.e_tilde_decreasing),
        Check::bounded("screening_shift_identity", sc.shift_identity, 1e-8),
    ];
    let extrap_stability = match (&all, &dropped) {
        (Some(a), Some(d)) => Some((a.e_inf - d.e_inf).abs()),
        _ => None,
    };
    if let Some(d) = extrap_stability {
        checks.push(Check::bounded("extrapolation_stable", d, 1e-3));
    }
    let ex = |x: &Option<pekar_core::asymptotics::Extrapolation>| {
        x.map(|x| json!({"E_inf": x.e_inf, "error_bar": x.error_bar, "amplitude": x.amplitude, "beta": x.beta}))
    };
    let body = json!({
        "rows": json_rows,
        "checks_detail": {
            "shift_identity": sc.shift_identity,
            "extrapolation_change": extrap_stability,
        },
        "extrapolation": ex(&all),
        "extrapolation_without_smallest": ex(&dropped),
    });
    Ok(Outcome::new("sweep", cfg, body, checks).with_table(table))
}

/// Per-sample rearrangement results.
#[derive(Debug, Clone, Copy)]
struct RearrangeSample {
    talenti: f64,
    talenti_tol: f64,
    w_deficit: f64,
    hl_deficit: f64,
    kinetic: f64,
    kinetic_tol: f64,
    /// Largest relative mismatch of `int |f|^p` between distribution and cells.
    equimeasure: f64,
}

fn rearrange_sample(grid: &std::sync::Arc<RadialGrid>, seed: u64, i: u64) -> Result<RearrangeSample, Error> {
    let mut rng = SampleRng::stream(seed, i);
    let f = random_profile(grid, &mut rng, false)?;
    let psi = random_profile(grid, &mut rng, true)?;
    let t = talenti_check(&f);
    let m = interaction_monotonicity_check(&psi);
    let k = kinetic_monotonicity_check(&psi);
    let d = Distribution::of(&psi);
    let equimeasure = [1u32, 2, 4]
        .iter()
        .map(|&p| {
            let direct = psi.norm_pow(p);
            ((d.integral_pow(p) - direct) / direct).abs()
        })
        .fold(0.0, f64::max);
    Ok(RearrangeSample {
        talenti: t.max_violation,
        talenti_tol: t.tolerance,
        w_deficit: m.w_deficit,
        hl_deficit: m.hl_deficit,
        kinetic: k.max_violation,
        kinetic_tol: k.tolerance,
        equimeasure,
    })
}

/// Relative round-off allowed between two summation orders of the same terms.
pub const EQUIMEASURE_TOL: f64 = 1e-12;

pub fn rearrange(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = RadialGrid::new(cfg.radius, cfg.grid)?;
    let n = cfg.samples_or(REARRANGE_SAMPLES) as u64;
    let samples = (0..n)
        .into_par_iter()
        .map(|i| rearrange_sample(&grid, cfg.seed, i))
        .collect::<Result<Vec<_>, Error>>()?;
    // supported densities for the screening shift, on a separate stream
    let newton = (0..NEWTON_SAMPLES)
        .into_par_iter()
        .map(|i| -> Result<f64, Error> {
            let mut rng = SampleRng::stream(cfg.seed ^ 0x6e65_7774_6f6e, i);
            let support = cfg.radius * rng.range(0.3, 1.0);
            let f = random_profile(&grid, &mut rng, true)?;
            let cut: Vec<f64> = f.values().iter().zip(grid.nodes()).map(|(v, r)| if *r <= support { *v } else { 0.0 }).collect();
            newton_shift_check(&RadialFunction::new(grid.clone(), cut)?, support)
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let count = |p: &dyn Fn(&RearrangeSample) -> bool| samples.iter().filter(|s| p(s)).count();
    let talenti_v = count(&|s| s.talenti > s.talenti_tol);
    let w_v = count(&|s| s.w_deficit < -MONOTONICITY_TOL);
    let hl_v = count(&|s| s.hl_deficit < -MONOTONICITY_TOL);
    let kin_v = count(&|s| s.kinetic > s.kinetic_tol);
    let eq_v = count(&|s| s.equimeasure > EQUIMEASURE_TOL);
    let newton_worst = newton.iter().fold(0.0f64, |m, x| m.max(*x));
    let worst = |g: &dyn Fn(&RearrangeSample) -> f64| samples.iter().map(g).fold(f64::NEG_INFINITY, f64::max);
    let least = |g: &dyn Fn(&RearrangeSample) -> f64| samples.iter().map(g).fold(f64::INFINITY, f64::min);

    let checks = vec![
        Check::new("talenti_comparison", talenti_v == 0).with_value(talenti_v as f64),
        Check::new("interaction_monotone", w_v == 0).with_value(w_v as f64),
        Check::new("hardy_littlewood", hl_v == 0).with_value(hl_v as f64),
        Check::new("kinetic_monotone", kin_v == 0).with_value(kin_v as f64),
        Check::new("equimeasurable", eq_v == 0).with_value(eq_v as f64),
        Check::bounded("newton_shift_identity", newton_worst, 1e-8),
    ];
    let body = json!({
        "samples": n,
        "violations": {
            "talenti": talenti_v,
            "interaction": w_v,
            "hardy_littlewood": hl_v,
            "kinetic": kin_v,
            "equimeasurability": eq_v,
        },
        "worst": {
            "talenti_excess": worst(&|s| s.talenti - s.talenti_tol),
            "w_deficit_min": least(&|s| s.w_deficit),
            "hl_deficit_min": least(&|s| s.hl_deficit),
            "kinetic_excess": worst(&|s| s.kinetic - s.kinetic_tol),
            "equimeasure_rel": worst(&|s| s.equimeasure),
            "newton_deficit": newton_worst,
        },
        "newton_samples": NEWTON_SAMPLES,
    });
    Ok(Outcome::new("rearrange", cfg, body, checks))
}
