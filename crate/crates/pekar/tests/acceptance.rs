//! End-to-end acceptance criteria. Runs without the libtest harness and
//! prints one PASS/FAIL line per criterion; exits nonzero if any fails.

use std::process::Command;
use std::time::Instant;

use pekar::commands::{decomposition_mismatch, minimizer_checks};
use pekar::{run_command, Command as Cmd, RunConfig};
use pekar_core::asymptotics::newton_shift_check;
use pekar_core::coercivity::{expansion_order_check, log_spaced};
use pekar_core::functional::{energy_complex, interaction, Variant};
use pekar_core::hessian::{
    assemble_sector, boundary_eigenvalue_check, derivative_kernel_residual, dilation_parallel_residual,
    projected_spectrum, sector_spectrum, OperatorKind,
};
use pekar_core::rng::{random_profile, SampleRng};
use pekar_core::solver::{solve_minimizer, Method, PekarSolution, SolverOptions};
use pekar_core::{laplacian_sector, Boundary, ComplexRadial, RadialFunction, RadialGrid};
use serde_json::Value;

type Verdict = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

const TOL_EL: f64 = 1e-6;

fn solve(radius: f64, n: usize, method: Method) -> Result<PekarSolution, String> {
    let g = RadialGrid::new(radius, n).map_err(|e| e.to_string())?;
    solve_minimizer(&g, method, &SolverOptions::default()).map_err(|e| format!("R={radius} N={n} {method:?}: {e}"))
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn rel_change(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn discretization() -> Verdict {
    let pi2 = std::f64::consts::PI.powi(2);
    let err = |n: usize| -> Result<f64, String> {
        let g = RadialGrid::new(1.0, n).map_err(|e| e.to_string())?;
        let lam = laplacian_sector(&g, 0, Boundary::Dirichlet).tridiagonal().eigenvalue(0).map_err(|e| e.to_string())?;
        Ok((lam - pi2).abs())
    };
    let (e1, e2) = (err(2000)?, err(4000)?);
    let order = (e1 / e2).log2();
    ensure(e1 <= 1e-4, format!("|lambda0 - pi^2| = {e1:e} at N=2000"))?;
    ensure(order >= 1.9, format!("order {order:.3}"))?;
    Ok(format!("|lambda0 - pi^2| = {e1:.2e}, order {order:.3}"))
}

fn minimizer() -> Verdict {
    let mut worst = 0.0f64;
    for (radius, n) in [(1.0, 2000), (2.0, 2000), (4.0, 2000), (8.0, 4000)] {
        let a = solve(radius, n, Method::Shooting)?;
        let b = solve(radius, n, Method::Scf)?;
        let sup = a.phi.values().iter().zip(b.phi.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ensure(sup <= 1e-5, format!("R={radius}: methods differ by {sup:e}"))?;
        worst = worst.max(sup);
        for sol in [&a, &b] {
            let failed: Vec<_> = minimizer_checks(sol, TOL_EL).into_iter().filter(|c| !c.pass()).map(|c| c.tag).collect();
            ensure(failed.is_empty(), format!("R={radius} {:?}: {failed:?}", sol.method))?;
        }
    }
    Ok(format!("max method difference {worst:.2e}; positivity, monotonicity, norm, residual, signs hold"))
}

fn lminus_structure(sols: &[PekarSolution; 2]) -> Verdict {
    let mut gaps = vec![];
    for sol in sols {
        let op = assemble_sector(sol, 0, OperatorKind::Lminus, Boundary::Dirichlet, TOL_EL).map_err(|e| e.to_string())?;
        let s = sector_spectrum(&op, 3).map_err(|e| e.to_string())?;
        let sig = sol.sigma();
        let nrm = sig.iter().map(|x| x * x).sum::<f64>().sqrt();
        let overlap = s.ground.iter().zip(&sig).map(|(a, b)| a * b / nrm).sum::<f64>().abs();
        ensure(s.bottom().abs() <= 1e-5, format!("lambda0 = {:e}", s.bottom()))?;
        ensure(overlap >= 1.0 - 1e-6, format!("overlap {overlap}"))?;
        ensure(s.eigenvalues[1] > 0.0, "lambda1 not positive".into())?;
        gaps.push(s.eigenvalues[1]);
    }
    let drift = rel_change(gaps[0], gaps[1]);
    ensure(drift <= 0.05, format!("gap drift {drift:e}"))?;
    Ok(format!("lambda1 = {:.4} / {:.4} (N=2000/4000), drift {drift:.1e}", gaps[0], gaps[1]))
}

fn projected_lplus(sols: &[PekarSolution; 2]) -> Verdict {
    let mut firsts = vec![];
    for sol in sols {
        let p = projected_spectrum(sol, 3, TOL_EL).map_err(|e| e.to_string())?;
        ensure(p.zero_mode_overlap >= 1.0 - 1e-6, format!("zero-mode overlap {}", p.zero_mode_overlap))?;
        ensure(p.first_positive > 0.0, format!("second eigenvalue {}", p.first_positive))?;
        firsts.push(p.first_positive);
        let (off, total) = dilation_parallel_residual(sol);
        ensure(off / total <= 1e-4, format!("dilation image off-parallel ratio {:e}", off / total))?;
        let d = decomposition_mismatch(sol, 0).map_err(|e| e.to_string())?;
        ensure(d <= 1e-8, format!("decomposition mismatch {d:e}"))?;
    }
    let drift = rel_change(firsts[0], firsts[1]);
    ensure(drift <= 0.05, format!("second eigenvalue drift {drift:e}"))?;
    Ok(format!("second eigenvalue {:.4} / {:.4}, drift {drift:.1e}", firsts[0], firsts[1]))
}

fn angular_sectors(sols: &[PekarSolution; 2]) -> Verdict {
    let sol = &sols[0];
    let bottom = |l, kind| -> Result<f64, String> {
        let op = assemble_sector(sol, l, kind, Boundary::Dirichlet, TOL_EL).map_err(|e| e.to_string())?;
        Ok(sector_spectrum(&op, 2).map_err(|e| e.to_string())?.bottom())
    };
    let mut tilde = vec![];
    for l in 1..=6 {
        let (t, p) = (bottom(l, OperatorKind::LplusTilde)?, bottom(l, OperatorKind::Lplus)?);
        ensure(t > 0.0, format!("l={l}: tilde bottom {t}"))?;
        ensure(p > t, format!("l={l}: L+ bottom {p} <= tilde bottom {t}"))?;
        tilde.push(t);
    }
    ensure(tilde.windows(2).all(|w| w[1] > w[0]), format!("bottoms not increasing: {tilde:?}"))?;
    let deriv = derivative_kernel_residual(sol);
    ensure(deriv <= 1e-4, format!("derivative residual {deriv:e}"))?;
    let bc = boundary_eigenvalue_check(&sols[1], TOL_EL).map_err(|e| e.to_string())?;
    let rel = rel_change(bc.e1_boundary, bc.e1_spectral);
    ensure(rel <= 1e-3, format!("boundary formula error {rel:e}"))?;
    Ok(format!("bottoms {:.3?}; derivative residual {deriv:.1e}; boundary formula error {rel:.1e}", tilde))
}

/// Uses the SCF profile: it is the critical point of the discrete energy, so
/// no first-order term pollutes the remainder at small eps.
fn hessian_expansion() -> Verdict {
    let sol = &solve(1.0, 2000, Method::Scf)?;
    let g = sol.grid();
    let eps = log_spaced(1e-4, 1e-1, 7);
    let mut slopes = vec![];
    for k in 0..10 {
        let mut rng = SampleRng::stream(2024, k);
        let re = random_profile(g, &mut rng, true).map_err(|e| e.to_string())?;
        let im = random_profile(g, &mut rng, true).map_err(|e| e.to_string())?;
        let delta = ComplexRadial::new(re, im).map_err(|e| e.to_string())?;
        let slope = expansion_order_check(sol, &delta, &eps).map_err(|e| format!("direction {k}: {e}"))?;
        ensure(slope >= 2.9, format!("direction {k}: slope {slope}"))?;
        slopes.push(slope);
    }
    let base = ComplexRadial::real(sol.phi.clone());
    let e0 = energy_complex(&base, Variant::BallGreen).e;
    let phase = eps
        .iter()
        .map(|&t| (energy_complex(&base.rotated(t), Variant::BallGreen).e - e0).abs())
        .fold(0.0, f64::max);
    ensure(phase <= 1e-12, format!("pure phase remainder {phase:e}"))?;
    let lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(format!("min slope {lo:.3} over 10 directions; phase remainder {phase:.1e}"))
}

fn config() -> RunConfig {
    RunConfig::default()
}

fn check_report(rep: &Value) -> Result<(), String> {
    let failed: Vec<String> = rep["checks"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|c| c["verdict"] != "pass")
        .map(|c| c["tag"].to_string())
        .collect();
    ensure(failed.is_empty(), format!("failed checks {failed:?}"))
}

fn coercivity() -> Verdict {
    let mut cfg = config();
    cfg.samples = Some(10_000);
    cfg.seed = 7;
    let o = run_command(Cmd::Coercivity, &cfg).map_err(|e| e.to_string())?;
    check_report(&o.report)?;
    let rep = &o.report;
    let n = rep["samples"].as_array().map_or(0, |s| s.len());
    ensure(n == 10_000, format!("{n} samples"))?;
    let k = rep["K_sampled"].as_f64().unwrap_or(f64::NAN);
    ensure(k > 0.0, format!("K_sampled {k}"))?;
    let min_ratio = rep["samples"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|s| s[4].as_f64())
        .fold(f64::INFINITY, f64::min);
    let min_gap = rep["samples"].as_array().unwrap().iter().filter_map(|s| s[2].as_f64()).fold(f64::INFINITY, f64::min);
    ensure(min_gap >= 0.0, format!("negative gap {min_gap}"))?;
    ensure(min_ratio >= k, format!("ratio {min_ratio} below K_sampled {k}"))?;
    Ok(format!(
        "K_sampled {} (K_theory {:.4}), smallest gap {min_gap:.1e}",
        rep["K_sampled_2sig"].as_str().unwrap_or("?"),
        rep["K_theory"].as_f64().unwrap_or(f64::NAN)
    ))
}

fn rearrangement() -> Verdict {
    let mut cfg = config();
    cfg.samples = Some(1000);
    let o = run_command(Cmd::Rearrange, &cfg).map_err(|e| e.to_string())?;
    check_report(&o.report)?;
    let w = &o.report["worst"];
    Ok(format!(
        "1000 samples, zero violations; min W deficit {:.1e}, min HL deficit {:.1e}, equimeasure {:.1e}",
        w["w_deficit_min"].as_f64().unwrap_or(f64::NAN),
        w["hl_deficit_min"].as_f64().unwrap_or(f64::NAN),
        w["equimeasure_rel"].as_f64().unwrap_or(f64::NAN),
    ))
}

fn large_radius() -> Verdict {
    let o = run_command(Cmd::Sweep, &config()).map_err(|e| e.to_string())?;
    check_report(&o.report)?;
    let rep = &o.report;
    let change = rep["checks_detail"]["extrapolation_change"].as_f64().unwrap_or(f64::NAN);
    ensure(change < 1e-3, format!("extrapolation change {change}"))?;
    // screening shift on supported densities, independent of the report
    let g = RadialGrid::new(1.0, 400).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..100 {
        let mut rng = SampleRng::stream(99, i);
        let support = rng.range(0.3, 1.0);
        let f = random_profile(&g, &mut rng, true).map_err(|e| e.to_string())?;
        let cut: Vec<f64> = f.values().iter().zip(g.nodes()).map(|(v, r)| if *r <= support { *v } else { 0.0 }).collect();
        let psi = RadialFunction::new(g.clone(), cut).map_err(|e| e.to_string())?;
        let d = newton_shift_check(&psi, support).map_err(|e| e.to_string())?;
        ensure(d <= 1e-8, format!("shift deficit {d:e} (W = {})", interaction(&psi)))?;
        worst = worst.max(d);
    }
    Ok(format!(
        "E_inf {:.7}, change on dropping R=2 {change:.1e}; shift identity {:.1e}; Newton deficit {worst:.1e}",
        rep["extrapolation"]["E_inf"].as_f64().unwrap_or(f64::NAN),
        rep["checks_detail"]["shift_identity"].as_f64().unwrap_or(f64::NAN),
    ))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = vec![];
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.json"));
        let st = Command::new(env!("CARGO_BIN_EXE_pekar"))
            .args(["coercivity", "--samples", "10000", "--seed", "7", "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(st.code() == Some(0), format!("run {k} exited with {st}"))?;
        let json = std::fs::read(&out).map_err(|e| e.to_string())?;
        let csv = std::fs::read(out.with_extension("csv")).map_err(|e| e.to_string())?;
        bytes.push((json, csv));
    }
    ensure(bytes[0] == bytes[1], "reports differ between runs".into())?;
    Ok(format!("two runs, {} JSON bytes and {} CSV bytes identical", bytes[0].0.len(), bytes[0].1.len()))
}

fn main() {
    let start = Instant::now();
    let refined: Result<[PekarSolution; 2], String> =
        (|| Ok([solve(1.0, 2000, Method::Shooting)?, solve(1.0, 4000, Method::Shooting)?]))();
    let lazy = |f: fn(&[PekarSolution; 2]) -> Verdict| -> Verdict {
        match &refined {
            Ok(s) => f(s),
            Err(e) => Err(e.clone()),
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("discretization", Box::new(discretization)),
        ("minimizer", Box::new(minimizer)),
        ("lminus_structure", Box::new(|| lazy(lminus_structure))),
        ("projected_lplus", Box::new(|| lazy(projected_lplus))),
        ("angular_sectors", Box::new(|| lazy(angular_sectors))),
        ("hessian_expansion", Box::new(hessian_expansion)),
        ("coercivity", Box::new(coercivity)),
        ("rearrangement", Box::new(rearrangement)),
        ("large_radius", Box::new(large_radius)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = f();
        let secs = t.elapsed().as_secs_f64();
        match v {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed in {:.1}s",
        criteria.len() - failures,
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
