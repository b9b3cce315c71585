use std::sync::{Arc, OnceLock};

use pekar_core::asymptotics::newton_shift_check;
use pekar_core::coercivity::{aligned_distance, hessian_form, orbit_distance};
use pekar_core::functional::{energy, energy_complex, green_apply, interaction, Variant};
use pekar_core::hessian::{assemble_sector, OperatorKind};
use pekar_core::rearrange::{
    interaction_monotonicity_check, kinetic_monotonicity_check, symm_decr_rearrange,
    talenti_check, Distribution,
};
use pekar_core::rng::{random_profile, SampleRng};
use pekar_core::solver::{solve_minimizer, Method, PekarSolution, SolverOptions};
use pekar_core::{inner, Boundary, ComplexRadial, RadialFunction, RadialGrid};
use proptest::prelude::*;

fn grid(n: usize) -> Arc<RadialGrid> {
    RadialGrid::new(1.0, n).unwrap()
}

fn minimizer() -> &'static PekarSolution {
    static SOL: OnceLock<PekarSolution> = OnceLock::new();
    SOL.get_or_init(|| solve_minimizer(&grid(300), Method::Scf, &SolverOptions::default()).unwrap())
}

fn profile(g: &Arc<RadialGrid>, seed: u64, signed: bool) -> RadialFunction {
    random_profile(g, &mut SampleRng::new(seed), signed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_product_is_symmetric_and_bilinear(a in any::<u64>(), b in any::<u64>(), c in -3.0f64..3.0) {
        let g = grid(200);
        let (f, h) = (profile(&g, a, true), profile(&g, b, true));
        let fh = inner(&f, &h).unwrap();
        prop_assert!((fh - inner(&h, &f).unwrap()).abs() < 1e-14);
        let lhs = inner(&f.scaled(c).axpy(1.0, &h).unwrap(), &h).unwrap();
        prop_assert!((lhs - (c * fh + inner(&h, &h).unwrap())).abs() < 1e-12 * (1.0 + c.abs()));
        prop_assert!((f.normalized().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn green_operator_is_symmetric_positive(a in any::<u64>(), b in any::<u64>()) {
        let g = grid(150);
        let (f, h) = (profile(&g, a, true), profile(&g, b, true));
        let fgh = inner(&f, &green_apply(&h)).unwrap();
        let gfh = inner(&green_apply(&f), &h).unwrap();
        prop_assert!((fgh - gfh).abs() < 1e-12 * (1.0 + fgh.abs()));
        prop_assert!(inner(&f, &green_apply(&f)).unwrap() > 0.0);
    }

    #[test]
    fn energy_is_phase_invariant(a in any::<u64>(), b in any::<u64>(), theta in 0.0f64..6.3) {
        let g = grid(150);
        let psi = ComplexRadial::new(profile(&g, a, true), profile(&g, b, true)).unwrap();
        let e0 = energy_complex(&psi, Variant::BallGreen).e;
        let e1 = energy_complex(&psi.rotated(theta), Variant::BallGreen).e;
        prop_assert!((e0 - e1).abs() < 1e-11 * (1.0 + e0.abs()));
    }

    #[test]
    fn ball_and_full_space_energies_differ_by_inverse_radius(a in any::<u64>()) {
        let g = grid(150);
        let f = profile(&g, a, true);
        let d = energy(&f, Variant::BallGreen).e - energy(&f, Variant::FullSpaceKernel).e;
        prop_assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rearrangement_invariants(a in any::<u64>()) {
        let g = grid(300);
        let f = profile(&g, a, true);
        let s = symm_decr_rearrange(&f);
        prop_assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(symm_decr_rearrange(&s), s.clone());
        let d = Distribution::of(&f);
        let mut sorted: Vec<f64> = f.values().iter().map(|x| x.abs()).collect();
        sorted.sort_by(|x, y| y.total_cmp(x));
        prop_assert_eq!(d.levels(), &sorted[..]);
        prop_assert!((d.integral_pow(2) - f.norm_pow(2)).abs() < 1e-13);
    }

    #[test]
    fn rearrangement_inequalities(a in any::<u64>()) {
        let g = grid(300);
        let f = profile(&g, a, false);
        prop_assert!(talenti_check(&f).pass);
        let psi = profile(&g, a ^ 0x5555, true);
        let m = interaction_monotonicity_check(&psi);
        prop_assert!(m.w_deficit >= -1e-8 && m.hl_deficit >= -1e-8);
        prop_assert!(kinetic_monotonicity_check(&psi).pass);
    }

    #[test]
    fn newton_shift_identity(a in any::<u64>(), support in 0.3f64..1.0) {
        let g = grid(400);
        let f = profile(&g, a, true);
        let cut = RadialFunction::from_fn(g.clone(), |r| if r <= support { 1.0 } else { 0.0 }).unwrap();
        let psi = RadialFunction::new(g.clone(), f.values().iter().zip(cut.values()).map(|(x, c)| x * c).collect()).unwrap();
        let scale = interaction(&psi).abs().max(1.0);
        prop_assert!(newton_shift_check(&psi, support).unwrap() <= 1e-8 * scale);
    }

    #[test]
    fn sector_operators_are_symmetric(l in 0u32..5, a in any::<u64>(), b in any::<u64>()) {
        let sol = minimizer();
        let g = sol.grid();
        let (x, y) = (profile(g, a, true).sigma(), profile(g, b, true).sigma());
        for kind in [OperatorKind::Lminus, OperatorKind::Lplus, OperatorKind::LplusTilde] {
            let op = assemble_sector(sol, l, kind, Boundary::Dirichlet, 1e-6).unwrap();
            let xay: f64 = x.iter().zip(op.apply(&y)).map(|(p, q)| p * q).sum();
            let yax: f64 = y.iter().zip(op.apply(&x)).map(|(p, q)| p * q).sum();
            prop_assert!((xay - yax).abs() <= 1e-9 * (1.0 + xay.abs()));
        }
    }

    #[test]
    fn hessian_is_non_negative(a in any::<u64>(), b in any::<u64>()) {
        let sol = minimizer();
        let g = sol.grid();
        let d = ComplexRadial::new(profile(g, a, true), profile(g, b, true)).unwrap();
        prop_assert!(hessian_form(sol, &d).unwrap() >= -1e-10);
    }

    #[test]
    fn phase_minimized_distance_is_smallest(a in any::<u64>(), t in 0.01f64..1.0, theta in 0.0f64..6.3) {
        let sol = minimizer();
        let g = sol.grid();
        let z = ComplexRadial::new(profile(g, a, true), profile(g, a.wrapping_add(1), true)).unwrap();
        let mix = ComplexRadial::new(sol.phi.axpy(t, &z.re).unwrap(), z.im.scaled(t)).unwrap();
        let phi = mix.scaled(1.0 / mix.norm()).rotated(theta);
        let (d, _) = orbit_distance(sol, &phi).unwrap();
        prop_assert!(d <= aligned_distance(sol, &phi).unwrap() + 1e-12);
        for k in 0..8 {
            let rot = ComplexRadial::real(sol.phi.clone()).rotated(k as f64 * 0.8);
            let dd = ComplexRadial::new(rot.re.axpy(-1.0, &phi.re).unwrap(), rot.im.axpy(-1.0, &phi.im).unwrap()).unwrap();
            let other = pekar_core::functional::kinetic(&dd.re) + pekar_core::functional::kinetic(&dd.im);
            prop_assert!(d <= other + 1e-12);
        }
    }
}
