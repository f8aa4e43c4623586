use num_complex::Complex64 as C64;
use shearlab::diagnostics::{fit_rate, DecayModel};
use shearlab::evolution::*;
use shearlab::grid::{rel_l2_diff, Grid};
use shearlab::numerics::quad;
use shearlab::orr_sommerfeld::InitialData;
use shearlab::profile::{build_profile, Discretization, ModeParams, ProfileKind, ShearProfile};
use shearlab::Error;

fn bump() -> ShearProfile {
    build_profile(ProfileKind::Bump, 0.3, 1.0).unwrap()
}

fn mode(nu: f64) -> ModeParams {
    ModeParams::new(1, nu).unwrap()
}

#[test]
fn representation_at_time_zero_recovers_the_initial_data() {
    let p = bump();
    let init = InitialData::default();
    let disc = Discretization::new(&p, Grid::symmetric(5.0, 0.005));
    let wgrid = default_wgrid(&disc, 2.0, 0.01);
    let s = evolve_representation(&p, &mode(1e-2), &init, &disc, &wgrid, &[0.0]).unwrap();
    let err = rel_l2_diff(&s.omega_t[0], &init.omega0(&disc.grid));
    assert!(err < 1e-3, "{err}");
}

#[test]
fn direct_at_time_zero_is_the_identity() {
    let p = bump();
    let init = InitialData::default();
    let disc = Discretization::new(&p, Grid::symmetric(5.0, 0.005));
    let s = evolve_direct(&mode(1e-2), &init, &disc, &[0.0], 0.01).unwrap();
    assert_eq!(s.omega_t[0], init.omega0(&disc.grid));
}

#[test]
fn both_paths_match_the_couette_closed_form() {
    let p = ShearProfile::couette();
    let init = InitialData::default();
    let m = mode(1e-2);
    let disc = Discretization::new(&p, Grid::symmetric(5.0, 0.005));
    let times = [0.0, 2.0, 5.0];
    let exact = couette_closed_form(&m, &init, &disc.grid, &times).unwrap();
    let direct = evolve_direct(&m, &init, &disc, &times, 0.005).unwrap();
    let rep = evolve_representation(&p, &m, &init, &disc, &default_wgrid(&disc, 2.0, 0.01), &times).unwrap();
    for errs in [compare_series(&direct, &exact).unwrap(), compare_series(&rep, &exact).unwrap()] {
        assert!(errs.iter().all(|e| *e < 1e-3), "{errs:?}");
    }
}

#[test]
fn crank_nicolson_is_second_order() {
    let p = bump();
    let init = InitialData::default();
    let m = mode(1e-2);
    let disc = Discretization::new(&p, Grid::symmetric(5.0, 0.01));
    let run = |dt: f64| evolve_direct(&m, &init, &disc, &[2.0], dt).unwrap().omega_t.remove(0);
    let (a, b, c) = (run(0.016), run(0.008), run(0.004));
    let ratio = rel_l2_diff(&a, &b) / rel_l2_diff(&b, &c);
    assert!((ratio - 4.0).abs() < 0.4, "{ratio}");
}

#[test]
fn stream_function_stays_consistent_with_vorticity() {
    let p = bump();
    let init = InitialData::default();
    let disc = Discretization::new(&p, Grid::symmetric(5.0, 0.01));
    let s = evolve_direct(&mode(1e-2), &init, &disc, &[1.0, 3.0], 0.01).unwrap();
    let h2 = disc.grid.h * disc.grid.h;
    for (w, psi) in s.omega_t.iter().zip(&s.psi_t) {
        let n = w.len();
        for j in 0..n {
            let l = if j > 0 { psi[j - 1] } else { C64::new(0.0, 0.0) };
            let r = if j + 1 < n { psi[j + 1] } else { C64::new(0.0, 0.0) };
            let lap = (l - 2.0 * psi[j] + r) / h2 - psi[j];
            assert!((lap - w[j]).norm() < 1e-10 * (1.0 + w[j].norm()));
        }
    }
}

#[test]
fn bump_paths_agree() {
    let p = bump();
    let init = InitialData::default();
    let m = mode(1e-3);
    let disc = Discretization::new(&p, Grid::symmetric(5.0, 0.005));
    let times = [0.0, 4.0];
    let direct = evolve_direct(&m, &init, &disc, &times, 0.005).unwrap();
    let rep = evolve_representation(&p, &m, &init, &disc, &default_wgrid(&disc, 2.0, 0.01), &times).unwrap();
    let errs = compare_series(&rep, &direct).unwrap();
    assert!(errs.iter().all(|e| *e < 5e-3), "{errs:?}");
}

#[test]
fn couette_multiplier_solves_the_characteristic_equation() {
    let (nu, k) = (1e-3, 1.0);
    for &(t, eta) in &[(10.0, 10.0), (10.0, 0.0), (3.0, -2.0)] {
        let f = |s: f64| C64::new(k * k + (eta - k * s).powi(2), 0.0);
        let integral = quad::integrate_panels(f, &[0.0, t], 1e-14, 1e-12).value.re;
        let expect = (-nu * integral).exp();
        assert!((couette_multiplier(nu, k, t, eta) - expect).abs() < 1e-13);
    }
    // observed at xi = 0, t = 10: e^{-nu (k^2 t + t^3/3)}
    let spot = couette_multiplier(1e-3, 1.0, 10.0, 10.0);
    assert!((spot - (-1e-2f64 - 1e3 / 3.0 * 1e-3).exp()).abs() < 1e-15);
}

#[test]
fn dissipation_prefactor() {
    let m = mode(1e-3);
    assert_eq!(dissipation_factor(&m, 0.0), 1.0);
    assert!((dissipation_factor(&m, 20.0) - (-2e-2f64).exp()).abs() < 1e-16);
}

#[test]
fn nearly_inviscid_couette_profile_is_frozen() {
    let p = ShearProfile::couette();
    let init = InitialData::default();
    let grid = Grid::symmetric(6.0, 0.01);
    let mut s = couette_closed_form(&mode(1e-9), &init, &grid, &[0.0, 5.0, 10.0]).unwrap();
    extract_profiles(&mut s, &p, &Grid::symmetric(5.0, 0.01)).unwrap();
    let f = &s.profiles.as_ref().unwrap().f_t;
    let f0 = init.f0(&p, &Grid::symmetric(5.0, 0.01)).unwrap();
    assert!(rel_l2_diff(&f[0], &f0) < 1e-10);
    for ft in &f[1..] {
        assert!(rel_l2_diff(ft, &f[0]) < 1e-4, "{}", rel_l2_diff(ft, &f[0]));
    }
}

#[test]
fn inviscid_couette_stream_decays_like_t_to_minus_two() {
    let p = ShearProfile::couette();
    let grid = Grid::symmetric(6.0, 0.01);
    let times: Vec<f64> = (0..=18).map(|i| 5.0 + 2.5 * i as f64).collect();
    let s = couette_closed_form(&mode(1e-9), &InitialData::default(), &grid, &times).unwrap();
    let rows: Vec<(f64, f64)> = profile_norms(&s, &p).iter().map(|r| (r.t, r.l2_phi)).collect();
    let fit = fit_rate(&rows, DecayModel::Power, None).unwrap();
    assert!((fit.rate + 2.0).abs() < 0.3, "{}", fit.rate);
}

#[test]
fn extracted_profiles_start_at_the_initial_profile() {
    let p = bump();
    let init = InitialData::default();
    let disc = Discretization::new(&p, Grid::symmetric(5.0, 0.01));
    let mut s = evolve_direct(&mode(1e-2), &init, &disc, &[0.0, 1.0], 0.01).unwrap();
    let vgrid = Grid::with_spacing(p.b(-4.5), p.b(4.5), 0.01);
    extract_profiles(&mut s, &p, &vgrid).unwrap();
    let f0 = init.f0(&p, &vgrid).unwrap();
    assert!(rel_l2_diff(&s.profiles.as_ref().unwrap().f_t[0], &f0) < 1e-6);
    assert!(extract_profiles(&mut s, &p, &Grid::symmetric(9.0, 0.01)).is_err());
}

#[test]
fn preconditions_are_enforced() {
    let p = bump();
    let init = InitialData::default();
    let m = mode(1e-2);
    let disc = Discretization::new(&p, Grid::symmetric(5.0, 0.01));
    let wide = default_wgrid(&disc, 2.0, 0.05);
    assert!(matches!(
        evolve_representation(&p, &m, &init, &disc, &wide, &[0.0, 10.0]),
        Err(Error::PhaseUnderresolved(_))
    ));
    let narrow = Grid::new(-1.0, 1.0, 201);
    assert!(matches!(evolve_representation(&p, &m, &init, &disc, &narrow, &[0.0]), Err(Error::InvalidArgument(_))));
    assert!(matches!(evolve_direct(&m, &init, &disc, &[1.0], 0.05), Err(Error::StepTooLarge(_))));
    assert!(matches!(evolve_direct(&m, &init, &disc, &[0.015], 0.01), Err(Error::InvalidArgument(_))));
    assert!(matches!(evolve_direct(&m, &init, &disc, &[2.0, 1.0], 0.01), Err(Error::InvalidArgument(_))));
    let coarse = Discretization::new(&p, Grid::symmetric(5.0, 0.05));
    assert!(matches!(evolve_direct(&mode(1e-4), &init, &coarse, &[1.0], 0.01), Err(Error::CriticalLayerUnresolved { .. })));
}
