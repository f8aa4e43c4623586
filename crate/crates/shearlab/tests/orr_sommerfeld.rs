use num_complex::Complex64 as C64;
use shearlab::airy::{airy_resolvent_solve, ResolventQuery};
use shearlab::grid::{rel_l2_diff, Grid};
use shearlab::orr_sommerfeld::*;
use shearlab::profile::{build_profile, Discretization, ModeParams, ProfileKind, ShearProfile};
use shearlab::Error;

fn bump() -> ShearProfile {
    build_profile(ProfileKind::Bump, 0.3, 1.0).unwrap()
}

fn gaussian(grid: &Grid, c: f64) -> Vec<C64> {
    grid.sample(|y| C64::new((-2.0 * (y - c) * (y - c)).exp(), 0.0))
}

#[test]
fn couette_reduces_to_airy() {
    let p = ShearProfile::couette();
    let mode = ModeParams::new(1, 1e-3).unwrap();
    let grid = Grid::symmetric(5.0, 0.01);
    let disc = Discretization::new(&p, grid.clone());
    let f = gaussian(&grid, 0.2);
    for &(alpha, y0) in &[(0.0, 0.0), (0.01, 0.3), (0.5, -1.0)] {
        let q = ResolventQuery::new(mode.eps, alpha, y0).unwrap();
        let s = os_resolvent_solve(&p, &mode, &q, &disc, &f).unwrap();
        let w = airy_resolvent_solve(&p, &q, &grid, &f).unwrap();
        let err = s.w.iter().zip(&w).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale, "err = {err:e}");
    }
}

#[test]
fn strategies_agree_with_dense_oracle() {
    let p = bump();
    let mode = ModeParams::new(1, 1e-2).unwrap();
    let grid = Grid::symmetric(4.0, 0.02);
    let disc = Discretization::new(&p, grid.clone());
    let f = gaussian(&grid, -0.3);
    for &(alpha, y0) in &[(0.0, 0.0), (0.0, 0.7), (0.05, -0.4)] {
        let q = ResolventQuery::new(mode.eps, alpha, y0).unwrap();
        let dense = os_resolvent_solve_with(&p, &mode, &q, &disc, &f, SolveStrategy::Dense).unwrap();
        for strategy in [SolveStrategy::Banded, SolveStrategy::Woodbury] {
            let s = os_resolvent_solve_with(&p, &mode, &q, &disc, &f, strategy).unwrap();
            let d = rel_l2_diff(&s.w, &dense.w);
            assert!(d < 1e-9, "{strategy:?}: {d:e}");
            assert!(s.residual < 1e-9, "{strategy:?}: residual {:e}", s.residual);
        }
    }
}

#[test]
fn stream_function_solves_the_elliptic_equation() {
    let p = bump();
    let mode = ModeParams::new(2, 1e-3).unwrap();
    let grid = Grid::symmetric(4.0, 0.005);
    let disc = Discretization::new(&p, grid.clone());
    let q = ResolventQuery::new(mode.eps, 0.0, 0.1).unwrap();
    let s = os_resolvent_solve(&p, &mode, &q, &disc, &gaussian(&grid, 0.0)).unwrap();
    let d2 = shearlab::numerics::poisson::second_difference(&s.psi, grid.h);
    let r = d2.iter().zip(&s.psi).zip(&s.w).map(|((a, b), c)| (a - 4.0 * b - c).norm()).fold(0.0, f64::max);
    let scale = s.w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(r < 1e-9 * scale, "{r:e}");
}

#[test]
fn mismatched_eps_and_bad_resolution_are_rejected() {
    let p = bump();
    let mode = ModeParams::new(1, 1e-3).unwrap();
    let grid = Grid::symmetric(4.0, 0.01);
    let disc = Discretization::new(&p, grid.clone());
    let f = gaussian(&grid, 0.0);
    let q = ResolventQuery::new(2e-3, 0.0, 0.0).unwrap();
    assert!(matches!(os_resolvent_solve(&p, &mode, &q, &disc, &f), Err(Error::InvalidArgument(_))));
    let coarse = Discretization::new(&p, Grid::symmetric(4.0, 0.05));
    let q = ResolventQuery::new(mode.eps, 0.0, 0.0).unwrap();
    let fc = gaussian(&coarse.grid, 0.0);
    assert!(matches!(os_resolvent_solve(&p, &mode, &q, &coarse, &fc), Err(Error::CriticalLayerUnresolved { .. })));
}

#[test]
fn stream_side_spectrum_is_flat() {
    let p = bump();
    let mode = ModeParams::new(1, 1e-3).unwrap();
    let grid = Grid::symmetric(6.0, 0.01);
    let disc = Discretization::new(&p, grid.clone());
    let q = ResolventQuery::new(mode.eps, 0.0, 0.2).unwrap();
    let s = os_resolvent_solve(&p, &mode, &q, &disc, &gaussian(&grid, 0.0)).unwrap();
    let fl = stream_flatness(&grid, 1.0, &s.psi);
    assert!(fl.sup.is_finite() && fl.sup > 0.0);
    // <k,xi>^2 |psi^| stays bounded: the tail does not exceed the bulk
    assert!(fl.tail_sup <= fl.sup, "{fl:?}");
}

#[test]
fn initial_data_is_compact_and_maps_to_v() {
    let p = bump();
    let init = InitialData::default();
    assert_eq!(init.omega0_at(3.0), 0.0);
    assert_eq!(init.omega0_at(-3.5), 0.0);
    assert!((init.omega0_at(0.0) - 1.0).abs() < 1e-15);
    let vgrid = Grid::symmetric(2.0, 0.1);
    let f0 = init.f0(&p, &vgrid).unwrap();
    for (j, v) in vgrid.nodes().into_iter().enumerate() {
        let y = shearlab::profile::invert_profile(&p, v).unwrap();
        assert!((f0[j].re - init.omega0_at(y)).abs() < 1e-14);
    }
    assert!(init.check_inside(&Grid::symmetric(3.0, 0.1)).is_err());
    assert!(init.check_inside(&Grid::symmetric(4.0, 0.1)).is_ok());
}

#[test]
fn couette_density_columns_are_airy_resolvents() {
    let p = ShearProfile::couette();
    let mode = ModeParams::new(1, 1e-3).unwrap();
    let init = InitialData::default();
    let grid = Grid::symmetric(5.0, 0.01);
    let disc = Discretization::new(&p, grid.clone());
    let vgrid = grid.clone();
    let wgrid = Grid::new(-1.0, 1.0, 5);
    let field = spectral_density(&p, &mode, &init, &disc, &vgrid, &wgrid).unwrap();
    let f0 = init.omega0(&grid);
    for (iw, w) in wgrid.nodes().into_iter().enumerate() {
        let q = ResolventQuery::new(mode.eps, 0.0, w).unwrap();
        let a = airy_resolvent_solve(&p, &q, &grid, &f0).unwrap();
        let d = rel_l2_diff(&field.omega[iw], &a);
        assert!(d < 1e-10, "w = {w}: {d:e}");
    }
}

#[test]
fn negating_k_gives_negated_conjugate_field() {
    let p = bump();
    let init = InitialData::default();
    let grid = Grid::symmetric(5.0, 0.02);
    let disc = Discretization::new(&p, grid.clone());
    let wgrid = Grid::new(-1.5, 1.5, 7);
    let plus = spectral_density(&p, &ModeParams::new(1, 1e-2).unwrap(), &init, &disc, &grid, &wgrid).unwrap();
    let minus = spectral_density(&p, &ModeParams::new(-1, 1e-2).unwrap(), &init, &disc, &grid, &wgrid).unwrap();
    for iw in 0..wgrid.n {
        let neg: Vec<C64> = plus.omega[iw].iter().map(|z| -z.conj()).collect();
        assert!(rel_l2_diff(&minus.omega[iw], &neg) < 1e-12);
        let negt: Vec<C64> = plus.theta[iw].iter().map(|z| -z.conj()).collect();
        assert!(rel_l2_diff(&minus.theta[iw], &negt) < 1e-12);
    }
}

#[test]
fn theta_is_shifted_pi() {
    let p = bump();
    let mode = ModeParams::new(1, 1e-2).unwrap();
    let init = InitialData::default();
    let grid = Grid::symmetric(5.0, 0.02);
    let disc = Discretization::new(&p, grid.clone());
    let vgrid = Grid::symmetric(2.0, 0.02);
    let wgrid = Grid::new(-0.5, 0.5, 3);
    let field = spectral_density(&p, &mode, &init, &disc, &vgrid, &wgrid).unwrap();
    // w = 0 column: Theta(v, 0) = Pi(v, 0)
    let d = rel_l2_diff(&field.theta[1], &field.pi[1]);
    assert!(d < 1e-12, "{d:e}");
}

#[test]
fn couette_integral_form_is_the_forcing() {
    let p = ShearProfile::couette();
    let mode = ModeParams::new(1, 1e-3).unwrap();
    let disc = Discretization::new(&p, Grid::symmetric(5.0, 0.01));
    let col = theta_integral_solve(&p, &mode, &InitialData::default(), &disc, 0.3).unwrap();
    assert_eq!(col.theta, col.forcing);
    assert!((col.h1_ratio - 1.0).abs() < 1e-15);
}

#[test]
fn theta_two_paths_agree_for_bump() {
    let p = bump();
    let init = InitialData::default();
    for &(k, nu) in &[(1, 1e-3), (2, 1e-3), (1, 1e-4)] {
        let mode = ModeParams::new(k, nu).unwrap();
        let h = shearlab::airy::critical_spacing(mode.eps).min(0.01);
        // whole-line Green's function on one side, Dirichlet truncation on the other
        let disc = Discretization::new(&p, Grid::symmetric(9.0, h));
        let cols = DensityColumns::new(&p, mode, &disc, &init).unwrap();
        for &w in &[-0.8, 0.0, 0.45, 1.3] {
            let direct = cols.solve(w).unwrap();
            let integral = theta_integral_solve(&p, &mode, &init, &disc, w).unwrap();
            let d = rel_l2_diff(&integral.theta, &direct.psi);
            assert!(d <= 5e-3, "k={k} nu={nu} w={w}: {d:e}");
            assert!(integral.h1_ratio < 10.0, "{}", integral.h1_ratio);
        }
    }
}

#[test]
fn lap_kappa_is_one_for_couette() {
    let p = ShearProfile::couette();
    let spec = LapScanSpec { k: 1, eps: vec![1e-2, 1e-3], alpha_over_eps: vec![0.0, 1.0], y0: vec![-1.0, 0.0, 1.0], half_width: 4.0 };
    let r = lap_kappa_scan(&p, &spec).unwrap();
    assert_eq!(r.kappa_min, 1.0);
    assert_eq!(r.coupling_norm_max, 0.0);
}

#[test]
fn lap_kappa_matches_dense_oracle() {
    let p = bump();
    let disc = Discretization::new(&p, Grid::symmetric(3.0, critical_spacing_for(1e-2)));
    for &(alpha, y0) in &[(0.0, 0.0), (0.01, 0.5), (0.0, -1.5)] {
        let q = ResolventQuery::new(1e-2, alpha, y0).unwrap();
        let fast = lap_kappa_point(&p, 1, &disc, &q).unwrap();
        let (kd, ed) = lap_kappa_dense(&p, 1, &disc, &q).unwrap();
        assert!((fast.kappa - kd.min(1.0)).abs() < 1e-8, "{} vs {kd}", fast.kappa);
        assert!((fast.coupling_norm - ed).abs() < 1e-8 * ed, "{} vs {ed}", fast.coupling_norm);
        assert!(fast.kappa >= 1.0 - fast.coupling_norm - 1e-12);
    }
}

fn critical_spacing_for(eps: f64) -> f64 {
    shearlab::airy::critical_spacing(eps)
}

#[test]
fn lap_kappa_bump_is_bounded_below() {
    let p = bump();
    let spec = LapScanSpec {
        k: 1,
        eps: vec![1e-2, 1e-3],
        alpha_over_eps: vec![0.0, 1.0],
        y0: vec![-1.5, -0.5, 0.0, 0.5, 1.5],
        half_width: 4.0,
    };
    let r = lap_kappa_scan(&p, &spec).unwrap();
    assert!(r.kappa_min > 0.01);
    assert!(r.kappa_min < 1.0);
    assert!(r.eps_variation < 2.0);
}

#[test]
fn lap_scan_rejects_negative_alpha() {
    let spec = LapScanSpec { k: 1, eps: vec![1e-2], alpha_over_eps: vec![-1.0], y0: vec![0.0], half_width: 3.0 };
    assert!(matches!(lap_kappa_scan(&bump(), &spec), Err(Error::SignViolation(_))));
}

fn g(y: f64) -> f64 {
    (-y * y).exp()
}

#[test]
fn pv_delta_limit_for_couette() {
    let p = ShearProfile::couette();
    let seq = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let plus = pv_delta_limit_check(&p, g, g, 0.0, &seq, 8.0).unwrap();
    assert!(plus.decreasing);
    assert!(plus.final_error <= 5e-2);
    assert!(plus.sign_consistent);
    let neg: Vec<f64> = seq.iter().map(|e| -e).collect();
    let minus = pv_delta_limit_check(&p, g, g, 0.0, &neg, 8.0).unwrap();
    assert!(minus.decreasing && minus.final_error <= 5e-2 && minus.sign_consistent);
    assert!(plus.values.last().unwrap().re < 0.0 && minus.values.last().unwrap().re > 0.0);
}

#[test]
fn pv_limit_without_delta_term() {
    let p = bump();
    let f = |y: f64| y * (-y * y).exp();
    let seq = [1e-2, 1e-3, 1e-4];
    let r = pv_delta_limit_check(&p, f, g, 0.0, &seq, 8.0).unwrap();
    assert_eq!(r.delta_weight, 0.0);
    assert_eq!(r.limit_plus, r.limit_minus);
    assert!(r.final_error < 5e-2);
}
