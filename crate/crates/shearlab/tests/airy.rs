use num_complex::Complex64 as C64;
use shearlab::airy::*;
use shearlab::grid::Grid;
use shearlab::numerics::dense;
use shearlab::profile::{build_profile, Discretization, ModeParams, ProfileKind, ShearProfile};

fn bump() -> ShearProfile {
    build_profile(ProfileKind::Bump, 0.3, 1.0).unwrap()
}

fn gaussian(grid: &Grid, c: f64) -> Vec<C64> {
    grid.sample(|y| C64::new((-(y - c) * (y - c)).exp(), 0.0))
}

#[test]
fn resolvent_matches_dense_solve() {
    let p = ShearProfile::couette();
    let grid = Grid::symmetric(6.0, 0.1);
    let q = ResolventQuery::new(1.0, 0.0, 0.0).unwrap();
    let f = gaussian(&grid, 0.3);
    let w = airy_resolvent_solve(&p, &q, &grid, &f).unwrap();
    let n = grid.n;
    let h2 = grid.h * grid.h;
    let m = faer::Mat::from_fn(n, n, |i, j| {
        let v = if i == j {
            C64::new(-2.0 / h2, -grid.x(i))
        } else if i + 1 == j || j + 1 == i {
            C64::new(1.0 / h2, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        dense::to_c64(v)
    });
    let wd = dense::solve(&m, &f).unwrap();
    let err = w.iter().zip(&wd).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "err = {err:e}");
}

#[test]
fn zero_forcing_gives_zero() {
    let p = bump();
    let grid = Grid::symmetric(4.0, 0.01);
    let q = ResolventQuery::new(1e-3, 0.0, 0.2).unwrap();
    let w = airy_resolvent_solve(&p, &q, &grid, &vec![C64::new(0.0, 0.0); grid.n]).unwrap();
    assert!(w.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn energy_ratio_is_moderate_for_bump() {
    let p = bump();
    let eps: f64 = 1e-3;
    let grid = Grid::symmetric(6.0, critical_spacing(eps));
    let q = ResolventQuery::new(eps, 0.0, 0.0).unwrap();
    let f = gaussian(&grid, 0.0);
    let w = airy_resolvent_solve(&p, &q, &grid, &f).unwrap();
    let disc = Discretization::new(&p, grid.clone());
    let op = AiryOperator::new(&p, &q, &disc).unwrap();
    assert!(op.residual(&w, &f) < 1e-10);
    let r = energy_ratio(&grid, &q, &w, &f);
    assert!(r <= 20.0, "energy ratio {r}");
}

#[test]
fn unresolved_layer_and_sign_are_rejected() {
    let grid = Grid::symmetric(2.0, 0.05);
    let q = ResolventQuery::new(1e-4, 0.0, 0.0).unwrap();
    let f = gaussian(&grid, 0.0);
    assert!(matches!(
        airy_resolvent_solve(&ShearProfile::couette(), &q, &grid, &f),
        Err(shearlab::Error::CriticalLayerUnresolved { .. })
    ));
    assert!(matches!(ResolventQuery::new(1e-3, -1.0, 0.0), Err(shearlab::Error::SignViolation(_))));
}

#[test]
fn model_w_asymptotics() {
    let w = model_airy_w(0.0, &[0.0, 10.0]).unwrap();
    let exact0 = -(3f64).powf(-2.0 / 3.0) * 2.678_938_534_707_747_6;
    assert!((w.values[0].re - exact0).abs() < 1e-6);
    assert!((C64::new(0.0, -10.0) * w.values[1] - 1.0).norm() <= 0.05);
    let w = model_airy_w(20.0, &[0.0]).unwrap();
    assert!((-20.0 * w.values[0] - 1.0).norm() <= 0.05);
    assert!(model_airy_w(-1.0, &[0.0]).is_err());
}

#[test]
fn model_w_solves_its_equation() {
    // W'' - a W - i Y W = 1 by a fourth-order difference of the quadrature values
    let a = 0.7;
    let h = 0.01;
    for &y in &[-2.0, 0.0, 1.3, 3.0] {
        let ys: Vec<f64> = (-2..=2).map(|j| y + j as f64 * h).collect();
        let w = model_airy_w(a, &ys).unwrap().values;
        let d2 = (-w[0] + 16.0 * w[1] - 30.0 * w[2] + 16.0 * w[3] - w[4]) / (12.0 * h * h);
        let r = d2 - a * w[2] - C64::new(0.0, y) * w[2];
        assert!((r - 1.0).norm() < 1e-6, "Y = {y}: {r}");
    }
}

#[test]
fn couette_constant_forcing_matches_rescaled_model() {
    let p = ShearProfile::couette();
    for &eps in &[1e-2f64, 1e-3] {
        let l: f64 = eps.cbrt();
        let grid = Grid::symmetric(24.0 * l, l / 64.0);
        let q = ResolventQuery::new(eps, 0.0, 0.0).unwrap();
        let f = vec![C64::new(1.0, 0.0); grid.n];
        let w = airy_resolvent_solve(&p, &q, &grid, &f).unwrap();
        let ys = grid.nodes();
        let idx: Vec<usize> = (0..grid.n).filter(|&j| ys[j].abs() <= 8.0 * l).collect();
        let sel: Vec<f64> = idx.iter().map(|&j| ys[j]).collect();
        let exact = couette_constant_rhs(eps, 0.0, 0.0, C64::new(1.0, 0.0), &sel);
        let scale = exact.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = idx.iter().zip(&exact).map(|(&j, e)| (w[j] - e).norm()).fold(0.0, f64::max) / scale;
        assert!(err < 1e-4, "eps = {eps}: {err:e}");
    }
}

#[test]
fn couette_kernel_matches_explicit_formula() {
    let p = ShearProfile::couette();
    let eps: f64 = 1e-3;
    let l = eps.cbrt();
    let grid = Grid::symmetric(16.0 * l, l / 64.0);
    for &(alpha, z) in &[(0.0, 0.0), (0.0, 0.05), (l, -0.08)] {
        let q = ResolventQuery::new(eps, alpha, 0.0).unwrap();
        let col = airy_kernel_column(&p, &q, &grid, z).unwrap();
        let zs = col.source;
        let scale = col.values[col.source_index].norm();
        let mut err: f64 = 0.0;
        for j in (0..grid.n).step_by(7) {
            let y = grid.x(j);
            if (y - zs).abs() > 10.0 * l {
                continue;
            }
            let e = couette_kernel_explicit(eps, alpha, 0.0, y, zs);
            err = err.max((col.values[j] - e).norm() / scale);
        }
        assert!(err < 1e-4, "alpha = {alpha}, z = {z}: {err:e}");
    }
}

#[test]
fn kernel_column_reproduces_delta() {
    let p = bump();
    let eps: f64 = 1e-3;
    let grid = Grid::symmetric(3.0, critical_spacing(eps));
    let q = ResolventQuery::new(eps, 0.05, 0.4).unwrap();
    let disc = Discretization::new(&p, grid.clone());
    let op = AiryOperator::new(&p, &q, &disc).unwrap();
    let col = op.kernel_column(grid.nearest(0.1));
    let r = op.apply(&col.values);
    let inv_h = 1.0 / grid.h;
    for (j, v) in r.iter().enumerate() {
        let target = if j == col.source_index { inv_h } else { 0.0 };
        assert!((v - target).norm() <= 1e-8 * inv_h);
    }
    let ends = col.values[0].norm().max(col.values[grid.n - 1].norm());
    assert!(ends < 1e-10);
}

#[test]
fn negating_eps_and_alpha_negates_the_conjugate_kernel() {
    let p = bump();
    let eps = 2e-3;
    let grid = Grid::symmetric(3.0, critical_spacing(eps));
    let a = airy_kernel_column(&p, &ResolventQuery::new(eps, 0.1, 0.2).unwrap(), &grid, -0.3).unwrap();
    let b = airy_kernel_column(&p, &ResolventQuery::new(-eps, -0.1, 0.2).unwrap(), &grid, -0.3).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x.conj() + y).norm() < 1e-9 * a.values[a.source_index].norm());
    }
}

#[test]
fn rescaled_couette_kernel_is_scale_free() {
    let p = ShearProfile::couette();
    let zs = [-2.0, 0.0, 3.0];
    let a = rescaled_kernel_scan(&p, 1e-2, 0.0, &[0.0], &zs, 12.0, 1.0 / 32.0).unwrap();
    let b = rescaled_kernel_scan(&p, 1e-4, 0.0, &[0.0], &zs, 12.0, 1.0 / 32.0).unwrap();
    for (ca, cb) in a.iter().zip(&b) {
        let (ra, rb) = (ca.rescaled().unwrap(), cb.rescaled().unwrap());
        let scale = ra.values[ra.z_index].norm();
        for (x, y) in ra.values.iter().zip(&rb.values) {
            assert!((x - y).norm() < 1e-4 * scale);
        }
    }
}

#[test]
fn couette_vw_kernel_does_not_depend_on_w() {
    let p = ShearProfile::couette();
    let mode = ModeParams::new(1, 1e-3).unwrap();
    let disc = Discretization::new(&p, Grid::symmetric(3.0, 0.01));
    let a = airy_kernel_vw(&p, &mode, &disc, 0.2, 0.0).unwrap();
    let b = airy_kernel_vw(&p, &mode, &disc, 0.2, 0.5).unwrap();
    // same shifted coordinates: v = y - w, so compare at matching v
    let shift = (0.5 / disc.grid.h).round() as usize;
    for j in shift..disc.grid.n - shift {
        let (va, vb) = (a.values[j], b.values[j + shift]);
        if a.coords[j].abs() < 1.5 {
            assert!((va - vb).norm() < 1e-10 * a.values[a.source_index].norm());
        }
    }
}

#[test]
fn vw_kernel_paths_agree() {
    let p = bump();
    let mode = ModeParams::new(1, 1e-2).unwrap();
    let (rho, w) = (0.15, 0.1);
    let h = 2e-4;
    let disc = Discretization::new(&p, Grid::symmetric(2.5, h));
    let a = airy_kernel_vw(&p, &mode, &disc, rho, w).unwrap();
    // put the snapped source exactly on a v-node
    let vgrid = Grid::with_spacing(a.source - 10_000.0 * h, 2.0, h);
    let b = airy_kernel_vw_direct(&p, &mode, &vgrid, a.source, w).unwrap();
    let scale = a.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut err: f64 = 0.0;
    for (j, &v) in a.coords.iter().enumerate() {
        if v.abs() > 1.5 || (v - a.source).abs() < 0.05 {
            continue;
        }
        let bi = shearlab::numerics::interp::lagrange4(&b.values, vgrid.lo, vgrid.h, v);
        err = err.max((a.values[j] - bi).norm() / scale);
    }
    assert!(err < 1e-5, "relative difference {err:e}");
}

#[test]
fn vw_kernel_envelope() {
    // |k_eps| <= C |eps|^{-1/3} <rho~>^{1/2} exp(-c <v~, rho~>^{1/2} |v~ - rho~|)
    let p = bump();
    let mode = ModeParams::new(1, 1e-3).unwrap();
    let l = mode.eps.cbrt();
    let disc = Discretization::new(&p, Grid::symmetric(2.0, l / 8.0));
    let mut pts = Vec::new();
    for &rho in &[-0.3, -0.1, 0.0, 0.1, 0.3] {
        let col = airy_kernel_vw(&p, &mode, &disc, rho, 0.05).unwrap();
        let r = col.source / l;
        for (j, &v) in col.coords.iter().enumerate() {
            let vt = v / l;
            if (vt - r).abs() < 1.0 || v.abs() > 1.5 {
                continue;
            }
            let m = col.values[j].norm() * l / (1.0 + r * r).powf(0.25);
            if m > 1e-12 {
                pts.push(((1.0 + vt * vt + r * r).powf(0.25) * (vt - r).abs(), m.ln()));
            }
        }
    }
    let (_, slope, _) = shearlab::diagnostics::linear_fit(&pts).unwrap();
    assert!(slope < 0.0, "fitted envelope slope {slope}");
}

#[test]
fn scan_needs_ten_columns() {
    let cols = rescaled_kernel_scan(&ShearProfile::couette(), 1e-2, 0.0, &[0.0], &[0.0, 1.0], 8.0, 0.125).unwrap();
    assert!(matches!(verify_airy_bounds(&cols, EnvelopeStyle::Full), Err(shearlab::Error::InsufficientScan { got: 2, need: 10 })));
}

#[test]
fn entanglement_vanishes_for_zero_cutoff() {
    let cols = rescaled_kernel_scan(&ShearProfile::couette(), 1e-2, 0.0, &[0.0], &[1.0], 8.0, 0.125).unwrap();
    let c = cols[0].rescaled().unwrap();
    // degenerate tent whose support misses every cell
    let t = Tent { a1: 100.0, a2: 101.0, theta: 0.5 };
    assert_eq!(entanglement_functional(&c, &t, 0.7), 0.0);
}
