use faer::complex_native::c64;
use faer::Mat;
use num_complex::Complex64 as C64;
use shearlab::airy::critical_spacing;
use shearlab::grid::Grid;
use shearlab::numerics::dense;
use shearlab::profile::{build_profile, ModeParams, ProfileKind, ShearProfile};
use shearlab::semigroup::*;
use shearlab::Error;

fn bump() -> ShearProfile {
    build_profile(ProfileKind::Bump, 0.3, 1.0).unwrap()
}

fn generator(p: &ShearProfile, nu: f64, half: f64) -> GeneratorMatrix {
    let mode = ModeParams::new(1, nu).unwrap();
    discretize_generator(p, &mode, &Grid::symmetric(half, critical_spacing(nu))).unwrap()
}

fn from_rows(rows: &[&[C64]]) -> GeneratorMatrix {
    let a = Mat::from_fn(rows.len(), rows.len(), |i, j| dense::to_c64(rows[i][j]));
    GeneratorMatrix::from_matrix(a).unwrap()
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn action_matches_the_operator_on_smooth_data() {
    // phi Gaussian, g = phi'' - k^2 phi, so the stream function is known in closed form
    let p = bump();
    let (k, nu) = (2.0, 1e-2);
    let phi = |y: f64| (-y * y).exp();
    let g = |y: f64| (4.0 * y * y - 2.0 - k * k) * phi(y);
    let g2 = |y: f64| (16.0 * y.powi(4) - 48.0 * y * y + 12.0 - k * k * (4.0 * y * y - 2.0)) * phi(y);
    let exact = |y: f64| re(nu * g2(y)) - C64::new(0.0, k * p.b(y)) * g(y) + C64::new(0.0, k * p.bpp(y)) * phi(y);
    let mut errs = Vec::new();
    for &h in &[0.02, 0.01] {
        let grid = Grid::symmetric(7.0, h);
        let a = discretize_generator(&p, &ModeParams::new(2, nu).unwrap(), &grid).unwrap();
        let x = grid.sample(|y| re(g(y)));
        let ax = dense::matvec(&a.a, &x);
        let err = grid.nodes().iter().zip(&ax).map(|(&y, v)| (v - exact(y)).norm()).fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[1] < 1e-3, "{errs:?}");
    let order = (errs[0] / errs[1]).log2();
    assert!((order - 2.0).abs() < 0.3, "order {order}");
}

#[test]
fn inviscid_couette_like_generator_is_skew() {
    let ys = Grid::new(-1.0, 1.0, 9).nodes();
    let rows: Vec<Vec<C64>> =
        (0..9).map(|i| (0..9).map(|j| if i == j { C64::new(0.0, -ys[i]) } else { re(0.0) }).collect()).collect();
    let refs: Vec<&[C64]> = rows.iter().map(|r| r.as_slice()).collect();
    let g = from_rows(&refs);
    for (_, v) in semigroup_norm_curve(&g, 1.3, 20).unwrap() {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn couette_spectrum_is_in_the_left_half_plane() {
    let g = generator(&ShearProfile::couette(), 1e-2, 2.0);
    let ev = dense::eigenvalues(&g.a);
    assert!(ev.iter().all(|z| z.re <= 1e-10), "{:?}", ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max));
}

#[test]
fn structured_sigma_min_matches_dense_svd() {
    let g = generator(&bump(), 1e-2, 2.0);
    let n = g.n();
    for &lam in &[-1.2, 0.0, 0.4, 1.7] {
        let m = Mat::from_fn(n, n, |i, j| {
            let d = if i == j { c64::new(0.0, lam) } else { c64::new(0.0, 0.0) };
            d - g.a.read(i, j)
        });
        let oracle = dense::sigma_min(&m);
        let got = g.sigma_min(lam).unwrap();
        assert!((got - oracle).abs() < 1e-8 * oracle.max(1.0), "{lam}: {got} vs {oracle}");
    }
}

#[test]
fn normal_matrix_mu_is_the_spectral_distance() {
    let z = re(0.0);
    let g = from_rows(&[
        &[C64::new(-0.3, 2.0), z, z],
        &[z, C64::new(-0.7, -1.0), z],
        &[z, z, re(-1.5)],
    ]);
    let s = resolvent_scan(&g, &Grid::new(-4.0, 4.0, 33).nodes()).unwrap();
    assert!((s.mu - 0.3).abs() < 1e-8, "{}", s.mu);
    assert!((s.lambda_min - 2.0).abs() < 1e-4);
}

#[test]
fn jordan_scan_agrees_with_a_dense_oracle() {
    let g = from_rows(&[&[re(-1.0), re(10.0)], &[re(0.0), re(-1.0)]]);
    let s = resolvent_scan(&g, &Grid::new(-6.0, 6.0, 25).nodes()).unwrap();
    // sigma_min of [[1+i l, -10],[0, 1+i l]] in closed form
    let smin = |l: f64| {
        let r2 = 1.0 + l * l;
        let tr = 2.0 * r2 + 100.0;
        0.5 * (tr - (tr * tr - 4.0 * r2 * r2).sqrt()).sqrt() * 2f64.sqrt()
    };
    let oracle = (0..=120_000).map(|i| smin(-6.0 + 1e-4 * i as f64)).fold(f64::INFINITY, f64::min);
    assert!((s.mu - oracle).abs() < 1e-7, "{} vs {oracle}", s.mu);
    assert!(s.mu < 0.1);
}

#[test]
fn jordan_curve_shows_transient_growth() {
    let g = from_rows(&[&[re(-1.0), re(10.0)], &[re(0.0), re(-1.0)]]);
    let curve = semigroup_norm_curve(&g, 0.05, 200).unwrap();
    for &(t, v) in &curve {
        let s = 10.0 * t;
        let exact = (-t).exp() * 0.5 * (s + (s * s + 4.0).sqrt());
        assert!((v - exact).abs() < 1e-8 * exact, "t={t}: {v} vs {exact}");
    }
    let peak = curve.iter().map(|c| c.1).fold(0.0, f64::max);
    assert!(peak > 3.0 && curve.last().unwrap().1 < 0.01);
}

#[test]
fn minus_identity_curve_is_exponential() {
    let g = from_rows(&[&[re(-1.0), re(0.0)], &[re(0.0), re(-1.0)]]);
    for (t, v) in semigroup_norm_curve(&g, 0.25, 200).unwrap() {
        assert!((v - (-t).exp()).abs() < 1e-8 * (-t).exp());
    }
    let r = dsr_envelope_check(&g, 0.25, 200, &Grid::new(-3.0, 3.0, 13).nodes(), DEFAULT_C0_CAP).unwrap();
    assert_eq!(r.m, 1.0);
    assert!((r.mu - 1.0).abs() < 1e-12 && (r.c0_required - 1.0).abs() < 1e-8);
}

#[test]
fn mu_does_not_increase_under_refinement() {
    let g = generator(&bump(), 1e-2, 2.0);
    let coarse = resolvent_scan(&g, &default_lambda_grid(&g, 1.0, 21)).unwrap();
    let fine_grid: Vec<f64> = {
        let mut v = default_lambda_grid(&g, 1.0, 81);
        v.extend(coarse.samples.iter().map(|s| s.0));
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let fine = resolvent_scan(&g, &fine_grid).unwrap();
    assert!(fine.mu <= coarse.mu + 1e-14);
    assert!(fine.outer_growth.0 > 0.5 && fine.outer_growth.1 > 0.5);
}

#[test]
fn near_singular_and_bad_inputs_are_reported() {
    let g = from_rows(&[&[C64::new(0.0, 1.0)]]);
    assert!(matches!(resolvent_scan(&g, &[0.0, 1.0, 2.0]), Err(Error::NearSingular { .. })));
    assert!(matches!(resolvent_scan(&g, &[0.0, 1.0]), Err(Error::InvalidArgument(_))));
    let big = from_rows(&[&[re(-1e6)]]);
    assert!(matches!(semigroup_norm_curve(&big, 100.0, 2), Err(Error::OverflowRisk(_))));
    assert!(GeneratorMatrix::from_matrix(Mat::<c64>::zeros(2, 3)).is_err());
}

#[test]
fn couette_and_bump_envelopes_pass() {
    for &nu in &[1e-2, 1e-3] {
        let reports: Vec<DsrReport> = [ShearProfile::couette(), bump()]
            .iter()
            .map(|p| {
                let g = generator(p, nu, 2.0);
                dsr_envelope_check(&g, 2.5, 20, &default_lambda_grid(&g, 1.0, 81), DEFAULT_C0_CAP).unwrap()
            })
            .collect();
        for r in &reports {
            assert!(r.pass && r.c0_required <= 10.0 && r.c0_required >= 1.0);
            assert!(r.mu / nu.cbrt() > 0.5, "{}", r.mu / nu.cbrt());
        }
        // Couette is dissipative, so the propagator never grows
        assert!((reports[0].m - 1.0).abs() < 1e-10);
    }
}

#[test]
fn bump_regression_values() {
    let g = generator(&bump(), 1e-3, 2.0);
    let r = dsr_envelope_check(&g, 2.5, 20, &default_lambda_grid(&g, 1.0, 81), DEFAULT_C0_CAP).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() < 1e-3 * b;
    assert!(close(r.m, 1.0113) && close(r.mu, 7.1570e-2) && close(r.c0_required, 2.2142), "{r:?}");
}
