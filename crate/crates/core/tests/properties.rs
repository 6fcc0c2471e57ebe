mod common;

use common::{degenerate, evaluator};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use spdc_lab::dispersion::{effective_nonlinearity, Material};
use spdc_lab::jsa::{
    delta_coefficients, geometry_factors, purity_waist, walk_off_integral, AlphaConvention, BeamGeometry,
    GroupIndices,
};
use spdc_lab::metrics::{filter_transmission, heralding_efficiency, Arm, FilterSpec, MetricsOptions};
use spdc_lab::numeric::sinc;
use spdc_lab::schmidt::{complex_spectrum, real_spectrum};
use std::sync::OnceLock;

fn geometry(wp: f64, ws: f64, wi: f64, ts: f64, ti: f64) -> BeamGeometry {
    let g = degenerate().geometry;
    BeamGeometry { theta_s: ts, theta_i: ti, ..g.with_waists(wp, ws, wi) }
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn waist() -> impl Strategy<Value = f64> {
    (1.0f64..3.0).prop_map(|e| 10f64.powf(e) * 1e-6)
}

fn angle() -> impl Strategy<Value = f64> {
    -1.5f64..1.5
}

fn correlated(n: usize, rho: f64, phase: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| {
        let (x, y) = (i as f64 / (n - 1) as f64 * 8.0 - 4.0, j as f64 / (n - 1) as f64 * 8.0 - 4.0);
        let a = (-(x * x + y * y - 2.0 * rho * x * y) / 2.0).exp();
        Complex64::from_polar(a, phase * x * y)
    })
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn geometry_factors_are_ordered(wp in waist(), ws in waist(), wi in waist(), ts in angle(), ti in angle()) {
        let g = geometry_factors(&geometry(wp, ws, wi, ts, ti));
        prop_assert!(g.c > 0.0 && g.a >= g.c * (1.0 - 1e-12));
        prop_assert!(g.f >= 0.0 && g.h >= 0.0);
    }

    #[test]
    fn separable_grid_is_pure(
        f in prop::collection::vec(0.01f64..1.0, 12),
        g in prop::collection::vec(0.01f64..1.0, 9),
        phase in -3.0f64..3.0,
    ) {
        let m = DMatrix::from_fn(12, 9, |i, j| Complex64::from_polar(f[i] * g[j], phase * (i as f64 - j as f64)));
        let s = complex_spectrum(&m).unwrap();
        prop_assert!(1.0 - s.purity < 1e-10, "{}", s.purity);
    }

    #[test]
    fn purity_ignores_global_scalar_and_transpose(
        rho in -0.9f64..0.9,
        chirp in -0.5f64..0.5,
        scale in 1e-6f64..1e6,
        arg in -3.2f64..3.2,
    ) {
        let m = correlated(40, rho, chirp);
        let p = complex_spectrum(&m).unwrap().purity;
        let scaled = complex_spectrum(&(m.clone() * Complex64::from_polar(scale, arg))).unwrap().purity;
        let flipped = complex_spectrum(&m.transpose()).unwrap().purity;
        prop_assert!((p - scaled).abs() < 1e-10);
        prop_assert!((p - flipped).abs() < 1e-10);
    }

    #[test]
    fn two_level_spectrum(p in 0.0f64..1.0, n in 2usize..8) {
        let mut m = DMatrix::zeros(n, n + 1);
        m[(0, 1)] = p.sqrt();
        m[(n - 1, 0)] = (1.0 - p).sqrt();
        let s = real_spectrum(&m).unwrap();
        prop_assert!((s.purity - (p * p + (1.0 - p) * (1.0 - p))).abs() < 1e-14);
    }

    #[test]
    fn purity_waist_zeroes_the_cross_term(wp in 150e-6f64..800e-6, ts in 0.01f64..0.2, convention in prop_oneof![Just(AlphaConvention::Consistent), Just(AlphaConvention::Squared)]) {
        let source = degenerate();
        let geom = BeamGeometry { theta_s: ts, theta_i: ts, ..source.geometry.clone() };
        let group: GroupIndices = evaluator(&source).phase_matching().group;
        if let Ok(ws) = purity_waist(wp, &geom, &group, source.crystal.length, convention) {
            let d = delta_coefficients(&geom.with_waists(wp, ws, ws), &group, source.crystal.length, convention);
            let scale = d.delta_s.abs().max(d.delta_i.abs());
            prop_assert!(d.delta_si.abs() < 1e-10 * scale, "{d:?}");
            prop_assert!(d.delta_s > 0.0 && d.delta_i > 0.0);
        }
    }

    #[test]
    fn walk_off_free_integral_is_sinc(log_dkz in -2.0f64..6.0, sign in prop_oneof![Just(1.0), Just(-1.0)]) {
        let l = 450e-6;
        let dkz = sign * 10f64.powf(log_dkz);
        let z = walk_off_integral(dkz, 0.0, l);
        let expected = l * sinc(dkz * l / 2.0);
        prop_assert!((z.re - expected).abs() <= 1e-8 * l, "{} vs {}", z.re, expected);
        prop_assert!(z.im.abs() <= 1e-8 * l);
    }

    #[test]
    fn heralding_arithmetic(r in 1e-3f64..1e3, ks in 1.0f64..10.0, ki in 1.0f64..10.0) {
        let eta = heralding_efficiency(r, ks * r, ki * r).unwrap();
        prop_assert!(eta > 0.0 && eta <= 1.0);
        prop_assert!((eta - 1.0 / (ks * ki).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn flat_top_filter_edges(center in 1e15f64..5e15, hw in 1e11f64..1e14, t in 0.0f64..=1.0, u in -2.0f64..2.0) {
        let f = FilterSpec::new(center, hw, t).unwrap();
        let omega = center + u * hw;
        let expected = if u.abs() <= 1.0 { t } else { 0.0 };
        prop_assert_eq!(filter_transmission(omega, &f), expected);
        prop_assert_eq!(filter_transmission(f.lo(), &f), t);
        prop_assert_eq!(filter_transmission(f.hi(), &f), t);
    }

    #[test]
    fn d_eff_symmetries(theta in 0.0f64..1.5, phi in -3.2f64..3.2) {
        let bbo = Material::bbo();
        let third = 2.0 * std::f64::consts::PI / 3.0;
        let d = effective_nonlinearity(theta, phi, &bbo);
        prop_assert!((d - effective_nonlinearity(theta, phi + third, &bbo)).abs() < 1e-12);
        let odd = (d - effective_nonlinearity(-theta, phi, &bbo)) / 2.0;
        prop_assert!((odd + bbo.d31_pm_per_v * theta.sin()).abs() < 1e-12);
    }

    #[test]
    fn extraordinary_index_between_limits(lambda in 0.23e-6f64..1.05e-6, theta in 0.01f64..1.56) {
        let bbo = Material::bbo();
        let (no, ne) = (bbo.n_o(lambda).unwrap(), bbo.n_e_principal(lambda).unwrap());
        let n = bbo.n_e(lambda, theta).unwrap();
        prop_assert!(no > 1.0 && ne > 1.0);
        prop_assert!(n < no && n > ne);
    }
}

fn mirrored() -> &'static spdc_lab::metrics::Evaluator {
    static EV: OnceLock<spdc_lab::metrics::Evaluator> = OnceLock::new();
    EV.get_or_init(|| evaluator(&degenerate()))
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn mirror_symmetric_singles(ws in 100e-6f64..300e-6) {
        let ev = mirrored();
        let g = ev.with_waists(310e-6, ws, ws);
        let rs = ev.singles_rate(Arm::Signal, &g).unwrap().rate;
        let ri = ev.singles_rate(Arm::Idler, &g).unwrap().rate;
        prop_assert!((rs - ri).abs() < 1e-6 * rs);
        let partial: Vec<f64> = ev
            .singles_rate(Arm::Signal, &g)
            .unwrap()
            .shells
            .iter()
            .scan(0.0, |acc, s| { *acc += s; Some(*acc) })
            .collect();
        prop_assert!(partial.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn eta_and_purity_in_unit_interval(ratio in 0.3f64..1.2) {
        let ev = mirrored();
        let (eta, purity) = ev.eta_and_purity(&ev.with_waists(310e-6, ratio * 310e-6, ratio * 310e-6)).unwrap();
        prop_assert!(eta > 0.0 && eta <= 1.0);
        prop_assert!(purity > 0.0 && purity <= 1.0);
    }

    #[test]
    fn narrower_filters_lose_pairs(k in 0.3f64..0.95) {
        let ev = mirrored();
        let g = ev.geometry().clone();
        let narrow = ev.with_scaled_filters(k).unwrap();
        prop_assert!(narrow.pair_rate(&g).unwrap() < ev.pair_rate(&g).unwrap());
    }
}

#[test]
fn purity_converges_monotonically_under_refinement() -> anyhow::Result<()> {
    let source = degenerate();
    let purity = |n: usize| -> anyhow::Result<f64> {
        let ev = source.evaluator(MetricsOptions { resolution: n, ..MetricsOptions::default() })?;
        Ok(ev.purity(&ev.with_waists(310e-6, 220e-6, 220e-6))?)
    };
    let p: Vec<f64> = [65, 129, 257, 513].into_iter().map(purity).collect::<anyhow::Result<_>>()?;
    let steps: Vec<f64> = p.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(steps.windows(2).all(|s| s[1] < s[0]), "{p:?}");
    Ok(())
}
