use std::f64::consts::PI;

use specular::characteristics::{backward_exit, Characteristic};
use specular::collision::{sqrt_mu, FnField};
use specular::experiments::{
    duhamel_evaluate, duhamel_quadrature, estimate_seminorm, exit_code, holder_measure, jacobian_fd_errors, picard_sweep,
    run_suite, sample_state, spatial_quotient, velocity_quotient, DuhamelTerms, ExperimentConfig, HolderPair,
    SeminormKind, SeminormTarget, Suite,
};
use specular::experiments::sampling::stream_rng;
use specular::geometry::{ConvexObstacle, ObstacleKind};
use specular::{Error, Vec3};

fn embedding() -> ExperimentConfig {
    ExperimentConfig {
        obstacle: ObstacleKind::Sphere { center: [0.0, 1.0, 0.0], radius: 1.0 },
        ..ExperimentConfig::default()
    }
}

#[test]
fn grazing_gap_matches_chord_formula() {
    let obs = ConvexObstacle::sphere(Vec3::new(0.0, 1.0, 0.0), 1.0).unwrap();
    let eps = 2f64.powi(-10);
    let hit = backward_exit(&obs, &Vec3::new(1.0, eps, 0.0), &Vec3::x()).unwrap().unwrap();
    assert!((hit.x_b.x - (2.0 * eps - eps * eps).sqrt()).abs() < 1e-10);
    assert!((hit.x_b.y - eps).abs() < 1e-15);
}

#[test]
fn tangent_ray_exits_at_the_origin() {
    let obs = ConvexObstacle::sphere(Vec3::new(0.0, 1.0, 0.0), 1.0).unwrap();
    let hit = backward_exit(&obs, &Vec3::new(1.0, 0.0, 0.0), &Vec3::x()).unwrap().unwrap();
    assert_eq!(hit.x_b, Vec3::zeros());
    assert!(hit.grazing);
}

#[test]
fn grazing_scan_slope_is_one_half() {
    let r = run_suite(Suite::GrazingScan, &embedding()).unwrap();
    assert!(r.passed(), "{:?}", r.failures());
    let slope = r.stats["slope"];
    assert!((slope - 0.5).abs() <= 0.02, "slope {slope}");
}

#[test]
fn grazing_scan_rejects_other_obstacles() {
    let out = run_suite(Suite::GrazingScan, &ExperimentConfig::default());
    assert!(matches!(out, Err(Error::Config(_))));
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn jacobian_blocks_match_differences_on_a_few_states() {
    for obs in [
        ConvexObstacle::sphere(Vec3::zeros(), 1.0).unwrap(),
        ConvexObstacle::ellipsoid(Vec3::zeros(), Vec3::new(1.0, 2.0, 1.0)).unwrap(),
    ] {
        let mut rng = stream_rng(5, 0);
        for _ in 0..20 {
            let st = sample_state(&obs, 0.1, &mut rng);
            let errs = jacobian_fd_errors(&obs, &st, 1e-5).unwrap();
            assert!(errs.iter().all(|e| *e <= 1e-4), "{errs:?}");
        }
    }
}

#[test]
fn identical_holder_pair_has_no_differences() {
    let obs = ConvexObstacle::ellipsoid(Vec3::zeros(), Vec3::new(1.0, 2.0, 1.0)).unwrap();
    let (x, v) = (Vec3::new(3.0, 0.5, -0.2), Vec3::new(1.0, 0.1, 0.0));
    let p = HolderPair { x, v, x_bar: x, v_bar: v, t: 2.0, s: 0.5, grazing: false };
    for m in holder_measure(&obs, &p).unwrap().into_iter().flatten() {
        assert_eq!(m.0, 0.0);
    }
}

fn seminorm_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.seminorm.pairs = 8;
    cfg.seminorm.polar = 10;
    cfg.seminorm.azimuth = 20;
    cfg
}

#[test]
fn seminorm_of_a_constant_is_zero() {
    let cfg = seminorm_config();
    let f = FnField::new(1.0, |_x: &Vec3, _u: &Vec3| 0.7);
    for target in [SeminormTarget::Spatial { v: Vec3::new(0.5, 0.0, 0.0) }, SeminormTarget::Velocity { x: Vec3::new(2.0, 0.0, 0.0) }] {
        let e = estimate_seminorm(&cfg, &f, target, 0.3).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.samples, 8);
    }
}

#[test]
fn spatial_quotient_of_linear_data_at_rest() {
    // with v = 0 the kernel is 2e^{−2c|ζ|²}/|ζ| and ∫ 𝐤 e^{−|ζ|²} dζ = 4π/(2c + 1)
    let cfg = seminorm_config();
    let a = Vec3::new(1.0, -2.0, 0.5);
    let f = FnField::new(1.0, move |x: &Vec3, u: &Vec3| (-u.norm_squared()).exp() * a.dot(x));
    let (x, x_bar) = (Vec3::new(2.0, 0.0, 0.0), Vec3::new(2.0, 0.3, 0.1));
    let s = 0.4;
    let d = x - x_bar;
    let k = &cfg.kernel;
    let expected = (-k.varpi * s).exp() * a.dot(&d).abs() / d.norm().powf(2.0 * k.beta) * 4.0 * PI / (2.0 * k.c + 1.0);
    let got = spatial_quotient(&cfg, &f, &Vec3::zeros(), &x, &x_bar, s);
    assert!((got - expected).abs() < 1e-6 * expected, "{got} vs {expected}");
}

#[test]
fn spatial_seminorm_scales_with_the_lipschitz_constant() {
    let cfg = seminorm_config();
    let a = Vec3::new(0.3, 1.0, -0.4);
    let est = |l: f64| {
        let f = FnField::new(l, move |x: &Vec3, u: &Vec3| l * (-u.norm_squared()).exp() * (a.dot(x)).sin());
        estimate_seminorm(&cfg, &f, SeminormTarget::Spatial { v: Vec3::new(0.2, -0.4, 0.1) }, 0.0).unwrap()
    };
    let (one, three) = (est(1.0), est(3.0));
    assert_eq!(one.kind, SeminormKind::HSp);
    assert!(one.value > 0.0 && one.value.is_finite());
    assert!((three.value / one.value - 3.0).abs() < 1e-12);
}

#[test]
fn spatial_jump_grows_as_the_gap_shrinks() {
    let cfg = seminorm_config();
    let f = FnField::new(1.0, |x: &Vec3, u: &Vec3| if x.x > 3.0 { (-u.norm_squared()).exp() } else { 0.0 });
    let v = Vec3::new(0.3, 0.0, 0.0);
    let q = |d: f64| spatial_quotient(&cfg, &f, &v, &Vec3::new(3.0 + d / 2.0, 0.0, 0.0), &Vec3::new(3.0 - d / 2.0, 0.0, 0.0), 0.0);
    let beta = cfg.kernel.beta;
    for d in [0.5, 0.05, 0.005] {
        let ratio = q(d / 10.0) / q(d);
        assert!((ratio - 10f64.powf(2.0 * beta)).abs() < 1e-9, "ratio {ratio}");
    }
}

#[test]
fn velocity_quotient_of_smooth_data_vanishes_with_the_gap() {
    let cfg = seminorm_config();
    let f = FnField::new(1.0, |_x: &Vec3, u: &Vec3| sqrt_mu(u));
    let x = Vec3::new(2.0, 0.0, 0.0);
    let v = Vec3::new(0.5, 0.2, 0.0);
    let dir = Vec3::new(0.0, 0.6, 0.8);
    let q: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|h| velocity_quotient(&cfg, &f, &x, &v, &(v + dir * *h), 0.0)).collect();
    assert!(q[0] > q[1] && q[1] > q[2], "{q:?}");
    // smooth data: the quotient scales like |v − v̄|^{1−2β}
    let slope = (q[1] / q[2]).log10();
    assert!((slope - (1.0 - 2.0 * cfg.kernel.beta)).abs() < 0.05, "slope {slope}");
}

#[test]
fn seminorm_estimate_does_not_decrease_with_more_pairs() {
    let mut cfg = seminorm_config();
    let f = FnField::new(1.0, |x: &Vec3, u: &Vec3| (-u.norm_squared()).exp() * (x.x + 0.5 * x.y.sin()));
    let target = SeminormTarget::Velocity { x: Vec3::new(0.0, 2.5, 0.0) };
    let few = estimate_seminorm(&cfg, &f, target, 0.1).unwrap();
    cfg.seminorm.pairs = 16;
    let more = estimate_seminorm(&cfg, &f, target, 0.1).unwrap();
    assert_eq!(more.kind, SeminormKind::HVel);
    assert!(more.value >= few.value);
}

#[test]
fn pure_transport_returns_the_foot_value() {
    let cfg = ExperimentConfig::default();
    let obs = cfg.build_obstacle().unwrap();
    let f = |_s: f64, y: &Vec3, u: &Vec3| (1.0 + y.x * y.x) * (-(u - Vec3::new(0.1, 0.0, 0.0)).norm_squared()).exp();
    // the ray from x along −v bounces off the unit sphere within the horizon
    let (x, v) = (Vec3::new(1.05, 0.0, 0.0), Vec3::new(1.0, 0.2, 0.0));
    let t = 0.1;
    let r = duhamel_evaluate(&cfg, &f, t, &x, &v, DuhamelTerms::TRANSPORT).unwrap();
    let foot = Characteristic::new(&obs, t, &x, &v).unwrap().at(0.0).unwrap();
    assert!(Characteristic::new(&obs, t, &x, &v).unwrap().t1() > 0.0);
    assert_eq!(r.value, f(0.0, &foot.x, &foot.v));
    assert_eq!(r.damping, 1.0);
}

#[test]
fn constant_rates_match_the_closed_form() {
    for (nu, g, f0, t) in [(0.0, 0.0, 2.0, 0.1), (2.0, 0.5, 1.0, 0.1), (10.0, 3.0, 0.2, 0.05)] {
        let q = duhamel_quadrature(t, 16, f0, |_| nu, |_| g);
        let exact = if nu == 0.0 { f0 + g * t } else { (-nu * t).exp() * f0 + g * (1.0 - (-nu * t).exp()) / nu };
        assert!((q.value - exact).abs() < 1e-13, "{} vs {exact}", q.value);
    }
}

#[test]
fn damping_is_in_unit_interval_and_decreasing() {
    let mut last = 1.0;
    for t in [0.0, 0.02, 0.05, 0.1] {
        let q = duhamel_quadrature(t, 16, 1.0, |s| 1.0 + s * s, |_| 0.0);
        assert!(q.damping > 0.0 && q.damping <= last);
        last = q.damping;
    }
}

#[test]
fn horizon_is_enforced() {
    let cfg = ExperimentConfig::default();
    let f = |_s: f64, _y: &Vec3, u: &Vec3| sqrt_mu(u);
    let out = duhamel_evaluate(&cfg, &f, 0.2, &Vec3::new(2.0, 0.0, 0.0), &Vec3::x(), DuhamelTerms::FULL);
    assert!(matches!(out, Err(Error::Config(_))));
    assert!(matches!(picard_sweep(&cfg, &|r: f64| (-0.25 * r * r).exp(), 4), Err(Error::Config(_))));
}

#[test]
fn equilibrium_is_a_picard_fixed_point() {
    let mut cfg = ExperimentConfig::default();
    cfg.suite.duhamel_toy.sample_points = 10;
    let rep = picard_sweep(&cfg, &|r: f64| (-0.25 * r * r).exp(), 1).unwrap();
    assert_eq!(rep.points, 10);
    assert!(rep.residuals[0] <= 5e-3, "{:?}", rep.residuals);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let mut cfg = ExperimentConfig { seed: 99, ..ExperimentConfig::default() };
    cfg.suite.ode_suite.samples = 300;
    cfg.suite.holder_trajectory.samples = 300;
    for suite in [Suite::OdeSuite, Suite::HolderTrajectory] {
        let a = run_suite(suite, &cfg).unwrap().to_json();
        let b = run_suite(suite, &cfg).unwrap().to_json();
        assert_eq!(a, b, "{suite}");
    }
    let g = embedding();
    assert_eq!(run_suite(Suite::GrazingScan, &g).unwrap().to_json(), run_suite(Suite::GrazingScan, &g).unwrap().to_json());
}

#[test]
fn different_seeds_give_different_samples() {
    let mut cfg = ExperimentConfig::default();
    cfg.suite.ode_suite.samples = 50;
    let a = run_suite(Suite::OdeSuite, &cfg).unwrap();
    cfg.seed += 1;
    let b = run_suite(Suite::OdeSuite, &cfg).unwrap();
    assert_ne!(a.samples[0].inputs_digest, b.samples[0].inputs_digest);
}

#[test]
fn config_rejects_unknown_keys_and_empty_counts() {
    assert!(matches!(ExperimentConfig::from_toml_str("[kernel]\ngamma = 1.0"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml_str("[suite.jacobian_fd]\nsamples = 0"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml_str("[kernel]\nbeta = 1.5"), Err(Error::Config(_))));
    assert!(matches!(
        ExperimentConfig::from_toml_str("[obstacle]\nkind = \"ellipsoid\"\ncenter = [0.0, 0.0, 0.0]\nsemi_axes = [1.0, -1.0, 1.0]"),
        Err(Error::Config(_))
    ));
}

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 3;
    cfg.obstacle = ObstacleKind::Ellipsoid { center: [0.0, 0.5, 0.0], semi_axes: [1.0, 2.0, 1.5] };
    cfg.suite.collision_suite.velocities = 7;
    let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn suite_names_parse() {
    for s in Suite::ALL {
        assert_eq!(s.name().parse::<Suite>().unwrap(), s);
    }
    assert!("nope".parse::<Suite>().is_err());
}

#[test]
fn reference_config_lists_the_defaults() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml");
    let cfg = ExperimentConfig::from_path(&path).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
    // every key the defaults serialise is present in the reference file
    let text = std::fs::read_to_string(&path).unwrap();
    let keys: Vec<String> = ExperimentConfig::default()
        .to_toml_string()
        .lines()
        .filter_map(|l| l.split_once(" = ").map(|(k, _)| k.to_string()))
        .collect();
    for k in keys {
        assert!(text.lines().any(|l| l.starts_with(&format!("{k} = "))), "{k} undocumented");
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        ExperimentConfig::from_path(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
