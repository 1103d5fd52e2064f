use proptest::prelude::*;
use specular::experiments::sample_frame;
use specular::experiments::sampling::stream_rng;
use specular::geometry::ConvexObstacle;
use specular::shiftframe::{shift_position, shift_velocity, ShiftMode};
use specular::singularity::{singularity, SingValue};
use specular::Vec3;

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    (-range..range, -range..range, -range..range).prop_map(|(a, b, c)| Vec3::new(a, b, c))
}

proptest! {
    #[test]
    fn shifted_position_is_orthogonal_to_the_ray(x in vec3(3.0), x_bar in vec3(3.0), v in vec3(2.0)) {
        prop_assume!(v.norm() > 0.1 && (x - x_bar).norm() > 1e-2);
        prop_assume!((x - x_bar).normalize().cross(&v.normalize()).norm() > 1e-3);
        let xt = shift_position(&x, &x_bar, &v).unwrap();
        let scale = 1.0 + x.norm() + x_bar.norm();
        prop_assert!((x - xt).dot(&v.normalize()).abs() <= 1e-12 * scale);
        prop_assert!((xt - x_bar).cross(&v.normalize()).norm() <= 1e-12 * scale);
    }

    #[test]
    fn shifted_velocity_keeps_speed_and_turns_to_the_partner(v in vec3(2.0), v_bar in vec3(2.0), zeta in vec3(1.0)) {
        prop_assume!((v + zeta).norm() > 1e-2 && (v_bar + zeta).norm() > 1e-2);
        let vt = shift_velocity(&v, &v_bar, &zeta).unwrap();
        let w = vt + zeta;
        prop_assert!((w.norm() - (v + zeta).norm()).abs() <= 1e-12 * (1.0 + w.norm()));
        prop_assert!(w.normalize().cross(&(v_bar + zeta).normalize()).norm() <= 1e-12);
    }
}

#[test]
fn singularities_are_non_negative_and_vanish_at_the_window_ends() {
    let obstacles = [
        ConvexObstacle::sphere(Vec3::zeros(), 1.0).unwrap(),
        ConvexObstacle::ellipsoid(Vec3::new(0.0, 0.5, 0.0), Vec3::new(1.0, 2.0, 1.0)).unwrap(),
    ];
    for obs in &obstacles {
        for mode in [ShiftMode::Position, ShiftMode::Velocity] {
            for i in 0..100 {
                let mut rng = stream_rng(11, i);
                let (f, _) = sample_frame(obs, mode, &mut rng).expect("frame");
                assert!(f.tau_minus < f.tau_zero && f.tau_zero < f.tau_plus);
                let w = f.tau_plus - f.tau_minus;
                let mut peak = 0.0f64;
                for j in 1..40 {
                    let tau = f.tau_minus + w * j as f64 / 40.0;
                    match singularity(&f, tau).unwrap() {
                        SingValue::Finite(s) => {
                            assert!(s >= -1e-9, "negative singularity {s} at {tau}");
                            peak = peak.max(s);
                        }
                        SingValue::Infinite => {}
                    }
                }
                for end in [f.tau_minus + 1e-9 * w, f.tau_plus - 1e-9 * w] {
                    if let Ok(SingValue::Finite(s)) = singularity(&f, end) {
                        assert!(s <= 1e-3 * peak.max(1.0), "singularity {s} at a window end");
                    }
                }
            }
        }
    }
}
