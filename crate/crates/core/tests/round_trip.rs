use physprop_core::oracle::relative_score;
use physprop_core::pipeline::{estimate, render_scene, EstimatorKind, Timing};
use physprop_core::scene::{sample_scene, CameraPose, Domain, PropertyKind, Scene, CAMERA_RADIUS};

fn oracle(scene: &Scene, estimator: EstimatorKind) -> f64 {
    let obs = render_scene(scene, Timing::default_for(scene.property()), 0.0, 0).unwrap();
    estimate(scene, &obs, estimator, None).unwrap().value
}

fn level_camera(height: f64) -> CameraPose {
    CameraPose {
        radius: CAMERA_RADIUS,
        height,
        azimuth: 0.3,
        look_at: [0.0, 0.0, height],
    }
}

#[test]
fn elasticity_sweep_recovers_restitution() {
    for k in 1..=9 {
        let e = f64::from(k) / 10.0;
        let Scene::Elasticity(mut s) = sample_scene(PropertyKind::Elasticity, Domain::A1, 7) else {
            unreachable!()
        };
        s.restitution = e;
        s.camera = level_camera(0.3);
        let est = oracle(&Scene::Elasticity(s), EstimatorKind::RatioOracle);
        assert!((est - e).abs() < 1e-3, "e={e} est={est}");
    }
}

#[test]
fn elasticity_viewpoint_spread() {
    let base = sample_scene(PropertyKind::Elasticity, Domain::A1, 11);
    let truth = base.ground_truth();
    let ests: Vec<f64> = (0..100)
        .map(|i| {
            let cam = *sample_scene(PropertyKind::Elasticity, Domain::A1, 1000 + i).camera();
            oracle(&base.clone().with_camera(cam), EstimatorKind::RatioOracle)
        })
        .collect();
    let lo = ests.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ests.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / truth;
    eprintln!("truth {truth} lo {lo} hi {hi} spread {spread}");
    assert!(spread < 0.02, "spread {spread}");
}

#[test]
fn friction_sweep_under_random_cameras() {
    let mut worst: f64 = 0.0;
    for domain in [Domain::A1, Domain::A2] {
        for seed in 0..20 {
            for k in 1..=10 {
                let mu = 0.02 * f64::from(k);
                let Scene::Friction(mut s) = sample_scene(PropertyKind::Friction, domain, seed)
                else {
                    unreachable!()
                };
                s.friction_coeff = mu;
                let est = oracle(&Scene::Friction(s), EstimatorKind::ParabolaOracle);
                let rel = (est - mu).abs() / mu;
                worst = worst.max(rel);
                assert!(rel < 0.01, "{domain:?} seed {seed} mu {mu} est {est}");
            }
        }
    }
    eprintln!("worst friction rel err {worst}");
}

#[test]
fn projective_beats_naive() {
    let mut wins = 0;
    for seed in 0..100u64 {
        let domain = if seed % 2 == 0 {
            Domain::A1
        } else {
            Domain::A2
        };
        let scene = sample_scene(PropertyKind::Friction, domain, 500 + seed);
        let mu = scene.ground_truth();
        let good = (oracle(&scene, EstimatorKind::ParabolaOracle) - mu).abs() / mu;
        assert!(good < 0.01);
        let obs =
            render_scene(&scene, Timing::default_for(PropertyKind::Friction), 0.0, 0).unwrap();
        // A naive fit may not even produce a decelerating parabola.
        let naive = estimate(&scene, &obs, EstimatorKind::NaiveParabola, None)
            .map_or(f64::INFINITY, |e| (e.value - mu).abs() / mu);
        if naive > 0.01 {
            wins += 1;
        }
    }
    eprintln!("naive worse on {wins}/100");
    assert!(wins >= 90);
}

#[test]
fn viscosity_ratio_ten() {
    for seed in 0..10 {
        let Scene::Viscosity(mut s) = sample_scene(PropertyKind::Viscosity, Domain::A1, seed)
        else {
            unreachable!()
        };
        s.viscosity = 5e-4;
        let low = oracle(&Scene::Viscosity(s.clone()), EstimatorKind::SlopeOracle);
        s.viscosity = 5e-3;
        let high = oracle(&Scene::Viscosity(s), EstimatorKind::SlopeOracle);
        assert!(
            (high / low / 10.0 - 1.0).abs() < 0.01,
            "ratio {}",
            high / low
        );
    }
}

#[test]
fn scores_order_same_viewpoint_pairs() {
    for property in PropertyKind::ALL {
        let est = EstimatorKind::oracle_for(property);
        let timing = Timing::default_for(property);
        let mut compared = 0;
        for seed in 0..30 {
            let a = sample_scene(property, Domain::A1, seed);
            let b = sample_scene(property, Domain::A1, seed + 100).with_camera(*a.camera());
            let ea = estimate(&a, &render_scene(&a, timing, 0.0, 0).unwrap(), est, None);
            let eb = estimate(&b, &render_scene(&b, timing, 0.0, 0).unwrap(), est, None);
            // Rebounds shorter than a frame are reported as undetectable.
            let (Ok(ea), Ok(eb)) = (ea, eb) else {
                assert_eq!(property, PropertyKind::Elasticity);
                continue;
            };
            compared += 1;
            let s = relative_score(&ea, &eb).unwrap();
            assert_eq!(
                s > 0.5,
                a.ground_truth() > b.ground_truth(),
                "{property} seed {seed}"
            );
        }
        assert!(compared >= 25, "{property}: {compared}");
    }
}
