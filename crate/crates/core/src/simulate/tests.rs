use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::functionals::{functionals_of, Disc};
use super::*;
use crate::persistence::euler_characteristic;
use crate::raster::rasterize;

fn window(side: f64) -> Window {
    Window::square(side).unwrap()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

#[test]
fn zero_intensity_is_empty() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = window(25.0);
    for spec in [
        GermSpec::Poisson { intensity: 0.0 },
        GermSpec::MaternCluster {
            parent_intensity: 0.0,
            mean_per_cluster: 5.0,
            cluster_radius: 2.0,
        },
        GermSpec::Cell { intensity: 0.0 },
        GermSpec::Hardcore {
            intensity: 0.0,
            inhibition_radius: 0.8,
        },
    ] {
        assert!(sample_germs(&spec, &w, 1.0, &mut rng).unwrap().is_empty());
        let disc = GrainSpec::Disc { r_min: 0.5, r_max: 1.0 };
        assert!(sample_boolean(&spec, &disc, &w, &mut rng).unwrap().is_empty());
    }
}

#[test]
fn poisson_count_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spec = GermSpec::Poisson { intensity: 0.4 };
    let counts: Vec<f64> = (0..500)
        .map(|_| sample_germs(&spec, &window(25.0), 0.0, &mut rng).unwrap().len() as f64)
        .collect();
    let (m, v) = mean_var(&counts);
    assert!((m - 250.0).abs() < 3.0 * (250.0f64 / 500.0).sqrt(), "mean {m}");
    assert!((v / m - 1.0).abs() < 0.2, "dispersion {}", v / m);
}

#[test]
fn cell_counts_match_unit_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let side = 1000.0;
    let pts = sample_germs(&GermSpec::Cell { intensity: 1.0 }, &window(side), 0.0, &mut rng).unwrap();
    let n = side as usize;
    let mut counts = vec![0u32; n * n];
    for p in &pts {
        let i = (p[0].floor() as usize).min(n - 1);
        let j = (p[1].floor() as usize).min(n - 1);
        counts[j * n + i] += 1;
    }
    assert!(counts.iter().all(|c| matches!(c, 0 | 1 | 10)));
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (m, v) = mean_var(&xs);
    assert!((m - 1.0).abs() < 0.05 && (v - 1.0).abs() < 0.05, "{m} {v}");
}

#[test]
fn hardcore_spacing_and_intensity() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = 0.8;
    let spec = GermSpec::Hardcore {
        intensity: 0.4,
        inhibition_radius: r,
    };
    let mut counts = Vec::new();
    for _ in 0..100 {
        let pts = sample_germs(&spec, &window(25.0), 0.0, &mut rng).unwrap();
        for (a, p) in pts.iter().enumerate() {
            for q in &pts[a + 1..] {
                assert!(dist2(p, q) >= r * r);
            }
        }
        counts.push(pts.len() as f64);
    }
    let (m, v) = mean_var(&counts);
    assert!((m - 250.0).abs() < 3.0 * (v / 100.0).sqrt() + 1.0, "mean {m}");
    let too_dense = GermSpec::Hardcore {
        intensity: 0.6,
        inhibition_radius: 0.8,
    };
    assert!(matches!(
        sample_germs(&too_dense, &window(25.0), 0.0, &mut rng),
        Err(Error::InfeasibleIntensity(_))
    ));
}

#[test]
fn matern_cluster_intensity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = match Model::MaternCluster.spec() {
        ModelSpec::GermGrain { germ, .. } => germ,
        _ => unreachable!(),
    };
    assert!((spec.intensity() - 0.4).abs() < 1e-12);
    let counts: Vec<f64> = (0..200)
        .map(|_| sample_germs(&spec, &window(25.0), 0.0, &mut rng).unwrap().len() as f64)
        .collect();
    let (m, v) = mean_var(&counts);
    assert!((m - 250.0).abs() < 3.0 * (v / 200.0).sqrt(), "mean {m}");
    // Clustering inflates the count variance well beyond Poisson.
    assert!(v > 2.0 * m);
}

#[test]
fn boolean_grains_follow_their_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let w = Model::window();
    let cfg = Model::BooleanEllipse.spec().simulate(&w, &mut rng).unwrap();
    assert!(cfg.len() > 150);
    for g in &cfg.grains {
        let Grain::Ellipse { axes: [a, b], orientation, .. } = *g else {
            panic!("expected ellipse")
        };
        assert!(a >= b && (0.2..=1.0).contains(&a) && (0.2..=1.0).contains(&b));
        assert!((0.0..PI).contains(&orientation));
        assert!(g.touches(&w));
    }
    let cfg = Model::Boolean.spec().simulate(&w, &mut rng).unwrap();
    for g in &cfg.grains {
        let Grain::Disc { radius, center } = *g else { panic!("expected disc") };
        assert!((0.5..=1.0).contains(&radius));
        assert!(center.iter().all(|c| (-1.0..=26.0).contains(c)));
    }
}

#[test]
fn samplers_are_deterministic() {
    let w = Model::window();
    for model in Model::ALL {
        let mut spec = model.spec();
        if let ModelSpec::Quermass(p) = &mut spec {
            p.steps = 2000;
        }
        let a = spec.simulate(&w, &mut realisation_rng(42, 3)).unwrap();
        let b = spec.simulate(&w, &mut realisation_rng(42, 3)).unwrap();
        let c = spec.simulate(&w, &mut realisation_rng(42, 4)).unwrap();
        assert_eq!(a, b, "{model}");
        assert_ne!(a, c, "{model}");
    }
}

#[test]
fn model_names_round_trip() {
    for m in Model::ALL {
        assert_eq!(m.as_str().parse::<Model>().unwrap(), m);
    }
    assert_eq!("Boolean_Ellipse".parse::<Model>().unwrap(), Model::BooleanEllipse);
    assert!("poisson-voronoi".parse::<Model>().is_err());
    let json = serde_json::to_string(&Model::Cluster.spec()).unwrap();
    let back: ModelSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, Model::Cluster.spec());
}

fn discs(spec: &[(f64, f64, f64)]) -> GrainConfiguration {
    GrainConfiguration::new(
        window(10.0),
        spec.iter().map(|&(x, y, r)| Grain::disc(x, y, r)).collect(),
    )
}

#[test]
fn functionals_closed_forms() {
    let one = geometric_functionals(&discs(&[(5.0, 5.0, 1.3)])).unwrap();
    assert!((one.perimeter - 2.0 * PI * 1.3).abs() < 1e-12);
    assert_eq!(one.euler, 1);
    // Pixel counting is unbiased over lattice offsets; single placements
    // carry the lattice-point error of the circle.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for r in [0.5, 1.0, 1.3] {
        let areas: Vec<f64> = (0..200)
            .map(|_| {
                let (x, y) = (rng.random_range(3.0..7.0), rng.random_range(3.0..7.0));
                geometric_functionals(&discs(&[(x, y, r)])).unwrap().area
            })
            .collect();
        let exact = PI * r * r;
        assert!((mean_var(&areas).0 / exact - 1.0).abs() < 0.02);
        assert!(areas.iter().all(|a| (a / exact - 1.0).abs() < 0.1));
    }

    let two = geometric_functionals(&discs(&[(2.0, 2.0, 1.0), (6.0, 6.0, 1.0)])).unwrap();
    assert!((two.perimeter - 4.0 * PI).abs() < 1e-12);
    assert_eq!(two.euler, 2);

    let lens = geometric_functionals(&discs(&[(4.0, 5.0, 1.0), (5.0, 5.0, 1.0)])).unwrap();
    let exact_area = 2.0 * PI - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0);
    assert!((lens.perimeter / (8.0 * PI / 3.0) - 1.0).abs() < 1e-10);
    let mean_lens = (0..200)
        .map(|_| {
            let (x, y) = (rng.random_range(3.0..6.0), rng.random_range(3.0..6.0));
            geometric_functionals(&discs(&[(x, y, 1.0), (x + 1.0, y, 1.0)])).unwrap().area
        })
        .sum::<f64>()
        / 200.0;
    assert!((mean_lens / exact_area - 1.0).abs() < 0.02);
    assert!((lens.area / exact_area - 1.0).abs() < 0.1);
    assert_eq!(lens.euler, 1);

    // Equilateral triple at unit spacing: each circle loses two overlapping
    // arcs of half-angle pi/3 spanning pi in total.
    let h = 3f64.sqrt() / 2.0;
    let tri = exposed_perimeter(&[(4.0, 4.0, 1.0), (5.0, 4.0, 1.0), (4.5, 4.0 + h, 1.0)]);
    assert!((tri / (3.0 * PI) - 1.0).abs() < 1e-10);

    let half = 0.75f64.acos();
    let row = exposed_perimeter(&[(2.0, 5.0, 1.0), (3.5, 5.0, 1.0), (5.0, 5.0, 1.0)]);
    let expect = 2.0 * (2.0 * PI - 2.0 * half) + (2.0 * PI - 4.0 * half);
    assert!((row / expect - 1.0).abs() < 1e-10);

    // Coincident copies and nested discs add no boundary.
    let dup = geometric_functionals(&discs(&[(5.0, 5.0, 1.0), (5.0, 5.0, 1.0)])).unwrap();
    assert!((dup.perimeter - 2.0 * PI).abs() < 1e-12);
    assert_eq!(dup.euler, 1);
    let nested = exposed_perimeter(&[(5.0, 5.0, 2.0), (5.5, 5.0, 0.5)]);
    assert!((nested - 4.0 * PI).abs() < 1e-12);

    let ring: Vec<(f64, f64, f64)> = (0..12)
        .map(|k| {
            let a = k as f64 * PI / 6.0;
            (5.0 + 2.0 * a.cos(), 5.0 + 2.0 * a.sin(), 0.6)
        })
        .collect();
    assert_eq!(geometric_functionals(&discs(&ring)).unwrap().euler, 0);

    let ellipse = GrainConfiguration::new(window(10.0), vec![Grain::ellipse(5.0, 5.0, 1.0, 0.5, 0.0)]);
    assert!(matches!(geometric_functionals(&ellipse), Err(Error::InvalidGrain(_))));
}

#[test]
fn raster_functionals_agree_with_persistence_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let n = rng.random_range(1..25);
        let spec: Vec<(f64, f64, f64)> = (0..n)
            .map(|_| {
                (
                    rng.random_range(1.5..8.5),
                    rng.random_range(1.5..8.5),
                    rng.random_range(0.3..1.2),
                )
            })
            .collect();
        let cfg = discs(&spec);
        let f = geometric_functionals(&cfg).unwrap();
        // Same lattice: 80 pixels across a 10-unit window at the origin.
        let r = rasterize(&cfg, 80).unwrap();
        assert_eq!(f.euler, euler_characteristic(&r));
        assert_eq!((f.area * 64.0).round() as usize, r.count_foreground());
    }
}

fn small_params(theta: [f64; 3]) -> QuermassParams {
    QuermassParams {
        steps: 20_000,
        ..QuermassParams::new(theta)
    }
}

#[test]
fn incremental_state_matches_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for theta in [[0.62, -0.86, 0.7], [-1.0, 1.0, 0.0], [0.0, 0.0, 0.0]] {
        let p = small_params(theta);
        let mut s = QuermassSampler::new(&p, &window(12.0), &mut rng).unwrap();
        s.run(p.steps, &mut rng);
        let full = GrainConfiguration::new(window(12.0), s.all_discs());
        let direct = geometric_functionals(&full).unwrap();
        let tracked = s.functionals();
        assert_eq!(tracked.area, direct.area);
        assert_eq!(tracked.euler, direct.euler);
        assert!((tracked.perimeter - direct.perimeter).abs() < 1e-8 * direct.perimeter.max(1.0));
        let rates = s.acceptance_rates();
        assert!(rates.iter().all(|&r| r > 0.0), "{rates:?}");
    }
}

#[test]
fn zero_interaction_chain_is_the_reference_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = QuermassParams {
        burn_in: 5_000,
        ..small_params([0.0; 3])
    };
    let w = window(10.0);
    let mut s = QuermassSampler::new(&p, &w, &mut rng).unwrap();
    let counts: Vec<f64> = s.sample_states(200, 1_000, &mut rng, |s| s.len() as f64);
    let expected = 0.4 * 12.0 * 12.0;
    let (m, _) = mean_var(&counts);
    assert!((m - expected).abs() < 3.0 * (expected / 200.0).sqrt(), "mean {m} vs {expected}");
}

#[test]
fn detailed_balance_on_a_tiny_window() {
    let theta = [0.3, 0.4, -0.5];
    let lambda = 0.15;
    let r = 0.5;
    let w = window(3.0);
    let p = QuermassParams {
        theta,
        intensity: lambda,
        r_min: r,
        r_max: r,
        steps: 1,
        burn_in: 1_000,
        margin: Some(0.0),
        max_discs: Some(2),
        move_radius: None,
        pixels_per_unit: 8.0,
    };
    // Oracle: pi(n) proportional to (lambda |W|)^n / n! E[exp(theta . F)],
    // the expectation over n uniform discs estimated by direct sampling.
    let mut orng = ChaCha8Rng::seed_from_u64(100);
    let mut weight = |n: usize| -> f64 {
        let draws = 100_000;
        let total: f64 = (0..draws)
            .map(|_| {
                let ds: Vec<Disc> = (0..n)
                    .map(|k| Disc {
                        x: orng.random_range(0.0..3.0),
                        y: orng.random_range(0.0..3.0),
                        r,
                        id: k as u64,
                    })
                    .collect();
                functionals_of(&ds, 8.0).dot(&theta).exp()
            })
            .sum();
        total / draws as f64
    };
    let mass = lambda * 9.0;
    let raw = [1.0, mass * weight(1), mass * mass / 2.0 * weight(2)];
    let z: f64 = raw.iter().sum();
    let probs = raw.map(|v| v / z);

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut s = QuermassSampler::new(&p, &w, &mut rng).unwrap();
    let draws = 20_000;
    let counts = s.sample_states(draws, 50, &mut rng, |s| s.len());
    let mut observed = [0.0f64; 3];
    for c in counts {
        observed[c] += 1.0;
    }
    let chi2: f64 = (0..3)
        .map(|k| {
            let e = probs[k] * draws as f64;
            (observed[k] - e).powi(2) / e
        })
        .sum();
    // Two degrees of freedom: p = exp(-chi2 / 2).
    let p_value = (-chi2 / 2.0).exp();
    assert!(p_value > 0.01, "chi2 {chi2}, observed {observed:?}, expected {probs:?}");
}

#[test]
fn interaction_shapes_the_union() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = window(15.0);
    let run = |theta, rng: &mut ChaCha8Rng| {
        let p = small_params(theta);
        let mut s = QuermassSampler::new(&p, &w, rng).unwrap();
        s.run(p.steps, rng);
        s.functionals()
    };
    let boolean = run([0.0; 3], &mut rng);
    let repulsive = run([-1.0, 1.0, 0.0], &mut rng);
    let cluster = run([0.62, -0.86, 0.7], &mut rng);
    // Repulsion favours boundary over area, clustering the opposite.
    let ratio = |f: GeometricFunctionals| f.perimeter / f.area;
    assert!(ratio(repulsive) > ratio(boolean), "{repulsive:?} {boolean:?}");
    assert!(ratio(cluster) < ratio(boolean), "{cluster:?} {boolean:?}");
}
