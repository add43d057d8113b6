use pmqsopt::driver::{dual_update, schedule_params, LogSchedule, ScheduleMode};
use pmqsopt::linalg;
use pmqsopt::metrics::{fit_power_law, running_averages, ResidualSample};
use pmqsopt::problems::{DiagQuadratic, QuadData, QuadProblem};
use pmqsopt::qmodel::{build_model, eval_model, ModelOptions, ModelParams};
use pmqsopt::{positive_part, project_box, BoxDomain, StochasticProblem};
use proptest::prelude::*;

fn vec_of(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, n)
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_nonexpansive(
        r in 0.1f64..10.0,
        (x, y) in (1usize..8).prop_flat_map(|n| (vec_of(n, -50.0, 50.0), vec_of(n, -50.0, 50.0))),
    ) {
        let d = BoxDomain::new(r, x.len()).unwrap();
        let px = project_box(&x, &d).unwrap();
        let py = project_box(&y, &d).unwrap();
        prop_assert!(d.contains(&px));
        prop_assert_eq!(project_box(&px, &d).unwrap(), px.clone());
        prop_assert!(linalg::dist(&px, &py) <= linalg::dist(&x, &y) * (1.0 + 1e-15));
    }

    #[test]
    fn positive_part_is_a_projection(v in vec_of(6, -5.0, 5.0)) {
        let p = positive_part(&v);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert_eq!(positive_part(&p), p.clone());
        for (a, b) in v.iter().zip(&p) {
            prop_assert!(*a <= *b);
        }
    }

    #[test]
    fn dual_update_is_nonnegative(
        (lambda, q) in (1usize..6).prop_flat_map(|p| (vec_of(p, 0.0, 5.0), vec_of(p, -10.0, 10.0))),
        sigma in 1e-4f64..2.0,
    ) {
        let next = dual_update(&lambda, sigma, &q);
        for i in 0..lambda.len() {
            prop_assert!(next[i] >= 0.0);
            prop_assert!(next[i] >= lambda[i] + sigma * q[i]);
            // One rounding of λ + σq, relative to its magnitude.
            let slack = 4.0 * f64::EPSILON * (lambda[i] + sigma * q[i].abs());
            prop_assert!((next[i] - lambda[i]).abs() <= sigma * q[i].abs() + slack);
        }
    }

    #[test]
    fn theorem_schedule_relations(t in 1usize..2_000_000, beta in 0.01f64..100.0) {
        let s = schedule_params(t, beta, ScheduleMode::Theorem).unwrap();
        let tf = t as f64;
        prop_assert!((s.sigma * tf.powf(0.75) - 1.0).abs() <= 1e-12);
        prop_assert!((s.alpha / (beta * tf.powf(0.25)) - 1.0).abs() <= 1e-12);
        prop_assert_eq!(s.tau, tf.sqrt());
    }

    #[test]
    fn log_points_are_sorted_with_endpoints(t in 1usize..100_000, k in 1usize..500, geometric in any::<bool>()) {
        let sched = if geometric { LogSchedule::Geometric(k) } else { LogSchedule::Stride(k) };
        let pts = sched.points(t);
        prop_assert_eq!(pts[0], 1);
        prop_assert_eq!(*pts.last().unwrap(), t);
        prop_assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn running_averages_are_prefix_means(rows in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0, -10.0f64..10.0), 1..40)) {
        let samples: Vec<ResidualSample> = rows
            .iter()
            .enumerate()
            .map(|(t, (k, c, m))| ResidualSample { t: t + 1, kkt_sq: *k, cons: *c, comp: *m })
            .collect();
        let avg = running_averages(&samples);
        for (i, a) in avg.iter().enumerate() {
            let n = (i + 1) as f64;
            let k: f64 = rows[..=i].iter().map(|r| r.0).sum::<f64>() / n;
            let c: f64 = rows[..=i].iter().map(|r| r.1).sum::<f64>() / n;
            let m: f64 = rows[..=i].iter().map(|r| r.2).sum::<f64>() / n;
            prop_assert!((a.r_kkt_sq - k).abs() <= 1e-12 * k.max(1.0));
            prop_assert!((a.r_cons - c).abs() <= 1e-12 * c.max(1.0));
            prop_assert!((a.r_comp_abs - m.abs()).abs() <= 1e-12 * m.abs().max(1.0));
            prop_assert!(a.r_kkt_sq >= 0.0 && a.r_cons >= 0.0 && a.r_comp_abs >= 0.0);
        }
    }

    #[test]
    fn power_law_recovers_exponent(slope in -2.0f64..2.0, scale in 0.01f64..100.0, count in 2usize..30) {
        let pts: Vec<(f64, f64)> = (0..count)
            .map(|k| {
                let t = 1.0 + 37.0 * k as f64;
                (t, scale * t.powf(slope))
            })
            .collect();
        let fit = fit_power_law(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-9);
        prop_assert!((fit.intercept - scale.ln()).abs() <= 1e-8);
    }

    #[test]
    fn diagonal_models_minorize_sampled_constraints(
        diag in vec_of(4, -1.0, 1.0),
        lin in vec_of(4, -2.0, 2.0),
        anchor in vec_of(4, -3.0, 3.0),
        probe in vec_of(4, -3.0, 3.0),
        lambda in 0.0f64..5.0,
    ) {
        let prob = QuadProblem::new(QuadData {
            radius: 3.0,
            hessian: vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            linear: vec![vec![0.0; 4]],
            offset: vec![0.0],
            constraints: vec![vec![DiagQuadratic { offset: 0.5, linear: lin, diag }]],
            objective_modulus: None,
            slater: None,
        })
        .unwrap();
        let params = ModelParams { tau: 1.0, sigma: 0.1, alpha: 1.0 };
        let m = build_model(&prob, &anchor, &[lambda], &[0], params, &ModelOptions::default()).unwrap();
        let (_, q) = eval_model(&m, &probe).unwrap();
        let mut g = [0.0];
        prob.constraints(&probe, 0, &mut g, None);
        prop_assert!(q[0] <= g[0] + 1e-10 * g[0].abs().max(1.0));
        prop_assert!(m.sigma0.min_diag() >= 1.0);
        let total = m.sigma0.diag_entry(0) + lambda * m.curvatures[0].diag_entry(0);
        prop_assert!((total - 1.0).abs() <= 1e-12 * (1.0 + lambda));
    }
}
