use proptest::prelude::*;

use stadapt::field::{make_test_field, DomainSpec, Field, Point};
use stadapt::spacetime::{build_fully_discrete, error_split, projection_stability_check, BuildOptions, StabilityOptions};

fn tensor(alpha: f64) -> Field {
    make_test_field("tensor-singular", &[alpha], DomainSpec::unit(1)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn halving_eps_never_increases_the_error(ai in 0usize..3, k in 2i32..6, r1 in 1usize..3) {
        let f = tensor([0.25, 0.5, 0.75][ai]);
        let opts = BuildOptions::default();
        let coarse = build_fully_discrete(&f, 2f64.powi(-k), r1, 2, &opts).unwrap();
        let fine = build_fully_discrete(&f, 2f64.powi(-k - 1), r1, 2, &opts).unwrap();
        prop_assert!(fine.report.global_error <= coarse.report.global_error + 1e-12,
            "{} > {}", fine.report.global_error, coarse.report.global_error);
    }

    #[test]
    fn reports_are_consistent_with_the_approximant(ai in 0usize..3, k in 2i32..6, t in 0.0f64..1.0, x in 0.0f64..1.0) {
        let f = tensor([0.25, 0.5, 0.75][ai]);
        let b = build_fully_discrete(&f, 2f64.powi(-k), 1, 2, &BuildOptions::default()).unwrap();
        let part = b.partition();
        prop_assert_eq!(part.meshes.len(), part.time.len());
        prop_assert_eq!(b.report.n_time, part.time.len());
        let sizes: usize = b.report.per_slice.iter().map(|s| s.mesh_size).sum();
        prop_assert_eq!(b.report.total_cardinality, sizes);
        prop_assert_eq!(part.cardinality(), sizes);

        let split = error_split(&f, &b.approximant);
        prop_assert!(split.global <= split.time_step + split.space_step + 1e-10);
        prop_assert!((split.global - b.report.global_error).abs() <= 1e-12);

        let t = t.min(1.0 - 1e-12);
        let i = part.time.locate(t);
        let slice = &b.approximant.slices[i];
        let w = slice.basis.values(t);
        let direct: f64 = w.iter().zip(&slice.coeffs).map(|(wj, g)| wj * g.eval(Point::on_line(x))).sum();
        prop_assert!((b.approximant.eval(t, Point::on_line(x)) - direct).abs() <= 1e-12);
    }
}

#[test]
fn stability_ratio_is_moderate_for_a_two_dimensional_field() {
    let f = Field::from_fn(DomainSpec::unit(2), "coupled", |t, p| {
        (t + (p.x - p.y).abs()).sqrt() * (std::f64::consts::PI * p.x).sin()
    });
    let opts = StabilityOptions {
        per_octave: 4,
        kmax: 8,
        panels: 6,
        ..StabilityOptions::default()
    };
    for (r1, s2) in [(1, 0.5), (2, 1.5)] {
        let ratio = projection_stability_check(&f, 0.0, 0.5, r1, s2, 2.0, &opts).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0 && ratio <= 10.0, "r1={r1} s2={s2}: {ratio}");
    }
}
