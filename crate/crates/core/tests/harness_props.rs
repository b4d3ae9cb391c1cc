use proptest::prelude::*;

use stadapt::harness::{emit_report, fit_rate, fit_rate_window, run_experiment, ExperimentConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fits_invert_power_laws(c in 1e-3f64..1e3, s in 0.05f64..4.0, m0 in 1.0f64..100.0, n in 4usize..20, skip in 0usize..3) {
        let pts: Vec<(f64, f64)> = (0..n).map(|k| {
            let m = m0 * 1.7f64.powi(k as i32);
            (m, c * m.powf(-s))
        }).collect();
        let fit = fit_rate_window(&pts, skip.min(n - 3)).unwrap();
        prop_assert!((fit.rate - s).abs() <= 1e-9 * s.max(1.0));
        prop_assert!((fit.intercept - c.ln()).abs() <= 1e-8 * (1.0 + c.ln().abs()));
        prop_assert!(fit.residual <= 1e-9);
    }

    #[test]
    fn fits_do_not_depend_on_point_order(seed in 0u64..1000, s in 0.1f64..2.0) {
        let mut pts: Vec<(f64, f64)> = (1..10).map(|k| {
            let m = (k * k) as f64;
            (m, m.powf(-s) * (1.0 + 0.1 * ((k as f64) * 1.3).sin()))
        }).collect();
        let base = fit_rate(&pts).unwrap();
        let shift = seed as usize % pts.len();
        pts.rotate_left(shift);
        pts.reverse();
        let other = fit_rate(&pts).unwrap();
        prop_assert!((base.rate - other.rate).abs() <= 1e-12);
        prop_assert_eq!(base.window, other.window);
    }
}

#[test]
fn reports_are_reproducible_apart_from_timings() {
    let text = "field.name = time-power\nfield.params = 0.25\nmode = greedy-time\nr = 1\np = 2\n\
                sweep.start = 0.1\nsweep.stop = 0.001\nsweep.points = 5\nseed = 11\n";
    let cfg = ExperimentConfig::parse(text).unwrap();
    let strip = |dir: &std::path::Path| {
        let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
        let rows: Vec<String> = csv
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect();
        let json = std::fs::read_to_string(dir.join("report.json")).unwrap();
        (rows, json)
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    emit_report(&run_experiment(&cfg).unwrap(), a.path()).unwrap();
    emit_report(&run_experiment(&cfg).unwrap(), b.path()).unwrap();
    assert_eq!(strip(a.path()), strip(b.path()));
}
