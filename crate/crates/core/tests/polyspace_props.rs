use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stadapt::curve::FieldSlice;
use stadapt::field::{make_test_field, DomainSpec, Field};
use stadapt::polyspace::{
    best_error, jackson_construct, lp_distance, orthonormal_time_basis, project_time_slice, SlicePoly, MEDIAN_SAMPLES,
};
use stadapt::quadrature::{GridConfig, SpatialGrid, TimeQuadrature};
use stadapt::smoothness::{ModulusEvaluator, SmoothnessParams};

fn grid_for(f: &Field) -> SpatialGrid {
    SpatialGrid::for_field(
        f,
        GridConfig {
            panels: 4,
            ..GridConfig::default()
        },
    )
}

fn corpus(k: usize) -> Field {
    let d = DomainSpec::unit(1);
    match k {
        0 => make_test_field("time-power", &[0.25], d),
        1 => make_test_field("space-power", &[1.5, 0.5], d),
        2 => make_test_field("tensor-singular", &[0.25], d),
        _ => make_test_field("poly", &[2.0, 1.0], d),
    }
    .unwrap()
}

fn dyadic(level: u32, index: u32) -> (f64, f64) {
    let n = 1u32 << level;
    let i = index % n;
    (i as f64 / n as f64, (i + 1) as f64 / n as f64)
}

fn random_poly(a: f64, b: f64, r: usize, n: usize, seed: u64) -> SlicePoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = SlicePoly::zero(orthonormal_time_basis(a, b, r).unwrap(), n);
    for c in p.coeffs.iter_mut().flatten() {
        *c = rng.gen_range(-1.0..1.0);
    }
    p
}

fn norm(p: &SlicePoly, zero: &FieldSlice, grid: &SpatialGrid, tq: &TimeQuadrature, q: f64) -> f64 {
    lp_distance(zero, p, grid, tq, q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn projection_beats_random_competitors(k in 0usize..4, r in 1usize..4, level in 0u32..4, index in 0u32..16, seed: u64, scale in -6.0f64..1.0) {
        let f = corpus(k);
        let grid = grid_for(&f);
        let tq = TimeQuadrature::for_field(&f);
        let (a, b) = dyadic(level, index);
        let slice = FieldSlice::new(&f, &grid);
        let proj = project_time_slice(&f, a, b, r, &grid, &tq).unwrap();
        let mut q = random_poly(a, b, r, grid.len(), seed);
        // competitors close to the projection as well as far from it
        for (c, p) in q.coeffs.iter_mut().flatten().zip(proj.coeffs.iter().flatten()) {
            *c = p + 10f64.powf(scale) * *c;
        }
        let best = lp_distance(&slice, &proj, &grid, &tq, 2.0);
        let other = lp_distance(&slice, &q, &grid, &tq, 2.0);
        prop_assert!(best <= other + 1e-8, "{best} > {other}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn best_error_is_monotone_in_order(k in 0usize..4, r in 1usize..4, level in 0u32..5, index in 0u32..32) {
        let f = corpus(k);
        let grid = grid_for(&f);
        let tq = TimeQuadrature::for_field(&f);
        let (a, b) = dyadic(level, index);
        let lo = best_error(&f, a, b, r, &grid, &tq).unwrap();
        let hi = best_error(&f, a, b, r + 1, &grid, &tq).unwrap();
        prop_assert!(hi <= lo + 1e-10, "E_{} = {hi} > E_{r} = {lo}", r + 1);
    }

    #[test]
    fn polynomial_norms_are_equivalent_with_a_fixed_constant(r in 1usize..5, k in 0i32..9, seed: u64, pi in 0usize..3, qi in 0usize..3) {
        let exps = [1.0, 2.0, f64::INFINITY];
        let (p, q) = (exps[pi], exps[qi]);
        let zero = Field::from_fn(DomainSpec::unit(1), "zero", |_, _| 0.0);
        let grid = grid_for(&zero);
        let slice = FieldSlice::new(&zero, &grid);
        let tq = TimeQuadrature::default();
        let len = 2f64.powi(-k);
        let unit = random_poly(0.0, 1.0, r, grid.len(), seed);
        let scaled = SlicePoly::from_lagrange(orthonormal_time_basis(0.0, len, r).unwrap(), &unit.to_lagrange()).unwrap();
        let ratio = |poly: &SlicePoly, l: f64| {
            norm(poly, &slice, &grid, &tq, p) / (l.powf(1.0 / p - 1.0 / q) * norm(poly, &slice, &grid, &tq, q))
        };
        let c1 = ratio(&unit, 1.0);
        let cl = ratio(&scaled, len);
        prop_assert!((c1 - cl).abs() <= 1e-8 * c1.max(1.0), "constant depends on |I|: {c1} vs {cl}");
        prop_assert!(cl <= (r * r) as f64 + 1e-9, "r={r} p={p} q={q}: ratio {cl}");
    }

    #[test]
    fn jackson_ratio_is_bounded(k in 0usize..3, r in 1usize..3, pi in 0usize..2, level in 0u32..5, index in 0u32..32) {
        let p = [1.0, 2.0][pi];
        let f = corpus(k);
        let grid = grid_for(&f);
        let tq = TimeQuadrature::for_field(&f);
        let (a, b) = dyadic(level, index);
        let slice = FieldSlice::new(&f, &grid);
        let poly = jackson_construct(&slice, a, b, r, p, &grid, &tq, MEDIAN_SAMPLES).unwrap();
        let err = lp_distance(&slice, &poly, &grid, &tq, p);
        let ev = ModulusEvaluator::new(&slice, a, b, SmoothnessParams::new(r, p).unwrap(), &grid, &tq).unwrap();
        let w = ev.avg((b - a) / (2 * r) as f64).unwrap();
        prop_assume!(w > 1e-10);
        let c = (err / w).powf(p);
        prop_assert!(c <= 50.0, "ratio {c}");
    }
}
