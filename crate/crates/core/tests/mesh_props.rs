use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stadapt::field::{make_test_field, DomainSpec, Point};
use stadapt::mesh1d::{complexity_ratio, refine_1d, ErrorFunctional, GreedyTime, TimePartition};
use stadapt::meshnd::{fem_project, SpaceMesh};
use stadapt::quadrature::{x_norm, SimplexRule, SpatialGrid, TimeQuadrature};

fn random_partition(rng: &mut ChaCha8Rng, steps: usize) -> TimePartition {
    let mut t = TimePartition::root(2.0).unwrap();
    for _ in 0..steps {
        let leaves = t.leaves().to_vec();
        let marked: Vec<_> = leaves.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
        t = refine_1d(&t, &marked).unwrap();
    }
    t
}

fn random_mesh(mesh0: &SpaceMesh, rng: &mut ChaCha8Rng, steps: usize) -> SpaceMesh {
    let mut mesh = mesh0.clone();
    for _ in 0..steps {
        let leaves = mesh.leaves().to_vec();
        let k = rng.gen_range(1..=leaves.len().div_ceil(3));
        let marked: Vec<_> = (0..k).map(|_| leaves[rng.gen_range(0..leaves.len())]).collect();
        mesh = mesh.refine_bisection(&marked).unwrap();
    }
    mesh
}

fn initial(dim: usize) -> SpaceMesh {
    if dim == 1 {
        SpaceMesh::unit_interval()
    } else {
        SpaceMesh::unit_square()
    }
}

/// Leaf elements as sorted vertex coordinates, independent of ids.
fn element_set(mesh: &SpaceMesh) -> Vec<Vec<(u64, u64)>> {
    let mut out: Vec<Vec<(u64, u64)>> = mesh
        .leaves()
        .iter()
        .map(|e| {
            let mut v: Vec<_> = mesh
                .element_vertices(*e)
                .iter()
                .map(|p| (p.x.to_bits(), p.y.to_bits()))
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn time_partitions_tile_and_bisect_once_per_mark(seed: u64, steps in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_partition(&mut rng, steps);
        let bp = t.breakpoints();
        prop_assert_eq!(bp[0], 0.0);
        prop_assert_eq!(*bp.last().unwrap(), 2.0);
        prop_assert_eq!(bp.len(), t.len() + 1);
        for ((w, level), id) in bp.windows(2).zip(t.levels()).zip(t.leaves()) {
            prop_assert!(w[0] < w[1]);
            prop_assert_eq!(w[1] - w[0], 2.0 * 2f64.powi(-(level as i32)));
            prop_assert_eq!(t.bounds(*id), (w[0], w[1]));
        }
        let ratio = complexity_ratio(&t);
        prop_assert!(ratio == 1.0 || (ratio == 0.0 && t.len() == 1), "ratio {}", ratio);
    }

    #[test]
    fn bisection_stays_conforming_and_covers_the_domain(seed: u64, dim in 1usize..3, steps in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mesh = random_mesh(&initial(dim), &mut rng, steps);
        prop_assert!(mesh.is_conforming());
        let total: f64 = mesh.leaves().iter().map(|e| mesh.element_measure(*e)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "measure {}", total);
        let marks: usize = mesh.trace().iter().sum();
        prop_assert!(mesh.len() - mesh.initial_len() >= marks.min(1));
    }

    #[test]
    fn overlay_is_commutative_and_associative(seed: u64, dim in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m0 = initial(dim);
        let mut pick = || {
            let steps = rng.gen_range(0..6);
            random_mesh(&m0, &mut rng, steps)
        };
        let (a, b, c) = (pick(), pick(), pick());
        let ab = a.overlay(&b).unwrap();
        prop_assert_eq!(element_set(&ab), element_set(&b.overlay(&a).unwrap()));
        let left = ab.overlay(&c).unwrap();
        let right = a.overlay(&b.overlay(&c).unwrap()).unwrap();
        prop_assert_eq!(element_set(&left), element_set(&right));
        prop_assert!(left.is_conforming());
        prop_assert!(ab.len() + m0.len() <= a.len() + b.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projection_error_does_not_grow_under_refinement(seed: u64, dim in 1usize..3, r2 in 2usize..4, beta in 0.3f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = move |p: Point| ((p.x - 0.4).powi(2) + (p.y - 0.3).powi(2)).sqrt().powf(beta);
        let rule = SimplexRule::default_for(dim);
        let mut mesh = initial(dim);
        let mut last = f64::INFINITY;
        for _ in 0..5 {
            let fem = fem_project(g, &mesh, r2).unwrap();
            let err = x_norm(|p| g(p) - fem.eval(p), &mesh, &rule);
            prop_assert!(err <= last * (1.0 + 1e-8) + 1e-12, "{} > {}", err, last);
            last = err;
            mesh = random_mesh(&mesh, &mut rng, 1);
        }
    }

    #[test]
    fn greedy_time_meets_its_postconditions(alpha in 0.1f64..2.0, k in 2i32..10, pi in 0usize..2) {
        let p = [2.0, 1.0][pi];
        let f = make_test_field("time-power", &[alpha], DomainSpec::unit(1)).unwrap();
        let tq = TimeQuadrature::for_field(&f);
        let mut g = GreedyTime::new(&f, 1, ErrorFunctional::for_p(p), SpatialGrid::scalar(), tq).unwrap();
        let delta = 2f64.powi(-k);
        let res = g.run(delta).unwrap();
        for e in &res.errors {
            prop_assert!(*e <= delta + 1e-10);
        }
        for m in &res.marks {
            prop_assert!(m.error > delta);
        }
        prop_assert_eq!(complexity_ratio(&res.partition), if res.marks.is_empty() { 0.0 } else { 1.0 });
    }
}
