use stadapt::field::Point;
use stadapt::meshnd::{MeshJson, SpaceMesh};

fn golden(name: &str) -> MeshJson {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn area(json: &MeshJson, e: usize) -> f64 {
    let [a, b, c] = [0, 1, 2].map(|k| json.vertices[json.elements[e][k]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

#[test]
fn one_mark_in_the_square() {
    let m = SpaceMesh::unit_square();
    let json = m.refine_bisection(&m.leaves()[..1]).unwrap().to_json();
    assert_eq!(json, golden("square_one_mark.json"));
    // four quarter triangles around the centre, which is everyone's newest vertex
    for e in 0..4 {
        assert_eq!(json.vertices[json.elements[e][json.refinement_edge[e]]], [0.5, 0.5]);
        assert_eq!(area(&json, e), 0.25);
    }
}

#[test]
fn corner_refinement_closure() {
    let mut m = SpaceMesh::unit_square().refine_uniform().refine_uniform();
    for _ in 0..4 {
        let e = m.locate(Point::new(0.1, 0.15)).unwrap().0;
        m = m.refine_bisection(&[e]).unwrap();
    }
    assert!(m.is_conforming());
    let json = m.to_json();
    assert_eq!(json, golden("square_corner_closure.json"));
    let total: f64 = (0..json.elements.len()).map(|e| area(&json, e)).sum();
    assert!((total - 1.0).abs() < 1e-14);
    assert_eq!(json.generation.iter().max(), Some(&6));
}
