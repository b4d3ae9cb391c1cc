//! Numerical integration on intervals and simplices.
//!
//! Every `L_p` norm and inner product in the engine goes through this module.
//! Interval rules are Gauss-Legendre rules mapped to `[0, 1]`; simplex rules
//! are collapsed (Duffy) products of Gauss rules. Both carry weights that sum
//! to one, so integrals over a cell are `|cell| * sum(w_i g(x_i))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DomainSpec, Field, Omega, Point};
use crate::meshnd::SpaceMesh;

/// Gauss-type rule on the reference interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomial exactness degree.
    pub order: usize,
}

impl IntervalRule {
    /// `n`-point Gauss-Legendre rule, exact up to degree `2n - 1`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-like initial guess, refined by Newton on P_n.
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - z);
            nodes[n - 1 - i] = 0.5 * (1.0 + z);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        IntervalRule {
            nodes,
            weights,
            order: 2 * n - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl Default for IntervalRule {
    /// Ten-node Gauss-Legendre.
    fn default() -> Self {
        Self::gauss_legendre(10)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Rule on the reference simplex in barycentric coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRule {
    /// Barycentric coordinates; for intervals the third entry is zero.
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub order: usize,
    pub dim: usize,
}

impl SimplexRule {
    pub fn interval(rule: &IntervalRule) -> Self {
        SimplexRule {
            nodes: rule.nodes.iter().map(|&s| [1.0 - s, s, 0.0]).collect(),
            weights: rule.weights.clone(),
            order: rule.order,
            dim: 1,
        }
    }

    /// Collapsed Gauss rule on the triangle, exact up to `order`.
    pub fn triangle(order: usize) -> Self {
        let n = (order + 2).div_ceil(2).max(1);
        let g = IntervalRule::gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (u, wu) in g.nodes.iter().zip(&g.weights) {
            for (v, wv) in g.nodes.iter().zip(&g.weights) {
                let x = *u;
                let y = v * (1.0 - u);
                nodes.push([1.0 - x - y, x, y]);
                // area of the reference triangle is 1/2
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        SimplexRule {
            nodes,
            weights,
            order: 2 * n - 2,
            dim: 2,
        }
    }

    /// Default rule for the given dimension: 10-point Gauss in 1-D, degree 6
    /// on triangles.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            1 => Self::interval(&IntervalRule::default()),
            _ => Self::triangle(6),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Composite rule value of `g` over `[a, b]` with `panels` equal panels.
pub fn integrate_interval<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    rule: &IntervalRule,
    panels: usize,
) -> Result<f64> {
    if !(b > a) {
        return Err(Error::EmptyInterval(a, b));
    }
    if panels == 0 {
        return Err(Error::InvalidParameter("panels must be at least 1".into()));
    }
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mut s = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            s += w * g(lo + x * h);
        }
        acc += s * h;
    }
    Ok(acc)
}

/// Geometric grading toward a singular endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub levels: u32,
    pub ratio: f64,
}

impl Default for Grading {
    /// Ratio 1/2 over 40 levels.
    fn default() -> Self {
        Grading {
            levels: 40,
            ratio: 0.5,
        }
    }
}

/// Composite panel layout for integrals in time.
///
/// Intervals that start at a declared singular origin are split into panels
/// shrinking geometrically toward it; every other interval uses `panels`
/// equal panels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeQuadrature {
    pub rule: IntervalRule,
    pub panels: usize,
    /// Grading toward `t = 0`, active only if set.
    pub grading: Option<Grading>,
}

impl Default for TimeQuadrature {
    fn default() -> Self {
        TimeQuadrature {
            rule: IntervalRule::default(),
            panels: 1,
            grading: None,
        }
    }
}

impl TimeQuadrature {
    /// Default layout for `field`: graded toward the origin if the field
    /// declares a time singularity there.
    pub fn for_field(field: &Field) -> Self {
        TimeQuadrature {
            grading: field
                .singularities()
                .time_origin
                .then(Grading::default),
            ..Default::default()
        }
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels.max(1);
        self
    }

    /// Quadrature nodes and weights on `[a, b]` (weights include the length).
    pub fn nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let push_panel = |lo: f64, hi: f64, out: &mut Vec<(f64, f64)>| {
            let h = hi - lo;
            for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                out.push((lo + x * h, w * h));
            }
        };
        match self.grading {
            Some(g) if a == 0.0 && b > 0.0 => {
                let len = b - a;
                let mut edges = Vec::with_capacity(g.levels as usize + 2);
                edges.push(b);
                let mut scale = 1.0;
                for _ in 0..g.levels {
                    scale *= g.ratio;
                    edges.push(a + len * scale);
                }
                edges.push(a);
                for w in edges.windows(2).rev() {
                    push_panel(w[1], w[0], &mut out);
                }
            }
            _ => {
                let h = (b - a) / self.panels as f64;
                for k in 0..self.panels {
                    let lo = a + k as f64 * h;
                    let hi = if k + 1 == self.panels { b } else { lo + h };
                    push_panel(lo, hi, &mut out);
                }
            }
        }
        out
    }

    /// Integral of `g` over `[a, b]` with this layout.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64) -> f64 {
        self.nodes(a, b).iter().map(|(t, w)| w * g(*t)).sum()
    }
}

/// Fixed quadrature node set on `Omega` realizing `X = L2(Omega)`.
///
/// An element of `X` is represented by its values at [`SpatialGrid::points`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    pub points: Vec<Point>,
    /// Absolute weights (they sum to `|Omega|`).
    pub weights: Vec<f64>,
}

/// Layout of the default spatial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Panels per unit length in 1-D; squares per side in 2-D.
    pub panels: usize,
    /// Gauss points per panel in 1-D.
    pub points_per_panel: usize,
    /// Exactness degree of the triangle rule in 2-D.
    pub simplex_order: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            panels: 16,
            points_per_panel: 10,
            simplex_order: 6,
        }
    }
}

impl SpatialGrid {
    /// The trivial grid for scalar-valued (`X = R`) curves.
    pub fn scalar() -> Self {
        SpatialGrid {
            points: vec![Point::default()],
            weights: vec![1.0],
        }
    }

    /// Uniform grid on `Omega`.
    pub fn uniform(domain: &DomainSpec, cfg: GridConfig) -> Self {
        match domain.omega() {
            Omega::UnitInterval => {
                let edges: Vec<f64> = (0..=cfg.panels)
                    .map(|k| k as f64 / cfg.panels as f64)
                    .collect();
                Self::from_edges(&edges, cfg.points_per_panel)
            }
            Omega::UnitSquare => {
                let rule = SimplexRule::triangle(cfg.simplex_order);
                let k = cfg.panels;
                let h = 1.0 / k as f64;
                let mut points = Vec::new();
                let mut weights = Vec::new();
                for i in 0..k {
                    for j in 0..k {
                        let p00 = Point::new(i as f64 * h, j as f64 * h);
                        let p10 = Point::new((i + 1) as f64 * h, j as f64 * h);
                        let p11 = Point::new((i + 1) as f64 * h, (j + 1) as f64 * h);
                        let p01 = Point::new(i as f64 * h, (j + 1) as f64 * h);
                        for tri in [[p00, p10, p11], [p00, p11, p01]] {
                            for (b, w) in rule.nodes.iter().zip(&rule.weights) {
                                points.push(bary_point(&tri, b));
                                weights.push(w * 0.5 * h * h);
                            }
                        }
                    }
                }
                SpatialGrid { points, weights }
            }
        }
    }

    /// Grid adapted to `field`: a single node of weight `|Omega|` if the
    /// field does not depend on `x`; in 1-D, panels graded toward a declared
    /// point singularity.
    pub fn for_field(field: &Field, cfg: GridConfig) -> Self {
        let domain = field.domain();
        if field.space_independent() {
            let c = Point::new(0.5, if domain.dim() == 2 { 0.5 } else { 0.0 });
            return SpatialGrid {
                points: vec![c],
                weights: vec![domain.omega_measure()],
            };
        }
        match (domain.omega(), field.singularities().space_point) {
            (Omega::UnitInterval, Some(c)) => {
                let mut edges: Vec<f64> = (0..=cfg.panels)
                    .map(|k| k as f64 / cfg.panels as f64)
                    .collect();
                let g = Grading::default();
                let mut d = 1.0 / cfg.panels as f64;
                for _ in 0..g.levels / 2 {
                    d *= g.ratio;
                    edges.push(c.x - d);
                    edges.push(c.x + d);
                }
                edges.push(c.x);
                edges.retain(|e| (0.0..=1.0).contains(e));
                edges.sort_by(f64::total_cmp);
                edges.dedup();
                Self::from_edges(&edges, cfg.points_per_panel)
            }
            _ => Self::uniform(domain, cfg),
        }
    }

    fn from_edges(edges: &[f64], npts: usize) -> Self {
        let rule = IntervalRule::gauss_legendre(npts);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for w in edges.windows(2) {
            let h = w[1] - w[0];
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                points.push(Point::on_line(w[0] + x * h));
                weights.push(wt * h);
            }
        }
        SpatialGrid { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        self.norm_sq(v).sqrt()
    }

    pub fn norm_sq(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.weights).map(|(a, w)| w * a * a).sum()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.weights).map(|((a, b), w)| w * a * b).sum()
    }

    /// `|| u - v ||_X`.
    pub fn dist(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .zip(&self.weights)
            .map(|((a, b), w)| w * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Samples `g` on the grid.
    pub fn sample<G: Fn(Point) -> f64>(&self, g: G) -> Vec<f64> {
        self.points.iter().map(|p| g(*p)).collect()
    }
}

pub(crate) fn bary_point(verts: &[Point], b: &[f64; 3]) -> Point {
    let mut x = 0.0;
    let mut y = 0.0;
    for (v, l) in verts.iter().zip(b) {
        x += l * v.x;
        y += l * v.y;
    }
    Point::new(x, y)
}

/// Sum over the leaf elements of `mesh` of the mapped rule values.
pub fn integrate_domain<G: Fn(Point) -> f64>(g: G, mesh: &SpaceMesh, rule: &SimplexRule) -> f64 {
    mesh.leaves()
        .iter()
        .map(|&e| {
            let verts = mesh.element_vertices(e);
            let vol = mesh.element_measure(e);
            let s: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(b, w)| w * g(bary_point(&verts, b)))
                .sum();
            vol * s
        })
        .sum()
}

/// `|| g ||_{L2(Omega)}` on a mesh.
pub fn x_norm<G: Fn(Point) -> f64>(g: G, mesh: &SpaceMesh, rule: &SimplexRule) -> f64 {
    integrate_domain(|p| g(p).powi(2), mesh, rule).sqrt()
}

/// `|| g ||_{L2(Omega)}` on a fixed spatial grid.
pub fn x_norm_grid<G: Fn(Point) -> f64>(g: G, grid: &SpatialGrid) -> f64 {
    grid.points
        .iter()
        .zip(&grid.weights)
        .map(|(p, w)| w * g(*p).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_weights_and_exactness() {
        for n in 1..=12 {
            let r = IntervalRule::gauss_legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "n={n} sum={s}");
            for d in 0..=r.order {
                let v: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(d as i32))
                    .sum();
                assert!((v - 1.0 / (d as f64 + 1.0)).abs() < 1e-12, "n={n} d={d}");
            }
            assert!(r.nodes.iter().all(|x| *x > 0.0 && *x < 1.0));
        }
    }

    #[test]
    fn triangle_rule_exactness() {
        // int_T x^a y^b = a! b! / (a+b+2)!  on the reference triangle
        let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
        for order in [1, 2, 4, 6, 8] {
            let r = SimplexRule::triangle(order);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            for a in 0..=order {
                for b in 0..=(order - a) {
                    let v: f64 = r
                        .nodes
                        .iter()
                        .zip(&r.weights)
                        .map(|(l, w)| w * l[1].powi(a as i32) * l[2].powi(b as i32))
                        .sum::<f64>()
                        * 0.5;
                    let exact = fact(a) * fact(b) / fact(a + b + 2);
                    assert!((v - exact).abs() < 1e-14, "order {order} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn interval_examples() {
        let rule = IntervalRule::default();
        let one = integrate_interval(|_| 1.0, 0.0, 1.0, &rule, 3).unwrap();
        assert!((one - 1.0).abs() < 1e-14);
        let sq = integrate_interval(|t| t * t, 0.0, 1.0, &IntervalRule::gauss_legendre(2), 1).unwrap();
        assert!((sq - 1.0 / 3.0).abs() < 1e-12);
        assert!(integrate_interval(|t| t, 1.0, 1.0, &rule, 1).is_err());
    }

    #[test]
    fn singular_quarter_power_with_uniform_and_graded_panels() {
        let rule = IntervalRule::default();
        // Uniform panels only reach O(h^1.25); the error values are an
        // independent numpy computation of the same composite rule.
        let v = integrate_interval(|t: f64| t.powf(0.25), 0.0, 1.0, &rule, 64).unwrap();
        assert!((v - 0.8 - 1.477653966408532e-06).abs() < 1e-12, "{v}");
        let v = integrate_interval(|t: f64| t.powf(0.25), 0.0, 1.0, &rule, 256).unwrap();
        assert!((v - 0.8).abs() < 1e-6, "{v}");
        let tq = TimeQuadrature {
            grading: Some(Grading::default()),
            ..Default::default()
        };
        let g = tq.integrate(|t: f64| t.powf(0.25), 0.0, 1.0);
        assert!((g - 0.8).abs() < 1e-12, "{g}");
        let w: f64 = tq.nodes(0.0, 0.5).iter().map(|(_, w)| w).sum();
        assert!((w - 0.5).abs() < 1e-14);
    }

    #[test]
    fn grids_reproduce_simple_norms() {
        let g1 = SpatialGrid::uniform(&DomainSpec::unit(1), GridConfig::default());
        assert!(x_norm_grid(|_| 0.0, &g1) == 0.0);
        assert!((x_norm_grid(|_| 2.0, &g1) - 2.0).abs() < 1e-13);
        assert!((x_norm_grid(|p| p.x, &g1) - (1.0f64 / 3.0).sqrt()).abs() < 1e-10);

        let g2 = SpatialGrid::uniform(&DomainSpec::unit(2), GridConfig::default());
        let w: f64 = g2.weights.iter().sum();
        assert!((w - 1.0).abs() < 1e-13);
        let s: f64 = g2
            .points
            .iter()
            .zip(&g2.weights)
            .map(|(p, w)| w * (PI * p.x).sin() * (PI * p.y).sin())
            .sum();
        assert!((s - 4.0 / (PI * PI)).abs() < 1e-10);
    }

    #[test]
    fn linearity_on_polynomials() {
        let rule = IntervalRule::default();
        let g = |t: f64| 1.0 + t.powi(3);
        let h = |t: f64| t.powi(7) - 2.0 * t;
        let (a, b) = (1.7, -0.3);
        let lhs = integrate_interval(|t| a * g(t) + b * h(t), 0.0, 2.0, &rule, 2).unwrap();
        let rhs = a * integrate_interval(g, 0.0, 2.0, &rule, 2).unwrap()
            + b * integrate_interval(h, 0.0, 2.0, &rule, 2).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn doubling_panels_is_consistent_for_smooth_integrands() {
        let rule = IntervalRule::default();
        let f = |t: f64| (3.0 * t).sin() * (-t).exp();
        let a = integrate_interval(f, 0.0, 2.0, &rule, 4).unwrap();
        let b = integrate_interval(f, 0.0, 2.0, &rule, 8).unwrap();
        assert!((a - b).abs() < 1e-13);
    }
}
