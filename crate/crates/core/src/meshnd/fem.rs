//! Continuous Lagrange finite elements, `L2` projection and the spatial
//! greedy.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::lagrange::LagrangeElement;
use super::sparse::{conjugate_gradient, CsrMatrix};
use super::{ElementId, SpaceMesh, MAX_GENERATION};
use crate::error::{Error, Result};
use crate::field::Point;
use crate::quadrature::{bary_point, SimplexRule};

type GeomKey = [u64; 6];

fn geom_key(mesh: &SpaceMesh, e: ElementId) -> GeomKey {
    let mut key = [0u64; 6];
    for (i, p) in mesh.element_vertices(e).iter().enumerate() {
        key[2 * i] = p.x.to_bits();
        key[2 * i + 1] = p.y.to_bits();
    }
    key
}

/// A function `G : Omega -> R` to be projected, with its values at element
/// quadrature nodes cached by element geometry.
pub struct SpaceTarget<'a> {
    g: Box<dyn Fn(Point) -> f64 + Send + Sync + 'a>,
    rule: SimplexRule,
    cache: Mutex<HashMap<GeomKey, Arc<Vec<f64>>>>,
}

impl<'a> SpaceTarget<'a> {
    pub fn new<G: Fn(Point) -> f64 + Send + Sync + 'a>(dim: usize, g: G) -> Self {
        SpaceTarget {
            g: Box::new(g),
            rule: SimplexRule::default_for(dim),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn rule(&self) -> &SimplexRule {
        &self.rule
    }

    pub fn value(&self, p: Point) -> f64 {
        (self.g)(p)
    }

    /// `G` at the quadrature nodes of `e`.
    pub fn element_values(&self, mesh: &SpaceMesh, e: ElementId) -> Arc<Vec<f64>> {
        let key = geom_key(mesh, e);
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return v.clone();
        }
        let verts = mesh.element_vertices(e);
        let vals: Vec<f64> = self
            .rule
            .nodes
            .iter()
            .map(|b| (self.g)(bary_point(&verts, b)))
            .collect();
        let vals = Arc::new(vals);
        self.cache.lock().unwrap().insert(key, vals.clone());
        vals
    }

    fn all_values(&self, mesh: &SpaceMesh) -> Vec<Arc<Vec<f64>>> {
        mesh.leaves()
            .par_iter()
            .map(|e| self.element_values(mesh, *e))
            .collect()
    }
}

/// A continuous piecewise polynomial of degree `< order` on a mesh.
#[derive(Debug, Clone)]
pub struct FemFunction {
    mesh: SpaceMesh,
    order: usize,
    element: LagrangeElement,
    /// Global dof indices per leaf, in leaf order.
    local: Vec<Vec<usize>>,
    position: HashMap<ElementId, usize>,
    pub dofs: Vec<f64>,
}

impl FemFunction {
    /// The zero function of order `r2` on `mesh`.
    pub fn zero(mesh: &SpaceMesh, r2: usize) -> Result<Self> {
        if r2 < 2 {
            return Err(Error::InvalidParameter(format!(
                "continuous elements need order r2 >= 2 (got {r2}); r2 = 1 is only the constants"
            )));
        }
        let element = LagrangeElement::new(mesh.dim(), r2 - 1);
        let mut keys: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let mut local = Vec::with_capacity(mesh.len());
        for &e in mesh.leaves() {
            let vids = mesh.vertex_ids(e);
            let dofs = element
                .nodes
                .iter()
                .map(|alpha| {
                    let mut key: Vec<(usize, usize)> = alpha
                        .iter()
                        .zip(vids)
                        .filter(|(a, _)| **a > 0)
                        .map(|(a, v)| (*v, *a))
                        .collect();
                    key.sort_unstable();
                    let next = keys.len();
                    *keys.entry(key).or_insert(next)
                })
                .collect();
            local.push(dofs);
        }
        let position = mesh
            .leaves()
            .iter()
            .enumerate()
            .map(|(i, e)| (*e, i))
            .collect();
        Ok(FemFunction {
            mesh: mesh.clone(),
            order: r2,
            element,
            local,
            position,
            dofs: vec![0.0; keys.len()],
        })
    }

    pub fn mesh(&self) -> &SpaceMesh {
        &self.mesh
    }

    /// `r2`: polynomial degree `< r2`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    /// Value on leaf `e` at barycentric point `b`.
    pub fn eval_on_element(&self, e: ElementId, b: &[f64; 3]) -> f64 {
        let i = self.position[&e];
        self.element
            .values(b)
            .iter()
            .zip(&self.local[i])
            .map(|(phi, d)| phi * self.dofs[*d])
            .sum()
    }

    /// Value at `p`; zero outside `Omega`.
    pub fn eval(&self, p: Point) -> f64 {
        match self.mesh.locate(p) {
            Some((e, b)) => self.eval_on_element(e, &b),
            None => 0.0,
        }
    }

    /// Values at the nodes of `rule` mapped to leaf `e`.
    pub fn element_values(&self, e: ElementId, rule: &SimplexRule) -> Vec<f64> {
        rule.nodes.iter().map(|b| self.eval_on_element(e, b)).collect()
    }

    /// Interpolates `self` onto a refinement of its mesh.
    pub fn prolongate(&self, fine: &SpaceMesh) -> Result<FemFunction> {
        let mut out = FemFunction::zero(fine, self.order)?;
        for (i, &e) in fine.leaves().iter().enumerate() {
            let verts = fine.element_vertices(e);
            for (k, d) in out.local[i].iter().enumerate() {
                let p = bary_point(&verts, &out.element.node_bary(k));
                out.dofs[*d] = self.eval(p);
            }
        }
        Ok(out)
    }
}

/// Solves the projection normal equations for given element values of `G`.
/// Returns the projection and the per-element errors.
fn project_values(
    mesh: &SpaceMesh,
    r2: usize,
    rule: &SimplexRule,
    values: &[Arc<Vec<f64>>],
) -> Result<(FemFunction, Vec<f64>)> {
    let mut fem = FemFunction::zero(mesh, r2)?;
    let phi: Vec<Vec<f64>> = rule.nodes.iter().map(|b| fem.element.values(b)).collect();
    let nloc = fem.element.len();
    let mut triplets = Vec::with_capacity(mesh.len() * nloc * nloc);
    let mut rhs = vec![0.0; fem.dofs.len()];
    for (i, &e) in mesh.leaves().iter().enumerate() {
        let vol = mesh.element_measure(e);
        let dofs = &fem.local[i];
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = w * vol;
            let g = values[i][q];
            for a in 0..nloc {
                rhs[dofs[a]] += wq * g * phi[q][a];
                for b in 0..nloc {
                    triplets.push((dofs[a], dofs[b], wq * phi[q][a] * phi[q][b]));
                }
            }
        }
    }
    let mass = CsrMatrix::from_triplets(fem.dofs.len(), triplets);
    fem.dofs = conjugate_gradient(&mass, &rhs, 1e-10, 20 * fem.dofs.len() + 100)?;
    let indicators = mesh
        .leaves()
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let vol = mesh.element_measure(e);
            let dofs = &fem.local[i];
            rule.weights
                .iter()
                .enumerate()
                .map(|(q, w)| {
                    let uh: f64 = phi[q].iter().zip(dofs).map(|(p, d)| p * fem.dofs[*d]).sum();
                    w * vol * (values[i][q] - uh).powi(2)
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok((fem, indicators))
}

/// `L2(Omega)` projection of `G` onto continuous elements of order `r2`.
pub fn fem_project<G: Fn(Point) -> f64 + Send + Sync>(
    g: G,
    mesh: &SpaceMesh,
    r2: usize,
) -> Result<FemFunction> {
    let target = SpaceTarget::new(mesh.dim(), g);
    project_values(mesh, r2, &target.rule, &target.all_values(mesh)).map(|r| r.0)
}

/// `eta_K = || G - P G ||_{L2(K)}` per leaf, in leaf order.
pub fn element_indicators<G: Fn(Point) -> f64 + Send + Sync>(
    g: G,
    mesh: &SpaceMesh,
    r2: usize,
) -> Result<Vec<f64>> {
    let target = SpaceTarget::new(mesh.dim(), g);
    project_values(mesh, r2, &target.rule, &target.all_values(mesh)).map(|r| r.1)
}

/// Outcome of [`greedy_space`].
#[derive(Debug, Clone)]
pub struct GreedySpaceResult {
    pub mesh: SpaceMesh,
    pub projection: FemFunction,
    /// Per-leaf errors on the final mesh.
    pub indicators: Vec<f64>,
    /// `sqrt(sum eta_K^2)`.
    pub error: f64,
    /// Number of refinement passes.
    pub passes: usize,
}

impl SpaceTarget<'_> {
    /// Projection onto `mesh` together with the per-element errors.
    pub fn project(&self, mesh: &SpaceMesh, r2: usize) -> Result<(FemFunction, Vec<f64>)> {
        project_values(mesh, r2, &self.rule, &self.all_values(mesh))
    }

    /// Greedy refinement starting from `mesh`: elements with
    /// `eta_K > delta / sqrt(#T)` are bisected until the global error is at
    /// most `delta`.
    pub fn greedy(
        &self,
        mesh: &SpaceMesh,
        r2: usize,
        delta: f64,
        max_generation: u32,
    ) -> Result<GreedySpaceResult> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        let mut mesh = mesh.clone();
        let mut passes = 0;
        loop {
            let (projection, indicators) = self.project(&mesh, r2)?;
            let error = indicators.iter().map(|e| e * e).sum::<f64>().sqrt();
            if error <= delta {
                return Ok(GreedySpaceResult {
                    mesh,
                    projection,
                    indicators,
                    error,
                    passes,
                });
            }
            let threshold = delta / (mesh.len() as f64).sqrt();
            let marked: Vec<ElementId> = mesh
                .leaves()
                .iter()
                .zip(&indicators)
                .filter(|(_, eta)| **eta > threshold)
                .map(|(e, _)| *e)
                .collect();
            if let Some(e) = marked.iter().find(|e| mesh.generation(**e) >= max_generation) {
                return Err(Error::CapReached {
                    cap: max_generation,
                    detail: format!(
                        "element with vertices {:?} still has error above {threshold:e} (global {error:e})",
                        mesh.element_vertices(*e)
                    ),
                });
            }
            mesh = mesh.refine_bisection(&marked)?;
            passes += 1;
        }
    }
}

/// Spatial greedy from the initial mesh of `mesh0` with the default cap.
pub fn greedy_space<G: Fn(Point) -> f64 + Send + Sync>(
    g: G,
    mesh0: &SpaceMesh,
    r2: usize,
    delta: f64,
) -> Result<GreedySpaceResult> {
    SpaceTarget::new(mesh0.dim(), g).greedy(mesh0, r2, delta, MAX_GENERATION)
}

/// Projection errors under repeated uniform refinement, as `(#T, error)`.
pub fn uniform_space_baseline<G: Fn(Point) -> f64 + Send + Sync>(
    g: G,
    mesh0: &SpaceMesh,
    r2: usize,
    refinements: usize,
) -> Result<Vec<(usize, f64)>> {
    let target = SpaceTarget::new(mesh0.dim(), g);
    let mut mesh = mesh0.clone();
    let mut out = Vec::with_capacity(refinements + 1);
    for k in 0..=refinements {
        let (_, eta) = target.project(&mesh, r2)?;
        out.push((mesh.len(), eta.iter().map(|e| e * e).sum::<f64>().sqrt()));
        if k < refinements {
            mesh = mesh.refine_uniform();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_interval(levels: usize) -> SpaceMesh {
        let mut m = SpaceMesh::unit_interval();
        for _ in 0..levels {
            m = m.refine_uniform();
        }
        m
    }

    #[test]
    fn constants_and_linears_are_reproduced() {
        let m = uniform_interval(2);
        let f = fem_project(|_| 2.5, &m, 2).unwrap();
        assert!((f.eval(Point::on_line(0.37)) - 2.5).abs() < 1e-10);
        let f = fem_project(|p| p.x, &m, 2).unwrap();
        for x in [0.0, 0.13, 0.5, 0.99] {
            assert!((f.eval(Point::on_line(x)) - x).abs() < 1e-10);
        }
        let eta = element_indicators(|p| p.x, &m, 2).unwrap();
        assert!(eta.iter().all(|e| *e < 1e-10));
        let sq = SpaceMesh::unit_square().refine_uniform();
        let eta = element_indicators(|p| 1.0 + p.x - 2.0 * p.y, &sq, 2).unwrap();
        assert!(eta.iter().all(|e| *e < 1e-10));
        let eta = element_indicators(|p| p.x * p.y, &sq, 3).unwrap();
        assert!(eta.iter().all(|e| *e < 1e-10));
    }

    #[test]
    fn order_one_is_rejected() {
        assert!(fem_project(|_| 1.0, &SpaceMesh::unit_interval(), 1).is_err());
    }

    #[test]
    fn quadratic_projection_converges_at_second_order() {
        let err = |m: &SpaceMesh| {
            element_indicators(|p| p.x * p.x, m, 2)
                .unwrap()
                .iter()
                .map(|e| e * e)
                .sum::<f64>()
                .sqrt()
        };
        let e2 = err(&uniform_interval(1));
        let e4 = err(&uniform_interval(2));
        assert!((e2 / e4 - 4.0).abs() < 0.2, "{}", e2 / e4);
    }

    #[test]
    fn greedy_accepts_resolved_targets() {
        let m0 = SpaceMesh::unit_interval();
        let res = greedy_space(|_| 1.0, &m0, 2, 1e-8).unwrap();
        assert_eq!(res.mesh.len(), 1);
        let res = greedy_space(|p| (std::f64::consts::PI * p.x).sin(), &m0, 2, 1.0).unwrap();
        assert_eq!(res.mesh.len(), 1);
        let res = greedy_space(|p| (p.x - 0.5).abs().powf(0.3), &m0, 2, 1e-3).unwrap();
        assert!(res.error <= 1e-3);
        assert!(res.mesh.len() > 4);
    }
}
