//! Conforming bisection meshes of `Omega` and continuous finite elements.
//!
//! A [`SpaceMesh`] is a refinement forest over a fixed initial mesh. Element
//! ids are forest node indices, so they stay valid as the mesh is refined
//! and two meshes descending from the same initial mesh can be merged.
//!
//! In 2-D an element `(v0, v1, v2)` is bisected along its refinement edge
//! `v0 v1`; with `m` the midpoint the children are `(v2, v0, m)` and
//! `(v1, v2, m)` (newest vertex bisection). The unit square starts as the
//! triangles `(A, C, B)` and `(C, A, D)` with `A = (0,0)`, `B = (1,0)`,
//! `C = (1,1)`, `D = (0,1)`, both refined along the diagonal `AC`.

mod fem;
mod lagrange;
pub mod sparse;

pub use fem::{
    element_indicators, fem_project, greedy_space, uniform_space_baseline, FemFunction,
    GreedySpaceResult, SpaceTarget,
};
pub use lagrange::LagrangeElement;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DomainSpec, Omega, Point};

/// Index of a node in the refinement forest.
pub type ElementId = usize;

/// Default generation cap for the spatial greedy.
pub const MAX_GENERATION: u32 = 40;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
struct Node {
    /// Vertex ids; the third is `NONE` in 1-D.
    verts: [usize; 3],
    parent: Option<ElementId>,
    children: Option<[ElementId; 2]>,
    generation: u32,
}

type Edge = (usize, usize);

fn edge(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A conforming simplicial mesh of `Omega` obtained by bisection.
#[derive(Debug, Clone)]
pub struct SpaceMesh {
    dim: usize,
    vertices: Vec<Point>,
    nodes: Vec<Node>,
    roots: Vec<ElementId>,
    leaves: Vec<ElementId>,
    midpoints: HashMap<Edge, usize>,
    edge_leaves: HashMap<Edge, Vec<ElementId>>,
    trace: Vec<usize>,
}

/// Serialized mesh: leaf elements in forest order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshJson {
    pub dim: usize,
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<Vec<usize>>,
    /// Local index of the vertex opposite the refinement edge.
    pub refinement_edge: Vec<usize>,
    pub generation: Vec<u32>,
}

impl SpaceMesh {
    /// The initial mesh of `domain`.
    pub fn initial(domain: &DomainSpec) -> Self {
        match domain.omega() {
            Omega::UnitInterval => Self::unit_interval(),
            Omega::UnitSquare => Self::unit_square(),
        }
    }

    /// `[0, 1]` as a single element.
    pub fn unit_interval() -> Self {
        Self::from_roots(
            1,
            vec![Point::on_line(0.0), Point::on_line(1.0)],
            vec![[0, 1, NONE]],
        )
    }

    /// The unit square split along the diagonal `(0,0)-(1,1)`.
    pub fn unit_square() -> Self {
        let (a, b, c, d) = (0, 1, 2, 3);
        Self::from_roots(
            2,
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            vec![[a, c, b], [c, a, d]],
        )
    }

    fn from_roots(dim: usize, vertices: Vec<Point>, elems: Vec<[usize; 3]>) -> Self {
        let nodes: Vec<Node> = elems
            .into_iter()
            .map(|verts| Node {
                verts,
                parent: None,
                children: None,
                generation: 0,
            })
            .collect();
        let roots: Vec<ElementId> = (0..nodes.len()).collect();
        let mut mesh = SpaceMesh {
            dim,
            vertices,
            nodes,
            leaves: roots.clone(),
            roots,
            midpoints: HashMap::new(),
            edge_leaves: HashMap::new(),
            trace: Vec::new(),
        };
        for e in mesh.roots.clone() {
            mesh.register(e);
        }
        mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Leaf elements in depth-first forest order.
    pub fn leaves(&self) -> &[ElementId] {
        &self.leaves
    }

    /// `#T`.
    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// `#T_0`.
    pub fn initial_len(&self) -> usize {
        self.roots.len()
    }

    /// Marked counts of every refinement call.
    pub fn trace(&self) -> &[usize] {
        &self.trace
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    fn node(&self, e: ElementId) -> Result<&Node> {
        self.nodes
            .get(e)
            .ok_or_else(|| Error::UnknownId(format!("element {e}")))
    }

    /// Vertex ids of `e` (2 in 1-D, 3 in 2-D).
    pub fn vertex_ids(&self, e: ElementId) -> &[usize] {
        &self.nodes[e].verts[..self.dim + 1]
    }

    pub fn element_vertices(&self, e: ElementId) -> Vec<Point> {
        self.vertex_ids(e).iter().map(|v| self.vertices[*v]).collect()
    }

    /// Length or area of `e`.
    pub fn element_measure(&self, e: ElementId) -> f64 {
        let v = self.element_vertices(e);
        match self.dim {
            1 => (v[1].x - v[0].x).abs(),
            _ => 0.5 * ((v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y)).abs(),
        }
    }

    /// Longest edge length of `e`.
    pub fn element_diameter(&self, e: ElementId) -> f64 {
        let v = self.element_vertices(e);
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(v[i].dist(&v[j]));
            }
        }
        d
    }

    pub fn generation(&self, e: ElementId) -> u32 {
        self.nodes[e].generation
    }

    pub fn parent(&self, e: ElementId) -> Option<ElementId> {
        self.nodes[e].parent
    }

    pub fn children(&self, e: ElementId) -> Option<[ElementId; 2]> {
        self.nodes[e].children
    }

    pub fn is_leaf(&self, e: ElementId) -> bool {
        self.nodes.get(e).is_some_and(|n| n.children.is_none())
    }

    /// Root index and child choices leading to `e`.
    pub fn genealogy(&self, e: ElementId) -> (usize, Vec<usize>) {
        let mut path = Vec::new();
        let mut cur = e;
        while let Some(p) = self.nodes[cur].parent {
            let ch = self.nodes[p].children.expect("parent has children");
            path.push(if ch[0] == cur { 0 } else { 1 });
            cur = p;
        }
        path.reverse();
        let root = self.roots.iter().position(|r| *r == cur).expect("root");
        (root, path)
    }

    fn edges_of(&self, e: ElementId) -> Vec<Edge> {
        let v = self.nodes[e].verts;
        if self.dim == 1 {
            vec![edge(v[0], v[1])]
        } else {
            vec![edge(v[0], v[1]), edge(v[1], v[2]), edge(v[2], v[0])]
        }
    }

    fn register(&mut self, e: ElementId) {
        if self.dim == 2 {
            for ed in self.edges_of(e) {
                self.edge_leaves.entry(ed).or_default().push(e);
            }
        }
    }

    fn unregister(&mut self, e: ElementId) {
        if self.dim == 2 {
            for ed in self.edges_of(e) {
                if let Some(list) = self.edge_leaves.get_mut(&ed) {
                    list.retain(|x| *x != e);
                    if list.is_empty() {
                        self.edge_leaves.remove(&ed);
                    }
                }
            }
        }
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = edge(a, b);
        if let Some(m) = self.midpoints.get(&key) {
            return *m;
        }
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        self.vertices
            .push(Point::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)));
        let m = self.vertices.len() - 1;
        self.midpoints.insert(key, m);
        m
    }

    /// Bisects one leaf; returns the children.
    fn bisect(&mut self, e: ElementId) -> [ElementId; 2] {
        let Node {
            verts, generation, ..
        } = self.nodes[e].clone();
        let m = self.midpoint(verts[0], verts[1]);
        let kids = if self.dim == 1 {
            [[verts[0], m, NONE], [m, verts[1], NONE]]
        } else {
            [[verts[2], verts[0], m], [verts[1], verts[2], m]]
        };
        self.unregister(e);
        let base = self.nodes.len();
        for verts in kids {
            self.nodes.push(Node {
                verts,
                parent: Some(e),
                children: None,
                generation: generation + 1,
            });
        }
        let ch = [base, base + 1];
        self.nodes[e].children = Some(ch);
        self.register(ch[0]);
        self.register(ch[1]);
        ch
    }

    fn is_hanging(&self, e: ElementId) -> bool {
        self.dim == 2 && self.edges_of(e).iter().any(|ed| self.midpoints.contains_key(ed))
    }

    /// Bisects `marked` and closes the result to a conforming mesh.
    fn refine_in_place(&mut self, marked: &[ElementId]) -> Result<()> {
        for &e in marked {
            if !self.is_leaf(e) {
                return Err(Error::UnknownId(format!("element {e} is not a leaf")));
            }
        }
        let mut queue: VecDeque<ElementId> = marked.iter().copied().collect();
        while let Some(e) = queue.pop_front() {
            if !self.is_leaf(e) {
                continue;
            }
            let v = self.nodes[e].verts;
            let ref_edge = edge(v[0], v[1]);
            let kids = self.bisect(e);
            if self.dim == 2 {
                if let Some(others) = self.edge_leaves.get(&ref_edge) {
                    queue.extend(others.iter().copied());
                }
                for k in kids {
                    if self.is_hanging(k) {
                        queue.push_back(k);
                    }
                }
            }
        }
        let mut distinct = marked.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        self.trace.push(distinct.len());
        self.rebuild_leaves();
        Ok(())
    }

    fn rebuild_leaves(&mut self) {
        let mut out = Vec::with_capacity(self.nodes.len() / 2 + 1);
        let mut stack: Vec<ElementId> = self.roots.iter().rev().copied().collect();
        while let Some(e) = stack.pop() {
            match self.nodes[e].children {
                Some([a, b]) => {
                    stack.push(b);
                    stack.push(a);
                }
                None => out.push(e),
            }
        }
        self.leaves = out;
    }

    /// Refines every marked element plus the closure needed for conformity.
    pub fn refine_bisection(&self, marked: &[ElementId]) -> Result<SpaceMesh> {
        let mut out = self.clone();
        out.refine_in_place(marked)?;
        Ok(out)
    }

    /// Refines every leaf once.
    pub fn refine_uniform(&self) -> SpaceMesh {
        self.refine_bisection(&self.leaves.clone())
            .expect("leaves are valid marks")
    }

    /// `(#T - #T_0) / sum_j #M_j` with each `M_j` counted as a set, `0` before any marking.
    pub fn complexity_constant(&self) -> f64 {
        let marks: usize = self.trace.iter().sum();
        if marks == 0 {
            0.0
        } else {
            (self.len() - self.initial_len()) as f64 / marks as f64
        }
    }

    fn same_initial_mesh(&self, other: &SpaceMesh) -> bool {
        self.dim == other.dim
            && self.roots.len() == other.roots.len()
            && self.roots.iter().zip(&other.roots).all(|(a, b)| {
                self.element_vertices(*a)
                    .iter()
                    .zip(other.element_vertices(*b))
                    .all(|(p, q)| p.dist(&q) == 0.0)
            })
    }

    /// Smallest common refinement of two meshes with the same initial mesh.
    pub fn overlay(&self, other: &SpaceMesh) -> Result<SpaceMesh> {
        if !self.same_initial_mesh(other) {
            return Err(Error::IncompatibleMeshes(
                "meshes descend from different initial meshes".into(),
            ));
        }
        let mut out = self.clone();
        let marks_before = out.trace.len();
        for &leaf in other.leaves() {
            let (root, path) = other.genealogy(leaf);
            let mut cur = out.roots[root];
            for step in path {
                if out.is_leaf(cur) {
                    out.refine_in_place(&[cur])?;
                }
                cur = out.nodes[cur].children.expect("refined")[step];
            }
        }
        // The overlay is one refinement of `self`, not a sequence of marks.
        out.trace.truncate(marks_before);
        Ok(out)
    }

    /// Leaf containing `p` and the barycentric coordinates of `p` in it.
    pub fn locate(&self, p: Point) -> Option<(ElementId, [f64; 3])> {
        let tol = 1e-12;
        for &root in &self.roots {
            let mut cur = root;
            let mut bary = self.barycentric(cur, p);
            if bary.iter().take(self.dim + 1).any(|l| *l < -tol) {
                continue;
            }
            while let Some(ch) = self.nodes[cur].children {
                let b0 = self.barycentric(ch[0], p);
                if b0.iter().take(self.dim + 1).all(|l| *l >= -tol) {
                    cur = ch[0];
                    bary = b0;
                } else {
                    cur = ch[1];
                    bary = self.barycentric(cur, p);
                }
            }
            return Some((cur, bary));
        }
        None
    }

    /// Barycentric coordinates of `p` with respect to `e`.
    pub fn barycentric(&self, e: ElementId, p: Point) -> [f64; 3] {
        let v = self.element_vertices(e);
        if self.dim == 1 {
            let l1 = (p.x - v[0].x) / (v[1].x - v[0].x);
            [1.0 - l1, l1, 0.0]
        } else {
            let det = (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y);
            let l1 = ((p.x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (p.y - v[0].y)) / det;
            let l2 = ((v[1].x - v[0].x) * (p.y - v[0].y) - (p.x - v[0].x) * (v[1].y - v[0].y)) / det;
            [1.0 - l1 - l2, l1, l2]
        }
    }

    /// Edge-incidence audit: no leaf edge carries a midpoint, interior edges
    /// are shared by exactly two leaves and boundary edges by one; the
    /// element measures sum to `|Omega|`.
    pub fn is_conforming(&self) -> bool {
        let total: f64 = self.leaves.iter().map(|e| self.element_measure(*e)).sum();
        if (total - 1.0).abs() > 1e-12 {
            return false;
        }
        if self.dim == 1 {
            let mut ends: Vec<(f64, f64)> = self
                .leaves
                .iter()
                .map(|e| {
                    let v = self.element_vertices(*e);
                    (v[0].x, v[1].x)
                })
                .collect();
            ends.sort_by(|a, b| a.0.total_cmp(&b.0));
            return ends.windows(2).all(|w| w[0].1 == w[1].0);
        }
        let mut count: HashMap<Edge, usize> = HashMap::new();
        for &e in &self.leaves {
            for ed in self.edges_of(e) {
                if self.midpoints.contains_key(&ed) {
                    return false;
                }
                *count.entry(ed).or_default() += 1;
            }
        }
        count.iter().all(|(ed, n)| {
            let (a, b) = (self.vertices[ed.0], self.vertices[ed.1]);
            let on_boundary = (a.x == b.x && (a.x == 0.0 || a.x == 1.0))
                || (a.y == b.y && (a.y == 0.0 || a.y == 1.0));
            *n == if on_boundary { 1 } else { 2 }
        })
    }

    /// Vertices, leaf elements, refinement edges and generations.
    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            dim: self.dim,
            vertices: self.vertices.iter().map(|p| [p.x, p.y]).collect(),
            elements: self.leaves.iter().map(|e| self.vertex_ids(*e).to_vec()).collect(),
            refinement_edge: vec![self.dim; self.leaves.len()],
            generation: self.leaves.iter().map(|e| self.generation(*e)).collect(),
        }
    }

    /// Ids of the leaves whose vertex set matches one of `elements`.
    pub fn find_leaves(&self, elements: &[Vec<Point>]) -> Vec<ElementId> {
        elements
            .iter()
            .filter_map(|target| {
                self.leaves.iter().copied().find(|e| {
                    let v = self.element_vertices(*e);
                    v.iter().all(|p| target.iter().any(|q| p.dist(q) < 1e-14))
                })
            })
            .collect()
    }

    /// Element ids reachable from `e` (checks that `e` exists).
    pub fn check_element(&self, e: ElementId) -> Result<()> {
        self.node(e).map(|_| ())
    }
}

/// `T_*` = `T` with `marked` bisected and closed.
pub fn refine_bisection(mesh: &SpaceMesh, marked: &[ElementId]) -> Result<SpaceMesh> {
    mesh.refine_bisection(marked)
}

/// Smallest common refinement `T1 (+) T2`.
pub fn overlay(t1: &SpaceMesh, t2: &SpaceMesh) -> Result<SpaceMesh> {
    t1.overlay(t2)
}
