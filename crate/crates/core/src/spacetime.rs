//! The two-step fully discrete construction.
//!
//! Step 1 runs the time greedy with exact `L2(I, X)` projections, giving
//! per-slice coefficient fields `G_ij = int_I f W_ij dt`. Step 2 runs the
//! spatial greedy on each `G_ij`, overlays the meshes of a slice and
//! reprojects every `G_ij` onto the overlay. Each step gets half of the
//! error budget `eps`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Point};
use crate::mesh1d::{ErrorFunctional, GreedyTime, TimePartition, MAX_LEVEL};
use crate::meshnd::{ElementId, FemFunction, SpaceMesh, SpaceTarget, MAX_GENERATION};
use crate::polyspace::{orthonormal_time_basis, ProjectionCoefficients, TimeBasis};
use crate::quadrature::{bary_point, GridConfig, IntervalRule, SimplexRule, SpatialGrid, TimeQuadrature};

/// A time partition with one spatial mesh per slice.
#[derive(Debug, Clone)]
pub struct TimeSpacePartition {
    pub time: TimePartition,
    pub meshes: Vec<SpaceMesh>,
}

impl TimeSpacePartition {
    /// `#P = sum_i #T_i`.
    pub fn cardinality(&self) -> usize {
        self.meshes.iter().map(SpaceMesh::len).sum()
    }
}

/// `F(t, x) = sum_j W_ij(t) F_ij(x)` on slice `i`.
#[derive(Debug, Clone)]
pub struct SliceFn {
    pub basis: TimeBasis,
    pub coeffs: Vec<FemFunction>,
}

/// A piecewise tensor-product function on a time-space partition.
#[derive(Debug, Clone)]
pub struct FullyDiscreteFn {
    pub partition: TimeSpacePartition,
    pub slices: Vec<SliceFn>,
}

impl FullyDiscreteFn {
    /// `F(t, x)`; zero outside `[0, T) x Omega`.
    pub fn eval(&self, t: f64, x: Point) -> f64 {
        let i = self.partition.time.locate(t);
        let slice = &self.slices[i];
        let Some((e, b)) = self.partition.meshes[i].locate(x) else {
            return 0.0;
        };
        slice
            .basis
            .values(t)
            .iter()
            .zip(&slice.coeffs)
            .map(|(w, g)| w * g.eval_on_element(e, &b))
            .sum()
    }

    /// `F = 0` on the initial partition.
    pub fn zero(f: &Field, r1: usize, r2: usize) -> Result<Self> {
        let t_end = f.domain().t_end();
        let mesh = SpaceMesh::initial(f.domain());
        Ok(FullyDiscreteFn {
            slices: vec![SliceFn {
                basis: orthonormal_time_basis(0.0, t_end, r1)?,
                coeffs: (0..r1)
                    .map(|_| FemFunction::zero(&mesh, r2))
                    .collect::<Result<_>>()?,
            }],
            partition: TimeSpacePartition {
                time: TimePartition::root(t_end)?,
                meshes: vec![mesh],
            },
        })
    }
}

/// How step 1 picks its greedy tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeTolerance {
    /// Start at `delta = eps/2` and shrink by `2^(-1/2)` until the time
    /// error is at most `eps/2`.
    Budget,
    /// A fixed greedy tolerance.
    Delta(f64),
}

/// Knobs of [`build_fully_discrete`].
#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub time_tolerance: TimeTolerance,
    /// Spatial grid for the time greedy.
    pub grid: GridConfig,
    pub max_level: u32,
    pub max_generation: u32,
    /// Element size below which error quadrature is not subdivided.
    pub error_resolution: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            time_tolerance: TimeTolerance::Budget,
            grid: GridConfig::default(),
            max_level: MAX_LEVEL,
            max_generation: MAX_GENERATION,
            error_resolution: 1.0 / 64.0,
        }
    }
}

/// Per-slice part of the build report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub mesh_size: usize,
    /// `|| G_ij - F_ij ||_X`.
    pub errors_per_j: Vec<f64>,
}

/// Build report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub eps: f64,
    pub r1: usize,
    pub r2: usize,
    #[serde(rename = "N_time")]
    pub n_time: usize,
    /// Greedy tolerance reached in step 1.
    pub time_delta: f64,
    pub per_slice: Vec<SliceReport>,
    pub total_cardinality: usize,
    /// `|| f - G ||`.
    pub error_time_step: f64,
    /// `|| G - F ||`.
    pub error_space_step: f64,
    /// `|| f - F ||`.
    pub global_error: f64,
}

/// Result of [`build_fully_discrete`].
#[derive(Debug, Clone)]
pub struct FullyDiscreteBuild {
    pub approximant: FullyDiscreteFn,
    pub report: BuildReport,
}

impl FullyDiscreteBuild {
    pub fn partition(&self) -> &TimeSpacePartition {
        &self.approximant.partition
    }
}

struct SliceData {
    source: Arc<ProjectionCoefficients>,
    mesh: SpaceMesh,
    coeffs: Vec<FemFunction>,
    errors: Vec<f64>,
}

/// Builds `F` with `|| f - F ||_{L2} <= eps` (up to quadrature).
pub fn build_fully_discrete(
    f: &Field,
    eps: f64,
    r1: usize,
    r2: usize,
    opts: &BuildOptions,
) -> Result<FullyDiscreteBuild> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if r2 < 2 {
        return Err(Error::InvalidParameter(format!("r2 must be at least 2, got {r2}")));
    }
    let grid = SpatialGrid::for_field(f, opts.grid);
    let tq = TimeQuadrature::for_field(f);
    let half = 0.5 * eps;

    // Step 1.
    let mut greedy = GreedyTime::new(f, r1, ErrorFunctional::BestL2, grid.clone(), tq.clone())?
        .with_max_level(opts.max_level);
    let mut step1 = match opts.time_tolerance {
        TimeTolerance::Delta(d) => greedy.run(d)?,
        TimeTolerance::Budget => {
            let mut delta = half;
            loop {
                let res = greedy.run(delta)?;
                if res.global_error <= half {
                    break res;
                }
                delta *= 0.5f64.sqrt();
            }
        }
    };
    let g_norms: Vec<Vec<f64>> = step1
        .approximant
        .pieces
        .iter()
        .map(|p| p.coeffs.iter().map(|c| grid.norm(c)).collect())
        .collect();
    let sources: Vec<Arc<ProjectionCoefficients>> = std::mem::take(&mut step1.approximant.pieces)
        .into_iter()
        .map(|p| p.source.expect("projections carry their coefficient source"))
        .collect();
    let g_total = g_norms.iter().flatten().map(|n| n * n).sum::<f64>().sqrt();

    // Step 2.
    let mesh0 = SpaceMesh::initial(f.domain());
    let dim = f.domain().dim();
    let slices: Vec<SliceData> = sources
        .into_par_iter()
        .zip(g_norms.par_iter())
        .map(|(source, norms)| {
            let targets: Vec<SpaceTarget> = (0..r1)
                .map(|j| {
                    let src = source.clone();
                    SpaceTarget::new(dim, move |p| src.coefficient(j, p))
                })
                .collect();
            let mut mesh = mesh0.clone();
            for (target, norm) in targets.iter().zip(norms) {
                if *norm <= 1e-14 * g_total || g_total == 0.0 {
                    continue;
                }
                let delta = half * norm / g_total;
                let res = target.greedy(&mesh0, r2, delta, opts.max_generation)?;
                mesh = mesh.overlay(&res.mesh)?;
            }
            let mut coeffs = Vec::with_capacity(r1);
            let mut errors = Vec::with_capacity(r1);
            for target in &targets {
                let (fem, eta) = target.project(&mesh, r2)?;
                errors.push(eta.iter().map(|e| e * e).sum::<f64>().sqrt());
                coeffs.push(fem);
            }
            Ok(SliceData {
                source,
                mesh,
                coeffs,
                errors,
            })
        })
        .collect::<Result<_>>()?;

    let mut meshes = Vec::with_capacity(slices.len());
    let mut fns = Vec::with_capacity(slices.len());
    let mut per_slice = Vec::with_capacity(slices.len());
    let mut sources = Vec::with_capacity(slices.len());
    for s in slices {
        per_slice.push(SliceReport {
            mesh_size: s.mesh.len(),
            errors_per_j: s.errors,
        });
        fns.push(SliceFn {
            basis: *s.source.basis(),
            coeffs: s.coeffs,
        });
        meshes.push(s.mesh);
        sources.push(s.source);
    }
    let approximant = FullyDiscreteFn {
        partition: TimeSpacePartition {
            time: step1.partition.clone(),
            meshes,
        },
        slices: fns,
    };
    let split = error_split_with(f, &approximant, Some(&sources), &tq, opts.error_resolution);
    let report = BuildReport {
        eps,
        r1,
        r2,
        n_time: approximant.partition.time.len(),
        time_delta: step1.delta,
        per_slice,
        total_cardinality: approximant.partition.cardinality(),
        error_time_step: split.time_step,
        error_space_step: split.space_step,
        global_error: split.global,
    };
    Ok(FullyDiscreteBuild {
        approximant,
        report,
    })
}

/// The three errors of the triangle split, all measured with one node set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSplit {
    /// `|| f - F ||`.
    pub global: f64,
    /// `|| f - G ||` with `G` the time projection.
    pub time_step: f64,
    /// `|| G - F ||`.
    pub space_step: f64,
}

/// Quadrature nodes on `e`, subdividing until pieces are at most
/// `resolution` across. Returns barycentric points and absolute weights.
fn element_nodes(
    mesh: &SpaceMesh,
    e: ElementId,
    rule: &SimplexRule,
    resolution: f64,
) -> Vec<([f64; 3], f64)> {
    let vol = mesh.element_measure(e);
    let diam = mesh.element_diameter(e);
    let mut out = Vec::new();
    if mesh.dim() == 1 {
        let m = (diam / resolution).ceil().max(1.0) as usize;
        for k in 0..m {
            for (b, w) in rule.nodes.iter().zip(&rule.weights) {
                let s = (k as f64 + b[1]) / m as f64;
                out.push(([1.0 - s, s, 0.0], w * vol / m as f64));
            }
        }
    } else {
        let levels = (diam / resolution).log2().ceil().max(0.0) as u32;
        let mut tris = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(4 * tris.len());
            for t in tris {
                let mid = |a: [f64; 3], b: [f64; 3]| {
                    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]
                };
                let (m01, m12, m20) = (mid(t[0], t[1]), mid(t[1], t[2]), mid(t[2], t[0]));
                next.push([t[0], m01, m20]);
                next.push([m01, t[1], m12]);
                next.push([m20, m12, t[2]]);
                next.push([m01, m12, m20]);
            }
            tris = next;
        }
        let scale = vol / tris.len() as f64;
        for t in &tris {
            for (b, w) in rule.nodes.iter().zip(&rule.weights) {
                let mut l = [0.0; 3];
                for (i, li) in l.iter_mut().enumerate() {
                    *li = b[0] * t[0][i] + b[1] * t[1][i] + b[2] * t[2][i];
                }
                out.push((l, w * scale));
            }
        }
    }
    out
}

fn error_split_with(
    f: &Field,
    approx: &FullyDiscreteFn,
    sources: Option<&[Arc<ProjectionCoefficients>]>,
    tq: &TimeQuadrature,
    resolution: f64,
) -> ErrorSplit {
    let dim = f.domain().dim();
    let rule = SimplexRule::default_for(dim);
    let sums: Vec<[f64; 3]> = (0..approx.slices.len())
        .into_par_iter()
        .map(|i| {
            let slice = &approx.slices[i];
            let mesh = &approx.partition.meshes[i];
            let basis = slice.basis;
            let r1 = basis.r;
            let src = match sources {
                Some(s) => s[i].clone(),
                None => Arc::new(ProjectionCoefficients::new(f, basis, tq)),
            };
            let nodes = tq.nodes(basis.a, basis.b);
            let wt: Vec<Vec<f64>> = nodes.iter().map(|(t, _)| basis.values(*t)).collect();
            let mut fvals = vec![0.0; nodes.len()];
            let mut acc = [0.0; 3];
            for &e in mesh.leaves() {
                let verts = mesh.element_vertices(e);
                for (b, wx) in element_nodes(mesh, e, &rule, resolution) {
                    let x = bary_point(&verts, &b);
                    for (v, (t, _)) in fvals.iter_mut().zip(&nodes) {
                        *v = f.value(*t, x);
                    }
                    let g: Vec<f64> = (0..r1)
                        .map(|j| src.weights(j).iter().zip(&fvals).map(|(w, v)| w * v).sum())
                        .collect();
                    let fe: Vec<f64> = slice.coeffs.iter().map(|c| c.eval_on_element(e, &b)).collect();
                    for (q, (_, wq)) in nodes.iter().enumerate() {
                        let gt: f64 = (0..r1).map(|j| wt[q][j] * g[j]).sum();
                        let ft: f64 = (0..r1).map(|j| wt[q][j] * fe[j]).sum();
                        let w = wx * wq;
                        acc[0] += w * (fvals[q] - ft).powi(2);
                        acc[1] += w * (fvals[q] - gt).powi(2);
                        acc[2] += w * (gt - ft).powi(2);
                    }
                }
            }
            acc
        })
        .collect();
    let total = sums.iter().fold([0.0; 3], |a, s| [a[0] + s[0], a[1] + s[1], a[2] + s[2]]);
    ErrorSplit {
        global: total[0].sqrt(),
        time_step: total[1].sqrt(),
        space_step: total[2].sqrt(),
    }
}

/// `|| f - F ||_{L2([0,T) x Omega)}` together with the split through the
/// time projection `G` of `f` on the partition of `F`.
pub fn error_split(f: &Field, approx: &FullyDiscreteFn) -> ErrorSplit {
    let tq = TimeQuadrature::for_field(f);
    error_split_with(f, approx, None, &tq, BuildOptions::default().error_resolution)
}

/// `|| f - F ||_{L2([0,T) x Omega)}`.
pub fn global_error(f: &Field, approx: &FullyDiscreteFn) -> f64 {
    error_split(f, approx).global
}

/// Sampling of the spatial Besov norms used by
/// [`projection_stability_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    /// Step-grid points per octave.
    pub per_octave: usize,
    /// Dyadic depth of the discrete seminorm.
    pub kmax: usize,
    /// Octaves of the step grid below `2^-kmax`.
    pub extra_octaves: usize,
    /// Gauss panels per unit length (per side in 2-D).
    pub panels: usize,
    pub points_per_panel: usize,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            per_octave: 8,
            kmax: 12,
            extra_octaves: 4,
            panels: 16,
            points_per_panel: 6,
        }
    }
}

/// Tensor Gauss nodes on a box, absolute weights.
fn box_nodes(lo: [f64; 2], hi: [f64; 2], dim: usize, opts: &StabilityOptions) -> Vec<(Point, f64)> {
    let rule = IntervalRule::gauss_legendre(opts.points_per_panel);
    let axis = |a: f64, b: f64| -> Vec<(f64, f64)> {
        let n = ((b - a) * opts.panels as f64).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        (0..n)
            .flat_map(|k| {
                let lo = a + k as f64 * h;
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(move |(x, w)| (lo + x * h, w * h))
            })
            .collect()
    };
    let xs = axis(lo[0], hi[0]);
    if dim == 1 {
        return xs.into_iter().map(|(x, w)| (Point::on_line(x), w)).collect();
    }
    let ys = axis(lo[1], hi[1]);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for (x, wx) in &xs {
        for (y, wy) in &ys {
            out.push((Point::new(*x, *y), wx * wy));
        }
    }
    out
}

/// `(||g_c||^2_{Lq} + |g_c|^2_{B^s_{q,q}})^(1/2)` for each component of a
/// vector of functions `g : Omega -> R^m`, with the seminorm taken over
/// directional differences (coordinate axes and diagonals in 2-D).
fn spatial_besov_norms<G: Fn(Point, &mut [f64]) + Sync>(
    g: &G,
    m: usize,
    dim: usize,
    s: f64,
    q: f64,
    opts: &StabilityOptions,
) -> Vec<f64> {
    let r = s.floor() as usize + 1;
    let dirs: Vec<[f64; 2]> = if dim == 1 {
        vec![[1.0, 0.0]]
    } else {
        let d = std::f64::consts::FRAC_1_SQRT_2;
        vec![[1.0, 0.0], [0.0, 1.0], [d, d], [d, -d]]
    };
    let combine = |acc: &[f64]| -> Vec<f64> { acc.iter().map(|v| v.powf(1.0 / q)).collect() };
    // ||g||_{Lq}
    let mut acc = vec![0.0; m];
    let mut buf = vec![0.0; m];
    for (x, w) in box_nodes([0.0, 0.0], [1.0, 1.0], dim, opts) {
        g(x, &mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += w * v.abs().powf(q);
        }
    }
    let lq = combine(&acc);

    // Step grid 2^(-j/per_octave) from 1/r down to 2^-(kmax + extra).
    let per = opts.per_octave;
    let j_min = (per as f64 * (r as f64).log2() - 1e-9).ceil() as usize;
    let j_max = per * (opts.kmax + opts.extra_octaves);
    let hs: Vec<f64> = (j_min..=j_max).map(|j| 2f64.powf(-(j as f64) / per as f64)).collect();
    let norms: Vec<Vec<f64>> = hs
        .par_iter()
        .map(|&h| {
            let mut best = vec![0.0f64; m];
            let mut diff = vec![0.0; m];
            let mut buf = vec![0.0; m];
            for dir in &dirs {
                let step = [h * dir[0], h * dir[1]];
                let reach = [r as f64 * step[0], r as f64 * step[1]];
                let lo = [(-reach[0]).max(0.0), (-reach[1]).max(0.0)];
                let hi = [1.0 - reach[0].max(0.0), 1.0 - reach[1].max(0.0)];
                if hi[0] <= lo[0] || (dim == 2 && hi[1] <= lo[1]) {
                    continue;
                }
                let mut acc = vec![0.0; m];
                for (x, w) in box_nodes(lo, hi, dim, opts) {
                    diff.iter_mut().for_each(|d| *d = 0.0);
                    let mut binom = 1.0;
                    for i in 0..=r {
                        let sign = if (r - i) % 2 == 0 { 1.0 } else { -1.0 };
                        let xi = Point::new(x.x + i as f64 * step[0], x.y + i as f64 * step[1]);
                        g(xi, &mut buf);
                        for (d, v) in diff.iter_mut().zip(&buf) {
                            *d += sign * binom * v;
                        }
                        binom = binom * (r - i) as f64 / (i + 1) as f64;
                    }
                    for (a, d) in acc.iter_mut().zip(&diff) {
                        *a += w * d.abs().powf(q);
                    }
                }
                for (b, a) in best.iter_mut().zip(combine(&acc)) {
                    *b = b.max(a);
                }
            }
            best
        })
        .collect();
    (0..m)
        .map(|c| {
            let mut total = 0.0;
            for k in 0..=opts.kmax {
                let u = 2f64.powi(-(k as i32)).min(1.0 / r as f64);
                let omega = hs
                    .iter()
                    .zip(&norms)
                    .filter(|(h, _)| **h <= u * (1.0 + 1e-12))
                    .map(|(_, n)| n[c])
                    .fold(0.0, f64::max);
                total += (2f64.powf(k as f64 * s) * omega).powf(q);
            }
            let semi = total.powf(1.0 / q);
            (lq[c] * lq[c] + semi * semi).sqrt()
        })
        .collect()
}

/// Ratio `|| G ||_{L2(I, B)} / || f ||_{L2(I, B)}` with `G` the `L2(I, X)`
/// projection of `f` onto polynomials of order `r1` and
/// `B = B^{s2}_{q2,q2}(Omega)`.
pub fn projection_stability_check(
    f: &Field,
    a: f64,
    b: f64,
    r1: usize,
    s2: f64,
    q2: f64,
    opts: &StabilityOptions,
) -> Result<f64> {
    if q2 < 1.0 {
        return Err(Error::InvalidParameter(format!("q2 must be at least 1, got {q2}")));
    }
    if !(s2 > 0.0) {
        return Err(Error::InvalidParameter(format!("s2 must be positive, got {s2}")));
    }
    let basis = orthonormal_time_basis(a, b, r1)?;
    let tq = TimeQuadrature::for_field(f);
    let src = ProjectionCoefficients::new(f, basis, &tq);
    let nodes = tq.nodes(a, b);
    let wt: Vec<Vec<f64>> = nodes.iter().map(|(t, _)| basis.values(*t)).collect();
    let nq = nodes.len();
    let dim = f.domain().dim();

    let f_at = |x: Point, out: &mut [f64]| {
        for (o, (t, _)) in out.iter_mut().zip(&nodes) {
            *o = f.value(*t, x);
        }
    };
    let g_at = |x: Point, out: &mut [f64]| {
        let mut fv = vec![0.0; nq];
        f_at(x, &mut fv);
        let coef: Vec<f64> = (0..r1)
            .map(|j| src.weights(j).iter().zip(&fv).map(|(w, v)| w * v).sum())
            .collect();
        for (o, w) in out.iter_mut().zip(&wt) {
            *o = w.iter().zip(&coef).map(|(a, c)| a * c).sum();
        }
    };
    let nf = spatial_besov_norms(&f_at, nq, dim, s2, q2, opts);
    let ng = spatial_besov_norms(&g_at, nq, dim, s2, q2, opts);
    let l2 = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&nodes)
            .map(|(n, (_, w))| w * n * n)
            .sum::<f64>()
            .sqrt()
    };
    let (num, den) = (l2(&ng), l2(&nf));
    if den == 0.0 {
        return Err(Error::ZeroDenominator(format!(
            "{} has zero L2(I, B) norm on [{a}, {b})",
            f.name()
        )));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_test_field, DomainSpec};

    #[test]
    fn reproducible_fields_give_root_partitions() {
        let d = DomainSpec::unit(1);
        let c = make_test_field("constant", &[3.0], d).unwrap();
        let b = build_fully_discrete(&c, 1e-3, 1, 2, &BuildOptions::default()).unwrap();
        assert_eq!(b.report.total_cardinality, 1);
        assert!(b.report.global_error < 1e-10);

        let p = make_test_field("poly", &[1.0, 1.0], d).unwrap();
        let b = build_fully_discrete(&p, 1e-3, 2, 2, &BuildOptions::default()).unwrap();
        assert_eq!(b.report.n_time, 1);
        assert_eq!(b.report.total_cardinality, 1);
        assert!(b.report.global_error < 1e-8);
        assert!((b.approximant.eval(0.5, Point::on_line(0.25)) - 0.125).abs() < 1e-8);
    }

    #[test]
    fn zero_approximant_error_is_the_norm() {
        let d = DomainSpec::unit(1);
        let one = make_test_field("constant", &[1.0], d).unwrap();
        let z = FullyDiscreteFn::zero(&one, 1, 2).unwrap();
        assert!((global_error(&one, &z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn element_nodes_integrate_the_measure() {
        let m = SpaceMesh::unit_square().refine_uniform();
        let rule = SimplexRule::default_for(2);
        for &e in m.leaves() {
            let w: f64 = element_nodes(&m, e, &rule, 0.1).iter().map(|n| n.1).sum();
            assert!((w - m.element_measure(e)).abs() < 1e-14);
        }
    }

    #[test]
    fn stability_ratio_is_one_for_time_independent_fields() {
        let d = DomainSpec::unit(1);
        let f = make_test_field("space-power", &[1.5, 0.5], d).unwrap();
        let ratio = projection_stability_check(&f, 0.0, 1.0, 1, 0.5, 2.0, &StabilityOptions::default()).unwrap();
        assert!((ratio - 1.0).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn smooth_tensor_field_reaches_small_errors() {
        let d = DomainSpec::unit(1);
        let f = make_test_field("tensor-singular", &[1.0], d).unwrap();
        let b = build_fully_discrete(&f, 1e-6, 2, 3, &BuildOptions::default()).unwrap();
        assert_eq!(b.report.n_time, 1);
        assert!(b.report.global_error <= 1e-6, "{}", b.report.global_error);
        assert!(b.report.error_time_step < 1e-12);
        let ratio = projection_stability_check(&f, 0.0, 1.0, 2, 1.5, 2.0, &StabilityOptions::default()).unwrap();
        assert!((ratio - 1.0).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn report_serializes_with_the_documented_keys() {
        let d = DomainSpec::unit(1);
        let f = make_test_field("tensor-singular", &[0.25], d).unwrap();
        let b = build_fully_discrete(&f, 0.1, 1, 2, &BuildOptions::default()).unwrap();
        let v = serde_json::to_value(&b.report).unwrap();
        for key in ["eps", "N_time", "per_slice", "total_cardinality", "error_time_step", "error_space_step", "global_error"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(b.report.total_cardinality, b.partition().cardinality());
        let r = &b.report;
        assert!(r.global_error <= r.error_time_step + r.error_space_step + 1e-10);
        assert!(r.global_error <= 0.1);
    }

    #[test]
    fn rejects_bad_orders() {
        let d = DomainSpec::unit(1);
        let f = make_test_field("constant", &[1.0], d).unwrap();
        assert!(build_fully_discrete(&f, 0.1, 1, 1, &BuildOptions::default()).is_err());
        assert!(build_fully_discrete(&f, 0.0, 1, 2, &BuildOptions::default()).is_err());
    }
}
