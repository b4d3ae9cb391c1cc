//! Vector-valued polynomials in time on a single interval.
//!
//! A [`SlicePoly`] is `P(t, x) = sum_j W_j(t) G_j(x)` where `W_j` is the
//! orthonormal shifted Legendre basis of the interval and each coefficient
//! `G_j` is an element of `X` stored on the spatial grid. For `p = 2` the
//! best approximation is the orthogonal projection ([`project_time_slice`]);
//! for other `p` the constructive approximant of [`jackson_construct`] is
//! used.

use std::sync::Arc;

use crate::curve::{combine_lp, Difference, FieldSlice, XCurve};
use crate::error::{Error, Result};
use crate::field::{Field, Point};
use crate::quadrature::{IntervalRule, SpatialGrid, TimeQuadrature};

/// Default number of candidate points for [`median_constant`].
pub const MEDIAN_SAMPLES: usize = 129;

/// Orthonormal basis of polynomials of degree `< r` on `[a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBasis {
    pub a: f64,
    pub b: f64,
    pub r: usize,
}

/// Builds the shifted Legendre basis `W_j(t) = sqrt((2j+1)/|I|) P_j(2(t-a)/|I| - 1)`.
pub fn orthonormal_time_basis(a: f64, b: f64, r: usize) -> Result<TimeBasis> {
    if !(b > a) || !(b - a).is_finite() {
        return Err(Error::EmptyInterval(a, b));
    }
    if r == 0 {
        return Err(Error::InvalidParameter("order r must be at least 1".into()));
    }
    Ok(TimeBasis { a, b, r })
}

impl TimeBasis {
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    /// All `r` basis values at `t`.
    pub fn values(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.r];
        self.values_into(t, &mut out);
        out
    }

    pub fn values_into(&self, t: f64, out: &mut [f64]) {
        let l = self.len();
        let s = 2.0 * (t - self.a) / l - 1.0;
        let mut p0 = 1.0;
        let mut p1 = s;
        for (j, o) in out.iter_mut().enumerate().take(self.r) {
            let pj = match j {
                0 => 1.0,
                1 => s,
                _ => {
                    let p2 = ((2 * j - 1) as f64 * s * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            *o = ((2 * j + 1) as f64 / l).sqrt() * pj;
        }
    }

    /// `W_j(t)` for a single index (0-based).
    pub fn value(&self, j: usize, t: f64) -> f64 {
        self.values(t)[j]
    }

    /// Equispaced Lagrange nodes; the left endpoint when `r = 1`.
    pub fn lagrange_nodes(&self) -> Vec<f64> {
        if self.r == 1 {
            return vec![self.a];
        }
        (0..self.r)
            .map(|j| self.a + j as f64 * self.len() / (self.r - 1) as f64)
            .collect()
    }

    /// Gauss rule exact for products of two basis functions.
    fn exact_rule(&self) -> Vec<(f64, f64)> {
        let rule = IntervalRule::gauss_legendre(self.r.max(1));
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| (self.a + x * self.len(), w * self.len()))
            .collect()
    }
}

/// Evaluates the time-projection coefficients `G_j(x) = int_I f(t,x) W_j(t) dt`
/// at arbitrary points, using the same time nodes as the grid values.
#[derive(Debug, Clone)]
pub struct ProjectionCoefficients {
    field: Field,
    basis: TimeBasis,
    times: Vec<f64>,
    /// `w_q W_j(t_q)`, indexed `[j][q]`.
    weights: Vec<Vec<f64>>,
}

impl ProjectionCoefficients {
    pub fn new(field: &Field, basis: TimeBasis, tq: &TimeQuadrature) -> Self {
        let nodes = tq.nodes(basis.a, basis.b);
        let mut weights = vec![Vec::with_capacity(nodes.len()); basis.r];
        let mut wv = vec![0.0; basis.r];
        for (t, w) in &nodes {
            basis.values_into(*t, &mut wv);
            for (j, col) in weights.iter_mut().enumerate() {
                col.push(w * wv[j]);
            }
        }
        ProjectionCoefficients {
            field: field.clone(),
            basis,
            times: nodes.iter().map(|n| n.0).collect(),
            weights,
        }
    }

    pub fn basis(&self) -> &TimeBasis {
        &self.basis
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Time nodes and raw quadrature weights.
    pub fn time_nodes(&self) -> &[f64] {
        &self.times
    }

    /// `w_q W_j(t_q)` for coefficient `j`.
    pub fn weights(&self, j: usize) -> &[f64] {
        &self.weights[j]
    }

    /// All coefficients `G_j(x)`.
    pub fn at(&self, x: Point) -> Vec<f64> {
        let vals: Vec<f64> = self.times.iter().map(|t| self.field.value(*t, x)).collect();
        self.weights
            .iter()
            .map(|w| w.iter().zip(&vals).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn coefficient(&self, j: usize, x: Point) -> f64 {
        self.weights[j]
            .iter()
            .zip(&self.times)
            .map(|(w, t)| w * self.field.value(*t, x))
            .sum()
    }
}

/// `P(t) = sum_j W_j(t) G_j` on one interval.
#[derive(Debug, Clone)]
pub struct SlicePoly {
    pub basis: TimeBasis,
    /// `G_j` sampled on the spatial grid.
    pub coeffs: Vec<Vec<f64>>,
    /// Pointwise access to the coefficients when they come from a projection.
    pub source: Option<Arc<ProjectionCoefficients>>,
}

impl SlicePoly {
    pub fn zero(basis: TimeBasis, n: usize) -> Self {
        SlicePoly {
            basis,
            coeffs: vec![vec![0.0; n]; basis.r],
            source: None,
        }
    }

    pub fn r(&self) -> usize {
        self.basis.r
    }

    /// Grid values of `P(t)`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let w = self.basis.values(t);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (wj, g) in w.iter().zip(&self.coeffs) {
            for (o, v) in out.iter_mut().zip(g) {
                *o += wj * v;
            }
        }
    }

    /// Values at the equispaced Lagrange nodes.
    pub fn to_lagrange(&self) -> Vec<Vec<f64>> {
        self.basis
            .lagrange_nodes()
            .into_iter()
            .map(|t| self.eval(t))
            .collect()
    }

    /// Builds the polynomial with the given values at the Lagrange nodes.
    pub fn from_lagrange(basis: TimeBasis, values: &[Vec<f64>]) -> Result<Self> {
        if values.len() != basis.r {
            return Err(Error::InvalidParameter(format!(
                "expected {} nodal values, got {}",
                basis.r,
                values.len()
            )));
        }
        let nodes = basis.lagrange_nodes();
        let n = values[0].len();
        let mut coeffs = vec![vec![0.0; n]; basis.r];
        for (t, w) in basis.exact_rule() {
            let wv = basis.values(t);
            let ell = lagrange_basis(&nodes, t);
            for (j, cj) in coeffs.iter_mut().enumerate() {
                for (li, vals) in ell.iter().zip(values) {
                    let f = w * wv[j] * li;
                    for (c, v) in cj.iter_mut().zip(vals) {
                        *c += f * v;
                    }
                }
            }
        }
        Ok(SlicePoly {
            basis,
            coeffs,
            source: None,
        })
    }

    /// `|| P ||_{L2(I, X)}` by orthonormality.
    pub fn l2_norm(&self, grid: &SpatialGrid) -> f64 {
        self.coeffs.iter().map(|g| grid.norm_sq(g)).sum::<f64>().sqrt()
    }
}

impl XCurve for SlicePoly {
    fn len(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        SlicePoly::eval_into(self, t, out)
    }
}

fn lagrange_basis(nodes: &[f64], t: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, ti)| (t - ti) / (nodes[j] - ti))
                .product()
        })
        .collect()
}

/// `L2(I, X)`-orthogonal projection of `f` onto polynomials of order `r`,
/// together with `|| f ||^2_{L2(I,X)}`.
fn project_with_norm(
    f: &Field,
    a: f64,
    b: f64,
    r: usize,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<(SlicePoly, f64)> {
    let basis = orthonormal_time_basis(a, b, r)?;
    let source = ProjectionCoefficients::new(f, basis, tq);
    let n = grid.len();
    let mut coeffs = vec![vec![0.0; n]; r];
    let mut norm_sq = 0.0;
    let mut row = vec![0.0; n];
    for (q, t) in source.times.iter().enumerate() {
        for (o, p) in row.iter_mut().zip(&grid.points) {
            *o = f.value(*t, *p);
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "{} at t = {t} while projecting on [{a}, {b})",
                f.name()
            )));
        }
        let raw_w: f64 = source.weights[0][q] / basis.values(*t)[0];
        norm_sq += raw_w * grid.norm_sq(&row);
        for (j, cj) in coeffs.iter_mut().enumerate() {
            let wj = source.weights[j][q];
            for (c, v) in cj.iter_mut().zip(&row) {
                *c += wj * v;
            }
        }
    }
    Ok((
        SlicePoly {
            basis,
            coeffs,
            source: Some(Arc::new(source)),
        },
        norm_sq,
    ))
}

/// Orthogonal projection of `f` restricted to `[a, b)` onto `V^r_{I,X}`.
pub fn project_time_slice(
    f: &Field,
    a: f64,
    b: f64,
    r: usize,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<SlicePoly> {
    project_with_norm(f, a, b, r, grid, tq).map(|(p, _)| p)
}

/// Best `L2(I, X)` approximation error by polynomials of order `r`,
/// `sqrt(|| f ||^2 - sum_j || G_j ||^2)`.
pub fn best_error(
    f: &Field,
    a: f64,
    b: f64,
    r: usize,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<f64> {
    best_error_with_projection(f, a, b, r, grid, tq).map(|(e, _)| e)
}

/// [`best_error`] together with the projection that attains it.
pub fn best_error_with_projection(
    f: &Field,
    a: f64,
    b: f64,
    r: usize,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<(f64, SlicePoly)> {
    let (proj, norm_sq) = project_with_norm(f, a, b, r, grid, tq)?;
    let captured: f64 = proj.coeffs.iter().map(|g| grid.norm_sq(g)).sum();
    let radicand = norm_sq - captured;
    if radicand < -1e-10 {
        return Err(Error::QuadratureInconsistency(format!(
            "negative squared error {radicand:e} on [{a}, {b})"
        )));
    }
    Ok((radicand.max(0.0).sqrt(), proj))
}

/// Result of [`median_constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct MedianChoice {
    /// Selected sample point.
    pub z: f64,
    /// `c(z)`.
    pub value: Vec<f64>,
    /// `int_I || c(t) - c(z) ||^p dt` (or the sup for `p = inf`).
    pub spread: f64,
}

/// Picks `a_0 = c(z)` with `z` minimizing `int_I || c(t) - c(y) ||_X^p dt`
/// over `samples` cell midpoints of `[a, b]`. Ties go to the smallest `z`.
pub fn median_constant<C: XCurve + ?Sized>(
    c: &C,
    a: f64,
    b: f64,
    p: f64,
    samples: usize,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<MedianChoice> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    if samples < 8 {
        return Err(Error::InvalidParameter(format!(
            "median needs at least 8 samples, got {samples}"
        )));
    }
    if !(b > a) {
        return Err(Error::EmptyInterval(a, b));
    }
    let nodes = tq.nodes(a, b);
    let values: Vec<Vec<f64>> = nodes.iter().map(|(t, _)| c.eval(*t)).collect();
    let h = (b - a) / samples as f64;
    let mut best: Option<MedianChoice> = None;
    for k in 0..samples {
        let z = a + (k as f64 + 0.5) * h;
        let cz = c.eval(z);
        if cz.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let spread = combine_lp(
            values.iter().zip(&nodes).map(|(v, (_, w))| (grid.dist(v, &cz), *w)),
            p,
        );
        let spread = if p.is_finite() { spread.powf(p) } else { spread };
        if !spread.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|b| spread < b.spread) {
            best = Some(MedianChoice {
                z,
                value: cz,
                spread,
            });
        }
    }
    best.ok_or_else(|| Error::NonFinite("all median candidates are non-finite".into()))
}

/// Curve on the reference interval: `tau -> c(a + tau d) - sum_k a_k tau^k`.
struct Residual<'a, C: ?Sized> {
    base: &'a C,
    a: f64,
    d: f64,
    /// `(power, coefficient)` pairs already peeled off.
    peeled: Vec<(usize, Vec<f64>)>,
}

impl<C: XCurve + ?Sized> XCurve for Residual<'_, C> {
    fn len(&self) -> usize {
        self.base.len()
    }

    fn eval_into(&self, tau: f64, out: &mut [f64]) {
        self.base.eval_into(self.a + tau * self.d, out);
        for (k, coef) in &self.peeled {
            let tk = tau.powi(*k as i32);
            for (o, c) in out.iter_mut().zip(coef) {
                *o -= tk * c;
            }
        }
    }
}

/// Constructive Jackson approximant of order `r` on `[a, b)`.
///
/// On the reference interval with `h = 1/(2r)` the monomial coefficients are
/// peeled from the top:
/// `a_k = M(Delta_h^k f_{r-1-k}, [0, 1 - k h]) / (h^k k!)`,
/// `f_{next} = f_{prev} - a_k tau^k`, and finally `a_0 = M(f_{r-1}, [0, 1])`,
/// where `M` is [`median_constant`].
#[allow(clippy::too_many_arguments)]
pub fn jackson_construct<C: XCurve + ?Sized>(
    c: &C,
    a: f64,
    b: f64,
    r: usize,
    p: f64,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
    samples: usize,
) -> Result<SlicePoly> {
    let basis = orthonormal_time_basis(a, b, r)?;
    let d = b - a;
    let h = 1.0 / (2 * r) as f64;
    // On the reference interval the singular origin is tau = 0 only if a = 0.
    let ref_tq = if a == 0.0 {
        tq.clone()
    } else {
        TimeQuadrature {
            grading: None,
            ..tq.clone()
        }
    };
    let mut residual = Residual {
        base: c,
        a,
        d,
        peeled: Vec::new(),
    };
    let mut factorial: f64 = (1..r).map(|i| i as f64).product();
    for k in (1..r).rev() {
        let diff = Difference {
            inner: &residual,
            h,
            order: k,
        };
        let m = median_constant(&diff, 0.0, 1.0 - k as f64 * h, p, samples, grid, &ref_tq)?;
        let scale = 1.0 / (h.powi(k as i32) * factorial);
        let coef: Vec<f64> = m.value.iter().map(|v| v * scale).collect();
        residual.peeled.push((k, coef));
        factorial /= k as f64;
    }
    let m0 = median_constant(&residual, 0.0, 1.0, p, samples, grid, &ref_tq)?;
    residual.peeled.push((0, m0.value));

    // Monomials in tau -> orthonormal coefficients on [a, b).
    let n = c.len();
    let mut coeffs = vec![vec![0.0; n]; r];
    for (t, w) in basis.exact_rule() {
        let tau = (t - a) / d;
        let wv = basis.values(t);
        for (k, coef) in &residual.peeled {
            let tk = tau.powi(*k as i32);
            for (j, cj) in coeffs.iter_mut().enumerate() {
                let f = w * wv[j] * tk;
                for (o, v) in cj.iter_mut().zip(coef) {
                    *o += f * v;
                }
            }
        }
    }
    Ok(SlicePoly {
        basis,
        coeffs,
        source: None,
    })
}

/// `|| c - P ||_{Lp(I, X)}`.
pub fn lp_distance<C: XCurve + ?Sized>(
    c: &C,
    poly: &SlicePoly,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
    p: f64,
) -> f64 {
    let n = c.len();
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let nodes = tq.nodes(poly.basis.a, poly.basis.b);
    combine_lp(
        nodes.into_iter().map(|(t, w)| {
            c.eval_into(t, &mut u);
            poly.eval_into(t, &mut v);
            (grid.dist(&u, &v), w)
        }),
        p,
    )
}

/// Error of the Jackson approximant of a field slice, `|| f - P ||_{Lp(I,X)}`.
pub fn jackson_error(
    f: &Field,
    a: f64,
    b: f64,
    r: usize,
    p: f64,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<(f64, SlicePoly)> {
    let slice = FieldSlice::new(f, grid);
    let poly = jackson_construct(&slice, a, b, r, p, grid, tq, MEDIAN_SAMPLES)?;
    Ok((lp_distance(&slice, &poly, grid, tq, p), poly))
}

/// `max_j || P(t_j) ||_X` over the equispaced Lagrange nodes.
pub fn node_norm(poly: &SlicePoly, grid: &SpatialGrid) -> f64 {
    poly.to_lagrange()
        .iter()
        .map(|v| grid.norm(v))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::ScalarCurve;
    use crate::field::{make_test_field, DomainSpec};
    use crate::quadrature::GridConfig;

    fn grid1() -> SpatialGrid {
        SpatialGrid::uniform(&DomainSpec::unit(1), GridConfig::default())
    }

    #[test]
    fn basis_examples() {
        let b = orthonormal_time_basis(0.0, 1.0, 1).unwrap();
        assert!((b.value(0, 0.3) - 1.0).abs() < 1e-15);
        let b = orthonormal_time_basis(0.0, 1.0, 2).unwrap();
        for t in [0.0, 0.25, 0.9] {
            assert!((b.value(1, t) - 12f64.sqrt() * (t - 0.5)).abs() < 1e-14);
        }
        let b = orthonormal_time_basis(0.0, 2.0, 1).unwrap();
        assert!((b.value(0, 1.7) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(orthonormal_time_basis(1.0, 1.0, 2).is_err());
        assert!(orthonormal_time_basis(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn gram_matrix_is_identity() {
        for (a, b) in [(0.0, 1.0), (0.3, 0.3 + 2f64.powi(-9)), (2.0, 7.0)] {
            let basis = orthonormal_time_basis(a, b, 6).unwrap();
            let rule = IntervalRule::gauss_legendre(8);
            for i in 0..6 {
                for j in 0..6 {
                    let g: f64 = rule
                        .nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(x, w)| {
                            let t = a + x * (b - a);
                            w * (b - a) * basis.value(i, t) * basis.value(j, t)
                        })
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-10, "({a},{b}) {i} {j}: {g}");
                }
            }
        }
    }

    #[test]
    fn projection_examples() {
        let d = DomainSpec::unit(1);
        let grid = grid1();
        let tq = TimeQuadrature::default();
        let c = make_test_field("constant", &[2.5], d).unwrap();
        let p = project_time_slice(&c, 0.0, 1.0, 1, &grid, &tq).unwrap();
        assert!(p.coeffs[0].iter().all(|v| (v - 2.5).abs() < 1e-13));

        let lin = make_test_field("time-power", &[1.0], d).unwrap();
        let p = project_time_slice(&lin, 0.0, 1.0, 2, &grid, &tq).unwrap();
        for t in [0.1, 0.5, 0.77] {
            assert!(p.eval(t).iter().all(|v| (v - t).abs() < 1e-10));
        }
        let p = project_time_slice(&lin, 0.0, 1.0, 1, &grid, &tq).unwrap();
        assert!(p.coeffs[0].iter().all(|v| (v - 0.5).abs() < 1e-13));
    }

    #[test]
    fn best_error_examples() {
        let d = DomainSpec::unit(1);
        let grid = grid1();
        let tq = TimeQuadrature::default();
        let lin = make_test_field("time-power", &[1.0], d).unwrap();
        let e = best_error(&lin, 0.0, 1.0, 1, &grid, &tq).unwrap();
        assert!((e - 1.0 / 12f64.sqrt()).abs() < 1e-8);
        let e = best_error(&lin, 0.0, 0.5, 1, &grid, &tq).unwrap();
        assert!((e - 0.5f64.powf(1.5) / 12f64.sqrt()).abs() < 1e-8);
        assert!(best_error(&lin, 0.0, 1.0, 2, &grid, &tq).unwrap() < 1e-8);
        let poly = make_test_field("poly", &[3.0, 2.0], d).unwrap();
        assert!(best_error(&poly, 0.2, 0.9, 4, &grid, &tq).unwrap() < 1e-8);
    }

    #[test]
    fn best_error_is_monotone_in_order() {
        let d = DomainSpec::unit(1);
        let grid = grid1();
        let f = make_test_field("tensor-singular", &[0.25], d).unwrap();
        let tq = TimeQuadrature::for_field(&f);
        let mut prev = f64::INFINITY;
        for r in 1..=5 {
            let e = best_error(&f, 0.0, 1.0, r, &grid, &tq).unwrap();
            assert!(e <= prev + 1e-10);
            prev = e;
        }
    }

    #[test]
    fn non_finite_is_reported() {
        let d = DomainSpec::unit(1);
        let f = Field::from_fn(d, "bad", |t, _| if t > 0.5 { f64::NAN } else { t });
        let err = best_error(&f, 0.0, 1.0, 1, &grid1(), &TimeQuadrature::default());
        assert!(matches!(err, Err(Error::NonFinite(_))));
    }

    #[test]
    fn median_examples() {
        let scalar = SpatialGrid::scalar();
        let tq = TimeQuadrature::default().with_panels(8);
        let m = median_constant(&ScalarCurve(|_| 4.0), 0.0, 1.0, 2.0, 129, &scalar, &tq).unwrap();
        assert_eq!(m.value, vec![4.0]);

        let m = median_constant(&ScalarCurve(|t| t), 0.0, 1.0, 2.0, 129, &scalar, &tq).unwrap();
        assert!((0.25..=0.75).contains(&m.value[0]));
        // ||f - a0||^2 <= (1/d) int int |f(t)-f(y)|^2 = 1/6
        assert!(m.spread <= 1.0 / 6.0 + 1e-12);

        let sign = ScalarCurve(|t: f64| if t < 0.5 { -1.0 } else { 1.0 });
        let m = median_constant(&sign, 0.0, 1.0, 1.0, 128, &scalar, &tq).unwrap();
        assert!(m.value[0] == -1.0 || m.value[0] == 1.0);

        assert!(median_constant(&ScalarCurve(|t| t), 0.0, 1.0, 2.0, 4, &scalar, &tq).is_err());
        let nan = ScalarCurve(|_| f64::NAN);
        assert!(matches!(
            median_constant(&nan, 0.0, 1.0, 2.0, 16, &scalar, &tq),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn jackson_reproduces_polynomials() {
        let scalar = SpatialGrid::scalar();
        let tq = TimeQuadrature::default().with_panels(4);
        let sq = ScalarCurve(|t: f64| t * t);
        let p = jackson_construct(&sq, 0.0, 1.0, 3, 2.0, &scalar, &tq, 129).unwrap();
        assert!(lp_distance(&sq, &p, &scalar, &tq, 2.0) < 1e-8);

        // also on a shifted interval
        let p = jackson_construct(&sq, 0.5, 2.0, 3, 1.0, &scalar, &tq, 129).unwrap();
        assert!(lp_distance(&sq, &p, &scalar, &tq, 1.0) < 1e-8);

        for r in 1..=4 {
            let c = ScalarCurve(|_| -1.25);
            let p = jackson_construct(&c, 0.0, 1.0, r, 2.0, &scalar, &tq, 129).unwrap();
            assert!(lp_distance(&c, &p, &scalar, &tq, 2.0) < 1e-12);
        }
    }

    #[test]
    fn node_norm_examples() {
        let scalar = SpatialGrid::scalar();
        let basis = orthonormal_time_basis(0.0, 1.0, 2).unwrap();
        let p = SlicePoly::from_lagrange(basis, &[vec![0.0], vec![1.0]]).unwrap();
        assert!((node_norm(&p, &scalar) - 1.0).abs() < 1e-14);
        assert!((p.eval(0.3)[0] - 0.3).abs() < 1e-14);

        let grid = grid1();
        let basis = orthonormal_time_basis(0.0, 1.0, 1).unwrap();
        let p = SlicePoly::from_lagrange(basis, &[vec![-3.0; grid.len()]]).unwrap();
        assert!((node_norm(&p, &grid) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lagrange_roundtrip() {
        let basis = orthonormal_time_basis(0.25, 0.75, 4).unwrap();
        let vals = vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.0, 3.0], vec![2.0, -2.0]];
        let p = SlicePoly::from_lagrange(basis, &vals).unwrap();
        for (a, b) in p.to_lagrange().iter().zip(&vals) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
