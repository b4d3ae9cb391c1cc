//! Functions of time with values in `X = L2(Omega)`.
//!
//! An `X`-value is a vector of samples on a [`SpatialGrid`]. Everything that
//! acts on `f : I -> X` (moduli, medians, projections) is written against the
//! [`XCurve`] trait, so differences and residuals compose without copying.

use crate::field::Field;
use crate::quadrature::{SpatialGrid, TimeQuadrature};

/// A map `t -> X`, sampled on a fixed spatial grid.
pub trait XCurve: Sync {
    /// Number of spatial samples per value.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the value at `t` into `out` (of length [`XCurve::len`]).
    fn eval_into(&self, t: f64, out: &mut [f64]);

    fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(t, &mut out);
        out
    }
}

/// `t -> f(t, .)` restricted to a grid.
#[derive(Clone, Copy)]
pub struct FieldSlice<'a> {
    pub field: &'a Field,
    pub grid: &'a SpatialGrid,
}

impl<'a> FieldSlice<'a> {
    pub fn new(field: &'a Field, grid: &'a SpatialGrid) -> Self {
        FieldSlice { field, grid }
    }
}

impl XCurve for FieldSlice<'_> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.grid.points) {
            *o = self.field.value(t, *p);
        }
    }
}

/// A real-valued curve, viewed with `X = R`.
pub struct ScalarCurve<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> XCurve for ScalarCurve<F> {
    fn len(&self) -> usize {
        1
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        out[0] = (self.0)(t);
    }
}

/// `Delta_h^k c(t) = sum_i binom(k,i) (-1)^(k-i) c(t + i h)`.
pub struct Difference<'a, C: ?Sized> {
    pub inner: &'a C,
    pub h: f64,
    pub order: usize,
}

impl<C: XCurve + ?Sized> XCurve for Difference<'_, C> {
    fn len(&self) -> usize {
        self.inner.len()
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut buf = vec![0.0; self.len()];
        let k = self.order;
        let mut binom = 1.0;
        for i in 0..=k {
            let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
            self.inner.eval_into(t + i as f64 * self.h, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += sign * binom * b;
            }
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
    }
}

/// `Lp(a, b; X)` norm of a curve; `p = inf` takes the maximum over nodes.
pub fn lp_norm<C: XCurve + ?Sized>(
    c: &C,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
    a: f64,
    b: f64,
    p: f64,
) -> f64 {
    let mut buf = vec![0.0; c.len()];
    let norms = tq.nodes(a, b).into_iter().map(|(t, w)| {
        c.eval_into(t, &mut buf);
        (grid.norm(&buf), w)
    });
    combine_lp(norms, p)
}

/// Combines `(||c(t_q)||_X, w_q)` pairs into an `Lp` norm.
pub fn combine_lp<I: IntoIterator<Item = (f64, f64)>>(norms: I, p: f64) -> f64 {
    if p.is_infinite() {
        norms.into_iter().map(|(n, _)| n).fold(0.0, f64::max)
    } else {
        norms
            .into_iter()
            .map(|(n, w)| w * n.powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}
