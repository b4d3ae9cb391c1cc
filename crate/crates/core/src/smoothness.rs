//! Moduli of smoothness of `X`-valued curves and discrete Besov seminorms.
//!
//! For a curve `f : I -> X` the difference norms
//! `N(h) = || Delta_h^r f ||_{Lp(I_rh, X)}` are computed by time quadrature
//! and cached per step size. `omega_r` takes the maximum of `N` over a
//! geometric step grid anchored at `|I|` (so that `|I| 2^-k` are grid points);
//! `w_r` averages `N^p` over `(0, u)` with Gauss nodes on dyadic panels.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::curve::{combine_lp, FieldSlice, XCurve};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::polyspace::{best_error, jackson_error};
use crate::quadrature::{IntervalRule, SpatialGrid, TimeQuadrature};

/// Difference order, integrability exponent and the step-size sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessParams {
    pub r: usize,
    pub p: f64,
    /// Grid points per octave for the sup in `omega_r`.
    pub per_octave: usize,
    /// The step grid covers `[|I| 2^-octaves, |I| / r]`.
    pub octaves: usize,
    /// Dyadic panels below `u` used for the average in `w_r`.
    pub avg_octaves: usize,
    /// Gauss nodes per averaging panel.
    pub avg_nodes: usize,
}

impl SmoothnessParams {
    pub fn new(r: usize, p: f64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("difference order must be >= 1".into()));
        }
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!("p must be in (0, inf], got {p}")));
        }
        Ok(SmoothnessParams {
            r,
            p,
            per_octave: 20,
            octaves: 26,
            avg_octaves: 30,
            avg_nodes: 6,
        })
    }
}

/// Smoothness order, fine index and truncation depth of a Besov seminorm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub q: f64,
    pub r: usize,
    pub kmax: usize,
}

impl BesovParams {
    /// `r = floor(s) + 1`, `kmax = 14`.
    pub fn new(s: f64, q: f64) -> Result<Self> {
        Self::with_order(s, q, s.floor() as usize + 1)
    }

    pub fn with_order(s: f64, q: f64, r: usize) -> Result<Self> {
        if !(s > 0.0) || !(q > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Besov parameters need s > 0 and q > 0, got s = {s}, q = {q}"
            )));
        }
        if s >= r as f64 {
            return Err(Error::InvalidParameter(format!("need s < r, got s = {s}, r = {r}")));
        }
        Ok(BesovParams { s, q, r, kmax: 14 })
    }

    pub fn with_kmax(mut self, kmax: usize) -> Result<Self> {
        if kmax < 4 {
            return Err(Error::InvalidParameter(format!("kmax must be >= 4, got {kmax}")));
        }
        self.kmax = kmax;
        Ok(self)
    }
}

/// A discrete Besov seminorm with its dyadic terms.
#[derive(Debug, Clone, PartialEq)]
pub struct BesovEstimate {
    pub value: f64,
    /// `2^(ks) omega_r(f, I, 2^-k)` for `k = 0..=kmax`.
    pub terms: Vec<f64>,
    /// Contribution of `k = kmax` to the `q`-th power of the sum, relative
    /// to the total (`0` when the sum vanishes).
    pub last_term: f64,
}

/// `Delta_h^r c(t)`; requires `[t, t + r h] ⊂ [a, b]`.
pub fn difference<C: XCurve + ?Sized>(
    c: &C,
    a: f64,
    b: f64,
    t: f64,
    h: f64,
    r: usize,
) -> Result<Vec<f64>> {
    let end = t + r as f64 * h;
    let slack = 1e-12 * (b - a).abs().max(1.0);
    if t < a - slack || end > b + slack || !(h >= 0.0) {
        return Err(Error::OutOfDomain(format!(
            "difference at t = {t} with step {h} and order {r} leaves [{a}, {b}]"
        )));
    }
    let mut out = vec![0.0; c.len()];
    let mut buf = vec![0.0; c.len()];
    accumulate_difference(c, t, h, r, &mut out, &mut buf);
    Ok(out)
}

fn accumulate_difference<C: XCurve + ?Sized>(
    c: &C,
    t: f64,
    h: f64,
    r: usize,
    out: &mut [f64],
    buf: &mut [f64],
) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let mut binom = 1.0;
    for i in 0..=r {
        let sign = if (r - i) % 2 == 0 { 1.0 } else { -1.0 };
        c.eval_into(t + i as f64 * h, buf);
        for (o, v) in out.iter_mut().zip(buf.iter()) {
            *o += sign * binom * v;
        }
        binom = binom * (r - i) as f64 / (i + 1) as f64;
    }
}

/// Caches `N(h)` for one curve, interval, order and exponent.
pub struct ModulusEvaluator<'a, C: ?Sized> {
    curve: &'a C,
    a: f64,
    b: f64,
    grid: &'a SpatialGrid,
    tq: TimeQuadrature,
    params: SmoothnessParams,
    cache: Mutex<HashMap<u64, f64>>,
}

impl<'a, C: XCurve + ?Sized> ModulusEvaluator<'a, C> {
    pub fn new(
        curve: &'a C,
        a: f64,
        b: f64,
        params: SmoothnessParams,
        grid: &'a SpatialGrid,
        tq: &TimeQuadrature,
    ) -> Result<Self> {
        if !(b > a) {
            return Err(Error::EmptyInterval(a, b));
        }
        Ok(ModulusEvaluator {
            curve,
            a,
            b,
            grid,
            tq: tq.clone(),
            params,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn params(&self) -> &SmoothnessParams {
        &self.params
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    /// Largest admissible step `|I| / r`.
    pub fn max_step(&self) -> f64 {
        self.len() / self.params.r as f64
    }

    /// The step grid `|I| 2^(-j / per_octave)`, increasing, capped at `|I| / r`.
    pub fn h_grid(&self) -> Vec<f64> {
        let per = self.params.per_octave as f64;
        let j_min = (per * (self.params.r as f64).log2() - 1e-9).ceil().max(0.0) as usize;
        let j_max = self.params.per_octave * self.params.octaves;
        (j_min..=j_max)
            .rev()
            .map(|j| self.grid_step(j))
            .collect()
    }

    fn grid_step(&self, j: usize) -> f64 {
        let per = self.params.per_octave;
        let (oct, rem) = (j / per, j % per);
        self.len() * 2f64.powi(-(oct as i32)) * 2f64.powf(-(rem as f64) / per as f64)
    }

    /// `|| Delta_h^r f ||_{Lp(I_rh, X)}`; zero when `I_rh` is empty.
    pub fn difference_norm(&self, h: f64) -> f64 {
        if let Some(v) = self.cache.lock().unwrap().get(&h.to_bits()) {
            return *v;
        }
        let v = self.compute(h);
        self.cache.lock().unwrap().insert(h.to_bits(), v);
        v
    }

    fn compute(&self, h: f64) -> f64 {
        let r = self.params.r;
        let end = self.b - r as f64 * h;
        if !(end > self.a) {
            return 0.0;
        }
        let n = self.curve.len();
        let mut out = vec![0.0; n];
        let mut buf = vec![0.0; n];
        let norms: Vec<(f64, f64)> = self
            .tq
            .nodes(self.a, end)
            .into_iter()
            .map(|(t, w)| {
                accumulate_difference(self.curve, t, h, r, &mut out, &mut buf);
                (self.grid.norm(&out), w)
            })
            .collect();
        combine_lp(norms, self.params.p)
    }

    fn prefetch(&self, hs: &[f64]) {
        let missing: Vec<f64> = {
            let cache = self.cache.lock().unwrap();
            hs.iter()
                .copied()
                .filter(|h| !cache.contains_key(&h.to_bits()))
                .collect()
        };
        let values: Vec<(u64, f64)> = missing
            .par_iter()
            .map(|h| (h.to_bits(), self.compute(*h)))
            .collect();
        self.cache.lock().unwrap().extend(values);
    }

    /// `omega_r(f, I, u)_p`: maximum of `N(h)` over grid steps `h <= u`.
    /// Steps beyond `|I| / r` do not exist, so `u` is clamped there.
    pub fn sup(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::InvalidParameter(format!("u must be positive, got {u}")));
        }
        let u = u.min(self.max_step());
        let limit = u * (1.0 + 1e-12);
        let hs: Vec<f64> = self.h_grid().into_iter().filter(|h| *h <= limit).collect();
        if hs.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no step-grid point below u = {u}; increase the grid depth"
            )));
        }
        self.prefetch(&hs);
        Ok(hs
            .iter()
            .map(|h| self.difference_norm(*h))
            .fold(0.0, f64::max))
    }

    /// `w_r(f, I, u)_p = ((1/u) int_0^u N(h)^p dh)^(1/p)`; the maximum of the
    /// sampled `N(h)` for `p = inf`.
    pub fn avg(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::InvalidParameter(format!("u must be positive, got {u}")));
        }
        let rule = IntervalRule::gauss_legendre(self.params.avg_nodes);
        let mut nodes = Vec::new();
        let mut hi = u;
        for _ in 0..self.params.avg_octaves {
            let lo = hi * 0.5;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push((lo + x * (hi - lo), w * (hi - lo)));
            }
            hi = lo;
        }
        let hs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        self.prefetch(&hs);
        let p = self.params.p;
        if p.is_infinite() {
            return Ok(hs.iter().map(|h| self.difference_norm(*h)).fold(0.0, f64::max));
        }
        let integral: f64 = nodes
            .iter()
            .map(|(h, w)| w * self.difference_norm(*h).powf(p))
            .sum();
        Ok((integral / u).powf(1.0 / p))
    }

    /// Discrete Besov seminorm `(sum_k [2^(ks) omega_r(f, I, 2^-k)]^q)^(1/q)`.
    pub fn besov(&self, bp: &BesovParams) -> Result<BesovEstimate> {
        if bp.r != self.params.r {
            return Err(Error::InvalidParameter(format!(
                "Besov order {} differs from the modulus order {}",
                bp.r, self.params.r
            )));
        }
        let mut terms = Vec::with_capacity(bp.kmax + 1);
        for k in 0..=bp.kmax {
            let u = 2f64.powi(-(k as i32));
            terms.push(2f64.powf(k as f64 * bp.s) * self.sup(u)?);
        }
        let (value, last_term) = if bp.q.is_infinite() {
            let v = terms.iter().copied().fold(0.0, f64::max);
            let last = *terms.last().unwrap();
            (v, if v > 0.0 { last / v } else { 0.0 })
        } else {
            let pow: Vec<f64> = terms.iter().map(|t| t.powf(bp.q)).collect();
            let total: f64 = pow.iter().sum();
            let last = *pow.last().unwrap();
            (
                total.powf(1.0 / bp.q),
                if total > 0.0 { last / total } else { 0.0 },
            )
        };
        Ok(BesovEstimate {
            value,
            terms,
            last_term,
        })
    }
}

/// `omega_r(f, I, u)_p` with a one-off evaluator.
pub fn modulus_sup<C: XCurve + ?Sized>(
    c: &C,
    a: f64,
    b: f64,
    u: f64,
    params: &SmoothnessParams,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<f64> {
    ModulusEvaluator::new(c, a, b, *params, grid, tq)?.sup(u)
}

/// `w_r(f, I, u)_p` with a one-off evaluator.
pub fn modulus_avg<C: XCurve + ?Sized>(
    c: &C,
    a: f64,
    b: f64,
    u: f64,
    params: &SmoothnessParams,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<f64> {
    ModulusEvaluator::new(c, a, b, *params, grid, tq)?.avg(u)
}

/// Discrete Besov seminorm `|f|_{B^s_{p,q}(I, X)}` with `p = params.p`.
pub fn besov_seminorm_discrete<C: XCurve + ?Sized>(
    c: &C,
    a: f64,
    b: f64,
    bp: &BesovParams,
    params: &SmoothnessParams,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<BesovEstimate> {
    ModulusEvaluator::new(c, a, b, *params, grid, tq)?.besov(bp)
}

/// The two sides of the Whitney estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitneyReport {
    /// `E_r(f, I)_p`.
    pub error: f64,
    /// `|f|_{B^s_{q,q}(I, X)}`.
    pub seminorm: f64,
    /// `|I|^(s + 1/p - 1/q)`.
    pub scale: f64,
    pub ratio: f64,
}

/// `E_r(f, I)_p / (|I|^(s + 1/p - 1/q) |f|_{B^s_{q,q}(I, X)})`.
///
/// `E` is exact for `p = 2` and the Jackson surrogate otherwise; `0/0` is
/// reported as `0`.
#[allow(clippy::too_many_arguments)]
pub fn whitney_ratio(
    f: &Field,
    a: f64,
    b: f64,
    r: usize,
    p: f64,
    q: f64,
    s: f64,
    params: &SmoothnessParams,
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<WhitneyReport> {
    let lower = (1.0 / q - 1.0 / p).max(0.0);
    if s < lower || s >= r as f64 {
        return Err(Error::InvalidParameter(format!(
            "need (1/q - 1/p)_+ <= s < r, got s = {s}, r = {r}, p = {p}, q = {q}"
        )));
    }
    let error = if p == 2.0 {
        best_error(f, a, b, r, grid, tq)?
    } else {
        jackson_error(f, a, b, r, p, grid, tq)?.0
    };
    let slice = FieldSlice::new(f, grid);
    let mp = SmoothnessParams {
        r,
        p: q,
        ..*params
    };
    let bp = BesovParams::with_order(s, q, r)?;
    let seminorm = besov_seminorm_discrete(&slice, a, b, &bp, &mp, grid, tq)?.value;
    let scale = (b - a).powf(s + 1.0 / p - 1.0 / q);
    let ratio = if seminorm > 0.0 {
        error / (scale * seminorm)
    } else if error <= 1e-8 {
        0.0
    } else {
        return Err(Error::ZeroDenominator(format!(
            "Besov seminorm vanishes but E = {error:e}; check r and s"
        )));
    };
    Ok(WhitneyReport {
        error,
        seminorm,
        scale,
        ratio,
    })
}
