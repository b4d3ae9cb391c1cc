//! Dyadic bisection partitions of `[0, T)` and the greedy refinement loop.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::XCurve;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::polyspace::{best_error_with_projection, jackson_error, SlicePoly};
use crate::quadrature::{SpatialGrid, TimeQuadrature};

/// Default bisection depth limit.
pub const MAX_LEVEL: u32 = 30;

/// The interval `T [index 2^-level, (index + 1) 2^-level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntervalId {
    pub level: u32,
    pub index: u64,
}

impl IntervalId {
    pub const ROOT: IntervalId = IntervalId { level: 0, index: 0 };

    pub fn children(self) -> [IntervalId; 2] {
        let level = self.level + 1;
        [
            IntervalId {
                level,
                index: 2 * self.index,
            },
            IntervalId {
                level,
                index: 2 * self.index + 1,
            },
        ]
    }

    /// Endpoints on `[0, t_end)`.
    pub fn bounds(self, t_end: f64) -> (f64, f64) {
        let scale = t_end * 2f64.powi(-(self.level as i32));
        (self.index as f64 * scale, (self.index + 1) as f64 * scale)
    }
}

/// One refinement step: marked count, leaf count afterwards and the largest
/// leaf error seen before refining (if errors were computed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub marked: usize,
    pub leaves: usize,
    pub maxerr: Option<f64>,
}

/// A partition of `[0, T)` obtained by successive bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    t_end: f64,
    /// Leaves in increasing time order.
    leaves: Vec<IntervalId>,
    initial_leaves: usize,
    trace: Vec<TraceEntry>,
}

#[derive(Serialize)]
struct TraceJson<'a> {
    iterations: &'a [TraceEntry],
    breakpoints: Vec<f64>,
}

impl TimePartition {
    /// The trivial partition `{[0, T)}`.
    pub fn root(t_end: f64) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("T must be positive, got {t_end}")));
        }
        Ok(TimePartition {
            t_end,
            leaves: vec![IntervalId::ROOT],
            initial_leaves: 1,
            trace: Vec::new(),
        })
    }

    /// `2^level` equal intervals.
    pub fn uniform(t_end: f64, level: u32) -> Result<Self> {
        let mut p = Self::root(t_end)?;
        p.leaves = (0..1u64 << level)
            .map(|index| IntervalId { level, index })
            .collect();
        p.initial_leaves = p.leaves.len();
        Ok(p)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn leaves(&self) -> &[IntervalId] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    /// `#T_0` of the partition the trace starts from.
    pub fn initial_len(&self) -> usize {
        self.initial_leaves
    }

    pub fn bounds(&self, id: IntervalId) -> (f64, f64) {
        id.bounds(self.t_end)
    }

    /// `t_0 = 0 < t_1 < ... < t_N = T`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.leaves.iter().map(|id| self.bounds(*id).0).collect();
        out.push(self.t_end);
        out
    }

    pub fn levels(&self) -> Vec<u32> {
        self.leaves.iter().map(|id| id.level).collect()
    }

    /// Index of the leaf containing `t` (the last one for `t >= T`).
    pub fn locate(&self, t: f64) -> usize {
        let bp = self.breakpoints();
        match bp[1..].iter().position(|b| t < *b) {
            Some(i) => i,
            None => self.leaves.len() - 1,
        }
    }

    /// The trace and breakpoints as JSON.
    pub fn trace_json(&self) -> serde_json::Value {
        serde_json::to_value(TraceJson {
            iterations: &self.trace,
            breakpoints: self.breakpoints(),
        })
        .expect("trace is serializable")
    }

    fn refine_with(&self, marked: &[IntervalId], maxerr: Option<f64>) -> Result<Self> {
        let set: BTreeSet<IntervalId> = marked.iter().copied().collect();
        let present: BTreeSet<IntervalId> = self.leaves.iter().copied().collect();
        if let Some(bad) = set.iter().find(|id| !present.contains(id)) {
            return Err(Error::UnknownId(format!("{bad:?} is not a leaf")));
        }
        let mut leaves = Vec::with_capacity(self.leaves.len() + set.len());
        for id in &self.leaves {
            if set.contains(id) {
                leaves.extend(id.children());
            } else {
                leaves.push(*id);
            }
        }
        let mut trace = self.trace.clone();
        trace.push(TraceEntry {
            marked: set.len(),
            leaves: leaves.len(),
            maxerr,
        });
        Ok(TimePartition {
            t_end: self.t_end,
            leaves,
            initial_leaves: self.initial_leaves,
            trace,
        })
    }
}

/// Bisects every marked interval.
pub fn refine_1d(t: &TimePartition, marked: &[IntervalId]) -> Result<TimePartition> {
    t.refine_with(marked, None)
}

/// `(#T - #T_0) / sum_k #M_k`, with `0/0 = 0`.
pub fn complexity_ratio(t: &TimePartition) -> f64 {
    let marks: usize = t.trace.iter().map(|e| e.marked).sum();
    if marks == 0 {
        0.0
    } else {
        (t.len() - t.initial_leaves) as f64 / marks as f64
    }
}

/// Local error functional used by the greedy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorFunctional {
    /// Exact `E_r(f, I)_2` via orthogonal projection.
    BestL2,
    /// `|| f - P ||_{Lp(I,X)}` for the Jackson approximant `P`.
    Jackson { p: f64 },
}

impl ErrorFunctional {
    /// The functional matching `p`.
    pub fn for_p(p: f64) -> Self {
        if p == 2.0 {
            ErrorFunctional::BestL2
        } else {
            ErrorFunctional::Jackson { p }
        }
    }

    pub fn p(&self) -> f64 {
        match self {
            ErrorFunctional::BestL2 => 2.0,
            ErrorFunctional::Jackson { p } => *p,
        }
    }

    /// Local error and approximant on `[a, b)`.
    pub fn evaluate(
        &self,
        f: &Field,
        a: f64,
        b: f64,
        r: usize,
        grid: &SpatialGrid,
        tq: &TimeQuadrature,
    ) -> Result<(f64, SlicePoly)> {
        match self {
            ErrorFunctional::BestL2 => best_error_with_projection(f, a, b, r, grid, tq),
            ErrorFunctional::Jackson { p } => jackson_error(f, a, b, r, *p, grid, tq),
        }
    }
}

/// `delta = eps^((s + 1/p) / s) |f|_B`.
pub fn delta_from_eps(eps: f64, s: f64, p: f64, seminorm: f64) -> f64 {
    eps.powf((s + 1.0 / p) / s) * seminorm
}

/// `P(t) = sum_I chi_I(t) P_I(t)`.
#[derive(Debug, Clone)]
pub struct PiecewisePoly {
    pub partition: TimePartition,
    pub pieces: Vec<SlicePoly>,
}

impl XCurve for PiecewisePoly {
    fn len(&self) -> usize {
        self.pieces.first().map_or(0, XCurve::len)
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let i = self.partition.locate(t);
        self.pieces[i].eval_into(t, out)
    }
}

/// An interval that was bisected and its error when it was marked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkRecord {
    pub id: IntervalId,
    pub error: f64,
}

/// Greedy state. Successive calls to [`GreedyTime::run`] with decreasing
/// `delta` continue from the current partition, which is the partition a
/// fresh run would produce since refined sets are monotone in `delta`.
pub struct GreedyTime {
    field: Field,
    r: usize,
    functional: ErrorFunctional,
    grid: SpatialGrid,
    tq: TimeQuadrature,
    max_level: u32,
    partition: TimePartition,
    cache: HashMap<IntervalId, (f64, SlicePoly)>,
    marks: Vec<MarkRecord>,
    delta: f64,
}

/// Outcome of a greedy run.
#[derive(Debug, Clone)]
pub struct GreedyTimeResult {
    pub delta: f64,
    pub partition: TimePartition,
    /// Leaf errors in partition order.
    pub errors: Vec<f64>,
    pub approximant: PiecewisePoly,
    /// Every refined interval with its error at marking time.
    pub marks: Vec<MarkRecord>,
    /// `(sum_I E_I^p)^(1/p)`.
    pub global_error: f64,
}

impl GreedyTime {
    pub fn new(
        field: &Field,
        r: usize,
        functional: ErrorFunctional,
        grid: SpatialGrid,
        tq: TimeQuadrature,
    ) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("order r must be at least 1".into()));
        }
        Ok(GreedyTime {
            partition: TimePartition::root(field.domain().t_end())?,
            field: field.clone(),
            r,
            functional,
            grid,
            tq,
            max_level: MAX_LEVEL,
            cache: HashMap::new(),
            marks: Vec::new(),
            delta: f64::INFINITY,
        })
    }

    pub fn with_max_level(mut self, max_level: u32) -> Self {
        self.max_level = max_level;
        self
    }

    pub fn partition(&self) -> &TimePartition {
        &self.partition
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn time_quadrature(&self) -> &TimeQuadrature {
        &self.tq
    }

    fn fill_cache(&mut self) -> Result<()> {
        let missing: Vec<IntervalId> = self
            .partition
            .leaves()
            .iter()
            .copied()
            .filter(|id| !self.cache.contains_key(id))
            .collect();
        let t_end = self.partition.t_end();
        let computed: Vec<Result<(IntervalId, (f64, SlicePoly))>> = missing
            .par_iter()
            .map(|id| {
                let (a, b) = id.bounds(t_end);
                self.functional
                    .evaluate(&self.field, a, b, self.r, &self.grid, &self.tq)
                    .map(|v| (*id, v))
            })
            .collect();
        for c in computed {
            let (id, v) = c?;
            self.cache.insert(id, v);
        }
        Ok(())
    }

    /// Leaf errors in partition order.
    pub fn leaf_errors(&mut self) -> Result<Vec<f64>> {
        self.fill_cache()?;
        Ok(self
            .partition
            .leaves()
            .iter()
            .map(|id| self.cache[id].0)
            .collect())
    }

    /// Refines until every leaf error is at most `delta`.
    pub fn run(&mut self, delta: f64) -> Result<GreedyTimeResult> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        if delta > self.delta {
            return Err(Error::InvalidParameter(format!(
                "cannot continue with a larger delta ({delta} > {})",
                self.delta
            )));
        }
        self.delta = delta;
        loop {
            let errors = self.leaf_errors()?;
            let marked: Vec<MarkRecord> = self
                .partition
                .leaves()
                .iter()
                .zip(&errors)
                .filter(|(_, e)| **e > delta)
                .map(|(id, e)| MarkRecord { id: *id, error: *e })
                .collect();
            if marked.is_empty() {
                break;
            }
            let capped: Vec<String> = marked
                .iter()
                .filter(|m| m.id.level >= self.max_level)
                .map(|m| {
                    let (a, b) = m.id.bounds(self.partition.t_end());
                    format!("[{a:e}, {b:e}) error {:e}", m.error)
                })
                .collect();
            if !capped.is_empty() {
                return Err(Error::CapReached {
                    cap: self.max_level,
                    detail: capped.join("; "),
                });
            }
            let maxerr = errors.iter().copied().fold(0.0, f64::max);
            let ids: Vec<IntervalId> = marked.iter().map(|m| m.id).collect();
            self.partition = self.partition.refine_with(&ids, Some(maxerr))?;
            for id in &ids {
                self.cache.remove(id);
            }
            self.marks.extend(marked);
        }
        self.result()
    }

    fn result(&mut self) -> Result<GreedyTimeResult> {
        let errors = self.leaf_errors()?;
        let pieces = self
            .partition
            .leaves()
            .iter()
            .map(|id| self.cache[id].1.clone())
            .collect();
        Ok(GreedyTimeResult {
            delta: self.delta,
            global_error: combine_errors(&errors, self.functional.p()),
            errors,
            approximant: PiecewisePoly {
                partition: self.partition.clone(),
                pieces,
            },
            partition: self.partition.clone(),
            marks: self.marks.clone(),
        })
    }
}

/// `(sum e^p)^(1/p)`, or the maximum for `p = inf`.
pub fn combine_errors(errors: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        errors.iter().copied().fold(0.0, f64::max)
    } else {
        errors.iter().map(|e| e.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Runs the greedy from the root partition with the field's default
/// quadrature.
pub fn greedy_time(
    f: &Field,
    r: usize,
    delta: f64,
    functional: ErrorFunctional,
    grid: &SpatialGrid,
) -> Result<GreedyTimeResult> {
    GreedyTime::new(f, r, functional, grid.clone(), TimeQuadrature::for_field(f))?.run(delta)
}

/// Global errors of uniform refinement at the given levels, as
/// `(#T, error)` pairs.
pub fn uniform_baseline(
    f: &Field,
    r: usize,
    functional: ErrorFunctional,
    levels: &[u32],
    grid: &SpatialGrid,
    tq: &TimeQuadrature,
) -> Result<Vec<(usize, f64)>> {
    levels
        .iter()
        .map(|&level| {
            let part = TimePartition::uniform(f.domain().t_end(), level)?;
            let errors: Vec<f64> = part
                .leaves()
                .par_iter()
                .map(|id| {
                    let (a, b) = part.bounds(*id);
                    functional.evaluate(f, a, b, r, grid, tq).map(|e| e.0)
                })
                .collect::<Result<_>>()?;
            Ok((part.len(), combine_errors(&errors, functional.p())))
        })
        .collect()
}
