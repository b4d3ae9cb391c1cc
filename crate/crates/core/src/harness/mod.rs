//! Experiment runner, rate fits and report files.
//!
//! An experiment is one [`Mode`] applied across a sweep. Every sweep point
//! yields a [`Row`] `(sweep, cardinality, error, wall_ms)`; modes that
//! measure a rate also fit one. What the columns mean per mode:
//!
//! | mode | sweep | cardinality | error |
//! |------|-------|-------------|-------|
//! | `moduli` | `u` | step-grid points `<= u` | `omega_r(f, [0,T), u)_p` |
//! | `besov` | dyadic depth | number of terms | discrete seminorm |
//! | `jackson` | `L` | `r` | `\|\| f - P \|\|_{L_p([0,L), X)}` |
//! | `whitney` | `L` | `r` | `E_r(f, [0,L))_p` |
//! | `greedy-time` | `delta` | `#T` | global error |
//! | `greedy-space` | `delta` | `#T` | `\|\| g - P_T g \|\|` |
//! | `greedy-st` | `eps` | `#P` | `\|\| f - F \|\|` |
//! | `rates` | input | input | input |
//!
//! Greedy sweeps run from the largest tolerance down, so rows come out in
//! decreasing tolerance order.

mod config;
mod fit;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{ExperimentConfig, FieldSpec, Mode, ParamBlock, Scale, Sweep};
pub use fit::{fit_rate, fit_rate_skip, fit_rate_window, RateFit, DEFAULT_SKIP};

use crate::curve::FieldSlice;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::mesh1d::{uniform_baseline, ErrorFunctional, GreedyTime};
use crate::meshnd::{uniform_space_baseline, SpaceMesh, SpaceTarget, MAX_GENERATION};
use crate::polyspace::jackson_error;
use crate::quadrature::{GridConfig, SpatialGrid, TimeQuadrature};
use crate::smoothness::{whitney_ratio, BesovParams, ModulusEvaluator, SmoothnessParams};
use crate::spacetime::{build_fully_discrete, BuildOptions};

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub sweep: f64,
    pub cardinality: usize,
    pub error: f64,
    pub wall_ms: f64,
}

/// A named two-column series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Everything an experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub curves: Vec<Curve>,
    pub fit: Option<RateFit>,
    /// Mode-specific JSON.
    pub details: Value,
}

impl ExperimentResult {
    /// The deterministic part of the JSON report.
    pub fn report_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| json!({"sweep": r.sweep, "cardinality": r.cardinality, "error": r.error}))
            .collect();
        json!({
            "mode": self.config.mode,
            "field": self.config.field,
            "params": self.config.params,
            "sweep": self.config.sweep,
            "seed": self.config.seed,
            "rows": rows,
            "fit": self.fit,
            "details": self.details,
        })
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64() * 1e3))
}

fn grid_for(cfg: &ExperimentConfig, f: &Field) -> SpatialGrid {
    let gc = GridConfig {
        panels: cfg.params.grid_panels,
        ..GridConfig::default()
    };
    SpatialGrid::for_field(f, gc)
}

fn sorted_desc(values: Vec<f64>) -> Vec<f64> {
    let mut v = values;
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn at(x: f64) -> impl Fn(Error) -> Error {
    move |e| e.context(&format!("sweep point {x:e}"))
}

/// Runs `cfg` and collects rows, curves, fit and details.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let sweep = cfg.sweep.map(|s| s.values()).unwrap_or_default();
    let mut curves = Vec::new();
    let mut fit_points = None;
    let mut rows = Vec::with_capacity(sweep.len());
    let details = match cfg.mode {
        Mode::Rates => {
            let table = match (&cfg.rates_input, cfg.rates_synthetic) {
                (Some(path), _) => read_table(path)?,
                (None, Some((c, s))) => sweep
                    .iter()
                    .map(|m| {
                        let m = m.round().max(1.0);
                        (m, m as usize, c * m.powf(-s))
                    })
                    .collect(),
                (None, None) => unreachable!("validated"),
            };
            for (x, m, e) in &table {
                rows.push(Row {
                    sweep: *x,
                    cardinality: *m,
                    error: *e,
                    wall_ms: 0.0,
                });
            }
            fit_points = Some(table.iter().map(|(_, m, e)| (*m as f64, *e)).collect::<Vec<_>>());
            json!({ "source": cfg.rates_input.as_ref().map_or("synthetic".into(), |p| p.display().to_string()) })
        }
        _ => run_field_mode(cfg, &sweep, &mut rows, &mut curves, &mut fit_points)?,
    };
    let (fit, fit_error) = match fit_points {
        Some(pts) => match fit_rate_skip(&pts, cfg.fit_skip) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        },
        None => (None, None),
    };
    let details = match fit_error {
        Some(msg) => json!({ "result": details, "fit_error": msg }),
        None => details,
    };
    Ok(ExperimentResult {
        config: cfg.clone(),
        rows,
        curves,
        fit,
        details,
    })
}

fn run_field_mode(
    cfg: &ExperimentConfig,
    sweep: &[f64],
    rows: &mut Vec<Row>,
    curves: &mut Vec<Curve>,
    fit_points: &mut Option<Vec<(f64, f64)>>,
) -> Result<Value> {
    let f = cfg.field.build()?;
    let grid = grid_for(cfg, &f);
    let tq = TimeQuadrature::for_field(&f);
    let t_end = f.domain().t_end();
    let pb = &cfg.params;
    let r = cfg.order();
    let slice = FieldSlice::new(&f, &grid);
    let details = match cfg.mode {
        Mode::Moduli => {
            let ev = ModulusEvaluator::new(&slice, 0.0, t_end, SmoothnessParams::new(r, pb.p)?, &grid, &tq)?;
            let hs = ev.h_grid();
            let mut out = Vec::new();
            let (mut sup_c, mut avg_c) = (Vec::new(), Vec::new());
            for &u in sweep {
                let ((sup, avg), ms) = timed(|| Ok((ev.sup(u)?, ev.avg(u)?))).map_err(at(u))?;
                rows.push(Row {
                    sweep: u,
                    cardinality: hs.iter().filter(|h| **h <= u * (1.0 + 1e-12)).count(),
                    error: sup,
                    wall_ms: ms,
                });
                sup_c.push((u, sup));
                avg_c.push((u, avg));
                out.push(json!({"u": u, "sup": sup, "avg": avg}));
            }
            curves.push(Curve { name: "sup".into(), points: sup_c });
            curves.push(Curve { name: "avg".into(), points: avg_c });
            json!({ "r": r, "p": pb.p, "moduli": out })
        }
        Mode::Besov => {
            let s = pb.s.expect("validated");
            let ev = ModulusEvaluator::new(&slice, 0.0, t_end, SmoothnessParams::new(r, pb.p)?, &grid, &tq)?;
            let mut out = Vec::new();
            let mut c = Vec::new();
            for &x in sweep {
                let k = x.round() as usize;
                let bp = BesovParams::with_order(s, pb.q, r)?.with_kmax(k)?;
                let (est, ms) = timed(|| ev.besov(&bp)).map_err(at(x))?;
                rows.push(Row {
                    sweep: k as f64,
                    cardinality: k + 1,
                    error: est.value,
                    wall_ms: ms,
                });
                c.push((k as f64, est.value));
                out.push(json!({"kmax": k, "value": est.value, "terms": est.terms, "last_term": est.last_term}));
            }
            curves.push(Curve { name: "seminorm".into(), points: c });
            json!({ "s": s, "q": pb.q, "r": r, "p": pb.p, "estimates": out })
        }
        Mode::Jackson => {
            let params = SmoothnessParams::new(r, pb.p)?;
            let mut out = Vec::new();
            let mut c = Vec::new();
            for &len in sweep {
                let ((err, w), ms) = timed(|| {
                    let (err, _) = jackson_error(&f, 0.0, len, r, pb.p, &grid, &tq)?;
                    let ev = ModulusEvaluator::new(&slice, 0.0, len, params, &grid, &tq)?;
                    Ok((err, ev.avg(len / (2 * r) as f64)?))
                })
                .map_err(at(len))?;
                let ratio = if w > 0.0 { err / w } else { 0.0 };
                rows.push(Row {
                    sweep: len,
                    cardinality: r,
                    error: err,
                    wall_ms: ms,
                });
                c.push((len, ratio));
                out.push(json!({"length": len, "error": err, "modulus": w, "ratio": ratio}));
            }
            curves.push(Curve { name: "ratio".into(), points: c });
            json!({ "r": r, "p": pb.p, "intervals": out })
        }
        Mode::Whitney => {
            let s = pb.s.expect("validated");
            let params = SmoothnessParams::new(r, pb.q)?;
            let mut out = Vec::new();
            let mut c = Vec::new();
            for &len in sweep {
                let (w, ms) = timed(|| whitney_ratio(&f, 0.0, len, r, pb.p, pb.q, s, &params, &grid, &tq))
                    .map_err(at(len))?;
                rows.push(Row {
                    sweep: len,
                    cardinality: r,
                    error: w.error,
                    wall_ms: ms,
                });
                c.push((len, w.ratio));
                out.push(json!({"length": len, "error": w.error, "seminorm": w.seminorm, "scale": w.scale, "ratio": w.ratio}));
            }
            curves.push(Curve { name: "ratio".into(), points: c });
            json!({ "r": r, "p": pb.p, "q": pb.q, "s": s, "intervals": out })
        }
        Mode::GreedyTime => {
            let functional = ErrorFunctional::for_p(pb.p);
            let mut greedy = GreedyTime::new(&f, r, functional, grid.clone(), tq.clone())?;
            let mut out = Vec::new();
            let mut adaptive = Vec::new();
            for delta in sorted_desc(sweep.to_vec()) {
                let (res, ms) = timed(|| greedy.run(delta)).map_err(at(delta))?;
                let m = res.partition.len();
                rows.push(Row {
                    sweep: delta,
                    cardinality: m,
                    error: res.global_error,
                    wall_ms: ms,
                });
                adaptive.push((m as f64, res.global_error));
                out.push(json!({
                    "delta": delta,
                    "leaves": m,
                    "global_error": res.global_error,
                    "max_leaf_error": res.errors.iter().copied().fold(0.0, f64::max),
                }));
            }
            let max_m = adaptive.iter().map(|p| p.0).fold(1.0, f64::max);
            let top = max_m.log2().ceil() as u32;
            let uniform: Vec<(f64, f64)> = uniform_baseline(&f, r, functional, &(0..=top).collect::<Vec<_>>(), &grid, &tq)?
                .into_iter()
                .map(|(m, e)| (m as f64, e))
                .collect();
            *fit_points = Some(adaptive.clone());
            let uniform_fit = fit_rate_skip(&uniform, cfg.fit_skip).ok();
            curves.push(Curve { name: "adaptive".into(), points: adaptive });
            curves.push(Curve { name: "uniform".into(), points: uniform });
            json!({
                "r": r,
                "p": pb.p,
                "runs": out,
                "uniform_fit": uniform_fit,
                "trace": greedy.partition().trace_json(),
            })
        }
        Mode::GreedySpace => {
            let t0 = pb.space_t.unwrap_or(0.5 * t_end);
            let target = SpaceTarget::new(f.domain().dim(), |x| f.value(t0, x));
            let mesh0 = SpaceMesh::initial(f.domain());
            let mut out = Vec::new();
            let mut adaptive = Vec::new();
            let mut last = None;
            for delta in sorted_desc(sweep.to_vec()) {
                let (res, ms) = timed(|| target.greedy(&mesh0, pb.r2, delta, MAX_GENERATION)).map_err(at(delta))?;
                let m = res.mesh.len();
                rows.push(Row {
                    sweep: delta,
                    cardinality: m,
                    error: res.error,
                    wall_ms: ms,
                });
                adaptive.push((m as f64, res.error));
                out.push(json!({
                    "delta": delta,
                    "elements": m,
                    "error": res.error,
                    "passes": res.passes,
                    "complexity_constant": res.mesh.complexity_constant(),
                }));
                last = Some(res.mesh);
            }
            let max_m = adaptive.iter().map(|p| p.0).fold(1.0, f64::max);
            let steps = (max_m / mesh0.len() as f64).log2().ceil().max(0.0) as usize;
            let uniform: Vec<(f64, f64)> = uniform_space_baseline(|x| f.value(t0, x), &mesh0, pb.r2, steps)?
                .into_iter()
                .map(|(m, e)| (m as f64, e))
                .collect();
            *fit_points = Some(adaptive.clone());
            let uniform_fit = fit_rate_skip(&uniform, cfg.fit_skip).ok();
            curves.push(Curve { name: "adaptive".into(), points: adaptive });
            curves.push(Curve { name: "uniform".into(), points: uniform });
            json!({
                "t": t0,
                "r2": pb.r2,
                "runs": out,
                "uniform_fit": uniform_fit,
                "mesh": last.map(|m| m.to_json()),
            })
        }
        Mode::GreedySt => {
            let opts = BuildOptions {
                grid: GridConfig {
                    panels: pb.grid_panels,
                    ..GridConfig::default()
                },
                ..BuildOptions::default()
            };
            let mut reports = Vec::new();
            let mut err_c = Vec::new();
            let mut card_c = Vec::new();
            for eps in sorted_desc(sweep.to_vec()) {
                let (b, ms) = timed(|| build_fully_discrete(&f, eps, pb.r1, pb.r2, &opts)).map_err(at(eps))?;
                let rep = b.report;
                rows.push(Row {
                    sweep: eps,
                    cardinality: rep.total_cardinality,
                    error: rep.global_error,
                    wall_ms: ms,
                });
                err_c.push((rep.total_cardinality as f64, rep.global_error));
                card_c.push((1.0 / eps, rep.total_cardinality as f64));
                reports.push(rep);
            }
            // log #P against log(1/eps): the fitted "rate" is minus the slope
            let card_fit = fit_rate_skip(&card_c, 0).ok();
            let predicted = match (pb.s1, pb.s2) {
                (Some(s1), Some(s2)) => Some(1.0 / s1 + f.domain().dim() as f64 / s2),
                _ => None,
            };
            *fit_points = Some(err_c.clone());
            curves.push(Curve { name: "error".into(), points: err_c });
            curves.push(Curve { name: "cardinality".into(), points: card_c });
            json!({
                "r1": pb.r1,
                "r2": pb.r2,
                "cardinality_slope": card_fit.map(|c| c.slope),
                "predicted_cardinality_slope": predicted,
                "reports": reports,
            })
        }
        Mode::Rates => unreachable!("handled by the caller"),
    };
    Ok(details)
}

/// Reads `(sweep, cardinality, error)` from a CSV with a header naming at
/// least `cardinality` and `error`.
fn read_table(path: &Path) -> Result<Vec<(f64, usize, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (Some(ci), Some(ei)) = (col("cardinality"), col("error")) else {
        return Err(Error::Config(format!(
            "{} needs `cardinality` and `error` columns",
            path.display()
        )));
    };
    let si = col("sweep");
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Config(format!("{} line {}: malformed row", path.display(), i + 2));
            let num = |k: usize| cells.get(k).and_then(|c| c.parse::<f64>().ok()).ok_or_else(bad);
            let m = num(ci)?;
            let sweep = match si {
                Some(k) => num(k)?,
                None => m,
            };
            Ok((sweep, m.round() as usize, num(ei)?))
        })
        .collect()
}

/// CSV text with header `sweep,cardinality,error,wall_ms`.
pub fn to_csv(rows: &[Row]) -> String {
    let mut s = String::from("sweep,cardinality,error,wall_ms\n");
    for r in rows {
        s.push_str(&format!("{:.12e},{},{:.12e},{:.3}\n", r.sweep, r.cardinality, r.error, r.wall_ms));
    }
    s
}

/// Writes `results.csv`, `report.json` and one `curve_<name>.dat` per
/// curve into `dir`; returns the paths written.
pub fn emit_report(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.rows.is_empty() {
        return Err(Error::InsufficientData("no result rows to emit".into()));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv = dir.join("results.csv");
    std::fs::write(&csv, to_csv(&result.rows))?;
    written.push(csv);
    let json = dir.join("report.json");
    let text = serde_json::to_string_pretty(&result.report_json()).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&json, text + "\n")?;
    written.push(json);
    for c in &result.curves {
        let path = dir.join(format!("curve_{}.dat", c.name));
        let mut s = String::new();
        for (x, y) in &c.points {
            s.push_str(&format!("{x:.12e} {y:.12e}\n"));
        }
        std::fs::write(&path, s)?;
        written.push(path);
    }
    Ok(written)
}
