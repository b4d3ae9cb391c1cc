//! Target functions `f(t, x)` on `[0, T) x Omega`.
//!
//! A [`Field`] is an immutable, thread-safe evaluator together with the
//! domain it lives on and optional regularity metadata. The built-in corpus
//! ([`make_test_field`]) covers the function families used by the rate
//! experiments; arbitrary closures and tabulated CSV samples are also
//! accepted.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible singular exponent for the corpus families.
pub const MAX_EXPONENT: f64 = 4.0;

/// Polynomial degrees in the corpus must stay strictly below this value.
pub const MAX_POLY_DEGREE: u32 = 8;

/// A point of the spatial domain. For `n = 1` only `x` is used and `y` is 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub const fn on_line(x: f64) -> Self {
        Point { x, y: 0.0 }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Spatial domain: the unit interval or the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Omega {
    UnitInterval,
    /// Split by the diagonal from (0,0) to (1,1); both triangles carry the
    /// diagonal as refinement edge.
    UnitSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    t_end: f64,
    omega: Omega,
}

impl DomainSpec {
    pub fn new(t_end: f64, dim: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time horizon must be positive, got {t_end}"
            )));
        }
        let omega = match dim {
            1 => Omega::UnitInterval,
            2 => Omega::UnitSquare,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "spatial dimension must be 1 or 2, got {dim}"
                )))
            }
        };
        Ok(DomainSpec { t_end, omega })
    }

    /// `[0, 1) x [0, 1]`.
    pub fn unit(dim: usize) -> Self {
        Self::new(1.0, dim).expect("unit domain is valid")
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dim(&self) -> usize {
        match self.omega {
            Omega::UnitInterval => 1,
            Omega::UnitSquare => 2,
        }
    }

    pub fn omega(&self) -> Omega {
        self.omega
    }

    /// Measure of `Omega`.
    pub fn omega_measure(&self) -> f64 {
        1.0
    }

    pub fn contains_time(&self, t: f64) -> bool {
        (0.0..self.t_end).contains(&t)
    }

    pub fn contains_point(&self, p: Point) -> bool {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        match self.omega {
            Omega::UnitInterval => unit(p.x) && p.y == 0.0,
            Omega::UnitSquare => unit(p.x) && unit(p.y),
        }
    }
}

/// Claimed Besov memberships `B^{s1}_{q1,q1}` in time and `B^{s2}_{q2,q2}`
/// in space. Only used to predict rates; never asserted by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub s1: f64,
    pub q1: f64,
    pub s2: f64,
    pub q2: f64,
}

impl Regularity {
    /// Combined fully discrete rate `1 / (1/s1 + n/s2)`.
    pub fn spacetime_rate(&self, dim: usize) -> f64 {
        1.0 / (1.0 / self.s1 + dim as f64 / self.s2)
    }
}

/// Where a field is known to be non-smooth; quadrature rules grade toward
/// these locations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Singularities {
    /// Singular behaviour at `t = 0`.
    pub time_origin: bool,
    /// Point singularity in space.
    pub space_point: Option<Point>,
}

type Evaluator = Arc<dyn Fn(f64, Point) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    Poly { time_degree: u32, space_degree: u32 },
    TimePower { alpha: f64 },
    SpacePower { beta: f64, center: Point },
    TensorSingular { alpha: f64 },
    Tabulated(Arc<Table>),
    Custom(Evaluator),
}

/// A scalar function `f : [0,T) x Omega -> R`.
#[derive(Clone)]
pub struct Field {
    domain: DomainSpec,
    kind: Kind,
    name: String,
    regularity: Option<Regularity>,
    singularities: Singularities,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("regularity", &self.regularity)
            .finish()
    }
}

impl Field {
    /// Wraps an arbitrary closure.
    pub fn from_fn<F>(domain: DomainSpec, name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, Point) -> f64 + Send + Sync + 'static,
    {
        Field {
            domain,
            kind: Kind::Custom(Arc::new(f)),
            name: name.into(),
            regularity: None,
            singularities: Singularities::default(),
        }
    }

    pub fn with_regularity(mut self, regularity: Regularity) -> Self {
        self.regularity = Some(regularity);
        self
    }

    /// Declares a singularity at `t = 0` so that time integrals over
    /// intervals starting at the origin use graded panels.
    pub fn with_time_singularity(mut self) -> Self {
        self.singularities.time_origin = true;
        self
    }

    pub fn with_space_singularity(mut self, at: Point) -> Self {
        self.singularities.space_point = Some(at);
        self
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn regularity(&self) -> Option<Regularity> {
        self.regularity
    }

    pub fn singularities(&self) -> Singularities {
        self.singularities
    }

    /// True if `f(t, x)` is known not to depend on `x`.
    pub fn space_independent(&self) -> bool {
        match &self.kind {
            Kind::Constant(_) | Kind::TimePower { .. } => true,
            Kind::Poly { space_degree, .. } => *space_degree == 0,
            _ => false,
        }
    }

    /// Evaluates without domain checks. Used on quadrature nodes.
    #[inline]
    pub fn value(&self, t: f64, p: Point) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Poly {
                time_degree,
                space_degree,
            } => t.powi(*time_degree as i32) * (p.x + p.y).powi(*space_degree as i32),
            Kind::TimePower { alpha } => t.powf(*alpha),
            Kind::SpacePower { beta, center } => p.dist(center).powf(*beta),
            Kind::TensorSingular { alpha } => {
                let g = match self.domain.omega {
                    Omega::UnitInterval => (PI * p.x).sin(),
                    Omega::UnitSquare => (PI * p.x).sin() * (PI * p.y).sin(),
                };
                t.powf(*alpha) * g
            }
            Kind::Tabulated(table) => table.interpolate(t, p),
            Kind::Custom(f) => f(t, p),
        }
    }

    /// Loads a tabulated field from CSV with columns `t,x[,y],value`.
    ///
    /// The samples must form a full tensor grid; values in between are
    /// interpolated multilinearly and clamped to the sampled hull.
    pub fn from_csv(domain: DomainSpec, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let table = Table::parse(&text, domain.dim())?;
        Ok(Field {
            domain,
            kind: Kind::Tabulated(Arc::new(table)),
            name: format!("tabulated:{}", path.display()),
            regularity: None,
            singularities: Singularities::default(),
        })
    }
}

/// Checked evaluation of `f(t, x)`.
pub fn eval_field(f: &Field, t: f64, x: Point) -> Result<f64> {
    if !f.domain.contains_time(t) {
        return Err(Error::OutOfDomain(format!(
            "t = {t} not in [0, {})",
            f.domain.t_end
        )));
    }
    if !f.domain.contains_point(x) {
        return Err(Error::OutOfDomain(format!("x = {x:?} not in Omega")));
    }
    Ok(f.value(t, x))
}

fn check_exponent(name: &str, v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} exponent must be positive, got {v}"
        )));
    }
    if v > MAX_EXPONENT {
        return Err(Error::InvalidParameter(format!(
            "{name} exponent must not exceed {MAX_EXPONENT}, got {v}"
        )));
    }
    Ok(v)
}

fn check_degree(v: f64) -> Result<u32> {
    if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "polynomial degree must be a non-negative integer, got {v}"
        )));
    }
    if v >= MAX_POLY_DEGREE as f64 {
        return Err(Error::InvalidParameter(format!(
            "polynomial degree {v} must be below {MAX_POLY_DEGREE}"
        )));
    }
    Ok(v as u32)
}

fn param(params: &[f64], i: usize, what: &str) -> Result<f64> {
    params
        .get(i)
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("missing parameter {what}")))
}

/// The corpus identifiers accepted by [`make_test_field`].
pub const CORPUS_IDS: [&str; 5] = [
    "constant",
    "poly",
    "time-power",
    "space-power",
    "tensor-singular",
];

/// Builds a corpus field.
///
/// | id | params | f(t,x) |
/// |----|--------|--------|
/// | `constant` | `[c]` | `c` |
/// | `poly` | `[a, b]` | `t^a (x+y)^b` |
/// | `time-power` | `[alpha]` | `t^alpha` |
/// | `space-power` | `[beta, x0?, y0?]` | `\|x - x0\|^beta` |
/// | `tensor-singular` | `[alpha]` | `t^alpha sin(pi x) [sin(pi y)]` |
pub fn make_test_field(name: &str, params: &[f64], domain: DomainSpec) -> Result<Field> {
    let mut singularities = Singularities::default();
    let (kind, regularity) = match name {
        "constant" => (Kind::Constant(param(params, 0, "c")?), None),
        "poly" => {
            let time_degree = check_degree(param(params, 0, "time degree")?)?;
            let space_degree = check_degree(param(params, 1, "space degree")?)?;
            (
                Kind::Poly {
                    time_degree,
                    space_degree,
                },
                None,
            )
        }
        "time-power" => {
            let alpha = check_exponent("time", param(params, 0, "alpha")?)?;
            singularities.time_origin = alpha.fract() != 0.0;
            (
                Kind::TimePower { alpha },
                Some(Regularity {
                    s1: 1.0,
                    q1: 1.0,
                    s2: 2.0,
                    q2: 2.0,
                }),
            )
        }
        "space-power" => {
            let beta = check_exponent("space", param(params, 0, "beta")?)?;
            let center = Point::new(
                params.get(1).copied().unwrap_or(0.0),
                if domain.dim() == 2 {
                    params.get(2).copied().unwrap_or(0.0)
                } else {
                    0.0
                },
            );
            if !domain.contains_point(center) {
                return Err(Error::InvalidParameter(format!(
                    "singular point {center:?} outside Omega"
                )));
            }
            if beta.fract() != 0.0 {
                singularities.space_point = Some(center);
            }
            (
                Kind::SpacePower { beta, center },
                Some(Regularity {
                    s1: 4.0,
                    q1: 2.0,
                    s2: 2.0,
                    q2: 0.5,
                }),
            )
        }
        "tensor-singular" => {
            let alpha = check_exponent("time", param(params, 0, "alpha")?)?;
            singularities.time_origin = alpha.fract() != 0.0;
            (
                Kind::TensorSingular { alpha },
                Some(Regularity {
                    s1: 1.0,
                    q1: 1.0,
                    s2: 2.0,
                    q2: 2.0,
                }),
            )
        }
        other => return Err(Error::UnknownCorpus(other.to_string())),
    };
    let pretty: Vec<String> = params.iter().map(|p| p.to_string()).collect();
    Ok(Field {
        domain,
        kind,
        name: format!("{name}[{}]", pretty.join(",")),
        regularity,
        singularities,
    })
}

/// Tensor-grid samples with multilinear interpolation.
struct Table {
    ts: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Indexed `[it][ix][iy]`, flattened.
    values: Vec<f64>,
}

impl Table {
    fn parse(text: &str, dim: usize) -> Result<Self> {
        let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let nums: std::result::Result<Vec<f64>, _> =
                cols.iter().map(|c| c.parse::<f64>()).collect();
            let Ok(nums) = nums else {
                if lineno == 0 {
                    continue; // header
                }
                return Err(Error::InvalidParameter(format!(
                    "line {}: non-numeric entry",
                    lineno + 1
                )));
            };
            let row = match (dim, nums.len()) {
                (1, 3) => (nums[0], nums[1], 0.0, nums[2]),
                (2, 4) => (nums[0], nums[1], nums[2], nums[3]),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "line {}: expected {} columns",
                        lineno + 1,
                        dim + 2
                    )))
                }
            };
            rows.push(row);
        }
        let axis = |sel: fn(&(f64, f64, f64, f64)) -> f64| {
            let mut v: Vec<f64> = rows.iter().map(sel).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let ts = axis(|r| r.0);
        let xs = axis(|r| r.1);
        let ys = axis(|r| r.2);
        if ts.is_empty() || ts.len() * xs.len() * ys.len() != rows.len() {
            return Err(Error::InvalidParameter(
                "tabulated samples must form a full tensor grid".into(),
            ));
        }
        let mut values = vec![f64::NAN; rows.len()];
        for r in &rows {
            let it = ts.binary_search_by(|v| v.total_cmp(&r.0)).unwrap();
            let ix = xs.binary_search_by(|v| v.total_cmp(&r.1)).unwrap();
            let iy = ys.binary_search_by(|v| v.total_cmp(&r.2)).unwrap();
            values[(it * xs.len() + ix) * ys.len() + iy] = r.3;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParameter(
                "duplicate samples in tabulated field".into(),
            ));
        }
        Ok(Table { ts, xs, ys, values })
    }

    fn interpolate(&self, t: f64, p: Point) -> f64 {
        let (it, wt) = bracket(&self.ts, t);
        let (ix, wx) = bracket(&self.xs, p.x);
        let (iy, wy) = bracket(&self.ys, p.y);
        let mut acc = 0.0;
        for (dt, ft) in [(0, 1.0 - wt), (1, wt)] {
            for (dx, fx) in [(0, 1.0 - wx), (1, wx)] {
                for (dy, fy) in [(0, 1.0 - wy), (1, wy)] {
                    let w = ft * fx * fy;
                    if w == 0.0 {
                        continue;
                    }
                    let a = (it + dt).min(self.ts.len() - 1);
                    let b = (ix + dx).min(self.xs.len() - 1);
                    let c = (iy + dy).min(self.ys.len() - 1);
                    acc += w * self.values[(a * self.xs.len() + b) * self.ys.len() + c];
                }
            }
        }
        acc
    }
}

/// Lower bracket index and the linear weight of the upper neighbour.
fn bracket(axis: &[f64], v: f64) -> (usize, f64) {
    if axis.len() == 1 || v <= axis[0] {
        return (0, 0.0);
    }
    let last = axis.len() - 1;
    if v >= axis[last] {
        return (last, 0.0);
    }
    let i = axis.partition_point(|a| *a <= v) - 1;
    (i, (v - axis[i]) / (axis[i + 1] - axis[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_closed_forms() {
        let d = DomainSpec::unit(1);
        let c = make_test_field("constant", &[3.0], d).unwrap();
        assert_eq!(c.value(0.3, Point::on_line(0.7)), 3.0);
        assert_eq!(eval_field(&c, 0.5, Point::on_line(0.5)).unwrap(), 3.0);

        let tp = make_test_field("time-power", &[0.25], d).unwrap();
        assert_eq!(tp.value(0.0625, Point::on_line(0.1)), 0.5);
        let lin = make_test_field("time-power", &[1.0], d).unwrap();
        assert_eq!(eval_field(&lin, 0.5, Point::on_line(0.3)).unwrap(), 0.5);

        let sp = make_test_field("space-power", &[2.0, 0.0], d).unwrap();
        assert_eq!(eval_field(&sp, 0.2, Point::on_line(0.5)).unwrap(), 0.25);

        let ts = make_test_field("tensor-singular", &[0.25], d).unwrap();
        let v = ts.value(0.0625, Point::on_line(0.5));
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn corpus_errors() {
        let d = DomainSpec::unit(1);
        assert!(matches!(
            make_test_field("sawtooth", &[1.0], d),
            Err(Error::UnknownCorpus(_))
        ));
        assert!(make_test_field("time-power", &[-0.5], d).is_err());
        assert!(make_test_field("time-power", &[0.0], d).is_err());
        assert!(make_test_field("time-power", &[4.5], d).is_err());
        assert!(make_test_field("poly", &[8.0, 0.0], d).is_err());
        assert!(make_test_field("poly", &[1.5, 0.0], d).is_err());
        assert!(make_test_field("poly", &[2.0], d).is_err());
    }

    #[test]
    fn out_of_domain() {
        let d = DomainSpec::unit(2);
        let c = make_test_field("constant", &[1.0], d).unwrap();
        assert!(eval_field(&c, 1.0, Point::new(0.5, 0.5)).is_err());
        assert!(eval_field(&c, -0.1, Point::new(0.5, 0.5)).is_err());
        assert!(eval_field(&c, 0.5, Point::new(1.5, 0.5)).is_err());
        assert!(DomainSpec::new(0.0, 1).is_err());
        assert!(DomainSpec::new(1.0, 3).is_err());
    }

    #[test]
    fn time_power_scaling_identity() {
        let d = DomainSpec::new(4.0, 1).unwrap();
        for alpha in [0.25, 0.5, 1.5, 3.0] {
            let f = make_test_field("time-power", &[alpha], d).unwrap();
            for k in 1..20 {
                let t = 0.09 * k as f64;
                let x = Point::on_line(0.05 * k as f64);
                let lhs = f.value(2.0 * t, x);
                let rhs = 2f64.powf(alpha) * f.value(t, x);
                assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn tabulated_interpolates_bilinear_data() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut text = String::from("t,x,value\n");
        for i in 0..5 {
            for j in 0..5 {
                let (t, x) = (i as f64 / 4.0, j as f64 / 4.0);
                text.push_str(&format!("{t},{x},{}\n", 2.0 * t + x + t * x));
            }
        }
        std::fs::write(&path, text).unwrap();
        let f = Field::from_csv(DomainSpec::unit(1), &path).unwrap();
        let v = f.value(0.3, Point::on_line(0.55));
        assert!((v - (0.6 + 0.55 + 0.3 * 0.55)).abs() < 1e-12);
    }
}
