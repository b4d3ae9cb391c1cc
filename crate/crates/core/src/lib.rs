//! Adaptive approximation of functions of time and space.
//!
//! A target `f(t, x)` on `[0, T) x Omega` is approximated by functions that
//! are piecewise polynomial on a dyadic partition of `[0, T)` and continuous
//! piecewise polynomial on a newest-vertex-bisection mesh of `Omega` per time
//! interval. The modules build on each other:
//!
//! * [`field`]: the function corpus, tabulated fields and domains.
//! * [`quadrature`]: Gauss rules, graded time panels and spatial grids.
//! * [`polyspace`]: orthonormal time bases, projections, the Jackson construction.
//! * [`smoothness`]: moduli of smoothness, discrete Besov seminorms, Whitney ratios.
//! * [`mesh1d`]: dyadic time partitions and greedy refinement.
//! * [`meshnd`]: bisection meshes, Lagrange elements, spatial greedy, overlay.
//! * [`spacetime`]: the fully discrete two-step construction.
//! * [`harness`]: experiment configs, sweeps, rate fits and reports.
//!
//! ```
//! use stadapt::field::{make_test_field, DomainSpec};
//! use stadapt::spacetime::{build_fully_discrete, BuildOptions};
//!
//! let f = make_test_field("tensor-singular", &[0.5], DomainSpec::unit(1))?;
//! let build = build_fully_discrete(&f, 0.1, 1, 2, &BuildOptions::default())?;
//! assert!(build.report.global_error <= 0.1);
//! # Ok::<(), stadapt::Error>(())
//! ```

pub mod curve;
pub mod error;
pub mod field;
pub mod harness;
pub mod mesh1d;
pub mod meshnd;
pub mod polyspace;
pub mod quadrature;
pub mod smoothness;
pub mod spacetime;

pub use error::{Error, Result};
pub use field::{make_test_field, DomainSpec, Field, Point};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/smoothness.md")]
    mod smoothness {}
    #[doc = include_str!("../../../book/src/greedy_time.md")]
    mod greedy_time {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    mod meshes {}
    #[doc = include_str!("../../../book/src/fully_discrete.md")]
    mod fully_discrete {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
