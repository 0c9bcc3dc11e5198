//! Differential geometry of curves and constant-angle ruled surfaces in
//! Euclidean n-space.
//!
//! The crate is organised bottom-up:
//!
//! - [`expr`] — a small symbolic expression language (parse, differentiate,
//!   evaluate) used to define curves and surfaces exactly.
//! - [`linalg`] — dense helpers for small n-vectors: Gram-Schmidt,
//!   determinants, the generalized (n−1)-ary cross product.
//! - [`curve`] — Frenet frames, higher curvatures, arc-length
//!   reparametrization and slant-helix angle reports for curves in Eⁿ.
//! - [`surface`] — fundamental forms, shape operator, constant-angle tests,
//!   geodesics and lines of curvature for two-parameter patches.
//! - [`constructions`] — the constant-angle extrusion, ruled surfaces over a
//!   hypersurface directrix, and the surface generated by a plane curve.
//! - [`verify`] — numeric checks that the constructed surfaces have the
//!   properties the constructions promise, as structured reports.
//!
//! Grid scans and trace batches are data-parallel; with the default
//! `parallel` feature they run on rayon, without it they fall back to
//! sequential loops with identical results.

pub mod constructions;
pub mod curve;
pub mod expr;
pub mod grid;
pub mod linalg;
pub mod surface;
pub mod verify;

pub use curve::{
    arc_length_parametrization, frenet, slant_helix_report, ConstancyReport, CurveError, CurveN,
    FrenetData, FrenetOptions,
};
pub use expr::{DomainError, Expr, ParseError};
pub use grid::configure_threads;
pub use surface::{
    constant_angle_report, developability_det, fundamental_forms, geodesic, line_of_curvature,
    shape_operator, FundamentalForms, SurfaceError, SurfaceOptions, SurfacePatch,
};
