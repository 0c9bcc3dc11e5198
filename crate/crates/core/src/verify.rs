//! Executable checks of the constant-angle surface properties.
//!
//! Each check measures concrete quantities on a scenario and produces a
//! [`VerificationReport`] with a verdict. Checks whose statement only holds
//! under a premise measure the premise first and report
//! `premise-not-satisfied` (not a failure) when it is violated. All checks
//! are pure: identical inputs give bit-identical reports.
//!
//! Frames along ODE-integrated traces are differentiated with 5-point
//! central differences on the dense trace; symbolic pipelines keep exact
//! derivatives and tighter tolerances.

use std::fmt;

use crate::constructions::{
    closed_form_mean_curvature, plane_curve_surface, ConstructError, PlaneCurveOptions, RuledSpec,
};
use crate::curve::{frenet_with, ConstancyReport, CurveError, CurveN, FrenetOptions};
use crate::expr::DomainError;
use crate::grid;
use crate::linalg;
use crate::surface::{
    constant_angle_report, developability_det, fundamental_forms, geodesic, line_of_curvature,
    normal, shape_operator, Branch, ConstantAngleOptions, SurfaceCurve, SurfaceError,
    SurfaceOptions, SurfacePatch, TangentDirection, TraceEnd, TraceOptions,
};

#[derive(Debug, Clone, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Outcome of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The check's hypothesis is not satisfied by the scenario; the
    /// measured hypothesis violation is reported instead of a pass/fail.
    PremiseNotSatisfied,
    /// The scenario makes the statement empty (e.g. a straight geodesic
    /// has no second frame vector to test).
    Vacuous,
    /// The selected eigenvalue branch vanishes along the trace, so the
    /// orthogonality conclusion does not apply; measured data is reported.
    BranchDegenerate,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::PremiseNotSatisfied => "premise-not-satisfied",
            Verdict::Vacuous => "vacuous",
            Verdict::BranchDegenerate => "branch-degenerate",
        };
        f.write_str(s)
    }
}

/// Fixed-width float rendering with 17 significant digits, used everywhere
/// a report is serialized so identical runs are byte-identical.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Structured evidence for one check.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// Stable identifier of the property being checked.
    pub id: String,
    /// Human-readable description of the scenario.
    pub scenario: String,
    /// Named measured quantities, in insertion order.
    pub measured: Vec<(String, f64)>,
    /// Grid points excluded as singular.
    pub excluded: usize,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn new(id: &str, scenario: String) -> Self {
        VerificationReport {
            id: id.to_string(),
            scenario,
            measured: Vec::new(),
            excluded: 0,
            notes: Vec::new(),
            verdict: Verdict::Pass,
        }
    }

    pub fn measure(&mut self, name: &str, value: f64) {
        self.measured.push((name.to_string(), value));
    }

    /// Looks up a measured quantity by name.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.measured
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "check: {}", self.id)?;
        writeln!(f, "scenario: {}", self.scenario)?;
        writeln!(f, "measured:")?;
        for (name, value) in &self.measured {
            writeln!(f, "  {name} = {}", fmt_f64(*value))?;
        }
        writeln!(f, "excluded: {}", self.excluded)?;
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        write!(f, "verdict: {}", self.verdict)
    }
}

// ---------------------------------------------------------------------------
// Finite differences on dense traces
// ---------------------------------------------------------------------------

// 5-point central first derivative at index k of a uniformly spaced series.
fn fd5_first(samples: &[Vec<f64>], k: usize, h: f64) -> Vec<f64> {
    let dim = samples[k].len();
    (0..dim)
        .map(|i| {
            (-samples[k + 2][i] + 8.0 * samples[k + 1][i] - 8.0 * samples[k - 1][i]
                + samples[k - 2][i])
                / (12.0 * h)
        })
        .collect()
}

fn fd5_second(samples: &[Vec<f64>], k: usize, h: f64) -> Vec<f64> {
    let dim = samples[k].len();
    (0..dim)
        .map(|i| {
            (-samples[k + 2][i] + 16.0 * samples[k + 1][i] - 30.0 * samples[k][i]
                + 16.0 * samples[k - 1][i]
                - samples[k - 2][i])
                / (12.0 * h * h)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Geodesics are V₂-slant curves on a constant-angle surface
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct GeodesicSlantOptions {
    /// Constancy tolerance for ⟨V₂, d⟩ along the ODE trace.
    pub constancy_tol: f64,
    /// Tolerance for the constant-angle premise of the surface.
    pub helix_tol: f64,
    /// Grid used for the premise scan.
    pub premise_grid: (usize, usize),
    /// ‖second-derivative residual‖ below which a trace point counts as
    /// straight and is excluded; a fully straight trace is vacuous.
    pub straight_tol: f64,
    pub trace: TraceOptions,
}

impl Default for GeodesicSlantOptions {
    fn default() -> Self {
        GeodesicSlantOptions {
            constancy_tol: 1e-4,
            helix_tol: 1e-6,
            premise_grid: (16, 16),
            straight_tol: 1e-6,
            trace: TraceOptions::default(),
        }
    }
}

/// Integrates a geodesic on a constant-angle surface and reports the
/// constancy of ⟨V₂, d⟩ along it, with V₂ built from finite differences of
/// the dense trace.
pub fn geodesic_slant(
    p: &SurfacePatch,
    d: &[f64],
    start: (f64, f64),
    dir: &TangentDirection,
    length: f64,
    step: f64,
    opts: &GeodesicSlantOptions,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new(
        "geodesic-slant",
        format!(
            "geodesic of length {length} from (u, v) = ({}, {}), step {step}",
            start.0, start.1
        ),
    );

    let angle = constant_angle_report(
        p,
        d,
        opts.premise_grid,
        &ConstantAngleOptions {
            tol_const: opts.helix_tol,
            absolute: true,
            surface: opts.trace.surface,
        },
    )?;
    report.measure("premise_angle_mean", angle.mean);
    report.measure("premise_angle_deviation", angle.max_deviation);
    report.excluded = angle.excluded;
    if !angle.is_constant() {
        report.verdict = Verdict::PremiseNotSatisfied;
        report
            .notes
            .push("surface does not make a constant angle with d".into());
        return Ok(report);
    }

    let trace = geodesic(p, start, dir, length, step, &opts.trace)?;
    let pts: Vec<Vec<f64>> = trace.samples.iter().map(|s| s.ambient.clone()).collect();
    let h = trace.step;
    let mut values = Vec::new();
    let mut straight = 0usize;
    for k in 2..pts.len().saturating_sub(2) {
        let g1 = fd5_first(&pts, k, h);
        let g2 = fd5_second(&pts, k, h);
        let t = linalg::scale(&g1, 1.0 / linalg::norm(&g1));
        let mut e2 = g2.clone();
        linalg::axpy(&mut e2, -linalg::dot(&g2, &t), &t);
        let n2 = linalg::norm(&e2);
        if n2 < opts.straight_tol {
            straight += 1;
            continue;
        }
        values.push(linalg::dot(&linalg::scale(&e2, 1.0 / n2), d));
    }
    if values.is_empty() {
        report.verdict = Verdict::Vacuous;
        report
            .notes
            .push("geodesic is a straight line; no principal normal to test".into());
        return Ok(report);
    }
    if straight > 0 {
        report
            .notes
            .push(format!("{straight} near-straight trace points excluded"));
    }
    let constancy = ConstancyReport::from_values(values, opts.constancy_tol, false, straight);
    report.measure("slant_mean", constancy.mean);
    report.measure("slant_deviation", constancy.max_deviation);
    report.verdict = if constancy.is_constant() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

// ---------------------------------------------------------------------------
// Curves whose last frame vector is the surface normal are slant curves
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct VnSlantOptions {
    /// Max allowed min(‖Vₙ − ξ‖, ‖Vₙ + ξ‖) for the premise to count.
    pub premise_tol: f64,
    pub constancy_tol: f64,
    pub samples: usize,
    pub frenet: FrenetOptions,
    pub surface: SurfaceOptions,
}

impl Default for VnSlantOptions {
    fn default() -> Self {
        VnSlantOptions {
            premise_tol: 1e-4,
            constancy_tol: 1e-4,
            samples: 200,
            frenet: FrenetOptions::default(),
            surface: SurfaceOptions::default(),
        }
    }
}

/// For a curve on the surface, measures how far its last frame vector is
/// from ±(surface normal); when they agree, reports the constancy of
/// |⟨Vₙ, d⟩| along the curve.
pub fn vn_normal_slant(
    p: &SurfacePatch,
    d: &[f64],
    curve: &SurfaceCurve,
    opts: &VnSlantOptions,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new(
        "normal-frame-slant",
        format!(
            "parameter curve on the surface over [{}, {}]",
            curve.domain.0, curve.domain.1
        ),
    );
    let ambient = curve.ambient(p)?;
    let n = ambient.dim();
    let ts = grid::linspace(curve.domain.0, curve.domain.1, opts.samples.max(2));
    let tower: Vec<Vec<crate::expr::Expr>> = Vec::new();
    let _ = tower;
    let evals = grid::map_line(&ts, |t| -> Result<(f64, f64), VerifyError> {
        let fr = frenet_with(&ambient, t, &opts.frenet)?;
        let vn = &fr.frame[n - 1];
        let (u, v) = curve.at(t)?;
        let xi = normal(p, u, v, &opts.surface)?;
        let d_minus = linalg::norm(&linalg::sub(vn, &xi));
        let d_plus = linalg::norm(&linalg::add(vn, &xi));
        Ok((d_minus.min(d_plus), linalg::dot(vn, d).abs()))
    });
    let mut premise_dist: f64 = 0.0;
    let mut values = Vec::with_capacity(ts.len());
    for e in evals {
        let (dist, dot) = e?;
        premise_dist = premise_dist.max(dist);
        values.push(dot);
    }
    report.measure("premise_frame_normal_distance", premise_dist);
    if premise_dist > opts.premise_tol {
        report.verdict = Verdict::PremiseNotSatisfied;
        report
            .notes
            .push("last frame vector is not the surface normal along the curve".into());
        return Ok(report);
    }
    let constancy = ConstancyReport::from_values(values, opts.constancy_tol, true, 0);
    report.measure("slant_mean", constancy.mean);
    report.measure("slant_deviation", constancy.max_deviation);
    report.verdict = if constancy.is_constant() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

// ---------------------------------------------------------------------------
// Lines of curvature are orthogonal to the fixed direction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct CurvatureLineOrthOptions {
    /// Eigenvalue floor for the branch to carry the conclusion.
    pub tol_lambda: f64,
    /// Pass bound on max |⟨T, d⟩| along the trace.
    pub orth_tol: f64,
    pub helix_tol: f64,
    pub premise_grid: (usize, usize),
    pub trace: TraceOptions,
}

impl Default for CurvatureLineOrthOptions {
    fn default() -> Self {
        CurvatureLineOrthOptions {
            tol_lambda: 1e-6,
            orth_tol: 1e-5,
            helix_tol: 1e-6,
            premise_grid: (16, 16),
            trace: TraceOptions::default(),
        }
    }
}

/// Traces a line of curvature on a constant-angle surface and reports
/// max |⟨T, d⟩| along it. A branch whose eigenvalue falls below
/// `tol_lambda` is reported as branch-degenerate (the conclusion needs a
/// nonzero eigenvalue), with the tangent-axis angle measured instead.
pub fn curvature_line_orthogonality(
    p: &SurfacePatch,
    d: &[f64],
    start: (f64, f64),
    branch: Branch,
    length: f64,
    step: f64,
    opts: &CurvatureLineOrthOptions,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new(
        "curvature-line-orthogonality",
        format!(
            "curvature line ({:?} branch) of length {length} from (u, v) = ({}, {})",
            branch, start.0, start.1
        ),
    );

    let angle = constant_angle_report(
        p,
        d,
        opts.premise_grid,
        &ConstantAngleOptions {
            tol_const: opts.helix_tol,
            absolute: true,
            surface: opts.trace.surface,
        },
    )?;
    report.measure("premise_angle_deviation", angle.max_deviation);
    report.excluded = angle.excluded;
    if !angle.is_constant() {
        report.verdict = Verdict::PremiseNotSatisfied;
        report
            .notes
            .push("surface does not make a constant angle with d".into());
        return Ok(report);
    }

    let shape = shape_operator(p, start.0, start.1, &opts.trace.surface)?;
    let pick = match branch {
        Branch::Max => 0,
        Branch::Min => 1,
    };
    let lambda0 = shape.eigenvalues[pick];
    report.measure("lambda_at_start", lambda0);
    let dirs = shape.directions.as_ref().ok_or(SurfaceError::Umbilic {
        u: start.0,
        v: start.1,
    })?;
    if lambda0.abs() <= opts.tol_lambda {
        report.measure(
            "branch_direction_axis_dot",
            linalg::dot(&dirs[pick].ambient, d).abs(),
        );
        report.verdict = Verdict::BranchDegenerate;
        report.notes.push(
            "selected branch has vanishing principal curvature; orthogonality not implied".into(),
        );
        return Ok(report);
    }

    let trace = line_of_curvature(p, start, branch, length, step, &opts.trace)?;
    if let TraceEnd::UmbilicStop { s, .. } = trace.end {
        report
            .notes
            .push(format!("trace truncated at an umbilic point (s = {s})"));
    }
    let min_lambda = trace
        .samples
        .iter()
        .map(|s| s.lambda.abs())
        .fold(f64::INFINITY, f64::min);
    report.measure("min_abs_lambda", min_lambda);
    if min_lambda <= opts.tol_lambda {
        report.verdict = Verdict::BranchDegenerate;
        report
            .notes
            .push("principal curvature vanished along the trace; check skipped".into());
        return Ok(report);
    }

    let pts: Vec<Vec<f64>> = trace.samples.iter().map(|s| s.ambient.clone()).collect();
    let mut max_dot: f64 = 0.0;
    for k in 2..pts.len().saturating_sub(2) {
        let g1 = fd5_first(&pts, k, trace.step);
        let t = linalg::scale(&g1, 1.0 / linalg::norm(&g1));
        max_dot = max_dot.max(linalg::dot(&t, d).abs());
    }
    report.measure("max_tangent_axis_dot", max_dot);
    report.verdict = if max_dot <= opts.orth_tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

// ---------------------------------------------------------------------------
// Developable ⇔ directrix is a line of curvature
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct DevEquivOptions {
    /// A side "holds" when its residual is at or below this.
    pub hold_tol: f64,
    /// A side "fails" when its residual is at or above this.
    pub fail_tol: f64,
    pub t_samples: usize,
    pub s_samples: usize,
}

impl Default for DevEquivOptions {
    fn default() -> Self {
        DevEquivOptions {
            hold_tol: 1e-8,
            fail_tol: 1e-3,
            t_samples: 50,
            s_samples: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Holds,
    Fails,
    Indeterminate,
}

fn classify(residual: f64, opts: &DevEquivOptions) -> Side {
    if residual <= opts.hold_tol {
        Side::Holds
    } else if residual >= opts.fail_tol {
        Side::Fails
    } else {
        Side::Indeterminate
    }
}

/// Measures both sides of the equivalence for a ruled surface over a
/// hypersurface directrix:
///
/// (a) curvature-line premise: residual of (N∘β)′ − λβ′ after a
///     least-squares λ at each sample;
/// (b) developability: the det(T, X, X′) test in ambient dimension 3, or
///     the Gram residual of {Φ_t, T} in higher dimension.
///
/// The verdict is pass exactly when the two sides agree (both hold or both
/// fail).
pub fn developability_equivalence(
    spec: &RuledSpec,
    opts: &DevEquivOptions,
) -> Result<VerificationReport, VerifyError> {
    let n = spec.dim();
    let mut report = VerificationReport::new(
        "developability-equivalence",
        format!("ruled surface over a directrix in ambient dimension {n}"),
    );

    let (a, b) = spec.directrix.domain();
    let ts = grid::linspace(a, b, opts.t_samples.max(2));
    let param = spec.directrix.param().to_string();
    let normal_exprs = spec.normal_exprs();
    let normal_d: Vec<crate::expr::Expr> = normal_exprs
        .iter()
        .map(|e| e.differentiate(&param).expect("declared parameter"))
        .collect();

    // (a) line-of-curvature premise residual
    let mut premise_max: f64 = 0.0;
    for &t in &ts {
        let np: Vec<f64> = normal_d
            .iter()
            .map(|e| e.evaluate(&[t]))
            .collect::<Result<_, _>>()
            .map_err(DomainError::from)?;
        let d1 = spec.directrix.derivatives(t, 1)?;
        let beta_p = &d1[0];
        let lambda = linalg::dot(&np, beta_p) / linalg::dot(beta_p, beta_p);
        let mut res = np.clone();
        linalg::axpy(&mut res, -lambda, beta_p);
        let rel = linalg::norm(&res) / linalg::norm(&np).max(1.0);
        premise_max = premise_max.max(rel);
    }
    report.measure("premise_residual_max", premise_max);

    // (b) developability measure
    let dev_max = if n == 3 {
        let beta3 = spec.directrix_embedded();
        let ruling = spec.ruling_exprs_embedded();
        let mut m: f64 = 0.0;
        for &t in &ts {
            m = m.max(developability_det(&beta3, &ruling, t)?.abs());
        }
        report.measure("det_max", m);
        m
    } else {
        let field = spec.field_exprs();
        let field_d: Vec<crate::expr::Expr> = field
            .iter()
            .map(|e| e.differentiate(&param).expect("declared parameter"))
            .collect();
        let ss = grid::linspace(spec.s_domain.0, spec.s_domain.1, opts.s_samples.max(2));
        let st = spec.theta.sin();
        let mut m: f64 = 0.0;
        for &t in &ts {
            let d1 = spec.directrix.derivatives(t, 1)?;
            let tangent = linalg::normalize(&d1[0], 1e-12).ok_or(CurveError::NonRegular {
                t,
                speed: linalg::norm(&d1[0]),
            })?;
            let fp: Vec<f64> = field_d
                .iter()
                .map(|e| e.evaluate(&[t]))
                .collect::<Result<_, _>>()
                .map_err(DomainError::from)?;
            for &s in &ss {
                // Φ_t = β′ + s·sinθ·N′ (the appended coordinate is constant)
                let mut phi_t = d1[0].clone();
                linalg::axpy(&mut phi_t, s * st, &fp);
                let mut res = phi_t.clone();
                linalg::axpy(&mut res, -linalg::dot(&phi_t, &tangent), &tangent);
                let rel = linalg::norm(&res) / linalg::norm(&phi_t).max(1.0);
                m = m.max(rel);
            }
        }
        report.measure("collinearity_residual_max", m);
        m
    };

    let side_a = classify(premise_max, opts);
    let side_b = classify(dev_max, opts);
    if side_a == Side::Indeterminate || side_b == Side::Indeterminate {
        report
            .notes
            .push("a residual falls between the hold and fail thresholds".into());
    }
    report.verdict = if side_a != Side::Indeterminate && side_a == side_b {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report.notes.push(format!(
        "curvature-line premise {}; developability {}",
        match side_a {
            Side::Holds => "holds",
            Side::Fails => "fails",
            Side::Indeterminate => "indeterminate",
        },
        match side_b {
            Side::Holds => "holds",
            Side::Fails => "fails",
            Side::Indeterminate => "indeterminate",
        }
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Consolidated checks of the plane-curve surface
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct PlaneCurveChecksOptions {
    /// Sub-check 1: |⟨Z, B⟩| ≡ sin θ.
    pub angle_tol: f64,
    /// Sub-check 2: |K| bound on regular grid points.
    pub gauss_tol: f64,
    /// Sub-check 3: |det(T, X, X′)| bound.
    pub det_tol: f64,
    /// Sub-check 4: |H| vs the closed form.
    pub mean_tol: f64,
    /// θ = π/2 case: max |H| bound.
    pub minimal_tol: f64,
    /// θ = π/2 case: max distance from the curve plane.
    pub plane_tol: f64,
    /// θ ≠ π/2 case: max |H| must reach this (surface is not minimal).
    pub nonminimal_floor: f64,
    /// Skip the closed-form comparison where 1 − k₁ v sinθ is below this.
    pub mean_check_min_denom: f64,
    pub det_samples: usize,
    pub construction: PlaneCurveOptions,
    pub surface: SurfaceOptions,
}

impl Default for PlaneCurveChecksOptions {
    fn default() -> Self {
        PlaneCurveChecksOptions {
            angle_tol: 1e-8,
            gauss_tol: 1e-8,
            det_tol: 1e-10,
            mean_tol: 1e-8,
            minimal_tol: 1e-10,
            plane_tol: 1e-10,
            nonminimal_floor: 0.1,
            mean_check_min_denom: 1e-3,
            det_samples: 100,
            construction: PlaneCurveOptions::default(),
            surface: SurfaceOptions::default(),
        }
    }
}

/// Builds the plane-curve surface for (α, θ) and runs the consolidated
/// sub-checks: constant normal angle, zero Gauss curvature, ruling
/// developability, and the closed-form mean curvature (with the minimal /
/// planar characterization at θ = π/2).
pub fn plane_curve_surface_checks(
    alpha: &CurveN,
    theta: f64,
    v_domain: (f64, f64),
    grid_size: (usize, usize),
    opts: &PlaneCurveChecksOptions,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new(
        "plane-curve-surface",
        format!(
            "surface generated by a plane curve, theta = {theta}, v in [{}, {}]",
            v_domain.0, v_domain.1
        ),
    );
    let built = plane_curve_surface(alpha, theta, v_domain, &opts.construction)?;
    let patch = &built.patch;
    let is_right_angle = (theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12;

    // (1) constant angle with the binormal
    let angle = constant_angle_report(
        patch,
        &built.binormal,
        grid_size,
        &ConstantAngleOptions {
            tol_const: opts.angle_tol,
            absolute: true,
            surface: opts.surface,
        },
    )?;
    report.measure("angle_mean", angle.mean);
    report.measure("angle_deviation", angle.max_deviation);
    report.measure("angle_error_vs_sin_theta", (angle.mean - theta.sin()).abs());
    report.excluded = angle.excluded;
    let pass1 = angle.is_constant() && (angle.mean - theta.sin()).abs() <= opts.angle_tol;

    // (2) + (4) grid scan of the fundamental forms
    let [ud, vd] = patch.domain();
    let us = grid::linspace(ud.0, ud.1, grid_size.0.max(2));
    let vs = grid::linspace(vd.0, vd.1, grid_size.1.max(2));
    let k1s: Vec<f64> = {
        let evals = grid::map_line(&us, |u| {
            frenet_with(alpha, u, &opts.construction.frenet).map(|fr| fr.curvatures[0])
        });
        let mut out = Vec::with_capacity(evals.len());
        for e in evals {
            out.push(e?);
        }
        out
    };
    struct Cell {
        gauss_abs: f64,
        mean_abs: f64,
        mean_err: Option<f64>,
        plane_dist: f64,
    }
    let base = alpha.position(alpha.domain().0)?;
    let cells = grid::map_grid(&us, &vs, |u, v| -> Result<Option<Cell>, VerifyError> {
        match fundamental_forms(patch, u, v, &opts.surface) {
            Ok(ff) => {
                let iu = us.iter().position(|x| *x == u).unwrap();
                let k1 = k1s[iu];
                let denom = 1.0 - k1 * v * theta.sin();
                let mean_err = if denom > opts.mean_check_min_denom {
                    let closed = closed_form_mean_curvature(k1, theta, v)?;
                    Some((ff.mean.abs() - closed.abs()).abs())
                } else {
                    None
                };
                let pos = patch.position(u, v)?;
                let plane_dist =
                    linalg::dot(&linalg::sub(&pos, &base), &built.binormal).abs();
                Ok(Some(Cell {
                    gauss_abs: ff.gauss.abs(),
                    mean_abs: ff.mean.abs(),
                    mean_err,
                    plane_dist,
                }))
            }
            Err(SurfaceError::Singular { .. }) => Ok(None),
            Err(other) => Err(VerifyError::from(other)),
        }
    });
    let mut gauss_max: f64 = 0.0;
    let mut mean_err_max: f64 = 0.0;
    let mut mean_abs_min = f64::INFINITY;
    let mut mean_abs_max: f64 = 0.0;
    let mut plane_dist_max: f64 = 0.0;
    let mut excluded = 0usize;
    let mut mean_skipped = 0usize;
    for c in cells {
        match c? {
            Some(cell) => {
                gauss_max = gauss_max.max(cell.gauss_abs);
                mean_abs_min = mean_abs_min.min(cell.mean_abs);
                mean_abs_max = mean_abs_max.max(cell.mean_abs);
                plane_dist_max = plane_dist_max.max(cell.plane_dist);
                match cell.mean_err {
                    Some(e) => mean_err_max = mean_err_max.max(e),
                    None => mean_skipped += 1,
                }
            }
            None => excluded += 1,
        }
    }
    report.excluded += excluded;
    report.measure("gauss_abs_max", gauss_max);
    let pass2 = gauss_max <= opts.gauss_tol;

    // (3) developability determinant along the rulings
    let ruling = built.ruling_exprs();
    let det_ts = grid::linspace(alpha.domain().0, alpha.domain().1, opts.det_samples.max(2));
    let mut det_max: f64 = 0.0;
    for &t in &det_ts {
        det_max = det_max.max(developability_det(alpha, &ruling, t)?.abs());
    }
    report.measure("det_max", det_max);
    let pass3 = det_max <= opts.det_tol;

    // (4) mean curvature: closed form off the right angle, minimal + planar
    // at it
    report.measure("mean_closed_form_error_max", mean_err_max);
    report.measure("mean_abs_min", mean_abs_min);
    report.measure("mean_abs_max", mean_abs_max);
    report.measure("plane_distance_max", plane_dist_max);
    if mean_skipped > 0 {
        report.notes.push(format!(
            "{mean_skipped} points skipped in the closed-form comparison (near-singular denominator)"
        ));
    }
    let pass4 = if is_right_angle {
        mean_abs_max <= opts.minimal_tol && plane_dist_max <= opts.plane_tol
    } else {
        mean_err_max <= opts.mean_tol && mean_abs_max >= opts.nonminimal_floor
    };

    report.verdict = if pass1 && pass2 && pass3 && pass4 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    if !pass1 {
        report.notes.push("constant-angle sub-check failed".into());
    }
    if !pass2 {
        report.notes.push("zero-Gauss-curvature sub-check failed".into());
    }
    if !pass3 {
        report.notes.push("developability sub-check failed".into());
    }
    if !pass4 {
        report.notes.push("mean-curvature sub-check failed".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::NormalField;
    use crate::expr::Expr;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

    fn cylinder() -> SurfacePatch {
        SurfacePatch::parse(
            &["cos(u)", "sin(u)", "v"],
            ("u", "v"),
            [(-20.0, 20.0), (-20.0, 20.0)],
        )
        .unwrap()
    }

    fn sample_plane_curve() -> CurveN {
        CurveN::parse(
            &["(3/5)*sin(u)", "1 + cos(u)", "(4/5)*sin(u)"],
            "u",
            (0.0, 5.0 * PI),
        )
        .unwrap()
    }

    #[test]
    fn cylinder_oblique_geodesic_slant() {
        let report = geodesic_slant(
            &cylinder(),
            &[0.0, 0.0, 1.0],
            (0.0, 0.0),
            &TangentDirection::Uv([1.0, 1.0]),
            10.0,
            1e-3,
            &GeodesicSlantOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.get("slant_deviation").unwrap() < 1e-5);
        assert!(report.get("slant_mean").unwrap().abs() < 1e-5);
    }

    #[test]
    fn plane_geodesic_is_vacuous() {
        let plane = SurfacePatch::parse(
            &["u", "v", "0"],
            ("u", "v"),
            [(-5.0, 5.0), (-5.0, 5.0)],
        )
        .unwrap();
        let report = geodesic_slant(
            &plane,
            &[0.0, 0.0, 1.0],
            (0.0, 0.0),
            &TangentDirection::Uv([1.0, 0.3]),
            2.0,
            1e-3,
            &GeodesicSlantOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Vacuous);
    }

    #[test]
    fn vn_slant_premise_violation_is_not_failure() {
        // the circle v = 0 on the cylinder has binormal ±(0,0,1) but the
        // surface normal is radial
        let curve = SurfaceCurve::parse("t", "0", "t", (0.0, 2.0 * PI)).unwrap();
        let report = vn_normal_slant(
            &cylinder(),
            &[0.0, 0.0, 1.0],
            &curve,
            &VnSlantOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::PremiseNotSatisfied);
        assert!(report.get("premise_frame_normal_distance").unwrap() > 0.5);
    }

    #[test]
    fn vn_slant_passes_when_frame_matches_normal() {
        // a circle drawn in the plane z = 0: its binormal is ±e₃, which is
        // the plane's normal, so the premise holds exactly
        let plane = SurfacePatch::parse(
            &["u", "v", "0"],
            ("u", "v"),
            [(-5.0, 5.0), (-5.0, 5.0)],
        )
        .unwrap();
        let curve = SurfaceCurve::parse("cos(t)", "sin(t)", "t", (0.0, 2.0 * PI)).unwrap();
        let report = vn_normal_slant(
            &plane,
            &[0.0, 0.0, 1.0],
            &curve,
            &VnSlantOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!((report.get("slant_mean").unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cylinder_curvature_line_orthogonality() {
        let report = curvature_line_orthogonality(
            &cylinder(),
            &[0.0, 0.0, 1.0],
            (0.2, 0.1),
            Branch::Max,
            2.0,
            1e-3,
            &CurvatureLineOrthOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.get("max_tangent_axis_dot").unwrap() < 1e-9);

        let report = curvature_line_orthogonality(
            &cylinder(),
            &[0.0, 0.0, 1.0],
            (0.2, 0.1),
            Branch::Min,
            2.0,
            1e-3,
            &CurvatureLineOrthOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::BranchDegenerate);
        // the ruling direction is the axis itself
        assert!((report.get("branch_direction_axis_dot").unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn circle_directrix_equivalence_holds() {
        let circle = CurveN::parse(&["cos(t)", "sin(t)"], "t", (0.0, 2.0 * PI)).unwrap();
        let spec = RuledSpec::new(circle, NormalField::SpherePosition, FRAC_PI_6, (0.0, 1.0))
            .unwrap();
        let report = developability_equivalence(&spec, &DevEquivOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.get("premise_residual_max").unwrap() < 1e-10);
        assert!(report.get("det_max").unwrap() < 1e-10);
    }

    #[test]
    fn great_circle_in_r4_equivalence_holds() {
        let great = CurveN::parse(&["cos(t)", "sin(t)", "0"], "t", (0.0, 2.0 * PI)).unwrap();
        let spec = RuledSpec::new(great, NormalField::SpherePosition, FRAC_PI_4, (0.0, 1.0))
            .unwrap();
        let report = developability_equivalence(&spec, &DevEquivOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.get("premise_residual_max").unwrap() < 1e-10);
        assert!(report.get("collinearity_residual_max").unwrap() < 1e-10);
    }

    #[test]
    fn tangent_ruling_variant_breaks_the_equivalence() {
        // With rulings tilted towards β′ instead of the hypersurface
        // normal, the directrix is still a curvature line but the surface
        // is not developable; the sides disagree and the check fails.
        let circle = CurveN::parse(&["cos(t)", "sin(t)"], "t", (0.0, 2.0 * PI)).unwrap();
        let mut spec =
            RuledSpec::new(circle, NormalField::SpherePosition, FRAC_PI_6, (0.0, 1.0)).unwrap();
        spec.ruling = crate::constructions::RulingVariant::DirectrixTangent;
        let report = developability_equivalence(&spec, &DevEquivOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        let det = report.get("det_max").unwrap();
        assert!((det - FRAC_PI_6.sin() * FRAC_PI_6.cos()).abs() < 1e-12);
    }

    #[test]
    fn sample_surface_consolidated_checks_pass() {
        let report = plane_curve_surface_checks(
            &sample_plane_curve(),
            FRAC_PI_6,
            (0.0, PI),
            (40, 15),
            &PlaneCurveChecksOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
        assert!((report.get("angle_mean").unwrap() - 0.5).abs() < 1e-9);
        assert!(report.get("gauss_abs_max").unwrap() < 1e-8);
        assert!(report.get("det_max").unwrap() < 1e-10);
    }

    #[test]
    fn ellipse_surface_checks_pass() {
        let ellipse = CurveN::parse(&["2*cos(u)", "sin(u)", "0"], "u", (0.0, 2.0 * PI)).unwrap();
        let report = plane_curve_surface_checks(
            &ellipse,
            FRAC_PI_4,
            (0.0, 0.4),
            (30, 10),
            &PlaneCurveChecksOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
    }

    #[test]
    fn right_angle_surface_is_minimal_and_planar() {
        let report = plane_curve_surface_checks(
            &sample_plane_curve(),
            FRAC_PI_2,
            (0.0, 0.9),
            (30, 10),
            &PlaneCurveChecksOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report}");
        assert!(report.get("mean_abs_max").unwrap() <= 1e-10);
        assert!(report.get("plane_distance_max").unwrap() <= 1e-10);
    }

    #[test]
    fn reports_are_deterministic() {
        let run = || {
            plane_curve_surface_checks(
                &sample_plane_curve(),
                FRAC_PI_6,
                (0.0, PI),
                (12, 8),
                &PlaneCurveChecksOptions::default(),
            )
            .unwrap()
            .to_string()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn report_rendering_shape() {
        let mut r = VerificationReport::new("demo", "scenario".into());
        r.measure("x", 0.5);
        let text = r.to_string();
        assert!(text.starts_with("check: demo\n"));
        assert!(text.contains("x = 5.0000000000000000e-1"));
        assert!(text.ends_with("verdict: pass"));
    }

    #[test]
    fn expr_helper_available() {
        // keep the Expr import honest (used by scenario builders downstream)
        let e = Expr::parse("1", &[]).unwrap();
        assert_eq!(e.evaluate(&[]).unwrap(), 1.0);
    }
}
