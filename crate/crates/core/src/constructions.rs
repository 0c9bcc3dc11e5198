//! Constant-angle surface constructions.
//!
//! Three families:
//!
//! - [`extrude`]: sweep a generator hypersurface along the tilted field
//!   `sin(θ)·N + cos(θ)·d`, where `d` is the new last coordinate axis. The
//!   result makes the constant angle θ with `d`.
//! - [`ruled_surface`]: the ruled surface over a directrix on a generator
//!   hypersurface, with rulings `sin(θ)·N(β(t)) + cos(θ)·d`.
//! - [`plane_curve_surface`]: the ruled surface spanned by a plane curve
//!   and the tilt of its principal normal towards its (constant) binormal.
//!
//! Generators are kept exact at desk scale: plane curves in ℝ² (normals by
//! rotating the tangent) and unit spheres given implicitly (normals are the
//! position vectors).

use std::f64::consts::FRAC_PI_2;

use crate::curve::{frenet_with, CurveError, CurveN, FrenetOptions};
use crate::expr::{DomainError, Expr};
use crate::grid;
use crate::linalg;
use crate::surface::{constant_angle_report, ConstantAngleOptions, SurfaceError, SurfacePatch};
use crate::curve::ConstancyReport;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ConstructError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("theta must lie in [0, pi/2], got {0}")]
    BadTheta(f64),
    #[error("generator must be a curve in the plane, got dimension {0}")]
    GeneratorNotPlaneCurve(usize),
    #[error("curve is not planar: last frame vector drifts by {max_dev:.3e}")]
    NotPlanar { max_dev: f64 },
    #[error("curvature too small at t = {t} (k1 = {k1:.3e}); need a non-straight curve")]
    CurvatureTooSmall { t: f64, k1: f64 },
    #[error("normal field is not unit at t = {t} (norm {norm})")]
    NormalNotUnit { t: f64, norm: f64 },
    #[error("normal field is not orthogonal to the directrix at t = {t} (dot {dot:.3e})")]
    InvalidNormal { t: f64, dot: f64 },
    #[error("mean-curvature denominator 1 - k1*v*sin(theta) = {0:.3e} is singular")]
    SingularDenominator(f64),
}

fn check_theta(theta: f64) -> Result<(), ConstructError> {
    if !(0.0..=FRAC_PI_2 + 1e-15).contains(&theta) {
        return Err(ConstructError::BadTheta(theta));
    }
    Ok(())
}

/// Picks a parameter name not already used by the generator.
fn fresh_param(used: &[&str], base: &str) -> String {
    let mut name = base.to_string();
    while used.contains(&name.as_str()) {
        name.push('_');
    }
    name
}

// ---------------------------------------------------------------------------
// Extrusion
// ---------------------------------------------------------------------------

/// The generator hypersurface of an extrusion.
#[derive(Debug, Clone)]
pub enum Generator {
    /// A regular curve in ℝ²; extrusion yields a surface in ℝ³.
    PlaneCurve(CurveN),
    /// A patch in ℝ³; extrusion yields a 3-fold in ℝ⁴, evaluated pointwise.
    Patch(SurfacePatch),
}

/// Extrusion of a generator along `sin(θ)·N + cos(θ)·d` with `d` the new
/// last coordinate axis.
#[derive(Debug, Clone)]
pub struct ExtrusionSpec {
    pub generator: Generator,
    /// Constant tilt angle, in [0, π/2].
    pub theta: f64,
    pub s_domain: (f64, f64),
}

impl ExtrusionSpec {
    pub fn new(generator: Generator, theta: f64, s_domain: (f64, f64)) -> Result<Self, ConstructError> {
        check_theta(theta)?;
        Ok(ExtrusionSpec {
            generator,
            theta,
            s_domain,
        })
    }

    /// Ambient dimension of the extruded object.
    pub fn dim(&self) -> usize {
        match &self.generator {
            Generator::PlaneCurve(_) => 3,
            Generator::Patch(_) => 4,
        }
    }
}

/// Unit normal of a plane curve as expressions: the tangent rotated so the
/// normal of a counterclockwise circle points outward.
fn plane_curve_normal_exprs(c: &CurveN) -> Vec<Expr> {
    let param = c.param().to_string();
    let d: Vec<Expr> = c
        .components()
        .iter()
        .map(|e| e.differentiate(&param).expect("declared parameter"))
        .collect();
    let speed = (&(&d[0] * &d[0]) + &(&d[1] * &d[1])).sqrt();
    // generalized cross in ℝ²: w(v) = (v_y, −v_x)
    vec![&d[1] / &speed, &(-&d[0]) / &speed]
}

/// Builds the extruded patch for a plane-curve generator:
/// `(x(t), s) ↦ (x + s·sin(θ)·N(x), s·cos(θ))`.
pub fn extrude(spec: &ExtrusionSpec) -> Result<SurfacePatch, ConstructError> {
    let Generator::PlaneCurve(c) = &spec.generator else {
        return Err(ConstructError::GeneratorNotPlaneCurve(4));
    };
    if c.dim() != 2 {
        return Err(ConstructError::GeneratorNotPlaneCurve(c.dim()));
    }
    let normal = plane_curve_normal_exprs(c);
    let t_name = c.param().to_string();
    let s_name = fresh_param(&[&t_name], "s");
    let params: Vec<&str> = vec![&t_name, &s_name];
    let seed = Expr::parse("0", &params).expect("valid params");
    let t2 = seed.lift_param(&t_name);
    let s2 = seed.lift_param(&s_name);
    let lift1 = |e: &Expr| e.substitute(std::slice::from_ref(&t2));

    let sin_t = seed.lift(spec.theta.sin());
    let cos_t = seed.lift(spec.theta.cos());
    let mut comps = Vec::with_capacity(3);
    for i in 0..2 {
        let xi = lift1(&c.components()[i]);
        let ni = lift1(&normal[i]);
        comps.push(&xi + &(&(&s2 * &sin_t) * &ni));
    }
    comps.push(&s2 * &cos_t);
    Ok(SurfacePatch::new(comps, [c.domain(), spec.s_domain])?)
}

/// Evaluates the extrusion pointwise; works for both generator kinds.
/// `x` holds the generator parameters (one for a curve, two for a patch).
pub fn extrude_point(spec: &ExtrusionSpec, x: &[f64], s: f64) -> Result<Vec<f64>, ConstructError> {
    let (st, ct) = (spec.theta.sin(), spec.theta.cos());
    match &spec.generator {
        Generator::PlaneCurve(c) => {
            assert_eq!(x.len(), 1);
            let pos = c.position(x[0])?;
            let d1 = c.derivatives(x[0], 1)?;
            let n = linalg::normalize(&linalg::generalized_cross(&[d1[0].clone()]), 1e-12)
                .map(|w| vec![w[0], w[1]])
                .ok_or(CurveError::NonRegular {
                    t: x[0],
                    speed: linalg::norm(&d1[0]),
                })?;
            // rotate (v_y, −v_x) comes out of generalized_cross directly
            Ok(vec![pos[0] + s * st * n[0], pos[1] + s * st * n[1], s * ct])
        }
        Generator::Patch(p) => {
            assert_eq!(x.len(), 2);
            let pos = p.position(x[0], x[1])?;
            let jet = p.jet(x[0], x[1])?;
            let n = linalg::normalize(&linalg::cross3(&jet.pu, &jet.pv), 1e-12)
                .ok_or(SurfaceError::Singular { u: x[0], v: x[1] })?;
            let mut out: Vec<f64> = (0..3).map(|i| pos[i] + s * st * n[i]).collect();
            out.push(s * ct);
            Ok(out)
        }
    }
}

/// Constancy report of ⟨d, ξ⟩ for the extruded object, `ξ` its unit normal
/// and `d` the extrusion axis.
///
/// For a plane-curve generator this scans the surface normal on a
/// `generator_samples.0 × s_samples` grid; for a patch generator it scans
/// the 3-fold normal (the generalized cross product of the three coordinate
/// tangents) over `generator_samples × s_samples` points in ℝ⁴.
pub fn extrusion_angle_report(
    spec: &ExtrusionSpec,
    generator_samples: (usize, usize),
    s_samples: usize,
    opts: &ConstantAngleOptions,
) -> Result<ConstancyReport, ConstructError> {
    match &spec.generator {
        Generator::PlaneCurve(_) => {
            let patch = extrude(spec)?;
            let d = vec![0.0, 0.0, 1.0];
            Ok(constant_angle_report(
                &patch,
                &d,
                (generator_samples.0, s_samples),
                opts,
            )?)
        }
        Generator::Patch(p) => {
            // Assemble the 3-fold (p, q, s) ↦ (g + s·sinθ·N(g), s·cosθ)
            // symbolically so its tangents are exact.
            let (pn, qn) = p.params();
            let (pn, qn) = (pn.to_string(), qn.to_string());
            let s_name = fresh_param(&[&pn, &qn], "s");
            let names: Vec<&str> = vec![&pn, &qn, &s_name];
            let seed = Expr::parse("0", &names).expect("valid params");
            let p3 = seed.lift_param(&pn);
            let q3 = seed.lift_param(&qn);
            let s3 = seed.lift_param(&s_name);
            let lift = |e: &Expr| e.substitute(&[p3.clone(), q3.clone()]);

            let jet = (
                p.components().to_vec(),
                p.jet_partials_for_normal(), // (du, dv) expression pairs
            );
            let (comps0, (du, dv)) = jet;
            let cross = [
                &(&lift(&du[1]) * &lift(&dv[2])) - &(&lift(&du[2]) * &lift(&dv[1])),
                &(&lift(&du[2]) * &lift(&dv[0])) - &(&lift(&du[0]) * &lift(&dv[2])),
                &(&lift(&du[0]) * &lift(&dv[1])) - &(&lift(&du[1]) * &lift(&dv[0])),
            ];
            let norm2 = &(&(&cross[0] * &cross[0]) + &(&cross[1] * &cross[1]))
                + &(&cross[2] * &cross[2]);
            let norm = norm2.sqrt();
            let sin_t = seed.lift(spec.theta.sin());
            let cos_t = seed.lift(spec.theta.cos());
            let mut comps: Vec<Expr> = Vec::with_capacity(4);
            for i in 0..3 {
                let ni = &cross[i] / &norm;
                comps.push(&lift(&comps0[i]) + &(&(&s3 * &sin_t) * &ni));
            }
            comps.push(&s3 * &cos_t);

            let dp: Vec<Expr> = comps
                .iter()
                .map(|e| e.differentiate(&pn).expect("param"))
                .collect();
            let dq: Vec<Expr> = comps
                .iter()
                .map(|e| e.differentiate(&qn).expect("param"))
                .collect();
            let ds: Vec<Expr> = comps
                .iter()
                .map(|e| e.differentiate(&s_name).expect("param"))
                .collect();

            let [pd, qd] = p.domain();
            let ps = grid::linspace(pd.0, pd.1, generator_samples.0.max(2));
            let qs = grid::linspace(qd.0, qd.1, generator_samples.1.max(2));
            let ss = grid::linspace(spec.s_domain.0, spec.s_domain.1, s_samples.max(2));

            let mut values = Vec::new();
            let mut excluded = 0usize;
            for &pv in &ps {
                let rows = grid::map_grid(&qs, &ss, |qv, sv| -> Result<Option<f64>, ConstructError> {
                    let at = [pv, qv, sv];
                    let ev = |es: &[Expr]| -> Result<Vec<f64>, ConstructError> {
                        es.iter()
                            .map(|e| e.evaluate(&at).map_err(ConstructError::from))
                            .collect()
                    };
                    let tp = ev(&dp)?;
                    let tq = ev(&dq)?;
                    let ts = ev(&ds)?;
                    let xi = linalg::generalized_cross(&[tp, tq, ts]);
                    match linalg::normalize(&xi, opts.surface.tol_sing) {
                        Some(unit) => {
                            let c = unit[3];
                            Ok(Some(if opts.absolute { c.abs() } else { c }))
                        }
                        None => Ok(None),
                    }
                });
                for r in rows {
                    match r? {
                        Some(c) => values.push(c),
                        None => excluded += 1,
                    }
                }
            }
            if values.is_empty() {
                return Err(ConstructError::Surface(SurfaceError::EmptyGrid));
            }
            Ok(ConstancyReport::from_values(
                values,
                opts.tol_const,
                opts.absolute,
                excluded,
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Ruled surface over a hypersurface directrix
// ---------------------------------------------------------------------------

/// How the normal field along the directrix is supplied.
#[derive(Debug, Clone)]
pub enum NormalField {
    /// The generator is the unit sphere: the normal at β(t) is β(t) itself.
    SpherePosition,
    /// Explicit unit normal expressions in the directrix parameter.
    Explicit(Vec<Expr>),
}

/// Field used for the ruling direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RulingVariant {
    /// `sin(θ)·N(β(t)) + cos(θ)·d` — the hypersurface normal.
    HypersurfaceNormal,
    /// `sin(θ)·β′(t) + cos(θ)·d` — the literal directrix-tangent variant,
    /// kept behind this flag for comparison.
    DirectrixTangent,
}

/// A ruled surface `Φ(t, s) = β(t) + s(sin(θ)·N(β(t)) + cos(θ)·d)` with
/// `d` the appended last coordinate axis.
#[derive(Debug, Clone)]
pub struct RuledSpec {
    /// Directrix on the generator hypersurface, in ℝ^(n−1) coordinates.
    pub directrix: CurveN,
    pub normal: NormalField,
    pub theta: f64,
    pub s_domain: (f64, f64),
    pub ruling: RulingVariant,
}

impl RuledSpec {
    pub fn new(
        directrix: CurveN,
        normal: NormalField,
        theta: f64,
        s_domain: (f64, f64),
    ) -> Result<Self, ConstructError> {
        check_theta(theta)?;
        if let NormalField::Explicit(es) = &normal {
            assert_eq!(es.len(), directrix.dim(), "normal field dimension mismatch");
        }
        Ok(RuledSpec {
            directrix,
            normal,
            theta,
            s_domain,
            ruling: RulingVariant::HypersurfaceNormal,
        })
    }

    /// Ambient dimension of the ruled surface (directrix dimension + 1).
    pub fn dim(&self) -> usize {
        self.directrix.dim() + 1
    }

    /// The field the ruling tilts towards, as expressions in the directrix
    /// parameter (dimension n−1).
    pub fn field_exprs(&self) -> Vec<Expr> {
        match self.ruling {
            RulingVariant::HypersurfaceNormal => match &self.normal {
                NormalField::SpherePosition => self.directrix.components().to_vec(),
                NormalField::Explicit(es) => es.clone(),
            },
            RulingVariant::DirectrixTangent => {
                let param = self.directrix.param().to_string();
                self.directrix
                    .components()
                    .iter()
                    .map(|e| e.differentiate(&param).expect("declared parameter"))
                    .collect()
            }
        }
    }

    /// Unit normal along the directrix (independent of the ruling variant).
    pub fn normal_exprs(&self) -> Vec<Expr> {
        match &self.normal {
            NormalField::SpherePosition => self.directrix.components().to_vec(),
            NormalField::Explicit(es) => es.clone(),
        }
    }

    /// Validates ‖N∘β‖ = 1 and ⟨N∘β, β′⟩ = 0 at `samples` points.
    pub fn validate(&self, samples: usize) -> Result<(), ConstructError> {
        let field = self.field_exprs();
        let (a, b) = self.directrix.domain();
        let param = self.directrix.param().to_string();
        let dirs: Vec<Expr> = self
            .directrix
            .components()
            .iter()
            .map(|e| e.differentiate(&param).expect("declared parameter"))
            .collect();
        for &t in &grid::linspace(a, b, samples.max(2)) {
            let n: Vec<f64> = field
                .iter()
                .map(|e| e.evaluate(&[t]))
                .collect::<Result<_, _>>()?;
            let norm = linalg::norm(&n);
            if (norm - 1.0).abs() > 1e-8 {
                return Err(ConstructError::NormalNotUnit { t, norm });
            }
            if self.ruling == RulingVariant::HypersurfaceNormal {
                let d1: Vec<f64> = dirs
                    .iter()
                    .map(|e| e.evaluate(&[t]))
                    .collect::<Result<_, _>>()?;
                let dot = linalg::dot(&n, &d1);
                if dot.abs() > 1e-8 {
                    return Err(ConstructError::InvalidNormal { t, dot });
                }
            }
        }
        Ok(())
    }

    /// The directrix embedded in the ambient space of the ruled surface.
    pub fn directrix_embedded(&self) -> CurveN {
        self.directrix.embed(self.dim())
    }

    /// The ruling `sin(θ)·N + cos(θ)·d` as ambient expressions in t.
    pub fn ruling_exprs_embedded(&self) -> Vec<Expr> {
        let field = self.field_exprs();
        let seed = &self.directrix.components()[0];
        let sin_t = seed.lift(self.theta.sin());
        let mut out: Vec<Expr> = field.iter().map(|n| &sin_t * n).collect();
        out.push(seed.lift(self.theta.cos()));
        out
    }
}

/// Builds the ruled patch, validating the spec invariants at
/// `validation_samples` parameter values first.
pub fn ruled_surface(
    spec: &RuledSpec,
    validation_samples: usize,
) -> Result<SurfacePatch, ConstructError> {
    spec.validate(validation_samples)?;
    let field = spec.field_exprs();
    let t_name = spec.directrix.param().to_string();
    let s_name = fresh_param(&[&t_name], "s");
    let names: Vec<&str> = vec![&t_name, &s_name];
    let seed = Expr::parse("0", &names).expect("valid params");
    let t2 = seed.lift_param(&t_name);
    let s2 = seed.lift_param(&s_name);
    let lift = |e: &Expr| e.substitute(std::slice::from_ref(&t2));
    let sin_t = seed.lift(spec.theta.sin());
    let cos_t = seed.lift(spec.theta.cos());

    let mut comps = Vec::with_capacity(spec.dim());
    for (beta_i, n_i) in spec.directrix.components().iter().zip(&field) {
        comps.push(&lift(beta_i) + &(&(&s2 * &sin_t) * &lift(n_i)));
    }
    comps.push(&s2 * &cos_t);
    Ok(SurfacePatch::new(
        comps,
        [spec.directrix.domain(), spec.s_domain],
    )?)
}

// ---------------------------------------------------------------------------
// Surface generated by a plane curve
// ---------------------------------------------------------------------------

/// Options for [`plane_curve_surface`].
#[derive(Debug, Clone, Copy)]
pub struct PlaneCurveOptions {
    /// Allowed drift of the last frame vector across the check grid.
    pub planar_tol: f64,
    /// Minimum first curvature on the check grid.
    pub min_curvature: f64,
    pub check_samples: usize,
    pub frenet: FrenetOptions,
}

impl Default for PlaneCurveOptions {
    fn default() -> Self {
        PlaneCurveOptions {
            planar_tol: 1e-8,
            min_curvature: 1e-9,
            check_samples: 100,
            frenet: FrenetOptions::default(),
        }
    }
}

/// The constructed patch together with the frame data it used.
#[derive(Debug, Clone)]
pub struct PlaneCurveSurface {
    pub patch: SurfacePatch,
    /// Principal normal V₂ of the curve, as expressions in its parameter.
    pub principal_normal: Vec<Expr>,
    /// The constant binormal.
    pub binormal: Vec<f64>,
    pub theta: f64,
}

impl PlaneCurveSurface {
    /// The ruling field `sin(θ)·V₂(t) + cos(θ)·B` in the curve parameter.
    pub fn ruling_exprs(&self) -> Vec<Expr> {
        let seed = &self.principal_normal[0];
        let sin_t = seed.lift(self.theta.sin());
        let cos_t = seed.lift(self.theta.cos());
        self.principal_normal
            .iter()
            .zip(&self.binormal)
            .map(|(v2, b)| &(&sin_t * v2) + &(&cos_t * &seed.lift(*b)))
            .collect()
    }
}

/// Builds `φ(u, v) = α(u) + v(sin(θ)·V₂(u) + cos(θ)·B)` for a planar,
/// regular, non-straight curve α in E³. V₂ is assembled symbolically from
/// the curve derivatives; B is the (constant) last frame vector sampled at
/// the start of the domain.
pub fn plane_curve_surface(
    alpha: &CurveN,
    theta: f64,
    v_domain: (f64, f64),
    opts: &PlaneCurveOptions,
) -> Result<PlaneCurveSurface, ConstructError> {
    check_theta(theta)?;
    assert_eq!(alpha.dim(), 3, "the plane-curve construction lives in E³");

    // Planarity / regularity / non-straightness across the check grid.
    let (a, b) = alpha.domain();
    let ts = grid::linspace(a, b, opts.check_samples.max(2));
    let mut binormal: Option<Vec<f64>> = None;
    let mut max_dev: f64 = 0.0;
    for &t in &ts {
        let fr = frenet_with(alpha, t, &opts.frenet)?;
        let k1 = fr.curvatures[0];
        if k1 <= opts.min_curvature {
            return Err(ConstructError::CurvatureTooSmall { t, k1 });
        }
        match &binormal {
            None => binormal = Some(fr.frame[2].clone()),
            Some(b0) => {
                let dev = linalg::norm(&linalg::sub(&fr.frame[2], b0));
                max_dev = max_dev.max(dev);
            }
        }
    }
    let binormal = binormal.expect("at least one sample");
    if max_dev > opts.planar_tol {
        return Err(ConstructError::NotPlanar { max_dev });
    }

    // Symbolic V₂ = (α″ − ⟨α″, α′⟩/⟨α′, α′⟩ · α′) / ‖·‖.
    let param = alpha.param().to_string();
    let comps = alpha.components();
    let d1: Vec<Expr> = comps
        .iter()
        .map(|e| e.differentiate(&param).expect("declared parameter"))
        .collect();
    let d2: Vec<Expr> = d1
        .iter()
        .map(|e| e.differentiate(&param).expect("declared parameter"))
        .collect();
    let dot_exprs = |xs: &[Expr], ys: &[Expr]| -> Expr {
        let mut acc = &xs[0] * &ys[0];
        for i in 1..xs.len() {
            acc = &acc + &(&xs[i] * &ys[i]);
        }
        acc
    };
    let proj = &dot_exprs(&d2, &d1) / &dot_exprs(&d1, &d1);
    let e2: Vec<Expr> = d2
        .iter()
        .zip(&d1)
        .map(|(a2, a1)| a2 - &(&proj * a1))
        .collect();
    let e2_norm = dot_exprs(&e2, &e2).sqrt();
    let v2: Vec<Expr> = e2.iter().map(|e| e / &e2_norm).collect();

    // Patch components over (curve parameter, v).
    let v_name = fresh_param(&[&param], "v");
    let names: Vec<&str> = vec![&param, &v_name];
    let seed = Expr::parse("0", &names).expect("valid params");
    let u2 = seed.lift_param(&param);
    let vv = seed.lift_param(&v_name);
    let lift = |e: &Expr| e.substitute(std::slice::from_ref(&u2));
    let sin_t = seed.lift(theta.sin());
    let cos_t = seed.lift(theta.cos());

    let mut patch_comps = Vec::with_capacity(3);
    for i in 0..3 {
        let ruling_i = &(&sin_t * &lift(&v2[i])) + &(&cos_t * &seed.lift(binormal[i]));
        patch_comps.push(&lift(&comps[i]) + &(&vv * &ruling_i));
    }
    let patch = SurfacePatch::new(patch_comps, [alpha.domain(), v_domain])?;

    Ok(PlaneCurveSurface {
        patch,
        principal_normal: v2,
        binormal,
        theta,
    })
}

/// Closed-form mean curvature `k₁·cos(θ) / (2·(1 − k₁·v·sin(θ)))` of the
/// plane-curve surface at ruling parameter `v`, under the `S(X) = D_X Z`
/// sign. The denominator must stay positive.
pub fn closed_form_mean_curvature(k1: f64, theta: f64, v: f64) -> Result<f64, ConstructError> {
    check_theta(theta)?;
    let denom = 1.0 - k1 * v * theta.sin();
    if denom <= 1e-9 {
        return Err(ConstructError::SingularDenominator(denom));
    }
    Ok(0.5 * k1 * theta.cos() / denom)
}

// Expression pairs (∂/∂u, ∂/∂v) of a patch, used to assemble normals of a
// lifted generator symbolically.
impl SurfacePatch {
    pub(crate) fn jet_partials_for_normal(&self) -> (Vec<Expr>, Vec<Expr>) {
        let jet = self.jet_exprs();
        (jet.du.clone(), jet.dv.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{fundamental_forms, normal, SurfaceOptions};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

    fn unit_circle() -> CurveN {
        CurveN::parse(&["cos(t)", "sin(t)"], "t", (0.0, 2.0 * PI)).unwrap()
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
    fn circle_extrusion_is_constant_angle() {
        // Hand oracle: the extruded cone has unit normal
        // ±(cos t·cosθ, sin t·cosθ, −sinθ), so |⟨Z, d⟩| ≡ sinθ.
        let spec = ExtrusionSpec::new(
            Generator::PlaneCurve(unit_circle()),
            FRAC_PI_6,
            (0.0, 1.0),
        )
        .unwrap();
        let patch = extrude(&spec).unwrap();
        let z = normal(&patch, 0.7, 0.5, &SurfaceOptions::default()).unwrap();
        let expect = [0.7f64.cos() * FRAC_PI_6.cos(), 0.7f64.sin() * FRAC_PI_6.cos(), -FRAC_PI_6.sin()];
        let sign = if z[2] * expect[2] >= 0.0 { 1.0 } else { -1.0 };
        for (a, e) in z.iter().zip(&expect) {
            assert!((a - sign * e).abs() < 1e-12);
        }
        let report =
            extrusion_angle_report(&spec, (40, 40), 40, &ConstantAngleOptions::default()).unwrap();
        assert!(report.max_deviation < 1e-9, "dev {}", report.max_deviation);
        assert!((report.mean - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_angle_extrusion_is_a_cylinder() {
        let spec =
            ExtrusionSpec::new(Generator::PlaneCurve(unit_circle()), 0.0, (0.0, 1.0)).unwrap();
        let report =
            extrusion_angle_report(&spec, (24, 24), 8, &ConstantAngleOptions::default()).unwrap();
        assert!(report.mean.abs() < 1e-12 && report.max_deviation < 1e-12);
    }

    #[test]
    fn right_angle_extrusion_is_planar() {
        let spec =
            ExtrusionSpec::new(Generator::PlaneCurve(unit_circle()), FRAC_PI_2, (0.0, 0.5))
                .unwrap();
        let report =
            extrusion_angle_report(&spec, (24, 24), 8, &ConstantAngleOptions::default()).unwrap();
        assert!((report.mean - 1.0).abs() < 1e-12);
        assert!(report.max_deviation < 1e-12);
    }

    #[test]
    fn sphere_generator_extrudes_into_r4() {
        // For the unit sphere the 3-fold normal is cosθ·x ⊕ (−sinθ), so
        // |⟨ξ, d⟩| ≡ sinθ.
        let sphere = SurfacePatch::parse(
            &["cos(u)*cos(v)", "sin(u)*cos(v)", "sin(v)"],
            ("u", "v"),
            [(-PI, PI), (-1.0, 1.0)],
        )
        .unwrap();
        let spec = ExtrusionSpec::new(Generator::Patch(sphere), FRAC_PI_6, (0.0, 0.5)).unwrap();
        let pt = extrude_point(&spec, &[0.3, -0.4], 0.2).unwrap();
        assert_eq!(pt.len(), 4);
        assert!((pt[3] - 0.2 * FRAC_PI_6.cos()).abs() < 1e-15);
        let report =
            extrusion_angle_report(&spec, (10, 10), 5, &ConstantAngleOptions::default()).unwrap();
        assert!((report.mean - 0.5).abs() < 1e-10);
        assert!(report.max_deviation < 1e-10);
    }

    #[test]
    fn theta_outside_range_rejected() {
        assert!(matches!(
            ExtrusionSpec::new(Generator::PlaneCurve(unit_circle()), 2.0, (0.0, 1.0)),
            Err(ConstructError::BadTheta(_))
        ));
    }

    #[test]
    fn ruled_over_circle_is_developable() {
        let spec = RuledSpec::new(
            unit_circle(),
            NormalField::SpherePosition,
            FRAC_PI_6,
            (0.0, 1.0),
        )
        .unwrap();
        let patch = ruled_surface(&spec, 64).unwrap();
        assert_eq!(patch.dim(), 3);
        let beta3 = spec.directrix_embedded();
        let ruling = spec.ruling_exprs_embedded();
        for &t in &[0.0, 0.9, 2.5, 5.0] {
            let det = crate::surface::developability_det(&beta3, &ruling, t).unwrap();
            assert!(det.abs() < 1e-10, "det = {det}");
        }
    }

    #[test]
    fn ruled_surface_recovers_directrix_at_zero() {
        let spec = RuledSpec::new(
            unit_circle(),
            NormalField::SpherePosition,
            0.7,
            (-1.0, 1.0),
        )
        .unwrap();
        let patch = ruled_surface(&spec, 16).unwrap();
        for &t in &[0.1, 1.0, 3.0] {
            let p = patch.position(t, 0.0).unwrap();
            assert!((p[0] - t.cos()).abs() < 1e-15);
            assert!((p[1] - t.sin()).abs() < 1e-15);
            assert!(p[2].abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_normal_is_rejected() {
        // A field that is unit but not orthogonal to β′.
        let field = vec![
            Expr::parse("cos(t + 0.3)", &["t"]).unwrap(),
            Expr::parse("sin(t + 0.3)", &["t"]).unwrap(),
        ];
        let spec = RuledSpec::new(
            unit_circle(),
            NormalField::Explicit(field),
            FRAC_PI_6,
            (0.0, 1.0),
        )
        .unwrap();
        assert!(matches!(
            ruled_surface(&spec, 16),
            Err(ConstructError::InvalidNormal { .. })
        ));
    }

    #[test]
    fn sample_surface_matches_printed_coordinates() {
        let s = plane_curve_surface(
            &sample_plane_curve(),
            FRAC_PI_6,
            (0.0, PI),
            &PlaneCurveOptions::default(),
        )
        .unwrap();
        assert_eq!(s.binormal.len(), 3);
        assert!((s.binormal[0] - 0.8).abs() < 1e-12);
        assert!(s.binormal[1].abs() < 1e-12);
        assert!((s.binormal[2] + 0.6).abs() < 1e-12);
        let sqrt3 = 3.0f64.sqrt();
        for &(u, v) in &[(0.0, 0.0), (1.2, 0.5), (4.0, 2.8), (10.0, 3.0)] {
            let p = s.patch.position(u, v).unwrap();
            let x = (0.6 - 0.3 * v) * u.sin() + 2.0 * sqrt3 / 5.0 * v;
            let y = (1.0 - 0.5 * v) * u.cos() + 1.0;
            let z = (0.8 - 0.4 * v) * u.sin() - 3.0 * sqrt3 / 10.0 * v;
            assert!((p[0] - x).abs() < 1e-12, "x at ({u}, {v})");
            assert!((p[1] - y).abs() < 1e-12, "y at ({u}, {v})");
            assert!((p[2] - z).abs() < 1e-12, "z at ({u}, {v})");
        }
    }

    #[test]
    fn non_planar_curve_rejected() {
        let helix = CurveN::parse(&["cos(t)", "sin(t)", "t"], "t", (0.0, 4.0 * PI)).unwrap();
        assert!(matches!(
            plane_curve_surface(&helix, FRAC_PI_6, (0.0, 1.0), &PlaneCurveOptions::default()),
            Err(ConstructError::NotPlanar { .. })
        ));
    }

    #[test]
    fn straight_line_rejected() {
        let line = CurveN::parse(&["t", "2*t", "3*t"], "t", (0.0, 1.0)).unwrap();
        assert!(matches!(
            plane_curve_surface(&line, FRAC_PI_6, (0.0, 1.0), &PlaneCurveOptions::default()),
            Err(ConstructError::Curve(CurveError::FrameDegenerate { .. }))
        ));
    }

    #[test]
    fn right_angle_surface_is_flat_in_the_curve_plane() {
        let s = plane_curve_surface(
            &sample_plane_curve(),
            FRAC_PI_2,
            (0.0, 0.9),
            &PlaneCurveOptions::default(),
        )
        .unwrap();
        // every point stays in the plane through α(0) orthogonal to B
        let base = s.patch.position(0.0, 0.0).unwrap();
        for &(u, v) in &[(0.3, 0.2), (2.0, 0.8), (5.0, 0.5)] {
            let p = s.patch.position(u, v).unwrap();
            let delta = crate::linalg::sub(&p, &base);
            assert!(crate::linalg::dot(&delta, &s.binormal).abs() < 1e-10);
        }
        let ff = fundamental_forms(&s.patch, 1.0, 0.4, &SurfaceOptions::default()).unwrap();
        assert!(ff.mean.abs() < 1e-10);
    }

    #[test]
    fn closed_form_values() {
        let h = closed_form_mean_curvature(1.0, FRAC_PI_6, 0.0).unwrap();
        assert!((h - 3.0f64.sqrt() / 4.0).abs() < 1e-15);
        let h = closed_form_mean_curvature(1.0, FRAC_PI_2, 0.5).unwrap();
        assert!(h.abs() < 1e-15);
        let h = closed_form_mean_curvature(2.0, 0.0, 0.7).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
        assert!(matches!(
            closed_form_mean_curvature(1.0, FRAC_PI_6, 2.0),
            Err(ConstructError::SingularDenominator(_))
        ));
    }
}
