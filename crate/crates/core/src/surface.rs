//! Metric and curvature analysis of two-parameter patches.
//!
//! The shape operator here uses the sign `S(X) = D_X Z` for the unit normal
//! `Z = φ_u × φ_v / ‖·‖`: the mean curvature is `H = ½ tr S` under that
//! sign, which is the negative of the classical `S = −D_X Z` value, while
//! the Gauss curvature `K = det S` is the same under either convention.
//! The stored second-form coefficients L, M, N are the usual integrands
//! `⟨φ_uu, Z⟩` etc., so `H = (2FM − EN − GL) / (2(EG − F²))`.

use std::sync::OnceLock;

use crate::curve::{CurveError, CurveN};
use crate::expr::{DomainError, Expr, ParseError};
use crate::grid;
use crate::linalg;

/// Errors from patch construction and surface analysis.
#[derive(Debug, Clone, thiserror::Error)]
pub enum SurfaceError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("a surface patch needs at least three ambient components, got {0}")]
    AmbientTooSmall(usize),
    #[error("all components must share the same two parameters")]
    MixedParameters,
    #[error("degenerate domain rectangle")]
    BadDomain,
    #[error("singular point at (u, v) = ({u}, {v})")]
    Singular { u: f64, v: f64 },
    #[error("{0} is only supported in ambient dimension 3")]
    NotSupported(&'static str),
    #[error("every grid point was excluded as singular")]
    EmptyGrid,
    #[error("trace left the domain rectangle at s = {s} ((u, v) = ({u}, {v}))")]
    DomainEscape { s: f64, u: f64, v: f64 },
    #[error("umbilic point at (u, v) = ({u}, {v}): principal directions undefined")]
    Umbilic { u: f64, v: f64 },
    #[error("direction is not tangent to the surface (residual {0:.3e})")]
    NotTangent(f64),
    #[error("direction must be a unit vector (norm {0})")]
    NotUnit(f64),
}

/// Tolerances shared by the surface operations.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceOptions {
    /// A point is singular when ‖φ_u × φ_v‖ (or √(EG−F²) for n > 3) is at
    /// or below this.
    pub tol_sing: f64,
    /// Relative eigenvalue gap below which a point counts as umbilic.
    pub tol_umb: f64,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        SurfaceOptions {
            tol_sing: 1e-9,
            tol_umb: 1e-8,
        }
    }
}

use crate::expr::compiled::Program;

/// First and second partial derivative expressions of a patch, plus their
/// compiled forms for the hot evaluation paths.
#[derive(Debug, Clone)]
pub(crate) struct PatchJet {
    pub du: Vec<Expr>,
    pub dv: Vec<Expr>,
    pub duu: Vec<Expr>,
    pub duv: Vec<Expr>,
    pub dvv: Vec<Expr>,
    du_p: Vec<Program>,
    dv_p: Vec<Program>,
    duu_p: Vec<Program>,
    duv_p: Vec<Program>,
    dvv_p: Vec<Program>,
}

impl PatchJet {
    // Compiled evaluation with a tree-walk fallback for full error detail.
    fn eval_group(
        exprs: &[Expr],
        programs: &[Program],
        at: &[f64; 2],
        stack: &mut Vec<f64>,
    ) -> Result<Vec<f64>, SurfaceError> {
        let mut out = Vec::with_capacity(programs.len());
        for (p, e) in programs.iter().zip(exprs) {
            match p.eval(at, stack) {
                Ok(x) => out.push(x),
                Err(_) => out.push(e.evaluate(at)?),
            }
        }
        Ok(out)
    }
}

/// Evaluated partial derivatives at a point.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub pu: Vec<f64>,
    pub pv: Vec<f64>,
    pub puu: Vec<f64>,
    pub puv: Vec<f64>,
    pub pvv: Vec<f64>,
}

/// An n-component patch in two parameters over a domain rectangle.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    comps: Vec<Expr>,
    domain: [(f64, f64); 2],
    jet: OnceLock<PatchJet>,
}

impl SurfacePatch {
    pub fn new(comps: Vec<Expr>, domain: [(f64, f64); 2]) -> Result<Self, SurfaceError> {
        if comps.len() < 3 {
            return Err(SurfaceError::AmbientTooSmall(comps.len()));
        }
        let params = comps[0].params();
        if params.len() != 2 || comps.iter().any(|c| c.params() != params) {
            return Err(SurfaceError::MixedParameters);
        }
        if !(domain[0].0 < domain[0].1 && domain[1].0 < domain[1].1) {
            return Err(SurfaceError::BadDomain);
        }
        Ok(SurfacePatch {
            comps,
            domain,
            jet: OnceLock::new(),
        })
    }

    pub fn parse(
        comps: &[&str],
        params: (&str, &str),
        domain: [(f64, f64); 2],
    ) -> Result<Self, SurfaceError> {
        let comps = comps
            .iter()
            .map(|s| Expr::parse(s, &[params.0, params.1]))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(comps, domain)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn params(&self) -> (&str, &str) {
        let p = self.comps[0].params();
        (&p[0], &p[1])
    }

    /// Domain rectangle as ((u₀, u₁), (v₀, v₁)).
    pub fn domain(&self) -> [(f64, f64); 2] {
        self.domain
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let eps_u = 1e-12 * (self.domain[0].1 - self.domain[0].0).abs().max(1.0);
        let eps_v = 1e-12 * (self.domain[1].1 - self.domain[1].0).abs().max(1.0);
        u >= self.domain[0].0 - eps_u
            && u <= self.domain[0].1 + eps_u
            && v >= self.domain[1].0 - eps_v
            && v <= self.domain[1].1 + eps_v
    }

    pub fn position(&self, u: f64, v: f64) -> Result<Vec<f64>, SurfaceError> {
        self.comps
            .iter()
            .map(|c| c.evaluate(&[u, v]).map_err(SurfaceError::from))
            .collect()
    }

    pub(crate) fn jet_exprs(&self) -> &PatchJet {
        self.jet.get_or_init(|| {
            let (pu, pv) = {
                let p = self.comps[0].params();
                (p[0].clone(), p[1].clone())
            };
            let d = |es: &[Expr], p: &str| -> Vec<Expr> {
                es.iter()
                    .map(|e| e.differentiate(p).expect("declared parameter"))
                    .collect()
            };
            let du = d(&self.comps, &pu);
            let dv = d(&self.comps, &pv);
            let duu = d(&du, &pu);
            let duv = d(&du, &pv);
            let dvv = d(&dv, &pv);
            PatchJet {
                du,
                dv,
                duu,
                duv,
                dvv,
            }
        })
    }

    /// First and second partials evaluated at (u, v).
    pub fn jet(&self, u: f64, v: f64) -> Result<Jet2, SurfaceError> {
        let jet = self.jet_exprs();
        let eval = |es: &[Expr]| -> Result<Vec<f64>, SurfaceError> {
            es.iter()
                .map(|e| e.evaluate(&[u, v]).map_err(SurfaceError::from))
                .collect()
        };
        Ok(Jet2 {
            pu: eval(&jet.du)?,
            pv: eval(&jet.dv)?,
            puu: eval(&jet.duu)?,
            puv: eval(&jet.duv)?,
            pvv: eval(&jet.dvv)?,
        })
    }

    /// The same patch with the roles of the two parameters exchanged,
    /// which flips the orientation of the normal.
    pub fn swap_uv(&self) -> SurfacePatch {
        let (pu, pv) = self.params();
        let swapped: Vec<String> = vec![pv.to_string(), pu.to_string()];
        let names: Vec<&str> = swapped.iter().map(|s| s.as_str()).collect();
        let seed = Expr::parse("0", &names).expect("valid params");
        let new_u = seed.lift_param(pu);
        let new_v = seed.lift_param(pv);
        let comps = self
            .comps
            .iter()
            .map(|c| c.substitute(&[new_u.clone(), new_v.clone()]))
            .collect();
        SurfacePatch {
            comps,
            domain: [self.domain[1], self.domain[0]],
            jet: OnceLock::new(),
        }
    }
}

/// First fundamental form coefficients, valid in any ambient dimension.
pub fn first_form(
    p: &SurfacePatch,
    u: f64,
    v: f64,
    opts: &SurfaceOptions,
) -> Result<(f64, f64, f64), SurfaceError> {
    let jet = p.jet(u, v)?;
    let ee = linalg::dot(&jet.pu, &jet.pu);
    let ff = linalg::dot(&jet.pu, &jet.pv);
    let gg = linalg::dot(&jet.pv, &jet.pv);
    if ee * gg - ff * ff <= opts.tol_sing * opts.tol_sing {
        return Err(SurfaceError::Singular { u, v });
    }
    Ok((ee, ff, gg))
}

/// Unit normal `Z = φ_u × φ_v / ‖·‖` (ambient dimension 3 only).
pub fn normal(
    p: &SurfacePatch,
    u: f64,
    v: f64,
    opts: &SurfaceOptions,
) -> Result<Vec<f64>, SurfaceError> {
    if p.dim() != 3 {
        return Err(SurfaceError::NotSupported("the surface normal"));
    }
    let jet = p.jet(u, v)?;
    normal_from_jet(&jet, u, v, opts)
}

fn normal_from_jet(
    jet: &Jet2,
    u: f64,
    v: f64,
    opts: &SurfaceOptions,
) -> Result<Vec<f64>, SurfaceError> {
    let zn = linalg::cross3(&jet.pu, &jet.pv);
    linalg::normalize(&zn, opts.tol_sing).ok_or(SurfaceError::Singular { u, v })
}

/// First and second fundamental forms plus the derived curvatures.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalForms {
    /// E = ⟨φ_u, φ_u⟩
    pub e: f64,
    /// F = ⟨φ_u, φ_v⟩
    pub f: f64,
    /// G = ⟨φ_v, φ_v⟩
    pub g: f64,
    /// L = ⟨φ_uu, Z⟩
    pub l: f64,
    /// M = ⟨φ_uv, Z⟩
    pub m: f64,
    /// N = ⟨φ_vv, Z⟩
    pub n: f64,
    /// K = (LN − M²)/(EG − F²)
    pub gauss: f64,
    /// H = ½ tr S with S(X) = D_X Z, i.e. (2FM − EN − GL)/(2(EG − F²)).
    pub mean: f64,
}

/// Fundamental forms at (u, v). Ambient dimension must be 3.
pub fn fundamental_forms(
    p: &SurfacePatch,
    u: f64,
    v: f64,
    opts: &SurfaceOptions,
) -> Result<FundamentalForms, SurfaceError> {
    if p.dim() != 3 {
        return Err(SurfaceError::NotSupported("the second fundamental form"));
    }
    let jet = p.jet(u, v)?;
    forms_from_jet(&jet, u, v, opts)
}

fn forms_from_jet(
    jet: &Jet2,
    u: f64,
    v: f64,
    opts: &SurfaceOptions,
) -> Result<FundamentalForms, SurfaceError> {
    let z = normal_from_jet(jet, u, v, opts)?;
    let e = linalg::dot(&jet.pu, &jet.pu);
    let f = linalg::dot(&jet.pu, &jet.pv);
    let g = linalg::dot(&jet.pv, &jet.pv);
    let l = linalg::dot(&jet.puu, &z);
    let m = linalg::dot(&jet.puv, &z);
    let n = linalg::dot(&jet.pvv, &z);
    let det1 = e * g - f * f;
    Ok(FundamentalForms {
        e,
        f,
        g,
        l,
        m,
        n,
        gauss: (l * n - m * m) / det1,
        mean: (2.0 * f * m - e * n - g * l) / (2.0 * det1),
    })
}

/// Options for [`constant_angle_report`].
#[derive(Debug, Clone, Copy)]
pub struct ConstantAngleOptions {
    /// Constancy tolerance on the sampled angle cosine.
    pub tol_const: f64,
    /// Sample |⟨Z, d⟩| instead of the raw dot: the global sign of Z depends
    /// on parameter order and can flip across a singular set, which the
    /// constant-angle property does not care about.
    pub absolute: bool,
    pub surface: SurfaceOptions,
}

impl Default for ConstantAngleOptions {
    fn default() -> Self {
        ConstantAngleOptions {
            tol_const: 1e-6,
            absolute: true,
            surface: SurfaceOptions::default(),
        }
    }
}

use crate::curve::ConstancyReport;

/// Samples ⟨Z(u, v), d⟩ on an inclusive nu × nv grid; singular points are
/// excluded and counted rather than failing the scan.
pub fn constant_angle_report(
    p: &SurfacePatch,
    d: &[f64],
    grid_size: (usize, usize),
    opts: &ConstantAngleOptions,
) -> Result<ConstancyReport, SurfaceError> {
    if p.dim() != 3 {
        return Err(SurfaceError::NotSupported("the constant-angle scan"));
    }
    let dn = linalg::norm(d);
    if (dn - 1.0).abs() > 1e-8 {
        return Err(SurfaceError::NotUnit(dn));
    }
    let [du, dv] = p.domain();
    let us = grid::linspace(du.0, du.1, grid_size.0.max(2));
    let vs = grid::linspace(dv.0, dv.1, grid_size.1.max(2));
    let samples = grid::map_grid(&us, &vs, |u, v| match normal(p, u, v, &opts.surface) {
        Ok(z) => {
            let c = linalg::dot(&z, d);
            Ok(Some(if opts.absolute { c.abs() } else { c }))
        }
        Err(SurfaceError::Singular { .. }) => Ok(None),
        Err(other) => Err(other),
    });
    let mut values = Vec::with_capacity(samples.len());
    let mut excluded = 0;
    for s in samples {
        match s? {
            Some(c) => values.push(c),
            None => excluded += 1,
        }
    }
    if values.is_empty() {
        return Err(SurfaceError::EmptyGrid);
    }
    Ok(ConstancyReport::from_values(
        values,
        opts.tol_const,
        opts.absolute,
        excluded,
    ))
}

/// det(T, X, X′) at `t` for a ruled surface over `directrix` in E³: zero
/// along the directrix exactly when the tangent plane is constant along the
/// ruling through it.
pub fn developability_det(
    directrix: &CurveN,
    ruling: &[Expr],
    t: f64,
) -> Result<f64, SurfaceError> {
    assert_eq!(directrix.dim(), 3, "the determinant test lives in E³");
    assert_eq!(ruling.len(), 3, "ruling needs three components");
    let param = directrix.param().to_string();
    let d1 = directrix.derivatives(t, 1)?;
    let tangent = linalg::normalize(&d1[0], 1e-9).ok_or(CurveError::NonRegular {
        t,
        speed: linalg::norm(&d1[0]),
    })?;
    let x: Vec<f64> = ruling
        .iter()
        .map(|e| e.evaluate(&[t]).map_err(SurfaceError::from))
        .collect::<Result<_, _>>()?;
    let xp: Vec<f64> = ruling
        .iter()
        .map(|e| {
            e.differentiate(&param)
                .expect("declared parameter")
                .evaluate(&[t])
                .map_err(SurfaceError::from)
        })
        .collect::<Result<_, _>>()?;
    Ok(linalg::det(&[tangent, x, xp]))
}

/// A principal direction, both as (du, dv) coefficients (first-form unit)
/// and as a unit ambient vector.
#[derive(Debug, Clone)]
pub struct PrincipalDirection {
    pub uv: [f64; 2],
    pub ambient: Vec<f64>,
}

/// Shape operator at a point, in the (φ_u, φ_v) basis.
#[derive(Debug, Clone)]
pub struct ShapeOperator2 {
    /// Matrix of S(X) = D_X Z: column j holds the basis coefficients of
    /// S applied to the j-th basis vector.
    pub matrix: [[f64; 2]; 2],
    /// λ₁ ≥ λ₂.
    pub eigenvalues: [f64; 2],
    /// Principal directions for λ₁, λ₂; `None` at umbilic points.
    pub directions: Option<[PrincipalDirection; 2]>,
    pub umbilic: bool,
}

/// Shape operator, principal curvatures, and principal directions.
pub fn shape_operator(
    p: &SurfacePatch,
    u: f64,
    v: f64,
    opts: &SurfaceOptions,
) -> Result<ShapeOperator2, SurfaceError> {
    if p.dim() != 3 {
        return Err(SurfaceError::NotSupported("the shape operator"));
    }
    let jet = p.jet(u, v)?;
    shape_from_jet(&jet, u, v, opts)
}

fn shape_from_jet(
    jet: &Jet2,
    u: f64,
    v: f64,
    opts: &SurfaceOptions,
) -> Result<ShapeOperator2, SurfaceError> {
    let ff = forms_from_jet(jet, u, v, opts)?;
    let det1 = ff.e * ff.g - ff.f * ff.f;
    // S = −I⁻¹ II in the (φ_u, φ_v) basis.
    let s11 = -(ff.g * ff.l - ff.f * ff.m) / det1;
    let s12 = -(ff.g * ff.m - ff.f * ff.n) / det1;
    let s21 = -(ff.e * ff.m - ff.f * ff.l) / det1;
    let s22 = -(ff.e * ff.n - ff.f * ff.m) / det1;
    let tr = s11 + s22;
    // (s11 − s22)² + 4 s12 s21 equals tr² − 4 det but avoids the
    // cancellation that would blow the eigenvalue gap up to √ε at umbilics
    let disc = ((s11 - s22) * (s11 - s22) + 4.0 * s12 * s21).max(0.0);
    let root = disc.sqrt();
    let l1 = 0.5 * (tr + root);
    let l2 = 0.5 * (tr - root);
    let umbilic = (l1 - l2).abs() <= opts.tol_umb * (l1.abs() + l2.abs()).max(1.0);

    let directions = if umbilic {
        None
    } else {
        let dir_for = |lambda: f64| -> PrincipalDirection {
            // null vector of (S − λI), taking the better-conditioned row
            let c1 = [s12, lambda - s11];
            let c2 = [lambda - s22, s21];
            let n1 = c1[0].hypot(c1[1]);
            let n2 = c2[0].hypot(c2[1]);
            let c = if n1 >= n2 { c1 } else { c2 };
            let mut ambient = linalg::scale(&jet.pu, c[0]);
            linalg::axpy(&mut ambient, c[1], &jet.pv);
            let norm = linalg::norm(&ambient);
            PrincipalDirection {
                uv: [c[0] / norm, c[1] / norm],
                ambient: linalg::scale(&ambient, 1.0 / norm),
            }
        };
        Some([dir_for(l1), dir_for(l2)])
    };

    Ok(ShapeOperator2 {
        matrix: [[s11, s12], [s21, s22]],
        eigenvalues: [l1, l2],
        directions,
        umbilic,
    })
}

// ---------------------------------------------------------------------------
// Traces: geodesics and lines of curvature
// ---------------------------------------------------------------------------

/// Start direction of a surface trace.
#[derive(Debug, Clone)]
pub enum TangentDirection {
    /// Coefficients (a, b) of a φ_u + b φ_v; normalized internally.
    Uv([f64; 2]),
    /// An ambient vector, projected onto the tangent basis.
    Ambient(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct TraceSample {
    /// Arc length from the start.
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub ambient: Vec<f64>,
}

/// A sampled unit-speed curve on a patch.
#[derive(Debug, Clone)]
pub struct SurfaceTrace {
    pub samples: Vec<TraceSample>,
    pub step: f64,
}

// Christoffel symbols (Γ¹₁₁, Γ²₁₁, Γ¹₁₂, Γ²₁₂, Γ¹₂₂, Γ²₂₂) from the jet.
fn christoffels(jet: &Jet2, u: f64, v: f64, opts: &SurfaceOptions) -> Result<[f64; 6], SurfaceError> {
    let e = linalg::dot(&jet.pu, &jet.pu);
    let f = linalg::dot(&jet.pu, &jet.pv);
    let g = linalg::dot(&jet.pv, &jet.pv);
    let det1 = e * g - f * f;
    if det1 <= opts.tol_sing * opts.tol_sing {
        return Err(SurfaceError::Singular { u, v });
    }
    let eu = 2.0 * linalg::dot(&jet.puu, &jet.pu);
    let ev = 2.0 * linalg::dot(&jet.puv, &jet.pu);
    let gu = 2.0 * linalg::dot(&jet.puv, &jet.pv);
    let gv = 2.0 * linalg::dot(&jet.pvv, &jet.pv);
    let fu = linalg::dot(&jet.puu, &jet.pv) + linalg::dot(&jet.pu, &jet.puv);
    let fv = linalg::dot(&jet.puv, &jet.pv) + linalg::dot(&jet.pu, &jet.pvv);
    let inv = 1.0 / (2.0 * det1);
    Ok([
        (g * eu - 2.0 * f * fu + f * ev) * inv,
        (2.0 * e * fu - e * ev - f * eu) * inv,
        (g * ev - f * gu) * inv,
        (e * gu - f * ev) * inv,
        (2.0 * g * fv - g * gu - f * gv) * inv,
        (e * gv - 2.0 * f * fv + f * gu) * inv,
    ])
}

fn tangent_coefficients(
    p: &SurfacePatch,
    u: f64,
    v: f64,
    dir: &TangentDirection,
    opts: &SurfaceOptions,
) -> Result<[f64; 2], SurfaceError> {
    let jet = p.jet(u, v)?;
    let e = linalg::dot(&jet.pu, &jet.pu);
    let f = linalg::dot(&jet.pu, &jet.pv);
    let g = linalg::dot(&jet.pv, &jet.pv);
    let det1 = e * g - f * f;
    if det1 <= opts.tol_sing * opts.tol_sing {
        return Err(SurfaceError::Singular { u, v });
    }
    let (a, b) = match dir {
        TangentDirection::Uv([a, b]) => (*a, *b),
        TangentDirection::Ambient(w) => {
            assert_eq!(w.len(), p.dim(), "ambient direction dimension mismatch");
            let wu = linalg::dot(w, &jet.pu);
            let wv = linalg::dot(w, &jet.pv);
            let a = (g * wu - f * wv) / det1;
            let b = (e * wv - f * wu) / det1;
            // tangency: the projection must reproduce the input
            let mut proj = linalg::scale(&jet.pu, a);
            linalg::axpy(&mut proj, b, &jet.pv);
            let res = linalg::norm(&linalg::sub(&proj, w));
            if res > 1e-6 * linalg::norm(w).max(1.0) {
                return Err(SurfaceError::NotTangent(res));
            }
            (a, b)
        }
    };
    let speed2 = e * a * a + 2.0 * f * a * b + g * b * b;
    if speed2 <= 0.0 {
        return Err(SurfaceError::NotTangent(0.0));
    }
    let inv = speed2.sqrt().recip();
    Ok([a * inv, b * inv])
}

/// Options for the two trace integrators.
#[derive(Debug, Clone, Copy, Default)]
pub struct TraceOptions {
    pub surface: SurfaceOptions,
}

/// Integrates the geodesic equations u″ = −Γ¹(u′, v′), v″ = −Γ²(u′, v′)
/// with fixed-step RK4, starting at `start` in the (unit) direction `dir`.
///
/// The returned trace is unit speed; `samples[k].s = k · step`.
pub fn geodesic(
    p: &SurfacePatch,
    start: (f64, f64),
    dir: &TangentDirection,
    length: f64,
    step: f64,
    opts: &TraceOptions,
) -> Result<SurfaceTrace, SurfaceError> {
    if p.dim() != 3 {
        return Err(SurfaceError::NotSupported("geodesic integration"));
    }
    assert!(length > 0.0 && step > 0.0, "length and step must be positive");
    let [a0, b0] = tangent_coefficients(p, start.0, start.1, dir, &opts.surface)?;
    let n_steps = (length / step).ceil().max(1.0) as usize;
    let h = length / n_steps as f64;

    let deriv = |y: &[f64; 4]| -> Result<[f64; 4], SurfaceError> {
        let jet = p.jet(y[0], y[1])?;
        let gamma = christoffels(&jet, y[0], y[1], &opts.surface)?;
        let (pp, q) = (y[2], y[3]);
        Ok([
            pp,
            q,
            -(gamma[0] * pp * pp + 2.0 * gamma[2] * pp * q + gamma[4] * q * q),
            -(gamma[1] * pp * pp + 2.0 * gamma[3] * pp * q + gamma[5] * q * q),
        ])
    };

    let mut y = [start.0, start.1, a0, b0];
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push(TraceSample {
        s: 0.0,
        u: y[0],
        v: y[1],
        ambient: p.position(y[0], y[1])?,
    });
    for k in 0..n_steps {
        y = rk4_step(&deriv, &y, h)?;
        let s = (k + 1) as f64 * h;
        if !p.contains(y[0], y[1]) {
            return Err(SurfaceError::DomainEscape {
                s,
                u: y[0],
                v: y[1],
            });
        }
        samples.push(TraceSample {
            s,
            u: y[0],
            v: y[1],
            ambient: p.position(y[0], y[1])?,
        });
    }
    Ok(SurfaceTrace { samples, step: h })
}

fn rk4_step<const N: usize, F>(f: &F, y: &[f64; N], h: f64) -> Result<[f64; N], SurfaceError>
where
    F: Fn(&[f64; N]) -> Result<[f64; N], SurfaceError>,
{
    let add_scaled = |y: &[f64; N], k: &[f64; N], c: f64| {
        let mut out = *y;
        for i in 0..N {
            out[i] += c * k[i];
        }
        out
    };
    let k1 = f(y)?;
    let k2 = f(&add_scaled(y, &k1, h / 2.0))?;
    let k3 = f(&add_scaled(y, &k2, h / 2.0))?;
    let k4 = f(&add_scaled(y, &k3, h))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Which principal-curvature branch a curvature-line trace follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The branch with the larger eigenvalue at the start point.
    Max,
    /// The branch with the smaller eigenvalue at the start point.
    Min,
}

#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub ambient: Vec<f64>,
    /// Eigenvalue of the followed branch at this point.
    pub lambda: f64,
}

/// How a curvature-line trace ended.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEnd {
    Completed,
    /// The umbilic tolerance tripped mid-trace; the trace is truncated here.
    UmbilicStop { s: f64, u: f64, v: f64 },
}

#[derive(Debug, Clone)]
pub struct CurvatureLineTrace {
    pub samples: Vec<CurvatureSample>,
    pub step: f64,
    pub end: TraceEnd,
}

enum FieldEval {
    Dir { uv: [f64; 2], ambient: Vec<f64>, lambda: f64 },
    Umbilic,
}

// Principal direction field of the branch closest to `reference`,
// sign-aligned with it.
fn principal_field(
    p: &SurfacePatch,
    u: f64,
    v: f64,
    reference: &[f64],
    opts: &SurfaceOptions,
) -> Result<FieldEval, SurfaceError> {
    let shape = shape_operator(p, u, v, opts)?;
    let Some(dirs) = shape.directions else {
        return Ok(FieldEval::Umbilic);
    };
    let score0 = linalg::dot(&dirs[0].ambient, reference).abs();
    let score1 = linalg::dot(&dirs[1].ambient, reference).abs();
    let pick = if score0 >= score1 { 0 } else { 1 };
    let d = &dirs[pick];
    let sign = if linalg::dot(&d.ambient, reference) >= 0.0 {
        1.0
    } else {
        -1.0
    };
    Ok(FieldEval::Dir {
        uv: [sign * d.uv[0], sign * d.uv[1]],
        ambient: linalg::scale(&d.ambient, sign),
        lambda: shape.eigenvalues[pick],
    })
}

/// Traces a line of curvature: integrates the chosen principal-direction
/// field from `start`, following the branch continuously (the direction
/// sign is chosen to keep ⟨current, previous⟩ > 0).
///
/// An umbilic at the start is an error; hitting the umbilic tolerance
/// mid-trace truncates the trace and reports it in [`TraceEnd`].
pub fn line_of_curvature(
    p: &SurfacePatch,
    start: (f64, f64),
    branch: Branch,
    length: f64,
    step: f64,
    opts: &TraceOptions,
) -> Result<CurvatureLineTrace, SurfaceError> {
    if p.dim() != 3 {
        return Err(SurfaceError::NotSupported("curvature-line integration"));
    }
    assert!(length > 0.0 && step > 0.0, "length and step must be positive");
    let shape = shape_operator(p, start.0, start.1, &opts.surface)?;
    let dirs = shape.directions.as_ref().ok_or(SurfaceError::Umbilic {
        u: start.0,
        v: start.1,
    })?;
    let pick = match branch {
        Branch::Max => 0,
        Branch::Min => 1,
    };
    let mut reference = dirs[pick].ambient.clone();
    let mut lambda = shape.eigenvalues[pick];

    let n_steps = (length / step).ceil().max(1.0) as usize;
    let h = length / n_steps as f64;
    let mut y = [start.0, start.1];
    let mut samples = vec![CurvatureSample {
        s: 0.0,
        u: y[0],
        v: y[1],
        ambient: p.position(y[0], y[1])?,
        lambda,
    }];

    for k in 0..n_steps {
        let deriv = |state: &[f64; 2]| -> Result<[f64; 2], SurfaceError> {
            match principal_field(p, state[0], state[1], &reference, &opts.surface)? {
                FieldEval::Dir { uv, .. } => Ok(uv),
                FieldEval::Umbilic => Err(SurfaceError::Umbilic {
                    u: state[0],
                    v: state[1],
                }),
            }
        };
        let next = match rk4_step(&deriv, &y, h) {
            Ok(next) => next,
            Err(SurfaceError::Umbilic { u, v }) => {
                return Ok(CurvatureLineTrace {
                    samples,
                    step: h,
                    end: TraceEnd::UmbilicStop {
                        s: k as f64 * h,
                        u,
                        v,
                    },
                })
            }
            Err(other) => return Err(other),
        };
        y = next;
        let s = (k + 1) as f64 * h;
        if !p.contains(y[0], y[1]) {
            return Err(SurfaceError::DomainEscape {
                s,
                u: y[0],
                v: y[1],
            });
        }
        match principal_field(p, y[0], y[1], &reference, &opts.surface)? {
            FieldEval::Dir { ambient, lambda: lam, .. } => {
                reference = ambient;
                lambda = lam;
            }
            FieldEval::Umbilic => {
                return Ok(CurvatureLineTrace {
                    samples,
                    step: h,
                    end: TraceEnd::UmbilicStop {
                        s,
                        u: y[0],
                        v: y[1],
                    },
                })
            }
        }
        samples.push(CurvatureSample {
            s,
            u: y[0],
            v: y[1],
            ambient: p.position(y[0], y[1])?,
            lambda,
        });
    }
    Ok(CurvatureLineTrace {
        samples,
        step: h,
        end: TraceEnd::Completed,
    })
}

/// A curve t ↦ (u(t), v(t)) in the parameter rectangle of a patch.
#[derive(Debug, Clone)]
pub struct SurfaceCurve {
    pub u: Expr,
    pub v: Expr,
    pub domain: (f64, f64),
}

impl SurfaceCurve {
    pub fn new(u: Expr, v: Expr, domain: (f64, f64)) -> Result<Self, SurfaceError> {
        if u.params().len() != 1 || u.params() != v.params() {
            return Err(SurfaceError::MixedParameters);
        }
        if !(domain.0 < domain.1) {
            return Err(SurfaceError::BadDomain);
        }
        Ok(SurfaceCurve { u, v, domain })
    }

    pub fn parse(u: &str, v: &str, param: &str, domain: (f64, f64)) -> Result<Self, SurfaceError> {
        Self::new(
            Expr::parse(u, &[param])?,
            Expr::parse(v, &[param])?,
            domain,
        )
    }

    pub fn at(&self, t: f64) -> Result<(f64, f64), SurfaceError> {
        Ok((self.u.evaluate(&[t])?, self.v.evaluate(&[t])?))
    }

    /// The ambient curve obtained by composing the patch with (u(t), v(t)).
    pub fn ambient(&self, p: &SurfacePatch) -> Result<CurveN, SurfaceError> {
        let comps: Vec<Expr> = p
            .components()
            .iter()
            .map(|c| c.substitute(&[self.u.clone(), self.v.clone()]))
            .collect();
        Ok(CurveN::new(comps, self.domain)?)
    }
}
