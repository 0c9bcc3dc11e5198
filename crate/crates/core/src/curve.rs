//! Frenet apparatus for regular parametric curves in Eⁿ.
//!
//! A [`CurveN`] is a list of n ≥ 2 expression components in one shared
//! parameter over a closed interval. [`frenet`] builds the orthonormal
//! moving frame V₁…Vₙ by Gram-Schmidt on the first n−1 derivatives and
//! orients Vₙ with the generalized cross product, so det(V₁…Vₙ) = +1 and
//! in E³ the last vector is the usual binormal T × V₂. Curvatures come from
//! the frame equations; kᵢ ≥ 0 for i ≤ n−2 while the last one is signed by
//! the oriented frame (ordinary signed torsion in E³).

use crate::expr::{DomainError, Expr, ParseError};
use crate::grid;
use crate::linalg;

pub use crate::linalg::generalized_cross;

/// Errors from curve construction and the Frenet pipeline.
#[derive(Debug, Clone, thiserror::Error)]
pub enum CurveError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("a curve needs at least two components, got {0}")]
    TooFewComponents(usize),
    #[error("all components must use the same single parameter")]
    MixedParameters,
    #[error("degenerate domain: [{0}, {1}]")]
    BadDomain(f64, f64),
    #[error("curve is not regular at t = {t} (speed {speed:.3e})")]
    NonRegular { t: f64, speed: f64 },
    #[error("Frenet frame degenerate at order {order} (t = {t}); valid order {}", partial.order)]
    FrameDegenerate {
        t: f64,
        /// 1-based derivative order whose Gram-Schmidt residual vanished.
        order: usize,
        /// The frame that was still valid.
        partial: Box<FrenetData>,
    },
    #[error("frame index {index} out of range 1..={dim}")]
    BadFrameIndex { index: usize, dim: usize },
    #[error("direction must be a unit vector (norm {0})")]
    NotUnit(f64),
}

/// An n-component parametric curve with a closed domain interval.
#[derive(Debug, Clone)]
pub struct CurveN {
    comps: Vec<Expr>,
    domain: (f64, f64),
}

impl CurveN {
    pub fn new(comps: Vec<Expr>, domain: (f64, f64)) -> Result<Self, CurveError> {
        if comps.len() < 2 {
            return Err(CurveError::TooFewComponents(comps.len()));
        }
        let params = comps[0].params();
        if params.len() != 1 || comps.iter().any(|c| c.params() != params) {
            return Err(CurveError::MixedParameters);
        }
        if !(domain.0 < domain.1) {
            return Err(CurveError::BadDomain(domain.0, domain.1));
        }
        Ok(CurveN { comps, domain })
    }

    /// Parses each component string against the single parameter.
    pub fn parse(comps: &[&str], param: &str, domain: (f64, f64)) -> Result<Self, CurveError> {
        let comps = comps
            .iter()
            .map(|s| Expr::parse(s, &[param]))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(comps, domain)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn param(&self) -> &str {
        &self.comps[0].params()[0]
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn position(&self, t: f64) -> Result<Vec<f64>, CurveError> {
        self.comps
            .iter()
            .map(|c| c.evaluate(&[t]).map_err(CurveError::from))
            .collect()
    }

    /// Expression towers `d^k/dt^k` of every component for k = 1..=order.
    pub(crate) fn derivative_exprs(&self, order: usize) -> Vec<Vec<Expr>> {
        let param = self.param().to_string();
        let mut tower: Vec<Vec<Expr>> = Vec::with_capacity(order);
        let mut prev: Vec<Expr> = self.comps.clone();
        for _ in 0..order {
            let next: Vec<Expr> = prev
                .iter()
                .map(|c| c.differentiate(&param).expect("declared parameter"))
                .collect();
            tower.push(next.clone());
            prev = next;
        }
        tower
    }

    /// α′(t), α″(t), …, α^(m)(t) by symbolic differentiation then evaluation.
    pub fn derivatives(&self, t: f64, order: usize) -> Result<Vec<Vec<f64>>, CurveError> {
        assert!(order >= 1, "derivative order must be at least 1");
        let tower = self.derivative_exprs(order);
        eval_tower(&tower, t)
    }

    /// Composes the curve with `t = sub(w)`, yielding a curve in `sub`'s
    /// parameter over `domain`.
    pub fn reparametrize(&self, sub: &Expr, domain: (f64, f64)) -> Result<CurveN, CurveError> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.substitute(std::slice::from_ref(sub)))
            .collect();
        CurveN::new(comps, domain)
    }

    /// Zero-pads the components up to `dim` ambient coordinates.
    pub fn embed(&self, dim: usize) -> CurveN {
        assert!(dim >= self.dim());
        let zero = self.comps[0].lift(0.0);
        let mut comps = self.comps.clone();
        comps.resize(dim, zero);
        CurveN {
            comps,
            domain: self.domain,
        }
    }
}

fn eval_tower(tower: &[Vec<Expr>], t: f64) -> Result<Vec<Vec<f64>>, CurveError> {
    tower
        .iter()
        .map(|comps| {
            comps
                .iter()
                .map(|c| c.evaluate(&[t]).map_err(CurveError::from))
                .collect()
        })
        .collect()
}

/// Tolerances for regularity and frame rank decisions.
#[derive(Debug, Clone, Copy)]
pub struct FrenetOptions {
    /// Minimum speed ‖α′‖ for the curve to count as regular.
    pub tol_reg: f64,
    /// Gram-Schmidt rank tolerance, relative to the largest derivative norm.
    pub tol_rank: f64,
}

impl Default for FrenetOptions {
    fn default() -> Self {
        FrenetOptions {
            tol_reg: 1e-9,
            tol_rank: 1e-10,
        }
    }
}

/// Orthonormal moving frame and curvatures at one parameter value.
#[derive(Debug, Clone)]
pub struct FrenetData {
    pub t: f64,
    /// Valid frame order k ≤ n.
    pub order: usize,
    /// Frame vectors V₁..V_k, each a unit vector in ℝⁿ.
    pub frame: Vec<Vec<f64>>,
    /// Curvatures k₁..k_{k−1}.
    pub curvatures: Vec<f64>,
}

/// Frenet frame and curvatures of `c` at `t` with default tolerances.
pub fn frenet(c: &CurveN, t: f64) -> Result<FrenetData, CurveError> {
    frenet_with(c, t, &FrenetOptions::default())
}

pub fn frenet_with(c: &CurveN, t: f64, opts: &FrenetOptions) -> Result<FrenetData, CurveError> {
    let tower = c.derivative_exprs(c.dim());
    frenet_from_tower(c, &tower, t, opts)
}

pub(crate) fn frenet_from_tower(
    c: &CurveN,
    tower: &[Vec<Expr>],
    t: f64,
    opts: &FrenetOptions,
) -> Result<FrenetData, CurveError> {
    let n = c.dim();
    let derivs = eval_tower(tower, t)?;
    frenet_from_derivatives(&derivs, n, t, opts)
}

/// Frame construction from already-evaluated derivatives α′..α^(n).
pub fn frenet_from_derivatives(
    derivs: &[Vec<f64>],
    n: usize,
    t: f64,
    opts: &FrenetOptions,
) -> Result<FrenetData, CurveError> {
    assert!(derivs.len() >= n, "need derivatives up to order n");
    let speed = linalg::norm(&derivs[0]);
    if speed <= opts.tol_reg {
        return Err(CurveError::NonRegular { t, speed });
    }

    let ortho = linalg::orthonormalize(&derivs[..n - 1], opts.tol_rank);
    if let Some(k) = ortho.degenerate_at {
        // Valid partial frame V₁..V_k with curvatures k₁..k_{k−1}.
        let curvatures = (0..k.saturating_sub(1))
            .map(|i| {
                linalg::dot(&derivs[i + 1], &ortho.basis[i + 1])
                    / (ortho.residual_norms[i] * speed)
            })
            .collect();
        let partial = FrenetData {
            t,
            order: k,
            frame: ortho.basis,
            curvatures,
        };
        return Err(CurveError::FrameDegenerate {
            t,
            order: k + 1,
            partial: Box::new(partial),
        });
    }

    let mut frame = ortho.basis;
    // Last vector by generalized cross product, signed so det(V₁..Vₙ) = +1.
    let w = linalg::generalized_cross(&frame);
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    let wn = linalg::norm(&w);
    frame.push(linalg::scale(&w, sign / wn));

    let mut curvatures: Vec<f64> = (0..n.saturating_sub(2))
        .map(|i| ortho.residual_norms[i + 1] / (ortho.residual_norms[i] * speed))
        .collect();
    // The last curvature is signed by the oriented frame; it needs α^(n).
    curvatures.push(
        linalg::dot(&derivs[n - 1], &frame[n - 1]) / (ortho.residual_norms[n - 2] * speed),
    );

    Ok(FrenetData {
        t,
        order: n,
        frame,
        curvatures,
    })
}

/// Evidence that a sampled scalar field is constant.
#[derive(Debug, Clone)]
pub struct ConstancyReport {
    /// The sampled values, in sampling order.
    pub values: Vec<f64>,
    pub mean: f64,
    /// Largest |value − mean| over the samples.
    pub max_deviation: f64,
    pub tolerance: f64,
    /// Points skipped because the field was undefined there.
    pub excluded: usize,
    /// Whether |·| was applied to the samples before aggregating.
    pub absolute: bool,
    /// Set when the mean is itself below tolerance: the sampled angle sits
    /// at a right angle, which some constancy notions treat separately.
    pub right_angle: bool,
}

impl ConstancyReport {
    pub fn from_values(values: Vec<f64>, tolerance: f64, absolute: bool, excluded: usize) -> Self {
        assert!(!values.is_empty(), "constancy report needs samples");
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let max_deviation = values
            .iter()
            .map(|v| (v - mean).abs())
            .fold(0.0, f64::max);
        ConstancyReport {
            values,
            mean,
            max_deviation,
            tolerance,
            excluded,
            absolute,
            right_angle: mean.abs() <= tolerance,
        }
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn is_constant(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// Options for [`slant_helix_report`].
#[derive(Debug, Clone, Copy)]
pub struct SlantOptions {
    /// Constancy tolerance for the sampled angle (symbolic pipeline).
    pub tol_const: f64,
    pub frenet: FrenetOptions,
}

impl Default for SlantOptions {
    fn default() -> Self {
        SlantOptions {
            tol_const: 1e-6,
            frenet: FrenetOptions::default(),
        }
    }
}

/// Samples ⟨V_index(t), x⟩ on a uniform grid and reports its constancy.
///
/// `index` is 1-based: 1 is the unit tangent, `dim` the last frame vector.
pub fn slant_helix_report(
    c: &CurveN,
    index: usize,
    x: &[f64],
    samples: usize,
    opts: &SlantOptions,
) -> Result<ConstancyReport, CurveError> {
    let n = c.dim();
    if index == 0 || index > n {
        return Err(CurveError::BadFrameIndex { index, dim: n });
    }
    let xn = linalg::norm(x);
    if (xn - 1.0).abs() > 1e-8 {
        return Err(CurveError::NotUnit(xn));
    }
    let (a, b) = c.domain();
    let ts = grid::linspace(a, b, samples.max(2));
    let tower = c.derivative_exprs(n);
    let results = grid::map_line(&ts, |t| {
        frenet_from_tower(c, &tower, t, &opts.frenet).map(|fr| linalg::dot(&fr.frame[index - 1], x))
    });
    let mut values = Vec::with_capacity(results.len());
    for r in results {
        values.push(r?);
    }
    Ok(ConstancyReport::from_values(
        values,
        opts.tol_const,
        false,
        0,
    ))
}

// ---------------------------------------------------------------------------
// Arc length
// ---------------------------------------------------------------------------

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
fn adaptive_simpson<F: Fn(f64) -> Result<f64, CurveError>>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, CurveError> {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> Result<f64, CurveError>>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, CurveError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm)?;
        let frm = f(rm)?;
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Options for [`arc_length_parametrization`].
#[derive(Debug, Clone, Copy)]
pub struct ArcLengthOptions {
    /// Absolute quadrature tolerance for the total length.
    pub quad_tol: f64,
    /// Absolute tolerance of the s ↦ t inversion.
    pub invert_tol: f64,
    /// Samples used for the regularity pre-check.
    pub regularity_samples: usize,
    pub tol_reg: f64,
}

impl Default for ArcLengthOptions {
    fn default() -> Self {
        ArcLengthOptions {
            quad_tol: 1e-10,
            invert_tol: 1e-12,
            // odd, so the scan hits the midpoint of symmetric domains
            regularity_samples: 257,
            tol_reg: 1e-9,
        }
    }
}

/// Numeric evaluator for a curve reparametrized by arc length.
#[derive(Debug, Clone)]
pub struct ArcLengthCurve {
    comps: Vec<Expr>,
    d1: Vec<Expr>,
    d2: Vec<Expr>,
    domain: (f64, f64),
    length: f64,
    /// Cumulative length at evenly spaced parameter nodes.
    table: Vec<(f64, f64)>,
    opts: ArcLengthOptions,
}

/// Builds the arc-length evaluator for a regular curve.
///
/// The total length uses adaptive quadrature of ‖α′‖; the inversion s ↦ t
/// runs safeguarded Newton with a bisection fallback.
pub fn arc_length_parametrization(
    c: &CurveN,
    opts: &ArcLengthOptions,
) -> Result<ArcLengthCurve, CurveError> {
    let tower = c.derivative_exprs(2);
    let d1 = tower[0].clone();
    let d2 = tower[1].clone();
    let speed = |t: f64| -> Result<f64, CurveError> {
        let v: Vec<f64> = d1
            .iter()
            .map(|e| e.evaluate(&[t]))
            .collect::<Result<_, _>>()?;
        Ok(linalg::norm(&v))
    };

    let (a, b) = c.domain();
    for &t in &grid::linspace(a, b, opts.regularity_samples) {
        let s = speed(t)?;
        if s <= opts.tol_reg {
            return Err(CurveError::NonRegular { t, speed: s });
        }
    }

    let segments = 64;
    let nodes = grid::linspace(a, b, segments + 1);
    let mut table = Vec::with_capacity(segments + 1);
    let mut acc = 0.0;
    table.push((a, 0.0));
    let seg_tol = opts.quad_tol / segments as f64;
    for w in nodes.windows(2) {
        acc += adaptive_simpson(&speed, w[0], w[1], seg_tol)?;
        table.push((w[1], acc));
    }

    Ok(ArcLengthCurve {
        comps: c.components().to_vec(),
        d1,
        d2,
        domain: c.domain(),
        length: acc,
        table,
        opts: *opts,
    })
}

impl ArcLengthCurve {
    /// Total curve length.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Domain of the underlying parameter.
    pub fn param_domain(&self) -> (f64, f64) {
        self.domain
    }

    fn speed_at(&self, t: f64) -> Result<f64, CurveError> {
        let v: Vec<f64> = self
            .d1
            .iter()
            .map(|e| e.evaluate(&[t]))
            .collect::<Result<_, _>>()?;
        Ok(linalg::norm(&v))
    }

    /// Inverts arc length to the original parameter, `s ∈ [0, L]`.
    pub fn param_at(&self, s: f64) -> Result<f64, CurveError> {
        let s = s.clamp(0.0, self.length);
        // locate the bracketing table segment
        let idx = match self
            .table
            .binary_search_by(|(_, si)| si.total_cmp(&s))
        {
            Ok(i) => return Ok(self.table[i].0),
            Err(i) => i.clamp(1, self.table.len() - 1),
        };
        let (t0, s0) = self.table[idx - 1];
        let (t1, _) = self.table[idx];
        let speed = |t: f64| self.speed_at(t);
        let target = s - s0;
        let seg_tol = (self.opts.quad_tol / 64.0).min(1e-12);
        let g = |t: f64| -> Result<f64, CurveError> {
            Ok(adaptive_simpson(&speed, t0, t, seg_tol)? - target)
        };
        let (mut lo, mut hi) = (t0, t1);
        let mut t = t0 + (t1 - t0) * 0.5;
        for _ in 0..100 {
            let gt = g(t)?;
            if gt > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = gt / self.speed_at(t)?;
            let mut next = t - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= self.opts.invert_tol {
                return Ok(next);
            }
            t = next;
        }
        Ok(t)
    }

    /// Position γ(s).
    pub fn position(&self, s: f64) -> Result<Vec<f64>, CurveError> {
        let t = self.param_at(s)?;
        self.comps
            .iter()
            .map(|c| c.evaluate(&[t]).map_err(CurveError::from))
            .collect()
    }

    /// γ′(s) (a unit vector) or γ″(s) by the chain rule.
    pub fn derivative(&self, s: f64, order: usize) -> Result<Vec<f64>, CurveError> {
        assert!(order == 1 || order == 2, "orders 1 and 2 are supported");
        let t = self.param_at(s)?;
        let a1: Vec<f64> = self
            .d1
            .iter()
            .map(|e| e.evaluate(&[t]))
            .collect::<Result<_, _>>()?;
        let v = linalg::norm(&a1);
        if order == 1 {
            return Ok(linalg::scale(&a1, 1.0 / v));
        }
        let a2: Vec<f64> = self
            .d2
            .iter()
            .map(|e| e.evaluate(&[t]))
            .collect::<Result<_, _>>()?;
        // γ″ = α″/v² − α′ ⟨α′, α″⟩ / v⁴
        let mut out = linalg::scale(&a2, 1.0 / (v * v));
        let c = linalg::dot(&a1, &a2) / (v * v * v * v);
        linalg::axpy(&mut out, -c, &a1);
        Ok(out)
    }
}
