//! Frame-level invariants of the Frenet pipeline: the frame differential
//! equations, orthonormality and orientation, parametrization invariance of
//! the curvatures, and constancy of the last frame vector for planar
//! curves. The frame derivative oracle is a central finite difference of
//! the frames themselves.

use helixlab_core::curve::{frenet, CurveN};
use helixlab_core::grid;
use helixlab_core::linalg;

fn unit_speed_test_curves() -> Vec<(&'static str, CurveN)> {
    let sqrt2_inv = "0.7071067811865476";
    vec![
        (
            "plane curve",
            CurveN::parse(
                &["(3/5)*sin(u)", "1 + cos(u)", "(4/5)*sin(u)"],
                "u",
                (0.0, 5.0 * std::f64::consts::PI),
            )
            .unwrap(),
        ),
        (
            "unit circle",
            CurveN::parse(
                &["cos(t)", "sin(t)", "0"],
                "t",
                (0.0, 2.0 * std::f64::consts::PI),
            )
            .unwrap(),
        ),
        (
            "unit-speed helix",
            CurveN::parse(
                &[
                    &format!("cos({sqrt2_inv}*t)"),
                    &format!("sin({sqrt2_inv}*t)"),
                    &format!("{sqrt2_inv}*t"),
                ],
                "t",
                (0.0, 8.0),
            )
            .unwrap(),
        ),
    ]
}

/// dV_i/ds must match −k_{i−1} V_{i−1} + k_i V_{i+1} along unit-speed
/// curves (finite-difference frame derivative vs the frame equations).
#[test]
fn frame_equations_residual() {
    for (name, c) in unit_speed_test_curves() {
        let (a, b) = c.domain();
        let margin = 1e-3 * (b - a);
        let h = 1e-5;
        for &t in &grid::linspace(a + margin, b - margin, 100) {
            let f0 = frenet(&c, t).unwrap();
            let fp = frenet(&c, t + h).unwrap();
            let fm = frenet(&c, t - h).unwrap();
            let speed = linalg::norm(&c.derivatives(t, 1).unwrap()[0]);
            let n = c.dim();
            for i in 0..n {
                // planar curves have sign-stable frames everywhere we sample
                let dv: Vec<f64> = fp.frame[i]
                    .iter()
                    .zip(&fm.frame[i])
                    .map(|(p, m)| (p - m) / (2.0 * h * speed))
                    .collect();
                let mut expect = vec![0.0; n];
                if i > 0 {
                    linalg::axpy(&mut expect, -f0.curvatures[i - 1], &f0.frame[i - 1]);
                }
                if i + 1 < n {
                    linalg::axpy(&mut expect, f0.curvatures[i], &f0.frame[i + 1]);
                }
                let res = linalg::norm(&linalg::sub(&dv, &expect));
                assert!(
                    res <= 1e-5,
                    "{name}: frame equation residual {res} at t = {t}, row {i}"
                );
            }
        }
    }
}

#[test]
fn frames_are_orthonormal_and_positively_oriented() {
    for (name, c) in unit_speed_test_curves() {
        let (a, b) = c.domain();
        for &t in &grid::linspace(a + 0.01, b - 0.01, 50) {
            let fr = frenet(&c, t).unwrap();
            let n = c.dim();
            assert_eq!(fr.order, n);
            for i in 0..n {
                for j in 0..n {
                    let d = linalg::dot(&fr.frame[i], &fr.frame[j]);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (d - expect).abs() <= 1e-10,
                        "{name}: orthonormality off by {} at t = {t}",
                        (d - expect).abs()
                    );
                }
            }
            let det = linalg::det(&fr.frame);
            assert!((det - 1.0).abs() <= 1e-10, "{name}: det = {det} at t = {t}");
        }
    }
}

/// Reparametrizing by u = 2w leaves every curvature unchanged at matched
/// points.
#[test]
fn curvatures_are_parametrization_invariant() {
    let c = CurveN::parse(
        &["(3/5)*sin(u)", "1 + cos(u)", "(4/5)*sin(u)"],
        "u",
        (0.0, 5.0 * std::f64::consts::PI),
    )
    .unwrap();
    let sub = helixlab_core::expr::Expr::parse("2*w", &["w"]).unwrap();
    let re = c
        .reparametrize(&sub, (0.0, 2.5 * std::f64::consts::PI))
        .unwrap();
    for &w in &grid::linspace(0.05, 2.4 * std::f64::consts::PI, 60) {
        let orig = frenet(&c, 2.0 * w).unwrap();
        let repar = frenet(&re, w).unwrap();
        for (a, b) in orig.curvatures.iter().zip(&repar.curvatures) {
            assert!(
                (a - b).abs() <= 1e-8,
                "curvature changed under reparametrization at w = {w}: {a} vs {b}"
            );
        }
    }
}

/// A curve inside a tilted 2-plane of E³ keeps its last frame vector fixed.
#[test]
fn planar_curve_has_constant_last_frame_vector() {
    // ellipse in the plane spanned by (1, 0, 1)/√2 and (0, 1, 0)
    let c = CurveN::parse(
        &[
            "1 + 1.4142135623730951*cos(t)",
            "2*sin(t)",
            "-0.5 + 1.4142135623730951*cos(t)",
        ],
        "t",
        (0.0, 2.0 * std::f64::consts::PI),
    )
    .unwrap();
    let ts = grid::linspace(0.0, 2.0 * std::f64::consts::PI, 80);
    let reference = frenet(&c, ts[0]).unwrap().frame[2].clone();
    for &t in &ts {
        let v3 = frenet(&c, t).unwrap().frame[2].clone();
        let dev = linalg::norm(&linalg::sub(&v3, &reference));
        assert!(dev < 1e-9, "last frame vector drifted by {dev} at t = {t}");
    }
}

/// Closed forms for the circular helix (cos t, sin t, t): both curvatures
/// equal a/(a² + b²) = b/(a² + b²) = 1/2 for a = b = 1, confirmed by an
/// independent finite-difference route (E³ cross-product formulas).
#[test]
fn circular_helix_curvatures_against_oracles() {
    let c = CurveN::parse(&["cos(t)", "sin(t)", "t"], "t", (0.0, 12.0)).unwrap();
    let pos = |t: f64| vec![t.cos(), t.sin(), t];
    for &t in &grid::linspace(0.5, 11.5, 40) {
        let fr = frenet(&c, t).unwrap();
        assert!((fr.curvatures[0] - 0.5).abs() <= 1e-9);
        assert!((fr.curvatures[1] - 0.5).abs() <= 1e-9);

        // finite-difference oracle via k = ‖γ′×γ″‖/‖γ′‖³ and
        // τ = ⟨γ′×γ″, γ‴⟩/‖γ′×γ″‖²
        let h = 1e-2;
        let fd = |k: i32| pos(t + k as f64 * h);
        let d1: Vec<f64> = (0..3)
            .map(|i| (-fd(2)[i] + 8.0 * fd(1)[i] - 8.0 * fd(-1)[i] + fd(-2)[i]) / (12.0 * h))
            .collect();
        let d2: Vec<f64> = (0..3)
            .map(|i| {
                (-fd(2)[i] + 16.0 * fd(1)[i] - 30.0 * fd(0)[i] + 16.0 * fd(-1)[i] - fd(-2)[i])
                    / (12.0 * h * h)
            })
            .collect();
        let d3: Vec<f64> = (0..3)
            .map(|i| (fd(2)[i] - 2.0 * fd(1)[i] + 2.0 * fd(-1)[i] - fd(-2)[i]) / (2.0 * h * h * h))
            .collect();
        let cr = linalg::cross3(&d1, &d2);
        let k_oracle = linalg::norm(&cr) / linalg::norm(&d1).powi(3);
        let tau_oracle = linalg::dot(&cr, &d3) / linalg::dot(&cr, &cr);
        assert!((k_oracle - 0.5).abs() < 1e-5, "oracle k = {k_oracle}");
        assert!((tau_oracle - 0.5).abs() < 1e-4, "oracle tau = {tau_oracle}");
        assert!((fr.curvatures[0] - k_oracle).abs() < 1e-5);
        assert!((fr.curvatures[1] - tau_oracle).abs() < 1e-4);
    }
}
