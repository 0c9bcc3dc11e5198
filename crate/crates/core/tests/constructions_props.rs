//! Construction-level invariants: every extrusion passes the constant-angle
//! scan, the generated surface's normal has the closed form
//! −cos(θ)V₂ + sin(θ)B, its Gauss curvature vanishes, its mean curvature
//! matches the closed form along the rulings, and ruled surfaces over a
//! sphere have Φ_t parallel to the directrix tangent.

use helixlab_core::constructions::{
    closed_form_mean_curvature, extrude, extrusion_angle_report, plane_curve_surface,
    ruled_surface, ExtrusionSpec, Generator, NormalField, PlaneCurveOptions, RuledSpec,
};
use helixlab_core::curve::{frenet, CurveN};
use helixlab_core::expr::Expr;
use helixlab_core::grid;
use helixlab_core::linalg;
use helixlab_core::surface::{
    fundamental_forms, normal, ConstantAngleOptions, SurfaceOptions,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

/// A randomized smooth closed generator curve: a circle with a bounded
/// radial ripple, always regular.
fn random_generator(rng: &mut StdRng) -> CurveN {
    let amp = rng.random_range(0.05..0.2);
    let k = rng.random_range(2..5u32);
    let phase = rng.random_range(0.0..2.0 * PI);
    let r = format!("(1 + {amp}*sin({k}*t + {phase}))");
    CurveN::parse(
        &[&format!("{r}*cos(t)"), &format!("{r}*sin(t)")],
        "t",
        (0.0, 2.0 * PI),
    )
    .unwrap()
}

#[test]
fn every_extrusion_is_a_constant_angle_surface() {
    let mut rng = StdRng::seed_from_u64(21);
    let thetas = [0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, FRAC_PI_2];
    let opts = ConstantAngleOptions {
        tol_const: 1e-8,
        ..ConstantAngleOptions::default()
    };
    for i in 0..5 {
        let generator = random_generator(&mut rng);
        for &theta in &thetas {
            let spec = ExtrusionSpec::new(
                Generator::PlaneCurve(generator.clone()),
                theta,
                (0.0, 0.8),
            )
            .unwrap();
            let report = extrusion_angle_report(&spec, (36, 36), 12, &opts).unwrap();
            assert!(
                report.is_constant(),
                "curve {i}, theta {theta}: deviation {}",
                report.max_deviation
            );
            assert!(
                (report.mean - theta.sin()).abs() <= 1e-8,
                "curve {i}, theta {theta}: mean {}",
                report.mean
            );
        }
    }
}

#[test]
fn extruded_patch_agrees_with_pointwise_evaluation() {
    let mut rng = StdRng::seed_from_u64(22);
    let generator = random_generator(&mut rng);
    let spec =
        ExtrusionSpec::new(Generator::PlaneCurve(generator), FRAC_PI_4, (0.0, 1.0)).unwrap();
    let patch = extrude(&spec).unwrap();
    for &(t, s) in &[(0.3, 0.1), (2.0, 0.9), (5.5, 0.4)] {
        let a = patch.position(t, s).unwrap();
        let b = helixlab_core::constructions::extrude_point(&spec, &[t], s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

/// The unit normal of the generated surface is −cos(θ)V₂ + sin(θ)B up to
/// one global sign fixed at the first grid point.
#[test]
fn generated_surface_normal_closed_form() {
    let alpha = CurveN::parse(
        &["(3/5)*sin(u)", "1 + cos(u)", "(4/5)*sin(u)"],
        "u",
        (0.0, 5.0 * PI),
    )
    .unwrap();
    let theta = FRAC_PI_6;
    let built = plane_curve_surface(&alpha, theta, (0.0, 1.5), &PlaneCurveOptions::default())
        .unwrap();
    let opts = SurfaceOptions::default();
    let us = grid::linspace(0.1, 5.0 * PI - 0.1, 24);
    let vs = grid::linspace(0.0, 1.5, 8);
    let mut global_sign = 0.0;
    for &u in &us {
        let fr = frenet(&alpha, u).unwrap();
        for &v in &vs {
            let z = normal(&built.patch, u, v, &opts).unwrap();
            let mut expect = linalg::scale(&fr.frame[1], -theta.cos());
            linalg::axpy(&mut expect, theta.sin(), &built.binormal);
            if global_sign == 0.0 {
                global_sign = if linalg::dot(&z, &expect) >= 0.0 { 1.0 } else { -1.0 };
            }
            let dev = linalg::norm(&linalg::sub(&z, &linalg::scale(&expect, global_sign)));
            assert!(dev <= 1e-10, "normal off closed form by {dev} at ({u}, {v})");
        }
    }
}

#[test]
fn generated_surface_is_flat() {
    let alpha = CurveN::parse(
        &["(3/5)*sin(u)", "1 + cos(u)", "(4/5)*sin(u)"],
        "u",
        (0.0, 5.0 * PI),
    )
    .unwrap();
    let built = plane_curve_surface(&alpha, FRAC_PI_6, (0.0, PI), &PlaneCurveOptions::default())
        .unwrap();
    let opts = SurfaceOptions::default();
    let us = grid::linspace(0.0, 5.0 * PI, 30);
    let vs = grid::linspace(0.0, PI, 12);
    for &u in &us {
        for &v in &vs {
            match fundamental_forms(&built.patch, u, v, &opts) {
                Ok(ff) => assert!(ff.gauss.abs() <= 1e-8, "K = {} at ({u}, {v})", ff.gauss),
                Err(_) => continue, // singular points are excluded from the claim
            }
        }
    }
}

/// |H| from the forms matches the closed formula with k₁ = 1 at the four
/// reference ruling offsets.
#[test]
fn generated_surface_mean_curvature_matches_closed_form() {
    let alpha = CurveN::parse(
        &["(3/5)*sin(u)", "1 + cos(u)", "(4/5)*sin(u)"],
        "u",
        (0.0, 5.0 * PI),
    )
    .unwrap();
    let theta = FRAC_PI_6;
    let built = plane_curve_surface(&alpha, theta, (0.0, PI), &PlaneCurveOptions::default())
        .unwrap();
    let opts = SurfaceOptions::default();
    for &v in &[0.0, 0.3, 0.9, 1.5] {
        let closed = closed_form_mean_curvature(1.0, theta, v).unwrap();
        for &u in &[0.4, 2.0, 7.0, 14.0] {
            let ff = fundamental_forms(&built.patch, u, v, &opts).unwrap();
            assert!(
                (ff.mean.abs() - closed.abs()).abs() <= 1e-8,
                "H mismatch at ({u}, {v}): {} vs {closed}",
                ff.mean
            );
        }
    }
}

/// For a directrix on the unit sphere, Φ_t stays parallel to the directrix
/// tangent (zero Gram residual), which is what makes the surface
/// developable.
#[test]
fn sphere_directrix_keeps_phi_t_parallel_to_tangent() {
    // a non-great circle path on S²
    let beta = CurveN::parse(
        &[
            "cos(t)*cos(0.4*sin(t))",
            "sin(t)*cos(0.4*sin(t))",
            "sin(0.4*sin(t))",
        ],
        "t",
        (0.0, 2.0 * PI),
    )
    .unwrap();
    let spec = RuledSpec::new(beta, NormalField::SpherePosition, FRAC_PI_4, (0.0, 1.0)).unwrap();
    let patch = ruled_surface(&spec, 32).unwrap();
    let beta4 = spec.directrix_embedded();
    for &t in &grid::linspace(0.1, 2.0 * PI - 0.1, 25) {
        for &s in &[0.2, 0.6, 1.0] {
            let jet = patch.jet(t, s).unwrap();
            let d1 = beta4.derivatives(t, 1).unwrap();
            let tangent = linalg::scale(&d1[0], 1.0 / linalg::norm(&d1[0]));
            let mut res = jet.pu.clone();
            linalg::axpy(&mut res, -linalg::dot(&jet.pu, &tangent), &tangent);
            let rel = linalg::norm(&res) / linalg::norm(&jet.pu).max(1.0);
            assert!(rel <= 1e-10, "Gram residual {rel} at (t, s) = ({t}, {s})");
        }
    }
}

/// The explicit-normal route must agree with the sphere-position shortcut.
#[test]
fn explicit_normal_field_matches_sphere_shortcut() {
    let circle = CurveN::parse(&["cos(t)", "sin(t)"], "t", (0.0, 2.0 * PI)).unwrap();
    let explicit = NormalField::Explicit(vec![
        Expr::parse("cos(t)", &["t"]).unwrap(),
        Expr::parse("sin(t)", &["t"]).unwrap(),
    ]);
    let a = ruled_surface(
        &RuledSpec::new(circle.clone(), NormalField::SpherePosition, FRAC_PI_6, (0.0, 1.0))
            .unwrap(),
        16,
    )
    .unwrap();
    let b = ruled_surface(
        &RuledSpec::new(circle, explicit, FRAC_PI_6, (0.0, 1.0)).unwrap(),
        16,
    )
    .unwrap();
    for &(t, s) in &[(0.2, 0.3), (1.5, 0.8), (4.0, 0.0)] {
        let pa = a.position(t, s).unwrap();
        let pb = b.position(t, s).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
