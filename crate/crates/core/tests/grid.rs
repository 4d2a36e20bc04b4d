mod common;

use std::f64::consts::PI;

use common::{grid, max_diff, smooth_boundary, smooth_scalar};
use mhdl::grid::{
    boundary_norm, inverse_surface_laplacian, surface_laplacian, tangential_derivative, vertical_derivative,
    volume_norm, volume_norm_sq, BoundaryField, Face, ScalarField,
};
use proptest::prelude::*;

/// Physical-space trapezoid oracle for `‖f‖₀²`.
fn l2_sq_direct(f: &ScalarField) -> f64 {
    let g = f.grid();
    let n3 = g.n3();
    (0..=n3)
        .map(|k| {
            let w = if k == 0 || k == n3 { 0.5 } else { 1.0 } / n3 as f64;
            w * f.level(k).iter().map(|x| x * x).sum::<f64>() / g.plane_len() as f64
        })
        .sum()
}

fn mean_free(g: &BoundaryField) -> BoundaryField {
    let mut out = g.clone();
    for face in [Face::Bottom, Face::Top] {
        let m = g.face(face).iter().sum::<f64>() / g.face(face).len() as f64;
        out.face_mut(face).iter_mut().for_each(|x| *x -= m);
    }
    out
}

#[test]
fn mixed_tangential_partials_commute() {
    let f = smooth_scalar(grid(16), 3, 4);
    let a = tangential_derivative(&tangential_derivative(&f, 1), 2);
    let b = tangential_derivative(&tangential_derivative(&f, 2), 1);
    assert!(max_diff(&a, &b) < 1e-10);
}

#[test]
fn sine_h1_norm_matches_analytic_integral() {
    let f = ScalarField::from_fn(grid(16), |x, _, _| (2.0 * PI * x).sin());
    let want = (0.5 + 4.0 * PI * PI / 2.0).sqrt();
    assert!((volume_norm(&f, 1).unwrap() - want).abs() < 1e-10);
}

#[test]
fn cosine_cosine_surface_laplacian() {
    let g = grid(16);
    let b = BoundaryField::from_fn(g, |_, x, y| (2.0 * PI * x).cos() * (2.0 * PI * y).cos());
    let l = surface_laplacian(&b);
    let want = b.scaled(-8.0 * PI * PI);
    assert!((&l - &want).max_abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivatives_are_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let g = grid(8);
        let (f, h) = (smooth_scalar(g, s1, 3), smooth_scalar(g, s2, 3));
        let comb = &f.scaled(a) + &h.scaled(b);
        for axis in [1, 2] {
            let lhs = tangential_derivative(&comb, axis);
            let rhs = &tangential_derivative(&f, axis).scaled(a) + &tangential_derivative(&h, axis).scaled(b);
            prop_assert!(max_diff(&lhs, &rhs) < 1e-11);
        }
        let lhs = vertical_derivative(&comb, 1);
        let rhs = &vertical_derivative(&f, 1).scaled(a) + &vertical_derivative(&h, 1).scaled(b);
        prop_assert!(max_diff(&lhs, &rhs) < 1e-11);
    }

    #[test]
    fn tangential_and_vertical_derivatives_commute(s in any::<u64>()) {
        let f = smooth_scalar(grid(8), s, 3);
        for axis in [1, 2] {
            let a = vertical_derivative(&tangential_derivative(&f, axis), 1);
            let b = tangential_derivative(&vertical_derivative(&f, 1), axis);
            prop_assert!(max_diff(&a, &b) < 1e-10);
        }
    }

    #[test]
    fn parseval_matches_physical_quadrature(s in any::<u64>()) {
        let f = smooth_scalar(grid(8), s, 3);
        let spectral = volume_norm_sq(&f, 0).unwrap();
        let direct = l2_sq_direct(&f);
        prop_assert!((spectral - direct).abs() <= 1e-12 * direct.max(1e-300));
    }

    #[test]
    fn boundary_norm_is_monotone_in_s(s in any::<u64>()) {
        let g = smooth_boundary(grid(8), s, 4);
        let norms: Vec<f64> = (-1..=7).map(|t| boundary_norm(&g, f64::from(t) / 2.0).unwrap()).collect();
        prop_assert!(norms.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-14)));
    }

    #[test]
    fn half_norm_interpolates(s in any::<u64>()) {
        let g = smooth_boundary(grid(8), s, 4);
        let (n0, nh, n1) = (boundary_norm(&g, 0.0).unwrap(), boundary_norm(&g, 0.5).unwrap(), boundary_norm(&g, 1.0).unwrap());
        prop_assert!(nh <= (n0 * n1).sqrt() * (1.0 + 1e-14));
    }

    #[test]
    fn surface_laplacian_inverts_on_mean_free_data(s in any::<u64>()) {
        let g = smooth_boundary(grid(8), s, 3);
        let back = surface_laplacian(&inverse_surface_laplacian(&g));
        prop_assert!((&back - &mean_free(&g)).max_abs() < 1e-12);
    }
}
