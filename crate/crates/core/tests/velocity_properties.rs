//! Symmetry and consistency properties of the periodic velocity field.

use std::f64::consts::PI;

use proptest::prelude::*;

use muskat_core::curve::{make_grid, PhysicalParams, SampledCurve};
use muskat_core::velocity::{periodic_rhs, VelocityField};

const SYMMETRY_TOL: f64 = 1e-12;

/// Smooth graph-like curve with a few random Fourier modes of modest size.
fn smooth_curve() -> impl Strategy<Value = (usize, [f64; 3], [f64; 3])> {
    (
        prop::sample::select(vec![32usize, 64, 128]),
        prop::array::uniform3(-0.15f64..0.15),
        prop::array::uniform3(-0.4f64..0.4),
    )
}

fn build(n: usize, a: [f64; 3], b: [f64; 3]) -> SampledCurve {
    let g = make_grid(n).unwrap();
    SampledCurve::from_fn(
        g,
        |x| a[0] * x.sin() + a[1] * (2.0 * x).cos() + a[2] * (3.0 * x).sin(),
        |x| b[0] * x.sin() + b[1] * (2.0 * x).sin() + b[2] * x.cos(),
    )
    .unwrap()
}

fn sup_diff(u: &VelocityField, v: &VelocityField) -> f64 {
    u.v1.iter()
        .zip(&v.v1)
        .chain(u.v2.iter().zip(&v.v2))
        .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

fn sup(v: &VelocityField) -> f64 {
    v.v1.iter().chain(&v.v2).fold(1e-300, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vertical_translation_leaves_velocity_unchanged((n, a, b) in smooth_curve(), c in -3.0f64..3.0) {
        let curve = build(n, a, b);
        let lifted = SampledCurve::new(
            curve.grid(),
            curve.p1().to_vec(),
            curve.z2().iter().map(|z| z + c).collect(),
        ).unwrap();
        let p = PhysicalParams::default();
        let (u, v) = (periodic_rhs(&curve, &p).unwrap(), periodic_rhs(&lifted, &p).unwrap());
        prop_assert!(sup_diff(&u, &v) <= SYMMETRY_TOL * sup(&u).max(1.0));
    }

    #[test]
    fn rotating_nodes_rotates_velocity((n, a, b) in smooth_curve(), shift in 1usize..32) {
        let curve = build(n, a, b);
        let g = curve.grid();
        let s = shift % n;
        let h = g.spacing();
        let p1: Vec<f64> = (0..n).map(|i| curve.p1()[(i + s) % n] + s as f64 * h).collect();
        let z2: Vec<f64> = (0..n).map(|i| curve.z2()[(i + s) % n]).collect();
        let rotated = SampledCurve::new(g, p1, z2).unwrap();
        let p = PhysicalParams::default();
        let u = periodic_rhs(&curve, &p).unwrap();
        let v = periodic_rhs(&rotated, &p).unwrap();
        let expected = VelocityField {
            v1: (0..n).map(|i| u.v1[(i + s) % n]).collect(),
            v2: (0..n).map(|i| u.v2[(i + s) % n]).collect(),
        };
        prop_assert!(sup_diff(&expected, &v) <= 1e-11 * sup(&u).max(1.0));
    }

    #[test]
    fn velocity_is_linear_in_density_jump((n, a, b) in smooth_curve(), rho in -20.0f64..20.0) {
        prop_assume!(rho.abs() > 1e-3);
        let curve = build(n, a, b);
        let unit = periodic_rhs(&curve, &PhysicalParams::new(1.0).unwrap()).unwrap();
        let scaled = periodic_rhs(&curve, &PhysicalParams::new(rho).unwrap()).unwrap();
        let expected = VelocityField {
            v1: unit.v1.iter().map(|x| rho * x).collect(),
            v2: unit.v2.iter().map(|x| rho * x).collect(),
        };
        prop_assert!(sup_diff(&expected, &scaled) <= SYMMETRY_TOL * sup(&expected));
    }
}

#[test]
fn flat_interface_moves_uniformly() {
    for n in [16usize, 64, 256] {
        let v = periodic_rhs(&SampledCurve::flat(make_grid(n).unwrap()), &PhysicalParams::default()).unwrap();
        assert!(v.v1.iter().all(|&x| x == v.v1[0]), "n = {n}");
        assert!(v.v2.iter().all(|&x| x == 0.0), "n = {n}");
    }
}

/// Integrand of the velocity at `alpha` for the analytic test curve
/// `z = (alpha + 0.1 sin 2a, 0.3 sin a)`, with its removable diagonal value.
fn smooth_integrand(alpha: f64, beta: f64) -> (f64, f64) {
    let z = |a: f64| (a + 0.1 * (2.0 * a).sin(), 0.3 * a.sin());
    let dz = |a: f64| (1.0 + 0.2 * (2.0 * a).cos(), 0.3 * a.cos());
    let d2z = |a: f64| (-0.4 * (2.0 * a).sin(), -0.3 * a.sin());
    let (za, da) = (z(alpha), dz(alpha));
    if beta == alpha {
        let q = da.0 * da.0 + da.1 * da.1;
        let s = d2z(alpha);
        return (2.0 * da.0 * s.0 / q, 2.0 * da.0 * s.1 / q);
    }
    let (zb, db) = (z(beta), dz(beta));
    let (x, y) = (za.0 - zb.0, za.1 - zb.1);
    let k = x.sin() / (y.cosh() - x.cos());
    (k * (da.0 - db.0), k * (da.1 - db.1))
}

/// Relative gap between the alternating rule at `n` and the trapezoid at `2n`.
fn gap(n: usize) -> f64 {
    let g = make_grid(n).unwrap();
    let p = PhysicalParams::default();
    let curve = SampledCurve::from_fn(g, |a| 0.1 * (2.0 * a).sin(), |a| 0.3 * a.sin()).unwrap();
    let v = periodic_rhs(&curve, &p).unwrap();
    let m = 2 * n;
    let h = 2.0 * PI / m as f64;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        let a = g.node(i);
        let (s1, s2) = (0..m).fold((0.0, 0.0), |(s1, s2), j| {
            let (f1, f2) = smooth_integrand(a, a + j as f64 * h);
            (s1 + f1, s2 + f2)
        });
        let (o1, o2) = (p.prefactor() * h * s1, p.prefactor() * h * s2);
        worst = worst.max((o1 - v.v1[i]).abs()).max((o2 - v.v2[i]).abs());
        scale = scale.max(o1.abs()).max(o2.abs());
    }
    worst / scale
}

#[test]
fn alternating_rule_converges_spectrally_to_trapezoid() {
    let gaps: Vec<f64> = [16usize, 32, 64].iter().map(|&n| gap(n)).collect();
    // Each doubling gains far more than any fixed algebraic order would.
    assert!(gaps[0] / gaps[1] > 1e3, "{gaps:?}");
    assert!(gaps[2] < 1e-12, "{gaps:?}");
}
