//! Regime classification, tangent location and timeline bookkeeping on a
//! trajectory that turns over.

use muskat_core::curve::{make_grid, PhysicalParams, Preset};
use muskat_core::diagnostics::{
    min_slope, regime_pattern, regime_timeline, rt_regime, turning_report, Regime, DEFAULT_SLOPE_TOL,
};
use muskat_core::integrator::{evolve_forward, StepControl, Trajectory};
use muskat_core::spectral::{FilterSpec, Interpolant};

const TANGENT_TOL: f64 = 1e-8;

fn turnover_run() -> Trajectory {
    let g = make_grid(256).unwrap();
    let c = Preset::ConjT0.sample(g).unwrap();
    let traj = evolve_forward(&c, &PhysicalParams::default(), 0.16, StepControl::fixed(1e-3), 1e-2).unwrap();
    assert!(traj.is_complete(), "{:?}", traj.failure_detail);
    traj
}

#[test]
fn rayleigh_taylor_sign_agrees_with_slope_sign() {
    let traj = turnover_run();
    let filter = FilterSpec::default();
    for rho in [1.0, 4.0 * std::f64::consts::PI] {
        let p = PhysicalParams::new(rho).unwrap();
        for (t, c) in traj.times.iter().zip(&traj.snapshots) {
            let by_slope = Regime::classify(
                c.dz1(&filter).iter().fold(f64::INFINITY, |a, &b| a.min(b)),
                DEFAULT_SLOPE_TOL,
            );
            assert_eq!(rt_regime(c, &p, DEFAULT_SLOPE_TOL), by_slope, "t = {t}, density jump {rho}");
        }
    }
}

#[test]
fn tangent_points_are_roots_of_the_interpolated_slope() {
    let traj = turnover_run();
    let (t, last) = traj.final_state();
    let report = turning_report(last, DEFAULT_SLOPE_TOL);
    assert_eq!(report.regime, Regime::Unstable, "t = {t}: {report}");
    assert!(report.tangent_points.len() >= 2, "{report}");
    let slope = Interpolant::new(&last.dz1(&FilterSpec::default())).unwrap();
    for p in &report.tangent_points {
        assert!(slope.eval(p.alpha).abs() < TANGENT_TOL, "{p:?}");
    }
    // Tangent points come in mirrored pairs for odd data.
    let sum: f64 = report.tangent_points.iter().map(|p| p.alpha).sum();
    assert!(sum.abs() < 1e-8, "{report}");
}

#[test]
fn timeline_partitions_the_run() {
    let traj = turnover_run();
    let timeline = regime_timeline(&traj, DEFAULT_SLOPE_TOL);
    assert_eq!(timeline.first().unwrap().start, traj.times[0]);
    assert_eq!(timeline.last().unwrap().end, *traj.times.last().unwrap());
    for w in timeline.windows(2) {
        assert_eq!(w[0].end, w[1].start);
        assert!(w[0].start <= w[0].end);
    }
    assert_eq!(regime_pattern(&timeline), vec![Regime::Stable, Regime::Unstable]);
    // The boundary is the located crossing of the minimum slope.
    let boundary = timeline[0].end;
    let filter = FilterSpec::default();
    let before = traj.times.iter().rposition(|&t| t <= boundary).unwrap();
    assert!(min_slope(&traj.snapshots[before], &filter).value > 0.0);
    assert!(min_slope(&traj.snapshots[before + 1], &filter).value < 0.0);
}
