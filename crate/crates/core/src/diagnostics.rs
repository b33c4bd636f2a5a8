//! Regime classification, turning detection and monitored norms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::{PhysicalParams, SampledCurve};
use crate::integrator::{detect_event_times_with, Trajectory};
use crate::spectral::{FilterSpec, Interpolant};
use crate::velocity::rt_profile_with;

/// Width of the CRITICAL band around zero slope.
pub const DEFAULT_SLOPE_TOL: f64 = 1e-10;

/// Slope minima at or below this value (on a unit flat slope) are reported as
/// near-critical: candidates for vertical tangents.
pub const NEAR_CRITICAL_SLOPE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Stable,
    Critical,
    Unstable,
}

impl Regime {
    pub fn classify(min_slope: f64, slope_tol: f64) -> Self {
        if min_slope > slope_tol {
            Regime::Stable
        } else if min_slope < -slope_tol {
            Regime::Unstable
        } else {
            Regime::Critical
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Stable => "STABLE",
            Regime::Critical => "CRITICAL",
            Regime::Unstable => "UNSTABLE",
        }
    }
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Refines a nodal maximum of `f` (sampled as `values`) at index `i` using the
/// continuous function over the two adjacent grid cells.
fn refine_nodal_max(node_value: f64, alpha: f64, h: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (x, fx) = golden_max(&f, alpha - h, alpha + h);
    if fx >= node_value {
        (x, fx)
    } else {
        (alpha, node_value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeMin {
    pub value: f64,
    pub alpha: f64,
}

/// Minimum over `alpha` of `d(z1)/d(alpha)`, refined between nodes on the
/// spectral interpolant.
pub fn min_slope(curve: &SampledCurve, filter: &FilterSpec) -> SlopeMin {
    let d = curve.dz1(filter);
    let grid = curve.grid();
    let (i, _) = d
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    let it = Interpolant::new(&d).expect("even grid");
    let (alpha, v) = refine_nodal_max(-d[i], grid.node(i), grid.spacing(), |a| -it.eval(a));
    SlopeMin { value: -v, alpha }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    pub alpha: f64,
    pub z1: f64,
    pub z2: f64,
}

/// A local minimum of `d(z1)/d(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeMinimum {
    pub alpha: f64,
    pub value: f64,
    pub z1: f64,
    pub z2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningReport {
    pub min_slope: f64,
    pub argmin: f64,
    pub tangent_points: Vec<TangentPoint>,
    /// Every local minimum of the slope, ordered by `alpha`.
    pub local_minima: Vec<SlopeMinimum>,
    pub regime: Regime,
}

impl fmt::Display for TurningReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "regime = {}", self.regime.as_str())?;
        writeln!(f, "min_slope = {:.10e}", self.min_slope)?;
        writeln!(f, "argmin = {:.10e}", self.argmin)?;
        writeln!(f, "tangent_points = {}", self.tangent_points.len())?;
        for p in &self.tangent_points {
            writeln!(f, "  alpha = {:+.10e}  z = ({:+.10e}, {:+.10e})", p.alpha, p.z1, p.z2)?;
        }
        let near = self.minima_below(NEAR_CRITICAL_SLOPE);
        writeln!(f, "near_critical_minima = {}", near.len())?;
        for m in &near {
            writeln!(
                f,
                "  alpha = {:+.10e}  slope = {:+.10e}  z = ({:+.10e}, {:+.10e})",
                m.alpha, m.value, m.z1, m.z2
            )?;
        }
        Ok(())
    }
}

impl TurningReport {
    /// Local minima with slope at most `threshold`.
    pub fn minima_below(&self, threshold: f64) -> Vec<SlopeMinimum> {
        self.local_minima
            .iter()
            .copied()
            .filter(|m| m.value <= threshold)
            .collect()
    }
}

/// Cubic Lagrange interpolant through four equally spaced samples at
/// offsets -1, 0, 1, 2 (in units of h), evaluated at offset `s`.
fn cubic4(v: [f64; 4], s: f64) -> f64 {
    let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    v[0] * l0 + v[1] * l1 + v[2] * l2 + v[3] * l3
}

/// Root of `f` bracketed in `[a, b]` (`f(a)` and `f(b)` of opposite sign),
/// Illinois variant of regula falsi.
fn bracketed_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < tol {
            return c;
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if fc.abs() < 1e-15 {
            return c;
        }
    }
    0.5 * (a + b)
}

pub fn turning_report(curve: &SampledCurve, slope_tol: f64) -> TurningReport {
    turning_report_with(curve, slope_tol, &FilterSpec::default())
}

pub fn turning_report_with(curve: &SampledCurve, slope_tol: f64, filter: &FilterSpec) -> TurningReport {
    let grid = curve.grid();
    let n = grid.n();
    let h = grid.spacing();
    let d = curve.dz1(filter);
    let slope = Interpolant::new(&d).expect("even grid");
    let p1 = Interpolant::new(curve.p1()).expect("even grid");
    let z2 = Interpolant::new(curve.z2()).expect("even grid");
    let point = |alpha: f64| (alpha + p1.eval(alpha), z2.eval(alpha));
    let at = |i: isize| d[i.rem_euclid(n as isize) as usize];

    let mut tangent_points = Vec::new();
    for i in 0..n {
        let (a, b) = (d[i], d[(i + 1) % n]);
        if !((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)) {
            continue;
        }
        let ii = i as isize;
        let samples = [at(ii - 1), a, b, at(ii + 2)];
        let s = bracketed_root(|s| cubic4(samples, s), 0.0, 1.0, 1e-14);
        let x0 = grid.node(i);
        // polish on the spectral interpolant inside the same cell
        let mut alpha = x0 + s * h;
        let (la, lb) = (x0, x0 + h);
        if slope.eval(alpha).abs() > 1e-14 && slope.eval(la).signum() != slope.eval(lb).signum() {
            alpha = bracketed_root(|x| slope.eval(x), la, lb, 1e-15);
        }
        let (z1, z2v) = point(alpha);
        tangent_points.push(TangentPoint { alpha, z1, z2: z2v });
    }

    let mut local_minima = Vec::new();
    for (i, &di) in d.iter().enumerate() {
        let ii = i as isize;
        if di <= at(ii - 1) && di < at(ii + 1) {
            let (alpha, v) = refine_nodal_max(-di, grid.node(i), h, |x| -slope.eval(x));
            let (z1, z2v) = point(alpha);
            local_minima.push(SlopeMinimum {
                alpha,
                value: -v,
                z1,
                z2: z2v,
            });
        }
    }

    let global = local_minima
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .map(|m| SlopeMin {
            value: m.value,
            alpha: m.alpha,
        })
        .unwrap_or_else(|| min_slope(curve, filter));
    TurningReport {
        min_slope: global.value,
        argmin: global.alpha,
        tangent_points,
        local_minima,
        regime: Regime::classify(global.value, slope_tol),
    }
}

/// Regime from the sign of the Rayleigh-Taylor profile; agrees with
/// [`Regime::classify`] on slopes when the density jump is positive.
pub fn rt_regime(curve: &SampledCurve, params: &PhysicalParams, slope_tol: f64) -> Regime {
    let rt = rt_profile_with(curve, params, &FilterSpec::default());
    let m = rt.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Regime::classify(m, slope_tol * params.density_jump().abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub times: Vec<f64>,
    pub sup_f: Vec<f64>,
    /// `None` on snapshots that are not graphs.
    pub sup_slope: Vec<Option<f64>>,
}

/// `max |z2(alpha)|` over the continuous interpolant, i.e. `||f||_inf` for a graph.
pub fn sup_abs_z2(curve: &SampledCurve) -> f64 {
    let z = curve.z2();
    let grid = curve.grid();
    let abs: Vec<f64> = z.iter().map(|x| x.abs()).collect();
    let (i, _) = abs
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    if abs[i] == 0.0 {
        return 0.0;
    }
    let it = Interpolant::new(z).expect("even grid");
    refine_nodal_max(abs[i], grid.node(i), grid.spacing(), |a| it.eval(a).abs()).1
}

/// `max |dz2/dz1|` over the continuous interpolant; `None` if the curve is not a graph.
pub fn sup_abs_slope(curve: &SampledCurve, filter: &FilterSpec) -> Option<f64> {
    let d1 = curve.dz1(filter);
    if d1.iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    let d2 = curve.dz2(filter);
    let grid = curve.grid();
    let ratio: Vec<f64> = d2.iter().zip(&d1).map(|(a, b)| (a / b).abs()).collect();
    let (i, _) = ratio
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    if ratio[i] == 0.0 {
        return Some(0.0);
    }
    let i1 = Interpolant::new(&d1).expect("even grid");
    let i2 = Interpolant::new(&d2).expect("even grid");
    Some(refine_nodal_max(ratio[i], grid.node(i), grid.spacing(), |a| (i2.eval(a) / i1.eval(a)).abs()).1)
}

pub fn norm_series(trajectory: &Trajectory) -> NormSeries {
    let filter = trajectory.dynamics.rhs.filter;
    NormSeries {
        times: trajectory.times.clone(),
        sup_f: trajectory.snapshots.iter().map(sup_abs_z2).collect(),
        sup_slope: trajectory
            .snapshots
            .iter()
            .map(|c| sup_abs_slope(c, &filter))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeInterval {
    pub start: f64,
    pub end: f64,
    pub regime: Regime,
}

/// Maximal runs of equal regime over the snapshots. Boundaries sit at located
/// event times when one falls between the two snapshots, else at the midpoint.
/// Intervals follow the traversal order and partition the time span.
pub fn regime_timeline(trajectory: &Trajectory, slope_tol: f64) -> Vec<RegimeInterval> {
    if trajectory.is_empty() {
        return Vec::new();
    }
    let filter = trajectory.dynamics.rhs.filter;
    let regimes: Vec<Regime> = trajectory
        .snapshots
        .iter()
        .map(|c| Regime::classify(min_slope(c, &filter).value, slope_tol))
        .collect();
    let events = detect_event_times_with(trajectory, slope_tol);
    let t = &trajectory.times;
    let mut out = Vec::new();
    let mut start = t[0];
    for w in 0..regimes.len() - 1 {
        if regimes[w] == regimes[w + 1] {
            continue;
        }
        let (lo, hi) = if t[w] <= t[w + 1] { (t[w], t[w + 1]) } else { (t[w + 1], t[w]) };
        let boundary = events
            .iter()
            .map(|e| e.time)
            .find(|&et| et >= lo && et <= hi)
            .unwrap_or(0.5 * (t[w] + t[w + 1]));
        out.push(RegimeInterval {
            start,
            end: boundary,
            regime: regimes[w],
        });
        start = boundary;
    }
    out.push(RegimeInterval {
        start,
        end: *t.last().expect("nonempty"),
        regime: *regimes.last().expect("nonempty"),
    });
    out
}

/// Regimes of a timeline with repeats and zero-length intervals removed.
pub fn regime_pattern(timeline: &[RegimeInterval]) -> Vec<Regime> {
    let mut out: Vec<Regime> = Vec::new();
    for iv in timeline {
        if iv.start == iv.end && timeline.len() > 1 {
            continue;
        }
        if out.last() != Some(&iv.regime) {
            out.push(iv.regime);
        }
    }
    out
}
