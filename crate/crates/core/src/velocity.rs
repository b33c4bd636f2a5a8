//! Right-hand side of the periodic contour equation, the Rayleigh-Taylor
//! profile, and the turnover predictor for `d(v1)/d(alpha)` at a vertical
//! tangent.
//!
//! The velocity at node `i` is the alternating-parity sum
//!
//! ```text
//! v(alpha_i) = 2h (rho- - rho+)/(4 pi) * sum_{j - i odd} K_ij (dz(alpha_i) - dz(alpha_j)),
//! K_ij = sin(dz1) / (cosh(dz2) - cos(dz1)),
//! ```
//!
//! with `dz1 = z1(alpha_i) - z1(alpha_j)`, `dz2 = z2(alpha_i) - z2(alpha_j)` and `dz`
//! the filtered spectral tangent. The kernel is evaluated through half-angle
//! products, `cosh(y) - cos(x) = 2 sinh^2(y/2) + 2 sin^2(x/2)`, so each pair
//! costs a handful of multiplications and no transcendental calls.

use crate::curve::{PhysicalParams, SampledCurve};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::spectral::{FilterSpec, Interpolant};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

/// Smallest kernel denominator `cosh(dz2) - cos(dz1)` seen over evaluated pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcChordReport {
    pub min_denominator: f64,
    pub pair: (usize, usize),
}

pub const DEFAULT_DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsOptions {
    pub filter: FilterSpec,
    pub denominator_floor: f64,
}

impl Default for RhsOptions {
    fn default() -> Self {
        Self {
            filter: FilterSpec::default(),
            denominator_floor: DEFAULT_DENOMINATOR_FLOOR,
        }
    }
}

/// Nodal positions and tangents feeding the alternating sum.
#[derive(Debug, Clone, Copy)]
pub struct NodalData<'a> {
    pub z1: &'a [f64],
    pub z2: &'a [f64],
    pub dz1: &'a [f64],
    pub dz2: &'a [f64],
}

struct HalfAngles<'a> {
    s: Vec<f64>,
    c: Vec<f64>,
    sh: Vec<f64>,
    ch: Vec<f64>,
    dz1: &'a [f64],
    dz2: &'a [f64],
}

impl<'a> HalfAngles<'a> {
    fn new(data: &NodalData<'a>) -> Self {
        let (s, c): (Vec<f64>, Vec<f64>) = data.z1.iter().map(|x| (0.5 * x).sin_cos()).unzip();
        let (sh, ch) = data
            .z2
            .iter()
            .map(|y| ((0.5 * y).sinh(), (0.5 * y).cosh()))
            .unzip();
        Self {
            s,
            c,
            sh,
            ch,
            dz1: data.dz1,
            dz2: data.dz2,
        }
    }

    /// Sum over `j - i` odd: `(sum_1, sum_2, min denominator, its j)`.
    #[inline]
    fn row(&self, i: usize) -> (f64, f64, f64, usize) {
        let n = self.s.len();
        let (si, ci, shi, chi) = (self.s[i], self.c[i], self.sh[i], self.ch[i]);
        let (ti1, ti2) = (self.dz1[i], self.dz2[i]);
        let mut acc1 = 0.0;
        let mut acc2 = 0.0;
        let mut min_q = f64::INFINITY;
        let mut arg = (i + 1) % n;
        let mut j = (i + 1) & 1;
        while j < n {
            // sin((z1_i - z1_j)/2), cos(...), sinh((z2_i - z2_j)/2)
            let sd = si * self.c[j] - ci * self.s[j];
            let cd = ci * self.c[j] + si * self.s[j];
            let shd = shi * self.ch[j] - chi * self.sh[j];
            let q = shd * shd + sd * sd;
            if q < min_q {
                min_q = q;
                arg = j;
            }
            let k = sd * cd / q;
            acc1 += k * (ti1 - self.dz1[j]);
            acc2 += k * (ti2 - self.dz2[j]);
            j += 2;
        }
        (acc1, acc2, 2.0 * min_q, arg)
    }
}

fn check_nodal(data: &NodalData<'_>) -> Result<usize> {
    let n = data.z1.len();
    for len in [data.z2.len(), data.dz1.len(), data.dz2.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid("nodes", format!("count {n} must be even")));
    }
    Ok(n)
}

fn assemble(
    rows: Vec<(f64, f64, f64, usize)>,
    weight: f64,
    floor: f64,
) -> Result<VelocityField> {
    let mut report = ArcChordReport {
        min_denominator: f64::INFINITY,
        pair: (0, 0),
    };
    let mut v1 = Vec::with_capacity(rows.len());
    let mut v2 = Vec::with_capacity(rows.len());
    for (i, (a1, a2, q, j)) in rows.into_iter().enumerate() {
        // NaN denominators count as failures too
        if !(q >= report.min_denominator) {
            report = ArcChordReport {
                min_denominator: q,
                pair: (i, j),
            };
        }
        v1.push(weight * a1);
        v2.push(weight * a2);
    }
    if !(report.min_denominator > floor) {
        return Err(Error::ArcChordFailure(report));
    }
    Ok(VelocityField { v1, v2 })
}

/// Alternating quadrature evaluated row by row on the calling thread.
///
/// `weight` multiplies every sum; for the contour equation it is
/// `2h (rho- - rho+)/(4 pi)`.
pub fn alternating_sum_sequential(data: &NodalData<'_>, weight: f64, floor: f64) -> Result<VelocityField> {
    let n = check_nodal(data)?;
    let half = HalfAngles::new(data);
    let rows = (0..n).map(|i| half.row(i)).collect();
    assemble(rows, weight, floor)
}

/// Same sums as [`alternating_sum_sequential`], rows distributed over the rayon
/// pool. Each row is summed in a fixed order, so the output is bitwise equal.
#[cfg(feature = "parallel")]
pub fn alternating_sum_parallel(data: &NodalData<'_>, weight: f64, floor: f64) -> Result<VelocityField> {
    let n = check_nodal(data)?;
    let half = HalfAngles::new(data);
    let rows = (0..n).into_par_iter().map(|i| half.row(i)).collect();
    assemble(rows, weight, floor)
}

pub fn alternating_sum(data: &NodalData<'_>, weight: f64, floor: f64) -> Result<VelocityField> {
    #[cfg(feature = "parallel")]
    {
        alternating_sum_parallel(data, weight, floor)
    }
    #[cfg(not(feature = "parallel"))]
    {
        alternating_sum_sequential(data, weight, floor)
    }
}

pub fn periodic_rhs(curve: &SampledCurve, params: &PhysicalParams) -> Result<VelocityField> {
    periodic_rhs_with(curve, params, &RhsOptions::default())
}

pub fn periodic_rhs_with(
    curve: &SampledCurve,
    params: &PhysicalParams,
    opts: &RhsOptions,
) -> Result<VelocityField> {
    let z1 = curve.z1();
    let dz1 = curve.dz1(&opts.filter);
    let dz2 = curve.dz2(&opts.filter);
    let data = NodalData {
        z1: &z1,
        z2: curve.z2(),
        dz1: &dz1,
        dz2: &dz2,
    };
    let weight = 2.0 * curve.grid().spacing() * params.prefactor();
    alternating_sum(&data, weight, opts.denominator_floor)
}

/// Per-node `g (rho- - rho+) d(z1)/d(alpha)`; positive everywhere means stable.
pub fn rt_profile(curve: &SampledCurve, params: &PhysicalParams) -> Vec<f64> {
    rt_profile_with(curve, params, &FilterSpec::default())
}

pub fn rt_profile_with(curve: &SampledCurve, params: &PhysicalParams, filter: &FilterSpec) -> Vec<f64> {
    let scale = params.gravity() * params.density_jump();
    curve.dz1(filter).into_iter().map(|d| scale * d).collect()
}

pub fn is_rt_stable(profile: &[f64]) -> bool {
    profile.iter().all(|&x| x > 0.0)
}

/// How the turnover integrand sums over the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorKernel {
    /// `x y / (x^2 + y^2)^2` over the real line.
    RealLine,
    /// Sum of the real-line kernel over all `2 pi` translates:
    /// `sinh(y) sin(x) / (4 (cosh y - cos x)^2)`.
    Periodic,
}

/// A curve that can be evaluated (with derivatives) between grid nodes.
pub trait ProfileCurve {
    fn z(&self, alpha: f64) -> (f64, f64);
    fn dz(&self, alpha: f64) -> (f64, f64);
    fn d2z1(&self, alpha: f64) -> f64;
    /// Breakpoints covering the integration range for a predictor at `alpha0`,
    /// including every point where the curve is only piecewise smooth.
    fn panels(&self, alpha0: f64) -> Vec<f64>;
    fn kernel(&self) -> PredictorKernel;
}

/// Spectral interpolant of a sampled curve, periodic in `alpha`.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    p1: Interpolant,
    dp1: Interpolant,
    d2p1: Interpolant,
    z2: Interpolant,
    dz2: Interpolant,
}

impl SpectralProfile {
    pub fn new(curve: &SampledCurve, filter: &FilterSpec) -> Self {
        let p1 = Interpolant::new(curve.p1()).expect("even grid");
        let z2 = Interpolant::new(curve.z2()).expect("even grid");
        Self {
            dp1: p1.derivative(1, filter),
            d2p1: p1.derivative(2, filter),
            dz2: z2.derivative(1, filter),
            p1,
            z2,
        }
    }
}

impl ProfileCurve for SpectralProfile {
    fn z(&self, alpha: f64) -> (f64, f64) {
        (alpha + self.p1.eval(alpha), self.z2.eval(alpha))
    }

    fn dz(&self, alpha: f64) -> (f64, f64) {
        (1.0 + self.dp1.eval(alpha), self.dz2.eval(alpha))
    }

    fn d2z1(&self, alpha: f64) -> f64 {
        self.d2p1.eval(alpha)
    }

    fn panels(&self, alpha0: f64) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        (-8..=8).map(|k| alpha0 + k as f64 * pi / 8.0).collect()
    }

    fn kernel(&self) -> PredictorKernel {
        PredictorKernel::Periodic
    }
}

pub const PREDICTOR_VANISHING_TOL: f64 = 1e-10;

/// `z2'(a0) * integral (z1(b) - z1(a0)) z1'(b) z2(b) / [(z1(a0) - z1(b))^2 + z2(b)^2]^2 db`,
/// valid where `z1'(a0) = z1''(a0) = z2(a0) = 0`.
///
/// The result is proportional to `d(v1)/d(alpha)` at `a0`: negative values mean the
/// curve turns over there for small positive time, positive values mean it
/// becomes a graph.
pub fn turnover_predictor<C: ProfileCurve + ?Sized>(curve: &C, alpha0: f64, quad_tol: f64) -> Result<f64> {
    let (z10, z20) = curve.z(alpha0);
    let (d10, d20) = curve.dz(alpha0);
    let dd10 = curve.d2z1(alpha0);
    for (name, v) in [("z1'", d10), ("z1''", dd10), ("z2", z20)] {
        if !(v.abs() <= PREDICTOR_VANISHING_TOL) {
            return Err(Error::PreconditionViolated(format!(
                "{name}({alpha0}) = {v:e} does not vanish"
            )));
        }
    }
    if d20 == 0.0 {
        return Ok(0.0);
    }
    let integral = predictor_integral(curve, z10, &curve.panels(alpha0), quad_tol)?;
    Ok(d20 * integral)
}

/// Integral part of [`turnover_predictor`] restricted to the given panels,
/// with no precondition checks.
pub fn predictor_integral<C: ProfileCurve + ?Sized>(
    curve: &C,
    z1_at_alpha0: f64,
    panels: &[f64],
    quad_tol: f64,
) -> Result<f64> {
    let kernel = curve.kernel();
    let integrand = |beta: f64| {
        let (z1, z2) = curve.z(beta);
        let (d1, _) = curve.dz(beta);
        let x = z1 - z1_at_alpha0;
        let value = match kernel {
            PredictorKernel::RealLine => {
                let q = x * x + z2 * z2;
                if q == 0.0 {
                    return 0.0;
                }
                x * z2 / (q * q)
            }
            PredictorKernel::Periodic => {
                let sx = (0.5 * x).sin();
                let sy = (0.5 * z2).sinh();
                let q = 2.0 * (sy * sy + sx * sx);
                if q == 0.0 {
                    return 0.0;
                }
                0.25 * z2.sinh() * x.sin() / (q * q)
            }
        };
        value * d1
    };
    let opts = QuadOptions {
        rel_tol: quad_tol,
        abs_tol: 1e-14,
        max_intervals: 20_000,
    };
    Ok(integrate(integrand, panels, &opts)?.value)
}
