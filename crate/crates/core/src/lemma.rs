//! Piecewise-polynomial building blocks (two tails and a center) and the
//! integrals, bounds and sign conditions that make the spliced curve turn over
//! at the center while its tails become graphs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::velocity::{turnover_predictor, PredictorKernel, ProfileCurve};

/// Polynomial `sum_k coeffs[k] (x - origin)^k` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub origin: f64,
    pub coeffs: Vec<f64>,
}

impl Piece {
    fn new(a: f64, b: f64, coeffs: &[f64]) -> Self {
        Self {
            a,
            b,
            origin: 0.0,
            coeffs: coeffs.to_vec(),
        }
    }

    /// Same function of the shifted variable: `q(x) = p(x - shift) + lift`.
    fn shifted(&self, shift: f64, lift: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += lift;
        Self {
            a: self.a + shift,
            b: self.b + shift,
            origin: self.origin + shift,
            coeffs,
        }
    }

    fn eval_deriv(&self, x: f64, order: usize) -> f64 {
        let t = x - self.origin;
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(order).rev() {
            let falling: f64 = (0..order).map(|j| (k - j) as f64).product();
            acc = acc * t + c * falling;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    pieces: Vec<Piece>,
}

impl PiecewisePoly {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("pieces", "need at least one piece"));
        }
        for p in &pieces {
            if !(p.b > p.a) || p.coeffs.is_empty() {
                return Err(Error::invalid("pieces", "empty interval or polynomial"));
            }
        }
        for w in pieces.windows(2) {
            if w[0].b != w[1].a {
                return Err(Error::invalid("pieces", "intervals must be contiguous"));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.pieces[0].a, self.pieces[self.pieces.len() - 1].b)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.pieces.iter().map(|p| p.a).collect();
        out.push(self.domain().1);
        out
    }

    fn piece_at(&self, x: f64) -> Option<&Piece> {
        let (lo, hi) = self.domain();
        if x < lo || x > hi {
            return None;
        }
        self.pieces.iter().find(|p| x < p.b).or(self.pieces.last())
    }

    /// Value (`order = 0`) or derivative at `x`; `None` outside the domain.
    pub fn eval(&self, x: f64, order: usize) -> Option<f64> {
        self.piece_at(x).map(|p| p.eval_deriv(x, order))
    }

    /// Largest jump in value across interior breakpoints.
    pub fn continuity_defect(&self) -> f64 {
        self.pieces
            .windows(2)
            .map(|w| (w[0].eval_deriv(w[0].b, 0) - w[1].eval_deriv(w[1].a, 0)).abs())
            .fold(0.0, f64::max)
    }

    fn shifted(&self, shift: f64, lift: f64) -> Self {
        Self {
            pieces: self.pieces.iter().map(|p| p.shifted(shift, lift)).collect(),
        }
    }
}

/// Curve `(c1(alpha), c2(alpha))` on the common domain, `(alpha, 0)` outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCurve {
    pub c1: PiecewisePoly,
    pub c2: PiecewisePoly,
}

impl PiecewiseCurve {
    pub fn new(c1: PiecewisePoly, c2: PiecewisePoly) -> Result<Self> {
        if c1.domain() != c2.domain() {
            return Err(Error::invalid("components", "domains differ"));
        }
        Ok(Self { c1, c2 })
    }

    pub fn z1(&self, alpha: f64) -> f64 {
        self.c1.eval(alpha, 0).unwrap_or(alpha)
    }

    pub fn z2(&self, alpha: f64) -> f64 {
        self.c2.eval(alpha, 0).unwrap_or(0.0)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = self.c1.breakpoints();
        pts.extend(self.c2.breakpoints());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

impl ProfileCurve for PiecewiseCurve {
    fn z(&self, alpha: f64) -> (f64, f64) {
        (self.z1(alpha), self.z2(alpha))
    }

    fn dz(&self, alpha: f64) -> (f64, f64) {
        (
            self.c1.eval(alpha, 1).unwrap_or(1.0),
            self.c2.eval(alpha, 1).unwrap_or(0.0),
        )
    }

    fn d2z1(&self, alpha: f64) -> f64 {
        self.c1.eval(alpha, 2).unwrap_or(0.0)
    }

    /// `z2` vanishes off the domain, so the breakpoints cover the support.
    fn panels(&self, alpha0: f64) -> Vec<f64> {
        let mut pts = self.breakpoints();
        let (lo, hi) = (pts[0], pts[pts.len() - 1]);
        if alpha0 > lo && alpha0 < hi {
            pts.push(alpha0);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
        }
        pts
    }

    fn kernel(&self) -> PredictorKernel {
        PredictorKernel::RealLine
    }
}

fn poly(pieces: &[(f64, f64, &[f64])]) -> PiecewisePoly {
    PiecewisePoly::new(pieces.iter().map(|&(a, b, c)| Piece::new(a, b, c)).collect())
        .expect("static block definition")
}

/// Tail block on `[-2, 2]`.
pub fn tail_block() -> PiecewiseCurve {
    PiecewiseCurve {
        c1: poly(&[
            (-2.0, -1.0, &[0.0, 1.0]),
            (-1.0, 1.0, &[0.0, 0.0, 0.0, 1.0]),
            (1.0, 2.0, &[0.0, 1.0]),
        ]),
        c2: poly(&[
            (-2.0, -1.0, &[-2.0, -1.0]),
            (-1.0, 1.0, &[0.0, 1.0]),
            (1.0, 2.0, &[2.0, -1.0]),
        ]),
    }
}

/// Center block on `[-7, 7]`.
pub fn center_block() -> PiecewiseCurve {
    PiecewiseCurve {
        c1: poly(&[
            (-7.0, -1.0, &[0.0, 1.0]),
            (-1.0, 1.0, &[0.0, 0.0, 0.0, 1.0]),
            (1.0, 7.0, &[0.0, 1.0]),
        ]),
        c2: poly(&[
            (-7.0, -5.0, &[10.5, 1.5]),
            (-5.0, -2.0, &[3.0]),
            (-2.0, -1.0, &[-7.0, -5.0]),
            (-1.0, 1.0, &[0.0, 3.0, 0.0, -1.0]),
            (1.0, 2.0, &[7.0, -5.0]),
            (2.0, 5.0, &[-3.0]),
            (5.0, 7.0, &[-10.5, 1.5]),
        ]),
    }
}

#[derive(Debug, Clone)]
pub struct Blocks {
    pub tail: PiecewiseCurve,
    pub center: PiecewiseCurve,
    pub spliced: PiecewiseCurve,
    pub r: f64,
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 9.0) || !r.is_finite() {
        return Err(Error::invalid("R", format!("{r} must exceed 9")));
    }
    Ok(())
}

/// Tails at `-R` and `R`, the center on `[-7, 7]`, identity in between.
pub fn build_blocks(r: f64) -> Result<Blocks> {
    check_r(r)?;
    let tail = tail_block();
    let center = center_block();
    let gap = |a: f64, b: f64| (Piece::new(a, b, &[0.0, 1.0]), Piece::new(a, b, &[0.0]));

    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    p1.extend(tail.c1.shifted(-r, -r).pieces);
    p2.extend(tail.c2.shifted(-r, 0.0).pieces);
    let (g1, g2) = gap(-r + 2.0, -7.0);
    p1.push(g1);
    p2.push(g2);
    p1.extend(center.c1.pieces.iter().cloned());
    p2.extend(center.c2.pieces.iter().cloned());
    let (g1, g2) = gap(7.0, r - 2.0);
    p1.push(g1);
    p2.push(g2);
    p1.extend(tail.c1.shifted(r, r).pieces);
    p2.extend(tail.c2.shifted(r, 0.0).pieces);

    let spliced = PiecewiseCurve::new(PiecewisePoly::new(p1)?, PiecewisePoly::new(p2)?)?;
    Ok(Blocks {
        tail,
        center,
        spliced,
        r,
    })
}

/// Integrands and antiderivatives of the closed-form pieces, exposed so the
/// evaluated expressions can be checked against quadrature and differentiation.
pub mod closed_form {
    pub fn cc1_integrand(x: f64) -> f64 {
        -2.0 * 3.0 * x * x * (x * x - 3.0) / (2.0 * x.powi(4) - 6.0 * x * x + 9.0).powi(2)
    }

    pub fn cc2_integrand(x: f64) -> f64 {
        2.0 * (7.0 * x - 5.0 * x * x) / (26.0 * x * x - 70.0 * x + 49.0).powi(2)
    }

    pub fn cc2_antiderivative(x: f64) -> f64 {
        (-7.0 + 10.0 * x) / (26.0 * (26.0 * x * x - 70.0 * x + 49.0))
    }

    pub fn cc3_integrand(x: f64) -> f64 {
        -2.0 * 3.0 * x / (9.0 + x * x).powi(2)
    }

    pub fn cc3_antiderivative(x: f64) -> f64 {
        3.0 / (9.0 + x * x)
    }

    pub fn cc4_integrand(x: f64) -> f64 {
        (3.0 * x * x - 21.0 * x) / (441.0 / 4.0 - 63.0 * x / 2.0 + 13.0 * x * x / 4.0).powi(2)
    }

    pub fn cc4_antiderivative(x: f64) -> f64 {
        48.0 * (7.0 - 2.0 * x) / (338.0 * x * x - 3276.0 * x + 11466.0)
    }

    pub fn tt1_integrand(x: f64) -> f64 {
        -x * (2.0 + x) / (2.0 * x * x + 4.0 * x + 4.0).powi(2)
    }

    pub fn tt1_antiderivative(x: f64) -> f64 {
        (1.0 + x) / (4.0 * (2.0 + 2.0 * x + x * x))
    }

    pub fn tt2_integrand(x: f64) -> f64 {
        3.0 * x * x / (1.0 + x.powi(4)).powi(2)
    }

    pub fn tt3_integrand(x: f64) -> f64 {
        -x * (-2.0 + x) / (2.0 * x * x - 4.0 * x + 4.0).powi(2)
    }

    pub fn tt3_antiderivative(x: f64) -> f64 {
        (x - 1.0) / (4.0 * (2.0 - 2.0 * x + x * x))
    }
}

pub const LEMMA_QUAD_TOL: f64 = 1e-12;

fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    Ok(integrate(f, &[a, b], &QuadOptions::relative(LEMMA_QUAD_TOL))?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcIntegrals {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub sum: f64,
}

/// Center-center contribution at `alpha0 = 0`.
pub fn cc_integrals() -> CcIntegrals {
    use closed_form::*;
    let i1 = quad(cc1_integrand, 0.0, 1.0).expect("smooth integrand on [0, 1]");
    let i2 = cc2_antiderivative(2.0) - cc2_antiderivative(1.0);
    let i3 = cc3_antiderivative(5.0) - cc3_antiderivative(2.0);
    let i4 = cc4_antiderivative(7.0) - cc4_antiderivative(5.0);
    CcIntegrals {
        i1,
        i2,
        i3,
        i4,
        sum: i1 + i2 + i3 + i4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TtIntegrals {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// `i1 + i3`, a lower bound because `i2` has a positive integrand.
    pub lower_bound: f64,
    pub total: f64,
}

/// Tail-tail contribution at `alpha0 = R`.
pub fn tt_integrals() -> TtIntegrals {
    use closed_form::*;
    let i1 = tt1_antiderivative(-1.0) - tt1_antiderivative(-2.0);
    let i3 = tt3_antiderivative(2.0) - tt3_antiderivative(1.0);
    let i2 = quad(tt2_integrand, -1.0, 1.0).expect("smooth integrand on [-1, 1]");
    TtIntegrals {
        i1,
        i2,
        i3,
        lower_bound: i1 + i3,
        total: i1 + i2 + i3,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBounds {
    pub tc: f64,
    pub ct1: f64,
    pub ct2: f64,
}

/// Closed-form bounds on the cross contributions:
/// `|I_tc| <= 24 (R+2)/(R-2)^4`, `|I_ct1| <= 126 (R+7)/(R-7)^4`,
/// `|I_ct2| <= 12 (2R+2)/(2R-2)^4`.
pub fn tail_bounds(r: f64) -> Result<TailBounds> {
    check_r(r)?;
    Ok(TailBounds {
        tc: 2.0 * (r + 2.0) * 3.0 * 1.0 / (r - 2.0).powi(4) * 4.0,
        ct1: (r + 7.0) * 3.0 * 3.0 * 14.0 / (r - 7.0).powi(4),
        ct2: (2.0 * r + 2.0) * 3.0 * 1.0 * 4.0 / (2.0 * r - 2.0).powi(4),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    pub r: f64,
    pub i_cc: f64,
    pub i_tt_lower: f64,
    pub bound_tc: f64,
    pub bound_ct1: f64,
    pub bound_ct2: f64,
    /// `I_cc + bound_tc < 0`: the center turns over whatever the tails contribute.
    pub center_ok: bool,
    /// `I_tt_lower - (bound_ct1 + bound_ct2) > 0`: the tails become graphs.
    pub tail_ok: bool,
}

impl ConditionReport {
    pub fn all_ok(&self) -> bool {
        self.center_ok && self.tail_ok
    }
}

fn conditions(r: f64, cc: &CcIntegrals, tt: &TtIntegrals) -> Result<ConditionReport> {
    let b = tail_bounds(r)?;
    Ok(ConditionReport {
        r,
        i_cc: cc.sum,
        i_tt_lower: tt.lower_bound,
        bound_tc: b.tc,
        bound_ct1: b.ct1,
        bound_ct2: b.ct2,
        center_ok: cc.sum + b.tc < 0.0,
        tail_ok: tt.lower_bound - (b.ct1 + b.ct2) > 0.0,
    })
}

pub fn verify_conditions(r: f64) -> Result<ConditionReport> {
    conditions(r, &cc_integrals(), &tt_integrals())
}

/// Smallest integer `R > 9` for which both sign conditions hold.
pub fn min_admissible_r() -> u32 {
    let (cc, tt) = (cc_integrals(), tt_integrals());
    (10u32..)
        .find(|&r| conditions(r as f64, &cc, &tt).map(|c| c.all_ok()).unwrap_or(false))
        .expect("bounds vanish as R grows")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictorCrosscheck {
    pub r: f64,
    /// Predictor on the spliced curve at `alpha0 = 0`.
    pub at_center: f64,
    /// Predictor on the spliced curve at `alpha0 = R`.
    pub at_tail: f64,
    /// `z2'(0) (I_cc + I_tc)` from the part-wise integrals.
    pub center_from_parts: f64,
    /// `z2'(R) (I_tt + I_ct1 + I_ct2)` from the part-wise integrals.
    pub tail_from_parts: f64,
    pub i_tc: f64,
    pub i_ct1: f64,
    pub i_ct2: f64,
}

pub fn predictor_crosscheck(r: f64, quad_tol: f64) -> Result<PredictorCrosscheck> {
    let blocks = build_blocks(r)?;
    let zr = &blocks.spliced;
    let at_center = turnover_predictor(zr, 0.0, quad_tol)?;
    let at_tail = turnover_predictor(zr, r, quad_tol)?;

    let tail = &blocks.tail;
    let center = &blocks.center;
    let tail_pts = tail.breakpoints();
    let opts = QuadOptions {
        rel_tol: quad_tol,
        abs_tol: 1e-16,
        max_intervals: 20_000,
    };
    let cross = |curve: &PiecewiseCurve, shift: f64, target: f64, pts: &[f64]| -> Result<f64> {
        let f = |b: f64| {
            let x = curve.z1(b) + shift - target;
            let y = curve.z2(b);
            let d1 = curve.c1.eval(b, 1).unwrap_or(1.0);
            x * d1 * y / (x * x + y * y).powi(2)
        };
        Ok(integrate(f, pts, &opts)?.value)
    };
    // both tails contribute equally at the center by odd symmetry
    let i_tc = 2.0 * cross(tail, r, 0.0, &tail_pts)?;
    let i_ct1 = cross(center, 0.0, r, &center.breakpoints())?;
    let i_ct2 = cross(tail, -r, r, &tail_pts)?;

    let cc = cc_integrals();
    let tt = tt_integrals();
    let (_, dz2_center) = zr.dz(0.0);
    let (_, dz2_tail) = zr.dz(r);
    Ok(PredictorCrosscheck {
        r,
        at_center,
        at_tail,
        center_from_parts: dz2_center * (cc.sum + i_tc),
        tail_from_parts: dz2_tail * (tt.total + i_ct1 + i_ct2),
        i_tc,
        i_ct1,
        i_ct2,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub cc: CcIntegrals,
    pub tt: TtIntegrals,
    pub min_admissible_r: u32,
    pub conditions: Vec<ConditionReport>,
    pub bounds_at_min_r: TailBounds,
    pub crosscheck: PredictorCrosscheck,
    pub checks: Vec<LemmaCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub value: f64,
    pub expected: String,
    pub pass: bool,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Structured text (TOML).
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("report is plain data")
    }
}

pub fn lemma_report(quad_tol: f64) -> Result<LemmaReport> {
    let cc = cc_integrals();
    let tt = tt_integrals();
    let r_min = min_admissible_r();
    let conditions = [12.0, 17.0, r_min as f64, r_min as f64 + 10.0]
        .iter()
        .map(|&r| verify_conditions(r))
        .collect::<Result<Vec<_>>>()?;
    let crosscheck = predictor_crosscheck(r_min as f64, quad_tol)?;
    let bounds = tail_bounds(r_min as f64)?;
    let check = |name: &str, value: f64, expected: &str, pass: bool| LemmaCheck {
        name: name.to_string(),
        value,
        expected: expected.to_string(),
        pass,
    };
    let checks = vec![
        check("I_cc2", cc.i2, "1/65", (cc.i2 - 1.0 / 65.0).abs() < 1e-12),
        check("I_cc3", cc.i3, "-63/442", (cc.i3 + 63.0 / 442.0).abs() < 1e-12),
        check("I_cc4", cc.i4, "-3/119", (cc.i4 + 3.0 / 119.0).abs() < 1e-12),
        check("I_cc1", cc.i1, "0.127271158", (cc.i1 - 0.127271158).abs() < 1e-8),
        check("I_cc", cc.sum, "-0.0250882", (cc.sum + 0.0250882).abs() < 1e-6),
        check("I_tt1", tt.i1, "1/8", (tt.i1 - 0.125).abs() < 1e-12),
        check("I_tt3", tt.i3, "1/8", (tt.i3 - 0.125).abs() < 1e-12),
        check("I_tt2", tt.i2, "> 0", tt.i2 > 0.0),
        check("min_admissible_R", r_min as f64, "18", r_min == 18),
        check("predictor_center", crosscheck.at_center, "< 0", crosscheck.at_center < 0.0),
        check("predictor_tail", crosscheck.at_tail, "> 0", crosscheck.at_tail > 0.0),
        check("abs_I_tc", crosscheck.i_tc.abs(), "<= bound_tc", crosscheck.i_tc.abs() <= bounds.tc),
        check("abs_I_ct1", crosscheck.i_ct1.abs(), "<= bound_ct1", crosscheck.i_ct1.abs() <= bounds.ct1),
        check("abs_I_ct2", crosscheck.i_ct2.abs(), "<= bound_ct2", crosscheck.i_ct2.abs() <= bounds.ct2),
    ];
    Ok(LemmaReport {
        cc,
        tt,
        min_admissible_r: r_min,
        conditions,
        bounds_at_min_r: bounds,
        crosscheck,
        checks,
    })
}
