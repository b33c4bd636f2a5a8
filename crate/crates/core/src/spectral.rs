//! Fourier conventions on the periodic grid.
//!
//! Coefficients follow `c_k = (1/n) sum_j v_j exp(-i k alpha_j)` with
//! `alpha_j = -pi + j h`, indexed `k = -n/2+1 ..= n/2`. Derivatives carry the
//! exponential cutoff filter; threshold smoothing is a separate operation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::invalid("values", format!("length {n} must be even and nonzero")));
    }
    Ok(())
}

/// Unnormalized forward DFT in natural FFT order (`m = 0..n`).
fn raw_forward(values: &[f64]) -> Vec<Complex64> {
    let (fwd, _) = plans(values.len());
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    buf
}

/// Inverse of [`raw_forward`], including the `1/n` factor; returns the real part.
fn raw_inverse(mut buf: Vec<Complex64>) -> Vec<f64> {
    let n = buf.len();
    let (_, inv) = plans(n);
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.into_iter().map(|c| c.re * scale).collect()
}

/// Signed wavenumber of FFT slot `m`; slot `n/2` maps to `+n/2`.
#[inline]
fn wavenumber(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    /// `coeffs[k + n/2 - 1]` holds `c_k`.
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn min_k(&self) -> i64 {
        -(self.n as i64) / 2 + 1
    }

    pub fn max_k(&self) -> i64 {
        self.n as i64 / 2
    }

    /// Coefficient `c_k`; `k` outside the stored band aliases onto it.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[self.slot(k)]
    }

    pub fn set_coeff(&mut self, k: i64, value: Complex64) {
        let slot = self.slot(k);
        self.coeffs[slot] = value;
    }

    fn slot(&self, k: i64) -> usize {
        let n = self.n as i64;
        let k = (k - self.min_k()).rem_euclid(n) + self.min_k();
        (k - self.min_k()) as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let k0 = self.min_k();
        self.coeffs.iter().enumerate().map(move |(i, &c)| (k0 + i as i64, c))
    }
}

pub fn analyze(values: &[f64]) -> Result<Spectrum> {
    let n = values.len();
    check_len(n)?;
    let raw = raw_forward(values);
    let scale = 1.0 / n as f64;
    let k0 = -(n as i64) / 2 + 1;
    let coeffs = (0..n)
        .map(|i| {
            let k = k0 + i as i64;
            let m = k.rem_euclid(n as i64) as usize;
            // exp(-i k alpha_j) = (-1)^k exp(-2 pi i j k / n)
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            raw[m] * (sign * scale)
        })
        .collect();
    Ok(Spectrum { n, coeffs })
}

pub fn synthesize(spectrum: &Spectrum) -> Vec<f64> {
    let n = spectrum.n;
    let mut raw = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in spectrum.iter() {
        let m = k.rem_euclid(n as i64) as usize;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        raw[m] = c * (sign * n as f64);
    }
    raw_inverse(raw)
}

/// Exponential cutoff `rho(k) = exp(-strength (2|k|/n)^exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FilterSpec {
    pub strength: f64,
    pub exponent: u32,
}

impl FilterSpec {
    pub const fn new(strength: f64, exponent: u32) -> Self {
        Self { strength, exponent }
    }

    /// No attenuation at any wavenumber.
    pub const fn none() -> Self {
        Self {
            strength: 0.0,
            exponent: 1,
        }
    }

    pub fn value(&self, k: i64, n: usize) -> f64 {
        let x = 2.0 * k.unsigned_abs() as f64 / n as f64;
        (-self.strength * x.powi(self.exponent as i32)).exp()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            return Err(Error::invalid("filter.strength", "must be finite and nonnegative"));
        }
        if self.exponent == 0 {
            return Err(Error::invalid("filter.exponent", "must be positive"));
        }
        Ok(())
    }
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self::new(10.0, 25)
    }
}

/// Multiplier `(i k)^order * rho(k)`, with the Nyquist slot zeroed for odd orders.
fn derivative_multiplier(k: i64, n: usize, order: u32, filter: &FilterSpec) -> Complex64 {
    if order % 2 == 1 && k == n as i64 / 2 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, k as f64).powu(order) * filter.value(k, n)
}

pub fn filtered_derivative(values: &[f64], order: u32, filter: &FilterSpec) -> Result<Vec<f64>> {
    check_len(values.len())?;
    if !(1..=4).contains(&order) {
        return Err(Error::invalid("order", format!("{order} not in 1..=4")));
    }
    let n = values.len();
    let mut raw = raw_forward(values);
    for (m, c) in raw.iter_mut().enumerate() {
        *c *= derivative_multiplier(wavenumber(m, n), n, order, filter);
    }
    Ok(raw_inverse(raw))
}

/// Zeroes every coefficient with `|c_k| < eps` and resynthesizes.
///
/// When every coefficient that would be removed is already at round-off level
/// the input is returned unchanged, so `eps = 0` is the identity and repeated
/// application is exactly idempotent.
pub fn threshold_smooth(values: &[f64], eps: f64) -> Result<Vec<f64>> {
    let n = values.len();
    check_len(n)?;
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::invalid("eps", "must be finite and nonnegative"));
    }
    let mut raw = raw_forward(values);
    let scale = 1.0 / n as f64;
    let total: f64 = raw.iter().map(|c| c.norm() * scale).sum();
    let floor = 64.0 * f64::EPSILON * n as f64 * total;

    let mut substantive = false;
    for c in raw.iter_mut() {
        let mag = c.norm() * scale;
        if mag < eps {
            if mag > floor {
                substantive = true;
            }
            *c = Complex64::new(0.0, 0.0);
        }
    }
    if !substantive {
        return Ok(values.to_vec());
    }
    Ok(raw_inverse(raw))
}

/// What a smoothing threshold is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdScale {
    /// Unnormalized transform sums `n |c_k|`, as returned by a plain FFT.
    #[default]
    Raw,
    /// Normalized coefficients `|c_k|`.
    Normalized,
}

impl ThresholdScale {
    /// Threshold on normalized coefficients equivalent to `eps` on `n` samples.
    pub fn normalized_eps(self, eps: f64, n: usize) -> f64 {
        match self {
            ThresholdScale::Raw => eps / n as f64,
            ThresholdScale::Normalized => eps,
        }
    }
}

/// Trigonometric interpolant of nodal values on the grid `alpha_j = -pi + j h`.
#[derive(Debug, Clone)]
pub struct Interpolant {
    n: usize,
    /// `c_k` for `k = 0..=n/2`; negative modes follow by Hermitian symmetry.
    half: Vec<Complex64>,
}

impl Interpolant {
    pub fn new(values: &[f64]) -> Result<Self> {
        let n = values.len();
        check_len(n)?;
        let raw = raw_forward(values);
        let scale = 1.0 / n as f64;
        let half = (0..=n / 2)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                raw[k] * (sign * scale)
            })
            .collect();
        Ok(Self { n, half })
    }

    /// Interpolant of the filtered derivative of the given order.
    pub fn derivative(&self, order: u32, filter: &FilterSpec) -> Self {
        let n = self.n;
        let half = self
            .half
            .iter()
            .enumerate()
            .map(|(k, &c)| c * derivative_multiplier(k as i64, n, order, filter))
            .collect();
        Self { n, half }
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        let nyq = self.n / 2;
        let mut acc = self.half[0].re;
        for (k, c) in self.half.iter().enumerate().take(nyq).skip(1) {
            let (s, co) = (k as f64 * alpha).sin_cos();
            acc += 2.0 * (c.re * co - c.im * s);
        }
        // Nyquist term: real part against cos, imaginary part against sin
        // (the latter only survives for derivatives of even order).
        let (s, co) = (nyq as f64 * alpha).sin_cos();
        acc += self.half[nyq].re * co - self.half[nyq].im * s;
        acc
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(alpha: f64) -> f64 {
    (alpha + PI).rem_euclid(2.0 * PI) - PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n: usize) -> Vec<f64> {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|j| -PI + j as f64 * h).collect()
    }

    #[test]
    fn constant_has_only_dc() {
        let s = analyze(&vec![2.5; 32]).unwrap();
        for (k, c) in s.iter() {
            let expected = if k == 0 { 2.5 } else { 0.0 };
            assert!((c - Complex64::new(expected, 0.0)).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn sine_coefficients() {
        let v: Vec<f64> = nodes(64).iter().map(|a| a.sin()).collect();
        let s = analyze(&v).unwrap();
        assert!((s.coeff(1) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((s.coeff(-1) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        for (k, c) in s.iter() {
            if k.abs() != 1 {
                assert!(c.norm() < 1e-15, "k={k}");
            }
        }
    }

    #[test]
    fn two_mode_support() {
        let v: Vec<f64> = nodes(64).iter().map(|a| a.sin() + (2.0 * a).sin()).collect();
        let s = analyze(&v).unwrap();
        for (k, c) in s.iter() {
            if matches!(k.abs(), 1 | 2) {
                assert!(c.norm() > 0.4);
            } else {
                assert!(c.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hermitian_and_roundtrip() {
        let v: Vec<f64> = (0..48).map(|j| ((j * 7919) % 101) as f64 / 17.0 - 2.0).collect();
        let s = analyze(&v).unwrap();
        for k in 1..24 {
            assert!((s.coeff(-k) - s.coeff(k).conj()).norm() < 1e-14);
        }
        let back = synthesize(&s);
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn odd_length_rejected() {
        assert!(analyze(&[1.0, 2.0, 3.0]).is_err());
        assert!(filtered_derivative(&[1.0; 7], 1, &FilterSpec::default()).is_err());
    }

    #[test]
    fn derivative_order_checked() {
        assert!(filtered_derivative(&[1.0; 16], 0, &FilterSpec::default()).is_err());
        assert!(filtered_derivative(&[1.0; 16], 5, &FilterSpec::default()).is_err());
    }

    #[test]
    fn sine_derivative_at_2048() {
        let a = nodes(2048);
        let v: Vec<f64> = a.iter().map(|x| x.sin()).collect();
        let d = filtered_derivative(&v, 1, &FilterSpec::default()).unwrap();
        let err = a.iter().zip(&d).map(|(x, y)| (x.cos() - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn constant_derivative_vanishes() {
        for order in 1..=4 {
            let d = filtered_derivative(&vec![3.0; 64], order, &FilterSpec::default()).unwrap();
            assert!(d.iter().all(|x| x.abs() < 1e-13));
        }
    }

    #[test]
    fn nyquist_attenuation() {
        let f = FilterSpec::default();
        assert!((f.value(1024, 2048) - (-10.0f64).exp()).abs() < 1e-18);
        assert!((f.value(1024, 2048) - 4.54e-5).abs() < 1e-7);
        assert_eq!(f.value(0, 2048), 1.0);
    }

    #[test]
    fn filter_monotone() {
        let f = FilterSpec::default();
        let n = 256;
        let mut prev = f.value(0, n);
        for k in 1..=n as i64 / 2 {
            let v = f.value(k, n);
            assert!(v <= prev && v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn spectral_accuracy_on_modes() {
        let n = 128;
        let a = nodes(n);
        let filter = FilterSpec::default();
        for k in 1..=(n / 8) as i64 {
            let cosv: Vec<f64> = a.iter().map(|x| (k as f64 * x).cos()).collect();
            let sinv: Vec<f64> = a.iter().map(|x| (k as f64 * x).sin()).collect();
            let rho = filter.value(k, n);
            let dc = filtered_derivative(&cosv, 1, &filter).unwrap();
            let ds = filtered_derivative(&sinv, 1, &filter).unwrap();
            for j in 0..n {
                let kf = k as f64;
                assert!((dc[j] + kf * rho * sinv[j]).abs() < 1e-12);
                assert!((ds[j] - kf * rho * cosv[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn threshold_zero_is_identity() {
        let v: Vec<f64> = (0..32).map(|j| (j as f64).sqrt()).collect();
        assert_eq!(threshold_smooth(&v, 0.0).unwrap(), v);
    }

    #[test]
    fn threshold_removes_small_mode() {
        let a = nodes(1024);
        let v: Vec<f64> = a.iter().map(|x| x.sin() + 1e-7 * (300.0 * x).sin()).collect();
        let before = analyze(&v).unwrap();
        assert!((before.coeff(300).norm() - 5e-8).abs() < 1e-15);
        let out = threshold_smooth(&v, 1e-6).unwrap();
        let after = analyze(&out).unwrap();
        assert!(after.coeff(300).norm() < 1e-18);
        for (x, y) in a.iter().zip(&out) {
            assert!((x.sin() - y).abs() < 1e-15);
        }
    }

    #[test]
    fn huge_threshold_gives_zero() {
        let v: Vec<f64> = nodes(32).iter().map(|x| 1.0 + x.sin()).collect();
        let out = threshold_smooth(&v, 10.0).unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
        assert_eq!(threshold_smooth(&out, 10.0).unwrap(), out);
    }

    #[test]
    fn interpolant_matches_nodes_and_functions() {
        let n = 64;
        let a = nodes(n);
        let v: Vec<f64> = a.iter().map(|x| (3.0 * x).sin() + 0.5 * (x).cos()).collect();
        let it = Interpolant::new(&v).unwrap();
        for (x, y) in a.iter().zip(&v) {
            assert!((it.eval(*x) - y).abs() < 1e-13);
        }
        let x = 0.123;
        assert!((it.eval(x) - ((3.0 * x).sin() + 0.5 * x.cos())).abs() < 1e-13);
        let d = it.derivative(1, &FilterSpec::none());
        assert!((d.eval(x) - (3.0 * (3.0 * x).cos() - 0.5 * x.sin())).abs() < 1e-12);
        let dd = filtered_derivative(&v, 2, &FilterSpec::default()).unwrap();
        let d2 = it.derivative(2, &FilterSpec::default());
        for (x, y) in a.iter().zip(&dd) {
            assert!((d2.eval(*x) - y).abs() < 1e-11);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) + PI).abs() < 1e-15);
        assert!((wrap_angle(0.5) - 0.5).abs() < 1e-15);
        assert!((wrap_angle(-PI - 0.1) - (PI - 0.1)).abs() < 1e-14);
    }
}
