//! Grids, sampled interfaces, physical parameters and preset initial data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{filtered_derivative, FilterSpec};

/// Uniform periodic grid `alpha_i = -pi + i h`, `h = 2 pi / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

pub const MIN_NODES: usize = 16;

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -PI + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the node mirrored across `alpha = 0`.
    pub fn mirror(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// Index of the node `alpha = 0`.
    pub fn origin(&self) -> usize {
        self.n / 2
    }
}

pub fn make_grid(n: usize) -> Result<Grid> {
    Grid::new(n)
}

/// Interface `z(alpha) = (alpha + p1(alpha), z2(alpha))` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    grid: Grid,
    p1: Vec<f64>,
    z2: Vec<f64>,
}

impl SampledCurve {
    pub fn new(grid: Grid, p1: Vec<f64>, z2: Vec<f64>) -> Result<Self> {
        for v in [&p1, &z2] {
            if v.len() != grid.n() {
                return Err(Error::LengthMismatch {
                    expected: grid.n(),
                    actual: v.len(),
                });
            }
        }
        if !p1.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("p1"));
        }
        if !z2.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("z2"));
        }
        Ok(Self { grid, p1, z2 })
    }

    pub fn flat(grid: Grid) -> Self {
        Self {
            grid,
            p1: vec![0.0; grid.n()],
            z2: vec![0.0; grid.n()],
        }
    }

    /// Samples `z1 = alpha + p1(alpha)`, `z2 = z2(alpha)` from closures.
    pub fn from_fn(grid: Grid, p1: impl Fn(f64) -> f64, z2: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes = grid.nodes();
        Self::new(
            grid,
            nodes.iter().map(|&a| p1(a)).collect(),
            nodes.iter().map(|&a| z2(a)).collect(),
        )
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn z2(&self) -> &[f64] {
        &self.z2
    }

    pub fn z1(&self) -> Vec<f64> {
        self.p1
            .iter()
            .enumerate()
            .map(|(i, p)| self.grid.node(i) + p)
            .collect()
    }

    pub fn into_parts(self) -> (Grid, Vec<f64>, Vec<f64>) {
        (self.grid, self.p1, self.z2)
    }

    /// `d(z1)/d(alpha) = 1 + d(p1)/d(alpha)`, filtered spectral derivative.
    pub fn dz1(&self, filter: &FilterSpec) -> Vec<f64> {
        let mut d = filtered_derivative(&self.p1, 1, filter).expect("grid length is even");
        d.iter_mut().for_each(|x| *x += 1.0);
        d
    }

    pub fn dz2(&self, filter: &FilterSpec) -> Vec<f64> {
        filtered_derivative(&self.z2, 1, filter).expect("grid length is even")
    }

    /// Largest deviation from odd symmetry `p(-alpha) = -p(alpha)` over both components.
    pub fn odd_defect(&self) -> f64 {
        let g = self.grid;
        (0..g.n())
            .map(|i| {
                let j = g.mirror(i);
                // alpha_0 = -pi mirrors onto itself modulo the period
                (self.p1[i] + self.p1[j]).abs().max((self.z2[i] + self.z2[j]).abs())
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhysicalParams {
    density_jump: f64,
    gravity: f64,
}

impl PhysicalParams {
    /// `density_jump` is `rho_minus - rho_plus`; gravity is normalized to one.
    pub fn new(density_jump: f64) -> Result<Self> {
        if !density_jump.is_finite() || density_jump == 0.0 {
            return Err(Error::invalid("density_jump", "must be finite and nonzero"));
        }
        Ok(Self {
            density_jump,
            gravity: 1.0,
        })
    }

    pub fn density_jump(&self) -> f64 {
        self.density_jump
    }

    pub fn gravity(&self) -> f64 {
        self.gravity
    }

    /// Periodic kernel prefactor `(rho_minus - rho_plus) / (4 pi)`.
    pub fn prefactor(&self) -> f64 {
        self.density_jump / (4.0 * PI)
    }

    pub fn with_density_jump(self, density_jump: f64) -> Result<Self> {
        Self::new(density_jump)
    }
}

/// Default density convention `rho_minus - rho_plus = 1`.
pub const DEFAULT_DENSITY_JUMP: f64 = 1.0;

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::new(DEFAULT_DENSITY_JUMP).expect("nonzero")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `z1 = alpha - sin(alpha)`, `z2 = (3 sin a + 8 sin 2a + 3 sin 3a) / 4`.
    SeedT0,
    /// `z1 = alpha - 0.96 sin(alpha)`, `z2 = (2/3) sin 3a`.
    ConjT0,
    /// Seed data with `z1 = alpha - (1 - delta) sin(alpha)`.
    DeltaTilt(f64),
}

impl Preset {
    fn p1_amplitude(&self) -> f64 {
        match self {
            Preset::SeedT0 => 1.0,
            Preset::ConjT0 => 0.96,
            Preset::DeltaTilt(delta) => 1.0 - delta,
        }
    }

    pub fn p1(&self, alpha: f64) -> f64 {
        -self.p1_amplitude() * alpha.sin()
    }

    pub fn z2(&self, alpha: f64) -> f64 {
        match self {
            Preset::SeedT0 | Preset::DeltaTilt(_) => {
                (3.0 * alpha.sin() + 8.0 * (2.0 * alpha).sin() + 3.0 * (3.0 * alpha).sin()) / 4.0
            }
            Preset::ConjT0 => 2.0 / 3.0 * (3.0 * alpha).sin(),
        }
    }

    pub fn dz1(&self, alpha: f64) -> f64 {
        1.0 - self.p1_amplitude() * alpha.cos()
    }

    pub fn dz2(&self, alpha: f64) -> f64 {
        match self {
            Preset::SeedT0 | Preset::DeltaTilt(_) => {
                (3.0 * alpha.cos() + 16.0 * (2.0 * alpha).cos() + 9.0 * (3.0 * alpha).cos()) / 4.0
            }
            Preset::ConjT0 => 2.0 * (3.0 * alpha).cos(),
        }
    }

    pub fn sample(&self, grid: Grid) -> Result<SampledCurve> {
        if let Preset::DeltaTilt(delta) = self {
            if !delta.is_finite() {
                return Err(Error::invalid("delta", "must be finite"));
            }
        }
        SampledCurve::from_fn(grid, |a| self.p1(a), |a| self.z2(a))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::SeedT0 => write!(f, "SEED_T0"),
            Preset::ConjT0 => write!(f, "CONJ_T0"),
            Preset::DeltaTilt(d) => write!(f, "DELTA_TILT({d})"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_uppercase().as_str() {
            "SEED_T0" => return Ok(Preset::SeedT0),
            "CONJ_T0" => return Ok(Preset::ConjT0),
            _ => {}
        }
        let upper = t.to_ascii_uppercase();
        if let Some(rest) = upper.strip_prefix("DELTA_TILT(") {
            if let Some(arg) = rest.strip_suffix(')') {
                if let Ok(delta) = arg.trim().parse::<f64>() {
                    if delta.is_finite() {
                        return Ok(Preset::DeltaTilt(delta));
                    }
                }
            }
        }
        Err(Error::UnknownPreset(s.to_string()))
    }
}

pub fn sample_preset(name: &str, grid: Grid) -> Result<SampledCurve> {
    name.parse::<Preset>()?.sample(grid)
}

/// Graph parametrization `x -> f(x)` of a curve with `d(z1)/d(alpha) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphView {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub slope: Vec<f64>,
}

impl GraphView {
    pub fn max_abs_slope(&self) -> f64 {
        self.slope.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

pub fn to_graph(curve: &SampledCurve) -> Result<GraphView> {
    to_graph_with(curve, &FilterSpec::default())
}

pub fn to_graph_with(curve: &SampledCurve, filter: &FilterSpec) -> Result<GraphView> {
    let dz1 = curve.dz1(filter);
    let bad: Vec<usize> = dz1
        .iter()
        .enumerate()
        .filter(|(_, &d)| !(d > 0.0))
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NotAGraph { nodes: bad });
    }
    let x = curve.z1();
    let unordered: Vec<usize> = x.windows(2).enumerate().filter(|(_, w)| !(w[1] > w[0])).map(|(i, _)| i + 1).collect();
    if !unordered.is_empty() {
        return Err(Error::NotAGraph { nodes: unordered });
    }
    let dz2 = curve.dz2(filter);
    let slope = dz2.iter().zip(&dz1).map(|(a, b)| a / b).collect();
    Ok(GraphView {
        x,
        f: curve.z2().to_vec(),
        slope,
    })
}
