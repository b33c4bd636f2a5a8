//! Contour dynamics for the periodic two-phase Muskat interface problem.
//!
//! The crate evolves a 2π-periodic interface `z(α) = (α + p1(α), z2(α))` with
//! an alternating-point quadrature of the contour equation, a Dormand-Prince
//! time stepper and a frequency-threshold regularization for backward runs.
//! It also classifies Rayleigh-Taylor regimes, locates vertical tangents and
//! verifies the integrals and bounds behind an explicit turning construction
//! built from piecewise-polynomial blocks.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod lemma;
pub mod quadrature;
pub mod scenario;
pub mod spectral;
pub mod velocity;

pub use curve::{make_grid, sample_preset, to_graph, GraphView, Grid, PhysicalParams, Preset, SampledCurve};
pub use diagnostics::{norm_series, regime_timeline, turning_report, Regime, TurningReport};
pub use error::{Error, Result};
pub use integrator::{
    detect_event_times, evolve_backward_regularized, evolve_forward, rk45_step, Event, EventKind, StepControl,
    Trajectory,
};
pub use spectral::{analyze, filtered_derivative, synthesize, threshold_smooth, FilterSpec, Spectrum};
pub use velocity::{periodic_rhs, rt_profile, turnover_predictor, VelocityField};
pub use scenario::{load_config, run_scenario, RunConfig, RunManifest, RunStatus, ScenarioId};
