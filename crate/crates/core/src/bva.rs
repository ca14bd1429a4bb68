//! Boundary value analysis on the DSS = threshold surface.
//!
//! Each reasonable variable parameter is varied on its own while the others
//! stay fixed. Along that axis the DSS boundary is located by bisection,
//! then a perturbation is calibrated so that the DSS just misses the
//! threshold by the configured accuracy on either side. That yields one
//! safety-critical (SC) and one non-safety-critical (NSC) test case per
//! axis.
//!
//! Before the axes are processed the first axis (the gap) is pinned to its
//! own boundary, so the nominal point lies on the DSS surface and every
//! case differs from it in exactly one parameter.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    dss_absolute, dss_relative, to_absolute, to_relative, AbsoluteScenario, DssBreakdown,
    EnvConstants, RelativeScenario,
};
use crate::roots::{self, RootError};

pub const DEFAULT_ACCURACY: f64 = 0.01;
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-7;
pub const MAX_BISECTION_ITER: usize = 200;
pub const MAX_SECANT_ITER: usize = 100;
/// One SC and one NSC value per parameter.
pub const N_CRIT_VAR: usize = 2;

/// Tolerated relative miss of `|DSS - threshold|` against the accuracy.
const CALIBRATION_REL_TOL: f64 = 0.01;

/// Number of test cases for `n_params` variable parameters.
pub fn count_test_cases(n_params: usize, n_crit_var: usize) -> usize {
    n_params * n_crit_var
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "d_V")]
    EffectiveDistance,
    #[serde(rename = "delta_v")]
    SpeedDifference,
    #[serde(rename = "t_BR")]
    ReactionTime,
    #[serde(rename = "x_L")]
    LeaderPosition,
    #[serde(rename = "x_F")]
    FollowerPosition,
    #[serde(rename = "v_L")]
    LeaderSpeed,
    #[serde(rename = "v_F")]
    FollowerSpeed,
}

impl Axis {
    pub const ALL: [Axis; 7] = [
        Axis::EffectiveDistance,
        Axis::SpeedDifference,
        Axis::ReactionTime,
        Axis::LeaderPosition,
        Axis::FollowerPosition,
        Axis::LeaderSpeed,
        Axis::FollowerSpeed,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Axis::EffectiveDistance => "d_V",
            Axis::SpeedDifference => "delta_v",
            Axis::ReactionTime => "t_BR",
            Axis::LeaderPosition => "x_L",
            Axis::FollowerPosition => "x_F",
            Axis::LeaderSpeed => "v_L",
            Axis::FollowerSpeed => "v_F",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Axis::EffectiveDistance | Axis::LeaderPosition | Axis::FollowerPosition => "m",
            Axis::SpeedDifference | Axis::LeaderSpeed | Axis::FollowerSpeed => "m/s",
            Axis::ReactionTime => "s",
        }
    }

    /// DSS is affine in these parameters.
    pub fn is_affine(self) -> bool {
        matches!(
            self,
            Axis::EffectiveDistance
                | Axis::ReactionTime
                | Axis::LeaderPosition
                | Axis::FollowerPosition
        )
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.symbol() == s)
            .ok_or_else(|| Error::Config(format!("unknown axis '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    #[default]
    Relative,
    Absolute,
}

impl Form {
    /// Reasonable variable parameters in derivation order.
    pub fn axes(self) -> &'static [Axis] {
        match self {
            Form::Relative => &[
                Axis::EffectiveDistance,
                Axis::SpeedDifference,
                Axis::ReactionTime,
            ],
            Form::Absolute => &[
                Axis::LeaderPosition,
                Axis::FollowerPosition,
                Axis::LeaderSpeed,
                Axis::FollowerSpeed,
                Axis::ReactionTime,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criticality {
    #[serde(rename = "SC")]
    SafetyCritical,
    #[serde(rename = "NSC")]
    NonSafetyCritical,
}

impl Criticality {
    pub fn label(self) -> &'static str {
        match self {
            Criticality::SafetyCritical => "SC",
            Criticality::NonSafetyCritical => "NSC",
        }
    }
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// SC iff `dss < 0`.
pub fn classify(dss: f64) -> Result<Criticality> {
    classify_with_threshold(dss, 0.0)
}

pub fn classify_with_threshold(dss: f64, threshold: f64) -> Result<Criticality> {
    if !dss.is_finite() {
        return Err(Error::Domain(format!("DSS must be finite, got {dss}")));
    }
    Ok(if dss < threshold {
        Criticality::SafetyCritical
    } else {
        Criticality::NonSafetyCritical
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterAxis {
    pub id: Axis,
    pub lo: f64,
    pub hi: f64,
}

impl ParameterAxis {
    pub fn new(id: Axis, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!(
                "axis {id}: bounds [{lo}, {hi}] are empty"
            )));
        }
        Ok(Self { id, lo, hi })
    }
}

/// Search interval per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisBounds {
    #[serde(rename = "d_V")]
    pub effective_distance: [f64; 2],
    #[serde(rename = "delta_v")]
    pub speed_difference: [f64; 2],
    #[serde(rename = "t_BR")]
    pub reaction_time: [f64; 2],
    #[serde(rename = "x_L")]
    pub leader_position: [f64; 2],
    #[serde(rename = "x_F")]
    pub follower_position: [f64; 2],
    #[serde(rename = "v_L")]
    pub leader_speed: [f64; 2],
    #[serde(rename = "v_F")]
    pub follower_speed: [f64; 2],
}

impl Default for AxisBounds {
    fn default() -> Self {
        Self {
            effective_distance: [0.0, 500.0],
            speed_difference: [-50.0, 50.0],
            reaction_time: [0.0, 5.0],
            leader_position: [-1000.0, 1000.0],
            follower_position: [-1000.0, 1000.0],
            leader_speed: [0.0, 100.0],
            follower_speed: [0.0, 100.0],
        }
    }
}

impl AxisBounds {
    pub fn get(&self, axis: Axis) -> [f64; 2] {
        match axis {
            Axis::EffectiveDistance => self.effective_distance,
            Axis::SpeedDifference => self.speed_difference,
            Axis::ReactionTime => self.reaction_time,
            Axis::LeaderPosition => self.leader_position,
            Axis::FollowerPosition => self.follower_position,
            Axis::LeaderSpeed => self.leader_speed,
            Axis::FollowerSpeed => self.follower_speed,
        }
    }

    pub fn axis(&self, axis: Axis) -> Result<ParameterAxis> {
        let [lo, hi] = self.get(axis);
        ParameterAxis::new(axis, lo, hi)
    }
}

/// A scenario in either parameterisation, addressable by axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioPoint {
    Relative(RelativeScenario),
    Absolute(AbsoluteScenario),
}

impl ScenarioPoint {
    pub fn form(&self) -> Form {
        match self {
            ScenarioPoint::Relative(_) => Form::Relative,
            ScenarioPoint::Absolute(_) => Form::Absolute,
        }
    }

    pub fn get(&self, axis: Axis) -> Result<f64> {
        match (self, axis) {
            (ScenarioPoint::Relative(s), Axis::EffectiveDistance) => Ok(s.effective_distance),
            (ScenarioPoint::Relative(s), Axis::SpeedDifference) => Ok(s.speed_difference),
            (ScenarioPoint::Relative(s), Axis::ReactionTime) => Ok(s.reaction_time),
            (ScenarioPoint::Absolute(s), Axis::LeaderPosition) => Ok(s.leader_position),
            (ScenarioPoint::Absolute(s), Axis::FollowerPosition) => Ok(s.follower_position),
            (ScenarioPoint::Absolute(s), Axis::LeaderSpeed) => Ok(s.leader_speed),
            (ScenarioPoint::Absolute(s), Axis::FollowerSpeed) => Ok(s.follower_speed),
            (ScenarioPoint::Absolute(s), Axis::ReactionTime) => Ok(s.reaction_time),
            _ => Err(self.foreign_axis(axis)),
        }
    }

    pub fn with(&self, axis: Axis, value: f64) -> Result<Self> {
        let mut out = *self;
        match (&mut out, axis) {
            (ScenarioPoint::Relative(s), Axis::EffectiveDistance) => s.effective_distance = value,
            (ScenarioPoint::Relative(s), Axis::SpeedDifference) => s.speed_difference = value,
            (ScenarioPoint::Relative(s), Axis::ReactionTime) => s.reaction_time = value,
            (ScenarioPoint::Absolute(s), Axis::LeaderPosition) => s.leader_position = value,
            (ScenarioPoint::Absolute(s), Axis::FollowerPosition) => s.follower_position = value,
            (ScenarioPoint::Absolute(s), Axis::LeaderSpeed) => s.leader_speed = value,
            (ScenarioPoint::Absolute(s), Axis::FollowerSpeed) => s.follower_speed = value,
            (ScenarioPoint::Absolute(s), Axis::ReactionTime) => s.reaction_time = value,
            _ => return Err(self.foreign_axis(axis)),
        }
        Ok(out)
    }

    fn foreign_axis(&self, axis: Axis) -> Error {
        Error::Config(format!(
            "axis {axis} is not a parameter of the {:?} form",
            self.form()
        ))
    }

    pub fn dss(&self, env: &EnvConstants) -> Result<DssBreakdown> {
        match self {
            ScenarioPoint::Relative(s) => dss_relative(s, env),
            ScenarioPoint::Absolute(s) => dss_absolute(s, env),
        }
    }

    pub fn relative(&self, env: &EnvConstants) -> RelativeScenario {
        match self {
            ScenarioPoint::Relative(s) => *s,
            ScenarioPoint::Absolute(s) => to_relative(s, env),
        }
    }

    pub fn absolute(&self) -> Option<AbsoluteScenario> {
        match self {
            ScenarioPoint::Absolute(s) => Some(*s),
            ScenarioPoint::Relative(_) => None,
        }
    }

    /// Analytic derivative of DSS with respect to `axis` at this point.
    pub fn slope(&self, axis: Axis, env: &EnvConstants) -> Result<f64> {
        let a_max = env.max_braking_decel()?;
        let rel = self.relative(env);
        let v_f = rel.follower_speed();
        let t = rel.reaction_time;
        Ok(match axis {
            Axis::EffectiveDistance | Axis::LeaderPosition => 1.0,
            Axis::FollowerPosition => -1.0,
            Axis::SpeedDifference => t + v_f / a_max,
            Axis::ReactionTime => -v_f,
            Axis::LeaderSpeed => rel.leader_speed / a_max,
            Axis::FollowerSpeed => -(t + v_f / a_max),
        })
    }

    /// Interval of `axis` values on which the scenario stays evaluable.
    fn domain(&self, axis: Axis) -> (f64, f64) {
        match (self, axis) {
            (_, Axis::ReactionTime | Axis::LeaderSpeed | Axis::FollowerSpeed) => {
                (0.0, f64::INFINITY)
            }
            (ScenarioPoint::Relative(s), Axis::SpeedDifference) => {
                (f64::NEG_INFINITY, s.leader_speed)
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// A point usable as a test case: non-negative gap, speeds and
    /// reaction time.
    pub fn check_case(&self, env: &EnvConstants) -> Result<()> {
        let rel = self.relative(env);
        RelativeScenario::new(
            rel.effective_distance,
            rel.speed_difference,
            rel.reaction_time,
            rel.leader_speed,
        )
        .map(|_| ())
    }
}

fn root_error(axis: Axis, e: RootError) -> Error {
    match e {
        RootError::NoSignChange { lo, hi, f_lo, f_hi } => Error::NoSignChange {
            axis: axis.to_string(),
            lo,
            hi,
            f_lo,
            f_hi,
        },
        RootError::NonConvergence { iterations } => Error::NonConvergence {
            axis: axis.to_string(),
            iterations,
        },
    }
}

fn clipped_bounds(axis: &ParameterAxis, nominal: &ScenarioPoint) -> Result<(f64, f64)> {
    let (dom_lo, dom_hi) = nominal.domain(axis.id);
    let lo = axis.lo.max(dom_lo);
    let hi = axis.hi.min(dom_hi);
    if !(lo <= hi) {
        return Err(Error::Domain(format!(
            "axis {}: bounds [{}, {}] lie outside the valid range",
            axis.id, axis.lo, axis.hi
        )));
    }
    Ok((lo, hi))
}

/// Rejects axes on which DSS is constant or changes its direction.
pub fn check_monotone(
    axis: &ParameterAxis,
    nominal: &ScenarioPoint,
    env: &EnvConstants,
) -> Result<()> {
    let (lo, hi) = clipped_bounds(axis, nominal)?;
    let s_lo = nominal.with(axis.id, lo)?.slope(axis.id, env)?;
    let s_hi = nominal.with(axis.id, hi)?.slope(axis.id, env)?;
    if s_lo == 0.0 && s_hi == 0.0 {
        return Err(Error::NonMonotone {
            axis: axis.id.to_string(),
            reason: "DSS does not depend on this parameter here (zero slope)".into(),
        });
    }
    if s_lo * s_hi < 0.0 {
        return Err(Error::NonMonotone {
            axis: axis.id.to_string(),
            reason: format!("slope changes sign on [{lo}, {hi}]"),
        });
    }
    Ok(())
}

/// Locates the parameter value where DSS crosses `threshold`, all other
/// parameters held at `nominal`.
pub fn find_boundary(
    axis: &ParameterAxis,
    nominal: &ScenarioPoint,
    env: &EnvConstants,
    tol: f64,
    threshold: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!(
            "boundary tolerance must be > 0, got {tol}"
        )));
    }
    check_monotone(axis, nominal, env)?;
    let (lo, hi) = clipped_bounds(axis, nominal)?;
    let f = |x: f64| match nominal.with(axis.id, x).and_then(|p| p.dss(env)) {
        Ok(b) => b.dss - threshold,
        Err(_) => f64::NAN,
    };
    roots::bisect(f, lo, hi, tol, MAX_BISECTION_ITER).map_err(|e| root_error(axis.id, e))
}

/// Perturbation sizes around a boundary, both positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Step towards lower DSS.
    pub unsafe_delta: f64,
    /// Step towards higher DSS.
    pub safe_delta: f64,
    /// Whether DSS grows with the parameter.
    pub increasing: bool,
}

impl Calibration {
    pub fn unsafe_value(&self, boundary: f64) -> f64 {
        if self.increasing {
            boundary - self.unsafe_delta
        } else {
            boundary + self.unsafe_delta
        }
    }

    pub fn safe_value(&self, boundary: f64) -> f64 {
        if self.increasing {
            boundary + self.safe_delta
        } else {
            boundary - self.safe_delta
        }
    }
}

/// Sizes the step from `boundary` that moves DSS by `accuracy` below and
/// above the threshold. Affine axes use `accuracy / |slope|`; the others
/// are solved by secant iteration from that first-order guess.
pub fn calibrate_delta(
    axis: Axis,
    boundary: f64,
    accuracy: f64,
    nominal: &ScenarioPoint,
    env: &EnvConstants,
    threshold: f64,
) -> Result<Calibration> {
    if !(accuracy > 0.0 && accuracy.is_finite()) {
        return Err(Error::Config(format!(
            "accuracy must be > 0, got {accuracy}"
        )));
    }
    let at_boundary = nominal.with(axis, boundary)?;
    let mut slope = at_boundary.slope(axis, env)?;
    if slope == 0.0 {
        // boundary on the domain edge; the slope is linear in the parameter
        let probe = boundary + accuracy;
        slope = nominal.with(axis, probe)?.slope(axis, env)?;
    }
    if slope == 0.0 {
        return Err(Error::NonMonotone {
            axis: axis.to_string(),
            reason: "zero slope at boundary".into(),
        });
    }
    let increasing = slope > 0.0;
    let guess = accuracy / slope.abs();

    if axis.is_affine() {
        return Ok(Calibration {
            unsafe_delta: guess,
            safe_delta: guess,
            increasing,
        });
    }

    let direction = if increasing { 1.0 } else { -1.0 };
    let solve_side = |side: f64, target: f64| -> Result<f64> {
        nominal
            .with(axis, boundary + side * direction * guess)?
            .dss(env)?;
        let g = |delta: f64| match nominal
            .with(axis, boundary + side * direction * delta)
            .and_then(|p| p.dss(env))
        {
            Ok(b) => b.dss - target,
            Err(_) => f64::NAN,
        };
        let delta = roots::secant(g, guess, 1.05 * guess, 1e-13, MAX_SECANT_ITER)
            .map_err(|e| root_error(axis, e))?;
        if !(delta > 0.0) {
            return Err(Error::NonConvergence {
                axis: axis.to_string(),
                iterations: MAX_SECANT_ITER,
            });
        }
        Ok(delta)
    };

    Ok(Calibration {
        unsafe_delta: solve_side(-1.0, threshold - accuracy)?,
        safe_delta: solve_side(1.0, threshold + accuracy)?,
        increasing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivationConfig {
    /// Target `|DSS - threshold|` of each case, in m.
    pub accuracy: f64,
    pub boundary_tol: f64,
    pub n_crit_var: usize,
    pub threshold: f64,
    pub form: Form,
    pub bounds: AxisBounds,
    pub nominal: RelativeScenario,
    pub env: EnvConstants,
}

impl Default for DerivationConfig {
    fn default() -> Self {
        Self {
            accuracy: DEFAULT_ACCURACY,
            boundary_tol: DEFAULT_BOUNDARY_TOL,
            n_crit_var: N_CRIT_VAR,
            threshold: 0.0,
            form: Form::Relative,
            bounds: AxisBounds::default(),
            nominal: RelativeScenario {
                effective_distance: 42.56,
                speed_difference: -5.5556,
                reaction_time: 0.7,
                leader_speed: 27.7778,
            },
            env: EnvConstants::default(),
        }
    }
}

impl DerivationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.accuracy.is_finite() && self.accuracy > 0.0) {
            return Err(Error::Config(format!(
                "accuracy must be > 0, got {}",
                self.accuracy
            )));
        }
        if !(self.boundary_tol.is_finite() && self.boundary_tol > 0.0) {
            return Err(Error::Config(format!(
                "boundary_tol must be > 0, got {}",
                self.boundary_tol
            )));
        }
        if self.n_crit_var != N_CRIT_VAR {
            return Err(Error::Config(format!(
                "n_crit_var is fixed at {N_CRIT_VAR}, got {}",
                self.n_crit_var
            )));
        }
        if !self.threshold.is_finite() {
            return Err(Error::Config("threshold must be finite".into()));
        }
        self.env.validate()?;
        let n = &self.nominal;
        RelativeScenario::new(
            n.effective_distance,
            n.speed_difference,
            n.reaction_time,
            n.leader_speed,
        )?;
        let point = self.nominal_point()?;
        for &axis in self.form.axes() {
            let pa = self.bounds.axis(axis)?;
            let v = point.get(axis)?;
            if v < pa.lo || v > pa.hi {
                return Err(Error::Config(format!(
                    "nominal {axis} = {v} lies outside bounds [{}, {}]",
                    pa.lo, pa.hi
                )));
            }
        }
        Ok(())
    }

    /// Nominal scenario in the configured form. The absolute form anchors
    /// the follower at x = 0.
    pub fn nominal_point(&self) -> Result<ScenarioPoint> {
        Ok(match self.form {
            Form::Relative => ScenarioPoint::Relative(self.nominal),
            Form::Absolute => ScenarioPoint::Absolute(to_absolute(&self.nominal, &self.env, 0.0)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub axis: Axis,
    pub criticality: Criticality,
    /// Value of the varied parameter.
    pub value: f64,
    pub boundary: f64,
    /// `value - boundary`.
    pub offset: f64,
    pub params: RelativeScenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absolute: Option<AbsoluteScenario>,
    pub expected_dss: f64,
    pub breakdown: DssBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedAxis {
    pub axis: Axis,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngInfo {
    pub algorithm: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<RngInfo>,
}

impl Provenance {
    pub fn now(rng: Option<RngInfo>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            rng,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    pub form: Form,
    /// Nominal point after pinning the gap to its boundary.
    pub pinned_nominal: RelativeScenario,
    pub cases: Vec<TestCase>,
    pub skipped: Vec<SkippedAxis>,
    pub config: DerivationConfig,
    pub provenance: Provenance,
}

enum AxisOutcome {
    Cases(Box<[TestCase; 2]>),
    Skipped(String),
}

pub fn derive_suite(config: &DerivationConfig) -> Result<TestSuite> {
    config.validate()?;
    let env = &config.env;
    let axes = config.form.axes();

    let nominal = config.nominal_point()?;
    let gap_axis = config.bounds.axis(axes[0])?;
    let pin = find_boundary(
        &gap_axis,
        &nominal,
        env,
        config.boundary_tol,
        config.threshold,
    )?;
    let pinned = nominal.with(axes[0], pin)?;

    let mut cases = Vec::with_capacity(count_test_cases(axes.len(), config.n_crit_var));
    let mut skipped = Vec::new();
    for &axis in axes {
        match derive_axis(axis, &pinned, config, cases.len())? {
            AxisOutcome::Cases(pair) => cases.extend(*pair),
            AxisOutcome::Skipped(reason) => skipped.push(SkippedAxis { axis, reason }),
        }
    }

    Ok(TestSuite {
        form: config.form,
        pinned_nominal: pinned.relative(env),
        cases,
        skipped,
        config: *config,
        provenance: Provenance::now(None),
    })
}

fn derive_axis(
    axis: Axis,
    pinned: &ScenarioPoint,
    config: &DerivationConfig,
    numbered: usize,
) -> Result<AxisOutcome> {
    let env = &config.env;
    let pa = config.bounds.axis(axis)?;
    let boundary = match find_boundary(&pa, pinned, env, config.boundary_tol, config.threshold) {
        Ok(b) => b,
        Err(Error::NonMonotone { reason, .. }) => return Ok(AxisOutcome::Skipped(reason)),
        Err(e) => return Err(e),
    };
    let cal = match calibrate_delta(
        axis,
        boundary,
        config.accuracy,
        pinned,
        env,
        config.threshold,
    ) {
        Ok(c) => c,
        Err(Error::Domain(reason)) => return Ok(AxisOutcome::Skipped(reason)),
        Err(e) => return Err(e),
    };

    let sides = [
        (cal.unsafe_value(boundary), Criticality::SafetyCritical),
        (cal.safe_value(boundary), Criticality::NonSafetyCritical),
    ];
    let mut out = Vec::with_capacity(2);
    for (k, (value, expected)) in sides.into_iter().enumerate() {
        let point = pinned.with(axis, value)?;
        if let Err(e) = point.check_case(env) {
            return Ok(AxisOutcome::Skipped(format!(
                "{} case at {axis} = {value} is not a valid scenario: {e}",
                expected.label()
            )));
        }
        let breakdown = point.dss(env)?;
        let criticality = classify_with_threshold(breakdown.dss, config.threshold)?;
        let miss = (breakdown.dss - config.threshold).abs();
        if criticality != expected
            || !(0.5 * config.accuracy..=2.0 * config.accuracy).contains(&miss)
        {
            return Err(Error::NonConvergence {
                axis: axis.to_string(),
                iterations: MAX_SECANT_ITER,
            });
        }
        if !axis.is_affine()
            && (miss - config.accuracy).abs() > CALIBRATION_REL_TOL * config.accuracy
        {
            return Err(Error::NonConvergence {
                axis: axis.to_string(),
                iterations: MAX_SECANT_ITER,
            });
        }
        out.push(TestCase {
            id: format!("TC.{}", numbered + k + 1),
            axis,
            criticality,
            value,
            boundary,
            offset: value - boundary,
            params: point.relative(env),
            absolute: point.absolute(),
            expected_dss: breakdown.dss,
            breakdown,
        });
    }
    let [sc, nsc]: [TestCase; 2] = out.try_into().expect("two sides");
    Ok(AxisOutcome::Cases(Box::new([sc, nsc])))
}

impl TestSuite {
    pub fn sc_count(&self) -> usize {
        self.cases
            .iter()
            .filter(|c| c.criticality == Criticality::SafetyCritical)
            .count()
    }

    /// Rows of parameter values, then a, b, DSS and criticality; one column
    /// per test case. Values printed with four decimals.
    pub fn write_table_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| Error::Config(format!("cannot write CSV: {e}"));

        let mut header = vec!["parameter".to_string()];
        header.extend(self.cases.iter().map(|c| c.id.clone()));
        w.write_record(&header).map_err(io)?;

        let row = |name: &str, f: &dyn Fn(&TestCase) -> f64| -> Vec<String> {
            std::iter::once(name.to_string())
                .chain(self.cases.iter().map(|c| format!("{:.4}", f(c))))
                .collect()
        };
        let mut rows: Vec<Vec<String>> = Vec::new();
        match self.form {
            Form::Relative => {
                rows.push(row("d_V", &|c| c.params.effective_distance));
                rows.push(row("delta_v", &|c| c.params.speed_difference));
                rows.push(row("t_BR", &|c| c.params.reaction_time));
            }
            Form::Absolute => {
                let abs = |c: &TestCase| c.absolute.expect("absolute-form case");
                rows.push(row("x_L", &|c| abs(c).leader_position));
                rows.push(row("x_F", &|c| abs(c).follower_position));
                rows.push(row("v_L", &|c| abs(c).leader_speed));
                rows.push(row("v_F", &|c| abs(c).follower_speed));
                rows.push(row("t_BR", &|c| abs(c).reaction_time));
            }
        }
        rows.push(row("a", &|c| c.breakdown.space_distance));
        rows.push(row("b", &|c| c.breakdown.stop_distance));
        rows.push(row("DSS", &|c| c.expected_dss));
        for r in rows {
            w.write_record(&r).map_err(io)?;
        }
        let mut crit = vec!["criticality".to_string()];
        crit.extend(self.cases.iter().map(|c| c.criticality.label().to_string()));
        w.write_record(&crit).map_err(io)?;
        w.flush()
            .map_err(|e| Error::Config(format!("cannot write CSV: {e}")))?;
        Ok(())
    }

    pub fn to_table_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_table_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV is ASCII"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const V_L: f64 = 27.7778;
    const DV: f64 = -5.5556;
    const T: f64 = 0.7;
    const A_MAX: f64 = 9.81 * 0.9;

    fn env() -> EnvConstants {
        EnvConstants::default()
    }

    fn nominal(gap: f64) -> ScenarioPoint {
        ScenarioPoint::Relative(RelativeScenario::new(gap, DV, T, V_L).unwrap())
    }

    fn stop_distance(v_f: f64, t: f64) -> f64 {
        v_f * t + v_f * v_f / (2.0 * A_MAX)
    }

    // closed forms for the three relative axes
    fn gap_root() -> f64 {
        stop_distance(V_L - DV, T) - V_L * V_L / (2.0 * A_MAX)
    }

    #[test]
    fn counting_law() {
        assert_eq!(count_test_cases(3, 2), 6);
        assert_eq!(count_test_cases(5, 2), 10);
        assert_eq!(count_test_cases(1, 1), 1);
        assert_eq!(count_test_cases(Form::Relative.axes().len(), N_CRIT_VAR), 6);
        assert_eq!(
            count_test_cases(Form::Absolute.axes().len(), N_CRIT_VAR),
            10
        );
    }

    #[test]
    fn classify_threshold_rule() {
        assert_eq!(classify(-0.01).unwrap(), Criticality::SafetyCritical);
        assert_eq!(classify(0.01).unwrap(), Criticality::NonSafetyCritical);
        assert_eq!(classify(0.0).unwrap(), Criticality::NonSafetyCritical);
        assert_eq!(classify(-0.0).unwrap(), Criticality::NonSafetyCritical);
        assert!(classify(f64::NAN).is_err());
        assert!(classify(f64::INFINITY).is_err());
        assert_eq!(
            classify_with_threshold(0.5, 1.0).unwrap(),
            Criticality::SafetyCritical
        );
    }

    #[test]
    fn axis_names_round_trip() {
        for a in Axis::ALL {
            assert_eq!(a.symbol().parse::<Axis>().unwrap(), a);
        }
        assert!("speed".parse::<Axis>().is_err());
    }

    #[test]
    fn boundary_gap_axis() {
        let pa = AxisBounds::default().axis(Axis::EffectiveDistance).unwrap();
        let b = find_boundary(&pa, &nominal(10.0), &env(), 1e-7, 0.0).unwrap();
        assert_abs_diff_eq!(b, gap_root(), epsilon = 1e-7);
        assert_abs_diff_eq!(b, 42.56, epsilon = 5e-3);
    }

    #[test]
    fn boundary_reaction_axis() {
        let pa = AxisBounds::default().axis(Axis::ReactionTime).unwrap();
        let p = nominal(42.56);
        let v_f = V_L - DV;
        let closed = (42.56 + V_L * V_L / (2.0 * A_MAX) - v_f * v_f / (2.0 * A_MAX)) / v_f;
        let b = find_boundary(&pa, &p, &env(), 1e-9, 0.0).unwrap();
        assert_abs_diff_eq!(b, closed, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 0.7, epsilon = 1e-3);
    }

    #[test]
    fn boundary_speed_difference_axis() {
        let pa = AxisBounds::default().axis(Axis::SpeedDifference).unwrap();
        let p = nominal(gap_root());
        // v_F^2/(2a) + t v_F - space = 0
        let space = gap_root() + V_L * V_L / (2.0 * A_MAX);
        let c2 = 1.0 / (2.0 * A_MAX);
        let v_f = (-T + (T * T + 4.0 * c2 * space).sqrt()) / (2.0 * c2);
        let b = find_boundary(&pa, &p, &env(), 1e-9, 0.0).unwrap();
        assert_abs_diff_eq!(b, V_L - v_f, epsilon = 1e-9);
        assert_abs_diff_eq!(b, DV, epsilon = 1e-9);
    }

    #[test]
    fn boundary_errors() {
        let narrow = ParameterAxis::new(Axis::EffectiveDistance, 0.0, 10.0).unwrap();
        assert!(matches!(
            find_boundary(&narrow, &nominal(5.0), &env(), 1e-7, 0.0),
            Err(Error::NoSignChange { .. })
        ));
        let still = ScenarioPoint::Relative(RelativeScenario::new(5.0, 10.0, 0.7, 10.0).unwrap());
        let pa = AxisBounds::default().axis(Axis::ReactionTime).unwrap();
        assert!(matches!(
            find_boundary(&pa, &still, &env(), 1e-7, 0.0),
            Err(Error::NonMonotone { .. })
        ));
        assert!(ParameterAxis::new(Axis::ReactionTime, 1.0, 1.0).is_err());
        let pa = AxisBounds::default().axis(Axis::LeaderPosition).unwrap();
        assert!(matches!(
            find_boundary(&pa, &nominal(5.0), &env(), 1e-7, 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn calibration_affine_axes() {
        let p = nominal(gap_root());
        let c =
            calibrate_delta(Axis::EffectiveDistance, gap_root(), 0.01, &p, &env(), 0.0).unwrap();
        assert_eq!(
            (c.unsafe_delta, c.safe_delta, c.increasing),
            (0.01, 0.01, true)
        );

        let c = calibrate_delta(Axis::ReactionTime, 0.7, 0.01, &p, &env(), 0.0).unwrap();
        assert_eq!(c.unsafe_delta, 0.01 / 33.3334);
        assert!(!c.increasing);
        assert_abs_diff_eq!(c.unsafe_delta, 0.0003, epsilon = 5e-5);
        assert_abs_diff_eq!(c.unsafe_value(0.7), 0.7003, epsilon = 5e-5);
        assert_abs_diff_eq!(c.safe_value(0.7), 0.6997, epsilon = 5e-5);
    }

    #[test]
    fn calibration_speed_difference_matches_finite_difference_slope() {
        let p = nominal(gap_root());
        let c = calibrate_delta(Axis::SpeedDifference, DV, 0.01, &p, &env(), 0.0).unwrap();
        let h = 1e-6;
        let f = |x: f64| {
            p.with(Axis::SpeedDifference, x)
                .unwrap()
                .dss(&env())
                .unwrap()
                .dss
        };
        let fd_slope = (f(DV + h) - f(DV - h)) / (2.0 * h);
        assert_abs_diff_eq!(c.unsafe_delta, 0.01 / fd_slope, epsilon = 1e-6);
        assert_abs_diff_eq!(c.safe_delta, 0.01 / fd_slope, epsilon = 1e-6);
        assert_abs_diff_eq!(c.unsafe_delta, 0.00224, epsilon = 1e-5);
        assert!(c.increasing);
        assert_abs_diff_eq!(f(c.unsafe_value(DV)), -0.01, epsilon = 1e-10);
        assert_abs_diff_eq!(f(c.safe_value(DV)), 0.01, epsilon = 1e-10);
    }

    #[test]
    fn calibration_rejects_bad_accuracy() {
        let p = nominal(gap_root());
        assert!(calibrate_delta(Axis::EffectiveDistance, 1.0, 0.0, &p, &env(), 0.0).is_err());
    }

    #[test]
    fn suite_matches_table() {
        let suite = derive_suite(&DerivationConfig::default()).unwrap();
        assert_eq!(suite.cases.len(), 6);
        assert_eq!(suite.sc_count(), 3);
        let ids: Vec<_> = suite.cases.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["TC.1", "TC.2", "TC.3", "TC.4", "TC.5", "TC.6"]);
        let gap: Vec<f64> = suite
            .cases
            .iter()
            .map(|c| c.params.effective_distance)
            .collect();
        assert_abs_diff_eq!(gap[0], 42.55, epsilon = 1e-3);
        assert_abs_diff_eq!(gap[1], 42.57, epsilon = 1e-3);
        for c in &suite.cases[2..] {
            assert_eq!(
                c.params.effective_distance,
                suite.pinned_nominal.effective_distance
            );
        }
        assert_abs_diff_eq!(
            suite.cases[2].params.speed_difference,
            -5.5578,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(
            suite.cases[3].params.speed_difference,
            -5.5534,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(suite.cases[4].params.reaction_time, 0.7003, epsilon = 1e-4);
        assert_abs_diff_eq!(suite.cases[5].params.reaction_time, 0.6997, epsilon = 1e-4);
        for (i, c) in suite.cases.iter().enumerate() {
            let sc = i % 2 == 0;
            assert_eq!(c.criticality == Criticality::SafetyCritical, sc);
            assert_abs_diff_eq!(c.expected_dss.abs(), 0.01, epsilon = 1e-6);
        }
    }

    #[test]
    fn suite_accuracy_two_cm() {
        let cfg = DerivationConfig {
            accuracy: 0.02,
            ..DerivationConfig::default()
        };
        let suite = derive_suite(&cfg).unwrap();
        assert_abs_diff_eq!(
            suite.cases[0].params.effective_distance,
            42.54,
            epsilon = 1e-3
        );
        assert_abs_diff_eq!(
            suite.cases[1].params.effective_distance,
            42.58,
            epsilon = 1e-3
        );
    }

    #[test]
    fn suite_absolute_form_has_ten_cases() {
        let cfg = DerivationConfig {
            form: Form::Absolute,
            ..DerivationConfig::default()
        };
        let suite = derive_suite(&cfg).unwrap();
        assert_eq!(suite.cases.len(), 10);
        assert_eq!(suite.sc_count(), 5);
        for c in &suite.cases {
            let abs = c.absolute.unwrap();
            let again = dss_absolute(&abs, &cfg.env).unwrap().dss;
            assert_eq!(again, c.expected_dss);
        }
        assert!(suite.to_table_csv().unwrap().starts_with("parameter,TC.1"));
    }

    #[test]
    fn stationary_follower_cannot_be_critical() {
        // v_F = 0: DSS = d_V + v_L^2/(2a) >= 0 for every valid gap
        let cfg = DerivationConfig {
            nominal: RelativeScenario::new(0.0, 0.0, 0.7, 0.0).unwrap(),
            ..DerivationConfig::default()
        };
        let suite = derive_suite(&cfg).unwrap();
        assert!(suite.cases.is_empty());
        let axes: Vec<Axis> = suite.skipped.iter().map(|s| s.axis).collect();
        assert_eq!(
            axes,
            [
                Axis::EffectiveDistance,
                Axis::SpeedDifference,
                Axis::ReactionTime
            ]
        );
        assert!(suite.skipped[2].reason.contains("zero slope"));
    }

    #[test]
    fn stationary_follower_with_leader_moving_fails_bracketing() {
        let cfg = DerivationConfig {
            nominal: RelativeScenario::new(10.0, 10.0, 0.7, 10.0).unwrap(),
            ..DerivationConfig::default()
        };
        assert!(matches!(
            derive_suite(&cfg),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let bad = DerivationConfig {
            n_crit_var: 3,
            ..DerivationConfig::default()
        };
        assert!(matches!(derive_suite(&bad), Err(Error::Config(_))));
        let bad = DerivationConfig {
            accuracy: -1.0,
            ..DerivationConfig::default()
        };
        assert!(derive_suite(&bad).is_err());
        let mut bad = DerivationConfig::default();
        bad.bounds.reaction_time = [1.0, 5.0];
        assert!(matches!(derive_suite(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn table_csv_layout() {
        let suite = derive_suite(&DerivationConfig::default()).unwrap();
        let csv = suite.to_table_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "parameter,TC.1,TC.2,TC.3,TC.4,TC.5,TC.6");
        let first: Vec<&str> = lines.iter().map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(
            first,
            [
                "parameter",
                "d_V",
                "delta_v",
                "t_BR",
                "a",
                "b",
                "DSS",
                "criticality"
            ]
        );
        assert_eq!(lines[7], "criticality,SC,NSC,SC,NSC,SC,NSC");
        assert!(lines[1].starts_with("d_V,42.5503,42.5703,"));
        assert!(lines[3].ends_with(",0.7003,0.6997"));
        assert!(!csv.contains('\r'));
    }
}
