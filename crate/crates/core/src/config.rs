//! JSON scenario configuration.
//!
//! ```json
//! {
//!   "env": { "g": 9.81, "mu": 0.9, "l_V": 5.0 },
//!   "scenario": { "relative": { "d_V": 42.55, "delta_v": -20, "t_BR": 0.7, "v_L": 100, "units": "kmh" } },
//!   "reaction_time": { "t0": 0.4, "k": 2, "theta": 0.15, "seed": 42 },
//!   "derivation": { "accuracy": 0.01, "boundary_tol": 1e-7, "threshold": 0, "form": "relative" },
//!   "sim": { "dt": 0.01, "max_time": 120, "dead_band": 0.05, "samples": 1000 }
//! }
//! ```
//!
//! Only `scenario` is required. Speeds are in m/s unless the scenario block
//! says `"units": "kmh"`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::bva::{
    Axis, AxisBounds, DerivationConfig, Form, DEFAULT_ACCURACY, DEFAULT_BOUNDARY_TOL, N_CRIT_VAR,
};
use crate::error::{Error, Result};
use crate::kinematics::{
    to_relative, AbsoluteScenario, EnvConstants, RelativeScenario, NOMINAL_LEADER_SPEED,
};
use crate::reaction::ShiftedGamma;
use crate::sim::{ScenarioRanges, SimConfig, DEFAULT_DEAD_BAND, DEFAULT_DT, DEFAULT_MAX_TIME};

pub const KMH_PER_MS: f64 = 3.6;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedUnit {
    #[default]
    Si,
    Kmh,
}

impl SpeedUnit {
    pub fn to_si(self, v: f64) -> f64 {
        match self {
            SpeedUnit::Si => v,
            SpeedUnit::Kmh => v / KMH_PER_MS,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelativeBlock {
    #[serde(rename = "d_V")]
    effective_distance: f64,
    delta_v: f64,
    #[serde(rename = "t_BR")]
    reaction_time: f64,
    #[serde(rename = "v_L")]
    leader_speed: Option<f64>,
    #[serde(default)]
    units: SpeedUnit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AbsoluteBlock {
    #[serde(rename = "x_L")]
    leader_position: f64,
    #[serde(rename = "x_F")]
    follower_position: f64,
    #[serde(rename = "v_L")]
    leader_speed: f64,
    #[serde(rename = "v_F")]
    follower_speed: f64,
    #[serde(rename = "t_BR")]
    reaction_time: f64,
    #[serde(default)]
    units: SpeedUnit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioBlock {
    relative: Option<RelativeBlock>,
    absolute: Option<AbsoluteBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ReactionBlock {
    t0: f64,
    k: f64,
    theta: f64,
    seed: u64,
}

impl Default for ReactionBlock {
    fn default() -> Self {
        let d = ShiftedGamma::default();
        Self {
            t0: d.shift,
            k: d.shape,
            theta: d.scale,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DerivationBlock {
    accuracy: f64,
    boundary_tol: f64,
    threshold: f64,
    form: Form,
    bounds: AxisBounds,
}

impl Default for DerivationBlock {
    fn default() -> Self {
        Self {
            accuracy: DEFAULT_ACCURACY,
            boundary_tol: DEFAULT_BOUNDARY_TOL,
            threshold: 0.0,
            form: Form::Relative,
            bounds: AxisBounds::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimBlock {
    dt: f64,
    max_time: f64,
    dead_band: f64,
    samples: usize,
    ranges: ScenarioRanges,
}

impl Default for SimBlock {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            max_time: DEFAULT_MAX_TIME,
            dead_band: DEFAULT_DEAD_BAND,
            samples: DEFAULT_SAMPLES,
            ranges: ScenarioRanges::default(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepBlock {
    ranges: BTreeMap<Axis, [f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    env: EnvConstants,
    scenario: ScenarioBlock,
    #[serde(default)]
    reaction_time: ReactionBlock,
    #[serde(default)]
    derivation: DerivationBlock,
    #[serde(default)]
    sim: SimBlock,
    #[serde(default)]
    sweep: SweepBlock,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Relative(RelativeScenario),
    Absolute(AbsoluteScenario),
}

/// A loaded and validated configuration, all quantities in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub env: EnvConstants,
    pub scenario: Scenario,
    pub reaction: ShiftedGamma,
    pub seed: u64,
    pub accuracy: f64,
    pub boundary_tol: f64,
    pub threshold: f64,
    pub form: Form,
    pub bounds: AxisBounds,
    pub sim: SimConfig,
    pub dead_band: f64,
    pub samples: usize,
    pub ranges: ScenarioRanges,
    pub sweep_ranges: BTreeMap<Axis, [f64; 2]>,
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}

fn at_line(text: &str, key: &str, e: Error) -> Error {
    let Some(line) = line_of(text, key) else {
        return e;
    };
    let prefix = |m: String| format!("line {line} ({key}): {m}");
    match e {
        Error::InvalidConstants(m) => Error::InvalidConstants(prefix(m)),
        Error::InvalidScenario(m) => Error::InvalidScenario(prefix(m)),
        Error::Domain(m) => Error::Domain(prefix(m)),
        Error::InvalidParams(m) => Error::InvalidParams(prefix(m)),
        Error::Config(m) => Error::Config(prefix(m)),
        other => other,
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

        raw.env.validate().map_err(|e| at_line(text, "env", e))?;
        let env = raw.env;

        let scenario = match (raw.scenario.relative, raw.scenario.absolute) {
            (Some(r), None) => {
                let u = r.units;
                let s = RelativeScenario {
                    effective_distance: r.effective_distance,
                    speed_difference: u.to_si(r.delta_v),
                    reaction_time: r.reaction_time,
                    leader_speed: r.leader_speed.map_or(NOMINAL_LEADER_SPEED, |v| u.to_si(v)),
                };
                check_relative(text, &s)?;
                Scenario::Relative(s)
            }
            (None, Some(a)) => {
                let u = a.units;
                let s = AbsoluteScenario {
                    leader_position: a.leader_position,
                    follower_position: a.follower_position,
                    leader_speed: u.to_si(a.leader_speed),
                    follower_speed: u.to_si(a.follower_speed),
                    reaction_time: a.reaction_time,
                };
                check_absolute(text, &s, &env)?;
                Scenario::Absolute(s)
            }
            _ => {
                return Err(at_line(
                    text,
                    "scenario",
                    Error::Config(
                        "scenario must contain exactly one of 'relative' or 'absolute'".into(),
                    ),
                ))
            }
        };

        let rt = raw.reaction_time;
        let reaction = ShiftedGamma::new(rt.t0, rt.k, rt.theta)
            .map_err(|e| at_line(text, "reaction_time", e))?;

        let d = raw.derivation;
        let sim = SimConfig {
            dt: raw.sim.dt,
            max_time: raw.sim.max_time,
            env,
        };
        sim.validate().map_err(|e| at_line(text, "sim", e))?;
        if !(raw.sim.dead_band >= 0.0 && raw.sim.dead_band.is_finite()) {
            return Err(at_line(
                text,
                "dead_band",
                Error::Config(format!("dead_band must be >= 0, got {}", raw.sim.dead_band)),
            ));
        }
        for (axis, [lo, hi]) in &raw.sweep.ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(at_line(
                    text,
                    axis.symbol(),
                    Error::Config(format!("sweep range for {axis} is invalid: [{lo}, {hi}]")),
                ));
            }
        }

        let config = Self {
            env,
            scenario,
            reaction,
            seed: rt.seed,
            accuracy: d.accuracy,
            boundary_tol: d.boundary_tol,
            threshold: d.threshold,
            form: d.form,
            bounds: d.bounds,
            sim,
            dead_band: raw.sim.dead_band,
            samples: raw.sim.samples,
            ranges: raw.sim.ranges,
            sweep_ranges: raw.sweep.ranges,
        };
        if !(config.accuracy > 0.0 && config.boundary_tol > 0.0 && config.threshold.is_finite()) {
            return Err(at_line(
                text,
                "derivation",
                Error::Config("accuracy and boundary_tol must be > 0, threshold finite".into()),
            ));
        }
        Ok(config)
    }

    pub fn relative(&self) -> RelativeScenario {
        match self.scenario {
            Scenario::Relative(s) => s,
            Scenario::Absolute(s) => to_relative(&s, &self.env),
        }
    }

    pub fn derivation(&self) -> DerivationConfig {
        DerivationConfig {
            accuracy: self.accuracy,
            boundary_tol: self.boundary_tol,
            n_crit_var: N_CRIT_VAR,
            threshold: self.threshold,
            form: self.form,
            bounds: self.bounds,
            nominal: self.relative(),
            env: self.env,
        }
    }
}

fn check_relative(text: &str, s: &RelativeScenario) -> Result<()> {
    let fail = |key: &str, e: Error| Err(at_line(text, key, e));
    if !(s.effective_distance >= 0.0 && s.effective_distance.is_finite()) {
        return fail(
            "d_V",
            Error::InvalidScenario(format!("d_V must be >= 0, got {}", s.effective_distance)),
        );
    }
    if !(s.reaction_time >= 0.0 && s.reaction_time.is_finite()) {
        return fail(
            "t_BR",
            Error::Domain(format!("t_BR must be >= 0, got {}", s.reaction_time)),
        );
    }
    if !(s.leader_speed >= 0.0 && s.leader_speed.is_finite()) {
        return fail(
            "v_L",
            Error::Domain(format!("v_L must be >= 0, got {}", s.leader_speed)),
        );
    }
    if !(s.follower_speed() >= 0.0) {
        return fail(
            "delta_v",
            Error::Domain(format!(
                "implied follower speed v_L - delta_v = {} is negative",
                s.follower_speed()
            )),
        );
    }
    Ok(())
}

fn check_absolute(text: &str, s: &AbsoluteScenario, env: &EnvConstants) -> Result<()> {
    let fail = |key: &str, e: Error| Err(at_line(text, key, e));
    for (key, v) in [("v_L", s.leader_speed), ("v_F", s.follower_speed)] {
        if !(v >= 0.0 && v.is_finite()) {
            return fail(key, Error::Domain(format!("{key} must be >= 0, got {v}")));
        }
    }
    if !(s.reaction_time >= 0.0 && s.reaction_time.is_finite()) {
        return fail(
            "t_BR",
            Error::Domain(format!("t_BR must be >= 0, got {}", s.reaction_time)),
        );
    }
    let gap = s.effective_distance(env);
    if !(gap >= 0.0) {
        return fail(
            "x_L",
            Error::InvalidScenario(format!("vehicles overlap: x_L - x_F - l_V = {gap}")),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn minimal_relative_config() {
        let c = Config::parse(
            r#"{"scenario": {"relative": {"d_V": 42.55, "delta_v": -5.5556, "t_BR": 0.7}}}"#,
        )
        .unwrap();
        assert_eq!(c.env, EnvConstants::default());
        assert_eq!(c.relative().leader_speed, NOMINAL_LEADER_SPEED);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.samples, DEFAULT_SAMPLES);
        assert_eq!(c.derivation().nominal.effective_distance, 42.55);
    }

    #[test]
    fn kmh_conversion() {
        let c = Config::parse(
            r#"{"scenario": {"relative": {"d_V": 1, "delta_v": -20, "t_BR": 0.7, "v_L": 100, "units": "kmh"}}}"#,
        )
        .unwrap();
        let s = c.relative();
        assert_eq!(s.speed_difference, -20.0 / 3.6);
        assert_abs_diff_eq!(s.speed_difference, -5.5556, epsilon = 1e-4);
        assert_abs_diff_eq!(s.leader_speed, 27.7778, epsilon = 1e-4);
    }

    #[test]
    fn absolute_config_converts() {
        let c = Config::parse(
            r#"{"env": {"g": 9.81, "mu": 0.9, "l_V": 5},
                "scenario": {"absolute": {"x_L": 50, "x_F": 2.44, "v_L": 27.7778, "v_F": 33.3334, "t_BR": 0.7}}}"#,
        )
        .unwrap();
        assert_abs_diff_eq!(c.relative().effective_distance, 42.56, epsilon = 1e-12);
    }

    #[test]
    fn errors_carry_lines() {
        let text = "{\n  \"scenario\": {\n    \"relative\": {\"d_V\": 10, \"delta_v\": 40, \"t_BR\": 0.7, \"v_L\": 20}\n  }\n}";
        match Config::parse(text) {
            Err(Error::Domain(m)) => assert!(m.starts_with("line 3 (delta_v)"), "{m}"),
            other => panic!("{other:?}"),
        }
        let text = "{\n  \"env\": {\"g\": 9.81, \"mu\": 0, \"l_V\": 5},\n  \"scenario\": {\"relative\": {\"d_V\": 1, \"delta_v\": 0, \"t_BR\": 0}}\n}";
        assert!(
            matches!(Config::parse(text), Err(Error::InvalidConstants(m)) if m.starts_with("line 2"))
        );
        match Config::parse("{\n \"scenario\": {\n \"relative\": {\"d_V\": 1, \"delta_v\": 0, \"t_BR\": 0, \"bogus\": 1}}}") {
            Err(Error::Config(m)) => assert!(m.contains("line 3"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scenario_block_needs_exactly_one_form() {
        assert!(matches!(
            Config::parse(r#"{"scenario": {}}"#),
            Err(Error::Config(_))
        ));
        let both = r#"{"scenario": {"relative": {"d_V": 1, "delta_v": 0, "t_BR": 0},
            "absolute": {"x_L": 10, "x_F": 0, "v_L": 0, "v_F": 0, "t_BR": 0}}}"#;
        assert!(matches!(Config::parse(both), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_blocks() {
        let base = r#""scenario": {"relative": {"d_V": 1, "delta_v": 0, "t_BR": 0}}"#;
        let bad = [
            format!(
                r#"{{{base}, "reaction_time": {{"t0": 0.4, "k": 0, "theta": 0.1, "seed": 1}}}}"#
            ),
            format!(r#"{{{base}, "sim": {{"dt": 0.5}}}}"#),
            format!(r#"{{{base}, "derivation": {{"accuracy": 0}}}}"#),
            format!(r#"{{{base}, "sweep": {{"ranges": {{"d_V": [5, 1]}}}}}}"#),
            format!(r#"{{{base}, "sweep": {{"ranges": {{"speed": [0, 1]}}}}}}"#),
        ];
        for text in bad {
            assert!(Config::parse(&text).is_err(), "{text}");
        }
    }
}
