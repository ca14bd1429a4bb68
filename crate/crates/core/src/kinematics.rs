//! Kinematic quantities of the two-vehicle car-following scenario and the
//! Difference Space Stopping (DSS) indicator.
//!
//! DSS is the space distance `a` (effective gap plus the leader's braking
//! distance) minus the stop distance `b` (the follower's reaction travel
//! plus its braking distance). Both vehicles brake at the friction limit
//! `g * mu`, so DSS is the gap that remains once both have come to rest.
//! A negative value means the follower cannot stop in time.
//!
//! Two parameterisations are supported. The absolute form works on
//! positions and speeds of both vehicles; the relative form works on the
//! effective distance, the speed difference `v_L - v_F` and the reaction
//! time, with the leader speed kept as context for the quadratic terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit accepted for the tyre/road friction coefficient.
pub const MAX_FRICTION: f64 = 1.5;

/// Leader speed used when a relative scenario does not state one (100 km/h).
pub const NOMINAL_LEADER_SPEED: f64 = 27.7778;

/// Environment constants shared by both vehicles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConstants {
    /// Gravitational acceleration in m/s².
    pub g: f64,
    /// Friction coefficient.
    pub mu: f64,
    /// Vehicle length in m.
    #[serde(rename = "l_V")]
    pub vehicle_length: f64,
}

impl Default for EnvConstants {
    fn default() -> Self {
        Self {
            g: 9.81,
            mu: 0.9,
            vehicle_length: 5.0,
        }
    }
}

impl EnvConstants {
    pub fn new(g: f64, mu: f64, vehicle_length: f64) -> Result<Self> {
        let env = Self {
            g,
            mu,
            vehicle_length,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::InvalidConstants(format!(
                "g must be > 0, got {}",
                self.g
            )));
        }
        if !(self.mu.is_finite() && self.mu > 0.0 && self.mu <= MAX_FRICTION) {
            return Err(Error::InvalidConstants(format!(
                "mu must lie in (0, {MAX_FRICTION}], got {}",
                self.mu
            )));
        }
        if !(self.vehicle_length.is_finite() && self.vehicle_length >= 0.0) {
            return Err(Error::InvalidConstants(format!(
                "l_V must be >= 0, got {}",
                self.vehicle_length
            )));
        }
        Ok(())
    }

    pub fn max_braking_decel(&self) -> Result<f64> {
        max_braking_decel(self)
    }
}

/// Friction-limited braking deceleration `g * mu` in m/s².
pub fn max_braking_decel(env: &EnvConstants) -> Result<f64> {
    env.validate()?;
    Ok(env.g * env.mu)
}

/// Bumper-to-bumper gap `x_L - x_F - l_V`. Negative values mean overlap.
pub fn effective_distance(x_leader: f64, x_follower: f64, vehicle_length: f64) -> f64 {
    x_leader - x_follower - vehicle_length
}

/// Distance needed to stop from speed `v` at constant deceleration `a_max`.
pub fn braking_distance(v: f64, a_max: f64) -> Result<f64> {
    if !(a_max.is_finite() && a_max > 0.0) {
        return Err(Error::Domain(format!(
            "deceleration must be > 0, got {a_max}"
        )));
    }
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::Domain(format!("speed must be >= 0, got {v}")));
    }
    Ok(v * v / (2.0 * a_max))
}

/// Scenario given by absolute positions and speeds of both vehicles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsoluteScenario {
    #[serde(rename = "x_L")]
    pub leader_position: f64,
    #[serde(rename = "x_F")]
    pub follower_position: f64,
    #[serde(rename = "v_L")]
    pub leader_speed: f64,
    #[serde(rename = "v_F")]
    pub follower_speed: f64,
    #[serde(rename = "t_BR")]
    pub reaction_time: f64,
}

impl AbsoluteScenario {
    /// Builds a scenario that is physically valid under `env`: the vehicles
    /// do not overlap, both speeds are non-negative and the reaction time is
    /// non-negative.
    pub fn new(
        leader_position: f64,
        follower_position: f64,
        leader_speed: f64,
        follower_speed: f64,
        reaction_time: f64,
        env: &EnvConstants,
    ) -> Result<Self> {
        let s = Self {
            leader_position,
            follower_position,
            leader_speed,
            follower_speed,
            reaction_time,
        };
        s.validate(env)?;
        if s.effective_distance(env) < 0.0 {
            return Err(Error::InvalidScenario(format!(
                "vehicles overlap: x_L - x_F - l_V = {}",
                s.effective_distance(env)
            )));
        }
        Ok(s)
    }

    pub fn effective_distance(&self, env: &EnvConstants) -> f64 {
        effective_distance(
            self.leader_position,
            self.follower_position,
            env.vehicle_length,
        )
    }

    /// Checks what DSS evaluation needs. Overlap is allowed here.
    fn validate(&self, env: &EnvConstants) -> Result<()> {
        env.validate()?;
        check_finite("x_L", self.leader_position)?;
        check_finite("x_F", self.follower_position)?;
        check_speed("v_L", self.leader_speed)?;
        check_speed("v_F", self.follower_speed)?;
        check_reaction_time(self.reaction_time)
    }
}

/// Scenario in the relative parameterisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeScenario {
    #[serde(rename = "d_V")]
    pub effective_distance: f64,
    /// `v_L - v_F` in m/s.
    #[serde(rename = "delta_v")]
    pub speed_difference: f64,
    #[serde(rename = "t_BR")]
    pub reaction_time: f64,
    #[serde(rename = "v_L")]
    pub leader_speed: f64,
}

impl RelativeScenario {
    pub fn new(
        effective_distance: f64,
        speed_difference: f64,
        reaction_time: f64,
        leader_speed: f64,
    ) -> Result<Self> {
        let s = Self {
            effective_distance,
            speed_difference,
            reaction_time,
            leader_speed,
        };
        s.validate()?;
        if effective_distance < 0.0 {
            return Err(Error::InvalidScenario(format!(
                "d_V must be >= 0, got {effective_distance}"
            )));
        }
        Ok(s)
    }

    pub fn follower_speed(&self) -> f64 {
        self.leader_speed - self.speed_difference
    }

    fn validate(&self) -> Result<()> {
        check_finite("d_V", self.effective_distance)?;
        check_finite("delta_v", self.speed_difference)?;
        check_reaction_time(self.reaction_time)?;
        check_speed("v_L", self.leader_speed)?;
        let v_f = self.follower_speed();
        if !(v_f >= 0.0) {
            return Err(Error::Domain(format!(
                "implied follower speed v_L - delta_v = {v_f} is negative"
            )));
        }
        Ok(())
    }
}

/// Components of one DSS evaluation, all in m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DssBreakdown {
    #[serde(rename = "a")]
    pub space_distance: f64,
    #[serde(rename = "b")]
    pub stop_distance: f64,
    #[serde(rename = "x_B_L")]
    pub leader_braking: f64,
    #[serde(rename = "x_R_F")]
    pub follower_reaction: f64,
    #[serde(rename = "x_B_F")]
    pub follower_braking: f64,
    pub dss: f64,
}

fn breakdown(
    gap: f64,
    leader_speed: f64,
    follower_speed: f64,
    reaction_time: f64,
    a_max: f64,
) -> Result<DssBreakdown> {
    let leader_braking = braking_distance(leader_speed, a_max)?;
    let follower_braking = braking_distance(follower_speed, a_max)?;
    let follower_reaction = follower_speed * reaction_time;
    let space_distance = gap + leader_braking;
    let stop_distance = follower_reaction + follower_braking;
    Ok(DssBreakdown {
        space_distance,
        stop_distance,
        leader_braking,
        follower_reaction,
        follower_braking,
        dss: space_distance - stop_distance,
    })
}

pub fn dss_absolute(s: &AbsoluteScenario, env: &EnvConstants) -> Result<DssBreakdown> {
    s.validate(env)?;
    breakdown(
        s.effective_distance(env),
        s.leader_speed,
        s.follower_speed,
        s.reaction_time,
        env.max_braking_decel()?,
    )
}

pub fn dss_relative(s: &RelativeScenario, env: &EnvConstants) -> Result<DssBreakdown> {
    s.validate()?;
    breakdown(
        s.effective_distance,
        s.leader_speed,
        s.follower_speed(),
        s.reaction_time,
        env.max_braking_decel()?,
    )
}

pub fn to_relative(s: &AbsoluteScenario, env: &EnvConstants) -> RelativeScenario {
    RelativeScenario {
        effective_distance: s.effective_distance(env),
        speed_difference: s.leader_speed - s.follower_speed,
        reaction_time: s.reaction_time,
        leader_speed: s.leader_speed,
    }
}

/// Places the follower at `follower_anchor` and reconstructs absolute
/// positions and speeds.
pub fn to_absolute(
    s: &RelativeScenario,
    env: &EnvConstants,
    follower_anchor: f64,
) -> Result<AbsoluteScenario> {
    let follower_speed = s.follower_speed();
    if !(follower_speed >= 0.0) {
        return Err(Error::Domain(format!(
            "implied follower speed v_L - delta_v = {follower_speed} is negative"
        )));
    }
    Ok(AbsoluteScenario {
        leader_position: follower_anchor + s.effective_distance + env.vehicle_length,
        follower_position: follower_anchor,
        leader_speed: s.leader_speed,
        follower_speed,
        reaction_time: s.reaction_time,
    })
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

fn check_speed(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if v < 0.0 {
        return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
    }
    Ok(())
}

fn check_reaction_time(t: f64) -> Result<()> {
    check_finite("t_BR", t)?;
    if t < 0.0 {
        return Err(Error::Domain(format!("t_BR must be >= 0, got {t}")));
    }
    Ok(())
}
