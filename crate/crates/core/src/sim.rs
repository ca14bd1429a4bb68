//! Two-vehicle emergency-braking simulation.
//!
//! The leader brakes at the friction limit from t = 0. The follower keeps
//! its speed for the reaction time and then brakes at the same rate. Both
//! motions are piecewise constant-acceleration, so positions are evaluated
//! in closed form and the gap is an exact quadratic between events (brake
//! onset and each stop). `dt` only sets how densely the optional trajectory
//! is sampled.
//!
//! The simulator never uses the DSS formula, which makes it an independent
//! check: the gap left after both vehicles stop must equal DSS, and a
//! collision must occur exactly when DSS is negative.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bva::{classify, Criticality};
use crate::error::{Error, Result};
use crate::kinematics::{
    dss_relative, to_absolute, AbsoluteScenario, EnvConstants, RelativeScenario,
};
use crate::reaction::{ReactionTimeSampler, ShiftedGamma};
use crate::relevance::KinematicSample;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_MAX_TIME: f64 = 120.0;
pub const DEFAULT_DEAD_BAND: f64 = 0.05;
/// Allowed difference between the final gap and DSS.
pub const FINAL_GAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub max_time: f64,
    pub env: EnvConstants,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            max_time: DEFAULT_MAX_TIME,
            env: EnvConstants::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(Error::Config(format!(
                "dt must lie in (0, 0.1], got {}",
                self.dt
            )));
        }
        if !(self.max_time.is_finite() && self.max_time > 0.0) {
            return Err(Error::Config(format!(
                "max_time must be > 0, got {}",
                self.max_time
            )));
        }
        self.env.validate()
    }
}

/// Constant speed until `onset`, then constant deceleration to rest.
#[derive(Debug, Clone, Copy)]
struct BrakingMotion {
    x0: f64,
    v0: f64,
    onset: f64,
    decel: f64,
}

impl BrakingMotion {
    fn stop_time(&self) -> f64 {
        if self.v0 == 0.0 {
            0.0
        } else {
            self.onset + self.v0 / self.decel
        }
    }

    fn position(&self, t: f64) -> f64 {
        if t <= self.onset {
            return self.x0 + self.v0 * t;
        }
        let tau = (t - self.onset).min(self.v0 / self.decel);
        self.x0 + self.v0 * self.onset + self.v0 * tau - 0.5 * self.decel * tau * tau
    }

    fn speed(&self, t: f64) -> f64 {
        if t <= self.onset {
            self.v0
        } else {
            (self.v0 - self.decel * (t - self.onset)).max(0.0)
        }
    }

    /// Acceleration on the open interval containing `t`.
    fn accel_within(&self, t: f64) -> f64 {
        if self.v0 == 0.0 || t < self.onset || t >= self.stop_time() {
            0.0
        } else {
            -self.decel
        }
    }

    fn rest_position(&self) -> f64 {
        self.position(self.stop_time())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x_leader: f64,
    pub v_leader: f64,
    pub x_follower: f64,
    pub v_follower: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub collided: bool,
    /// Smallest effective distance over the run.
    pub min_gap: f64,
    pub min_gap_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision_time: Option<f64>,
    /// Time at which both vehicles are at rest, capped at `max_time`.
    pub stop_time: f64,
    /// Whether both vehicles stopped within `max_time`.
    pub completed: bool,
    /// Effective distance at `stop_time`.
    pub final_gap: f64,
    pub leader_travel: f64,
    pub follower_travel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

struct Maneuver {
    leader: BrakingMotion,
    follower: BrakingMotion,
    length: f64,
}

impl Maneuver {
    fn new(s: &AbsoluteScenario, env: &EnvConstants) -> Result<Self> {
        env.validate()?;
        for (name, v) in [("v_L", s.leader_speed), ("v_F", s.follower_speed)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(s.reaction_time.is_finite() && s.reaction_time >= 0.0) {
            return Err(Error::Domain(format!(
                "t_BR must be >= 0, got {}",
                s.reaction_time
            )));
        }
        if !(s.leader_position.is_finite() && s.follower_position.is_finite()) {
            return Err(Error::Domain("positions must be finite".into()));
        }
        let decel = env.max_braking_decel()?;
        Ok(Self {
            leader: BrakingMotion {
                x0: s.leader_position,
                v0: s.leader_speed,
                onset: 0.0,
                decel,
            },
            follower: BrakingMotion {
                x0: s.follower_position,
                v0: s.follower_speed,
                onset: s.reaction_time,
                decel,
            },
            length: env.vehicle_length,
        })
    }

    fn gap(&self, t: f64) -> f64 {
        self.leader.position(t) - self.follower.position(t) - self.length
    }

    fn rest_time(&self) -> f64 {
        self.leader.stop_time().max(self.follower.stop_time())
    }

    /// Event times in `[0, horizon]`; the gap is quadratic between them.
    fn events(&self, horizon: f64) -> Vec<f64> {
        let mut ts = vec![0.0, horizon];
        for t in [
            self.follower.onset,
            self.leader.stop_time(),
            self.follower.stop_time(),
        ] {
            if t > 0.0 && t < horizon {
                ts.push(t);
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    fn point(&self, t: f64) -> TrajectoryPoint {
        TrajectoryPoint {
            t,
            x_leader: self.leader.position(t),
            v_leader: self.leader.speed(t),
            x_follower: self.follower.position(t),
            v_follower: self.follower.speed(t),
            gap: self.gap(t),
        }
    }
}

/// Smallest `tau` in `[0, len]` with `g0 + v tau + a tau^2 / 2 < 0`
/// immediately after it, given `g0 >= 0`.
fn first_crossing(g0: f64, v: f64, a: f64, len: f64) -> Option<f64> {
    let half_a = 0.5 * a;
    let roots: Vec<f64> = if half_a == 0.0 {
        if v < 0.0 {
            vec![-g0 / v]
        } else {
            vec![]
        }
    } else {
        let disc = v * v - 4.0 * half_a * g0;
        if disc < 0.0 {
            vec![]
        } else {
            let q = -0.5 * (v + v.signum() * disc.sqrt());
            let mut r = Vec::new();
            if q != 0.0 {
                r.push(q / half_a);
                r.push(g0 / q);
            } else {
                r.push(0.0);
            }
            r
        }
    };
    let mut roots: Vec<f64> = roots
        .into_iter()
        .filter(|&r| (0.0..=len).contains(&r))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.into_iter().find(|&r| {
        // derivative at the root must point downwards
        v + a * r < 0.0 || (v + a * r == 0.0 && a < 0.0)
    })
}

pub fn simulate(s: &AbsoluteScenario, cfg: &SimConfig) -> Result<SimOutcome> {
    run(s, cfg, false)
}

/// As [`simulate`], also sampling the trajectory every `dt`.
pub fn simulate_traced(s: &AbsoluteScenario, cfg: &SimConfig) -> Result<SimOutcome> {
    run(s, cfg, true)
}

fn run(s: &AbsoluteScenario, cfg: &SimConfig, trace: bool) -> Result<SimOutcome> {
    cfg.validate()?;
    let m = Maneuver::new(s, &cfg.env)?;
    let rest = m.rest_time();
    let completed = rest <= cfg.max_time;
    let horizon = rest.min(cfg.max_time);

    let events = m.events(horizon);
    let mut min_gap = m.gap(0.0);
    let mut min_gap_time = 0.0;
    let mut collision_time = (min_gap < 0.0).then_some(0.0);

    for w in events.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let len = tb - ta;
        let mid = 0.5 * (ta + tb);
        let g0 = m.gap(ta);
        let rel_v = m.leader.speed(ta) - m.follower.speed(ta);
        let rel_a = m.leader.accel_within(mid) - m.follower.accel_within(mid);

        let mut candidates = vec![(tb, m.gap(tb))];
        if rel_a > 0.0 {
            let tau = -rel_v / rel_a;
            if tau > 0.0 && tau < len {
                let g = g0 + rel_v * tau + 0.5 * rel_a * tau * tau;
                candidates.push((ta + tau, g));
            }
        }
        for (t, g) in candidates {
            if g < min_gap {
                min_gap = g;
                min_gap_time = t;
            }
        }
        if collision_time.is_none() && g0 >= 0.0 {
            if let Some(tau) = first_crossing(g0, rel_v, rel_a, len) {
                collision_time = Some(ta + tau);
            }
        }
    }
    let collided = min_gap < 0.0;
    if !collided {
        collision_time = None;
    } else if collision_time.is_none() {
        collision_time = Some(min_gap_time);
    }

    let trajectory = trace.then(|| {
        let steps = (horizon / cfg.dt).floor() as usize;
        let mut pts: Vec<TrajectoryPoint> =
            (0..=steps).map(|k| m.point(k as f64 * cfg.dt)).collect();
        if pts.last().is_none_or(|p| p.t < horizon) {
            pts.push(m.point(horizon));
        }
        pts
    });

    Ok(SimOutcome {
        collided,
        min_gap,
        min_gap_time,
        collision_time,
        stop_time: horizon,
        completed,
        final_gap: m.gap(horizon),
        leader_travel: m.leader.rest_position() - m.leader.x0,
        follower_travel: m.follower.rest_position() - m.follower.x0,
        trajectory,
    })
}

/// Kinematic states at the ends of every phase of the maneuver, each
/// tagged with the accelerations in effect during that phase.
pub fn maneuver_states(s: &AbsoluteScenario, env: &EnvConstants) -> Result<Vec<KinematicSample>> {
    let m = Maneuver::new(s, env)?;
    let events = m.events(m.rest_time());
    let mut out = Vec::new();
    for w in events.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let a_leader = m.leader.accel_within(mid);
        let a_follower = m.follower.accel_within(mid);
        for t in [w[0], w[1]] {
            out.push(KinematicSample {
                v_leader: m.leader.speed(t),
                v_follower: m.follower.speed(t),
                a_leader,
                a_follower,
            });
        }
    }
    if out.is_empty() {
        out.push(KinematicSample {
            v_leader: s.leader_speed,
            v_follower: s.follower_speed,
            a_leader: 0.0,
            a_follower: 0.0,
        });
    }
    Ok(out)
}

/// Writes `t,x_L,v_L,x_F,v_F,gap` rows at full precision.
pub fn write_trajectory_csv<W: Write>(points: &[TrajectoryPoint], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("cannot write trajectory: {e}"));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["t", "x_L", "v_L", "x_F", "v_F", "gap"])
        .map_err(io)?;
    for p in points {
        w.write_record(
            [
                p.t,
                p.x_leader,
                p.v_leader,
                p.x_follower,
                p.v_follower,
                p.gap,
            ]
            .map(|x| x.to_string()),
        )
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("cannot write trajectory: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub scenario: RelativeScenario,
    pub dss: f64,
    pub predicted: Criticality,
    pub collided: bool,
    /// `|DSS| <= dead_band`; such records do not count towards agreement.
    pub excluded: bool,
    pub agree: bool,
    pub final_gap: f64,
    /// `|final_gap - DSS|` when no collision occurred and both vehicles
    /// came to rest.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_error: Option<f64>,
}

impl OracleRecord {
    pub fn gap_ok(&self) -> bool {
        self.gap_error.is_none_or(|e| e <= FINAL_GAP_TOL)
    }
}

/// Compares the sign of DSS with the simulated collision outcome.
pub fn oracle_check(s: &RelativeScenario, cfg: &SimConfig, dead_band: f64) -> Result<OracleRecord> {
    if !(dead_band >= 0.0) {
        return Err(Error::Config(format!(
            "dead band must be >= 0, got {dead_band}"
        )));
    }
    let dss = dss_relative(s, &cfg.env)?.dss;
    let predicted = classify(dss)?;
    let outcome = simulate(&to_absolute(s, &cfg.env, 0.0)?, cfg)?;
    let gap_error =
        (!outcome.collided && outcome.completed).then(|| (outcome.final_gap - dss).abs());
    Ok(OracleRecord {
        scenario: *s,
        dss,
        predicted,
        collided: outcome.collided,
        excluded: dss.abs() <= dead_band,
        agree: (predicted == Criticality::SafetyCritical) == outcome.collided,
        final_gap: outcome.final_gap,
        gap_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub samples: usize,
    pub excluded: usize,
    pub checked: usize,
    pub agreed: usize,
    /// `agreed / checked`, 1 when nothing was checked.
    pub fraction: f64,
    pub gap_checked: usize,
    pub gap_failures: usize,
    pub max_gap_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<OracleRecord>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.agreed == self.checked && self.gap_failures == 0
    }
}

pub fn verify_batch(
    scenarios: &[RelativeScenario],
    cfg: &SimConfig,
    dead_band: f64,
) -> Result<VerifySummary> {
    let mut summary = VerifySummary {
        samples: scenarios.len(),
        excluded: 0,
        checked: 0,
        agreed: 0,
        fraction: 1.0,
        gap_checked: 0,
        gap_failures: 0,
        max_gap_error: 0.0,
        counterexample: None,
    };
    for s in scenarios {
        let r = oracle_check(s, cfg, dead_band)?;
        if r.excluded {
            summary.excluded += 1;
            continue;
        }
        summary.checked += 1;
        if let Some(e) = r.gap_error {
            summary.gap_checked += 1;
            summary.max_gap_error = summary.max_gap_error.max(e);
            if !r.gap_ok() {
                summary.gap_failures += 1;
            }
        }
        if r.agree {
            summary.agreed += 1;
        }
        if (!r.agree || !r.gap_ok()) && summary.counterexample.is_none() {
            summary.counterexample = Some(r);
        }
    }
    if summary.checked > 0 {
        summary.fraction = summary.agreed as f64 / summary.checked as f64;
    }
    Ok(summary)
}

/// Ranges for randomly generated car-following scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioRanges {
    /// Leader speed range in m/s.
    pub leader_speed: [f64; 2],
    /// Follower excess speed `v_F - v_L` in m/s.
    pub closing_speed: [f64; 2],
    pub effective_distance: [f64; 2],
}

impl Default for ScenarioRanges {
    fn default() -> Self {
        Self {
            leader_speed: [0.0, 40.0],
            closing_speed: [0.0, 15.0],
            effective_distance: [0.0, 120.0],
        }
    }
}

/// Seeded random scenarios with a follower at least as fast as the leader
/// and reaction times drawn from `reaction`.
pub fn random_scenarios(
    seed: u64,
    n: usize,
    reaction: &ShiftedGamma,
    ranges: &ScenarioRanges,
) -> Result<Vec<RelativeScenario>> {
    for (name, [lo, hi]) in [
        ("leader_speed", ranges.leader_speed),
        ("closing_speed", ranges.closing_speed),
        ("effective_distance", ranges.effective_distance),
    ] {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(Error::Config(format!(
                "range {name} = [{lo}, {hi}] is invalid"
            )));
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut times = ReactionTimeSampler::new(*reaction, seed.wrapping_add(0x9e37_79b9_7f4a_7c15))?;
    let uniform = |rng: &mut ChaCha20Rng, [lo, hi]: [f64; 2]| lo + (hi - lo) * rng.random::<f64>();
    Ok((0..n)
        .map(|_| {
            let leader_speed = uniform(&mut rng, ranges.leader_speed);
            let closing = uniform(&mut rng, ranges.closing_speed);
            RelativeScenario {
                effective_distance: uniform(&mut rng, ranges.effective_distance),
                speed_difference: -closing,
                reaction_time: times.next_time(),
                leader_speed,
            }
        })
        .collect())
}
