//! DSS over a two-parameter grid, with safety-relevance coverage of the
//! braking maneuvers it contains.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bva::{classify_with_threshold, Axis, Criticality};
use crate::error::{Error, Result};
use crate::kinematics::{dss_relative, to_absolute, EnvConstants, RelativeScenario};
use crate::relevance::{coverage_report, CoverageReport, DEFAULT_ZERO_TOL};
use crate::sim::maneuver_states;

/// Axes that can be swept on a relative scenario.
pub const SWEEP_AXES: [Axis; 4] = [
    Axis::EffectiveDistance,
    Axis::SpeedDifference,
    Axis::ReactionTime,
    Axis::LeaderSpeed,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridAxis {
    /// Evenly spaced values; a single point sits at `nominal`.
    pub fn values(&self, nominal: f64) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![nominal],
            n => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

pub fn get_axis(s: &RelativeScenario, axis: Axis) -> Result<f64> {
    Ok(match axis {
        Axis::EffectiveDistance => s.effective_distance,
        Axis::SpeedDifference => s.speed_difference,
        Axis::ReactionTime => s.reaction_time,
        Axis::LeaderSpeed => s.leader_speed,
        other => return Err(Error::Config(format!("axis {other} cannot be swept"))),
    })
}

fn set_axis(s: &RelativeScenario, axis: Axis, value: f64) -> Result<RelativeScenario> {
    let mut out = *s;
    match axis {
        Axis::EffectiveDistance => out.effective_distance = value,
        Axis::SpeedDifference => out.speed_difference = value,
        Axis::ReactionTime => out.reaction_time = value,
        Axis::LeaderSpeed => out.leader_speed = value,
        other => return Err(Error::Config(format!("axis {other} cannot be swept"))),
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub params: RelativeScenario,
    pub dss: f64,
    pub criticality: Criticality,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub x_axis: GridAxis,
    pub y_axis: GridAxis,
    /// Row-major: `x` varies slowest.
    pub points: Vec<SweepPoint>,
    pub coverage: CoverageReport,
}

pub fn sweep_grid(
    nominal: &RelativeScenario,
    env: &EnvConstants,
    x: GridAxis,
    y: GridAxis,
    threshold: f64,
) -> Result<SweepResult> {
    if x.axis == y.axis {
        return Err(Error::Config(format!(
            "sweep axes must differ, got {} twice",
            x.axis
        )));
    }
    for g in [&x, &y] {
        get_axis(nominal, g.axis)?;
        if g.points == 0 {
            return Err(Error::Config(format!(
                "grid for {} needs at least one point",
                g.axis
            )));
        }
        if !(g.lo.is_finite() && g.hi.is_finite() && g.lo <= g.hi) {
            return Err(Error::Config(format!(
                "range for {} is invalid: [{}, {}]",
                g.axis, g.lo, g.hi
            )));
        }
    }

    let xs = x.values(get_axis(nominal, x.axis)?);
    let ys = y.values(get_axis(nominal, y.axis)?);
    let mut points = Vec::with_capacity(xs.len() * ys.len());
    let mut states = Vec::new();
    for (i, &xv) in xs.iter().enumerate() {
        for (j, &yv) in ys.iter().enumerate() {
            let params = set_axis(&set_axis(nominal, x.axis, xv)?, y.axis, yv)?;
            let dss = dss_relative(&params, env)?.dss;
            states.extend(maneuver_states(&to_absolute(&params, env, 0.0)?, env)?);
            points.push(SweepPoint {
                i,
                j,
                x: xv,
                y: yv,
                params,
                dss,
                criticality: classify_with_threshold(dss, threshold)?,
            });
        }
    }
    Ok(SweepResult {
        x_axis: x,
        y_axis: y,
        points,
        coverage: coverage_report(&states, DEFAULT_ZERO_TOL),
    })
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Config(format!("cannot write CSV: {e}"));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record([
            "i",
            "j",
            self.x_axis.axis.symbol(),
            self.y_axis.axis.symbol(),
            "DSS",
            "criticality",
        ])
        .map_err(io)?;
        for p in &self.points {
            w.write_record([
                p.i.to_string(),
                p.j.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                p.dss.to_string(),
                p.criticality.label().to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Config(format!("cannot write CSV: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal() -> RelativeScenario {
        RelativeScenario::new(42.56, -5.5556, 0.7, 27.7778).unwrap()
    }

    fn grid(axis: Axis, lo: f64, hi: f64, points: usize) -> GridAxis {
        GridAxis {
            axis,
            lo,
            hi,
            points,
        }
    }

    #[test]
    fn three_by_three_is_monotone() {
        let env = EnvConstants::default();
        let r = sweep_grid(
            &nominal(),
            &env,
            grid(Axis::EffectiveDistance, 40.0, 45.0, 3),
            grid(Axis::SpeedDifference, -6.0, -5.0, 3),
            0.0,
        )
        .unwrap();
        assert_eq!(r.points.len(), 9);
        let at = |i: usize, j: usize| r.points[i * 3 + j].dss;
        for k in 0..3 {
            assert!(at(0, k) < at(1, k) && at(1, k) < at(2, k));
            assert!(at(k, 0) < at(k, 1) && at(k, 1) < at(k, 2));
        }
    }

    #[test]
    fn single_point_equals_nominal() {
        let env = EnvConstants::default();
        let r = sweep_grid(
            &nominal(),
            &env,
            grid(Axis::EffectiveDistance, 0.0, 100.0, 1),
            grid(Axis::ReactionTime, 0.0, 2.0, 1),
            0.0,
        )
        .unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.points[0].dss, dss_relative(&nominal(), &env).unwrap().dss);
    }

    #[test]
    fn leader_speed_sweep_covers_all_combinations() {
        let env = EnvConstants::default();
        let r = sweep_grid(
            &nominal(),
            &env,
            grid(Axis::LeaderSpeed, 2.0, 30.0, 3),
            grid(Axis::EffectiveDistance, 10.0, 50.0, 2),
            0.0,
        )
        .unwrap();
        assert_eq!((r.coverage.covered, r.coverage.total), (4, 4));
    }

    #[test]
    fn rejects_bad_axes() {
        let env = EnvConstants::default();
        let same = grid(Axis::ReactionTime, 0.0, 1.0, 2);
        assert!(sweep_grid(&nominal(), &env, same, same, 0.0).is_err());
        let foreign = grid(Axis::LeaderPosition, 0.0, 1.0, 2);
        assert!(sweep_grid(&nominal(), &env, foreign, same, 0.0).is_err());
        // pushes v_F below zero
        let too_far = grid(Axis::SpeedDifference, 0.0, 40.0, 3);
        assert!(matches!(
            sweep_grid(&nominal(), &env, too_far, same, 0.0),
            Err(Error::Domain(_))
        ));
    }
}
