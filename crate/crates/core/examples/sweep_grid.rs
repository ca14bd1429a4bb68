//! DSS over a d_V x delta_v grid, written as CSV.

use dss_bva::bva::Axis;
use dss_bva::kinematics::{EnvConstants, RelativeScenario};
use dss_bva::sweep::{sweep_grid, GridAxis};

fn main() -> dss_bva::Result<()> {
    let nominal = RelativeScenario::new(42.56, -5.5556, 0.7, 27.7778)?;
    let r = sweep_grid(
        &nominal,
        &EnvConstants::default(),
        GridAxis {
            axis: Axis::EffectiveDistance,
            lo: 30.0,
            hi: 55.0,
            points: 6,
        },
        GridAxis {
            axis: Axis::SpeedDifference,
            lo: -8.0,
            hi: -3.0,
            points: 3,
        },
        0.0,
    )?;
    r.write_csv(std::io::stdout())?;
    let sc = r.points.iter().filter(|p| p.dss < 0.0).count();
    eprintln!(
        "{sc}/{} points safety-critical, coverage {}/{}",
        r.points.len(),
        r.coverage.covered,
        r.coverage.total
    );
    Ok(())
}
