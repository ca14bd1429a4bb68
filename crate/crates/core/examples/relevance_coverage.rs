//! Safety-relevance matrices and the coverage of a few braking maneuvers.

use dss_bva::kinematics::{to_absolute, EnvConstants, RelativeScenario};
use dss_bva::relevance::{coverage_report, RelevanceMatrix, Sign, DEFAULT_ZERO_TOL};
use dss_bva::sim::maneuver_states;

fn print_matrix(m: &RelevanceMatrix) {
    println!(
        "{:?} (rows: follower -, 0, +; columns: leader -, 0, +)",
        m.kind
    );
    for (row, sign) in m.cells.iter().zip(["-", "0", "+"]) {
        println!("  {sign}  {:?}", row);
    }
    println!("  row sums {:?}, total {}", m.row_sums(), m.total());
}

fn main() -> dss_bva::Result<()> {
    print_matrix(&RelevanceMatrix::SPEED);
    print_matrix(&RelevanceMatrix::ACCELERATION);
    println!(
        "speed cell (v_F > 0, v_L = 0): {}",
        RelevanceMatrix::SPEED.cell(Sign::Positive, Sign::Zero)
    );

    let env = EnvConstants::default();
    let mut states = Vec::new();
    for v_l in [27.7778, 5.0] {
        let s = RelativeScenario::new(20.0, -5.5556, 0.7, v_l)?;
        states.extend(maneuver_states(&to_absolute(&s, &env, 0.0)?, &env)?);
    }
    let report = coverage_report(&states, DEFAULT_ZERO_TOL);
    println!(
        "\n{} maneuver states cover {}/{} combinations",
        report.samples, report.covered, report.total
    );
    for c in &report.combinations {
        println!("  {:<36} {}", c.label, c.hits);
    }
    Ok(())
}
