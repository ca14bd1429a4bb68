//! DSS sign versus simulated collision on seeded random scenarios.

use dss_bva::reaction::ShiftedGamma;
use dss_bva::sim::{random_scenarios, verify_batch, ScenarioRanges, SimConfig, DEFAULT_DEAD_BAND};

fn main() -> dss_bva::Result<()> {
    let scenarios = random_scenarios(
        42,
        2000,
        &ShiftedGamma::default(),
        &ScenarioRanges::default(),
    )?;
    let s = verify_batch(&scenarios, &SimConfig::default(), DEFAULT_DEAD_BAND)?;
    println!(
        "{} samples, {} in dead band, {}/{} agree, max final-gap error {:.2e} m",
        s.samples, s.excluded, s.agreed, s.checked, s.max_gap_error
    );
    println!("passed: {}", s.passed());
    Ok(())
}
