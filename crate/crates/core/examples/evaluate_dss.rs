//! DSS for the nominal highway scenario, in both parameterisations.

use dss_bva::bva::classify;
use dss_bva::kinematics::{
    dss_absolute, dss_relative, to_absolute, EnvConstants, RelativeScenario,
};

fn main() -> dss_bva::Result<()> {
    let env = EnvConstants::default();
    // 100 km/h leader, follower 20 km/h faster
    let s = RelativeScenario::new(42.56, -5.5556, 0.7, 27.7778)?;
    let b = dss_relative(&s, &env)?;

    println!("a_B,max = {:.4} m/s^2", env.max_braking_decel()?);
    println!(
        "x_B,L = {:.4}  x_R,F = {:.4}  x_B,F = {:.4}",
        b.leader_braking, b.follower_reaction, b.follower_braking
    );
    println!(
        "a = {:.4}  b = {:.4}  DSS = {:.4}  -> {}",
        b.space_distance,
        b.stop_distance,
        b.dss,
        classify(b.dss)?
    );

    let abs = to_absolute(&s, &env, 0.0)?;
    let b2 = dss_absolute(&abs, &env)?;
    println!(
        "absolute form: x_L = {:.4}, x_F = {:.4}, DSS = {:.4}",
        abs.leader_position, abs.follower_position, b2.dss
    );

    for d_v in [30.0, 42.56, 60.0] {
        let s = RelativeScenario {
            effective_distance: d_v,
            ..s
        };
        let dss = dss_relative(&s, &env)?.dss;
        println!(
            "d_V = {d_v:>6.2} m: DSS = {dss:>8.4} m ({})",
            classify(dss)?
        );
    }
    Ok(())
}
