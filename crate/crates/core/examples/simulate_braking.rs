//! Emergency braking simulation for a safe and an unsafe gap.

use dss_bva::kinematics::{dss_relative, to_absolute, RelativeScenario};
use dss_bva::sim::{simulate_traced, SimConfig};

fn main() -> dss_bva::Result<()> {
    let cfg = SimConfig::default();
    for d_v in [42.5403, 42.5803] {
        let s = RelativeScenario::new(d_v, -5.5556, 0.7, 27.7778)?;
        let dss = dss_relative(&s, &cfg.env)?.dss;
        let out = simulate_traced(&to_absolute(&s, &cfg.env, 0.0)?, &cfg)?;
        println!(
            "d_V = {d_v}: DSS = {dss:+.4}, collided = {}, min gap {:.4} m at {:.3} s, final gap {:+.4}",
            out.collided, out.min_gap, out.min_gap_time, out.final_gap
        );
        if let Some(traj) = &out.trajectory {
            for p in traj.iter().step_by(100) {
                println!(
                    "  t = {:5.2}  gap = {:8.3}  v_L = {:6.3}  v_F = {:6.3}",
                    p.t, p.gap, p.v_leader, p.v_follower
                );
            }
        }
    }
    Ok(())
}
