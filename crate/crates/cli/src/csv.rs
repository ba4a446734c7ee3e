//! Trajectory export: `step,agent,dim0,...,residual,mode`, one row per agent
//! per recorded step, ordered by (step, agent), numbers with 12 significant
//! digits. Output bytes are a pure function of the trajectory.

use crate::error::CliError;
use crate::io::write_atomic;
use proxnet_core::Trajectory;
use std::path::Path;

/// 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn render_csv(trajectory: &Trajectory) -> Result<String, CliError> {
    let Some(first) = trajectory.states.first() else {
        return Err(CliError::EmptyTrajectory);
    };
    let dim = first.block_dim();
    let agents = first.block_count();

    let mut out = String::from("step,agent");
    for d in 0..dim {
        out.push_str(&format!(",dim{d}"));
    }
    out.push_str(",residual,mode\n");

    let last_transition = trajectory.residuals.len().saturating_sub(1);
    for (step, state) in trajectory.states.iter().enumerate() {
        // the residual/mode of the transition leaving this state; the final
        // state repeats the last recorded transition
        let (residual, mode) = if trajectory.residuals.is_empty() {
            (0.0, 1)
        } else {
            let k = step.min(last_transition);
            (trajectory.residuals[k], trajectory.modes[k])
        };
        for agent in 0..agents {
            out.push_str(&format!("{step},{agent}"));
            for v in state.block(agent) {
                out.push(',');
                out.push_str(&fmt_sig(*v));
            }
            out.push(',');
            out.push_str(&fmt_sig(residual));
            out.push_str(&format!(",{mode}\n"));
        }
    }
    Ok(out)
}

pub fn export_csv(trajectory: &Trajectory, path: &Path) -> Result<(), CliError> {
    let body = render_csv(trajectory)?;
    write_atomic(path, body.as_bytes())
}
