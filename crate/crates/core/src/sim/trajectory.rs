//! Per-step trajectory records and their CSV form.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::scenarios::Setpoint;

use super::model::{Action, FullState};
use super::noise::Measurement;

pub const TRAJECTORY_HEADER: &str =
    "step,time_min,c_a,c_b,c_c,temp,vol,cb_meas,t_meas,v_meas,cb_sp,v_sp,t_c,f_in,reward";

/// One row per step; row 0 is the reset state with the initial action and zero reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub time_min: f64,
    pub state: FullState,
    pub measurement: Measurement,
    pub setpoint: Setpoint,
    pub action: Action,
    pub reward: f64,
}

pub fn write_trajectory_csv<W: Write>(mut w: W, rows: &[TrajectoryRow]) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for r in rows {
        let s = &r.state;
        let m = &r.measurement;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.time_min,
            s.c_a,
            s.c_b,
            s.c_c,
            s.temp,
            s.vol,
            m.c_b,
            m.temp,
            m.vol,
            r.setpoint.c_b,
            r.setpoint.vol,
            r.action.t_c,
            r.action.f_in,
            r.reward
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_row_layout() {
        let row = TrajectoryRow {
            step: 1,
            time_min: 0.5,
            state: FullState::new(0.1, 0.2, 0.3, 340.0, 100.0),
            measurement: Measurement {
                c_b: 0.21,
                temp: 341.0,
                vol: 99.5,
            },
            setpoint: Setpoint { c_b: 0.25, vol: 100.0 },
            action: Action::new(350.0, 101.0),
            reward: -0.25,
        };
        let mut out = Vec::new();
        write_trajectory_csv(&mut out, &[row]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        assert_eq!(
            lines[1],
            "1,0.5,0.1,0.2,0.3,340,100,0.21,341,99.5,0.25,100,350,101,-0.25"
        );
    }
}
