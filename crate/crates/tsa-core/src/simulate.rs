//! Fixed-step RK4 integration of the absolute-frame swing equations
//! through the fault sequence.

use crate::error::Error;
use crate::model::{accelerating_power, prefault_equilibrium, Stage, SystemCase};
use crate::Result;

/// Dense, immutable record of one simulation run.
///
/// `t = 0` is fault inception; the integration grid is split so that a
/// sample lands exactly on the clearing time. Speeds are deviations from
/// synchronous (rad/s); `acc_powers[k][i]` is `f_abs,i = Pm_i − Pe_i`
/// evaluated on the stage in effect on `[t_k, t_{k+1})` — fault-on before
/// `clear_index`, postfault from it on.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `angles[k][i]`: absolute rotor angle of machine `i` at sample `k`, rad.
    pub angles: Vec<Vec<f64>>,
    /// `speeds[k][i]`: speed deviation, rad/s.
    pub speeds: Vec<Vec<f64>>,
    /// `acc_powers[k][i]`: absolute accelerating power, p.u.
    pub acc_powers: Vec<Vec<f64>>,
    /// Sample index at which the fault clears; `times[clear_index]` equals
    /// the case's clearing time exactly.
    pub clear_index: usize,
    /// Name of the generating case.
    pub case_ref: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn machine_count(&self) -> usize {
        self.angles.first().map_or(0, |a| a.len())
    }

    pub fn clear_time(&self) -> f64 {
        self.times[self.clear_index]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Per-machine column of the angle record.
    pub fn angle_of(&self, i: usize) -> Vec<f64> {
        self.angles.iter().map(|row| row[i]).collect()
    }

    /// Trajectory CSV: `t,delta_<id>...,omega_<id>...,f_<id>...`,
    /// 9 significant digits.
    pub fn to_csv(&self, ids: &[String]) -> String {
        let mut out = String::from("t");
        for id in ids {
            out.push_str(&format!(",delta_{id}"));
        }
        for id in ids {
            out.push_str(&format!(",omega_{id}"));
        }
        for id in ids {
            out.push_str(&format!(",f_{id}"));
        }
        out.push('\n');
        for k in 0..self.len() {
            out.push_str(&format!("{:.8e}", self.times[k]));
            for v in &self.angles[k] {
                out.push_str(&format!(",{v:.8e}"));
            }
            for v in &self.speeds[k] {
                out.push_str(&format!(",{v:.8e}"));
            }
            for v in &self.acc_powers[k] {
                out.push_str(&format!(",{v:.8e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Integrates the case from fault inception to `t_end`.
///
/// Classical RK4 with a fixed step near `dt`: each of the two segments
/// `[0, clear]` and `[clear, t_end]` uses the largest uniform step `≤ dt`
/// that lands exactly on the segment end, so the stage switch is never
/// smeared across a step. The initial state is the prefault equilibrium at
/// zero speed. Deterministic: identical inputs give bit-identical output.
pub fn simulate(case: &SystemCase, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(Error::Invalid(format!("dt must be in (0, 0.01], got {dt}")));
    }
    let clear = case.fault.clear_time;
    if !(t_end > clear) {
        return Err(Error::Invalid(format!(
            "t_end {t_end} must exceed clear_time {clear}"
        )));
    }
    let n = case.machine_count();
    let delta0 = prefault_equilibrium(case)?;
    let m = case.inertias();
    let d = case.machines.iter().map(|x| x.damping).collect::<Vec<_>>();

    let deriv = |stage: Stage, angles: &[f64], speeds: &[f64], out_a: &mut [f64], out_s: &mut [f64]| {
        let f = accelerating_power(case.stage(stage), case, angles);
        for i in 0..n {
            out_a[i] = speeds[i];
            out_s[i] = (f[i] - d[i] * speeds[i]) / m[i];
        }
    };

    let mut times = Vec::new();
    let mut angles_rec = Vec::new();
    let mut speeds_rec = Vec::new();
    let mut angles = delta0;
    let mut speeds = vec![0.0; n];
    times.push(0.0);
    angles_rec.push(angles.clone());
    speeds_rec.push(speeds.clone());

    let mut k1a = vec![0.0; n];
    let mut k1s = vec![0.0; n];
    let mut k2a = vec![0.0; n];
    let mut k2s = vec![0.0; n];
    let mut k3a = vec![0.0; n];
    let mut k3s = vec![0.0; n];
    let mut k4a = vec![0.0; n];
    let mut k4s = vec![0.0; n];
    let mut ta = vec![0.0; n];
    let mut ts = vec![0.0; n];

    let mut run_segment = |stage: Stage,
                           t0: f64,
                           t1: f64,
                           angles: &mut Vec<f64>,
                           speeds: &mut Vec<f64>,
                           times: &mut Vec<f64>,
                           angles_rec: &mut Vec<Vec<f64>>,
                           speeds_rec: &mut Vec<Vec<f64>>|
     -> Result<()> {
        let span = t1 - t0;
        let nsteps = (span / dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / nsteps as f64;
        for step in 0..nsteps {
            deriv(stage, angles, speeds, &mut k1a, &mut k1s);
            for i in 0..n {
                ta[i] = angles[i] + 0.5 * h * k1a[i];
                ts[i] = speeds[i] + 0.5 * h * k1s[i];
            }
            deriv(stage, &ta, &ts, &mut k2a, &mut k2s);
            for i in 0..n {
                ta[i] = angles[i] + 0.5 * h * k2a[i];
                ts[i] = speeds[i] + 0.5 * h * k2s[i];
            }
            deriv(stage, &ta, &ts, &mut k3a, &mut k3s);
            for i in 0..n {
                ta[i] = angles[i] + h * k3a[i];
                ts[i] = speeds[i] + h * k3s[i];
            }
            deriv(stage, &ta, &ts, &mut k4a, &mut k4s);
            for i in 0..n {
                angles[i] += h / 6.0 * (k1a[i] + 2.0 * k2a[i] + 2.0 * k3a[i] + k4a[i]);
                speeds[i] += h / 6.0 * (k1s[i] + 2.0 * k2s[i] + 2.0 * k3s[i] + k4s[i]);
            }
            let t = t0 + (step + 1) as f64 * h;
            if angles.iter().chain(speeds.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NumericalBlowUp(t));
            }
            times.push(t);
            angles_rec.push(angles.clone());
            speeds_rec.push(speeds.clone());
        }
        // land segment ends exactly
        *times.last_mut().unwrap() = t1;
        Ok(())
    };

    run_segment(
        Stage::FaultOn,
        0.0,
        clear,
        &mut angles,
        &mut speeds,
        &mut times,
        &mut angles_rec,
        &mut speeds_rec,
    )?;
    let clear_index = times.len() - 1;
    run_segment(
        Stage::PostFault,
        clear,
        t_end,
        &mut angles,
        &mut speeds,
        &mut times,
        &mut angles_rec,
        &mut speeds_rec,
    )?;

    let acc_powers: Vec<Vec<f64>> = (0..times.len())
        .map(|k| {
            let stage = if k < clear_index {
                Stage::FaultOn
            } else {
                Stage::PostFault
            };
            accelerating_power(case.stage(stage), case, &angles_rec[k])
        })
        .collect();

    Ok(Trajectory {
        times,
        angles: angles_rec,
        speeds: speeds_rec,
        acc_powers,
        clear_index,
        case_ref: case.meta.name.clone(),
    })
}

/// Linear-interpolated zero crossing of a sampled value.
///
/// Returns the exact endpoint when either value is zero; otherwise the
/// endpoints must have opposite signs.
pub fn refine_crossing(t0: f64, v0: f64, t1: f64, v1: f64) -> Result<f64> {
    if v0 == 0.0 {
        return Ok(t0);
    }
    if v1 == 0.0 {
        return Ok(t1);
    }
    if (v0 > 0.0) == (v1 > 0.0) {
        return Err(Error::NoCrossing(v0, v1));
    }
    Ok(t0 + (t1 - t0) * v0 / (v0 - v1))
}
