//! System model: case ingestion, network reduction and power evaluation.
//!
//! The model is the classical one: constant-magnitude EMF behind transient
//! reactance, constant-impedance loads, network Kron-reduced to the
//! generator internal nodes, one reduced admittance matrix per fault stage.

mod casefile;
mod network;

use crate::error::Error;
use crate::Result;

pub use casefile::{build_case, CaseFile};

/// Parameters of one machine under the classical model.
///
/// `inertia_m` is the per-unit inertia coefficient `M = 2H/ω_syn` in
/// s²/rad on the system base, so that `M dω/dt = f` with `f` in per unit
/// and `ω` the speed deviation in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineParams {
    pub id: String,
    pub inertia_m: f64,
    /// Damping coefficient in p.u./(rad/s); zero by default.
    pub damping: f64,
    /// Constant mechanical power, p.u.
    pub mech_power: f64,
    /// Constant internal EMF magnitude, p.u.
    pub emf_mag: f64,
    /// Transient reactance, p.u.
    pub xd_prime: f64,
    /// Terminal bus identifier.
    pub bus: String,
}

/// Which network configuration a reduced matrix describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Prefault,
    FaultOn,
    PostFault,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Prefault => "prefault",
            Stage::FaultOn => "faulton",
            Stage::PostFault => "postfault",
        }
    }
}

/// One stage of the network, Kron-reduced to generator internal nodes.
///
/// `conductance[i][j]` and `susceptance[i][j]` are G_ij and B_ij of the
/// reduced bus admittance matrix Y = G + jB, row-major, n×n with n the
/// machine count. Both are symmetric for reciprocal networks.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedNetworkStage {
    pub stage: Stage,
    pub conductance: Vec<Vec<f64>>,
    pub susceptance: Vec<Vec<f64>>,
}

impl ReducedNetworkStage {
    pub fn machine_count(&self) -> usize {
        self.conductance.len()
    }

    /// Validates shape and symmetry (1e-9 absolute, reciprocal network).
    pub fn validate(&self, n: usize) -> Result<()> {
        for m in [&self.conductance, &self.susceptance] {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(Error::MalformedCase(format!(
                    "{} stage matrix is not {n}x{n}",
                    self.stage.name()
                )));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let dg = (self.conductance[i][j] - self.conductance[j][i]).abs();
                let db = (self.susceptance[i][j] - self.susceptance[j][i]).abs();
                if dg > 1e-9 || db > 1e-9 {
                    return Err(Error::MalformedCase(format!(
                        "{} stage matrix asymmetric at ({i},{j})",
                        self.stage.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Case metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseMeta {
    pub name: String,
    pub base_mva: f64,
    /// Synchronous speed, rad/s.
    pub omega_syn: f64,
}

/// Fault schedule: a three-phase fault at `bus` from t = 0, cleared at
/// `clear_time` seconds. In reduced mode the bus is informational only.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultSpec {
    pub bus: Option<String>,
    pub clear_time: f64,
}

/// Immutable simulation input: machines, the three reduced network stages
/// and the fault schedule. Machine ordering is fixed and shared by all
/// matrices and by every per-machine vector in the crate.
#[derive(Debug, Clone)]
pub struct SystemCase {
    pub machines: Vec<MachineParams>,
    pub stages: [ReducedNetworkStage; 3],
    pub fault: FaultSpec,
    pub meta: CaseMeta,
    /// Prefault EMF angles derived from a network-mode snapshot; `None` in
    /// reduced mode (the equilibrium is then solved by Newton iteration).
    pub snapshot_angles: Option<Vec<f64>>,
}

impl SystemCase {
    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    pub fn stage(&self, stage: Stage) -> &ReducedNetworkStage {
        match stage {
            Stage::Prefault => &self.stages[0],
            Stage::FaultOn => &self.stages[1],
            Stage::PostFault => &self.stages[2],
        }
    }

    /// Index of a machine id.
    pub fn machine_index(&self, id: &str) -> Result<usize> {
        self.machines
            .iter()
            .position(|m| m.id == id)
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn machine_ids(&self) -> Vec<String> {
        self.machines.iter().map(|m| m.id.clone()).collect()
    }

    pub fn inertias(&self) -> Vec<f64> {
        self.machines.iter().map(|m| m.inertia_m).collect()
    }

    pub fn emf_mags(&self) -> Vec<f64> {
        self.machines.iter().map(|m| m.emf_mag).collect()
    }

    pub fn mech_powers(&self) -> Vec<f64> {
        self.machines.iter().map(|m| m.mech_power).collect()
    }

    /// Returns a copy with a different clearing time (used by CCT search).
    pub fn with_clear_time(&self, clear_time: f64) -> SystemCase {
        let mut c = self.clone();
        c.fault.clear_time = clear_time;
        c
    }

    /// Checks every type invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.machines.len();
        if n == 0 {
            return Err(Error::MalformedCase("no machines".into()));
        }
        for m in &self.machines {
            if !(m.inertia_m > 0.0) {
                return Err(Error::MalformedCase(format!("machine {}: M <= 0", m.id)));
            }
            if !(m.emf_mag > 0.0) {
                return Err(Error::MalformedCase(format!("machine {}: E <= 0", m.id)));
            }
            if !(m.xd_prime > 0.0) {
                return Err(Error::MalformedCase(format!("machine {}: xd' <= 0", m.id)));
            }
        }
        let mut ids: Vec<&str> = self.machines.iter().map(|m| m.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != n {
            return Err(Error::MalformedCase("duplicate machine ids".into()));
        }
        if !(self.fault.clear_time > 0.0) {
            return Err(Error::MalformedCase("clear_time must be > 0".into()));
        }
        for s in &self.stages {
            s.validate(n)?;
        }
        Ok(())
    }
}

/// Electrical power injected from each internal node.
///
/// `Pe_i = E_i² G_ii + Σ_{j≠i} E_i E_j (G_ij cos δ_ij + B_ij sin δ_ij)`
/// with δ_ij = δ_i − δ_j. For a lossless network (G = 0) the injections
/// sum to zero for any angle vector.
pub fn electrical_power(stage: &ReducedNetworkStage, emfs: &[f64], angles: &[f64]) -> Vec<f64> {
    let n = stage.machine_count();
    assert_eq!(emfs.len(), n, "emfs length mismatch");
    assert_eq!(angles.len(), n, "angles length mismatch");
    let mut pe = vec![0.0; n];
    for i in 0..n {
        let mut acc = emfs[i] * emfs[i] * stage.conductance[i][i];
        for j in 0..n {
            if j == i {
                continue;
            }
            let dij = angles[i] - angles[j];
            acc += emfs[i]
                * emfs[j]
                * (stage.conductance[i][j] * dij.cos() + stage.susceptance[i][j] * dij.sin());
        }
        pe[i] = acc;
    }
    pe
}

/// Absolute-frame accelerating power `f_abs,i = Pm_i − Pe_i`.
///
/// The center-of-inertia correction that turns this into the relative
/// force of a series is applied in the frames module.
pub fn accelerating_power(stage: &ReducedNetworkStage, case: &SystemCase, angles: &[f64]) -> Vec<f64> {
    let pe = electrical_power(stage, &case.emf_mags(), angles);
    case.machines
        .iter()
        .zip(pe)
        .map(|(m, p)| m.mech_power - p)
        .collect()
}

/// Absolute rotor angles of the prefault operating point.
///
/// Network-mode cases return the snapshot-derived EMF angles directly. In
/// reduced mode a damped Newton iteration from zero angles solves
/// `Pm_i − Pe_i = 0` for all machines; the iteration works on the
/// angle-difference manifold (the uniform-shift direction is pinned), so a
/// case whose total mechanical power is inconsistent with the network
/// losses has no solution and reports `no prefault equilibrium`.
pub fn prefault_equilibrium(case: &SystemCase) -> Result<Vec<f64>> {
    if let Some(angles) = &case.snapshot_angles {
        return Ok(angles.clone());
    }
    network::newton_equilibrium(case)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;

    fn two_machine_case(pm: [f64; 2], b12: f64) -> SystemCase {
        let stage = |s| ReducedNetworkStage {
            stage: s,
            conductance: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            susceptance: vec![vec![-b12, b12], vec![b12, -b12]],
        };
        SystemCase {
            machines: vec![
                MachineParams {
                    id: "a".into(),
                    inertia_m: 0.1,
                    damping: 0.0,
                    mech_power: pm[0],
                    emf_mag: 1.0,
                    xd_prime: 0.1,
                    bus: "1".into(),
                },
                MachineParams {
                    id: "b".into(),
                    inertia_m: 0.1,
                    damping: 0.0,
                    mech_power: pm[1],
                    emf_mag: 1.0,
                    xd_prime: 0.1,
                    bus: "2".into(),
                },
            ],
            stages: [
                stage(Stage::Prefault),
                stage(Stage::FaultOn),
                stage(Stage::PostFault),
            ],
            fault: FaultSpec {
                bus: None,
                clear_time: 0.1,
            },
            meta: CaseMeta {
                name: "two-machine".into(),
                base_mva: 100.0,
                omega_syn: 2.0 * std::f64::consts::PI * 60.0,
            },
            snapshot_angles: None,
        }
    }

    #[test]
    fn lossless_equal_angles_give_zero_power() {
        let case = two_machine_case([0.0, 0.0], 5.0);
        let pe = electrical_power(case.stage(Stage::Prefault), &[1.0, 1.0], &[0.3, 0.3]);
        assert!(pe.iter().all(|p| p.abs() < 1e-15));
    }

    #[test]
    fn two_machine_sine_law() {
        let case = two_machine_case([0.0, 0.0], 5.0);
        let pe = electrical_power(case.stage(Stage::Prefault), &[1.0, 1.0], &[0.1, 0.0]);
        let expect = 5.0 * 0.1_f64.sin();
        assert!((pe[0] - expect).abs() < 1e-15);
        assert!((pe[1] + expect).abs() < 1e-15);
    }

    #[test]
    fn accelerating_power_is_pm_minus_pe() {
        let mut case = two_machine_case([1.0, 0.0], 5.0);
        case.machines[0].mech_power = 1.0;
        let angles = [0.1, 0.0];
        let pe = electrical_power(case.stage(Stage::Prefault), &case.emf_mags(), &angles);
        let f = accelerating_power(case.stage(Stage::Prefault), &case, &angles);
        assert_eq!(f[0], 1.0 - pe[0]);
        assert_eq!(f[1], 0.0 - pe[1]);
    }

    #[test]
    fn symmetric_case_has_zero_relative_angle() {
        let case = two_machine_case([0.0, 0.0], 5.0);
        let angles = prefault_equilibrium(&case).unwrap();
        assert!((angles[0] - angles[1]).abs() < 1e-12);
    }

    #[test]
    fn reduced_two_machine_closed_form() {
        let case = two_machine_case([0.5, -0.5], 5.0);
        let angles = prefault_equilibrium(&case).unwrap();
        let expect = f64::asin(0.1);
        assert!(
            ((angles[0] - angles[1]) - expect).abs() < 1e-10,
            "relative angle {} vs asin(0.1) {}",
            angles[0] - angles[1],
            expect
        );
        let f = accelerating_power(case.stage(Stage::Prefault), &case, &angles);
        assert!(f.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn inconsistent_reduced_case_has_no_equilibrium() {
        // lossless network cannot absorb net mechanical power
        let case = two_machine_case([0.5, 0.0], 5.0);
        assert!(matches!(
            prefault_equilibrium(&case),
            Err(Error::NoEquilibrium(_))
        ));
    }

    #[test]
    fn wscc_equilibrium_matches_snapshot_and_balances() {
        let case = cases::wscc9().unwrap();
        let angles = prefault_equilibrium(&case).unwrap();
        assert_eq!(angles, case.snapshot_angles.clone().unwrap());
        // postfault equals prefault for this self-clearing case, so the
        // equilibrium residual holds on the postfault stage too
        let f = accelerating_power(case.stage(Stage::PostFault), &case, &angles);
        assert!(f.iter().all(|v| v.abs() < 1e-8), "residual {f:?}");
    }

    #[test]
    fn wscc_fault_on_accelerates_faulted_area() {
        let case = cases::wscc9().unwrap();
        let angles = prefault_equilibrium(&case).unwrap();
        let f = accelerating_power(case.stage(Stage::FaultOn), &case, &angles);
        // fault at bus 7: G2 (terminal bus 2 behind the 2-7 transformer)
        // loses its load path and accelerates hardest
        let g2 = case.machine_index("G2").unwrap();
        assert!(f[g2] > 0.0, "G2 fault-on f = {}", f[g2]);
        assert!(f[g2] >= f[case.machine_index("G1").unwrap()]);
        assert!(f[g2] >= f[case.machine_index("G3").unwrap()]);
    }

    #[test]
    fn lossless_power_balance_sums_to_zero() {
        let case = two_machine_case([0.0, 0.0], 5.0);
        let pe = electrical_power(case.stage(Stage::Prefault), &[1.1, 0.9], &[1.3, -2.2]);
        assert!((pe[0] + pe[1]).abs() < 1e-12);
    }
}
