//! JSON case-file schema and `build_case`.
//!
//! A case is either *reduced mode* (the three generator-internal-node
//! admittance matrices are given directly, together with per-machine `Pm`
//! and `E`) or *network mode* (bus/branch data plus a solved power-flow
//! snapshot from which loads, EMFs and mechanical powers are derived).
//! Angles are radians, powers per unit on `meta.base_mva`.

use serde::Deserialize;

use super::network::reduce_network;
use super::{CaseMeta, FaultSpec, MachineParams, ReducedNetworkStage, Stage, SystemCase};
use crate::error::Error;
use crate::Result;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub meta: MetaEntry,
    pub machines: Vec<MachineEntry>,
    pub mode: String,
    #[serde(default)]
    pub reduced: Option<ReducedSection>,
    #[serde(default)]
    pub network: Option<NetworkSection>,
    pub fault: FaultEntry,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaEntry {
    pub name: String,
    pub base_mva: f64,
    pub omega_syn: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineEntry {
    pub id: String,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "D", default)]
    pub d: f64,
    pub xd_prime: f64,
    pub bus: String,
    #[serde(rename = "Pm", default)]
    pub pm: Option<f64>,
    #[serde(rename = "E", default)]
    pub e: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedSection {
    pub prefault: MatrixPair,
    pub faulton: MatrixPair,
    pub postfault: MatrixPair,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixPair {
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub buses: Vec<BusEntry>,
    pub branches: Vec<BranchEntry>,
    pub snapshot: Snapshot,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusEntry {
    pub id: String,
    #[serde(default)]
    pub p_load: f64,
    #[serde(default)]
    pub q_load: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchEntry {
    pub from: String,
    pub to: String,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b: f64,
    /// In service after fault clearing; `false` models clearing by removal.
    #[serde(default = "default_true")]
    pub status_postfault: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub bus_voltages: Vec<BusVoltage>,
    pub machine_pq: Vec<MachinePq>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusVoltage {
    pub bus: String,
    #[serde(rename = "Vm")]
    pub vm: f64,
    #[serde(rename = "Va")]
    pub va: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachinePq {
    pub id: String,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultEntry {
    #[serde(default)]
    pub bus: Option<String>,
    pub clear_time: f64,
}

/// Parses and validates a case file, deriving the reduced stages.
pub fn build_case(content: &str) -> Result<SystemCase> {
    let file: CaseFile = serde_json::from_str(content)?;
    if file.machines.is_empty() {
        return Err(Error::MalformedCase("no machines".into()));
    }
    if !(file.meta.omega_syn > 0.0) {
        return Err(Error::MalformedCase("omega_syn must be > 0".into()));
    }
    let meta = CaseMeta {
        name: file.meta.name.clone(),
        base_mva: file.meta.base_mva,
        omega_syn: file.meta.omega_syn,
    };
    let fault = FaultSpec {
        bus: file.fault.bus.clone(),
        clear_time: file.fault.clear_time,
    };

    let case = match (file.mode.as_str(), &file.reduced, &file.network) {
        ("reduced", Some(red), None) => {
            let machines = file
                .machines
                .iter()
                .map(|m| {
                    let pm = m.pm.ok_or_else(|| {
                        Error::MalformedCase(format!("machine {}: Pm required in reduced mode", m.id))
                    })?;
                    let e = m.e.ok_or_else(|| {
                        Error::MalformedCase(format!("machine {}: E required in reduced mode", m.id))
                    })?;
                    Ok(MachineParams {
                        id: m.id.clone(),
                        inertia_m: 2.0 * m.h / file.meta.omega_syn,
                        damping: m.d,
                        mech_power: pm,
                        emf_mag: e,
                        xd_prime: m.xd_prime,
                        bus: m.bus.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let stage = |s: Stage, p: &MatrixPair| ReducedNetworkStage {
                stage: s,
                conductance: p.g.clone(),
                susceptance: p.b.clone(),
            };
            SystemCase {
                machines,
                stages: [
                    stage(Stage::Prefault, &red.prefault),
                    stage(Stage::FaultOn, &red.faulton),
                    stage(Stage::PostFault, &red.postfault),
                ],
                fault,
                meta,
                snapshot_angles: None,
            }
        }
        ("network", None, Some(net)) => {
            let fault_bus = fault.bus.clone().ok_or_else(|| {
                Error::MalformedCase("network mode requires fault.bus".into())
            })?;
            let red = reduce_network(net, &file.machines, &fault_bus, file.meta.omega_syn)?;
            SystemCase {
                machines: red.machines,
                stages: red.stages,
                fault,
                meta,
                snapshot_angles: Some(red.emf_angles),
            }
        }
        _ => {
            return Err(Error::MalformedCase(
                "mode must be \"reduced\" with a reduced section or \"network\" with a network section"
                    .into(),
            ))
        }
    };
    case.validate()?;
    Ok(case)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_MACHINE: &str = r#"{
        "meta": {"name": "pair", "base_mva": 100.0, "omega_syn": 376.99111843077515},
        "machines": [
            {"id": "a", "H": 3.0, "xd_prime": 0.1, "bus": "1", "Pm": 0.0, "E": 1.0},
            {"id": "b", "H": 3.0, "xd_prime": 0.1, "bus": "2", "Pm": 0.0, "E": 1.0}
        ],
        "mode": "reduced",
        "reduced": {
            "prefault":  {"G": [[0,0],[0,0]], "B": [[-5,5],[5,-5]]},
            "faulton":   {"G": [[0,0],[0,0]], "B": [[-5,5],[5,-5]]},
            "postfault": {"G": [[0,0],[0,0]], "B": [[-5,5],[5,-5]]}
        },
        "fault": {"clear_time": 0.1}
    }"#;

    #[test]
    fn reduced_mode_is_verbatim() {
        let case = build_case(TWO_MACHINE).unwrap();
        assert_eq!(case.machine_count(), 2);
        assert_eq!(case.stages[0].susceptance[0][1], 5.0);
        assert_eq!(case.stages[2].susceptance[1][0], 5.0);
        assert!(case.snapshot_angles.is_none());
    }

    #[test]
    fn zero_clear_time_is_malformed() {
        let bad = TWO_MACHINE.replace("\"clear_time\": 0.1", "\"clear_time\": 0.0");
        match build_case(&bad) {
            Err(Error::MalformedCase(msg)) => assert!(msg.contains("clear_time")),
            other => panic!("expected malformed case, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_matrix_is_malformed() {
        let bad = TWO_MACHINE.replacen("[[-5,5],[5,-5]]", "[[-5,5],[4,-5]]", 1);
        assert!(matches!(build_case(&bad), Err(Error::MalformedCase(_))));
    }

    #[test]
    fn missing_pm_in_reduced_mode_is_malformed() {
        let bad = TWO_MACHINE.replacen("\"Pm\": 0.0, ", "", 1);
        assert!(matches!(build_case(&bad), Err(Error::MalformedCase(_))));
    }

    #[test]
    fn duplicate_ids_are_malformed() {
        let bad = TWO_MACHINE.replace("\"id\": \"b\"", "\"id\": \"a\"");
        assert!(matches!(build_case(&bad), Err(Error::MalformedCase(_))));
    }
}
