//! Network-mode case construction: bus admittance assembly, load conversion,
//! EMF derivation from the power-flow snapshot, and Kron reduction to the
//! generator internal nodes. Also hosts the reduced-mode Newton equilibrium.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::casefile::{BranchEntry, BusEntry, NetworkSection};
use super::{MachineParams, ReducedNetworkStage, Stage, SystemCase};
use crate::error::Error;
use crate::Result;

/// Maximum admissible power mismatch of the snapshot at any bus, p.u.
const SNAPSHOT_TOL: f64 = 1e-6;

pub(super) struct NetworkReduction {
    pub machines: Vec<MachineParams>,
    pub stages: [ReducedNetworkStage; 3],
    pub emf_angles: Vec<f64>,
}

struct BusIndex<'a> {
    ids: Vec<&'a str>,
}

impl<'a> BusIndex<'a> {
    fn of(&self, id: &str) -> Result<usize> {
        self.ids
            .iter()
            .position(|b| *b == id)
            .ok_or_else(|| Error::UnknownId(format!("bus {id}")))
    }
}

/// Plain branch network admittance matrix (no loads, no machines).
fn branch_ybus(n: usize, branches: &[(usize, usize, &BranchEntry)]) -> DMatrix<Complex64> {
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for &(f, t, br) in branches {
        let zs = Complex64::new(br.r, br.x);
        let ys = Complex64::new(1.0, 0.0) / zs;
        let sh = Complex64::new(0.0, br.b / 2.0);
        y[(f, f)] += ys + sh;
        y[(t, t)] += ys + sh;
        y[(f, t)] -= ys;
        y[(t, f)] -= ys;
    }
    y
}

/// Builds machines, reduced stages and EMF angles from a network-mode case.
pub(super) fn reduce_network(
    net: &NetworkSection,
    machine_entries: &[super::casefile::MachineEntry],
    fault_bus: &str,
    omega_syn: f64,
) -> Result<NetworkReduction> {
    let nb = net.buses.len();
    let nm = machine_entries.len();
    if nb == 0 {
        return Err(Error::MalformedCase("network mode with no buses".into()));
    }
    let idx = BusIndex {
        ids: net.buses.iter().map(|b| b.id.as_str()).collect(),
    };
    {
        let mut sorted = idx.ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != nb {
            return Err(Error::MalformedCase("duplicate bus ids".into()));
        }
    }

    let branches: Vec<(usize, usize, &BranchEntry)> = net
        .branches
        .iter()
        .map(|br| Ok((idx.of(&br.from)?, idx.of(&br.to)?, br)))
        .collect::<Result<_>>()?;

    // snapshot voltages, in bus order
    let mut volt = vec![None; nb];
    for v in &net.snapshot.bus_voltages {
        let i = idx.of(&v.bus)?;
        volt[i] = Some(Complex64::from_polar(v.vm, v.va));
    }
    let volt: Vec<Complex64> = volt
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                Error::MalformedCase(format!("snapshot missing voltage for bus {}", idx.ids[i]))
            })
        })
        .collect::<Result<_>>()?;

    // machine injections from the snapshot
    let mut mach_s = vec![Complex64::new(0.0, 0.0); nm];
    for (k, m) in machine_entries.iter().enumerate() {
        let pq = net
            .snapshot
            .machine_pq
            .iter()
            .find(|e| e.id == m.id)
            .ok_or_else(|| {
                Error::MalformedCase(format!("snapshot missing machine_pq for {}", m.id))
            })?;
        mach_s[k] = Complex64::new(pq.p, pq.q);
    }

    // snapshot consistency: injections computed from the branch network must
    // match generation minus load at every bus
    let ynet = branch_ybus(nb, &branches);
    let vvec = DMatrix::from_column_slice(nb, 1, &volt);
    let inj = &ynet * &vvec;
    for i in 0..nb {
        let s_net = volt[i] * inj[(i, 0)].conj();
        let bus: &BusEntry = &net.buses[i];
        let mut s_sched = Complex64::new(-bus.p_load, -bus.q_load);
        for (k, m) in machine_entries.iter().enumerate() {
            if m.bus == bus.id {
                s_sched += mach_s[k];
            }
        }
        let mism = (s_net - s_sched).norm();
        if mism > SNAPSHOT_TOL {
            return Err(Error::InconsistentSnapshot(format!(
                "bus {} power mismatch {:.3e} p.u.",
                bus.id, mism
            )));
        }
    }

    // machine EMFs and parameters
    let mut machines = Vec::with_capacity(nm);
    let mut emf_angles = Vec::with_capacity(nm);
    for (k, m) in machine_entries.iter().enumerate() {
        let bi = idx.of(&m.bus)?;
        let v = volt[bi];
        let current = (mach_s[k] / v).conj();
        let emf = v + Complex64::new(0.0, m.xd_prime) * current;
        machines.push(MachineParams {
            id: m.id.clone(),
            inertia_m: 2.0 * m.h / omega_syn,
            damping: m.d,
            mech_power: mach_s[k].re,
            emf_mag: emf.norm(),
            xd_prime: m.xd_prime,
            bus: m.bus.clone(),
        });
        emf_angles.push(emf.arg());
    }

    // stage construction: loads as constant admittances, machines attached
    // through their transient reactances, then Schur elimination of every
    // physical bus (the grounded fault bus is simply deleted)
    let fault_idx = idx.of(fault_bus)?;
    let load_adm: Vec<Complex64> = net
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| Complex64::new(b.p_load, -b.q_load) / volt[i].norm_sqr())
        .collect();

    let build_stage = |stage: Stage| -> Result<ReducedNetworkStage> {
        let in_service: Vec<(usize, usize, &BranchEntry)> = branches
            .iter()
            .filter(|(_, _, br)| stage != Stage::PostFault || br.status_postfault)
            .copied()
            .collect();
        let mut y = branch_ybus(nb, &in_service);
        for i in 0..nb {
            y[(i, i)] += load_adm[i];
        }
        // augment with internal nodes [nb .. nb+nm)
        let total = nb + nm;
        let mut yf = DMatrix::<Complex64>::zeros(total, total);
        yf.view_mut((0, 0), (nb, nb)).copy_from(&y);
        for (k, m) in machines.iter().enumerate() {
            let bi = idx.of(&m.bus)?;
            let yg = Complex64::new(0.0, -1.0 / m.xd_prime);
            yf[(nb + k, nb + k)] += yg;
            yf[(bi, bi)] += yg;
            yf[(nb + k, bi)] -= yg;
            yf[(bi, nb + k)] -= yg;
        }
        let elim: Vec<usize> = (0..nb)
            .filter(|&i| !(stage == Stage::FaultOn && i == fault_idx))
            .collect();
        let keep: Vec<usize> = (nb..total).collect();
        let reduced = kron_reduce(&yf, &keep, &elim)
            .map_err(|e| Error::UnreducibleNetwork(format!("{} stage: {e}", stage.name())))?;
        let mut g = vec![vec![0.0; nm]; nm];
        let mut b = vec![vec![0.0; nm]; nm];
        for i in 0..nm {
            for j in 0..nm {
                g[i][j] = reduced[(i, j)].re;
                b[i][j] = reduced[(i, j)].im;
            }
        }
        Ok(ReducedNetworkStage {
            stage,
            conductance: g,
            susceptance: b,
        })
    };

    let stages = [
        build_stage(Stage::Prefault)?,
        build_stage(Stage::FaultOn)?,
        build_stage(Stage::PostFault)?,
    ];
    Ok(NetworkReduction {
        machines,
        stages,
        emf_angles,
    })
}

/// Schur complement `Y_kk − Y_ke Y_ee⁻¹ Y_ek` for the given index sets.
pub fn kron_reduce(
    y: &DMatrix<Complex64>,
    keep: &[usize],
    elim: &[usize],
) -> std::result::Result<DMatrix<Complex64>, String> {
    let ykk = y.select_rows(keep.iter()).select_columns(keep.iter());
    if elim.is_empty() {
        return Ok(ykk);
    }
    let yke = y.select_rows(keep.iter()).select_columns(elim.iter());
    let yek = y.select_rows(elim.iter()).select_columns(keep.iter());
    let yee = y.select_rows(elim.iter()).select_columns(elim.iter());
    let lu = yee.lu();
    let x = lu
        .solve(&yek)
        .ok_or_else(|| "singular bus-admittance submatrix".to_string())?;
    Ok(&ykk - &yke * x)
}

/// Damped Newton iteration for the reduced-mode prefault operating point.
///
/// The power injections depend only on angle differences, so the plain
/// Jacobian is singular along the uniform-shift direction. The iteration
/// solves the bordered system that constrains the shift to zero; if the
/// residual has a component outside the Jacobian range (inconsistent case),
/// it stalls and the 200-iteration cap reports failure.
pub(super) fn newton_equilibrium(case: &SystemCase) -> Result<Vec<f64>> {
    let n = case.machine_count();
    let stage = case.stage(Stage::Prefault);
    let emfs = case.emf_mags();
    let pm = case.mech_powers();
    let mut angles = vec![0.0; n];

    let residual = |a: &[f64]| -> Vec<f64> {
        let pe = super::electrical_power(stage, &emfs, a);
        (0..n).map(|i| pm[i] - pe[i]).collect()
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut r = residual(&angles);
    for _ in 0..200 {
        if norm(&r) <= 1e-10 {
            return Ok(angles);
        }
        // bordered Jacobian: [dr/dδ, 1; 1ᵀ, 0]
        let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dij = angles[i] - angles[j];
                let k = emfs[i]
                    * emfs[j]
                    * (stage.conductance[i][j] * dij.sin() - stage.susceptance[i][j] * dij.cos());
                // dr_i/dδ_j = -dPe_i/dδ_j
                a[(i, j)] = -k;
                diag += k;
            }
            a[(i, i)] = diag;
            a[(i, n)] = 1.0;
            a[(n, i)] = 1.0;
        }
        let mut rhs = DMatrix::<f64>::zeros(n + 1, 1);
        for i in 0..n {
            rhs[(i, 0)] = r[i];
        }
        let step = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NoEquilibrium("singular Jacobian".into()))?;
        // damping by step halving
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = (0..n).map(|i| angles[i] + alpha * step[(i, 0)]).collect();
            let rt = residual(&trial);
            if norm(&rt) < norm(&r) {
                angles = trial;
                r = rt;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if norm(&r) <= 1e-10 {
        Ok(angles)
    } else {
        Err(Error::NoEquilibrium(format!(
            "residual {:.3e} p.u. after Newton iteration",
            norm(&r)
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_reduction_of_star_network() {
        // three admittances y1,y2 from nodes 0,1 to a center node 2 with a
        // shunt y3 to ground; eliminating the center gives the two-port of
        // the series-parallel combination
        let y1 = Complex64::new(0.0, -5.0);
        let y2 = Complex64::new(0.0, -2.0);
        let y3 = Complex64::new(0.1, -0.5);
        let mut y = DMatrix::<Complex64>::zeros(3, 3);
        y[(0, 0)] = y1;
        y[(1, 1)] = y2;
        y[(2, 2)] = y1 + y2 + y3;
        y[(0, 2)] = -y1;
        y[(2, 0)] = -y1;
        y[(1, 2)] = -y2;
        y[(2, 1)] = -y2;
        let r = kron_reduce(&y, &[0, 1], &[2]).unwrap();
        let denom = y1 + y2 + y3;
        let expect01 = -y1 * y2 / denom;
        let expect00 = y1 - y1 * y1 / denom;
        assert!((r[(0, 1)] - expect01).norm() < 1e-14);
        assert!((r[(1, 0)] - expect01).norm() < 1e-14);
        assert!((r[(0, 0)] - expect00).norm() < 1e-14);
    }

    #[test]
    fn singular_elimination_block_is_reported() {
        // isolated eliminated node with no connections at all
        let y = DMatrix::<Complex64>::zeros(2, 2);
        assert!(kron_reduce(&y, &[0], &[1]).is_err());
    }
}
