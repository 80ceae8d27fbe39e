//! Line-oriented case file reader.
//!
//! ```text
//! # comment
//! SYSTEM
//! s_base f_base
//! BUS
//! id kind v_set p_load q_load p_gen q_gen shunt_g shunt_b     (kind: 1 PQ, 2 PV, 3 slack)
//! BRANCH
//! from to r x b_half tap status                               (status: 1 in, 0 out)
//! MACHINE
//! bus s_rated H D ra xd xq xd1 xq1 Td01 Tq01
//!     KA TA KE TE KF TF vr_min vr_max  R Ts Tch p_min p_max      (one line, 24 fields)
//! CIG
//! bus redispatch_bus p_ref q_ref K Rc Kw Tw kp_v ki_v Ti i_max kp_pll ki_pll Tf
//! ```
//!
//! Quantities are per-unit on `s_base` except time constants (s), `f_base`
//! (Hz) and H, which is given in seconds on `s_rated` and converted to
//! `s_base` on load. The SYSTEM section is optional and defaults to 100 MVA,
//! 60 Hz.

use std::collections::HashSet;

use super::{Branch, Bus, BusKind, CigRecord, MachineRecord, Network};
use crate::cig::{CigControlParams, PllParams};
use crate::error::{Error, Result};
use crate::machines::{AvrParams, GovParams, SynMachineParams};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    System,
    Bus,
    Branch,
    Machine,
    Cig,
}

fn parse_fields(line_no: usize, text: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != expected {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("{what} row needs {expected} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| f.parse::<f64>().map_err(|_| Error::Parse { line: line_no, msg: format!("'{f}' is not a number") }))
        .collect()
}

fn as_id(line_no: usize, v: f64) -> Result<i64> {
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(Error::Parse { line: line_no, msg: format!("{v} is not an integer id") });
    }
    Ok(v as i64)
}

/// Parses a case file into a validated [`Network`].
pub fn parse_case(text: &str) -> Result<Network> {
    let mut section = Section::None;
    let mut net = Network {
        buses: Vec::new(),
        branches: Vec::new(),
        machines: Vec::new(),
        cigs: Vec::new(),
        s_base: 100.0,
        f_base: 60.0,
    };
    let mut bus_ids = HashSet::new();
    // line numbers of rows, for error messages raised after the whole file is read
    let mut branch_lines = Vec::new();
    let mut device_lines = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let header = match line {
            "SYSTEM" => Some(Section::System),
            "BUS" => Some(Section::Bus),
            "BRANCH" => Some(Section::Branch),
            "MACHINE" => Some(Section::Machine),
            "CIG" => Some(Section::Cig),
            _ => None,
        };
        if let Some(s) = header {
            section = s;
            continue;
        }
        match section {
            Section::None => return Err(Error::Parse { line: line_no, msg: "data before any section header".into() }),
            Section::System => {
                let f = parse_fields(line_no, line, 2, "SYSTEM")?;
                if f[0] <= 0.0 || f[1] <= 0.0 {
                    return Err(Error::Parse { line: line_no, msg: "bases must be positive".into() });
                }
                net.s_base = f[0];
                net.f_base = f[1];
            }
            Section::Bus => {
                let f = parse_fields(line_no, line, 9, "BUS")?;
                let id = as_id(line_no, f[0])?;
                let kind = BusKind::from_code(as_id(line_no, f[1])?).ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: format!("bus kind {} is not 1, 2 or 3", f[1]),
                })?;
                if !bus_ids.insert(id) {
                    return Err(Error::DuplicateId { what: "bus", id });
                }
                let v_set = if kind == BusKind::Pq { 1.0 } else { f[2] };
                net.buses.push(Bus {
                    id,
                    kind,
                    v_set,
                    p_load: f[3],
                    q_load: f[4],
                    p_gen: f[5],
                    q_gen: f[6],
                    v_mag: 1.0,
                    v_ang: 0.0,
                    shunt_g: f[7],
                    shunt_b: f[8],
                    fault_g: 0.0,
                });
            }
            Section::Branch => {
                let f = parse_fields(line_no, line, 7, "BRANCH")?;
                net.branches.push(Branch {
                    from: as_id(line_no, f[0])?,
                    to: as_id(line_no, f[1])?,
                    r: f[2],
                    x: f[3],
                    b_half: f[4],
                    tap: if f[5] == 0.0 { 1.0 } else { f[5] },
                    in_service: f[6] != 0.0,
                });
                branch_lines.push(line_no);
            }
            Section::Machine => {
                let f = parse_fields(line_no, line, 24, "MACHINE")?;
                net.machines.push(MachineRecord {
                    bus: as_id(line_no, f[0])?,
                    params: SynMachineParams {
                        s_rated: f[1],
                        h: f[2],
                        d: f[3],
                        ra: f[4],
                        xd: f[5],
                        xq: f[6],
                        xd1: f[7],
                        xq1: f[8],
                        td01: f[9],
                        tq01: f[10],
                    },
                    avr: AvrParams {
                        ka: f[11],
                        ta: f[12],
                        ke: f[13],
                        te: f[14],
                        kf: f[15],
                        tf: f[16],
                        vr_min: f[17],
                        vr_max: f[18],
                    },
                    gov: GovParams { r: f[19], ts: f[20], tch: f[21], p_min: f[22], p_max: f[23] },
                });
                device_lines.push(line_no);
            }
            Section::Cig => {
                let f = parse_fields(line_no, line, 15, "CIG")?;
                net.cigs.push(CigRecord {
                    bus: as_id(line_no, f[0])?,
                    redispatch_bus: as_id(line_no, f[1])?,
                    params: CigControlParams {
                        p_ref: f[2],
                        q_ref: f[3],
                        k: f[4],
                        r_c: f[5],
                        k_w: f[6],
                        t_w: f[7],
                        kp_v: f[8],
                        ki_v: f[9],
                        t_i: f[10],
                        i_max: f[11],
                        pll: PllParams { kp: f[12], ki: f[13] },
                        t_f: f[14],
                    },
                });
                device_lines.push(line_no);
            }
        }
    }

    if net.buses.is_empty() {
        return Err(Error::Parse { line: text.lines().count(), msg: "no BUS rows".into() });
    }
    for (br, &line) in net.branches.iter().zip(&branch_lines) {
        for id in [br.from, br.to] {
            if !bus_ids.contains(&id) {
                return Err(Error::Parse { line, msg: format!("branch references unknown bus {id}") });
            }
        }
    }
    let device_buses =
        net.machines.iter().map(|m| m.bus).chain(net.cigs.iter().flat_map(|c| [c.bus, c.redispatch_bus]));
    for id in device_buses {
        if !bus_ids.contains(&id) {
            let line = device_lines.first().copied().unwrap_or(0);
            return Err(Error::Parse { line, msg: format!("device references unknown bus {id}") });
        }
    }
    for m in &mut net.machines {
        m.params.h *= m.params.s_rated / net.s_base;
    }
    net.validate()?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wscc_bundle_shape() {
        let net = Network::wscc9();
        assert_eq!(net.buses.len(), 9);
        assert_eq!(net.branches.len(), 9);
        assert_eq!(net.machines.len(), 3);
        assert_eq!(net.cigs.len(), 1);
        assert_eq!(net.cigs[0].bus, 7);
        let loaded: Vec<i64> = net.buses.iter().filter(|b| b.p_load > 0.0).map(|b| b.id).collect();
        assert_eq!(loaded, vec![5, 6, 8]);
        let h: Vec<f64> = net.machines.iter().map(|m| m.params.h).collect();
        assert_eq!(h, vec![4.0, 4.0, 3.0]);
        assert_eq!(net.f_base, 60.0);
    }

    #[test]
    fn minimal_two_bus() {
        let net = parse_case("BUS\n1 3 1.0 0 0 0 0 0 0\n2 1 0 0 0 0 0 0 0\nBRANCH\n1 2 0 0.1 0 1 1\n").unwrap();
        assert_eq!(net.buses.len(), 2);
        assert_eq!(net.branches.len(), 1);
        assert_eq!(net.s_base, 100.0);
    }

    #[test]
    fn two_slack_buses_rejected() {
        let err = parse_case("BUS\n1 3 1.0 0 0 0 0 0 0\n2 3 1.0 0 0 0 0 0 0\nBRANCH\n1 2 0 0.1 0 1 1\n").unwrap_err();
        assert!(matches!(err, Error::SlackCount(2)));
    }

    #[test]
    fn missing_slack_rejected() {
        let err = parse_case("BUS\n1 2 1.0 0 0 0 0 0 0\n2 1 1.0 0 0 0 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::SlackCount(0)));
    }

    #[test]
    fn duplicate_bus_rejected() {
        let err = parse_case("BUS\n1 3 1.0 0 0 0 0 0 0\n1 1 1.0 0 0 0 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateId { id: 1, .. }));
    }

    #[test]
    fn bad_number_reports_line() {
        let err = parse_case("# header\nBUS\n1 3 1.0 0 0 0 0 zero 0\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn wrong_field_count_reports_line() {
        let err = parse_case("BUS\n1 3 1.0 0 0 0 0 0 0\nBRANCH\n1 2 0 0.1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
    }

    #[test]
    fn dangling_branch_rejected() {
        let err = parse_case("BUS\n1 3 1.0 0 0 0 0 0 0\nBRANCH\n1 7 0 0.1 0 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
    }

    #[test]
    fn zero_reactance_rejected() {
        let err = parse_case("BUS\n1 3 1.0 0 0 0 0 0 0\n2 1 1 0 0 0 0 0 0\nBRANCH\n1 2 0.1 0 0 1 1\n").unwrap_err();
        assert!(matches!(err, Error::InvalidData(_)));
    }
}
