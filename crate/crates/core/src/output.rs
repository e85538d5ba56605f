//! Field snapshots and run metadata.
//!
//! A snapshot is one JSON header line followed by `M·M` little-endian `f64`
//! grid values in x-major order (`index = ix·M + iy`).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::solver::{ExistenceBound, Outcome, PhysicalParams, SimulationState, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub field: String,
    pub t: f64,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    #[serde(rename = "Ns")]
    pub ns: usize,
    #[serde(rename = "Nv")]
    pub nv: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub layout: String,
}

impl SnapshotHeader {
    pub fn new(domain: &Domain, field: &str, t: f64) -> Self {
        let s = &domain.spec;
        Self {
            field: field.into(),
            t,
            lx: s.lx,
            ly: s.ly,
            ns: s.ns,
            nv: s.nv,
            m: s.m,
            layout: "x-major f64 little-endian".into(),
        }
    }
}

pub fn write_snapshot<W: Write>(mut w: W, header: &SnapshotHeader, values: &[f64]) -> Result<()> {
    if values.len() != header.m * header.m {
        return Err(Error::ResolutionMismatch(format!("{} values for an {}x{} grid", values.len(), header.m, header.m)));
    }
    let line = serde_json::to_string(header).map_err(|e| Error::Io(e.into()))?;
    writeln!(w, "{line}")?;
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(r: R) -> Result<(SnapshotHeader, Vec<f64>)> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end()).map_err(|e| Error::Io(e.into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != header.m * header.m * 8 {
        return Err(Error::ResolutionMismatch(format!("snapshot payload of {} bytes", bytes.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((header, values))
}

/// Grid snapshots of `C`, `u_x`, `u_y` for one state.
pub fn snapshot_fields(state: &SimulationState) -> Vec<(&'static str, Vec<f64>)> {
    let u = state.u.to_grid();
    vec![("C", state.c.to_grid()), ("u_x", u.x), ("u_y", u.y)]
}

pub fn save_snapshots(dir: &Path, index: usize, state: &SimulationState) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let domain = state.c.domain();
    for (name, values) in snapshot_fields(state) {
        let path = dir.join(format!("snapshot_{index:06}_{name}.bin"));
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_snapshot(f, &SnapshotHeader::new(domain, name, state.t), &values)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub outcome: Outcome,
    pub blowup_time: Option<f64>,
    pub final_time: f64,
    pub wall_time_s: f64,
    pub existence_time_bound: ExistenceBound,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evaluations: usize,
    pub domain: crate::domain::DomainSpec,
    pub params: PhysicalParams,
    pub solver: SolverConfig,
    pub forcing: String,
}

impl RunMetadata {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes")
    }
}
