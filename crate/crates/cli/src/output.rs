//! File emission: CSV and JSON dumps of Hamiltonian samples, pulses, the
//! preparation kick, phase results and verification reports.
//!
//! CSV column orders are fixed:
//!
//! * `path.csv` — `t,r,theta,phi`
//! * `hamiltonian.csv` — `t,h11_re,h11_im,h12_re,h12_im,h21_re,h21_im,h22_re,h22_im,B0,Bx,By,Bz`
//! * `hamiltonian_ab.csv` — `t` followed by `hIJ_re,hIJ_im` for I,J = 1..4 row major
//! * `kick.csv` — `t` followed by `uIJ_re,uIJ_im` for I,J = 1..4 row major (one row, t = 0)
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! re-parse reproduces them bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use blochsynth::linalg::{CMat2, CMat4};
use blochsynth::unitary::PulseSample;
use blochsynth::verify::Provenance;
use blochsynth::{PathSpec, TimeGrid};

use crate::config::CliError;

/// One synthesized 2x2 Hamiltonian sample with its pulse decomposition.
pub struct H2Row {
    pub t: f64,
    pub h: CMat2,
    pub pulse: PulseSample,
    pub herm_residual: f64,
}

/// One combined-system Hamiltonian sample.
pub struct H4Row {
    pub t: f64,
    pub h: CMat4,
    /// Skew residue removed by Hermitization of the finite difference.
    pub skew_defect: f64,
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    let path = dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    Ok((path, BufWriter::new(file)))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<PathBuf, CliError> {
    w.flush()
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
    let (path, mut w) = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::Io(format!("serializing {}: {e}", path.display())))?;
    w.write_all(b"\n").ok();
    finish(w, &path)
}

/// Trajectory samples at the grid nodes, re-ingestible as a sampled path.
pub fn write_path_csv(dir: &Path, path: &PathSpec, grid: &TimeGrid) -> Result<PathBuf, CliError> {
    let (file_path, mut w) = create(dir, "path.csv")?;
    writeln!(w, "t,r,theta,phi").map_err(|e| CliError::Io(e.to_string()))?;
    for &t in grid.points() {
        writeln!(w, "{},{},{},{}", t, path.r(t), path.theta(t), path.phi(t))
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    finish(w, &file_path)
}

pub fn write_h2_csv(dir: &Path, rows: &[H2Row]) -> Result<PathBuf, CliError> {
    let (path, mut w) = create(dir, "hamiltonian.csv")?;
    writeln!(
        w,
        "t,h11_re,h11_im,h12_re,h12_im,h21_re,h21_im,h22_re,h22_im,B0,Bx,By,Bz"
    )
    .map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        let m = &row.h.0;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.t,
            m[0][0].re,
            m[0][0].im,
            m[0][1].re,
            m[0][1].im,
            m[1][0].re,
            m[1][0].im,
            m[1][1].re,
            m[1][1].im,
            row.pulse.b0,
            row.pulse.b[0],
            row.pulse.b[1],
            row.pulse.b[2]
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    finish(w, &path)
}

fn write_4x4_csv(
    dir: &Path,
    name: &str,
    prefix: &str,
    rows: impl Iterator<Item = (f64, CMat4)>,
) -> Result<PathBuf, CliError> {
    let (path, mut w) = create(dir, name)?;
    let mut header = String::from("t");
    for i in 1..=4 {
        for j in 1..=4 {
            header.push_str(&format!(",{prefix}{i}{j}_re,{prefix}{i}{j}_im"));
        }
    }
    writeln!(w, "{header}").map_err(|e| CliError::Io(e.to_string()))?;
    for (t, m) in rows {
        let mut line = format!("{t}");
        for i in 0..4 {
            for j in 0..4 {
                line.push_str(&format!(",{},{}", m.0[i][j].re, m.0[i][j].im));
            }
        }
        writeln!(w, "{line}").map_err(|e| CliError::Io(e.to_string()))?;
    }
    finish(w, &path)
}

pub fn write_h4_csv(dir: &Path, rows: &[H4Row]) -> Result<PathBuf, CliError> {
    write_4x4_csv(dir, "hamiltonian_ab.csv", "h", rows.iter().map(|r| (r.t, r.h)))
}

pub fn write_kick_csv(dir: &Path, kick: &CMat4) -> Result<PathBuf, CliError> {
    write_4x4_csv(dir, "kick.csv", "u", std::iter::once((0.0, *kick)))
}

fn mat2_json(m: &CMat2) -> Vec<Vec<[f64; 2]>> {
    m.0.iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn mat4_json(m: &CMat4) -> Vec<Vec<[f64; 2]>> {
    m.0.iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[derive(Serialize)]
struct H2RowJson {
    t: f64,
    /// Entries as `[re, im]` pairs, row major.
    h: Vec<Vec<[f64; 2]>>,
    b0: f64,
    b: [f64; 3],
    herm_residual: f64,
}

#[derive(Serialize)]
struct H2Dump<'a> {
    provenance: &'a Provenance,
    rows: Vec<H2RowJson>,
}

pub fn write_h2_json(
    dir: &Path,
    rows: &[H2Row],
    provenance: &Provenance,
) -> Result<PathBuf, CliError> {
    let dump = H2Dump {
        provenance,
        rows: rows
            .iter()
            .map(|r| H2RowJson {
                t: r.t,
                h: mat2_json(&r.h),
                b0: r.pulse.b0,
                b: r.pulse.b,
                herm_residual: r.herm_residual,
            })
            .collect(),
    };
    write_json(dir, "hamiltonian.json", &dump)
}

#[derive(Serialize)]
struct H4RowJson {
    t: f64,
    h: Vec<Vec<[f64; 2]>>,
    skew_defect: f64,
}

#[derive(Serialize)]
struct H4Dump<'a> {
    provenance: &'a Provenance,
    rows: Vec<H4RowJson>,
}

pub fn write_h4_json(
    dir: &Path,
    rows: &[H4Row],
    provenance: &Provenance,
) -> Result<PathBuf, CliError> {
    let dump = H4Dump {
        provenance,
        rows: rows
            .iter()
            .map(|r| H4RowJson {
                t: r.t,
                h: mat4_json(&r.h),
                skew_defect: r.skew_defect,
            })
            .collect(),
    };
    write_json(dir, "hamiltonian_ab.json", &dump)
}

#[derive(Serialize)]
struct KickJson<'a> {
    u_ab: Vec<Vec<[f64; 2]>>,
    provenance: &'a Provenance,
}

pub fn write_kick_json(
    dir: &Path,
    kick: &CMat4,
    provenance: &Provenance,
) -> Result<PathBuf, CliError> {
    write_json(
        dir,
        "kick.json",
        &KickJson {
            u_ab: mat4_json(kick),
            provenance,
        },
    )
}
