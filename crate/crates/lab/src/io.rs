//! File formats: run manifests, particle dumps (JSONL and a compact
//! little-endian columnar binary), and CSV helpers.
//!
//! Outputs are timestamp-free so identical configurations reproduce files
//! byte for byte; wall-clock metadata lives only in the manifest. Formats
//! are documented in `docs/formats.md`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use bbm_core::engine::{BirthRecord, Particle, ParticleType, Snapshot};
use serde::Serialize;

/// Magic header of the columnar particle dump.
pub const COLUMNAR_MAGIC: &[u8; 8] = b"BBMCOLS1";

/// Writes `<tag>.manifest.json` describing a run: full configuration,
/// artifact version, seed, and the only timestamp of the output set.
pub fn write_manifest<C: Serialize>(
    dir: &Path,
    tag: &str,
    command: &str,
    config: &C,
    seed: u64,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(format!("{tag}.manifest.json"));
    let manifest = serde_json::json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "tag": tag,
        "seed": seed,
        "config": config,
        "started_unix": SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs(),
    });
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

fn type_code(ptype: ParticleType) -> u8 {
    match ptype {
        ParticleType::Type1 => 1,
        ParticleType::Type2 => 2,
    }
}

/// One particle per line: `{"id":..,"parent_id":..,"type":..,"x":..,
/// "t_mut":..,"x_mut":..}` with nulls for absent fields.
pub fn write_snapshot_jsonl(path: &Path, snapshot: &Snapshot) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for p in &snapshot.particles {
        let line = serde_json::json!({
            "id": p.id,
            "parent_id": p.parent_id,
            "type": type_code(p.ptype),
            "x": p.position,
            "t_mut": p.mutation_time,
            "x_mut": p.mutation_position,
        });
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Columnar dump: magic, particle count (u64 LE), then the position column
/// (f64 LE), the mutation-time column (f64 LE, NaN for none) and the type
/// column (u8).
pub fn write_snapshot_columnar(path: &Path, snapshot: &Snapshot) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(COLUMNAR_MAGIC)?;
    w.write_all(&(snapshot.particles.len() as u64).to_le_bytes())?;
    for p in &snapshot.particles {
        w.write_all(&p.position.to_le_bytes())?;
    }
    for p in &snapshot.particles {
        w.write_all(&p.mutation_time.unwrap_or(f64::NAN).to_le_bytes())?;
    }
    for p in &snapshot.particles {
        w.write_all(&[type_code(p.ptype)])?;
    }
    Ok(())
}

/// Decoded columns of a columnar dump.
pub struct ColumnarParticles {
    pub positions: Vec<f64>,
    pub mutation_times: Vec<f64>,
    pub types: Vec<u8>,
}

pub fn read_snapshot_columnar(path: &Path) -> Result<ColumnarParticles> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != COLUMNAR_MAGIC {
        bail!("{} is not a columnar particle dump", path.display());
    }
    let mut count_bytes = [0u8; 8];
    r.read_exact(&mut count_bytes)?;
    let n = u64::from_le_bytes(count_bytes) as usize;
    let mut read_f64s = |n: usize| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        let mut buf = [0u8; 8];
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            out.push(f64::from_le_bytes(buf));
        }
        Ok(out)
    };
    let positions = read_f64s(n)?;
    let mutation_times = read_f64s(n)?;
    let mut types = vec![0u8; n];
    r.read_exact(&mut types)?;
    Ok(ColumnarParticles {
        positions,
        mutation_times,
        types,
    })
}

pub fn read_snapshot_jsonl(path: &Path) -> Result<Vec<Particle>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line)?;
        let ptype = match v["type"].as_u64() {
            Some(1) => ParticleType::Type1,
            Some(2) => ParticleType::Type2,
            other => bail!("bad particle type {other:?}"),
        };
        out.push(Particle {
            id: v["id"].as_u64().context("id")?,
            parent_id: v["parent_id"].as_u64(),
            ptype,
            position: v["x"].as_f64().context("x")?,
            mutation_time: v["t_mut"].as_f64(),
            mutation_position: v["x_mut"].as_f64(),
        });
    }
    Ok(out)
}

/// Birth record CSV: `time,position,parent_id`.
pub fn write_births_csv(path: &Path, births: &BirthRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time", "position", "parent_id"])?;
    for b in &births.entries {
        w.write_record(&[
            format!("{}", b.time),
            format!("{}", b.position),
            format!("{}", b.parent_id),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a summary JSON next to the other artifacts of a tagged run.
pub fn write_summary(dir: &Path, tag: &str, value: &serde_json::Value) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{tag}.summary.json"));
    std::fs::write(&path, serde_json::to_string_pretty(value)?)?;
    Ok(path)
}

pub fn read_summary(dir: &Path, tag: &str) -> Option<serde_json::Value> {
    let path = dir.join(format!("{tag}.summary.json"));
    let text = std::fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}
