//! File formats: CSV tables, JSON run manifests and the binary radial cache.

use byteorder::{ByteOrder, LittleEndian, WriteBytesExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::atom::{ContinuumWave, Potential, RadialGrid};
use crate::error::{Error, Result};
use crate::ionization::{AmplitudeGrid, SpotProfile};
use crate::streaking::StreakingScan;

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("csv: {other:?}")),
    }
}

pub const AMPLITUDE_HEADER: [&str; 6] = ["energy_au", "theta_rad", "phi_rad", "re", "im", "prob"];
pub const STREAK_HEADER: [&str; 4] = ["phi_p_rad", "delay_au", "coe_au", "coe_peak_au"];

/// Write any header plus numeric rows. Floats use shortest round-trip form.
pub fn write_table<W: Write, const N: usize>(w: W, header: &[&str; N], rows: &[[f64; N]]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header).map_err(csv_err)?;
    for r in rows {
        wr.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Read a numeric table, checking the header exactly and every cell for a finite value.
pub fn read_table<R: Read, const N: usize>(r: R, header: &[&str; N]) -> Result<Vec<[f64; N]>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let got = rd.headers().map_err(csv_err)?.clone();
    if got.len() != N || got.iter().zip(header.iter()).any(|(a, b)| a.trim() != *b) {
        return Err(Error::Format(format!("expected header {}", header.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != N {
            return Err(Error::Format(format!("row {}: expected {N} fields, got {}", i + 1, rec.len())));
        }
        let mut row = [0.0; N];
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {}, column {}: not a number", i + 1, header[j])))?;
            if !v.is_finite() {
                return Err(Error::Format(format!("row {}, column {}: not finite", i + 1, header[j])));
            }
            row[j] = v;
        }
        out.push(row);
    }
    Ok(out)
}

pub fn write_amplitude_csv<W: Write>(w: W, grid: &AmplitudeGrid) -> Result<()> {
    write_table(w, &AMPLITUDE_HEADER, &grid.rows())
}

/// Rows `(E, θ, φ, re, im, |A|²)`; `prob` must match `re² + im²`.
pub fn read_amplitude_csv<R: Read>(r: R) -> Result<Vec<[f64; 6]>> {
    let rows = read_table(r, &AMPLITUDE_HEADER)?;
    for (i, row) in rows.iter().enumerate() {
        let p = row[3] * row[3] + row[4] * row[4];
        if (p - row[5]).abs() > 1e-9 * p.max(1e-300) + 1e-300 {
            return Err(Error::Format(format!("row {}: prob is not re² + im²", i + 1)));
        }
    }
    Ok(rows)
}

pub fn write_streak_csv<W: Write>(w: W, scans: &[StreakingScan]) -> Result<()> {
    let mut rows = Vec::new();
    for s in scans {
        for k in 0..s.delays.len() {
            rows.push([s.phi_p, s.delays[k], s.coe[k], s.coe_peak[k]]);
        }
    }
    write_table(w, &STREAK_HEADER, &rows)
}

/// Regroup streak rows into per-azimuth scans (azimuths in first-seen order).
pub fn read_streak_csv<R: Read>(r: R, profile: SpotProfile, emission_radius: f64) -> Result<Vec<StreakingScan>> {
    let rows = read_table(r, &STREAK_HEADER)?;
    let mut scans: Vec<StreakingScan> = Vec::new();
    for row in rows {
        let scan = match scans.iter_mut().find(|s| s.phi_p.to_bits() == row[0].to_bits()) {
            Some(s) => s,
            None => {
                scans.push(StreakingScan {
                    phi_p: row[0],
                    delays: Vec::new(),
                    coe: Vec::new(),
                    coe_peak: Vec::new(),
                    profile,
                    emission_radius,
                });
                scans.last_mut().expect("just pushed")
            }
        };
        scan.delays.push(row[1]);
        scan.coe.push(row[2]);
        scan.coe_peak.push(row[3]);
    }
    for s in &scans {
        if !s.delays.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Format(format!("delays at phi_p = {} are not increasing", s.phi_p)));
        }
    }
    Ok(scans)
}

/// One output artifact with its checksum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// A numerical check made during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Sidecar describing one run. Contains no clock time so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub study: String,
    pub config: serde_json::Value,
    pub artifacts: Vec<Artifact>,
    pub gates: Vec<Gate>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(study: &str, config: serde_json::Value) -> Self {
        RunManifest {
            tool: "slvw".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            study: study.into(),
            config,
            artifacts: Vec::new(),
            gates: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn gate(&mut self, name: &str, value: f64, tolerance: f64) -> bool {
        let passed = value.is_finite() && value <= tolerance;
        self.gates.push(Gate { name: name.into(), value, tolerance, passed });
        passed
    }

    pub fn all_passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    /// Write `bytes` under `dir` and record it.
    pub fn emit(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), bytes)?;
        self.artifacts.push(Artifact {
            path: name.into(),
            sha256: hex(&Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn to_json_pretty<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))
}

// ---- radial cache -------------------------------------------------------

pub const RADIAL_MAGIC: &[u8; 8] = b"SLVWRAD1";
const MAX_ID: usize = 256;

/// One continuum partial wave on a specific grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRecord {
    pub potential: String,
    pub energy: f64,
    pub l: u16,
    pub grid_hash: [u8; 32],
    pub k: f64,
    pub eta: f64,
    pub delta: f64,
    pub short_range: f64,
    pub u: Vec<f64>,
}

type RadialKey = (String, u64, u16, [u8; 32]);

/// Continuum solutions keyed by (potential id, energy, l, grid hash).
///
/// Layout (little endian): magic, `u32` record count, records, then the
/// SHA-256 of everything before it. A record is `u16` id length, id bytes,
/// `f64` energy, `u16` l, 32-byte grid hash, `f64` k, η, δ, δ̂, `u32` point
/// count and the samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RadialCache {
    records: BTreeMap<RadialKey, RadialRecord>,
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Format(format!("radial cache truncated at byte {}", self.pos))),
        }
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(LittleEndian::read_u16(self.take(2)?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(LittleEndian::read_u32(self.take(4)?))
    }
    fn f64(&mut self) -> Result<f64> {
        let v = LittleEndian::read_f64(self.take(8)?);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Format(format!("non-finite value before byte {}", self.pos)))
        }
    }
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

impl RadialCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn insert(&mut self, rec: RadialRecord) {
        let key = (rec.potential.clone(), rec.energy.to_bits(), rec.l, rec.grid_hash);
        self.records.insert(key, rec);
    }

    pub fn get(&self, potential: &str, energy: f64, l: u16, grid_hash: &[u8; 32]) -> Option<&RadialRecord> {
        self.records.get(&(potential.to_string(), energy.to_bits(), l, *grid_hash))
    }

    pub fn records(&self) -> impl Iterator<Item = &RadialRecord> {
        self.records.values()
    }

    pub fn insert_wave(&mut self, w: &ContinuumWave) {
        let hash = w.grid.hash();
        for l in 0..=w.l_max {
            self.insert(RadialRecord {
                potential: w.potential.id(),
                energy: w.energy,
                l: l as u16,
                grid_hash: hash,
                k: w.k,
                eta: w.eta,
                delta: w.delta[l],
                short_range: w.short_range[l],
                u: w.u[l].clone(),
            });
        }
    }

    /// Rebuild a continuum wave if every `l ≤ l_max` is cached for this grid.
    pub fn wave(&self, pot: &Potential, grid: &Arc<RadialGrid>, energy: f64, l_max: usize) -> Option<ContinuumWave> {
        let id = pot.id();
        let hash = grid.hash();
        let recs: Vec<&RadialRecord> =
            (0..=l_max).map(|l| self.get(&id, energy, l as u16, &hash)).collect::<Option<_>>()?;
        if recs.iter().any(|r| r.u.len() != grid.len()) {
            return None;
        }
        Some(ContinuumWave {
            energy,
            k: recs[0].k,
            eta: recs[0].eta,
            l_max,
            u: recs.iter().map(|r| r.u.clone()).collect(),
            delta: recs.iter().map(|r| r.delta).collect(),
            short_range: recs.iter().map(|r| r.short_range).collect(),
            grid: grid.clone(),
            potential: *pot,
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(RADIAL_MAGIC);
        out.write_u32::<LittleEndian>(self.records.len() as u32).expect("vec write");
        for r in self.records.values() {
            let id = r.potential.as_bytes();
            out.write_u16::<LittleEndian>(id.len() as u16).expect("vec write");
            out.extend_from_slice(id);
            out.write_f64::<LittleEndian>(r.energy).expect("vec write");
            out.write_u16::<LittleEndian>(r.l).expect("vec write");
            out.extend_from_slice(&r.grid_hash);
            for v in [r.k, r.eta, r.delta, r.short_range] {
                out.write_f64::<LittleEndian>(v).expect("vec write");
            }
            out.write_u32::<LittleEndian>(r.u.len() as u32).expect("vec write");
            for v in &r.u {
                out.write_f64::<LittleEndian>(*v).expect("vec write");
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    /// Decode; any malformed input is an error, never a panic.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < RADIAL_MAGIC.len() + 4 + 32 {
            return Err(Error::Format("radial cache too short".into()));
        }
        if &bytes[..8] != RADIAL_MAGIC {
            return Err(Error::Format("not a radial cache (bad magic)".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Format("radial cache checksum mismatch".into()));
        }
        let mut c = Cursor { buf: body, pos: 8 };
        let count = c.u32()? as usize;
        // smallest record: empty id, no samples
        const MIN_RECORD: usize = 2 + 8 + 2 + 32 + 32 + 4;
        if count > c.remaining() / MIN_RECORD {
            return Err(Error::Format("record count exceeds file size".into()));
        }
        let mut cache = RadialCache::new();
        for _ in 0..count {
            let n = c.u16()? as usize;
            if n > MAX_ID {
                return Err(Error::Format("potential id too long".into()));
            }
            let potential = std::str::from_utf8(c.take(n)?)
                .map_err(|_| Error::Format("potential id is not UTF-8".into()))?
                .to_string();
            let energy = c.f64()?;
            let l = c.u16()?;
            let mut grid_hash = [0u8; 32];
            grid_hash.copy_from_slice(c.take(32)?);
            let (k, eta, delta, short_range) = (c.f64()?, c.f64()?, c.f64()?, c.f64()?);
            let points = c.u32()? as usize;
            if points > c.remaining() / 8 {
                return Err(Error::Format("sample count exceeds file size".into()));
            }
            let mut u = Vec::with_capacity(points);
            for _ in 0..points {
                u.push(c.f64()?);
            }
            cache.insert(RadialRecord { potential, energy, l, grid_hash, k, eta, delta, short_range, u });
        }
        if c.remaining() != 0 {
            return Err(Error::Format("trailing bytes after last record".into()));
        }
        Ok(cache)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.encode())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RadialCache {
        let mut c = RadialCache::new();
        c.insert(RadialRecord {
            potential: "coulomb:1".into(),
            energy: 0.5,
            l: 1,
            grid_hash: [7; 32],
            k: 1.0,
            eta: -1.0,
            delta: 0.3,
            short_range: 0.0,
            u: vec![0.0, 0.25, -0.5],
        });
        c
    }

    #[test]
    fn cache_roundtrip_and_corruption() {
        let c = sample();
        let bytes = c.encode();
        assert_eq!(RadialCache::decode(&bytes).unwrap(), c);
        for i in 0..bytes.len() {
            let mut b = bytes.clone();
            b[i] ^= 0x40;
            assert!(RadialCache::decode(&b).is_err());
            assert!(RadialCache::decode(&bytes[..i]).is_err());
        }
    }

    #[test]
    fn table_rejects_bad_cells() {
        let ok = "phi_p_rad,delay_au,coe_au,coe_peak_au\n0,1,2,3\n";
        assert_eq!(read_table(ok.as_bytes(), &STREAK_HEADER).unwrap(), vec![[0.0, 1.0, 2.0, 3.0]]);
        assert!(read_table("a,b,c,d\n".as_bytes(), &STREAK_HEADER).is_err());
        assert!(read_table("phi_p_rad,delay_au,coe_au,coe_peak_au\n0,1,x,3\n".as_bytes(), &STREAK_HEADER).is_err());
        assert!(read_table("phi_p_rad,delay_au,coe_au,coe_peak_au\n0,1,NaN,3\n".as_bytes(), &STREAK_HEADER).is_err());
    }
}
