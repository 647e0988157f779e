//! Binary trajectory files.
//!
//! Layout, all little-endian: magic `NLPT`, u32 version (1), u32 flags
//! (bit 0: clock present), u64 path count, u64 time count, the time grid,
//! then the values time-major and, if flagged, the clock in the same order.
//! A JSON sidecar with the same stem carries the seed and provenance.

use super::{Provenance, TrajectorySet};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 4] = b"NLPT";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    format: String,
    version: u32,
    n_paths: usize,
    n_times: usize,
    master_seed: u64,
    provenance: Provenance,
}

fn sidecar_path(p: &Path) -> PathBuf {
    p.with_extension("json")
}

/// Writes the binary file and its `.json` sidecar.
pub fn write_nlpt(ts: &TrajectorySet, path: &Path) -> Result<()> {
    let (values, clock) = ts.raw();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(clock.is_some() as u32).to_le_bytes())?;
    w.write_all(&(ts.n_paths() as u64).to_le_bytes())?;
    w.write_all(&(ts.time_grid().len() as u64).to_le_bytes())?;
    for block in [ts.time_grid(), values].into_iter().chain(clock) {
        for v in block {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    let side = Sidecar {
        format: "NLPT".into(),
        version: VERSION,
        n_paths: ts.n_paths(),
        n_times: ts.time_grid().len(),
        master_seed: ts.master_seed(),
        provenance: ts.provenance().clone(),
    };
    let text = serde_json::to_string_pretty(&side).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(sidecar_path(path), text + "\n")?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; 8 * n];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn read_nlpt(path: &Path) -> Result<TrajectorySet> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config(format!("{} is not a trajectory file", path.display())));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Config(format!("unsupported trajectory file version {version}")));
    }
    let flags = read_u32(&mut r)?;
    let n_paths = read_u64(&mut r)? as usize;
    let n_times = read_u64(&mut r)? as usize;
    let grid = read_f64s(&mut r, n_times)?;
    let values = read_f64s(&mut r, n_paths * n_times)?;
    let clock = if flags & 1 == 1 { Some(read_f64s(&mut r, n_paths * n_times)?) } else { None };
    let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)
        .map_err(|e| Error::Config(format!("bad sidecar: {e}")))?;
    if side.n_paths != n_paths || side.n_times != n_times {
        return Err(Error::Config("sidecar does not match the trajectory file".into()));
    }
    Ok(TrajectorySet::from_parts(grid, n_paths, values, clock, side.master_seed, side.provenance))
}

#[cfg(test)]
mod tests {
    use super::super::{simulate_nonlocal, SimParams, Start};
    use super::*;
    use crate::bernstein::BernsteinDescriptor;
    use crate::pearson::{make_family, FamilySpec};

    #[test]
    fn round_trip() {
        let f = make_family(FamilySpec::Jacobi { theta: 1.0, a: 0.0, b: 1.0 }).unwrap();
        let d = BernsteinDescriptor::gamma();
        let p = SimParams { n_paths: 64, n_obs: 3, ..SimParams::default() };
        let ts = simulate_nonlocal(&f, &d, Start::Stationary, &p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("paths.nlpt");
        write_nlpt(&ts, &path).unwrap();
        assert_eq!(read_nlpt(&path).unwrap(), ts);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"NLPT");
    }
}
