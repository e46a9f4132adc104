//! Path export: CSV for plotting and a compact binary frame format for
//! lossless archival (documented in docs/path-frames.md).
//!
//! CSV uses '.' decimals and 17 significant digits, so doubles survive a
//! round trip bit-exactly and output is locale-independent.

use std::io::{self, Read, Write};

use super::path::PathSample;
use crate::scalar::Scalar;

/// 17-significant-digit scientific form; parses back to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// CSV header + one row per (path, time index):
/// path_id,t,Z_1..Z_d,l,L_1..L_d,stopped_flag
pub fn write_paths_csv<F: Scalar, W: Write>(w: &mut W, paths: &[PathSample<F>]) -> io::Result<()> {
    let d = paths.first().map_or(0, |p| p.dim);
    let mut header = String::from("path_id,t");
    for i in 1..=d {
        header.push_str(&format!(",Z_{i}"));
    }
    header.push_str(",l");
    for i in 1..=d {
        header.push_str(&format!(",L_{i}"));
    }
    header.push_str(",stopped_flag");
    writeln!(w, "{header}")?;
    for p in paths {
        for k in 0..=p.n_steps() {
            let stopped = p.tau_v.map_or(false, |t| k >= t);
            let mut row = format!("{},{}", p.path_id, fmt_f64(p.time(k).to_f64_c()));
            for &z in p.state(k) {
                row.push(',');
                row.push_str(&fmt_f64(z.to_f64_c()));
            }
            row.push(',');
            row.push_str(&fmt_f64(p.local_time[k].to_f64_c()));
            for &lv in p.reflection_at(k) {
                row.push(',');
                row.push_str(&fmt_f64(lv.to_f64_c()));
            }
            row.push(',');
            row.push_str(if stopped { "1" } else { "0" });
            writeln!(w, "{row}")?;
        }
    }
    Ok(())
}

/// Parsed CSV rows regrouped per path: (path_id, states, local_time,
/// reflection, stopped flags). The CSV format intentionally carries only the
/// spec'd columns; seeds and per-face local times live in the binary frames.
pub struct CsvPaths {
    pub dim: usize,
    pub paths: Vec<(u64, Vec<f64>, Vec<f64>, Vec<f64>, Vec<bool>)>,
}

pub fn read_paths_csv<R: Read>(r: &mut R) -> io::Result<CsvPaths> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty csv"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let d = cols.iter().filter(|c| c.starts_with("Z_")).count();
    let mut paths: Vec<(u64, Vec<f64>, Vec<f64>, Vec<f64>, Vec<bool>)> = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 * d + 4 {
            return Err(bad("wrong column count"));
        }
        let id: u64 = fields[0].parse().map_err(|_| bad("bad path id"))?;
        let parse = |s: &str| s.parse::<f64>().map_err(|_| bad("bad float"));
        if paths.last().map_or(true, |p| p.0 != id) {
            paths.push((id, Vec::new(), Vec::new(), Vec::new(), Vec::new()));
        }
        let entry = paths.last_mut().unwrap();
        for f in &fields[2..2 + d] {
            entry.1.push(parse(f)?);
        }
        entry.2.push(parse(fields[2 + d])?);
        for f in &fields[3 + d..3 + 2 * d] {
            entry.3.push(parse(f)?);
        }
        entry.4.push(fields[2 * d + 3] == "1");
    }
    Ok(CsvPaths { dim: d, paths })
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

const FRAME_MAGIC: &[u8; 4] = b"RLPF";
const FRAME_VERSION: u32 = 1;

/// Binary frames: magic, version, path count, then per path a fixed header
/// (id, seed, dim, faces, steps, dt, tau_v) followed by little-endian f64
/// arrays for states, local time, reflection term and per-face local times.
pub fn write_frames<F: Scalar, W: Write>(w: &mut W, paths: &[PathSample<F>]) -> io::Result<()> {
    w.write_all(FRAME_MAGIC)?;
    w.write_all(&FRAME_VERSION.to_le_bytes())?;
    w.write_all(&(paths.len() as u64).to_le_bytes())?;
    for p in paths {
        let m = p.face_local_time.as_ref().map_or(0usize, |f| f.len() / (p.n_steps() + 1));
        w.write_all(&p.path_id.to_le_bytes())?;
        w.write_all(&p.rng_seed.to_le_bytes())?;
        w.write_all(&(p.dim as u32).to_le_bytes())?;
        w.write_all(&(m as u32).to_le_bytes())?;
        w.write_all(&(p.n_steps() as u64).to_le_bytes())?;
        w.write_all(&p.dt.to_f64_c().to_le_bytes())?;
        let tau: i64 = p.tau_v.map_or(-1, |t| t as i64);
        w.write_all(&tau.to_le_bytes())?;
        for &v in &p.states {
            w.write_all(&v.to_f64_c().to_le_bytes())?;
        }
        for &v in &p.local_time {
            w.write_all(&v.to_f64_c().to_le_bytes())?;
        }
        for &v in &p.reflection {
            w.write_all(&v.to_f64_c().to_le_bytes())?;
        }
        if let Some(fl) = &p.face_local_time {
            for &v in fl {
                w.write_all(&v.to_f64_c().to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_frames<R: Read>(r: &mut R) -> io::Result<Vec<PathSample<f64>>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FRAME_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = read_u32(r)?;
    if version != FRAME_VERSION {
        return Err(bad("unsupported frame version"));
    }
    let count = read_u64(r)?;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let path_id = read_u64(r)?;
        let rng_seed = read_u64(r)?;
        let dim = read_u32(r)? as usize;
        let m = read_u32(r)? as usize;
        let n = read_u64(r)? as usize;
        let dt = read_f64(r)?;
        let tau = read_i64(r)?;
        let states = read_f64_vec(r, (n + 1) * dim)?;
        let local_time = read_f64_vec(r, n + 1)?;
        let reflection = read_f64_vec(r, (n + 1) * dim)?;
        let face_local_time = if m > 0 { Some(read_f64_vec(r, (n + 1) * m)?) } else { None };
        out.push(PathSample {
            path_id,
            rng_seed,
            dim,
            dt,
            states,
            local_time,
            reflection,
            face_local_time,
            tau_v: (tau >= 0).then_some(tau as usize),
        });
    }
    Ok(out)
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_i64<R: Read>(r: &mut R) -> io::Result<i64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(i64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_f64_vec<R: Read>(r: &mut R, len: usize) -> io::Result<Vec<f64>> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(read_f64(r)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::model::DiffusionSpec;
    use crate::sim::{simulate_ensemble, SimOptions};

    fn sample_paths() -> Vec<PathSample<f64>> {
        let domain: Domain<f64> = Domain::orthant(2);
        let spec = DiffusionSpec::standard(2, vec![0.1, 0.1]);
        simulate_ensemble(&domain, &spec, SimOptions::new(0.02, 0.002), 3, 5).unwrap()
    }

    #[test]
    fn csv_round_trip_exact() {
        let paths = sample_paths();
        let mut buf = Vec::new();
        write_paths_csv(&mut buf, &paths).unwrap();
        let parsed = read_paths_csv(&mut buf.as_slice()).unwrap();
        assert_eq!(parsed.dim, 2);
        assert_eq!(parsed.paths.len(), 3);
        for (orig, (_, states, l, refl, _)) in paths.iter().zip(&parsed.paths) {
            assert_eq!(&orig.states, states);
            assert_eq!(&orig.local_time, l);
            assert_eq!(&orig.reflection, refl);
        }
    }

    #[test]
    fn frames_round_trip_exact() {
        let paths = sample_paths();
        let mut buf = Vec::new();
        write_frames(&mut buf, &paths).unwrap();
        let parsed = read_frames(&mut buf.as_slice()).unwrap();
        assert_eq!(paths, parsed);
    }

    #[test]
    fn fmt_preserves_doubles() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
