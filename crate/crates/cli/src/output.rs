//! File emission with content hashes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use weaktraj::dynamics::{GridRow, JointRow, TrajectoryBundle};

/// Writes files into one directory and remembers their SHA-256.
#[derive(Debug)]
pub struct OutputWriter {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl OutputWriter {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hashes: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.hashes
            .insert(name.to_string(), hex::encode(Sha256::digest(contents)));
        Ok(())
    }

    /// Writes without recording a hash; used for the manifest itself.
    pub fn write_unhashed(&self, name: &str, contents: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)
    }

    pub fn hashes(&self) -> &BTreeMap<String, String> {
        &self.hashes
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

pub fn trajectories_csv(bundle: &TrajectoryBundle) -> String {
    let mut s = String::from("traj_id,t,r,r_star,v,j0,j1,status\n");
    for traj in &bundle.trajectories {
        let status = traj.status.label();
        for p in &traj.samples {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                traj.id, p.t, p.r, p.r_star, p.v, p.j0, p.j1, status
            );
        }
    }
    s
}

pub fn density_csv(rows: &[GridRow]) -> String {
    let mut s = String::from("t,r_star,r,j0,j1,v\n");
    for g in rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", g.t, g.r_star, g.r, g.j0, g.j1, g.v);
    }
    s
}

pub fn joint_density_csv(rows: &[JointRow]) -> String {
    let mut s = String::from("t,r1_star,r2_star,density\n");
    for g in rows {
        let _ = writeln!(s, "{},{},{},{}", g.t, g.r1_star, g.r2_star, g.density);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use weaktraj::dynamics::{run_ensemble, EnsembleConfig};
    use weaktraj::geometry::SpacetimeParams;
    use weaktraj::wavefunction::WavepacketSpec;

    #[test]
    fn csv_header_and_round_trip() {
        let s = WavepacketSpec::from_ratio(15.0, 1.0, 1.0).unwrap();
        let cfg = EnsembleConfig {
            n_traj: 2,
            t0: 0.0,
            t1: 0.5,
            n_times: 3,
            ..EnsembleConfig::default()
        };
        let b = run_ensemble(&cfg, &s, &SpacetimeParams::default()).unwrap();
        let csv = trajectories_csv(&b);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "traj_id,t,r,r_star,v,j0,j1,status");
        assert_eq!(lines.len(), 1 + 2 * 3);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(
            fields[3].parse::<f64>().unwrap(),
            b.trajectories[0].samples[0].r_star
        );
        assert_eq!(fields[7], "completed");
    }

    #[test]
    fn writer_hashes_contents() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = OutputWriter::new(dir.path()).unwrap();
        w.write("a.txt", b"abc").unwrap();
        assert_eq!(
            w.hashes()["a.txt"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(fs::read(dir.path().join("a.txt")).unwrap(), b"abc");
    }
}
