//! CSV and JSON emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha1::{Digest, Sha1};

use crate::config::ConfigFile;
use crate::error::Result;
use crate::run::{RunConfig, RunOutput, SeriesRow, Snapshot};
use crate::scalar::Scalar;

/// 17 significant digits, enough to round-trip an `f64`.
fn num<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.to_f64_lossy())
}

/// `x,rho_1,...,rho_M` with one row per cell centre.
pub fn snapshot_csv<T: Scalar>(snap: &Snapshot<T>) -> String {
    let m = snap.state.lane_count();
    let mut out = String::from("x");
    for j in 1..=m {
        let _ = write!(out, ",rho_{j}");
    }
    out.push('\n');
    for k in 0..snap.state.n_cells() {
        out.push_str(&num(snap.grid.center(k)));
        for j in 0..m {
            out.push(',');
            out.push_str(&num(snap.state.lane(j)[k]));
        }
        out.push('\n');
    }
    out
}

/// `t,mass_1..mass_M,tv_1..tv_M`.
pub fn timeseries_csv<T: Scalar>(series: &[SeriesRow<T>]) -> String {
    let m = series.first().map_or(0, |r| r.mass.len());
    let mut out = String::from("t");
    for j in 1..=m {
        let _ = write!(out, ",mass_{j}");
    }
    for j in 1..=m {
        let _ = write!(out, ",tv_{j}");
    }
    out.push('\n');
    for row in series {
        out.push_str(&num(row.t));
        for v in row.mass.iter().chain(&row.tv) {
            out.push(',');
            out.push_str(&num(*v));
        }
        out.push('\n');
    }
    out
}

/// Hash git assigns to a blob with these contents.
pub fn git_blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn emit_snapshot_csv<T: Scalar>(snap: &Snapshot<T>, path: impl AsRef<Path>) -> Result<String> {
    write_hashed(path.as_ref(), snapshot_csv(snap).as_bytes())
}

pub fn emit_timeseries_csv<T: Scalar>(output: &RunOutput<T>, path: impl AsRef<Path>) -> Result<String> {
    write_hashed(path.as_ref(), timeseries_csv(&output.series).as_bytes())
}

fn write_hashed(path: &Path, bytes: &[u8]) -> Result<String> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(git_blob_hash(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub file: String,
    pub git_blob_sha1: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub name: String,
    pub tool_version: &'static str,
    pub config: ConfigFile,
    pub steps: usize,
    pub max_courant: f64,
    pub snapshot_times: Vec<f64>,
    pub files: Vec<FileEntry>,
    /// Hash over the file hashes, in listing order.
    pub content_hash: String,
}

fn stem(t: f64) -> String {
    format!("t{t:.4}").replace('.', "p")
}

/// Writes snapshots, the time series, the resolved configuration and a
/// metadata file into `dir`. Returns the paths written.
pub fn write_run(config: &RunConfig<f64>, output: &RunOutput<f64>, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut paths = Vec::new();
    let mut record = |name: String, hash: String, paths: &mut Vec<PathBuf>| {
        paths.push(dir.join(&name));
        files.push(FileEntry {
            file: name,
            git_blob_sha1: hash,
        });
    };
    for snap in &output.snapshots {
        let name = format!("{}_{}.csv", output.name, stem(snap.t()));
        let hash = emit_snapshot_csv(snap, dir.join(&name))?;
        record(name, hash, &mut paths);
    }
    let name = format!("{}_series.csv", output.name);
    let hash = emit_timeseries_csv(output, dir.join(&name))?;
    record(name, hash, &mut paths);

    let echo = ConfigFile::from_run(config);
    let name = format!("{}_config.toml", output.name);
    let hash = write_hashed(&dir.join(&name), echo.to_toml()?.as_bytes())?;
    record(name, hash, &mut paths);

    let joined: String = files
        .iter()
        .map(|f| format!("{}  {}\n", f.git_blob_sha1, f.file))
        .collect();
    let meta = RunMetadata {
        name: output.name.clone(),
        tool_version: env!("CARGO_PKG_VERSION"),
        config: echo,
        steps: output.steps,
        max_courant: output.max_courant,
        snapshot_times: output.snapshots.iter().map(|s| s.t()).collect(),
        content_hash: git_blob_hash(joined.as_bytes()),
        files,
    };
    let path = dir.join(format!("{}_meta.json", output.name));
    fs::write(&path, serde_json::to_string_pretty(&meta)? + "\n")?;
    paths.push(path);
    Ok(paths)
}
