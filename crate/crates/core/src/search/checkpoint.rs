//! Round-boundary checkpoints: a short `#` header followed by one
//! `k n p1 .. pk` record per pending cube.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::certificate::RoundStats;
use super::cube::AngleCube;
use crate::error::SearchError;

const MAGIC: &str = "# transversal-checkpoint v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config_hash: String,
    /// Index of the next round to run.
    pub round: u32,
    pub rounds: Vec<RoundStats>,
    pub cubes: Vec<AngleCube>,
}

fn io_err(path: &Path, source: std::io::Error) -> SearchError {
    SearchError::Io { path: path.to_path_buf(), source }
}

fn corrupt(path: &Path, reason: impl Into<String>) -> SearchError {
    SearchError::Checkpoint { path: path.to_path_buf(), reason: reason.into() }
}

impl Checkpoint {
    /// Writes to a sibling temporary file and renames it into place.
    pub fn write(&self, path: &Path) -> Result<(), SearchError> {
        let mut tmp = PathBuf::from(path);
        tmp.as_mut_os_string().push(".tmp");
        let file = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        let mut w = BufWriter::new(file);
        let rounds = serde_json::to_string(&self.rounds).expect("round stats serialize");
        let mut body = || -> std::io::Result<()> {
            writeln!(w, "{MAGIC}")?;
            writeln!(w, "# config_hash {}", self.config_hash)?;
            writeln!(w, "# round {}", self.round)?;
            writeln!(w, "# rounds {rounds}")?;
            for c in &self.cubes {
                writeln!(w, "{c}")?;
            }
            w.flush()
        };
        body().map_err(|e| io_err(&tmp, e))?;
        drop(w);
        fs::rename(&tmp, path).map_err(|e| io_err(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, SearchError> {
        let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let mut header = |key: &str| -> Result<String, SearchError> {
            let line = lines.next().ok_or_else(|| corrupt(path, "truncated header"))?.map_err(|e| io_err(path, e))?;
            if key.is_empty() {
                return if line == MAGIC { Ok(line) } else { Err(corrupt(path, "not a checkpoint file")) };
            }
            line.strip_prefix(&format!("# {key} "))
                .map(str::to_string)
                .ok_or_else(|| corrupt(path, format!("missing `{key}` header")))
        };
        header("")?;
        let config_hash = header("config_hash")?;
        let round = header("round")?.parse().map_err(|_| corrupt(path, "bad round number"))?;
        let rounds =
            serde_json::from_str(&header("rounds")?).map_err(|e| corrupt(path, format!("bad round stats: {e}")))?;
        let mut cubes = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| io_err(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let cube = line.parse().map_err(|e| corrupt(path, format!("record {}: {e}", i + 1)))?;
            cubes.push(cube);
        }
        Ok(Self { config_hash, round, rounds, cubes })
    }
}
