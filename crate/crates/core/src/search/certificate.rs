use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rules::{Mode, PruneReason};
use crate::error::CertificateError;

pub const SCHEMA_VERSION: u32 = 1;

/// Survivors listed in a certificate are capped at this many records.
pub const MAX_LISTED_SURVIVORS: usize = 10_000;

/// Every field that influences the outcome of a campaign. Its canonical JSON
/// is what the config hash covers; parallelism is deliberately absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub mode: Mode,
    pub r1: f64,
    pub r2: f64,
    pub n0: u32,
    pub depth_cap: u32,
    pub rho: f64,
    pub region_max_depth: u32,
    pub region_min_half_side: f64,
    pub center_check_n: Option<u32>,
    pub delta_fp: f64,
    pub lemma15_large_arc: bool,
    pub cube_budget: u64,
}

impl ConfigEcho {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config echo serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub n: u32,
    pub cubes_in: u64,
    pub pruned: BTreeMap<PruneReason, u64>,
    pub subdivided: u64,
    /// Center round only: cubes no exact check could discharge.
    pub unresolved: u64,
    /// Children handed to the next round.
    pub cubes_out: u64,
}

impl RoundStats {
    pub fn new(n: u32) -> Self {
        Self {
            n,
            cubes_in: 0,
            pruned: PruneReason::ALL.iter().map(|&r| (r, 0)).collect(),
            subdivided: 0,
            unresolved: 0,
            cubes_out: 0,
        }
    }

    pub fn pruned_total(&self) -> u64 {
        self.pruned.values().sum()
    }

    pub fn is_conserved(&self) -> bool {
        self.cubes_in == self.pruned_total() + self.subdivided + self.unresolved
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Every cube was discharged.
    Empty,
    /// The center round left cubes no check could discharge.
    Exhausted,
    /// The round budget ran out with cubes still to subdivide.
    DepthCapReached,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Survivors {
    pub count: u64,
    /// `k n p1 .. pk` records, at most [`MAX_LISTED_SURVIVORS`].
    pub cubes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub config_hash: String,
    pub mode: Mode,
    pub r1: f64,
    pub r2: f64,
    pub config: ConfigEcho,
    pub rounds: Vec<RoundStats>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survivors: Option<Survivors>,
    pub wall_seconds: f64,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Copy with the wall time zeroed, for determinism comparisons.
    pub fn without_wall_time(&self) -> Certificate {
        Certificate { wall_seconds: 0.0, ..self.clone() }
    }

    /// Internal consistency: hash, header echo, per-round conservation,
    /// doubling schedule, chaining of rounds and a verdict the counts support.
    pub fn validate(&self) -> Result<(), CertificateError> {
        let bad = |m: String| Err(CertificateError::Inconsistent(m));
        if self.schema_version != SCHEMA_VERSION {
            return Err(CertificateError::Schema(self.schema_version));
        }
        let expected = self.config.hash();
        if expected != self.config_hash {
            return Err(CertificateError::HashMismatch { expected, found: self.config_hash.clone() });
        }
        if self.config.mode != self.mode || self.config.r1 != self.r1 || self.config.r2 != self.r2 {
            return bad("header disagrees with config echo".into());
        }
        if self.rounds.is_empty() || self.rounds.len() > self.config.depth_cap as usize {
            return bad(format!("{} rounds with depth cap {}", self.rounds.len(), self.config.depth_cap));
        }
        let k = self.mode.k() as u64;
        let first_in = super::cube::initial_cube_count(k as usize, self.config.n0);
        if self.rounds[0].cubes_in != first_in {
            return bad(format!("round 0 takes {} cubes, expected {first_in}", self.rounds[0].cubes_in));
        }
        for (t, r) in self.rounds.iter().enumerate() {
            if r.n != self.config.n0 << t {
                return bad(format!("round {t} at n = {}, expected {}", r.n, self.config.n0 << t));
            }
            if !r.is_conserved() {
                return bad(format!("round {t} does not conserve cubes"));
            }
            if r.pruned.len() != PruneReason::ALL.len() {
                return bad(format!("round {t} lacks prune reasons"));
            }
            if r.cubes_out < r.subdivided || r.cubes_out > r.subdivided << k {
                return bad(format!("round {t}: {} children from {} subdivided", r.cubes_out, r.subdivided));
            }
            if let Some(next) = self.rounds.get(t + 1) {
                if next.cubes_in != r.cubes_out {
                    return bad(format!("round {} input does not match round {t} output", t + 1));
                }
            }
            let center = self.config.center_check_n == Some(r.n) && self.mode == Mode::GridC;
            if center && (r.subdivided != 0 || t + 1 != self.rounds.len()) {
                return bad(format!("center round {t} must be final and not subdivide"));
            }
            if !center && r.unresolved != 0 {
                return bad(format!("round {t} is not a center round but has unresolved cubes"));
            }
        }
        let last = self.rounds.last().expect("non-empty");
        let survivors = self.survivors.as_ref().map(|s| s.count);
        let ok = match self.verdict {
            Verdict::Empty => last.cubes_out == 0 && last.unresolved == 0 && survivors.is_none(),
            Verdict::Exhausted => last.unresolved > 0 && survivors == Some(last.unresolved),
            Verdict::DepthCapReached => {
                last.cubes_out > 0
                    && last.unresolved == 0
                    && (self.rounds.len() == self.config.depth_cap as usize || last.cubes_out > self.config.cube_budget)
                    && survivors == Some(last.cubes_out)
            }
        };
        if !ok {
            return bad(format!("verdict {:?} not supported by final round counts", self.verdict));
        }
        if let Some(s) = &self.survivors {
            if s.cubes.len() as u64 > s.count.min(MAX_LISTED_SURVIVORS as u64) {
                return bad("survivor list longer than its count".into());
            }
        }
        Ok(())
    }
}
