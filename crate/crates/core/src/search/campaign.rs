use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::audit::AuditSample;
use super::certificate::{
    Certificate, ConfigEcho, RoundStats, Survivors, Verdict, MAX_LISTED_SURVIVORS, SCHEMA_VERSION,
};
use super::checkpoint::Checkpoint;
use super::cube::{initial_cubes, AngleCube, MAX_RESOLUTION};
use super::rules::{CubeOutcome, Mode, RoundTable, RuleSet, TAU};
use crate::error::SearchError;
use crate::geom::DELTA_FP;
use crate::region::RegionSettings;

/// Cubes evaluated per parallel batch.
const BATCH: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub mode: Mode,
    pub r1: f64,
    pub r2: f64,
    pub n0: u32,
    /// Number of rounds; round `t` runs at `n = 2^t · n0`.
    pub depth_cap: u32,
    pub rho: f64,
    pub region: RegionSettings,
    /// Grid (c) only: resolution of the final center round.
    pub center_check_n: Option<u32>,
    pub delta_fp: f64,
    /// `lemma15` mode: apply the large-arc rule besides the transversal and
    /// John rules. Without it, near-degenerate clustered tuples never resolve.
    pub lemma15_large_arc: bool,
    /// Largest number of cubes a round may hand to the next one; beyond it
    /// the campaign stops as if the depth cap had been reached.
    pub cube_budget: u64,
    /// Worker threads. Has no influence on the result.
    pub threads: usize,
}

/// 16-byte cubes: about 0.5 GB of pending work.
pub const DEFAULT_CUBE_BUDGET: u64 = 30_000_000;

impl CampaignConfig {
    /// `(r1, r2) = (3, 1.62)`, `n0 = 60`, six rounds.
    pub fn lemma15() -> Self {
        Self::base(Mode::Lemma15, 3.0, 1.62, 60, 6)
    }

    /// `n0 = 120`, five rounds.
    pub fn grid_b(r1: f64, r2: f64) -> Self {
        Self::base(Mode::GridB, r1, r2, 120, 5)
    }

    /// `n0 = 120`, five rounds, the last of them the center round at 1920.
    pub fn grid_c(r1: f64, r2: f64) -> Self {
        Self { center_check_n: Some(1920), ..Self::base(Mode::GridC, r1, r2, 120, 5) }
    }

    fn base(mode: Mode, r1: f64, r2: f64, n0: u32, depth_cap: u32) -> Self {
        Self {
            mode,
            r1,
            r2,
            n0,
            depth_cap,
            rho: TAU,
            region: RegionSettings::default_for(r1),
            center_check_n: None,
            delta_fp: DELTA_FP,
            lemma15_large_arc: true,
            cube_budget: DEFAULT_CUBE_BUDGET,
            threads: 1,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let err = |m: String| Err(SearchError::Config(m));
        if !(self.r1.is_finite() && self.r2.is_finite() && self.r1 >= self.r2 && self.r2 > 0.0) {
            return err(format!("need r1 >= r2 > 0, got r1 = {}, r2 = {}", self.r1, self.r2));
        }
        if self.n0 < 6 || !self.n0.is_multiple_of(6) {
            return err(format!("n0 must be a positive multiple of 6, got {}", self.n0));
        }
        if self.depth_cap == 0 || self.depth_cap > 16 {
            return err(format!("depth cap must be in 1..=16, got {}", self.depth_cap));
        }
        if (self.n0 as u64) << (self.depth_cap - 1) > MAX_RESOLUTION as u64 {
            return err(format!("n0 · 2^(cap − 1) exceeds {MAX_RESOLUTION}"));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return err(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.delta_fp >= 0.0 && self.delta_fp < 1e-3) {
            return err(format!("delta_fp must be in [0, 1e-3), got {}", self.delta_fp));
        }
        if self.cube_budget == 0 {
            return err("cube budget must be positive".into());
        }
        if self.threads == 0 {
            return err("threads must be at least 1".into());
        }
        if self.region.max_depth > 20 || self.region.min_half_side.is_nan() || self.region.min_half_side < 0.0 {
            return err("region depth must be at most 20 with a non-negative cell floor".into());
        }
        match (self.mode, self.center_check_n) {
            (Mode::GridC, Some(c)) => {
                let aligned = c >= self.n0 && c % self.n0 == 0 && (c / self.n0).is_power_of_two();
                if !aligned {
                    return err(format!("center round n = {c} is not n0 · 2^t"));
                }
            }
            (Mode::GridC, None) => return err("grid-c needs a center round resolution".into()),
            (_, Some(_)) => return err("center rounds exist only in grid-c".into()),
            (_, None) => {}
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            mode: self.mode,
            r1: self.r1,
            r2: self.r2,
            n0: self.n0,
            depth_cap: self.depth_cap,
            rho: self.rho,
            region_max_depth: self.region.max_depth,
            region_min_half_side: self.region.min_half_side,
            center_check_n: self.center_check_n,
            delta_fp: self.delta_fp,
            lemma15_large_arc: self.lemma15_large_arc,
            cube_budget: self.cube_budget,
        }
    }

    pub fn hash(&self) -> String {
        self.echo().hash()
    }

    pub fn rules(&self) -> RuleSet {
        RuleSet {
            mode: self.mode,
            r1: self.r1,
            r2: self.r2,
            rho: self.rho,
            region: self.region,
            delta: self.delta_fp,
            center_check_n: self.center_check_n,
            lemma15_large_arc: self.lemma15_large_arc,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Written after every round that leaves work pending.
    pub checkpoint: Option<PathBuf>,
    /// Start from `checkpoint` instead of the initial cubes.
    pub resume: bool,
    /// Size of the overall audit sample of pruned cubes.
    pub audit_cubes: usize,
    /// Extra sampled cubes per prune reason.
    pub audit_per_reason: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { checkpoint: None, resume: false, audit_cubes: 10_000, audit_per_reason: 500 }
    }
}

#[derive(Debug)]
pub struct CampaignOutcome {
    pub certificate: Certificate,
    /// Pruned cubes of the rounds run in this session.
    pub audit: AuditSample,
}

enum Pending {
    Initial,
    Cubes(Vec<AngleCube>),
}

/// A campaign advanced one round at a time.
pub struct Campaign {
    cfg: CampaignConfig,
    rules: RuleSet,
    pool: rayon::ThreadPool,
    pending: Pending,
    rounds: Vec<RoundStats>,
    unresolved: Vec<AngleCube>,
    verdict: Option<Verdict>,
    audit: AuditSample,
    started: Instant,
}

impl Campaign {
    pub fn new(cfg: CampaignConfig, opts: &RunOptions) -> Result<Self, SearchError> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| SearchError::ThreadPool(e.to_string()))?;
        Ok(Self {
            rules: cfg.rules(),
            cfg,
            pool,
            pending: Pending::Initial,
            rounds: Vec::new(),
            unresolved: Vec::new(),
            verdict: None,
            audit: AuditSample::new(opts.audit_cubes, opts.audit_per_reason),
            started: Instant::now(),
        })
    }

    /// Continues from a checkpoint written by a campaign with the same
    /// config hash.
    pub fn resume(cfg: CampaignConfig, opts: &RunOptions, ck: Checkpoint) -> Result<Self, SearchError> {
        let mut c = Self::new(cfg, opts)?;
        let expected = c.cfg.hash();
        if ck.config_hash != expected {
            return Err(SearchError::CheckpointMismatch { expected, found: ck.config_hash });
        }
        let bad =
            |reason: String| SearchError::Checkpoint { path: opts.checkpoint.clone().unwrap_or_default(), reason };
        let round = ck.round;
        if round as usize != ck.rounds.len() || round == 0 || round >= c.cfg.depth_cap {
            return Err(bad(format!("round {round} inconsistent with {} recorded rounds", ck.rounds.len())));
        }
        let n = c.cfg.n0 << round;
        if ck.cubes.iter().any(|q| q.n() != n || q.k() != c.cfg.mode.k()) {
            return Err(bad(format!("records not at resolution {n}")));
        }
        if ck.rounds.last().map(|r| r.cubes_out) != Some(ck.cubes.len() as u64) {
            return Err(bad("record count disagrees with the last round".into()));
        }
        c.rounds = ck.rounds;
        c.pending = Pending::Cubes(ck.cubes);
        Ok(c)
    }

    pub fn is_finished(&self) -> bool {
        self.verdict.is_some()
    }

    pub fn rounds(&self) -> &[RoundStats] {
        &self.rounds
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    /// Runs the next round. Returns `false` once the campaign has a verdict.
    pub fn step(&mut self) -> bool {
        if self.verdict.is_some() {
            return false;
        }
        let t = self.rounds.len() as u32;
        let n = self.cfg.n0 << t;
        let table = RoundTable::new(n);
        let mut stats = RoundStats::new(n);
        let mut next = Vec::new();
        let budget = self.cfg.cube_budget;
        let mut children = 0u64;

        let source: Box<dyn Iterator<Item = AngleCube>> = match std::mem::replace(&mut self.pending, Pending::Initial) {
            Pending::Initial => Box::new(initial_cubes(self.cfg.mode.k(), self.cfg.n0)),
            Pending::Cubes(v) => Box::new(v.into_iter()),
        };
        let mut source = source.peekable();
        let mut batch = Vec::with_capacity(BATCH);
        while source.peek().is_some() {
            batch.clear();
            batch.extend(source.by_ref().take(BATCH));
            let rules = &self.rules;
            let table = &table;
            let outcomes: Vec<CubeOutcome> =
                self.pool.install(|| batch.par_iter().map(|c| rules.evaluate(c, table)).collect());
            for (cube, outcome) in batch.iter().zip(outcomes) {
                stats.cubes_in += 1;
                match outcome {
                    CubeOutcome::Pruned(r) => {
                        *stats.pruned.get_mut(&r).expect("all reasons present") += 1;
                        self.audit.offer(r, *cube);
                    }
                    CubeOutcome::Subdivide => {
                        stats.subdivided += 1;
                        let kids = cube.subdivide();
                        children += kids.len() as u64;
                        if children <= budget {
                            next.extend(kids);
                        } else if next.len() < MAX_LISTED_SURVIVORS {
                            next.extend(kids.into_iter().take(MAX_LISTED_SURVIVORS - next.len()));
                        }
                    }
                    CubeOutcome::Unresolved => {
                        stats.unresolved += 1;
                        self.unresolved.push(*cube);
                    }
                }
            }
        }
        stats.cubes_out = children;
        let unresolved = stats.unresolved;
        self.rounds.push(stats);

        self.verdict = if unresolved > 0 {
            Some(Verdict::Exhausted)
        } else if next.is_empty() {
            Some(Verdict::Empty)
        } else if self.rounds.len() as u32 == self.cfg.depth_cap || children > budget {
            Some(Verdict::DepthCapReached)
        } else {
            None
        };
        self.pending = Pending::Cubes(next);
        self.verdict.is_none()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let cubes = match &self.pending {
            Pending::Cubes(v) => v.clone(),
            Pending::Initial => Vec::new(),
        };
        Checkpoint { config_hash: self.cfg.hash(), round: self.rounds.len() as u32, rounds: self.rounds.clone(), cubes }
    }

    /// Runs any remaining rounds and assembles the certificate.
    pub fn finish(mut self) -> CampaignOutcome {
        while self.step() {}
        let verdict = self.verdict.expect("finished campaign has a verdict");
        let out = self.rounds.last().map_or(0, |r| r.cubes_out);
        let listed = |v: &[AngleCube], count: u64| Survivors {
            count,
            cubes: v.iter().take(MAX_LISTED_SURVIVORS).map(|c| c.to_string()).collect(),
        };
        let survivors = match (verdict, &self.pending) {
            (Verdict::Exhausted, _) => Some(listed(&self.unresolved, self.unresolved.len() as u64)),
            (Verdict::DepthCapReached, Pending::Cubes(v)) => Some(listed(v, out)),
            _ => None,
        };
        let certificate = Certificate {
            schema_version: SCHEMA_VERSION,
            config_hash: self.cfg.hash(),
            mode: self.cfg.mode,
            r1: self.cfg.r1,
            r2: self.cfg.r2,
            config: self.cfg.echo(),
            rounds: self.rounds,
            verdict,
            survivors,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        };
        CampaignOutcome { certificate, audit: self.audit }
    }
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<Certificate, SearchError> {
    Ok(run_campaign_with(cfg, &RunOptions { audit_cubes: 0, audit_per_reason: 0, ..RunOptions::default() })?
        .certificate)
}

/// Full campaign with optional checkpointing and resume.
pub fn run_campaign_with(cfg: &CampaignConfig, opts: &RunOptions) -> Result<CampaignOutcome, SearchError> {
    let mut campaign = match (&opts.checkpoint, opts.resume) {
        (Some(path), true) => Campaign::resume(cfg.clone(), opts, Checkpoint::read(path)?)?,
        (None, true) => return Err(SearchError::Config("resume requires a checkpoint path".into())),
        _ => Campaign::new(cfg.clone(), opts)?,
    };
    while campaign.step() {
        if let Some(path) = &opts.checkpoint {
            campaign.checkpoint().write(path)?;
        }
    }
    Ok(campaign.finish())
}
