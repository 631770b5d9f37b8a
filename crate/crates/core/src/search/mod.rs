//! Branch-and-bound over angle cubes: enumeration, pruning rules, the
//! doubling schedule, checkpoints, certificates and soundness sampling.

pub mod audit;
pub mod campaign;
pub mod certificate;
pub mod checkpoint;
pub mod cube;
pub mod rules;

pub use audit::{check_soundness, AuditSample, SoundnessReport};
pub use campaign::{run_campaign, run_campaign_with, Campaign, CampaignConfig, CampaignOutcome, RunOptions};
pub use certificate::{Certificate, ConfigEcho, RoundStats, Survivors, Verdict};
pub use checkpoint::Checkpoint;
pub use cube::{initial_cube_count, initial_cubes, AngleCube};
pub use rules::{prune_grid_b, prune_grid_c, prune_lemma15, CubeOutcome, Mode, PruneReason, RoundTable, RuleSet, TAU};
