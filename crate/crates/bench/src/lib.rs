//! Benchmark fixtures shared by the criterion targets.

use transversal_core::search::{AngleCube, CampaignConfig};

/// A small grid (b) campaign that finishes in well under a second.
pub fn small_grid_b() -> CampaignConfig {
    CampaignConfig { n0: 24, depth_cap: 2, ..CampaignConfig::grid_b(1.65, 1.65) }
}

/// The first `count` initial cubes of a `k`-dimensional enumeration.
pub fn cubes(k: usize, n0: u32, count: usize) -> Vec<AngleCube> {
    transversal_core::search::initial_cubes(k, n0).take(count).collect()
}
