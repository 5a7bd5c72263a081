//! Episode orchestration, experiment sweeps, SPL computation, and CSV
//! emission.
//!
//! Episodes are mutually independent given their derived seeds; the
//! experiment runner executes them in parallel and orders results
//! deterministically before emitting CSV, so a fixed configuration always
//! produces byte-identical output.

mod config;
mod episode;
mod experiment;

pub use config::{default_config_text, parse_config, ConfigError};
pub use episode::{
    prepare_episode, run_episode, run_prepared, EpisodeError, EpisodeSetup, SimParams,
};
pub use experiment::{
    rows_from_csv, run_experiment, summarize_rows, write_curve_report, CsvRow, CurveKey,
    CurveSummary, ExperimentConfig, RunSummary,
};

use thiserror::Error;

use crate::world::{Scenario, TeacherWalkParams};

/// The three compared methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    /// Full pipeline: own map plus teacher map merged at localization events.
    Proposed,
    /// Object-map scoring from the student's own observations only.
    WithoutMerge,
    /// Random frontier selection, no object-map scoring.
    Frontier,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::WithoutMerge => "w/o_merge",
            Method::Frontier => "frontier",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "proposed" => Some(Method::Proposed),
            "w/o_merge" | "wo_merge" => Some(Method::WithoutMerge),
            "frontier" => Some(Method::Frontier),
            _ => None,
        }
    }
}

/// One experiment cell: which scenario, method, and failure rate an episode
/// runs under.
#[derive(Clone, Copy, Debug)]
pub struct EpisodeSpec {
    pub scenario: Scenario,
    pub method: Method,
    pub pe: f64,
}

/// The outcome of one episode: everything SPL and the byte accounting need.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeResult {
    pub success: bool,
    /// Path length actually traveled, meters.
    pub path_length: f64,
    /// Shortest path length from the start to the nearest pose that can
    /// detect the target, meters.
    pub shortest_length: f64,
    pub steps: u32,
    pub query_bytes: u64,
    pub response_bytes: u64,
    pub merges: u32,
}

impl EpisodeResult {
    /// The per-episode SPL term `s * l / max(p, l)`, or 0 for failures.
    pub fn spl_term(&self) -> f64 {
        if !self.success || self.shortest_length <= 0.0 {
            return 0.0;
        }
        self.success as u8 as f64 * self.shortest_length
            / self.path_length.max(self.shortest_length)
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no episodes with a positive shortest-path length")]
    NoEpisodes,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("world generation failed: {0}")]
    WorldGen(#[from] crate::world::WorldGenError),
}

/// Mean SPL over the episode set. Episodes with a non-positive shortest
/// length are excluded (callers log them); an empty effective set is an
/// error.
pub fn compute_spl(results: &[EpisodeResult]) -> Result<f64, EvalError> {
    let mut n = 0usize;
    let mut sum = 0.0f64;
    for r in results {
        if r.shortest_length <= 0.0 {
            continue;
        }
        n += 1;
        sum += r.spl_term();
    }
    if n == 0 {
        return Err(EvalError::NoEpisodes);
    }
    Ok(sum / n as f64)
}

pub(crate) fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one episode. Deliberately independent of method and failure
/// rate so that method and P^E comparisons are paired: the same start pose,
/// teacher walk, and draw sequences underlie every cell of a comparison.
pub fn episode_seed(world_seed: u64, target_id: u32, scenario: Scenario, seed_index: u32) -> u64 {
    let s = match scenario {
        Scenario::ConstrainedStart => 1u64,
        Scenario::ConstrainedStartGoal => 2u64,
    };
    mix(mix(world_seed, 0x45C8_17A3), mix(target_id as u64, s << 32 | seed_index as u64))
}

/// Default teacher walk used by the harness.
pub fn default_walk() -> TeacherWalkParams {
    TeacherWalkParams::default()
}
