//! Experiment sweeps over (scenario x method x P^E x target x seed) cells,
//! with deterministic CSV emission and per-curve summaries.
//!
//! Cells sharing a (world, scenario, target, seed) tuple form a comparison
//! group: they share one episode setup (start pose, shortest length, target
//! query, teacher dataset), so method and failure-rate comparisons are
//! paired. Groups run in parallel; rows are sorted before emission, making
//! the CSV bytes a pure function of the configuration.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::episode::{prepare_episode, run_prepared};
use super::{episode_seed, mix, EpisodeResult, EpisodeSpec, EvalError, Method, SimParams};
use crate::perception::{EmbeddingSpace, WorldEmbeddings};
use crate::world::{generate_world, Scenario, WorldGenParams};

/// Full experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub world_seed: u64,
    pub worlds: usize,
    pub targets_per_world: usize,
    pub seeds_per_target: usize,
    pub scenarios: Vec<Scenario>,
    pub methods: Vec<Method>,
    pub pe_values: Vec<f64>,
    pub world_gen: WorldGenParams,
    pub descriptor_dim: usize,
    pub sim: SimParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            world_seed: 42,
            worlds: 4,
            targets_per_world: 5,
            seeds_per_target: 1,
            scenarios: vec![Scenario::ConstrainedStart],
            methods: vec![Method::Proposed, Method::WithoutMerge, Method::Frontier],
            pe_values: vec![0.0],
            world_gen: WorldGenParams::default(),
            descriptor_dim: crate::perception::DEFAULT_DESCRIPTOR_DIM,
            sim: SimParams::default(),
        }
    }
}

/// One CSV row: an experiment cell plus its episode outcome.
#[derive(Clone, Debug)]
pub struct CsvRow {
    pub scenario: Scenario,
    pub method: Method,
    pub pe: f64,
    /// Global target id: `world_index * targets_per_world + local_target`.
    pub target_id: u32,
    pub seed: u32,
    pub result: EpisodeResult,
}

/// Identifies a performance curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveKey {
    pub scenario: Scenario,
    pub method: Method,
    pub pe: f64,
}

/// Aggregates of one curve.
#[derive(Clone, Debug)]
pub struct CurveSummary {
    pub key: CurveKey,
    pub episodes: usize,
    pub mean_spl: f64,
    pub success_rate: f64,
    /// Mean per-target SPL, sorted descending (each curve independently).
    pub per_target_spl: Vec<f64>,
    pub mean_query_bytes: f64,
    pub mean_response_bytes: f64,
}

/// Everything a run produces: the ordered rows, curve summaries, and a
/// count of skipped (errored) cells.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub rows: Vec<CsvRow>,
    pub curves: Vec<CurveSummary>,
    pub skipped: usize,
}

impl RunSummary {
    pub fn curve(&self, scenario: Scenario, method: Method, pe: f64) -> Option<&CurveSummary> {
        self.curves
            .iter()
            .find(|c| c.key.scenario == scenario && c.key.method == method && c.key.pe == pe)
    }

    /// RFC-4180-style CSV with a header row. Floats use Rust's shortest
    /// round-trippable formatting; the output is byte-deterministic.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scenario,method,pe,target_id,seed,success,p,l,spl_term,query_bytes,response_bytes,merges,steps\n",
        );
        for row in &self.rows {
            let r = &row.result;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                row.scenario.name(),
                row.method.name(),
                row.pe,
                row.target_id,
                row.seed,
                r.success as u8,
                r.path_length,
                r.shortest_length,
                r.spl_term(),
                r.query_bytes,
                r.response_bytes,
                r.merges,
                r.steps,
            )
            .unwrap();
        }
        out
    }
}

/// Parses rows back from the CSV text (used by the `spl` subcommand).
pub fn rows_from_csv(text: &str) -> Result<Vec<CsvRow>, EvalError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || EvalError::Config(super::ConfigError::Malformed(i + 1, line.to_string()));
        if fields.len() != 13 {
            return Err(bad());
        }
        let scenario = Scenario::parse(fields[0]).ok_or_else(bad)?;
        let method = Method::parse(fields[1]).ok_or_else(bad)?;
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let parse_u = |s: &str| s.parse::<u64>().map_err(|_| bad());
        rows.push(CsvRow {
            scenario,
            method,
            pe: parse_f(fields[2])?,
            target_id: parse_u(fields[3])? as u32,
            seed: parse_u(fields[4])? as u32,
            result: EpisodeResult {
                success: fields[5] == "1",
                path_length: parse_f(fields[6])?,
                shortest_length: parse_f(fields[7])?,
                steps: parse_u(fields[12])? as u32,
                query_bytes: parse_u(fields[9])?,
                response_bytes: parse_u(fields[10])?,
                merges: parse_u(fields[11])? as u32,
            },
        });
    }
    Ok(rows)
}

/// Builds curve summaries from rows (grouped by scenario, method, pe).
pub fn summarize_rows(rows: &[CsvRow]) -> Vec<CurveSummary> {
    let mut keys: Vec<(Scenario, Method, u64)> = rows
        .iter()
        .map(|r| (r.scenario, r.method, r.pe.to_bits()))
        .collect();
    keys.sort_unstable();
    keys.dedup();

    keys.into_iter()
        .map(|(scenario, method, pe_bits)| {
            let pe = f64::from_bits(pe_bits);
            let members: Vec<&CsvRow> = rows
                .iter()
                .filter(|r| {
                    r.scenario == scenario && r.method == method && r.pe.to_bits() == pe_bits
                })
                .collect();

            let results: Vec<EpisodeResult> = members.iter().map(|r| r.result).collect();
            let mean_spl = super::compute_spl(&results).unwrap_or(0.0);
            let successes = members.iter().filter(|r| r.result.success).count();

            let mut target_ids: Vec<u32> = members.iter().map(|r| r.target_id).collect();
            target_ids.sort_unstable();
            target_ids.dedup();
            let mut per_target_spl: Vec<f64> = target_ids
                .iter()
                .map(|t| {
                    let terms: Vec<f64> = members
                        .iter()
                        .filter(|r| r.target_id == *t)
                        .map(|r| r.result.spl_term())
                        .collect();
                    terms.iter().sum::<f64>() / terms.len() as f64
                })
                .collect();
            per_target_spl.sort_by(|a, b| b.partial_cmp(a).unwrap());

            let n = members.len().max(1) as f64;
            CurveSummary {
                key: CurveKey {
                    scenario,
                    method,
                    pe,
                },
                episodes: members.len(),
                mean_spl,
                success_rate: successes as f64 / n,
                per_target_spl,
                mean_query_bytes: members.iter().map(|r| r.result.query_bytes).sum::<u64>() as f64
                    / n,
                mean_response_bytes: members
                    .iter()
                    .map(|r| r.result.response_bytes)
                    .sum::<u64>() as f64
                    / n,
            }
        })
        .collect()
}

/// Human-readable per-curve report, one line per curve.
pub fn write_curve_report(curves: &[CurveSummary]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<24} {:<10} {:>5} {:>9} {:>9} {:>12} {:>13}",
        "scenario", "method", "pe", "episodes", "mean_spl", "success_rate", "bytes/episode"
    )
    .unwrap();
    for c in curves {
        writeln!(
            out,
            "{:<24} {:<10} {:>5} {:>9} {:>9.4} {:>12.3} {:>13.0}",
            c.key.scenario.name(),
            c.key.method.name(),
            c.key.pe,
            c.episodes,
            c.mean_spl,
            c.success_rate,
            c.mean_query_bytes + c.mean_response_bytes,
        )
        .unwrap();
    }
    out
}

/// Runs the full experiment matrix. Cells that error are logged to stderr
/// and skipped; the run continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, EvalError> {
    let mut world_gen = config.world_gen.clone();
    world_gen.target_count = world_gen.target_count.max(config.targets_per_world);

    // Worlds and their embedding tables are built once and shared.
    let mut worlds = Vec::with_capacity(config.worlds);
    for w in 0..config.worlds {
        let world = generate_world(mix(config.world_seed, w as u64), &world_gen)?;
        let embeddings = WorldEmbeddings::new(&world, EmbeddingSpace::with_dim(config.descriptor_dim));
        worlds.push((world, embeddings));
    }

    // One task per comparison group.
    struct Group {
        world_index: usize,
        scenario: Scenario,
        local_target: u32,
        seed_index: u32,
    }
    let mut groups = Vec::new();
    for world_index in 0..config.worlds {
        for &scenario in &config.scenarios {
            for local_target in 0..config.targets_per_world as u32 {
                for seed_index in 0..config.seeds_per_target as u32 {
                    groups.push(Group {
                        world_index,
                        scenario,
                        local_target,
                        seed_index,
                    });
                }
            }
        }
    }

    let needs_dataset = config.methods.contains(&Method::Proposed);
    let outcomes: Vec<(Vec<CsvRow>, usize)> = groups
        .par_iter()
        .map(|group| {
            let (world, embeddings) = &worlds[group.world_index];
            let seed = episode_seed(
                mix(config.world_seed, group.world_index as u64),
                group.local_target,
                group.scenario,
                group.seed_index,
            );
            let global_target =
                group.world_index as u32 * config.targets_per_world as u32 + group.local_target;

            let setup = match prepare_episode(
                world,
                embeddings,
                &config.sim,
                group.scenario,
                group.local_target,
                seed,
                needs_dataset,
            ) {
                Ok(s) => s,
                Err(err) => {
                    let cells = config.methods.len() * config.pe_values.len();
                    eprintln!(
                        "skipping target {global_target} seed {} ({}): {err}",
                        group.seed_index,
                        group.scenario.name(),
                    );
                    return (Vec::new(), cells);
                }
            };

            let mut rows = Vec::new();
            let mut skipped = 0usize;
            for &method in &config.methods {
                for &pe in &config.pe_values {
                    let spec = EpisodeSpec {
                        scenario: group.scenario,
                        method,
                        pe,
                    };
                    match run_prepared(
                        world,
                        embeddings,
                        &spec,
                        &config.sim,
                        group.local_target,
                        &setup,
                        seed,
                    ) {
                        Ok(result) => rows.push(CsvRow {
                            scenario: group.scenario,
                            method,
                            pe,
                            target_id: global_target,
                            seed: group.seed_index,
                            result,
                        }),
                        Err(err) => {
                            skipped += 1;
                            eprintln!(
                                "skipping cell {}/{}/pe={pe} target {global_target} seed {}: {err}",
                                group.scenario.name(),
                                method.name(),
                                group.seed_index,
                            );
                        }
                    }
                }
            }
            (rows, skipped)
        })
        .collect();

    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for (mut group_rows, group_skipped) in outcomes {
        rows.append(&mut group_rows);
        skipped += group_skipped;
    }
    rows.sort_by(|a, b| {
        (a.scenario, a.method, a.pe.to_bits(), a.target_id, a.seed).cmp(&(
            b.scenario,
            b.method,
            b.pe.to_bits(),
            b.target_id,
            b.seed,
        ))
    });

    let curves = summarize_rows(&rows);
    Ok(RunSummary {
        rows,
        curves,
        skipped,
    })
}
