//! Single-episode execution: setup (start pose, shortest length, target
//! query, teacher dataset) and the student's observe/plan/act loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{mix, EpisodeResult, EpisodeSpec, Method};
use crate::grid::{cell_to_world, pose_to_place_class, CellIndex, GridSpec, Pose2D, ScoredGrid};
use crate::perception::{
    embed_visible, similarity, LocalizationModel, TeacherDataset, ViewDescriptor, WorldEmbeddings,
};
use crate::planner::{
    frontier_cells, select_subgoal, LocalPlanner, LocalStep, ObstacleMap, Subgoal, SubgoalScorer,
    TerminalReason, VisitedMask,
};
use crate::protocol::{
    decode_query, decode_response, encode_query, encode_response, merge_maps, proxy_handle_query,
    ByteLedger, LocalizationQuery, ProtocolError, ProxyConfig,
};
use crate::world::{
    bfs_distance_field, detect_target, detection_cells, generate_teacher_trajectory, step_agent,
    AgentState, FovModel, Scenario, TargetId, TeacherWalkParams, World, WorldError,
};

/// Episode-level knobs shared by every method.
#[derive(Clone, Copy, Debug)]
pub struct SimParams {
    pub fov: FovModel,
    /// Maximum number of agent motions before the episode fails.
    pub step_budget: u32,
    /// Spacing of simulated observation waypoints along candidate paths.
    pub waypoint_spacing: f64,
    /// Object-map sparsity threshold.
    pub sparsity_theta: f64,
    /// Outlier-rejection threshold on the rank-1 likelihood.
    pub tau: f64,
    /// Hypotheses per localization response.
    pub hypothesis_count: usize,
    /// Teacher coverage-walk parameters.
    pub teacher_walk: TeacherWalkParams,
    /// Dataset records are sampled every this many trajectory poses.
    pub record_interval: usize,
    /// Revisit-exclusion radius, meters.
    pub exclusion_radius: f64,
    /// Student start distance from the target, meters (geodesic).
    pub student_start_distance: f64,
    /// Safety bound on global planning events.
    pub max_global_events: u32,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            fov: FovModel::default(),
            step_budget: 2500,
            waypoint_spacing: 0.5,
            sparsity_theta: crate::perception::DEFAULT_SPARSITY_THETA,
            tau: 0.0,
            hypothesis_count: 5,
            teacher_walk: TeacherWalkParams::default(),
            record_interval: 5,
            exclusion_radius: 1.0,
            student_start_distance: 3.2,
            max_global_events: 8192,
        }
    }
}

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("target {0} has no reachable detection pose from the start")]
    NoDetectionPath(TargetId),
    #[error("no free cell available as a student start")]
    NoStudentStart,
}

/// Everything an episode needs before the student starts moving. The
/// teacher dataset is shared across the methods and failure rates of one
/// comparison group.
pub struct EpisodeSetup {
    pub student_start: Pose2D,
    pub shortest_length: f64,
    pub target_query: ViewDescriptor,
    pub dataset: Option<TeacherDataset>,
}

/// Samples the student start: a free cell whose geodesic distance to the
/// target is as close as possible to the configured start distance, with a
/// uniformly random heading.
fn sample_student_start(
    world: &World,
    target_cell: CellIndex,
    distance: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Pose2D, EpisodeError> {
    let spec = world.spec();
    let field = bfs_distance_field(world, target_cell);
    let mut best_err = f64::INFINITY;
    let mut best: Vec<CellIndex> = Vec::new();
    for cell in world.free_cells() {
        let d = field[spec.linear(cell)];
        if d == u32::MAX {
            continue;
        }
        let err = (d as f64 * spec.resolution() - distance).abs();
        if err + 1e-12 < best_err {
            best_err = err;
            best.clear();
            best.push(cell);
        } else if (err - best_err).abs() <= 1e-12 {
            best.push(cell);
        }
    }
    if best.is_empty() {
        return Err(EpisodeError::NoStudentStart);
    }
    let cell = best[rng.gen_range(0..best.len())];
    let (x, y) = cell_to_world(cell, spec);
    let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    Ok(Pose2D::new(x, y, theta))
}

/// Shortest path from the start to the nearest cell from which the target
/// can be detected. This cell set contains every pose a successful episode
/// can end on, so the traveled path length can never beat this.
fn detection_distance(
    world: &World,
    start: CellIndex,
    target: (f64, f64),
    fov: &FovModel,
) -> Result<f64, EpisodeError> {
    let spec = world.spec();
    let field = bfs_distance_field(world, start);
    let mut best = u32::MAX;
    for cell in detection_cells(world, target, fov) {
        best = best.min(field[spec.linear(cell)]);
    }
    if best == u32::MAX {
        return Err(EpisodeError::NoDetectionPath(0));
    }
    Ok(best as f64 * spec.resolution())
}

/// The descriptor standing in for the "target image": the view from the
/// closest detection-capable cell, aimed at the target. Deterministic, so
/// every method and failure rate queries for the same thing.
fn canonical_target_query(
    world: &World,
    target: (f64, f64),
    fov: &FovModel,
    embeddings: &WorldEmbeddings,
) -> Result<ViewDescriptor, EpisodeError> {
    let spec = world.spec();
    let cells = detection_cells(world, target, fov);
    let closest = cells
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = dist2(cell_to_world(*a, spec), target);
            let db = dist2(cell_to_world(*b, spec), target);
            da.partial_cmp(&db).unwrap().then(a.cmp(b))
        })
        .ok_or(EpisodeError::NoDetectionPath(0))?;
    let (x, y) = cell_to_world(closest, spec);
    let aim = (target.1 - y).atan2(target.0 - x);
    Ok(crate::perception::embed_view(
        world,
        &Pose2D::new(x, y, aim),
        fov,
        embeddings,
    ))
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Builds the per-episode setup. `with_dataset` controls whether the
/// teacher walk runs (only methods that query the proxy need it).
pub fn prepare_episode(
    world: &World,
    embeddings: &WorldEmbeddings,
    sim: &SimParams,
    scenario: Scenario,
    target_id: TargetId,
    episode_seed: u64,
    with_dataset: bool,
) -> Result<EpisodeSetup, EpisodeError> {
    let target = world.target_position(target_id)?;
    let target_cell = world.target_cell(target_id)?;

    let mut start_rng = ChaCha8Rng::seed_from_u64(mix(episode_seed, 0xA11CE));
    let student_start =
        sample_student_start(world, target_cell, sim.student_start_distance, &mut start_rng)?;
    let shortest_length = detection_distance(
        world,
        crate::grid::world_to_cell(student_start.position(), world.spec()),
        target,
        &sim.fov,
    )
    .map_err(|_| EpisodeError::NoDetectionPath(target_id))?;
    let target_query = canonical_target_query(world, target, &sim.fov, embeddings)
        .map_err(|_| EpisodeError::NoDetectionPath(target_id))?;

    let dataset = if with_dataset {
        let trajectory = generate_teacher_trajectory(
            world,
            target_id,
            scenario,
            student_start,
            mix(episode_seed, 0x7EAC),
            &sim.fov,
            &sim.teacher_walk,
        )?;
        Some(TeacherDataset::from_trajectory(
            world,
            &trajectory,
            &sim.fov,
            sim.record_interval,
            embeddings,
        ))
    } else {
        None
    };

    Ok(EpisodeSetup {
        student_start,
        shortest_length,
        target_query,
        dataset,
    })
}

/// Dense accumulator for the student's own object map. Contributions are
/// unthresholded here; the sparsity threshold applies when the map is
/// snapshotted for planning, so late contributions can still lift a cell
/// over it.
struct OwnMapAccum {
    spec: GridSpec,
    primary: Vec<f64>,
    secondary: Vec<f64>,
    touched: Vec<CellIndex>,
}

impl OwnMapAccum {
    fn new(spec: GridSpec) -> Self {
        Self {
            spec,
            primary: vec![0.0; spec.cell_count()],
            secondary: vec![0.0; spec.cell_count()],
            touched: Vec::new(),
        }
    }

    fn fold(&mut self, cells: &[CellIndex], score: f64) {
        if score <= 0.0 {
            return;
        }
        for &cell in cells {
            let lin = self.spec.linear(cell);
            if self.primary[lin] == 0.0 && self.secondary[lin] == 0.0 {
                self.touched.push(cell);
            }
            self.primary[lin] = self.primary[lin].max(score);
            self.secondary[lin] += score;
        }
    }

    fn snapshot(&self, theta: f64) -> ScoredGrid {
        let mut grid = ScoredGrid::new(self.spec);
        for &cell in &self.touched {
            let lin = self.spec.linear(cell);
            if self.primary[lin] >= theta {
                grid.fold_cell(cell, self.primary[lin], self.secondary[lin]);
            }
        }
        grid
    }
}

enum Outcome {
    Success,
    OutOfBudget,
    ExplorationComplete,
}

/// Runs one episode end to end: builds the setup (including the teacher
/// dataset when the method queries the proxy) and executes the student
/// loop.
///
/// The student observes at every step, accumulates its own object map,
/// checks the ideal detector, and, under the full pipeline, exchanges a
/// query/response with the teacher proxy at the start and at every reached
/// subgoal, merging accepted responses.
pub fn run_episode(
    world: &World,
    embeddings: &WorldEmbeddings,
    spec: &EpisodeSpec,
    sim: &SimParams,
    target_id: TargetId,
    episode_seed: u64,
) -> Result<EpisodeResult, EpisodeError> {
    let with_dataset = spec.method == Method::Proposed;
    let setup = prepare_episode(
        world,
        embeddings,
        sim,
        spec.scenario,
        target_id,
        episode_seed,
        with_dataset,
    )?;
    run_prepared(world, embeddings, spec, sim, target_id, &setup, episode_seed)
}

/// Runs one episode against an existing setup (shared across the cells of
/// a comparison group).
pub fn run_prepared(
    world: &World,
    embeddings: &WorldEmbeddings,
    spec: &EpisodeSpec,
    sim: &SimParams,
    target_id: TargetId,
    setup: &EpisodeSetup,
    episode_seed: u64,
) -> Result<EpisodeResult, EpisodeError> {
    let wspec = *world.spec();
    let fov = sim.fov;
    let mut result = EpisodeResult {
        success: false,
        path_length: 0.0,
        shortest_length: setup.shortest_length,
        steps: 0,
        query_bytes: 0,
        response_bytes: 0,
        merges: 0,
    };
    if sim.step_budget == 0 {
        return Ok(result);
    }

    let mut agent = AgentState::new(setup.student_start);
    let mut omap = ObstacleMap::new(wspec);
    let mut visited = VisitedMask::new(wspec, sim.exclusion_radius);
    visited.insert(agent.pose.position());
    let mut own = OwnMapAccum::new(wspec);
    let mut teacher_layer = ScoredGrid::new(wspec);
    let mut ledger = ByteLedger::default();
    let mut merges = 0u32;
    let mut loc_model = LocalizationModel::new(spec.pe, mix(episode_seed, 0x10CA));
    let mut frontier_rng = ChaCha8Rng::seed_from_u64(mix(episode_seed, 0xF407));
    let proxy_cfg = ProxyConfig {
        hypothesis_count: sim.hypothesis_count,
        tau: sim.tau,
        sparsity_theta: sim.sparsity_theta,
    };
    let scoring = spec.method != Method::Frontier;

    let mut last_visible = omap.observe(world, &agent.pose, &fov);
    if scoring {
        let view = embed_visible(world, &last_visible, embeddings);
        own.fold(&last_visible, similarity(&setup.target_query, &view));
    }

    let exchange = |agent: &AgentState,
                        visible: &[CellIndex],
                        loc_model: &mut LocalizationModel,
                        teacher_layer: &mut ScoredGrid,
                        ledger: &mut ByteLedger,
                        merges: &mut u32|
     -> Result<(), EpisodeError> {
        let Some(dataset) = setup.dataset.as_ref() else {
            return Ok(());
        };
        let view = embed_visible(world, visible, embeddings);
        let query = LocalizationQuery::new(view, setup.target_query.clone(), agent.pose);
        let query_bytes = encode_query(&query);
        ledger.record_query(&query_bytes);
        let query = decode_query(&query_bytes)?;
        let true_place = pose_to_place_class(&agent.pose);
        let response = proxy_handle_query(dataset, &query, loc_model, true_place, &proxy_cfg);
        let response_bytes = encode_response(&response);
        ledger.record_response(&response_bytes);
        let response = decode_response(&response_bytes)?;
        if !response.is_rejection() {
            *teacher_layer = merge_maps(teacher_layer, &response)?;
            *merges += 1;
        }
        Ok(())
    };

    let outcome = 'episode: {
        if detect_target(world, &agent.pose, target_id, &fov)? {
            break 'episode Outcome::Success;
        }
        if spec.method == Method::Proposed {
            exchange(
                &agent,
                &last_visible,
                &mut loc_model,
                &mut teacher_layer,
                &mut ledger,
                &mut merges,
            )?;
        }

        let mut global_events = 0u32;
        loop {
            global_events += 1;
            if global_events > sim.max_global_events {
                break 'episode Outcome::OutOfBudget;
            }
            let here = agent.cell(&wspec);

            let mut planner: Option<LocalPlanner> = None;
            if scoring {
                let object_map = {
                    let mut grid = own.snapshot(sim.sparsity_theta);
                    grid.fold_grid(&teacher_layer);
                    grid
                };
                let mut scorer = SubgoalScorer::new(&omap, &agent.pose, &fov, sim.waypoint_spacing);
                let mut candidates: Vec<Subgoal> = Vec::new();
                for cell in frontier_cells(&omap) {
                    if cell == here {
                        continue;
                    }
                    if let Some(sg) = scorer.score(cell, &object_map, &visited) {
                        candidates.push(sg);
                    }
                }
                if let Some(sg) = select_subgoal(&candidates) {
                    planner = LocalPlanner::new(&omap, here, sg);
                }
            } else {
                let mut pool = frontier_cells(&omap);
                pool.retain(|c| *c != here);
                while !pool.is_empty() {
                    let i = frontier_rng.gen_range(0..pool.len());
                    let sg = Subgoal {
                        cell: pool.swap_remove(i),
                        primary_value: 0.0,
                        secondary_value: 0.0,
                    };
                    if let Some(lp) = LocalPlanner::new(&omap, here, sg) {
                        planner = Some(lp);
                        break;
                    }
                }
            }
            let Some(mut lp) = planner else {
                break 'episode Outcome::ExplorationComplete;
            };

            let terminal = loop {
                match lp.next_step(&omap, &agent.pose) {
                    LocalStep::Done(reason) => break reason,
                    LocalStep::Move { action, dest } => {
                        if result.steps >= sim.step_budget {
                            break 'episode Outcome::OutOfBudget;
                        }
                        match step_agent(world, &mut agent, action) {
                            Err(_) => {
                                omap.set_occupied(dest);
                                break TerminalReason::PathBlocked;
                            }
                            Ok(()) => {
                                lp.advance();
                                result.steps += 1;
                                visited.insert(agent.pose.position());
                                last_visible = omap.observe(world, &agent.pose, &fov);
                                if scoring {
                                    let view = embed_visible(world, &last_visible, embeddings);
                                    own.fold(
                                        &last_visible,
                                        similarity(&setup.target_query, &view),
                                    );
                                }
                                if detect_target(world, &agent.pose, target_id, &fov)? {
                                    break 'episode Outcome::Success;
                                }
                            }
                        }
                    }
                }
            };

            if spec.method == Method::Proposed && terminal == TerminalReason::ReachedSubgoal {
                exchange(
                    &agent,
                    &last_visible,
                    &mut loc_model,
                    &mut teacher_layer,
                    &mut ledger,
                    &mut merges,
                )?;
            }
        }
    };

    result.success = matches!(outcome, Outcome::Success);
    result.path_length = agent.distance_traveled;
    result.query_bytes = ledger.query_bytes;
    result.response_bytes = ledger.response_bytes;
    result.merges = merges;
    Ok(result)
}
