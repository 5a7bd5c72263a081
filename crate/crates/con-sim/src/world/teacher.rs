//! Teacher trajectory generation for the two navigation scenarios.
//!
//! The teacher starts at a pose that detects the target, then performs a
//! seeded frontier-style coverage walk over its own incrementally observed
//! map. In the constrained start+goal scenario the walk finishes by driving
//! to the student's start pose, so the final trajectory pose equals it
//! exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    angle_diff, detect_target, segment_clear, step_agent, AgentState, FovModel, TargetId,
    Trajectory, World, WorldError,
};
use crate::grid::{cell_to_world, world_to_cell, CellIndex, Pose2D};
use crate::planner::{
    frontier_cells, LocalPlanner, LocalStep, ObstacleMap, Subgoal, TerminalReason,
};

/// The two object-navigation scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    /// Teacher starts where it sees the target; student starts 3.2 m away.
    ConstrainedStart,
    /// Additionally, the teacher's final pose is the student's start pose.
    ConstrainedStartGoal,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::ConstrainedStart => "constrained_start",
            Scenario::ConstrainedStartGoal => "constrained_start_goal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "constrained_start" => Some(Scenario::ConstrainedStart),
            "constrained_start_goal" => Some(Scenario::ConstrainedStartGoal),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TeacherWalkParams {
    /// Step budget for the coverage walk.
    pub steps: usize,
    /// Observe (and update the teacher's map) every this many steps.
    pub observe_interval: usize,
}

impl Default for TeacherWalkParams {
    fn default() -> Self {
        Self {
            steps: 1600,
            observe_interval: 3,
        }
    }
}

/// Free cells from which the target can be detected with a suitable heading.
pub(crate) fn detection_cells(world: &World, target: (f64, f64), fov: &FovModel) -> Vec<CellIndex> {
    let spec = world.spec();
    let target_cell = world_to_cell(target, spec);
    let r = (fov.detection_radius / spec.resolution()).ceil() as i32 + 1;
    let mut out = Vec::new();
    for iy in (target_cell.iy - r).max(0)..(target_cell.iy + r + 1).min(spec.height() as i32) {
        for ix in (target_cell.ix - r).max(0)..(target_cell.ix + r + 1).min(spec.width() as i32) {
            let cell = CellIndex::new(ix, iy);
            if !world.is_free(cell) {
                continue;
            }
            let center = cell_to_world(cell, spec);
            let dx = target.0 - center.0;
            let dy = target.1 - center.1;
            if (dx * dx + dy * dy).sqrt() > fov.detection_radius {
                continue;
            }
            if segment_clear(world, center, target) {
                out.push(cell);
            }
        }
    }
    out
}

/// Picks a start pose (random cell near the target, random orientation)
/// from which the target is detected.
fn sample_start_pose(
    world: &World,
    target_id: TargetId,
    fov: &FovModel,
    rng: &mut ChaCha8Rng,
) -> Result<Pose2D, WorldError> {
    let target = world.target_position(target_id)?;
    let cells = detection_cells(world, target, fov);
    if cells.is_empty() {
        return Err(WorldError::NoTeacherStart(target_id));
    }
    let cell = cells[rng.gen_range(0..cells.len())];
    let (x, y) = cell_to_world(cell, world.spec());
    for _ in 0..256 {
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let pose = Pose2D::new(x, y, theta);
        if detect_target(world, &pose, target_id, fov)? {
            return Ok(pose);
        }
    }
    // Aim straight at the target; passes the arc test by construction.
    let aim = (target.1 - y).atan2(target.0 - x);
    let pose = Pose2D::new(x, y, aim);
    debug_assert!(angle_diff(aim, pose.theta) <= fov.view_angle / 2.0);
    Ok(pose)
}

/// Generates a teacher trajectory for a scenario.
///
/// The first pose always detects the target. For
/// [`Scenario::ConstrainedStartGoal`] the last pose equals `student_start`
/// bit-exactly (a final pure rotation aligns the heading). Deterministic in
/// `seed`.
pub fn generate_teacher_trajectory(
    world: &World,
    target_id: TargetId,
    scenario: Scenario,
    student_start: Pose2D,
    seed: u64,
    fov: &FovModel,
    params: &TeacherWalkParams,
) -> Result<Trajectory, WorldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = sample_start_pose(world, target_id, fov, &mut rng)?;

    let spec = *world.spec();
    let mut state = AgentState::new(start);
    let mut map = ObstacleMap::new(spec);
    let mut poses = vec![start];
    let mut steps = 0usize;
    map.observe(world, &state.pose, fov);

    'walk: while steps < params.steps {
        let mut pool = frontier_cells(&map);
        let here = state.cell(&spec);
        pool.retain(|c| *c != here);
        let mut planner = None;
        while !pool.is_empty() {
            let i = rng.gen_range(0..pool.len());
            let cell = pool.swap_remove(i);
            let sg = Subgoal {
                cell,
                primary_value: 0.0,
                secondary_value: 0.0,
            };
            if let Some(lp) = LocalPlanner::new(&map, here, sg) {
                planner = Some(lp);
                break;
            }
        }
        let Some(mut lp) = planner else {
            break 'walk; // coverage complete
        };

        loop {
            if steps >= params.steps {
                break 'walk;
            }
            match lp.next_step(&map, &state.pose) {
                LocalStep::Done(_) => break,
                LocalStep::Move { action, dest } => {
                    match step_agent(world, &mut state, action) {
                        Err(_) => {
                            map.set_occupied(dest);
                            break;
                        }
                        Ok(()) => {
                            lp.advance();
                            steps += 1;
                            poses.push(state.pose);
                            if steps % params.observe_interval == 0 {
                                map.observe(world, &state.pose, fov);
                            }
                        }
                    }
                }
            }
        }
        map.observe(world, &state.pose, fov);
    }

    if scenario == Scenario::ConstrainedStartGoal {
        // Drive home to the student's start on the fully known map.
        let known = ObstacleMap::fully_known(world);
        let goal_cell = world_to_cell(student_start.position(), &spec);
        let sg = Subgoal {
            cell: goal_cell,
            primary_value: 0.0,
            secondary_value: 0.0,
        };
        let mut lp =
            LocalPlanner::new(&known, state.cell(&spec), sg).ok_or(WorldError::Unreachable)?;
        loop {
            match lp.next_step(&known, &state.pose) {
                LocalStep::Done(TerminalReason::ReachedSubgoal) => break,
                LocalStep::Done(_) => return Err(WorldError::Unreachable),
                LocalStep::Move { action, .. } => {
                    step_agent(world, &mut state, action).map_err(|_| WorldError::Unreachable)?;
                    lp.advance();
                    poses.push(state.pose);
                }
            }
        }
        if *poses.last().expect("non-empty") != student_start {
            poses.push(student_start); // pure rotation onto the exact pose
        }
    }

    Ok(Trajectory { poses })
}
