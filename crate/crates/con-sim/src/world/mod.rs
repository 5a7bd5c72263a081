//! Ground-truth environment: obstacle layout, target objects, agent
//! kinematics, the arc field-of-view and detection model, and teacher
//! trajectory generation.
//!
//! A [`World`] is immutable after generation; per-episode mutable state
//! lives in [`AgentState`]. Parallel episodes share worlds read-only.

mod fov;
mod gen;
mod io;
mod teacher;

pub use fov::{
    angle_diff, segment_clear, visible_cells, visible_cells_by_center_test, FovModel,
    OccupancyView,
};
pub use gen::{generate_world, WorldGenError, WorldGenParams};
pub use io::{load_world, save_world, WorldIoError};
pub use teacher::{generate_teacher_trajectory, Scenario, TeacherWalkParams};

pub(crate) use teacher::detection_cells;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::grid::{cell_to_world, normalize_angle, world_to_cell, CellIndex, GridSpec, Pose2D};

pub type TargetId = u32;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("unknown target id {0}")]
    UnknownTarget(TargetId),
    #[error("position ({0}, {1}) is not in free space")]
    NotFree(f64, f64),
    #[error("no path between the given endpoints")]
    Unreachable,
    #[error("no teacher start pose can see target {0}")]
    NoTeacherStart(TargetId),
}

/// Destination cell was an obstacle or out of bounds; the agent state is
/// unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("collision moving into cell ({}, {})", .0.ix, .0.iy)]
pub struct Collision(pub CellIndex);

/// Ground-truth grid environment: obstacle cells plus target positions.
/// Free cells are the complement of the obstacle set.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    spec: GridSpec,
    obstacles: Vec<bool>,
    targets: BTreeMap<TargetId, (f64, f64)>,
}

impl World {
    pub fn new(
        spec: GridSpec,
        obstacles: Vec<bool>,
        targets: BTreeMap<TargetId, (f64, f64)>,
    ) -> Self {
        assert_eq!(obstacles.len(), spec.cell_count());
        Self {
            spec,
            obstacles,
            targets,
        }
    }

    /// An all-free world, origin at (0, 0).
    pub fn empty(resolution: f64, width: usize, height: usize) -> Self {
        let spec = GridSpec::new(resolution, width, height, (0.0, 0.0));
        Self {
            spec,
            obstacles: vec![false; width * height],
            targets: BTreeMap::new(),
        }
    }

    /// A world with the listed cells set to obstacle.
    pub fn with_obstacles(
        resolution: f64,
        width: usize,
        height: usize,
        cells: &[CellIndex],
    ) -> Self {
        let mut world = Self::empty(resolution, width, height);
        for &cell in cells {
            if world.spec.contains(cell) {
                let lin = world.spec.linear(cell);
                world.obstacles[lin] = true;
            }
        }
        world
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn is_obstacle(&self, cell: CellIndex) -> bool {
        !self.spec.contains(cell) || self.obstacles[self.spec.linear(cell)]
    }

    pub fn is_free(&self, cell: CellIndex) -> bool {
        self.spec.contains(cell) && !self.obstacles[self.spec.linear(cell)]
    }

    pub fn set_obstacle(&mut self, cell: CellIndex, value: bool) {
        assert!(self.spec.contains(cell));
        let lin = self.spec.linear(cell);
        self.obstacles[lin] = value;
    }

    pub fn add_target(&mut self, id: TargetId, position: (f64, f64)) {
        self.targets.insert(id, position);
    }

    pub fn targets(&self) -> &BTreeMap<TargetId, (f64, f64)> {
        &self.targets
    }

    pub fn target_position(&self, id: TargetId) -> Result<(f64, f64), WorldError> {
        self.targets
            .get(&id)
            .copied()
            .ok_or(WorldError::UnknownTarget(id))
    }

    /// Cell containing a target. Targets always sit on free cell centers.
    pub fn target_cell(&self, id: TargetId) -> Result<CellIndex, WorldError> {
        Ok(world_to_cell(self.target_position(id)?, &self.spec))
    }

    /// Free cells in row-major order.
    pub fn free_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        let width = self.spec.width() as i32;
        let height = self.spec.height() as i32;
        (0..height)
            .flat_map(move |iy| (0..width).map(move |ix| CellIndex::new(ix, iy)))
            .filter(move |&c| self.is_free(c))
    }

    pub fn free_cell_count(&self) -> usize {
        self.obstacles.iter().filter(|o| !**o).count()
    }

    pub fn obstacle_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        let width = self.spec.width() as i32;
        let height = self.spec.height() as i32;
        (0..height)
            .flat_map(move |iy| (0..width).map(move |ix| CellIndex::new(ix, iy)))
            .filter(move |&c| self.obstacles[self.spec.linear(c)])
    }
}

impl OccupancyView for World {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn blocks(&self, cell: CellIndex) -> bool {
        self.is_obstacle(cell)
    }
}

/// One of the four grid motions, relative to the agent's current heading
/// (quantized to the nearest axis).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveAction {
    Forward,
    Backward,
    Left,
    Right,
}

/// Cardinal direction index: 0 = +x, 1 = +y, 2 = -x, 3 = -y.
pub fn heading_cardinal(theta: f64) -> u8 {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    let k = ((normalize_angle(theta) + FRAC_PI_4) / FRAC_PI_2).floor() as i64;
    k.rem_euclid(4) as u8
}

/// Exact heading for a cardinal index, in `[-pi, pi)`.
pub fn cardinal_angle(k: u8) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    match k % 4 {
        0 => 0.0,
        1 => FRAC_PI_2,
        2 => -PI,
        _ => -FRAC_PI_2,
    }
}

const CARDINAL_DELTAS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Per-episode agent state: pose, odometry, and everywhere it has been
/// (feeding the 1 m revisit-exclusion rule).
#[derive(Clone, Debug)]
pub struct AgentState {
    pub pose: Pose2D,
    pub distance_traveled: f64,
    pub visited: Vec<(f64, f64)>,
    steps_moved: u64,
}

impl AgentState {
    pub fn new(pose: Pose2D) -> Self {
        Self {
            pose,
            distance_traveled: 0.0,
            visited: vec![pose.position()],
            steps_moved: 0,
        }
    }

    pub fn steps_moved(&self) -> u64 {
        self.steps_moved
    }

    pub fn cell(&self, spec: &GridSpec) -> CellIndex {
        world_to_cell(self.pose.position(), spec)
    }
}

/// Moves the agent one grid cell in the commanded direction.
///
/// Heading snaps to the motion direction for forward/left/right and is
/// unchanged for backward. Distance is tracked as whole steps so that ten
/// 0.1 m steps sum to exactly 1.0 m.
pub fn step_agent(
    world: &World,
    state: &mut AgentState,
    action: MoveAction,
) -> Result<(), Collision> {
    let k = heading_cardinal(state.pose.theta);
    let (dir, turns) = match action {
        MoveAction::Forward => (k, Some(k)),
        MoveAction::Left => ((k + 1) % 4, Some((k + 1) % 4)),
        MoveAction::Backward => ((k + 2) % 4, None),
        MoveAction::Right => ((k + 3) % 4, Some((k + 3) % 4)),
    };
    let cur = state.cell(&world.spec);
    let (dx, dy) = CARDINAL_DELTAS[dir as usize];
    let dest = CellIndex::new(cur.ix + dx, cur.iy + dy);
    if !world.is_free(dest) {
        return Err(Collision(dest));
    }
    let (x, y) = cell_to_world(dest, &world.spec);
    let theta = turns.map_or(state.pose.theta, cardinal_angle);
    state.pose = Pose2D::new(x, y, theta);
    state.steps_moved += 1;
    state.distance_traveled = state.steps_moved as f64 * world.spec.resolution();
    state.visited.push(state.pose.position());
    Ok(())
}

/// Whether the target is detected from a pose: within detection range,
/// within the view wedge, and unoccluded.
pub fn detect_target(
    world: &World,
    pose: &Pose2D,
    target_id: TargetId,
    fov: &FovModel,
) -> Result<bool, WorldError> {
    let target = world.target_position(target_id)?;
    let dx = target.0 - pose.x;
    let dy = target.1 - pose.y;
    let dist = (dx * dx + dy * dy).sqrt();
    if dist > fov.detection_radius {
        return Ok(false);
    }
    if dist > 1e-12 && angle_diff(dy.atan2(dx), pose.theta) > fov.view_angle / 2.0 {
        return Ok(false);
    }
    Ok(segment_clear(world, pose.position(), target))
}

/// 4-connected BFS distances (in steps) from a seed cell over free space.
/// Unreachable cells hold `u32::MAX`.
pub fn bfs_distance_field(world: &World, seed: CellIndex) -> Vec<u32> {
    let spec = world.spec();
    let mut dist = vec![u32::MAX; spec.cell_count()];
    if !world.is_free(seed) {
        return dist;
    }
    let mut queue = std::collections::VecDeque::new();
    dist[spec.linear(seed)] = 0;
    queue.push_back(seed);
    while let Some(cell) = queue.pop_front() {
        let d = dist[spec.linear(cell)];
        for n in cell.neighbors4() {
            if world.is_free(n) {
                let lin = spec.linear(n);
                if dist[lin] == u32::MAX {
                    dist[lin] = d + 1;
                    queue.push_back(n);
                }
            }
        }
    }
    dist
}

/// Length in meters of the shortest 4-connected path between the cells
/// containing the two endpoints.
pub fn shortest_path_length(
    world: &World,
    from: &Pose2D,
    to: (f64, f64),
) -> Result<f64, WorldError> {
    let spec = world.spec();
    let a = world_to_cell(from.position(), spec);
    let b = world_to_cell(to, spec);
    if !world.is_free(a) {
        return Err(WorldError::NotFree(from.x, from.y));
    }
    if !world.is_free(b) {
        return Err(WorldError::NotFree(to.0, to.1));
    }
    let dist = bfs_distance_field(world, a);
    let d = dist[spec.linear(b)];
    if d == u32::MAX {
        return Err(WorldError::Unreachable);
    }
    Ok(d as f64 * spec.resolution())
}

/// An ordered pose sequence where consecutive poses differ by one grid step
/// or a pure rotation.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub poses: Vec<Pose2D>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn first(&self) -> &Pose2D {
        &self.poses[0]
    }

    pub fn last(&self) -> &Pose2D {
        self.poses.last().expect("trajectory is never empty")
    }
}
