//! Global subgoal selection by simulated-observation scoring, local
//! 4-connected navigation with revisit exclusion, and the frontier baseline.
//!
//! The obstacle map is ternary (unknown / free / occupied) rather than
//! probabilistic: the simulated stereo is exact, so occupancy probabilities
//! would be degenerate. Candidate subgoals are frontier cells; planning
//! treats unknown cells as traversable and local execution replans on
//! contact.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;

use crate::grid::{cell_to_world, world_to_cell, CellIndex, GridSpec, Pose2D, ScoredGrid};
use crate::world::{
    cardinal_angle, heading_cardinal, visible_cells, FovModel, MoveAction, OccupancyView, World,
};

/// Knowledge state of one obstacle-map cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

/// Incrementally built ternary obstacle map. Cells never revert to unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleMap {
    spec: GridSpec,
    states: Vec<CellState>,
}

impl ObstacleMap {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            spec,
            states: vec![CellState::Unknown; spec.cell_count()],
        }
    }

    /// A fully known map mirroring the ground truth. Used by agents planning
    /// on their home turf and by tests.
    pub fn fully_known(world: &World) -> Self {
        let spec = *world.spec();
        let mut states = vec![CellState::Free; spec.cell_count()];
        for cell in world.obstacle_cells() {
            states[spec.linear(cell)] = CellState::Occupied;
        }
        Self { spec, states }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn state(&self, cell: CellIndex) -> CellState {
        if self.spec.contains(cell) {
            self.states[self.spec.linear(cell)]
        } else {
            CellState::Occupied
        }
    }

    pub fn set_occupied(&mut self, cell: CellIndex) {
        if self.spec.contains(cell) {
            let lin = self.spec.linear(cell);
            self.states[lin] = CellState::Occupied;
        }
    }

    /// Marks the listed visible cells with their ground-truth state:
    /// obstacle cells become occupied, the rest free.
    pub fn apply_observation(&mut self, world: &World, visible: &[CellIndex]) {
        for &cell in visible {
            let lin = self.spec.linear(cell);
            self.states[lin] = if world.is_obstacle(cell) {
                CellState::Occupied
            } else {
                CellState::Free
            };
        }
    }

    /// Observes the world from a pose and folds the result in. Returns the
    /// visible set so callers can reuse it.
    pub fn observe(&mut self, world: &World, pose: &Pose2D, fov: &FovModel) -> Vec<CellIndex> {
        let visible = visible_cells(world, pose, fov);
        self.apply_observation(world, &visible);
        visible
    }

    /// A free cell 4-adjacent to at least one unknown cell.
    pub fn is_frontier(&self, cell: CellIndex) -> bool {
        self.state(cell) == CellState::Free
            && cell
                .neighbors4()
                .iter()
                .any(|&n| self.spec.contains(n) && self.state(n) == CellState::Unknown)
    }

    pub fn known_cell_count(&self) -> usize {
        self.states
            .iter()
            .filter(|s| **s != CellState::Unknown)
            .count()
    }
}

impl OccupancyView for ObstacleMap {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }

    // Only known-occupied cells block simulated sight lines; unknown space
    // is optimistically transparent.
    fn blocks(&self, cell: CellIndex) -> bool {
        !self.spec.contains(cell) || self.state(cell) == CellState::Occupied
    }
}

/// Free cells adjacent to unknown space, sorted by `(ix, iy)`.
pub fn frontier_cells(map: &ObstacleMap) -> Vec<CellIndex> {
    let mut out = Vec::new();
    for iy in 0..map.spec.height() as i32 {
        for ix in 0..map.spec.width() as i32 {
            let cell = CellIndex::new(ix, iy);
            if map.is_frontier(cell) {
                out.push(cell);
            }
        }
    }
    out
}

/// Single-source shortest-path tree over the obstacle map with unit edge
/// costs. Neighbors expand in fixed order (+x, -x, +y, -y) and the priority
/// queue breaks cost ties lexicographically by `(ix, iy)`.
pub struct PathTree {
    spec: GridSpec,
    dist: Vec<u32>,
    parent: Vec<Option<CellIndex>>,
}

impl PathTree {
    pub fn distance(&self, cell: CellIndex) -> Option<u32> {
        if !self.spec.contains(cell) {
            return None;
        }
        let d = self.dist[self.spec.linear(cell)];
        (d != u32::MAX).then_some(d)
    }

    /// Path from the tree root to `to`, inclusive on both ends.
    pub fn path_to(&self, to: CellIndex) -> Option<Vec<CellIndex>> {
        self.distance(to)?;
        let mut path = vec![to];
        let mut cur = to;
        while let Some(p) = self.parent[self.spec.linear(cur)] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

fn traversable(map: &ObstacleMap, cell: CellIndex, unknown_ok: bool) -> bool {
    match map.state(cell) {
        CellState::Free => map.spec.contains(cell),
        CellState::Unknown => unknown_ok && map.spec.contains(cell),
        CellState::Occupied => false,
    }
}

/// Dijkstra over the whole map from `from`.
pub fn dijkstra_tree(map: &ObstacleMap, from: CellIndex, unknown_traversable: bool) -> PathTree {
    let spec = map.spec;
    let mut dist = vec![u32::MAX; spec.cell_count()];
    let mut parent = vec![None; spec.cell_count()];
    let mut heap: BinaryHeap<Reverse<(u32, i32, i32)>> = BinaryHeap::new();
    if spec.contains(from) {
        dist[spec.linear(from)] = 0;
        heap.push(Reverse((0, from.ix, from.iy)));
    }
    while let Some(Reverse((d, ix, iy))) = heap.pop() {
        let cell = CellIndex::new(ix, iy);
        let lin = spec.linear(cell);
        if d > dist[lin] {
            continue;
        }
        for n in cell.neighbors4() {
            if !traversable(map, n, unknown_traversable) {
                continue;
            }
            let nlin = spec.linear(n);
            if d + 1 < dist[nlin] {
                dist[nlin] = d + 1;
                parent[nlin] = Some(cell);
                heap.push(Reverse((d + 1, n.ix, n.iy)));
            }
        }
    }
    PathTree { spec, dist, parent }
}

/// Shortest 4-connected path between two cells, if any.
pub fn dijkstra_path(
    map: &ObstacleMap,
    from: CellIndex,
    to: CellIndex,
    unknown_traversable: bool,
) -> Option<Vec<CellIndex>> {
    dijkstra_tree(map, from, unknown_traversable).path_to(to)
}

/// Grid-backed record of visited locations with a fixed exclusion radius.
/// Grows monotonically within an episode.
#[derive(Clone, Debug)]
pub struct VisitedMask {
    spec: GridSpec,
    radius: f64,
    excluded: Vec<bool>,
    centers: Vec<bool>,
}

impl VisitedMask {
    pub fn new(spec: GridSpec, radius: f64) -> Self {
        Self {
            spec,
            radius,
            excluded: vec![false; spec.cell_count()],
            centers: vec![false; spec.cell_count()],
        }
    }

    /// Marks every cell whose center lies within the exclusion radius of the
    /// point. Re-inserting a point in an already-visited cell is a no-op.
    pub fn insert(&mut self, point: (f64, f64)) {
        let cell = world_to_cell(point, &self.spec);
        if !self.spec.contains(cell) {
            return;
        }
        let lin = self.spec.linear(cell);
        if self.centers[lin] {
            return;
        }
        self.centers[lin] = true;
        let r_cells = (self.radius / self.spec.resolution()).ceil() as i32;
        for iy in (cell.iy - r_cells).max(0)..=(cell.iy + r_cells).min(self.spec.height() as i32 - 1)
        {
            for ix in
                (cell.ix - r_cells).max(0)..=(cell.ix + r_cells).min(self.spec.width() as i32 - 1)
            {
                let c = CellIndex::new(ix, iy);
                let center = cell_to_world(c, &self.spec);
                let dx = center.0 - point.0;
                let dy = center.1 - point.1;
                if (dx * dx + dy * dy).sqrt() <= self.radius {
                    let l = self.spec.linear(c);
                    self.excluded[l] = true;
                }
            }
        }
    }

    pub fn excludes(&self, cell: CellIndex) -> bool {
        self.spec.contains(cell) && self.excluded[self.spec.linear(cell)]
    }
}

/// A candidate subgoal with its two-channel value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Subgoal {
    pub cell: CellIndex,
    pub primary_value: f64,
    pub secondary_value: f64,
}

/// Per-planning-event scorer. Builds one shortest-path tree from the
/// current position and memoizes simulated waypoint observations, so
/// scoring many candidates shares work.
pub struct SubgoalScorer<'a> {
    map: &'a ObstacleMap,
    pose: &'a Pose2D,
    fov: &'a FovModel,
    spacing_cells: usize,
    tree: PathTree,
    memo: HashMap<(CellIndex, u8), Vec<CellIndex>>,
}

impl<'a> SubgoalScorer<'a> {
    pub fn new(
        map: &'a ObstacleMap,
        pose: &'a Pose2D,
        fov: &'a FovModel,
        waypoint_spacing: f64,
    ) -> Self {
        let start = world_to_cell(pose.position(), &map.spec);
        let spacing_cells = ((waypoint_spacing / map.spec.resolution()).round() as usize).max(1);
        Self {
            map,
            pose,
            fov,
            spacing_cells,
            tree: dijkstra_tree(map, start, true),
            memo: HashMap::new(),
        }
    }

    pub fn tree(&self) -> &PathTree {
        &self.tree
    }

    fn waypoint_visible(&mut self, cell: CellIndex, cardinal: u8) -> &Vec<CellIndex> {
        let map = self.map;
        let fov = self.fov;
        self.memo.entry((cell, cardinal)).or_insert_with(|| {
            let (x, y) = cell_to_world(cell, &map.spec);
            visible_cells(map, &Pose2D::new(x, y, cardinal_angle(cardinal)), fov)
        })
    }

    /// Scores one candidate: waypoints at regular spacing along the shortest
    /// path (plus the endpoint), simulated observation at each against the
    /// known map, channel-wise max over the union of the observed cells,
    /// with visited-excluded cells contributing nothing. `None` if the
    /// candidate is unreachable.
    pub fn score(
        &mut self,
        cand: CellIndex,
        object_map: &ScoredGrid,
        visited: &VisitedMask,
    ) -> Option<Subgoal> {
        let path = self.tree.path_to(cand)?;
        let mut waypoints: Vec<(CellIndex, Option<u8>)> = Vec::new();
        let last = path.len() - 1;
        let mut i = 0;
        while i <= last {
            let heading = if path.len() == 1 {
                None
            } else if i < last {
                Some(direction_between(path[i], path[i + 1]))
            } else {
                Some(direction_between(path[i - 1], path[i]))
            };
            waypoints.push((path[i], heading));
            i += self.spacing_cells;
        }
        if waypoints.last().map(|w| w.0) != Some(path[last]) {
            let heading = if path.len() == 1 {
                None
            } else {
                Some(direction_between(path[last - 1], path[last]))
            };
            waypoints.push((path[last], heading));
        }

        let mut union: Vec<CellIndex> = Vec::new();
        let mut seen = vec![false; self.map.spec.cell_count()];
        for (cell, heading) in waypoints {
            let vis = match heading {
                Some(k) => self.waypoint_visible(cell, k).clone(),
                None => visible_cells(self.map, &Pose2D::new(
                    cell_to_world(cell, &self.map.spec).0,
                    cell_to_world(cell, &self.map.spec).1,
                    self.pose.theta,
                ), self.fov),
            };
            for c in vis {
                let lin = self.map.spec.linear(c);
                if !seen[lin] {
                    seen[lin] = true;
                    union.push(c);
                }
            }
        }

        let mut primary = 0.0f64;
        let mut secondary = 0.0f64;
        for cell in union {
            if visited.excludes(cell) {
                continue;
            }
            if let Some(score) = object_map.get(cell) {
                primary = primary.max(score.primary);
                secondary = secondary.max(score.secondary);
            }
        }
        Some(Subgoal {
            cell: cand,
            primary_value: primary,
            secondary_value: secondary,
        })
    }
}

fn direction_between(from: CellIndex, to: CellIndex) -> u8 {
    match (to.ix - from.ix, to.iy - from.iy) {
        (1, 0) => 0,
        (0, 1) => 1,
        (-1, 0) => 2,
        (0, -1) => 3,
        other => unreachable!("non-adjacent path cells: {other:?}"),
    }
}

/// Scores one candidate in isolation. Shares semantics with
/// [`SubgoalScorer::score`]; prefer the scorer when ranking many candidates.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_subgoal(
    cand: CellIndex,
    pose: &Pose2D,
    object_map: &ScoredGrid,
    obstacle_map: &ObstacleMap,
    fov: &FovModel,
    waypoint_spacing: f64,
    visited: &VisitedMask,
) -> Option<(f64, f64)> {
    let mut scorer = SubgoalScorer::new(obstacle_map, pose, fov, waypoint_spacing);
    scorer
        .score(cand, object_map, visited)
        .map(|s| (s.primary_value, s.secondary_value))
}

/// Argmax by primary value, ties broken by secondary value, remaining ties
/// by lowest `(ix, iy)`. `None` signals exploration complete.
pub fn select_subgoal(candidates: &[Subgoal]) -> Option<Subgoal> {
    candidates.iter().copied().reduce(|best, c| {
        if c.primary_value > best.primary_value {
            c
        } else if c.primary_value < best.primary_value {
            best
        } else if c.secondary_value > best.secondary_value {
            c
        } else if c.secondary_value < best.secondary_value {
            best
        } else if c.cell < best.cell {
            c
        } else {
            best
        }
    })
}

/// Uniform seeded draw from the frontier, ignoring object-map scores.
pub fn frontier_baseline_select<R: Rng>(map: &ObstacleMap, rng: &mut R) -> Option<Subgoal> {
    let frontiers = frontier_cells(map);
    if frontiers.is_empty() {
        return None;
    }
    let cell = frontiers[rng.gen_range(0..frontiers.len())];
    Some(Subgoal {
        cell,
        primary_value: 0.0,
        secondary_value: 0.0,
    })
}

/// Why a local plan handed control back to the global planner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalReason {
    ReachedSubgoal,
    PathBlocked,
    FrontierEdge,
}

/// Next thing the local planner wants to do.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalStep {
    Move { action: MoveAction, dest: CellIndex },
    Done(TerminalReason),
}

/// Follows one planned path toward a subgoal, emitting 4-direction actions.
///
/// Terminates when the subgoal cell is reached, when the next path cell is
/// discovered occupied, or when the agent has crossed into space that was
/// unknown at planning time (it has reached the edge of the unexplored
/// area, so the global planner should reconsider).
pub struct LocalPlanner {
    subgoal: Subgoal,
    path: Vec<CellIndex>,
    plan_time_unknown: Vec<bool>,
    cursor: usize,
    steps_taken: u32,
}

impl LocalPlanner {
    /// Plans a path to the subgoal, optimistically treating unknown cells as
    /// traversable. `None` if no path exists under that assumption.
    pub fn new(map: &ObstacleMap, start: CellIndex, subgoal: Subgoal) -> Option<Self> {
        let path = dijkstra_path(map, start, subgoal.cell, true)?;
        let plan_time_unknown = map
            .states
            .iter()
            .map(|s| *s == CellState::Unknown)
            .collect();
        Some(Self {
            subgoal,
            path,
            plan_time_unknown,
            cursor: 0,
            steps_taken: 0,
        })
    }

    pub fn subgoal(&self) -> &Subgoal {
        &self.subgoal
    }

    pub fn next_step(&self, map: &ObstacleMap, pose: &Pose2D) -> LocalStep {
        let cur = world_to_cell(pose.position(), map.spec());
        if cur == self.subgoal.cell {
            return LocalStep::Done(TerminalReason::ReachedSubgoal);
        }
        if self.steps_taken > 0
            && map.spec().contains(cur)
            && self.plan_time_unknown[map.spec().linear(cur)]
        {
            return LocalStep::Done(TerminalReason::FrontierEdge);
        }
        if self.cursor + 1 >= self.path.len() || self.path[self.cursor] != cur {
            // Path exhausted or pose diverged from the plan; replan globally.
            return LocalStep::Done(TerminalReason::PathBlocked);
        }
        let dest = self.path[self.cursor + 1];
        if map.state(dest) == CellState::Occupied {
            return LocalStep::Done(TerminalReason::PathBlocked);
        }
        let dir = direction_between(cur, dest);
        let k = heading_cardinal(pose.theta);
        let action = match (dir + 4 - k) % 4 {
            0 => MoveAction::Forward,
            1 => MoveAction::Left,
            2 => MoveAction::Backward,
            _ => MoveAction::Right,
        };
        LocalStep::Move { action, dest }
    }

    /// Acknowledges a successfully executed move.
    pub fn advance(&mut self) {
        self.cursor += 1;
        self.steps_taken += 1;
    }
}
