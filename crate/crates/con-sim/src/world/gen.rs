//! Seeded procedural rooms-and-corridors world generation.
//!
//! Rooms are carved as rectangles and chained together with L-shaped
//! corridors, which makes the free space connected by construction; a flood
//! fill afterwards verifies it and fills any stray disconnected pocket back
//! in. Generation is bit-reproducible for a fixed seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{bfs_distance_field, World};
use crate::grid::{cell_to_world, CellIndex, GridSpec};

#[derive(Clone, Debug)]
pub struct WorldGenParams {
    /// Grid dimensions in cells.
    pub width: usize,
    pub height: usize,
    /// Meters per cell.
    pub resolution: f64,
    /// Inclusive bounds on the number of rooms.
    pub min_rooms: usize,
    pub max_rooms: usize,
    /// Inclusive bounds on room side length in cells.
    pub min_room_size: usize,
    pub max_room_size: usize,
    /// Corridor width in cells.
    pub corridor_width: usize,
    /// Number of target objects to place on distinct free cells.
    pub target_count: usize,
    /// Bounded retries before giving up on the parameters.
    pub max_attempts: u32,
}

impl Default for WorldGenParams {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            resolution: 0.1,
            min_rooms: 5,
            max_rooms: 8,
            min_room_size: 10,
            max_room_size: 22,
            corridor_width: 3,
            target_count: 100,
            max_attempts: 16,
        }
    }
}

#[derive(Debug, Error)]
pub enum WorldGenError {
    #[error("parameters cannot fit a room inside the boundary walls")]
    RoomTooLarge,
    #[error("could not generate a connected world with {needed} free cells in {attempts} attempts")]
    Unsatisfiable { needed: usize, attempts: u32 },
}

fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer over the xored inputs.
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Grid {
    width: usize,
    height: usize,
    obstacle: Vec<bool>,
}

impl Grid {
    fn solid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            obstacle: vec![true; width * height],
        }
    }

    fn carve(&mut self, x0: usize, y0: usize, x1: usize, y1: usize) {
        // Clamp to the interior so the boundary ring always stays solid.
        let x0 = x0.max(1);
        let y0 = y0.max(1);
        let x1 = x1.min(self.width - 2);
        let y1 = y1.min(self.height - 2);
        for y in y0..=y1 {
            for x in x0..=x1 {
                self.obstacle[y * self.width + x] = false;
            }
        }
    }
}

/// Generates a connected rooms-and-corridors world with `target_count`
/// targets placed on distinct free cells. Deterministic in `seed`.
pub fn generate_world(seed: u64, params: &WorldGenParams) -> Result<World, WorldGenError> {
    let interior_w = params.width.saturating_sub(2);
    let interior_h = params.height.saturating_sub(2);
    if params.min_room_size > interior_w.min(interior_h) || interior_w == 0 || interior_h == 0 {
        return Err(WorldGenError::RoomTooLarge);
    }

    for attempt in 0..params.max_attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, attempt as u64));
        let mut grid = Grid::solid(params.width, params.height);

        let room_count = rng.gen_range(params.min_rooms..=params.max_rooms);
        let mut centers: Vec<(usize, usize)> = Vec::with_capacity(room_count);
        for _ in 0..room_count {
            let w = rng
                .gen_range(params.min_room_size..=params.max_room_size)
                .min(interior_w);
            let h = rng
                .gen_range(params.min_room_size..=params.max_room_size)
                .min(interior_h);
            let x = rng.gen_range(1..=params.width - 1 - w);
            let y = rng.gen_range(1..=params.height - 1 - h);
            grid.carve(x, y, x + w - 1, y + h - 1);
            centers.push((x + w / 2, y + h / 2));
        }

        let half = params.corridor_width / 2;
        for i in 1..centers.len() {
            let (ax, ay) = centers[i - 1];
            let (bx, by) = centers[i];
            grid.carve(ax.min(bx), ay.saturating_sub(half), ax.max(bx), ay + half);
            grid.carve(bx.saturating_sub(half), ay.min(by), bx + half, ay.max(by));
        }

        let spec = GridSpec::new(params.resolution, params.width, params.height, (0.0, 0.0));
        let mut world = World::new(spec, grid.obstacle, BTreeMap::new());

        // Keep only the component containing the first room center.
        let seed_cell = CellIndex::new(centers[0].0 as i32, centers[0].1 as i32);
        if !world.is_free(seed_cell) {
            continue;
        }
        let dist = bfs_distance_field(&world, seed_cell);
        let mut free = Vec::new();
        for iy in 0..params.height as i32 {
            for ix in 0..params.width as i32 {
                let cell = CellIndex::new(ix, iy);
                let lin = spec.linear(cell);
                if world.is_free(cell) {
                    if dist[lin] == u32::MAX {
                        world.set_obstacle(cell, true);
                    } else {
                        free.push(cell);
                    }
                }
            }
        }

        if free.len() < params.target_count.max(1) {
            continue;
        }

        // Draw distinct free cells for targets; positions are cell centers.
        let mut taken = vec![false; free.len()];
        let mut placed = 0u32;
        while (placed as usize) < params.target_count {
            let i = rng.gen_range(0..free.len());
            if !taken[i] {
                taken[i] = true;
                world.add_target(placed, cell_to_world(free[i], &spec));
                placed += 1;
            }
        }

        return Ok(world);
    }

    Err(WorldGenError::Unsatisfiable {
        needed: params.target_count,
        attempts: params.max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_gives_identical_worlds() {
        let params = WorldGenParams::default();
        let a = generate_world(42, &params).unwrap();
        let b = generate_world(42, &params).unwrap();
        assert_eq!(a, b);
        let c = generate_world(43, &params).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_full_size_room_leaves_only_boundary_walls() {
        let params = WorldGenParams {
            width: 20,
            height: 20,
            min_rooms: 1,
            max_rooms: 1,
            min_room_size: 18,
            max_room_size: 18,
            target_count: 5,
            ..WorldGenParams::default()
        };
        let world = generate_world(1, &params).unwrap();
        for iy in 0..20 {
            for ix in 0..20 {
                let boundary = ix == 0 || iy == 0 || ix == 19 || iy == 19;
                assert_eq!(
                    world.is_obstacle(CellIndex::new(ix, iy)),
                    boundary,
                    "cell ({ix}, {iy})"
                );
            }
        }
    }

    #[test]
    fn free_space_is_one_connected_component() {
        // Flood-fill oracle: BFS from any free cell must reach all of them.
        for seed in 0..10u64 {
            let world = generate_world(seed, &WorldGenParams::default()).unwrap();
            let first = world.free_cells().next().unwrap();
            let dist = bfs_distance_field(&world, first);
            for cell in world.free_cells() {
                assert_ne!(
                    dist[world.spec().linear(cell)],
                    u32::MAX,
                    "seed {seed}: cell {cell:?} disconnected"
                );
            }
        }
    }

    #[test]
    fn targets_lie_on_distinct_free_cells() {
        let world = generate_world(7, &WorldGenParams::default()).unwrap();
        assert_eq!(world.targets().len(), 100);
        let mut cells = std::collections::HashSet::new();
        for (&id, _) in world.targets() {
            let cell = world.target_cell(id).unwrap();
            assert!(world.is_free(cell));
            assert!(cells.insert(cell), "duplicate target cell {cell:?}");
        }
    }

    #[test]
    fn impossible_params_are_rejected() {
        let params = WorldGenParams {
            width: 8,
            height: 8,
            min_room_size: 10,
            max_room_size: 12,
            ..WorldGenParams::default()
        };
        assert!(matches!(
            generate_world(0, &params),
            Err(WorldGenError::RoomTooLarge)
        ));

        let params = WorldGenParams {
            width: 10,
            height: 10,
            min_rooms: 1,
            max_rooms: 1,
            min_room_size: 3,
            max_room_size: 3,
            target_count: 500,
            max_attempts: 3,
            ..WorldGenParams::default()
        };
        assert!(matches!(
            generate_world(0, &params),
            Err(WorldGenError::Unsatisfiable { .. })
        ));
    }
}
