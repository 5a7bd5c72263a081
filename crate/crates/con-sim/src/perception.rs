//! Synthetic stand-ins for the learned components: view embeddings,
//! target-similarity scoring, object-map construction from a dataset, and
//! the synthetic self-localization model with a preset failure rate.
//!
//! View descriptors are built from the content visible at a pose: every
//! visible obstacle cell and every visible target contributes a seeded
//! pseudo-random unit vector, and the normalized sum is the descriptor. Two
//! poses seeing identical content produce bit-identical descriptors, while
//! disjoint content yields near-orthogonal ones.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{
    place_alignment, pose_to_place_class, world_to_cell, CellIndex, GridSpec, PlaceClass, Pose2D,
    ScoredGrid, SE2Transform,
};
use crate::world::{visible_cells, FovModel, TargetId, World};

/// Default descriptor dimensionality.
pub const DEFAULT_DESCRIPTOR_DIM: usize = 64;

/// Default sparsity threshold for object maps: cells whose primary score
/// stays below this are dropped.
pub const DEFAULT_SPARSITY_THETA: f64 = 0.05;

/// A unit-norm view descriptor. Components are 32-bit floats end to end so
/// the wire protocol round-trips descriptors bit-exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewDescriptor(Vec<f32>);

impl ViewDescriptor {
    /// Wraps raw components. Panics if the vector is not unit norm to f32
    /// working precision; descriptors always come from a normalization.
    pub fn new(components: Vec<f32>) -> Self {
        let norm: f64 = components.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt();
        assert!(
            (norm - 1.0).abs() < 1e-5,
            "descriptor norm {norm} is not unit"
        );
        Self(components)
    }

    /// Normalizes an f64 accumulator and quantizes to f32 components.
    fn from_accumulator(acc: &[f64]) -> Self {
        let norm: f64 = acc.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(norm > 1e-12, "cannot normalize a zero accumulator");
        Self(acc.iter().map(|c| (c / norm) as f32).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f32] {
        &self.0
    }
}

/// Clamped cosine similarity in `[0, 1]`, so it can serve directly as an
/// occupancy score.
pub fn similarity(a: &ViewDescriptor, b: &ViewDescriptor) -> f64 {
    assert_eq!(a.dim(), b.dim(), "descriptor dimensions differ");
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.0.iter().zip(&b.0) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0)
}

/// A view-content feature: something visible that contributes a basis
/// vector to the descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Feature {
    /// Seen nothing at all (open space, no obstacles in range).
    Void,
    Target(TargetId),
    Obstacle(CellIndex),
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic feature-to-unit-vector embedding space.
#[derive(Clone, Copy, Debug)]
pub struct EmbeddingSpace {
    pub dim: usize,
    pub salt: u64,
}

impl Default for EmbeddingSpace {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DESCRIPTOR_DIM,
            salt: 0x434F_4E53_494D_5631, // arbitrary fixed salt
        }
    }
}

impl EmbeddingSpace {
    pub fn with_dim(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    fn feature_seed(&self, feature: Feature) -> u64 {
        match feature {
            Feature::Void => mix(self.salt, 0xF00D),
            Feature::Target(id) => mix(mix(self.salt, 1), id as u64),
            Feature::Obstacle(cell) => mix(
                mix(self.salt, 2),
                ((cell.ix as u32 as u64) << 32) | cell.iy as u32 as u64,
            ),
        }
    }

    /// The unit basis vector for a feature (f64 precision; descriptors are
    /// quantized only after summation).
    pub fn feature_vector(&self, feature: Feature) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.feature_seed(feature));
        let mut v: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        for c in &mut v {
            *c /= norm;
        }
        v
    }
}

/// Per-world cache of feature vectors for every obstacle cell and target.
pub struct WorldEmbeddings {
    space: EmbeddingSpace,
    table: HashMap<Feature, Vec<f64>>,
}

impl WorldEmbeddings {
    pub fn new(world: &World, space: EmbeddingSpace) -> Self {
        let mut table = HashMap::new();
        table.insert(Feature::Void, space.feature_vector(Feature::Void));
        for cell in world.obstacle_cells() {
            let f = Feature::Obstacle(cell);
            table.insert(f, space.feature_vector(f));
        }
        for &id in world.targets().keys() {
            let f = Feature::Target(id);
            table.insert(f, space.feature_vector(f));
        }
        Self { space, table }
    }

    pub fn space(&self) -> &EmbeddingSpace {
        &self.space
    }

    fn vector(&self, feature: Feature) -> &[f64] {
        self.table
            .get(&feature)
            .expect("feature missing from the world embedding table")
    }
}

/// Embeds the content of a precomputed visible set. `visible` must be
/// sorted, as produced by [`visible_cells`]; sorted accumulation keeps the
/// result bit-deterministic.
pub fn embed_visible(
    world: &World,
    visible: &[CellIndex],
    embeddings: &WorldEmbeddings,
) -> ViewDescriptor {
    let mut acc = vec![0.0f64; embeddings.space.dim];
    let mut any = false;
    for &cell in visible {
        if world.is_obstacle(cell) {
            for (a, c) in acc.iter_mut().zip(embeddings.vector(Feature::Obstacle(cell))) {
                *a += c;
            }
            any = true;
        }
    }
    for (&id, &pos) in world.targets() {
        let cell = world_to_cell(pos, world.spec());
        if visible.binary_search(&cell).is_ok() {
            for (a, c) in acc.iter_mut().zip(embeddings.vector(Feature::Target(id))) {
                *a += c;
            }
            any = true;
        }
    }
    if !any {
        acc.copy_from_slice(embeddings.vector(Feature::Void));
    }
    ViewDescriptor::from_accumulator(&acc)
}

/// Embeds the view from a pose: deterministic in the visible content.
pub fn embed_view(
    world: &World,
    pose: &Pose2D,
    fov: &FovModel,
    embeddings: &WorldEmbeddings,
) -> ViewDescriptor {
    embed_visible(world, &visible_cells(world, pose, fov), embeddings)
}

/// One entry of a teacher's knowledge base: where it was, what the view
/// looked like, and which cells that view covered.
#[derive(Clone, Debug)]
pub struct DatasetRecord {
    pub pose: Pose2D,
    pub view: ViewDescriptor,
    pub observed: Vec<CellIndex>,
}

/// The teacher's sole knowledge base: an ordered sequence of view records
/// plus the grid frame they are expressed in.
#[derive(Clone, Debug)]
pub struct TeacherDataset {
    spec: GridSpec,
    records: Vec<DatasetRecord>,
    universe: Vec<PlaceClass>,
}

impl TeacherDataset {
    pub fn new(spec: GridSpec, records: Vec<DatasetRecord>) -> Self {
        assert!(!records.is_empty(), "a dataset needs at least one record");
        let mut universe: Vec<PlaceClass> =
            records.iter().map(|r| pose_to_place_class(&r.pose)).collect();
        universe.sort_unstable();
        universe.dedup();
        Self {
            spec,
            records,
            universe,
        }
    }

    /// Builds a dataset by sampling a trajectory every `record_interval`
    /// poses (always including the first and last).
    pub fn from_trajectory(
        world: &World,
        trajectory: &crate::world::Trajectory,
        fov: &FovModel,
        record_interval: usize,
        embeddings: &WorldEmbeddings,
    ) -> Self {
        let interval = record_interval.max(1);
        let last = trajectory.len() - 1;
        let mut records = Vec::new();
        let mut i = 0;
        while i <= last {
            records.push(Self::record_at(world, &trajectory.poses[i], fov, embeddings));
            i += interval;
        }
        if last > 0 && (last % interval) != 0 {
            records.push(Self::record_at(world, &trajectory.poses[last], fov, embeddings));
        }
        Self::new(*world.spec(), records)
    }

    fn record_at(
        world: &World,
        pose: &Pose2D,
        fov: &FovModel,
        embeddings: &WorldEmbeddings,
    ) -> DatasetRecord {
        let observed = visible_cells(world, pose, fov);
        let view = embed_visible(world, &observed, embeddings);
        DatasetRecord {
            pose: *pose,
            view,
            observed,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn records(&self) -> &[DatasetRecord] {
        &self.records
    }

    /// Sorted distinct place classes the teacher has visited: the known
    /// label space of its place classifier.
    pub fn universe(&self) -> &[PlaceClass] {
        &self.universe
    }

    pub fn knows_place(&self, place: PlaceClass) -> bool {
        self.universe.binary_search(&place).is_ok()
    }
}

/// Builds the query-based object map: each record scores its observed cells
/// with the similarity between the target query and the record's view; the
/// per-cell primary channel is the max contribution and the secondary the
/// sum. Cells whose primary stays below `theta` are dropped.
pub fn build_object_map(
    dataset: &TeacherDataset,
    target_query: &ViewDescriptor,
    theta: f64,
) -> ScoredGrid {
    let mut grid = ScoredGrid::new(dataset.spec);
    for record in &dataset.records {
        let s = similarity(target_query, &record.view);
        if s <= 0.0 {
            continue;
        }
        for &cell in &record.observed {
            grid.fold_cell(cell, s, s);
        }
    }
    grid.retain_primary_at_least(theta);
    grid
}

/// A self-localization hypothesis: a place class, its likelihood, and the
/// teacher-frame-to-student-frame alignment it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub place: PlaceClass,
    pub likelihood: f64,
    pub transform: SE2Transform,
}

/// Synthetic self-localization: returns the oracle class with probability
/// `1 - failure_rate` and a uniformly random class otherwise.
#[derive(Clone, Debug)]
pub struct LocalizationModel {
    failure_rate: f64,
    rng: ChaCha8Rng,
}

impl LocalizationModel {
    pub fn new(failure_rate: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&failure_rate));
        Self {
            failure_rate,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn failure_rate(&self) -> f64 {
        self.failure_rate
    }

    /// Produces up to `n` ranked hypotheses.
    ///
    /// Rank 1 is the true place with probability `1 - failure_rate`, else a
    /// uniform draw over the universe (which may still hit the true place).
    /// Lower ranks are distinct uniform draws from the remaining classes.
    /// Likelihoods are geometric weights `2^-k` normalized to sum to 1, and
    /// each transform aligns the hypothesized place onto the student's
    /// current place.
    pub fn localize(
        &mut self,
        true_place: PlaceClass,
        universe: &[PlaceClass],
        n: usize,
        student_place: PlaceClass,
    ) -> Vec<Hypothesis> {
        assert!(!universe.is_empty(), "localization needs a class universe");
        debug_assert!(
            universe.binary_search(&true_place).is_ok(),
            "true place must be in the universe"
        );
        let n = n.max(1).min(universe.len());

        let failed = self.rng.gen::<f64>() < self.failure_rate;
        let rank1 = if failed {
            universe[self.rng.gen_range(0..universe.len())]
        } else {
            true_place
        };

        let mut chosen = Vec::with_capacity(n);
        chosen.push(rank1);
        let mut pool: Vec<PlaceClass> = universe.iter().copied().filter(|p| *p != rank1).collect();
        while chosen.len() < n {
            let i = self.rng.gen_range(0..pool.len());
            chosen.push(pool.swap_remove(i));
        }

        let norm: f64 = (1..=n).map(|k| 0.5f64.powi(k as i32)).sum();
        chosen
            .into_iter()
            .enumerate()
            .map(|(i, place)| Hypothesis {
                place,
                likelihood: 0.5f64.powi(i as i32 + 1) / norm,
                transform: place_alignment(&place, &student_place),
            })
            .collect()
    }
}

/// Accepts a hypothesis list when its rank-1 likelihood clears `tau`.
/// An empty list is always rejected.
pub fn outlier_check(hypotheses: &[Hypothesis], tau: f64) -> bool {
    hypotheses.first().is_some_and(|h| h.likelihood >= tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::cell_to_world;

    fn unit(dim: usize, hot: usize) -> ViewDescriptor {
        let mut v = vec![0.0f32; dim];
        v[hot] = 1.0;
        ViewDescriptor::new(v)
    }

    #[test]
    fn similarity_examples() {
        let a = unit(4, 0);
        let b = unit(4, 1);
        assert_eq!(similarity(&a, &a), 1.0);
        assert_eq!(similarity(&a, &b), 0.0);
        let neg = ViewDescriptor::new(vec![-1.0, 0.0, 0.0, 0.0]);
        assert_eq!(similarity(&a, &neg), 0.0, "negative cosine clamps to 0");
    }

    #[test]
    fn embed_view_is_deterministic() {
        let mut world = World::empty(0.1, 30, 30);
        for iy in 10..20 {
            world.set_obstacle(CellIndex::new(20, iy), true);
        }
        world.add_target(0, cell_to_world(CellIndex::new(15, 15), world.spec()));
        let embeddings = WorldEmbeddings::new(&world, EmbeddingSpace::default());
        let pose = Pose2D::new(1.05, 1.55, 0.4);
        let fov = FovModel::default();
        let a = embed_view(&world, &pose, &fov, &embeddings);
        let b = embed_view(&world, &pose, &fov, &embeddings);
        assert_eq!(a, b);
        assert_eq!(similarity(&a, &b), 1.0);
    }

    #[test]
    fn identical_content_gives_identical_descriptors() {
        // A featureless sealed room small enough that every interior pose
        // sees the full wall set: descriptors must match across positions.
        let mut world = World::empty(0.1, 9, 9);
        for i in 0..9 {
            for j in [0, 8] {
                world.set_obstacle(CellIndex::new(i, j), true);
                world.set_obstacle(CellIndex::new(j, i), true);
            }
        }
        let embeddings = WorldEmbeddings::new(&world, EmbeddingSpace::default());
        let fov = FovModel::omnidirectional(3.0);
        // Same spot, rotated: the wall set is the same, so the descriptors
        // must agree bit for bit.
        let a = embed_view(&world, &Pose2D::new(0.45, 0.45, 0.7), &fov, &embeddings);
        let b = embed_view(&world, &Pose2D::new(0.45, 0.45, 2.1), &fov, &embeddings);
        assert_eq!(a, b);
        assert_eq!(similarity(&a, &b), 1.0);
    }

    #[test]
    fn disjoint_content_is_nearly_orthogonal() {
        // Monte Carlo over 1000 disjoint feature-set pairs at D=64: the
        // |cosine| must fall under 0.5 in at least 99% of draws.
        use rand::{Rng, SeedableRng};
        let space = EmbeddingSpace::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut below = 0;
        for trial in 0..1000u64 {
            let build = |ids: &[u64]| {
                let mut acc = vec![0.0f64; space.dim];
                for &id in ids {
                    for (a, c) in acc
                        .iter_mut()
                        .zip(space.feature_vector(Feature::Obstacle(CellIndex::new(
                            (id >> 16) as i32,
                            (id & 0xFFFF) as i32,
                        ))))
                    {
                        *a += c;
                    }
                }
                ViewDescriptor::from_accumulator(&acc)
            };
            let base = trial * 1_000;
            let n_a = rng.gen_range(1..8u64);
            let n_b = rng.gen_range(1..8u64);
            let a_ids: Vec<u64> = (0..n_a).map(|i| base + i).collect();
            let b_ids: Vec<u64> = (0..n_b).map(|i| base + 100 + i).collect();
            let a = build(&a_ids);
            let b = build(&b_ids);
            let mut dot = 0.0f64;
            for (&x, &y) in a.components().iter().zip(b.components()) {
                dot += x as f64 * y as f64;
            }
            if dot.abs() < 0.5 {
                below += 1;
            }
        }
        assert!(below >= 990, "only {below}/1000 pairs were near-orthogonal");
    }

    fn tiny_dataset(spec: GridSpec, entries: &[(Pose2D, ViewDescriptor, Vec<CellIndex>)]) -> TeacherDataset {
        TeacherDataset::new(
            spec,
            entries
                .iter()
                .map(|(p, v, o)| DatasetRecord {
                    pose: *p,
                    view: v.clone(),
                    observed: o.clone(),
                })
                .collect(),
        )
    }

    #[test]
    fn object_map_single_record() {
        let spec = GridSpec::new(0.1, 20, 20, (0.0, 0.0));
        // Query/view cosine of exactly 0.8: components (1,0) vs (0.8, 0.6).
        let query = ViewDescriptor::new(vec![1.0, 0.0]);
        let view = ViewDescriptor::new(vec![0.8, 0.6]);
        let observed: Vec<CellIndex> = (0..10).map(|i| CellIndex::new(i, 0)).collect();
        let dataset = tiny_dataset(spec, &[(Pose2D::new(0.0, 0.0, 0.0), view, observed.clone())]);
        let map = build_object_map(&dataset, &query, 0.05);
        assert_eq!(map.len(), 10);
        for cell in observed {
            let s = map.get(cell).unwrap();
            assert!((s.primary - 0.8).abs() < 1e-7);
            assert!((s.secondary - 0.8).abs() < 1e-7);
        }
    }

    #[test]
    fn object_map_max_and_sum_channels() {
        let spec = GridSpec::new(0.1, 20, 20, (0.0, 0.0));
        let query = ViewDescriptor::new(vec![1.0, 0.0]);
        let shared = CellIndex::new(5, 5);
        let dataset = tiny_dataset(
            spec,
            &[
                (
                    Pose2D::new(0.0, 0.0, 0.0),
                    ViewDescriptor::new(vec![0.5, 0.75f32.sqrt()]),
                    vec![shared, CellIndex::new(6, 5)],
                ),
                (
                    Pose2D::new(1.0, 0.0, 0.0),
                    ViewDescriptor::new(vec![0.7, (1.0f32 - 0.49).sqrt()]),
                    vec![shared],
                ),
            ],
        );
        let map = build_object_map(&dataset, &query, 0.05);
        let s = map.get(shared).unwrap();
        assert!((s.primary - 0.7).abs() < 1e-6);
        assert!((s.secondary - 1.2).abs() < 1e-6);
    }

    #[test]
    fn object_map_below_theta_is_empty() {
        let spec = GridSpec::new(0.1, 20, 20, (0.0, 0.0));
        let query = ViewDescriptor::new(vec![1.0, 0.0]);
        // Cosine 0.03, under theta = 0.05.
        let c = 0.03f32;
        let view = ViewDescriptor::new(vec![c, (1.0 - c * c).sqrt()]);
        let dataset = tiny_dataset(
            spec,
            &[(Pose2D::new(0.0, 0.0, 0.0), view, vec![CellIndex::new(1, 1)])],
        );
        let map = build_object_map(&dataset, &query, 0.05);
        assert!(map.is_empty());
    }

    #[test]
    fn object_map_secondary_at_least_primary() {
        use rand::{Rng, SeedableRng};
        let spec = GridSpec::new(0.1, 20, 20, (0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let rand_desc = |rng: &mut ChaCha8Rng| {
            let acc: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            ViewDescriptor::from_accumulator(&acc)
        };
        let query = rand_desc(&mut rng);
        let entries: Vec<(Pose2D, ViewDescriptor, Vec<CellIndex>)> = (0..12)
            .map(|i| {
                let cells: Vec<CellIndex> = (0..rng.gen_range(1..6))
                    .map(|_| CellIndex::new(rng.gen_range(0..20), rng.gen_range(0..20)))
                    .collect();
                (Pose2D::new(i as f64, 0.0, 0.0), rand_desc(&mut rng), cells)
            })
            .collect();
        let dataset = tiny_dataset(spec, &entries);
        let map = build_object_map(&dataset, &query, 0.0);
        for (_, score) in map.iter() {
            assert!(score.secondary >= score.primary - 1e-12);
        }
    }

    #[test]
    fn object_map_is_permutation_invariant() {
        let spec = GridSpec::new(0.1, 20, 20, (0.0, 0.0));
        let query = ViewDescriptor::new(vec![1.0, 0.0]);
        let mk = |c: f32| ViewDescriptor::new(vec![c, (1.0 - c * c).sqrt()]);
        let entries = vec![
            (Pose2D::new(0.0, 0.0, 0.0), mk(0.3), vec![CellIndex::new(1, 1), CellIndex::new(2, 1)]),
            (Pose2D::new(1.0, 0.0, 0.0), mk(0.6), vec![CellIndex::new(1, 1)]),
            (Pose2D::new(2.0, 0.0, 0.0), mk(0.9), vec![CellIndex::new(2, 1), CellIndex::new(3, 1)]),
        ];
        let forward = build_object_map(&tiny_dataset(spec, &entries), &query, 0.05);
        let mut reversed_entries = entries.clone();
        reversed_entries.reverse();
        let reversed = build_object_map(&tiny_dataset(spec, &reversed_entries), &query, 0.05);
        assert_eq!(forward.len(), reversed.len());
        for (cell, score) in forward.iter() {
            let other = reversed.get(cell).unwrap();
            assert!((score.primary - other.primary).abs() < 1e-12);
            assert!((score.secondary - other.secondary).abs() < 1e-12);
        }
    }

    fn small_universe(n: i32) -> Vec<PlaceClass> {
        let mut u: Vec<PlaceClass> = (0..n).map(|i| PlaceClass::new(i, 0, 0)).collect();
        u.sort_unstable();
        u
    }

    #[test]
    fn localize_perfect_model_always_returns_truth() {
        let universe = small_universe(12);
        let truth = universe[4];
        let student = PlaceClass::new(0, 0, 4);
        let mut model = LocalizationModel::new(0.0, 9);
        for _ in 0..200 {
            let hyps = model.localize(truth, &universe, 5, student);
            assert_eq!(hyps[0].place, truth);
            assert_eq!(hyps.len(), 5);
        }
    }

    #[test]
    fn localize_likelihoods_are_normalized_and_decreasing() {
        let universe = small_universe(7);
        let mut model = LocalizationModel::new(0.3, 21);
        let hyps = model.localize(universe[0], &universe, 5, universe[0]);
        let sum: f64 = hyps.iter().map(|h| h.likelihood).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for pair in hyps.windows(2) {
            assert!(pair[0].likelihood > pair[1].likelihood);
            assert!(pair[1].likelihood > 0.0);
        }
        // Distinct places throughout.
        let mut places: Vec<PlaceClass> = hyps.iter().map(|h| h.place).collect();
        places.sort_unstable();
        places.dedup();
        assert_eq!(places.len(), hyps.len());
    }

    #[test]
    fn localize_truncates_n_to_universe() {
        let universe = small_universe(3);
        let mut model = LocalizationModel::new(0.0, 2);
        let hyps = model.localize(universe[1], &universe, 5, universe[1]);
        assert_eq!(hyps.len(), 3);
    }

    #[test]
    fn localize_is_reproducible_for_fixed_seed() {
        let universe = small_universe(9);
        let mut a = LocalizationModel::new(0.5, 33);
        let mut b = LocalizationModel::new(0.5, 33);
        for _ in 0..50 {
            assert_eq!(
                a.localize(universe[2], &universe, 5, universe[0]),
                b.localize(universe[2], &universe, 5, universe[0])
            );
        }
    }

    #[test]
    fn localize_total_failure_is_uniform() {
        // Chi-square-style check: with failure rate 1, rank-1 frequencies
        // per class stay within 3 binomial sigmas of uniform.
        let universe = small_universe(16);
        let mut model = LocalizationModel::new(1.0, 4242);
        let trials = 10_000;
        let mut counts = vec![0u32; universe.len()];
        for _ in 0..trials {
            let hyps = model.localize(universe[3], &universe, 1, universe[3]);
            let idx = universe.binary_search(&hyps[0].place).unwrap();
            counts[idx] += 1;
        }
        let p = 1.0 / universe.len() as f64;
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for (i, c) in counts.iter().enumerate() {
            assert!(
                (*c as f64 - mean).abs() <= 3.0 * sigma,
                "class {i}: {c} vs {mean:.1} +/- {:.1}",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn localize_calibration_matches_analytic_rate() {
        // Rank-1 correctness is (1 - pe) + pe/|universe|.
        let universe = small_universe(10);
        let truth = universe[6];
        for pe in [0.2f64, 0.5] {
            let mut model = LocalizationModel::new(pe, 77);
            let trials = 10_000;
            let mut correct = 0u32;
            for _ in 0..trials {
                if model.localize(truth, &universe, 5, truth)[0].place == truth {
                    correct += 1;
                }
            }
            let q = (1.0 - pe) + pe / universe.len() as f64;
            let sigma = (trials as f64 * q * (1.0 - q)).sqrt();
            assert!(
                (correct as f64 - trials as f64 * q).abs() <= 3.0 * sigma,
                "pe={pe}: {correct} vs {:.1} +/- {:.1}",
                trials as f64 * q,
                3.0 * sigma
            );
        }
    }

    #[test]
    fn localize_identity_alignment_when_hypothesis_is_current_place() {
        let universe = small_universe(5);
        let mut model = LocalizationModel::new(0.0, 1);
        let truth = universe[2];
        let hyps = model.localize(truth, &universe, 1, truth);
        let t = hyps[0].transform;
        assert!(t.tx.abs() < 1e-12 && t.ty.abs() < 1e-12 && t.rot.abs() < 1e-12);
    }

    #[test]
    fn outlier_check_thresholds() {
        let mk = |lik: f64| Hypothesis {
            place: PlaceClass::new(0, 0, 0),
            likelihood: lik,
            transform: SE2Transform::identity(),
        };
        assert!(outlier_check(&[mk(0.52), mk(0.26)], 0.5));
        assert!(!outlier_check(&[mk(0.4)], 0.5));
        assert!(!outlier_check(&[], 0.0), "empty always rejects");
        assert!(outlier_check(&[mk(0.01)], 0.0), "tau 0 accepts anything");
    }
}
