//! Grid-world object-goal navigation with inter-agent knowledge transfer.
//!
//! A student agent searches a 2D grid world for a target object. A teacher
//! agent that has previously explored the same workspace answers lightweight
//! queries through a byte-level wire protocol, returning a sparse object map
//! (per-cell target-relevance scores) together with self-localization
//! hypotheses. The student merges the aligned teacher map into its own and
//! plans subgoals by simulated-observation scoring. The evaluation harness
//! measures SPL (success weighted by path length) under a controllable
//! self-localization failure rate.
//!
//! Module layout:
//!
//! - [`grid`] — cell geometry, poses, SE2 transforms, place classes, and the
//!   sparse dual-channel scored grid.
//! - [`world`] — procedurally generated ground-truth environments, the arc
//!   field-of-view model, agent kinematics, and teacher trajectories.
//! - [`perception`] — synthetic view descriptors, object-map construction,
//!   and the synthetic self-localization model.
//! - [`protocol`] — the student/proxy wire protocol, the proxy handler, map
//!   merging, and byte accounting.
//! - [`planner`] — incremental obstacle mapping, frontier extraction,
//!   Dijkstra paths, subgoal scoring and selection, local stepping.
//! - [`eval`] — episode orchestration, experiment sweeps, SPL, and CSV
//!   emission.
//!
//! See the crate examples for runnable demonstrations of each capability
//! (`cargo run --example single_episode`, etc.); the `con-sim` binary wraps
//! world generation, experiment runs, and SPL summaries in a small CLI.

pub mod eval;
pub mod grid;
pub mod perception;
pub mod planner;
pub mod protocol;
pub mod world;

pub use grid::{CellIndex, GridSpec, PlaceClass, Pose2D, ScoredGrid, SE2Transform};
pub use perception::{LocalizationModel, TeacherDataset, ViewDescriptor};
pub use protocol::{LocalizationQuery, MapResponse};
pub use world::{FovModel, World};
