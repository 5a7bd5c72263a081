//! The student/proxy question-answer protocol: wire messages, the
//! proxy-side query handler, multi-hypothesis map merging, and per-episode
//! byte accounting.
//!
//! The byte layouts in [`codec`] are normative; the in-process and socket
//! transports both carry exactly those bytes. Message constructors round
//! numeric fields to 32-bit precision (the wire's width), which is what
//! makes encode/decode round-trips exact.

mod codec;
pub mod transport;

pub use codec::{
    decode_query, decode_response, encode_query, encode_response, message_size, open_envelope,
    query_wire_len, response_wire_len, ProtocolError, CELL_WIRE_LEN, ENVELOPE_LEN,
    HYPOTHESIS_WIRE_LEN, MAGIC, MAX_HYPOTHESES, MSG_QUERY, MSG_RESPONSE, VERSION,
};

use crate::grid::{pose_to_place_class, transform_grid, CellIndex, Pose2D, ScoredGrid, SE2Transform};
use crate::perception::{
    build_object_map, outlier_check, similarity, LocalizationModel, TeacherDataset, ViewDescriptor,
};

/// Rounds through f32, the precision the wire carries.
fn q32(v: f64) -> f64 {
    v as f32 as f64
}

/// A student's localization question: its current view, the target it is
/// looking for, and its own pose estimate (used to anchor alignments).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationQuery {
    pub student_view: ViewDescriptor,
    pub target_query: ViewDescriptor,
    pub pose_hint: Pose2D,
}

impl LocalizationQuery {
    pub fn new(student_view: ViewDescriptor, target_query: ViewDescriptor, pose_hint: Pose2D) -> Self {
        assert_eq!(student_view.dim(), target_query.dim());
        Self {
            student_view,
            target_query,
            pose_hint: Pose2D {
                x: q32(pose_hint.x),
                y: q32(pose_hint.y),
                theta: q32(pose_hint.theta),
            },
        }
    }
}

/// One nonzero cell of a sparse map on the wire.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseCell {
    pub cell: CellIndex,
    pub primary: f64,
    pub secondary: f64,
}

/// Sparse map content as carried on the wire: a resolution plus nonzero
/// cells. Grid dimensions are not transmitted; the student materializes the
/// cells into its own frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MapPayload {
    pub resolution: f64,
    pub cells: Vec<SparseCell>,
}

impl MapPayload {
    pub fn from_grid(grid: &ScoredGrid) -> Self {
        Self {
            resolution: grid.spec().resolution(),
            cells: grid
                .iter()
                .map(|(cell, s)| SparseCell {
                    cell,
                    primary: s.primary,
                    secondary: s.secondary,
                })
                .collect(),
        }
    }

    /// Materializes the payload as a scored grid in the given frame.
    /// Cells outside the frame are an error: real teacher maps are always
    /// in bounds, so out-of-range indices mean a malformed response.
    pub fn to_grid(&self, spec: &crate::grid::GridSpec) -> Result<ScoredGrid, ProtocolError> {
        if (self.resolution - spec.resolution()).abs() > 1e-6 {
            return Err(ProtocolError::ResolutionMismatch {
                student: spec.resolution(),
                response: self.resolution,
            });
        }
        let mut grid = ScoredGrid::new(*spec);
        for c in &self.cells {
            if !spec.contains(c.cell) {
                return Err(ProtocolError::CellOutOfBounds(c.cell));
            }
            grid.fold_cell(c.cell, c.primary.clamp(0.0, 1.0), c.secondary.max(0.0));
        }
        Ok(grid)
    }
}

/// The proxy's answer: alignment hypotheses (empty on rejection) plus the
/// teacher's sparse object map for the queried target.
#[derive(Clone, Debug, PartialEq)]
pub struct MapResponse {
    pub hypotheses: Vec<(SE2Transform, f64)>,
    pub map: MapPayload,
    /// Total encoded size, envelope included.
    pub byte_size: usize,
}

impl MapResponse {
    /// Builds a response, rounding all numeric fields to wire precision.
    pub fn new(hypotheses: Vec<(SE2Transform, f64)>, map: MapPayload) -> Self {
        assert!(hypotheses.len() <= MAX_HYPOTHESES);
        let hypotheses = hypotheses
            .into_iter()
            .map(|(t, l)| {
                (
                    SE2Transform {
                        tx: q32(t.tx),
                        ty: q32(t.ty),
                        rot: q32(t.rot),
                    },
                    q32(l),
                )
            })
            .collect();
        let map = MapPayload {
            resolution: q32(map.resolution),
            cells: map
                .cells
                .into_iter()
                .map(|c| SparseCell {
                    cell: c.cell,
                    primary: q32(c.primary),
                    secondary: q32(c.secondary),
                })
                .collect(),
        };
        Self::assemble(hypotheses, map)
    }

    /// Internal constructor for already-wire-precision fields.
    pub(crate) fn assemble(hypotheses: Vec<(SE2Transform, f64)>, map: MapPayload) -> Self {
        let byte_size = response_wire_len(hypotheses.len(), map.cells.len());
        Self {
            hypotheses,
            map,
            byte_size,
        }
    }

    /// The reject answer: no hypotheses, no map. The student performs no
    /// merge on receiving this.
    pub fn rejection(resolution: f64) -> Self {
        Self::assemble(
            Vec::new(),
            MapPayload {
                resolution: q32(resolution),
                cells: Vec::new(),
            },
        )
    }

    pub fn is_rejection(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

/// Proxy-side knobs.
#[derive(Clone, Copy, Debug)]
pub struct ProxyConfig {
    /// Hypotheses per response.
    pub hypothesis_count: usize,
    /// Outlier threshold on the rank-1 likelihood; 0 disables rejection.
    pub tau: f64,
    /// Object-map sparsity threshold.
    pub sparsity_theta: f64,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        Self {
            hypothesis_count: 5,
            tau: 0.0,
            sparsity_theta: crate::perception::DEFAULT_SPARSITY_THETA,
        }
    }
}

/// Answers one localization query against the teacher's dataset.
///
/// The proxy localizes the student (synthetically, anchored on
/// `true_place`), converts each hypothesis into an SE2 alignment, builds
/// the sparse object map for the queried target, and packages everything.
/// A student standing somewhere the teacher never visited classifies as a
/// novel place, which rejects, as does an outlier-check failure.
pub fn proxy_handle_query(
    dataset: &TeacherDataset,
    query: &LocalizationQuery,
    model: &mut LocalizationModel,
    true_place: crate::grid::PlaceClass,
    config: &ProxyConfig,
) -> MapResponse {
    let resolution = dataset.spec().resolution();
    if !dataset.knows_place(true_place) {
        return MapResponse::rejection(resolution);
    }
    let student_place = pose_to_place_class(&query.pose_hint);
    let hypotheses = model.localize(
        true_place,
        dataset.universe(),
        config.hypothesis_count,
        student_place,
    );
    if !outlier_check(&hypotheses, config.tau) {
        return MapResponse::rejection(resolution);
    }
    let map = build_object_map(dataset, &query.target_query, config.sparsity_theta);
    MapResponse::new(
        hypotheses
            .into_iter()
            .map(|h| (h.transform, h.likelihood))
            .collect(),
        MapPayload::from_grid(&map),
    )
}

/// Merges a response into the student's map: for each hypothesis in order,
/// the teacher map is aligned by that hypothesis and folded in cell-wise
/// (max on the primary channel, sum on the secondary).
pub fn merge_maps(student: &ScoredGrid, response: &MapResponse) -> Result<ScoredGrid, ProtocolError> {
    let source = response.map.to_grid(student.spec())?;
    let mut merged = student.clone();
    for (transform, _likelihood) in &response.hypotheses {
        let aligned = transform_grid(&source, transform, student.spec());
        merged.fold_grid(&aligned);
    }
    Ok(merged)
}

/// Running per-episode totals of protocol traffic, envelope included.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ByteLedger {
    pub query_bytes: u64,
    pub response_bytes: u64,
    pub queries: u32,
    pub responses: u32,
}

impl ByteLedger {
    pub fn record_query(&mut self, bytes: &[u8]) {
        self.query_bytes += message_size(bytes) as u64;
        self.queries += 1;
    }

    pub fn record_response(&mut self, bytes: &[u8]) {
        self.response_bytes += message_size(bytes) as u64;
        self.responses += 1;
    }

    pub fn total(&self) -> u64 {
        self.query_bytes + self.response_bytes
    }
}

/// Convenience wrapper bundling a dataset, a localization model, and a
/// config into a bytes-in/bytes-out query server.
pub struct StudentProxy {
    pub dataset: TeacherDataset,
    pub model: LocalizationModel,
    pub config: ProxyConfig,
}

impl StudentProxy {
    pub fn new(dataset: TeacherDataset, model: LocalizationModel, config: ProxyConfig) -> Self {
        Self {
            dataset,
            model,
            config,
        }
    }

    /// Decodes a query message, handles it, and encodes the response.
    pub fn handle_bytes(
        &mut self,
        query_bytes: &[u8],
        true_place: crate::grid::PlaceClass,
    ) -> Result<Vec<u8>, ProtocolError> {
        let query = decode_query(query_bytes)?;
        let response =
            proxy_handle_query(&self.dataset, &query, &mut self.model, true_place, &self.config);
        Ok(encode_response(&response))
    }
}

/// The similarity behind a proxy's map values, re-exported for examples
/// that want to display per-record scores.
pub fn record_similarity(dataset: &TeacherDataset, query: &ViewDescriptor) -> Vec<f64> {
    dataset
        .records()
        .iter()
        .map(|r| similarity(query, &r.view))
        .collect()
}
