//! Bit-exact wire encoding of queries and responses.
//!
//! Every message is an envelope followed by a payload:
//!
//! ```text
//! magic "CONK" (4 bytes) | version u8 = 1 | msg_type u8 | payload_len u32 LE | payload
//! ```
//!
//! Query payload (`msg_type` 1):
//!
//! ```text
//! dim u16 LE | dim f32 LE (student view) | dim f32 LE (target query)
//! | 3 f32 LE (pose hint x, y, theta)
//! ```
//!
//! Response payload (`msg_type` 2):
//!
//! ```text
//! n_hyp u8 | per hypothesis: tx, ty, rot, likelihood as f32 LE
//! | resolution f32 LE | n_cells u32 LE
//! | per cell: ix i32 LE, iy i32 LE, primary f32 LE, secondary f32 LE
//! ```
//!
//! All reals are 32-bit IEEE-754 little-endian. Message constructors round
//! their fields to 32-bit precision, so encode followed by decode is the
//! identity on every constructible message, and decode followed by encode
//! reproduces input bytes exactly.

use super::{LocalizationQuery, MapPayload, MapResponse, SparseCell};
use crate::grid::{CellIndex, Pose2D, SE2Transform};
use crate::perception::ViewDescriptor;

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"CONK";
pub const VERSION: u8 = 1;
pub const MSG_QUERY: u8 = 1;
pub const MSG_RESPONSE: u8 = 2;
/// Envelope bytes preceding every payload.
pub const ENVELOPE_LEN: usize = 10;
/// Wire bytes per sparse map cell.
pub const CELL_WIRE_LEN: usize = 16;
/// Wire bytes per hypothesis.
pub const HYPOTHESIS_WIRE_LEN: usize = 16;
/// Largest accepted hypothesis count.
pub const MAX_HYPOTHESES: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown message type {0}")]
    UnknownMessageType(u8),
    #[error("expected message type {expected}, found {found}")]
    WrongMessageType { expected: u8, found: u8 },
    #[error("message truncated: needed {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("envelope declares {declared} payload bytes but {actual} are present")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("field {0} is NaN")]
    NaNField(&'static str),
    #[error("hypothesis count {0} exceeds the protocol maximum")]
    BadHypothesisCount(u8),
    #[error("hypothesis likelihoods sum to {0}, outside 1 +/- 1e-3")]
    LikelihoodSum(f64),
    #[error("map resolution mismatch: student {student}, response {response}")]
    ResolutionMismatch { student: f64, response: f64 },
    #[error("response cell ({}, {}) is outside the student map", .0.ix, .0.iy)]
    CellOutOfBounds(CellIndex),
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, at: 0 }
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N], ProtocolError> {
        if self.at + N > self.bytes.len() {
            return Err(ProtocolError::Truncated {
                expected: self.at + N,
                found: self.bytes.len(),
            });
        }
        let mut out = [0u8; N];
        out.copy_from_slice(&self.bytes[self.at..self.at + N]);
        self.at += N;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, ProtocolError> {
        Ok(self.take::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, ProtocolError> {
        Ok(u16::from_le_bytes(self.take::<2>()?))
    }

    fn u32(&mut self) -> Result<u32, ProtocolError> {
        Ok(u32::from_le_bytes(self.take::<4>()?))
    }

    fn i32(&mut self) -> Result<i32, ProtocolError> {
        Ok(i32::from_le_bytes(self.take::<4>()?))
    }

    fn f32(&mut self, field: &'static str) -> Result<f32, ProtocolError> {
        let v = f32::from_le_bytes(self.take::<4>()?);
        if v.is_nan() {
            return Err(ProtocolError::NaNField(field));
        }
        Ok(v)
    }

    fn finish(&self) -> Result<(), ProtocolError> {
        if self.at != self.bytes.len() {
            return Err(ProtocolError::TrailingBytes(self.bytes.len() - self.at));
        }
        Ok(())
    }
}

fn push_f32(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&(v as f32).to_le_bytes());
}

fn envelope(msg_type: u8, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(ENVELOPE_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(msg_type);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(payload);
    out
}

/// Validates the envelope and returns `(msg_type, payload)`.
pub fn open_envelope(bytes: &[u8]) -> Result<(u8, &[u8]), ProtocolError> {
    if bytes.len() < ENVELOPE_LEN {
        return Err(ProtocolError::Truncated {
            expected: ENVELOPE_LEN,
            found: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(ProtocolError::BadMagic(magic));
    }
    if bytes[4] != VERSION {
        return Err(ProtocolError::UnsupportedVersion(bytes[4]));
    }
    let msg_type = bytes[5];
    if msg_type != MSG_QUERY && msg_type != MSG_RESPONSE {
        return Err(ProtocolError::UnknownMessageType(msg_type));
    }
    let declared = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let actual = bytes.len() - ENVELOPE_LEN;
    if declared != actual {
        return Err(ProtocolError::LengthMismatch { declared, actual });
    }
    Ok((msg_type, &bytes[ENVELOPE_LEN..]))
}

/// Exact encoded size (envelope included) of a query with this descriptor
/// dimension.
pub fn query_wire_len(dim: usize) -> usize {
    ENVELOPE_LEN + 2 + 2 * 4 * dim + 12
}

/// Exact encoded size (envelope included) of a response with `n_hyp`
/// hypotheses and `n_cells` map cells.
pub fn response_wire_len(n_hyp: usize, n_cells: usize) -> usize {
    ENVELOPE_LEN + 1 + HYPOTHESIS_WIRE_LEN * n_hyp + 4 + 4 + CELL_WIRE_LEN * n_cells
}

pub fn encode_query(q: &LocalizationQuery) -> Vec<u8> {
    let dim = q.student_view.dim();
    let mut payload = Vec::with_capacity(query_wire_len(dim) - ENVELOPE_LEN);
    payload.extend_from_slice(&(dim as u16).to_le_bytes());
    for &c in q.student_view.components() {
        payload.extend_from_slice(&c.to_le_bytes());
    }
    for &c in q.target_query.components() {
        payload.extend_from_slice(&c.to_le_bytes());
    }
    push_f32(&mut payload, q.pose_hint.x);
    push_f32(&mut payload, q.pose_hint.y);
    push_f32(&mut payload, q.pose_hint.theta);
    envelope(MSG_QUERY, &payload)
}

pub fn decode_query(bytes: &[u8]) -> Result<LocalizationQuery, ProtocolError> {
    let (msg_type, payload) = open_envelope(bytes)?;
    if msg_type != MSG_QUERY {
        return Err(ProtocolError::WrongMessageType {
            expected: MSG_QUERY,
            found: msg_type,
        });
    }
    let mut r = Reader::new(payload);
    let dim = r.u16()? as usize;
    let mut student_view = Vec::with_capacity(dim);
    for _ in 0..dim {
        student_view.push(r.f32("student_view")?);
    }
    let mut target_query = Vec::with_capacity(dim);
    for _ in 0..dim {
        target_query.push(r.f32("target_query")?);
    }
    let x = r.f32("pose_hint.x")? as f64;
    let y = r.f32("pose_hint.y")? as f64;
    let theta = r.f32("pose_hint.theta")? as f64;
    r.finish()?;
    // Field bits come straight off the wire so that re-encoding reproduces
    // the input exactly.
    Ok(LocalizationQuery {
        student_view: ViewDescriptor::new(student_view),
        target_query: ViewDescriptor::new(target_query),
        pose_hint: Pose2D { x, y, theta },
    })
}

pub fn encode_response(resp: &MapResponse) -> Vec<u8> {
    let mut payload =
        Vec::with_capacity(response_wire_len(resp.hypotheses.len(), resp.map.cells.len()));
    payload.push(resp.hypotheses.len() as u8);
    for (t, likelihood) in &resp.hypotheses {
        push_f32(&mut payload, t.tx);
        push_f32(&mut payload, t.ty);
        push_f32(&mut payload, t.rot);
        push_f32(&mut payload, *likelihood);
    }
    push_f32(&mut payload, resp.map.resolution);
    payload.extend_from_slice(&(resp.map.cells.len() as u32).to_le_bytes());
    for cell in &resp.map.cells {
        payload.extend_from_slice(&cell.cell.ix.to_le_bytes());
        payload.extend_from_slice(&cell.cell.iy.to_le_bytes());
        push_f32(&mut payload, cell.primary);
        push_f32(&mut payload, cell.secondary);
    }
    envelope(MSG_RESPONSE, &payload)
}

pub fn decode_response(bytes: &[u8]) -> Result<MapResponse, ProtocolError> {
    let (msg_type, payload) = open_envelope(bytes)?;
    if msg_type != MSG_RESPONSE {
        return Err(ProtocolError::WrongMessageType {
            expected: MSG_RESPONSE,
            found: msg_type,
        });
    }
    let mut r = Reader::new(payload);
    let n_hyp = r.u8()?;
    if n_hyp as usize > MAX_HYPOTHESES {
        return Err(ProtocolError::BadHypothesisCount(n_hyp));
    }
    let mut hypotheses = Vec::with_capacity(n_hyp as usize);
    for _ in 0..n_hyp {
        let tx = r.f32("hypothesis.tx")? as f64;
        let ty = r.f32("hypothesis.ty")? as f64;
        let rot = r.f32("hypothesis.rot")? as f64;
        let likelihood = r.f32("hypothesis.likelihood")? as f64;
        hypotheses.push((SE2Transform { tx, ty, rot }, likelihood));
    }
    if n_hyp > 0 {
        let sum: f64 = hypotheses.iter().map(|(_, l)| *l).sum();
        if (sum - 1.0).abs() > 1e-3 {
            return Err(ProtocolError::LikelihoodSum(sum));
        }
    }
    let resolution = r.f32("resolution")? as f64;
    let n_cells = r.u32()? as usize;
    // Bound the allocation by what the payload can actually hold.
    let remaining = payload.len().saturating_sub(r.at);
    if n_cells * CELL_WIRE_LEN > remaining {
        return Err(ProtocolError::Truncated {
            expected: r.at + n_cells * CELL_WIRE_LEN,
            found: payload.len(),
        });
    }
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let ix = r.i32()?;
        let iy = r.i32()?;
        let primary = r.f32("cell.primary")? as f64;
        let secondary = r.f32("cell.secondary")? as f64;
        cells.push(SparseCell {
            cell: CellIndex::new(ix, iy),
            primary,
            secondary,
        });
    }
    r.finish()?;
    Ok(MapResponse::assemble(
        hypotheses,
        MapPayload { resolution, cells },
    ))
}

/// Total length of an encoded message, exactly as the byte ledger counts it.
pub fn message_size(bytes: &[u8]) -> usize {
    bytes.len()
}
