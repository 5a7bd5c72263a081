//! Plain-text world serialization.
//!
//! Format:
//!
//! ```text
//! CONWORLD v1 <width> <height> <resolution>
//! <height rows of '#' (obstacle) / '.' (free)>
//! target <id> <x> <y>
//! ```
//!
//! Rows are written top line = row 0. Floats use Rust's shortest
//! round-trippable formatting, so save -> load -> save is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::World;
use crate::grid::{CellIndex, GridSpec};

#[derive(Debug, Error)]
pub enum WorldIoError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("missing CONWORLD header")]
    MissingHeader,
    #[error("unsupported format version {0:?}")]
    UnsupportedVersion(String),
    #[error("expected {expected} map rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row} has {found} cells, expected {expected}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },
}

pub fn save_world(world: &World) -> String {
    let spec = world.spec();
    let mut out = String::new();
    writeln!(
        out,
        "CONWORLD v1 {} {} {}",
        spec.width(),
        spec.height(),
        spec.resolution()
    )
    .unwrap();
    for iy in 0..spec.height() as i32 {
        for ix in 0..spec.width() as i32 {
            out.push(if world.is_obstacle(CellIndex::new(ix, iy)) {
                '#'
            } else {
                '.'
            });
        }
        out.push('\n');
    }
    for (id, (x, y)) in world.targets() {
        writeln!(out, "target {id} {x} {y}").unwrap();
    }
    out
}

pub fn load_world(text: &str) -> Result<World, WorldIoError> {
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or(WorldIoError::MissingHeader)?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("CONWORLD") {
        return Err(WorldIoError::MissingHeader);
    }
    match fields.next() {
        Some("v1") => {}
        other => return Err(WorldIoError::UnsupportedVersion(
            other.unwrap_or("").to_string(),
        )),
    }
    let parse_header = |field: Option<&str>| {
        field
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| WorldIoError::Malformed(1, "bad header field".into()))
    };
    let width = parse_header(fields.next())? as usize;
    let height = parse_header(fields.next())? as usize;
    let resolution = parse_header(fields.next())?;
    if width == 0 || height == 0 || resolution <= 0.0 {
        return Err(WorldIoError::Malformed(1, "bad dimensions".into()));
    }

    let mut obstacles = vec![false; width * height];
    for row in 0..height {
        let (no, line) = lines.next().ok_or(WorldIoError::RowCount {
            expected: height,
            found: row,
        })?;
        let cells: Vec<char> = line.chars().collect();
        if cells.len() != width {
            return Err(WorldIoError::RowWidth {
                row,
                expected: width,
                found: cells.len(),
            });
        }
        for (col, ch) in cells.iter().enumerate() {
            obstacles[row * width + col] = match ch {
                '#' => true,
                '.' => false,
                other => {
                    return Err(WorldIoError::Malformed(
                        no + 1,
                        format!("unexpected map character {other:?}"),
                    ))
                }
            };
        }
    }

    let mut targets = BTreeMap::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        if fields.next() != Some("target") {
            return Err(WorldIoError::Malformed(
                no + 1,
                "expected a target line".into(),
            ));
        }
        let id = fields
            .next()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| WorldIoError::Malformed(no + 1, "bad target id".into()))?;
        let x = fields
            .next()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| WorldIoError::Malformed(no + 1, "bad target x".into()))?;
        let y = fields
            .next()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| WorldIoError::Malformed(no + 1, "bad target y".into()))?;
        targets.insert(id, (x, y));
    }

    let spec = GridSpec::new(resolution, width, height, (0.0, 0.0));
    Ok(World::new(spec, obstacles, targets))
}
