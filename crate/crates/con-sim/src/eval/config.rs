//! Line-oriented `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Every key has a default;
//! unknown or duplicate keys are errors (fail fast rather than silently
//! ignoring a typo). List-valued keys take space-separated entries.

use std::collections::HashSet;

use thiserror::Error;

use super::{experiment::ExperimentConfig, Method};
use crate::world::Scenario;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`, got {1:?}")]
    Malformed(usize, String),
    #[error("line {0}: unknown key {1:?}")]
    UnknownKey(usize, String),
    #[error("line {0}: duplicate key {1:?}")]
    DuplicateKey(usize, String),
    #[error("line {0}: bad value for {1}: {2}")]
    BadValue(usize, &'static str, String),
    #[error("{0}")]
    Invalid(String),
}

/// The documented default configuration, suitable as a starting point for
/// `con-sim run --config`.
pub fn default_config_text() -> String {
    let d = ExperimentConfig::default();
    let w = &d.world_gen;
    let s = &d.sim;
    format!(
        "\
# Experiment matrix
world_seed = {}
worlds = {}
targets_per_world = {}
seeds_per_target = {}
scenarios = constrained_start
methods = proposed w/o_merge frontier
pe_values = 0

# World generation (cells; resolution in meters per cell)
world_width = {}
world_height = {}
resolution = {}
min_rooms = {}
max_rooms = {}
min_room_size = {}
max_room_size = {}
corridor_width = {}

# Episode
step_budget = {}
view_radius = {}
view_angle_deg = 40
detection_radius = {}
waypoint_spacing = {}
exclusion_radius = {}
student_start_distance = {}

# Perception and protocol
descriptor_dim = {}
sparsity_theta = {}
tau = {}
hypotheses = {}
teacher_steps = {}
teacher_observe_interval = {}
record_interval = {}
",
        d.world_seed,
        d.worlds,
        d.targets_per_world,
        d.seeds_per_target,
        w.width,
        w.height,
        w.resolution,
        w.min_rooms,
        w.max_rooms,
        w.min_room_size,
        w.max_room_size,
        w.corridor_width,
        s.step_budget,
        s.fov.view_radius,
        s.fov.detection_radius,
        s.waypoint_spacing,
        s.exclusion_radius,
        s.student_start_distance,
        d.descriptor_dim,
        s.sparsity_theta,
        s.tau,
        s.hypothesis_count,
        s.teacher_walk.steps,
        s.teacher_walk.observe_interval,
        s.record_interval,
    )
}

/// Parses a configuration file into an [`ExperimentConfig`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::default();
    let mut seen: HashSet<String> = HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed(line_no, raw.to_string()));
        };
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::DuplicateKey(line_no, key.to_string()));
        }

        apply_key(&mut config, key, value, line_no)?;
    }

    validate(&config)?;
    Ok(config)
}

fn apply_key(
    config: &mut ExperimentConfig,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), ConfigError> {
    fn num<T: std::str::FromStr>(
        value: &str,
        line: usize,
        key: &'static str,
    ) -> Result<T, ConfigError> {
        value
            .parse()
            .map_err(|_| ConfigError::BadValue(line, key, value.to_string()))
    }

    match key {
        "world_seed" => config.world_seed = num(value, line, "world_seed")?,
        "worlds" => config.worlds = num(value, line, "worlds")?,
        "targets_per_world" => config.targets_per_world = num(value, line, "targets_per_world")?,
        "seeds_per_target" => config.seeds_per_target = num(value, line, "seeds_per_target")?,
        "scenarios" => {
            config.scenarios = value
                .split_whitespace()
                .map(|s| {
                    Scenario::parse(s)
                        .ok_or_else(|| ConfigError::BadValue(line, "scenarios", s.to_string()))
                })
                .collect::<Result<_, _>>()?;
        }
        "methods" => {
            config.methods = value
                .split_whitespace()
                .map(|s| {
                    Method::parse(s)
                        .ok_or_else(|| ConfigError::BadValue(line, "methods", s.to_string()))
                })
                .collect::<Result<_, _>>()?;
        }
        "pe_values" => {
            config.pe_values = value
                .split_whitespace()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| ConfigError::BadValue(line, "pe_values", s.to_string()))
                })
                .collect::<Result<_, _>>()?;
        }
        "world_width" => config.world_gen.width = num(value, line, "world_width")?,
        "world_height" => config.world_gen.height = num(value, line, "world_height")?,
        "resolution" => config.world_gen.resolution = num(value, line, "resolution")?,
        "min_rooms" => config.world_gen.min_rooms = num(value, line, "min_rooms")?,
        "max_rooms" => config.world_gen.max_rooms = num(value, line, "max_rooms")?,
        "min_room_size" => config.world_gen.min_room_size = num(value, line, "min_room_size")?,
        "max_room_size" => config.world_gen.max_room_size = num(value, line, "max_room_size")?,
        "corridor_width" => config.world_gen.corridor_width = num(value, line, "corridor_width")?,
        "step_budget" => config.sim.step_budget = num(value, line, "step_budget")?,
        "view_radius" => config.sim.fov.view_radius = num(value, line, "view_radius")?,
        "view_angle_deg" => {
            let deg: f64 = num(value, line, "view_angle_deg")?;
            config.sim.fov.view_angle = deg.to_radians();
        }
        "detection_radius" => config.sim.fov.detection_radius = num(value, line, "detection_radius")?,
        "waypoint_spacing" => config.sim.waypoint_spacing = num(value, line, "waypoint_spacing")?,
        "exclusion_radius" => config.sim.exclusion_radius = num(value, line, "exclusion_radius")?,
        "student_start_distance" => {
            config.sim.student_start_distance = num(value, line, "student_start_distance")?;
        }
        "descriptor_dim" => config.descriptor_dim = num(value, line, "descriptor_dim")?,
        "sparsity_theta" => config.sim.sparsity_theta = num(value, line, "sparsity_theta")?,
        "tau" => config.sim.tau = num(value, line, "tau")?,
        "hypotheses" => config.sim.hypothesis_count = num(value, line, "hypotheses")?,
        "teacher_steps" => config.sim.teacher_walk.steps = num(value, line, "teacher_steps")?,
        "teacher_observe_interval" => {
            config.sim.teacher_walk.observe_interval =
                num(value, line, "teacher_observe_interval")?;
        }
        "record_interval" => config.sim.record_interval = num(value, line, "record_interval")?,
        "max_global_events" => config.sim.max_global_events = num(value, line, "max_global_events")?,
        _ => return Err(ConfigError::UnknownKey(line, key.to_string())),
    }
    Ok(())
}

fn validate(config: &ExperimentConfig) -> Result<(), ConfigError> {
    let fail = |msg: String| Err(ConfigError::Invalid(msg));
    if config.worlds == 0 || config.targets_per_world == 0 || config.seeds_per_target == 0 {
        return fail("worlds, targets_per_world, and seeds_per_target must be positive".into());
    }
    if config.scenarios.is_empty() || config.methods.is_empty() || config.pe_values.is_empty() {
        return fail("scenarios, methods, and pe_values must be non-empty".into());
    }
    for &pe in &config.pe_values {
        if !(0.0..=1.0).contains(&pe) {
            return fail(format!("pe value {pe} outside [0, 1]"));
        }
    }
    let fov = &config.sim.fov;
    if fov.view_radius <= 0.0
        || fov.detection_radius <= 0.0
        || fov.detection_radius > fov.view_radius
    {
        return fail("need 0 < detection_radius <= view_radius".into());
    }
    if fov.view_angle <= 0.0 || fov.view_angle >= 2.0 * std::f64::consts::PI {
        return fail("view angle must be inside (0, 360) degrees".into());
    }
    if config.world_gen.resolution <= 0.0 {
        return fail("resolution must be positive".into());
    }
    if config.descriptor_dim == 0 || config.descriptor_dim > u16::MAX as usize {
        return fail("descriptor_dim must be in [1, 65535]".into());
    }
    if config.sim.hypothesis_count == 0 || config.sim.hypothesis_count > 5 {
        return fail("hypotheses must be in [1, 5]".into());
    }
    if !(0.0..=1.0).contains(&config.sim.sparsity_theta) {
        return fail("sparsity_theta must be in [0, 1]".into());
    }
    if config.sim.waypoint_spacing <= 0.0 {
        return fail("waypoint_spacing must be positive".into());
    }
    Ok(())
}
