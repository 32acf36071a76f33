//! Flat `key = value` scenario files.
//!
//! One setting per line, `#` starts a comment. Keys are dotted paths such as
//! `pad.pitch_deg`. Angles are written in degrees and altitudes as height
//! above ground (`_h_m`), while [`ScenarioConfig`] stores radians and a
//! z-down position. Absent keys keep their defaults.

use std::collections::HashSet;

use slopeland::{ConstraintViolation, ScenarioConfig};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error(transparent)]
    Constraint(#[from] ConstraintViolation),
}

/// How a key's text value maps onto the stored number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Plain,
    Degrees,
    /// Height above ground stored as a z-down coordinate.
    Height,
}

impl Unit {
    fn to_internal(self, v: f64) -> f64 {
        match self {
            Unit::Plain => v,
            Unit::Degrees => v.to_radians(),
            Unit::Height => -v,
        }
    }

    fn to_external(self, v: f64) -> f64 {
        match self {
            Unit::Plain => v,
            Unit::Degrees => v.to_degrees(),
            Unit::Height => -v,
        }
    }
}

enum Slot {
    Num(fn(&mut ScenarioConfig) -> &mut f64),
    /// `auto` leaves the value to be derived from the rest of the config.
    Auto(fn(&mut ScenarioConfig) -> &mut Option<f64>),
    Seed,
}

struct Key {
    name: &'static str,
    unit: Unit,
    slot: Slot,
}

macro_rules! keys {
    ($($name:literal $unit:ident $kind:ident [$($path:tt)*];)*) => {
        &[$(Key { name: $name, unit: Unit::$unit, slot: keys!(@slot $kind $($path)*) }),*]
    };
    (@slot num $($path:tt)*) => { Slot::Num(|c| &mut c.$($path)*) };
    (@slot auto $($path:tt)*) => { Slot::Auto(|c| &mut c.$($path)*) };
    (@slot seed) => { Slot::Seed };
}

/// Every accepted key, in the order `serialize_config` writes them.
const KEYS: &[Key] = keys! {
    "vehicle.mass_kg" Plain num [vehicle.mass];
    "vehicle.k_du" Plain num [vehicle.k_du];
    "vehicle.k_dv" Plain num [vehicle.k_dv];
    "vehicle.k_zdot" Plain num [vehicle.k_zdot];
    "vehicle.k_coll" Plain num [vehicle.k_coll];
    "vehicle.gravity" Plain num [vehicle.gravity];
    "vehicle.tau_att_roll_s" Plain num [vehicle.tau_att.x];
    "vehicle.tau_att_pitch_s" Plain num [vehicle.tau_att.y];
    "vehicle.tau_att_yaw_s" Plain num [vehicle.tau_att.z];
    "vehicle.k_act_roll" Plain num [vehicle.k_act.x];
    "vehicle.k_act_pitch" Plain num [vehicle.k_act.y];
    "vehicle.k_act_yaw" Plain num [vehicle.k_act.z];
    "gains.v_max" Plain num [gains.v_max];
    "gains.lambda_p" Plain num [gains.lambda_p];
    "gains.lambda_z" Plain num [gains.lambda_z];
    "gains.lambda_u" Plain num [gains.lambda_u];
    "gains.lambda_v" Plain num [gains.lambda_v];
    "gains.k_iu" Plain num [gains.k_iu];
    "gains.k_iv" Plain num [gains.k_iv];
    "gains.lambda_vz" Plain num [gains.lambda_vz];
    "gains.k_ivz" Plain num [gains.k_ivz];
    "gains.k_phi" Plain num [gains.k_phi];
    "gains.k_theta" Plain num [gains.k_theta];
    "gains.k_psi" Plain num [gains.k_psi];
    "gains.pitch_filter_tau_s" Plain num [gains.pitch_filter_tau];
    "gains.tilt_max_deg" Degrees num [gains.tilt_max];
    "pad.x_m" Plain num [pad.center.x];
    "pad.y_m" Plain num [pad.center.y];
    "pad.h_m" Height num [pad.center.z];
    "pad.pitch_deg" Degrees num [pad.pitch];
    "pad.side_m" Plain num [pad.side];
    "pad.bond_distance_m" Plain num [pad.bond_distance];
    "pad.bond_attitude_tol_deg" Degrees num [pad.bond_attitude_tol];
    "pad.skid_dx_m" Plain num [pad.skid_offset.x];
    "pad.skid_dy_m" Plain num [pad.skid_offset.y];
    "pad.skid_depth_m" Plain num [pad.skid_offset.z];
    "pad.offset_x_m" Plain num [pad_offset.x];
    "pad.offset_y_m" Plain num [pad_offset.y];
    "pad.offset_h_m" Height num [pad_offset.z];
    "corridor.origin_x_m" Plain num [corridor.origin_x];
    "corridor.origin_y_m" Plain num [corridor.origin_y];
    "corridor.depth_m" Plain num [corridor.depth];
    "corridor.width_start_m" Plain num [corridor.width_start];
    "corridor.width_end_m" Plain num [corridor.width_end];
    "corridor.height_m" Plain num [corridor.height];
    "maneuver.hover_x_m" Plain num [maneuver.hover_start.x];
    "maneuver.hover_y_m" Plain num [maneuver.hover_start.y];
    "maneuver.hover_h_m" Height num [maneuver.hover_start.z];
    "maneuver.start_delay_s" Plain num [maneuver.start_delay];
    "maneuver.x_switch_m" Plain auto [maneuver.x_switch];
    "maneuver.switch_margin_m" Plain num [maneuver.switch_margin];
    "maneuver.approach_speed_mps" Plain num [maneuver.approach_speed];
    "maneuver.approach_altitude_m" Plain auto [maneuver.approach_altitude];
    "maneuver.approach_clearance_m" Plain num [maneuver.approach_clearance];
    "maneuver.flare_pitch_deg" Degrees auto [maneuver.flare_pitch];
    "maneuver.flare_sink_m" Plain num [maneuver.flare_sink];
    "maneuver.t_abort_s" Plain num [maneuver.t_abort];
    "maneuver.abort_x_m" Plain num [maneuver.abort_waypoint.x];
    "maneuver.abort_y_m" Plain num [maneuver.abort_waypoint.y];
    "maneuver.abort_h_m" Height num [maneuver.abort_waypoint.z];
    "sensor.sigma_pos_m" Plain num [sensor.sigma_pos];
    "sensor.sigma_att_deg" Degrees num [sensor.sigma_att];
    "sensor.sigma_vel_mps" Plain num [sensor.sigma_vel];
    "sensor.sigma_rate_dps" Degrees num [sensor.sigma_rate];
    "sensor.seed" Plain seed [];
    "sim.dt_s" Plain num [dt];
    "sim.t_max_s" Plain num [t_max];
    "sim.log_interval_s" Plain num [log_interval];
};

pub fn known_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|k| k.name)
}

fn lookup(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn parse_number(text: &str, line: usize, col: usize) -> Result<f64, ConfigError> {
    let v: f64 = text
        .parse()
        .map_err(|_| parse_err(line, col, format!("`{text}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(line, col, format!("`{text}` is not finite")))
    }
}

fn assign(cfg: &mut ScenarioConfig, key: &Key, text: &str, line: usize, col: usize) -> Result<(), ConfigError> {
    match key.slot {
        Slot::Num(get) => *get(cfg) = key.unit.to_internal(parse_number(text, line, col)?),
        Slot::Auto(get) => {
            *get(cfg) = if text == "auto" {
                None
            } else {
                Some(key.unit.to_internal(parse_number(text, line, col)?))
            }
        }
        Slot::Seed => {
            cfg.sensor.seed = text
                .parse()
                .map_err(|_| parse_err(line, col, format!("`{text}` is not a non-negative integer")))?
        }
    }
    Ok(())
}

/// Applies the settings in `text` on top of `base` without validating.
pub fn merge_config(base: ScenarioConfig, text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = base;
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(parse_err(line, col, "expected `key = value`"));
        };
        let (lhs, rhs) = (&content[..eq], &content[eq + 1..]);
        let key_name = lhs.trim();
        if key_name.is_empty() {
            return Err(parse_err(line, 1, "missing key before `=`"));
        }
        let value = rhs.trim();
        let value_col = eq + 2 + (rhs.len() - rhs.trim_start().len());
        if value.is_empty() {
            return Err(parse_err(line, value_col, format!("missing value for `{key_name}`")));
        }
        let key = lookup(key_name).ok_or_else(|| ConfigError::UnknownKey {
            key: key_name.to_string(),
            line,
        })?;
        if !seen.insert(key.name) {
            let col = lhs.len() - lhs.trim_start().len() + 1;
            return Err(parse_err(line, col, format!("duplicate key `{key_name}`")));
        }
        assign(&mut cfg, key, value, line, value_col)?;
    }
    Ok(cfg)
}

/// Parses a complete scenario file: defaults, then the file, then validation.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg = merge_config(ScenarioConfig::default(), text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Applies `key=value` overrides in order and validates the result.
pub fn apply_overrides<S: AsRef<str>>(base: ScenarioConfig, overrides: &[S]) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = base;
    for o in overrides {
        cfg = merge_config(cfg, o.as_ref())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Shortest decimal whose parse lands exactly on `stored` after unit
/// conversion, searched among the nearby doubles of the converted value.
fn external_text(unit: Unit, stored: f64) -> String {
    // adding zero turns a negative zero into a plain one
    let shown = unit.to_external(stored) + 0.0;
    let (mut up, mut down) = (shown, shown);
    let mut best: Option<String> = None;
    for candidate in std::iter::once(shown).chain((0..64).flat_map(|_| {
        up = up.next_up();
        down = down.next_down();
        [down, up]
    })) {
        if unit.to_internal(candidate) == stored {
            let text = candidate.to_string();
            if best.as_ref().is_none_or(|b| text.len() < b.len()) {
                best = Some(text);
            }
        }
    }
    best.unwrap_or_else(|| shown.to_string())
}

/// Writes every key, so the output documents the full configuration.
/// Parsing the result yields the same config.
pub fn serialize_config(cfg: &ScenarioConfig) -> String {
    let mut scratch = cfg.clone();
    let mut out = String::new();
    let mut section = "";
    for key in KEYS {
        let head = key.name.split('.').next().unwrap_or("");
        if head != section {
            if !section.is_empty() {
                out.push('\n');
            }
            section = head;
        }
        let value = match key.slot {
            Slot::Num(get) => external_text(key.unit, *get(&mut scratch)),
            Slot::Auto(get) => match *get(&mut scratch) {
                Some(v) => external_text(key.unit, v),
                None => "auto".to_string(),
            },
            Slot::Seed => scratch.sensor.seed.to_string(),
        };
        out.push_str(&format!("{} = {}\n", key.name, value));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert!((cfg.pad.pitch.to_degrees() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn pitch_is_read_in_degrees() {
        let cfg = parse_config("pad.pitch_deg = 60").unwrap();
        assert_eq!(cfg.pad.pitch, 60f64.to_radians());
    }

    #[test]
    fn negative_mass_names_the_constraint() {
        let err = parse_config("vehicle.mass_kg = -1").unwrap_err();
        match err {
            ConfigError::Constraint(c) => assert!(c.0.contains("mass_kg > 0"), "{c}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\n  pad.pitch_deg = 25   # steeper\nsensor.seed=7\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.pad.pitch, 25f64.to_radians());
        assert_eq!(cfg.sensor.seed, 7);
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(
            parse_config("pad.side_m = 1\n  oops\n"),
            Err(ConfigError::Parse {
                line: 2,
                col: 3,
                msg: "expected `key = value`".into()
            })
        );
        match parse_config("pad.side_m =  wide") {
            Err(ConfigError::Parse { line: 1, col: 15, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_config("pad.side_m = 1\npad.side_m = 2"),
            Err(ConfigError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("pad.side_m = inf"),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert_eq!(
            parse_config("\npad.colour = 3"),
            Err(ConfigError::UnknownKey {
                key: "pad.colour".into(),
                line: 2
            })
        );
    }

    #[test]
    fn auto_keys() {
        let cfg = parse_config("maneuver.x_switch_m = 3.2\nmaneuver.flare_pitch_deg = 55").unwrap();
        assert_eq!(cfg.maneuver.x_switch, Some(3.2));
        assert_eq!(cfg.maneuver.flare_pitch, Some(55f64.to_radians()));
        let back = merge_config(cfg, "maneuver.x_switch_m = auto").unwrap();
        assert_eq!(back.maneuver.x_switch, None);
    }

    #[test]
    fn heights_are_positive_up() {
        let cfg = parse_config("maneuver.hover_h_m = 2").unwrap();
        assert_eq!(cfg.maneuver.hover_start.z, -2.0);
    }

    #[test]
    fn overrides_apply_in_order() {
        let cfg = apply_overrides(ScenarioConfig::default(), &["pad.pitch_deg=40", "pad.pitch_deg = 45"]).unwrap();
        assert_eq!(cfg.pad.pitch, 45f64.to_radians());
        assert!(apply_overrides(ScenarioConfig::default(), &["pad.pitch_deg=80"]).is_err());
    }

    #[test]
    fn default_config_round_trips() {
        let cfg = ScenarioConfig::default();
        let text = serialize_config(&cfg);
        assert_eq!(parse_config(&text).unwrap(), cfg);
        assert_eq!(text.lines().filter(|l| l.contains('=')).count(), KEYS.len());
    }

    #[test]
    fn degree_values_round_trip_exactly() {
        for deg in [0.1, 10.0, 17.3, 33.333, 45.0, 59.99, 60.0, 69.5] {
            let cfg = parse_config(&format!("pad.pitch_deg = {deg}")).unwrap();
            let again = parse_config(&serialize_config(&cfg)).unwrap();
            assert_eq!(again.pad.pitch, cfg.pad.pitch, "{deg}");
        }
    }
}
