//! Scenario file loading: a JSON document describing the world.
//!
//! Schema:
//! ```json
//! {
//!   "bounds": { "xmin": 0.0, "ymin": 0.0, "xmax": 1.0, "ymax": 1.0 },
//!   "obstacles": [ [[x, y], [x, y], [x, y], ...], ... ],
//!   "init": [x, y],
//!   "goal": [x, y]
//! }
//! ```
//! Each obstacle is a closed vertex loop (first vertex not repeated) with at
//! least three vertices and no self-intersections. `init` and `goal` must lie
//! inside the bounds and outside every obstacle. Validation failures name the
//! offending field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::world::{Bounds, Polygon, State, World};

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioDoc {
    bounds: Bounds,
    obstacles: Vec<Vec<[f64; 2]>>,
    init: [f64; 2],
    goal: [f64; 2],
}

fn invalid(field: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Parse and validate a scenario document into a `World`.
pub fn parse_world(text: &str) -> Result<World, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_str(text)?;
    if !(doc.bounds.xmin.is_finite()
        && doc.bounds.xmax.is_finite()
        && doc.bounds.ymin.is_finite()
        && doc.bounds.ymax.is_finite())
    {
        return Err(invalid("bounds", "coordinates must be finite"));
    }
    if doc.bounds.xmin >= doc.bounds.xmax || doc.bounds.ymin >= doc.bounds.ymax {
        return Err(invalid(
            "bounds",
            "min must be strictly below max on both axes",
        ));
    }
    let mut obstacles = Vec::with_capacity(doc.obstacles.len());
    for (i, loop_) in doc.obstacles.iter().enumerate() {
        let field = format!("obstacles[{i}]");
        if loop_.len() < 3 {
            return Err(invalid(&field, "polygon needs at least 3 vertices"));
        }
        let poly = Polygon::new(loop_.iter().map(|&[x, y]| State::new(x, y)).collect());
        if poly.vertices.iter().any(|v| !v.is_finite()) {
            return Err(invalid(&field, "vertex coordinates must be finite"));
        }
        if !poly.is_simple() {
            return Err(invalid(
                &field,
                "polygon must be simple (no self-intersection)",
            ));
        }
        obstacles.push(poly);
    }
    let world = World {
        bounds: doc.bounds,
        obstacles,
        x_init: State::new(doc.init[0], doc.init[1]),
        x_goal: State::new(doc.goal[0], doc.goal[1]),
    };
    if !world.x_init.is_finite() || !world.state_free(world.x_init) {
        return Err(invalid(
            "init",
            "must lie inside bounds and outside all obstacles",
        ));
    }
    if !world.x_goal.is_finite() || !world.state_free(world.x_goal) {
        return Err(invalid(
            "goal",
            "must lie inside bounds and outside all obstacles",
        ));
    }
    Ok(world)
}

/// Load a scenario file from disk.
pub fn load_world(path: impl AsRef<Path>) -> Result<World, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    parse_world(&text)
}

/// Serialize a world back to the scenario schema.
pub fn to_document(world: &World) -> String {
    let doc = ScenarioDoc {
        bounds: world.bounds,
        obstacles: world
            .obstacles
            .iter()
            .map(|p| p.vertices.iter().map(|v| [v.x, v.y]).collect())
            .collect(),
        init: [world.x_init.x, world.x_init.y],
        goal: [world.x_goal.x, world.x_goal.y],
    };
    serde_json::to_string_pretty(&doc).expect("scenario serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "bounds": {"xmin": 0.0, "ymin": 0.0, "xmax": 1.0, "ymax": 1.0},
        "obstacles": [[[0.4, 0.4], [0.6, 0.4], [0.6, 0.6], [0.4, 0.6]]],
        "init": [0.1, 0.1],
        "goal": [0.9, 0.9]
    }"#;

    #[test]
    fn parses_valid_scenario() {
        let w = parse_world(GOOD).unwrap();
        assert_eq!(w.obstacles.len(), 1);
        assert_eq!(w.x_init, State::new(0.1, 0.1));
        assert_eq!(w.x_goal, State::new(0.9, 0.9));
    }

    #[test]
    fn missing_field_error_names_it() {
        let err = parse_world(r#"{"bounds": {"xmin":0,"ymin":0,"xmax":1,"ymax":1}, "obstacles": [], "init": [0.1,0.1]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("goal"), "{err}");
    }

    #[test]
    fn init_inside_obstacle_rejected() {
        let text = GOOD.replace("[0.1, 0.1]", "[0.5, 0.5]");
        let err = parse_world(&text).unwrap_err();
        assert!(err.to_string().contains("init"), "{err}");
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let text = GOOD.replace(
            "[[[0.4, 0.4], [0.6, 0.4], [0.6, 0.6], [0.4, 0.6]]]",
            "[[[0.4, 0.4], [0.6, 0.4]]]",
        );
        let err = parse_world(&text).unwrap_err();
        assert!(err.to_string().contains("obstacles[0]"), "{err}");
    }

    #[test]
    fn self_intersecting_polygon_rejected() {
        let text = GOOD.replace(
            "[[[0.4, 0.4], [0.6, 0.4], [0.6, 0.6], [0.4, 0.6]]]",
            "[[[0.4, 0.4], [0.6, 0.6], [0.6, 0.4], [0.4, 0.6]]]",
        );
        let err = parse_world(&text).unwrap_err();
        assert!(err.to_string().contains("self-intersection"), "{err}");
    }

    #[test]
    fn document_round_trips() {
        let w = parse_world(GOOD).unwrap();
        let w2 = parse_world(&to_document(&w)).unwrap();
        assert_eq!(w, w2);
    }
}
