//! The shipped JSON schemas and the engine must agree: everything the tool
//! emits validates, and the malformed configs the engine rejects fail the
//! schema too.

use std::fs;
use std::path::Path;

use compop::scenario::{preset_config, run_analyze, run_scenario, ScenarioConfig, SCENARIO_NAMES};
use jsonschema::Validator;
use serde_json::{json, Value};

fn schema(name: &str) -> Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(name);
    let raw = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    jsonschema::validator_for(&serde_json::from_str(&raw).unwrap())
        .unwrap_or_else(|e| panic!("compiling {name}: {e}"))
}

fn assert_valid(validator: &Validator, instance: &Value, what: &str) {
    if let Err(error) = validator.validate(instance) {
        panic!("{what} failed validation at {}: {error}", error.instance_path());
    }
}

#[test]
fn all_schemas_compile() {
    for name in [
        "map-expr.schema.json",
        "inner-function.schema.json",
        "scenario-config.schema.json",
        "verdict.schema.json",
    ] {
        schema(name);
    }
}

#[test]
fn preset_configs_validate_against_every_owning_schema() {
    let config_schema = schema("scenario-config.schema.json");
    let map_schema = schema("map-expr.schema.json");
    let inner_schema = schema("inner-function.schema.json");
    for name in SCENARIO_NAMES {
        let config = preset_config(name).unwrap();
        let value = serde_json::to_value(&config).unwrap();
        assert_valid(&config_schema, &value, name);
        assert_valid(&map_schema, &value["phi"], &format!("{name} phi"));
        assert_valid(&inner_schema, &value["theta"], &format!("{name} theta"));
    }
}

#[test]
fn emitted_documents_validate() {
    let config_schema = schema("scenario-config.schema.json");
    let verdict_schema = schema("verdict.schema.json");
    for name in SCENARIO_NAMES {
        let bundle = run_scenario(name).unwrap();
        let config: Value = serde_json::from_str(&bundle.config_json).unwrap();
        assert_valid(&config_schema, &config, &format!("{name} emitted config"));
        let verdict: Value = serde_json::from_str(&bundle.verdict_json).unwrap();
        assert_valid(&verdict_schema, &verdict, &format!("{name} verdict"));
    }
}

#[test]
fn rejected_configs_fail_the_schema_and_the_engine() {
    let config_schema = schema("scenario-config.schema.json");
    let base = serde_json::to_value(preset_config("paley-wiener-small").unwrap()).unwrap();

    let mut unknown_kind = base.clone();
    unknown_kind["phi"] = json!({"kind": "exponential", "c": [0.5, 0.0]});

    let mut missing_coefficient = base.clone();
    missing_coefficient["phi"] =
        json!({"kind": "moebius", "a": [2.0, 0.0], "b": [0.0, 0.0], "c": [-1.0, 0.0]});

    let mut lopsided_complex = base.clone();
    lopsided_complex["phi"] = json!({"kind": "scale", "c": [0.5]});

    let mut shallow_sweep = base.clone();
    shallow_sweep["sweep"]["depth"] = json!(4);

    let mut unknown_family = base.clone();
    unknown_family["theta"]["family"] =
        json!({"name": "geometric", "params": {"count": 5}});

    for (what, bad) in [
        ("unknown map kind", unknown_kind),
        ("moebius without d", missing_coefficient),
        ("one-component complex", lopsided_complex),
        ("shallow sweep", shallow_sweep),
        ("unknown zero family", unknown_family),
    ] {
        assert!(
            config_schema.validate(&bad).is_err(),
            "{what}: schema accepted it"
        );
        let engine = serde_json::from_value::<ScenarioConfig>(bad)
            .map_err(|e| e.to_string())
            .and_then(|config| {
                config.validate().map_err(|e| e.to_string())?;
                Ok(())
            });
        assert!(engine.is_err(), "{what}: engine accepted it");
    }
}

#[test]
fn refined_runs_still_validate() {
    let verdict_schema = schema("verdict.schema.json");
    let mut config = preset_config("paley-wiener-small").unwrap();
    config.refine = 1;
    config.sweep.angles = 32;
    config.boundary_grid = 1024;
    let bundle = run_analyze(&config).unwrap();
    let verdict: Value = serde_json::from_str(&bundle.verdict_json).unwrap();
    assert_valid(&verdict_schema, &verdict, "refined verdict");
}
