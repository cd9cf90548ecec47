use blockcheck_core::model::{InputValue, LiteralKind, Primitive, ShadowKind};
use blockcheck_core::{parse_project, validate, LoadError, Warning};
use serde_json::{json, Value};

const MINIMAL: &str = r#"{"targets":[{"isStage":true,"name":"Stage","blocks":{},"broadcasts":{},"variables":{},"lists":{}}],"meta":{"semver":"3.0.0"}}"#;

fn project(sprites: Value) -> Vec<u8> {
    let mut targets = vec![json!({"isStage": true, "name": "Stage", "blocks": {}})];
    targets.extend(sprites.as_array().unwrap().iter().cloned());
    serde_json::to_vec(&json!({"targets": targets, "meta": {"semver": "3.0.0"}})).unwrap()
}

#[test]
fn minimal_project_has_one_empty_stage() {
    let p = parse_project(MINIMAL.as_bytes()).unwrap();
    assert_eq!(p.targets.len(), 1);
    assert!(p.stage().is_stage);
    assert_eq!(p.stage().blocks.len(), 0);
    assert!(validate(&p).is_empty());
}

#[test]
fn byte_order_mark_is_accepted() {
    let mut bytes = vec![0xEF, 0xBB, 0xBF];
    bytes.extend_from_slice(MINIMAL.as_bytes());
    assert!(parse_project(&bytes).is_ok());
}

#[test]
fn dangling_next_names_the_missing_id() {
    let bytes = project(json!([{
        "isStage": false, "name": "Sprite1",
        "blocks": {"a": {"opcode": "event_whenflagclicked", "next": "deadbeef", "parent": null,
                         "inputs": {}, "fields": {}, "shadow": false, "topLevel": true}}
    }]));
    assert_eq!(parse_project(&bytes), Err(LoadError::DanglingReference("deadbeef".into())));
}

#[test]
fn dangling_input_reference_is_reported() {
    let bytes = project(json!([{
        "isStage": false, "name": "Sprite1",
        "blocks": {"a": {"opcode": "control_if", "next": null, "parent": null,
                         "inputs": {"CONDITION": [2, "gone"]}, "fields": {}, "shadow": false, "topLevel": true}}
    }]));
    assert_eq!(parse_project(&bytes), Err(LoadError::DanglingReference("gone".into())));
}

#[test]
fn load_errors_are_classified() {
    assert!(matches!(parse_project(b"{\"targets\": ["), Err(LoadError::MalformedJson(_))));
    assert!(matches!(parse_project(b"not json"), Err(LoadError::MalformedJson(_))));
    assert!(matches!(parse_project(b"{}"), Err(LoadError::NotScratch3(_))));
    assert!(matches!(parse_project(b"[1,2,3]"), Err(LoadError::NotScratch3(_))));
    // Scratch 2 layout: objName/children instead of targets.
    let sb2 = br#"{"objName":"Stage","children":[],"info":{}}"#;
    assert!(matches!(parse_project(sb2), Err(LoadError::NotScratch3(_))));
    let old = br#"{"targets":[{"isStage":true,"name":"Stage","blocks":{}}],"meta":{"semver":"2.0.0"}}"#;
    assert!(matches!(parse_project(old), Err(LoadError::NotScratch3(_))));
    let two_stages = br#"{"targets":[{"isStage":true,"name":"A","blocks":{}},{"isStage":true,"name":"B","blocks":{}}],"meta":{"semver":"3.0.0"}}"#;
    assert!(matches!(parse_project(two_stages), Err(LoadError::NotScratch3(_))));
}

#[test]
fn duplicate_sprite_names_warn() {
    let sprite = json!({"isStage": false, "name": "Sprite1", "blocks": {}});
    let p = parse_project(&project(json!([sprite.clone(), sprite]))).unwrap();
    assert_eq!(validate(&p), vec![Warning::DuplicateTargetName { name: "Sprite1".into() }]);
}

#[test]
fn parentless_shadow_warns() {
    let p = parse_project(&project(json!([{
        "isStage": false, "name": "Sprite1",
        "blocks": {"m": {"opcode": "motion_goto_menu", "next": null, "parent": null, "inputs": {},
                         "fields": {"TO": ["_random_", null]}, "shadow": true, "topLevel": true}}
    }])))
    .unwrap();
    assert!(validate(&p).contains(&Warning::OrphanShadow {
        target: "Sprite1".into(),
        block: "m".into()
    }));
}

#[test]
fn clone_menu_naming_a_missing_sprite_warns() {
    let p = parse_project(&project(json!([{
        "isStage": false, "name": "Sprite1",
        "blocks": {
            "c": {"opcode": "control_create_clone_of", "next": null, "parent": null,
                  "inputs": {"CLONE_OPTION": [1, "m"]}, "fields": {}, "shadow": false, "topLevel": true},
            "m": {"opcode": "control_create_clone_of_menu", "next": null, "parent": "c", "inputs": {},
                  "fields": {"CLONE_OPTION": ["Ghost", null]}, "shadow": true, "topLevel": false}
        }
    }])))
    .unwrap();
    assert_eq!(
        validate(&p),
        vec![Warning::UnresolvedTargetReference {
            target: "Sprite1".into(),
            block: "m".into(),
            name: "Ghost".into()
        }]
    );
}

#[test]
fn compact_primitives_decode_with_their_kind() {
    let p = parse_project(&project(json!([{
        "isStage": false, "name": "Sprite1",
        "blocks": {
            "s": {"opcode": "looks_say", "next": null, "parent": null, "shadow": false, "topLevel": true,
                  "inputs": {"MESSAGE": [3, [12, "score", "v1"], [10, "Hello!"]], "COLOUR": [1, [9, "#ff00aa"]]},
                  "fields": {}},
            "loose": [13, "items", "l1", 100, 200]
        }
    }])))
    .unwrap();
    let sprite = p.target("Sprite1").unwrap();
    let say = sprite.blocks.get("s").unwrap();
    let message = say.input("MESSAGE").unwrap();
    assert_eq!(message.kind, ShadowKind::ObscuredShadow);
    assert!(matches!(&message.value, Some(InputValue::Primitive(Primitive::Variable { name, .. })) if name == "score"));
    match &say.input("COLOUR").unwrap().value {
        Some(InputValue::Primitive(Primitive::Literal(lit))) => {
            assert_eq!(lit.kind, LiteralKind::Color);
            assert_eq!(lit.value, "#ff00aa");
        }
        other => panic!("{other:?}"),
    }
    let loose = sprite.blocks.get("loose").unwrap();
    assert_eq!(loose.opcode, "data_listcontents");
    assert!(loose.top_level);
}

#[test]
fn unknown_fields_and_opcodes_survive() {
    let p = parse_project(&project(json!([{
        "isStage": false, "name": "Sprite1", "someFutureField": {"x": 1},
        "blocks": {"a": {"opcode": "music_playDrumForBeats", "next": null, "parent": null,
                         "inputs": {"DRUM": [1, "d"], "BEATS": [1, [4, "0.25"]]}, "fields": {},
                         "shadow": false, "topLevel": true},
                   "d": {"opcode": "music_menu_DRUM", "next": null, "parent": "a", "inputs": {},
                         "fields": {"DRUM": ["1", null]}, "shadow": true, "topLevel": false}}
    }])))
    .unwrap();
    assert_eq!(p.target("Sprite1").unwrap().blocks.get("a").unwrap().opcode, "music_playDrumForBeats");
}

#[test]
fn shipped_fixtures_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut n = 0;
    for kind in ["patterns", "programs"] {
        for entry in walk(&dir.join(kind)) {
            let p = parse_project(&std::fs::read(&entry).unwrap()).unwrap();
            assert_eq!(parse_project(p.to_json().as_bytes()).unwrap(), p, "{}", entry.display());
            n += 1;
        }
    }
    assert_eq!(n, 52);
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else if path.extension().is_some_and(|x| x == "json") {
            out.push(path);
        }
    }
    out.sort();
    out
}
