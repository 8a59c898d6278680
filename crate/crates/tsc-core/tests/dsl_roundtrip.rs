//! Parser/serializer tests: round-trip structural equality over the
//! bundled fixture corpus, byte-stable double serialization, unit
//! normalization, and diagnostics.

use tsc_core::dsl::{parse_spec, serialize_spec};

fn fixtures() -> Vec<(String, String)> {
    let dir = format!("{}/fixtures", env!("CARGO_MANIFEST_DIR"));
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("tsc") {
            out.push((
                path.file_name().unwrap().to_string_lossy().to_string(),
                std::fs::read_to_string(&path).unwrap(),
            ));
        }
    }
    assert!(out.len() >= 4, "fixture corpus present");
    out
}

#[test]
fn roundtrip_structural_equality_on_corpus() {
    for (name, text) in fixtures() {
        let parsed =
            parse_spec(&text, &name).unwrap_or_else(|d| panic!("{} does not parse: {:?}", name, d));
        let printed = serialize_spec(&parsed);
        let reparsed = parse_spec(&printed, &name).unwrap_or_else(|d| {
            panic!(
                "{} serialization does not parse: {:?}\n{}",
                name, d, printed
            )
        });
        assert_eq!(parsed, reparsed, "{} round trip differs", name);
    }
}

#[test]
fn double_serialization_is_byte_stable() {
    for (name, text) in fixtures() {
        let parsed = parse_spec(&text, &name).unwrap();
        let once = serialize_spec(&parsed);
        let twice = serialize_spec(&parse_spec(&once, &name).unwrap());
        assert_eq!(once, twice, "{} serialization not stable", name);
    }
}

#[test]
fn empty_specification_serializes_to_header_only() {
    let spec = tsc_core::spec::Specification::empty();
    let text = serialize_spec(&spec);
    // canonical world header and nothing else
    assert!(text.starts_with("world {"));
    assert!(!text.contains("objects"));
    assert!(!text.contains("tsc "));
    let reparsed = parse_spec(&text, "empty.tsc").unwrap();
    assert_eq!(spec, reparsed);
}

#[test]
fn minimal_tsc_specification() {
    let spec = parse_spec(
        "objects { carI: Car; }\n\
         view SpeedCap { constraint carI.v < 33.3; }\n\
         tsc Minimal {\n\
           use carI;\n\
           future = inv(SpeedCap);\n\
         }\n",
        "minimal.tsc",
    )
    .unwrap();
    assert_eq!(spec.tscs.len(), 1);
    let t = &spec.tscs[0];
    assert_eq!(t.history, tsc_core::chart::BasicChart::Empty);
    assert_eq!(t.consequence, tsc_core::chart::BasicChart::Empty);
}

#[test]
fn undeclared_symbol_is_reported_with_location() {
    let err = parse_spec(
        "objects { carI: Car; }\n\
         view V { constraint carK.v < 10; }\n",
        "bad.tsc",
    )
    .unwrap_err();
    let rendered: Vec<String> = err.iter().map(|d| d.to_string()).collect();
    assert!(
        rendered
            .iter()
            .any(|m| m.contains("undeclared symbol carK")),
        "{:?}",
        rendered
    );
    assert!(rendered.iter().all(|m| m.starts_with("bad.tsc:")));
}

#[test]
fn duplicate_declaration_is_an_error() {
    let err = parse_spec("objects { carI: Car; carI: Car; }\n", "dup.tsc").unwrap_err();
    assert!(err
        .iter()
        .any(|d| d.message.contains("duplicate declaration of 'carI'")));
}

#[test]
fn pin_label_twice_in_one_annotation_is_an_error() {
    let err = parse_spec(
        "objects { carI: Car; }\n\
         view V { constraint carI.v < 10; }\n\
         chart C = sync[p, p]( inv(V) );\n",
        "pins.tsc",
    )
    .unwrap_err();
    assert!(err.iter().any(|d| d.message.contains("declared twice")));
}

#[test]
fn unit_mismatch_is_an_error() {
    let err = parse_spec(
        "objects { carI: Car; }\n\
         view V { constraint carI.v < 10 m; }\n",
        "units.tsc",
    )
    .unwrap_err();
    assert!(err.iter().any(|d| d.message.contains("unit mismatch")));
}

#[test]
fn kmh_normalizes_to_si() {
    let spec = parse_spec(
        "objects { carI: Car; }\n\
         view V { constraint carI.v < 120 kmh; }\n",
        "kmh.tsc",
    )
    .unwrap();
    let atom = &spec.views[0].root.constraints[0];
    let approx = tsc_core::checksat::rat_to_f64(&atom.rhs);
    assert!((approx - 33.33).abs() < 1e-2, "got {}", approx);
}

#[test]
fn diagnostics_format() {
    let err = parse_spec("objects {", "frag.tsc").unwrap_err();
    let line = err[0].to_string();
    // file:line:col: severity: message
    assert!(line.starts_with("frag.tsc:1:"), "{}", line);
    assert!(line.contains(": error: "), "{}", line);
}
