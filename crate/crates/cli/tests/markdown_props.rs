use friendlab_cli::report::{flatten, markdown, parse_markdown_rows};
use proptest::prelude::*;
use serde_json::{json, Map, Value};

fn leaf() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::from),
        any::<i64>().prop_map(Value::from),
        (-1e6f64..1e6).prop_map(Value::from),
        "[ -~]{0,8}".prop_map(Value::from),
    ]
}

fn value() -> impl Strategy<Value = Value> {
    leaf().prop_recursive(4, 32, 5, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..5).prop_map(Value::Array),
            prop::collection::btree_map("[a-z~/|. -]{0,6}", inner, 0..5)
                .prop_map(|m| Value::Object(m.into_iter().collect::<Map<_, _>>())),
        ]
    })
}

proptest! {
    #[test]
    fn every_markdown_row_matches_its_pointer(config in value(), section in value()) {
        let report = json!({
            "schema": "friendlab-report/1",
            "command": "predict",
            "config": config,
            "sections": {"predictions": section},
        });
        let mut leaves = Vec::new();
        flatten("/config", &report["config"], &mut leaves);
        flatten("/sections/predictions", &report["sections"]["predictions"], &mut leaves);
        let rows = parse_markdown_rows(&markdown(&report));
        prop_assert_eq!(rows.len(), leaves.len());
        for (path, v) in rows {
            prop_assert_eq!(report.pointer(&path), Some(&v), "{}", path);
        }
    }
}
