use guardnet::bundle::export_dot;
use guardnet::fixtures;
use guardnet::internalize::internalize;

const GOLDEN: &str = include_str!("golden/fixture_a_internalized.dot");

#[test]
fn internalized_fixture_a_matches_golden() {
    let i = internalize(&fixtures::fixture_a()).unwrap();
    let dot = export_dot(&i.net, Some(&i.projection));
    if std::env::var_os("GUARDNET_BLESS").is_some() {
        std::fs::write(
            concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/fixture_a_internalized.dot"),
            &dot,
        )
        .unwrap();
        return;
    }
    assert_eq!(dot, GOLDEN);
}

#[test]
fn golden_has_expected_shape() {
    let places = GOLDEN.lines().filter(|l| l.contains("shape=circle")).count();
    let transitions = GOLDEN.lines().filter(|l| l.contains("shape=box")).count();
    let clusters = GOLDEN
        .lines()
        .filter(|l| l.trim_start().starts_with("subgraph cluster_"))
        .count();
    assert_eq!((places, clusters, transitions), (7, 3, 3));
}
