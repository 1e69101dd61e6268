//! Shared fixtures.

use tapdedup::ingest::{load_from_reader, DatasetManifest, LoadOptions};
use tapdedup::{NetworkBundle, TimeInterval, VertexKind};

/// Education, work, project and publication rows for the Wu and Zhu pairs.
pub const ACTIVITY_TABLES_CSV: &str = include_str!("../../core/tests/fixtures/activity_tables.csv");
pub const ACTIVITY_MANIFEST_JSON: &str = include_str!("../../core/tests/fixtures/manifest.json");

/// Reference time the tables are read at.
pub const TABLES_NOW: i64 = 2014;

pub fn activity_tables() -> NetworkBundle {
    let manifest: DatasetManifest =
        serde_json::from_str(ACTIVITY_MANIFEST_JSON).expect("fixture manifest parses");
    let (bundle, _) = load_from_reader(
        ACTIVITY_TABLES_CSV.as_bytes(),
        Some(&manifest),
        LoadOptions { strict: true },
    )
    .expect("fixture loads");
    bundle
}

/// Two characters and two clubs in one subnetwork: `v1` has edges r1, r2
/// to `c1` and r3 to `c2`; `v2` has r4 to `c1` and r5 to `c2`.
pub fn instance_one() -> NetworkBundle {
    let mut b = NetworkBundle::new();
    for id in ["v1", "v2"] {
        b.add_vertex_with_id(id, VertexKind::Character, "person", id)
            .expect("fresh id");
    }
    for id in ["c1", "c2"] {
        b.add_vertex_with_id(id, VertexKind::Entity, "club", id)
            .expect("fresh id");
    }
    let iv = TimeInterval::new(2000, 2001).expect("valid");
    for (v, c) in [
        ("v1", "c1"),
        ("v1", "c1"),
        ("v1", "c2"),
        ("v2", "c1"),
        ("v2", "c2"),
    ] {
        b.add_edge(&v.into(), &c.into(), "member", iv)
            .expect("endpoints exist");
    }
    b
}
