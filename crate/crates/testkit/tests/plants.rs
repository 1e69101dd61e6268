use tapdedup::structure::structure_error;
use tapdedup::tap::simtap_beta;
use tapdedup::{simtap, TemporalEdge};
use tapdedup_testkit::{generate, oracle_simtap, plant_duplicates, PlantMode, RandomBundleSpec};

fn spec(seed: u64) -> RandomBundleSpec {
    RandomBundleSpec {
        characters: 40,
        entities_per_type: 8,
        relation_types: 3,
        edge_density: 0.2,
        interval_span: 20,
        max_edges: usize::MAX,
        seed,
    }
}

#[test]
fn exact_clones_are_zero_error_and_fully_similar() {
    for seed in 0..20 {
        let base = generate(&spec(seed));
        let (b, planted) = plant_duplicates(&base, 5, PlantMode::ExactClone, seed).unwrap();
        let now = b.max_end().unwrap();
        for p in &planted {
            assert!(structure_error(&b, &p.original, &p.duplicate)
                .unwrap()
                .is_zero());
            assert_eq!(
                simtap(&b, &p.original, &p.duplicate, now).unwrap().simtap,
                1.0
            );
            for net in b.subnetworks() {
                let s = simtap_beta(net, &p.original, &p.duplicate, now).unwrap();
                assert_eq!(s, 1.0);
            }
        }
    }
}

#[test]
fn time_shifted_plants_screen_but_score_below_one() {
    for seed in 0..20 {
        let base = generate(&spec(seed));
        let (b, planted) = plant_duplicates(&base, 5, PlantMode::TimeShifted, seed).unwrap();
        let now = b.max_end().unwrap();
        for p in &planted {
            assert!(structure_error(&b, &p.original, &p.duplicate)
                .unwrap()
                .is_zero());
            let s = simtap(&b, &p.original, &p.duplicate, now).unwrap().simtap;
            assert!(s < 1.0);
            assert!(oracle_simtap(&b, &p.original, &p.duplicate, now).unwrap() < 1.0);
        }
    }
}

#[test]
fn partial_clones_fail_screening() {
    for seed in 0..20 {
        let base = generate(&spec(seed));
        let (b, planted) = plant_duplicates(&base, 5, PlantMode::PartialClone, seed).unwrap();
        for p in &planted {
            assert!(
                structure_error(&b, &p.original, &p.duplicate)
                    .unwrap()
                    .value
                    > 0.0
            );
        }
    }
}

#[test]
fn scaling_one_side_breaks_maximality() {
    // stretch every interval of the clone; weights grow, vectors no longer match
    let base = generate(&spec(3));
    let (b, planted) = plant_duplicates(&base, 3, PlantMode::ExactClone, 3).unwrap();
    let now = b.max_end().unwrap() + 10;
    let mut stretched = b.empty_like();
    for v in b.vertices() {
        stretched
            .add_vertex_with_id(v.id.clone(), v.kind, &v.type_label, &v.display_name)
            .unwrap();
    }
    let dups: Vec<_> = planted.iter().map(|p| &p.duplicate).collect();
    for e in b.edges() {
        let mut e: TemporalEdge = e.clone();
        if dups.contains(&&e.character) {
            e.interval =
                tapdedup::TimeInterval::new(e.interval.start(), e.interval.end() + 1).unwrap();
        }
        stretched.insert_edge(e).unwrap();
    }
    for p in &planted {
        for net in stretched.subnetworks() {
            if net.degree(&p.original) > 0 {
                assert!(simtap_beta(net, &p.original, &p.duplicate, now).unwrap() < 1.0);
            }
        }
    }
}
