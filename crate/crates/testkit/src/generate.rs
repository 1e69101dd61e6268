use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tapdedup::{NetworkBundle, TimeInterval, VertexId, VertexKind};

/// Earliest start time of generated edges.
pub const BASE_TIME: i64 = 1980;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomBundleSpec {
    pub characters: usize,
    /// Each relation type `b{i}` gets its own entity type `t{i}`.
    pub entities_per_type: usize,
    pub relation_types: usize,
    /// Chance that a character links to a given entity; also the chance of
    /// each further parallel edge to it (at most three).
    pub edge_density: f64,
    /// Starts fall in `BASE_TIME..BASE_TIME + interval_span`, durations in
    /// `0..=interval_span / 4`.
    pub interval_span: i64,
    /// Generation stops once this many edges exist.
    pub max_edges: usize,
    pub seed: u64,
}

impl RandomBundleSpec {
    /// Small instances for oracle comparisons.
    pub fn small(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        RandomBundleSpec {
            characters: rng.gen_range(2..=6),
            entities_per_type: rng.gen_range(1..=3),
            relation_types: rng.gen_range(1..=4),
            edge_density: rng.gen_range(0.1..0.6),
            interval_span: rng.gen_range(1..=30),
            max_edges: 45,
            seed,
        }
    }
}

pub fn character_id(i: usize) -> VertexId {
    VertexId::new(format!("c{i:04}"))
}

pub fn generate(spec: &RandomBundleSpec) -> NetworkBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let betas: Vec<String> = (0..spec.relation_types).map(|i| format!("b{i}")).collect();
    let mut bundle = NetworkBundle::with_relation_types(&betas).expect("distinct relation types");
    for i in 0..spec.characters {
        bundle
            .add_vertex_with_id(
                character_id(i),
                VertexKind::Character,
                "person",
                &format!("Person {i}"),
            )
            .expect("fresh id");
    }
    let entity = |b: usize, j: usize| VertexId::new(format!("t{b}/e{j:03}"));
    for b in 0..spec.relation_types {
        for j in 0..spec.entities_per_type {
            bundle
                .add_vertex_with_id(
                    entity(b, j),
                    VertexKind::Entity,
                    &format!("t{b}"),
                    &format!("Entity {b}.{j}"),
                )
                .expect("fresh id");
        }
    }
    let span = spec.interval_span.max(1);
    for i in 0..spec.characters {
        for (b, beta) in betas.iter().enumerate() {
            for j in 0..spec.entities_per_type {
                let mut copies = 0;
                while copies < 3
                    && bundle.edge_count() < spec.max_edges
                    && rng.gen_bool(spec.edge_density)
                {
                    let start = BASE_TIME + rng.gen_range(0..span);
                    let end = start + rng.gen_range(0..=span / 4);
                    let interval = TimeInterval::new(start, end).expect("valid interval");
                    bundle
                        .add_edge(&character_id(i), &entity(b, j), beta, interval)
                        .expect("endpoints exist");
                    copies += 1;
                }
            }
        }
    }
    bundle
}
