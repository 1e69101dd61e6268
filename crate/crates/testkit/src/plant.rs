//! Planting known duplicates into a bundle.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tapdedup::{NetworkBundle, TemporalEdge, TimeInterval, VertexId, VertexKind};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlantMode {
    /// Same entities, same intervals.
    ExactClone,
    /// Same entities, every interval moved earlier by the same amount.
    TimeShifted,
    /// Identical except that one relation type links to other entities.
    PartialClone,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedPair {
    pub original: VertexId,
    pub duplicate: VertexId,
    pub mode: PlantMode,
}

impl PlantedPair {
    /// The pair as `(smaller id, larger id)`.
    pub fn ordered(&self) -> (VertexId, VertexId) {
        if self.original < self.duplicate {
            (self.original.clone(), self.duplicate.clone())
        } else {
            (self.duplicate.clone(), self.original.clone())
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlantError {
    #[error("asked for {wanted} plants but only {available} characters are eligible")]
    TooFew { wanted: usize, available: usize },
}

fn own_edges(bundle: &NetworkBundle, v: &VertexId) -> Vec<TemporalEdge> {
    let mut edges: Vec<TemporalEdge> = bundle
        .incident(v)
        .filter(|e| &e.character == v)
        .cloned()
        .collect();
    edges.sort_by_key(|e| e.id);
    edges
}

fn fresh_id(bundle: &NetworkBundle, base: &str) -> VertexId {
    (0..)
        .map(|n| VertexId::new(format!("{base}~dup{n}")))
        .find(|id| !bundle.contains_vertex(id))
        .expect("unbounded search")
}

/// Adds `k` duplicates of distinct characters that have edges in every
/// subnetwork.
/// Sources are drawn with `seed`; the input bundle is not modified.
pub fn plant_duplicates(
    bundle: &NetworkBundle,
    k: usize,
    mode: PlantMode,
    seed: u64,
) -> Result<(NetworkBundle, Vec<PlantedPair>), PlantError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eligible: Vec<VertexId> = bundle
        .characters()
        .into_iter()
        .map(|v| v.id.clone())
        // Active in every subnetwork, so a clone scores exactly 1 on the mean.
        .filter(|id| bundle.subnetworks().iter().all(|n| n.degree(id) > 0))
        .filter(|id| {
            mode != PlantMode::TimeShifted
                || own_edges(bundle, id)
                    .iter()
                    .all(|e| e.interval.start() >= 1)
        })
        .collect();
    if eligible.len() < k {
        return Err(PlantError::TooFew {
            wanted: k,
            available: eligible.len(),
        });
    }
    eligible.shuffle(&mut rng);
    eligible.truncate(k);
    eligible.sort();

    let mut out = bundle.clone();
    let mut planted = Vec::with_capacity(k);
    for original in eligible {
        let source = bundle
            .vertex(&original)
            .expect("eligible ids exist")
            .clone();
        let edges = own_edges(bundle, &original);
        let duplicate = fresh_id(&out, original.as_str());
        out.add_vertex_with_id(
            duplicate.clone(),
            VertexKind::Character,
            &source.type_label,
            &source.display_name,
        )
        .expect("fresh id");

        let copies: Vec<(VertexId, String, TimeInterval)> = match mode {
            PlantMode::ExactClone => edges
                .iter()
                .map(|e| (e.entity.clone(), e.relation_type.clone(), e.interval))
                .collect(),
            PlantMode::TimeShifted => {
                let earliest = edges
                    .iter()
                    .map(|e| e.interval.start())
                    .min()
                    .expect("non-empty");
                let d = rng.gen_range(1..=earliest.min(5));
                edges
                    .iter()
                    .map(|e| {
                        let iv = e.interval.shifted(-d).expect("stays non-negative");
                        (e.entity.clone(), e.relation_type.clone(), iv)
                    })
                    .collect()
            }
            PlantMode::PartialClone => {
                let betas: Vec<&str> = {
                    let mut b: Vec<&str> = edges.iter().map(|e| e.relation_type.as_str()).collect();
                    b.dedup();
                    b.sort();
                    b.dedup();
                    b
                };
                let target = *betas.choose(&mut rng).expect("non-empty");
                let neighbors: HashSet<&VertexId> = edges.iter().map(|e| &e.entity).collect();
                let mut replaced = Vec::new();
                for e in &edges {
                    if e.relation_type != target {
                        replaced.push((e.entity.clone(), e.relation_type.clone(), e.interval));
                        continue;
                    }
                    let label = &bundle.vertex(&e.entity).expect("endpoint").type_label;
                    let pool: Vec<VertexId> = out
                        .vertices()
                        .iter()
                        .filter(|v| v.kind == VertexKind::Entity && &v.type_label == label)
                        .map(|v| v.id.clone())
                        .filter(|id| !neighbors.contains(id))
                        .collect();
                    let entity = match pool.choose(&mut rng) {
                        Some(z) => z.clone(),
                        None => {
                            let z = fresh_id(&out, e.entity.as_str());
                            out.add_vertex_with_id(z.clone(), VertexKind::Entity, label, "planted")
                                .expect("fresh id");
                            z
                        }
                    };
                    replaced.push((entity, e.relation_type.clone(), e.interval));
                }
                replaced
            }
        };
        for (entity, beta, interval) in copies {
            out.add_edge(&duplicate, &entity, &beta, interval)
                .expect("endpoints exist");
        }
        planted.push(PlantedPair {
            original,
            duplicate,
            mode,
        });
    }
    Ok((out, planted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, RandomBundleSpec};

    #[test]
    fn too_many_plants_is_an_error() {
        let b = generate(&RandomBundleSpec::small(3));
        let n = b.character_count();
        assert!(matches!(
            plant_duplicates(&b, n + 1, PlantMode::ExactClone, 0),
            Err(PlantError::TooFew { .. })
        ));
    }

    #[test]
    fn plants_are_reproducible_and_fresh() {
        let b = generate(&RandomBundleSpec {
            characters: 30,
            entities_per_type: 5,
            relation_types: 2,
            edge_density: 0.3,
            interval_span: 10,
            max_edges: usize::MAX,
            seed: 9,
        });
        let (b1, p1) = plant_duplicates(&b, 5, PlantMode::PartialClone, 4).unwrap();
        let (b2, p2) = plant_duplicates(&b, 5, PlantMode::PartialClone, 4).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(b1.edges(), b2.edges());
        for p in &p1 {
            assert!(!b.contains_vertex(&p.duplicate));
            assert!(b1.contains_vertex(&p.duplicate));
        }
        assert_eq!(b1.character_count(), 35);
    }
}
